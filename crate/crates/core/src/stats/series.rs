use serde::{Deserialize, Serialize};

/// Largest number of batches per chain used for the batch-means error.
pub const MAX_BATCHES: usize = 32;

/// Mean with a standard error.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Estimate {
    pub mean: f64,
    pub stderr: f64,
    pub n_samples: usize,
}

impl Estimate {
    /// Difference in units of the combined standard error.
    pub fn z_distance(&self, other: &Estimate) -> f64 {
        (self.mean - other.mean).abs() / self.stderr.hypot(other.stderr)
    }
}

/// Per-chain time series of a scalar observable.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct ScalarSeries {
    chains: Vec<Vec<f64>>,
}

impl ScalarSeries {
    pub fn new() -> Self {
        ScalarSeries { chains: vec![Vec::new()] }
    }

    /// Series with the given per-chain values.
    pub fn from_chains(chains: Vec<Vec<f64>>) -> Self {
        ScalarSeries {
            chains: chains.into_iter().filter(|c| !c.is_empty()).collect(),
        }
    }

    pub fn push(&mut self, x: f64) {
        if self.chains.is_empty() {
            self.chains.push(Vec::new());
        }
        self.chains.last_mut().expect("one chain").push(x);
    }

    /// Append the chains of `other`.
    pub fn merge(&mut self, other: ScalarSeries) {
        self.chains.retain(|c| !c.is_empty());
        self.chains.extend(other.chains.into_iter().filter(|c| !c.is_empty()));
    }

    pub fn len(&self) -> usize {
        self.chains.iter().map(Vec::len).sum()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn values(&self) -> impl Iterator<Item = f64> + '_ {
        self.chains.iter().flatten().copied()
    }

    pub fn mean(&self) -> f64 {
        let n = self.len();
        if n == 0 {
            return f64::NAN;
        }
        self.values().sum::<f64>() / n as f64
    }

    /// Batch means within every chain, in chain order.
    pub fn batch_means(&self) -> Vec<f64> {
        let mut out = Vec::new();
        for c in &self.chains {
            let b = MAX_BATCHES.min(c.len());
            if b == 0 {
                continue;
            }
            let size = c.len() / b;
            for i in 0..b {
                let chunk = &c[i * size..(i + 1) * size];
                out.push(chunk.iter().sum::<f64>() / size as f64);
            }
        }
        out
    }

    /// Mean with the batch-means standard error (NaN with fewer than two batches).
    pub fn estimate(&self) -> Estimate {
        let bm = self.batch_means();
        let k = bm.len();
        let stderr = if k < 2 {
            f64::NAN
        } else {
            let mu = bm.iter().sum::<f64>() / k as f64;
            let var = bm.iter().map(|x| (x - mu) * (x - mu)).sum::<f64>() / (k - 1) as f64;
            (var / k as f64).sqrt()
        };
        Estimate {
            mean: self.mean(),
            stderr,
            n_samples: self.len(),
        }
    }
}

/// Estimate of `mean(a) / mean(b)` for paired series, with a batch-means error on the
/// ratio of batch means.
pub fn ratio_estimate(a: &ScalarSeries, b: &ScalarSeries) -> Estimate {
    let (ma, mb) = (a.batch_means(), b.batch_means());
    let r = a.mean() / b.mean();
    let k = ma.len().min(mb.len());
    let stderr = if k < 2 {
        f64::NAN
    } else {
        let bm_b = b.mean();
        // linearised ratio residuals
        let res: Vec<f64> = (0..k).map(|i| (ma[i] - r * mb[i]) / bm_b).collect();
        let mu = res.iter().sum::<f64>() / k as f64;
        let var = res.iter().map(|x| (x - mu) * (x - mu)).sum::<f64>() / (k - 1) as f64;
        (var / k as f64).sqrt()
    };
    Estimate {
        mean: r,
        stderr,
        n_samples: a.len(),
    }
}
