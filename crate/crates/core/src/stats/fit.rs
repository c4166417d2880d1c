use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::report::{fmt_f64, Table};

/// Minimum number of scales for an exponent fit.
pub const MIN_SCALES: usize = 4;

/// Ordinary least squares fit of `ln y = intercept + slope ln x`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ExponentFit {
    pub scales: Vec<(f64, f64)>,
    pub slope: f64,
    pub intercept: f64,
    /// Standard error of the slope from the fit residuals.
    pub stderr: f64,
    pub residuals: Vec<f64>,
}

impl ExponentFit {
    pub fn fit(scales: &[(f64, f64)]) -> Result<Self> {
        if scales.len() < MIN_SCALES {
            return invalid(format!("an exponent fit needs at least {MIN_SCALES} scales, got {}", scales.len()));
        }
        if scales.iter().any(|&(x, _)| !(x > 0.0) || !x.is_finite()) {
            return invalid("scales must be positive");
        }
        if scales.iter().any(|&(_, y)| !(y > 0.0) || !y.is_finite()) {
            return Err(Error::Degenerate("values must be positive and finite for a log-log fit".into()));
        }
        let n = scales.len() as f64;
        let lx: Vec<f64> = scales.iter().map(|p| p.0.ln()).collect();
        let ly: Vec<f64> = scales.iter().map(|p| p.1.ln()).collect();
        let mx = lx.iter().sum::<f64>() / n;
        let my = ly.iter().sum::<f64>() / n;
        let sxx: f64 = lx.iter().map(|x| (x - mx) * (x - mx)).sum();
        if sxx == 0.0 {
            return invalid("scales must not all be equal");
        }
        let sxy: f64 = lx.iter().zip(&ly).map(|(x, y)| (x - mx) * (y - my)).sum();
        let slope = sxy / sxx;
        let intercept = my - slope * mx;
        let residuals: Vec<f64> = lx.iter().zip(&ly).map(|(x, y)| y - intercept - slope * x).collect();
        let ssr: f64 = residuals.iter().map(|r| r * r).sum();
        let stderr = (ssr / (n - 2.0) / sxx).sqrt();
        Ok(ExponentFit {
            scales: scales.to_vec(),
            slope,
            intercept,
            stderr,
            residuals,
        })
    }

    /// Whether the slope lies in `target ± tol`.
    pub fn within(&self, target: f64, tol: f64) -> bool {
        (self.slope - target).abs() <= tol
    }

    pub fn table(&self) -> Table {
        let mut t = Table::new(&["x", "y", "residual"]);
        for (&(x, y), r) in self.scales.iter().zip(&self.residuals) {
            t.push(vec![fmt_f64(x), fmt_f64(y), fmt_f64(*r)]);
        }
        t
    }
}
