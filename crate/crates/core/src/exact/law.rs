use std::collections::HashMap;
use std::hash::Hash;

use crate::error::{Error, Result};

/// Probability law with finite support; support entries are distinct and weights sum to one.
#[derive(Clone, Debug)]
pub struct FiniteLaw<X> {
    support: Vec<X>,
    prob: Vec<f64>,
}

impl<X: Clone + Eq + Hash> FiniteLaw<X> {
    /// Normalise non-negative weights, merging repeated outcomes and dropping zeros.
    pub fn from_weights(items: impl IntoIterator<Item = (X, f64)>) -> Result<Self> {
        let mut index: HashMap<X, usize> = HashMap::new();
        let mut support = Vec::new();
        let mut weight: Vec<f64> = Vec::new();
        for (x, w) in items {
            if !(w >= 0.0) || !w.is_finite() {
                return Err(Error::InvalidArgument(format!("bad weight {w}")));
            }
            if w == 0.0 {
                continue;
            }
            match index.get(&x) {
                Some(&i) => weight[i] += w,
                None => {
                    index.insert(x.clone(), support.len());
                    support.push(x);
                    weight.push(w);
                }
            }
        }
        let total: f64 = weight.iter().sum();
        if !(total > 0.0) {
            return Err(Error::Degenerate("total weight is zero".into()));
        }
        Ok(FiniteLaw {
            support,
            prob: weight.into_iter().map(|w| w / total).collect(),
        })
    }

    pub fn point_mass(x: X) -> Self {
        FiniteLaw {
            support: vec![x],
            prob: vec![1.0],
        }
    }

    pub fn len(&self) -> usize {
        self.support.len()
    }

    pub fn is_empty(&self) -> bool {
        self.support.is_empty()
    }

    pub fn support(&self) -> &[X] {
        &self.support
    }

    pub fn probs(&self) -> &[f64] {
        &self.prob
    }

    pub fn iter(&self) -> impl Iterator<Item = (&X, f64)> {
        self.support.iter().zip(self.prob.iter().copied())
    }

    pub fn prob_of(&self, x: &X) -> f64 {
        self.iter().filter(|(y, _)| *y == x).map(|(_, p)| p).sum()
    }

    pub fn probability(&self, mut event: impl FnMut(&X) -> bool) -> f64 {
        self.iter().filter(|(x, _)| event(x)).map(|(_, p)| p).sum()
    }

    pub fn expectation(&self, mut f: impl FnMut(&X) -> f64) -> f64 {
        self.iter().map(|(x, p)| p * f(x)).sum()
    }

    /// Push-forward under `f`.
    pub fn map<Y: Clone + Eq + Hash>(&self, mut f: impl FnMut(&X) -> Y) -> FiniteLaw<Y> {
        FiniteLaw::from_weights(self.iter().map(|(x, p)| (f(x), p)))
            .expect("push-forward of a probability law")
    }

    /// Total variation distance.
    pub fn total_variation(&self, other: &FiniteLaw<X>) -> f64 {
        let mut diff: HashMap<&X, f64> = HashMap::new();
        for (x, p) in self.iter() {
            *diff.entry(x).or_insert(0.0) += p;
        }
        for (x, p) in other.iter() {
            *diff.entry(x).or_insert(0.0) -= p;
        }
        0.5 * diff.values().map(|d| d.abs()).sum::<f64>()
    }
}
