use serde::{Deserialize, Serialize};

use crate::error::{invalid, Result};

/// Critical coupling of the square-lattice Ising model, `ln(1 + sqrt 2) / 2`.
pub fn critical_coupling() -> f64 {
    0.5 * (1.0 + 2f64.sqrt()).ln()
}

/// Kramers-Wannier dual coupling: `tanh(J*) = exp(-2J)`.
pub fn kramers_wannier(j: f64) -> Result<f64> {
    if !(j > 0.0) || !j.is_finite() {
        return invalid(format!("dual coupling needs a positive finite coupling, got {j}"));
    }
    Ok((-2.0 * j).exp().atanh())
}

/// Edgewise Kramers-Wannier dual.
pub fn kramers_wannier_dual(j: &[f64]) -> Result<Vec<f64>> {
    j.iter().map(|&x| kramers_wannier(x)).collect()
}

/// Ising coupling `J` and four-spin coupling `U` on every edge.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Couplings {
    pub j: Vec<f64>,
    pub u: Vec<f64>,
}

impl Couplings {
    pub fn uniform(n_edges: usize, j: f64) -> Result<Self> {
        Self::uniform_at(n_edges, j, 0.0)
    }

    pub fn uniform_at(n_edges: usize, j: f64, u: f64) -> Result<Self> {
        Self::new(vec![j; n_edges], vec![u; n_edges])
    }

    pub fn new(j: Vec<f64>, u: Vec<f64>) -> Result<Self> {
        if j.len() != u.len() {
            return invalid("J and U must have the same length");
        }
        if j.iter().any(|&x| !(x >= 0.0) || !x.is_finite()) {
            return invalid("couplings J must be finite and non-negative");
        }
        if u.iter().any(|x| !x.is_finite()) {
            return invalid("couplings U must be finite");
        }
        Ok(Couplings { j, u })
    }

    pub fn len(&self) -> usize {
        self.j.len()
    }

    pub fn is_empty(&self) -> bool {
        self.j.is_empty()
    }

    pub fn has_four_spin(&self) -> bool {
        self.u.iter().any(|&u| u != 0.0)
    }

    pub fn check_len(&self, n_edges: usize) -> Result<()> {
        if self.len() != n_edges {
            return invalid(format!(
                "couplings cover {} edges, graph has {n_edges}",
                self.len()
            ));
        }
        Ok(())
    }

    /// Edgewise `cosh(2J) >= exp(-2U)`, the regime where the coupling to the double
    /// random current holds.
    pub fn in_at_regime(&self) -> bool {
        self.j
            .iter()
            .zip(&self.u)
            .all(|(&j, &u)| (2.0 * j).cosh() >= (-2.0 * u).exp() * (1.0 - 1e-12))
    }
}

/// Coupling on the self-dual line `sinh(2J) = exp(-2U)` for a given `U`.
pub fn at_critical_coupling(u: f64) -> f64 {
    0.5 * (-2.0 * u).exp().asinh()
}
