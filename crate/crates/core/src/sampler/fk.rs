use rand::RngCore;

use crate::clusters::{coin_toss, CoinMode, Components, UnionFind};
use crate::error::{invalid, Result};
use crate::lattice::{BondConfig, Graph, GraphTag, SpinConfig};

/// Bernoulli threshold on a uniform `u64`: open iff `next_u64() < t`.
pub(crate) fn threshold(p: f64) -> u64 {
    if p <= 0.0 {
        0
    } else if p >= 1.0 {
        u64::MAX
    } else {
        (p * 18_446_744_073_709_551_616.0) as u64
    }
}

#[inline]
pub(crate) fn bernoulli<R: RngCore>(rng: &mut R, t: u64) -> bool {
    t == u64::MAX || rng.next_u64() < t
}

pub(crate) fn check_couplings(g: &Graph, j: &[f64]) -> Result<()> {
    if j.len() != g.n_edges() {
        return invalid(format!("{} couplings for {} edges", j.len(), g.n_edges()));
    }
    if j.iter().any(|x| !x.is_finite() || *x < 0.0) {
        return invalid("couplings must be finite and non-negative");
    }
    Ok(())
}

/// Swendsen-Wang chain for the Ising model on `g`.
///
/// One sweep opens every forced edge and every edge with agreeing spins with
/// probability `1 - exp(-2J)`, then recolours the clusters by fair coins; clusters
/// meeting the plus set are pinned to +1. The chain starts from all plus.
#[derive(Clone, Debug)]
pub struct FkIsingChain<'g> {
    g: &'g Graph,
    thresh: Vec<u64>,
    mode: CoinMode,
    spins: SpinConfig,
    bonds: BondConfig,
    uf: UnionFind,
}

impl<'g> FkIsingChain<'g> {
    pub fn new(g: &'g Graph, j: &[f64]) -> Result<Self> {
        check_couplings(g, j)?;
        let thresh = (0..g.n_edges())
            .map(|e| if g.is_wired(e) { u64::MAX } else { threshold(1.0 - (-2.0 * j[e]).exp()) })
            .collect();
        Ok(FkIsingChain {
            g,
            thresh,
            mode: if g.has_plus() { CoinMode::Plus } else { CoinMode::Free },
            spins: SpinConfig::all_plus(g.n_vertices()),
            bonds: BondConfig::empty(GraphTag::Primal, g.n_edges()),
            uf: UnionFind::new(g.n_vertices()),
        })
    }

    pub fn graph(&self) -> &'g Graph {
        self.g
    }

    pub fn spins(&self) -> &SpinConfig {
        &self.spins
    }

    /// Bond configuration drawn in the last sweep.
    pub fn bonds(&self) -> &BondConfig {
        &self.bonds
    }

    pub fn sweep<R: RngCore>(&mut self, rng: &mut R) {
        self.uf.reset();
        self.bonds.clear();
        let s = self.spins.as_slice();
        for (e, &[u, v]) in self.g.edges().iter().enumerate() {
            let (u, v) = (u as usize, v as usize);
            if s[u] == s[v] && bernoulli(rng, self.thresh[e]) {
                self.bonds.set(e, true);
                self.uf.union(u, v);
            }
        }
        let comps = Components::from_union_find(&mut self.uf);
        self.spins = coin_toss(&comps, self.g, self.mode, rng);
    }

    pub fn run<R: RngCore>(&mut self, sweeps: usize, rng: &mut R) {
        for _ in 0..sweeps {
            self.sweep(rng);
        }
    }
}

/// Ising sample on `g` after `sweeps` Swendsen-Wang sweeps from the all-plus state.
pub fn sample_ising<R: RngCore>(g: &Graph, j: &[f64], sweeps: usize, rng: &mut R) -> Result<SpinConfig> {
    let mut chain = FkIsingChain::new(g, j)?;
    chain.run(sweeps, rng);
    Ok(chain.spins().clone())
}
