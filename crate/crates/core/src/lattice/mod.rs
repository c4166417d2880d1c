//! Planar lattice domains, their duals and edge/spin configurations.

mod config;
mod couplings;
mod domain;
mod dual;
mod graph;

pub use config::{BondConfig, CurrentTrace, GraphTag, SpinConfig};
pub use couplings::{
    at_critical_coupling, critical_coupling, kramers_wannier, kramers_wannier_dual, Couplings,
};
pub use domain::{Bc, Domain};
pub use dual::{complement_to_strong, complement_to_weak, dual_complement, dual_structure, DualStructure};
pub use graph::Graph;

/// Configuration on `d` that is open exactly on the forced edges.
pub fn forced_config(g: &Graph) -> BondConfig {
    BondConfig::from_bools(GraphTag::Primal, g.wired_mask())
}
