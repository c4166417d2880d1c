//! Monte Carlo samplers for the Ising model and the coupled objects built on it.

mod fk;
mod master;
mod run;

pub use fk::{sample_ising, FkIsingChain};
pub use master::{Construction, HeightField, MasterSample, MasterSampler, SamplerContext};
pub use run::{
    builtin_collector, center_connection, chain_rng, check_requirements, downcast_collector, edge_density,
    magnetisation, odd_density, run_chain, run_chains, run_chains_in, Collector, Requirement, RunConfig,
    RunManifest, RunResult, ScalarCollector, ScalarFn, BUILTIN_COLLECTORS, RELEASE_CHECK_EVERY,
};
