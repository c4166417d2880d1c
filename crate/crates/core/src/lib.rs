//! Exact and Monte Carlo tools for the coupling between the planar Ising model,
//! the double random current and the Ashkin-Teller model.

pub mod error;
pub mod exact;
pub mod clusters;
pub mod lattice;
pub mod report;
pub mod sampler;
pub mod stats;

pub use error::{Error, Result};
