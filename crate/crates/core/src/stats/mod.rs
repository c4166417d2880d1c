//! Estimators and collectors for scaling exponents, densities and the height field.

mod area;
mod fit;
mod green;
mod scaling;
mod series;
mod source;

pub use area::*;
pub use fit::{ExponentFit, MIN_SCALES};
pub use green::*;
pub use scaling::*;
pub use series::{ratio_estimate, Estimate, ScalarSeries, MAX_BATCHES};
pub use source::{chain_sources, gather, gather_chains, ChainSource, FixedSource, McParams, SampleSource};

#[cfg(test)]
mod tests;
