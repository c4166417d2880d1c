//! Exact laws on small graphs by enumeration, and checks of the identities between them.

mod corpus;
mod enumerate;
mod law;
mod maxflow;
mod small;
mod verify;

pub use corpus::{anticorrelation_events, default_couplings, grid_subgraph_corpus, run_suite, Suite};
pub use enumerate::{
    at_current_law, coin_toss_pushforward, current_trace_law, drc_trace_law, ising_law, omega_law,
    OmegaLaw,
};
pub use law::FiniteLaw;
pub use verify::*;


#[cfg(test)]
mod tests;
