//! Collapsed Gibbs kernels for the four model kinds, the sweep driver and
//! the forward generative simulator.

pub mod generate;
pub mod gibbs;
mod kernels;

pub use generate::{generate_corpus, synthetic_kb, GenConfig, GroundTruth, SyntheticKbConfig};
pub use gibbs::{run_gibbs, run_gibbs_with, GibbsReport, SweepLog};
