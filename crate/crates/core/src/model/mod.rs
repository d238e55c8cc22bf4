//! Gibbs-chain state, hyperparameters and frozen estimates.

pub mod entity;
pub mod hyper;
pub mod snapshot;
pub mod state;
pub mod topic_model;

pub use entity::{Entity, EntitySpace};
pub use hyper::{Hyperparameters, ModelKind, Prior, SamplerOptions, ScanOrder};
pub use snapshot::{from_snapshot_str, read_snapshot, to_snapshot_string, write_snapshot};
pub use state::{init_state, CountTables, SamplerState, TokenAssignment};
pub use topic_model::TopicModel;
