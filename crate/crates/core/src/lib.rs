//! Topic models with a concept layer between topics and words.
//!
//! Four model kinds share one collapsed Gibbs engine:
//!
//! * `lda` / `llda`: topics are distributions over words (Labeled LDA
//!   restricts each document to the topics named by its labels);
//! * `clda` / `cllda`: topics are distributions over *entities*, the concepts
//!   of a knowledge base plus one atomic concept per word the knowledge base
//!   does not cover. A concept emits words through its knowledge-base
//!   distribution P(w|c).
//!
//! Typical flow: [`corpus::build_corpus`] -> [`concept_kb::ConceptKb::load`]
//! -> [`model::init_state`] -> [`samplers::run_gibbs`] -> [`eval`].

pub mod concept_kb;
pub mod corpus;
pub mod error;
pub mod eval;
pub mod model;
pub mod samplers;
pub mod vocab;

pub use concept_kb::{ClusterMap, ConceptKb, EntityKind, KbOptions};
pub use corpus::{attach_labels, build_corpus, Corpus, LabelSet, PreprocessConfig};
pub use error::{Error, Result};
pub use model::{init_state, Hyperparameters, ModelKind, SamplerState, TokenAssignment, TopicModel};
pub use samplers::{run_gibbs, GibbsReport};
pub use vocab::Vocab;
