//! Perplexity, topic projection and matching, top terms, and the exact
//! enumeration oracle.

pub mod oracle;
pub mod perplexity;
pub mod report;
pub mod topics;

pub use oracle::{exact_posterior, ExactPosterior, ENUMERATION_BOUND};
pub use perplexity::{fold_in, perplexity, perplexity_with_theta, FoldInOptions, PerplexityMode};
pub use report::{EvalReport, EvalRow, CSV_HEADER};
pub use topics::{
    kl_divergence, match_topics, top_terms, topic_word_distribution, word_distributions, TermSpace, TopicMatch,
    TopicPair,
};
