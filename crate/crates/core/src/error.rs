use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("io error on {path}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("no input documents")]
    NoDocuments,

    #[error("every document is empty after preprocessing ({dropped} dropped)")]
    EmptyCorpus { dropped: usize },

    #[error("invalid preprocessing config: {0}")]
    InvalidPreprocess(String),

    #[error("expected {expected} label sets, got {found}")]
    LabelCountMismatch { expected: usize, found: usize },

    #[error("document {doc} has an empty label set")]
    EmptyLabelSet { doc: usize },

    #[error("{file}:{line}: {message}")]
    Parse {
        file: String,
        line: usize,
        message: String,
    },

    #[error("cluster file references unknown concept {concept:?} (line {line})")]
    UnknownConcept { concept: String, line: usize },

    #[error("invalid hyperparameters: {0}")]
    InvalidHyperparameters(String),

    #[error("model kind {kind} requires {what}")]
    MissingInput { kind: String, what: &'static str },

    #[error("knowledge base word space does not match the corpus vocabulary")]
    KbVocabMismatch,

    #[error("vocabulary hash mismatch: model {model}, corpus {corpus}")]
    VocabMismatch { model: String, corpus: String },

    #[error("corpus has {found} documents but the model was trained on {expected}")]
    DocCountMismatch { expected: usize, found: usize },

    #[error("word {word:?} is not in the model vocabulary")]
    OutOfVocabulary { word: String },

    #[error("enumeration needs {count} configurations, above the bound {bound}")]
    EnumerationTooLarge { count: f64, bound: u64 },

    #[error("invalid generator config: {0}")]
    InvalidGenConfig(String),

    #[error("snapshot error: {0}")]
    Snapshot(String),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    pub(crate) fn parse(file: impl Into<String>, line: usize, message: impl Into<String>) -> Self {
        Error::Parse {
            file: file.into(),
            line,
            message: message.into(),
        }
    }
}
