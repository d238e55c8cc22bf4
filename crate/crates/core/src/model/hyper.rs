use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ModelKind {
    Lda,
    Clda,
    Llda,
    Cllda,
}

impl ModelKind {
    pub const ALL: [ModelKind; 4] = [ModelKind::Lda, ModelKind::Clda, ModelKind::Llda, ModelKind::Cllda];

    /// Four-layer models sample over concepts and atomic concepts.
    pub fn uses_concepts(self) -> bool {
        matches!(self, ModelKind::Clda | ModelKind::Cllda)
    }

    pub fn uses_labels(self) -> bool {
        matches!(self, ModelKind::Llda | ModelKind::Cllda)
    }

    pub fn as_str(self) -> &'static str {
        match self {
            ModelKind::Lda => "lda",
            ModelKind::Clda => "clda",
            ModelKind::Llda => "llda",
            ModelKind::Cllda => "cllda",
        }
    }
}

impl fmt::Display for ModelKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for ModelKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "lda" => Ok(ModelKind::Lda),
            "clda" => Ok(ModelKind::Clda),
            "llda" => Ok(ModelKind::Llda),
            "cllda" => Ok(ModelKind::Cllda),
            other => Err(Error::InvalidHyperparameters(format!("unknown model kind {other:?}"))),
        }
    }
}

/// A Dirichlet concentration: one scalar shared by every component, or one
/// value per component.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Prior {
    Symmetric(f64),
    Vector(Vec<f64>),
}

impl Prior {
    /// Expands to `len` components.
    pub fn expand(&self, len: usize, name: &str) -> Result<Vec<f64>> {
        let v = match self {
            Prior::Symmetric(a) => vec![*a; len],
            Prior::Vector(v) if v.len() == len => v.clone(),
            Prior::Vector(v) => {
                return Err(Error::InvalidHyperparameters(format!(
                    "{name} has {} components, expected {len}",
                    v.len()
                )))
            }
        };
        if v.iter().any(|a| !(a.is_finite() && *a > 0.0)) {
            return Err(Error::InvalidHyperparameters(format!("{name} must be positive")));
        }
        Ok(v)
    }
}

impl From<f64> for Prior {
    fn from(a: f64) -> Self {
        Prior::Symmetric(a)
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ScanOrder {
    /// Document-major, position-major.
    #[default]
    Sequential,
    /// A fresh random permutation of all tokens every sweep.
    Random,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SamplerOptions {
    pub scan: ScanOrder,
    /// Average the estimates over the last this-many sweeps (0 = final sweep only).
    pub average_last: usize,
    /// Renormalize each word's P(w|c) over its candidate concepts before
    /// they enter the concept kernel.
    pub normalize_candidates: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Hyperparameters {
    pub model_kind: ModelKind,
    pub topics: usize,
    pub alpha: Prior,
    pub beta: Prior,
    pub iterations: usize,
    pub seed: u64,
    #[serde(default)]
    pub sampler: SamplerOptions,
}

impl Hyperparameters {
    pub const DEFAULT_ALPHA: f64 = 0.01;
    pub const DEFAULT_BETA: f64 = 0.01;
    pub const DEFAULT_ITERATIONS: usize = 1000;

    pub fn new(model_kind: ModelKind, topics: usize) -> Self {
        Self {
            model_kind,
            topics,
            alpha: Prior::Symmetric(Self::DEFAULT_ALPHA),
            beta: Prior::Symmetric(Self::DEFAULT_BETA),
            iterations: Self::DEFAULT_ITERATIONS,
            seed: 0,
            sampler: SamplerOptions::default(),
        }
    }

    pub fn with_iterations(mut self, iterations: usize) -> Self {
        self.iterations = iterations;
        self
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }

    pub fn with_alpha(mut self, alpha: impl Into<Prior>) -> Self {
        self.alpha = alpha.into();
        self
    }

    pub fn with_beta(mut self, beta: impl Into<Prior>) -> Self {
        self.beta = beta.into();
        self
    }

    pub fn validate(&self) -> Result<()> {
        if self.topics == 0 {
            return Err(Error::InvalidHyperparameters("topic count must be >= 1".into()));
        }
        if self.iterations == 0 {
            return Err(Error::InvalidHyperparameters("iterations must be >= 1".into()));
        }
        if self.sampler.average_last > self.iterations {
            return Err(Error::InvalidHyperparameters(
                "average_last exceeds the iteration budget".into(),
            ));
        }
        self.alpha.expand(self.topics, "alpha")?;
        if let Prior::Symmetric(_) = self.beta {
            self.beta.expand(1, "beta")?;
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults_follow_experiment_settings() {
        let hp = Hyperparameters::new(ModelKind::Clda, 100);
        assert_eq!(hp.alpha, Prior::Symmetric(0.01));
        assert_eq!(hp.beta, Prior::Symmetric(0.01));
        assert_eq!(hp.iterations, 1000);
        hp.validate().unwrap();
    }

    #[test]
    fn invalid_values_rejected() {
        assert!(Hyperparameters::new(ModelKind::Lda, 0).validate().is_err());
        assert!(Hyperparameters::new(ModelKind::Lda, 2).with_iterations(0).validate().is_err());
        assert!(Hyperparameters::new(ModelKind::Lda, 2).with_alpha(0.0).validate().is_err());
        assert!(Hyperparameters::new(ModelKind::Lda, 2).with_beta(-1.0).validate().is_err());
        assert!(Hyperparameters::new(ModelKind::Lda, 2)
            .with_alpha(Prior::Vector(vec![0.1]))
            .validate()
            .is_err());
    }

    #[test]
    fn kind_round_trips_through_str() {
        for k in ModelKind::ALL {
            assert_eq!(k.as_str().parse::<ModelKind>().unwrap(), k);
        }
        assert!("hlda".parse::<ModelKind>().is_err());
    }
}
