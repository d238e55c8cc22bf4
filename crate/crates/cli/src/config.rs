//! Run configuration: a TOML file whose every field may be overridden on the
//! command line. The resolved result is written next to each run's outputs.

use std::collections::BTreeSet;
use std::fs;
use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use clda_core::eval::PerplexityMode;
use clda_core::model::{Prior, SamplerOptions};
use clda_core::samplers::{GenConfig, SyntheticKbConfig};
use clda_core::{Hyperparameters, KbOptions, ModelKind, PreprocessConfig};
use serde::{Deserialize, Serialize};

pub const RESOLVED_CONFIG: &str = "config.toml";

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    /// Which subcommand produced this file; informational.
    pub subcommand: Option<String>,
    pub paths: Paths,
    pub model: ModelSection,
    pub preprocess: PreprocessSection,
    pub kb: KbSection,
    pub generate: GenerateSection,
    pub eval: EvalSection,
    pub inspect: InspectSection,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Paths {
    pub corpus: Option<PathBuf>,
    pub labels: Option<PathBuf>,
    pub kb: Option<PathBuf>,
    pub clusters: Option<PathBuf>,
    pub snapshot: Vec<PathBuf>,
    /// Second snapshot for topic matching in `inspect`.
    pub against: Option<PathBuf>,
    /// Unseen documents for fold-in evaluation.
    pub heldout: Option<PathBuf>,
    pub out: Option<PathBuf>,
}

impl Paths {
    fn for_each(&mut self, mut f: impl FnMut(&mut PathBuf)) {
        let singles = [
            &mut self.corpus,
            &mut self.labels,
            &mut self.kb,
            &mut self.clusters,
            &mut self.against,
            &mut self.heldout,
            &mut self.out,
        ];
        singles.into_iter().flatten().for_each(&mut f);
        self.snapshot.iter_mut().for_each(f);
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ModelSection {
    pub kind: ModelKind,
    /// Unset means the label count for labeled models and 10 otherwise.
    pub topics: Option<usize>,
    pub alpha: Prior,
    pub beta: Prior,
    pub iterations: usize,
    pub seed: u64,
    pub sampler: SamplerOptions,
}

impl Default for ModelSection {
    fn default() -> Self {
        Self {
            kind: ModelKind::Lda,
            topics: None,
            alpha: Prior::Symmetric(Hyperparameters::DEFAULT_ALPHA),
            beta: Prior::Symmetric(Hyperparameters::DEFAULT_BETA),
            iterations: Hyperparameters::DEFAULT_ITERATIONS,
            seed: 0,
            sampler: SamplerOptions::default(),
        }
    }
}

pub const DEFAULT_TOPICS: usize = 10;

impl ModelSection {
    pub fn hyperparameters(&self, kind: ModelKind, topics: usize, seed: u64) -> Hyperparameters {
        Hyperparameters {
            model_kind: kind,
            topics,
            alpha: self.alpha.clone(),
            beta: self.beta.clone(),
            iterations: self.iterations,
            seed,
            sampler: self.sampler.clone(),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PreprocessSection {
    pub min_count: usize,
    /// Stop-word list file; the built-in English list when unset.
    pub stopwords: Option<PathBuf>,
    pub no_stopwords: bool,
    pub lowercase: bool,
}

impl Default for PreprocessSection {
    fn default() -> Self {
        Self {
            min_count: 10,
            stopwords: None,
            no_stopwords: false,
            lowercase: true,
        }
    }
}

impl PreprocessSection {
    pub fn build(&self) -> Result<PreprocessConfig> {
        let stopwords = if self.no_stopwords {
            BTreeSet::new()
        } else if let Some(p) = &self.stopwords {
            let text = fs::read_to_string(p).with_context(|| format!("reading stop words {}", p.display()))?;
            clda_core::corpus::parse_stopwords(&text)
        } else {
            clda_core::corpus::default_stopwords()
        };
        Ok(PreprocessConfig {
            stopwords,
            min_count: self.min_count,
            lowercase: self.lowercase,
        })
    }
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct KbSection {
    /// Keep loaded P(w|c) rows as they are instead of renormalizing them.
    pub raw: bool,
    pub min_prob: f64,
}

impl KbSection {
    pub fn options(&self) -> KbOptions {
        KbOptions {
            renormalize: !self.raw,
            min_prob: self.min_prob,
        }
    }
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct GenerateSection {
    pub corpus: GenConfig,
    /// Used when no knowledge base file is given.
    pub synthetic_kb: SyntheticKbConfig,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct EvalSection {
    pub mode: PerplexityMode,
    /// Topic counts to retrain at; empty means evaluate the given snapshots.
    pub sweep: Vec<usize>,
    pub models: Vec<ModelKind>,
    /// Prefix schedule: this many groups, all but the last of `group_size`
    /// documents; one training run per prefix.
    pub groups: Option<usize>,
    pub group_size: usize,
    pub foldin_sweeps: usize,
    /// Seeds per cell, counting up from the model seed.
    pub repeats: usize,
    /// Drop out-of-vocabulary held-out tokens instead of failing.
    pub skip_oov: bool,
}

impl Default for EvalSection {
    fn default() -> Self {
        Self {
            mode: PerplexityMode::Training,
            sweep: Vec::new(),
            models: vec![ModelKind::Lda, ModelKind::Clda],
            groups: None,
            group_size: 200,
            foldin_sweeps: 500,
            repeats: 1,
            skip_oov: false,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct InspectSection {
    pub top: usize,
}

impl Default for InspectSection {
    fn default() -> Self {
        Self { top: 10 }
    }
}

impl RunConfig {
    pub fn load(path: Option<&Path>) -> Result<Self> {
        let Some(path) = path else {
            return Ok(Self::default());
        };
        let text = fs::read_to_string(path).with_context(|| format!("reading config {}", path.display()))?;
        let mut cfg: Self = toml::from_str(&text).with_context(|| format!("parsing config {}", path.display()))?;
        // relative paths in a config file are relative to that file
        let base = path.parent().unwrap_or(Path::new(""));
        cfg.paths.for_each(|p| {
            if p.is_relative() {
                *p = base.join(&*p);
            }
        });
        Ok(cfg)
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("config serializes")
    }

    /// Writes the resolved config into `dir/name`. Paths are made absolute
    /// so the file can be reused from anywhere; the output directory is left
    /// out so reuse never writes into this run's directory.
    pub fn write_resolved(&self, dir: &Path, name: &str) -> Result<()> {
        let mut resolved = self.clone();
        resolved.paths.out = None;
        resolved.paths.for_each(|p| {
            if let Ok(abs) = std::path::absolute(&*p) {
                *p = abs;
            }
        });
        let path = dir.join(name);
        fs::write(&path, resolved.to_toml()).with_context(|| format!("writing {}", path.display()))
    }

    pub fn check_sweep(&self) -> Result<()> {
        let mut seen = BTreeSet::new();
        for &k in &self.eval.sweep {
            if k == 0 {
                bail!("sweep entries must be positive");
            }
            if !seen.insert(k) {
                bail!("sweep entry {k} listed twice");
            }
        }
        if self.eval.repeats == 0 {
            bail!("repeats must be >= 1");
        }
        Ok(())
    }
}

/// Fails unless `path` is set and exists.
pub fn require<'a>(path: &'a Option<PathBuf>, what: &str) -> Result<&'a Path> {
    let p = path
        .as_deref()
        .with_context(|| format!("missing {what} path (set it in the config file or on the command line)"))?;
    if !p.exists() {
        bail!("{what} file {} does not exist", p.display());
    }
    Ok(p)
}

/// Fails if `path` is set but missing.
pub fn optional<'a>(path: &'a Option<PathBuf>, what: &str) -> Result<Option<&'a Path>> {
    match path.as_deref() {
        Some(p) if !p.exists() => bail!("{what} file {} does not exist", p.display()),
        other => Ok(other),
    }
}
