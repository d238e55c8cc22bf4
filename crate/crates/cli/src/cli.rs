//! Command-line flags. Every flag is optional and, when given, overrides the
//! matching field of the config file.

use std::path::PathBuf;

use clap::{ArgAction, Args, Parser, Subcommand};
use clda_core::eval::PerplexityMode;
use clda_core::model::{Prior, ScanOrder};
use clda_core::ModelKind;

use crate::config::RunConfig;

#[derive(Debug, Parser)]
#[command(name = "clda", version, about = "Concept-layer topic models: train, evaluate, generate, inspect")]
pub struct Cli {
    /// TOML run configuration; command-line flags take precedence.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    /// More log output on stderr (-v info, -vv debug).
    #[arg(short, long, action = ArgAction::Count, global = true)]
    pub verbose: u8,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Train one model and write its snapshot and sweep log.
    Train(TrainArgs),
    /// Perplexity of snapshots, or of models retrained over a topic-count sweep.
    Eval(EvalArgs),
    /// Sample a corpus from the generative process, with its ground truth.
    Generate(GenerateArgs),
    /// Print the top concepts and words of every topic.
    Inspect(InspectArgs),
}

impl Command {
    pub fn name(&self) -> &'static str {
        match self {
            Command::Train(_) => "train",
            Command::Eval(_) => "eval",
            Command::Generate(_) => "generate",
            Command::Inspect(_) => "inspect",
        }
    }

    pub fn apply(&self, cfg: &mut RunConfig) {
        cfg.subcommand = Some(self.name().to_string());
        match self {
            Command::Train(a) => a.apply(cfg),
            Command::Eval(a) => a.apply(cfg),
            Command::Generate(a) => a.apply(cfg),
            Command::Inspect(a) => a.apply(cfg),
        }
    }
}

fn parse_mode(s: &str) -> Result<PerplexityMode, String> {
    match s.to_ascii_lowercase().as_str() {
        "training" => Ok(PerplexityMode::Training),
        "foldin" | "fold-in" => Ok(PerplexityMode::Foldin),
        _ => Err(format!("unknown mode {s:?} (expected training or foldin)")),
    }
}

fn parse_scan(s: &str) -> Result<ScanOrder, String> {
    match s.to_ascii_lowercase().as_str() {
        "sequential" => Ok(ScanOrder::Sequential),
        "random" => Ok(ScanOrder::Random),
        _ => Err(format!("unknown scan order {s:?} (expected sequential or random)")),
    }
}

fn set<T: Clone>(slot: &mut T, v: &Option<T>) {
    if let Some(v) = v {
        *slot = v.clone();
    }
}

fn set_opt<T: Clone>(slot: &mut Option<T>, v: &Option<T>) {
    if v.is_some() {
        slot.clone_from(v);
    }
}

#[derive(Debug, Args)]
pub struct InputArgs {
    /// Plain text (one document per line) or JSONL with {id, text, labels}.
    #[arg(long)]
    pub corpus: Option<PathBuf>,
    /// Label file: `doc_index<TAB>label1,label2` per line.
    #[arg(long)]
    pub labels: Option<PathBuf>,
    /// Knowledge base TSV: `word<TAB>concept<TAB>P(word|concept)`.
    #[arg(long)]
    pub kb: Option<PathBuf>,
    /// Concept cluster TSV: `concept<TAB>cluster`.
    #[arg(long)]
    pub clusters: Option<PathBuf>,
    #[arg(long)]
    pub min_count: Option<usize>,
    /// Stop-word file replacing the built-in English list.
    #[arg(long)]
    pub stopwords: Option<PathBuf>,
    #[arg(long)]
    pub no_stopwords: bool,
    /// Use knowledge-base probabilities as loaded, without renormalizing.
    #[arg(long)]
    pub raw_kb: bool,
    /// Drop knowledge-base entries below this probability.
    #[arg(long)]
    pub min_prob: Option<f64>,
}

impl InputArgs {
    fn apply(&self, cfg: &mut RunConfig) {
        set_opt(&mut cfg.paths.corpus, &self.corpus);
        set_opt(&mut cfg.paths.labels, &self.labels);
        set_opt(&mut cfg.paths.kb, &self.kb);
        set_opt(&mut cfg.paths.clusters, &self.clusters);
        set(&mut cfg.preprocess.min_count, &self.min_count);
        set_opt(&mut cfg.preprocess.stopwords, &self.stopwords);
        cfg.preprocess.no_stopwords |= self.no_stopwords;
        cfg.kb.raw |= self.raw_kb;
        set(&mut cfg.kb.min_prob, &self.min_prob);
    }
}

#[derive(Debug, Args)]
pub struct ModelArgs {
    /// lda, clda, llda or cllda.
    #[arg(long)]
    pub model: Option<ModelKind>,
    #[arg(long)]
    pub topics: Option<usize>,
    #[arg(long)]
    pub alpha: Option<f64>,
    #[arg(long)]
    pub beta: Option<f64>,
    /// Gibbs sweeps.
    #[arg(long)]
    pub iters: Option<usize>,
    #[arg(long)]
    pub seed: Option<u64>,
    /// sequential or random.
    #[arg(long, value_parser = parse_scan)]
    pub scan: Option<ScanOrder>,
    /// Average estimates over this many final sweeps.
    #[arg(long)]
    pub average_last: Option<usize>,
    /// Renormalize P(w|c) over each word's candidate concepts in the sampler.
    #[arg(long)]
    pub normalize_candidates: bool,
}

impl ModelArgs {
    fn apply(&self, cfg: &mut RunConfig) {
        let m = &mut cfg.model;
        set(&mut m.kind, &self.model);
        if self.topics.is_some() {
            m.topics = self.topics;
        }
        set(&mut m.alpha, &self.alpha.map(Prior::Symmetric));
        set(&mut m.beta, &self.beta.map(Prior::Symmetric));
        set(&mut m.iterations, &self.iters);
        set(&mut m.seed, &self.seed);
        set(&mut m.sampler.scan, &self.scan);
        set(&mut m.sampler.average_last, &self.average_last);
        m.sampler.normalize_candidates |= self.normalize_candidates;
    }
}

#[derive(Debug, Args)]
pub struct TrainArgs {
    #[command(flatten)]
    pub input: InputArgs,
    #[command(flatten)]
    pub model: ModelArgs,
    /// Output directory.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

impl TrainArgs {
    fn apply(&self, cfg: &mut RunConfig) {
        self.input.apply(cfg);
        self.model.apply(cfg);
        set_opt(&mut cfg.paths.out, &self.out);
    }
}

#[derive(Debug, Args)]
pub struct EvalArgs {
    #[command(flatten)]
    pub input: InputArgs,
    #[command(flatten)]
    pub model: ModelArgs,
    /// Trained snapshot to evaluate; repeatable.
    #[arg(long)]
    pub snapshot: Vec<PathBuf>,
    /// Unseen documents for fold-in mode.
    #[arg(long)]
    pub heldout: Option<PathBuf>,
    /// training or foldin.
    #[arg(long, value_parser = parse_mode)]
    pub mode: Option<PerplexityMode>,
    /// Retrain at each of these topic counts, e.g. 10,20,30.
    #[arg(long, value_delimiter = ',')]
    pub sweep: Vec<usize>,
    /// Model kinds to retrain, e.g. lda,clda.
    #[arg(long, value_delimiter = ',')]
    pub models: Vec<ModelKind>,
    /// Train on growing prefixes of this many document groups.
    #[arg(long)]
    pub groups: Option<usize>,
    /// Documents in each group but the last.
    #[arg(long)]
    pub group_size: Option<usize>,
    #[arg(long)]
    pub foldin_sweeps: Option<usize>,
    /// Seeds per cell, counting up from --seed.
    #[arg(long)]
    pub repeats: Option<usize>,
    /// Drop out-of-vocabulary held-out tokens instead of failing.
    #[arg(long)]
    pub skip_oov: bool,
    /// Output directory; the CSV goes to stdout when unset.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

impl EvalArgs {
    fn apply(&self, cfg: &mut RunConfig) {
        self.input.apply(cfg);
        self.model.apply(cfg);
        if !self.snapshot.is_empty() {
            cfg.paths.snapshot.clone_from(&self.snapshot);
        }
        set_opt(&mut cfg.paths.heldout, &self.heldout);
        set_opt(&mut cfg.paths.out, &self.out);
        let e = &mut cfg.eval;
        set(&mut e.mode, &self.mode);
        if !self.sweep.is_empty() {
            e.sweep.clone_from(&self.sweep);
        }
        if !self.models.is_empty() {
            e.models.clone_from(&self.models);
        }
        set_opt(&mut e.groups, &self.groups);
        set(&mut e.group_size, &self.group_size);
        set(&mut e.foldin_sweeps, &self.foldin_sweeps);
        set(&mut e.repeats, &self.repeats);
        e.skip_oov |= self.skip_oov;
    }
}

#[derive(Debug, Args)]
pub struct GenerateArgs {
    /// Knowledge base to generate from; a random one is synthesized otherwise.
    #[arg(long)]
    pub kb: Option<PathBuf>,
    #[arg(long)]
    pub clusters: Option<PathBuf>,
    #[arg(long)]
    pub raw_kb: bool,
    #[arg(long)]
    pub topics: Option<usize>,
    #[arg(long)]
    pub docs: Option<usize>,
    /// Mean of the (zero-truncated Poisson) document length.
    #[arg(long)]
    pub mean_len: Option<f64>,
    #[arg(long)]
    pub alpha: Option<f64>,
    #[arg(long)]
    pub beta: Option<f64>,
    /// Probability that a token comes from the atomic block.
    #[arg(long)]
    pub atomic_fraction: Option<f64>,
    #[arg(long)]
    pub atomic_words: Option<usize>,
    #[arg(long)]
    pub seed: Option<u64>,
    /// Synthetic knowledge base: number of concepts.
    #[arg(long)]
    pub concepts: Option<usize>,
    #[arg(long)]
    pub words_per_concept: Option<usize>,
    #[arg(long)]
    pub word_pool: Option<usize>,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

impl GenerateArgs {
    fn apply(&self, cfg: &mut RunConfig) {
        set_opt(&mut cfg.paths.kb, &self.kb);
        set_opt(&mut cfg.paths.clusters, &self.clusters);
        set_opt(&mut cfg.paths.out, &self.out);
        cfg.kb.raw |= self.raw_kb;
        let g = &mut cfg.generate.corpus;
        set(&mut g.topics, &self.topics);
        set(&mut g.docs, &self.docs);
        set(&mut g.mean_doc_len, &self.mean_len);
        set(&mut g.alpha, &self.alpha);
        set(&mut g.beta, &self.beta);
        set(&mut g.atomic_fraction, &self.atomic_fraction);
        set(&mut g.atomic_words, &self.atomic_words);
        set(&mut g.seed, &self.seed);
        let s = &mut cfg.generate.synthetic_kb;
        set(&mut s.concepts, &self.concepts);
        set(&mut s.words_per_concept, &self.words_per_concept);
        set(&mut s.word_pool, &self.word_pool);
        set(&mut s.seed, &self.seed);
    }
}

#[derive(Debug, Args)]
pub struct InspectArgs {
    #[arg(long)]
    pub snapshot: Option<PathBuf>,
    /// Entries per column.
    #[arg(long)]
    pub top: Option<usize>,
    /// Second snapshot to match topics against.
    #[arg(long = "match")]
    pub against: Option<PathBuf>,
}

impl InspectArgs {
    fn apply(&self, cfg: &mut RunConfig) {
        if let Some(p) = &self.snapshot {
            cfg.paths.snapshot = vec![p.clone()];
        }
        set_opt(&mut cfg.paths.against, &self.against);
        set(&mut cfg.inspect.top, &self.top);
    }
}
