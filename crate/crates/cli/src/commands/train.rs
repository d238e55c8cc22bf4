use std::fs;
use std::path::Path;

use anyhow::{Context, Result};
use clda_core::eval::{perplexity, FoldInOptions, PerplexityMode};
use clda_core::model::{write_snapshot, Prior};
use clda_core::{LabelSet, ModelKind};
use serde::Serialize;

use crate::commands::train_model;
use crate::config::{RunConfig, DEFAULT_TOPICS, RESOLVED_CONFIG};
use crate::data::{load_corpus, load_kb};

pub const SNAPSHOT_FILE: &str = "model.json";
pub const SWEEP_LOG_FILE: &str = "sweeps.csv";
pub const SUMMARY_FILE: &str = "summary.json";

#[derive(Serialize)]
struct TrainSummary {
    model_kind: ModelKind,
    topics: usize,
    alpha: Prior,
    beta: Prior,
    iterations: usize,
    seed: u64,
    docs: usize,
    tokens: usize,
    vocab_size: usize,
    entities: usize,
    concepts: usize,
    final_log_likelihood: f64,
    training_perplexity: f64,
    vocab_hash: String,
    kb_hash: Option<String>,
    model_hash: String,
}

/// K for a run: the label count for labeled models unless set explicitly.
pub fn resolve_topics(cfg: &RunConfig, labels: Option<&LabelSet>) -> usize {
    match (cfg.model.topics, labels) {
        (Some(k), _) => k,
        (None, Some(l)) => l.label_count(),
        (None, None) => DEFAULT_TOPICS,
    }
}

pub fn run(cfg: &RunConfig) -> Result<()> {
    let out = cfg.paths.out.as_deref().context("train needs an output directory (--out)")?;
    let inputs = load_corpus(cfg)?;
    let corpus = &inputs.corpus;
    let kind = cfg.model.kind;
    let labels = if kind.uses_labels() {
        Some(inputs.label_set(0..corpus.num_docs())?)
    } else {
        None
    };
    let kb = if kind.uses_concepts() {
        Some(load_kb(cfg, corpus.vocab())?)
    } else {
        if cfg.paths.kb.is_some() {
            log::warn!("{kind} does not use a knowledge base; ignoring it");
        }
        None
    };
    let topics = resolve_topics(cfg, labels.as_ref());
    let hp = cfg.model.hyperparameters(kind, topics, cfg.model.seed);
    let (report, secs) = train_model(corpus, kb.as_ref(), labels.as_ref(), &hp)?;
    log::info!("trained in {secs:.3}s");
    let model = &report.model;
    let ppl = perplexity(model, corpus, PerplexityMode::Training, None, &FoldInOptions::default())?;

    fs::create_dir_all(out).with_context(|| format!("creating {}", out.display()))?;
    write_snapshot(model, &out.join(SNAPSHOT_FILE))?;
    write_sweep_log(&out.join(SWEEP_LOG_FILE), &report.trace())?;
    let summary = TrainSummary {
        model_kind: kind,
        topics,
        alpha: hp.alpha.clone(),
        beta: hp.beta.clone(),
        iterations: hp.iterations,
        seed: hp.seed,
        docs: corpus.num_docs(),
        tokens: corpus.total_tokens(),
        vocab_size: corpus.vocab_size(),
        entities: model.entity_space().len(),
        concepts: model.entity_space().concept_count(),
        final_log_likelihood: report.sweeps.last().map_or(f64::NAN, |s| s.log_likelihood),
        training_perplexity: ppl,
        vocab_hash: model.vocab_hash().to_string(),
        kb_hash: model.kb_hash().map(str::to_string),
        model_hash: model.identity_hash(),
    };
    let summary_path = out.join(SUMMARY_FILE);
    fs::write(&summary_path, serde_json::to_string_pretty(&summary)? + "\n")
        .with_context(|| format!("writing {}", summary_path.display()))?;
    let mut resolved = cfg.clone();
    resolved.model.topics = Some(topics);
    resolved.paths.snapshot = vec![out.join(SNAPSHOT_FILE)];
    resolved.write_resolved(out, RESOLVED_CONFIG)?;

    println!(
        "model {kind}  K={topics}  alpha={}  beta={}  iterations={}  seed={}",
        serde_json::to_string(&hp.alpha)?,
        serde_json::to_string(&hp.beta)?,
        hp.iterations,
        hp.seed
    );
    println!(
        "docs {}  tokens {}  vocab {}  entities {} ({} concepts)",
        summary.docs, summary.tokens, summary.vocab_size, summary.entities, summary.concepts
    );
    println!("training perplexity {ppl}");
    println!("wrote {}", out.join(SNAPSHOT_FILE).display());
    Ok(())
}

fn write_sweep_log(path: &Path, trace: &[(usize, f64)]) -> Result<()> {
    let mut text = String::from("sweep,log_likelihood\n");
    for (sweep, ll) in trace {
        text.push_str(&format!("{sweep},{ll}\n"));
    }
    fs::write(path, text).with_context(|| format!("writing {}", path.display()))
}
