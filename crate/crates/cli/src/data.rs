//! Loading corpora, labels and knowledge bases as a run config describes them.

use std::fs;
use std::ops::Range;
use std::path::Path;

use anyhow::{bail, Context, Result};
use clda_core::corpus::{build_corpus_with_vocab, parse_label_lines, read_raw_docs, OovPolicy, RawDoc};
use clda_core::{attach_labels, build_corpus, ConceptKb, Corpus, LabelSet, TopicModel, Vocab};

use crate::config::{optional, require, RunConfig};

/// A preprocessed corpus plus its label names, aligned with the kept
/// documents.
pub struct Inputs {
    pub corpus: Corpus,
    pub labels: Option<Vec<Vec<String>>>,
    pub dataset: String,
}

impl Inputs {
    /// Label set over the documents in `range`, with a label vocabulary of
    /// just the labels occurring there.
    pub fn label_set(&self, range: Range<usize>) -> Result<LabelSet> {
        let names = self
            .labels
            .as_ref()
            .context("labeled models need labels (--labels or a `labels` field in JSONL input)")?;
        let corpus = self.corpus.subset(range.clone());
        Ok(attach_labels(&corpus, &names[range])?)
    }
}

pub fn dataset_name(path: &Path) -> String {
    path.file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_else(|| path.display().to_string())
}

/// Label names per raw document, from the label file if given, else from
/// the JSONL records. `None` when neither source has labels.
fn raw_labels(cfg: &RunConfig, raw: &[RawDoc]) -> Result<Option<Vec<Vec<String>>>> {
    if let Some(p) = optional(&cfg.paths.labels, "labels")? {
        let text = fs::read_to_string(p).with_context(|| format!("reading {}", p.display()))?;
        return Ok(Some(parse_label_lines(&text, &p.display().to_string(), raw.len())?));
    }
    if raw.iter().any(|d| d.labels.is_some()) {
        return Ok(Some(raw.iter().map(|d| d.labels.clone().unwrap_or_default()).collect()));
    }
    Ok(None)
}

pub fn load_corpus(cfg: &RunConfig) -> Result<Inputs> {
    let path = require(&cfg.paths.corpus, "corpus")?;
    let raw = read_raw_docs(path)?;
    let texts: Vec<&str> = raw.iter().map(|d| d.text.as_str()).collect();
    let corpus = build_corpus(&texts, &cfg.preprocess.build()?)?;
    if !corpus.dropped().is_empty() {
        log::info!("{} documents empty after preprocessing were dropped", corpus.dropped().len());
    }
    let labels = raw_labels(cfg, &raw)?
        .map(|names| corpus.source_index().iter().map(|&i| names[i].clone()).collect());
    Ok(Inputs {
        corpus,
        labels,
        dataset: dataset_name(path),
    })
}

/// Unseen documents tokenized against a trained model's vocabulary, with
/// labels mapped into the model's label vocabulary when both exist.
pub fn load_heldout(cfg: &RunConfig, path: &Path, model: &TopicModel) -> Result<(Corpus, Option<LabelSet>)> {
    let raw = read_raw_docs(path)?;
    let texts: Vec<&str> = raw.iter().map(|d| d.text.as_str()).collect();
    let policy = if cfg.eval.skip_oov { OovPolicy::Skip } else { OovPolicy::Reject };
    let (corpus, skipped) = build_corpus_with_vocab(&texts, model.vocab(), &cfg.preprocess.build()?, policy)?;
    if skipped > 0 {
        log::info!("skipped {skipped} out-of-vocabulary tokens");
    }
    let labels = match (model.label_vocab(), raw_labels(cfg, &raw)?) {
        (Some(vocab), Some(names)) => {
            let per_doc = corpus
                .source_index()
                .iter()
                .map(|&i| map_labels(vocab, &names[i]))
                .collect::<Result<Vec<_>>>()?;
            Some(LabelSet::from_ids(per_doc, vocab.clone())?)
        }
        _ => None,
    };
    Ok((corpus, labels))
}

fn map_labels(vocab: &Vocab, names: &[String]) -> Result<Vec<u32>> {
    names
        .iter()
        .map(|n| match vocab.id(n.trim()) {
            Some(id) => Ok(id),
            None => bail!("label {n:?} is unknown to the model"),
        })
        .collect()
}

/// The knowledge base restricted to `vocab`.
pub fn load_kb(cfg: &RunConfig, vocab: &Vocab) -> Result<ConceptKb> {
    let path = require(&cfg.paths.kb, "knowledge base")?;
    let clusters = optional(&cfg.paths.clusters, "clusters")?;
    let kb = ConceptKb::load(path, clusters, Some(vocab), &cfg.kb.options())?;
    log::info!("knowledge base: {} concepts", kb.concept_count());
    Ok(kb)
}
