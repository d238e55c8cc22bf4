use std::fs;
use std::path::PathBuf;
use std::time::Instant;

use anyhow::{bail, Context, Result};
use clda_core::eval::{perplexity, EvalReport, EvalRow, FoldInOptions, PerplexityMode};
use clda_core::model::read_snapshot;
use clda_core::{ConceptKb, ModelKind};
use rayon::prelude::*;

use crate::commands::train_model;
use crate::config::{RunConfig, DEFAULT_TOPICS};
use crate::data::{dataset_name, load_corpus, load_heldout, load_kb, Inputs};

pub const REPORT_FILE: &str = "report.csv";
pub const EVAL_CONFIG: &str = "eval.toml";

pub fn run(cfg: &RunConfig) -> Result<()> {
    cfg.check_sweep()?;
    let report = if !cfg.eval.sweep.is_empty() || cfg.eval.groups.is_some() {
        retrain(cfg)?
    } else {
        snapshots(cfg)?
    };
    let csv = report.to_csv_string();
    match cfg.paths.out.as_deref() {
        Some(dir) => {
            fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))?;
            let path = dir.join(REPORT_FILE);
            fs::write(&path, &csv).with_context(|| format!("writing {}", path.display()))?;
            cfg.write_resolved(dir, EVAL_CONFIG)?;
            println!("wrote {} ({} rows)", path.display(), report.rows.len());
        }
        None => print!("{csv}"),
    }
    Ok(())
}

fn foldin_options(cfg: &RunConfig) -> FoldInOptions {
    FoldInOptions {
        sweeps: cfg.eval.foldin_sweeps,
        seed: cfg.model.seed,
    }
}

fn heldout_path(cfg: &RunConfig) -> Result<PathBuf> {
    cfg.paths
        .heldout
        .clone()
        .or_else(|| cfg.paths.corpus.clone())
        .context("fold-in evaluation needs documents (--heldout or --corpus)")
}

/// One row per given snapshot.
fn snapshots(cfg: &RunConfig) -> Result<EvalReport> {
    if cfg.paths.snapshot.is_empty() {
        bail!("nothing to evaluate: give --snapshot, or --sweep / --groups to retrain");
    }
    let mode = cfg.eval.mode;
    let training = match mode {
        PerplexityMode::Training => Some(load_corpus(cfg)?),
        PerplexityMode::Foldin => None,
    };
    let mut report = EvalReport::default();
    for path in &cfg.paths.snapshot {
        let start = Instant::now();
        let model = read_snapshot(path)?;
        let (ppl, dataset) = match &training {
            Some(inputs) => {
                let hash = inputs.corpus.vocab().content_hash();
                if hash != model.vocab_hash() {
                    bail!(
                        "vocabulary hash mismatch: snapshot {} has {}, corpus {} has {} \
                         (preprocess the corpus exactly as for training)",
                        path.display(),
                        model.vocab_hash(),
                        inputs.dataset,
                        hash
                    );
                }
                let ppl = perplexity(&model, &inputs.corpus, mode, None, &FoldInOptions::default())?;
                (ppl, inputs.dataset.clone())
            }
            None => {
                let heldout = heldout_path(cfg)?;
                let (corpus, labels) = load_heldout(cfg, &heldout, &model)?;
                let ppl = perplexity(&model, &corpus, mode, labels.as_ref(), &foldin_options(cfg))?;
                (ppl, dataset_name(&heldout))
            }
        };
        report.push(
            model.identity_hash(),
            EvalRow {
                model_kind: model.kind(),
                k: model.topics(),
                dataset,
                mode,
                perplexity: ppl,
                seed: model.hyperparameters().seed,
                wall_time_s: start.elapsed().as_secs_f64(),
            },
        );
    }
    Ok(report)
}

struct Cell {
    kind: ModelKind,
    topics: Option<usize>,
    end: usize,
    seed: u64,
}

/// Prefix ends for `groups` groups: all but the last hold `size` documents.
pub fn prefix_ends(docs: usize, groups: usize, size: usize) -> Result<Vec<usize>> {
    if groups == 0 || size == 0 {
        bail!("groups and group size must be positive");
    }
    if (groups - 1) * size >= docs {
        bail!(
            "{groups} groups of {size} need more than {} documents, the corpus has {docs}",
            (groups - 1) * size
        );
    }
    Ok((1..=groups).map(|g| if g < groups { g * size } else { docs }).collect())
}

/// Retrains every (prefix, model, K, seed) cell and evaluates it.
fn retrain(cfg: &RunConfig) -> Result<EvalReport> {
    let inputs = load_corpus(cfg)?;
    let n = inputs.corpus.num_docs();
    let ends = match cfg.eval.groups {
        Some(g) => prefix_ends(n, g, cfg.eval.group_size)?,
        None => vec![n],
    };
    let kb = if cfg.eval.models.iter().any(|k| k.uses_concepts()) {
        Some(load_kb(cfg, inputs.corpus.vocab())?)
    } else {
        None
    };
    if cfg.eval.mode == PerplexityMode::Foldin {
        heldout_path(cfg)?;
    }

    let ks: Vec<usize> = if cfg.eval.sweep.is_empty() {
        vec![cfg.model.topics.unwrap_or(DEFAULT_TOPICS)]
    } else {
        cfg.eval.sweep.clone()
    };
    let mut cells = Vec::new();
    for &end in &ends {
        for &kind in &cfg.eval.models {
            // labeled models get one topic per label present in the prefix
            let topics: Vec<Option<usize>> = if kind.uses_labels() {
                vec![None]
            } else {
                ks.iter().copied().map(Some).collect()
            };
            for topics in topics {
                for r in 0..cfg.eval.repeats {
                    cells.push(Cell {
                        kind,
                        topics,
                        end,
                        seed: cfg.model.seed + r as u64,
                    });
                }
            }
        }
    }
    log::info!("{} training runs", cells.len());

    let rows: Vec<(String, EvalRow)> = cells
        .par_iter()
        .map(|cell| run_cell(cfg, &inputs, kb.as_ref(), cell, ends.len() > 1))
        .collect::<Result<_>>()?;
    let mut report = EvalReport::default();
    for (hash, row) in rows {
        report.push(hash, row);
    }
    Ok(report)
}

fn run_cell(
    cfg: &RunConfig,
    inputs: &Inputs,
    kb: Option<&ConceptKb>,
    cell: &Cell,
    prefixed: bool,
) -> Result<(String, EvalRow)> {
    let start = Instant::now();
    let corpus = inputs.corpus.subset(0..cell.end);
    let labels = if cell.kind.uses_labels() {
        Some(inputs.label_set(0..cell.end)?)
    } else {
        None
    };
    let topics = cell
        .topics
        .or(labels.as_ref().map(|l| l.label_count()))
        .expect("unlabeled cells carry K");
    let hp = cfg.model.hyperparameters(cell.kind, topics, cell.seed);
    let kb = kb.filter(|_| cell.kind.uses_concepts());
    let (report, _) = train_model(&corpus, kb, labels.as_ref(), &hp)?;
    let model = report.model;
    let mode = cfg.eval.mode;
    let ppl = match mode {
        PerplexityMode::Training => perplexity(&model, &corpus, mode, None, &FoldInOptions::default())?,
        PerplexityMode::Foldin => {
            let (heldout, labels) = load_heldout(cfg, &heldout_path(cfg)?, &model)?;
            let opts = FoldInOptions {
                seed: cell.seed,
                ..foldin_options(cfg)
            };
            perplexity(&model, &heldout, mode, labels.as_ref(), &opts)?
        }
    };
    let dataset = if prefixed {
        format!("{}[:{}]", inputs.dataset, cell.end)
    } else {
        inputs.dataset.clone()
    };
    Ok((
        model.identity_hash(),
        EvalRow {
            model_kind: cell.kind,
            k: topics,
            dataset,
            mode,
            perplexity: ppl,
            seed: cell.seed,
            wall_time_s: start.elapsed().as_secs_f64(),
        },
    ))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn prefix_schedule() {
        assert_eq!(prefix_ends(1950, 10, 200).unwrap(), vec![200, 400, 600, 800, 1000, 1200, 1400, 1600, 1800, 1950]);
        assert_eq!(prefix_ends(5, 1, 200).unwrap(), vec![5]);
        assert!(prefix_ends(1800, 10, 200).is_err());
        assert!(prefix_ends(10, 0, 2).is_err());
    }
}
