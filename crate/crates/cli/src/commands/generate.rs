use std::fs;
use std::path::Path;

use anyhow::{Context, Result};
use clda_core::samplers::{generate_corpus, synthetic_kb};
use clda_core::{ConceptKb, Vocab};

use crate::config::{optional, RunConfig, RESOLVED_CONFIG};

pub const CORPUS_FILE: &str = "corpus.txt";
pub const TRUTH_FILE: &str = "truth.json";
pub const KB_FILE: &str = "kb.tsv";

fn source_kb(cfg: &RunConfig) -> Result<ConceptKb> {
    if let Some(path) = optional(&cfg.paths.kb, "knowledge base")? {
        let clusters = optional(&cfg.paths.clusters, "clusters")?;
        return Ok(ConceptKb::load(path, clusters, None, &cfg.kb.options())?);
    }
    if cfg.generate.corpus.atomic_fraction < 1.0 {
        return Ok(synthetic_kb(&cfg.generate.synthetic_kb)?);
    }
    Ok(ConceptKb::empty(Vocab::new()))
}

fn write(path: &Path, text: &str) -> Result<()> {
    fs::write(path, text).with_context(|| format!("writing {}", path.display()))
}

pub fn run(cfg: &RunConfig) -> Result<()> {
    let out = cfg.paths.out.as_deref().context("generate needs an output directory (--out)")?;
    let kb = source_kb(cfg)?;
    let gen = &cfg.generate.corpus;
    let (corpus, truth) = generate_corpus(gen, &kb)?;

    fs::create_dir_all(out).with_context(|| format!("creating {}", out.display()))?;
    let mut text = String::new();
    for d in 0..corpus.num_docs() {
        text.push_str(&corpus.decode(d).join(" "));
        text.push('\n');
    }
    write(&out.join(CORPUS_FILE), &text)?;
    write(&out.join(TRUTH_FILE), &(serde_json::to_string_pretty(&truth)? + "\n"))?;
    write(&out.join(KB_FILE), &kb.to_tsv())?;

    // The resolved config doubles as a ready-made training config for the
    // generated files: every word is kept, none is a stop word.
    let mut resolved = cfg.clone();
    resolved.paths.corpus = Some(out.join(CORPUS_FILE));
    resolved.paths.kb = Some(out.join(KB_FILE));
    resolved.paths.clusters = None;
    resolved.preprocess.min_count = 1;
    resolved.preprocess.no_stopwords = true;
    resolved.write_resolved(out, RESOLVED_CONFIG)?;

    println!(
        "generated {} documents, {} tokens (mean length {}, {}), {} concepts",
        corpus.num_docs(),
        corpus.total_tokens(),
        gen.mean_doc_len,
        truth.length_law,
        kb.concept_count()
    );
    println!("wrote {}", out.display());
    Ok(())
}
