use std::fmt::Write as _;

use anyhow::{Context, Result};
use clda_core::eval::{match_topics, top_terms, TermSpace, TopicMatch};
use clda_core::model::read_snapshot;
use clda_core::TopicModel;

use crate::config::RunConfig;

pub fn run(cfg: &RunConfig) -> Result<()> {
    let path = cfg.paths.snapshot.first().context("inspect needs --snapshot")?;
    let model = read_snapshot(path)?;
    let matched = match &cfg.paths.against {
        Some(p) => {
            let other = read_snapshot(p)?;
            Some((match_topics(&model, &other)?, other))
        }
        None => None,
    };
    print!("{}", render(&model, cfg.inspect.top, matched.as_ref()));
    Ok(())
}

/// Concept clusters are wrapped in `**`, atomic concepts are plain.
fn entity_label(model: &TopicModel, e: u32) -> String {
    match model.entity_name(e) {
        (name, true) => format!("**{name}**"),
        (name, false) => name.to_string(),
    }
}

pub fn render(model: &TopicModel, n: usize, matched: Option<&(TopicMatch, TopicModel)>) -> String {
    let mut out = String::new();
    for k in 0..model.topics() {
        let _ = write!(out, "Topic {}", model.topic_name(k));
        if let Some((m, other)) = matched {
            let p = &m.pairs[k];
            let _ = write!(out, "  matches {} (KL {:.6})", other.topic_name(p.topic_b), p.kl);
        }
        out.push('\n');
        let _ = writeln!(out, "  {:<32} {:>8}   {:<24} {:>8}", "concepts", "", "words", "");
        let entities = top_terms(model, k, n, TermSpace::Entities);
        let words = top_terms(model, k, n, TermSpace::Words);
        for i in 0..entities.len().max(words.len()) {
            let (left, lp) = entities
                .get(i)
                .map_or((String::new(), String::new()), |&(e, p)| (entity_label(model, e), format!("{p:.4}")));
            let (right, rp) = words.get(i).map_or((String::new(), String::new()), |&(w, p)| {
                (model.vocab().word(w).unwrap_or("?").to_string(), format!("{p:.4}"))
            });
            let _ = writeln!(out, "  {left:<32} {lp:>8}   {right:<24} {rp:>8}");
        }
        out.push('\n');
    }
    out
}
