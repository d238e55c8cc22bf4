//! Forward simulation of the four-layer generative process, plus a random
//! knowledge base for fully synthetic experiments.
//!
//! Per topic, phi ~ Dir(beta) over concepts followed by atomic words; per
//! document, theta ~ Dir(alpha) and a zero-truncated Poisson length; per
//! token, a topic from theta, then with probability `atomic_fraction` an
//! atomic word from phi's atomic block, otherwise a concept from phi's
//! concept block and a word from that concept's distribution.

use rand::seq::index::sample as sample_indices;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Gamma, Poisson};
use serde::{Deserialize, Serialize};

use crate::concept_kb::ConceptKb;
use crate::corpus::Corpus;
use crate::error::{Error, Result};
use crate::model::state::draw_categorical;
use crate::vocab::Vocab;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct GenConfig {
    pub topics: usize,
    pub docs: usize,
    pub mean_doc_len: f64,
    pub alpha: f64,
    pub beta: f64,
    /// Probability that a token is emitted from the atomic block.
    pub atomic_fraction: f64,
    /// Number of atomic words (words outside the knowledge base).
    pub atomic_words: usize,
    pub seed: u64,
}

impl Default for GenConfig {
    fn default() -> Self {
        Self {
            topics: 5,
            docs: 500,
            mean_doc_len: 80.0,
            alpha: 0.1,
            beta: 0.1,
            atomic_fraction: 0.3,
            atomic_words: 100,
            seed: 0,
        }
    }
}

impl GenConfig {
    fn validate(&self, kb: &ConceptKb) -> Result<()> {
        let bad = |m: &str| Err(Error::InvalidGenConfig(m.to_string()));
        if self.topics == 0 || self.docs == 0 || !(self.mean_doc_len > 0.0) {
            return bad("topics, docs and mean_doc_len must be positive");
        }
        if !(self.alpha > 0.0 && self.beta > 0.0) {
            return bad("alpha and beta must be positive");
        }
        if !(0.0..=1.0).contains(&self.atomic_fraction) {
            return bad("atomic_fraction must lie in [0, 1]");
        }
        if self.atomic_fraction < 1.0 && kb.is_empty() {
            return bad("concept tokens need a non-empty knowledge base");
        }
        if self.atomic_fraction > 0.0 && self.atomic_words == 0 {
            return bad("atomic tokens need atomic_words >= 1");
        }
        Ok(())
    }

    pub fn atomic_word(j: usize) -> String {
        format!("atom{j}")
    }
}

/// The parameters a generated corpus was drawn from.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GroundTruth {
    pub length_law: String,
    /// Concept names, then atomic words; indexes the columns of `phi`.
    pub entity_names: Vec<String>,
    /// K x (R + m), the Dirichlet draws.
    pub phi: Vec<Vec<f64>>,
    /// K x (R + m), the distribution tokens are actually emitted from: the
    /// concept block of `phi` renormalized and scaled by 1 - atomic_fraction,
    /// the atomic block renormalized and scaled by atomic_fraction.
    pub effective_phi: Vec<Vec<f64>>,
    /// D x K.
    pub theta: Vec<Vec<f64>>,
    /// Per token: (topic, entity) in generator entity ids.
    pub assignments: Vec<Vec<(u32, u32)>>,
}

/// Log of a Gamma(shape, 1) draw; stays finite for tiny shapes where the
/// draw itself underflows.
fn ln_gamma_draw<R: Rng>(rng: &mut R, shape: f64) -> f64 {
    if shape >= 1.0 {
        Gamma::new(shape, 1.0).expect("valid shape").sample(rng).ln()
    } else {
        let g = Gamma::new(shape + 1.0, 1.0).expect("valid shape").sample(rng);
        let u: f64 = rng.random::<f64>().max(f64::MIN_POSITIVE);
        g.ln() + u.ln() / shape
    }
}

/// Symmetric Dirichlet draw, returned as log-weights (unnormalized).
fn ln_dirichlet<R: Rng>(rng: &mut R, shape: f64, len: usize) -> Vec<f64> {
    (0..len).map(|_| ln_gamma_draw(rng, shape)).collect()
}

fn normalize_ln(ln_w: &[f64]) -> Vec<f64> {
    let max = ln_w.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let w: Vec<f64> = ln_w.iter().map(|x| (x - max).exp()).collect();
    let total: f64 = w.iter().sum();
    w.into_iter().map(|x| x / total).collect()
}

pub fn generate_corpus(cfg: &GenConfig, kb: &ConceptKb) -> Result<(Corpus, GroundTruth)> {
    cfg.validate(kb)?;
    let r = kb.concept_count();
    let m = if cfg.atomic_fraction > 0.0 { cfg.atomic_words } else { 0 };
    for j in 0..m {
        if kb.word_vocab().id(&GenConfig::atomic_word(j)).is_some() {
            return Err(Error::InvalidGenConfig(format!(
                "knowledge base already contains {:?}",
                GenConfig::atomic_word(j)
            )));
        }
    }
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);

    let ln_phi: Vec<Vec<f64>> = (0..cfg.topics).map(|_| ln_dirichlet(&mut rng, cfg.beta, r + m)).collect();
    let phi: Vec<Vec<f64>> = ln_phi.iter().map(|row| normalize_ln(row)).collect();
    let concept_block: Vec<Vec<f64>> = ln_phi.iter().map(|row| normalize_ln(&row[..r])).collect();
    let atomic_block: Vec<Vec<f64>> = ln_phi.iter().map(|row| normalize_ln(&row[r..])).collect();
    let lambda: Vec<(Vec<u32>, Vec<f64>)> = (0..r as u32)
        .map(|c| {
            let row = kb.words_of(c);
            (row.iter().map(|e| e.0).collect(), row.iter().map(|e| e.1).collect())
        })
        .collect();

    let poisson = Poisson::new(cfg.mean_doc_len).map_err(|e| Error::InvalidGenConfig(e.to_string()))?;
    let mut theta = Vec::with_capacity(cfg.docs);
    let mut assignments = Vec::with_capacity(cfg.docs);
    let mut docs: Vec<Vec<String>> = Vec::with_capacity(cfg.docs);
    for _ in 0..cfg.docs {
        let th = normalize_ln(&ln_dirichlet(&mut rng, cfg.alpha, cfg.topics));
        let len = loop {
            let n: f64 = poisson.sample(&mut rng);
            if n >= 1.0 {
                break n as usize;
            }
        };
        let mut words = Vec::with_capacity(len);
        let mut zs = Vec::with_capacity(len);
        for _ in 0..len {
            let k = draw_categorical(&mut rng, &th, 1.0);
            let atomic = rng.random::<f64>() < cfg.atomic_fraction;
            if atomic {
                let j = draw_categorical(&mut rng, &atomic_block[k], 1.0);
                words.push(GenConfig::atomic_word(j));
                zs.push((k as u32, (r + j) as u32));
            } else {
                let c = draw_categorical(&mut rng, &concept_block[k], 1.0);
                let (ids, probs) = &lambda[c];
                let total = probs.iter().sum();
                let w = ids[draw_categorical(&mut rng, probs, total)];
                words.push(kb.word_vocab().word(w).expect("kb word").to_string());
                zs.push((k as u32, c as u32));
            }
        }
        theta.push(th);
        assignments.push(zs);
        docs.push(words);
    }

    let a = cfg.atomic_fraction;
    let effective_phi = concept_block
        .iter()
        .zip(&atomic_block)
        .map(|(c, at)| {
            let concept_part = c.iter().map(|p| p * (1.0 - a));
            let atomic_part = at.iter().map(|p| p * a);
            concept_part.chain(atomic_part).collect()
        })
        .collect();
    let mut entity_names: Vec<String> = kb.concept_vocab().iter().map(String::from).collect();
    entity_names.extend((0..m).map(GenConfig::atomic_word));
    let corpus = Corpus::from_tokens(&docs)?;
    Ok((
        corpus,
        GroundTruth {
            length_law: format!("zero-truncated Poisson(mean = {})", cfg.mean_doc_len),
            entity_names,
            phi,
            effective_phi,
            theta,
            assignments,
        },
    ))
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SyntheticKbConfig {
    pub concepts: usize,
    pub words_per_concept: usize,
    /// Concept words are drawn from a shared pool of this many words, so
    /// concepts overlap.
    pub word_pool: usize,
    /// Symmetric Dirichlet concentration of each concept's word distribution.
    pub concentration: f64,
    pub seed: u64,
}

impl Default for SyntheticKbConfig {
    fn default() -> Self {
        Self {
            concepts: 30,
            words_per_concept: 20,
            word_pool: 400,
            concentration: 1.0,
            seed: 0,
        }
    }
}

/// A random knowledge base with concepts `concept{i}` over words `w{j}`.
pub fn synthetic_kb(cfg: &SyntheticKbConfig) -> Result<ConceptKb> {
    if cfg.concepts == 0 || cfg.words_per_concept == 0 || cfg.words_per_concept > cfg.word_pool {
        return Err(Error::InvalidGenConfig(
            "need concepts >= 1 and 1 <= words_per_concept <= word_pool".into(),
        ));
    }
    if !(cfg.concentration > 0.0) {
        return Err(Error::InvalidGenConfig("concentration must be positive".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let words = Vocab::from_words((0..cfg.word_pool).map(|j| format!("w{j}")));
    let rows = (0..cfg.concepts)
        .map(|c| {
            let mut picks: Vec<usize> = sample_indices(&mut rng, cfg.word_pool, cfg.words_per_concept).into_vec();
            picks.sort_unstable();
            let probs = normalize_ln(&ln_dirichlet(&mut rng, cfg.concentration, picks.len()));
            let row = picks
                .into_iter()
                .zip(probs)
                .filter(|&(_, p)| p > 0.0)
                .map(|(w, p)| (w as u32, p.min(1.0)))
                .collect();
            (format!("concept{c}"), row)
        })
        .collect();
    ConceptKb::from_rows(words, rows)
}
