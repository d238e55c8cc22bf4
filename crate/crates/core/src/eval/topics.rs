//! Topic projection onto words, KL topic matching and top-term extraction.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::entity::Entity;
use crate::model::topic_model::TopicModel;

/// p(w | k) = sum over concepts of phi[k][c] * lambda(w|c), plus phi[k][atomic(w)]
/// for atomic words. For three-layer models this is phi row k reindexed by word.
pub fn topic_word_distribution(model: &TopicModel, k: usize) -> Vec<f64> {
    let es = model.entity_space();
    let phi = &model.phi()[k];
    let mut p = vec![0.0; model.vocab().len()];
    for (e, &mass) in phi.iter().enumerate() {
        match es.entity(e as u32) {
            Entity::Concept(c) => {
                for &(w, l) in model.lambda(c) {
                    p[w as usize] += mass * l;
                }
            }
            Entity::Atomic(w) => p[w as usize] += mass,
        }
    }
    p
}

/// K x V projected word distributions.
pub fn word_distributions(model: &TopicModel) -> Vec<Vec<f64>> {
    (0..model.topics()).map(|k| topic_word_distribution(model, k)).collect()
}

/// KL(p || q) in nats. Terms with p = 0 contribute nothing.
pub fn kl_divergence(p: &[f64], q: &[f64]) -> f64 {
    p.iter()
        .zip(q)
        .filter(|(&pi, _)| pi > 0.0)
        .map(|(&pi, &qi)| pi * (pi / qi).ln())
        .sum()
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TopicPair {
    pub topic_a: usize,
    pub topic_b: usize,
    pub kl: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TopicMatch {
    pub pairs: Vec<TopicPair>,
}

/// Matches every topic of `a` to the topic of `b` with the smallest
/// KL(p_a || p_b) over projected word distributions; ties go to the lower
/// index. Several topics of `a` may share a partner.
pub fn match_topics(a: &TopicModel, b: &TopicModel) -> Result<TopicMatch> {
    if a.vocab_hash() != b.vocab_hash() {
        return Err(Error::VocabMismatch {
            model: a.vocab_hash().to_string(),
            corpus: b.vocab_hash().to_string(),
        });
    }
    let pa = word_distributions(a);
    let pb = word_distributions(b);
    let pairs = pa
        .iter()
        .enumerate()
        .map(|(ka, p)| {
            let (topic_b, kl) = pb
                .iter()
                .map(|q| kl_divergence(p, q))
                .enumerate()
                .fold((0, f64::INFINITY), |best, (kb, kl)| if kl < best.1 { (kb, kl) } else { best });
            TopicPair {
                topic_a: ka,
                topic_b,
                kl,
            }
        })
        .collect();
    Ok(TopicMatch { pairs })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum TermSpace {
    /// Concepts and atomic concepts, ranked by phi.
    Entities,
    /// Vocabulary words, ranked by the projected distribution.
    Words,
}

/// The `n` highest-probability ids of topic `k`, descending, ties by id.
pub fn top_terms(model: &TopicModel, k: usize, n: usize, space: TermSpace) -> Vec<(u32, f64)> {
    let row = match space {
        TermSpace::Entities => model.phi()[k].clone(),
        TermSpace::Words => topic_word_distribution(model, k),
    };
    rank(&row, n)
}

pub(crate) fn rank(row: &[f64], n: usize) -> Vec<(u32, f64)> {
    let mut ranked: Vec<(u32, f64)> = row.iter().enumerate().map(|(i, &p)| (i as u32, p)).collect();
    ranked.sort_by(|a, b| b.1.total_cmp(&a.1).then(a.0.cmp(&b.0)));
    ranked.truncate(n);
    ranked
}
