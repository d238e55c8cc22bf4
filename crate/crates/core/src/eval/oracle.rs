//! Brute-force posterior over every joint (topic, entity) assignment of a
//! tiny corpus, scored by the collapsed joint
//!
//! ```text
//! prod_k DirMult(n[k][.] | beta) * prod_d DirMult(n[d][.] | alpha) * prod_tokens P(w|c)
//! ```
//!
//! Used as the reference the Gibbs chains are checked against.

use crate::concept_kb::ConceptKb;
use crate::corpus::{Corpus, LabelSet};
use crate::error::{Error, Result};
use crate::model::entity::EntitySpace;
use crate::model::hyper::Hyperparameters;

pub const ENUMERATION_BOUND: u64 = 10_000_000;

#[derive(Clone, Debug, PartialEq)]
pub struct ExactPosterior {
    /// [doc][position][topic].
    pub topic_marginals: Vec<Vec<Vec<f64>>>,
    /// [doc][position] -> (entity, probability) over the token's options.
    pub entity_marginals: Vec<Vec<Vec<(u32, f64)>>>,
    pub configurations: u64,
}

/// ln Gamma(a + n) - ln Gamma(a) as a sum of logs.
fn ln_rising(a: f64, n: u32) -> f64 {
    (0..n).map(|j| (a + j as f64).ln()).sum()
}

struct Site {
    doc: usize,
    /// (topic, entity, ln P(w|c) or 0 for atomic).
    options: Vec<(usize, usize, f64)>,
}

pub fn exact_posterior(
    corpus: &Corpus,
    kb: Option<&ConceptKb>,
    labels: Option<&LabelSet>,
    hp: &Hyperparameters,
) -> Result<ExactPosterior> {
    hp.validate()?;
    let kind = hp.model_kind;
    let kb = kb.filter(|_| kind.uses_concepts());
    let labels = labels.filter(|_| kind.uses_labels());
    if kind.uses_labels() && labels.is_none() {
        return Err(Error::MissingInput {
            kind: kind.to_string(),
            what: "per-document labels",
        });
    }
    let k_total = hp.topics;
    let es = EntitySpace::build(corpus, kb);
    let e_total = es.len();
    let alpha = hp.alpha.expand(k_total, "alpha")?;
    let beta = hp.beta.expand(e_total, "beta")?;
    let beta_sum: f64 = beta.iter().sum();

    let mut sites = Vec::new();
    for (d, doc) in corpus.docs().iter().enumerate() {
        let topics: Vec<usize> = match labels {
            Some(l) => l.labels(d).iter().map(|&k| k as usize).collect(),
            None => (0..k_total).collect(),
        };
        for &w in doc {
            let mut cands: Vec<(u32, f64)> = kb.map_or_else(Vec::new, |kb| kb.concepts_of(w).to_vec());
            if hp.sampler.normalize_candidates && !cands.is_empty() {
                let s: f64 = cands.iter().map(|c| c.1).sum();
                cands.iter_mut().for_each(|c| c.1 /= s);
            }
            let mut options = Vec::new();
            for &k in &topics {
                if cands.is_empty() {
                    let e = es.atomic_entity(w).expect("atomic word") as usize;
                    options.push((k, e, 0.0));
                } else {
                    for &(c, p) in &cands {
                        options.push((k, c as usize, p.ln()));
                    }
                }
            }
            sites.push(Site { doc: d, options });
        }
    }

    let count = sites.iter().map(|s| s.options.len() as f64).product::<f64>();
    if count > ENUMERATION_BOUND as f64 {
        return Err(Error::EnumerationTooLarge {
            count,
            bound: ENUMERATION_BOUND,
        });
    }

    let n_docs = corpus.num_docs();
    let mut choice = vec![0usize; sites.len()];
    let mut n_ke = vec![0u32; k_total * e_total];
    let mut n_k = vec![0u32; k_total];
    let mut n_dk = vec![0u32; n_docs * k_total];
    let mut option_acc: Vec<Vec<f64>> = sites.iter().map(|s| vec![0.0; s.options.len()]).collect();
    let mut max_score = f64::NEG_INFINITY;
    let mut total = 0.0;
    let mut configurations = 0u64;

    loop {
        n_ke.iter_mut().for_each(|x| *x = 0);
        n_k.iter_mut().for_each(|x| *x = 0);
        n_dk.iter_mut().for_each(|x| *x = 0);
        let mut score = 0.0;
        for (s, &c) in sites.iter().zip(&choice) {
            let (k, e, lp) = s.options[c];
            n_ke[k * e_total + e] += 1;
            n_k[k] += 1;
            n_dk[s.doc * k_total + k] += 1;
            score += lp;
        }
        for k in 0..k_total {
            for e in 0..e_total {
                score += ln_rising(beta[e], n_ke[k * e_total + e]);
            }
            score -= ln_rising(beta_sum, n_k[k]);
        }
        for d in 0..n_docs {
            for k in 0..k_total {
                score += ln_rising(alpha[k], n_dk[d * k_total + k]);
            }
        }

        if score > max_score {
            let scale = (max_score - score).exp();
            total *= scale;
            option_acc.iter_mut().flatten().for_each(|x| *x *= scale);
            max_score = score;
        }
        let weight = (score - max_score).exp();
        total += weight;
        for (acc, &c) in option_acc.iter_mut().zip(&choice) {
            acc[c] += weight;
        }
        configurations += 1;

        // odometer
        let mut pos = 0;
        loop {
            if pos == sites.len() {
                return Ok(finish(corpus, &sites, option_acc, total, k_total, configurations));
            }
            choice[pos] += 1;
            if choice[pos] < sites[pos].options.len() {
                break;
            }
            choice[pos] = 0;
            pos += 1;
        }
    }
}

fn finish(
    corpus: &Corpus,
    sites: &[Site],
    option_acc: Vec<Vec<f64>>,
    total: f64,
    k_total: usize,
    configurations: u64,
) -> ExactPosterior {
    let mut topic_marginals: Vec<Vec<Vec<f64>>> = corpus.docs().iter().map(|d| Vec::with_capacity(d.len())).collect();
    let mut entity_marginals: Vec<Vec<Vec<(u32, f64)>>> =
        corpus.docs().iter().map(|d| Vec::with_capacity(d.len())).collect();
    for (site, acc) in sites.iter().zip(option_acc) {
        let mut topics = vec![0.0; k_total];
        let mut entities: Vec<(u32, f64)> = Vec::new();
        for (&(k, e, _), w) in site.options.iter().zip(acc) {
            let p = w / total;
            topics[k] += p;
            match entities.iter_mut().find(|x| x.0 == e as u32) {
                Some(x) => x.1 += p,
                None => entities.push((e as u32, p)),
            }
        }
        entities.sort_by_key(|x| x.0);
        topic_marginals[site.doc].push(topics);
        entity_marginals[site.doc].push(entities);
    }
    ExactPosterior {
        topic_marginals,
        entity_marginals,
        configurations,
    }
}
