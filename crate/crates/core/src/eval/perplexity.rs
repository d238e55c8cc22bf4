use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::corpus::{Corpus, LabelSet};
use crate::error::{Error, Result};
use crate::eval::topics::word_distributions;
use crate::model::state::draw_categorical;
use crate::model::topic_model::TopicModel;

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum PerplexityMode {
    /// Evaluate the training documents with their trained topic mixtures.
    #[default]
    Training,
    /// Estimate each document's mixture by Gibbs sampling against frozen topics.
    Foldin,
}

impl PerplexityMode {
    pub fn as_str(self) -> &'static str {
        match self {
            PerplexityMode::Training => "training",
            PerplexityMode::Foldin => "foldin",
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FoldInOptions {
    pub sweeps: usize,
    pub seed: u64,
}

impl Default for FoldInOptions {
    fn default() -> Self {
        Self { sweeps: 500, seed: 0 }
    }
}

/// exp(-sum_d log p(w_d) / sum_d N_d), with
/// log p(w_d) = sum_i log sum_k theta[d][k] * p(w_{d,i} | k).
pub fn perplexity(
    model: &TopicModel,
    corpus: &Corpus,
    mode: PerplexityMode,
    labels: Option<&LabelSet>,
    foldin: &FoldInOptions,
) -> Result<f64> {
    check_vocab(model, corpus)?;
    match mode {
        PerplexityMode::Training => {
            if corpus.num_docs() != model.num_docs() {
                return Err(Error::DocCountMismatch {
                    expected: model.num_docs(),
                    found: corpus.num_docs(),
                });
            }
            perplexity_with_theta(model, corpus, model.theta())
        }
        PerplexityMode::Foldin => {
            let theta = fold_in(model, corpus, labels, foldin)?;
            perplexity_with_theta(model, corpus, &theta)
        }
    }
}

fn check_vocab(model: &TopicModel, corpus: &Corpus) -> Result<()> {
    let corpus_hash = corpus.vocab().content_hash();
    if corpus_hash != model.vocab_hash() {
        return Err(Error::VocabMismatch {
            model: model.vocab_hash().to_string(),
            corpus: corpus_hash,
        });
    }
    Ok(())
}

/// Perplexity of `corpus` under the model's topics and the given mixtures.
pub fn perplexity_with_theta(model: &TopicModel, corpus: &Corpus, theta: &[Vec<f64>]) -> Result<f64> {
    check_vocab(model, corpus)?;
    if theta.len() != corpus.num_docs() {
        return Err(Error::DocCountMismatch {
            expected: theta.len(),
            found: corpus.num_docs(),
        });
    }
    let pw = word_distributions(model);
    let mut ll = 0.0;
    for (doc, th) in corpus.docs().iter().zip(theta) {
        for &w in doc {
            let p: f64 = th.iter().zip(&pw).map(|(t, row)| t * row[w as usize]).sum();
            ll += p.ln();
        }
    }
    Ok((-ll / corpus.total_tokens() as f64).exp())
}

/// Per-document topic mixtures for unseen documents, by collapsed Gibbs
/// over topics only with the model's word distributions held fixed.
pub fn fold_in(
    model: &TopicModel,
    corpus: &Corpus,
    labels: Option<&LabelSet>,
    opts: &FoldInOptions,
) -> Result<Vec<Vec<f64>>> {
    check_vocab(model, corpus)?;
    let k_total = model.topics();
    let alpha = model.hyperparameters().alpha.expand(k_total, "alpha")?;
    let alpha_sum: f64 = alpha.iter().sum();
    if let Some(l) = labels {
        if l.num_docs() != corpus.num_docs() {
            return Err(Error::LabelCountMismatch {
                expected: corpus.num_docs(),
                found: l.num_docs(),
            });
        }
    }
    let pw = word_distributions(model);
    let all: Vec<u32> = (0..k_total as u32).collect();
    let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);
    let mut weights = Vec::with_capacity(k_total);
    let mut theta = Vec::with_capacity(corpus.num_docs());

    for (d, doc) in corpus.docs().iter().enumerate() {
        let topics: &[u32] = labels.map_or(&all, |l| l.labels(d));
        let mut z: Vec<u32> = doc
            .iter()
            .map(|_| topics[rng.random_range(0..topics.len())])
            .collect();
        let mut n = vec![0u32; k_total];
        z.iter().for_each(|&k| n[k as usize] += 1);
        for _ in 0..opts.sweeps {
            for (i, &w) in doc.iter().enumerate() {
                n[z[i] as usize] -= 1;
                weights.clear();
                let mut total = 0.0;
                for &k in topics {
                    let k = k as usize;
                    let wt = (alpha[k] + n[k] as f64) * pw[k][w as usize];
                    total += wt;
                    weights.push(wt);
                }
                z[i] = topics[draw_categorical(&mut rng, &weights, total)];
                n[z[i] as usize] += 1;
            }
        }
        let denom = alpha_sum + doc.len() as f64;
        theta.push((0..k_total).map(|k| (alpha[k] + n[k] as f64) / denom).collect());
    }
    Ok(theta)
}
