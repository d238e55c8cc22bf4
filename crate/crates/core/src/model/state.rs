use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::concept_kb::ConceptKb;
use crate::corpus::{Corpus, LabelSet};
use crate::error::{Error, Result};
use crate::model::entity::EntitySpace;
use crate::model::hyper::{Hyperparameters, SamplerOptions};
use crate::vocab::Vocab;

/// Latent state of one token: its topic and its concept or atomic entity.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct TokenAssignment {
    pub topic: u32,
    pub entity: u32,
}

/// Sufficient statistics of a chain.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CountTables {
    topics: usize,
    entities: usize,
    /// K x E, row-major.
    topic_entity: Vec<u32>,
    topic_total: Vec<u32>,
    /// D x K, row-major.
    doc_topic: Vec<u32>,
    doc_total: Vec<u32>,
}

impl CountTables {
    pub fn zeros(topics: usize, entities: usize, docs: usize) -> Self {
        Self {
            topics,
            entities,
            topic_entity: vec![0; topics * entities],
            topic_total: vec![0; topics],
            doc_topic: vec![0; docs * topics],
            doc_total: vec![0; docs],
        }
    }

    pub fn from_assignments(
        topics: usize,
        entities: usize,
        assignments: &[Vec<TokenAssignment>],
    ) -> Self {
        let mut t = Self::zeros(topics, entities, assignments.len());
        for (d, doc) in assignments.iter().enumerate() {
            for &a in doc {
                t.add(d, a);
            }
        }
        t
    }

    #[inline]
    pub fn add(&mut self, d: usize, a: TokenAssignment) {
        let k = a.topic as usize;
        self.topic_entity[k * self.entities + a.entity as usize] += 1;
        self.topic_total[k] += 1;
        self.doc_topic[d * self.topics + k] += 1;
        self.doc_total[d] += 1;
    }

    #[inline]
    pub fn remove(&mut self, d: usize, a: TokenAssignment) {
        let k = a.topic as usize;
        self.topic_entity[k * self.entities + a.entity as usize] -= 1;
        self.topic_total[k] -= 1;
        self.doc_topic[d * self.topics + k] -= 1;
        self.doc_total[d] -= 1;
    }

    #[inline]
    pub fn topic_entity(&self, k: usize, e: usize) -> u32 {
        self.topic_entity[k * self.entities + e]
    }

    #[inline]
    pub fn topic_total(&self, k: usize) -> u32 {
        self.topic_total[k]
    }

    #[inline]
    pub fn doc_topic(&self, d: usize, k: usize) -> u32 {
        self.doc_topic[d * self.topics + k]
    }

    #[inline]
    pub fn doc_total(&self, d: usize) -> u32 {
        self.doc_total[d]
    }

    pub fn topic_entity_row(&self, k: usize) -> &[u32] {
        &self.topic_entity[k * self.entities..(k + 1) * self.entities]
    }

    pub fn doc_topic_row(&self, d: usize) -> &[u32] {
        &self.doc_topic[d * self.topics..(d + 1) * self.topics]
    }

    pub fn topics(&self) -> usize {
        self.topics
    }

    pub fn entities(&self) -> usize {
        self.entities
    }

    pub fn docs(&self) -> usize {
        self.doc_total.len()
    }

    /// Directly overwrites cells, for building hand-made states in tests.
    /// Row sums are recomputed from the cells.
    pub fn set_cells(&mut self, topic_entity: &[(usize, usize, u32)], doc_topic: &[(usize, usize, u32)]) {
        for &(k, e, n) in topic_entity {
            self.topic_entity[k * self.entities + e] = n;
        }
        for &(d, k, n) in doc_topic {
            self.doc_topic[d * self.topics + k] = n;
        }
        for k in 0..self.topics {
            self.topic_total[k] = self.topic_entity_row(k).iter().sum();
        }
        for d in 0..self.docs() {
            self.doc_total[d] = self.doc_topic_row(d).iter().sum();
        }
    }
}

/// Mutable state of one collapsed Gibbs chain.
#[derive(Clone, Debug)]
pub struct SamplerState {
    pub(crate) hp: Hyperparameters,
    pub(crate) alpha: Vec<f64>,
    pub(crate) alpha_sum: f64,
    pub(crate) beta: Vec<f64>,
    pub(crate) beta_sum: f64,
    pub(crate) entities: EntitySpace,
    pub(crate) docs: Vec<Vec<u32>>,
    /// Sorted admissible topics per document (labeled models only).
    pub(crate) admissible: Option<Vec<Vec<u32>>>,
    /// `0..K`, the unrestricted topic set.
    pub(crate) all_topics: Vec<u32>,
    /// Per word: candidate concepts with the P(w|c) used in the kernel.
    /// Empty for atomic words.
    pub(crate) candidates: Vec<Vec<(u32, f64)>>,
    pub(crate) assignments: Vec<Vec<TokenAssignment>>,
    pub(crate) counts: CountTables,
    pub(crate) rng: ChaCha8Rng,
    pub(crate) scratch: Vec<f64>,
    pub(crate) vocab: Vocab,
    pub(crate) kb: Option<ConceptKb>,
    pub(crate) label_vocab: Option<Vocab>,
}

/// Draws an index with probability proportional to `weights[i]`, using one
/// uniform variate against the running cumulative sum.
pub(crate) fn draw_categorical<R: Rng>(rng: &mut R, weights: &[f64], total: f64) -> usize {
    let u = rng.random::<f64>() * total;
    let mut acc = 0.0;
    let mut last_positive = 0;
    for (i, &w) in weights.iter().enumerate() {
        if w > 0.0 {
            acc += w;
            last_positive = i;
            if u < acc {
                return i;
            }
        }
    }
    last_positive
}

/// Initializes a chain: uniform topics over each token's admissible set and,
/// for concept-backed tokens, a concept drawn in proportion to P(w|c).
pub fn init_state(
    corpus: &Corpus,
    kb: Option<&ConceptKb>,
    labels: Option<&LabelSet>,
    hp: &Hyperparameters,
) -> Result<SamplerState> {
    hp.validate()?;
    let kind = hp.model_kind;
    let kb = if kind.uses_concepts() {
        let kb = kb.ok_or_else(|| Error::MissingInput {
            kind: kind.to_string(),
            what: "a concept knowledge base",
        })?;
        if kb.word_vocab() != corpus.vocab() {
            return Err(Error::KbVocabMismatch);
        }
        Some(kb)
    } else {
        None
    };
    let admissible = if kind.uses_labels() {
        let labels = labels.ok_or_else(|| Error::MissingInput {
            kind: kind.to_string(),
            what: "per-document labels",
        })?;
        if labels.num_docs() != corpus.num_docs() {
            return Err(Error::LabelCountMismatch {
                expected: corpus.num_docs(),
                found: labels.num_docs(),
            });
        }
        if labels.label_count() != hp.topics {
            return Err(Error::InvalidHyperparameters(format!(
                "labeled models need one topic per label: K = {}, labels = {}",
                hp.topics,
                labels.label_count()
            )));
        }
        if let Some(d) = labels.per_doc().iter().position(Vec::is_empty) {
            return Err(Error::EmptyLabelSet { doc: d });
        }
        Some(labels.per_doc().to_vec())
    } else {
        None
    };

    let entities = EntitySpace::build(corpus, kb);
    let alpha = hp.alpha.expand(hp.topics, "alpha")?;
    let beta = hp.beta.expand(entities.len(), "beta")?;
    let candidates = candidate_table(corpus.vocab_size(), kb, &hp.sampler);

    let mut rng = ChaCha8Rng::seed_from_u64(hp.seed);
    let mut assignments = Vec::with_capacity(corpus.num_docs());
    for (d, doc) in corpus.docs().iter().enumerate() {
        let mut row = Vec::with_capacity(doc.len());
        for &w in doc {
            let topic = match &admissible {
                Some(adm) => adm[d][rng.random_range(0..adm[d].len())],
                None => rng.random_range(0..hp.topics) as u32,
            };
            let cands = &candidates[w as usize];
            let entity = if cands.is_empty() {
                entities.atomic_entity(w).expect("uncovered word has an atomic id")
            } else {
                let weights: Vec<f64> = cands.iter().map(|c| c.1).collect();
                let total = weights.iter().sum();
                cands[draw_categorical(&mut rng, &weights, total)].0
            };
            row.push(TokenAssignment { topic, entity });
        }
        assignments.push(row);
    }
    let counts = CountTables::from_assignments(hp.topics, entities.len(), &assignments);

    Ok(SamplerState {
        alpha_sum: alpha.iter().sum(),
        beta_sum: beta.iter().sum(),
        alpha,
        beta,
        entities,
        docs: corpus.docs().to_vec(),
        admissible,
        all_topics: (0..hp.topics as u32).collect(),
        candidates,
        assignments,
        counts,
        rng,
        scratch: Vec::new(),
        vocab: corpus.vocab().clone(),
        kb: kb.cloned(),
        label_vocab: labels.filter(|_| kind.uses_labels()).map(|l| l.label_vocab().clone()),
        hp: hp.clone(),
    })
}

fn candidate_table(vocab_size: usize, kb: Option<&ConceptKb>, opts: &SamplerOptions) -> Vec<Vec<(u32, f64)>> {
    (0..vocab_size as u32)
        .map(|w| {
            let mut c = kb.map_or_else(Vec::new, |kb| kb.concepts_of(w).to_vec());
            if opts.normalize_candidates && !c.is_empty() {
                let total: f64 = c.iter().map(|e| e.1).sum();
                c.iter_mut().for_each(|e| e.1 /= total);
            }
            c
        })
        .collect()
}

impl SamplerState {
    pub fn hyperparameters(&self) -> &Hyperparameters {
        &self.hp
    }

    pub fn topics(&self) -> usize {
        self.hp.topics
    }

    pub fn entity_space(&self) -> &EntitySpace {
        &self.entities
    }

    pub fn counts(&self) -> &CountTables {
        &self.counts
    }

    /// Mutable count access for hand-built kernel fixtures. Callers are
    /// responsible for keeping the tables meaningful.
    pub fn counts_mut(&mut self) -> &mut CountTables {
        &mut self.counts
    }

    pub fn assignments(&self) -> &[Vec<TokenAssignment>] {
        &self.assignments
    }

    pub fn assignment(&self, d: usize, i: usize) -> TokenAssignment {
        self.assignments[d][i]
    }

    pub fn docs(&self) -> &[Vec<u32>] {
        &self.docs
    }

    pub fn word(&self, d: usize, i: usize) -> u32 {
        self.docs[d][i]
    }

    /// Candidate concepts and kernel P(w|c) for a word; empty when atomic.
    pub fn candidates(&self, word: u32) -> &[(u32, f64)] {
        &self.candidates[word as usize]
    }

    /// Admissible topics of document `d` under a labeled model.
    pub fn admissible(&self, d: usize) -> Option<&[u32]> {
        self.admissible.as_ref().map(|a| a[d].as_slice())
    }

    pub fn alpha(&self) -> &[f64] {
        &self.alpha
    }

    pub fn beta(&self) -> &[f64] {
        &self.beta
    }

    pub fn vocab(&self) -> &Vocab {
        &self.vocab
    }

    pub fn kb(&self) -> Option<&ConceptKb> {
        self.kb.as_ref()
    }

    /// Reseeds the chain's generator.
    pub fn reseed(&mut self, seed: u64) {
        self.rng = ChaCha8Rng::seed_from_u64(seed);
    }

    /// Recomputes the count tables from the assignments and compares.
    pub fn counts_consistent(&self) -> bool {
        let rebuilt = CountTables::from_assignments(self.topics(), self.entities.len(), &self.assignments);
        rebuilt == self.counts
    }

    /// Smoothed topic-entity estimate from the current counts.
    pub fn estimate_phi(&self) -> Vec<Vec<f64>> {
        (0..self.topics())
            .map(|k| {
                let denom = self.beta_sum + self.counts.topic_total(k) as f64;
                self.counts
                    .topic_entity_row(k)
                    .iter()
                    .zip(&self.beta)
                    .map(|(&n, &b)| (b + n as f64) / denom)
                    .collect()
            })
            .collect()
    }

    /// Smoothed document-topic estimate from the current counts. Under a
    /// labeled model topics outside the label set keep their prior mass.
    pub fn estimate_theta(&self) -> Vec<Vec<f64>> {
        (0..self.counts.docs())
            .map(|d| {
                let denom = self.alpha_sum + self.counts.doc_total(d) as f64;
                self.counts
                    .doc_topic_row(d)
                    .iter()
                    .zip(&self.alpha)
                    .map(|(&n, &a)| (a + n as f64) / denom)
                    .collect()
            })
            .collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::hyper::ModelKind;

    fn one_token_corpus() -> Corpus {
        Corpus::from_tokens(&[vec!["w"]]).unwrap()
    }

    #[test]
    fn single_token_single_topic() {
        let corpus = one_token_corpus();
        let kb = ConceptKb::empty(corpus.vocab().clone());
        let hp = Hyperparameters::new(ModelKind::Clda, 1);
        let s = init_state(&corpus, Some(&kb), None, &hp).unwrap();
        assert_eq!(s.assignment(0, 0), TokenAssignment { topic: 0, entity: 0 });
        assert_eq!(s.counts().doc_topic_row(0), &[1]);
        assert!(s.counts_consistent());
    }

    #[test]
    fn init_is_deterministic() {
        let corpus = Corpus::from_tokens(&[vec!["a", "b", "c", "a"], vec!["b", "b"]]).unwrap();
        let hp = Hyperparameters::new(ModelKind::Lda, 3).with_seed(9);
        let a = init_state(&corpus, None, None, &hp).unwrap();
        let b = init_state(&corpus, None, None, &hp).unwrap();
        assert_eq!(a.assignments(), b.assignments());
    }

    #[test]
    fn concept_init_follows_kb_weights() {
        let corpus = one_token_corpus();
        let kb = ConceptKb::from_rows(
            corpus.vocab().clone(),
            vec![("c1".into(), vec![(0, 0.9)]), ("c2".into(), vec![(0, 0.1)])],
        )
        .unwrap();
        let runs = 10_000;
        let mut first = 0;
        for seed in 0..runs {
            let hp = Hyperparameters::new(ModelKind::Clda, 2).with_seed(seed);
            let s = init_state(&corpus, Some(&kb), None, &hp).unwrap();
            if s.assignment(0, 0).entity == 0 {
                first += 1;
            }
        }
        let freq = first as f64 / runs as f64;
        assert!((freq - 0.9).abs() < 0.02, "c1 frequency {freq}");
    }

    #[test]
    fn input_consistency_checks() {
        let corpus = one_token_corpus();
        let hp = Hyperparameters::new(ModelKind::Clda, 2);
        assert!(matches!(
            init_state(&corpus, None, None, &hp),
            Err(Error::MissingInput { .. })
        ));
        let hp = Hyperparameters::new(ModelKind::Llda, 2);
        assert!(init_state(&corpus, None, None, &hp).is_err());
        // K must equal the label count
        let labels = LabelSet::all_topics(1, 3);
        assert!(init_state(&corpus, None, Some(&labels), &hp).is_err());
        let other = ConceptKb::empty(Vocab::from_words(["zz"]));
        let hp = Hyperparameters::new(ModelKind::Clda, 2);
        assert!(matches!(
            init_state(&corpus, Some(&other), None, &hp),
            Err(Error::KbVocabMismatch)
        ));
    }

    #[test]
    fn labeled_init_stays_in_label_set() {
        let corpus = Corpus::from_tokens(&[vec!["a"; 50], vec!["b"; 50]]).unwrap();
        let labels = LabelSet::from_ids(vec![vec![2], vec![0, 1]], Vocab::from_words(["x", "y", "z"])).unwrap();
        let hp = Hyperparameters::new(ModelKind::Llda, 3).with_seed(4);
        let s = init_state(&corpus, None, Some(&labels), &hp).unwrap();
        assert!(s.assignments()[0].iter().all(|a| a.topic == 2));
        assert!(s.assignments()[1].iter().all(|a| a.topic < 2));
    }

    #[test]
    fn phi_by_hand() {
        let corpus = Corpus::from_tokens(&[vec!["a", "b", "c"]]).unwrap();
        let hp = Hyperparameters::new(ModelKind::Lda, 2);
        let mut s = init_state(&corpus, None, None, &hp).unwrap();
        *s.counts_mut() = CountTables::zeros(2, 3, 1);
        for row in s.estimate_phi() {
            for p in row {
                assert!((p - 1.0 / 3.0).abs() < 1e-15);
            }
        }
        s.counts_mut().set_cells(&[(0, 0, 4)], &[]);
        let phi = s.estimate_phi();
        assert!((phi[0][0] - 4.01 / 4.03).abs() < 1e-15);
        assert!((phi[0][1] - 0.01 / 4.03).abs() < 1e-15);
        assert!((phi[0][2] - 0.01 / 4.03).abs() < 1e-15);
        assert!((phi[0].iter().sum::<f64>() - 1.0).abs() < 1e-9);
    }

    #[test]
    fn theta_by_hand() {
        let corpus = Corpus::from_tokens(&[vec!["a"; 7]]).unwrap();
        let hp = Hyperparameters::new(ModelKind::Lda, 2);
        let mut s = init_state(&corpus, None, None, &hp).unwrap();
        s.counts_mut().set_cells(&[], &[(0, 0, 7), (0, 1, 0)]);
        let theta = s.estimate_theta();
        assert!((theta[0][0] - 7.01 / 7.02).abs() < 1e-15);
        assert!((theta[0][1] - 0.01 / 7.02).abs() < 1e-15);
        s.counts_mut().set_cells(&[], &[(0, 0, 0)]);
        let theta = s.estimate_theta();
        assert_eq!(theta[0], vec![0.5, 0.5]);
    }
}
