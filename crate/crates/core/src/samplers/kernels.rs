//! Single-site collapsed Gibbs updates.
//!
//! Every kernel expects the token's current assignment to have been removed
//! from the count tables first (`remove_token`) and leaves the counts
//! untouched; `resample_token` does the full remove / draw / place cycle.
//!
//! Concept-backed tokens draw (topic, concept) jointly from the grid of
//! admissible topics x candidate concepts, topic-major, with weight
//!
//! ```text
//! (beta_c + n[k][c]) / (sum(beta) + n[k][.]) * (alpha_k + n[d][k]) / (sum(alpha) + n[d][.]) * P(w|c)
//! ```
//!
//! Atomic tokens keep their entity and draw only the topic, with the same
//! weight minus the P(w|c) factor. Labeled kernels visit only the topics in
//! the document's label set, which is the same as multiplying every weight
//! by the label indicator.

use crate::model::hyper::ModelKind;
use crate::model::state::{draw_categorical, SamplerState, TokenAssignment};

impl SamplerState {
    pub fn remove_token(&mut self, d: usize, i: usize) {
        let a = self.assignments[d][i];
        self.counts.remove(d, a);
    }

    pub fn place_token(&mut self, d: usize, i: usize, a: TokenAssignment) {
        self.assignments[d][i] = a;
        self.counts.add(d, a);
    }

    /// Unrestricted four-layer kernel.
    pub fn sample_token_clda(&mut self, d: usize, i: usize) -> TokenAssignment {
        self.draw_site(d, i, false)
    }

    /// Four-layer kernel restricted to the document's labels.
    ///
    /// Panics if the state carries no label sets.
    pub fn sample_token_cllda(&mut self, d: usize, i: usize) -> TokenAssignment {
        assert!(self.admissible.is_some(), "labeled kernel on an unlabeled state");
        self.draw_site(d, i, true)
    }

    /// Three-layer kernel over the token's word entity; restricted to the
    /// label set when the state is labeled.
    pub fn sample_token_baseline(&mut self, d: usize, i: usize) -> TokenAssignment {
        debug_assert!(self.candidates[self.docs[d][i] as usize].is_empty());
        let restrict = self.admissible.is_some();
        self.draw_site(d, i, restrict)
    }

    /// Removes, redraws and re-places one token using the kernel for the
    /// state's model kind.
    pub fn resample_token(&mut self, d: usize, i: usize) -> TokenAssignment {
        self.remove_token(d, i);
        let a = match self.hp.model_kind {
            ModelKind::Lda | ModelKind::Llda => self.sample_token_baseline(d, i),
            ModelKind::Clda => self.sample_token_clda(d, i),
            ModelKind::Cllda => self.sample_token_cllda(d, i),
        };
        self.place_token(d, i, a);
        a
    }

    fn draw_site(&mut self, d: usize, i: usize, restrict: bool) -> TokenAssignment {
        let w = self.docs[d][i] as usize;
        let SamplerState {
            alpha,
            alpha_sum,
            beta,
            beta_sum,
            entities,
            admissible,
            candidates,
            counts,
            rng,
            scratch,
            all_topics,
            ..
        } = self;
        let topics: &[u32] = if restrict {
            &admissible.as_ref().expect("labeled state")[d]
        } else {
            all_topics
        };
        let doc_norm = *alpha_sum + counts.doc_total(d) as f64;
        let cands = &candidates[w];
        scratch.clear();

        if cands.is_empty() {
            let e = entities
                .atomic_entity(w as u32)
                .expect("atomic word has an entity") as usize;
            let mut total = 0.0;
            for &k in topics {
                let k = k as usize;
                let weight = (beta[e] + counts.topic_entity(k, e) as f64)
                    / (*beta_sum + counts.topic_total(k) as f64)
                    * (alpha[k] + counts.doc_topic(d, k) as f64)
                    / doc_norm;
                total += weight;
                scratch.push(weight);
            }
            let cell = draw_categorical(rng, scratch, total);
            TokenAssignment {
                topic: topics[cell],
                entity: e as u32,
            }
        } else {
            let mut total = 0.0;
            for &k in topics {
                let k = k as usize;
                let doc_term = (alpha[k] + counts.doc_topic(d, k) as f64) / doc_norm;
                let topic_norm = *beta_sum + counts.topic_total(k) as f64;
                for &(c, p) in cands {
                    let c = c as usize;
                    let weight = (beta[c] + counts.topic_entity(k, c) as f64) / topic_norm * doc_term * p;
                    total += weight;
                    scratch.push(weight);
                }
            }
            let cell = draw_categorical(rng, scratch, total);
            let (k, j) = (cell / cands.len(), cell % cands.len());
            TokenAssignment {
                topic: topics[k],
                entity: cands[j].0,
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use crate::concept_kb::ConceptKb;
    use crate::corpus::{Corpus, LabelSet};
    use crate::model::hyper::{Hyperparameters, ModelKind};
    use crate::model::state::init_state;

    #[test]
    fn single_topic_single_candidate_is_certain() {
        let corpus = Corpus::from_tokens(&[vec!["w", "w"]]).unwrap();
        let kb = ConceptKb::from_rows(corpus.vocab().clone(), vec![("c".into(), vec![(0, 0.4)])]).unwrap();
        let hp = Hyperparameters::new(ModelKind::Clda, 1);
        let mut s = init_state(&corpus, Some(&kb), None, &hp).unwrap();
        for _ in 0..100 {
            let a = s.resample_token(0, 1);
            assert_eq!((a.topic, a.entity), (0, 0));
        }
    }

    #[test]
    fn singleton_label_forces_topic() {
        let corpus = Corpus::from_tokens(&[vec!["a", "b", "a"]]).unwrap();
        let kb = ConceptKb::from_rows(corpus.vocab().clone(), vec![("c".into(), vec![(0, 1.0)])]).unwrap();
        let labels = LabelSet::from_ids(
            vec![vec![3]],
            crate::vocab::Vocab::from_words(["l0", "l1", "l2", "l3"]),
        )
        .unwrap();
        let hp = Hyperparameters::new(ModelKind::Cllda, 4);
        let mut s = init_state(&corpus, Some(&kb), Some(&labels), &hp).unwrap();
        for _ in 0..50 {
            for i in 0..3 {
                assert_eq!(s.resample_token(0, i).topic, 3);
            }
        }
        assert!(s.counts_consistent());
    }

    #[test]
    fn baseline_single_topic() {
        let corpus = Corpus::from_tokens(&[vec!["a", "b"]]).unwrap();
        let hp = Hyperparameters::new(ModelKind::Lda, 1);
        let mut s = init_state(&corpus, None, None, &hp).unwrap();
        for _ in 0..20 {
            assert_eq!(s.resample_token(0, 0).topic, 0);
        }
    }
}
