use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::concept_kb::ConceptKb;
use crate::error::{Error, Result};
use crate::model::entity::{Entity, EntitySpace};
use crate::model::hyper::{Hyperparameters, ModelKind};
use crate::model::state::SamplerState;
use crate::vocab::Vocab;

/// Frozen estimates of a trained chain plus everything evaluation needs:
/// the entity space, the vocabulary and the concept word distributions.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TopicModel {
    hyperparameters: Hyperparameters,
    entities: EntitySpace,
    vocab: Vocab,
    vocab_hash: String,
    concepts: Vocab,
    /// Concept -> (word id, P(w|c)), sorted by word id.
    lambda: Vec<Vec<(u32, f64)>>,
    kb_hash: Option<String>,
    label_vocab: Option<Vocab>,
    /// K x E.
    phi: Vec<Vec<f64>>,
    /// D x K.
    theta: Vec<Vec<f64>>,
}

impl TopicModel {
    pub fn new(
        hyperparameters: Hyperparameters,
        entities: EntitySpace,
        vocab: Vocab,
        kb: Option<&ConceptKb>,
        label_vocab: Option<Vocab>,
        phi: Vec<Vec<f64>>,
        theta: Vec<Vec<f64>>,
    ) -> Result<Self> {
        let k = hyperparameters.topics;
        if phi.len() != k || phi.iter().any(|r| r.len() != entities.len()) {
            return Err(Error::Snapshot(format!(
                "phi must be {k} x {}",
                entities.len()
            )));
        }
        if theta.iter().any(|r| r.len() != k) {
            return Err(Error::Snapshot(format!("theta rows must have {k} entries")));
        }
        if entities.vocab_size() != vocab.len() {
            return Err(Error::Snapshot("entity space and vocabulary disagree".into()));
        }
        let r = entities.concept_count();
        let (concepts, lambda, kb_hash) = match kb {
            Some(kb) if r > 0 => {
                if kb.concept_count() != r || kb.word_vocab() != &vocab {
                    return Err(Error::KbVocabMismatch);
                }
                let rows = (0..r as u32).map(|c| kb.words_of(c).to_vec()).collect();
                (kb.concept_vocab().clone(), rows, Some(kb.content_hash()))
            }
            _ if r > 0 => return Err(Error::Snapshot("concept entities need a knowledge base".into())),
            Some(kb) => (Vocab::new(), Vec::new(), Some(kb.content_hash())),
            None => (Vocab::new(), Vec::new(), None),
        };
        Ok(Self {
            hyperparameters,
            vocab_hash: vocab.content_hash(),
            entities,
            vocab,
            concepts,
            lambda,
            kb_hash,
            label_vocab,
            phi,
            theta,
        })
    }

    pub(crate) fn from_state(state: &SamplerState, phi: Vec<Vec<f64>>, theta: Vec<Vec<f64>>) -> Self {
        Self::new(
            state.hp.clone(),
            state.entities.clone(),
            state.vocab.clone(),
            state.kb.as_ref(),
            state.label_vocab.clone(),
            phi,
            theta,
        )
        .expect("sampler state is internally consistent")
    }

    pub fn hyperparameters(&self) -> &Hyperparameters {
        &self.hyperparameters
    }

    pub fn kind(&self) -> ModelKind {
        self.hyperparameters.model_kind
    }

    pub fn topics(&self) -> usize {
        self.hyperparameters.topics
    }

    pub fn num_docs(&self) -> usize {
        self.theta.len()
    }

    pub fn entity_space(&self) -> &EntitySpace {
        &self.entities
    }

    pub fn vocab(&self) -> &Vocab {
        &self.vocab
    }

    pub fn vocab_hash(&self) -> &str {
        &self.vocab_hash
    }

    pub fn kb_hash(&self) -> Option<&str> {
        self.kb_hash.as_deref()
    }

    pub fn label_vocab(&self) -> Option<&Vocab> {
        self.label_vocab.as_ref()
    }

    pub fn phi(&self) -> &[Vec<f64>] {
        &self.phi
    }

    pub fn theta(&self) -> &[Vec<f64>] {
        &self.theta
    }

    /// Word distribution of concept `c`.
    pub fn lambda(&self, c: u32) -> &[(u32, f64)] {
        &self.lambda[c as usize]
    }

    /// Display name of an entity and whether it is a (clustered) concept.
    pub fn entity_name(&self, e: u32) -> (&str, bool) {
        match self.entities.entity(e) {
            Entity::Concept(c) => (self.concepts.word(c).unwrap_or("?"), true),
            Entity::Atomic(w) => (self.vocab.word(w).unwrap_or("?"), false),
        }
    }

    /// Name of topic `k`: its label under labeled models, else its index.
    pub fn topic_name(&self, k: usize) -> String {
        self.label_vocab
            .as_ref()
            .and_then(|l| l.word(k as u32))
            .map_or_else(|| k.to_string(), str::to_string)
    }

    /// SHA-256 of the canonical snapshot encoding.
    pub fn identity_hash(&self) -> String {
        let json = serde_json::to_vec(self).expect("model serializes");
        hex::encode(Sha256::digest(json))
    }
}
