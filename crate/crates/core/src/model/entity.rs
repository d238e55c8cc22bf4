use serde::{Deserialize, Serialize};

use crate::concept_kb::ConceptKb;
use crate::corpus::Corpus;

/// A topic's support: concept ids `0..R` followed by atomic ids `R..R+m`,
/// one atomic id per vocabulary word the knowledge base does not cover.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(from = "EntitySpaceRepr", into = "EntitySpaceRepr")]
pub struct EntitySpace {
    concept_count: usize,
    /// Atomic index -> word id.
    atomic_words: Vec<u32>,
    /// Word id -> entity id, for atomic words only.
    atomic_of_word: Vec<Option<u32>>,
}

#[derive(Serialize, Deserialize)]
struct EntitySpaceRepr {
    concept_count: usize,
    vocab_size: usize,
    atomic_words: Vec<u32>,
}

impl From<EntitySpaceRepr> for EntitySpace {
    fn from(r: EntitySpaceRepr) -> Self {
        Self::from_parts(r.concept_count, r.atomic_words, r.vocab_size)
    }
}

impl From<EntitySpace> for EntitySpaceRepr {
    fn from(e: EntitySpace) -> Self {
        EntitySpaceRepr {
            concept_count: e.concept_count,
            vocab_size: e.atomic_of_word.len(),
            atomic_words: e.atomic_words,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Entity {
    Concept(u32),
    Atomic(u32),
}

impl EntitySpace {
    /// Atomic ids follow the first occurrence of each uncovered word in the
    /// corpus; uncovered vocabulary words absent from the corpus come last,
    /// in id order. With `kb = None` every word is atomic.
    pub fn build(corpus: &Corpus, kb: Option<&ConceptKb>) -> Self {
        let v = corpus.vocab_size();
        let covered = |w: u32| kb.is_some_and(|kb| !kb.concepts_of(w).is_empty());
        let r = kb.map_or(0, ConceptKb::concept_count);
        let mut atomic_words = Vec::new();
        let mut seen = vec![false; v];
        let first_seen = corpus.docs().iter().flatten().copied();
        for w in first_seen.chain(0..v as u32) {
            if !seen[w as usize] {
                seen[w as usize] = true;
                if !covered(w) {
                    atomic_words.push(w);
                }
            }
        }
        Self::from_parts(r, atomic_words, v)
    }

    fn from_parts(concept_count: usize, atomic_words: Vec<u32>, vocab_size: usize) -> Self {
        let mut atomic_of_word = vec![None; vocab_size];
        for (i, &w) in atomic_words.iter().enumerate() {
            atomic_of_word[w as usize] = Some((concept_count + i) as u32);
        }
        Self {
            concept_count,
            atomic_words,
            atomic_of_word,
        }
    }

    /// E = R + m.
    pub fn len(&self) -> usize {
        self.concept_count + self.atomic_words.len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn concept_count(&self) -> usize {
        self.concept_count
    }

    pub fn atomic_count(&self) -> usize {
        self.atomic_words.len()
    }

    pub fn vocab_size(&self) -> usize {
        self.atomic_of_word.len()
    }

    pub fn atomic_entity(&self, word: u32) -> Option<u32> {
        self.atomic_of_word.get(word as usize).copied().flatten()
    }

    pub fn entity(&self, id: u32) -> Entity {
        let id = id as usize;
        if id < self.concept_count {
            Entity::Concept(id as u32)
        } else {
            Entity::Atomic(self.atomic_words[id - self.concept_count])
        }
    }

    pub fn is_concept(&self, id: u32) -> bool {
        (id as usize) < self.concept_count
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::vocab::Vocab;

    #[test]
    fn atomic_ids_follow_first_occurrence() {
        let vocab = Vocab::from_words(["a", "b", "c", "d"]);
        let corpus = Corpus::from_ids(vec![vec![2, 0, 2], vec![1]], vocab.clone()).unwrap();
        let kb = ConceptKb::from_rows(vocab, vec![("k".into(), vec![(0, 1.0)])]).unwrap();
        let es = EntitySpace::build(&corpus, Some(&kb));
        assert_eq!(es.concept_count(), 1);
        assert_eq!(es.len(), 4);
        assert_eq!(es.atomic_entity(2), Some(1));
        assert_eq!(es.atomic_entity(1), Some(2));
        // "d" never occurs but is still uncovered
        assert_eq!(es.atomic_entity(3), Some(3));
        assert_eq!(es.atomic_entity(0), None);
        assert_eq!(es.entity(0), Entity::Concept(0));
        assert_eq!(es.entity(1), Entity::Atomic(2));
    }

    #[test]
    fn without_kb_entities_are_words() {
        let corpus = Corpus::from_tokens(&[vec!["x", "y", "x"], vec!["z"]]).unwrap();
        let es = EntitySpace::build(&corpus, None);
        assert_eq!(es.len(), 3);
        for w in 0..3 {
            assert_eq!(es.atomic_entity(w), Some(w));
        }
    }

    #[test]
    fn serde_rebuilds_lookup() {
        let corpus = Corpus::from_tokens(&[vec!["x", "y"]]).unwrap();
        let es = EntitySpace::build(&corpus, None);
        let json = serde_json::to_string(&es).unwrap();
        let back: EntitySpace = serde_json::from_str(&json).unwrap();
        assert_eq!(back, es);
    }
}
