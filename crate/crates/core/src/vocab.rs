use indexmap::IndexSet;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

/// Bidirectional string <-> dense id table. Ids are assigned in insertion order.
#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Vocab {
    words: IndexSet<String>,
}

impl Vocab {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn from_words<I, S>(words: I) -> Self
    where
        I: IntoIterator<Item = S>,
        S: Into<String>,
    {
        let mut vocab = Self::new();
        for w in words {
            vocab.insert(w);
        }
        vocab
    }

    /// Returns the id of `word`, inserting it if absent.
    pub fn insert(&mut self, word: impl Into<String>) -> u32 {
        let (idx, _) = self.words.insert_full(word.into());
        idx as u32
    }

    pub fn id(&self, word: &str) -> Option<u32> {
        self.words.get_index_of(word).map(|i| i as u32)
    }

    pub fn word(&self, id: u32) -> Option<&str> {
        self.words.get_index(id as usize).map(String::as_str)
    }

    pub fn len(&self) -> usize {
        self.words.len()
    }

    pub fn is_empty(&self) -> bool {
        self.words.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = &str> {
        self.words.iter().map(String::as_str)
    }

    /// SHA-256 over the id-ordered word list, hex encoded.
    pub fn content_hash(&self) -> String {
        let mut hasher = Sha256::new();
        for w in &self.words {
            hasher.update((w.len() as u64).to_le_bytes());
            hasher.update(w.as_bytes());
        }
        hex::encode(hasher.finalize())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn ids_follow_insertion_order() {
        let mut v = Vocab::new();
        assert_eq!(v.insert("b"), 0);
        assert_eq!(v.insert("a"), 1);
        assert_eq!(v.insert("b"), 0);
        assert_eq!(v.word(1), Some("a"));
        assert_eq!(v.id("a"), Some(1));
        assert_eq!(v.id("zzz"), None);
    }

    #[test]
    fn hash_depends_on_order() {
        let a = Vocab::from_words(["x", "y"]);
        let b = Vocab::from_words(["y", "x"]);
        assert_ne!(a.content_hash(), b.content_hash());
        // length prefix keeps ["ab","c"] and ["a","bc"] apart
        assert_ne!(
            Vocab::from_words(["ab", "c"]).content_hash(),
            Vocab::from_words(["a", "bc"]).content_hash()
        );
    }
}
