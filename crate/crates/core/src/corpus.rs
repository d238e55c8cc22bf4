//! Text ingestion: tokenization, stop word and frequency filtering, and
//! per-document label sets.

use std::collections::{BTreeSet, HashMap};
use std::fs;
use std::ops::Range;
use std::path::Path;

use log::warn;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::vocab::Vocab;

const DEFAULT_STOPWORDS: &str = include_str!("../data/stopwords_en.txt");

/// The bundled English stop word list.
pub fn default_stopwords() -> BTreeSet<String> {
    parse_stopwords(DEFAULT_STOPWORDS)
}

/// One word per line; blank lines and `#` comments are ignored.
pub fn parse_stopwords(text: &str) -> BTreeSet<String> {
    text.lines()
        .map(str::trim)
        .filter(|l| !l.is_empty() && !l.starts_with('#'))
        .map(str::to_lowercase)
        .collect()
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PreprocessConfig {
    pub stopwords: BTreeSet<String>,
    /// Words with total corpus frequency below this are removed.
    pub min_count: usize,
    pub lowercase: bool,
}

impl Default for PreprocessConfig {
    fn default() -> Self {
        Self {
            stopwords: default_stopwords(),
            min_count: 10,
            lowercase: true,
        }
    }
}

impl PreprocessConfig {
    /// No stop words, no frequency cut, lowercasing on.
    pub fn minimal() -> Self {
        Self {
            stopwords: BTreeSet::new(),
            min_count: 1,
            lowercase: true,
        }
    }

    pub fn with_min_count(mut self, min_count: usize) -> Self {
        self.min_count = min_count;
        self
    }

    fn validate(&self) -> Result<()> {
        if self.min_count == 0 {
            return Err(Error::InvalidPreprocess("min_count must be >= 1".into()));
        }
        Ok(())
    }

    fn is_stopword(&self, token: &str) -> bool {
        !self.stopwords.is_empty() && self.stopwords.contains(&token.to_lowercase())
    }
}

/// Whitespace split, then leading/trailing punctuation stripped from each piece.
pub fn tokenize(text: &str, lowercase: bool) -> Vec<String> {
    text.split_whitespace()
        .map(|t| t.trim_matches(|c: char| !c.is_alphanumeric()))
        .filter(|t| !t.is_empty())
        .map(|t| if lowercase { t.to_lowercase() } else { t.to_string() })
        .collect()
}

/// Tokenized documents over an integer vocabulary.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Corpus {
    docs: Vec<Vec<u32>>,
    vocab: Vocab,
    /// Index of each kept document in the raw input.
    source_index: Vec<usize>,
    /// Raw indices of documents emptied by filtering.
    dropped: Vec<usize>,
}

impl Corpus {
    /// Builds a corpus from already-tokenized documents without any filtering.
    /// Empty documents are dropped.
    pub fn from_tokens<S: AsRef<str>>(docs: &[Vec<S>]) -> Result<Self> {
        let mut vocab = Vocab::new();
        let mut out = Vec::with_capacity(docs.len());
        let mut source_index = Vec::with_capacity(docs.len());
        let mut dropped = Vec::new();
        for (i, doc) in docs.iter().enumerate() {
            if doc.is_empty() {
                dropped.push(i);
                continue;
            }
            out.push(doc.iter().map(|w| vocab.insert(w.as_ref())).collect());
            source_index.push(i);
        }
        Self::finish(out, vocab, source_index, dropped, docs.len())
    }

    /// Builds a corpus from raw token-id sequences over an existing vocabulary.
    pub fn from_ids(docs: Vec<Vec<u32>>, vocab: Vocab) -> Result<Self> {
        let v = vocab.len() as u32;
        if let Some(bad) = docs.iter().flatten().find(|&&w| w >= v) {
            return Err(Error::InvalidPreprocess(format!(
                "token id {bad} outside vocabulary of size {v}"
            )));
        }
        let n = docs.len();
        let mut kept = Vec::with_capacity(n);
        let mut source_index = Vec::with_capacity(n);
        let mut dropped = Vec::new();
        for (i, d) in docs.into_iter().enumerate() {
            if d.is_empty() {
                dropped.push(i);
            } else {
                kept.push(d);
                source_index.push(i);
            }
        }
        Self::finish(kept, vocab, source_index, dropped, n)
    }

    fn finish(
        docs: Vec<Vec<u32>>,
        vocab: Vocab,
        source_index: Vec<usize>,
        dropped: Vec<usize>,
        raw_len: usize,
    ) -> Result<Self> {
        if raw_len == 0 {
            return Err(Error::NoDocuments);
        }
        if docs.is_empty() {
            return Err(Error::EmptyCorpus {
                dropped: dropped.len(),
            });
        }
        if !dropped.is_empty() {
            warn!(
                "{} document(s) empty after preprocessing were dropped",
                dropped.len()
            );
        }
        Ok(Self {
            docs,
            vocab,
            source_index,
            dropped,
        })
    }

    pub fn docs(&self) -> &[Vec<u32>] {
        &self.docs
    }

    pub fn doc(&self, d: usize) -> &[u32] {
        &self.docs[d]
    }

    pub fn vocab(&self) -> &Vocab {
        &self.vocab
    }

    pub fn num_docs(&self) -> usize {
        self.docs.len()
    }

    pub fn vocab_size(&self) -> usize {
        self.vocab.len()
    }

    pub fn doc_lengths(&self) -> Vec<usize> {
        self.docs.iter().map(Vec::len).collect()
    }

    pub fn total_tokens(&self) -> usize {
        self.docs.iter().map(Vec::len).sum()
    }

    pub fn source_index(&self) -> &[usize] {
        &self.source_index
    }

    pub fn dropped(&self) -> &[usize] {
        &self.dropped
    }

    /// The word strings of document `d`.
    pub fn decode(&self, d: usize) -> Vec<&str> {
        self.docs[d]
            .iter()
            .map(|&w| self.vocab.word(w).expect("token id within vocab"))
            .collect()
    }

    /// Documents `range` over the same vocabulary.
    pub fn subset(&self, range: Range<usize>) -> Corpus {
        Corpus {
            docs: self.docs[range.clone()].to_vec(),
            vocab: self.vocab.clone(),
            source_index: self.source_index[range].to_vec(),
            dropped: Vec::new(),
        }
    }

    /// This corpus followed by `other`; both must share the vocabulary.
    pub fn concat(&self, other: &Corpus) -> Result<Corpus> {
        if self.vocab != other.vocab {
            return Err(Error::VocabMismatch {
                model: self.vocab.content_hash(),
                corpus: other.vocab.content_hash(),
            });
        }
        let mut docs = self.docs.clone();
        docs.extend(other.docs.iter().cloned());
        let offset = self.source_index.iter().max().map_or(0, |m| m + 1);
        let mut source_index = self.source_index.clone();
        source_index.extend(other.source_index.iter().map(|i| i + offset));
        Ok(Corpus {
            docs,
            vocab: self.vocab.clone(),
            source_index,
            dropped: Vec::new(),
        })
    }
}

/// Tokenizes and filters `raw_docs`. Vocabulary ids follow first occurrence
/// of each surviving word; token order inside documents is preserved.
pub fn build_corpus<S: AsRef<str>>(raw_docs: &[S], cfg: &PreprocessConfig) -> Result<Corpus> {
    cfg.validate()?;
    if raw_docs.is_empty() {
        return Err(Error::NoDocuments);
    }
    let tokenized: Vec<Vec<String>> = raw_docs
        .iter()
        .map(|d| {
            tokenize(d.as_ref(), cfg.lowercase)
                .into_iter()
                .filter(|t| !cfg.is_stopword(t))
                .collect()
        })
        .collect();

    let mut freq: HashMap<&str, usize> = HashMap::new();
    for t in tokenized.iter().flatten() {
        *freq.entry(t.as_str()).or_default() += 1;
    }

    let filtered: Vec<Vec<&str>> = tokenized
        .iter()
        .map(|doc| {
            doc.iter()
                .map(String::as_str)
                .filter(|t| freq[t] >= cfg.min_count)
                .collect()
        })
        .collect();
    Corpus::from_tokens(&filtered)
}

/// What to do with tokens missing from a fixed vocabulary.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum OovPolicy {
    #[default]
    Reject,
    Skip,
}

/// Tokenizes `raw_docs` against a fixed vocabulary (e.g. a trained model's),
/// applying the stop word list but not the frequency cut. Returns the corpus
/// and the number of skipped out-of-vocabulary tokens.
pub fn build_corpus_with_vocab<S: AsRef<str>>(
    raw_docs: &[S],
    vocab: &Vocab,
    cfg: &PreprocessConfig,
    oov: OovPolicy,
) -> Result<(Corpus, usize)> {
    cfg.validate()?;
    let mut skipped = 0;
    let mut docs = Vec::with_capacity(raw_docs.len());
    for raw in raw_docs {
        let mut ids = Vec::new();
        for t in tokenize(raw.as_ref(), cfg.lowercase) {
            if cfg.is_stopword(&t) {
                continue;
            }
            match (vocab.id(&t), oov) {
                (Some(id), _) => ids.push(id),
                (None, OovPolicy::Skip) => skipped += 1,
                (None, OovPolicy::Reject) => return Err(Error::OutOfVocabulary { word: t }),
            }
        }
        docs.push(ids);
    }
    Ok((Corpus::from_ids(docs, vocab.clone())?, skipped))
}

/// Per-document label sets over a label vocabulary.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct LabelSet {
    labels_per_doc: Vec<Vec<u32>>,
    label_vocab: Vocab,
}

impl LabelSet {
    /// Label sets given directly as ids; each set is sorted and deduplicated.
    pub fn from_ids(per_doc: Vec<Vec<u32>>, label_vocab: Vocab) -> Result<Self> {
        let n = label_vocab.len() as u32;
        let mut labels_per_doc = Vec::with_capacity(per_doc.len());
        for (d, mut set) in per_doc.into_iter().enumerate() {
            if set.is_empty() {
                return Err(Error::EmptyLabelSet { doc: d });
            }
            if let Some(bad) = set.iter().find(|&&l| l >= n) {
                return Err(Error::InvalidPreprocess(format!(
                    "label id {bad} outside label vocabulary of size {n}"
                )));
            }
            set.sort_unstable();
            set.dedup();
            labels_per_doc.push(set);
        }
        Ok(Self {
            labels_per_doc,
            label_vocab,
        })
    }

    /// Every document labeled with every one of `k` labels named `0..k`.
    pub fn all_topics(num_docs: usize, k: usize) -> Self {
        Self {
            labels_per_doc: vec![(0..k as u32).collect(); num_docs],
            label_vocab: Vocab::from_words((0..k).map(|i| i.to_string())),
        }
    }

    pub fn labels(&self, d: usize) -> &[u32] {
        &self.labels_per_doc[d]
    }

    pub fn per_doc(&self) -> &[Vec<u32>] {
        &self.labels_per_doc
    }

    pub fn label_vocab(&self) -> &Vocab {
        &self.label_vocab
    }

    pub fn label_count(&self) -> usize {
        self.label_vocab.len()
    }

    pub fn num_docs(&self) -> usize {
        self.labels_per_doc.len()
    }

    pub fn subset(&self, range: Range<usize>) -> LabelSet {
        LabelSet {
            labels_per_doc: self.labels_per_doc[range].to_vec(),
            label_vocab: self.label_vocab.clone(),
        }
    }
}

/// Maps label names to ids (first occurrence order). `raw_labels` is aligned
/// with the corpus documents, not the raw input.
pub fn attach_labels<S: AsRef<str>>(corpus: &Corpus, raw_labels: &[Vec<S>]) -> Result<LabelSet> {
    if raw_labels.len() != corpus.num_docs() {
        return Err(Error::LabelCountMismatch {
            expected: corpus.num_docs(),
            found: raw_labels.len(),
        });
    }
    let mut label_vocab = Vocab::new();
    let mut per_doc = Vec::with_capacity(raw_labels.len());
    for (d, names) in raw_labels.iter().enumerate() {
        let set: Vec<u32> = names
            .iter()
            .map(|n| n.as_ref().trim())
            .filter(|n| !n.is_empty())
            .map(|n| label_vocab.insert(n))
            .collect();
        if set.is_empty() {
            return Err(Error::EmptyLabelSet { doc: d });
        }
        per_doc.push(set);
    }
    LabelSet::from_ids(per_doc, label_vocab)
}

/// One raw input document.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RawDoc {
    #[serde(default)]
    pub id: Option<String>,
    pub text: String,
    #[serde(default)]
    pub labels: Option<Vec<String>>,
}

/// Reads either plain text (one document per line) or JSON lines with
/// `{id, text, labels[]}` records. The structured form is chosen for a
/// `.jsonl` extension or when the first non-blank line starts with `{`.
pub fn read_raw_docs(path: &Path) -> Result<Vec<RawDoc>> {
    let content = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    let structured = path.extension().is_some_and(|e| e == "jsonl")
        || content
            .lines()
            .find(|l| !l.trim().is_empty())
            .is_some_and(|l| l.trim_start().starts_with('{'));
    let name = path.display().to_string();
    if structured {
        content
            .lines()
            .enumerate()
            .filter(|(_, l)| !l.trim().is_empty())
            .map(|(i, l)| {
                serde_json::from_str::<RawDoc>(l).map_err(|e| Error::parse(&name, i + 1, e.to_string()))
            })
            .collect()
    } else {
        Ok(content
            .lines()
            .map(|l| RawDoc {
                id: None,
                text: l.to_string(),
                labels: None,
            })
            .collect())
    }
}

/// Parses `doc_index<TAB>label1,label2,...` lines into per-raw-document
/// label lists. Documents without a line get an empty list.
pub fn parse_label_lines(text: &str, file: &str, num_raw_docs: usize) -> Result<Vec<Vec<String>>> {
    let mut out = vec![Vec::new(); num_raw_docs];
    for (i, line) in text.lines().enumerate() {
        if line.trim().is_empty() {
            continue;
        }
        let (idx, labels) = line
            .split_once('\t')
            .ok_or_else(|| Error::parse(file, i + 1, "expected doc_index<TAB>labels"))?;
        let idx: usize = idx
            .trim()
            .parse()
            .map_err(|_| Error::parse(file, i + 1, format!("bad document index {idx:?}")))?;
        let slot = out.get_mut(idx).ok_or_else(|| {
            Error::parse(file, i + 1, format!("document index {idx} out of range"))
        })?;
        slot.extend(
            labels
                .split(',')
                .map(str::trim)
                .filter(|l| !l.is_empty())
                .map(String::from),
        );
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn no_stop(min_count: usize) -> PreprocessConfig {
        PreprocessConfig::minimal().with_min_count(min_count)
    }

    #[test]
    fn identity_case() {
        let c = build_corpus(&["x y x"], &no_stop(1)).unwrap();
        assert_eq!(c.num_docs(), 1);
        assert_eq!(c.vocab_size(), 2);
        assert_eq!(c.doc(0), &[0, 1, 0]);
    }

    #[test]
    fn frequency_cut() {
        let raw = ["a a a b"; 3];
        // b occurs 3 times in total: kept at min_count 3, dropped at 4
        let c3 = build_corpus(&raw, &no_stop(3)).unwrap();
        assert_eq!(c3.vocab_size(), 2);
        let c4 = build_corpus(&raw, &no_stop(4)).unwrap();
        assert_eq!(c4.vocab_size(), 1);
        assert_eq!(c4.vocab().word(0), Some("a"));
        for d in 0..3 {
            assert_eq!(c4.doc(d), &[0, 0, 0]);
        }
    }

    #[test]
    fn stopwords_and_punctuation() {
        let cfg = PreprocessConfig::default().with_min_count(1);
        let c = build_corpus(&["The Cat, the HAT!", "a cat..."], &cfg).unwrap();
        assert_eq!(c.decode(0), vec!["cat", "hat"]);
        assert_eq!(c.decode(1), vec!["cat"]);
    }

    #[test]
    fn emptied_docs_are_dropped() {
        let c = build_corpus(&["rare", "common common", "the"], &no_stop(2)).unwrap();
        assert_eq!(c.num_docs(), 1);
        assert_eq!(c.dropped(), &[0, 2]);
        assert_eq!(c.source_index(), &[1]);
    }

    #[test]
    fn all_empty_is_rejected() {
        let err = build_corpus(&["a b", "c"], &no_stop(5)).unwrap_err();
        assert!(matches!(err, Error::EmptyCorpus { dropped: 2 }));
        assert!(matches!(
            build_corpus::<&str>(&[], &no_stop(1)),
            Err(Error::NoDocuments)
        ));
        assert!(build_corpus(&["a"], &no_stop(0)).is_err());
    }

    #[test]
    fn labels_are_mapped_and_deduplicated() {
        let c = build_corpus(&["x", "y"], &no_stop(1)).unwrap();
        let l = attach_labels(&c, &[vec!["kdd"], vec!["kdd", "www", "www"]]).unwrap();
        assert_eq!(l.label_count(), 2);
        assert_eq!(l.labels(0), &[0]);
        assert_eq!(l.labels(1), &[0, 1]);
    }

    #[test]
    fn empty_label_set_rejected() {
        let c = build_corpus(&["x", "y"], &no_stop(1)).unwrap();
        let empty: Vec<&str> = vec![];
        assert!(matches!(
            attach_labels(&c, &[vec!["a"], empty]),
            Err(Error::EmptyLabelSet { doc: 1 })
        ));
        assert!(matches!(
            attach_labels(&c, &[vec!["a"]]),
            Err(Error::LabelCountMismatch { .. })
        ));
    }

    #[test]
    fn label_lines() {
        let parsed = parse_label_lines("0\tkdd\n2\tkdd, www\n", "labels", 3).unwrap();
        assert_eq!(parsed[0], vec!["kdd"]);
        assert!(parsed[1].is_empty());
        assert_eq!(parsed[2], vec!["kdd", "www"]);
        assert!(parse_label_lines("5\tx", "labels", 3).is_err());
        assert!(parse_label_lines("nope", "labels", 3).is_err());
    }

    #[test]
    fn fixed_vocab_mapping() {
        let vocab = Vocab::from_words(["cat", "dog"]);
        let cfg = PreprocessConfig::minimal();
        let (c, skipped) =
            build_corpus_with_vocab(&["cat bird dog"], &vocab, &cfg, OovPolicy::Skip).unwrap();
        assert_eq!(skipped, 1);
        assert_eq!(c.doc(0), &[0, 1]);
        assert!(build_corpus_with_vocab(&["bird"], &vocab, &cfg, OovPolicy::Reject).is_err());
    }
}
