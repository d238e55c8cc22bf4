//! Concept knowledge base: per-concept word distributions, word -> concept
//! candidate lookup and concept-cluster merging.
//!
//! KB file: UTF-8 TSV, `word<TAB>concept<TAB>probability` per line, where the
//! probability is P(word | concept) in (0, 1]. Cluster file: `concept<TAB>cluster`.
//! Blank lines and lines starting with `#` are skipped in both.

use std::fs;
use std::path::Path;

use indexmap::IndexMap;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};
use crate::vocab::Vocab;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct KbOptions {
    /// Renormalize every concept row to sum to one over the retained words.
    pub renormalize: bool,
    /// Entries with P(w|c) below this are dropped before renormalizing.
    pub min_prob: f64,
}

impl Default for KbOptions {
    fn default() -> Self {
        Self {
            renormalize: true,
            min_prob: 0.0,
        }
    }
}

/// Whether a word is covered by the knowledge base.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum EntityKind {
    ConceptBacked,
    Atomic,
}

/// Raw concept name -> cluster name.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct ClusterMap {
    assignments: IndexMap<String, u32>,
    clusters: Vocab,
}

impl ClusterMap {
    pub fn parse(text: &str, file: &str) -> Result<Self> {
        let mut map = ClusterMap::default();
        for (i, line) in data_lines(text) {
            let mut fields = line.split('\t');
            let (Some(concept), Some(cluster), None) = (fields.next(), fields.next(), fields.next())
            else {
                return Err(Error::parse(file, i, "expected concept<TAB>cluster"));
            };
            let (concept, cluster) = (concept.trim(), cluster.trim());
            if concept.is_empty() || cluster.is_empty() {
                return Err(Error::parse(file, i, "empty concept or cluster name"));
            }
            let id = map.clusters.insert(cluster);
            if let Some(prev) = map.assignments.insert(concept.to_string(), id) {
                if prev != id {
                    return Err(Error::parse(
                        file,
                        i,
                        format!("concept {concept:?} assigned to two clusters"),
                    ));
                }
            }
        }
        Ok(map)
    }

    pub fn cluster_vocab(&self) -> &Vocab {
        &self.clusters
    }

    pub fn cluster_count(&self) -> usize {
        self.clusters.len()
    }

    pub fn cluster_of(&self, concept: &str) -> Option<&str> {
        self.assignments
            .get(concept)
            .and_then(|&id| self.clusters.word(id))
    }

    fn line_of(&self, concept: &str) -> usize {
        self.assignments.get_index_of(concept).map_or(0, |i| i + 1)
    }
}

/// One parsed KB line.
#[derive(Clone, Debug, PartialEq)]
pub struct KbTriple {
    pub word: String,
    pub concept: String,
    pub prob: f64,
}

pub fn parse_kb(text: &str, file: &str) -> Result<Vec<KbTriple>> {
    let mut out = Vec::new();
    for (i, line) in data_lines(text) {
        let fields: Vec<&str> = line.split('\t').collect();
        if fields.len() != 3 {
            return Err(Error::parse(
                file,
                i,
                format!("expected 3 tab-separated fields, found {}", fields.len()),
            ));
        }
        let prob: f64 = fields[2]
            .trim()
            .parse()
            .map_err(|_| Error::parse(file, i, format!("bad probability {:?}", fields[2])))?;
        if !prob.is_finite() || prob <= 0.0 || prob > 1.0 {
            return Err(Error::parse(file, i, format!("probability {prob} outside (0, 1]")));
        }
        let (word, concept) = (fields[0].trim(), fields[1].trim());
        if word.is_empty() || concept.is_empty() {
            return Err(Error::parse(file, i, "empty word or concept"));
        }
        out.push(KbTriple {
            word: word.to_string(),
            concept: concept.to_string(),
            prob,
        });
    }
    Ok(out)
}

fn data_lines(text: &str) -> impl Iterator<Item = (usize, &str)> {
    text.lines()
        .enumerate()
        .map(|(i, l)| (i + 1, l.trim_end_matches('\r')))
        .filter(|(_, l)| !l.trim().is_empty() && !l.starts_with('#'))
}

/// Word <-> concept probability table over a fixed word id space.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ConceptKb {
    concepts: Vocab,
    words: Vocab,
    /// Indexed by word id; sorted by concept id.
    word_to_concepts: Vec<Vec<(u32, f64)>>,
    /// Indexed by concept id; sorted by word id.
    concept_to_words: Vec<Vec<(u32, f64)>>,
}

impl ConceptKb {
    /// A knowledge base with no concepts over `words`; every word is atomic.
    pub fn empty(words: Vocab) -> Self {
        Self {
            concepts: Vocab::new(),
            word_to_concepts: vec![Vec::new(); words.len()],
            concept_to_words: Vec::new(),
            words,
        }
    }

    /// Builds from concept rows of `(word id, P(w|c))`, taken as-is.
    /// Rows with no entries are dropped.
    pub fn from_rows(words: Vocab, rows: Vec<(String, Vec<(u32, f64)>)>) -> Result<Self> {
        let mut concepts = Vocab::new();
        let mut concept_to_words = Vec::new();
        for (name, mut row) in rows {
            if row.is_empty() {
                continue;
            }
            for &(w, p) in &row {
                if w as usize >= words.len() {
                    return Err(Error::InvalidPreprocess(format!(
                        "word id {w} outside word space of size {}",
                        words.len()
                    )));
                }
                if !p.is_finite() || p <= 0.0 || p > 1.0 {
                    return Err(Error::InvalidPreprocess(format!(
                        "probability {p} for concept {name:?} outside (0, 1]"
                    )));
                }
            }
            row.sort_by_key(|&(w, _)| w);
            let before = concepts.len();
            if concepts.insert(name.as_str()) as usize != before {
                return Err(Error::InvalidPreprocess(format!("duplicate concept {name:?}")));
            }
            concept_to_words.push(row);
        }
        let word_to_concepts = transpose(&concept_to_words, words.len());
        Ok(Self {
            concepts,
            words,
            word_to_concepts,
            concept_to_words,
        })
    }

    /// Builds from parsed triples. Cluster members are merged by uniform
    /// average; with `target_vocab` only in-vocabulary words survive and the
    /// word id space becomes that vocabulary.
    pub fn from_triples(
        triples: &[KbTriple],
        clusters: Option<&ClusterMap>,
        target_vocab: Option<&Vocab>,
        opts: &KbOptions,
    ) -> Result<Self> {
        let mut raw: IndexMap<&str, IndexMap<&str, f64>> = IndexMap::new();
        for (i, t) in triples.iter().enumerate() {
            let row = raw.entry(t.concept.as_str()).or_default();
            if row.insert(t.word.as_str(), t.prob).is_some() {
                return Err(Error::parse(
                    "kb",
                    i + 1,
                    format!("duplicate entry ({}, {})", t.word, t.concept),
                ));
            }
        }

        // group raw concepts into (possibly singleton) clusters
        let mut groups: IndexMap<String, Vec<&str>> = IndexMap::new();
        if let Some(cm) = clusters {
            for (concept, _) in cm.assignments.iter() {
                if !raw.contains_key(concept.as_str()) {
                    return Err(Error::UnknownConcept {
                        concept: concept.clone(),
                        line: cm.line_of(concept),
                    });
                }
            }
        }
        for &concept in raw.keys() {
            let name = clusters
                .and_then(|cm| cm.cluster_of(concept))
                .unwrap_or(concept);
            groups.entry(name.to_string()).or_default().push(concept);
        }

        let mut words = target_vocab.cloned().unwrap_or_default();
        let fixed = target_vocab.is_some();
        let mut rows = Vec::with_capacity(groups.len());
        for (name, members) in &groups {
            let share = 1.0 / members.len() as f64;
            let mut merged: IndexMap<&str, f64> = IndexMap::new();
            for m in members {
                for (&w, &p) in &raw[m] {
                    *merged.entry(w).or_default() += share * p;
                }
            }
            let mut row: Vec<(u32, f64)> = Vec::with_capacity(merged.len());
            for (w, p) in merged {
                if p < opts.min_prob {
                    continue;
                }
                let id = if fixed { words.id(w) } else { Some(words.insert(w)) };
                if let Some(id) = id {
                    row.push((id, p));
                }
            }
            if row.is_empty() {
                continue;
            }
            if opts.renormalize || members.len() > 1 {
                let total: f64 = row.iter().map(|&(_, p)| p).sum();
                for e in &mut row {
                    e.1 /= total;
                }
            }
            rows.push((name.clone(), row));
        }
        Self::from_rows(words, rows)
    }

    pub fn load(
        kb_file: &Path,
        clusters: Option<&Path>,
        target_vocab: Option<&Vocab>,
        opts: &KbOptions,
    ) -> Result<Self> {
        let text = fs::read_to_string(kb_file).map_err(|e| Error::io(kb_file, e))?;
        let triples = parse_kb(&text, &kb_file.display().to_string())?;
        let cluster_map = match clusters {
            Some(p) => {
                let text = fs::read_to_string(p).map_err(|e| Error::io(p, e))?;
                Some(ClusterMap::parse(&text, &p.display().to_string())?)
            }
            None => None,
        };
        Self::from_triples(&triples, cluster_map.as_ref(), target_vocab, opts)
    }

    /// The same knowledge base over another word space, rows restricted to
    /// its words and renormalized.
    pub fn restrict_to(&self, vocab: &Vocab) -> ConceptKb {
        let triples = self.triples();
        Self::from_triples(&triples, None, Some(vocab), &KbOptions::default())
            .expect("rows of a loaded knowledge base are valid")
    }

    fn triples(&self) -> Vec<KbTriple> {
        self.concept_to_words
            .iter()
            .enumerate()
            .flat_map(|(c, row)| {
                row.iter().map(move |&(w, p)| KbTriple {
                    word: self.words.word(w).unwrap_or_default().to_string(),
                    concept: self.concepts.word(c as u32).unwrap_or_default().to_string(),
                    prob: p,
                })
            })
            .collect()
    }

    /// Serializes in the KB file format, one line per entry.
    pub fn to_tsv(&self) -> String {
        self.triples()
            .iter()
            .map(|t| format!("{}\t{}\t{}\n", t.word, t.concept, t.prob))
            .collect()
    }

    /// All concepts with P(word|c) > 0, sorted by concept id.
    pub fn concepts_of(&self, word: u32) -> &[(u32, f64)] {
        self.word_to_concepts
            .get(word as usize)
            .map_or(&[], Vec::as_slice)
    }

    pub fn classify_token(&self, word: u32) -> EntityKind {
        if self.concepts_of(word).is_empty() {
            EntityKind::Atomic
        } else {
            EntityKind::ConceptBacked
        }
    }

    /// Word distribution of concept `c`, sorted by word id.
    pub fn words_of(&self, concept: u32) -> &[(u32, f64)] {
        &self.concept_to_words[concept as usize]
    }

    pub fn concept_count(&self) -> usize {
        self.concepts.len()
    }

    pub fn concept_vocab(&self) -> &Vocab {
        &self.concepts
    }

    pub fn word_vocab(&self) -> &Vocab {
        &self.words
    }

    pub fn is_empty(&self) -> bool {
        self.concepts.is_empty()
    }

    /// Rebuilds the word -> concept view from the concept rows.
    pub fn transpose_consistent(&self) -> bool {
        transpose(&self.concept_to_words, self.words.len()) == self.word_to_concepts
    }

    pub fn content_hash(&self) -> String {
        let mut hasher = Sha256::new();
        hasher.update(self.words.content_hash().as_bytes());
        for (c, row) in self.concept_to_words.iter().enumerate() {
            let name = self.concepts.word(c as u32).unwrap_or_default();
            hasher.update((name.len() as u64).to_le_bytes());
            hasher.update(name.as_bytes());
            hasher.update((row.len() as u64).to_le_bytes());
            for &(w, p) in row {
                hasher.update(w.to_le_bytes());
                hasher.update(p.to_bits().to_le_bytes());
            }
        }
        hex::encode(hasher.finalize())
    }
}

fn transpose(rows: &[Vec<(u32, f64)>], width: usize) -> Vec<Vec<(u32, f64)>> {
    let mut out = vec![Vec::new(); width];
    for (c, row) in rows.iter().enumerate() {
        for &(w, p) in row {
            out[w as usize].push((c as u32, p));
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    fn kb(text: &str, clusters: Option<&str>, vocab: Option<&Vocab>) -> Result<ConceptKb> {
        let triples = parse_kb(text, "kb")?;
        let cm = clusters.map(|c| ClusterMap::parse(c, "clusters")).transpose()?;
        ConceptKb::from_triples(&triples, cm.as_ref(), vocab, &KbOptions::default())
    }

    #[test]
    fn plain_load() {
        let kb = kb("dog\tanimal\t0.6\ncat\tanimal\t0.4\n", None, None).unwrap();
        assert_eq!(kb.concept_count(), 1);
        let row = kb.words_of(0);
        assert_eq!(row.len(), 2);
        let sum: f64 = row.iter().map(|e| e.1).sum();
        assert!((sum - 1.0).abs() < 1e-12);
        let dog = kb.word_vocab().id("dog").unwrap();
        assert_eq!(kb.concepts_of(dog), &[(0, 0.6)]);
        assert!(kb.transpose_consistent());
    }

    #[test]
    fn cluster_merge_by_hand() {
        // company: {microsoft .5, google .5}; software company: {microsoft 1}
        // uniform average: microsoft (.5 + 1)/2 = .75, google .25; already sums to 1
        let text = "microsoft\tcompany\t0.5\ngoogle\tcompany\t0.5\nmicrosoft\tsoftware company\t1.0\n";
        let clusters = "company\tcompany\nsoftware company\tcompany\n";
        let kb = kb(text, Some(clusters), None).unwrap();
        assert_eq!(kb.concept_count(), 1);
        assert_eq!(kb.concept_vocab().word(0), Some("company"));
        let ms = kb.word_vocab().id("microsoft").unwrap();
        let cands = kb.concepts_of(ms);
        assert_eq!(cands.len(), 1);
        assert!((cands[0].1 - 0.75).abs() < 1e-12);
        let g = kb.word_vocab().id("google").unwrap();
        assert!((kb.concepts_of(g)[0].1 - 0.25).abs() < 1e-12);
    }

    #[test]
    fn merge_support_is_union() {
        let text = "a\tc1\t0.5\nb\tc1\t0.5\nc\tc2\t0.3\nd\tc2\t0.7\n";
        let kb = kb(text, Some("c1\tk\nc2\tk\n"), None).unwrap();
        let support: Vec<&str> = kb
            .words_of(0)
            .iter()
            .map(|&(w, _)| kb.word_vocab().word(w).unwrap())
            .collect();
        assert_eq!(support, vec!["a", "b", "c", "d"]);
    }

    #[test]
    fn unknown_cluster_member_rejected() {
        let err = kb("a\tc1\t0.5\n", Some("c1\tk\nghost\tk\n"), None).unwrap_err();
        assert!(matches!(err, Error::UnknownConcept { line: 2, .. }));
    }

    #[test]
    fn malformed_lines_rejected_with_line_number() {
        assert!(matches!(
            parse_kb("a\tc\t0.5\nbroken line\n", "kb"),
            Err(Error::Parse { line: 2, .. })
        ));
        assert!(matches!(
            parse_kb("a\tc\t1.5\n", "kb"),
            Err(Error::Parse { line: 1, .. })
        ));
        assert!(parse_kb("a\tc\t0\n", "kb").is_err());
        assert!(parse_kb("a\tc\tNaN\n", "kb").is_err());
        assert!(kb("a\tc\t0.5\na\tc\t0.4\n", None, None).is_err());
    }

    #[test]
    fn restriction_renormalizes_rows() {
        let vocab = Vocab::from_words(["dog", "fish"]);
        let text = "dog\tanimal\t0.5\ncat\tanimal\t0.3\nfish\tanimal\t0.2\nrose\tplant\t1.0\n";
        let kb = kb(text, None, Some(&vocab)).unwrap();
        // plant loses its only word and disappears
        assert_eq!(kb.concept_count(), 1);
        let row = kb.words_of(0);
        assert_eq!(row.len(), 2);
        assert!((row[0].1 - 0.5 / 0.7).abs() < 1e-12);
        assert!((row[1].1 - 0.2 / 0.7).abs() < 1e-12);
        assert_eq!(kb.word_vocab(), &vocab);
    }

    #[test]
    fn pruned_word_becomes_atomic() {
        // "fad" only ever appears with a probability under the floor
        let vocab = Vocab::from_words(["dog", "fad"]);
        let triples = parse_kb("dog\tanimal\t0.9\nfad\tanimal\t0.001\n", "kb").unwrap();
        let opts = KbOptions {
            renormalize: true,
            min_prob: 0.01,
        };
        let kb = ConceptKb::from_triples(&triples, None, Some(&vocab), &opts).unwrap();
        assert_eq!(kb.classify_token(0), EntityKind::ConceptBacked);
        assert_eq!(kb.classify_token(1), EntityKind::Atomic);
        assert!(kb.concepts_of(1).is_empty());
    }

    #[test]
    fn two_candidates() {
        let kb = kb("apple\tfruit\t0.3\napple\tcompany\t0.2\npear\tfruit\t0.7\nibm\tcompany\t0.8\n", None, None)
            .unwrap();
        let apple = kb.word_vocab().id("apple").unwrap();
        let c = kb.concepts_of(apple);
        assert_eq!(c, &[(0, 0.3), (1, 0.2)]);
        assert_eq!(kb.classify_token(apple), EntityKind::ConceptBacked);
    }

    #[test]
    fn raw_mode_keeps_values() {
        let triples = parse_kb("dog\tanimal\t0.2\ncat\tanimal\t0.3\n", "kb").unwrap();
        let opts = KbOptions {
            renormalize: false,
            min_prob: 0.0,
        };
        let kb = ConceptKb::from_triples(&triples, None, None, &opts).unwrap();
        assert_eq!(kb.words_of(0), &[(0, 0.2), (1, 0.3)]);
    }

    #[test]
    fn tsv_round_trip() {
        let base = kb("dog\tanimal\t0.6\ncat\tanimal\t0.4\nrose\tplant\t1\n", None, None).unwrap();
        let again = kb(&base.to_tsv(), None, None).unwrap();
        assert_eq!(again, base);
    }

    #[test]
    fn large_cluster_vocab() {
        let mut text = String::new();
        for i in 0..9638 {
            text.push_str(&format!("concept{i}\tcluster{}\n", i / 2));
        }
        let cm = ClusterMap::parse(&text, "clusters").unwrap();
        assert_eq!(cm.cluster_count(), 4819);
    }
}
