//! Single-site kernels against direct evaluation of the conditional.

use std::collections::BTreeMap;

use clda_core::model::{EntitySpace, Prior, SamplerState};
use clda_core::{init_state, ConceptKb, Corpus, Hyperparameters, LabelSet, ModelKind, TokenAssignment, Vocab};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

const DRAWS: usize = 100_000;
const K: usize = 3;

type Cell = (u32, u32);

/// Leave-one-out conditional of site (d, i), computed straight from the
/// count tables. The site must already be removed.
fn direct(s: &SamplerState, d: usize, i: usize, restrict: bool) -> BTreeMap<Cell, f64> {
    let c = s.counts();
    let (alpha, beta) = (s.alpha(), s.beta());
    let alpha_sum: f64 = alpha.iter().sum();
    let beta_sum: f64 = beta.iter().sum();
    let w = s.word(d, i);
    let topics: Vec<u32> = match (restrict, s.admissible(d)) {
        (true, Some(l)) => l.to_vec(),
        _ => (0..s.topics() as u32).collect(),
    };
    let entities: Vec<(u32, f64)> = if s.candidates(w).is_empty() {
        vec![(s.entity_space().atomic_entity(w).unwrap(), 1.0)]
    } else {
        s.candidates(w).to_vec()
    };
    let mut out = BTreeMap::new();
    for &k in &topics {
        for &(e, p) in &entities {
            let (ku, eu) = (k as usize, e as usize);
            let topic_side = (beta[eu] + c.topic_entity(ku, eu) as f64) / (beta_sum + c.topic_total(ku) as f64);
            let doc_side = (alpha[ku] + c.doc_topic(d, ku) as f64) / (alpha_sum + c.doc_total(d) as f64);
            out.insert((k, e), topic_side * doc_side * p);
        }
    }
    let z: f64 = out.values().sum();
    out.values_mut().for_each(|v| *v /= z);
    out
}

fn empirical(mut draw: impl FnMut() -> TokenAssignment) -> BTreeMap<Cell, f64> {
    let mut counts = BTreeMap::new();
    for _ in 0..DRAWS {
        let a = draw();
        *counts.entry((a.topic, a.entity)).or_insert(0usize) += 1;
    }
    counts.into_iter().map(|(k, n)| (k, n as f64 / DRAWS as f64)).collect()
}

fn tv(p: &BTreeMap<Cell, f64>, q: &BTreeMap<Cell, f64>) -> f64 {
    let keys: std::collections::BTreeSet<_> = p.keys().chain(q.keys()).collect();
    keys.into_iter()
        .map(|k| (p.get(k).copied().unwrap_or(0.0) - q.get(k).copied().unwrap_or(0.0)).abs())
        .sum::<f64>()
        / 2.0
}

/// A small random corpus, a random KB over its first four words (the last
/// two words stay atomic), random label sets and asymmetric priors; the
/// chain is run a few sweeps so the counts are uneven.
fn random_state(seed: u64, kind: ModelKind) -> SamplerState {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let words = ["w0", "w1", "w2", "w3", "w4", "w5"];
    let docs: Vec<Vec<&str>> = (0..3)
        .map(|d| {
            let mut doc: Vec<&str> = words.iter().copied().filter(|_| d == 0).collect();
            doc.extend((0..8).map(|_| words[rng.random_range(0..words.len())]));
            doc
        })
        .collect();
    let corpus = Corpus::from_tokens(&docs).unwrap();
    let v = corpus.vocab();
    let rows: Vec<(String, Vec<(u32, f64)>)> = (0..3)
        .map(|c| {
            let mut row = Vec::new();
            for w in &words[..4] {
                if rng.random::<f64>() < 0.6 {
                    row.push((v.id(w).unwrap(), rng.random_range(0.05..1.0)));
                }
            }
            (format!("c{c}"), row)
        })
        .collect();
    // make sure w0 has at least two candidates
    let mut rows = rows;
    for r in rows.iter_mut().take(2) {
        let w0 = v.id("w0").unwrap();
        if !r.1.iter().any(|e| e.0 == w0) {
            r.1.push((w0, rng.random_range(0.05..1.0)));
        }
    }
    let kb = ConceptKb::from_rows(v.clone(), rows).unwrap();
    let label_vocab = Vocab::from_words(["a", "b", "c"]);
    let per_doc: Vec<Vec<u32>> = (0..corpus.num_docs())
        .map(|_| {
            let set: Vec<u32> = (0..K as u32).filter(|_| rng.random::<f64>() < 0.6).collect();
            if set.is_empty() { vec![rng.random_range(0..K as u32)] } else { set }
        })
        .collect();
    let labels = LabelSet::from_ids(per_doc, label_vocab).unwrap();

    let e_len = EntitySpace::build(&corpus, kind.uses_concepts().then_some(&kb)).len();
    let alpha: Vec<f64> = (0..K).map(|_| rng.random_range(0.05..2.0)).collect();
    let beta: Vec<f64> = (0..e_len).map(|_| rng.random_range(0.01..1.0)).collect();
    let hp = Hyperparameters::new(kind, K)
        .with_seed(seed)
        .with_alpha(Prior::Vector(alpha))
        .with_beta(Prior::Vector(beta));
    let mut s = init_state(
        &corpus,
        kind.uses_concepts().then_some(&kb),
        kind.uses_labels().then_some(&labels),
        &hp,
    )
    .unwrap();
    for _ in 0..3 {
        s.sweep();
    }
    s
}

fn find_site(s: &SamplerState, concept_backed: bool) -> (usize, usize) {
    for (d, doc) in s.docs().iter().enumerate() {
        for (i, &w) in doc.iter().enumerate() {
            let n = s.candidates(w).len();
            if (concept_backed && n >= 2) || (!concept_backed && n == 0) {
                return (d, i);
            }
        }
    }
    panic!("no suitable site");
}

fn check(s: &mut SamplerState, concept_backed: bool, restrict: bool, kernel: fn(&mut SamplerState, usize, usize) -> TokenAssignment) -> f64 {
    let (d, i) = find_site(s, concept_backed);
    s.remove_token(d, i);
    let want = direct(s, d, i, restrict);
    let got = empirical(|| kernel(s, d, i));
    tv(&got, &want)
}

#[test]
fn clda_concept_backed_kernel_is_exact() {
    for seed in 0..5 {
        let mut s = random_state(seed, ModelKind::Clda);
        let t = check(&mut s, true, false, SamplerState::sample_token_clda);
        assert!(t < 0.01, "seed {seed}: TV {t}");
    }
}

#[test]
fn clda_atomic_kernel_is_exact() {
    for seed in 10..15 {
        let mut s = random_state(seed, ModelKind::Clda);
        let t = check(&mut s, false, false, SamplerState::sample_token_clda);
        assert!(t < 0.01, "seed {seed}: TV {t}");
    }
}

#[test]
fn cllda_kernel_is_exact() {
    for seed in 20..25 {
        let mut s = random_state(seed, ModelKind::Cllda);
        let t = check(&mut s, seed % 2 == 0, true, SamplerState::sample_token_cllda);
        assert!(t < 0.01, "seed {seed}: TV {t}");
    }
}

#[test]
fn baseline_kernel_is_exact() {
    for seed in 30..35 {
        let kind = if seed % 2 == 0 { ModelKind::Lda } else { ModelKind::Llda };
        let mut s = random_state(seed, kind);
        let t = check(&mut s, false, kind.uses_labels(), SamplerState::sample_token_baseline);
        assert!(t < 0.01, "seed {seed}: TV {t}");
    }
}

/// One token "w" with candidates c1 (0.8) and c2 (0.2), K = 2, α = β = 0.01.
/// Other tokens only supply counts, which are then set by hand.
fn hand_state() -> SamplerState {
    let corpus = Corpus::from_tokens(&[vec!["w", "x", "x", "x", "x"]]).unwrap();
    let kb = ConceptKb::from_rows(
        corpus.vocab().clone(),
        vec![("c1".into(), vec![(0, 0.8)]), ("c2".into(), vec![(0, 0.2)])],
    )
    .unwrap();
    let hp = Hyperparameters::new(ModelKind::Clda, 2);
    init_state(&corpus, Some(&kb), None, &hp).unwrap()
}

#[test]
fn two_by_two_hand_counts() {
    let mut s = hand_state();
    s.remove_token(0, 0);
    // entities: 0 = c1, 1 = c2, 2 = atom(x)
    // n[c1][topic 0] = 3, n[c2][topic 1] = 1, n[d][0] = 2, n[d][1] = 1
    s.counts_mut().set_cells(
        &[(0, 0, 3), (0, 1, 0), (0, 2, 0), (1, 0, 0), (1, 1, 1), (1, 2, 0)],
        &[(0, 0, 2), (0, 1, 1)],
    );
    let (a, b) = (0.01, 0.01);
    let (bs, asum) = (3.0 * b, 2.0 * a);
    let nd = 3.0;
    let mut want = BTreeMap::new();
    want.insert((0, 0), (b + 3.0) / (bs + 3.0) * (a + 2.0) / (asum + nd) * 0.8);
    want.insert((0, 1), b / (bs + 3.0) * (a + 2.0) / (asum + nd) * 0.2);
    want.insert((1, 0), b / (bs + 1.0) * (a + 1.0) / (asum + nd) * 0.8);
    want.insert((1, 1), (b + 1.0) / (bs + 1.0) * (a + 1.0) / (asum + nd) * 0.2);
    let z: f64 = want.values().sum();
    want.values_mut().for_each(|v| *v /= z);
    assert!(tv(&direct(&s, 0, 0, false), &want) < 1e-14);

    let got = empirical(|| s.sample_token_clda(0, 0));
    for (cell, p) in &want {
        let q = got.get(cell).copied().unwrap_or(0.0);
        assert!((p - q).abs() < 0.01, "{cell:?}: {q} vs {p}");
    }
}

#[test]
fn zero_counts_two_topics_is_symmetric() {
    let corpus = Corpus::from_tokens(&[vec!["w"]]).unwrap();
    let kb = ConceptKb::from_rows(corpus.vocab().clone(), vec![("c".into(), vec![(0, 0.5)])]).unwrap();
    let mut s = init_state(&corpus, Some(&kb), None, &Hyperparameters::new(ModelKind::Clda, 2)).unwrap();
    s.remove_token(0, 0);
    let hits = (0..10_000).filter(|_| s.sample_token_clda(0, 0).topic == 0).count();
    assert!((hits as f64 / 10_000.0 - 0.5).abs() < 0.015);
}

#[test]
fn two_of_three_labels_never_leaves_the_set() {
    let corpus = Corpus::from_tokens(&[vec!["w"]]).unwrap();
    let kb = ConceptKb::from_rows(corpus.vocab().clone(), vec![("c".into(), vec![(0, 1.0)])]).unwrap();
    let labels = LabelSet::from_ids(vec![vec![0, 1]], Vocab::from_words(["a", "b", "c"])).unwrap();
    let hp = Hyperparameters::new(ModelKind::Cllda, 3);
    let mut s = init_state(&corpus, Some(&kb), Some(&labels), &hp).unwrap();
    s.remove_token(0, 0);
    let mut n = [0usize; 3];
    for _ in 0..10_000 {
        n[s.sample_token_cllda(0, 0).topic as usize] += 1;
    }
    assert_eq!(n[2], 0);
    assert!((n[0] as f64 / 10_000.0 - 0.5).abs() < 0.015);
}

#[test]
fn all_labels_draws_like_unrestricted() {
    let corpus = Corpus::from_tokens(&[vec!["w", "v", "w"], vec!["v", "v"]]).unwrap();
    let kb = ConceptKb::from_rows(
        corpus.vocab().clone(),
        vec![("c1".into(), vec![(0, 0.7)]), ("c2".into(), vec![(0, 0.3), (1, 0.4)])],
    )
    .unwrap();
    let labels = LabelSet::all_topics(2, 3);
    let mut a = init_state(&corpus, Some(&kb), None, &Hyperparameters::new(ModelKind::Clda, 3)).unwrap();
    let mut b = init_state(&corpus, Some(&kb), Some(&labels), &Hyperparameters::new(ModelKind::Cllda, 3)).unwrap();
    a.remove_token(0, 1);
    b.remove_token(0, 1);
    for _ in 0..1000 {
        assert_eq!(a.sample_token_clda(0, 1), b.sample_token_cllda(0, 1));
    }
}

#[test]
fn baseline_uniform_with_four_topics() {
    let corpus = Corpus::from_tokens(&[vec!["w"]]).unwrap();
    let mut s = init_state(&corpus, None, None, &Hyperparameters::new(ModelKind::Lda, 4)).unwrap();
    s.remove_token(0, 0);
    let mut n = [0usize; 4];
    for _ in 0..40_000 {
        n[s.sample_token_baseline(0, 0).topic as usize] += 1;
    }
    for c in n {
        assert!((c as f64 / 40_000.0 - 0.25).abs() < 0.01, "{n:?}");
    }
}

#[test]
fn empty_kb_clda_matches_lda_token_for_token() {
    let corpus = Corpus::from_tokens(&[vec!["a", "b", "a", "c"], vec!["c", "b"]]).unwrap();
    let kb = ConceptKb::empty(corpus.vocab().clone());
    let mut a = init_state(&corpus, Some(&kb), None, &Hyperparameters::new(ModelKind::Clda, 3).with_seed(5)).unwrap();
    let mut b = init_state(&corpus, None, None, &Hyperparameters::new(ModelKind::Lda, 3).with_seed(5)).unwrap();
    for _ in 0..200 {
        for (d, doc) in corpus.docs().iter().enumerate() {
            for i in 0..doc.len() {
                assert_eq!(a.resample_token(d, i), b.resample_token(d, i));
            }
        }
    }
}
