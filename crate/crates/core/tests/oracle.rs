use clda_core::eval::exact_posterior;
use clda_core::model::Prior;
use clda_core::{init_state, ConceptKb, Corpus, Hyperparameters, LabelSet, ModelKind, Vocab};

const BURN_IN: usize = 1_000;
const KEPT: usize = 50_000;

// Word b has two candidate concepts, z is atomic.
fn fixture() -> (Corpus, ConceptKb) {
    let corpus = Corpus::from_tokens(&[vec!["a", "b", "z"], vec!["b", "c", "b"]]).unwrap();
    let v = corpus.vocab();
    let id = |w| v.id(w).unwrap();
    let kb = ConceptKb::from_rows(
        v.clone(),
        vec![
            ("c1".into(), vec![(id("a"), 0.7), (id("b"), 0.3)]),
            ("c2".into(), vec![(id("b"), 0.6), (id("c"), 0.4)]),
        ],
    )
    .unwrap();
    (corpus, kb)
}

fn hp(kind: ModelKind) -> Hyperparameters {
    Hyperparameters::new(kind, 2)
        .with_alpha(Prior::Vector(vec![0.2, 0.6]))
        .with_beta(0.1)
        .with_seed(11)
}

/// Max over tokens of the TV distance between Gibbs topic frequencies and
/// the exact marginals.
fn max_tv(kind: ModelKind, labels: Option<&LabelSet>) -> f64 {
    let (corpus, kb) = fixture();
    let hp = hp(kind);
    let exact = exact_posterior(&corpus, Some(&kb), labels, &hp).unwrap();
    let mut s = init_state(&corpus, kind.uses_concepts().then_some(&kb), labels, &hp).unwrap();
    for _ in 0..BURN_IN {
        s.sweep();
    }
    let mut tally: Vec<Vec<[usize; 2]>> = corpus.docs().iter().map(|d| vec![[0; 2]; d.len()]).collect();
    for _ in 0..KEPT {
        s.sweep();
        for (d, row) in s.assignments().iter().enumerate() {
            for (i, a) in row.iter().enumerate() {
                tally[d][i][a.topic as usize] += 1;
            }
        }
    }
    let mut worst: f64 = 0.0;
    for (d, row) in tally.iter().enumerate() {
        for (i, counts) in row.iter().enumerate() {
            let t: f64 = (0..2)
                .map(|k| (counts[k] as f64 / KEPT as f64 - exact.topic_marginals[d][i][k]).abs())
                .sum::<f64>()
                / 2.0;
            worst = worst.max(t);
        }
    }
    worst
}

#[test]
fn clda_chain_matches_exact_marginals() {
    let t = max_tv(ModelKind::Clda, None);
    assert!(t <= 0.02, "TV {t}");
}

#[test]
fn lda_chain_matches_exact_marginals() {
    let t = max_tv(ModelKind::Lda, None);
    assert!(t <= 0.02, "TV {t}");
}

#[test]
fn cllda_chain_matches_exact_marginals() {
    let labels = LabelSet::from_ids(vec![vec![0, 1], vec![1]], Vocab::from_words(["x", "y"])).unwrap();
    let t = max_tv(ModelKind::Cllda, Some(&labels));
    assert!(t <= 0.02, "TV {t}");
}

#[test]
fn exact_marginals_are_not_trivially_uniform() {
    let (corpus, kb) = fixture();
    let exact = exact_posterior(&corpus, Some(&kb), None, &hp(ModelKind::Clda)).unwrap();
    assert_eq!(exact.configurations, 2 * 4 * 2 * 4 * 2 * 4);
    for row in &exact.topic_marginals {
        for m in row {
            assert!((m.iter().sum::<f64>() - 1.0).abs() < 1e-12);
        }
    }
    // the second document leans to the heavier alpha topic
    assert!(exact.topic_marginals[1].iter().all(|m| m[1] > 0.6));
    for row in &exact.entity_marginals {
        for m in row {
            assert!((m.iter().map(|e| e.1).sum::<f64>() - 1.0).abs() < 1e-12);
        }
    }
}

#[test]
fn two_token_joint_by_hand() {
    // One document "w w", V = 1, K = 2, alpha = (1, 2). With a single word
    // the topic-side factor is constant, so the joint over (z1, z2) is
    // alpha-Polya: (0,0) 1*2, (1,1) 2*3, mixed 1*2 each, out of 12.
    // Marginal P(z = 0) = (2 + 2) / 12.
    let corpus = Corpus::from_tokens(&[vec!["w", "w"]]).unwrap();
    let hp = Hyperparameters::new(ModelKind::Lda, 2).with_alpha(Prior::Vector(vec![1.0, 2.0]));
    let exact = exact_posterior(&corpus, None, None, &hp).unwrap();
    for m in &exact.topic_marginals[0] {
        assert!((m[0] - 1.0 / 3.0).abs() < 1e-12, "{m:?}");
    }
}
