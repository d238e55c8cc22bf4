use std::time::Instant;

use log::debug;
use rand::seq::SliceRandom;
use serde::{Deserialize, Serialize};

use crate::model::hyper::ScanOrder;
use crate::model::state::SamplerState;
use crate::model::topic_model::TopicModel;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SweepLog {
    pub sweep: usize,
    /// Sum over tokens of the log of their current smoothed
    /// topic-entity and document-topic ratios (times P(w|c) for concepts).
    pub log_likelihood: f64,
    pub wall_time_s: f64,
}

#[derive(Clone, Debug)]
pub struct GibbsReport {
    pub sweeps: Vec<SweepLog>,
    pub model: TopicModel,
}

impl GibbsReport {
    /// Sweep indices and likelihoods, without timings.
    pub fn trace(&self) -> Vec<(usize, f64)> {
        self.sweeps.iter().map(|s| (s.sweep, s.log_likelihood)).collect()
    }
}

impl SamplerState {
    /// One pass over every token.
    pub fn sweep(&mut self) {
        match self.hp.sampler.scan {
            ScanOrder::Sequential => {
                for d in 0..self.docs.len() {
                    for i in 0..self.docs[d].len() {
                        self.resample_token(d, i);
                    }
                }
            }
            ScanOrder::Random => {
                let mut sites: Vec<(usize, usize)> = self
                    .docs
                    .iter()
                    .enumerate()
                    .flat_map(|(d, doc)| (0..doc.len()).map(move |i| (d, i)))
                    .collect();
                sites.shuffle(&mut self.rng);
                for (d, i) in sites {
                    self.resample_token(d, i);
                }
            }
        }
    }

    pub fn log_likelihood(&self) -> f64 {
        let mut ll = 0.0;
        for (d, doc) in self.assignments.iter().enumerate() {
            let doc_norm = self.alpha_sum + self.counts.doc_total(d) as f64;
            for (i, a) in doc.iter().enumerate() {
                let (k, e) = (a.topic as usize, a.entity as usize);
                let topic_part = (self.beta[e] + self.counts.topic_entity(k, e) as f64)
                    / (self.beta_sum + self.counts.topic_total(k) as f64);
                let doc_part = (self.alpha[k] + self.counts.doc_topic(d, k) as f64) / doc_norm;
                ll += (topic_part * doc_part).ln();
                if self.entities.is_concept(a.entity) {
                    let w = self.docs[d][i] as usize;
                    let p = self.candidates[w]
                        .iter()
                        .find(|c| c.0 == a.entity)
                        .map_or(1.0, |c| c.1);
                    ll += p.ln();
                }
            }
        }
        ll
    }

    pub fn to_model(&self) -> TopicModel {
        TopicModel::from_state(self, self.estimate_phi(), self.estimate_theta())
    }
}

/// Runs the configured number of sweeps and freezes the estimates.
pub fn run_gibbs(state: &mut SamplerState) -> GibbsReport {
    run_gibbs_with(state, |_, _| {})
}

/// Like [`run_gibbs`], calling `observe(sweep, state)` after every sweep.
pub fn run_gibbs_with<F>(state: &mut SamplerState, mut observe: F) -> GibbsReport
where
    F: FnMut(usize, &SamplerState),
{
    let iterations = state.hp.iterations;
    let average_last = state.hp.sampler.average_last;
    let mut sweeps = Vec::with_capacity(iterations);
    let mut phi_acc: Option<Vec<Vec<f64>>> = None;
    let mut theta_acc: Option<Vec<Vec<f64>>> = None;

    for sweep in 0..iterations {
        let start = Instant::now();
        state.sweep();
        let log_likelihood = state.log_likelihood();
        let wall_time_s = start.elapsed().as_secs_f64();
        debug!("sweep {sweep}: log-likelihood {log_likelihood:.4}");
        sweeps.push(SweepLog {
            sweep,
            log_likelihood,
            wall_time_s,
        });
        if average_last > 0 && sweep + average_last >= iterations {
            accumulate(&mut phi_acc, state.estimate_phi());
            accumulate(&mut theta_acc, state.estimate_theta());
        }
        observe(sweep, state);
    }

    let model = match (phi_acc, theta_acc) {
        (Some(phi), Some(theta)) => {
            let scale = 1.0 / average_last as f64;
            TopicModel::from_state(state, scaled(phi, scale), scaled(theta, scale))
        }
        _ => state.to_model(),
    };
    GibbsReport { sweeps, model }
}

fn accumulate(acc: &mut Option<Vec<Vec<f64>>>, m: Vec<Vec<f64>>) {
    match acc {
        None => *acc = Some(m),
        Some(a) => {
            for (ra, rm) in a.iter_mut().zip(m) {
                for (x, y) in ra.iter_mut().zip(rm) {
                    *x += y;
                }
            }
        }
    }
}

fn scaled(mut m: Vec<Vec<f64>>, s: f64) -> Vec<Vec<f64>> {
    m.iter_mut().flatten().for_each(|x| *x *= s);
    m
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus::Corpus;
    use crate::model::hyper::{Hyperparameters, ModelKind};
    use crate::model::state::init_state;

    fn toy() -> Corpus {
        Corpus::from_tokens(&[
            vec!["a", "b", "a", "c"],
            vec!["c", "d", "d"],
            vec!["a", "d", "b", "b", "e"],
        ])
        .unwrap()
    }

    #[test]
    fn one_token_corpus_terminates() {
        let corpus = Corpus::from_tokens(&[vec!["x"]]).unwrap();
        let hp = Hyperparameters::new(ModelKind::Lda, 3);
        let mut s = init_state(&corpus, None, None, &hp).unwrap();
        let report = run_gibbs(&mut s);
        assert_eq!(report.sweeps.len(), 1000);
        let row: f64 = report.model.theta()[0].iter().sum();
        assert!((row - 1.0).abs() < 1e-9);
    }

    #[test]
    fn deterministic_given_seed() {
        let hp = Hyperparameters::new(ModelKind::Lda, 2).with_iterations(30).with_seed(5);
        let run = || {
            let mut s = init_state(&toy(), None, None, &hp).unwrap();
            run_gibbs(&mut s)
        };
        let (a, b) = (run(), run());
        assert_eq!(a.trace(), b.trace());
        assert_eq!(a.model, b.model);
    }

    #[test]
    fn sweeps_conserve_tokens() {
        let hp = Hyperparameters::new(ModelKind::Lda, 3).with_iterations(5);
        let mut s = init_state(&toy(), None, None, &hp).unwrap();
        let total = toy().total_tokens() as u32;
        run_gibbs_with(&mut s, |_, st| {
            let sum: u32 = (0..3).map(|k| st.counts().topic_total(k)).sum();
            assert_eq!(sum, total);
            assert!(st.counts_consistent());
        });
    }

    #[test]
    fn random_scan_and_averaging() {
        let mut hp = Hyperparameters::new(ModelKind::Lda, 2).with_iterations(20);
        hp.sampler.scan = ScanOrder::Random;
        hp.sampler.average_last = 5;
        let mut s = init_state(&toy(), None, None, &hp).unwrap();
        let report = run_gibbs(&mut s);
        for row in report.model.phi().iter().chain(report.model.theta()) {
            assert!((row.iter().sum::<f64>() - 1.0).abs() < 1e-9);
        }
        assert!(s.counts_consistent());
    }
}
