pub mod eval;
pub mod generate;
pub mod inspect;
pub mod train;

use std::time::Instant;

use anyhow::Result;
use clda_core::samplers::run_gibbs_with;
use clda_core::{init_state, ConceptKb, Corpus, GibbsReport, Hyperparameters, LabelSet};

/// Initializes and runs one chain, logging progress every 100 sweeps.
pub fn train_model(
    corpus: &Corpus,
    kb: Option<&ConceptKb>,
    labels: Option<&LabelSet>,
    hp: &Hyperparameters,
) -> Result<(GibbsReport, f64)> {
    let start = Instant::now();
    let mut state = init_state(corpus, kb, labels, hp)?;
    let total = hp.iterations;
    let report = run_gibbs_with(&mut state, |sweep, s| {
        if (sweep + 1) % 100 == 0 || sweep + 1 == total {
            log::info!(
                "{} K={} seed={}: sweep {}/{} log-likelihood {:.3}",
                hp.model_kind,
                hp.topics,
                hp.seed,
                sweep + 1,
                total,
                s.log_likelihood()
            );
        }
    });
    Ok((report, start.elapsed().as_secs_f64()))
}
