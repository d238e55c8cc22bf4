use std::io;

use serde::{Deserialize, Serialize};

use crate::eval::perplexity::PerplexityMode;
use crate::eval::topics::TopicMatch;
use crate::model::hyper::ModelKind;

pub const CSV_HEADER: &str = "model_kind,K,dataset,mode,perplexity,seed,wall_time_s";

/// One evaluated (model, K, dataset, mode) cell.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EvalRow {
    pub model_kind: ModelKind,
    #[serde(rename = "K")]
    pub k: usize,
    pub dataset: String,
    pub mode: PerplexityMode,
    pub perplexity: f64,
    pub seed: u64,
    pub wall_time_s: f64,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct EvalReport {
    /// Identity hashes of the evaluated models, in row order.
    pub model_hashes: Vec<String>,
    pub rows: Vec<EvalRow>,
    pub topic_match: Option<TopicMatch>,
}

impl EvalReport {
    pub fn push(&mut self, model_hash: String, row: EvalRow) {
        self.model_hashes.push(model_hash);
        self.rows.push(row);
    }

    pub fn write_csv<W: io::Write>(&self, out: W) -> csv::Result<()> {
        let mut w = csv::Writer::from_writer(out);
        if self.rows.is_empty() {
            w.write_record(CSV_HEADER.split(','))?;
        }
        for row in &self.rows {
            w.serialize(row)?;
        }
        w.flush()?;
        Ok(())
    }

    pub fn to_csv_string(&self) -> String {
        let mut buf = Vec::new();
        self.write_csv(&mut buf).expect("writing to memory");
        String::from_utf8(buf).expect("csv is utf-8")
    }
}
