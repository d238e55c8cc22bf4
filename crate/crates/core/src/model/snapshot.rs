//! Versioned single-file model snapshot.
//!
//! The file is one JSON object:
//!
//! ```text
//! {"format":"clda-snapshot","version":1,"model":{...}}
//! ```
//!
//! Floats are written in shortest round-trip form and parsed with correct
//! rounding, so write -> read -> write is a fixed point.

use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::topic_model::TopicModel;

pub const SNAPSHOT_FORMAT: &str = "clda-snapshot";
pub const SNAPSHOT_VERSION: u32 = 1;

#[derive(Serialize)]
struct EnvelopeRef<'a> {
    format: &'a str,
    version: u32,
    model: &'a TopicModel,
}

#[derive(Deserialize)]
struct Envelope {
    format: String,
    version: u32,
    model: TopicModel,
}

pub fn to_snapshot_string(model: &TopicModel) -> String {
    let mut s = serde_json::to_string(&EnvelopeRef {
        format: SNAPSHOT_FORMAT,
        version: SNAPSHOT_VERSION,
        model,
    })
    .expect("model serializes");
    s.push('\n');
    s
}

pub fn from_snapshot_str(s: &str) -> Result<TopicModel> {
    let env: Envelope = serde_json::from_str(s)?;
    if env.format != SNAPSHOT_FORMAT {
        return Err(Error::Snapshot(format!("unexpected format tag {:?}", env.format)));
    }
    if env.version != SNAPSHOT_VERSION {
        return Err(Error::Snapshot(format!("unsupported snapshot version {}", env.version)));
    }
    Ok(env.model)
}

pub fn write_snapshot(model: &TopicModel, path: &Path) -> Result<()> {
    fs::write(path, to_snapshot_string(model)).map_err(|e| Error::io(path, e))
}

pub fn read_snapshot(path: &Path) -> Result<TopicModel> {
    let s = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    from_snapshot_str(&s)
}
