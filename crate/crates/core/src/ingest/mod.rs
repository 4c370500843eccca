//! Archive parsing and per-user aggregation.

mod aggregate;
mod record;
pub mod schema;

use std::io::{BufRead, Write};
use std::path::{Path, PathBuf};

pub use aggregate::{
    activity_period_days, aggregate_users, merge_aggregate_maps, AggregateMap, Latest, MinMax, RetweetSource,
    UserAggregate, DEFAULT_MIN_PERIOD_DAYS, SECONDS_PER_DAY,
};
pub use record::{
    normalize_hashtag, parse_tweet_line, read_archive, scan_str, ArchiveScan, ParseError, ParsedLine, ProfileSnapshot,
    TweetKind, TweetRecord,
};
pub use schema::SchemaConfig;

#[derive(Debug, thiserror::Error)]
pub enum IngestError {
    #[error("{path}: {source}")]
    Io { path: PathBuf, source: std::io::Error },
    #[error("schema config: {0}")]
    Schema(String),
    #[error("user {author_id}: last seen {last_seen} precedes account creation {created}")]
    InvalidTimeline { author_id: String, created: i64, last_seen: i64 },
    #[error("user {author_id}: missing {field}")]
    MissingField { author_id: String, field: &'static str },
    #[error("{path}:{line}: {msg}")]
    Artifact { path: PathBuf, line: usize, msg: String },
}

impl IngestError {
    pub(crate) fn io(path: &Path, source: std::io::Error) -> Self {
        IngestError::Io { path: path.to_path_buf(), source }
    }
}

/// Write one JSON object per line.
pub fn write_jsonl<T: serde::Serialize>(path: &Path, items: impl IntoIterator<Item = T>) -> Result<(), IngestError> {
    let f = std::fs::File::create(path).map_err(|e| IngestError::io(path, e))?;
    let mut w = std::io::BufWriter::new(f);
    for item in items {
        serde_json::to_writer(&mut w, &item).map_err(|e| IngestError::io(path, e.into()))?;
        w.write_all(b"\n").map_err(|e| IngestError::io(path, e))?;
    }
    w.flush().map_err(|e| IngestError::io(path, e))
}

pub fn read_jsonl<T: serde::de::DeserializeOwned>(path: &Path) -> Result<Vec<T>, IngestError> {
    let f = std::fs::File::open(path).map_err(|e| IngestError::io(path, e))?;
    let mut out = Vec::new();
    for (i, line) in std::io::BufReader::new(f).lines().enumerate() {
        let line = line.map_err(|e| IngestError::io(path, e))?;
        if line.trim().is_empty() {
            continue;
        }
        let item = serde_json::from_str(&line).map_err(|e| IngestError::Artifact {
            path: path.to_path_buf(),
            line: i + 1,
            msg: e.to_string(),
        })?;
        out.push(item);
    }
    Ok(out)
}

/// Aggregate table artifact: active users only, one JSON object per line,
/// sorted by author id.
pub fn write_aggregates(path: &Path, aggs: &AggregateMap) -> Result<(), IngestError> {
    write_jsonl(path, aggs.values().filter(|a| a.is_active()))
}

pub fn read_aggregates(path: &Path) -> Result<AggregateMap, IngestError> {
    let v: Vec<UserAggregate> = read_jsonl(path)?;
    Ok(v.into_iter().map(|a| (a.author_id.clone(), a)).collect())
}
