//! Account-level bot scoring: interpretable features, a logistic scorer,
//! and the thresholded bot / human / undecided rule.

mod features;
mod model;

use std::collections::BTreeMap;
use std::path::Path;

use serde::{Deserialize, Serialize};

pub use features::{extract_features, username_randomness, BotFeatureVector, FEATURE_NAMES};
pub use model::{
    loss_and_gradient, regularized_loss, sigmoid, stable_step_bound, train, LogisticModel, Normalization, TrainParams,
    TrainReport,
};

use crate::ingest::{AggregateMap, UserAggregate};
use crate::par::{self, Exec};

pub const DEFAULT_THRESHOLD: f64 = 0.5;
pub const DEFAULT_BAND: f64 = 0.05;

#[derive(Debug, thiserror::Error)]
pub enum BotError {
    #[error("user {author_id}: insufficient data ({missing})")]
    InsufficientData { author_id: String, missing: &'static str },
    #[error("user {0}: last activity precedes account creation")]
    InvalidTimeline(String),
    #[error("empty screen name")]
    EmptyName,
    #[error("model expects {expected} features, got {got}")]
    ModelMismatch { expected: usize, got: usize },
    #[error("training data has a single class or fewer than two examples")]
    DegenerateData,
    #[error("non-finite values: {0}")]
    NonFinite(String),
    #[error("model file: {0}")]
    ModelFile(String),
    #[error("labels file: {0}")]
    LabelsFile(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum BotLabel {
    Bot,
    Human,
    Undecided,
}

impl BotLabel {
    pub fn as_str(self) -> &'static str {
        match self {
            BotLabel::Bot => "bot",
            BotLabel::Human => "human",
            BotLabel::Undecided => "undecided",
        }
    }
}

/// Bot if `score > threshold + band`, human if `score < threshold - band`,
/// undecided otherwise.
pub fn classify(score: f64, threshold: f64, band: f64) -> BotLabel {
    if score > threshold + band {
        BotLabel::Bot
    } else if score < threshold - band {
        BotLabel::Human
    } else {
        BotLabel::Undecided
    }
}

/// Scoring outcome for one account.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BotVerdict {
    pub author_id: String,
    pub score: Option<f64>,
    pub label: BotLabel,
    /// Why the account is undecided without a score.
    pub reason: Option<String>,
}

/// Top `k` active users by tweets posted; ties by ascending author id.
pub fn rank_and_sample_top_k(aggs: &AggregateMap, k: usize) -> Vec<&UserAggregate> {
    let mut users: Vec<&UserAggregate> = aggs.values().filter(|a| a.is_active()).collect();
    users.sort_by(|a, b| b.tweets_posted.cmp(&a.tweets_posted).then_with(|| a.author_id.cmp(&b.author_id)));
    users.truncate(k);
    users
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ClassifyParams {
    pub threshold: f64,
    pub band: f64,
    pub min_period_days: f64,
}

impl Default for ClassifyParams {
    fn default() -> Self {
        ClassifyParams {
            threshold: DEFAULT_THRESHOLD,
            band: DEFAULT_BAND,
            min_period_days: crate::ingest::DEFAULT_MIN_PERIOD_DAYS,
        }
    }
}

/// Score a set of users. Accounts whose features cannot be built (deleted or
/// suspended profiles, missing snapshots) are undecided with a reason.
pub fn score_users(
    users: &[&UserAggregate],
    model: &LogisticModel,
    params: &ClassifyParams,
    exec: Exec,
) -> Result<Vec<BotVerdict>, BotError> {
    model.validate()?;
    if model.dim() != FEATURE_NAMES.len() {
        return Err(BotError::ModelMismatch { expected: FEATURE_NAMES.len(), got: model.dim() });
    }
    par::map(exec, users, |agg| match extract_features(agg, params.min_period_days) {
        Ok(f) => {
            let score = model.score(&f.to_vec())?;
            Ok(BotVerdict {
                author_id: agg.author_id.clone(),
                score: Some(score),
                label: classify(score, params.threshold, params.band),
                reason: None,
            })
        }
        Err(e @ (BotError::InsufficientData { .. } | BotError::InvalidTimeline(_) | BotError::EmptyName)) => {
            Ok(BotVerdict {
                author_id: agg.author_id.clone(),
                score: None,
                label: BotLabel::Undecided,
                reason: Some(e.to_string()),
            })
        }
        Err(e) => Err(e),
    })
    .into_iter()
    .collect()
}

/// Ground-truth labels: CSV with header `author_id,label`, label one of
/// `1`/`0`, `bot`/`human`, `true`/`false`.
pub fn read_labels(path: &Path) -> Result<BTreeMap<String, bool>, BotError> {
    let mut rdr = csv::Reader::from_path(path).map_err(|e| BotError::LabelsFile(e.to_string()))?;
    let mut out = BTreeMap::new();
    for row in rdr.records() {
        let row = row.map_err(|e| BotError::LabelsFile(e.to_string()))?;
        let id = row.get(0).ok_or_else(|| BotError::LabelsFile("missing author_id".into()))?;
        let label = match row.get(1).map(|s| s.trim().to_ascii_lowercase()).as_deref() {
            Some("1" | "bot" | "true") => true,
            Some("0" | "human" | "false") => false,
            other => return Err(BotError::LabelsFile(format!("bad label {other:?} for {id}"))),
        };
        out.insert(id.to_string(), label);
    }
    Ok(out)
}

/// Train a bot model on the labeled users that have extractable features.
pub fn train_from_labels(
    aggs: &AggregateMap,
    labels: &BTreeMap<String, bool>,
    min_period_days: f64,
    params: &TrainParams,
) -> Result<(LogisticModel, TrainReport), BotError> {
    let mut rows = Vec::new();
    let mut ys = Vec::new();
    for (id, &y) in labels {
        if let Some(f) = aggs.get(id).and_then(|a| extract_features(a, min_period_days).ok()) {
            rows.push(f.to_vec());
            ys.push(y);
        }
    }
    let names: Vec<String> = FEATURE_NAMES.iter().map(|s| s.to_string()).collect();
    train(&rows, &ys, &names, params)
}
