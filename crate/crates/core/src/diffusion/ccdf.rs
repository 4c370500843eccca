use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use super::DiffusionError;
use crate::botmeter::BotLabel;
use crate::ingest::{TweetKind, TweetRecord};

/// Empirical `P(X >= v)` at each distinct sample value.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CcdfSeries {
    /// `(value, probability)`, ascending values.
    pub points: Vec<(f64, f64)>,
    pub n: usize,
}

pub fn ccdf(values: &[f64]) -> Result<CcdfSeries, DiffusionError> {
    if values.is_empty() {
        return Err(DiffusionError::EmptyInput);
    }
    if values.iter().any(|v| !v.is_finite() || *v < 0.0) {
        return Err(DiffusionError::InvalidValue);
    }
    let mut sorted = values.to_vec();
    sorted.sort_by(|a, b| a.total_cmp(b));
    let n = sorted.len();
    let mut points = Vec::new();
    let mut i = 0;
    while i < n {
        let v = sorted[i];
        points.push((v, (n - i) as f64 / n as f64));
        while i < n && sorted[i] == v {
            i += 1;
        }
    }
    Ok(CcdfSeries { points, n })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Group {
    Bot,
    Human,
}

impl Group {
    pub fn from_label(l: BotLabel) -> Option<Group> {
        match l {
            BotLabel::Bot => Some(Group::Bot),
            BotLabel::Human => Some(Group::Human),
            BotLabel::Undecided => None,
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            Group::Bot => "bot",
            Group::Human => "human",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum InteractionKind {
    Reply,
    Retweet,
}

impl InteractionKind {
    pub fn as_str(self) -> &'static str {
        match self {
            InteractionKind::Reply => "reply",
            InteractionKind::Retweet => "retweet",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Scope {
    Within,
    Across,
    Total,
}

impl Scope {
    pub fn as_str(self) -> &'static str {
        match self {
            Scope::Within => "within",
            Scope::Across => "across",
            Scope::Total => "total",
        }
    }
}

/// Per-user interaction counts of one source user.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct ScopeCounts {
    pub within: u64,
    pub across: u64,
}

impl ScopeCounts {
    pub fn get(&self, s: Scope) -> u64 {
        match s {
            Scope::Within => self.within,
            Scope::Across => self.across,
            Scope::Total => self.within + self.across,
        }
    }
}

/// Group-to-group interaction counts plus per-user counts for the CCDFs.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct GroupInteractionMatrix {
    /// (kind, source group, target group) -> interactions
    pub edges: BTreeMap<(InteractionKind, Group, Group), u64>,
    /// (kind, source user) -> counts
    pub per_user: BTreeMap<(InteractionKind, String), (Group, ScopeCounts)>,
    /// Interactions whose source or target has no bot/human label.
    pub unlabeled: u64,
}

impl GroupInteractionMatrix {
    pub fn count(&self, kind: InteractionKind, from: Group, to: Group) -> u64 {
        self.edges.get(&(kind, from, to)).copied().unwrap_or(0)
    }

    /// Count values of users in `group` for `scope`, users with zero count
    /// excluded.
    pub fn user_counts(&self, kind: InteractionKind, group: Group, scope: Scope) -> Vec<f64> {
        self.per_user
            .iter()
            .filter(|((k, _), (g, _))| *k == kind && *g == group)
            .map(|(_, (_, c))| c.get(scope))
            .filter(|&c| c > 0)
            .map(|c| c as f64)
            .collect()
    }
}

pub fn interaction_matrix<F>(records: &[TweetRecord], label_of: F) -> GroupInteractionMatrix
where
    F: Fn(&str) -> Option<Group>,
{
    let mut m = GroupInteractionMatrix::default();
    for r in records {
        let kind = match r.kind {
            TweetKind::Reply => InteractionKind::Reply,
            TweetKind::Retweet => InteractionKind::Retweet,
            TweetKind::Original => continue,
        };
        let Some(target) = r.target_author_id.as_deref() else { continue };
        let (Some(src), Some(dst)) = (label_of(&r.author_id), label_of(target)) else {
            m.unlabeled += 1;
            continue;
        };
        *m.edges.entry((kind, src, dst)).or_insert(0) += 1;
        let entry = m.per_user.entry((kind, r.author_id.clone())).or_insert((src, ScopeCounts::default()));
        if src == dst {
            entry.1.within += 1;
        } else {
            entry.1.across += 1;
        }
    }
    m
}

/// One CCDF per (kind, source group, scope); `None` where the group has no
/// interacting users in that scope.
pub type InteractionCcdfs = BTreeMap<(InteractionKind, Group, Scope), Option<CcdfSeries>>;

pub fn interaction_ccdfs(m: &GroupInteractionMatrix) -> InteractionCcdfs {
    let mut out = BTreeMap::new();
    for kind in [InteractionKind::Reply, InteractionKind::Retweet] {
        for group in [Group::Bot, Group::Human] {
            for scope in [Scope::Within, Scope::Across, Scope::Total] {
                let vals = m.user_counts(kind, group, scope);
                out.insert((kind, group, scope), ccdf(&vals).ok());
            }
        }
    }
    out
}
