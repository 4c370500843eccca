use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};

use super::DiffusionError;
use crate::ingest::normalize_hashtag;

pub const TOP_HASHTAGS: usize = 10;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum FactionName {
    Clinton,
    Trump,
    None,
}

impl FactionName {
    pub fn as_str(self) -> &'static str {
        match self {
            FactionName::Clinton => "clinton",
            FactionName::Trump => "trump",
            FactionName::None => "none",
        }
    }
}

/// Supporting hashtags per faction; the two lists must be disjoint.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FactionTags {
    pub clinton: BTreeSet<String>,
    pub trump: BTreeSet<String>,
}

impl Default for FactionTags {
    fn default() -> Self {
        FactionTags::new(
            ["hillaryclinton", "imwithher", "nevertrump", "hillary"],
            ["donaldtrump", "trump2016", "neverhillary", "trumppence16", "trump"],
        )
        .expect("default tag lists are disjoint")
    }
}

impl FactionTags {
    pub fn new<I, J, S, T>(clinton: I, trump: J) -> Result<Self, DiffusionError>
    where
        I: IntoIterator<Item = S>,
        J: IntoIterator<Item = T>,
        S: AsRef<str>,
        T: AsRef<str>,
    {
        let clinton: BTreeSet<String> = clinton.into_iter().map(|t| normalize_hashtag(t.as_ref())).collect();
        let trump: BTreeSet<String> = trump.into_iter().map(|t| normalize_hashtag(t.as_ref())).collect();
        if let Some(t) = clinton.intersection(&trump).next() {
            return Err(DiffusionError::Config(format!("hashtag `{t}` is in both faction lists")));
        }
        Ok(FactionTags { clinton, trump })
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Faction {
    pub faction: FactionName,
    pub clinton_tags: usize,
    pub trump_tags: usize,
    pub top_tags: Vec<String>,
}

/// The `n` most used hashtags, ties broken by ascending tag.
pub fn top_hashtags(counts: &BTreeMap<String, u64>, n: usize) -> Vec<String> {
    let mut v: Vec<(&String, &u64)> = counts.iter().filter(|(_, c)| **c > 0).collect();
    v.sort_by(|a, b| b.1.cmp(a.1).then_with(|| a.0.cmp(b.0)));
    v.into_iter().take(n).map(|(t, _)| t.clone()).collect()
}

/// Majority rule over the user's top-10 hashtags: the faction with strictly
/// more matching tags wins; ties and no matches give `None`.
pub fn assign_faction(hashtag_counts: &BTreeMap<String, u64>, tags: &FactionTags) -> Faction {
    let top = top_hashtags(hashtag_counts, TOP_HASHTAGS);
    let clinton_tags = top.iter().filter(|t| tags.clinton.contains(*t)).count();
    let trump_tags = top.iter().filter(|t| tags.trump.contains(*t)).count();
    let faction = match clinton_tags.cmp(&trump_tags) {
        std::cmp::Ordering::Greater => FactionName::Clinton,
        std::cmp::Ordering::Less => FactionName::Trump,
        std::cmp::Ordering::Equal => FactionName::None,
    };
    Faction { faction, clinton_tags, trump_tags, top_tags: top }
}
