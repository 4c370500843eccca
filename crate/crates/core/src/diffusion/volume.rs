use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};

use super::ccdf::Group;
use super::faction::FactionName;
use crate::sentiment::{MAX_SCORE, MIN_SCORE};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Candidate {
    Clinton,
    Trump,
}

impl Candidate {
    pub fn as_str(self) -> &'static str {
        match self {
            Candidate::Clinton => "clinton",
            Candidate::Trump => "trump",
        }
    }
}

/// Terms that make a tweet "about" a candidate, matched against hashtags and
/// lowercase word tokens.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct CandidateTerms {
    pub clinton: BTreeSet<String>,
    pub trump: BTreeSet<String>,
}

impl Default for CandidateTerms {
    fn default() -> Self {
        let set = |v: &[&str]| v.iter().map(|s| s.to_string()).collect();
        CandidateTerms {
            clinton: set(&["hillary", "clinton", "hillaryclinton", "imwithher", "neverhillary", "crookedhillary"]),
            trump: set(&["trump", "donald", "donaldtrump", "trump2016", "nevertrump", "trumppence16", "maga"]),
        }
    }
}

impl CandidateTerms {
    pub fn mentions(&self, text: &str, hashtags: &[String]) -> (bool, bool) {
        let lower = text.to_lowercase();
        let words: Vec<&str> =
            lower.split(|c: char| !(c.is_alphanumeric() || c == '_')).filter(|w| !w.is_empty()).collect();
        let hit =
            |set: &BTreeSet<String>| hashtags.iter().any(|h| set.contains(h)) || words.iter().any(|w| set.contains(*w));
        (hit(&self.clinton), hit(&self.trump))
    }
}

/// One scored tweet joined with its author's group and faction.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct VolumeRow {
    pub faction: FactionName,
    pub group: Group,
    pub s: i8,
    pub mentions_clinton: bool,
    pub mentions_trump: bool,
}

pub type Volumes = [u64; 9];

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct SentimentVolumeTable {
    pub volumes: BTreeMap<(FactionName, Group, Candidate), Volumes>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct VolumeDiffRow {
    pub faction: FactionName,
    pub group: Group,
    pub s: i8,
    pub clinton: u64,
    pub trump: u64,
    pub abs_diff: u64,
}

impl SentimentVolumeTable {
    pub fn get(&self, f: FactionName, g: Group, c: Candidate, s: i8) -> u64 {
        self.volumes.get(&(f, g, c)).map_or(0, |v| v[(s - MIN_SCORE) as usize])
    }

    /// `|clinton - trump|` per sentiment value for every (faction, group)
    /// panel present in the table.
    pub fn differences(&self) -> Vec<VolumeDiffRow> {
        let panels: BTreeSet<(FactionName, Group)> = self.volumes.keys().map(|(f, g, _)| (*f, *g)).collect();
        let mut out = Vec::new();
        for (f, g) in panels {
            for s in MIN_SCORE..=MAX_SCORE {
                let clinton = self.get(f, g, Candidate::Clinton, s);
                let trump = self.get(f, g, Candidate::Trump, s);
                out.push(VolumeDiffRow { faction: f, group: g, s, clinton, trump, abs_diff: clinton.abs_diff(trump) });
            }
        }
        out
    }
}

pub fn sentiment_volume_by_group(rows: &[VolumeRow]) -> SentimentVolumeTable {
    let mut t = SentimentVolumeTable::default();
    for r in rows {
        let idx = (r.s - MIN_SCORE) as usize;
        for (hit, cand) in [(r.mentions_clinton, Candidate::Clinton), (r.mentions_trump, Candidate::Trump)] {
            if hit {
                t.volumes.entry((r.faction, r.group, cand)).or_insert([0; 9])[idx] += 1;
            }
        }
    }
    t
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ConditionFeature {
    TweetsPosted,
    RetweetsReceived,
    Friends,
    Followers,
}

impl ConditionFeature {
    pub const ALL: [ConditionFeature; 4] = [
        ConditionFeature::TweetsPosted,
        ConditionFeature::RetweetsReceived,
        ConditionFeature::Friends,
        ConditionFeature::Followers,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            ConditionFeature::TweetsPosted => "tweets_posted",
            ConditionFeature::RetweetsReceived => "retweets_received",
            ConditionFeature::Friends => "friends",
            ConditionFeature::Followers => "followers",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RetweetSplit {
    AtMostOnce,
    MoreThanOnce,
}

impl RetweetSplit {
    pub fn of(retweets: u64) -> Self {
        if retweets <= 1 {
            RetweetSplit::AtMostOnce
        } else {
            RetweetSplit::MoreThanOnce
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            RetweetSplit::AtMostOnce => "at_most_once",
            RetweetSplit::MoreThanOnce => "more_than_once",
        }
    }
}

/// Streaming mean / variance (Welford, with Chan's merge).
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct MeanAccumulator {
    pub n: u64,
    pub mean: f64,
    m2: f64,
}

impl MeanAccumulator {
    pub fn push(&mut self, x: f64) {
        self.n += 1;
        let d = x - self.mean;
        self.mean += d / self.n as f64;
        self.m2 += d * (x - self.mean);
    }

    pub fn merge(self, o: MeanAccumulator) -> MeanAccumulator {
        if self.n == 0 {
            return o;
        }
        if o.n == 0 {
            return self;
        }
        let n = self.n + o.n;
        let d = o.mean - self.mean;
        let mean = self.mean + d * o.n as f64 / n as f64;
        let m2 = self.m2 + o.m2 + d * d * self.n as f64 * o.n as f64 / n as f64;
        MeanAccumulator { n, mean, m2 }
    }

    /// Sample standard deviation (n - 1 denominator); 0 for one observation.
    pub fn stddev(&self) -> f64 {
        if self.n < 2 {
            0.0
        } else {
            (self.m2.max(0.0) / (self.n - 1) as f64).sqrt()
        }
    }

    pub fn stats(&self, s: i8) -> BucketStat {
        if self.n == 0 {
            return BucketStat { s, n: 0, mean: None, stderr: None };
        }
        BucketStat { s, n: self.n, mean: Some(self.mean), stderr: Some(self.stddev() / (self.n as f64).sqrt()) }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BucketStat {
    pub s: i8,
    pub n: u64,
    /// `None` for empty buckets.
    pub mean: Option<f64>,
    pub stderr: Option<f64>,
}

pub const CONDITIONED_RANGE: std::ops::RangeInclusive<i8> = -3..=3;

/// One tweet's sentiment, its retweet count and its author's feature value.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ConditionedObs {
    pub s: i8,
    pub retweets: u64,
    pub value: f64,
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct ConditionedMeans {
    pub buckets: BTreeMap<(RetweetSplit, i8), MeanAccumulator>,
}

impl ConditionedMeans {
    pub fn add(&mut self, o: &ConditionedObs) {
        if CONDITIONED_RANGE.contains(&o.s) {
            self.buckets.entry((RetweetSplit::of(o.retweets), o.s)).or_default().push(o.value);
        }
    }

    pub fn merge(mut self, other: ConditionedMeans) -> ConditionedMeans {
        for (k, v) in other.buckets {
            let e = self.buckets.entry(k).or_default();
            *e = e.merge(v);
        }
        self
    }

    /// Seven rows per split, `s = -3..=3`, empty buckets included.
    pub fn table(&self, split: RetweetSplit) -> Vec<BucketStat> {
        CONDITIONED_RANGE.map(|s| self.buckets.get(&(split, s)).copied().unwrap_or_default().stats(s)).collect()
    }
}

/// Per-sentiment mean and standard error of a feature, split by whether the
/// tweet was retweeted at most once. Sentiments outside `-3..=3` are
/// dropped.
pub fn sentiment_conditioned_means(obs: &[ConditionedObs]) -> ConditionedMeans {
    let mut m = ConditionedMeans::default();
    for o in obs {
        m.add(o);
    }
    m
}
