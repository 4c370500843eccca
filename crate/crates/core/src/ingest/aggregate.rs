use std::collections::{BTreeMap, HashMap};

use serde::{Deserialize, Serialize};

use super::record::{ProfileSnapshot, TweetKind, TweetRecord};
use super::IngestError;
use crate::par::{self, Exec};

pub const SECONDS_PER_DAY: f64 = 86_400.0;

/// Default floor for the activity period, in days.
pub const DEFAULT_MIN_PERIOD_DAYS: f64 = 1.0;

/// Closed range of observed counter values.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct MinMax {
    pub min: u64,
    pub max: u64,
}

impl MinMax {
    pub fn point(v: u64) -> Self {
        MinMax { min: v, max: v }
    }

    pub fn merge(self, other: MinMax) -> Self {
        MinMax { min: self.min.min(other.min), max: self.max.max(other.max) }
    }

    pub fn spread(&self) -> u64 {
        self.max - self.min
    }
}

fn merge_opt<T, F: Fn(T, T) -> T>(a: Option<T>, b: Option<T>, f: F) -> Option<T> {
    match (a, b) {
        (Some(a), Some(b)) => Some(f(a, b)),
        (a, b) => a.or(b),
    }
}

/// Value from the most recent snapshot. Ties on time resolve to the larger
/// value so the merge stays commutative.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Latest<T> {
    pub observed_at: i64,
    pub value: T,
}

/// Where "retweets obtained" comes from.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RetweetSource {
    /// Count retweet records in the dataset that target the author.
    #[default]
    InDataset,
    /// Sum the platform `retweet_count` of the author's own tweets, falling
    /// back to in-dataset counting when no tweet carries the counter.
    Counter,
}

/// Per-user rollup of tweet records and profile snapshots.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct UserAggregate {
    pub author_id: String,
    pub tweets_posted: u64,
    pub retweets_made: u64,
    pub replies_made: u64,
    /// In-dataset retweet records targeting this user.
    pub retweets_received: u64,
    pub replies_received: u64,
    /// Sum of platform retweet counters over authored non-retweet tweets.
    pub retweet_counter_sum: u64,
    pub tweets_with_counter: u64,
    pub geo_tweets: u64,
    pub hashtag_counts: BTreeMap<String, u64>,
    pub first_seen: Option<i64>,
    pub last_seen: Option<i64>,
    pub account_created_at: Option<i64>,
    pub followers: Option<MinMax>,
    pub friends: Option<MinMax>,
    pub statuses: Option<MinMax>,
    pub default_profile: Option<Latest<bool>>,
    pub screen_name: Option<Latest<String>>,
}

impl UserAggregate {
    pub fn empty(author_id: impl Into<String>) -> Self {
        UserAggregate {
            author_id: author_id.into(),
            tweets_posted: 0,
            retweets_made: 0,
            replies_made: 0,
            retweets_received: 0,
            replies_received: 0,
            retweet_counter_sum: 0,
            tweets_with_counter: 0,
            geo_tweets: 0,
            hashtag_counts: BTreeMap::new(),
            first_seen: None,
            last_seen: None,
            account_created_at: None,
            followers: None,
            friends: None,
            statuses: None,
            default_profile: None,
            screen_name: None,
        }
    }

    /// Users that only appear as interaction targets or in snapshots are
    /// inactive and are not emitted.
    pub fn is_active(&self) -> bool {
        self.tweets_posted >= 1
    }

    pub fn geo_tweet_fraction(&self) -> f64 {
        if self.tweets_posted == 0 {
            0.0
        } else {
            self.geo_tweets as f64 / self.tweets_posted as f64
        }
    }

    pub fn is_default_profile(&self) -> bool {
        self.default_profile.as_ref().is_some_and(|l| l.value)
    }

    pub fn screen_name(&self) -> Option<&str> {
        self.screen_name.as_ref().map(|l| l.value.as_str()).filter(|s| !s.is_empty())
    }

    pub fn retweets_obtained(&self, source: RetweetSource) -> u64 {
        match source {
            RetweetSource::Counter if self.tweets_with_counter > 0 => self.retweet_counter_sum,
            _ => self.retweets_received,
        }
    }

    /// Cumulative retweets obtained over the observation window: zero at the
    /// start, the total at the end.
    pub fn retweet_extrema(&self, source: RetweetSource) -> MinMax {
        MinMax { min: 0, max: self.retweets_obtained(source) }
    }

    pub fn add_record(&mut self, r: &TweetRecord) {
        self.tweets_posted += 1;
        match r.kind {
            TweetKind::Retweet => self.retweets_made += 1,
            TweetKind::Reply => self.replies_made += 1,
            TweetKind::Original => {}
        }
        if r.kind != TweetKind::Retweet {
            if let Some(c) = r.retweet_count {
                self.retweet_counter_sum += c;
                self.tweets_with_counter += 1;
            }
        }
        if r.has_geo {
            self.geo_tweets += 1;
        }
        for h in &r.hashtags {
            *self.hashtag_counts.entry(h.clone()).or_insert(0) += 1;
        }
        self.first_seen = Some(self.first_seen.map_or(r.created_at, |f| f.min(r.created_at)));
        self.last_seen = Some(self.last_seen.map_or(r.created_at, |l| l.max(r.created_at)));
    }

    pub fn add_received(&mut self, kind: TweetKind) {
        match kind {
            TweetKind::Retweet => self.retweets_received += 1,
            TweetKind::Reply => self.replies_received += 1,
            TweetKind::Original => {}
        }
    }

    pub fn add_snapshot(&mut self, s: &ProfileSnapshot) {
        self.followers = merge_opt(self.followers, Some(MinMax::point(s.followers)), MinMax::merge);
        self.friends = merge_opt(self.friends, Some(MinMax::point(s.friends)), MinMax::merge);
        self.statuses = merge_opt(self.statuses, Some(MinMax::point(s.statuses_total)), MinMax::merge);
        self.account_created_at = merge_opt(self.account_created_at, Some(s.account_created_at), i64::min);
        let dp = Latest { observed_at: s.observed_at, value: s.is_default_profile };
        self.default_profile = merge_opt(self.default_profile.take(), Some(dp), Ord::max);
        let sn = Latest { observed_at: s.observed_at, value: s.screen_name.clone() };
        self.screen_name = merge_opt(self.screen_name.take(), Some(sn), Ord::max);
    }

    /// Associative, commutative merge of two partial aggregates for the same
    /// user.
    pub fn merge(mut self, other: UserAggregate) -> UserAggregate {
        debug_assert_eq!(self.author_id, other.author_id);
        self.tweets_posted += other.tweets_posted;
        self.retweets_made += other.retweets_made;
        self.replies_made += other.replies_made;
        self.retweets_received += other.retweets_received;
        self.replies_received += other.replies_received;
        self.retweet_counter_sum += other.retweet_counter_sum;
        self.tweets_with_counter += other.tweets_with_counter;
        self.geo_tweets += other.geo_tweets;
        for (h, c) in other.hashtag_counts {
            *self.hashtag_counts.entry(h).or_insert(0) += c;
        }
        self.first_seen = merge_opt(self.first_seen, other.first_seen, i64::min);
        self.last_seen = merge_opt(self.last_seen, other.last_seen, i64::max);
        self.account_created_at = merge_opt(self.account_created_at, other.account_created_at, i64::min);
        self.followers = merge_opt(self.followers, other.followers, MinMax::merge);
        self.friends = merge_opt(self.friends, other.friends, MinMax::merge);
        self.statuses = merge_opt(self.statuses, other.statuses, MinMax::merge);
        self.default_profile = merge_opt(self.default_profile, other.default_profile, Ord::max);
        self.screen_name = merge_opt(self.screen_name, other.screen_name, Ord::max);
        self
    }
}

/// Partial aggregates keyed by author.
pub type AggregateMap = BTreeMap<String, UserAggregate>;

type Partial = HashMap<String, UserAggregate>;

fn entry<'a>(m: &'a mut Partial, id: &str) -> &'a mut UserAggregate {
    if !m.contains_key(id) {
        m.insert(id.to_string(), UserAggregate::empty(id));
    }
    m.get_mut(id).expect("just inserted")
}

fn merge_partials(mut a: Partial, b: Partial) -> Partial {
    if a.len() < b.len() {
        return merge_partials(b, a);
    }
    for (k, v) in b {
        match a.remove(&k) {
            Some(existing) => {
                a.insert(k, existing.merge(v));
            }
            None => {
                a.insert(k, v);
            }
        }
    }
    a
}

/// Merge two aggregate tables, e.g. from independently processed shards.
pub fn merge_aggregate_maps(mut a: AggregateMap, b: AggregateMap) -> AggregateMap {
    for (k, v) in b {
        let merged = match a.remove(&k) {
            Some(existing) => existing.merge(v),
            None => v,
        };
        a.insert(k, merged);
    }
    a
}

/// Fold records and snapshots into per-user aggregates. The result does not
/// depend on input order or on the execution strategy.
pub fn aggregate_users(records: &[TweetRecord], snapshots: &[ProfileSnapshot], exec: Exec) -> AggregateMap {
    let from_records = par::fold_merge(
        exec,
        records,
        Partial::new,
        |mut m, r| {
            entry(&mut m, &r.author_id).add_record(r);
            if let Some(t) = &r.target_author_id {
                entry(&mut m, t).add_received(r.kind);
            }
            m
        },
        merge_partials,
    );
    let from_snapshots = par::fold_merge(
        exec,
        snapshots,
        Partial::new,
        |mut m, s| {
            entry(&mut m, &s.author_id).add_snapshot(s);
            m
        },
        merge_partials,
    );
    merge_partials(from_records, from_snapshots).into_iter().collect()
}

/// Days from registration to last observed activity, floored at `min_days`.
pub fn activity_period_days(agg: &UserAggregate, min_days: f64) -> Result<f64, IngestError> {
    let created = agg
        .account_created_at
        .ok_or_else(|| IngestError::MissingField { author_id: agg.author_id.clone(), field: "account_created_at" })?;
    let last = agg
        .last_seen
        .ok_or_else(|| IngestError::MissingField { author_id: agg.author_id.clone(), field: "last_seen" })?;
    if last < created {
        return Err(IngestError::InvalidTimeline { author_id: agg.author_id.clone(), created, last_seen: last });
    }
    Ok(((last - created) as f64 / SECONDS_PER_DAY).max(min_days))
}
