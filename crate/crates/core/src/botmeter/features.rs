use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use super::BotError;
use crate::ingest::{activity_period_days, UserAggregate};

pub const FEATURE_NAMES: [&str; 7] = [
    "default_profile",
    "geo_absence",
    "tweets_per_day",
    "retweet_ratio",
    "follower_friend_ratio",
    "account_age_days",
    "username_randomness",
];

/// Interpretable account-level bot signals.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BotFeatureVector {
    /// 1.0 when the latest snapshot shows an untouched default profile.
    pub default_profile: f64,
    /// 1 - fraction of tweets carrying geo metadata.
    pub geo_absence: f64,
    pub tweets_per_day: f64,
    /// Retweets made over tweets posted.
    pub retweet_ratio: f64,
    /// (1 + max followers) / (1 + max friends).
    pub follower_friend_ratio: f64,
    pub account_age_days: f64,
    /// Character entropy of the screen name, bits per character.
    pub username_randomness: f64,
}

impl BotFeatureVector {
    pub fn to_vec(&self) -> Vec<f64> {
        vec![
            self.default_profile,
            self.geo_absence,
            self.tweets_per_day,
            self.retweet_ratio,
            self.follower_friend_ratio,
            self.account_age_days,
            self.username_randomness,
        ]
    }

    pub fn from_slice(v: &[f64]) -> Option<Self> {
        match *v {
            [a, b, c, d, e, f, g] => Some(BotFeatureVector {
                default_profile: a,
                geo_absence: b,
                tweets_per_day: c,
                retweet_ratio: d,
                follower_friend_ratio: e,
                account_age_days: f,
                username_randomness: g,
            }),
            _ => None,
        }
    }
}

/// Shannon entropy of the character distribution of `name`, in bits.
pub fn username_randomness(name: &str) -> Result<f64, BotError> {
    // ordered so the float sum is reproducible
    let mut counts: BTreeMap<char, usize> = BTreeMap::new();
    let mut n = 0usize;
    for c in name.chars() {
        *counts.entry(c).or_insert(0) += 1;
        n += 1;
    }
    if n == 0 {
        return Err(BotError::EmptyName);
    }
    let n = n as f64;
    let h: f64 = counts
        .values()
        .map(|&c| {
            let p = c as f64 / n;
            -p * p.log2()
        })
        .sum();
    // a single symbol gives -1*log2(1) = -0.0
    Ok(h.max(0.0))
}

pub fn extract_features(agg: &UserAggregate, min_period_days: f64) -> Result<BotFeatureVector, BotError> {
    let insufficient =
        |what: &'static str| BotError::InsufficientData { author_id: agg.author_id.clone(), missing: what };
    if agg.tweets_posted == 0 {
        return Err(insufficient("tweets"));
    }
    let followers = agg.followers.ok_or_else(|| insufficient("followers"))?;
    let friends = agg.friends.ok_or_else(|| insufficient("friends"))?;
    let name = agg.screen_name().ok_or_else(|| insufficient("screen_name"))?;
    let age = activity_period_days(agg, min_period_days).map_err(|e| match e {
        crate::ingest::IngestError::InvalidTimeline { .. } => BotError::InvalidTimeline(agg.author_id.clone()),
        _ => insufficient("account timeline"),
    })?;
    let posted = agg.tweets_posted as f64;
    Ok(BotFeatureVector {
        default_profile: if agg.is_default_profile() { 1.0 } else { 0.0 },
        geo_absence: 1.0 - agg.geo_tweet_fraction(),
        tweets_per_day: posted / age,
        retweet_ratio: agg.retweets_made as f64 / posted,
        follower_friend_ratio: (1.0 + followers.max as f64) / (1.0 + friends.max as f64),
        account_age_days: age,
        username_randomness: username_randomness(name)?,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ingest::{Latest, MinMax};

    fn agg() -> UserAggregate {
        let mut a = UserAggregate::empty("u");
        a.tweets_posted = 100;
        a.retweets_made = 80;
        a.followers = Some(MinMax { min: 0, max: 0 });
        a.friends = Some(MinMax { min: 0, max: 0 });
        a.account_created_at = Some(0);
        a.last_seen = Some(10 * 86_400);
        a.screen_name = Some(Latest { observed_at: 0, value: "ab".into() });
        a.geo_tweets = 25;
        a
    }

    #[test]
    fn entropy_examples() {
        assert_eq!(username_randomness("aaaaaa").unwrap(), 0.0);
        assert_eq!(username_randomness("ab").unwrap(), 1.0);
        assert_eq!(username_randomness("x7kq92ab").unwrap(), 3.0);
        assert!(matches!(username_randomness(""), Err(BotError::EmptyName)));
    }

    #[test]
    fn ratios() {
        let f = extract_features(&agg(), 1.0).unwrap();
        assert_eq!(f.retweet_ratio, 0.8);
        assert_eq!(f.follower_friend_ratio, 1.0);
        assert_eq!(f.tweets_per_day, 10.0);
        assert_eq!(f.geo_absence, 0.75);
        assert_eq!(f.account_age_days, 10.0);
        assert_eq!(f.default_profile, 0.0);
        assert_eq!(f.username_randomness, 1.0);
    }

    #[test]
    fn thousand_tweets_over_ten_days() {
        let mut a = agg();
        a.tweets_posted = 1000;
        assert_eq!(extract_features(&a, 1.0).unwrap().tweets_per_day, 100.0);
    }

    #[test]
    fn missing_profile_is_insufficient() {
        let mut a = agg();
        a.friends = None;
        assert!(matches!(extract_features(&a, 1.0), Err(BotError::InsufficientData { .. })));
        let mut a = agg();
        a.tweets_posted = 0;
        assert!(matches!(extract_features(&a, 1.0), Err(BotError::InsufficientData { .. })));
    }

    #[test]
    fn ratio_scale_consistency() {
        let mut a = agg();
        for (fo, fr) in [(1000u64, 1000u64), (5000, 1200), (1000, 90_000)] {
            a.followers = Some(MinMax { min: 0, max: fo });
            a.friends = Some(MinMax { min: 0, max: fr });
            let r1 = extract_features(&a, 1.0).unwrap().follower_friend_ratio;
            a.followers = Some(MinMax { min: 0, max: 2 * fo });
            a.friends = Some(MinMax { min: 0, max: 2 * fr });
            let r2 = extract_features(&a, 1.0).unwrap().follower_friend_ratio;
            assert!(((r2 - r1) / r1).abs() < 0.002, "{fo} {fr}");
        }
    }
}
