use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use super::DiffusionError;
use crate::botmeter::BotLabel;

pub const DEFAULT_STRATA: usize = 10;

/// How the population is cut into activity strata.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum StrataScheme {
    /// Equal-width bands in log10(tweets) between the least and most active
    /// user.
    #[default]
    LogActivity,
    /// Equal-count bands by activity rank (tweets desc, id asc).
    Quantile,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StratumRow {
    /// 0 is the least active stratum.
    pub index: usize,
    pub min_tweets: u64,
    pub max_tweets: u64,
    pub users: u64,
    pub tweets: u64,
    pub sampled_bots: u64,
    pub sampled_humans: u64,
    pub sampled_bot_tweets: u64,
    pub sampled_labeled_tweets: u64,
    pub bot_rate: f64,
    pub volume_rate: f64,
    /// No labelled sample users here; rates are borrowed from another
    /// stratum.
    pub floored: bool,
    pub est_bots: f64,
    pub est_bot_tweets: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PopulationEstimate {
    pub population_size: u64,
    pub total_tweets: u64,
    pub bot_count: f64,
    pub bot_fraction: f64,
    pub bot_tweet_volume: f64,
    pub volume_fraction: f64,
    /// Some strata were floored, so the figures are lower bounds.
    pub lower_bound: bool,
    pub sample_outside_population: u64,
    pub strata: Vec<StratumRow>,
}

fn assign_strata(activity: &[(String, u64)], strata: usize, scheme: StrataScheme) -> Vec<usize> {
    match scheme {
        StrataScheme::LogActivity => {
            let lg = |t: u64| (t.max(1) as f64).log10();
            let lo = activity.iter().map(|(_, t)| lg(*t)).fold(f64::INFINITY, f64::min);
            let hi = activity.iter().map(|(_, t)| lg(*t)).fold(f64::NEG_INFINITY, f64::max);
            let width = (hi - lo) / strata as f64;
            activity
                .iter()
                .map(|(_, t)| if width <= 0.0 { 0 } else { (((lg(*t) - lo) / width).floor() as usize).min(strata - 1) })
                .collect()
        }
        StrataScheme::Quantile => {
            let n = activity.len();
            let mut order: Vec<usize> = (0..n).collect();
            order.sort_by(|&a, &b| activity[b].1.cmp(&activity[a].1).then_with(|| activity[a].0.cmp(&activity[b].0)));
            let mut out = vec![0; n];
            for (rank, i) in order.into_iter().enumerate() {
                out[i] = strata - 1 - rank * strata / n;
            }
            out
        }
    }
}

/// Stratified estimate of how many users and tweets belong to bots.
///
/// `sample` holds the labels of the inspected (top-activity) users and
/// `activity` the tweet count of every user in the population. Each stratum
/// with labelled sample users gets its own bot rate. Strata below the lowest
/// sampled one reuse that stratum's rate, which makes the totals lower bounds
/// when bots concentrate at high activity.
pub fn extrapolate_population(
    sample: &BTreeMap<String, BotLabel>,
    activity: &[(String, u64)],
    strata: usize,
    scheme: StrataScheme,
) -> Result<PopulationEstimate, DiffusionError> {
    if strata == 0 {
        return Err(DiffusionError::Config("strata must be at least 1".into()));
    }
    if activity.is_empty() {
        return Err(DiffusionError::EmptyInput);
    }
    let idx = assign_strata(activity, strata, scheme);
    let mut rows: Vec<StratumRow> = (0..strata)
        .map(|index| StratumRow {
            index,
            min_tweets: u64::MAX,
            max_tweets: 0,
            users: 0,
            tweets: 0,
            sampled_bots: 0,
            sampled_humans: 0,
            sampled_bot_tweets: 0,
            sampled_labeled_tweets: 0,
            bot_rate: 0.0,
            volume_rate: 0.0,
            floored: false,
            est_bots: 0.0,
            est_bot_tweets: 0.0,
        })
        .collect();
    let mut seen = 0u64;
    for ((id, t), &s) in activity.iter().zip(&idx) {
        let r = &mut rows[s];
        r.users += 1;
        r.tweets += t;
        r.min_tweets = r.min_tweets.min(*t);
        r.max_tweets = r.max_tweets.max(*t);
        match sample.get(id) {
            Some(BotLabel::Bot) => {
                r.sampled_bots += 1;
                r.sampled_bot_tweets += t;
                r.sampled_labeled_tweets += t;
            }
            Some(BotLabel::Human) => {
                r.sampled_humans += 1;
                r.sampled_labeled_tweets += t;
            }
            Some(BotLabel::Undecided) | None => {}
        }
        if sample.contains_key(id) {
            seen += 1;
        }
    }
    let labeled = |r: &StratumRow| r.sampled_bots + r.sampled_humans > 0;
    let lowest = rows.iter().position(labeled).ok_or(DiffusionError::InsufficientStrata)?;
    let rate = |r: &StratumRow| r.sampled_bots as f64 / (r.sampled_bots + r.sampled_humans) as f64;
    let vrate = |r: &StratumRow| {
        if r.sampled_labeled_tweets == 0 {
            0.0
        } else {
            r.sampled_bot_tweets as f64 / r.sampled_labeled_tweets as f64
        }
    };
    // unsampled strata take the rates of the nearest sampled stratum below,
    // or of the lowest sampled one when nothing below was sampled
    let mut source = lowest;
    let mut rates = Vec::with_capacity(rows.len());
    for r in &rows {
        if labeled(r) {
            source = r.index;
        }
        rates.push((rate(&rows[source]), vrate(&rows[source]), source != r.index));
    }

    let n: u64 = rows.iter().map(|r| r.users).sum();
    let total: u64 = rows.iter().map(|r| r.tweets).sum();
    let mut est = PopulationEstimate {
        population_size: n,
        total_tweets: total,
        bot_count: 0.0,
        bot_fraction: 0.0,
        bot_tweet_volume: 0.0,
        volume_fraction: 0.0,
        lower_bound: false,
        sample_outside_population: sample.len() as u64 - seen,
        strata: Vec::new(),
    };
    for mut r in rows {
        if r.users == 0 {
            r.min_tweets = 0;
            est.strata.push(r);
            continue;
        }
        (r.bot_rate, r.volume_rate, r.floored) = rates[r.index];
        est.lower_bound |= r.index < lowest;
        r.est_bots = r.bot_rate * r.users as f64;
        r.est_bot_tweets = r.volume_rate * r.tweets as f64;
        est.bot_count += r.est_bots;
        est.bot_fraction += r.bot_rate * (r.users as f64 / n as f64);
        est.bot_tweet_volume += r.est_bot_tweets;
        if total > 0 {
            est.volume_fraction += r.volume_rate * (r.tweets as f64 / total as f64);
        }
        est.strata.push(r);
    }
    Ok(est)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn pop(counts: &[u64]) -> Vec<(String, u64)> {
        counts.iter().enumerate().map(|(i, &c)| (format!("u{i:03}"), c)).collect()
    }

    #[test]
    fn single_stratum_is_sample_proportion() {
        let p = pop(&[50, 40, 30, 20, 10, 5, 3, 2, 1, 1]);
        let sample: BTreeMap<_, _> = [("u000", BotLabel::Bot), ("u001", BotLabel::Human), ("u002", BotLabel::Human)]
            .into_iter()
            .map(|(k, v)| (k.to_string(), v))
            .collect();
        let e = extrapolate_population(&sample, &p, 1, StrataScheme::Quantile).unwrap();
        assert_eq!(e.bot_fraction, 1.0 / 3.0);
        assert!(!e.lower_bound);
    }

    #[test]
    fn no_bots_gives_zeros() {
        let p = pop(&[100, 10, 1]);
        let sample = BTreeMap::from([("u000".to_string(), BotLabel::Human)]);
        let e = extrapolate_population(&sample, &p, 10, StrataScheme::LogActivity).unwrap();
        assert_eq!((e.bot_count, e.bot_fraction, e.bot_tweet_volume, e.volume_fraction), (0.0, 0.0, 0.0, 0.0));
        assert!(e.lower_bound);
    }

    #[test]
    fn floor_applies_below_sample() {
        // log bands over [1, 100]: u000 alone in the top band, u001 in the
        // middle, u002 in the bottom
        let p = pop(&[100, 10, 1]);
        let sample = BTreeMap::from([("u000".to_string(), BotLabel::Bot), ("u001".to_string(), BotLabel::Human)]);
        let e = extrapolate_population(&sample, &p, 2, StrataScheme::LogActivity).unwrap();
        // bands: [0,1) holds u002 only, [1,2] holds u001 and u000
        assert_eq!(e.strata[0].users, 1);
        assert!(e.strata[0].floored);
        assert_eq!(e.strata[0].bot_rate, 0.5);
        assert_eq!(e.bot_count, 1.5);
        assert_eq!(e.volume_fraction, 100.0 / 110.0 * (110.0 / 111.0) + 100.0 / 110.0 * (1.0 / 111.0));
    }

    #[test]
    fn nothing_sampled() {
        let p = pop(&[3, 2]);
        let r = extrapolate_population(&BTreeMap::new(), &p, 10, StrataScheme::Quantile);
        assert!(matches!(r, Err(DiffusionError::InsufficientStrata)));
    }

    #[test]
    fn gap_borrows_from_below() {
        // bands of one decade: {1}, {10}, {100, 1000}
        let p = pop(&[1000, 100, 10, 1]);
        let sample = BTreeMap::from([("u000".to_string(), BotLabel::Bot), ("u003".to_string(), BotLabel::Human)]);
        let e = extrapolate_population(&sample, &p, 3, StrataScheme::LogActivity).unwrap();
        assert!(e.strata[1].floored);
        assert_eq!(e.strata[1].bot_rate, 0.0);
        assert_eq!(e.strata[2].bot_rate, 1.0);
        assert!(!e.lower_bound);
    }

    #[test]
    fn quantile_ranks() {
        let p = pop(&[1, 5, 5, 9]);
        assert_eq!(assign_strata(&p, 2, StrataScheme::Quantile), vec![0, 1, 0, 1]);
    }
}
