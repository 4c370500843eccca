use std::collections::BTreeMap;

use chrono::{DateTime, NaiveDate};
use serde::{Deserialize, Serialize};

use crate::ingest::SECONDS_PER_DAY;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TimelineRow {
    /// UTC calendar day, `YYYY-MM-DD`.
    pub day: String,
    pub count: u64,
    pub cumulative: u64,
}

fn utc_day(ts: i64) -> i64 {
    ts.div_euclid(SECONDS_PER_DAY as i64)
}

fn day_label(day: i64) -> String {
    match DateTime::from_timestamp(day * SECONDS_PER_DAY as i64, 0) {
        Some(d) => d.date_naive().format("%Y-%m-%d").to_string(),
        None => day.to_string(),
    }
}

/// Tweets per UTC day from the first to the last active day, empty days
/// included as zero rows.
pub fn emit_timeline<I: IntoIterator<Item = i64>>(timestamps: I) -> Vec<TimelineRow> {
    let mut per_day: BTreeMap<i64, u64> = BTreeMap::new();
    for t in timestamps {
        *per_day.entry(utc_day(t)).or_insert(0) += 1;
    }
    let (Some(&first), Some(&last)) = (per_day.keys().next(), per_day.keys().next_back()) else {
        return Vec::new();
    };
    let mut cumulative = 0;
    (first..=last)
        .map(|d| {
            let count = per_day.get(&d).copied().unwrap_or(0);
            cumulative += count;
            TimelineRow { day: day_label(d), count, cumulative }
        })
        .collect()
}

/// Midnight UTC of a `YYYY-MM-DD` label.
pub fn day_start(label: &str) -> Option<i64> {
    let d = NaiveDate::parse_from_str(label, "%Y-%m-%d").ok()?;
    Some(d.and_hms_opt(0, 0, 0)?.and_utc().timestamp())
}
