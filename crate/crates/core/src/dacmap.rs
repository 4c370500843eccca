//! Dynamical activity-connectivity maps.
//!
//! For a user observed over `t` days (registration to last activity):
//!
//! ```text
//! x = (1 + df) / (1 + dF)      connectivity growth (followers vs friends)
//! y = (1 + drt) / (1 + dt)     activity rate (retweets obtained vs tweets)
//! ```
//!
//! where each `d*` is `(max - min) / t` of the corresponding counter. The
//! plane splits at `x = 1` and `y = 1`; points on a boundary belong to the
//! `>= 1` side.

use serde::{Deserialize, Serialize};

use crate::ingest::{activity_period_days, IngestError, RetweetSource, UserAggregate};
use crate::par::{self, Exec};

#[derive(Debug, thiserror::Error)]
pub enum DacError {
    #[error(transparent)]
    Timeline(#[from] IngestError),
    #[error("user {author_id}: no {counter} observations")]
    MissingExtrema { author_id: String, counter: &'static str },
    #[error("axis needs at least one decade and one bin per decade")]
    BadAxis,
}

/// Per-day growth of the four counters.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DeltaRates {
    pub followers: f64,
    pub friends: f64,
    pub retweets: f64,
    pub tweets: f64,
    pub days: f64,
}

impl DeltaRates {
    /// Rates from raw counter spreads over `days`.
    pub fn from_spreads(followers: f64, friends: f64, retweets: f64, tweets: f64, days: f64) -> Self {
        DeltaRates {
            followers: followers / days,
            friends: friends / days,
            retweets: retweets / days,
            tweets: tweets / days,
            days,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Quadrant {
    /// x < 1, y < 1
    TraditionalSpammer,
    /// x >= 1, y < 1
    SocialSpamBot,
    /// x >= 1, y >= 1
    Influential,
    /// x < 1, y >= 1
    HiddenInfluential,
}

impl Quadrant {
    pub const ALL: [Quadrant; 4] =
        [Quadrant::TraditionalSpammer, Quadrant::SocialSpamBot, Quadrant::Influential, Quadrant::HiddenInfluential];

    pub fn as_str(self) -> &'static str {
        match self {
            Quadrant::TraditionalSpammer => "traditional_spammer",
            Quadrant::SocialSpamBot => "social_spam_bot",
            Quadrant::Influential => "influential",
            Quadrant::HiddenInfluential => "hidden_influential",
        }
    }

    pub fn parse(s: &str) -> Option<Quadrant> {
        Quadrant::ALL.into_iter().find(|q| q.as_str() == s)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DacPoint {
    pub x: f64,
    pub y: f64,
    pub quadrant: Quadrant,
}

pub fn classify_quadrant(x: f64, y: f64) -> Quadrant {
    match (x >= 1.0, y >= 1.0) {
        (false, false) => Quadrant::TraditionalSpammer,
        (true, false) => Quadrant::SocialSpamBot,
        (true, true) => Quadrant::Influential,
        (false, true) => Quadrant::HiddenInfluential,
    }
}

pub fn compute_deltas(
    agg: &UserAggregate,
    min_period_days: f64,
    source: RetweetSource,
) -> Result<DeltaRates, DacError> {
    let missing = |counter| DacError::MissingExtrema { author_id: agg.author_id.clone(), counter };
    let followers = agg.followers.ok_or_else(|| missing("followers"))?;
    let friends = agg.friends.ok_or_else(|| missing("friends"))?;
    let statuses = agg.statuses.ok_or_else(|| missing("statuses"))?;
    let retweets = agg.retweet_extrema(source);
    let days = activity_period_days(agg, min_period_days)?;
    Ok(DeltaRates::from_spreads(
        followers.spread() as f64,
        friends.spread() as f64,
        retweets.spread() as f64,
        statuses.spread() as f64,
        days,
    ))
}

pub fn dac_point(d: &DeltaRates) -> DacPoint {
    let x = (1.0 + d.followers) / (1.0 + d.friends);
    let y = (1.0 + d.retweets) / (1.0 + d.tweets);
    DacPoint { x, y, quadrant: classify_quadrant(x, y) }
}

/// Log-spaced bins covering `10^low_decade .. 10^(low_decade + decades)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LogAxis {
    pub low_decade: i32,
    pub decades: u32,
    pub bins_per_decade: u32,
}

impl Default for LogAxis {
    fn default() -> Self {
        LogAxis { low_decade: -2, decades: 4, bins_per_decade: 10 }
    }
}

impl LogAxis {
    pub fn bins(&self) -> usize {
        (self.decades * self.bins_per_decade) as usize
    }

    pub fn edges(&self) -> Vec<f64> {
        let bpd = self.bins_per_decade as f64;
        (0..=self.bins()).map(|i| 10f64.powf(self.low_decade as f64 + i as f64 / bpd)).collect()
    }

    /// Bin index for `v`, plus whether it had to be clipped into an edge bin.
    fn locate(&self, edges: &[f64], v: f64) -> (usize, bool) {
        let n = self.bins();
        if !(v >= edges[0]) {
            return (0, true);
        }
        if v >= edges[n] {
            return (n - 1, v > edges[n]);
        }
        let guess = ((v.log10() - self.low_decade as f64) * self.bins_per_decade as f64).floor();
        let mut i = (guess.max(0.0) as usize).min(n - 1);
        while i > 0 && v < edges[i] {
            i -= 1;
        }
        while i + 1 < n && v >= edges[i + 1] {
            i += 1;
        }
        (i, false)
    }
}

/// Mergeable cell counts; finalize with [`DensityCounts::into_density`].
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DensityCounts {
    pub nx: usize,
    pub ny: usize,
    /// Row-major, `counts[ix * ny + iy]`.
    pub counts: Vec<u64>,
    pub total: u64,
    pub clipped: u64,
}

impl DensityCounts {
    pub fn new(nx: usize, ny: usize) -> Self {
        DensityCounts { nx, ny, counts: vec![0; nx * ny], total: 0, clipped: 0 }
    }

    pub fn merge(mut self, other: DensityCounts) -> Self {
        for (a, b) in self.counts.iter_mut().zip(other.counts) {
            *a += b;
        }
        self.total += other.total;
        self.clipped += other.clipped;
        self
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DacDensityMap {
    pub x_edges: Vec<f64>,
    pub y_edges: Vec<f64>,
    /// Row-major, `density[ix * ny + iy]`.
    pub density: Vec<f64>,
    pub counts: Vec<u64>,
    pub total: u64,
    /// Points outside the axis range, counted in the nearest edge bin.
    pub clipped: u64,
}

impl DacDensityMap {
    pub fn is_empty(&self) -> bool {
        self.total == 0
    }

    pub fn ny(&self) -> usize {
        self.y_edges.len() - 1
    }

    pub fn cell_area(&self, ix: usize, iy: usize) -> f64 {
        (self.x_edges[ix + 1] - self.x_edges[ix]) * (self.y_edges[iy + 1] - self.y_edges[iy])
    }

    /// Sum of density times linear cell area; 1 for non-empty input.
    pub fn integral(&self) -> f64 {
        let ny = self.ny();
        self.density.iter().enumerate().map(|(i, d)| d * self.cell_area(i / ny, i % ny)).sum()
    }
}

/// Count per log cell divided by `total * linear cell area`.
fn normalize_cell(count: u64, total: u64, area: f64) -> f64 {
    if count == 0 {
        0.0
    } else {
        count as f64 / (total as f64 * area)
    }
}

impl DensityCounts {
    pub fn into_density(self, x: &LogAxis, y: &LogAxis) -> DacDensityMap {
        let x_edges = x.edges();
        let y_edges = y.edges();
        let ny = self.ny;
        let density = self
            .counts
            .iter()
            .enumerate()
            .map(|(i, &c)| {
                let (ix, iy) = (i / ny, i % ny);
                let area = (x_edges[ix + 1] - x_edges[ix]) * (y_edges[iy + 1] - y_edges[iy]);
                normalize_cell(c, self.total, area)
            })
            .collect();
        DacDensityMap { x_edges, y_edges, density, counts: self.counts, total: self.total, clipped: self.clipped }
    }
}

pub fn build_density(
    points: &[(f64, f64)],
    x_axis: &LogAxis,
    y_axis: &LogAxis,
    exec: Exec,
) -> Result<DacDensityMap, DacError> {
    if x_axis.bins() == 0 || y_axis.bins() == 0 {
        return Err(DacError::BadAxis);
    }
    let (xe, ye) = (x_axis.edges(), y_axis.edges());
    let (nx, ny) = (x_axis.bins(), y_axis.bins());
    let counts = par::fold_merge(
        exec,
        points,
        || DensityCounts::new(nx, ny),
        |mut acc, &(x, y)| {
            let (ix, cx) = x_axis.locate(&xe, x);
            let (iy, cy) = y_axis.locate(&ye, y);
            acc.counts[ix * ny + iy] += 1;
            acc.total += 1;
            if cx || cy {
                acc.clipped += 1;
            }
            acc
        },
        DensityCounts::merge,
    );
    Ok(counts.into_density(x_axis, y_axis))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct UserDacPoint {
    pub author_id: String,
    pub point: DacPoint,
}

/// DAC points for every user with complete counters; the rest are returned
/// with their error.
pub fn dac_points(
    users: &[&UserAggregate],
    min_period_days: f64,
    source: RetweetSource,
    exec: Exec,
) -> (Vec<UserDacPoint>, Vec<(String, DacError)>) {
    let results = par::map(exec, users, |a| {
        compute_deltas(a, min_period_days, source)
            .map(|d| UserDacPoint { author_id: a.author_id.clone(), point: dac_point(&d) })
    });
    let mut ok = Vec::new();
    let mut failed = Vec::new();
    for (a, r) in users.iter().zip(results) {
        match r {
            Ok(p) => ok.push(p),
            Err(e) => failed.push((a.author_id.clone(), e)),
        }
    }
    (ok, failed)
}
