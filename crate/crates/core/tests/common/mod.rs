#![allow(dead_code)]

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde_json::json;

use socialscope::botmeter::{loss_and_gradient, regularized_loss, BotLabel};
use socialscope::ingest::{ProfileSnapshot, TweetKind, TweetRecord};
use socialscope::sentiment::SentimentLexicon;

pub const T0: i64 = 1_473_984_000; // 2016-09-16T00:00:00Z
pub const DAY: i64 = 86_400;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// good:+2, really: +1 booster, not: negator.
pub fn micro_lexicon() -> SentimentLexicon {
    SentimentLexicon::from_tsv("good\t2\nreally\t1\tbooster\nnot\t0\tnegator\n").unwrap()
}

pub fn fixture_dir() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/fixtures/synth10k")
}

/// One line in the flat archive layout.
pub fn flat_line(id: &str, author: &str, ts: i64, text: &str, kind: &str, target: Option<&str>) -> String {
    let mut v = json!({
        "id": id,
        "author_id": author,
        "created_at": ts,
        "text": text,
        "kind": kind,
        "has_geo": false,
        "user": {
            "followers": 10, "friends": 20, "statuses": 100,
            "created_at": ts - 30 * DAY, "default_profile": false, "screen_name": format!("n{author}"),
        },
    });
    if let Some(t) = target {
        v["target_author_id"] = json!(t);
    }
    v.to_string()
}

/// Random records and snapshots over `users` authors.
pub fn random_events(seed: u64, users: usize, records: usize) -> (Vec<TweetRecord>, Vec<ProfileSnapshot>) {
    let mut r = rng(seed);
    let ids: Vec<String> = (0..users).map(|i| format!("u{i:04}")).collect();
    let tags = ["maga", "imwithher", "debate", "vote", "trump2016"];
    let mut recs = Vec::with_capacity(records);
    let mut snaps = Vec::with_capacity(records);
    for i in 0..records {
        let author = ids.choose(&mut r).unwrap().clone();
        let kind = match r.gen_range(0..4) {
            0 => TweetKind::Retweet,
            1 => TweetKind::Reply,
            _ => TweetKind::Original,
        };
        let target = (kind != TweetKind::Original).then(|| ids.choose(&mut r).unwrap().clone());
        let ts = T0 + r.gen_range(0..30 * DAY);
        let ntags = r.gen_range(0..3);
        recs.push(TweetRecord {
            tweet_id: format!("t{i}"),
            author_id: author.clone(),
            created_at: ts,
            text: String::new(),
            hashtags: (0..ntags).map(|_| tags.choose(&mut r).unwrap().to_string()).collect(),
            kind,
            target_author_id: target,
            target_tweet_id: None,
            retweet_count: r.gen_bool(0.5).then(|| r.gen_range(0..50)),
            has_geo: r.gen_bool(0.1),
        });
        snaps.push(ProfileSnapshot {
            author_id: author.clone(),
            observed_at: ts,
            followers: r.gen_range(0..10_000),
            friends: r.gen_range(0..5_000),
            statuses_total: r.gen_range(0..100_000),
            account_created_at: T0 - 1000 * DAY,
            is_default_profile: r.gen_bool(0.5),
            screen_name: format!("name_{author}_{}", r.gen_range(0..3)),
        });
    }
    (recs, snaps)
}

/// Heavy-tailed activity population with bots planted at a baseline rate
/// plus an excess among the most active users. Returns per-user activity and
/// true labels.
pub struct Population {
    pub activity: Vec<(String, u64)>,
    pub is_bot: BTreeMap<String, bool>,
}

impl Population {
    pub fn planted(seed: u64, n: usize, base_rate: f64, top_rate: f64, top_from: u64) -> Self {
        let mut r = rng(seed);
        let mut activity = Vec::with_capacity(n);
        let mut is_bot = BTreeMap::new();
        for i in 0..n {
            // Pareto(alpha = 1) tweet counts, capped at 1e5
            let u: f64 = r.gen_range(1e-5..1.0);
            let tweets = (1.0 / u).floor().min(1e5) as u64;
            let p = if tweets >= top_from { top_rate } else { base_rate };
            let id = format!("p{i:06}");
            is_bot.insert(id.clone(), r.gen_bool(p));
            activity.push((id, tweets));
        }
        Population { activity, is_bot }
    }

    pub fn bot_fraction(&self) -> f64 {
        self.is_bot.values().filter(|b| **b).count() as f64 / self.is_bot.len() as f64
    }

    /// Labels of the `frac` most active users (tweets desc, id asc).
    pub fn top_sample(&self, frac: f64) -> BTreeMap<String, BotLabel> {
        let mut order: Vec<&(String, u64)> = self.activity.iter().collect();
        order.sort_by(|a, b| b.1.cmp(&a.1).then_with(|| a.0.cmp(&b.0)));
        let k = ((self.activity.len() as f64) * frac).round() as usize;
        order[..k]
            .iter()
            .map(|(id, _)| (id.clone(), if self.is_bot[id] { BotLabel::Bot } else { BotLabel::Human }))
            .collect()
    }
}

/// 20 points split by the line x + y = 0 with margin.
pub fn separable(seed: u64) -> (Vec<Vec<f64>>, Vec<bool>) {
    let mut r = rng(seed);
    let mut xs = Vec::new();
    let mut ys = Vec::new();
    for i in 0..20 {
        let y = i % 2 == 0;
        let c = if y { 2.0 } else { -2.0 };
        xs.push(vec![c + r.gen_range(-1.5..1.5), c + r.gen_range(-1.5..1.5)]);
        ys.push(y);
    }
    (xs, ys)
}

/// Central-difference check of the analytic gradient; returns the largest
/// relative error over all parameters.
pub fn gradient_check(seed: u64) -> f64 {
    let mut r = rng(seed);
    let d = r.gen_range(1..8);
    let n = r.gen_range(2..40);
    let xs: Vec<Vec<f64>> = (0..n).map(|_| (0..d).map(|_| r.gen_range(-3.0..3.0)).collect()).collect();
    let ys: Vec<bool> = (0..n).map(|_| r.gen_bool(0.5)).collect();
    let w: Vec<f64> = (0..d).map(|_| r.gen_range(-2.0..2.0)).collect();
    let b = r.gen_range(-1.0..1.0);
    let l2 = r.gen_range(0.0..0.1);
    let (_, gw, gb) = loss_and_gradient(&w, b, &xs, &ys, l2);
    let h = 1e-5;
    let rel = |a: f64, num: f64| (a - num).abs() / a.abs().max(num.abs()).max(1e-6);
    let mut worst: f64 = 0.0;
    for j in 0..d {
        let (mut wp, mut wm) = (w.clone(), w.clone());
        wp[j] += h;
        wm[j] -= h;
        let num = (regularized_loss(&wp, b, &xs, &ys, l2) - regularized_loss(&wm, b, &xs, &ys, l2)) / (2.0 * h);
        worst = worst.max(rel(gw[j], num));
    }
    let num = (regularized_loss(&w, b + h, &xs, &ys, l2) - regularized_loss(&w, b - h, &xs, &ys, l2)) / (2.0 * h);
    worst.max(rel(gb, num))
}
