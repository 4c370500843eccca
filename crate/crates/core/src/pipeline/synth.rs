//! Synthetic archives with planted quadrants and bot labels.
//!
//! Counter spreads are derived from the target point, rounding up, so the
//! planted quadrant is exact: for `x > 1` the follower spread is
//! `ceil(x (t + dF) - t)`, for `x < 1` the friend spread is
//! `ceil((t + df) / x - t)`, and likewise for retweets against statuses.

use std::io::Write;
use std::path::Path;

use chrono::{DateTime, SecondsFormat};
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use serde_json::json;

use super::{ErrorKind, FixtureFiles, PipelineError};
use crate::dacmap::Quadrant;
use crate::diffusion::FactionTags;
use crate::spamfilter::porter::stem;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Archetype {
    TraditionalSpammer,
    SocialSpamBot,
    Influential,
    HiddenInfluential,
    CommonHuman,
}

impl Archetype {
    pub const ALL: [Archetype; 5] = [
        Archetype::TraditionalSpammer,
        Archetype::SocialSpamBot,
        Archetype::Influential,
        Archetype::HiddenInfluential,
        Archetype::CommonHuman,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            Archetype::TraditionalSpammer => "traditional_spammer",
            Archetype::SocialSpamBot => "social_spam_bot",
            Archetype::Influential => "influential",
            Archetype::HiddenInfluential => "hidden_influential",
            Archetype::CommonHuman => "common_human",
        }
    }

    pub fn quadrant(self) -> Quadrant {
        match self {
            Archetype::TraditionalSpammer | Archetype::CommonHuman => Quadrant::TraditionalSpammer,
            Archetype::SocialSpamBot => Quadrant::SocialSpamBot,
            Archetype::Influential => Quadrant::Influential,
            Archetype::HiddenInfluential => Quadrant::HiddenInfluential,
        }
    }

    fn x_above_one(self) -> bool {
        matches!(self.quadrant(), Quadrant::SocialSpamBot | Quadrant::Influential)
    }

    fn y_above_one(self) -> bool {
        matches!(self.quadrant(), Quadrant::Influential | Quadrant::HiddenInfluential)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ArchetypeSpec {
    pub users: usize,
    /// Records per user, drawn log-uniformly from `[min, max]`.
    pub tweets: [u32; 2],
    /// Range of `|log10 x|`.
    pub log_x: [f64; 2],
    /// Range of `|log10 y|`.
    pub log_y: [f64; 2],
    pub bot_probability: f64,
    /// Chance that a tweet carries a spam phrase.
    pub spam_probability: f64,
}

impl Default for ArchetypeSpec {
    fn default() -> Self {
        ArchetypeSpec {
            users: 0,
            tweets: [2, 20],
            log_x: [0.2, 0.8],
            log_y: [0.2, 0.8],
            bot_probability: 0.0,
            spam_probability: 0.0,
        }
    }
}

fn arch(users: usize, tweets: [u32; 2], log_x: [f64; 2], log_y: [f64; 2], bot: f64, spam: f64) -> ArchetypeSpec {
    ArchetypeSpec { users, tweets, log_x, log_y, bot_probability: bot, spam_probability: spam }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SynthSpec {
    /// Collection window start, unix seconds.
    pub start: i64,
    pub days: u32,
    /// Overrides every archetype's bot probability.
    pub planted_bot_fraction: Option<f64>,
    /// Share of users written to the training labels file.
    pub labeled_fraction: f64,
    pub malformed_lines: usize,
    pub gzip: bool,
    /// Users scored by the generated run config.
    pub top_k: usize,
    pub traditional_spammer: ArchetypeSpec,
    pub social_spam_bot: ArchetypeSpec,
    pub influential: ArchetypeSpec,
    pub hidden_influential: ArchetypeSpec,
    pub common_human: ArchetypeSpec,
}

impl Default for SynthSpec {
    fn default() -> Self {
        SynthSpec {
            start: 1_473_984_000, // 2016-09-16
            days: 30,
            planted_bot_fraction: None,
            labeled_fraction: 0.5,
            malformed_lines: 0,
            gzip: false,
            top_k: 200,
            traditional_spammer: arch(140, [4, 60], [0.2, 0.8], [0.3, 1.0], 0.85, 0.7),
            social_spam_bot: arch(100, [4, 40], [0.3, 1.0], [0.2, 0.8], 0.85, 0.6),
            influential: arch(60, [2, 30], [0.2, 1.0], [0.2, 1.0], 0.1, 0.02),
            hidden_influential: arch(60, [2, 20], [0.2, 0.8], [0.2, 1.0], 0.15, 0.02),
            common_human: arch(600, [2, 20], [0.05, 0.3], [0.05, 0.3], 0.03, 0.01),
        }
    }
}

impl SynthSpec {
    pub fn archetype(&self, a: Archetype) -> &ArchetypeSpec {
        match a {
            Archetype::TraditionalSpammer => &self.traditional_spammer,
            Archetype::SocialSpamBot => &self.social_spam_bot,
            Archetype::Influential => &self.influential,
            Archetype::HiddenInfluential => &self.hidden_influential,
            Archetype::CommonHuman => &self.common_human,
        }
    }

    pub fn archetype_mut(&mut self, a: Archetype) -> &mut ArchetypeSpec {
        match a {
            Archetype::TraditionalSpammer => &mut self.traditional_spammer,
            Archetype::SocialSpamBot => &mut self.social_spam_bot,
            Archetype::Influential => &mut self.influential,
            Archetype::HiddenInfluential => &mut self.hidden_influential,
            Archetype::CommonHuman => &mut self.common_human,
        }
    }

    /// A spec with every archetype emptied.
    pub fn empty() -> Self {
        let mut s = SynthSpec::default();
        for a in Archetype::ALL {
            s.archetype_mut(a).users = 0;
        }
        s
    }

    pub fn users(&self) -> usize {
        Archetype::ALL.iter().map(|a| self.archetype(*a).users).sum()
    }

    pub fn from_toml_str(src: &str) -> Result<Self, PipelineError> {
        let s: SynthSpec =
            toml::from_str(src).map_err(|e| PipelineError::new("synth", ErrorKind::Config, e.to_string()))?;
        s.validate()?;
        Ok(s)
    }

    pub fn validate(&self) -> Result<(), PipelineError> {
        let bad = |m: String| Err(PipelineError::new("synth", ErrorKind::Config, m));
        let prob = |p: f64| (0.0..=1.0).contains(&p);
        if self.days < 2 {
            return bad("days must be at least 2".into());
        }
        if !prob(self.labeled_fraction) || !self.planted_bot_fraction.is_none_or(prob) {
            return bad("fractions must lie in [0, 1]".into());
        }
        for a in Archetype::ALL {
            let s = self.archetype(a);
            let name = a.as_str();
            if s.tweets[0] < 2 || s.tweets[0] > s.tweets[1] {
                return bad(format!("{name}.tweets must satisfy 2 <= min <= max"));
            }
            for r in [s.log_x, s.log_y] {
                if !(r[0] > 0.0 && r[0] <= r[1] && r[1].is_finite()) {
                    return bad(format!("{name}: log ranges need 0 < low <= high"));
                }
            }
            if !prob(s.bot_probability) || !prob(s.spam_probability) {
                return bad(format!("{name}: probabilities must lie in [0, 1]"));
            }
        }
        Ok(())
    }
}

pub const SPAM_WORDS: [&str; 12] =
    ["giveaway", "dvd", "discount", "coupon", "vape", "ecig", "cheap", "promo", "followback", "click", "sale", "offer"];

const TOPIC_WORDS: [&str; 24] = [
    "election",
    "debate",
    "vote",
    "policy",
    "rally",
    "tonight",
    "america",
    "economy",
    "jobs",
    "speech",
    "media",
    "poll",
    "campaign",
    "voters",
    "senate",
    "taxes",
    "border",
    "healthcare",
    "watch",
    "people",
    "country",
    "president",
    "news",
    "future",
];
const POSITIVE: [&str; 10] =
    ["good", "great", "love", "happy", "proud", "amazing", "best", "hope", "strong", "excited"];
const NEGATIVE: [&str; 10] =
    ["bad", "terrible", "hate", "sad", "wrong", "disaster", "corrupt", "crooked", "liar", "fail"];
const BOOSTERS: [&str; 3] = ["very", "really", "extremely"];
const GENERIC_TAGS: [&str; 4] = ["election2016", "debate", "vote", "politics"];
const SYLLABLES: [&str; 16] =
    ["ma", "ri", "jo", "an", "el", "la", "to", "ni", "sa", "ke", "li", "ro", "da", "mi", "be", "ta"];

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Side {
    Clinton,
    Trump,
    Neutral,
}

#[derive(Debug, Clone)]
struct UserPlan {
    id: String,
    archetype: Archetype,
    bot: bool,
    side: Side,
    name: String,
    default_profile: bool,
    n: u32,
    /// Activity period in whole days.
    t: i64,
    end: i64,
    first_time: i64,
    followers: (u64, u64),
    friends: (u64, u64),
    statuses: (u64, u64),
    retweets: u64,
}

fn log_uniform_int(rng: &mut ChaCha8Rng, lo: u32, hi: u32) -> u32 {
    let v = rng.gen_range((lo as f64).ln()..=((hi as f64) + 1.0).ln()).exp().floor() as u32;
    v.clamp(lo, hi)
}

fn screen_name(rng: &mut ChaCha8Rng, bot: bool) -> String {
    if bot {
        const ALNUM: &[u8] = b"abcdefghijklmnopqrstuvwxyz0123456789";
        (0..12).map(|_| ALNUM[rng.gen_range(0..ALNUM.len())] as char).collect()
    } else {
        let k = rng.gen_range(2..=3);
        let mut s: String = (0..k).map(|_| *SYLLABLES.choose(rng).expect("non-empty")).collect();
        if rng.gen_bool(0.3) {
            s.push_str(&rng.gen_range(10..99).to_string());
        }
        s
    }
}

fn plan_user(rng: &mut ChaCha8Rng, idx: usize, a: Archetype, spec: &SynthSpec) -> UserPlan {
    let s = spec.archetype(a);
    let bot = rng.gen_bool(spec.planted_bot_fraction.unwrap_or(s.bot_probability));
    let side = match rng.gen_range(0..20) {
        0..=8 => Side::Trump,
        9..=14 => Side::Clinton,
        _ => Side::Neutral,
    };
    let n = log_uniform_int(rng, s.tweets[0], s.tweets[1]);
    let t: i64 = if bot { rng.gen_range(2..=30) } else { rng.gen_range(60..=1500) };
    let day = 86_400;
    let window_end = spec.start + spec.days as i64 * day;
    let end = rng.gen_range(spec.start + day..window_end);
    let created = end - t * day;
    let first_time = created.max(spec.start);
    let tf = t as f64;

    let lx = rng.gen_range(s.log_x[0]..=s.log_x[1]);
    let (df, dfr) = if a.x_above_one() {
        let dfr = rng.gen_range(0..=2 * t) as f64;
        ((10f64.powf(lx) * (tf + dfr) - tf).ceil(), dfr)
    } else {
        let df = rng.gen_range(0..=2 * t) as f64;
        (df, ((tf + df) / 10f64.powf(-lx) - tf).ceil())
    };
    let ly = rng.gen_range(s.log_y[0]..=s.log_y[1]);
    let min_statuses = (n - 1) as f64;
    let (retweets, ds) = if a.y_above_one() {
        let ds = min_statuses + rng.gen_range(0..=n) as f64;
        ((10f64.powf(ly) * (tf + ds) - tf).ceil(), ds)
    } else {
        let r = rng.gen_range(0..=n / 2) as f64;
        (r, ((tf + r) / 10f64.powf(-ly) - tf).ceil().max(min_statuses))
    };
    let (f0, fr0) = if bot {
        (rng.gen_range(0..50), rng.gen_range(0..200))
    } else {
        (rng.gen_range(10..5000), rng.gen_range(10..1000))
    };
    let s0 = rng.gen_range(n as u64..5000);
    UserPlan {
        id: format!("u{idx:06}"),
        archetype: a,
        bot,
        side,
        name: screen_name(rng, bot),
        default_profile: rng.gen_bool(if bot { 0.8 } else { 0.1 }),
        n,
        t,
        end,
        first_time,
        followers: (f0, f0 + df as u64),
        friends: (fr0, fr0 + dfr as u64),
        statuses: (s0, s0 + ds as u64),
        retweets: retweets as u64,
    }
}

/// Split `total` over `k` slots with a skew towards the first ones.
fn split_counts(rng: &mut ChaCha8Rng, total: u64, k: usize) -> Vec<u64> {
    let mut out = vec![0; k];
    let mut left = total;
    for slot in out.iter_mut().take(k.saturating_sub(1)) {
        let u: f64 = rng.gen();
        let take = ((left as f64) * u * u).floor() as u64;
        *slot = take.min(left);
        left -= *slot;
    }
    if let Some(last) = out.last_mut() {
        *last += left;
    }
    out
}

fn tweet_text(rng: &mut ChaCha8Rng, spam_p: f64, tags: &[String]) -> String {
    let mut words: Vec<String> = Vec::new();
    for _ in 0..rng.gen_range(2..=5) {
        words.push(TOPIC_WORDS.choose(rng).expect("non-empty").to_string());
    }
    match rng.gen_range(0..10) {
        0..=2 => words.push(POSITIVE.choose(rng).expect("non-empty").to_string()),
        3..=5 => words.push(NEGATIVE.choose(rng).expect("non-empty").to_string()),
        6 => {
            words.push(BOOSTERS.choose(rng).expect("non-empty").to_string());
            words.push(POSITIVE.choose(rng).expect("non-empty").to_string());
        }
        7 => {
            words.push("not".into());
            words.push(POSITIVE.choose(rng).expect("non-empty").to_string());
        }
        _ => {}
    }
    match rng.gen_range(0..3) {
        0 => words.push("hillary".into()),
        1 => words.push("trump".into()),
        _ => {}
    }
    if rng.gen_bool(spam_p) {
        let k = rng.gen_range(1..=2);
        for w in SPAM_WORDS.choose_multiple(rng, k) {
            words.push(w.to_string());
        }
    }
    words.shuffle(rng);
    for t in tags {
        words.push(format!("#{t}"));
    }
    words.join(" ")
}

fn side_tags(rng: &mut ChaCha8Rng, side: Side, factions: &FactionTags) -> Vec<String> {
    let list: Vec<&String> = match side {
        Side::Clinton => factions.clinton.iter().collect(),
        Side::Trump => factions.trump.iter().collect(),
        Side::Neutral => Vec::new(),
    };
    let mut tags = Vec::new();
    if !list.is_empty() && rng.gen_bool(0.7) {
        tags.push(list.choose(rng).expect("non-empty").to_string());
    }
    if rng.gen_bool(0.4) {
        tags.push(GENERIC_TAGS.choose(rng).expect("non-empty").to_string());
    }
    tags
}

fn rfc3339(ts: i64) -> String {
    DateTime::from_timestamp(ts, 0)
        .map(|d| d.to_rfc3339_opts(SecondsFormat::Secs, true))
        .unwrap_or_else(|| ts.to_string())
}

struct Line {
    time: i64,
    id: String,
    json: String,
}

fn io_err(p: &Path, e: impl std::fmt::Display) -> PipelineError {
    PipelineError::new("synth", ErrorKind::Internal, format!("{}: {e}", p.display()))
}

/// Archive lines plus the planned users, without touching the filesystem.
fn generate_lines(spec: &SynthSpec, seed: u64) -> (Vec<String>, Vec<UserPlan>) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let factions = FactionTags::default();
    let mut users = Vec::with_capacity(spec.users());
    for a in Archetype::ALL {
        for _ in 0..spec.archetype(a).users {
            let idx = users.len();
            users.push(plan_user(&mut rng, idx, a, spec));
        }
    }
    let bots: Vec<usize> = (0..users.len()).filter(|&i| users[i].bot).collect();
    let humans: Vec<usize> = (0..users.len()).filter(|&i| !users[i].bot).collect();

    let mut lines: Vec<Line> = Vec::new();
    for (ui, u) in users.iter().enumerate() {
        let spam_p = spec.archetype(u.archetype).spam_probability;
        let (p_rt, p_reply) = if u.bot { (0.4, 0.05) } else { (0.15, 0.25) };
        let kinds: Vec<&str> = (0..u.n)
            .map(|k| {
                if k == 0 || users.len() < 2 {
                    return "original";
                }
                let r: f64 = rng.gen();
                if r < p_rt {
                    "retweet"
                } else if r < p_rt + p_reply {
                    "reply"
                } else {
                    "original"
                }
            })
            .collect();
        let own = kinds.iter().filter(|k| **k != "retweet").count();
        let mut counters = split_counts(&mut rng, u.retweets, own).into_iter();
        let last = (u.n - 1) as i64;
        for (k, kind) in kinds.iter().enumerate() {
            let k = k as i64;
            let time = if last == 0 { u.end } else { u.first_time + (u.end - u.first_time) * k / last };
            let lerp = |(lo, hi): (u64, u64)| if last == 0 { hi } else { lo + (hi - lo) * k as u64 / last as u64 };
            let tags = side_tags(&mut rng, u.side, &factions);
            let text = tweet_text(&mut rng, spam_p, &tags);
            let id = format!("{}-{k}", u.id);
            let mut rec = json!({
                "id": id,
                "author_id": u.id,
                "created_at": rfc3339(time),
                "text": text,
                "hashtags": tags,
                "kind": kind,
                "has_geo": !u.bot && rng.gen_bool(0.3),
                "user": {
                    "followers": lerp(u.followers),
                    "friends": lerp(u.friends),
                    "statuses": lerp(u.statuses),
                    "created_at": rfc3339(u.end - u.t * 86_400),
                    "default_profile": u.default_profile,
                    "screen_name": u.name,
                },
            });
            if *kind == "original" || *kind == "reply" {
                rec["retweet_count"] = json!(counters.next().unwrap_or(0));
            }
            if *kind != "original" {
                // mostly interact within the own group
                let pool = if rng.gen_bool(0.7) == u.bot { &bots } else { &humans };
                let pool = if pool.iter().any(|&j| j != ui) {
                    pool
                } else if u.bot {
                    &humans
                } else {
                    &bots
                };
                let mut j = *pool.choose(&mut rng).unwrap_or(&ui);
                if j == ui {
                    j = (ui + 1) % users.len();
                }
                rec["target_author_id"] = json!(users[j].id);
                rec["target_tweet_id"] = json!(format!("{}-0", users[j].id));
            }
            lines.push(Line { time, id: rec["id"].as_str().unwrap_or_default().to_string(), json: rec.to_string() });
        }
    }
    lines.sort_by(|a, b| a.time.cmp(&b.time).then_with(|| a.id.cmp(&b.id)));
    let mut out: Vec<String> = lines.into_iter().map(|l| l.json).collect();
    for k in 0..spec.malformed_lines {
        let at = rng.gen_range(0..=out.len());
        out.insert(at, format!("{{\"id\": \"broken-{k}\", \"text\": "));
    }
    (out, users)
}

/// Write a synthetic archive, ground truth, training labels, spam
/// annotations and a ready-to-run config into `dir`.
pub fn generate_fixture(spec: &SynthSpec, seed: u64, dir: &Path) -> Result<FixtureFiles, PipelineError> {
    spec.validate()?;
    std::fs::create_dir_all(dir).map_err(|e| io_err(dir, e))?;
    let (lines, users) = generate_lines(spec, seed);

    let archive = dir.join(if spec.gzip { "archive.jsonl.gz" } else { "archive.jsonl" });
    let mut body = lines.join("\n");
    body.push('\n');
    if spec.gzip {
        let f = std::fs::File::create(&archive).map_err(|e| io_err(&archive, e))?;
        let mut gz = flate2::write::GzEncoder::new(f, flate2::Compression::default());
        gz.write_all(body.as_bytes()).map_err(|e| io_err(&archive, e))?;
        gz.finish().map_err(|e| io_err(&archive, e))?;
    } else {
        std::fs::write(&archive, body).map_err(|e| io_err(&archive, e))?;
    }

    let ground_truth = dir.join("ground_truth.csv");
    let mut w = csv::Writer::from_path(&ground_truth).map_err(|e| io_err(&ground_truth, e))?;
    let mut rows =
        vec![vec!["author_id", "archetype", "quadrant", "is_bot"].into_iter().map(String::from).collect::<Vec<_>>()];
    for u in &users {
        rows.push(vec![
            u.id.clone(),
            u.archetype.as_str().into(),
            u.archetype.quadrant().as_str().into(),
            u.bot.to_string(),
        ]);
    }
    for r in &rows {
        w.write_record(r).map_err(|e| io_err(&ground_truth, e))?;
    }
    w.flush().map_err(|e| io_err(&ground_truth, e))?;

    // labels come from an independent stream so that the archive does not
    // change with labeled_fraction
    let mut lrng = ChaCha8Rng::seed_from_u64(seed ^ 0x5eed_1abe);
    let labels = dir.join("labels.csv");
    let mut w = csv::Writer::from_path(&labels).map_err(|e| io_err(&labels, e))?;
    w.write_record(["author_id", "label"]).map_err(|e| io_err(&labels, e))?;
    for u in &users {
        if lrng.gen_bool(spec.labeled_fraction) {
            w.write_record([u.id.as_str(), if u.bot { "bot" } else { "human" }]).map_err(|e| io_err(&labels, e))?;
        }
    }
    w.flush().map_err(|e| io_err(&labels, e))?;

    // two annotators agree on the spam vocabulary and disagree on one topic
    // word each
    let annotations = dir.join("annotations.csv");
    let mut w = csv::Writer::from_path(&annotations).map_err(|e| io_err(&annotations, e))?;
    w.write_record(["stem", "annotator_id", "is_spam"]).map_err(|e| io_err(&annotations, e))?;
    for (annotator, extra) in [("a1", "vote"), ("a2", "debate")] {
        for word in SPAM_WORDS.iter().chain([&extra]) {
            w.write_record([stem(word).as_str(), annotator, "1"]).map_err(|e| io_err(&annotations, e))?;
        }
        for word in ["election", "rally"] {
            w.write_record([stem(word).as_str(), annotator, "0"]).map_err(|e| io_err(&annotations, e))?;
        }
    }
    w.flush().map_err(|e| io_err(&annotations, e))?;

    let config = dir.join("run.toml");
    let archive_name = archive.file_name().and_then(|s| s.to_str()).unwrap_or("archive.jsonl");
    let toml = format!(
        "inputs = [\"{archive_name}\"]\nlabels = \"labels.csv\"\nannotations = [\"annotations.csv\"]\nout = \"out\"\nseed = {seed}\n\n[bot]\ntop_k = {}\n\n[dac]\nretweet_source = \"counter\"\n",
        spec.top_k
    );
    std::fs::write(&config, toml).map_err(|e| io_err(&config, e))?;

    Ok(FixtureFiles { archive, ground_truth, labels, annotations, config })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn default_spec_is_valid() {
        SynthSpec::default().validate().unwrap();
        assert!(SynthSpec::from_toml_str("days = 1").is_err());
        assert!(SynthSpec::from_toml_str("[influential]\nbot_probability = 1.5").is_err());
        assert!(SynthSpec::from_toml_str("[influential]\nlog_x = [0.0, 1.0]").is_err());
    }

    #[test]
    fn counts_split_exactly() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        for total in [0, 1, 7, 1000] {
            for k in 1..5 {
                assert_eq!(split_counts(&mut rng, total, k).iter().sum::<u64>(), total);
            }
        }
    }

    #[test]
    fn same_seed_same_lines() {
        let mut spec = SynthSpec::empty();
        spec.influential.users = 5;
        spec.common_human.users = 5;
        assert_eq!(generate_lines(&spec, 3).0, generate_lines(&spec, 3).0);
        assert_ne!(generate_lines(&spec, 3).0, generate_lines(&spec, 4).0);
    }
}
