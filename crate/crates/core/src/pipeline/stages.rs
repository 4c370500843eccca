use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use serde_json::{json, Value};
use sha2::{Digest, Sha256};

use super::config::RunConfig;
use super::timeline::emit_timeline;
use super::{ErrorKind, PipelineError};
use crate::botmeter::{rank_and_sample_top_k, read_labels, score_users, train_from_labels, BotLabel, LogisticModel};
use crate::dacmap::{build_density, dac_points, Quadrant};
use crate::diffusion::{
    assign_faction, extrapolate_population, interaction_ccdfs, interaction_matrix, sentiment_conditioned_means,
    sentiment_volume_by_group, Candidate, ConditionFeature, ConditionedObs, DiffusionError, FactionName, Group,
    InteractionKind, RetweetSplit, Scope, VolumeRow,
};
use crate::ingest::{
    aggregate_users, read_aggregates, read_archive, read_jsonl, write_aggregates, write_jsonl, AggregateMap,
    ArchiveScan, RetweetSource, SchemaConfig, TweetKind, TweetRecord, UserAggregate,
};
use crate::par::Exec;
use crate::sentiment::{score_all, sentiment_histogram, SentimentLexicon, MAX_SCORE, MIN_SCORE};
use crate::spamfilter::{
    parse_stopwords, rank_stems, run_iterative_filter, spam_counts_by_author, stem_tweets, AnnotationSet, StemmerKind,
    TokenPipelineConfig,
};

pub const TWEETS: &str = "tweets.jsonl";
pub const AGGREGATES: &str = "aggregates.jsonl";
pub const SENTIMENT: &str = "sentiment.csv";
pub const SENTIMENT_HISTOGRAM: &str = "sentiment_histogram.csv";
pub const KEYWORD_RANKING: &str = "keyword_ranking.csv";
pub const SPAM_PARTITION: &str = "spam_partition.json";
pub const SPAM_TWEETS: &str = "spam_tweets.csv";
pub const SPAM_AUTHORS: &str = "spam_authors.csv";
pub const MODEL: &str = "model.json";
pub const BOT_SCORES: &str = "bot_scores.csv";
pub const DAC_POINTS: &str = "dac_points.csv";
pub const DAC_DENSITY: &str = "dac_density.csv";
pub const INTERACTIONS: &str = "interactions.csv";
pub const CCDF: &str = "ccdf.csv";
pub const FACTIONS: &str = "factions.csv";
pub const SENTIMENT_VOLUME: &str = "sentiment_volume.csv";
pub const SENTIMENT_VOLUME_DIFF: &str = "sentiment_volume_diff.csv";
pub const CONDITIONED_MEANS: &str = "conditioned_means.csv";
pub const EXTRAPOLATION: &str = "extrapolation.json";
pub const EXTRAPOLATION_STRATA: &str = "extrapolation_strata.csv";
pub const TIMELINE: &str = "timeline.csv";
pub const SPAM_TIMELINE: &str = "spam_timeline.csv";
pub const SUMMARY: &str = "summary.json";

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub enum Stage {
    Ingest,
    Sentiment,
    SpamFilter,
    BotScore,
    DacMap,
    Diffusion,
    Timeline,
}

impl Stage {
    pub const ALL: [Stage; 7] = [
        Stage::Ingest,
        Stage::Sentiment,
        Stage::SpamFilter,
        Stage::BotScore,
        Stage::DacMap,
        Stage::Diffusion,
        Stage::Timeline,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            Stage::Ingest => "ingest",
            Stage::Sentiment => "sentiment",
            Stage::SpamFilter => "spamfilter",
            Stage::BotScore => "botscore",
            Stage::DacMap => "dacmap",
            Stage::Diffusion => "diffusion",
            Stage::Timeline => "timeline",
        }
    }

    fn report_file(self) -> String {
        format!("{}_report.json", self.as_str())
    }

    /// Run the stage and write its artifacts plus `<stage>_report.json`.
    pub fn run(self, cfg: &RunConfig, ctx: &Ctx) -> Result<Value, PipelineError> {
        let s = StageCtx { stage: self.as_str(), ctx };
        let report = match self {
            Stage::Ingest => ingest(cfg, &s),
            Stage::Sentiment => sentiment(cfg, &s),
            Stage::SpamFilter => spamfilter(cfg, &s),
            Stage::BotScore => botscore(cfg, &s),
            Stage::DacMap => dacmap(cfg, &s),
            Stage::Diffusion => diffusion(cfg, &s),
            Stage::Timeline => timeline(&s),
        }?;
        s.write_json(&self.report_file(), &report)?;
        Ok(report)
    }
}

/// Output directory and execution strategy shared by all stages.
#[derive(Debug, Clone)]
pub struct Ctx {
    pub out: PathBuf,
    pub exec: Exec,
}

impl Ctx {
    /// One worker runs the sequential code path; anything else uses the
    /// thread pool.
    pub fn new(out: impl Into<PathBuf>, workers: usize) -> Self {
        let exec = if workers == 1 { Exec::Sequential } else { Exec::default() };
        Ctx { out: out.into(), exec }
    }

    pub fn path(&self, name: &str) -> PathBuf {
        self.out.join(name)
    }
}

struct StageCtx<'a> {
    stage: &'static str,
    ctx: &'a Ctx,
}

impl StageCtx<'_> {
    fn exec(&self) -> Exec {
        self.ctx.exec
    }

    fn path(&self, name: &str) -> PathBuf {
        self.ctx.path(name)
    }

    fn err(&self, kind: ErrorKind, msg: impl std::fmt::Display) -> PipelineError {
        PipelineError::new(self.stage, kind, msg.to_string())
    }

    fn config(&self, msg: impl std::fmt::Display) -> PipelineError {
        self.err(ErrorKind::Config, msg)
    }

    fn data(&self, msg: impl std::fmt::Display) -> PipelineError {
        self.err(ErrorKind::Data, msg)
    }

    fn internal(&self, msg: impl std::fmt::Display) -> PipelineError {
        self.err(ErrorKind::Internal, msg)
    }

    fn require(&self, name: &str) -> Result<PathBuf, PipelineError> {
        let p = self.path(name);
        if p.is_file() {
            Ok(p)
        } else {
            Err(self.data(format!("missing artifact {} (run the earlier stages first)", p.display())))
        }
    }

    fn write_json<T: Serialize>(&self, name: &str, v: &T) -> Result<(), PipelineError> {
        let mut s = serde_json::to_string_pretty(v).map_err(|e| self.internal(e))?;
        s.push('\n');
        let p = self.path(name);
        std::fs::write(&p, s).map_err(|e| self.internal(format!("{}: {e}", p.display())))
    }

    fn read_json<T: serde::de::DeserializeOwned>(&self, name: &str) -> Result<T, PipelineError> {
        let p = self.require(name)?;
        let s = std::fs::read_to_string(&p).map_err(|e| self.data(format!("{}: {e}", p.display())))?;
        serde_json::from_str(&s).map_err(|e| self.data(format!("{}: {e}", p.display())))
    }

    fn write_csv<I>(&self, name: &str, header: &[&str], rows: I) -> Result<(), PipelineError>
    where
        I: IntoIterator<Item = Vec<String>>,
    {
        let p = self.path(name);
        let wrap = |e: csv::Error| self.internal(format!("{}: {e}", p.display()));
        let mut w = csv::Writer::from_path(&p).map_err(wrap)?;
        w.write_record(header).map_err(wrap)?;
        for r in rows {
            w.write_record(&r).map_err(wrap)?;
        }
        w.flush().map_err(|e| self.internal(format!("{}: {e}", p.display())))
    }

    /// The requested columns of a CSV artifact, row by row.
    fn read_csv(&self, name: &str, columns: &[&str]) -> Result<Vec<Vec<String>>, PipelineError> {
        let p = self.require(name)?;
        let wrap = |e: csv::Error| self.data(format!("{}: {e}", p.display()));
        let mut r = csv::Reader::from_path(&p).map_err(wrap)?;
        let header = r.headers().map_err(wrap)?.clone();
        let idx: Vec<usize> = columns
            .iter()
            .map(|c| {
                header
                    .iter()
                    .position(|h| h == *c)
                    .ok_or_else(|| self.data(format!("{}: missing column `{c}`", p.display())))
            })
            .collect::<Result<_, _>>()?;
        let mut out = Vec::new();
        for rec in r.records() {
            let rec = rec.map_err(wrap)?;
            out.push(idx.iter().map(|&i| rec.get(i).unwrap_or("").to_string()).collect());
        }
        Ok(out)
    }

    fn tweets(&self) -> Result<Vec<TweetRecord>, PipelineError> {
        read_jsonl(&self.require(TWEETS)?).map_err(|e| self.data(e))
    }

    fn aggregates(&self) -> Result<AggregateMap, PipelineError> {
        read_aggregates(&self.require(AGGREGATES)?).map_err(|e| self.data(e))
    }
}

fn fmt_opt(v: Option<f64>) -> String {
    v.map(|x| x.to_string()).unwrap_or_default()
}

#[derive(Debug, Clone, Serialize, Deserialize)]
struct IngestReport {
    lines_read: u64,
    records: u64,
    snapshots: u64,
    malformed: u64,
    out_of_window: u64,
    active_users: u64,
    error_samples: Vec<String>,
}

fn ingest(cfg: &RunConfig, s: &StageCtx) -> Result<Value, PipelineError> {
    let schema = match &cfg.schema {
        Some(p) => SchemaConfig::load(p).map_err(|e| s.config(e))?,
        None => SchemaConfig::default(),
    };
    let mut scan = ArchiveScan::default();
    for p in &cfg.inputs {
        let part = read_archive(p, &schema, s.exec()).map_err(|e| s.data(e))?;
        // file name only, so reports do not depend on where the data lives
        let name = p.file_name().map_or_else(|| p.display().to_string(), |n| n.to_string_lossy().into_owned());
        scan.extend(ArchiveScan {
            error_samples: part.error_samples.iter().map(|(l, m)| (*l, format!("{name}:{l}: {m}"))).collect(),
            ..part
        });
    }
    let aggs = aggregate_users(&scan.records, &scan.snapshots, s.exec());
    write_jsonl(&s.path(TWEETS), &scan.records).map_err(|e| s.internal(e))?;
    write_aggregates(&s.path(AGGREGATES), &aggs).map_err(|e| s.internal(e))?;
    let report = IngestReport {
        lines_read: scan.lines_read(),
        records: scan.records.len() as u64,
        snapshots: scan.snapshots.len() as u64,
        malformed: scan.malformed,
        out_of_window: scan.out_of_window,
        active_users: aggs.values().filter(|a| a.is_active()).count() as u64,
        error_samples: scan.error_samples.into_iter().map(|(_, m)| m).collect(),
    };
    serde_json::to_value(report).map_err(|e| s.internal(e))
}

fn sentiment(cfg: &RunConfig, s: &StageCtx) -> Result<Value, PipelineError> {
    let lex = match &cfg.lexicon {
        Some(p) => SentimentLexicon::load(p).map_err(|e| s.config(e))?,
        None => SentimentLexicon::default_lexicon(),
    };
    let tweets = s.tweets()?;
    let texts: Vec<&str> = tweets.iter().map(|t| t.text.as_str()).collect();
    let scores = score_all(&texts, &lex, s.exec());
    s.write_csv(
        SENTIMENT,
        &["tweet_id", "author_id", "pos", "neg", "s"],
        tweets.iter().zip(&scores).map(|(t, sc)| {
            vec![t.tweet_id.clone(), t.author_id.clone(), sc.pos.to_string(), sc.neg.to_string(), sc.s.to_string()]
        }),
    )?;
    let hist = sentiment_histogram(scores.iter().copied());
    s.write_csv(SENTIMENT_HISTOGRAM, &["s", "count"], hist.rows().map(|(v, c)| vec![v.to_string(), c.to_string()]))?;
    let by_s: BTreeMap<String, u64> = hist.rows().map(|(v, c)| (v.to_string(), c)).collect();
    Ok(json!({ "scored": hist.total(), "histogram": by_s }))
}

fn token_config(cfg: &RunConfig, s: &StageCtx) -> Result<TokenPipelineConfig, PipelineError> {
    match &cfg.stopwords {
        Some(p) => {
            let src = std::fs::read_to_string(p).map_err(|e| s.config(format!("{}: {e}", p.display())))?;
            Ok(TokenPipelineConfig::new(parse_stopwords(&src), StemmerKind::Porter))
        }
        None => Ok(TokenPipelineConfig::default()),
    }
}

fn spamfilter(cfg: &RunConfig, s: &StageCtx) -> Result<Value, PipelineError> {
    let tokens = token_config(cfg, s)?;
    let annotations = AnnotationSet::load(&cfg.annotations).map_err(|e| s.data(e))?;
    let spam_stems = annotations.spam_stems();
    let tweets = s.tweets()?;
    let params = cfg.filter_params();
    let stemmed = stem_tweets(tweets.iter().map(|t| (t.tweet_id.as_str(), t.text.as_str())), &tokens, s.exec());

    let docs: Vec<&[String]> = stemmed.iter().map(|t| t.stems.as_slice()).collect();
    let ranking = rank_stems(&docs, params.mode, s.exec());
    s.write_csv(
        KEYWORD_RANKING,
        &["rank", "stem", "frequency", "flagged"],
        ranking.top(params.top_n).iter().enumerate().map(|(i, (stem, f))| {
            vec![(i + 1).to_string(), stem.clone(), f.to_string(), spam_stems.contains(stem).to_string()]
        }),
    )?;

    let part = run_iterative_filter(&stemmed, &spam_stems, &params, s.exec());
    let authors = || tweets.iter().map(|t| (t.tweet_id.as_str(), t.author_id.as_str()));
    s.write_csv(
        SPAM_TWEETS,
        &["tweet_id", "author_id"],
        tweets
            .iter()
            .filter(|t| part.spam_tweet_ids.contains(&t.tweet_id))
            .map(|t| vec![t.tweet_id.clone(), t.author_id.clone()]),
    )?;
    let per_author = spam_counts_by_author(&part, authors());
    let active = per_author.values().filter(|&&c| c >= 2).count();
    s.write_csv(
        SPAM_AUTHORS,
        &["author_id", "spam_tweets", "active_spammer"],
        per_author.iter().map(|(a, c)| vec![a.clone(), c.to_string(), (*c >= 2).to_string()]),
    )?;
    let report = json!({
        "annotators": annotations.annotators(),
        "agreed_spam_stems": spam_stems.len(),
        "spam_keywords": part.spam_keywords,
        "spam_tweets": part.spam_tweet_ids.len(),
        "residual_tweets": part.residual_tweet_ids.len(),
        "removal_rounds": part.removal_rounds(),
        "spam_authors": per_author.len(),
        "active_spammers": active,
    });
    s.write_json(
        SPAM_PARTITION,
        &json!({
            "spam_keywords": part.spam_keywords,
            "spam_tweets": part.spam_tweet_ids.len(),
            "residual_tweets": part.residual_tweet_ids.len(),
            "iterations": part.iterations,
        }),
    )?;
    Ok(report)
}

fn botscore(cfg: &RunConfig, s: &StageCtx) -> Result<Value, PipelineError> {
    let aggs = s.aggregates()?;
    let users = rank_and_sample_top_k(&aggs, cfg.bot.top_k);
    let params = cfg.classify_params();
    let mut trained = false;
    let model: Option<LogisticModel> = if let Some(p) = &cfg.model {
        let src = std::fs::read_to_string(p).map_err(|e| s.config(format!("{}: {e}", p.display())))?;
        Some(LogisticModel::from_json(&src).map_err(|e| s.config(e))?)
    } else if users.is_empty() {
        None
    } else {
        let path = cfg.labels.as_ref().ok_or_else(|| s.config("no model and no labels"))?;
        let labels = read_labels(path).map_err(|e| s.data(e))?;
        let (m, _) = train_from_labels(&aggs, &labels, params.min_period_days, &cfg.train_params())
            .map_err(|e| s.data(format!("training failed: {e}")))?;
        trained = true;
        Some(m)
    };
    if let Some(m) = &model {
        let p = s.path(MODEL);
        std::fs::write(&p, m.to_json() + "\n").map_err(|e| s.internal(format!("{}: {e}", p.display())))?;
    }
    let verdicts = match &model {
        Some(m) => score_users(&users, m, &params, s.exec()).map_err(|e| s.data(e))?,
        None => Vec::new(),
    };
    s.write_csv(
        BOT_SCORES,
        &["rank", "author_id", "tweets_posted", "score", "label", "reason"],
        users.iter().zip(&verdicts).enumerate().map(|(i, (u, v))| {
            vec![
                (i + 1).to_string(),
                v.author_id.clone(),
                u.tweets_posted.to_string(),
                fmt_opt(v.score),
                v.label.as_str().to_string(),
                v.reason.clone().unwrap_or_default(),
            ]
        }),
    )?;
    let count = |l: BotLabel| verdicts.iter().filter(|v| v.label == l).count();
    Ok(json!({
        "scored": verdicts.len(),
        "bot": count(BotLabel::Bot),
        "human": count(BotLabel::Human),
        "undecided": count(BotLabel::Undecided),
        "model_trained": trained,
    }))
}

fn active_users(aggs: &AggregateMap) -> Vec<&UserAggregate> {
    aggs.values().filter(|a| a.is_active()).collect()
}

fn dacmap(cfg: &RunConfig, s: &StageCtx) -> Result<Value, PipelineError> {
    let aggs = s.aggregates()?;
    let users = active_users(&aggs);
    let (points, failed) = dac_points(&users, cfg.bot.min_period_days, cfg.dac.retweet_source, s.exec());
    s.write_csv(
        DAC_POINTS,
        &["author_id", "x", "y", "quadrant"],
        points.iter().map(|p| {
            vec![
                p.author_id.clone(),
                p.point.x.to_string(),
                p.point.y.to_string(),
                p.point.quadrant.as_str().to_string(),
            ]
        }),
    )?;
    let xy: Vec<(f64, f64)> = points.iter().map(|p| (p.point.x, p.point.y)).collect();
    let map = build_density(&xy, &cfg.dac.x_axis, &cfg.dac.y_axis, s.exec()).map_err(|e| s.config(e))?;
    let ny = map.ny();
    s.write_csv(
        DAC_DENSITY,
        &["x_bin_low", "y_bin_low", "density"],
        map.density
            .iter()
            .enumerate()
            .map(|(i, d)| vec![map.x_edges[i / ny].to_string(), map.y_edges[i % ny].to_string(), d.to_string()]),
    )?;
    let mut quadrants: BTreeMap<&str, u64> = Quadrant::ALL.iter().map(|q| (q.as_str(), 0)).collect();
    for p in &points {
        *quadrants.entry(p.point.quadrant.as_str()).or_insert(0) += 1;
    }
    Ok(json!({
        "users": users.len(),
        "points": points.len(),
        "skipped": failed.len(),
        "skipped_samples": failed.iter().take(20).map(|(_, e)| e.to_string()).collect::<Vec<_>>(),
        "clipped": map.clipped,
        "quadrants": quadrants,
    }))
}

fn parse_label(s: &str) -> Option<BotLabel> {
    match s {
        "bot" => Some(BotLabel::Bot),
        "human" => Some(BotLabel::Human),
        "undecided" => Some(BotLabel::Undecided),
        _ => None,
    }
}

fn feature_value(a: &UserAggregate, f: ConditionFeature, source: RetweetSource) -> Option<f64> {
    match f {
        // platform status count when profiles were captured
        ConditionFeature::TweetsPosted => Some(a.statuses.map_or(a.tweets_posted, |m| m.max) as f64),
        ConditionFeature::RetweetsReceived => Some(a.retweets_obtained(source) as f64),
        ConditionFeature::Friends => a.friends.map(|m| m.max as f64),
        ConditionFeature::Followers => a.followers.map(|m| m.max as f64),
    }
}

fn diffusion(cfg: &RunConfig, s: &StageCtx) -> Result<Value, PipelineError> {
    let tweets = s.tweets()?;
    let aggs = s.aggregates()?;
    let mut sentiment: HashMap<String, i8> = HashMap::new();
    for r in s.read_csv(SENTIMENT, &["tweet_id", "s"])? {
        let v: i8 = r[1].parse().map_err(|_| s.data(format!("{SENTIMENT}: bad score `{}`", r[1])))?;
        sentiment.insert(r[0].clone(), v);
    }
    let mut labels: BTreeMap<String, BotLabel> = BTreeMap::new();
    for r in s.read_csv(BOT_SCORES, &["author_id", "label"])? {
        let l = parse_label(&r[1]).ok_or_else(|| s.data(format!("{BOT_SCORES}: bad label `{}`", r[1])))?;
        labels.insert(r[0].clone(), l);
    }
    let group_of = |a: &str| labels.get(a).copied().and_then(Group::from_label);
    let group_name = |a: &str| group_of(a).map_or("unlabeled", Group::as_str);

    // interactions
    let m = interaction_matrix(&tweets, group_of);
    let groups = [Group::Bot, Group::Human];
    let kinds = [InteractionKind::Reply, InteractionKind::Retweet];
    let mut rows = Vec::new();
    for k in kinds {
        for a in groups {
            for b in groups {
                rows.push(vec![k.as_str().into(), a.as_str().into(), b.as_str().into(), m.count(k, a, b).to_string()]);
            }
        }
    }
    s.write_csv(INTERACTIONS, &["kind", "source_group", "target_group", "count"], rows)?;
    let ccdfs = interaction_ccdfs(&m);
    let mut rows = Vec::new();
    for ((k, g, sc), series) in &ccdfs {
        for (v, p) in series.iter().flat_map(|c| c.points.iter()) {
            rows.push(vec![k.as_str().into(), g.as_str().into(), sc.as_str().into(), v.to_string(), p.to_string()]);
        }
    }
    s.write_csv(CCDF, &["kind", "group", "scope", "value", "p"], rows)?;

    // factions
    let tags = cfg.faction_tags()?;
    let users = active_users(&aggs);
    let factions: BTreeMap<&str, FactionName> = users
        .iter()
        .map(|a| (a.author_id.as_str(), assign_faction(&a.hashtag_counts, &tags)))
        .map(|(id, f)| (id, f.faction))
        .collect();
    s.write_csv(
        FACTIONS,
        &["author_id", "faction", "clinton_tags", "trump_tags", "group"],
        users.iter().map(|a| {
            let f = assign_faction(&a.hashtag_counts, &tags);
            vec![
                a.author_id.clone(),
                f.faction.as_str().into(),
                f.clinton_tags.to_string(),
                f.trump_tags.to_string(),
                group_name(&a.author_id).into(),
            ]
        }),
    )?;
    let mut faction_counts: BTreeMap<&str, BTreeMap<&str, u64>> = BTreeMap::new();
    for (id, f) in &factions {
        *faction_counts.entry(f.as_str()).or_default().entry(group_name(id)).or_insert(0) += 1;
    }

    // sentiment volumes
    let vol_rows: Vec<VolumeRow> = tweets
        .iter()
        .filter_map(|t| {
            let group = group_of(&t.author_id)?;
            let sv = *sentiment.get(&t.tweet_id)?;
            let faction = factions.get(t.author_id.as_str()).copied().unwrap_or(FactionName::None);
            let (c, tr) = cfg.candidates.mentions(&t.text, &t.hashtags);
            Some(VolumeRow { faction, group, s: sv, mentions_clinton: c, mentions_trump: tr })
        })
        .collect();
    let table = sentiment_volume_by_group(&vol_rows);
    let mut rows = Vec::new();
    for ((f, g, c), vols) in &table.volumes {
        for (i, n) in vols.iter().enumerate() {
            let sv = MIN_SCORE + i as i8;
            rows.push(vec![f.as_str().into(), g.as_str().into(), c.as_str().into(), sv.to_string(), n.to_string()]);
        }
    }
    debug_assert!(rows.len() % (MAX_SCORE - MIN_SCORE + 1) as usize == 0);
    s.write_csv(SENTIMENT_VOLUME, &["faction", "group", "candidate", "s", "count"], rows)?;
    s.write_csv(
        SENTIMENT_VOLUME_DIFF,
        &["faction", "group", "s", Candidate::Clinton.as_str(), Candidate::Trump.as_str(), "abs_diff"],
        table.differences().iter().map(|d| {
            vec![
                d.faction.as_str().into(),
                d.group.as_str().into(),
                d.s.to_string(),
                d.clinton.to_string(),
                d.trump.to_string(),
                d.abs_diff.to_string(),
            ]
        }),
    )?;

    // sentiment-conditioned feature means; retweets are excluded since their
    // text is not the author's
    let mut in_dataset: HashMap<&str, u64> = HashMap::new();
    for t in tweets.iter().filter(|t| t.kind == TweetKind::Retweet) {
        if let Some(id) = &t.target_tweet_id {
            *in_dataset.entry(id.as_str()).or_insert(0) += 1;
        }
    }
    let mut rows = Vec::new();
    for f in ConditionFeature::ALL {
        let obs: Vec<ConditionedObs> = tweets
            .iter()
            .filter(|t| t.kind != TweetKind::Retweet)
            .filter_map(|t| {
                let sv = *sentiment.get(&t.tweet_id)?;
                let value = feature_value(aggs.get(&t.author_id)?, f, cfg.dac.retweet_source)?;
                let retweets =
                    t.retweet_count.unwrap_or_else(|| in_dataset.get(t.tweet_id.as_str()).copied().unwrap_or(0));
                Some(ConditionedObs { s: sv, retweets, value })
            })
            .collect();
        let means = sentiment_conditioned_means(&obs);
        for split in [RetweetSplit::AtMostOnce, RetweetSplit::MoreThanOnce] {
            for b in means.table(split) {
                rows.push(vec![
                    f.as_str().into(),
                    split.as_str().into(),
                    b.s.to_string(),
                    b.n.to_string(),
                    fmt_opt(b.mean),
                    fmt_opt(b.stderr),
                ]);
            }
        }
    }
    s.write_csv(CONDITIONED_MEANS, &["feature", "split", "s", "n", "mean", "stderr"], rows)?;

    // population extrapolation
    let activity: Vec<(String, u64)> = users.iter().map(|a| (a.author_id.clone(), a.tweets_posted)).collect();
    let estimate = match extrapolate_population(&labels, &activity, cfg.extrapolation.strata, cfg.extrapolation.scheme)
    {
        Ok(e) => Some(e),
        Err(DiffusionError::EmptyInput) => None,
        Err(e) => return Err(s.data(e)),
    };
    s.write_json(EXTRAPOLATION, &estimate)?;
    s.write_csv(
        EXTRAPOLATION_STRATA,
        &[
            "stratum",
            "min_tweets",
            "max_tweets",
            "users",
            "tweets",
            "sampled_bots",
            "sampled_humans",
            "bot_rate",
            "volume_rate",
            "floored",
            "est_bots",
            "est_bot_tweets",
        ],
        estimate.iter().flat_map(|e| e.strata.iter()).map(|r| {
            vec![
                r.index.to_string(),
                r.min_tweets.to_string(),
                r.max_tweets.to_string(),
                r.users.to_string(),
                r.tweets.to_string(),
                r.sampled_bots.to_string(),
                r.sampled_humans.to_string(),
                r.bot_rate.to_string(),
                r.volume_rate.to_string(),
                r.floored.to_string(),
                r.est_bots.to_string(),
                r.est_bot_tweets.to_string(),
            ]
        }),
    )?;

    let reply_totals: BTreeMap<&str, u64> = groups
        .iter()
        .map(|g| (g.as_str(), m.user_counts(InteractionKind::Reply, *g, Scope::Total).iter().sum::<f64>() as u64))
        .collect();
    Ok(json!({
        "labeled_users": labels.values().filter(|l| **l != BotLabel::Undecided).count(),
        "unlabeled_interactions": m.unlabeled,
        "replies_by_group": reply_totals,
        "factions": faction_counts,
        "volume_tweets": vol_rows.len(),
        "extrapolation": estimate.as_ref().map(|e| json!({
            "population_size": e.population_size,
            "bot_count": e.bot_count,
            "bot_fraction": e.bot_fraction,
            "bot_tweet_volume": e.bot_tweet_volume,
            "volume_fraction": e.volume_fraction,
            "lower_bound": e.lower_bound,
        })),
    }))
}

fn timeline(s: &StageCtx) -> Result<Value, PipelineError> {
    let tweets = s.tweets()?;
    let write = |name: &str, ts: Vec<i64>| -> Result<usize, PipelineError> {
        let rows = emit_timeline(ts);
        let n = rows.len();
        s.write_csv(
            name,
            &["day", "count", "cumulative"],
            rows.into_iter().map(|r| vec![r.day, r.count.to_string(), r.cumulative.to_string()]),
        )?;
        Ok(n)
    };
    let days = write(TIMELINE, tweets.iter().map(|t| t.created_at).collect())?;
    let spam_days = if s.path(SPAM_TWEETS).is_file() {
        let ids: BTreeSet<String> =
            s.read_csv(SPAM_TWEETS, &["tweet_id"])?.into_iter().map(|mut r| r.remove(0)).collect();
        Some(write(SPAM_TIMELINE, tweets.iter().filter(|t| ids.contains(&t.tweet_id)).map(|t| t.created_at).collect())?)
    } else {
        None
    };
    Ok(json!({ "days": days, "spam_days": spam_days }))
}

/// Files hashed into the summary, in a fixed order.
pub const ARTIFACTS: [&str; 22] = [
    TWEETS,
    AGGREGATES,
    SENTIMENT,
    SENTIMENT_HISTOGRAM,
    KEYWORD_RANKING,
    SPAM_PARTITION,
    SPAM_TWEETS,
    SPAM_AUTHORS,
    MODEL,
    BOT_SCORES,
    DAC_POINTS,
    DAC_DENSITY,
    INTERACTIONS,
    CCDF,
    FACTIONS,
    SENTIMENT_VOLUME,
    SENTIMENT_VOLUME_DIFF,
    CONDITIONED_MEANS,
    EXTRAPOLATION,
    EXTRAPOLATION_STRATA,
    TIMELINE,
    SPAM_TIMELINE,
];

fn sha256_file(p: &Path) -> std::io::Result<String> {
    let bytes = std::fs::read(p)?;
    Ok(hex::encode(Sha256::digest(&bytes)))
}

/// Collect the stage reports and artifact digests into `summary.json`.
pub fn write_summary(ctx: &Ctx) -> Result<Value, PipelineError> {
    let s = StageCtx { stage: "summary", ctx };
    let mut stages = serde_json::Map::new();
    for st in Stage::ALL {
        if s.path(&st.report_file()).is_file() {
            stages.insert(st.as_str().into(), s.read_json(&st.report_file())?);
        }
    }
    let mut digests = serde_json::Map::new();
    for name in ARTIFACTS {
        let p = s.path(name);
        if p.is_file() {
            let d = sha256_file(&p).map_err(|e| s.internal(format!("{}: {e}", p.display())))?;
            digests.insert(name.into(), Value::String(d));
        }
    }
    let summary = json!({ "stages": stages, "artifacts": digests });
    s.write_json(SUMMARY, &summary)?;
    Ok(summary)
}

/// Validate the config and run every stage in order, then write the summary.
pub fn run_pipeline(cfg: &RunConfig, ctx: &Ctx) -> Result<Value, PipelineError> {
    cfg.validate()?;
    std::fs::create_dir_all(&ctx.out)
        .map_err(|e| PipelineError::new("run", ErrorKind::Internal, format!("{}: {e}", ctx.out.display())))?;
    for st in Stage::ALL {
        st.run(cfg, ctx)?;
    }
    write_summary(ctx)
}
