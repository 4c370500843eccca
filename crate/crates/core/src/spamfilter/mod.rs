//! Text normalization and the iterative, annotation-driven spam keyword
//! filter.
//!
//! Each round ranks the stems of the residual corpus by frequency, looks up
//! which of the `top_n` stems annotators flagged as spam, and moves every
//! residual tweet containing one of those stems into the spam set. The loop
//! stops at the first round whose top list holds no flagged stem.

mod annotations;
pub mod porter;

use std::collections::{BTreeMap, BTreeSet, HashMap, HashSet};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

pub use annotations::{AnnotationError, AnnotationSet};

use crate::par::{self, Exec};

pub const DEFAULT_TOP_N: usize = 250;

const DEFAULT_STOPWORDS: &str = include_str!("../../data/stopwords.txt");

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum StemmerKind {
    #[default]
    Porter,
    None,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum PunctuationPolicy {
    /// Apostrophes are deleted, every other non-alphanumeric char splits.
    #[default]
    Strip,
    /// Split on whitespace only.
    Keep,
}

#[derive(Debug, Clone, PartialEq)]
pub struct TokenPipelineConfig {
    /// Stored lowercase with apostrophes removed.
    stopwords: HashSet<String>,
    pub stemmer: StemmerKind,
    pub punctuation: PunctuationPolicy,
    pub lowercase: bool,
}

impl Default for TokenPipelineConfig {
    fn default() -> Self {
        TokenPipelineConfig::new(parse_stopwords(DEFAULT_STOPWORDS), StemmerKind::Porter)
    }
}

fn normalize_stopword(w: &str) -> String {
    w.trim().to_lowercase().replace('\'', "")
}

/// One stopword per line; `#` starts a comment line.
pub fn parse_stopwords(src: &str) -> Vec<String> {
    src.lines().map(str::trim).filter(|l| !l.is_empty() && !l.starts_with('#')).map(str::to_string).collect()
}

impl TokenPipelineConfig {
    pub fn new<I, S>(stopwords: I, stemmer: StemmerKind) -> Self
    where
        I: IntoIterator<Item = S>,
        S: AsRef<str>,
    {
        TokenPipelineConfig {
            stopwords: stopwords.into_iter().map(|s| normalize_stopword(s.as_ref())).collect(),
            stemmer,
            punctuation: PunctuationPolicy::Strip,
            lowercase: true,
        }
    }

    pub fn without_stopwords(stemmer: StemmerKind) -> Self {
        Self::new(std::iter::empty::<&str>(), stemmer)
    }

    pub fn is_stopword(&self, token: &str) -> bool {
        self.stopwords.contains(&normalize_stopword(token))
    }
}

/// Lowercase, tokenize, drop stopwords, then stem. Order-preserving.
pub fn normalize_text(text: &str, cfg: &TokenPipelineConfig) -> Vec<String> {
    let cased = if cfg.lowercase { text.to_lowercase() } else { text.to_string() };
    let tokens: Vec<String> = match cfg.punctuation {
        PunctuationPolicy::Strip => cased
            .replace(['\'', '\u{2019}'], "")
            .split(|c: char| !c.is_alphanumeric())
            .filter(|t| !t.is_empty())
            .map(str::to_string)
            .collect(),
        PunctuationPolicy::Keep => cased.split_whitespace().map(str::to_string).collect(),
    };
    tokens
        .into_iter()
        .filter(|t| !cfg.is_stopword(t))
        .map(|t| match cfg.stemmer {
            StemmerKind::Porter => porter::stem(&t),
            StemmerKind::None => t,
        })
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum FrequencyMode {
    /// Total stem occurrences.
    #[default]
    Occurrences,
    /// Number of tweets containing the stem.
    Documents,
}

/// Stems by descending frequency, ties by ascending stem.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct KeywordRanking {
    pub entries: Vec<(String, u64)>,
}

impl KeywordRanking {
    pub fn top(&self, n: usize) -> &[(String, u64)] {
        &self.entries[..n.min(self.entries.len())]
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    /// Hex SHA-256 of `stem\tfreq\n` lines of the first `n` entries.
    pub fn top_digest(&self, n: usize) -> String {
        let mut h = Sha256::new();
        for (s, f) in self.top(n) {
            h.update(s.as_bytes());
            h.update(b"\t");
            h.update(f.to_string().as_bytes());
            h.update(b"\n");
        }
        hex::encode(h.finalize())
    }
}

fn merge_counts(mut a: HashMap<String, u64>, b: HashMap<String, u64>) -> HashMap<String, u64> {
    if a.len() < b.len() {
        return merge_counts(b, a);
    }
    for (k, v) in b {
        *a.entry(k).or_insert(0) += v;
    }
    a
}

fn count_stems<'a, I>(m: &mut HashMap<String, u64>, stems: I, mode: FrequencyMode)
where
    I: IntoIterator<Item = &'a String>,
{
    match mode {
        FrequencyMode::Occurrences => {
            for s in stems {
                *m.entry(s.clone()).or_insert(0) += 1;
            }
        }
        FrequencyMode::Documents => {
            let uniq: BTreeSet<&String> = stems.into_iter().collect();
            for s in uniq {
                *m.entry(s.clone()).or_insert(0) += 1;
            }
        }
    }
}

fn ranking_from_counts(counts: HashMap<String, u64>) -> KeywordRanking {
    let mut entries: Vec<(String, u64)> = counts.into_iter().collect();
    entries.sort_by(|a, b| b.1.cmp(&a.1).then_with(|| a.0.cmp(&b.0)));
    KeywordRanking { entries }
}

/// Rank stems over already-normalized documents.
pub fn rank_stems(docs: &[&[String]], mode: FrequencyMode, exec: Exec) -> KeywordRanking {
    let counts = par::fold_merge(
        exec,
        docs,
        HashMap::new,
        |mut m, d| {
            count_stems(&mut m, d.iter(), mode);
            m
        },
        merge_counts,
    );
    ranking_from_counts(counts)
}

pub fn rank_keywords(texts: &[&str], cfg: &TokenPipelineConfig, mode: FrequencyMode, exec: Exec) -> KeywordRanking {
    let docs = par::map(exec, texts, |t| normalize_text(t, cfg));
    let refs: Vec<&[String]> = docs.iter().map(Vec::as_slice).collect();
    rank_stems(&refs, mode, exec)
}

/// Audit record for one round of the filter.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct IterationAudit {
    pub round: usize,
    pub residual_before: u64,
    pub top_list_len: usize,
    pub top_list_sha256: String,
    /// Flagged stems found in this round's top list.
    pub keywords_removed: Vec<String>,
    pub tweets_moved: u64,
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct SpamPartition {
    pub spam_keywords: BTreeSet<String>,
    pub spam_tweet_ids: BTreeSet<String>,
    pub residual_tweet_ids: BTreeSet<String>,
    pub iterations: Vec<IterationAudit>,
}

impl SpamPartition {
    pub fn removal_rounds(&self) -> usize {
        self.iterations.iter().filter(|i| !i.keywords_removed.is_empty()).count()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct FilterParams {
    pub top_n: usize,
    pub mode: FrequencyMode,
}

impl Default for FilterParams {
    fn default() -> Self {
        FilterParams { top_n: DEFAULT_TOP_N, mode: FrequencyMode::Occurrences }
    }
}

/// A tweet reduced to its id and normalized stems.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct StemmedTweet {
    pub tweet_id: String,
    pub stems: Vec<String>,
}

pub fn stem_tweets<'a, I>(tweets: I, cfg: &TokenPipelineConfig, exec: Exec) -> Vec<StemmedTweet>
where
    I: IntoIterator<Item = (&'a str, &'a str)>,
{
    let pairs: Vec<(&str, &str)> = tweets.into_iter().collect();
    par::map(exec, &pairs, |(id, text)| StemmedTweet { tweet_id: id.to_string(), stems: normalize_text(text, cfg) })
}

/// Run the rank / annotate / move loop until a top list holds no flagged
/// stem. `on_round` sees the partition after every round.
pub fn run_iterative_filter_with<F>(
    tweets: &[StemmedTweet],
    spam_stems: &BTreeSet<String>,
    params: &FilterParams,
    exec: Exec,
    mut on_round: F,
) -> SpamPartition
where
    F: FnMut(&SpamPartition),
{
    let mut residual: Vec<&StemmedTweet> = tweets.iter().collect();
    let mut part =
        SpamPartition { residual_tweet_ids: tweets.iter().map(|t| t.tweet_id.clone()).collect(), ..Default::default() };
    for round in 1.. {
        let docs: Vec<&[String]> = residual.iter().map(|t| t.stems.as_slice()).collect();
        let ranking = rank_stems(&docs, params.mode, exec);
        let matched: BTreeSet<String> =
            ranking.top(params.top_n).iter().filter(|(s, _)| spam_stems.contains(s)).map(|(s, _)| s.clone()).collect();
        let residual_before = residual.len() as u64;
        let (moved, kept): (Vec<&StemmedTweet>, Vec<&StemmedTweet>) = if matched.is_empty() {
            (Vec::new(), residual)
        } else {
            residual.into_iter().partition(|t| t.stems.iter().any(|s| matched.contains(s)))
        };
        for t in &moved {
            part.residual_tweet_ids.remove(&t.tweet_id);
            part.spam_tweet_ids.insert(t.tweet_id.clone());
        }
        residual = kept;
        let done = matched.is_empty();
        part.iterations.push(IterationAudit {
            round,
            residual_before,
            top_list_len: ranking.top(params.top_n).len(),
            top_list_sha256: ranking.top_digest(params.top_n),
            keywords_removed: matched.iter().cloned().collect(),
            tweets_moved: moved.len() as u64,
        });
        part.spam_keywords.extend(matched);
        on_round(&part);
        if done {
            break;
        }
    }
    part
}

pub fn run_iterative_filter(
    tweets: &[StemmedTweet],
    spam_stems: &BTreeSet<String>,
    params: &FilterParams,
    exec: Exec,
) -> SpamPartition {
    run_iterative_filter_with(tweets, spam_stems, params, exec, |_| {})
}

/// Spam tweet count per author, for authors with at least one spam tweet.
pub fn spam_counts_by_author<'a, I>(part: &SpamPartition, tweet_authors: I) -> BTreeMap<String, u64>
where
    I: IntoIterator<Item = (&'a str, &'a str)>,
{
    let mut out = BTreeMap::new();
    for (tid, author) in tweet_authors {
        if part.spam_tweet_ids.contains(tid) {
            *out.entry(author.to_string()).or_insert(0) += 1;
        }
    }
    out
}

/// Authors with more than one spam tweet.
pub fn active_spammers<'a, I>(part: &SpamPartition, tweet_authors: I) -> BTreeSet<String>
where
    I: IntoIterator<Item = (&'a str, &'a str)>,
{
    spam_counts_by_author(part, tweet_authors).into_iter().filter(|(_, c)| *c >= 2).map(|(a, _)| a).collect()
}
