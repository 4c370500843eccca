use std::io::{BufRead, BufReader};
use std::path::Path;

use serde::{Deserialize, Serialize};
use serde_json::Value;

use super::schema::{lookup, parse_timestamp, SchemaConfig};
use super::IngestError;
use crate::par::{self, Exec};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum TweetKind {
    Original,
    Retweet,
    Reply,
}

/// One accepted tweet event.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TweetRecord {
    pub tweet_id: String,
    pub author_id: String,
    /// Epoch seconds, UTC.
    pub created_at: i64,
    pub text: String,
    /// Lowercase, no leading `#`.
    pub hashtags: Vec<String>,
    pub kind: TweetKind,
    /// Present exactly when `kind` is retweet or reply.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub target_author_id: Option<String>,
    /// Tweet being retweeted or replied to, when the archive carries it.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub target_tweet_id: Option<String>,
    /// Platform retweet counter, when the archive carries it.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub retweet_count: Option<u64>,
    pub has_geo: bool,
}

/// Author profile counters observed at some instant.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ProfileSnapshot {
    pub author_id: String,
    pub observed_at: i64,
    pub followers: u64,
    pub friends: u64,
    pub statuses_total: u64,
    pub account_created_at: i64,
    pub is_default_profile: bool,
    pub screen_name: String,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ParsedLine {
    pub record: TweetRecord,
    pub snapshot: Option<ProfileSnapshot>,
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum ParseError {
    #[error("malformed record: {0}")]
    MalformedRecord(String),
    #[error("timestamp {0} outside collection window")]
    OutOfWindow(i64),
}

fn malformed(msg: impl Into<String>) -> ParseError {
    ParseError::MalformedRecord(msg.into())
}

fn id_string(v: &Value) -> Option<String> {
    match v {
        Value::String(s) if !s.is_empty() => Some(s.clone()),
        Value::Number(n) => Some(n.to_string()),
        _ => None,
    }
}

fn opt_id(root: &Value, path: &str) -> Result<Option<String>, ParseError> {
    match lookup(root, path) {
        None => Ok(None),
        Some(v) => id_string(v).map(Some).ok_or_else(|| malformed(format!("`{path}` is not an id"))),
    }
}

fn required_id(root: &Value, path: &str) -> Result<String, ParseError> {
    opt_id(root, path)?.ok_or_else(|| malformed(format!("missing `{path}`")))
}

fn as_count(v: &Value, path: &str) -> Result<u64, ParseError> {
    v.as_u64()
        .or_else(|| v.as_str().and_then(|s| s.parse().ok()))
        .ok_or_else(|| malformed(format!("`{path}` is not a non-negative integer")))
}

pub fn normalize_hashtag(tag: &str) -> String {
    tag.trim().trim_start_matches('#').to_lowercase()
}

/// `#tag` tokens in free text, used when the archive has no hashtag field.
fn hashtags_from_text(text: &str) -> Vec<String> {
    text.split(|c: char| c.is_whitespace())
        .filter_map(|w| w.strip_prefix('#'))
        .map(|w| w.trim_end_matches(|c: char| !(c.is_alphanumeric() || c == '_')))
        .filter(|w| !w.is_empty())
        .map(|w| w.to_lowercase())
        .collect()
}

fn parse_hashtags(root: &Value, schema: &SchemaConfig, text: &str) -> Result<Vec<String>, ParseError> {
    let Some(v) = lookup(root, &schema.hashtags) else {
        return Ok(hashtags_from_text(text));
    };
    let arr = v.as_array().ok_or_else(|| malformed(format!("`{}` is not an array", schema.hashtags)))?;
    arr.iter()
        .map(|h| match h {
            Value::String(s) => Ok(normalize_hashtag(s)),
            Value::Object(o) => o
                .get("text")
                .and_then(Value::as_str)
                .map(normalize_hashtag)
                .ok_or_else(|| malformed("hashtag object without `text`")),
            _ => Err(malformed("hashtag entry is neither string nor object")),
        })
        .filter(|r| !matches!(r, Ok(s) if s.is_empty()))
        .collect()
}

fn parse_kind(root: &Value, schema: &SchemaConfig) -> Result<(TweetKind, Option<String>, Option<String>), ParseError> {
    if !schema.kind.is_empty() {
        let kind = match lookup(root, &schema.kind) {
            None => TweetKind::Original,
            Some(Value::String(s)) => match s.to_ascii_lowercase().as_str() {
                "original" | "tweet" => TweetKind::Original,
                "retweet" => TweetKind::Retweet,
                "reply" => TweetKind::Reply,
                other => return Err(malformed(format!("unknown kind `{other}`"))),
            },
            Some(_) => return Err(malformed("kind is not a string")),
        };
        let target = opt_id(root, &schema.target_author_id)?;
        let target_tweet = opt_id(root, &schema.target_tweet_id)?;
        return Ok((kind, target, target_tweet));
    }
    if let Some(t) = opt_id(root, &schema.retweet_target)? {
        return Ok((TweetKind::Retweet, Some(t), opt_id(root, &schema.retweet_target_tweet)?));
    }
    if let Some(t) = opt_id(root, &schema.reply_target)? {
        return Ok((TweetKind::Reply, Some(t), opt_id(root, &schema.reply_target_tweet)?));
    }
    Ok((TweetKind::Original, None, None))
}

fn parse_snapshot(
    root: &Value,
    schema: &SchemaConfig,
    author_id: &str,
    observed_at: i64,
) -> Result<Option<ProfileSnapshot>, ParseError> {
    let Some(followers) = lookup(root, &schema.user_followers) else {
        return Ok(None);
    };
    let followers = as_count(followers, &schema.user_followers)?;
    let friends = lookup(root, &schema.user_friends)
        .ok_or_else(|| malformed("profile without friends count"))
        .and_then(|v| as_count(v, &schema.user_friends))?;
    let statuses_total = lookup(root, &schema.user_statuses)
        .ok_or_else(|| malformed("profile without statuses count"))
        .and_then(|v| as_count(v, &schema.user_statuses))?;
    let account_created_at = lookup(root, &schema.user_created_at)
        .and_then(parse_timestamp)
        .ok_or_else(|| malformed("profile without account creation time"))?;
    if observed_at < account_created_at {
        return Err(malformed("profile observed before account creation"));
    }
    let is_default_profile = lookup(root, &schema.user_default_profile).and_then(Value::as_bool).unwrap_or(false);
    let screen_name = lookup(root, &schema.user_screen_name).and_then(Value::as_str).unwrap_or_default().to_string();
    Ok(Some(ProfileSnapshot {
        author_id: author_id.to_string(),
        observed_at,
        followers,
        friends,
        statuses_total,
        account_created_at,
        is_default_profile,
        screen_name,
    }))
}

/// Parse one archive line into a validated record plus the embedded profile
/// snapshot, if any.
pub fn parse_tweet_line(line: &str, schema: &SchemaConfig) -> Result<ParsedLine, ParseError> {
    let root: Value = serde_json::from_str(line).map_err(|e| malformed(format!("bad JSON: {e}")))?;
    if !root.is_object() {
        return Err(malformed("record is not a JSON object"));
    }
    let tweet_id = required_id(&root, &schema.tweet_id)?;
    let author_id = required_id(&root, &schema.author_id)?;
    let created_at = lookup(&root, &schema.created_at)
        .and_then(parse_timestamp)
        .ok_or_else(|| malformed(format!("missing or bad `{}`", schema.created_at)))?;
    let text = match lookup(&root, &schema.text) {
        Some(Value::String(s)) => s.clone(),
        Some(_) => return Err(malformed("text is not a string")),
        None => return Err(malformed(format!("missing `{}`", schema.text))),
    };
    let hashtags = parse_hashtags(&root, schema, &text)?;
    let (kind, target_author_id, target_tweet_id) = parse_kind(&root, schema)?;
    match (kind, &target_author_id) {
        (TweetKind::Original, Some(_)) => return Err(malformed("original tweet with a target author")),
        (TweetKind::Retweet | TweetKind::Reply, None) => return Err(malformed("retweet/reply without target author")),
        _ => {}
    }
    let retweet_count = lookup(&root, &schema.retweet_count).map(|v| as_count(v, &schema.retweet_count)).transpose()?;
    let has_geo = match lookup(&root, &schema.has_geo) {
        None => false,
        Some(Value::Bool(b)) => *b,
        Some(_) => true,
    };
    if !schema.in_window(created_at) {
        return Err(ParseError::OutOfWindow(created_at));
    }
    let snapshot = parse_snapshot(&root, schema, &author_id, created_at)?;
    Ok(ParsedLine {
        record: TweetRecord {
            tweet_id,
            author_id,
            created_at,
            text,
            hashtags,
            kind,
            target_author_id,
            target_tweet_id: if kind == TweetKind::Original { None } else { target_tweet_id },
            retweet_count,
            has_geo,
        },
        snapshot,
    })
}

/// Result of scanning one or more archive files.
#[derive(Debug, Clone, Default)]
pub struct ArchiveScan {
    pub records: Vec<TweetRecord>,
    pub snapshots: Vec<ProfileSnapshot>,
    pub malformed: u64,
    pub out_of_window: u64,
    /// First few `(line number, message)` pairs for diagnostics.
    pub error_samples: Vec<(usize, String)>,
}

const ERROR_SAMPLE_LIMIT: usize = 20;

impl ArchiveScan {
    pub fn lines_read(&self) -> u64 {
        self.records.len() as u64 + self.malformed + self.out_of_window
    }

    pub fn extend(&mut self, other: ArchiveScan) {
        self.records.extend(other.records);
        self.snapshots.extend(other.snapshots);
        self.malformed += other.malformed;
        self.out_of_window += other.out_of_window;
        let room = ERROR_SAMPLE_LIMIT.saturating_sub(self.error_samples.len());
        self.error_samples.extend(other.error_samples.into_iter().take(room));
    }
}

/// Parse an in-memory archive body. Blank lines are skipped without being
/// counted.
pub fn scan_str(body: &str, schema: &SchemaConfig, exec: Exec) -> ArchiveScan {
    let lines: Vec<(usize, &str)> = body.lines().enumerate().map(|(i, l)| (i + 1, l)).collect();
    scan_lines(&lines, schema, exec)
}

/// `lines` carries 1-based line numbers.
fn scan_lines(lines: &[(usize, &str)], schema: &SchemaConfig, exec: Exec) -> ArchiveScan {
    let lines: Vec<&(usize, &str)> = lines.iter().filter(|(_, l)| !l.trim().is_empty()).collect();
    let parsed = par::map(exec, &lines, |(_, l)| parse_tweet_line(l, schema));
    let mut scan = ArchiveScan::default();
    scan.records.reserve(parsed.len());
    for ((lineno, _), res) in lines.iter().zip(parsed) {
        match res {
            Ok(p) => {
                scan.records.push(p.record);
                scan.snapshots.extend(p.snapshot);
            }
            Err(e) => {
                match e {
                    ParseError::MalformedRecord(_) => scan.malformed += 1,
                    ParseError::OutOfWindow(_) => scan.out_of_window += 1,
                }
                if scan.error_samples.len() < ERROR_SAMPLE_LIMIT {
                    scan.error_samples.push((*lineno, e.to_string()));
                }
            }
        }
    }
    scan
}

const BATCH_LINES: usize = 1 << 16;

/// Read a newline-delimited JSON archive; files ending in `.gz` are
/// decompressed. Lines are parsed in batches so only one batch of raw text
/// is held at a time.
pub fn read_archive(path: &Path, schema: &SchemaConfig, exec: Exec) -> Result<ArchiveScan, IngestError> {
    let file = std::fs::File::open(path).map_err(|e| IngestError::io(path, e))?;
    let gz = path.extension().is_some_and(|e| e == "gz");
    let reader: Box<dyn BufRead> = if gz {
        Box::new(BufReader::new(flate2::read::MultiGzDecoder::new(file)))
    } else {
        Box::new(BufReader::new(file))
    };
    let mut scan = ArchiveScan::default();
    let mut batch: Vec<(usize, String)> = Vec::with_capacity(BATCH_LINES);
    let flush = |batch: &mut Vec<(usize, String)>, scan: &mut ArchiveScan| {
        let refs: Vec<(usize, &str)> = batch.iter().map(|(i, l)| (*i, l.as_str())).collect();
        scan.extend(scan_lines(&refs, schema, exec));
        batch.clear();
    };
    for (i, line) in reader.split(b'\n').enumerate() {
        let mut line = line.map_err(|e| IngestError::io(path, e))?;
        if line.last() == Some(&b'\r') {
            line.pop();
        }
        match String::from_utf8(line) {
            Ok(l) => batch.push((i + 1, l)),
            Err(_) => {
                scan.malformed += 1;
                if scan.error_samples.len() < ERROR_SAMPLE_LIMIT {
                    scan.error_samples.push((i + 1, malformed("invalid UTF-8").to_string()));
                }
            }
        }
        if batch.len() == BATCH_LINES {
            flush(&mut batch, &mut scan);
        }
    }
    flush(&mut batch, &mut scan);
    Ok(scan)
}
