//! Mapping from archive JSON field paths to tweet fields.
//!
//! A schema file is a flat TOML table. `preset` selects a base mapping
//! (`flat` or `twitter_v1`); every other key overrides one field path.
//! Paths are dot-separated object keys, e.g. `user.followers_count`.
//! `window_start` / `window_end` bound accepted tweet timestamps (half-open,
//! epoch seconds or RFC 3339).

use std::path::Path;

use serde_json::Value;

use super::IngestError;

#[derive(Debug, Clone, PartialEq)]
pub struct SchemaConfig {
    pub tweet_id: String,
    pub author_id: String,
    pub created_at: String,
    pub text: String,
    pub hashtags: String,
    /// Explicit kind field ("original" / "retweet" / "reply"). When empty the
    /// kind is derived from `retweet_target` and `reply_target`.
    pub kind: String,
    pub target_author_id: String,
    pub target_tweet_id: String,
    pub retweet_target: String,
    pub retweet_target_tweet: String,
    pub reply_target: String,
    pub reply_target_tweet: String,
    pub retweet_count: String,
    pub has_geo: String,
    pub user_followers: String,
    pub user_friends: String,
    pub user_statuses: String,
    pub user_created_at: String,
    pub user_default_profile: String,
    pub user_screen_name: String,
    pub window_start: Option<i64>,
    pub window_end: Option<i64>,
}

impl Default for SchemaConfig {
    fn default() -> Self {
        Self::flat()
    }
}

impl SchemaConfig {
    /// The pre-flattened layout written by `socialscope synth`.
    pub fn flat() -> Self {
        SchemaConfig {
            tweet_id: "id".into(),
            author_id: "author_id".into(),
            created_at: "created_at".into(),
            text: "text".into(),
            hashtags: "hashtags".into(),
            kind: "kind".into(),
            target_author_id: "target_author_id".into(),
            target_tweet_id: "target_tweet_id".into(),
            retweet_target: String::new(),
            retweet_target_tweet: String::new(),
            reply_target: String::new(),
            reply_target_tweet: String::new(),
            retweet_count: "retweet_count".into(),
            has_geo: "has_geo".into(),
            user_followers: "user.followers".into(),
            user_friends: "user.friends".into(),
            user_statuses: "user.statuses".into(),
            user_created_at: "user.created_at".into(),
            user_default_profile: "user.default_profile".into(),
            user_screen_name: "user.screen_name".into(),
            window_start: None,
            window_end: None,
        }
    }

    /// Raw v1.1 REST/streaming API tweet objects.
    pub fn twitter_v1() -> Self {
        SchemaConfig {
            tweet_id: "id_str".into(),
            author_id: "user.id_str".into(),
            created_at: "created_at".into(),
            text: "text".into(),
            hashtags: "entities.hashtags".into(),
            kind: String::new(),
            target_author_id: String::new(),
            target_tweet_id: String::new(),
            retweet_target: "retweeted_status.user.id_str".into(),
            retweet_target_tweet: "retweeted_status.id_str".into(),
            reply_target: "in_reply_to_user_id_str".into(),
            reply_target_tweet: "in_reply_to_status_id_str".into(),
            retweet_count: "retweet_count".into(),
            has_geo: "coordinates".into(),
            user_followers: "user.followers_count".into(),
            user_friends: "user.friends_count".into(),
            user_statuses: "user.statuses_count".into(),
            user_created_at: "user.created_at".into(),
            user_default_profile: "user.default_profile".into(),
            user_screen_name: "user.screen_name".into(),
            window_start: None,
            window_end: None,
        }
    }

    pub fn from_toml_str(src: &str) -> Result<Self, IngestError> {
        let table: toml::Table = toml::from_str(src).map_err(|e| IngestError::Schema(e.to_string()))?;
        let mut cfg = match table.get("preset").and_then(|v| v.as_str()) {
            None | Some("flat") => SchemaConfig::flat(),
            Some("twitter_v1") => SchemaConfig::twitter_v1(),
            Some(other) => return Err(IngestError::Schema(format!("unknown preset `{other}`"))),
        };
        for (key, value) in &table {
            match key.as_str() {
                "preset" => {}
                "window_start" | "window_end" => {
                    let ts = match value {
                        toml::Value::Integer(i) => *i,
                        toml::Value::String(s) => parse_timestamp_str(s)
                            .ok_or_else(|| IngestError::Schema(format!("bad timestamp for {key}: {s}")))?,
                        toml::Value::Datetime(d) => parse_timestamp_str(&d.to_string())
                            .ok_or_else(|| IngestError::Schema(format!("bad timestamp for {key}")))?,
                        _ => return Err(IngestError::Schema(format!("{key} must be a timestamp"))),
                    };
                    if key == "window_start" {
                        cfg.window_start = Some(ts);
                    } else {
                        cfg.window_end = Some(ts);
                    }
                }
                _ => {
                    let path = value
                        .as_str()
                        .ok_or_else(|| IngestError::Schema(format!("{key} must be a string path")))?
                        .to_string();
                    *cfg.field_mut(key).ok_or_else(|| IngestError::Schema(format!("unknown schema key `{key}`")))? =
                        path;
                }
            }
        }
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self, IngestError> {
        let src = std::fs::read_to_string(path).map_err(|e| IngestError::io(path, e))?;
        Self::from_toml_str(&src)
    }

    fn field_mut(&mut self, key: &str) -> Option<&mut String> {
        Some(match key {
            "tweet_id" => &mut self.tweet_id,
            "author_id" => &mut self.author_id,
            "created_at" => &mut self.created_at,
            "text" => &mut self.text,
            "hashtags" => &mut self.hashtags,
            "kind" => &mut self.kind,
            "target_author_id" => &mut self.target_author_id,
            "target_tweet_id" => &mut self.target_tweet_id,
            "retweet_target" => &mut self.retweet_target,
            "retweet_target_tweet" => &mut self.retweet_target_tweet,
            "reply_target" => &mut self.reply_target,
            "reply_target_tweet" => &mut self.reply_target_tweet,
            "retweet_count" => &mut self.retweet_count,
            "has_geo" => &mut self.has_geo,
            "user_followers" => &mut self.user_followers,
            "user_friends" => &mut self.user_friends,
            "user_statuses" => &mut self.user_statuses,
            "user_created_at" => &mut self.user_created_at,
            "user_default_profile" => &mut self.user_default_profile,
            "user_screen_name" => &mut self.user_screen_name,
            _ => return None,
        })
    }

    pub(crate) fn in_window(&self, ts: i64) -> bool {
        self.window_start.is_none_or(|s| ts >= s) && self.window_end.is_none_or(|e| ts < e)
    }
}

/// Resolve a dotted path; missing keys and JSON `null` both yield `None`.
pub(crate) fn lookup<'a>(root: &'a Value, path: &str) -> Option<&'a Value> {
    if path.is_empty() {
        return None;
    }
    let mut cur = root;
    for key in path.split('.') {
        cur = cur.get(key)?;
    }
    if cur.is_null() {
        None
    } else {
        Some(cur)
    }
}

/// Epoch seconds from an integer, an integer string, RFC 3339, or the
/// `Wed Oct 10 20:19:24 +0000 2018` format used by the v1.1 API.
pub fn parse_timestamp(v: &Value) -> Option<i64> {
    match v {
        Value::Number(n) => n.as_i64().or_else(|| n.as_f64().map(|f| f as i64)),
        Value::String(s) => parse_timestamp_str(s),
        _ => None,
    }
}

pub fn parse_timestamp_str(s: &str) -> Option<i64> {
    let s = s.trim();
    if let Ok(i) = s.parse::<i64>() {
        return Some(i);
    }
    if let Ok(dt) = chrono::DateTime::parse_from_rfc3339(s) {
        return Some(dt.timestamp());
    }
    if let Ok(dt) = chrono::DateTime::parse_from_str(s, "%a %b %d %H:%M:%S %z %Y") {
        return Some(dt.timestamp());
    }
    None
}
