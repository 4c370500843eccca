//! Lexicon-based dual-polarity sentiment scoring.
//!
//! Each tweet gets a positive strength `pos` and a negative strength `neg`,
//! both in `1..=5` (1 = no sentiment), and a scalar `s = pos - neg` in
//! `-4..=4`.
//!
//! Scoring rules, applied in order:
//!
//! 1. tokenize: whitespace chunks are first matched against the emoticon
//!    table, otherwise split into lowercase word runs; a word not found in
//!    the lexicon is retried with letter runs of three or more collapsed to
//!    two, then to one (`loooove` -> `love`);
//! 2. negation: a negator flips the sign of the next sentiment token if it
//!    occurs within the following two tokens;
//! 3. boosting: a booster adds its delta to the magnitude of an immediately
//!    following sentiment token;
//! 4. each polarity takes the maximum magnitude over its tokens, clamped to
//!    `0..=4`, plus one.

mod lexicon;

use serde::{Deserialize, Serialize};

pub use lexicon::{LexiconError, SentimentLexicon};

use crate::par::{self, Exec};

pub const MIN_SCORE: i8 = -4;
pub const MAX_SCORE: i8 = 4;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct SentimentScore {
    pub pos: u8,
    pub neg: u8,
    pub s: i8,
}

impl SentimentScore {
    pub const NEUTRAL: SentimentScore = SentimentScore { pos: 1, neg: 1, s: 0 };

    fn from_strengths(pos_strength: u8, neg_strength: u8) -> Self {
        let pos = 1 + pos_strength.min(4);
        let neg = 1 + neg_strength.min(4);
        SentimentScore { pos, neg, s: pos as i8 - neg as i8 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Polarity {
    Negative,
    Neutral,
    Positive,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, thiserror::Error)]
#[error("sentiment score {0} outside [-4, 4]")]
pub struct RangeError(pub i32);

pub fn classify(s: i32) -> Result<Polarity, RangeError> {
    if !(MIN_SCORE as i32..=MAX_SCORE as i32).contains(&s) {
        return Err(RangeError(s));
    }
    Ok(match s.signum() {
        -1 => Polarity::Negative,
        0 => Polarity::Neutral,
        _ => Polarity::Positive,
    })
}

#[derive(Debug, Clone, Copy, PartialEq)]
enum Token {
    Negator,
    Booster(i8),
    Sentiment(i8),
    Other,
}

fn collapse_runs(word: &str, keep: usize) -> Option<String> {
    let chars: Vec<char> = word.chars().collect();
    let mut out = String::with_capacity(word.len());
    let mut changed = false;
    let mut i = 0;
    while i < chars.len() {
        let mut j = i;
        while j < chars.len() && chars[j] == chars[i] {
            j += 1;
        }
        let run = j - i;
        let n = if run >= 3 && chars[i].is_alphabetic() {
            changed = true;
            keep
        } else {
            run
        };
        out.extend(std::iter::repeat_n(chars[i], n));
        i = j;
    }
    changed.then_some(out)
}

fn classify_word(word: &str, lex: &SentimentLexicon) -> Token {
    let lookup = |w: &str| -> Option<Token> {
        if lex.is_negator(w) {
            Some(Token::Negator)
        } else if let Some(d) = lex.booster(w) {
            Some(Token::Booster(d))
        } else {
            lex.term(w).map(Token::Sentiment)
        }
    };
    if let Some(t) = lookup(word) {
        return t;
    }
    for keep in [2, 1] {
        if let Some(t) = collapse_runs(word, keep).and_then(|w| lookup(&w)) {
            return t;
        }
    }
    Token::Other
}

fn tokenize(text: &str, lex: &SentimentLexicon) -> Vec<Token> {
    let mut out = Vec::new();
    for chunk in text.split_whitespace() {
        if let Some(v) = lex.emoticon(chunk) {
            out.push(Token::Sentiment(v));
            continue;
        }
        let lower = chunk.to_lowercase();
        for word in lower
            .split(|c: char| !(c.is_alphanumeric() || c == '\''))
            .map(|w| w.trim_matches('\''))
            .filter(|w| !w.is_empty())
        {
            out.push(classify_word(word, lex));
        }
    }
    out
}

/// Score one text against a lexicon. Pure and deterministic.
pub fn score_tweet(text: &str, lex: &SentimentLexicon) -> SentimentScore {
    let mut tokens = tokenize(text, lex);
    let n = tokens.len();

    let mut flip = vec![false; n];
    for i in 0..n {
        if tokens[i] == Token::Negator {
            if let Some(j) = (i + 1..n.min(i + 3)).find(|&j| matches!(tokens[j], Token::Sentiment(_))) {
                flip[j] = !flip[j];
            }
        }
    }
    for (t, f) in tokens.iter_mut().zip(&flip) {
        if let (Token::Sentiment(v), true) = (&mut *t, f) {
            *v = -*v;
        }
    }

    for i in 0..n.saturating_sub(1) {
        if let (Token::Booster(d), Token::Sentiment(v)) = (tokens[i], tokens[i + 1]) {
            let mag = (v.unsigned_abs() as i16 + d as i16).clamp(0, 4) as i8;
            tokens[i + 1] = Token::Sentiment(mag * v.signum());
        }
    }

    let (mut pos, mut neg) = (0u8, 0u8);
    for t in &tokens {
        if let Token::Sentiment(v) = *t {
            if v > 0 {
                pos = pos.max(v as u8);
            } else if v < 0 {
                neg = neg.max(v.unsigned_abs());
            }
        }
    }
    SentimentScore::from_strengths(pos, neg)
}

pub fn score_all(texts: &[&str], lex: &SentimentLexicon, exec: Exec) -> Vec<SentimentScore> {
    par::map(exec, texts, |t| score_tweet(t, lex))
}

/// Tweet counts per sentiment value `-4..=4`.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct SentimentHistogram {
    pub counts: [u64; 9],
}

impl SentimentHistogram {
    pub fn add(&mut self, s: i8) {
        self.counts[(s - MIN_SCORE) as usize] += 1;
    }

    pub fn count(&self, s: i8) -> u64 {
        self.counts[(s - MIN_SCORE) as usize]
    }

    pub fn total(&self) -> u64 {
        self.counts.iter().sum()
    }

    /// `(s, count)` rows in ascending `s`.
    pub fn rows(&self) -> impl Iterator<Item = (i8, u64)> + '_ {
        (MIN_SCORE..=MAX_SCORE).map(|s| (s, self.count(s)))
    }
}

pub fn sentiment_histogram<I: IntoIterator<Item = SentimentScore>>(scores: I) -> SentimentHistogram {
    let mut h = SentimentHistogram::default();
    for sc in scores {
        h.add(sc.s);
    }
    h
}

#[cfg(test)]
mod tests {
    use super::*;

    fn micro() -> SentimentLexicon {
        SentimentLexicon::from_tsv("good\t2\nreally\t1\tbooster\nnot\t0\tnegator\nawful\t-3\nbest\t4\nworst\t-4\n")
            .unwrap()
    }

    fn sc(pos: u8, neg: u8) -> SentimentScore {
        SentimentScore { pos, neg, s: pos as i8 - neg as i8 }
    }

    #[test]
    fn empty_is_neutral() {
        assert_eq!(score_tweet("", &micro()), SentimentScore::NEUTRAL);
        assert_eq!(score_tweet("nothing to see here", &micro()), SentimentScore::NEUTRAL);
    }

    #[test]
    fn extremes() {
        assert_eq!(score_tweet("the best", &micro()), sc(5, 1));
        assert_eq!(score_tweet("the worst", &micro()), sc(1, 5));
    }

    #[test]
    fn booster_and_negation() {
        assert_eq!(score_tweet("really good", &micro()), sc(4, 1));
        assert_eq!(score_tweet("not good", &micro()), sc(1, 3));
        // negator window covers two tokens
        assert_eq!(score_tweet("not so good", &micro()), sc(1, 3));
        assert_eq!(score_tweet("not so very good", &micro()), sc(3, 1));
        // negation first, then boost magnitude
        assert_eq!(score_tweet("not really good", &micro()), sc(1, 4));
        assert_eq!(score_tweet("really really good", &micro()), sc(4, 1));
    }

    #[test]
    fn both_polarities() {
        assert_eq!(score_tweet("good but awful", &micro()), sc(3, 4));
    }

    #[test]
    fn repeated_letters_collapse() {
        let lex = SentimentLexicon::from_tsv("love\t3\ncool\t1\n").unwrap();
        assert_eq!(score_tweet("loooove it", &lex), sc(4, 1));
        assert_eq!(score_tweet("cooool", &lex), sc(2, 1));
        assert_eq!(score_tweet("LOVE!!!", &lex), sc(4, 1));
    }

    #[test]
    fn emoticons() {
        let lex = SentimentLexicon::from_tsv(":)\t1\temoticon\n:(\t-1\temoticon\n").unwrap();
        assert_eq!(score_tweet("ok :)", &lex), sc(2, 1));
        assert_eq!(score_tweet(":( :)", &lex), sc(2, 2));
    }

    #[test]
    fn classify_cases() {
        assert_eq!(classify(0), Ok(Polarity::Neutral));
        assert_eq!(classify(-4), Ok(Polarity::Negative));
        assert_eq!(classify(1), Ok(Polarity::Positive));
        assert_eq!(classify(5), Err(RangeError(5)));
        assert_eq!(classify(-5), Err(RangeError(-5)));
    }

    #[test]
    fn histogram_basics() {
        let h = sentiment_histogram(std::iter::empty());
        assert_eq!(h.total(), 0);
        let h = sentiment_histogram(std::iter::repeat_n(SentimentScore::NEUTRAL, 10));
        assert_eq!(h.count(0), 10);
        assert_eq!(h.total(), 10);
    }

    #[test]
    fn default_lexicon_loads() {
        let lex = SentimentLexicon::default_lexicon();
        assert!(score_tweet("I love this, great day", &lex).s > 0);
        assert!(score_tweet("this is terrible and I hate it", &lex).s < 0);
    }
}
