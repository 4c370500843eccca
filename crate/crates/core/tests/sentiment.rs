mod common;

use proptest::prelude::*;
use rand::seq::SliceRandom;
use rand::Rng;

use common::*;
use socialscope::par::Exec;
use socialscope::sentiment::*;

const LEXICON_SRC: &str = include_str!("../data/lexicon.tsv");

fn sc(pos: u8, neg: u8) -> SentimentScore {
    SentimentScore { pos, neg, s: pos as i8 - neg as i8 }
}

#[test]
fn micro_lexicon_cases() {
    let lex = micro_lexicon();
    assert_eq!(score_tweet("really good", &lex), sc(4, 1));
    assert_eq!(score_tweet("not good", &lex), sc(1, 3));
    assert_eq!(score_tweet("", &lex), sc(1, 1));
}

#[test]
fn range_extremes() {
    let lex = SentimentLexicon::from_tsv("superb\t4\nvile\t-4\n").unwrap();
    assert_eq!(score_tweet("superb", &lex), sc(5, 1));
    assert_eq!(score_tweet("vile", &lex), sc(1, 5));
}

#[test]
fn classify_examples() {
    assert_eq!(classify(0), Ok(Polarity::Neutral));
    assert_eq!(classify(-4), Ok(Polarity::Negative));
    assert_eq!(classify(1), Ok(Polarity::Positive));
    assert_eq!(classify(5), Err(RangeError(5)));
    assert_eq!(classify(-5), Err(RangeError(-5)));
}

#[test]
fn histogram_trivial() {
    let empty = sentiment_histogram(std::iter::empty());
    assert!(empty.counts.iter().all(|&c| c == 0));
    let h = sentiment_histogram(std::iter::repeat_n(SentimentScore::NEUTRAL, 10));
    assert_eq!(h.count(0), 10);
    assert_eq!(h.total(), 10);
}

const MICRO_VOCAB: [&str; 6] = ["good", "really", "not", "the", "vote", "rally"];

/// Hand transcription of the documented rules for the micro lexicon, over
/// whitespace-separated lowercase words.
fn micro_oracle(words: &[&str]) -> (u8, u8) {
    let n = words.len();
    let (mut pos, mut neg) = (0i32, 0i32);
    for j in 0..n {
        if words[j] != "good" {
            continue;
        }
        // a negator at i flips the first "good" among tokens i+1, i+2
        let mut flips = 0;
        for i in j.saturating_sub(2)..j {
            if words[i] == "not" && !words[i + 1..j].contains(&"good") {
                flips += 1;
            }
        }
        let mut mag = 2;
        if j > 0 && words[j - 1] == "really" {
            mag = (mag + 1).min(4);
        }
        if flips % 2 == 1 {
            neg = neg.max(mag);
        } else {
            pos = pos.max(mag);
        }
    }
    (1 + pos.min(4) as u8, 1 + neg.min(4) as u8)
}

#[test]
fn histogram_matches_per_tweet_oracle() {
    let lex = micro_lexicon();
    let mut r = rng(5);
    let texts: Vec<String> = (0..1000)
        .map(|_| {
            let len = r.gen_range(0..8);
            (0..len).map(|_| *MICRO_VOCAB.choose(&mut r).unwrap()).collect::<Vec<_>>().join(" ")
        })
        .collect();
    let mut oracle = [0u64; 9];
    for t in &texts {
        let words: Vec<&str> = t.split_whitespace().collect();
        let (p, n) = micro_oracle(&words);
        oracle[(p as i32 - n as i32 + 4) as usize] += 1;
    }
    let refs: Vec<&str> = texts.iter().map(String::as_str).collect();
    let h = sentiment_histogram(score_all(&refs, &lex, Exec::Parallel));
    assert_eq!(h.counts, oracle);
    assert_eq!(h.total(), 1000);
}

fn lexicon_words() -> Vec<String> {
    LEXICON_SRC
        .lines()
        .filter(|l| !l.starts_with(';') && !l.trim().is_empty())
        .filter_map(|l| l.split('\t').next())
        .map(|w| w.trim_end_matches('*').to_string())
        .collect()
}

fn token_seq() -> impl Strategy<Value = String> {
    let words = lexicon_words();
    let tok = prop_oneof![
        4 => proptest::sample::select(words),
        1 => "[a-zA-Z':;()!#]{1,8}",
        1 => Just("loooove".to_string()),
    ];
    proptest::collection::vec(tok, 0..25).prop_map(|v| v.join(" "))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(2000))]

    #[test]
    fn score_contract(text in token_seq()) {
        let lex = SentimentLexicon::default_lexicon();
        let s = score_tweet(&text, &lex);
        prop_assert!((1..=5).contains(&s.pos) && (1..=5).contains(&s.neg));
        prop_assert_eq!(s.s, s.pos as i8 - s.neg as i8);
        prop_assert!(classify(s.s as i32).is_ok());
    }

    #[test]
    fn micro_matches_oracle(words in proptest::collection::vec(proptest::sample::select(MICRO_VOCAB.to_vec()), 0..12)) {
        let (p, n) = micro_oracle(&words);
        prop_assert_eq!(score_tweet(&words.join(" "), &micro_lexicon()), sc(p, n));
    }

    #[test]
    fn appending_positive_term(text in token_seq()) {
        let lex = SentimentLexicon::default_lexicon();
        let before = score_tweet(&text, &lex);
        // two neutral fillers keep any trailing negator out of range
        let after = score_tweet(&format!("{text} zzq zzq good"), &lex);
        prop_assert!(after.pos >= before.pos);
        prop_assert_eq!(after.neg, before.neg);
    }

    #[test]
    fn no_hits_is_neutral(words in proptest::collection::vec("zz[0-9]{1,4}", 0..20)) {
        prop_assert_eq!(score_tweet(&words.join(" "), &SentimentLexicon::default_lexicon()), SentimentScore::NEUTRAL);
    }
}
