mod common;

use proptest::prelude::*;
use rand::Rng;

use common::*;
use socialscope::botmeter::*;
use socialscope::ingest::{AggregateMap, Latest, MinMax, UserAggregate};

fn agg(tweets: u64, retweets_made: u64, days: i64) -> UserAggregate {
    let mut a = UserAggregate::empty("a");
    a.tweets_posted = tweets;
    a.retweets_made = retweets_made;
    a.followers = Some(MinMax::point(0));
    a.friends = Some(MinMax::point(0));
    a.account_created_at = Some(T0);
    a.first_seen = Some(T0);
    a.last_seen = Some(T0 + days * DAY);
    a.screen_name = Some(Latest { observed_at: T0, value: "ab".into() });
    a
}

#[test]
fn feature_definitions() {
    let f = extract_features(&agg(100, 80, 10), 1.0).unwrap();
    assert_eq!(f.retweet_ratio, 0.8);
    assert_eq!(f.follower_friend_ratio, 1.0);
    assert_eq!(f.account_age_days, 10.0);
    assert_eq!(f.geo_absence, 1.0);
    assert_eq!(extract_features(&agg(1000, 0, 10), 1.0).unwrap().tweets_per_day, 100.0);
    assert!(matches!(extract_features(&agg(0, 0, 10), 1.0), Err(BotError::InsufficientData { .. })));
}

#[test]
fn username_entropy() {
    assert_eq!(username_randomness("aaaaaa").unwrap(), 0.0);
    assert_eq!(username_randomness("ab").unwrap(), 1.0);
    // eight distinct symbols, p = 1/8 each: 8 * (1/8) * 3 bits
    assert_eq!(username_randomness("x7kq92ab").unwrap(), 3.0);
    assert!(matches!(username_randomness(""), Err(BotError::EmptyName)));
}

fn model(weights: Vec<f64>, bias: f64) -> LogisticModel {
    let d = weights.len();
    LogisticModel {
        feature_names: (0..d).map(|i| format!("f{i}")).collect(),
        weights,
        bias,
        normalization: vec![Normalization { mean: 0.0, stddev: 1.0 }; d],
    }
}

#[test]
fn zero_model_is_half_and_scaling_is_monotone() {
    assert_eq!(model(vec![0.0; 3], 0.0).score(&[5.0, -2.0, 9.0]).unwrap(), 0.5);
    let x = [1.0, 0.5];
    let mut prev = 0.5;
    for k in 1..40 {
        let s = model(vec![0.3 * k as f64, 0.1 * k as f64], 0.0).score(&x).unwrap();
        assert!(s >= prev && s <= 1.0);
        prev = s;
    }
    assert!(prev > 0.999_99);
    assert!(matches!(model(vec![1.0; 2], 0.0).score(&[1.0]), Err(BotError::ModelMismatch { .. })));
}

#[test]
fn classify_examples() {
    assert_eq!(classify(0.73, 0.5, 0.05), BotLabel::Bot);
    assert_eq!(classify(0.52, 0.5, 0.05), BotLabel::Undecided);
    assert_eq!(classify(0.30, 0.5, 0.05), BotLabel::Human);
}

fn names(d: usize) -> Vec<String> {
    (0..d).map(|i| format!("f{i}")).collect()
}

#[test]
fn separable_set_reaches_full_accuracy() {
    let (xs, ys) = separable(1);
    let params = TrainParams { epochs: 5000, ..TrainParams::default() };
    let (m, rep) = train(&xs, &ys, &names(2), &params).unwrap();
    let correct = xs.iter().zip(&ys).filter(|(x, y)| (m.score(x).unwrap() > 0.5) == **y).count();
    assert_eq!(correct, 20);
    assert_eq!(rep.loss_history.len(), 5001);
}

#[test]
fn held_out_score_matches_hand_arithmetic() {
    let (xs, ys) = separable(2);
    let (m, _) = train(&xs, &ys, &names(2), &TrainParams { epochs: 300, ..TrainParams::default() }).unwrap();
    let x = [0.7, -0.2];
    let mut z = m.bias;
    for ((w, n), xj) in m.weights.iter().zip(&m.normalization).zip(x) {
        z += w * (xj - n.mean) / n.stddev;
    }
    let want = 1.0 / (1.0 + (-z).exp());
    assert!((m.score(&x).unwrap() - want).abs() < 1e-15);
}

#[test]
fn degenerate_labels_rejected() {
    let xs = vec![vec![1.0], vec![2.0], vec![3.0]];
    assert!(matches!(train(&xs, &[true; 3], &names(1), &TrainParams::default()), Err(BotError::DegenerateData)));
    assert!(matches!(train(&xs[..1], &[true], &names(1), &TrainParams::default()), Err(BotError::DegenerateData)));
}

#[test]
fn loss_non_increasing_below_step_bound() {
    let (xs, ys) = separable(4);
    let probe = TrainParams { epochs: 0, ..TrainParams::default() };
    let (m0, _) = train(&xs, &ys, &names(2), &probe).unwrap();
    let norm: Vec<Vec<f64>> = xs.iter().map(|x| m0.normalize(x).unwrap()).collect();
    let l2 = 1e-3;
    let lr = 0.99 * stable_step_bound(&norm, l2);
    let (_, rep) =
        train(&xs, &ys, &names(2), &TrainParams { learning_rate: lr, epochs: 500, l2, ..TrainParams::default() })
            .unwrap();
    for w in rep.loss_history.windows(2) {
        assert!(w[1] <= w[0] + 1e-15, "{} -> {}", w[0], w[1]);
    }
}

#[test]
fn training_is_seed_deterministic() {
    let (xs, ys) = separable(6);
    let p = TrainParams { epochs: 200, seed: 9, ..TrainParams::default() };
    assert_eq!(train(&xs, &ys, &names(2), &p).unwrap().0, train(&xs, &ys, &names(2), &p).unwrap().0);
}

#[test]
fn gradient_matches_finite_differences() {
    for seed in 0..50 {
        let e = gradient_check(seed);
        assert!(e < 1e-5, "seed {seed}: relative error {e}");
    }
}

fn population(counts: &[(&str, u64)]) -> AggregateMap {
    counts
        .iter()
        .map(|(id, n)| {
            let mut a = UserAggregate::empty(*id);
            a.tweets_posted = *n;
            (id.to_string(), a)
        })
        .collect()
}

#[test]
fn top_k_examples() {
    let m = population(&[("d", 5), ("c", 3), ("b", 3), ("a", 1)]);
    let ids = |k| rank_and_sample_top_k(&m, k).iter().map(|a| a.author_id.clone()).collect::<Vec<_>>();
    assert_eq!(ids(2), ["d", "b"]);
    assert_eq!(ids(10), ["d", "b", "c", "a"]);
}

#[test]
fn top_k_matches_sort_oracle() {
    let mut r = rng(8);
    let owned: Vec<(String, u64)> = (0..10_000).map(|i| (format!("u{i:05}"), r.gen_range(1..200))).collect();
    let refs: Vec<(&str, u64)> = owned.iter().map(|(a, n)| (a.as_str(), *n)).collect();
    let m = population(&refs);
    let mut oracle = owned.clone();
    oracle.sort_by_key(|(id, n)| (std::cmp::Reverse(*n), id.clone()));
    for k in [1, 50, 777, 10_000, 20_000] {
        let got: Vec<&str> = rank_and_sample_top_k(&m, k).iter().map(|a| a.author_id.as_str()).collect();
        let want: Vec<&str> = oracle.iter().take(k).map(|(id, _)| id.as_str()).collect();
        assert_eq!(got, want);
    }
}

proptest! {
    #[test]
    fn score_in_open_unit_interval(
        w in proptest::collection::vec(-5.0f64..5.0, 3),
        b in -5.0f64..5.0,
        x in proptest::collection::vec(-5.0f64..5.0, 3),
    ) {
        let s = model(w, b).score(&x).unwrap();
        prop_assert!(s > 0.0 && s < 1.0);
    }

    #[test]
    fn classify_partitions_unit_interval(s in 0.0f64..=1.0, t in 0.2f64..0.8, band in 0.0f64..0.2) {
        let l = classify(s, t, band);
        let expect = if s > t + band { BotLabel::Bot } else if s < t - band { BotLabel::Human } else { BotLabel::Undecided };
        prop_assert_eq!(l, expect);
    }
}
