mod common;

use std::collections::BTreeMap;

use proptest::prelude::*;
use rand::seq::SliceRandom;
use rand::Rng;

use common::*;
use socialscope::botmeter::BotLabel;
use socialscope::diffusion::*;
use socialscope::ingest::{TweetKind, TweetRecord};

/// `P(X >= v)` by counting, for every distinct value.
fn ccdf_oracle(xs: &[f64]) -> Vec<(f64, f64)> {
    let mut distinct: Vec<f64> = xs.to_vec();
    distinct.sort_by(|a, b| a.partial_cmp(b).unwrap());
    distinct.dedup();
    distinct.iter().map(|&v| (v, xs.iter().filter(|&&x| x >= v).count() as f64 / xs.len() as f64)).collect()
}

#[test]
fn ccdf_examples() {
    assert_eq!(ccdf(&[1.0, 1.0, 2.0, 3.0]).unwrap().points, [(1.0, 1.0), (2.0, 0.5), (3.0, 0.25)]);
    assert_eq!(ccdf(&[4.0; 3]).unwrap().points, [(4.0, 1.0)]);
    assert!(matches!(ccdf(&[]), Err(DiffusionError::EmptyInput)));
}

#[test]
fn ccdf_random_1k_matches_counting() {
    let mut r = rng(31);
    let xs: Vec<f64> = (0..1000).map(|_| r.gen_range(0..200) as f64).collect();
    assert_eq!(ccdf(&xs).unwrap().points, ccdf_oracle(&xs));
}

fn edge(id: usize, from: &str, to: &str, kind: TweetKind) -> TweetRecord {
    TweetRecord {
        tweet_id: format!("e{id}"),
        author_id: from.into(),
        created_at: T0,
        text: String::new(),
        hashtags: vec![],
        kind,
        target_author_id: Some(to.into()),
        target_tweet_id: None,
        retweet_count: None,
        has_geo: false,
    }
}

fn groups(pairs: &[(&str, Group)]) -> BTreeMap<String, Group> {
    pairs.iter().map(|(u, g)| (u.to_string(), *g)).collect()
}

#[test]
fn all_bot_interactions() {
    let recs: Vec<_> = (0..5).map(|i| edge(i, ["b1", "b2"][i % 2], ["b2", "b1"][i % 2], TweetKind::Reply)).collect();
    let g = groups(&[("b1", Group::Bot), ("b2", Group::Bot)]);
    let m = interaction_matrix(&recs, |u| g.get(u).copied());
    let c = interaction_ccdfs(&m);
    assert!(c[&(InteractionKind::Reply, Group::Human, Scope::Total)].is_none());
    assert_eq!(
        c[&(InteractionKind::Reply, Group::Bot, Scope::Within)],
        c[&(InteractionKind::Reply, Group::Bot, Scope::Total)]
    );
}

#[test]
fn six_user_reply_fixture() {
    use Group::*;
    let g = groups(&[("b1", Bot), ("b2", Bot), ("h1", Human), ("h2", Human), ("h3", Human), ("h4", Human)]);
    let replies = [
        ("h1", "h2"),
        ("h1", "h3"),
        ("h1", "b1"),
        ("h2", "h1"),
        ("h2", "h1"),
        ("h3", "b2"),
        ("b1", "b2"),
        ("b1", "h4"),
        ("b2", "b1"),
        ("h1", "x9"),
    ];
    let mut recs: Vec<TweetRecord> =
        replies.iter().enumerate().map(|(i, (a, b))| edge(i, a, b, TweetKind::Reply)).collect();
    recs.push(edge(99, "h4", "b1", TweetKind::Retweet));
    let m = interaction_matrix(&recs, |u| g.get(u).copied());
    // enumerated by hand: user -> (within, across)
    let want = [("b1", 1, 1), ("b2", 1, 0), ("h1", 2, 1), ("h2", 2, 0), ("h3", 0, 1)];
    for (u, w, a) in want {
        let (_, c) = m.per_user[&(InteractionKind::Reply, u.to_string())];
        assert_eq!((c.within, c.across), (w, a), "{u}");
        assert_eq!(c.get(Scope::Total), w + a);
    }
    assert_eq!(m.unlabeled, 1);
    assert_eq!(m.count(InteractionKind::Reply, Human, Human), 4);
    assert_eq!(m.count(InteractionKind::Reply, Human, Bot), 2);
    assert_eq!(m.count(InteractionKind::Reply, Bot, Bot), 2);
    assert_eq!(m.count(InteractionKind::Reply, Bot, Human), 1);
    assert_eq!(m.count(InteractionKind::Retweet, Human, Bot), 1);
    let mut human_total = m.user_counts(InteractionKind::Reply, Human, Scope::Total);
    human_total.sort_by(|a, b| a.partial_cmp(b).unwrap());
    assert_eq!(human_total, [1.0, 2.0, 3.0]);
}

fn counts(pairs: &[(&str, u64)]) -> BTreeMap<String, u64> {
    pairs.iter().map(|(t, c)| (t.to_string(), *c)).collect()
}

#[test]
fn faction_examples() {
    let tags = FactionTags::default();
    let f = assign_faction(
        &counts(&[("trump", 9), ("maga", 8), ("trump2016", 5), ("donaldtrump", 3), ("hillary", 2)]),
        &tags,
    );
    assert_eq!((f.faction, f.trump_tags, f.clinton_tags), (FactionName::Trump, 3, 1));
    assert_eq!(assign_faction(&counts(&[("vote", 4)]), &tags).faction, FactionName::None);
    assert_eq!(assign_faction(&counts(&[("trump", 1), ("hillary", 1)]), &tags).faction, FactionName::None);
    assert!(FactionTags::new(["a", "b"], ["#B"]).is_err());
}

#[test]
fn top_ten_cut_tie_takes_smallest_tags() {
    let mut c: Vec<(String, u64)> = (0..9).map(|i| (format!("filler{i}"), 10)).collect();
    c.push(("trump".into(), 1));
    c.push(("hillary".into(), 1));
    let c: BTreeMap<String, u64> = c.into_iter().collect();
    let f = assign_faction(&c, &FactionTags::default());
    assert_eq!(f.top_tags.len(), 10);
    assert_eq!(f.faction, FactionName::Clinton);
}

#[test]
fn symmetric_volumes_have_zero_difference() {
    let mut rows = Vec::new();
    for s in -4..=4 {
        for (c, t) in [(true, false), (false, true), (true, true)] {
            rows.push(VolumeRow {
                faction: FactionName::Trump,
                group: Group::Bot,
                s,
                mentions_clinton: c,
                mentions_trump: t,
            });
        }
    }
    let t = sentiment_volume_by_group(&rows);
    assert!(t.differences().iter().all(|d| d.abs_diff == 0));
}

#[test]
fn volumes_match_group_by() {
    let mut r = rng(41);
    let factions = [FactionName::Clinton, FactionName::Trump, FactionName::None];
    let rows: Vec<VolumeRow> = (0..3000)
        .map(|_| VolumeRow {
            faction: *factions.choose(&mut r).unwrap(),
            group: if r.gen_bool(0.3) { Group::Bot } else { Group::Human },
            s: r.gen_range(-4..=4),
            mentions_clinton: r.gen_bool(0.5),
            mentions_trump: r.gen_bool(0.5),
        })
        .collect();
    let t = sentiment_volume_by_group(&rows);
    for f in factions {
        for g in [Group::Bot, Group::Human] {
            for s in -4..=4i8 {
                let sel = |want: fn(&VolumeRow) -> bool| {
                    rows.iter().filter(|x| x.faction == f && x.group == g && x.s == s && want(x)).count() as u64
                };
                let (c, tr) = (sel(|x| x.mentions_clinton), sel(|x| x.mentions_trump));
                assert_eq!(t.get(f, g, Candidate::Clinton, s), c);
                assert_eq!(t.get(f, g, Candidate::Trump, s), tr);
                let d = t.differences().into_iter().find(|d| d.faction == f && d.group == g && d.s == s).unwrap();
                assert_eq!(d.abs_diff, c.abs_diff(tr));
            }
        }
    }
}

#[test]
fn candidate_terms_match_hashtags_and_words() {
    let t = CandidateTerms::default();
    assert_eq!(t.mentions("Crooked Hillary again", &[]), (true, false));
    assert_eq!(t.mentions("nothing", &["maga".into()]), (false, true));
    assert_eq!(t.mentions("trumpet solo", &[]), (false, false));
}

#[test]
fn conditioned_means_by_hand() {
    let obs = [
        ConditionedObs { s: 2, retweets: 0, value: 10.0 },
        ConditionedObs { s: 2, retweets: 1, value: 20.0 },
        ConditionedObs { s: 2, retweets: 1, value: 60.0 },
        ConditionedObs { s: 2, retweets: 5, value: 7.0 },
        ConditionedObs { s: -4, retweets: 0, value: 99.0 },
        ConditionedObs { s: 4, retweets: 9, value: 99.0 },
    ];
    let m = sentiment_conditioned_means(&obs);
    let low = m.table(RetweetSplit::AtMostOnce);
    assert_eq!(low.len(), 7);
    let b = low.iter().find(|b| b.s == 2).unwrap();
    // mean 30; sample sd = sqrt(((-20)^2 + (-10)^2 + 30^2) / 2) = sqrt(700)
    assert_eq!((b.n, b.mean), (3, Some(30.0)));
    assert!((b.stderr.unwrap() - (700f64).sqrt() / 3f64.sqrt()).abs() < 1e-12);
    let high = m.table(RetweetSplit::MoreThanOnce);
    let one = high.iter().find(|b| b.s == 2).unwrap();
    assert_eq!((one.n, one.mean, one.stderr), (1, Some(7.0), Some(0.0)));
    assert!(low.iter().chain(&high).filter(|b| b.s != 2).all(|b| b.n == 0 && b.mean.is_none()));
}

#[test]
fn extrapolation_all_human_sample() {
    let activity: Vec<(String, u64)> = (0..50).map(|i| (format!("u{i}"), 1 + i as u64)).collect();
    let sample: BTreeMap<String, BotLabel> = activity[40..].iter().map(|(u, _)| (u.clone(), BotLabel::Human)).collect();
    let e = extrapolate_population(&sample, &activity, 10, StrataScheme::LogActivity).unwrap();
    assert_eq!((e.bot_count, e.bot_fraction, e.bot_tweet_volume, e.volume_fraction), (0.0, 0.0, 0.0, 0.0));
}

#[test]
fn extrapolation_single_stratum_is_sample_proportion() {
    let mut r = rng(7);
    for _ in 0..20 {
        let n = r.gen_range(10..500);
        let activity: Vec<(String, u64)> = (0..n).map(|i| (format!("u{i}"), r.gen_range(1..1000))).collect();
        let mut sample = BTreeMap::new();
        for (u, _) in &activity {
            if r.gen_bool(0.3) {
                sample.insert(u.clone(), if r.gen_bool(0.2) { BotLabel::Bot } else { BotLabel::Human });
            }
        }
        if sample.is_empty() {
            continue;
        }
        let bots = sample.values().filter(|l| **l == BotLabel::Bot).count();
        let e = extrapolate_population(&sample, &activity, 1, StrataScheme::LogActivity).unwrap();
        assert_eq!(e.bot_fraction, bots as f64 / sample.len() as f64);
    }
}

#[test]
fn extrapolation_errors() {
    let activity = vec![("a".to_string(), 3)];
    assert!(matches!(
        extrapolate_population(&BTreeMap::new(), &activity, 10, StrataScheme::Quantile),
        Err(DiffusionError::InsufficientStrata)
    ));
    assert!(matches!(
        extrapolate_population(&BTreeMap::new(), &[], 10, StrataScheme::Quantile),
        Err(DiffusionError::EmptyInput)
    ));
}

#[test]
fn planted_fifteen_percent_recovered() {
    let pop = Population::planted(2016, 200_000, 0.145, 0.6, 100);
    let truth = pop.bot_fraction();
    assert!((truth - 0.15).abs() < 0.005, "planted fraction {truth}");
    let e = extrapolate_population(&pop.top_sample(0.02), &pop.activity, 10, StrataScheme::LogActivity).unwrap();
    assert!((e.bot_fraction - truth).abs() <= 0.02, "estimate {} vs truth {truth}", e.bot_fraction);
    assert!(e.lower_bound);
}

proptest! {
    #[test]
    fn ccdf_matches_counting_and_is_monotone(xs in proptest::collection::vec(0u32..50, 1..300)) {
        let xs: Vec<f64> = xs.into_iter().map(f64::from).collect();
        let c = ccdf(&xs).unwrap();
        prop_assert_eq!(&c.points, &ccdf_oracle(&xs));
        prop_assert_eq!(c.points[0].1, 1.0);
        for w in c.points.windows(2) {
            prop_assert!(w[0].0 < w[1].0 && w[0].1 >= w[1].1 && w[1].1 > 0.0);
        }
    }

    #[test]
    fn faction_order_and_tail_invariance(
        tags in proptest::collection::btree_map("(trump|hillary|maga|imwithher|vote|debate|t[0-9])", 1u64..50, 1..14),
        seed in any::<u64>(),
    ) {
        let ft = FactionTags::default();
        let base = assign_faction(&tags, &ft);
        let mut pairs: Vec<(String, u64)> = tags.clone().into_iter().collect();
        pairs.shuffle(&mut rng(seed));
        let reordered: BTreeMap<String, u64> = pairs.into_iter().collect();
        prop_assert_eq!(&assign_faction(&reordered, &ft), &base);
        // raising counts outside the top ten, but not past the cut, changes nothing
        let cut_count = base.top_tags.last().map(|t| tags[t]).unwrap_or(0);
        let mut tail = tags.clone();
        for (t, c) in tail.iter_mut() {
            if !base.top_tags.contains(t) && *c + 1 < cut_count {
                *c += 1;
            }
        }
        prop_assert_eq!(assign_faction(&tail, &ft).faction, base.faction);
    }

    #[test]
    fn conditioned_means_merge(
        a in proptest::collection::vec((-4i8..=4, 0u64..4, 0.0f64..1e4), 0..60),
        b in proptest::collection::vec((-4i8..=4, 0u64..4, 0.0f64..1e4), 0..60),
    ) {
        let to_obs = |v: &[(i8, u64, f64)]| v.iter().map(|&(s, retweets, value)| ConditionedObs { s, retweets, value }).collect::<Vec<_>>();
        let (oa, ob) = (to_obs(&a), to_obs(&b));
        let merged = sentiment_conditioned_means(&oa).merge(sentiment_conditioned_means(&ob));
        let all: Vec<ConditionedObs> = oa.iter().chain(&ob).copied().collect();
        let whole = sentiment_conditioned_means(&all);
        for split in [RetweetSplit::AtMostOnce, RetweetSplit::MoreThanOnce] {
            let (ta, tb) = (sentiment_conditioned_means(&oa).table(split), sentiment_conditioned_means(&ob).table(split));
            for ((m, w), (x, y)) in merged.table(split).iter().zip(whole.table(split)).zip(ta.iter().zip(&tb)) {
                prop_assert_eq!(m.n, w.n);
                prop_assert_eq!(m.n, x.n + y.n);
                if m.n > 0 {
                    let weighted = (x.mean.unwrap_or(0.0) * x.n as f64 + y.mean.unwrap_or(0.0) * y.n as f64) / m.n as f64;
                    prop_assert!((m.mean.unwrap() - weighted).abs() <= 1e-9 * weighted.abs().max(1.0));
                    prop_assert!((m.stderr.unwrap() - w.stderr.unwrap()).abs() <= 1e-6 * w.stderr.unwrap().max(1.0));
                }
            }
        }
    }
}
