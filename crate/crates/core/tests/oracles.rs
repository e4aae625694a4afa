mod common;

use std::collections::{BTreeMap, BTreeSet};

use chrono::{TimeZone, Utc};
use common::{brute_harmonic, item};
use newsrep::eval::cross_gt_detect;
use newsrep::harmonic::{propagate, HarmonicConfig, LabelSeed};
use newsrep::ingest::{GroundTruth, Label};
use newsrep::lrmodel::{class_weights, fit, LrHyper, Problem, SparseVector};
use newsrep::sharegraph::{ShareGraph, UserNode};
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

#[test]
fn harmonic_matches_brute_force_on_random_graphs() {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let t = Utc.with_ymd_and_hms(2017, 9, 1, 0, 0, 0).unwrap();
    for round in 0..50 {
        let n_items = rng.gen_range(2..30);
        let n_users = rng.gen_range(1..20);
        let n_tweets = rng.gen_range(1..80);
        let mut g = ShareGraph::new();
        let mut edges = BTreeSet::new();
        for _ in 0..n_tweets {
            let i = format!("i{}", rng.gen_range(0..n_items));
            let u = format!("u{}", rng.gen_range(0..n_users));
            g.add_share(item(&i), UserNode::new(u.clone()), t).unwrap();
            edges.insert((i, u));
        }
        let mut ids: Vec<String> = g.items().iter().map(|i| i.item_id.clone()).collect();
        ids.shuffle(&mut rng);
        let n_fake = rng.gen_range(0..=ids.len() / 2);
        let n_rel = rng.gen_range(0..=ids.len() - n_fake);
        let seeds = LabelSeed {
            fake: ids[..n_fake].iter().cloned().collect(),
            reliable: ids[n_fake..n_fake + n_rel].iter().cloned().collect(),
        };
        let cfg = HarmonicConfig {
            c: [0.02, 0.5, 1e-3][round % 3],
            iterations: 1 + round % 6,
            ..HarmonicConfig::default()
        };
        let beliefs = propagate(&g, &seeds, &cfg).unwrap();
        let (items, users) = brute_harmonic(&edges, &seeds.fake, &seeds.reliable, cfg.c, cfg.iterations);
        for (id, want) in items {
            let got = beliefs.item_q(g.item_ix(&id).unwrap());
            assert!((got - want).abs() < 1e-12, "round {round} item {id}: {got} vs {want}");
        }
        for (id, want) in users {
            let got = beliefs.user_q(g.user_ix(&id).unwrap());
            assert!((got - want).abs() < 1e-12, "round {round} user {id}: {got} vs {want}");
        }
    }
}

/// Weighted objective written out by hand for one binary feature plus bias.
fn objective(rows: &[(bool, bool, f64)], w: f64, b: f64, lambda: f64) -> f64 {
    let mut f = 0.5 * lambda * w * w;
    for &(x, y, s) in rows {
        let z = if x { w + b } else { b };
        let p = 1.0 / (1.0 + (-z).exp());
        f -= s * if y { p.ln() } else { (1.0 - p).ln() };
    }
    f
}

fn grid_minimum(rows: &[(bool, bool, f64)], lambda: f64) -> (f64, f64) {
    let (mut cw, mut cb, mut span) = (0.0, 0.0, 8.0);
    while span > 1e-5 {
        let mut best = (f64::INFINITY, cw, cb);
        for a in -20..=20 {
            for c in -20..=20 {
                let (w, b) = (cw + span * a as f64 / 20.0, cb + span * c as f64 / 20.0);
                let f = objective(rows, w, b, lambda);
                if f < best.0 {
                    best = (f, w, b);
                }
            }
        }
        (cw, cb) = (best.1, best.2);
        span /= 4.0;
    }
    (cw, cb)
}

#[test]
fn class_weights_match_duplication_and_grid_search() {
    // 10 hoax, 20 nonhoax; the feature fires on 7 hoax and 5 nonhoax rows.
    let mut x = Vec::new();
    let mut labels = Vec::new();
    for k in 0..10 {
        x.push(k < 7);
        labels.push(Label::Hoax);
    }
    for k in 0..20 {
        x.push(k < 5);
        labels.push(Label::Nonhoax);
    }
    let cw = class_weights(&labels).unwrap();
    assert_eq!((cw.hoax, cw.nonhoax), (1.5, 0.75));

    let vec_of = |on: bool| SparseVector::from_columns(if on { vec![0] } else { vec![] });
    let examples: Vec<SparseVector> = x.iter().map(|&on| vec_of(on)).collect();
    let targets: Vec<bool> = labels.iter().map(|l| l.is_hoax()).collect();
    let weights: Vec<f64> = labels.iter().map(|&l| cw.of(l)).collect();
    let hyper = LrHyper {
        tolerance: 1e-10,
        ..LrHyper::default()
    };
    let weighted = fit(
        &Problem {
            examples: &examples,
            targets: &targets,
            weights: &weights,
            dimension: 1,
            l2_strength: 1.0,
        },
        &hyper,
    );

    // 1.5 : 0.75 is 0.75 × (2 : 1): every hoax row twice, λ rescaled by 1/0.75.
    let mut dup_x = Vec::new();
    let mut dup_y = Vec::new();
    for (&on, l) in x.iter().zip(&labels) {
        for _ in 0..if l.is_hoax() { 2 } else { 1 } {
            dup_x.push(vec_of(on));
            dup_y.push(l.is_hoax());
        }
    }
    let ones = vec![1.0; dup_x.len()];
    let duplicated = fit(
        &Problem {
            examples: &dup_x,
            targets: &dup_y,
            weights: &ones,
            dimension: 1,
            l2_strength: 1.0 / 0.75,
        },
        &hyper,
    );
    assert!((weighted.weights[0] - duplicated.weights[0]).abs() < 1e-6);
    assert!((weighted.bias - duplicated.bias).abs() < 1e-6);

    let rows: Vec<(bool, bool, f64)> = x.iter().zip(&targets).zip(&weights).map(|((&a, &b), &c)| (a, b, c)).collect();
    let (gw, gb) = grid_minimum(&rows, 1.0);
    assert!((weighted.weights[0] - gw).abs() < 1e-3, "{} vs {gw}", weighted.weights[0]);
    assert!((weighted.bias - gb).abs() < 1e-3, "{} vs {gb}", weighted.bias);

    // Unweighted, the minority class pulls less and the bias drops.
    let unweighted = fit(
        &Problem {
            examples: &examples,
            targets: &targets,
            weights: &vec![1.0; 30],
            dimension: 1,
            l2_strength: 1.0,
        },
        &hyper,
    );
    assert!(unweighted.bias < weighted.bias);
}

#[test]
fn cross_gt_matches_naive_recount() {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let pool: Vec<String> = (0..12).map(|k| format!("s{k}.com")).collect();
    for round in 0..40 {
        let train = GroundTruth::new("a", pool[..5].iter().cloned());
        let other = GroundTruth::new("b", pool[3..9].iter().cloned());
        let n = rng.gen_range(0..400);
        let sites: Vec<&str> = (0..n).map(|_| pool[rng.gen_range(0..pool.len())].as_str()).collect();
        let site_rate: BTreeMap<&str, f64> = pool.iter().map(|s| (s.as_str(), rng.gen::<f64>() * 0.2)).collect();
        let preds: Vec<Label> = sites.iter().map(|s| Label::from_hoax(rng.gen_bool(site_rate[s]))).collect();
        let threshold = [5.0, 2.0, 10.0][round % 3];
        let min_urls = [20, 5, 40][round % 3];
        let r = cross_gt_detect(&train, &other, &sites, &preds, threshold, min_urls);

        let mut per_site: BTreeMap<&str, (usize, usize)> = BTreeMap::new();
        let (mut n_urls, mut flagged) = (0, 0);
        for (s, p) in sites.iter().zip(&preds) {
            if other.contains(s) && !train.contains(s) {
                n_urls += 1;
                let e = per_site.entry(s).or_default();
                e.0 += 1;
                if p.is_hoax() {
                    flagged += 1;
                    e.1 += 1;
                }
            }
        }
        let mut n_sites = 0;
        let mut detected = Vec::new();
        let mut in_detected = 0;
        for (s, (total, f)) in &per_site {
            if *total >= min_urls {
                n_sites += 1;
                if (*f as f64) * 100.0 > threshold * *total as f64 {
                    detected.push(s.to_string());
                    in_detected += total;
                }
            }
        }
        assert_eq!(r.n_urls, n_urls);
        assert_eq!(r.n_urls_flagged, flagged);
        assert_eq!(r.n_sites, n_sites);
        let mut got = r.detected_sites.clone();
        got.sort();
        assert_eq!(got, detected, "round {round}");
        assert_eq!(r.n_urls_in_detected_sites, in_detected);
        let close = |a: Option<f64>, b: Option<f64>| match (a, b) {
            (Some(a), Some(b)) => (a - b).abs() < 1e-9,
            (None, None) => true,
            _ => false,
        };
        assert!(close(r.direct_url_pct, (n_urls > 0).then(|| 100.0 * flagged as f64 / n_urls as f64)));
        let site_pct = (n_sites > 0).then(|| 100.0 * detected.len() as f64 / n_sites as f64);
        assert!(close(r.site_detect_pct, site_pct), "round {round}");
        let url_pct = (n_sites > 0 && n_urls > 0).then(|| 100.0 * in_detected as f64 / n_urls as f64);
        assert!(close(r.suspicious_url_pct, url_pct), "round {round}");
    }
}
