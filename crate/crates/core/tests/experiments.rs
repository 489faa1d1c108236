//! The Euclidean study against independent computations.

mod common;

use common::rng;
use fairvote::experiments::{
    constraint_mode, generate_euclidean, gini, run_experiment, EuclideanConfig, Mode,
};
use rand::Rng;

/// Mean absolute difference over all ordered pairs, halved and normalised.
fn gini_oracle(n: &[usize]) -> f64 {
    let total: usize = n.iter().sum();
    let mut diff = 0usize;
    for a in n {
        for b in n {
            diff += a.abs_diff(*b);
        }
    }
    diff as f64 / (2.0 * n.len() as f64 * total as f64)
}

#[test]
fn gini_matches_the_pairwise_formula() {
    let mut r = rng(1);
    for _ in 0..500 {
        let counts: Vec<usize> = (0..r.gen_range(1..9)).map(|_| r.gen_range(0..15)).collect();
        if counts.iter().sum::<usize>() == 0 {
            assert!(gini(&counts).is_err());
            continue;
        }
        assert!(
            (gini(&counts).unwrap() - gini_oracle(&counts)).abs() < 1e-12,
            "{counts:?}"
        );
    }
}

#[test]
fn quadrants_follow_the_coordinates() {
    let cfg = EuclideanConfig::default();
    let ei = generate_euclidean(&cfg, 3).unwrap();
    let quadrant = |(x, y): (f64, f64)| match (x > 0.0, y > 0.0) {
        (true, true) => 0,
        (false, true) => 1,
        (false, false) => 2,
        (true, false) => 3,
    };
    for (i, &[x, y]) in ei.candidates.iter().enumerate() {
        assert_eq!(ei.candidate_quadrant[i], quadrant((x, y)));
        assert!(x.abs() <= cfg.half_width && y.abs() <= cfg.half_width);
    }
    assert_eq!(ei.voter_counts(), vec![100; 4]);
    for (g, &want) in ei
        .instance
        .groups()
        .iter()
        .zip(&cfg.candidates_per_quadrant)
    {
        assert_eq!(g.members.len(), want);
    }
    // every voter ranks by distance
    for (v, pref) in ei.instance.prefs().iter().enumerate() {
        let [vx, vy] = ei.voters[v];
        let d = |c: usize| {
            ((ei.candidates[c][0] - vx).powi(2) + (ei.candidates[c][1] - vy).powi(2)).sqrt()
        };
        assert!(pref.windows(2).all(|w| d(w[0]) <= d(w[1])));
    }
}

#[test]
fn proportional_modes_pin_the_gini_index() {
    let cfg = EuclideanConfig::default();
    let ei = generate_euclidean(&cfg, 4).unwrap();
    let voters = constraint_mode(&ei.instance, Mode::PropVoters, &ei.voter_counts()).unwrap();
    let cands = constraint_mode(&ei.instance, Mode::PropCandidates, &ei.voter_counts()).unwrap();
    let exact = |b: &[(usize, usize)]| {
        b.iter()
            .map(|&(l, u)| {
                assert_eq!(l, u);
                l
            })
            .collect::<Vec<_>>()
    };
    assert_eq!(gini_oracle(&exact(&voters)), 0.0);
    assert_eq!(gini_oracle(&exact(&cands)), 0.125);
}

#[test]
fn runs_are_deterministic_and_match_their_trials() {
    let cfg = EuclideanConfig {
        voters_per_quadrant: [10; 4],
        candidates_per_quadrant: [6, 5, 4, 5],
        k: 5,
        rules: vec!["sntv".into(), "alpha-cc".into()],
        repetitions: 4,
        steps: Some(30),
        rounds: 2,
        ..EuclideanConfig::default()
    };
    let a = run_experiment(&cfg).unwrap();
    let b = run_experiment(&cfg).unwrap();
    assert_eq!(a.rows, b.rows);
    for row in &a.rows {
        let sel: Vec<_> = a
            .trials
            .iter()
            .filter(|t| t.rule == row.rule && t.mode == row.mode)
            .collect();
        assert_eq!(sel.len(), 4);
        let mean = sel.iter().map(|t| t.ratio).sum::<f64>() / 4.0;
        assert!((mean - row.ratio_mean).abs() < 1e-9);
        for t in &sel {
            let counts: Vec<usize> = t.counts.split(';').map(|c| c.parse().unwrap()).collect();
            assert!((t.gini - gini_oracle(&counts)).abs() < 1e-12);
        }
    }
}
