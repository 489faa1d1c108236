//! Fixtures shared by the benchmarks.

use fairvote::experiments::{constraint_mode, generate_euclidean, EuclideanConfig, Mode};
use fairvote::solvers::bmatching::BMatchingProblem;
use fairvote::{seed, Group, Instance};
use rand::seq::SliceRandom;
use rand::Rng;

/// One Euclidean instance of the default study (m = 120, k = 12, four
/// disjoint quadrant groups) under the given constraint mode.
pub fn euclidean(mode: Mode, trial_seed: u64) -> Instance {
    let cfg = EuclideanConfig::default();
    let ei = generate_euclidean(&cfg, trial_seed).expect("default config is valid");
    let bounds = constraint_mode(&ei.instance, mode, &ei.voter_counts())
        .expect("quadrant groups are disjoint");
    ei.instance
        .with_bounds(&bounds)
        .expect("bounds fit the groups")
}

/// Random impartial-culture instance where every candidate joins `deg`
/// of `p` groups, with loose bounds around the proportional share.
pub fn overlapping(
    m: usize,
    n: usize,
    k: usize,
    p: usize,
    deg: usize,
    seed_value: u64,
) -> Instance {
    let mut rng = seed::rng(seed_value);
    let prefs = (0..n)
        .map(|_| {
            let mut l: Vec<usize> = (0..m).collect();
            l.shuffle(&mut rng);
            l
        })
        .collect();
    let mut members = vec![Vec::new(); p];
    for c in 0..m {
        let mut ids: Vec<usize> = (0..p).collect();
        ids.shuffle(&mut rng);
        for &j in &ids[..deg] {
            members[j].push(c);
        }
    }
    let groups = members
        .into_iter()
        .filter(|ms| !ms.is_empty())
        .map(|ms| {
            let share = (ms.len() * k) as f64 / m as f64;
            Group {
                lower: (share * 0.5).floor() as usize,
                upper: (share * 1.5).ceil() as usize,
                members: ms,
            }
        })
        .collect();
    Instance::new(m, k, prefs, groups).expect("generated instance is valid")
}

/// Random b-matching problem with a planted perfect solution.
pub fn planted_b_matching(vertices: usize, edges: usize, seed_value: u64) -> BMatchingProblem {
    let mut rng = seed::rng(seed_value);
    let mut b = vec![0usize; vertices];
    let mut list = Vec::with_capacity(edges);
    while list.len() < edges {
        let (u, v) = (rng.gen_range(0..vertices), rng.gen_range(0..vertices));
        if u == v {
            continue;
        }
        if rng.gen_bool(0.5) {
            b[u] += 1;
            b[v] += 1;
        }
        list.push((u, v, rng.gen_range(0..100)));
    }
    BMatchingProblem { b, edges: list }
}
