//! Fixtures and random instance generators shared by the integration tests.
#![allow(dead_code)]

use fairvote::{Group, Instance};
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// k=2, m=50, n=200 with five overlapping pair groups; `l5` is the lower
/// bound of the last group.
pub fn pair_groups(l5: usize) -> Instance {
    let mut first = vec![0, 1];
    first.extend(4..50);
    first.extend([2, 3]);
    let mut second = vec![1, 0];
    second.extend(4..50);
    second.extend([3, 2]);
    let mut prefs = vec![first; 100];
    prefs.extend(std::iter::repeat_n(second, 100));
    let pair = |a: usize, b: usize, lower, upper| Group {
        members: vec![a, b],
        lower,
        upper,
    };
    let groups = vec![
        pair(0, 2, 1, 1),
        pair(1, 2, 1, 1),
        pair(0, 3, 1, 1),
        pair(1, 3, 1, 1),
        pair(2, 3, l5, 2),
    ];
    Instance::new(50, 2, prefs, groups).unwrap()
}

/// k=4, m=8, n=200; two crossed attributes with every bound equal to 2.
pub fn crossed_groups() -> Instance {
    let orders: [[usize; 8]; 4] = [
        [1, 3, 4, 2, 5, 6, 7, 8],
        [2, 4, 3, 1, 5, 6, 7, 8],
        [5, 7, 8, 6, 1, 2, 3, 4],
        [6, 8, 7, 5, 1, 2, 3, 4],
    ];
    let mut prefs = Vec::new();
    for o in orders {
        let l: Vec<usize> = o.iter().map(|c| c - 1).collect();
        prefs.extend(std::iter::repeat_n(l, 50));
    }
    let g = |ids: [usize; 4]| Group {
        members: ids.iter().map(|c| c - 1).collect(),
        lower: 2,
        upper: 2,
    };
    let groups = vec![
        g([1, 2, 5, 6]),
        g([3, 4, 7, 8]),
        g([1, 2, 3, 4]),
        g([5, 6, 7, 8]),
    ];
    Instance::new(8, 4, prefs, groups).unwrap()
}

pub fn random_prefs(rng: &mut impl Rng, n: usize, m: usize) -> Vec<Vec<usize>> {
    (0..n)
        .map(|_| {
            let mut p: Vec<usize> = (0..m).collect();
            p.shuffle(rng);
            p
        })
        .collect()
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Bounds {
    Both,
    UpperOnly,
}

/// Random groups where each candidate joins at most `max_deg` of `p` groups.
/// Empty groups are dropped.
pub fn random_groups(
    rng: &mut impl Rng,
    m: usize,
    k: usize,
    p: usize,
    max_deg: usize,
    bounds: Bounds,
) -> Vec<Group> {
    let mut members = vec![Vec::new(); p];
    for c in 0..m {
        let deg = rng.gen_range(0..=max_deg.min(p));
        let mut ids: Vec<usize> = (0..p).collect();
        ids.shuffle(rng);
        for &j in &ids[..deg] {
            members[j].push(c);
        }
    }
    members
        .into_iter()
        .filter(|ms| !ms.is_empty())
        .map(|ms| {
            let size = ms.len();
            let (lower, upper) = match bounds {
                Bounds::Both => {
                    let lo = rng.gen_range(0..=(size / 2).min(k));
                    (lo, rng.gen_range(lo..=size))
                }
                Bounds::UpperOnly => (0, rng.gen_range(0..=size.min(k))),
            };
            Group {
                members: ms,
                lower,
                upper,
            }
        })
        .collect()
}

pub struct Shape {
    pub m: (usize, usize),
    pub n: usize,
    pub p: (usize, usize),
    pub max_deg: usize,
    pub k_max: usize,
    pub bounds: Bounds,
}

pub fn random_instance(rng: &mut impl Rng, shape: &Shape) -> Instance {
    let m = rng.gen_range(shape.m.0..=shape.m.1);
    let k = rng.gen_range(1..=shape.k_max.min(m));
    let p = rng.gen_range(shape.p.0..=shape.p.1);
    let prefs = random_prefs(rng, shape.n, m);
    let groups = random_groups(rng, m, k, p, shape.max_deg, shape.bounds);
    Instance::new(m, k, prefs, groups).unwrap()
}

/// A random point of `[0,1]^m` with coordinates away from the endpoints.
pub fn random_point(rng: &mut impl Rng, m: usize) -> Vec<f64> {
    (0..m).map(|_| rng.gen_range(0.05..0.95)).collect()
}
