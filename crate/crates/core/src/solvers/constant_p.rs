//! Few groups: enumerate how many members each type class contributes.
//!
//! Candidates with the same set of groups form a type class. A vector
//! `(k_1..k_q)` is available when `Σk_t = k`, `k_t <= |V_t|` and the induced
//! group counts meet every bound. Each vector fixes a partition problem with
//! exact counts, solved exactly for modular rules and by continuous greedy
//! plus degree-one rounding otherwise.

use std::collections::BTreeMap;

use rayon::prelude::*;

use super::{Guarantee, Solution, SolveOptions, ONE_MINUS_INV_E};
use crate::contgreedy::{continuous_greedy_with, GreedyConfig};
use crate::error::{Error, Result};
use crate::instance::{Committee, Group, Instance};
use crate::polytope::{partition_greedy, Polytope};
use crate::rounding::degree_one_round;
use crate::scores::{FractionalPoint, Rule, Scorer};
use crate::seed::{self, STREAM_ROUNDING, STREAM_SUBPROBLEM};

/// Candidates grouped by their exact set of groups.
#[derive(Clone, Debug)]
pub struct TypeClasses {
    /// members of each class, ascending; classes ordered by smallest member
    pub members: Vec<Vec<usize>>,
    /// the groups shared by each class
    pub types: Vec<Vec<usize>>,
}

impl TypeClasses {
    pub fn new(inst: &Instance) -> Self {
        let mut index: BTreeMap<&[usize], usize> = BTreeMap::new();
        let mut members: Vec<Vec<usize>> = Vec::new();
        let mut types = Vec::new();
        for c in 0..inst.m() {
            let t = inst.groups_of(c);
            let id = *index.entry(t).or_insert_with(|| {
                members.push(Vec::new());
                types.push(t.to_vec());
                members.len() - 1
            });
            members[id].push(c);
        }
        Self { members, types }
    }

    pub fn len(&self) -> usize {
        self.members.len()
    }

    pub fn is_empty(&self) -> bool {
        self.members.is_empty()
    }
}

/// All available vectors, in lexicographic order of `(k_1..k_q)`.
/// Fails with [`Error::CapExceeded`] once more than `cap` are found.
pub fn available_vectors(
    inst: &Instance,
    classes: &TypeClasses,
    cap: usize,
) -> Result<Vec<Vec<usize>>> {
    let q = classes.len();
    let p = inst.p();
    // suffix[t][j]: members of group j in classes t.. ; suffix_size[t]: all members in classes t..
    let mut suffix = vec![vec![0usize; p]; q + 1];
    let mut suffix_size = vec![0usize; q + 1];
    for t in (0..q).rev() {
        suffix[t] = suffix[t + 1].clone();
        for &j in &classes.types[t] {
            suffix[t][j] += classes.members[t].len();
        }
        suffix_size[t] = suffix_size[t + 1] + classes.members[t].len();
    }

    struct Search<'a> {
        inst: &'a Instance,
        classes: &'a TypeClasses,
        suffix: Vec<Vec<usize>>,
        suffix_size: Vec<usize>,
        cap: usize,
        out: Vec<Vec<usize>>,
        cur: Vec<usize>,
        counts: Vec<usize>,
    }

    impl Search<'_> {
        fn viable(&self, t: usize, left: usize) -> bool {
            if left > self.suffix_size[t] {
                return false;
            }
            self.inst.groups().iter().enumerate().all(|(j, g)| {
                self.counts[j] <= g.upper && self.counts[j] + left.min(self.suffix[t][j]) >= g.lower
            })
        }

        fn go(&mut self, t: usize, left: usize) -> bool {
            if !self.viable(t, left) {
                return true;
            }
            if t == self.classes.len() {
                if left == 0 {
                    if self.out.len() == self.cap {
                        return false;
                    }
                    self.out.push(self.cur.clone());
                }
                return true;
            }
            let most = left.min(self.classes.members[t].len());
            for x in (0..=most).rev() {
                self.cur.push(x);
                for &j in &self.classes.types[t] {
                    self.counts[j] += x;
                }
                let ok = self.go(t + 1, left - x);
                for &j in &self.classes.types[t] {
                    self.counts[j] -= x;
                }
                self.cur.pop();
                if !ok {
                    return false;
                }
            }
            true
        }
    }

    let mut s = Search {
        inst,
        classes,
        suffix,
        suffix_size,
        cap,
        out: Vec::new(),
        cur: Vec::with_capacity(q),
        counts: vec![0; p],
    };
    if !s.go(0, inst.k()) {
        return Err(Error::CapExceeded {
            m: inst.m(),
            k: inst.k(),
            count: cap as u128 + 1,
            cap: cap as u128,
        });
    }
    let mut out = s.out;
    out.reverse();
    Ok(out)
}

pub fn constant_p(inst: &Instance, rule: &Rule, opts: &SolveOptions) -> Result<Solution> {
    let scorer = Scorer::new(rule, inst)?;
    constant_p_with(&scorer, opts)
}

pub(crate) fn constant_p_with(scorer: &Scorer<'_>, opts: &SolveOptions) -> Result<Solution> {
    let inst = scorer.instance();
    let classes = TypeClasses::new(inst);
    let vectors = available_vectors(inst, &classes, opts.vector_cap)?;
    if vectors.is_empty() {
        return Err(Error::Infeasible(
            "no available vector meets the bounds".into(),
        ));
    }
    solve_vectors(scorer, &classes, &vectors, opts)
}

/// Greedy under per-class quotas: a 1/2-approximation on the partition
/// matroid, used as an extra candidate beside the rounded fractional point.
fn quota_greedy(scorer: &Scorer<'_>, class_of: &[usize], quota: &[usize]) -> Vec<usize> {
    let m = class_of.len();
    let k: usize = quota.iter().sum();
    let mut left = quota.to_vec();
    let mut state = scorer.gain_state();
    let mut taken = vec![false; m];
    for _ in 0..k {
        let mut best: Option<(f64, usize)> = None;
        for c in 0..m {
            if taken[c] || left[class_of[c]] == 0 {
                continue;
            }
            let g = state.gain(c);
            if best.is_none_or(|(bg, _)| g > bg) {
                best = Some((g, c));
            }
        }
        let Some((_, c)) = best else { break };
        taken[c] = true;
        left[class_of[c]] -= 1;
        state.add(c);
    }
    let mut s = state.members().to_vec();
    s.sort_unstable();
    s
}

fn solve_vector(
    scorer: &Scorer<'_>,
    classes: &TypeClasses,
    class_of: &[usize],
    quota: &[usize],
    opts: &SolveOptions,
    sub_seed: u64,
) -> Result<(f64, Vec<usize>)> {
    let inst = scorer.instance();
    if let Some(w) = scorer.weights() {
        let groups: Vec<(&[usize], usize, usize)> = classes
            .members
            .iter()
            .zip(quota)
            .map(|(m, &q)| (m.as_slice(), q, q))
            .collect();
        let s = partition_greedy(inst.m(), inst.k(), &groups, w)
            .ok_or_else(|| Error::Numerical("available vector has no completion".into()))?;
        return Ok((scorer.eval(&s), s));
    }
    let mut best = quota_greedy(scorer, class_of, quota);
    let mut best_score = scorer.eval(&best);

    let groups: Vec<Group> = classes
        .members
        .iter()
        .zip(quota)
        .map(|(m, &q)| Group {
            members: m.clone(),
            lower: q,
            upper: q,
        })
        .collect();
    let sub = inst.with_groups(groups)?;
    let poly = Polytope::from_instance(&sub);
    let cfg = GreedyConfig {
        steps: opts.steps,
        seed: sub_seed,
        ..GreedyConfig::default()
    };
    let trace = continuous_greedy_with(scorer, &poly, &cfg)?;
    let y = FractionalPoint::new(trace.y.to_vec())?;
    for r in 0..opts.rounds.max(1) {
        let c = degree_one_round(&y, &sub, seed::derive(sub_seed, STREAM_ROUNDING, r as u64))?;
        let v = scorer.eval(c.members());
        if v > best_score || (v == best_score && c.members() < best.as_slice()) {
            best_score = v;
            best = c.members().to_vec();
        }
    }
    Ok((best_score, best))
}

pub(crate) fn solve_vectors(
    scorer: &Scorer<'_>,
    classes: &TypeClasses,
    vectors: &[Vec<usize>],
    opts: &SolveOptions,
) -> Result<Solution> {
    let inst = scorer.instance();
    let mut class_of = vec![0usize; inst.m()];
    for (t, ms) in classes.members.iter().enumerate() {
        for &c in ms {
            class_of[c] = t;
        }
    }
    let results: Vec<Result<(f64, Vec<usize>)>> = vectors
        .par_iter()
        .enumerate()
        .map(|(i, quota)| {
            let sub_seed = seed::derive(opts.seed, STREAM_SUBPROBLEM, i as u64);
            solve_vector(scorer, classes, &class_of, quota, opts, sub_seed)
        })
        .collect();
    let mut best: Option<(f64, Vec<usize>)> = None;
    for r in results {
        let (v, s) = r?;
        let better = match &best {
            None => true,
            Some((bv, bs)) => v > *bv || (v == *bv && s < *bs),
        };
        if better {
            best = Some((v, s));
        }
    }
    let (_, members) = best.expect("at least one vector");
    let committee = Committee::new(inst, members)?;
    let guarantee = if scorer.weights().is_some() {
        Guarantee::Exact
    } else {
        Guarantee::Ratio(ONE_MINUS_INV_E)
    };
    Ok(
        Solution::new(scorer, committee, guarantee, "constant-p", opts.seed)
            .with_info("available_vectors", vectors.len().into())
            .with_info("type_classes", classes.len().into()),
    )
}
