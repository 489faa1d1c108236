//! Fractional pipelines: continuous greedy followed by dependent rounding.

use super::{witness, Guarantee, Solution, SolveOptions, ONE_MINUS_INV_E};
use crate::contgreedy::{continuous_greedy_with, GreedyConfig, GreedyTrace};
use crate::error::{Error, Result};
use crate::instance::{Committee, Instance};
use crate::polytope::Polytope;
use crate::rounding::{degree_one_round, swap_round, swap_round_partial, violation_report};
use crate::scores::{Rule, Scorer};
use crate::seed::{self, STREAM_ROUNDING};

fn greedy_config(opts: &SolveOptions) -> GreedyConfig {
    GreedyConfig {
        steps: opts.steps,
        seed: opts.seed,
        ..GreedyConfig::default()
    }
}

/// Continuous greedy over `B`, then degree-one rounding when `Δ <= 1` (always
/// feasible) or swap rounding otherwise (bounds hold up to the concentration
/// factors). The best of `opts.rounds` roundings is kept; for swap rounding,
/// feasible outcomes and smaller violations come first.
pub fn cg_pipeline(inst: &Instance, rule: &Rule, opts: &SolveOptions) -> Result<Solution> {
    let scorer = Scorer::new(rule, inst)?;
    cg_pipeline_with(&scorer, opts)
}

pub(crate) fn cg_pipeline_with(scorer: &Scorer<'_>, opts: &SolveOptions) -> Result<Solution> {
    let inst = scorer.instance();
    let poly = Polytope::from_instance(inst);
    let trace = continuous_greedy_with(scorer, &poly, &greedy_config(opts))?;
    let degree_one = inst.delta() <= 1;
    let ratio = if scorer.weights().is_some() {
        1.0
    } else {
        ONE_MINUS_INV_E
    };

    let mut best: Option<((bool, f64, f64), Committee)> = None;
    for r in 0..opts.rounds.max(1) {
        let s = seed::derive(opts.seed, STREAM_ROUNDING, r as u64);
        let c = if degree_one {
            degree_one_round(&trace.y, inst, s)?
        } else {
            swap_round(&trace.y, inst, s)?
        };
        let rep = violation_report(&c, inst);
        let key = (
            rep.feasible,
            -(rep.max_lower.max(rep.max_upper)),
            scorer.eval(c.members()),
        );
        let better = match &best {
            None => true,
            Some((bk, bc)) => match key.partial_cmp(bk) {
                Some(std::cmp::Ordering::Greater) => true,
                Some(std::cmp::Ordering::Equal) => c.members() < bc.members(),
                _ => false,
            },
        };
        if better {
            best = Some((key, c));
        }
    }
    let (_, committee) = best.expect("at least one rounding");
    let (guarantee, name) = if degree_one {
        (Guarantee::Ratio(ratio), "cg+degree-one")
    } else {
        let cap = 1.0
            + violation_report(&committee, inst)
                .predicted_upper
                .unwrap_or(0.0);
        (
            Guarantee::Bicriterion {
                ratio,
                violation_cap: cap,
            },
            "cg+swap",
        )
    };
    Ok(Solution::new(scorer, committee, guarantee, name, opts.seed)
        .with_info("fractional_value", trace.value.into()))
}

/// Drops members of over-full groups (highest index first) until every
/// upper bound holds.
fn repair_uppers(inst: &Instance, mut s: Vec<usize>) -> Vec<usize> {
    s.sort_unstable();
    loop {
        let counts = inst.group_counts(&s);
        let Some(j) = (0..inst.p()).find(|&j| counts[j] > inst.groups()[j].upper) else {
            return s;
        };
        let pos = s
            .iter()
            .rposition(|c| inst.groups_of(*c).contains(&j))
            .expect("group is non-empty");
        s.remove(pos);
    }
}

/// Uppers only: continuous greedy on the shrunk polytope, swap rounding
/// (at most `k` members, within the uppers), then a top-up from a feasible
/// witness. Every count stays within `2u_i`.
pub fn shrunk_cg(inst: &Instance, rule: &Rule, opts: &SolveOptions) -> Result<Solution> {
    let scorer = Scorer::new(rule, inst)?;
    shrunk_cg_with(&scorer, opts)
}

pub(crate) fn shrunk_cg_with(scorer: &Scorer<'_>, opts: &SolveOptions) -> Result<Solution> {
    let inst = scorer.instance();
    if !inst.only_upper_bounds() {
        return Err(Error::Unsupported(
            "shrunk-cg needs every lower bound to be 0".into(),
        ));
    }
    let hat = witness(inst, opts)?;
    let poly = Polytope::shrunk(inst, opts.shrink_eps)?;
    let trace: GreedyTrace = continuous_greedy_with(scorer, &poly, &greedy_config(opts))?;

    let k = inst.k();
    let mut best: Option<(f64, Vec<usize>)> = None;
    let mut repaired = 0usize;
    for r in 0..opts.rounds.max(1) {
        let raw = swap_round_partial(&trace.y, seed::derive(opts.seed, STREAM_ROUNDING, r as u64));
        let s1 = repair_uppers(inst, raw.clone());
        if s1.len() != raw.len() {
            repaired += 1;
        }
        let mut state = scorer.gain_state();
        let mut taken = vec![false; inst.m()];
        for &c in s1.iter().take(k) {
            taken[c] = true;
            state.add(c);
        }
        while state.members().len() < k {
            let mut pick: Option<(f64, usize)> = None;
            for &c in hat.members() {
                if !taken[c] {
                    let g = state.gain(c);
                    if pick.is_none_or(|(pg, _)| g > pg) {
                        pick = Some((g, c));
                    }
                }
            }
            let (_, c) = pick.expect("witness has k members");
            taken[c] = true;
            state.add(c);
        }
        let mut members = state.members().to_vec();
        members.sort_unstable();
        let v = state.value();
        if best
            .as_ref()
            .is_none_or(|(bv, bm)| v > *bv || (v == *bv && members < *bm))
        {
            best = Some((v, members));
        }
    }
    let (_, members) = best.expect("at least one rounding");
    let committee = Committee::new(inst, members)?;
    let guarantee = Guarantee::Bicriterion {
        ratio: (ONE_MINUS_INV_E - opts.shrink_eps).max(0.0),
        violation_cap: 2.0,
    };
    Ok(
        Solution::new(scorer, committee, guarantee, "shrunk-cg", opts.seed)
            .with_info("fractional_value", trace.value.into())
            .with_info("repaired_roundings", repaired.into()),
    )
}
