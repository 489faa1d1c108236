//! Combinatorial greedy pipelines for one-sided bounds.

use super::{witness, Guarantee, Solution, SolveOptions, ONE_MINUS_INV_E};
use crate::error::{Error, Result};
use crate::instance::{Committee, Instance};
use crate::scores::{GainState, Rule, Scorer};

/// Highest-gain candidate passing `allowed`, lowest index on ties.
fn best_gain(
    state: &GainState<'_, '_>,
    m: usize,
    mut allowed: impl FnMut(usize) -> bool,
) -> Option<usize> {
    let mut best: Option<(f64, usize)> = None;
    for c in 0..m {
        if !allowed(c) {
            continue;
        }
        let g = state.gain(c);
        if best.is_none_or(|(bg, _)| g > bg) {
            best = Some((g, c));
        }
    }
    best.map(|(_, c)| c)
}

/// Greedy within the uppers (a `Δ`-extendible system), then a top-up from a
/// feasible `witness`. Score at least `OPT/(Δ+1)`; every group count at most
/// `2u_i`.
pub fn greedy_extendible(inst: &Instance, rule: &Rule, witness: &Committee) -> Result<Solution> {
    let scorer = Scorer::new(rule, inst)?;
    greedy_extendible_with(&scorer, witness, 0)
}

pub(crate) fn greedy_extendible_with(
    scorer: &Scorer<'_>,
    witness: &Committee,
    seed: u64,
) -> Result<Solution> {
    let inst = scorer.instance();
    if !inst.only_upper_bounds() {
        return Err(Error::Unsupported(
            "greedy-extendible needs every lower bound to be 0".into(),
        ));
    }
    if !witness.is_feasible(inst) {
        return Err(Error::InvalidCommittee(
            "witness does not satisfy the bounds".into(),
        ));
    }
    let (m, k) = (inst.m(), inst.k());
    let mut state = scorer.gain_state();
    let mut taken = vec![false; m];
    let mut counts = vec![0usize; inst.p()];
    while state.members().len() < k {
        let room = |c: usize| {
            !taken[c]
                && inst
                    .groups_of(c)
                    .iter()
                    .all(|&j| counts[j] < inst.groups()[j].upper)
        };
        let Some(c) = best_gain(&state, m, room) else {
            break;
        };
        taken[c] = true;
        for &j in inst.groups_of(c) {
            counts[j] += 1;
        }
        state.add(c);
    }
    let greedy_size = state.members().len();
    while state.members().len() < k {
        let from_witness = |c: usize| !taken[c] && witness.contains(c);
        let c = best_gain(&state, m, from_witness).expect("witness has k members");
        taken[c] = true;
        state.add(c);
    }
    let committee = Committee::new(inst, state.members().to_vec())?;
    let ratio = 1.0 / (inst.delta() as f64 + 1.0);
    Ok(Solution::new(
        scorer,
        committee,
        Guarantee::Bicriterion {
            ratio,
            violation_cap: 2.0,
        },
        "greedy-extendible",
        seed,
    )
    .with_info("greedy_size", greedy_size.into()))
}

/// Greedy multi-cover of the lower bounds: repeatedly add the candidate
/// meeting the most outstanding demand (lowest index on ties). `None` when
/// some demand cannot be met even with every candidate.
pub fn min_lower_cover(inst: &Instance) -> Option<Vec<usize>> {
    let mut demand: Vec<usize> = inst.groups().iter().map(|g| g.lower).collect();
    let mut taken = vec![false; inst.m()];
    let mut cover = Vec::new();
    while demand.iter().any(|&d| d > 0) {
        let mut best: Option<(usize, usize)> = None;
        for c in 0..inst.m() {
            if taken[c] {
                continue;
            }
            let hits = inst.groups_of(c).iter().filter(|&&j| demand[j] > 0).count();
            if hits > 0 && best.is_none_or(|(bh, _)| hits > bh) {
                best = Some((hits, c));
            }
        }
        let (_, c) = best?;
        taken[c] = true;
        for &j in inst.groups_of(c) {
            demand[j] = demand[j].saturating_sub(1);
        }
        cover.push(c);
    }
    cover.sort_unstable();
    Some(cover)
}

/// Lower bounds only: a small cover first, then greedy for the remaining
/// slots. Always feasible. The approximation guarantee needs a feasible
/// cover much smaller than `k`; the cover size is reported for that reason.
pub fn lower_only(inst: &Instance, rule: &Rule, opts: &SolveOptions) -> Result<Solution> {
    let scorer = Scorer::new(rule, inst)?;
    lower_only_with(&scorer, opts)
}

pub(crate) fn lower_only_with(scorer: &Scorer<'_>, opts: &SolveOptions) -> Result<Solution> {
    let inst = scorer.instance();
    if !inst.only_lower_bounds() {
        return Err(Error::Unsupported(
            "lower-only needs u_i = |P_i| for every group".into(),
        ));
    }
    let (m, k) = (inst.m(), inst.k());
    let mut cover = min_lower_cover(inst)
        .ok_or_else(|| Error::Infeasible("lower bounds exceed the available candidates".into()))?;
    let mut method = "greedy-cover";
    if cover.len() > k {
        // the greedy cover is only approximate; ask the exact checker
        cover = witness(inst, opts)?.members().to_vec();
        method = "witness";
    }
    let stage1 = cover.len();
    let mut state = scorer.gain_state();
    let mut taken = vec![false; m];
    for &c in &cover {
        taken[c] = true;
        state.add(c);
    }
    // stages 2 and 3 coincide: the best marginal gain, lowest index on ties
    while state.members().len() < k {
        let c = best_gain(&state, m, |c| !taken[c]).expect("k <= m");
        taken[c] = true;
        state.add(c);
    }
    let committee = Committee::new(inst, state.members().to_vec())?;
    Ok(Solution::new(
        scorer,
        committee,
        Guarantee::Ratio(ONE_MINUS_INV_E),
        "lower-only",
        opts.seed,
    )
    .with_info("cover_size", stage1.into())
    .with_info("cover_method", method.into())
    .with_info("ratio_is_asymptotic", true.into()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::instance::Group;

    fn inst_with(groups: Vec<Group>, k: usize) -> Instance {
        let prefs = vec![
            vec![0, 1, 2, 3, 4, 5],
            vec![5, 4, 3, 2, 1, 0],
            vec![2, 3, 0, 1, 5, 4],
        ];
        Instance::new(6, k, prefs, groups).unwrap()
    }

    #[test]
    fn unconstrained_is_plain_greedy() {
        let inst = inst_with(vec![], 2);
        let w = Committee::new(&inst, vec![0, 1]).unwrap();
        let s = greedy_extendible(&inst, &Rule::AlphaCc, &w).unwrap();
        // each voter approves a disjoint pair, so two members reach at most two voters
        assert_eq!(s.score, 2.0);
    }

    #[test]
    fn top_up_stays_within_twice_the_uppers() {
        let groups = vec![
            Group {
                members: vec![0, 1, 2],
                lower: 0,
                upper: 1,
            },
            Group {
                members: vec![2, 3, 4, 5],
                lower: 0,
                upper: 3,
            },
        ];
        let inst = inst_with(groups, 4);
        let w = Committee::new(&inst, vec![0, 3, 4, 5]).unwrap();
        assert!(w.is_feasible(&inst));
        let s = greedy_extendible(&inst, &Rule::BetaCc, &w).unwrap();
        for (c, g) in s.committee.group_counts().iter().zip(inst.groups()) {
            assert!(*c <= 2 * g.upper);
        }
        assert!(s.score >= Scorer::new(&Rule::BetaCc, &inst).unwrap().eval(w.members()) / 3.0);
    }

    #[test]
    fn lower_bounds_rejected_by_extendible() {
        let inst = inst_with(
            vec![Group {
                members: vec![0, 1],
                lower: 1,
                upper: 2,
            }],
            2,
        );
        let w = Committee::new(&inst, vec![0, 2]).unwrap();
        assert!(greedy_extendible(&inst, &Rule::Sntv, &w).is_err());
    }

    #[test]
    fn cover_then_fill() {
        let groups = vec![
            Group {
                members: vec![0, 1, 2],
                lower: 2,
                upper: 3,
            },
            Group {
                members: vec![2, 3],
                lower: 1,
                upper: 2,
            },
        ];
        let inst = inst_with(groups, 3);
        assert_eq!(min_lower_cover(&inst).unwrap(), vec![0, 2]);
        let s = lower_only(&inst, &Rule::BetaCc, &SolveOptions::default()).unwrap();
        assert!(s.committee.is_feasible(&inst));
        assert_eq!(s.info["cover_size"], 2);
    }
}
