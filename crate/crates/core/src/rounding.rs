//! Dependent rounding of fractional points into committees.
//!
//! [`degree_one_round`] is exact for disjoint groups: pairwise rounding keeps
//! every group sum integral-or-rounded, so the output is always feasible.
//! [`swap_round`] works for any group structure, preserves marginals and
//! yields negatively correlated group counts; fairness may then be violated
//! by the factors summarised in a [`ViolationReport`].

use rand::Rng as _;
use serde_json::{json, Value};

use crate::error::{Error, Result};
use crate::instance::{Committee, Instance};
use crate::polytope::Polytope;
use crate::scores::FractionalPoint;
use crate::seed::{self, Rng, STREAM_ROUNDING};

/// Coordinates within this distance of 0 or 1 are snapped.
const SNAP: f64 = 1e-9;
/// Accepted slack when checking `y ∈ B` and `Σy = k`.
const INPUT_TOL: f64 = 1e-6;

fn snap(v: f64) -> f64 {
    if v < SNAP {
        0.0
    } else if v > 1.0 - SNAP {
        1.0
    } else {
        v
    }
}

fn is_fractional(v: f64) -> bool {
    v > 0.0 && v < 1.0
}

/// One pairwise step: moves mass between `i` and `j` so that at least one of
/// them becomes integral, keeping `E[y]` and `y_i + y_j` unchanged.
fn pair_step(y: &mut [f64], i: usize, j: usize, rng: &mut Rng) {
    let d1 = (1.0 - y[i]).min(y[j]);
    let d2 = y[i].min(1.0 - y[j]);
    if rng.gen::<f64>() * (d1 + d2) < d2 {
        y[i] += d1;
        y[j] -= d1;
    } else {
        y[i] -= d2;
        y[j] += d2;
    }
    y[i] = snap(y[i]);
    y[j] = snap(y[j]);
}

/// Repeatedly rounds the two lowest-index fractional coordinates of `idx`
/// until at most one remains.
fn round_within(y: &mut [f64], idx: &[usize], rng: &mut Rng) {
    loop {
        let mut frac = idx.iter().copied().filter(|&c| is_fractional(y[c]));
        match (frac.next(), frac.next()) {
            (Some(i), Some(j)) => pair_step(y, i, j, rng),
            _ => return,
        }
    }
}

fn members_of(y: &[f64]) -> Vec<usize> {
    (0..y.len()).filter(|&c| y[c] > 0.5).collect()
}

/// Rounds `y ∈ B` for an instance with `Δ <= 1` into a feasible committee.
pub fn degree_one_round(y: &FractionalPoint, inst: &Instance, seed: u64) -> Result<Committee> {
    if inst.delta() > 1 {
        return Err(Error::Unsupported(format!(
            "degree-one rounding needs Δ <= 1, got Δ = {}",
            inst.delta()
        )));
    }
    if y.len() != inst.m() {
        return Err(Error::InvalidInstance(format!(
            "point has {} coordinates, expected {}",
            y.len(),
            inst.m()
        )));
    }
    let poly = Polytope::from_instance(inst);
    let viol = poly.violation(y);
    if viol > INPUT_TOL {
        return Err(Error::Numerical(format!(
            "point lies outside the fairness polytope by {viol:e}"
        )));
    }
    let mut rng = seed::child_rng(seed, STREAM_ROUNDING, 0);
    let mut z: Vec<f64> = y.iter().map(|&v| snap(v)).collect();
    for g in inst.groups() {
        round_within(&mut z, &g.members, &mut rng);
    }
    let all: Vec<usize> = (0..inst.m()).collect();
    round_within(&mut z, &all, &mut rng);
    // a lone fractional leftover only arises from round-off in Σy
    for v in z.iter_mut() {
        *v = v.round();
    }
    let members = members_of(&z);
    let committee = Committee::new(inst, members)?;
    if !committee.is_feasible(inst) {
        return Err(Error::Numerical(
            "degree-one rounding produced an infeasible committee".into(),
        ));
    }
    Ok(committee)
}

/// `y` as a convex combination of size-`k` indicator vectors, peeling the
/// largest uniform amount off the current top-`k` support each round.
fn caratheodory(y: &[f64], k: usize) -> Vec<(f64, Vec<usize>)> {
    let m = y.len();
    let mut z = y.to_vec();
    let mut mass = 1.0;
    let mut out: Vec<(f64, Vec<usize>)> = Vec::new();
    for _ in 0..=m + 1 {
        if mass <= SNAP {
            break;
        }
        let mut order: Vec<usize> = (0..m).collect();
        order.sort_by(|&a, &b| z[b].total_cmp(&z[a]).then(a.cmp(&b)));
        let mut base = order[..k].to_vec();
        base.sort_unstable();
        let inside = base.iter().map(|&c| z[c]).fold(f64::INFINITY, f64::min);
        let outside = order[k..].iter().map(|&c| z[c]).fold(0.0, f64::max);
        let beta = inside.min(mass - outside).clamp(0.0, mass);
        if beta <= SNAP {
            // round-off: give the remaining mass to this base
            out.push((mass, base));
            break;
        }
        for &c in &base {
            z[c] = (z[c] - beta).max(0.0);
        }
        mass -= beta;
        out.push((beta, base));
    }
    if mass > SNAP && out.is_empty() {
        let mut order: Vec<usize> = (0..m).collect();
        order.sort_by(|&a, &b| y[b].total_cmp(&y[a]).then(a.cmp(&b)));
        let mut base = order[..k].to_vec();
        base.sort_unstable();
        out.push((mass, base));
    }
    out
}

/// Randomised merge of two bases by pairwise swaps.
fn merge(b1: &mut Vec<usize>, w1: f64, mut b2: Vec<usize>, w2: f64, rng: &mut Rng) {
    loop {
        let i = b1.iter().copied().find(|c| b2.binary_search(c).is_err());
        let j = b2.iter().copied().find(|c| b1.binary_search(c).is_err());
        let (Some(i), Some(j)) = (i, j) else { return };
        if rng.gen::<f64>() * (w1 + w2) < w1 {
            let pos = b2.binary_search(&j).expect("j in b2");
            b2.remove(pos);
            let at = b2.binary_search(&i).unwrap_err();
            b2.insert(at, i);
        } else {
            let pos = b1.binary_search(&i).expect("i in b1");
            b1.remove(pos);
            let at = b1.binary_search(&j).unwrap_err();
            b1.insert(at, j);
        }
    }
}

/// Swap rounding of `y` with `Σy = k` (integer) into `k` indices.
fn swap_round_raw(y: &[f64], k: usize, rng: &mut Rng) -> Vec<usize> {
    if k == 0 {
        return Vec::new();
    }
    let mut parts = caratheodory(y, k).into_iter();
    let (mut weight, mut base) = parts.next().expect("at least one base");
    for (w, b) in parts {
        merge(&mut base, weight, b, w, rng);
        weight += w;
    }
    base
}

/// Swap rounding for a point with `Σy = k`; any number of groups per candidate.
pub fn swap_round(y: &FractionalPoint, inst: &Instance, seed: u64) -> Result<Committee> {
    if y.len() != inst.m() {
        return Err(Error::InvalidInstance(format!(
            "point has {} coordinates, expected {}",
            y.len(),
            inst.m()
        )));
    }
    let sum: f64 = y.iter().sum();
    if (sum - inst.k() as f64).abs() > INPUT_TOL {
        return Err(Error::Numerical(format!(
            "swap rounding needs Σy = k = {}, got {sum}",
            inst.k()
        )));
    }
    let z: Vec<f64> = y.iter().map(|&v| snap(v)).collect();
    let mut rng = seed::child_rng(seed, STREAM_ROUNDING, 0);
    Committee::new(inst, swap_round_raw(&z, inst.k(), &mut rng))
}

/// Swap rounding for `Σy <= k` (points of a shrunk polytope): a dummy
/// coordinate absorbs the gap to the next integer and is dropped afterwards,
/// so the result has `⌈Σy⌉` or `⌈Σy⌉ − 1` members.
pub(crate) fn swap_round_partial(y: &[f64], seed: u64) -> Vec<usize> {
    let z: Vec<f64> = y.iter().map(|&v| snap(v)).collect();
    let sum: f64 = z.iter().sum();
    let target = (sum - INPUT_TOL).ceil().max(0.0) as usize;
    let gap = (target as f64 - sum).max(0.0);
    let mut ext = z;
    let dummy = ext.len();
    if gap > SNAP {
        ext.push(gap.min(1.0));
    }
    let mut rng = seed::child_rng(seed, STREAM_ROUNDING, 1);
    swap_round_raw(&ext, target.min(ext.len()), &mut rng)
        .into_iter()
        .filter(|&c| c != dummy)
        .collect()
}

/// Realised and predicted violation of the fairness bounds.
#[derive(Clone, Debug, PartialEq)]
pub struct ViolationReport {
    pub counts: Vec<usize>,
    /// `max(0, 1 − count/ℓ_i)`, 0 when `ℓ_i = 0`.
    pub lower_factors: Vec<f64>,
    /// `max(0, count/u_i − 1)`; infinite when `u_i = 0` but the group is used.
    pub upper_factors: Vec<f64>,
    pub max_lower: f64,
    pub max_upper: f64,
    /// `2√(ln p)/√L` with `L` the smallest positive lower bound.
    pub predicted_lower: Option<f64>,
    /// `2√(ln p)/√U` with `U` the smallest positive upper bound.
    pub predicted_upper: Option<f64>,
    /// Both predicted factors are at most 1, where the concentration bound applies.
    pub in_regime: bool,
    /// Every count lies in `[(1−δ1)ℓ_i, (1+δ2)u_i]` for the predicted `δ1`, `δ2`.
    pub within_relaxed_bounds: bool,
    pub feasible: bool,
}

impl ViolationReport {
    pub fn to_json(&self) -> Value {
        let finite = |v: f64| if v.is_finite() { json!(v) } else { Value::Null };
        json!({
            "counts": self.counts,
            "lower_factors": self.lower_factors.iter().map(|&v| finite(v)).collect::<Vec<_>>(),
            "upper_factors": self.upper_factors.iter().map(|&v| finite(v)).collect::<Vec<_>>(),
            "max_lower": finite(self.max_lower),
            "max_upper": finite(self.max_upper),
            "predicted_lower": self.predicted_lower,
            "predicted_upper": self.predicted_upper,
            "in_regime": self.in_regime,
            "within_relaxed_bounds": self.within_relaxed_bounds,
            "feasible": self.feasible,
        })
    }
}

pub fn violation_report(s: &Committee, inst: &Instance) -> ViolationReport {
    let counts = s.group_counts().to_vec();
    let groups = inst.groups();
    let lower_factors: Vec<f64> = counts
        .iter()
        .zip(groups)
        .map(|(&c, g)| {
            if g.lower == 0 {
                0.0
            } else {
                (1.0 - c as f64 / g.lower as f64).max(0.0)
            }
        })
        .collect();
    let upper_factors: Vec<f64> = counts
        .iter()
        .zip(groups)
        .map(|(&c, g)| match (g.upper, c) {
            (_, 0) => 0.0,
            (0, _) => f64::INFINITY,
            (u, c) => (c as f64 / u as f64 - 1.0).max(0.0),
        })
        .collect();
    let max_lower = lower_factors.iter().copied().fold(0.0, f64::max);
    let max_upper = upper_factors.iter().copied().fold(0.0, f64::max);

    let p = inst.p();
    let ln_p = if p > 0 { (p as f64).ln() } else { 0.0 };
    let predicted = |bound: Option<usize>| bound.map(|b| 2.0 * ln_p.sqrt() / (b as f64).sqrt());
    let min_lower = groups.iter().map(|g| g.lower).filter(|&l| l > 0).min();
    let min_upper = groups.iter().map(|g| g.upper).filter(|&u| u > 0).min();
    let predicted_lower = predicted(min_lower);
    let predicted_upper = predicted(min_upper);
    let in_regime =
        predicted_lower.is_none_or(|d| d <= 1.0) && predicted_upper.is_none_or(|d| d <= 1.0);
    let d1 = predicted_lower.unwrap_or(0.0);
    let d2 = predicted_upper.unwrap_or(0.0);
    let within_relaxed_bounds = counts.iter().zip(groups).all(|(&c, g)| {
        let c = c as f64;
        c >= (1.0 - d1) * g.lower as f64 - 1e-9 && c <= (1.0 + d2) * g.upper as f64 + 1e-9
    });
    ViolationReport {
        feasible: s.is_feasible(inst),
        counts,
        lower_factors,
        upper_factors,
        max_lower,
        max_upper,
        predicted_lower,
        predicted_upper,
        in_regime,
        within_relaxed_bounds,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::instance::Group;
    use crate::scores::{Rule, Scorer};
    use rand::Rng;

    fn pairs_instance() -> Instance {
        let g = Group {
            members: vec![0, 1],
            lower: 1,
            upper: 1,
        };
        Instance::new(4, 2, vec![], vec![g]).unwrap()
    }

    #[test]
    fn integral_points_are_unchanged() {
        let inst = pairs_instance();
        let y = FractionalPoint::indicator(4, &[1, 3]);
        assert_eq!(degree_one_round(&y, &inst, 5).unwrap().members(), &[1, 3]);
        assert_eq!(swap_round(&y, &inst, 5).unwrap().members(), &[1, 3]);
    }

    #[test]
    fn degree_one_two_outcome_frequency() {
        let g = Group {
            members: vec![0, 1],
            lower: 1,
            upper: 1,
        };
        let inst = Instance::new(3, 1, vec![], vec![g]).unwrap();
        let y = FractionalPoint::new(vec![0.5, 0.5, 0.0]).unwrap();
        let trials = 10_000;
        let hits = (0..trials)
            .filter(|&s| degree_one_round(&y, &inst, s).unwrap().contains(0))
            .count();
        let freq = hits as f64 / trials as f64;
        assert!((freq - 0.5).abs() < 0.02, "{freq}");
    }

    #[test]
    fn degree_one_rejects_overlap_and_points_outside() {
        let inst = pairs_instance();
        let outside = FractionalPoint::new(vec![1.0, 1.0, 0.0, 0.0]).unwrap();
        assert!(degree_one_round(&outside, &inst, 0).is_err());
        let overlapping = inst
            .with_groups(vec![
                Group {
                    members: vec![0, 1],
                    lower: 0,
                    upper: 2,
                },
                Group {
                    members: vec![1, 2],
                    lower: 0,
                    upper: 2,
                },
            ])
            .unwrap();
        let y = FractionalPoint::new(vec![0.5; 4]).unwrap();
        assert!(matches!(
            degree_one_round(&y, &overlapping, 0),
            Err(Error::Unsupported(_))
        ));
    }

    #[test]
    fn degree_one_always_feasible_and_unbiased() {
        let groups = vec![
            Group {
                members: vec![0, 1, 2],
                lower: 1,
                upper: 2,
            },
            Group {
                members: vec![3, 4, 5, 6],
                lower: 1,
                upper: 1,
            },
        ];
        let inst = Instance::new(8, 3, vec![], groups).unwrap();
        let y = vec![0.6, 0.5, 0.3, 0.2, 0.3, 0.25, 0.25, 0.6];
        let fp = FractionalPoint::new(y.clone()).unwrap();
        let trials = 10_000u64;
        let mut freq = [0usize; 8];
        for s in 0..trials {
            let c = degree_one_round(&fp, &inst, s).unwrap();
            assert!(c.is_feasible(&inst));
            for &i in c.members() {
                freq[i] += 1;
            }
        }
        for i in 0..8 {
            let f = freq[i] as f64 / trials as f64;
            let se = (y[i] * (1.0 - y[i]) / trials as f64).sqrt();
            assert!(
                (f - y[i]).abs() <= 3.0 * se + 1e-12,
                "candidate {i}: {f} vs {}",
                y[i]
            );
        }
    }

    #[test]
    fn swap_round_marginals() {
        let inst = Instance::new(4, 2, vec![], vec![]).unwrap();
        let y = FractionalPoint::new(vec![0.5; 4]).unwrap();
        let trials = 10_000u64;
        let mut freq = [0usize; 4];
        for s in 0..trials {
            for &i in swap_round(&y, &inst, s).unwrap().members() {
                freq[i] += 1;
            }
        }
        for f in freq {
            assert!((f as f64 / trials as f64 - 0.5).abs() < 0.02);
        }
    }

    #[test]
    fn swap_round_rejects_wrong_sum() {
        let inst = Instance::new(4, 2, vec![], vec![]).unwrap();
        let y = FractionalPoint::new(vec![0.5, 0.5, 0.5, 0.0]).unwrap();
        assert!(swap_round(&y, &inst, 0).is_err());
    }

    #[test]
    fn caratheodory_reconstructs_point() {
        let mut rng = seed::rng(8);
        for _ in 0..200 {
            let m = rng.gen_range(2..12);
            let k = rng.gen_range(1..=m);
            // random point with Σ = k by capped scaling
            let mut y: Vec<f64> = (0..m).map(|_| rng.gen::<f64>()).collect();
            for _ in 0..100 {
                let s: f64 = y.iter().sum();
                let f = k as f64 / s;
                y.iter_mut().for_each(|v| *v = (*v * f).min(1.0));
            }
            let s: f64 = y.iter().sum();
            if (s - k as f64).abs() > 1e-9 {
                continue;
            }
            let parts = caratheodory(&y, k);
            assert!(parts.len() <= m + 1);
            let mut back = vec![0.0; m];
            let mut total = 0.0;
            for (w, b) in &parts {
                assert_eq!(b.len(), k);
                total += w;
                for &c in b {
                    back[c] += w;
                }
            }
            assert!((total - 1.0).abs() < 1e-9);
            for i in 0..m {
                assert!((back[i] - y[i]).abs() < 1e-8);
            }
        }
    }

    #[test]
    fn partial_rounding_sizes() {
        let y = vec![0.45, 0.45, 0.9, 0.9];
        for s in 0..200 {
            let out = swap_round_partial(&y, s);
            assert!(out.len() == 3 || out.len() == 2, "{out:?}");
        }
    }

    #[test]
    fn expected_score_dominates_multilinear_value() {
        let mut rng = seed::rng(21);
        let m = 10;
        let prefs: Vec<Vec<usize>> = (0..30)
            .map(|_| {
                let mut l: Vec<usize> = (0..m).collect();
                for i in (1..m).rev() {
                    l.swap(i, rng.gen_range(0..=i));
                }
                l
            })
            .collect();
        let groups = vec![
            Group {
                members: vec![0, 1, 2, 3, 4],
                lower: 1,
                upper: 2,
            },
            Group {
                members: vec![5, 6, 7, 8, 9],
                lower: 1,
                upper: 2,
            },
        ];
        let inst = Instance::new(m, 3, prefs, groups).unwrap();
        let scorer = Scorer::new(&Rule::BetaCc, &inst).unwrap();
        let y =
            FractionalPoint::new(vec![0.4, 0.3, 0.2, 0.1, 0.5, 0.3, 0.3, 0.3, 0.3, 0.3]).unwrap();
        let fy = scorer.multilinear_exact(&y).unwrap();
        for round in [degree_one_round, swap_round] {
            let trials = 10_000u64;
            let vals: Vec<f64> = (0..trials)
                .map(|s| scorer.eval(round(&y, &inst, s).unwrap().members()))
                .collect();
            let mean = vals.iter().sum::<f64>() / trials as f64;
            let var = vals.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (trials - 1) as f64;
            let se = (var / trials as f64).sqrt();
            assert!(mean >= fy - 3.0 * se, "{mean} vs {fy}");
        }
    }

    #[test]
    fn report_factors() {
        let groups = vec![
            Group {
                members: vec![0, 1, 2, 3],
                lower: 0,
                upper: 1,
            },
            Group {
                members: vec![4, 5],
                lower: 2,
                upper: 2,
            },
        ];
        let inst = Instance::new(6, 2, vec![], groups).unwrap();
        let ok = Committee::new(&inst, vec![4, 5]).unwrap();
        let r = violation_report(&ok, &inst);
        assert!(r.feasible);
        assert!(r
            .lower_factors
            .iter()
            .chain(&r.upper_factors)
            .all(|&f| f == 0.0));
        let bad = Committee::new(&inst, vec![0, 1]).unwrap();
        let r = violation_report(&bad, &inst);
        assert_eq!(r.upper_factors[0], 1.0);
        assert_eq!(r.lower_factors[1], 1.0);
        assert!(!r.feasible);
        let expect = 2.0 * 2f64.ln().sqrt();
        assert!((r.predicted_upper.unwrap() - expect).abs() < 1e-12);
        assert!(!r.in_regime);
        assert!(r.to_json()["counts"].is_array());
    }
}
