//! Bound builders for common fairness notions.
//!
//! `voter_counts[i]` is the number of voters associated with group `i`
//! (for instance, voters living in the same region). Voter-share notions
//! require the groups to be pairwise disjoint.

use crate::error::{Error, Result};
use crate::instance::Instance;

#[derive(Clone, Debug, PartialEq)]
pub enum FairnessNotion {
    /// `| |S∩P_i|/k − n_i/n | <= ξ_i` (voter shares).
    Parity(Vec<f64>),
    /// `| |S∩P_i|/k − |P_i|/m | <= ξ_i` (candidate shares).
    Diversity(Vec<f64>),
    /// `⌊k n_i / n⌋ <= |S∩P_i| <= ⌈k n_i / n⌉`.
    FullyProportional,
    /// Penrose square-root lower bounds, no upper bound.
    SquareRoot,
    /// `⌊k n_i / n⌋` lower bounds, no upper bound.
    LowerQuota,
    /// Per group, `[min, max]` of the voter- and candidate-proportional seat
    /// counts (each apportioned by largest remainder).
    RelaxRange,
    /// Lower bound `min(⌊k n_i/n⌋, ⌊k √n_i / Σ√n_j⌋)`, no upper bound.
    Flexible,
}

impl FairnessNotion {
    fn needs_voters(&self) -> bool {
        !matches!(self, FairnessNotion::Diversity(_))
    }

    fn needs_partition(&self) -> bool {
        !matches!(self, FairnessNotion::Diversity(_))
    }
}

/// Largest-remainder apportionment of `k` seats by `weights`. Ties in the
/// remainder go to the lower index.
pub fn largest_remainder(weights: &[f64], k: usize) -> Vec<usize> {
    let total: f64 = weights.iter().sum();
    if weights.is_empty() || total <= 0.0 {
        return vec![0; weights.len()];
    }
    let quotas: Vec<f64> = weights.iter().map(|w| k as f64 * w / total).collect();
    // guard against 2.9999999 from floating division of exact shares
    let mut seats: Vec<usize> = quotas.iter().map(|q| (q + 1e-9).floor() as usize).collect();
    let assigned: usize = seats.iter().sum();
    let mut order: Vec<usize> = (0..weights.len()).collect();
    let rem = |i: usize| quotas[i] - seats[i] as f64;
    order.sort_by(|&a, &b| rem(b).total_cmp(&rem(a)).then(a.cmp(&b)));
    for &i in order.iter().take(k.saturating_sub(assigned)) {
        seats[i] += 1;
    }
    seats
}

fn floor_div(a: usize, b: usize) -> usize {
    a / b
}

fn ceil_div(a: usize, b: usize) -> usize {
    a.div_ceil(b)
}

/// Widest integral `[ℓ, u]` with `|ℓ/k − share| <= ξ` and `|u/k − share| <= ξ`.
fn tolerance_band(k: usize, share: f64, xi: f64, size: usize) -> (usize, usize) {
    let kf = k as f64;
    let lo = (kf * (share - xi) - 1e-9).ceil().max(0.0) as usize;
    let hi = (kf * (share + xi) + 1e-9).floor().max(0.0) as usize;
    // an upper of k or more never binds
    let hi = if hi >= k { size } else { hi.min(size) };
    (lo, hi)
}

/// Bounds `(ℓ_i, u_i)` per group for `notion`.
pub fn bounds_from_notion(
    inst: &Instance,
    notion: &FairnessNotion,
    voter_counts: Option<&[usize]>,
) -> Result<Vec<(usize, usize)>> {
    let p = inst.p();
    let k = inst.k();
    if notion.needs_partition() && inst.delta() > 1 {
        return Err(Error::InvalidInstance(
            "this fairness notion requires disjoint groups, but groups overlap".into(),
        ));
    }
    let counts: &[usize] = if notion.needs_voters() {
        let c = voter_counts.ok_or_else(|| {
            Error::InvalidInstance("this fairness notion needs voter counts per group".into())
        })?;
        if c.len() != p {
            return Err(Error::InvalidInstance(format!(
                "expected {p} voter counts, got {}",
                c.len()
            )));
        }
        if c.iter().sum::<usize>() == 0 {
            return Err(Error::InvalidInstance("voter counts sum to zero".into()));
        }
        c
    } else {
        &[]
    };
    let n: usize = counts.iter().sum();
    let sizes: Vec<usize> = inst.groups().iter().map(|g| g.len()).collect();
    let xi_for = |xi: &[f64], i: usize| -> Result<f64> {
        let v = if xi.len() == 1 {
            xi[0]
        } else {
            *xi.get(i).ok_or_else(|| {
                Error::InvalidInstance(format!(
                    "expected 1 or {p} tolerance values, got {}",
                    xi.len()
                ))
            })?
        };
        if !(0.0..=1.0).contains(&v) {
            return Err(Error::InvalidInstance(format!(
                "tolerance {v} outside [0,1]"
            )));
        }
        Ok(v)
    };
    let sqrt_lower = |i: usize| -> usize {
        let total: f64 = counts.iter().map(|&c| (c as f64).sqrt()).sum();
        (k as f64 * (counts[i] as f64).sqrt() / total + 1e-9).floor() as usize
    };

    (0..p)
        .map(|i| {
            Ok(match notion {
                FairnessNotion::Parity(xi) => {
                    tolerance_band(k, counts[i] as f64 / n as f64, xi_for(xi, i)?, sizes[i])
                }
                FairnessNotion::Diversity(xi) => tolerance_band(
                    k,
                    sizes[i] as f64 / inst.m() as f64,
                    xi_for(xi, i)?,
                    sizes[i],
                ),
                FairnessNotion::FullyProportional => (
                    floor_div(k * counts[i], n),
                    ceil_div(k * counts[i], n).min(sizes[i]),
                ),
                FairnessNotion::SquareRoot => (sqrt_lower(i), sizes[i]),
                FairnessNotion::LowerQuota => (floor_div(k * counts[i], n), sizes[i]),
                FairnessNotion::Flexible => {
                    (floor_div(k * counts[i], n).min(sqrt_lower(i)), sizes[i])
                }
                FairnessNotion::RelaxRange => {
                    let by_voters =
                        largest_remainder(&counts.iter().map(|&c| c as f64).collect::<Vec<_>>(), k);
                    let by_cands =
                        largest_remainder(&sizes.iter().map(|&c| c as f64).collect::<Vec<_>>(), k);
                    let (a, b) = (by_voters[i], by_cands[i]);
                    (a.min(b), a.max(b).min(sizes[i]))
                }
            })
        })
        .collect()
}
