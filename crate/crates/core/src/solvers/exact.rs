//! Exact solvers for modular rules: disjoint groups by a sort, `Δ = 2` by
//! perfect b-matching.

use super::bmatching::delta2_select;
use super::{integer_weights, Guarantee, Solution};
use crate::error::{Error, Result};
use crate::instance::{Committee, Instance};
use crate::polytope::instance_partition_greedy;
use crate::scores::{Rule, Scorer};

/// Optimal committee for per-candidate weights when `Δ <= 1`:
/// the `ℓ_i` heaviest of each group, then the heaviest remaining candidates
/// whose group still has room.
pub fn modular_delta1(weights: &[f64], inst: &Instance) -> Result<Committee> {
    if inst.delta() > 1 {
        return Err(Error::Unsupported(format!(
            "modular-delta1 needs Δ <= 1, got Δ = {}",
            inst.delta()
        )));
    }
    if weights.len() != inst.m() {
        return Err(Error::InvalidInstance(format!(
            "{} weights for {} candidates",
            weights.len(),
            inst.m()
        )));
    }
    let members = instance_partition_greedy(inst, weights)
        .ok_or_else(|| Error::Infeasible("group bounds cannot be met with k members".into()))?;
    Committee::new(inst, members)
}

/// Optimal committee for integer weights when `Δ <= 2`.
pub fn modular_delta2(weights: &[i64], inst: &Instance) -> Result<Committee> {
    if weights.len() != inst.m() {
        return Err(Error::InvalidInstance(format!(
            "{} weights for {} candidates",
            weights.len(),
            inst.m()
        )));
    }
    Committee::new(inst, delta2_select(inst, weights)?)
}

/// Optimal SNTV committee when `Δ <= 2`.
pub fn sntv_delta2(inst: &Instance) -> Result<Committee> {
    let scorer = Scorer::new(&Rule::Sntv, inst)?;
    modular_delta2(&integer_weights(&scorer)?, inst)
}

fn modular_weights<'s>(scorer: &'s Scorer<'_>) -> Result<&'s [f64]> {
    scorer.weights().ok_or_else(|| {
        Error::Unsupported("this solver needs a modular rule (sntv, bloc, k-borda)".into())
    })
}

pub(crate) fn modular_delta1_solution(scorer: &Scorer<'_>, seed: u64) -> Result<Solution> {
    let c = modular_delta1(modular_weights(scorer)?, scorer.instance())?;
    Ok(Solution::new(
        scorer,
        c,
        Guarantee::Exact,
        "modular-delta1",
        seed,
    ))
}

pub(crate) fn modular_delta2_solution(scorer: &Scorer<'_>, seed: u64) -> Result<Solution> {
    modular_weights(scorer)?;
    let c = modular_delta2(&integer_weights(scorer)?, scorer.instance())?;
    Ok(Solution::new(
        scorer,
        c,
        Guarantee::Exact,
        "sntv-delta2",
        seed,
    ))
}
