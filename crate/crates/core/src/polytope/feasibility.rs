//! Does any size-`k` committee satisfy all bounds?
//!
//! `Δ <= 1` is decided by counting, `Δ = 2` by a zero-weight perfect
//! b-matching. For `Δ >= 3` the problem is NP-hard: we try constructive
//! sufficient conditions, the LP relaxation, randomized search and finally an
//! exhaustive search under a deadline, answering `Unknown` when time runs out.

use std::time::{Duration, Instant};

use rand::seq::SliceRandom;
use serde_json::{json, Value};

use super::{instance_partition_greedy, Polytope};
use crate::error::Error;
use crate::instance::{Committee, Instance};
use crate::seed::{self, STREAM_FEASIBILITY};
use crate::solvers::bmatching::delta2_select;

#[derive(Clone, Debug)]
pub struct FeasibilityOptions {
    pub deadline: Duration,
    pub seed: u64,
    /// Randomized repair attempts before the exhaustive search.
    pub samples: usize,
}

impl Default for FeasibilityOptions {
    fn default() -> Self {
        Self {
            deadline: Duration::from_secs(2),
            seed: 0,
            samples: 2000,
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub enum FeasibilityStatus {
    Feasible(Committee),
    Infeasible(String),
    Unknown(String),
}

/// Which sufficient conditions for feasibility hold.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct ConditionFlags {
    /// `k >= 100 ln p`
    pub k_large: bool,
    /// `ℓ_i <= k(|P_i|/m − c)` and `u_i >= k(|P_i|/m + c)` with `c = √(3 ln p / k)`
    pub proportional_slack: bool,
    /// enough candidates carrying only one type
    pub single_type: bool,
    /// no binding uppers and `Σℓ_i <= k`
    pub bounded_parameter: bool,
}

#[derive(Clone, Debug)]
pub struct FeasibilityReport {
    pub status: FeasibilityStatus,
    pub delta: usize,
    /// Which step settled the answer.
    pub method: &'static str,
    pub conditions: ConditionFlags,
    /// The slack constant `√(3 ln p / k)`.
    pub slack_c: f64,
    /// Largest `c` for which the proportional slack inequalities hold.
    pub observed_slack: Option<f64>,
    /// Union bound `2p·exp(−2c²k)` on a uniform committee being infeasible,
    /// at the observed slack. Reported, not asserted.
    pub union_bound: Option<f64>,
}

impl FeasibilityReport {
    pub fn witness(&self) -> Option<&Committee> {
        match &self.status {
            FeasibilityStatus::Feasible(c) => Some(c),
            _ => None,
        }
    }

    pub fn is_feasible(&self) -> bool {
        matches!(self.status, FeasibilityStatus::Feasible(_))
    }

    pub fn is_infeasible(&self) -> bool {
        matches!(self.status, FeasibilityStatus::Infeasible(_))
    }

    pub fn to_json(&self) -> Value {
        let (status, witness, reason) = match &self.status {
            FeasibilityStatus::Feasible(c) => ("feasible", json!(c.one_based()), Value::Null),
            FeasibilityStatus::Infeasible(r) => ("infeasible", Value::Null, json!(r)),
            FeasibilityStatus::Unknown(r) => ("unknown", Value::Null, json!(r)),
        };
        json!({
            "status": status,
            "witness": witness,
            "reason": reason,
            "delta": self.delta,
            "method": self.method,
            "conditions": {
                "k_large": self.conditions.k_large,
                "proportional_slack": self.conditions.proportional_slack,
                "single_type": self.conditions.single_type,
                "bounded_parameter": self.conditions.bounded_parameter,
            },
            "slack_c": self.slack_c,
            "observed_slack": self.observed_slack,
            "union_bound": self.union_bound,
        })
    }
}

fn committee(inst: &Instance, members: Vec<usize>) -> FeasibilityStatus {
    let c = Committee::new(inst, members).expect("witness has k distinct members");
    debug_assert!(c.is_feasible(inst));
    FeasibilityStatus::Feasible(c)
}

/// Candidates whose only group is `i`, per group.
fn single_type_pools(inst: &Instance) -> Vec<Vec<usize>> {
    let mut pools = vec![Vec::new(); inst.p()];
    for c in 0..inst.m() {
        if let [g] = inst.groups_of(c) {
            pools[*g].push(c);
        }
    }
    pools
}

fn single_type_witness(inst: &Instance) -> Option<Vec<usize>> {
    let pools = single_type_pools(inst);
    let groups = inst.groups();
    if pools
        .iter()
        .zip(groups)
        .any(|(pool, g)| pool.len() < g.lower)
        || groups.iter().map(|g| g.lower).sum::<usize>() > inst.k()
    {
        return None;
    }
    if pools
        .iter()
        .zip(groups)
        .map(|(pool, g)| pool.len().min(g.upper))
        .sum::<usize>()
        < inst.k()
    {
        return None;
    }
    let mut chosen: Vec<usize> = Vec::new();
    let mut taken = vec![0usize; inst.p()];
    for (i, pool) in pools.iter().enumerate() {
        chosen.extend_from_slice(&pool[..groups[i].lower]);
        taken[i] = groups[i].lower;
    }
    for (i, pool) in pools.iter().enumerate() {
        let room = pool.len().min(groups[i].upper) - taken[i];
        let want = (inst.k() - chosen.len()).min(room);
        chosen.extend_from_slice(&pool[taken[i]..taken[i] + want]);
    }
    (chosen.len() == inst.k() && inst.is_feasible(&chosen)).then_some(chosen)
}

fn bounded_parameter_witness(inst: &Instance) -> Option<Vec<usize>> {
    if !inst.only_lower_bounds() || inst.groups().iter().map(|g| g.lower).sum::<usize>() > inst.k()
    {
        return None;
    }
    let mut chosen = vec![false; inst.m()];
    let mut counts = vec![0usize; inst.p()];
    let mut size = 0;
    for (i, g) in inst.groups().iter().enumerate() {
        for &c in &g.members {
            if counts[i] >= g.lower {
                break;
            }
            if !chosen[c] {
                chosen[c] = true;
                size += 1;
                for &j in inst.groups_of(c) {
                    counts[j] += 1;
                }
            }
        }
    }
    for c in 0..inst.m() {
        if size == inst.k() {
            break;
        }
        if !chosen[c] {
            chosen[c] = true;
            size += 1;
        }
    }
    let members: Vec<usize> = (0..inst.m()).filter(|&c| chosen[c]).collect();
    inst.is_feasible(&members).then_some(members)
}

fn conditions(inst: &Instance) -> (ConditionFlags, f64, Option<f64>, Option<f64>) {
    let p = inst.p();
    let k = inst.k() as f64;
    let m = inst.m() as f64;
    let lnp = if p > 0 { (p as f64).ln() } else { 0.0 };
    let slack_c = (3.0 * lnp / k).sqrt();
    let observed = inst
        .groups()
        .iter()
        .map(|g| {
            let share = g.len() as f64 / m;
            let lo = share - g.lower as f64 / k;
            // an upper equal to |P| never binds
            let hi = if g.upper >= g.len() {
                f64::INFINITY
            } else {
                g.upper as f64 / k - share
            };
            lo.min(hi)
        })
        .reduce(f64::min);
    let union_bound = observed
        .filter(|c| *c > 0.0)
        .map(|c| (2.0 * p as f64 * (-2.0 * c * c * k).exp()).min(1.0));
    let flags = ConditionFlags {
        k_large: k >= 100.0 * lnp,
        proportional_slack: observed.is_some_and(|c| c >= slack_c),
        single_type: single_type_witness(inst).is_some(),
        bounded_parameter: bounded_parameter_witness(inst).is_some(),
    };
    (flags, slack_c, observed, union_bound)
}

/// Shuffled greedy: first candidates that reduce unmet lower demand, then any
/// candidate that keeps every upper bound.
fn random_repair(inst: &Instance, rng: &mut seed::Rng, order: &mut [usize]) -> Option<Vec<usize>> {
    order.shuffle(rng);
    let mut counts = vec![0usize; inst.p()];
    let mut chosen = vec![false; inst.m()];
    let mut size = 0;
    let groups = inst.groups();
    let fits = |c: usize, counts: &[usize]| {
        inst.groups_of(c)
            .iter()
            .all(|&j| counts[j] < groups[j].upper)
    };
    for pass in 0..2 {
        for &c in order.iter() {
            if size == inst.k() {
                break;
            }
            if chosen[c] || !fits(c, &counts) {
                continue;
            }
            let helps = inst
                .groups_of(c)
                .iter()
                .any(|&j| counts[j] < groups[j].lower);
            if pass == 0 && !helps {
                continue;
            }
            chosen[c] = true;
            size += 1;
            for &j in inst.groups_of(c) {
                counts[j] += 1;
            }
        }
    }
    let members: Vec<usize> = (0..inst.m()).filter(|&c| chosen[c]).collect();
    inst.is_feasible(&members).then_some(members)
}

enum Search {
    Found(Vec<usize>),
    Exhausted,
    TimedOut,
}

struct Dfs<'a> {
    inst: &'a Instance,
    counts: Vec<usize>,
    /// members of each group not yet decided
    remaining: Vec<usize>,
    stack: Vec<usize>,
    nodes: u64,
    deadline: Instant,
    timed_out: bool,
}

impl Dfs<'_> {
    fn go(&mut self, c: usize) -> bool {
        self.nodes += 1;
        if self.nodes.is_multiple_of(4096) && Instant::now() >= self.deadline {
            self.timed_out = true;
        }
        if self.timed_out {
            return false;
        }
        let inst = self.inst;
        let k = inst.k();
        if self.stack.len() == k {
            return self
                .counts
                .iter()
                .zip(inst.groups())
                .all(|(&n, g)| n >= g.lower);
        }
        if inst.m() - c < k - self.stack.len() {
            return false;
        }
        let delta = inst.delta().max(1);
        let mut deficit = 0;
        for (j, g) in inst.groups().iter().enumerate() {
            if self.counts[j] + self.remaining[j] < g.lower {
                return false;
            }
            deficit += g.lower.saturating_sub(self.counts[j]);
        }
        if deficit.div_ceil(delta) > k - self.stack.len() {
            return false;
        }

        let gs = inst.groups_of(c);
        for &j in gs {
            self.remaining[j] -= 1;
        }
        if gs.iter().all(|&j| self.counts[j] < inst.groups()[j].upper) {
            for &j in gs {
                self.counts[j] += 1;
            }
            self.stack.push(c);
            if self.go(c + 1) {
                return true;
            }
            self.stack.pop();
            for &j in gs {
                self.counts[j] -= 1;
            }
        }
        if self.go(c + 1) {
            return true;
        }
        for &j in gs {
            self.remaining[j] += 1;
        }
        false
    }
}

fn exhaustive(inst: &Instance, deadline: Instant) -> Search {
    let mut dfs = Dfs {
        inst,
        counts: vec![0; inst.p()],
        remaining: inst.groups().iter().map(|g| g.len()).collect(),
        stack: Vec::new(),
        nodes: 0,
        deadline,
        timed_out: false,
    };
    if dfs.go(0) {
        Search::Found(dfs.stack)
    } else if dfs.timed_out {
        Search::TimedOut
    } else {
        Search::Exhausted
    }
}

/// Decide feasibility of `inst`; see the module docs for the strategy.
pub fn feasibility_exact(inst: &Instance, opts: &FeasibilityOptions) -> FeasibilityReport {
    let start = Instant::now();
    let delta = inst.delta();
    let (flags, slack_c, observed_slack, union_bound) = conditions(inst);
    let report = |status, method| FeasibilityReport {
        status,
        delta,
        method,
        conditions: flags,
        slack_c,
        observed_slack,
        union_bound,
    };

    if delta <= 1 {
        let zero = vec![0.0; inst.m()];
        return match instance_partition_greedy(inst, &zero) {
            Some(s) => report(committee(inst, s), "counting"),
            None => {
                let lower: usize = inst.groups().iter().map(|g| g.lower).sum();
                let grouped: usize = inst.groups().iter().map(|g| g.len()).sum();
                let cap: usize =
                    inst.groups().iter().map(|g| g.upper).sum::<usize>() + inst.m() - grouped;
                report(
                    FeasibilityStatus::Infeasible(format!(
                        "need Σℓ = {lower} <= k = {} <= {cap} (uppers plus ungrouped candidates)",
                        inst.k()
                    )),
                    "counting",
                )
            }
        };
    }
    if delta == 2 {
        let zero = vec![0i64; inst.m()];
        return match delta2_select(inst, &zero) {
            Ok(s) => report(committee(inst, s), "b-matching"),
            Err(Error::NoPerfectMatching) => report(
                FeasibilityStatus::Infeasible("no perfect b-matching exists".into()),
                "b-matching",
            ),
            Err(e) => report(FeasibilityStatus::Infeasible(e.to_string()), "b-matching"),
        };
    }

    if let Some(s) = single_type_witness(inst) {
        return report(committee(inst, s), "single-type");
    }
    if let Some(s) = bounded_parameter_witness(inst) {
        return report(committee(inst, s), "bounded-parameter");
    }
    if let Err(Error::EmptyPolytope) =
        Polytope::from_instance(inst).linear_maximize(&vec![0.0; inst.m()])
    {
        return report(
            FeasibilityStatus::Infeasible("the LP relaxation is already empty".into()),
            "lp-relaxation",
        );
    }
    let deadline = start + opts.deadline;
    let mut rng = seed::child_rng(opts.seed, STREAM_FEASIBILITY, 0);
    let mut order: Vec<usize> = (0..inst.m()).collect();
    for i in 0..opts.samples {
        if i % 64 == 0 && Instant::now() >= deadline {
            break;
        }
        if let Some(s) = random_repair(inst, &mut rng, &mut order) {
            return report(committee(inst, s), "random-search");
        }
    }
    match exhaustive(inst, deadline) {
        Search::Found(s) => report(committee(inst, s), "exhaustive-search"),
        Search::Exhausted => report(
            FeasibilityStatus::Infeasible("exhaustive search found no feasible committee".into()),
            "exhaustive-search",
        ),
        Search::TimedOut => report(
            FeasibilityStatus::Unknown(format!("search deadline of {:?} reached", opts.deadline)),
            "exhaustive-search",
        ),
    }
}
