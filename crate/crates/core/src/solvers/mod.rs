//! End-to-end solvers and the dispatcher that picks one by instance shape.
//!
//! Every solver returns a [`Solution`] whose score is recomputed from the
//! committee. Greedy choices break ties toward the lower candidate index.

pub mod bmatching;
mod brute;
mod constant_p;
mod exact;
mod greedy;
mod pipeline;

pub use brute::{brute_force, DEFAULT_BRUTE_CAP};
pub use constant_p::{available_vectors, constant_p, TypeClasses};
pub use exact::{modular_delta1, modular_delta2, sntv_delta2};
pub use greedy::{greedy_extendible, lower_only, min_lower_cover};
pub use pipeline::{cg_pipeline, shrunk_cg};

use std::time::{Duration, Instant};

use serde_json::{json, Map, Value};

use crate::error::{Error, Result};
use crate::instance::{Committee, Instance};
use crate::polytope::{feasibility_exact, FeasibilityOptions, FeasibilityStatus};
use crate::rounding::violation_report;
use crate::scores::{Rule, Scorer};

pub const ONE_MINUS_INV_E: f64 = 1.0 - 1.0 / std::f64::consts::E;

/// What the producing algorithm promises about the committee.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Guarantee {
    Exact,
    /// Score at least `r·OPT` (in expectation for randomized pipelines),
    /// all bounds satisfied.
    Ratio(f64),
    /// Score at least `ratio·OPT`; upper bounds may be exceeded by the factor
    /// `violation_cap` and lower bounds may fall short.
    Bicriterion {
        ratio: f64,
        violation_cap: f64,
    },
}

impl Guarantee {
    pub fn to_json(&self) -> Value {
        match *self {
            Guarantee::Exact => json!({"kind": "exact"}),
            Guarantee::Ratio(r) => json!({"kind": "ratio", "ratio": r}),
            Guarantee::Bicriterion {
                ratio,
                violation_cap,
            } => {
                json!({"kind": "bicriterion", "ratio": ratio, "violation_cap": violation_cap})
            }
        }
    }
}

#[derive(Clone, Debug)]
pub struct Solution {
    pub committee: Committee,
    /// Always `eval_score(rule, inst, committee)`.
    pub score: f64,
    pub guarantee: Guarantee,
    pub solver: String,
    pub runtime: Duration,
    pub seed: u64,
    /// Solver-specific diagnostics (cover sizes, vector counts, ...).
    pub info: Map<String, Value>,
}

impl Solution {
    pub(crate) fn new(
        scorer: &Scorer<'_>,
        committee: Committee,
        guarantee: Guarantee,
        solver: &str,
        seed: u64,
    ) -> Self {
        let score = scorer.eval(committee.members());
        Self {
            committee,
            score,
            guarantee,
            solver: solver.to_string(),
            runtime: Duration::ZERO,
            seed,
            info: Map::new(),
        }
    }

    pub(crate) fn with_info(mut self, key: &str, value: Value) -> Self {
        self.info.insert(key.to_string(), value);
        self
    }

    pub fn to_json(&self, inst: &Instance) -> Value {
        json!({
            "committee": self.committee.one_based(),
            "score": self.score,
            "guarantee": self.guarantee.to_json(),
            "solver": self.solver,
            "seed": self.seed,
            "runtime_ms": self.runtime.as_secs_f64() * 1e3,
            "feasible": self.committee.is_feasible(inst),
            "violation": violation_report(&self.committee, inst).to_json(),
            "info": self.info,
        })
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Strategy {
    Auto,
    BruteForce,
    ModularDelta1,
    /// Exact modular solver for `Δ <= 2` through b-matching.
    ModularDelta2,
    ConstantP,
    GreedyExtendible,
    LowerOnly,
    /// Continuous greedy followed by degree-one or swap rounding.
    ContinuousGreedy,
    ShrunkCg,
}

impl Strategy {
    pub const ALL: [Strategy; 9] = [
        Strategy::Auto,
        Strategy::BruteForce,
        Strategy::ModularDelta1,
        Strategy::ModularDelta2,
        Strategy::ConstantP,
        Strategy::GreedyExtendible,
        Strategy::LowerOnly,
        Strategy::ContinuousGreedy,
        Strategy::ShrunkCg,
    ];

    pub fn name(&self) -> &'static str {
        match self {
            Strategy::Auto => "auto",
            Strategy::BruteForce => "brute-force",
            Strategy::ModularDelta1 => "modular-delta1",
            Strategy::ModularDelta2 => "sntv-delta2",
            Strategy::ConstantP => "constant-p",
            Strategy::GreedyExtendible => "greedy-extendible",
            Strategy::LowerOnly => "lower-only",
            Strategy::ContinuousGreedy => "cg",
            Strategy::ShrunkCg => "shrunk-cg",
        }
    }

    pub fn from_name(s: &str) -> Result<Self> {
        let norm = s.trim().to_ascii_lowercase().replace('_', "-");
        let alias = match norm.as_str() {
            "brute" => "brute-force",
            "modular-delta2" | "bmatching" => "sntv-delta2",
            "continuous-greedy" => "cg",
            other => other,
        };
        Self::ALL
            .iter()
            .copied()
            .find(|st| st.name() == alias)
            .ok_or_else(|| Error::Unsupported(format!("unknown strategy {s:?}")))
    }
}

#[derive(Clone, Debug)]
pub struct SolveOptions {
    pub strategy: Strategy,
    pub seed: u64,
    /// `constant-p` is tried automatically when `p` is at most this.
    pub p_limit: usize,
    /// Automatic `constant-p` for non-modular rules only when the number of
    /// available vectors is at most this (each costs a continuous greedy run).
    pub submodular_vector_cap: usize,
    /// Hard cap on enumerated available vectors.
    pub vector_cap: usize,
    pub brute_cap: u128,
    /// Continuous greedy steps; `None` means `max(10k, 100)`.
    pub steps: Option<usize>,
    /// Independent roundings per fractional point; the best is kept.
    pub rounds: usize,
    pub shrink_eps: f64,
    pub feasibility: FeasibilityOptions,
}

impl Default for SolveOptions {
    fn default() -> Self {
        Self {
            strategy: Strategy::Auto,
            seed: 0,
            p_limit: 6,
            submodular_vector_cap: 512,
            vector_cap: 200_000,
            brute_cap: DEFAULT_BRUTE_CAP,
            steps: None,
            rounds: 16,
            shrink_eps: 0.1,
            feasibility: FeasibilityOptions::default(),
        }
    }
}

impl SolveOptions {
    pub fn with_seed(seed: u64) -> Self {
        Self {
            seed,
            ..Self::default()
        }
    }

    fn feasibility_opts(&self) -> FeasibilityOptions {
        FeasibilityOptions {
            seed: self.seed,
            ..self.feasibility.clone()
        }
    }
}

/// A feasible committee for pipelines that top up from one.
pub(crate) fn witness(inst: &Instance, opts: &SolveOptions) -> Result<Committee> {
    let report = feasibility_exact(inst, &opts.feasibility_opts());
    match report.status {
        FeasibilityStatus::Feasible(c) => Ok(c),
        FeasibilityStatus::Infeasible(r) => Err(Error::Infeasible(r)),
        FeasibilityStatus::Unknown(r) => Err(Error::FeasibilityUnknown(r)),
    }
}

/// Integral modular weights for the b-matching reduction.
pub(crate) fn integer_weights(scorer: &Scorer<'_>) -> Result<Vec<i64>> {
    let w = scorer
        .weights()
        .ok_or_else(|| Error::Unsupported("rule is not modular".into()))?;
    w.iter()
        .map(|&x| {
            let r = x.round();
            if (x - r).abs() > 1e-9 || r.abs() > 1e15 {
                Err(Error::Unsupported(format!(
                    "weight {x} is not a manageable integer"
                )))
            } else {
                Ok(r as i64)
            }
        })
        .collect()
}

fn infeasible_from(e: Error) -> Error {
    match e {
        Error::NoPerfectMatching => {
            Error::Infeasible("no perfect b-matching: no committee meets the bounds".into())
        }
        Error::EmptyPolytope => {
            Error::Infeasible("the LP relaxation of the bounds is empty".into())
        }
        other => other,
    }
}

/// Solve `inst` under `rule`, dispatching on the instance shape when the
/// strategy is [`Strategy::Auto`].
pub fn solve(inst: &Instance, rule: &Rule, opts: &SolveOptions) -> Result<Solution> {
    let start = Instant::now();
    let scorer = Scorer::new(rule, inst)?;
    let mut sol = run(&scorer, opts).map_err(infeasible_from)?;
    sol.runtime = start.elapsed();
    debug_assert!(
        (sol.score - scorer.eval(sol.committee.members())).abs() <= 1e-9 * sol.score.abs().max(1.0)
    );
    Ok(sol)
}

fn run(scorer: &Scorer<'_>, opts: &SolveOptions) -> Result<Solution> {
    let inst = scorer.instance();
    match opts.strategy {
        Strategy::Auto => auto(scorer, opts),
        Strategy::BruteForce => brute::brute_force_with(scorer, opts.brute_cap, opts.seed),
        Strategy::ModularDelta1 => exact::modular_delta1_solution(scorer, opts.seed),
        Strategy::ModularDelta2 => exact::modular_delta2_solution(scorer, opts.seed),
        Strategy::ConstantP => constant_p::constant_p_with(scorer, opts),
        Strategy::GreedyExtendible => {
            let w = witness(inst, opts)?;
            greedy::greedy_extendible_with(scorer, &w, opts.seed)
        }
        Strategy::LowerOnly => greedy::lower_only_with(scorer, opts),
        Strategy::ContinuousGreedy => pipeline::cg_pipeline_with(scorer, opts),
        Strategy::ShrunkCg => pipeline::shrunk_cg_with(scorer, opts),
    }
}

fn auto(scorer: &Scorer<'_>, opts: &SolveOptions) -> Result<Solution> {
    let inst = scorer.instance();
    let delta = inst.delta();
    let modular = scorer.weights().is_some();
    if modular && delta <= 1 {
        return exact::modular_delta1_solution(scorer, opts.seed);
    }
    if modular && delta == 2 && integer_weights(scorer).is_ok() {
        return exact::modular_delta2_solution(scorer, opts.seed);
    }
    if inst.p() <= opts.p_limit {
        let classes = TypeClasses::new(inst);
        let cap = if modular {
            opts.vector_cap
        } else {
            opts.submodular_vector_cap
        };
        match available_vectors(inst, &classes, cap) {
            Ok(vectors) if vectors.is_empty() => {
                return Err(Error::Infeasible(
                    "no available vector meets the bounds".into(),
                ));
            }
            Ok(vectors) => return constant_p::solve_vectors(scorer, &classes, &vectors, opts),
            Err(Error::CapExceeded { .. }) => {}
            Err(e) => return Err(e),
        }
    }
    if delta <= 1 {
        // exactly feasible with the (1 − 1/e) guarantee; beats the upper-only bi-criterion
        return pipeline::cg_pipeline_with(scorer, opts);
    }
    if inst.only_upper_bounds() {
        let w = witness(inst, opts)?;
        return greedy::greedy_extendible_with(scorer, &w, opts.seed);
    }
    if inst.only_lower_bounds() {
        return greedy::lower_only_with(scorer, opts);
    }
    pipeline::cg_pipeline_with(scorer, opts)
}
