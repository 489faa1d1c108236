//! Fairness-constrained multiwinner voting.
//!
//! Select a size-`k` committee maximizing a monotone submodular score (SNTV,
//! Bloc, k-Borda, α-CC, β-CC or an external set function) subject to interval
//! bounds `lower_i <= |S ∩ P_i| <= upper_i` on arbitrary, possibly overlapping,
//! candidate groups.
//!
//! The crate is organised bottom-up:
//!
//! * [`instance`]: the data model and its JSON document format.
//! * [`scores`]: rule evaluation, marginal gains and the multilinear extension.
//! * [`polytope`]: the fairness polytope, LP direction oracle, feasibility and
//!   constraint builders for common fairness notions.
//! * [`contgreedy`]: continuous greedy ascent over the polytope.
//! * [`rounding`]: dependent rounding (degree-one pairwise rounding and swap
//!   rounding) plus violation reporting.
//! * [`solvers`]: exact special cases, bi-criterion pipelines and dispatch.
//! * [`experiments`]: the 2D Euclidean study (Gini index, price of fairness).

pub mod contgreedy;
pub mod error;
pub mod experiments;
pub mod instance;
pub mod polytope;
pub mod rounding;
pub mod scores;
pub mod seed;
pub mod solvers;

pub use contgreedy::{continuous_greedy, GreedyConfig, GreedyTrace};
pub use error::{Error, Result};
pub use instance::{Committee, Group, Instance};
pub use polytope::{
    bounds_from_notion, feasibility_exact, FairnessNotion, FeasibilityOptions, FeasibilityReport,
    FeasibilityStatus, Polytope,
};
pub use rounding::{degree_one_round, swap_round, violation_report, ViolationReport};
pub use scores::{
    eval_score, marginal_gain, multilinear_eval, multilinear_grad, FractionalPoint, GradMode, Rule,
    Scorer, SetOracle,
};
pub use solvers::{solve, Guarantee, Solution, SolveOptions, Strategy};
