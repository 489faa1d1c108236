//! The fairness polytope
//! `B = { y ∈ [0,1]^m : Σ y = k, ℓ_j <= Σ_{i∈P_j} y_i <= u_j }`,
//! linear optimization over it, feasibility checks and bound builders.

mod feasibility;
mod notions;
pub(crate) mod simplex;

pub use feasibility::{
    feasibility_exact, ConditionFlags, FeasibilityOptions, FeasibilityReport, FeasibilityStatus,
};
pub use notions::{bounds_from_notion, largest_remainder, FairnessNotion};

use crate::error::{Error, Result};
use crate::instance::Instance;
use crate::scores::FractionalPoint;
use simplex::{LinearProgram, LpOutcome};

pub const MEMBERSHIP_TOL: f64 = 1e-9;

#[derive(Clone, Debug)]
struct Face {
    members: Vec<usize>,
    lower: f64,
    upper: f64,
}

/// `B` for an instance, or a variant with a cardinality range and scaled bounds.
#[derive(Clone, Debug)]
pub struct Polytope {
    m: usize,
    card_lo: f64,
    card_hi: f64,
    faces: Vec<Face>,
    member_of: Vec<Vec<usize>>,
    /// integral bounds and fixed cardinality: the combinatorial oracle applies
    integral: bool,
}

impl Polytope {
    pub fn from_instance(inst: &Instance) -> Self {
        let faces = inst
            .groups()
            .iter()
            .map(|g| Face {
                members: g.members.clone(),
                lower: g.lower as f64,
                upper: g.upper as f64,
            })
            .collect();
        Self {
            m: inst.m(),
            card_lo: inst.k() as f64,
            card_hi: inst.k() as f64,
            faces,
            member_of: (0..inst.m()).map(|c| inst.groups_of(c).to_vec()).collect(),
            integral: true,
        }
    }

    /// `(1−ε)·B'` for uppers-only instances: `Σy <= (1−ε)k`,
    /// `Σ_{P_j} y <= (1−ε)u_j`, lower bounds dropped.
    pub fn shrunk(inst: &Instance, eps: f64) -> Result<Self> {
        if !(0.0..1.0).contains(&eps) {
            return Err(Error::InvalidInstance(format!(
                "shrink factor must lie in [0,1), got {eps}"
            )));
        }
        let mut p = Self::from_instance(inst);
        let s = 1.0 - eps;
        p.card_lo = 0.0;
        p.card_hi = s * inst.k() as f64;
        for f in &mut p.faces {
            f.lower = 0.0;
            f.upper *= s;
        }
        p.integral = false;
        Ok(p)
    }

    pub fn m(&self) -> usize {
        self.m
    }

    pub fn p(&self) -> usize {
        self.faces.len()
    }

    /// Allowed range of `Σ y`.
    pub fn cardinality(&self) -> (f64, f64) {
        (self.card_lo, self.card_hi)
    }

    pub fn delta(&self) -> usize {
        self.member_of.iter().map(Vec::len).max().unwrap_or(0)
    }

    /// `L = min_i ℓ_i`; `None` without groups.
    pub fn lower_min(&self) -> Option<f64> {
        self.faces.iter().map(|f| f.lower).reduce(f64::min)
    }

    /// `U = min_i u_i`; `None` without groups.
    pub fn upper_min(&self) -> Option<f64> {
        self.faces.iter().map(|f| f.upper).reduce(f64::min)
    }

    pub fn group_upper(&self, j: usize) -> f64 {
        self.faces[j].upper
    }

    /// Largest constraint violation of `y` (0 when inside).
    pub fn violation(&self, y: &[f64]) -> f64 {
        self.scaled_violation(y, 1.0)
    }

    /// Violation of `y` against `t·B`.
    pub fn scaled_violation(&self, y: &[f64], t: f64) -> f64 {
        assert_eq!(y.len(), self.m, "point dimension");
        let mut worst = 0.0f64;
        for &v in y {
            worst = worst.max(-v).max(v - 1.0);
        }
        let total: f64 = y.iter().sum();
        worst = worst
            .max(t * self.card_lo - total)
            .max(total - t * self.card_hi);
        for f in &self.faces {
            let s: f64 = f.members.iter().map(|&c| y[c]).sum();
            worst = worst.max(t * f.lower - s).max(s - t * f.upper);
        }
        worst
    }

    pub fn contains(&self, y: &[f64]) -> bool {
        self.violation(y) <= MEMBERSHIP_TOL
    }

    pub fn contains_tol(&self, y: &[f64], tol: f64) -> bool {
        self.violation(y) <= tol
    }

    /// An exact maximizer of `w·y` over the polytope, at a vertex.
    pub fn linear_maximize(&self, w: &[f64]) -> Result<FractionalPoint> {
        assert_eq!(w.len(), self.m, "weight dimension");
        if self.integral && self.delta() <= 1 {
            let groups: Vec<(&[usize], usize, usize)> = self
                .faces
                .iter()
                .map(|f| (f.members.as_slice(), f.lower as usize, f.upper as usize))
                .collect();
            let chosen = partition_greedy(self.m, self.card_hi as usize, &groups, w)
                .ok_or(Error::EmptyPolytope)?;
            return Ok(FractionalPoint::indicator(self.m, &chosen));
        }
        let y = self.lp_maximize(w)?;
        FractionalPoint::new(y)
    }

    fn lp_maximize(&self, w: &[f64]) -> Result<Vec<f64>> {
        let p = self.faces.len();
        let nvars = self.m + p + 1;
        let mut a = vec![vec![0.0; nvars]; p + 1];
        for (j, f) in self.faces.iter().enumerate() {
            for &c in &f.members {
                a[j][c] = 1.0;
            }
            a[j][self.m + j] = -1.0;
        }
        for v in a[p].iter_mut().take(self.m) {
            *v = 1.0;
        }
        a[p][self.m + p] = -1.0;
        let mut lo = vec![0.0; nvars];
        let mut hi = vec![1.0; nvars];
        for (j, f) in self.faces.iter().enumerate() {
            lo[self.m + j] = f.lower;
            hi[self.m + j] = f.upper;
        }
        lo[self.m + p] = self.card_lo;
        hi[self.m + p] = self.card_hi;
        let mut c = vec![0.0; nvars];
        c[..self.m].copy_from_slice(w);
        let lp = LinearProgram {
            a,
            b: vec![0.0; p + 1],
            lo,
            hi,
            c,
        };
        match simplex::maximize(&lp)? {
            LpOutcome::Optimal(x) => {
                let mut y = x[..self.m].to_vec();
                for v in &mut y {
                    if *v < MEMBERSHIP_TOL {
                        *v = 0.0;
                    } else if *v > 1.0 - MEMBERSHIP_TOL {
                        *v = 1.0;
                    }
                }
                Ok(y)
            }
            LpOutcome::Infeasible => Err(Error::EmptyPolytope),
        }
    }
}

/// Exact modular maximization over disjoint groups with integral bounds.
///
/// Takes the `ℓ_j` heaviest members of every group, then adds candidates in
/// non-increasing weight order while uppers and the budget allow. Ties go to
/// the lower index. Returns `None` when no size-`k` set satisfies the bounds.
pub(crate) fn partition_greedy(
    m: usize,
    k: usize,
    groups: &[(&[usize], usize, usize)],
    w: &[f64],
) -> Option<Vec<usize>> {
    let mut group_of = vec![usize::MAX; m];
    for (j, (members, _, _)) in groups.iter().enumerate() {
        for &c in *members {
            debug_assert_eq!(group_of[c], usize::MAX, "groups must be disjoint");
            group_of[c] = j;
        }
    }
    if groups.iter().map(|g| g.1).sum::<usize>() > k {
        return None;
    }
    let mut order: Vec<usize> = (0..m).collect();
    order.sort_by(|&a, &b| w[b].total_cmp(&w[a]).then(a.cmp(&b)));

    let mut chosen = vec![false; m];
    let mut count = vec![0usize; groups.len()];
    let mut size = 0;
    for &c in &order {
        let j = group_of[c];
        if j != usize::MAX && count[j] < groups[j].1 {
            chosen[c] = true;
            count[j] += 1;
            size += 1;
        }
    }
    if count.iter().zip(groups).any(|(&n, g)| n < g.1) {
        return None;
    }
    for &c in &order {
        if size == k {
            break;
        }
        if chosen[c] {
            continue;
        }
        let j = group_of[c];
        if j == usize::MAX || count[j] < groups[j].2 {
            chosen[c] = true;
            if j != usize::MAX {
                count[j] += 1;
            }
            size += 1;
        }
    }
    (size == k).then(|| (0..m).filter(|&c| chosen[c]).collect())
}

/// [`partition_greedy`] on an instance with `Δ <= 1`.
pub(crate) fn instance_partition_greedy(inst: &Instance, w: &[f64]) -> Option<Vec<usize>> {
    debug_assert!(inst.delta() <= 1);
    let groups: Vec<(&[usize], usize, usize)> = inst
        .groups()
        .iter()
        .map(|g| (g.members.as_slice(), g.lower, g.upper))
        .collect();
    partition_greedy(inst.m(), inst.k(), &groups, w)
}
