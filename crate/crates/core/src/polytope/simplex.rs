//! Dense bounded-variable primal simplex with Bland's rule.
//!
//! Solves `max c·x  s.t.  A x = b,  lo <= x <= hi` with finite bounds on every
//! structural variable. Phase 1 starts from all variables at their lower bound
//! and one artificial per row.

use crate::error::{Error, Result};

const TOL: f64 = 1e-9;
const PIVOT_TOL: f64 = 1e-9;
const MAX_ITERS: usize = 200_000;

pub(crate) struct LinearProgram {
    pub a: Vec<Vec<f64>>,
    pub b: Vec<f64>,
    pub lo: Vec<f64>,
    pub hi: Vec<f64>,
    pub c: Vec<f64>,
}

pub(crate) enum LpOutcome {
    Optimal(Vec<f64>),
    Infeasible,
}

struct Tableau {
    /// rows x cols, expressed in the current basis
    t: Vec<Vec<f64>>,
    basis: Vec<usize>,
    is_basic: Vec<bool>,
    x: Vec<f64>,
    lo: Vec<f64>,
    hi: Vec<f64>,
}

impl Tableau {
    fn reduced_costs(&self, cost: &[f64]) -> Vec<f64> {
        let mut d = cost.to_vec();
        for (i, row) in self.t.iter().enumerate() {
            let cb = cost[self.basis[i]];
            if cb != 0.0 {
                for (dj, tij) in d.iter_mut().zip(row) {
                    *dj -= cb * tij;
                }
            }
        }
        d
    }

    /// Runs simplex iterations for `cost` to optimality.
    fn optimize(&mut self, cost: &[f64]) -> Result<()> {
        let cols = self.x.len();
        for _ in 0..MAX_ITERS {
            let d = self.reduced_costs(cost);
            // Bland: lowest-index improving nonbasic variable
            let entering = (0..cols).find_map(|j| {
                if self.is_basic[j] || self.hi[j] - self.lo[j] <= TOL {
                    return None;
                }
                let at_lower = self.x[j] <= self.lo[j] + TOL;
                if at_lower && d[j] > TOL {
                    Some((j, 1.0))
                } else if !at_lower && d[j] < -TOL {
                    Some((j, -1.0))
                } else {
                    None
                }
            });
            let Some((j, dir)) = entering else {
                return Ok(());
            };

            let flip = self.hi[j] - self.lo[j];
            let mut row_min = f64::INFINITY;
            let mut leave: Option<usize> = None;
            for (i, row) in self.t.iter().enumerate() {
                let rate = -dir * row[j];
                let bv = self.basis[i];
                let limit = if rate < -PIVOT_TOL {
                    (self.x[bv] - self.lo[bv]).max(0.0) / -rate
                } else if rate > PIVOT_TOL && self.hi[bv].is_finite() {
                    (self.hi[bv] - self.x[bv]).max(0.0) / rate
                } else {
                    continue;
                };
                let take = match leave {
                    None => true,
                    Some(li) => {
                        limit < row_min - TOL || (limit <= row_min + TOL && bv < self.basis[li])
                    }
                };
                if take {
                    row_min = row_min.min(limit);
                    leave = Some(i);
                }
            }
            let step = if flip <= row_min {
                leave = None;
                flip
            } else {
                row_min
            };
            if !step.is_finite() {
                return Err(Error::Numerical("unbounded linear program".into()));
            }

            self.x[j] += dir * step;
            for (i, row) in self.t.iter().enumerate() {
                let bv = self.basis[i];
                self.x[bv] -= dir * step * row[j];
            }
            let Some(r) = leave else {
                // bound flip
                self.x[j] = if dir > 0.0 { self.hi[j] } else { self.lo[j] };
                continue;
            };
            let out = self.basis[r];
            let rate = -dir * self.t[r][j];
            self.x[out] = if rate < 0.0 {
                self.lo[out]
            } else {
                self.hi[out]
            };
            self.pivot(r, j);
        }
        Err(Error::Numerical("simplex iteration limit reached".into()))
    }

    fn pivot(&mut self, r: usize, j: usize) {
        let piv = self.t[r][j];
        for v in self.t[r].iter_mut() {
            *v /= piv;
        }
        let pivot_row = self.t[r].clone();
        for (i, row) in self.t.iter_mut().enumerate() {
            if i == r {
                continue;
            }
            let f = row[j];
            if f != 0.0 {
                for (v, p) in row.iter_mut().zip(&pivot_row) {
                    *v -= f * p;
                }
            }
        }
        self.is_basic[self.basis[r]] = false;
        self.is_basic[j] = true;
        self.basis[r] = j;
    }
}

pub(crate) fn maximize(lp: &LinearProgram) -> Result<LpOutcome> {
    let rows = lp.a.len();
    let n = lp.c.len();
    let cols = n + rows;

    let mut x: Vec<f64> = lp.lo.clone();
    let mut t = vec![vec![0.0; cols]; rows];
    for i in 0..rows {
        let resid = lp.b[i] - lp.a[i].iter().zip(&lp.lo).map(|(a, l)| a * l).sum::<f64>();
        let s = if resid >= 0.0 { 1.0 } else { -1.0 };
        for j in 0..n {
            t[i][j] = s * lp.a[i][j];
        }
        t[i][n + i] = 1.0;
        x.push(resid.abs());
    }
    let mut lo = lp.lo.clone();
    lo.extend(std::iter::repeat_n(0.0, rows));
    let mut hi = lp.hi.clone();
    hi.extend(std::iter::repeat_n(f64::INFINITY, rows));
    let mut is_basic = vec![false; cols];
    for b in is_basic.iter_mut().skip(n) {
        *b = true;
    }
    let mut tab = Tableau {
        t,
        basis: (n..cols).collect(),
        is_basic,
        x,
        lo,
        hi,
    };

    let mut phase1 = vec![0.0; cols];
    for c in phase1.iter_mut().skip(n) {
        *c = -1.0;
    }
    tab.optimize(&phase1)?;
    let infeas: f64 = tab.x[n..].iter().sum();
    if infeas > 1e-7 {
        return Ok(LpOutcome::Infeasible);
    }
    for j in n..cols {
        tab.hi[j] = 0.0;
        tab.x[j] = 0.0;
    }

    let mut cost = lp.c.clone();
    cost.extend(std::iter::repeat_n(0.0, rows));
    tab.optimize(&cost)?;

    let mut out = tab.x[..n].to_vec();
    for (j, v) in out.iter_mut().enumerate() {
        *v = v.clamp(lp.lo[j], lp.hi[j]);
    }
    Ok(LpOutcome::Optimal(out))
}
