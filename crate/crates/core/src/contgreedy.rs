//! Continuous greedy ascent of the multilinear extension over a polytope.
//!
//! Starting from `y = 0`, each of `T` steps moves `y` by `v/T`, where `v` is a
//! vertex maximizing `⟨∇F(y), v⟩`. After step `t` the point lies in `(t/T)·B`.
//! The default `T = max(10k, 100)` is an engineering choice: the loss term
//! shrinks like `1/T`.

use serde_json::{json, Value};

use crate::error::{Error, Result};
use crate::instance::Instance;
use crate::polytope::Polytope;
use crate::scores::{FractionalPoint, GradMode, Rule, Scorer, DEFAULT_MC_EVAL_SAMPLES};
use crate::seed::{self, STREAM_MC};

const DRIFT_LIMIT: f64 = 1e-6;

#[derive(Clone, Debug, Default)]
pub struct GreedyConfig {
    /// Number of steps; `None` means `max(10k, 100)`.
    pub steps: Option<usize>,
    /// `None` picks exact gradients for built-in rules, Monte-Carlo for oracles.
    pub grad_mode: Option<GradMode>,
    pub seed: u64,
    /// Keep every direction vertex in the trace.
    pub record_directions: bool,
}

impl GreedyConfig {
    pub fn with_seed(seed: u64) -> Self {
        Self {
            seed,
            ..Self::default()
        }
    }

    pub fn default_steps(k: usize) -> usize {
        (10 * k).max(100)
    }
}

#[derive(Clone, Debug)]
pub struct GreedyTrace {
    pub steps: usize,
    /// Direction vertices, when requested.
    pub directions: Vec<Vec<f64>>,
    /// `F(y_t)` after every step (exact mode only).
    pub values: Vec<f64>,
    pub y: FractionalPoint,
    /// `F(y_T)`: exact when available, otherwise a Monte-Carlo estimate.
    pub value: f64,
    pub oracle_calls: u64,
    /// Largest coordinate excursion outside `[0,1]` clipped away.
    pub max_drift: f64,
}

impl GreedyTrace {
    pub fn to_json(&self) -> Value {
        json!({
            "steps": self.steps,
            "value": self.value,
            "y": &*self.y,
            "values": self.values,
            "directions": self.directions,
            "oracle_calls": self.oracle_calls,
            "max_drift": self.max_drift,
        })
    }
}

pub fn continuous_greedy(
    rule: &Rule,
    inst: &Instance,
    polytope: &Polytope,
    cfg: &GreedyConfig,
) -> Result<GreedyTrace> {
    let scorer = Scorer::new(rule, inst)?;
    continuous_greedy_with(&scorer, polytope, cfg)
}

pub(crate) fn continuous_greedy_with(
    scorer: &Scorer<'_>,
    polytope: &Polytope,
    cfg: &GreedyConfig,
) -> Result<GreedyTrace> {
    let inst = scorer.instance();
    let m = inst.m();
    if polytope.m() != m {
        return Err(Error::InvalidInstance(
            "polytope and instance dimensions differ".into(),
        ));
    }
    let steps = cfg
        .steps
        .unwrap_or_else(|| GreedyConfig::default_steps(inst.k()));
    if steps == 0 {
        return Err(Error::InvalidInstance(
            "continuous greedy needs at least one step".into(),
        ));
    }
    let mode = cfg
        .grad_mode
        .unwrap_or_else(|| scorer.default_mode(cfg.seed));
    let exact = matches!(mode, GradMode::Exact);
    let calls_before = scorer.oracle_calls().unwrap_or(0);

    let inv = 1.0 / steps as f64;
    let mut y = vec![0.0; m];
    let mut directions = Vec::new();
    let mut values = Vec::with_capacity(if exact { steps } else { 0 });
    let mut max_drift = 0.0f64;
    for t in 0..steps {
        let step_mode = match mode {
            GradMode::Exact => GradMode::Exact,
            GradMode::MonteCarlo { samples, seed: s } => GradMode::MonteCarlo {
                samples,
                seed: seed::derive(s, STREAM_MC, t as u64),
            },
        };
        let grad = scorer.gradient(&y, step_mode)?;
        let v = polytope.linear_maximize(&grad)?;
        for (yi, vi) in y.iter_mut().zip(v.iter()) {
            *yi += vi * inv;
            let drift = (*yi - 1.0).max(-*yi);
            if drift > 0.0 {
                max_drift = max_drift.max(drift);
                *yi = yi.clamp(0.0, 1.0);
            }
        }
        if max_drift > DRIFT_LIMIT {
            return Err(Error::Numerical(format!(
                "continuous greedy drifted {max_drift:e} outside [0,1]"
            )));
        }
        if cfg.record_directions {
            directions.push(v.into_inner());
        }
        if exact {
            values.push(scorer.multilinear_exact(&y)?);
        }
    }

    let value = match values.last() {
        Some(&v) => v,
        None => {
            scorer
                .multilinear_mc(
                    &y,
                    DEFAULT_MC_EVAL_SAMPLES,
                    seed::derive(cfg.seed, STREAM_MC, u64::MAX),
                )
                .mean
        }
    };
    let oracle_calls = scorer.oracle_calls().map_or(0, |c| c - calls_before);
    Ok(GreedyTrace {
        steps,
        directions,
        values,
        y: FractionalPoint::new(y)?,
        value,
        oracle_calls,
        max_drift,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::instance::fixtures::{crossed_groups, pair_groups};
    use crate::instance::Group;
    use crate::scores::SetOracle;

    #[test]
    fn k_equals_m_fills_everything() {
        let inst = Instance::new(3, 3, vec![vec![0, 1, 2], vec![2, 1, 0]], vec![]).unwrap();
        let p = Polytope::from_instance(&inst);
        let tr = continuous_greedy(&Rule::BetaCc, &inst, &p, &GreedyConfig::default()).unwrap();
        assert_eq!(tr.steps, 100);
        assert!(tr.y.iter().all(|&v| (v - 1.0).abs() < 1e-9));
        assert!((tr.value - 4.0).abs() < 1e-9);
    }

    #[test]
    fn sntv_reaches_the_optimal_vertex() {
        let inst = crossed_groups();
        let p = Polytope::from_instance(&inst);
        let tr = continuous_greedy(&Rule::Sntv, &inst, &p, &GreedyConfig::default()).unwrap();
        // at most two of the four first-place winners fit in {c1,c2,c5,c6}
        assert!((tr.value - 100.0).abs() < 1e-6);
        assert!(p.contains_tol(&tr.y, 1e-7));
    }

    #[test]
    fn values_never_decrease_and_stay_in_scaled_polytope() {
        let inst = crossed_groups();
        let p = Polytope::from_instance(&inst);
        let cfg = GreedyConfig {
            steps: Some(40),
            record_directions: true,
            ..GreedyConfig::default()
        };
        let tr = continuous_greedy(&Rule::BetaCc, &inst, &p, &cfg).unwrap();
        assert_eq!(tr.directions.len(), 40);
        for w in tr.values.windows(2) {
            assert!(w[1] >= w[0] - 1e-9);
        }
        let mut y = vec![0.0; 8];
        for (t, v) in tr.directions.iter().enumerate() {
            for i in 0..8 {
                y[i] += v[i] / 40.0;
            }
            assert!(p.scaled_violation(&y, (t + 1) as f64 / 40.0) < 1e-9);
        }
    }

    #[test]
    fn general_delta_uses_the_lp() {
        let inst = pair_groups(0);
        let p = Polytope::from_instance(&inst);
        let tr = continuous_greedy(&Rule::BetaCc, &inst, &p, &GreedyConfig::default()).unwrap();
        assert!(p.contains_tol(&tr.y, 1e-7));
        assert!(tr.value > 0.0);
    }

    #[test]
    fn shrunk_polytope_respects_scaled_uppers() {
        let groups = vec![
            Group {
                members: vec![0, 1, 2],
                lower: 0,
                upper: 2,
            },
            Group {
                members: vec![2, 3, 4, 5],
                lower: 0,
                upper: 2,
            },
        ];
        let prefs = vec![
            vec![0, 1, 2, 3, 4, 5],
            vec![2, 3, 4, 5, 0, 1],
            vec![5, 4, 3, 2, 1, 0],
        ];
        let inst = Instance::new(6, 4, prefs, groups).unwrap();
        let p = Polytope::shrunk(&inst, 0.1).unwrap();
        let tr = continuous_greedy(&Rule::BetaCc, &inst, &p, &GreedyConfig::default()).unwrap();
        assert!(tr.y[0] + tr.y[1] + tr.y[2] <= 1.8 + 1e-7);
        assert!(tr.y[2] + tr.y[3] + tr.y[4] + tr.y[5] <= 1.8 + 1e-7);
    }

    #[test]
    fn oracle_rule_runs_with_monte_carlo_and_is_deterministic() {
        let make = || {
            SetOracle::new("coverage", |s: &[usize]| {
                s.iter()
                    .map(|&c| c % 3)
                    .collect::<std::collections::BTreeSet<_>>()
                    .len() as f64
            })
        };
        let inst = Instance::new(6, 2, vec![], vec![]).unwrap();
        let p = Polytope::from_instance(&inst);
        let cfg = GreedyConfig {
            steps: Some(10),
            grad_mode: Some(GradMode::MonteCarlo {
                samples: 50,
                seed: 3,
            }),
            ..GreedyConfig::default()
        };
        let o = make();
        let a = continuous_greedy(&Rule::Oracle(o.clone()), &inst, &p, &cfg).unwrap();
        let b = continuous_greedy(&Rule::Oracle(make()), &inst, &p, &cfg).unwrap();
        assert_eq!(a.y, b.y);
        assert!(a.oracle_calls > 0);
        assert_eq!(a.oracle_calls, o.calls());
    }
}
