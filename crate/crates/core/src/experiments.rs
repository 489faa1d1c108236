//! The 2D Euclidean study: quadrant groups, proportional constraint modes,
//! the Gini index of winners per group and the price of fairness.
//!
//! Unconstrained optima are exact for modular rules. For α-CC and β-CC the
//! denominator is the better of plain greedy and the continuous greedy
//! pipeline, so CC ratios compare two approximations.

use std::io::Write;

use rand::seq::SliceRandom;
use rand::Rng as _;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use crate::error::{Error, Result};
use crate::instance::{Committee, Group, Instance};
use crate::polytope::largest_remainder;
use crate::scores::{Rule, Scorer};
use crate::seed::{self, STREAM_RANDOM_BASELINE, STREAM_SUBPROBLEM, STREAM_TRIAL};
use crate::solvers::{cg_pipeline, modular_delta1, solve, SolveOptions};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Mode {
    Unconstrained,
    PropVoters,
    PropCandidates,
    Relax,
}

impl Mode {
    pub const ALL: [Mode; 4] = [
        Mode::Unconstrained,
        Mode::PropVoters,
        Mode::PropCandidates,
        Mode::Relax,
    ];

    pub fn name(&self) -> &'static str {
        match self {
            Mode::Unconstrained => "unconstrained",
            Mode::PropVoters => "prop_voters",
            Mode::PropCandidates => "prop_candidates",
            Mode::Relax => "relax",
        }
    }

    pub fn from_name(s: &str) -> Result<Self> {
        let norm = s.trim().to_ascii_lowercase().replace('-', "_");
        Self::ALL
            .iter()
            .copied()
            .find(|m| m.name() == norm)
            .ok_or_else(|| Error::Unsupported(format!("unknown constraint mode {s:?}")))
    }
}

/// Name used for the uniform random committee in result tables.
pub const RANDOM_MODE: &str = "random";

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct EuclideanConfig {
    /// Voters per quadrant, quadrants counted counter-clockwise from `x,y > 0`.
    pub voters_per_quadrant: [usize; 4],
    pub candidates_per_quadrant: [usize; 4],
    /// Points live in `[−w, w]²`.
    pub half_width: f64,
    pub k: usize,
    pub rules: Vec<String>,
    pub modes: Vec<Mode>,
    pub repetitions: usize,
    pub seed: u64,
    /// Continuous greedy steps for CC rules; `None` means `max(10k, 100)`.
    pub steps: Option<usize>,
    /// Roundings per fractional point for CC rules.
    pub rounds: usize,
}

impl Default for EuclideanConfig {
    fn default() -> Self {
        Self {
            voters_per_quadrant: [100; 4],
            candidates_per_quadrant: [40, 30, 20, 30],
            half_width: 3.0,
            k: 12,
            rules: Rule::builtin()
                .iter()
                .map(|r| r.name().to_string())
                .collect(),
            modes: Mode::ALL.to_vec(),
            repetitions: 200,
            seed: 2022,
            steps: None,
            rounds: 8,
        }
    }
}

impl EuclideanConfig {
    pub fn m(&self) -> usize {
        self.candidates_per_quadrant.iter().sum()
    }

    pub fn n(&self) -> usize {
        self.voters_per_quadrant.iter().sum()
    }

    pub fn validate(&self) -> Result<()> {
        if self.candidates_per_quadrant.contains(&0) {
            return Err(Error::InvalidInstance(
                "every quadrant needs at least one candidate".into(),
            ));
        }
        if self.voters_per_quadrant.contains(&0) {
            return Err(Error::InvalidInstance(
                "every quadrant needs at least one voter".into(),
            ));
        }
        if !(self.half_width > 0.0 && self.half_width.is_finite()) {
            return Err(Error::InvalidInstance("half_width must be positive".into()));
        }
        if self.k == 0 || self.k > self.m() {
            return Err(Error::InvalidInstance(format!(
                "k = {} must lie in 1..={}",
                self.k,
                self.m()
            )));
        }
        if self.repetitions == 0 {
            return Err(Error::InvalidInstance(
                "repetitions must be positive".into(),
            ));
        }
        for r in &self.rules {
            Rule::from_name(r)?;
        }
        Ok(())
    }

    pub fn trial_seed(&self, trial: usize) -> u64 {
        seed::derive(self.seed, STREAM_TRIAL, trial as u64)
    }
}

/// A generated election with its geometry.
#[derive(Clone, Debug)]
pub struct EuclideanInstance {
    /// Unconstrained: one group per quadrant with bounds `[0, |P_i|]`.
    pub instance: Instance,
    pub voters: Vec<[f64; 2]>,
    pub candidates: Vec<[f64; 2]>,
    pub voter_quadrant: Vec<usize>,
    pub candidate_quadrant: Vec<usize>,
}

impl EuclideanInstance {
    pub fn voter_counts(&self) -> Vec<usize> {
        let mut c = vec![0; 4];
        for &q in &self.voter_quadrant {
            c[q] += 1;
        }
        c
    }
}

fn quadrant_point(rng: &mut seed::Rng, q: usize, w: f64) -> [f64; 2] {
    let x = rng.gen_range(0.0..w);
    let y = rng.gen_range(0.0..w);
    match q {
        0 => [x, y],
        1 => [-x, y],
        2 => [-x, -y],
        _ => [x, -y],
    }
}

fn dist2(a: [f64; 2], b: [f64; 2]) -> f64 {
    (a[0] - b[0]).powi(2) + (a[1] - b[1]).powi(2)
}

/// Uniform voters and candidates per quadrant, preferences by distance
/// (ties toward the lower candidate index). Candidate labels are shuffled so
/// that index tie-breaking carries no quadrant bias.
pub fn generate_euclidean(cfg: &EuclideanConfig, trial_seed: u64) -> Result<EuclideanInstance> {
    cfg.validate()?;
    let mut rng = seed::rng(trial_seed);
    let w = cfg.half_width;
    let mut voters = Vec::with_capacity(cfg.n());
    let mut voter_quadrant = Vec::with_capacity(cfg.n());
    for (q, &n) in cfg.voters_per_quadrant.iter().enumerate() {
        for _ in 0..n {
            voters.push(quadrant_point(&mut rng, q, w));
            voter_quadrant.push(q);
        }
    }
    let mut cands: Vec<([f64; 2], usize)> = Vec::with_capacity(cfg.m());
    for (q, &c) in cfg.candidates_per_quadrant.iter().enumerate() {
        for _ in 0..c {
            cands.push((quadrant_point(&mut rng, q, w), q));
        }
    }
    cands.shuffle(&mut rng);
    let candidates: Vec<[f64; 2]> = cands.iter().map(|c| c.0).collect();
    let candidate_quadrant: Vec<usize> = cands.iter().map(|c| c.1).collect();

    let m = candidates.len();
    let prefs: Vec<Vec<usize>> = voters
        .iter()
        .map(|&v| {
            let d: Vec<f64> = candidates.iter().map(|&c| dist2(v, c)).collect();
            let mut order: Vec<usize> = (0..m).collect();
            order.sort_by(|&a, &b| d[a].total_cmp(&d[b]).then(a.cmp(&b)));
            order
        })
        .collect();
    let groups = (0..4)
        .map(|q| {
            let members: Vec<usize> = (0..m).filter(|&c| candidate_quadrant[c] == q).collect();
            let upper = members.len();
            Group {
                members,
                lower: 0,
                upper,
            }
        })
        .collect();
    let instance = Instance::new(m, cfg.k, prefs, groups)?;
    Ok(EuclideanInstance {
        instance,
        voters,
        candidates,
        voter_quadrant,
        candidate_quadrant,
    })
}

/// Integer counts proportional to `shares` summing to `k`, capped by `caps`
/// (excess moves to groups with room, largest share first).
fn proportional_counts(shares: &[usize], caps: &[usize], k: usize) -> Result<Vec<usize>> {
    let weights: Vec<f64> = shares.iter().map(|&s| s as f64).collect();
    let mut counts = largest_remainder(&weights, k);
    let mut excess = 0;
    for (c, &cap) in counts.iter_mut().zip(caps) {
        if *c > cap {
            excess += *c - cap;
            *c = cap;
        }
    }
    let mut order: Vec<usize> = (0..shares.len()).collect();
    order.sort_by(|&a, &b| shares[b].cmp(&shares[a]).then(a.cmp(&b)));
    while excess > 0 {
        let Some(&j) = order.iter().find(|&&j| counts[j] < caps[j]) else {
            return Err(Error::Infeasible(format!(
                "cannot place {k} winners within the group sizes"
            )));
        };
        counts[j] += 1;
        excess -= 1;
    }
    debug_assert_eq!(counts.iter().sum::<usize>(), k);
    Ok(counts)
}

/// Bounds per quadrant for a constraint mode.
pub fn constraint_mode(
    inst: &Instance,
    mode: Mode,
    voter_counts: &[usize],
) -> Result<Vec<(usize, usize)>> {
    if inst.delta() > 1 {
        return Err(Error::Unsupported(
            "constraint modes need disjoint groups".into(),
        ));
    }
    if voter_counts.len() != inst.p() {
        return Err(Error::InvalidInstance(format!(
            "{} voter counts for {} groups",
            voter_counts.len(),
            inst.p()
        )));
    }
    let sizes: Vec<usize> = inst.groups().iter().map(|g| g.len()).collect();
    let k = inst.k();
    Ok(match mode {
        Mode::Unconstrained => sizes.iter().map(|&s| (0, s)).collect(),
        Mode::PropVoters => proportional_counts(voter_counts, &sizes, k)?
            .into_iter()
            .map(|c| (c, c))
            .collect(),
        Mode::PropCandidates => proportional_counts(&sizes, &sizes, k)?
            .into_iter()
            .map(|c| (c, c))
            .collect(),
        Mode::Relax => {
            let v = proportional_counts(voter_counts, &sizes, k)?;
            let c = proportional_counts(&sizes, &sizes, k)?;
            v.iter()
                .zip(&c)
                .map(|(&a, &b)| (a.min(b), a.max(b)))
                .collect()
        }
    })
}

/// `Σ_i Σ_j |n_i − n_j| / (2p Σ_j n_j)`.
pub fn gini(counts: &[usize]) -> Result<f64> {
    let p = counts.len();
    let total: usize = counts.iter().sum();
    if p == 0 || total == 0 {
        return Err(Error::InvalidInstance(
            "Gini index needs at least one winner".into(),
        ));
    }
    let mut diff = 0usize;
    for &a in counts {
        for &b in counts {
            diff += a.abs_diff(b);
        }
    }
    Ok(diff as f64 / (2 * p * total) as f64)
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct TrialRecord {
    pub rule: String,
    pub mode: String,
    pub trial: usize,
    pub gini: f64,
    pub score: f64,
    pub unconstrained_score: f64,
    /// `100 · score / unconstrained_score`.
    pub ratio: f64,
    /// Winners per quadrant, `;`-separated.
    pub counts: String,
    /// 1-based winners, `;`-separated.
    pub committee: String,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ExperimentRow {
    pub rule: String,
    pub mode: String,
    pub gini_mean: f64,
    pub gini_std: f64,
    pub ratio_mean: f64,
    pub repetitions: usize,
}

#[derive(Clone, Debug)]
pub struct ExperimentOutput {
    pub rows: Vec<ExperimentRow>,
    pub trials: Vec<TrialRecord>,
}

fn join<T: ToString>(v: &[T]) -> String {
    v.iter().map(T::to_string).collect::<Vec<_>>().join(";")
}

fn record(
    rule: &str,
    mode: &str,
    trial: usize,
    c: &Committee,
    score: f64,
    unconstrained: f64,
) -> Result<TrialRecord> {
    let counts = c.group_counts();
    Ok(TrialRecord {
        rule: rule.to_string(),
        mode: mode.to_string(),
        trial,
        gini: gini(counts)?,
        score,
        unconstrained_score: unconstrained,
        ratio: if unconstrained > 0.0 {
            100.0 * score / unconstrained
        } else {
            100.0
        },
        counts: join(counts),
        committee: join(&c.one_based()),
    })
}

/// Best unconstrained committee: exact for modular rules, otherwise the
/// better of plain greedy and the continuous greedy pipeline.
fn unconstrained_best(
    scorer: &Scorer<'_>,
    rule: &Rule,
    inst: &Instance,
    opts: &SolveOptions,
) -> Result<Committee> {
    if let Some(w) = scorer.weights() {
        return modular_delta1(w, inst);
    }
    let mut state = scorer.gain_state();
    let mut taken = vec![false; inst.m()];
    for _ in 0..inst.k() {
        let mut best: Option<(f64, usize)> = None;
        for c in (0..inst.m()).filter(|&c| !taken[c]) {
            let g = state.gain(c);
            if best.is_none_or(|(bg, _)| g > bg) {
                best = Some((g, c));
            }
        }
        let (_, c) = best.expect("k <= m");
        taken[c] = true;
        state.add(c);
    }
    let greedy = Committee::new(inst, state.members().to_vec())?;
    let cg = cg_pipeline(inst, rule, opts)?.committee;
    Ok(
        if scorer.eval(cg.members()) > scorer.eval(greedy.members()) {
            cg
        } else {
            greedy
        },
    )
}

fn run_trial(cfg: &EuclideanConfig, rules: &[Rule], trial: usize) -> Result<Vec<TrialRecord>> {
    let ts = cfg.trial_seed(trial);
    let ei = generate_euclidean(cfg, ts)?;
    let base = &ei.instance;
    let voter_counts = ei.voter_counts();
    let mut rng = seed::child_rng(ts, STREAM_RANDOM_BASELINE, 0);
    let random = Committee::new(
        base,
        rand::seq::index::sample(&mut rng, base.m(), base.k()).into_vec(),
    )?;

    let mut out = Vec::new();
    for (ri, rule) in rules.iter().enumerate() {
        let scorer = Scorer::new(rule, base)?;
        let opts = SolveOptions {
            seed: seed::derive(ts, STREAM_SUBPROBLEM, ri as u64),
            steps: cfg.steps,
            rounds: cfg.rounds,
            ..SolveOptions::default()
        };
        let unc = unconstrained_best(&scorer, rule, base, &opts)?;
        let unc_score = scorer.eval(unc.members());
        for &mode in &cfg.modes {
            let committee = if mode == Mode::Unconstrained {
                unc.clone()
            } else {
                let inst = base.with_bounds(&constraint_mode(base, mode, &voter_counts)?)?;
                let c = solve(&inst, rule, &opts)?.committee;
                Committee::new(base, c.members().to_vec())?
            };
            let score = scorer.eval(committee.members());
            out.push(record(
                rule.name(),
                mode.name(),
                trial,
                &committee,
                score,
                unc_score,
            )?);
        }
        out.push(record(
            rule.name(),
            RANDOM_MODE,
            trial,
            &random,
            scorer.eval(random.members()),
            unc_score,
        )?);
    }
    Ok(out)
}

/// Runs every trial (in parallel, each fully determined by the master seed
/// and its index) and aggregates per rule and mode in trial order.
pub fn run_experiment(cfg: &EuclideanConfig) -> Result<ExperimentOutput> {
    cfg.validate()?;
    let rules: Vec<Rule> = cfg
        .rules
        .iter()
        .map(|r| Rule::from_name(r))
        .collect::<Result<_>>()?;
    let per_trial: Vec<Vec<TrialRecord>> = (0..cfg.repetitions)
        .into_par_iter()
        .map(|t| run_trial(cfg, &rules, t).map_err(|e| Error::Numerical(format!("trial {t}: {e}"))))
        .collect::<Result<_>>()?;
    let trials: Vec<TrialRecord> = per_trial.into_iter().flatten().collect();

    let mut keys: Vec<(String, String)> = Vec::new();
    for r in &trials {
        let key = (r.rule.clone(), r.mode.clone());
        if !keys.contains(&key) {
            keys.push(key);
        }
    }
    let rows = keys
        .into_iter()
        .map(|(rule, mode)| {
            let sel: Vec<&TrialRecord> = trials
                .iter()
                .filter(|r| r.rule == rule && r.mode == mode)
                .collect();
            let n = sel.len() as f64;
            let gini_mean = sel.iter().map(|r| r.gini).sum::<f64>() / n;
            let gini_std = if sel.len() > 1 {
                (sel.iter()
                    .map(|r| (r.gini - gini_mean).powi(2))
                    .sum::<f64>()
                    / (n - 1.0))
                    .sqrt()
            } else {
                0.0
            };
            let ratio_mean = sel.iter().map(|r| r.ratio).sum::<f64>() / n;
            ExperimentRow {
                rule,
                mode,
                gini_mean,
                gini_std,
                ratio_mean,
                repetitions: sel.len(),
            }
        })
        .collect();
    Ok(ExperimentOutput { rows, trials })
}

impl ExperimentOutput {
    pub fn write_trials_csv<W: Write>(&self, w: W) -> Result<()> {
        let mut wr = csv::Writer::from_writer(w);
        for r in &self.trials {
            wr.serialize(r)?;
        }
        wr.flush()?;
        Ok(())
    }

    pub fn write_summary_csv<W: Write>(&self, w: W) -> Result<()> {
        let mut wr = csv::Writer::from_writer(w);
        for r in &self.rows {
            wr.serialize(r)?;
        }
        wr.flush()?;
        Ok(())
    }

    pub fn row(&self, rule: &str, mode: &str) -> Option<&ExperimentRow> {
        self.rows.iter().find(|r| r.rule == rule && r.mode == mode)
    }

    /// Choices the study leaves open, for attributing deviations.
    pub fn metadata(cfg: &EuclideanConfig) -> Value {
        json!({
            "config": cfg,
            "distance_ties": "lower candidate index",
            "candidate_labels": "shuffled per trial",
            "proportional_rounding": "largest remainder",
            "cc_unconstrained_denominator": "best of plain greedy and continuous greedy + degree-one rounding",
            "random_baseline": "uniform size-k subset, shared by all rules within a trial",
            "ratio_units": "percent",
        })
    }
}

/// Voter, candidate and winner coordinates of one committee, for plotting.
pub fn write_scatter_csv<W: Write>(
    w: W,
    ei: &EuclideanInstance,
    committee: &Committee,
) -> Result<()> {
    let mut wr = csv::Writer::from_writer(w);
    wr.write_record(["kind", "id", "x", "y", "quadrant", "winner"])?;
    for (i, (p, q)) in ei.voters.iter().zip(&ei.voter_quadrant).enumerate() {
        wr.write_record([
            "voter".to_string(),
            (i + 1).to_string(),
            p[0].to_string(),
            p[1].to_string(),
            (q + 1).to_string(),
            "0".to_string(),
        ])?;
    }
    for (i, (p, q)) in ei.candidates.iter().zip(&ei.candidate_quadrant).enumerate() {
        wr.write_record([
            "candidate".to_string(),
            (i + 1).to_string(),
            p[0].to_string(),
            p[1].to_string(),
            (q + 1).to_string(),
            u8::from(committee.contains(i)).to_string(),
        ])?;
    }
    wr.flush()?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn default_shape() {
        let cfg = EuclideanConfig::default();
        let ei = generate_euclidean(&cfg, 1).unwrap();
        let inst = &ei.instance;
        assert_eq!(
            (inst.m(), inst.n(), inst.k(), inst.p(), inst.delta()),
            (120, 400, 12, 4, 1)
        );
        assert!(inst.has_complete_prefs());
        let again = generate_euclidean(&cfg, 1).unwrap();
        assert_eq!(again.instance.prefs(), inst.prefs());
    }

    #[test]
    fn default_modes() {
        let cfg = EuclideanConfig::default();
        let ei = generate_euclidean(&cfg, 3).unwrap();
        let vc = ei.voter_counts();
        let sizes: Vec<usize> = ei.instance.groups().iter().map(|g| g.len()).collect();
        assert_eq!(sizes, vec![40, 30, 20, 30]);
        let b = |m| constraint_mode(&ei.instance, m, &vc).unwrap();
        assert_eq!(b(Mode::PropVoters), vec![(3, 3); 4]);
        assert_eq!(
            b(Mode::PropCandidates),
            vec![(4, 4), (3, 3), (2, 2), (3, 3)]
        );
        assert_eq!(b(Mode::Relax), vec![(3, 4), (3, 3), (2, 3), (3, 3)]);
        assert_eq!(
            b(Mode::Unconstrained),
            vec![(0, 40), (0, 30), (0, 20), (0, 30)]
        );
    }

    #[test]
    fn one_candidate_per_quadrant_is_forced() {
        let cfg = EuclideanConfig {
            candidates_per_quadrant: [1; 4],
            voters_per_quadrant: [5; 4],
            k: 4,
            ..EuclideanConfig::default()
        };
        let ei = generate_euclidean(&cfg, 9).unwrap();
        let bounds = constraint_mode(&ei.instance, Mode::PropVoters, &ei.voter_counts()).unwrap();
        assert_eq!(bounds, vec![(1, 1); 4]);
    }

    #[test]
    fn gini_values() {
        assert_eq!(gini(&[3, 3, 3, 3]).unwrap(), 0.0);
        assert_eq!(gini(&[4, 3, 2, 3]).unwrap(), 0.125);
        assert_eq!(gini(&[12, 0, 0, 0]).unwrap(), 0.75);
        assert!(gini(&[0, 0]).is_err());
    }

    #[test]
    fn proportional_counts_respect_caps() {
        assert_eq!(
            proportional_counts(&[100, 100, 100, 100], &[1, 10, 10, 10], 12).unwrap(),
            vec![1, 5, 3, 3]
        );
        assert!(proportional_counts(&[1, 1], &[1, 1], 3).is_err());
    }

    #[test]
    fn tiny_experiment_is_deterministic() {
        let cfg = EuclideanConfig {
            voters_per_quadrant: [10; 4],
            candidates_per_quadrant: [4, 3, 2, 3],
            k: 4,
            repetitions: 3,
            ..EuclideanConfig::default()
        };
        let a = run_experiment(&cfg).unwrap();
        let b = run_experiment(&cfg).unwrap();
        assert_eq!(a.trials, b.trials);
        assert_eq!(a.rows.len(), 5 * 5);
        let mut buf = Vec::new();
        a.write_summary_csv(&mut buf).unwrap();
        assert!(String::from_utf8(buf)
            .unwrap()
            .starts_with("rule,mode,gini_mean"));
    }
}
