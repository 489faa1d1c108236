//! Committee score functions and the multilinear extension.
//!
//! Built-in rules split into two families:
//!
//! * modular rules (SNTV, Bloc, k-Borda): `f(S) = Σ_{c∈S} w_c`;
//! * Chamberlin–Courant rules (α-CC, β-CC): each voter contributes the
//!   positional score of the best-ranked member of `S`.
//!
//! For CC rules the multilinear extension has a closed form per voter: with
//! the voter's list `c_(1), c_(2), …`, the probability that the best included
//! candidate sits at rank `r` is `y_(r) · Π_{r'<r} (1 − y_(r'))`.

use std::fmt;
use std::sync::atomic::{AtomicU64, Ordering};
use std::sync::Arc;

use rand::Rng as _;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::instance::Instance;
use crate::seed::{self, STREAM_MC};

/// Tolerance for coordinates of a fractional point.
pub const COORD_TOL: f64 = 1e-9;

pub const DEFAULT_MC_EVAL_SAMPLES: usize = 2000;
pub const DEFAULT_MC_GRAD_SAMPLES: usize = 500;

const MC_CHUNK: usize = 256;

type SetFn = dyn Fn(&[usize]) -> f64 + Send + Sync;

/// An external monotone submodular set function with a call counter.
#[derive(Clone)]
pub struct SetOracle {
    name: String,
    f: Arc<SetFn>,
    calls: Arc<AtomicU64>,
}

impl SetOracle {
    pub fn new(
        name: impl Into<String>,
        f: impl Fn(&[usize]) -> f64 + Send + Sync + 'static,
    ) -> Self {
        Self {
            name: name.into(),
            f: Arc::new(f),
            calls: Arc::new(AtomicU64::new(0)),
        }
    }

    pub fn eval(&self, set: &[usize]) -> f64 {
        self.calls.fetch_add(1, Ordering::Relaxed);
        (self.f)(set)
    }

    /// Number of evaluations so far (shared between clones).
    pub fn calls(&self) -> u64 {
        self.calls.load(Ordering::Relaxed)
    }

    pub fn name(&self) -> &str {
        &self.name
    }
}

impl fmt::Debug for SetOracle {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("SetOracle")
            .field("name", &self.name)
            .field("calls", &self.calls())
            .finish()
    }
}

#[derive(Clone, Debug)]
pub enum Rule {
    Sntv,
    Bloc,
    KBorda,
    AlphaCc,
    BetaCc,
    Oracle(SetOracle),
}

impl Rule {
    pub fn builtin() -> [Rule; 5] {
        [
            Rule::Sntv,
            Rule::Bloc,
            Rule::KBorda,
            Rule::AlphaCc,
            Rule::BetaCc,
        ]
    }

    pub fn name(&self) -> &str {
        match self {
            Rule::Sntv => "sntv",
            Rule::Bloc => "bloc",
            Rule::KBorda => "k-borda",
            Rule::AlphaCc => "alpha-cc",
            Rule::BetaCc => "beta-cc",
            Rule::Oracle(o) => o.name(),
        }
    }

    pub fn from_name(s: &str) -> Result<Rule> {
        match s.to_ascii_lowercase().replace('_', "-").as_str() {
            "sntv" => Ok(Rule::Sntv),
            "bloc" => Ok(Rule::Bloc),
            "k-borda" | "kborda" | "borda" => Ok(Rule::KBorda),
            "alpha-cc" | "alphacc" | "α-cc" => Ok(Rule::AlphaCc),
            "beta-cc" | "betacc" | "β-cc" => Ok(Rule::BetaCc),
            other => Err(Error::Unsupported(format!(
                "unknown rule '{other}' (expected sntv, bloc, k-borda, alpha-cc, beta-cc)"
            ))),
        }
    }

    /// `f(S) = Σ w_c` for some weight vector.
    pub fn is_modular(&self) -> bool {
        matches!(self, Rule::Sntv | Rule::Bloc | Rule::KBorda)
    }

    /// Score values are integers, so exact solvers can use integer weights.
    pub fn is_builtin(&self) -> bool {
        !matches!(self, Rule::Oracle(_))
    }

    pub fn requires_complete_prefs(&self) -> bool {
        matches!(self, Rule::KBorda | Rule::BetaCc)
    }
}

/// A point of `[0,1]^m`.
#[derive(Clone, Debug, PartialEq)]
pub struct FractionalPoint(Vec<f64>);

impl FractionalPoint {
    /// Validates coordinates against `[0,1]` within [`COORD_TOL`] and clamps.
    pub fn new(y: Vec<f64>) -> Result<Self> {
        if let Some((i, v)) = y
            .iter()
            .enumerate()
            .find(|(_, v)| !v.is_finite() || **v < -COORD_TOL || **v > 1.0 + COORD_TOL)
        {
            return Err(Error::Numerical(format!(
                "coordinate {i} = {v} outside [0,1]"
            )));
        }
        Ok(Self(y.into_iter().map(|v| v.clamp(0.0, 1.0)).collect()))
    }

    pub fn indicator(m: usize, members: &[usize]) -> Self {
        let mut y = vec![0.0; m];
        for &c in members {
            y[c] = 1.0;
        }
        Self(y)
    }

    pub fn into_inner(self) -> Vec<f64> {
        self.0
    }
}

impl std::ops::Deref for FractionalPoint {
    type Target = [f64];
    fn deref(&self) -> &[f64] {
        &self.0
    }
}

/// How to evaluate the multilinear extension.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum GradMode {
    Exact,
    MonteCarlo { samples: usize, seed: u64 },
}

/// A Monte-Carlo estimate with its standard error.
#[derive(Clone, Copy, Debug)]
pub struct Estimate {
    pub mean: f64,
    pub std_err: f64,
}

enum Kind {
    Modular(Vec<f64>),
    Positional {
        /// gamma[r] for 1-based position r; gamma[0] = 0 stands for "absent".
        gamma: Vec<f64>,
        /// rank[v*m + c]: 1-based position of c for voter v, 0 if unlisted.
        rank: Vec<u32>,
    },
    Oracle(SetOracle),
}

/// A rule bound to an instance with its lookup tables precomputed.
pub struct Scorer<'a> {
    inst: &'a Instance,
    kind: Kind,
}

impl<'a> Scorer<'a> {
    pub fn new(rule: &Rule, inst: &'a Instance) -> Result<Self> {
        let m = inst.m();
        if rule.requires_complete_prefs() {
            if let Some((v, l)) = inst.prefs().iter().enumerate().find(|(_, l)| l.len() != m) {
                return Err(Error::IncompletePreferences {
                    rule: if matches!(rule, Rule::KBorda) {
                        "k-borda"
                    } else {
                        "beta-cc"
                    },
                    voter: v + 1,
                    len: l.len(),
                    m,
                });
            }
        }
        let kind = match rule {
            Rule::Sntv => {
                let mut w = vec![0.0; m];
                for l in inst.prefs() {
                    if let Some(&c) = l.first() {
                        w[c] += 1.0;
                    }
                }
                Kind::Modular(w)
            }
            Rule::Bloc => {
                let mut w = vec![0.0; m];
                for l in inst.prefs() {
                    for &c in l.iter().take(inst.k()) {
                        w[c] += 1.0;
                    }
                }
                Kind::Modular(w)
            }
            Rule::KBorda => {
                let mut w = vec![0.0; m];
                for l in inst.prefs() {
                    for (i, &c) in l.iter().enumerate() {
                        w[c] += (m - (i + 1)) as f64;
                    }
                }
                Kind::Modular(w)
            }
            Rule::AlphaCc | Rule::BetaCc => {
                let mut gamma = vec![0.0; m + 1];
                for (r, g) in gamma.iter_mut().enumerate().skip(1) {
                    *g = match rule {
                        Rule::AlphaCc => f64::from(u8::from(r <= inst.k())),
                        _ => (m - r) as f64,
                    };
                }
                let mut rank = vec![0u32; inst.n() * m];
                for (v, l) in inst.prefs().iter().enumerate() {
                    for (i, &c) in l.iter().enumerate() {
                        rank[v * m + c] = (i + 1) as u32;
                    }
                }
                Kind::Positional { gamma, rank }
            }
            Rule::Oracle(o) => Kind::Oracle(o.clone()),
        };
        Ok(Self { inst, kind })
    }

    pub fn instance(&self) -> &'a Instance {
        self.inst
    }

    /// Per-candidate weights for modular rules.
    pub fn weights(&self) -> Option<&[f64]> {
        match &self.kind {
            Kind::Modular(w) => Some(w),
            _ => None,
        }
    }

    pub fn is_oracle(&self) -> bool {
        matches!(self.kind, Kind::Oracle(_))
    }

    /// Evaluations made so far by an oracle rule.
    pub fn oracle_calls(&self) -> Option<u64> {
        match &self.kind {
            Kind::Oracle(o) => Some(o.calls()),
            _ => None,
        }
    }

    #[inline]
    fn gamma_of(gamma: &[f64], rank: &[u32], m: usize, v: usize, c: usize) -> f64 {
        gamma[rank[v * m + c] as usize]
    }

    /// `f(S)` for any subset (not necessarily of size k).
    pub fn eval(&self, set: &[usize]) -> f64 {
        match &self.kind {
            Kind::Modular(w) => set.iter().map(|&c| w[c]).sum(),
            Kind::Positional { gamma, rank } => {
                let m = self.inst.m();
                (0..self.inst.n())
                    .map(|v| {
                        set.iter()
                            .map(|&c| Self::gamma_of(gamma, rank, m, v, c))
                            .fold(0.0, f64::max)
                    })
                    .sum()
            }
            Kind::Oracle(o) => o.eval(set),
        }
    }

    /// `f(S ∪ {c}) − f(S)` for `c ∉ S`.
    pub fn marginal(&self, set: &[usize], c: usize) -> f64 {
        match &self.kind {
            Kind::Modular(w) => w[c],
            Kind::Positional { gamma, rank } => {
                let m = self.inst.m();
                (0..self.inst.n())
                    .map(|v| {
                        let best = set
                            .iter()
                            .map(|&s| Self::gamma_of(gamma, rank, m, v, s))
                            .fold(0.0, f64::max);
                        (Self::gamma_of(gamma, rank, m, v, c) - best).max(0.0)
                    })
                    .sum()
            }
            Kind::Oracle(o) => {
                let mut with = set.to_vec();
                with.push(c);
                o.eval(&with) - o.eval(set)
            }
        }
    }

    /// Incremental state for greedy algorithms.
    pub fn gain_state(&self) -> GainState<'_, 'a> {
        let cur = match &self.kind {
            Kind::Positional { .. } => vec![0.0; self.inst.n()],
            _ => Vec::new(),
        };
        let base = match &self.kind {
            Kind::Oracle(o) => o.eval(&[]),
            _ => 0.0,
        };
        GainState {
            scorer: self,
            members: Vec::new(),
            cur,
            value: base,
        }
    }

    /// Exact multilinear extension; unavailable for oracle rules.
    pub fn multilinear_exact(&self, y: &[f64]) -> Result<f64> {
        match &self.kind {
            Kind::Modular(w) => Ok(w.iter().zip(y).map(|(w, y)| w * y).sum()),
            Kind::Positional { gamma, .. } => {
                let total = self
                    .inst
                    .prefs()
                    .iter()
                    .map(|list| {
                        let mut none = 1.0;
                        let mut acc = 0.0;
                        for (i, &c) in list.iter().enumerate() {
                            let g = gamma[i + 1];
                            if g == 0.0 {
                                break;
                            }
                            acc += g * y[c] * none;
                            none *= 1.0 - y[c];
                        }
                        acc
                    })
                    .sum();
                Ok(total)
            }
            Kind::Oracle(_) => Err(Error::Unsupported(
                "exact multilinear evaluation is unavailable for oracle rules".into(),
            )),
        }
    }

    /// Exact gradient: component i is `F(y | y_i=1) − F(y | y_i=0)`.
    pub fn multilinear_grad_exact(&self, y: &[f64]) -> Result<Vec<f64>> {
        match &self.kind {
            Kind::Modular(w) => Ok(w.clone()),
            Kind::Positional { gamma, .. } => {
                let m = self.inst.m();
                let mut grad = vec![0.0; m];
                let mut none = Vec::with_capacity(m);
                for list in self.inst.prefs() {
                    let len = list
                        .iter()
                        .enumerate()
                        .take_while(|(i, _)| gamma[i + 1] > 0.0)
                        .count();
                    none.clear();
                    let mut p = 1.0;
                    for &c in &list[..len] {
                        none.push(p);
                        p *= 1.0 - y[c];
                    }
                    // tail = expected score from later positions, given none so far chosen
                    let mut tail = 0.0;
                    for i in (0..len).rev() {
                        let c = list[i];
                        let g = gamma[i + 1];
                        grad[c] += none[i] * (g - tail);
                        tail = g * y[c] + (1.0 - y[c]) * tail;
                    }
                }
                Ok(grad)
            }
            Kind::Oracle(_) => Err(Error::Unsupported(
                "exact multilinear gradient is unavailable for oracle rules".into(),
            )),
        }
    }

    fn sample_set(rng: &mut seed::Rng, y: &[f64], out: &mut Vec<usize>) {
        out.clear();
        for (i, &p) in y.iter().enumerate() {
            if rng.gen::<f64>() < p {
                out.push(i);
            }
        }
    }

    /// Monte-Carlo estimate of `F(y)`. Samples are split into fixed chunks with
    /// derived seeds, so the result does not depend on the worker count.
    pub fn multilinear_mc(&self, y: &[f64], samples: usize, seed: u64) -> Estimate {
        let chunks = samples.div_ceil(MC_CHUNK);
        let parts: Vec<(f64, f64)> = (0..chunks)
            .into_par_iter()
            .map(|ci| {
                let mut rng = seed::child_rng(seed, STREAM_MC, ci as u64);
                let count = MC_CHUNK.min(samples - ci * MC_CHUNK);
                let mut set = Vec::new();
                let (mut s, mut s2) = (0.0, 0.0);
                for _ in 0..count {
                    Self::sample_set(&mut rng, y, &mut set);
                    let v = self.eval(&set);
                    s += v;
                    s2 += v * v;
                }
                (s, s2)
            })
            .collect();
        let (s, s2) = parts.iter().fold((0.0, 0.0), |a, b| (a.0 + b.0, a.1 + b.1));
        moments_to_estimate(s, s2, samples)
    }

    /// Monte-Carlo gradient with per-coordinate standard errors.
    pub fn multilinear_grad_mc(
        &self,
        y: &[f64],
        samples: usize,
        seed: u64,
    ) -> (Vec<f64>, Vec<f64>) {
        let m = self.inst.m();
        let chunks = samples.div_ceil(MC_CHUNK);
        let parts: Vec<(Vec<f64>, Vec<f64>)> = (0..chunks)
            .into_par_iter()
            .map(|ci| {
                let mut rng = seed::child_rng(seed, STREAM_MC, ci as u64);
                let count = MC_CHUNK.min(samples - ci * MC_CHUNK);
                let mut set = Vec::new();
                let mut s = vec![0.0; m];
                let mut s2 = vec![0.0; m];
                let mut d = vec![0.0; m];
                for _ in 0..count {
                    Self::sample_set(&mut rng, y, &mut set);
                    self.swap_in_out_gains(&set, &mut d);
                    for i in 0..m {
                        s[i] += d[i];
                        s2[i] += d[i] * d[i];
                    }
                }
                (s, s2)
            })
            .collect();
        let mut s = vec![0.0; m];
        let mut s2 = vec![0.0; m];
        for (a, b) in &parts {
            for i in 0..m {
                s[i] += a[i];
                s2[i] += b[i];
            }
        }
        let mut mean = vec![0.0; m];
        let mut se = vec![0.0; m];
        for i in 0..m {
            let e = moments_to_estimate(s[i], s2[i], samples);
            mean[i] = e.mean;
            se[i] = e.std_err;
        }
        (mean, se)
    }

    /// `out[i] = f(R ∪ {i}) − f(R \ {i})` for every candidate.
    fn swap_in_out_gains(&self, set: &[usize], out: &mut [f64]) {
        let m = self.inst.m();
        match &self.kind {
            Kind::Modular(w) => out.copy_from_slice(w),
            Kind::Positional { gamma, rank } => {
                out.iter_mut().for_each(|x| *x = 0.0);
                for v in 0..self.inst.n() {
                    let (mut best, mut second, mut arg) = (0.0, 0.0, usize::MAX);
                    for &c in set {
                        let g = Self::gamma_of(gamma, rank, m, v, c);
                        if g > best {
                            second = best;
                            best = g;
                            arg = c;
                        } else if g > second {
                            second = g;
                        }
                    }
                    let list = &self.inst.prefs()[v];
                    for (i, &c) in list.iter().enumerate() {
                        let g = gamma[i + 1];
                        if g == 0.0 {
                            break;
                        }
                        let without = if c == arg { second } else { best };
                        if g > without {
                            out[c] += g - without;
                        }
                    }
                }
            }
            Kind::Oracle(o) => {
                let mut member = vec![false; m];
                for &c in set {
                    member[c] = true;
                }
                let f_set = o.eval(set);
                let mut tmp = Vec::with_capacity(set.len() + 1);
                for (i, slot) in out.iter_mut().enumerate() {
                    tmp.clear();
                    if member[i] {
                        tmp.extend(set.iter().copied().filter(|&c| c != i));
                        *slot = f_set - o.eval(&tmp);
                    } else {
                        tmp.extend_from_slice(set);
                        tmp.push(i);
                        *slot = o.eval(&tmp) - f_set;
                    }
                }
            }
        }
    }

    pub fn multilinear(&self, y: &[f64], mode: GradMode) -> Result<f64> {
        match mode {
            GradMode::Exact => self.multilinear_exact(y),
            GradMode::MonteCarlo { samples, seed } => {
                Ok(self.multilinear_mc(y, samples, seed).mean)
            }
        }
    }

    pub fn gradient(&self, y: &[f64], mode: GradMode) -> Result<Vec<f64>> {
        match mode {
            GradMode::Exact => self.multilinear_grad_exact(y),
            GradMode::MonteCarlo { samples, seed } => {
                Ok(self.multilinear_grad_mc(y, samples, seed).0)
            }
        }
    }

    /// Exact for built-in rules, Monte-Carlo with default sample counts for oracles.
    pub fn default_mode(&self, seed: u64) -> GradMode {
        if self.is_oracle() {
            GradMode::MonteCarlo {
                samples: DEFAULT_MC_GRAD_SAMPLES,
                seed,
            }
        } else {
            GradMode::Exact
        }
    }
}

fn moments_to_estimate(s: f64, s2: f64, n: usize) -> Estimate {
    if n == 0 {
        return Estimate {
            mean: 0.0,
            std_err: 0.0,
        };
    }
    let nf = n as f64;
    let mean = s / nf;
    let var = if n > 1 {
        ((s2 - nf * mean * mean) / (nf - 1.0)).max(0.0)
    } else {
        0.0
    };
    Estimate {
        mean,
        std_err: (var / nf).sqrt(),
    }
}

/// Greedy bookkeeping: current set, its value, and O(n) marginal gains.
pub struct GainState<'s, 'a> {
    scorer: &'s Scorer<'a>,
    members: Vec<usize>,
    /// per-voter best positional score so far (CC rules only)
    cur: Vec<f64>,
    value: f64,
}

impl GainState<'_, '_> {
    pub fn members(&self) -> &[usize] {
        &self.members
    }

    pub fn value(&self) -> f64 {
        self.value
    }

    pub fn gain(&self, c: usize) -> f64 {
        match &self.scorer.kind {
            Kind::Modular(w) => w[c],
            Kind::Positional { gamma, rank } => {
                let m = self.scorer.inst.m();
                self.cur
                    .iter()
                    .enumerate()
                    .map(|(v, &b)| (Scorer::gamma_of(gamma, rank, m, v, c) - b).max(0.0))
                    .sum()
            }
            Kind::Oracle(o) => {
                let mut with = self.members.clone();
                with.push(c);
                o.eval(&with) - self.value
            }
        }
    }

    pub fn add(&mut self, c: usize) {
        match &self.scorer.kind {
            Kind::Modular(w) => self.value += w[c],
            Kind::Positional { gamma, rank } => {
                let m = self.scorer.inst.m();
                let mut delta = 0.0;
                for (v, b) in self.cur.iter_mut().enumerate() {
                    let g = Scorer::gamma_of(gamma, rank, m, v, c);
                    if g > *b {
                        delta += g - *b;
                        *b = g;
                    }
                }
                self.value += delta;
            }
            Kind::Oracle(o) => {
                self.members.push(c);
                self.value = o.eval(&self.members);
                return;
            }
        }
        self.members.push(c);
    }
}

pub fn eval_score(rule: &Rule, inst: &Instance, set: &[usize]) -> Result<f64> {
    Ok(Scorer::new(rule, inst)?.eval(set))
}

pub fn marginal_gain(rule: &Rule, inst: &Instance, set: &[usize], c: usize) -> Result<f64> {
    if set.contains(&c) {
        return Err(Error::InvalidCommittee(format!(
            "candidate {} already in the set",
            c + 1
        )));
    }
    Ok(Scorer::new(rule, inst)?.marginal(set, c))
}

pub fn multilinear_eval(
    rule: &Rule,
    inst: &Instance,
    y: &FractionalPoint,
    mode: GradMode,
) -> Result<f64> {
    Scorer::new(rule, inst)?.multilinear(y, mode)
}

pub fn multilinear_grad(
    rule: &Rule,
    inst: &Instance,
    y: &FractionalPoint,
    mode: GradMode,
) -> Result<Vec<f64>> {
    Scorer::new(rule, inst)?.gradient(y, mode)
}
