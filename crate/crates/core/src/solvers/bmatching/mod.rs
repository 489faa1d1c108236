//! Maximum-weight perfect b-matching and the reduction of modular scoring
//! with `Δ <= 2` to it.
//!
//! Every edge may be used at most once. The general solver splits each
//! vertex `v` into `b(v)` copies and solves a maximum-weight perfect
//! 1-matching with the blossom algorithm.

mod blossom;
mod flow;

pub use blossom::max_weight_matching;
pub use flow::{b_matching_flow, bipartition};

use std::collections::HashMap;

use crate::error::{Error, Result};
use crate::instance::Instance;

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct BMatchingProblem {
    /// Demand per vertex.
    pub b: Vec<usize>,
    /// `(u, v, weight)`; parallel edges allowed, self-loops are not.
    pub edges: Vec<(usize, usize, i64)>,
}

impl BMatchingProblem {
    pub fn n_vertices(&self) -> usize {
        self.b.len()
    }

    fn validate(&self) -> Result<()> {
        let n = self.b.len();
        for &(u, v, _) in &self.edges {
            if u >= n || v >= n {
                return Err(Error::InvalidInstance(format!(
                    "edge ({u}, {v}) out of range"
                )));
            }
            if u == v {
                return Err(Error::InvalidInstance(format!("self-loop at vertex {u}")));
            }
        }
        Ok(())
    }

    /// True when `chosen` (edge indices) covers every vertex exactly `b(v)` times.
    pub fn is_perfect(&self, chosen: &[usize]) -> bool {
        let mut cover = vec![0usize; self.b.len()];
        for &k in chosen {
            let (u, v, _) = self.edges[k];
            cover[u] += 1;
            cover[v] += 1;
        }
        let mut seen = chosen.to_vec();
        seen.sort_unstable();
        seen.dedup();
        seen.len() == chosen.len() && cover == self.b
    }

    pub fn weight(&self, chosen: &[usize]) -> i64 {
        chosen.iter().map(|&k| self.edges[k].2).sum()
    }
}

enum Origin {
    /// matching edge realises problem edge k directly
    Direct(usize),
    /// gadget edge `e_u – e_v`: matched means problem edge k is unused
    GadgetInner(usize),
    GadgetOuter,
}

/// Maximum-weight perfect b-matching; returns the used edge indices, sorted.
pub fn b_matching(prob: &BMatchingProblem) -> Result<Vec<usize>> {
    prob.validate()?;
    let n = prob.b.len();
    let mut copies: Vec<Vec<usize>> = Vec::with_capacity(n);
    let mut next = 0;
    for &b in &prob.b {
        copies.push((next..next + b).collect());
        next += b;
    }
    if next % 2 == 1 {
        return Err(Error::NoPerfectMatching);
    }

    let mut edges: Vec<(usize, usize, i64)> = Vec::new();
    let mut origin: Vec<Origin> = Vec::new();
    let mut direct: HashMap<(usize, usize), usize> = HashMap::new();
    for (k, &(u, v, w)) in prob.edges.iter().enumerate() {
        if prob.b[u] == 0 || prob.b[v] == 0 {
            continue;
        }
        if prob.b[u] == 1 || prob.b[v] == 1 {
            let (x, y) = if prob.b[v] == 1 { (u, v) } else { (v, u) };
            let cy = copies[y][0];
            for &cx in &copies[x] {
                let key = (cx.min(cy), cx.max(cy));
                match direct.get(&key) {
                    Some(&e) if edges[e].2 >= w => {}
                    Some(&e) => {
                        edges[e].2 = w;
                        origin[e] = Origin::Direct(k);
                    }
                    None => {
                        direct.insert(key, edges.len());
                        edges.push((key.0, key.1, w));
                        origin.push(Origin::Direct(k));
                    }
                }
            }
        } else {
            let (eu, ev) = (next, next + 1);
            next += 2;
            edges.push((eu, ev, 0));
            origin.push(Origin::GadgetInner(k));
            for &cu in &copies[u] {
                edges.push((cu, eu, w));
                origin.push(Origin::GadgetOuter);
            }
            for &cv in &copies[v] {
                edges.push((cv, ev, 0));
                origin.push(Origin::GadgetOuter);
            }
        }
    }

    let mate = max_weight_matching(next, &edges, true);
    if mate.iter().any(Option::is_none) {
        return Err(Error::NoPerfectMatching);
    }
    let mut used = Vec::new();
    for (e, &(a, b, _)) in edges.iter().enumerate() {
        let matched = mate[a] == Some(b);
        match origin[e] {
            Origin::Direct(k) if matched => used.push(k),
            Origin::GadgetInner(k) if !matched => used.push(k),
            _ => {}
        }
    }
    used.sort_unstable();
    if !prob.is_perfect(&used) {
        return Err(Error::Numerical(
            "b-matching does not cover every vertex b(v) times".into(),
        ));
    }
    Ok(used)
}

/// The graph built from an instance with `Δ <= 2` and integer weights.
#[derive(Clone, Debug)]
pub struct Delta2Construction {
    pub problem: BMatchingProblem,
    /// `candidate_edge[c]` is the edge standing for candidate `c`.
    pub candidate_edge: Vec<usize>,
    /// sizes of the three vertex layers (group vertices, pendants, sink side)
    pub layers: [usize; 3],
}

/// Group vertices (plus synthetic `{c}` groups with bounds `[0,1]` so that
/// every candidate lies in exactly two), `u_i − ℓ_i` pendant vertices per
/// group vertex, and `2k − Σℓ_i` vertices joined to all pendants.
pub fn delta2_construction(inst: &Instance, weights: &[i64]) -> Result<Delta2Construction> {
    if inst.delta() > 2 {
        return Err(Error::Unsupported(format!(
            "b-matching reduction needs Δ <= 2, got Δ = {}",
            inst.delta()
        )));
    }
    let mut lower: Vec<usize> = inst.groups().iter().map(|g| g.lower).collect();
    let mut upper: Vec<usize> = inst.groups().iter().map(|g| g.upper).collect();
    let mut endpoints = Vec::with_capacity(inst.m());
    for c in 0..inst.m() {
        let mut gs = inst.groups_of(c).to_vec();
        while gs.len() < 2 {
            gs.push(lower.len());
            lower.push(0);
            upper.push(1);
        }
        endpoints.push((gs[0], gs[1]));
    }
    let v1 = lower.len();
    let sum_lower: usize = lower.iter().sum();
    if sum_lower > 2 * inst.k() {
        return Err(Error::Infeasible(format!(
            "lower bounds sum to {sum_lower}, more than 2k = {}",
            2 * inst.k()
        )));
    }
    let v2: usize = lower.iter().zip(&upper).map(|(l, u)| u - l).sum();
    let v3 = 2 * inst.k() - sum_lower;

    let mut b = upper.clone();
    b.extend(std::iter::repeat_n(1, v2 + v3));
    let mut edges: Vec<(usize, usize, i64)> = endpoints
        .iter()
        .zip(weights)
        .map(|(&(x, y), &w)| (x, y, w))
        .collect();
    let mut pendant = v1;
    let mut pendants = Vec::with_capacity(v2);
    for i in 0..v1 {
        for _ in 0..upper[i] - lower[i] {
            edges.push((i, pendant, 0));
            pendants.push(pendant);
            pendant += 1;
        }
    }
    for t in 0..v3 {
        for &p in &pendants {
            edges.push((p, v1 + v2 + t, 0));
        }
    }
    Ok(Delta2Construction {
        problem: BMatchingProblem { b, edges },
        candidate_edge: (0..inst.m()).collect(),
        layers: [v1, v2, v3],
    })
}

/// Optimal committee for modular integer weights when `Δ <= 2`.
pub(crate) fn delta2_select(inst: &Instance, weights: &[i64]) -> Result<Vec<usize>> {
    let cons = delta2_construction(inst, weights)?;
    let used = b_matching(&cons.problem)?;
    let members: Vec<usize> = (0..inst.m())
        .filter(|&c| used.binary_search(&cons.candidate_edge[c]).is_ok())
        .collect();
    debug_assert!(inst.is_feasible(&members));
    Ok(members)
}
