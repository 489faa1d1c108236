//! Bipartite perfect b-matching as min-cost flow (successive shortest paths
//! with Bellman–Ford, so negative arc costs are fine).

use super::BMatchingProblem;
use crate::error::{Error, Result};

struct Arc {
    to: usize,
    cap: i64,
    cost: i64,
    /// index into the problem's edge list, for left→right arcs
    edge: Option<usize>,
}

struct Graph {
    arcs: Vec<Arc>,
    adj: Vec<Vec<usize>>,
}

impl Graph {
    fn new(n: usize) -> Self {
        Self {
            arcs: Vec::new(),
            adj: vec![Vec::new(); n],
        }
    }

    fn add(&mut self, from: usize, to: usize, cap: i64, cost: i64, edge: Option<usize>) {
        self.adj[from].push(self.arcs.len());
        self.arcs.push(Arc {
            to,
            cap,
            cost,
            edge,
        });
        self.adj[to].push(self.arcs.len());
        self.arcs.push(Arc {
            to: from,
            cap: 0,
            cost: -cost,
            edge: None,
        });
    }
}

/// Two-colours the graph; `None` if it has an odd cycle.
pub fn bipartition(prob: &BMatchingProblem) -> Option<Vec<bool>> {
    let n = prob.b.len();
    let mut adj = vec![Vec::new(); n];
    for &(u, v, _) in &prob.edges {
        adj[u].push(v);
        adj[v].push(u);
    }
    let mut side: Vec<Option<bool>> = vec![None; n];
    for s in 0..n {
        if side[s].is_some() {
            continue;
        }
        side[s] = Some(false);
        let mut stack = vec![s];
        while let Some(u) = stack.pop() {
            let su = side[u].expect("coloured");
            for &v in &adj[u] {
                match side[v] {
                    None => {
                        side[v] = Some(!su);
                        stack.push(v);
                    }
                    Some(sv) if sv == su => return None,
                    _ => {}
                }
            }
        }
    }
    Some(side.into_iter().map(|s| s.unwrap_or(false)).collect())
}

/// Maximum-weight perfect b-matching on a bipartite graph (each edge usable once).
pub fn b_matching_flow(prob: &BMatchingProblem) -> Result<Vec<usize>> {
    let side = bipartition(prob)
        .ok_or_else(|| Error::Unsupported("flow formulation needs a bipartite graph".into()))?;
    let n = prob.b.len();
    let (src, dst) = (n, n + 1);
    let mut g = Graph::new(n + 2);
    let mut need_left = 0i64;
    let mut need_right = 0i64;
    for v in 0..n {
        let b = prob.b[v] as i64;
        if side[v] {
            g.add(v, dst, b, 0, None);
            need_right += b;
        } else {
            g.add(src, v, b, 0, None);
            need_left += b;
        }
    }
    if need_left != need_right {
        return Err(Error::NoPerfectMatching);
    }
    for (k, &(u, v, w)) in prob.edges.iter().enumerate() {
        let (l, r) = if side[u] { (v, u) } else { (u, v) };
        g.add(l, r, 1, -w, Some(k));
    }

    let total = n + 2;
    let mut flow = 0i64;
    while flow < need_left {
        let mut dist = vec![i64::MAX; total];
        let mut prev = vec![usize::MAX; total];
        dist[src] = 0;
        for _ in 0..total {
            let mut changed = false;
            for u in 0..total {
                if dist[u] == i64::MAX {
                    continue;
                }
                for &a in &g.adj[u] {
                    let arc = &g.arcs[a];
                    if arc.cap > 0 && dist[u] + arc.cost < dist[arc.to] {
                        dist[arc.to] = dist[u] + arc.cost;
                        prev[arc.to] = a;
                        changed = true;
                    }
                }
            }
            if !changed {
                break;
            }
        }
        if dist[dst] == i64::MAX {
            return Err(Error::NoPerfectMatching);
        }
        let mut push = i64::MAX;
        let mut v = dst;
        while v != src {
            let a = prev[v];
            push = push.min(g.arcs[a].cap);
            v = g.arcs[a ^ 1].to;
        }
        let mut v = dst;
        while v != src {
            let a = prev[v];
            g.arcs[a].cap -= push;
            g.arcs[a ^ 1].cap += push;
            v = g.arcs[a ^ 1].to;
        }
        flow += push;
    }
    let mut used: Vec<usize> = g
        .arcs
        .iter()
        .filter(|a| a.edge.is_some() && a.cap == 0)
        .filter_map(|a| a.edge)
        .collect();
    used.sort_unstable();
    Ok(used)
}
