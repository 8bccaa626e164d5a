//! Exact solvers for small graphs and full-information comparators.

use std::collections::VecDeque;

use serde::Serialize;
use thiserror::Error;

use crate::graph::{max_degree, Graph, NodeId, VertexSet};

pub const MDS_CAP: usize = 24;
pub const PARTIAL_COVER_CAP: usize = 20;
pub const NEIGHBOR_COLLECT_CAP: usize = 18;

#[derive(Debug, Error, PartialEq)]
pub enum BaselineError {
    #[error("graph has {n} nodes, exhaustive search is capped at {cap}")]
    TooLarge { n: usize, cap: usize },
    #[error("target coverage {target} exceeds node count {n}")]
    Infeasible { target: usize, n: usize },
    #[error("cost must be positive and finite, got {0}")]
    BadCost(f64),
    #[error("node {0} is not in the graph")]
    InvalidNode(u32),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Problem {
    DominatingSet,
    PartialCover,
    NeighborCollect,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Method {
    Exhaustive,
    BranchAndBound,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ExactSolution {
    pub problem: Problem,
    pub value: f64,
    /// Sorted node ids.
    pub set: Vec<NodeId>,
    pub method: Method,
    /// Subsets examined.
    pub explored: u64,
}

impl ExactSolution {
    pub fn vertex_set(&self) -> VertexSet {
        self.set.iter().copied().collect()
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("plain data")
    }
}

/// Closed neighborhoods as bitmasks, bit i for node i+1.
fn closed_masks(g: &Graph, cap: usize) -> Result<Vec<u32>, BaselineError> {
    let n = g.node_count();
    if n > cap || n > 32 {
        return Err(BaselineError::TooLarge { n, cap });
    }
    Ok(g.nodes()
        .map(|v| {
            g.neighbors(v)
                .fold(1u32 << v.index(), |m, w| m | 1 << w.index())
        })
        .collect())
}

fn coverage(masks: &[u32], subset: u32) -> u32 {
    let mut cov = 0;
    let mut rest = subset;
    while rest != 0 {
        cov |= masks[rest.trailing_zeros() as usize];
        rest &= rest - 1;
    }
    cov
}

fn mask_to_set(mask: u32) -> Vec<NodeId> {
    (0..32)
        .filter(|i| mask >> i & 1 == 1)
        .map(NodeId::from_index)
        .collect()
}

/// Calls `f` on every `k`-subset of `n` bits in increasing numeric order;
/// stops early when `f` returns true.
fn for_each_subset(n: usize, k: usize, mut f: impl FnMut(u32) -> bool) {
    if k > n {
        return;
    }
    if k == 0 {
        f(0);
        return;
    }
    let limit = 1u64 << n;
    let mut x: u64 = (1 << k) - 1;
    while x < limit {
        if f(x as u32) {
            return;
        }
        // next integer with the same popcount
        let c = x & x.wrapping_neg();
        let r = x + c;
        x = (((r ^ x) >> 2) / c) | r;
    }
}

/// Smallest set reaching `target` dominated nodes, by size order.
fn smallest_reaching(
    masks: &[u32],
    target: usize,
    explored: &mut u64,
) -> Option<u32> {
    let n = masks.len();
    for k in 0..=n {
        let mut found = None;
        for_each_subset(n, k, |s| {
            *explored += 1;
            if coverage(masks, s).count_ones() as usize >= target {
                found = Some(s);
                true
            } else {
                false
            }
        });
        if found.is_some() {
            return found;
        }
    }
    None
}

pub fn brute_force_mds(g: &Graph) -> Result<ExactSolution, BaselineError> {
    brute_force_mds_capped(g, MDS_CAP)
}

/// Minimum dominating set by increasing-size subset search.
pub fn brute_force_mds_capped(g: &Graph, cap: usize) -> Result<ExactSolution, BaselineError> {
    let masks = closed_masks(g, cap)?;
    let mut explored = 0;
    let best = smallest_reaching(&masks, masks.len(), &mut explored).expect("V dominates");
    Ok(ExactSolution {
        problem: Problem::DominatingSet,
        value: best.count_ones() as f64,
        set: mask_to_set(best),
        method: Method::Exhaustive,
        explored,
    })
}

pub fn brute_force_partial_cover(g: &Graph, target: usize) -> Result<ExactSolution, BaselineError> {
    brute_force_partial_cover_capped(g, target, PARTIAL_COVER_CAP)
}

/// Smallest S with |D(S)| ≥ target.
pub fn brute_force_partial_cover_capped(
    g: &Graph,
    target: usize,
    cap: usize,
) -> Result<ExactSolution, BaselineError> {
    let n = g.node_count();
    if target > n {
        return Err(BaselineError::Infeasible { target, n });
    }
    let masks = closed_masks(g, cap)?;
    let mut explored = 0;
    let best = smallest_reaching(&masks, target, &mut explored).expect("V reaches any target");
    Ok(ExactSolution {
        problem: Problem::PartialCover,
        value: best.count_ones() as f64,
        set: mask_to_set(best),
        method: Method::Exhaustive,
        explored,
    })
}

pub fn brute_force_neighbor_collect(g: &Graph, c: f64) -> Result<ExactSolution, BaselineError> {
    brute_force_neighbor_collect_capped(g, c, NEIGHBOR_COLLECT_CAP)
}

/// Minimizes f(S) = c|S| + |V \ D(S)|. Sizes are scanned upward and the
/// scan stops once c·|S| alone reaches the best value found.
pub fn brute_force_neighbor_collect_capped(
    g: &Graph,
    c: f64,
    cap: usize,
) -> Result<ExactSolution, BaselineError> {
    if !(c > 0.0 && c.is_finite()) {
        return Err(BaselineError::BadCost(c));
    }
    let masks = closed_masks(g, cap)?;
    let n = masks.len();
    let mut explored = 0;
    let mut best = (n as f64, 0u32);
    for k in 1..=n {
        if c * k as f64 >= best.0 {
            break;
        }
        for_each_subset(n, k, |s| {
            explored += 1;
            let f = c * k as f64 + (n - coverage(&masks, s).count_ones() as usize) as f64;
            if f < best.0 {
                best = (f, s);
            }
            false
        });
    }
    Ok(ExactSolution {
        problem: Problem::NeighborCollect,
        value: best.0,
        set: mask_to_set(best.1),
        method: Method::BranchAndBound,
        explored: explored + 1,
    })
}

/// Classic greedy over all nodes: add the node dominating the most new
/// nodes (smallest id on ties) until everything is dominated.
pub fn full_info_greedy_mds(g: &Graph) -> VertexSet {
    let n = g.node_count();
    let mut dominated = vec![false; n];
    let mut left = n;
    let mut out = VertexSet::new();
    let closed = |v: NodeId| std::iter::once(v).chain(g.neighbors(v));
    while left > 0 {
        let (best, _) = g
            .nodes()
            .map(|v| (v, closed(v).filter(|w| !dominated[w.index()]).count()))
            .fold((NodeId(0), 0), |acc, x| if x.1 > acc.1 { x } else { acc });
        for w in closed(best) {
            if !dominated[w.index()] {
                dominated[w.index()] = true;
                left -= 1;
            }
        }
        out.insert(best);
    }
    out
}

/// A shortest s-t path, or `None` if t is unreachable.
pub fn bfs_shortest_path(
    g: &Graph,
    s: NodeId,
    t: NodeId,
) -> Result<Option<Vec<NodeId>>, BaselineError> {
    for v in [s, t] {
        if !g.contains(v) {
            return Err(BaselineError::InvalidNode(v.0));
        }
    }
    let mut parent = vec![None; g.node_count()];
    parent[s.index()] = Some(s);
    let mut queue = VecDeque::from([s]);
    while let Some(v) = queue.pop_front() {
        if v == t {
            let mut path = vec![t];
            let mut x = t;
            while x != s {
                x = parent[x.index()].expect("visited");
                path.push(x);
            }
            path.reverse();
            return Ok(Some(path));
        }
        for w in g.neighbors(v) {
            if parent[w.index()].is_none() {
                parent[w.index()] = Some(v);
                queue.push_back(w);
            }
        }
    }
    Ok(None)
}

pub fn exact_max_degree(g: &Graph) -> (NodeId, usize) {
    max_degree(g)
}
