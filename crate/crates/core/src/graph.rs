//! Immutable multigraph with 1-based node ids, domination primitives and
//! r-neighborhood views.

use std::collections::{BTreeMap, BTreeSet, VecDeque};
use std::fmt;
use std::hash::Hash;
use std::io::{BufRead, Write};

use indexmap::IndexSet;
use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum GraphError {
    #[error("node {node} out of range 1..={n}")]
    InvalidNode { node: u32, n: usize },
    #[error("graph must have at least one node")]
    Empty,
    #[error("neighborhood view requires a non-empty seed set")]
    EmptySeedSet,
    #[error("radius must be at least 1")]
    ZeroRadius,
    #[error("line {line}: {msg}")]
    Parse { line: usize, msg: String },
    #[error("io error: {0}")]
    Io(#[from] std::io::Error),
}

/// Creation-order node index, 1-based.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct NodeId(pub u32);

impl NodeId {
    #[inline]
    pub fn index(self) -> usize {
        self.0 as usize - 1
    }

    #[inline]
    pub fn from_index(i: usize) -> Self {
        NodeId(i as u32 + 1)
    }
}

impl fmt::Display for NodeId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

/// Visibility rule for edges between two nodes on the outer shell of a view.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Mode {
    Open,
    Closed,
}

/// Undirected multigraph. Self-loops are stored once in the adjacency list
/// and contribute 2 to the degree; parallel edges are kept.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Graph {
    n: usize,
    edges: Vec<(NodeId, NodeId)>,
    offsets: Vec<usize>,
    adj: Vec<NodeId>,
    degree: Vec<u32>,
}

impl Graph {
    /// Builds a graph from an edge list. The edge order is retained for
    /// serialization.
    pub fn from_edges(n: usize, edges: Vec<(NodeId, NodeId)>) -> Result<Self, GraphError> {
        if n == 0 {
            return Err(GraphError::Empty);
        }
        let mut counts = vec![0usize; n];
        let mut degree = vec![0u32; n];
        for &(u, v) in &edges {
            for w in [u, v] {
                if w.0 == 0 || w.index() >= n {
                    return Err(GraphError::InvalidNode { node: w.0, n });
                }
            }
            degree[u.index()] += 1;
            degree[v.index()] += 1;
            counts[u.index()] += 1;
            if u != v {
                counts[v.index()] += 1;
            }
        }
        let mut offsets = Vec::with_capacity(n + 1);
        offsets.push(0);
        for c in &counts {
            offsets.push(offsets.last().unwrap() + c);
        }
        let mut fill = offsets[..n].to_vec();
        let mut adj = vec![NodeId(0); offsets[n]];
        for &(u, v) in &edges {
            adj[fill[u.index()]] = v;
            fill[u.index()] += 1;
            if u != v {
                adj[fill[v.index()]] = u;
                fill[v.index()] += 1;
            }
        }
        for i in 0..n {
            adj[offsets[i]..offsets[i + 1]].sort_unstable();
        }
        Ok(Graph {
            n,
            edges,
            offsets,
            adj,
            degree,
        })
    }

    pub fn node_count(&self) -> usize {
        self.n
    }

    pub fn edge_count(&self) -> usize {
        self.edges.len()
    }

    pub fn edges(&self) -> &[(NodeId, NodeId)] {
        &self.edges
    }

    pub fn nodes(&self) -> impl Iterator<Item = NodeId> + '_ {
        (0..self.n).map(NodeId::from_index)
    }

    pub fn contains(&self, v: NodeId) -> bool {
        v.0 >= 1 && (v.0 as usize) <= self.n
    }

    pub fn check(&self, v: NodeId) -> Result<(), GraphError> {
        if self.contains(v) {
            Ok(())
        } else {
            Err(GraphError::InvalidNode { node: v.0, n: self.n })
        }
    }

    /// Multigraph degree; a loop counts twice.
    #[inline]
    pub fn degree(&self, v: NodeId) -> usize {
        self.degree[v.index()] as usize
    }

    /// Sorted adjacency multiset of `v`, loops listed once.
    #[inline]
    pub fn adjacency(&self, v: NodeId) -> &[NodeId] {
        &self.adj[self.offsets[v.index()]..self.offsets[v.index() + 1]]
    }

    /// Distinct neighbors of `v`, excluding `v` itself.
    pub fn neighbors(&self, v: NodeId) -> impl Iterator<Item = NodeId> + '_ {
        let a = self.adjacency(v);
        a.iter()
            .enumerate()
            .filter(move |&(i, &w)| w != v && (i == 0 || a[i - 1] != w))
            .map(|(_, &w)| w)
    }

    pub fn loop_count(&self, v: NodeId) -> usize {
        self.adjacency(v).iter().filter(|&&w| w == v).count()
    }

    pub fn total_loops(&self) -> usize {
        self.edges.iter().filter(|(u, v)| u == v).count()
    }

    /// Applies a node permutation: node `v` becomes `perm[v.index()]`.
    pub fn relabel(&self, perm: &[NodeId]) -> Graph {
        let edges = self
            .edges
            .iter()
            .map(|&(u, v)| (perm[u.index()], perm[v.index()]))
            .collect();
        Graph::from_edges(self.n, edges).expect("permutation keeps node ids in range")
    }

    /// Writes the text format: `n edge_count` followed by one `u v` line per edge.
    pub fn write_text<W: Write>(&self, mut w: W) -> Result<(), GraphError> {
        writeln!(w, "{} {}", self.n, self.edges.len())?;
        for (u, v) in &self.edges {
            writeln!(w, "{} {}", u.0, v.0)?;
        }
        Ok(())
    }

    pub fn to_text(&self) -> String {
        let mut buf = Vec::new();
        self.write_text(&mut buf).expect("writing to a Vec cannot fail");
        String::from_utf8(buf).expect("ascii output")
    }

    pub fn read_text<R: BufRead>(r: R) -> Result<Self, GraphError> {
        let mut lines = r.lines().enumerate();
        let (n, m) = loop {
            let Some((i, line)) = lines.next() else {
                return Err(GraphError::Parse {
                    line: 1,
                    msg: "missing header".into(),
                });
            };
            let line = line?;
            if line.trim().is_empty() {
                continue;
            }
            break parse_pair(&line, i + 1)?;
        };
        let mut edges = Vec::with_capacity(m);
        for (i, line) in lines {
            let line = line?;
            if line.trim().is_empty() {
                continue;
            }
            let (u, v) = parse_pair(&line, i + 1)?;
            edges.push((NodeId(u as u32), NodeId(v as u32)));
        }
        if edges.len() != m {
            return Err(GraphError::Parse {
                line: 1,
                msg: format!("header declares {m} edges, found {}", edges.len()),
            });
        }
        Graph::from_edges(n, edges)
    }

    pub fn from_text(s: &str) -> Result<Self, GraphError> {
        Graph::read_text(s.as_bytes())
    }
}

fn parse_pair(line: &str, lineno: usize) -> Result<(usize, usize), GraphError> {
    let mut it = line.split_whitespace();
    let mut next = || -> Result<usize, GraphError> {
        it.next()
            .ok_or_else(|| GraphError::Parse {
                line: lineno,
                msg: "expected two integers".into(),
            })?
            .parse()
            .map_err(|e| GraphError::Parse {
                line: lineno,
                msg: format!("{e}"),
            })
    };
    let a = next()?;
    let b = next()?;
    Ok((a, b))
}

/// A set of nodes that remembers insertion order.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct VertexSet<T: Hash + Eq = NodeId> {
    members: IndexSet<T>,
}

impl<T: Hash + Eq + Copy> Default for VertexSet<T> {
    fn default() -> Self {
        Self::new()
    }
}

impl<T: Hash + Eq + Copy> VertexSet<T> {
    pub fn new() -> Self {
        VertexSet {
            members: IndexSet::new(),
        }
    }

    /// Returns false if `v` was already present.
    pub fn insert(&mut self, v: T) -> bool {
        self.members.insert(v)
    }

    pub fn contains(&self, v: &T) -> bool {
        self.members.contains(v)
    }

    pub fn len(&self) -> usize {
        self.members.len()
    }

    pub fn is_empty(&self) -> bool {
        self.members.is_empty()
    }

    /// Members in insertion order.
    pub fn iter(&self) -> impl Iterator<Item = T> + '_ {
        self.members.iter().copied()
    }
}

impl<T: Hash + Eq + Copy> FromIterator<T> for VertexSet<T> {
    fn from_iter<I: IntoIterator<Item = T>>(iter: I) -> Self {
        VertexSet {
            members: iter.into_iter().collect(),
        }
    }
}

/// What an observer of the r-neighborhood around a set sees.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct LocalView<L: Ord> {
    pub mode: Mode,
    pub radius: u32,
    /// Visible nodes with their full multigraph degree.
    pub nodes: BTreeMap<L, usize>,
    /// Visible edges as a sorted multiset of `(min, max)` pairs.
    pub edges: Vec<(L, L)>,
    /// Visible nodes at distance exactly `radius`.
    pub frontier: BTreeSet<L>,
}

impl<L: Ord + Copy> LocalView<L> {
    pub fn empty(mode: Mode, radius: u32) -> Self {
        LocalView {
            mode,
            radius,
            nodes: BTreeMap::new(),
            edges: Vec::new(),
            frontier: BTreeSet::new(),
        }
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn contains(&self, v: &L) -> bool {
        self.nodes.contains_key(v)
    }

    /// Renames every node through `f` and re-normalizes the edge multiset.
    pub fn map_labels<M: Ord + Copy>(&self, mut f: impl FnMut(L) -> M) -> LocalView<M> {
        let nodes = self.nodes.iter().map(|(&v, &d)| (f(v), d)).collect();
        let mut edges: Vec<(M, M)> = self
            .edges
            .iter()
            .map(|&(a, b)| {
                let (a, b) = (f(a), f(b));
                if a <= b {
                    (a, b)
                } else {
                    (b, a)
                }
            })
            .collect();
        edges.sort_unstable();
        let frontier = self.frontier.iter().map(|&v| f(v)).collect();
        LocalView {
            mode: self.mode,
            radius: self.radius,
            nodes,
            edges,
            frontier,
        }
    }
}

/// D(S) = N(S) ∪ S.
pub fn dominated_set(g: &Graph, s: &VertexSet) -> Result<VertexSet, GraphError> {
    let mut seen = vec![false; g.node_count()];
    let mut out = VertexSet::new();
    for v in s.iter() {
        g.check(v)?;
        if !seen[v.index()] {
            seen[v.index()] = true;
            out.insert(v);
        }
    }
    for v in s.iter() {
        for w in g.neighbors(v) {
            if !seen[w.index()] {
                seen[w.index()] = true;
                out.insert(w);
            }
        }
    }
    Ok(out)
}

pub fn dominated_count(g: &Graph, s: &VertexSet) -> Result<usize, GraphError> {
    Ok(dominated_set(g, s)?.len())
}

pub fn is_dominating(g: &Graph, s: &VertexSet) -> Result<bool, GraphError> {
    Ok(dominated_count(g, s)? == g.node_count())
}

/// Σ_{k=1..d} 1/k.
pub fn harmonic_number(d: usize) -> f64 {
    (1..=d).map(|k| 1.0 / k as f64).sum()
}

/// Node of maximum degree, smallest index on ties.
pub fn max_degree(g: &Graph) -> (NodeId, usize) {
    let mut best = (NodeId(1), g.degree(NodeId(1)));
    for v in g.nodes().skip(1) {
        let d = g.degree(v);
        if d > best.1 {
            best = (v, d);
        }
    }
    best
}

pub fn is_connected(g: &Graph) -> bool {
    let n = g.node_count();
    let mut seen = vec![false; n];
    let mut stack = vec![NodeId(1)];
    seen[0] = true;
    let mut count = 1;
    while let Some(v) = stack.pop() {
        for w in g.neighbors(v) {
            if !seen[w.index()] {
                seen[w.index()] = true;
                count += 1;
                stack.push(w);
            }
        }
    }
    count == n
}

/// Multi-source BFS distances from `s`, truncated at `r`. Unreached nodes
/// hold `u32::MAX`.
pub fn distances_within(g: &Graph, s: &VertexSet, r: u32) -> Result<Vec<u32>, GraphError> {
    let mut dist = vec![u32::MAX; g.node_count()];
    let mut queue = VecDeque::new();
    for v in s.iter() {
        g.check(v)?;
        if dist[v.index()] != 0 {
            dist[v.index()] = 0;
            queue.push_back(v);
        }
    }
    while let Some(v) = queue.pop_front() {
        let d = dist[v.index()];
        if d == r {
            continue;
        }
        for w in g.neighbors(v) {
            if dist[w.index()] == u32::MAX {
                dist[w.index()] = d + 1;
                queue.push_back(w);
            }
        }
    }
    Ok(dist)
}

/// The r-open or r-closed neighborhood around `s`.
pub fn neighborhood_view(
    g: &Graph,
    s: &VertexSet,
    r: u32,
    mode: Mode,
) -> Result<LocalView<NodeId>, GraphError> {
    if s.is_empty() {
        return Err(GraphError::EmptySeedSet);
    }
    if r == 0 {
        return Err(GraphError::ZeroRadius);
    }
    let dist = distances_within(g, s, r)?;
    let mut view = LocalView::empty(mode, r);
    for v in g.nodes() {
        let d = dist[v.index()];
        if d > r {
            continue;
        }
        view.nodes.insert(v, g.degree(v));
        if d == r {
            view.frontier.insert(v);
        }
        for &w in g.adjacency(v) {
            // each edge once: from its smaller endpoint (loops from v itself)
            if w < v || dist[w.index()] > r {
                continue;
            }
            if mode == Mode::Open && d == r && dist[w.index()] == r {
                continue;
            }
            view.edges.push((v, w));
        }
    }
    view.edges.sort_unstable();
    Ok(view)
}
