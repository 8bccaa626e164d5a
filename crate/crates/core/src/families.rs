//! Lower-bound graph families with planted optima.
//!
//! Each generator lays the construction out on abstract slots and maps the
//! slots through a random permutation of `1..=n`, so node ids carry no
//! information about the structure.

use std::collections::{BTreeMap, VecDeque};
use std::fmt;
use std::io::Write;
use std::str::FromStr;

use rand::seq::SliceRandom;
use rand::Rng;
use serde::Serialize;
use thiserror::Error;

use crate::graph::{dominated_count, is_connected, is_dominating, Graph, GraphError, NodeId, VertexSet};
use crate::rng::{rng_from_seed, SimRng};

#[derive(Debug, Error)]
pub enum FamilyError {
    #[error("invalid parameters for {family}: {msg}")]
    InvalidParams { family: FamilyKind, msg: String },
    #[error("planted optimum of {family} failed validation: {msg}")]
    Infeasible { family: FamilyKind, msg: String },
    #[error("unknown family {0:?}")]
    UnknownFamily(String),
    #[error(transparent)]
    Graph(#[from] GraphError),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum FamilyKind {
    BrokenPaths,
    TreeHub,
    CliquePendant,
    TwoStarsPaths,
    StarsWithPendants,
    CliqueStar,
}

impl FamilyKind {
    pub const ALL: [FamilyKind; 6] = [
        FamilyKind::BrokenPaths,
        FamilyKind::TreeHub,
        FamilyKind::CliquePendant,
        FamilyKind::TwoStarsPaths,
        FamilyKind::StarsWithPendants,
        FamilyKind::CliqueStar,
    ];

    pub fn name(self) -> &'static str {
        match self {
            FamilyKind::BrokenPaths => "broken_paths",
            FamilyKind::TreeHub => "tree_hub",
            FamilyKind::CliquePendant => "clique_pendant",
            FamilyKind::TwoStarsPaths => "two_stars_paths",
            FamilyKind::StarsWithPendants => "stars_with_pendants",
            FamilyKind::CliqueStar => "clique_star",
        }
    }
}

impl fmt::Display for FamilyKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for FamilyKind {
    type Err = FamilyError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let norm = s.replace('-', "_");
        FamilyKind::ALL
            .into_iter()
            .find(|f| f.name() == norm)
            .ok_or_else(|| FamilyError::UnknownFamily(s.to_string()))
    }
}

/// Problem the planted optimum solves.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
#[serde(rename_all = "snake_case", tag = "kind")]
pub enum Objective {
    StConnect,
    GainPerCost,
    DominatingSet,
    PartialCover { rho: f64 },
    NeighborCollect,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct FamilyParams {
    pub requested_n: usize,
    pub n: usize,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub r: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub k: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub rho: Option<f64>,
    /// Node cost for the neighbor-collecting objective.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub c: Option<f64>,
}

#[derive(Clone, Debug)]
pub struct FamilyInstance {
    pub family: FamilyKind,
    pub graph: Graph,
    pub planted_opt: VertexSet,
    pub objective: Objective,
    pub params: FamilyParams,
    pub special_nodes: BTreeMap<String, NodeId>,
}

#[derive(Serialize)]
struct Sidecar<'a> {
    family: FamilyKind,
    params: &'a FamilyParams,
    objective: Objective,
    special_nodes: BTreeMap<&'a str, u32>,
    planted_opt: Vec<u32>,
    #[serde(skip_serializing_if = "Option::is_none")]
    planted_value: Option<f64>,
}

impl FamilyInstance {
    pub fn special(&self, name: &str) -> NodeId {
        self.special_nodes[name]
    }

    /// Objective value of the planted optimum. `c` is the per-node cost of
    /// the neighbor-collecting objective and is ignored otherwise.
    pub fn planted_value(&self, c: f64) -> f64 {
        let size = self.planted_opt.len() as f64;
        let covered = dominated_count(&self.graph, &self.planted_opt).expect("valid nodes");
        match self.objective {
            Objective::GainPerCost => covered as f64 / size,
            Objective::NeighborCollect => c * size + (self.graph.node_count() - covered) as f64,
            _ => size,
        }
    }

    /// Writes the graph text format to `graph` and the JSON sidecar to
    /// `sidecar`.
    pub fn write_files<W1: Write, W2: Write>(
        &self,
        graph: W1,
        mut sidecar: W2,
    ) -> Result<(), GraphError> {
        self.graph.write_text(graph)?;
        serde_json::to_writer_pretty(&mut sidecar, &self.sidecar())
            .map_err(|e| GraphError::Io(e.into()))?;
        sidecar.write_all(b"\n")?;
        Ok(())
    }

    pub fn sidecar_json(&self) -> String {
        serde_json::to_string_pretty(&self.sidecar()).expect("plain data")
    }

    fn sidecar(&self) -> Sidecar<'_> {
        let mut planted_opt: Vec<u32> = self.planted_opt.iter().map(|v| v.0).collect();
        planted_opt.sort_unstable();
        Sidecar {
            family: self.family,
            params: &self.params,
            objective: self.objective,
            special_nodes: self
                .special_nodes
                .iter()
                .map(|(k, v)| (k.as_str(), v.0))
                .collect(),
            planted_opt,
            planted_value: match (self.objective, self.params.c) {
                (Objective::NeighborCollect, None) => None,
                (_, c) => Some(self.planted_value(c.unwrap_or(1.0))),
            },
        }
    }
}

/// Parameters accepted by [`build`]; unused ones are ignored per family.
#[derive(Clone, Copy, Debug)]
pub struct FamilyArgs {
    pub n: usize,
    pub r: usize,
    pub k: usize,
}

impl FamilyArgs {
    pub fn new(n: usize) -> Self {
        FamilyArgs { n, r: 1, k: 1 }
    }
}

pub fn build(kind: FamilyKind, args: FamilyArgs, seed: u64) -> Result<FamilyInstance, FamilyError> {
    let rng = &mut rng_from_seed(seed);
    match kind {
        FamilyKind::BrokenPaths => broken_paths(args.n, args.r, args.k, rng),
        FamilyKind::TreeHub if args.r * args.k > 1 => tree_hub_connected(args.n, args.r, args.k, rng),
        FamilyKind::TreeHub => tree_hub(args.n, rng),
        FamilyKind::CliquePendant => clique_pendant(args.n, rng),
        FamilyKind::TwoStarsPaths => two_stars_paths(args.n, args.k, rng),
        FamilyKind::StarsWithPendants => stars_with_pendants(args.n, args.k, rng),
        FamilyKind::CliqueStar => clique_star(args.n, rng),
    }
}

/// Allocates shuffled ids to construction slots.
struct Layout {
    ids: Vec<NodeId>,
    next: usize,
    edges: Vec<(NodeId, NodeId)>,
}

impl Layout {
    fn new(n: usize, rng: &mut SimRng) -> Self {
        let mut ids: Vec<NodeId> = (1..=n as u32).map(NodeId).collect();
        ids.shuffle(rng);
        Layout {
            ids,
            next: 0,
            edges: Vec::new(),
        }
    }

    fn node(&mut self) -> NodeId {
        let v = self.ids[self.next];
        self.next += 1;
        v
    }

    fn nodes(&mut self, count: usize) -> Vec<NodeId> {
        (0..count).map(|_| self.node()).collect()
    }

    fn edge(&mut self, a: NodeId, b: NodeId) {
        self.edges.push((a, b));
    }

    fn clique(&mut self, vs: &[NodeId]) {
        for (i, &a) in vs.iter().enumerate() {
            for &b in &vs[i + 1..] {
                self.edge(a, b);
            }
        }
    }

    /// Remaining slots become isolated nodes.
    fn finish(self) -> Graph {
        debug_assert!(self.next <= self.ids.len());
        Graph::from_edges(self.ids.len(), self.edges).expect("ids are in range")
    }
}

fn invalid(family: FamilyKind, msg: impl Into<String>) -> FamilyError {
    FamilyError::InvalidParams {
        family,
        msg: msg.into(),
    }
}

fn infeasible(family: FamilyKind, msg: impl Into<String>) -> FamilyError {
    FamilyError::Infeasible {
        family,
        msg: msg.into(),
    }
}

fn names(pairs: &[(&str, NodeId)]) -> BTreeMap<String, NodeId> {
    pairs.iter().map(|&(k, v)| (k.to_string(), v)).collect()
}

/// Lays out `blocks` blocks of `k` nodes: each block a clique, consecutive
/// blocks joined by a perfect matching except across `cut`, `head` joined
/// to every node of the first block and `tail` to every node of the last.
fn block_chain(
    lay: &mut Layout,
    head: NodeId,
    tail: NodeId,
    blocks: usize,
    k: usize,
    cut: Option<usize>,
) -> Vec<NodeId> {
    let chain: Vec<Vec<NodeId>> = (0..blocks).map(|_| lay.nodes(k)).collect();
    for b in &chain {
        lay.clique(b);
    }
    for i in 0..blocks - 1 {
        if cut == Some(i) {
            continue;
        }
        for (&a, &b) in chain[i].iter().zip(&chain[i + 1]) {
            lay.edge(a, b);
        }
    }
    for &x in &chain[0] {
        lay.edge(head, x);
    }
    for &x in &chain[blocks - 1] {
        lay.edge(x, tail);
    }
    chain.concat()
}

/// BFS from `s` restricted to `allowed`; true if `t` is reached.
fn connected_within(g: &Graph, s: NodeId, t: NodeId, allowed: impl Fn(NodeId) -> bool) -> bool {
    let mut seen = vec![false; g.node_count()];
    let mut queue = VecDeque::from([s]);
    seen[s.index()] = true;
    while let Some(v) = queue.pop_front() {
        if v == t {
            return true;
        }
        for w in g.neighbors(v) {
            if !seen[w.index()] && allowed(w) {
                seen[w.index()] = true;
                queue.push_back(w);
            }
        }
    }
    false
}

/// Parallel s-t chains of 2r+4 blocks of k nodes; all but one chain miss
/// the matching across their middle. The planted optimum is the intact
/// chain with s and t.
pub fn broken_paths(
    n: usize,
    r: usize,
    k: usize,
    rng: &mut SimRng,
) -> Result<FamilyInstance, FamilyError> {
    let fam = FamilyKind::BrokenPaths;
    if r == 0 || k == 0 {
        return Err(invalid(fam, "r and k must be positive"));
    }
    let blocks = 2 * r + 4;
    let per_chain = blocks * k;
    if n < 2 + per_chain {
        return Err(invalid(fam, format!("n must be at least {}", 2 + per_chain)));
    }
    let chains = (n - 2) / per_chain;
    let actual = 2 + chains * per_chain;
    let intact = rng.gen_range(0..chains);

    let mut lay = Layout::new(actual, rng);
    let s = lay.node();
    let t = lay.node();
    let mut planted: VertexSet = [s, t].into_iter().collect();
    for c in 0..chains {
        let cut = (c != intact).then_some(r + 1);
        let nodes = block_chain(&mut lay, s, t, blocks, k, cut);
        if c == intact {
            for v in nodes {
                planted.insert(v);
            }
        }
    }
    let graph = lay.finish();

    if !connected_within(&graph, s, t, |v| planted.contains(&v)) {
        return Err(infeasible(fam, "planted chain does not join s and t"));
    }
    if connected_within(&graph, s, t, |v| v == t || !planted.contains(&v)) {
        return Err(infeasible(fam, "s and t stay joined without the planted chain"));
    }
    Ok(FamilyInstance {
        family: fam,
        graph,
        planted_opt: planted,
        objective: Objective::StConnect,
        params: FamilyParams {
            requested_n: n,
            n: actual,
            r: Some(r),
            k: Some(k),
            rho: None,
            c: None,
        },
        special_nodes: names(&[("s", s), ("t", t)]),
    })
}

fn check_hub_is_best(fam: FamilyKind, g: &Graph, hub: NodeId) -> Result<(), FamilyError> {
    let closed = |v: NodeId| 1 + g.neighbors(v).count();
    let best = g.nodes().map(closed).max().unwrap_or(0);
    if closed(hub) < best {
        return Err(infeasible(fam, "hub does not maximize coverage"));
    }
    Ok(())
}

/// Complete binary tree on n − ⌊√n⌋ nodes; a uniformly chosen leaf is the
/// hub of ⌊√n⌋ extra spokes.
pub fn tree_hub(n: usize, rng: &mut SimRng) -> Result<FamilyInstance, FamilyError> {
    let fam = FamilyKind::TreeHub;
    if n < 4 {
        return Err(invalid(fam, "n must be at least 4"));
    }
    let spokes = n.isqrt();
    let tree = n - spokes;
    let mut lay = Layout::new(n, rng);
    let slots = lay.nodes(tree);
    // heap order: slot i has children 2i+1, 2i+2
    for i in 1..tree {
        lay.edge(slots[(i - 1) / 2], slots[i]);
    }
    let first_leaf = tree / 2;
    let hub = slots[rng.gen_range(first_leaf..tree)];
    for _ in 0..spokes {
        let x = lay.node();
        lay.edge(hub, x);
    }
    let graph = lay.finish();
    check_hub_is_best(fam, &graph, hub)?;
    Ok(FamilyInstance {
        family: fam,
        graph,
        planted_opt: [hub].into_iter().collect(),
        objective: Objective::GainPerCost,
        params: FamilyParams {
            requested_n: n,
            n,
            r: None,
            k: None,
            rho: None,
            c: None,
        },
        special_nodes: names(&[("s", hub), ("hub", hub), ("root", slots[0])]),
    })
}

/// k-edge-connected tree hub: every tree edge becomes a chain of r blocks
/// of k nodes. The tree is the largest that fits in n together with ⌊√n⌋
/// spokes.
pub fn tree_hub_connected(
    n: usize,
    r: usize,
    k: usize,
    rng: &mut SimRng,
) -> Result<FamilyInstance, FamilyError> {
    let fam = FamilyKind::TreeHub;
    if r == 0 || k == 0 {
        return Err(invalid(fam, "r and k must be positive"));
    }
    let spokes = n.isqrt();
    let per_edge = r * k;
    // tree + (tree - 1) * per_edge + spokes <= n
    let tree = (n.saturating_sub(spokes) + per_edge) / (1 + per_edge);
    if tree < 2 {
        return Err(invalid(fam, "n too small for a tree with a leaf"));
    }
    let actual = tree + (tree - 1) * per_edge + spokes;
    let mut lay = Layout::new(actual, rng);
    let slots = lay.nodes(tree);
    for i in 1..tree {
        block_chain(&mut lay, slots[(i - 1) / 2], slots[i], r, k, None);
    }
    let hub = slots[rng.gen_range(tree / 2..tree)];
    for _ in 0..spokes {
        let x = lay.node();
        lay.edge(hub, x);
    }
    let graph = lay.finish();
    check_hub_is_best(fam, &graph, hub)?;
    Ok(FamilyInstance {
        family: fam,
        graph,
        planted_opt: [hub].into_iter().collect(),
        objective: Objective::GainPerCost,
        params: FamilyParams {
            requested_n: n,
            n: actual,
            r: Some(r),
            k: Some(k),
            rho: None,
            c: None,
        },
        special_nodes: names(&[("s", hub), ("hub", hub), ("root", slots[0])]),
    })
}

/// Clique on n − 2 nodes minus one edge (u, v), with pendants u' and v'.
pub fn clique_pendant(n: usize, rng: &mut SimRng) -> Result<FamilyInstance, FamilyError> {
    let fam = FamilyKind::CliquePendant;
    if n < 5 {
        return Err(invalid(fam, "n must be at least 5"));
    }
    let mut lay = Layout::new(n, rng);
    let core = lay.nodes(n - 2);
    let (u, v) = (core[0], core[1]);
    for (i, &a) in core.iter().enumerate() {
        for &b in &core[i + 1..] {
            if (a, b) != (u, v) {
                lay.edge(a, b);
            }
        }
    }
    let (u2, v2) = (lay.node(), lay.node());
    lay.edge(u, u2);
    lay.edge(v, v2);
    let graph = lay.finish();
    let planted: VertexSet = [u, v].into_iter().collect();
    if !is_dominating(&graph, &planted)? {
        return Err(infeasible(fam, "{u, v} is not dominating"));
    }
    Ok(FamilyInstance {
        family: fam,
        graph,
        planted_opt: planted,
        objective: Objective::DominatingSet,
        params: FamilyParams {
            requested_n: n,
            n,
            r: None,
            k: None,
            rho: None,
            c: None,
        },
        special_nodes: names(&[("u", u), ("v", v), ("u'", u2), ("v'", v2)]),
    })
}

/// Large star at v with ⌊n/2⌋ − ⌊√n⌋ − 1 leaves and small star at u with
/// ⌊√n⌋ − 1 leaves. ⌊leaves/k⌋ paths of k nodes hang off distinct large
/// leaves; one of them also touches u. Isolated nodes pad to n.
pub fn two_stars_paths(n: usize, k: usize, rng: &mut SimRng) -> Result<FamilyInstance, FamilyError> {
    let fam = FamilyKind::TwoStarsPaths;
    if k == 0 {
        return Err(invalid(fam, "k must be positive"));
    }
    let s = n.isqrt();
    let leaves = (n / 2).saturating_sub(s + 1);
    if s < 2 || leaves < k {
        return Err(invalid(fam, "n too small for the two stars"));
    }
    let paths = leaves / k;
    let mut lay = Layout::new(n, rng);
    let v = lay.node();
    let big = lay.nodes(leaves);
    for &x in &big {
        lay.edge(v, x);
    }
    let u = lay.node();
    for x in lay.nodes(s - 1) {
        lay.edge(u, x);
    }
    let bridge = rng.gen_range(0..paths);
    let mut bridge_end = u;
    for (p, &leaf) in big.iter().take(paths).enumerate() {
        let chain = lay.nodes(k);
        lay.edge(leaf, chain[0]);
        for w in chain.windows(2) {
            lay.edge(w[0], w[1]);
        }
        if p == bridge {
            bridge_end = chain[k - 1];
            lay.edge(bridge_end, u);
        }
    }
    let graph = lay.finish();
    let planted: VertexSet = [v, u].into_iter().collect();
    if 2 * dominated_count(&graph, &planted)? < n {
        return Err(infeasible(fam, "{v, u} covers fewer than n/2 nodes"));
    }
    Ok(FamilyInstance {
        family: fam,
        graph,
        planted_opt: planted,
        objective: Objective::PartialCover { rho: 0.5 },
        params: FamilyParams {
            requested_n: n,
            n,
            r: None,
            k: Some(k),
            rho: Some(0.5),
            c: None,
        },
        special_nodes: names(&[("v", v), ("u", u), ("bridge_end", bridge_end)]),
    })
}

/// Big star on n − ⌊√n⌋ − 2k nodes and small star on ⌊√n⌋ nodes joined
/// leaf to leaf; k further big spokes get one pendant each. The graph has
/// n − k nodes.
pub fn stars_with_pendants(
    n: usize,
    k: usize,
    rng: &mut SimRng,
) -> Result<FamilyInstance, FamilyError> {
    let fam = FamilyKind::StarsWithPendants;
    let s = n.isqrt();
    let big = n.saturating_sub(s + 2 * k);
    if big < 3 || s < 2 || big - 1 < k + 1 {
        return Err(invalid(fam, "need n - sqrt(n) - 2k >= 3 and room for k pendant spokes"));
    }
    let actual = n - k;
    let mut lay = Layout::new(actual, rng);
    let big_hub = lay.node();
    let big_leaves = lay.nodes(big - 1);
    for &x in &big_leaves {
        lay.edge(big_hub, x);
    }
    let small_hub = lay.node();
    let small_leaves = lay.nodes(s - 1);
    for &x in &small_leaves {
        lay.edge(small_hub, x);
    }
    let mut order: Vec<usize> = (0..big_leaves.len()).collect();
    order.shuffle(rng);
    let bridge = big_leaves[order[0]];
    lay.edge(bridge, small_leaves[rng.gen_range(0..small_leaves.len())]);
    for &i in &order[1..=k] {
        let p = lay.node();
        lay.edge(big_leaves[i], p);
    }
    let graph = lay.finish();
    let planted: VertexSet = [big_hub, small_hub].into_iter().collect();
    if actual - dominated_count(&graph, &planted)? != k {
        return Err(infeasible(fam, "hubs should leave exactly the k pendants"));
    }
    if !is_connected(&graph) {
        return Err(infeasible(fam, "graph is disconnected"));
    }
    Ok(FamilyInstance {
        family: fam,
        graph,
        planted_opt: planted,
        objective: Objective::NeighborCollect,
        params: FamilyParams {
            requested_n: n,
            n: actual,
            r: None,
            k: Some(k),
            rho: None,
            c: None,
        },
        special_nodes: names(&[("big_hub", big_hub), ("small_hub", small_hub), ("bridge", bridge)]),
    })
}

/// Clique on n − ⌊√n⌋ nodes minus (u, v); a star of ⌊√n⌋ nodes rooted at r
/// whose leaf v' is joined to v. The planted set is r together with a
/// clique node w other than u and v, which dominates everything.
pub fn clique_star(n: usize, rng: &mut SimRng) -> Result<FamilyInstance, FamilyError> {
    let fam = FamilyKind::CliqueStar;
    if n < 9 {
        return Err(invalid(fam, "n must be at least 9"));
    }
    let s = n.isqrt();
    let mut lay = Layout::new(n, rng);
    let core = lay.nodes(n - s);
    let (u, v, w) = (core[0], core[1], core[2]);
    for (i, &a) in core.iter().enumerate() {
        for &b in &core[i + 1..] {
            if (a, b) != (u, v) {
                lay.edge(a, b);
            }
        }
    }
    let root = lay.node();
    let leaves = lay.nodes(s - 1);
    for &x in &leaves {
        lay.edge(root, x);
    }
    let v2 = leaves[0];
    lay.edge(v, v2);
    let graph = lay.finish();
    let planted: VertexSet = [root, w].into_iter().collect();
    if !is_dominating(&graph, &planted)? {
        return Err(infeasible(fam, "{r, w} is not dominating"));
    }
    Ok(FamilyInstance {
        family: fam,
        graph,
        planted_opt: planted,
        objective: Objective::NeighborCollect,
        params: FamilyParams {
            requested_n: n,
            n,
            r: None,
            k: None,
            rho: None,
            c: None,
        },
        special_nodes: names(&[("u", u), ("v", v), ("w", w), ("root", root), ("v'", v2)]),
    })
}
