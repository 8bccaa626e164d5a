//! The local-information oracle. An algorithm holds an [`Oracle`] and may only
//! observe the r-open (or r-closed) neighborhood around the set it has
//! queried, under opaque labels. Jumps and crawls are the only ways to grow
//! the queried set, and both are counted.

use std::collections::VecDeque;
use std::fmt;
use std::io::Write;

use rand::seq::SliceRandom;
use rand::Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::graph::{dominated_count, Graph, LocalView, Mode, NodeId, VertexSet};
use crate::rng::{rng_from_seed, SimRng};

/// Name under which the oracle exposes a node to algorithms.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Label(pub u32);

impl fmt::Display for Label {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

#[derive(Debug, Error, PartialEq, Eq)]
pub enum OracleError {
    #[error("seed node {0} out of range")]
    InvalidSeed(u32),
    #[error("label {0} does not name a node")]
    UnknownLabel(Label),
    #[error("locality violation: label {0} is not visible")]
    LocalityViolation(Label),
    #[error("label {0} is already queried")]
    AlreadyQueried(Label),
    #[error("radius must be at least 1")]
    ZeroRadius,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum LabelMode {
    /// Uniform random permutation of 1..n.
    Opaque,
    /// Label equals node index; for debugging harness code only.
    Transparent,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct OracleConfig {
    pub radius: u32,
    pub mode: Mode,
    pub seed: u64,
    pub label_mode: LabelMode,
}

impl OracleConfig {
    /// r = 1, open.
    pub fn one_local(seed: u64) -> Self {
        OracleConfig {
            radius: 1,
            mode: Mode::Open,
            seed,
            label_mode: LabelMode::Opaque,
        }
    }

    /// r = 1, closed.
    pub fn one_plus_local(seed: u64) -> Self {
        OracleConfig {
            mode: Mode::Closed,
            ..Self::one_local(seed)
        }
    }

    pub fn transparent(mut self) -> Self {
        self.label_mode = LabelMode::Transparent;
        self
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum QueryKind {
    Jump,
    Crawl,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct QueryEntry {
    pub step: usize,
    pub kind: QueryKind,
    pub label: Label,
}

#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct QueryLog {
    pub entries: Vec<QueryEntry>,
    pub jumps: usize,
    pub crawls: usize,
    /// Ground-truth probes; never counted as queries.
    pub probes: usize,
}

impl QueryLog {
    pub fn query_count(&self) -> usize {
        self.jumps + self.crawls
    }

    fn push(&mut self, kind: QueryKind, label: Label) {
        match kind {
            QueryKind::Jump => self.jumps += 1,
            QueryKind::Crawl => self.crawls += 1,
        }
        self.entries.push(QueryEntry {
            step: self.entries.len() + 1,
            kind,
            label,
        });
    }

    /// One JSON object per line: `{"step":k,"kind":"crawl","label":L}`.
    pub fn write_jsonl<W: Write>(&self, mut w: W) -> std::io::Result<()> {
        for e in &self.entries {
            serde_json::to_writer(&mut w, e)?;
            w.write_all(b"\n")?;
        }
        Ok(())
    }

    pub fn to_jsonl(&self) -> String {
        let mut buf = Vec::new();
        self.write_jsonl(&mut buf).expect("in-memory write");
        String::from_utf8(buf).expect("json is utf-8")
    }
}

/// Result of a successful jump or crawl.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Reveal {
    pub label: Label,
    /// False when a jump landed on an already-queried node.
    pub added: bool,
    /// Nodes that entered the view with this query.
    pub newly_visible: Vec<Label>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Probe {
    RootHit,
    NodeOf(Label),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ProbeAnswer {
    RootHit(bool),
    NodeOf(Option<NodeId>),
}

/// Per-run visibility state over a hidden graph.
#[derive(Clone)]
pub struct Oracle<'g> {
    graph: &'g Graph,
    cfg: OracleConfig,
    rng: SimRng,
    label_of: Vec<Label>,
    node_of: Vec<NodeId>,
    queried: VertexSet,
    dist: Vec<u32>,
    visible: Vec<NodeId>,
    log: QueryLog,
}

impl<'g> Oracle<'g> {
    pub fn new(
        graph: &'g Graph,
        cfg: OracleConfig,
        seed_node: Option<NodeId>,
    ) -> Result<Self, OracleError> {
        if cfg.radius == 0 {
            return Err(OracleError::ZeroRadius);
        }
        if let Some(s) = seed_node {
            if !graph.contains(s) {
                return Err(OracleError::InvalidSeed(s.0));
            }
        }
        let n = graph.node_count();
        let mut rng = rng_from_seed(cfg.seed);
        let mut label_of: Vec<Label> = (1..=n as u32).map(Label).collect();
        if cfg.label_mode == LabelMode::Opaque {
            label_of.shuffle(&mut rng);
        }
        let mut node_of = vec![NodeId(0); n];
        for (i, l) in label_of.iter().enumerate() {
            node_of[l.0 as usize - 1] = NodeId::from_index(i);
        }
        let mut oracle = Oracle {
            graph,
            cfg,
            rng,
            label_of,
            node_of,
            queried: VertexSet::new(),
            dist: vec![u32::MAX; n],
            visible: Vec::new(),
            log: QueryLog::default(),
        };
        if let Some(s) = seed_node {
            oracle.add(s);
        }
        Ok(oracle)
    }

    /// Starts from an arbitrary queried set without charging any query.
    /// Harness use only: view equivalence checks and replay.
    pub fn with_queried(
        graph: &'g Graph,
        cfg: OracleConfig,
        nodes: &[NodeId],
    ) -> Result<Self, OracleError> {
        let mut o = Oracle::new(graph, cfg, None)?;
        for &v in nodes {
            if !graph.contains(v) {
                return Err(OracleError::InvalidSeed(v.0));
            }
            o.add(v);
        }
        Ok(o)
    }

    /// A fresh oracle on the same graph sharing this oracle's labels,
    /// seeded at `seed`.
    pub fn sibling(&self, seed: Label, jump_seed: u64) -> Result<Oracle<'g>, OracleError> {
        let node = self.resolve(seed)?;
        let mut o = Oracle {
            graph: self.graph,
            cfg: self.cfg,
            rng: rng_from_seed(jump_seed),
            label_of: self.label_of.clone(),
            node_of: self.node_of.clone(),
            queried: VertexSet::new(),
            dist: vec![u32::MAX; self.graph.node_count()],
            visible: Vec::new(),
            log: QueryLog::default(),
        };
        o.add(node);
        Ok(o)
    }

    pub fn config(&self) -> &OracleConfig {
        &self.cfg
    }

    pub fn node_count(&self) -> usize {
        self.graph.node_count()
    }

    pub fn log(&self) -> &QueryLog {
        &self.log
    }

    pub fn query_count(&self) -> usize {
        self.log.query_count()
    }

    /// Queried labels in insertion order.
    pub fn queried(&self) -> Vec<Label> {
        self.queried.iter().map(|v| self.label(v)).collect()
    }

    pub fn queried_len(&self) -> usize {
        self.queried.len()
    }

    pub fn is_queried(&self, l: Label) -> bool {
        self.resolve(l)
            .map(|v| self.dist[v.index()] == 0)
            .unwrap_or(false)
    }

    pub fn is_visible(&self, l: Label) -> bool {
        self.resolve(l)
            .map(|v| self.dist[v.index()] <= self.cfg.radius)
            .unwrap_or(false)
    }

    pub fn visible_count(&self) -> usize {
        self.visible.len()
    }

    /// Distance from the queried set, for visible labels.
    pub fn distance(&self, l: Label) -> Option<u32> {
        let v = self.resolve(l).ok()?;
        let d = self.dist[v.index()];
        (d <= self.cfg.radius).then_some(d)
    }

    /// Degree of a visible node.
    pub fn degree(&self, l: Label) -> Option<usize> {
        let v = self.resolve(l).ok()?;
        (self.dist[v.index()] <= self.cfg.radius).then(|| self.graph.degree(v))
    }

    /// Visible edges at `l` as a multiset of other endpoints; a loop is
    /// listed once as `l` itself. Empty for invisible labels.
    pub fn visible_incident(&self, l: Label) -> Vec<Label> {
        let Ok(v) = self.resolve(l) else {
            return Vec::new();
        };
        let r = self.cfg.radius;
        let dv = self.dist[v.index()];
        if dv > r {
            return Vec::new();
        }
        self.graph
            .adjacency(v)
            .iter()
            .filter(|w| self.edge_visible(dv, self.dist[w.index()]))
            .map(|&w| self.label(w))
            .collect()
    }

    /// Labels of all visible nodes, in the order they became visible.
    pub fn visible_labels(&self) -> impl Iterator<Item = Label> + '_ {
        self.visible.iter().map(|&v| self.label(v))
    }

    fn edge_visible(&self, da: u32, db: u32) -> bool {
        let r = self.cfg.radius;
        da <= r && db <= r && (self.cfg.mode == Mode::Closed || da < r || db < r)
    }

    /// The current view under opaque labels. Empty when nothing is queried.
    pub fn current_view(&self) -> LocalView<Label> {
        let r = self.cfg.radius;
        let mut view = LocalView::empty(self.cfg.mode, r);
        for &v in &self.visible {
            let dv = self.dist[v.index()];
            let lv = self.label(v);
            view.nodes.insert(lv, self.graph.degree(v));
            if dv == r {
                view.frontier.insert(lv);
            }
            for &w in self.graph.adjacency(v) {
                if w < v || !self.edge_visible(dv, self.dist[w.index()]) {
                    continue;
                }
                let lw = self.label(w);
                view.edges.push(if lv <= lw { (lv, lw) } else { (lw, lv) });
            }
        }
        view.edges.sort_unstable();
        view
    }

    /// Adds a uniformly random node (with replacement) to the queried set.
    pub fn jump(&mut self) -> Reveal {
        let i = self.rng.gen_range(0..self.graph.node_count());
        let v = NodeId::from_index(i);
        let label = self.label(v);
        self.log.push(QueryKind::Jump, label);
        let (added, newly_visible) = if self.dist[i] == 0 {
            (false, Vec::new())
        } else {
            (true, self.add(v))
        };
        Reveal {
            label,
            added,
            newly_visible,
        }
    }

    /// Adds a visible, not yet queried node to the queried set.
    pub fn crawl(&mut self, target: Label) -> Result<Reveal, OracleError> {
        let v = self.resolve(target)?;
        let d = self.dist[v.index()];
        if d == 0 {
            return Err(OracleError::AlreadyQueried(target));
        }
        if d > self.cfg.radius {
            return Err(OracleError::LocalityViolation(target));
        }
        self.log.push(QueryKind::Crawl, target);
        let newly_visible = self.add(v);
        Ok(Reveal {
            label: target,
            added: true,
            newly_visible,
        })
    }

    /// Answers from the hidden graph. Not a query.
    pub fn probe(&mut self, q: Probe) -> ProbeAnswer {
        self.log.probes += 1;
        match q {
            Probe::RootHit => ProbeAnswer::RootHit(self.dist[0] == 0),
            Probe::NodeOf(l) => ProbeAnswer::NodeOf(self.resolve(l).ok()),
        }
    }

    pub fn root_hit(&mut self) -> bool {
        matches!(self.probe(Probe::RootHit), ProbeAnswer::RootHit(true))
    }

    /// Harness-side translation, not a query.
    pub fn label_of(&self, v: NodeId) -> Label {
        self.label(v)
    }

    /// Harness-side translation, not a query.
    pub fn node_of(&self, l: Label) -> Option<NodeId> {
        self.resolve(l).ok()
    }

    /// Hidden node ids of the queried set, for evaluation.
    pub fn queried_nodes(&self) -> &VertexSet {
        &self.queried
    }

    /// |D(S)| on the hidden graph.
    pub fn dominated_count(&self) -> usize {
        dominated_count(self.graph, &self.queried).expect("queried nodes are valid")
    }

    pub fn hidden_graph(&self) -> &'g Graph {
        self.graph
    }

    fn label(&self, v: NodeId) -> Label {
        self.label_of[v.index()]
    }

    fn resolve(&self, l: Label) -> Result<NodeId, OracleError> {
        if l.0 == 0 || l.0 as usize > self.node_of.len() {
            return Err(OracleError::UnknownLabel(l));
        }
        Ok(self.node_of[l.0 as usize - 1])
    }

    /// Inserts `v` into S and lowers distances within radius r of it.
    /// Returns the labels that became visible.
    fn add(&mut self, v: NodeId) -> Vec<Label> {
        let r = self.cfg.radius;
        self.queried.insert(v);
        let mut newly = Vec::new();
        let mut queue = VecDeque::new();
        let mut improve = |dist: &mut Vec<u32>, visible: &mut Vec<NodeId>, w: NodeId, d: u32| {
            let old = dist[w.index()];
            if d >= old {
                return false;
            }
            if old > r {
                visible.push(w);
                newly.push(w);
            }
            dist[w.index()] = d;
            true
        };
        improve(&mut self.dist, &mut self.visible, v, 0);
        queue.push_back((v, 0u32));
        while let Some((u, d)) = queue.pop_front() {
            if d == r {
                continue;
            }
            for w in self.graph.neighbors(u) {
                if improve(&mut self.dist, &mut self.visible, w, d + 1) {
                    queue.push_back((w, d + 1));
                }
            }
        }
        newly.into_iter().map(|w| self.label(w)).collect()
    }
}
