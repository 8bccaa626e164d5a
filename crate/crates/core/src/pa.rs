//! Preferential-attachment generators: the sequential degree-proportional
//! process and the weight-sequence process, plus structural diagnostics.

use std::io::Write;

use rand::Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::graph::{Graph, GraphError, NodeId};
use crate::rng::rng_from_seed;

#[derive(Debug, Error)]
pub enum PaError {
    #[error("invalid parameters: n={n}, m={m} (both must be at least 1)")]
    InvalidParams { n: usize, m: usize },
    #[error("weight sequence must be positive and increasing, violated at index {0}")]
    BadWeights(usize),
    #[error(transparent)]
    Graph(#[from] GraphError),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct PaParams {
    pub n: usize,
    pub m: usize,
    pub seed: u64,
}

impl PaParams {
    pub fn new(n: usize, m: usize, seed: u64) -> Result<Self, PaError> {
        if n == 0 || m == 0 {
            return Err(PaError::InvalidParams { n, m });
        }
        Ok(PaParams { n, m, seed })
    }
}

/// `parents[t-1][k-1]` is p_k(t).
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ParentRecord {
    pub m: usize,
    pub parents: Vec<Vec<NodeId>>,
}

impl ParentRecord {
    pub fn of(&self, t: NodeId) -> &[NodeId] {
        &self.parents[t.index()]
    }
}

/// Weights w_i with prefix sums W_i (W_0 = 0 is implicit).
#[derive(Clone, Debug, PartialEq)]
pub struct WeightSequence {
    weights: Vec<f64>,
    prefix: Vec<f64>,
}

impl WeightSequence {
    /// Builds from prefix values W_1..W_n, which must be strictly increasing
    /// and positive.
    pub fn from_prefix(prefix: Vec<f64>) -> Result<Self, PaError> {
        let mut weights = Vec::with_capacity(prefix.len());
        let mut prev = 0.0;
        for (i, &w) in prefix.iter().enumerate() {
            if w.is_nan() || w <= prev {
                return Err(PaError::BadWeights(i + 1));
            }
            weights.push(w - prev);
            prev = w;
        }
        Ok(WeightSequence { weights, prefix })
    }

    pub fn from_weights(weights: &[f64]) -> Result<Self, PaError> {
        let mut acc = 0.0;
        let prefix = weights
            .iter()
            .map(|w| {
                acc += w;
                acc
            })
            .collect();
        Self::from_prefix(prefix)
    }

    pub fn len(&self) -> usize {
        self.weights.len()
    }

    pub fn is_empty(&self) -> bool {
        self.weights.is_empty()
    }

    /// w_i for 1-based i.
    pub fn weight(&self, i: usize) -> f64 {
        self.weights[i - 1]
    }

    /// W_i for 1-based i; W_0 = 0.
    pub fn prefix(&self, i: usize) -> f64 {
        if i == 0 {
            0.0
        } else {
            self.prefix[i - 1]
        }
    }

    /// Draws a parent j ≤ i with probability w_j / W_i.
    pub fn sample_parent<R: Rng + ?Sized>(&self, i: usize, rng: &mut R) -> NodeId {
        let target = rng.gen::<f64>() * self.prefix[i - 1];
        // first j with W_j > target
        let j = self.prefix[..i].partition_point(|&w| w <= target);
        NodeId::from_index(j.min(i - 1))
    }

    /// Sidecar format: one `i w_i W_i` line per node, shortest round-trip
    /// decimal representation.
    pub fn write_text<W: Write>(&self, mut w: W) -> std::io::Result<()> {
        for i in 1..=self.len() {
            writeln!(w, "{} {:?} {:?}", i, self.weight(i), self.prefix(i))?;
        }
        Ok(())
    }
}

/// Sequential preferential attachment. Node 1 carries m loops; each later
/// node t places m edges one at a time, choosing s < t with probability
/// deg(s)/z and itself with probability (deg(t)+1)/z.
pub fn generate_sequential(p: &PaParams) -> (Graph, ParentRecord) {
    let mut rng = rng_from_seed(p.seed);
    let (n, m) = (p.n, p.m);
    // every edge endpoint, so a uniform pick is a degree-proportional pick
    let mut endpoints: Vec<NodeId> = Vec::with_capacity(2 * n * m);
    let mut edges = Vec::with_capacity(n * m);
    let mut parents = Vec::with_capacity(n);
    for t in (0..n).map(NodeId::from_index) {
        let mut own = Vec::with_capacity(m);
        for _ in 0..m {
            let pick = rng.gen_range(0..=endpoints.len());
            let s = if pick == endpoints.len() {
                t
            } else {
                endpoints[pick]
            };
            endpoints.push(t);
            endpoints.push(s);
            edges.push((t, s));
            own.push(s);
        }
        parents.push(own);
    }
    let g = Graph::from_edges(n, edges).expect("generated ids are in range");
    (g, ParentRecord { m, parents })
}

/// Samples the weight sequence: mn pairs uniform on {x < y}, y values sorted,
/// W_i is the largest y of the i-th block of m.
pub fn sample_weights<R: Rng + ?Sized>(n: usize, m: usize, rng: &mut R) -> WeightSequence {
    let mut ys: Vec<f64> = (0..n * m)
        .map(|_| {
            let (a, b): (f64, f64) = (rng.gen(), rng.gen());
            a.max(b)
        })
        .collect();
    ys.sort_by(f64::total_cmp);
    let mut prefix: Vec<f64> = ys.chunks(m).map(|c| c[m - 1]).collect();
    // ties have probability zero but guard against them anyway
    for i in 1..prefix.len() {
        if prefix[i] <= prefix[i - 1] {
            prefix[i] = f64::from_bits(prefix[i - 1].to_bits() + 1);
        }
    }
    if prefix[0] <= 0.0 {
        prefix[0] = f64::MIN_POSITIVE;
    }
    WeightSequence::from_prefix(prefix).expect("sorted block maxima are increasing")
}

/// Draws m parents for every node from a fixed weight sequence.
pub fn graph_from_weights<R: Rng + ?Sized>(
    ws: &WeightSequence,
    m: usize,
    rng: &mut R,
) -> (Graph, ParentRecord) {
    let n = ws.len();
    let mut edges = Vec::with_capacity(n * m);
    let mut parents = Vec::with_capacity(n);
    for i in 1..=n {
        let t = NodeId(i as u32);
        let own: Vec<NodeId> = (0..m).map(|_| ws.sample_parent(i, rng)).collect();
        edges.extend(own.iter().map(|&s| (t, s)));
        parents.push(own);
    }
    let g = Graph::from_edges(n, edges).expect("generated ids are in range");
    (g, ParentRecord { m, parents })
}

pub fn generate_weighted(p: &PaParams) -> (Graph, ParentRecord, WeightSequence) {
    let mut rng = rng_from_seed(p.seed);
    let ws = sample_weights(p.n, p.m, &mut rng);
    let (g, parents) = graph_from_weights(&ws, p.m, &mut rng);
    (g, parents, ws)
}

/// Constants used by the degree and weight diagnostics. Logs are natural;
/// the dyadic interval index is base 2.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct DiagnosticsParams {
    pub n: usize,
    pub m: usize,
    pub s0: f64,
    pub s1: f64,
    pub zeta: f64,
    pub beta: f64,
}

impl DiagnosticsParams {
    pub fn new(n: usize, m: usize) -> Self {
        let ln = (n as f64).ln();
        let lnln = ln.ln();
        let (s0, s1) = if n >= 3 {
            (160.0 * ln * lnln * lnln, n as f64 / (2f64.powi(25) * ln * ln))
        } else {
            (f64::NAN, f64::NAN)
        };
        DiagnosticsParams {
            n,
            m,
            s0,
            s1,
            zeta: 30.0,
            beta: 0.25,
        }
    }

    /// True when the analysis range [s0, s1] is non-empty.
    pub fn asymptotic_regime(&self) -> bool {
        self.s0 < self.s1
    }

    /// Index t of the dyadic interval I_t = [2^t + 1, 2^{t+1}] holding i ≥ 2.
    pub fn interval_index(i: usize) -> u32 {
        (i - 1).ilog2()
    }

    fn s0_usable(&self) -> bool {
        self.s0.is_finite() && self.s0 >= 1.0
    }
}

/// Node i is typical if i ≤ s0 or w_i ≥ 1/(ζ·sqrt(i·n)).
pub fn classify_typical(ws: &WeightSequence, i: usize, d: &DiagnosticsParams) -> bool {
    if (i as f64) <= d.s0 {
        return true;
    }
    ws.weight(i) >= 1.0 / (d.zeta * ((i * d.n) as f64).sqrt())
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "status", rename_all = "snake_case")]
pub enum EventOutcome {
    Pass,
    Fail { worst_index: usize },
    NotApplicable,
}

impl EventOutcome {
    pub fn passed(&self) -> bool {
        matches!(self, EventOutcome::Pass)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DiagnosticsReport {
    /// deg(i) ≤ 6m·ln n·sqrt(n/i) for all i ≥ s0.
    pub upper_degree: EventOutcome,
    /// deg(i) ≥ m·sqrt(n)/(5 ln² n) for all i ≤ s0.
    pub lower_degree: EventOutcome,
    /// deg(1) ≥ m·sqrt(n)/ln n.
    pub root_degree: EventOutcome,
    /// |W_i − sqrt(i/n)| ≤ sqrt(i/n)/100 for s0 ≤ i ≤ n.
    pub weight_concentration: EventOutcome,
    pub root_deg: usize,
    pub loops: usize,
    pub asymptotic_regime: bool,
}

pub fn degree_diagnostics(
    g: &Graph,
    ws: Option<&WeightSequence>,
    d: &DiagnosticsParams,
) -> DiagnosticsReport {
    let n = g.node_count();
    let nf = n as f64;
    let m = d.m as f64;
    let ln = nf.ln();
    let usable = d.s0_usable() && n >= 3;
    let deg = |i: usize| g.degree(NodeId(i as u32)) as f64;
    // indices i with i ≥ s0 (resp. ≤ s0)
    let hi_start = if usable { d.s0.ceil() as usize } else { n + 1 };
    let lo_end = if usable { (d.s0.floor() as usize).min(n) } else { 0 };

    let worst = |range: std::ops::RangeInclusive<usize>, slack: &dyn Fn(usize) -> f64| {
        let mut worst: Option<(usize, f64)> = None;
        for i in range {
            let s = slack(i);
            if s < 0.0 && worst.is_none_or(|(_, w)| s < w) {
                worst = Some((i, s));
            }
        }
        match worst {
            Some((i, _)) => EventOutcome::Fail { worst_index: i },
            None => EventOutcome::Pass,
        }
    };

    let upper_degree = if hi_start <= n {
        worst(hi_start..=n, &|i| {
            let bound = 6.0 * m * ln * (nf / i as f64).sqrt();
            (bound - deg(i)) / bound
        })
    } else {
        EventOutcome::NotApplicable
    };
    let lower_degree = if lo_end >= 1 {
        let bound = m * nf.sqrt() / (5.0 * ln * ln);
        worst(1..=lo_end, &|i| (deg(i) - bound) / bound)
    } else {
        EventOutcome::NotApplicable
    };
    let root_degree = if n >= 2 {
        let bound = m * nf.sqrt() / ln;
        if deg(1) >= bound {
            EventOutcome::Pass
        } else {
            EventOutcome::Fail { worst_index: 1 }
        }
    } else {
        EventOutcome::NotApplicable
    };
    let weight_concentration = match ws {
        Some(ws) if hi_start <= n && ws.len() == n => worst(hi_start..=n, &|i| {
            let target = (i as f64 / nf).sqrt();
            target / 100.0 - (ws.prefix(i) - target).abs()
        }),
        _ => EventOutcome::NotApplicable,
    };

    DiagnosticsReport {
        upper_degree,
        lower_degree,
        root_degree,
        weight_concentration,
        root_deg: g.degree(NodeId(1)),
        loops: g.total_loops(),
        asymptotic_regime: d.asymptotic_regime(),
    }
}
