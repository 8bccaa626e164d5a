//! Experiment specs, Monte-Carlo runners, fits and result emission.
//!
//! Every trial draws its randomness from `derive_seed(master, cell, trial)`,
//! so a spec plus its master seed fixes every output byte regardless of
//! thread scheduling.

use std::fmt;
use std::fs;
use std::io;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use rand::Rng;
use rayon::prelude::*;
use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::algorithms::{
    alternate_random, alternate_random_and_jump, coverage_target, degree_greedy_cover,
    neighbor_collect, st_search, traverse_to_root, AlgoError, BudgetPolicy, RunResult, StopRule,
};
use crate::baselines::{
    bfs_shortest_path, brute_force_mds, brute_force_neighbor_collect, brute_force_partial_cover,
    BaselineError,
};
use crate::families::{build, FamilyArgs, FamilyError, FamilyInstance, FamilyKind};
use crate::graph::{
    dominated_count, harmonic_number, is_connected, max_degree, Graph, GraphError, NodeId,
    VertexSet,
};
use crate::oracle::{Oracle, OracleConfig, OracleError};
use crate::pa::{
    degree_diagnostics, generate_sequential, generate_weighted, DiagnosticsParams, EventOutcome,
    PaError, PaParams,
};
use crate::rng::{derive_seed, rng_from_seed, SimRng};

#[derive(Debug, Error)]
pub enum HarnessError {
    #[error("spec line {line}: {msg}")]
    SpecSyntax { line: usize, msg: String },
    #[error("invalid spec: {0}")]
    InvalidSpec(String),
    #[error("{}: {source}", path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: io::Error,
    },
    #[error("{}: {source}", path.display())]
    Csv {
        path: PathBuf,
        #[source]
        source: csv::Error,
    },
    #[error("no rows to write")]
    EmptyRows,
    #[error("cannot fit: {0}")]
    Fit(String),
    #[error(transparent)]
    Graph(#[from] GraphError),
    #[error(transparent)]
    Pa(#[from] PaError),
    #[error(transparent)]
    Family(#[from] FamilyError),
    #[error(transparent)]
    Algo(#[from] AlgoError),
    #[error(transparent)]
    Oracle(#[from] OracleError),
    #[error(transparent)]
    Baseline(#[from] BaselineError),
}

fn io_err(path: &Path) -> impl FnOnce(io::Error) -> HarnessError + '_ {
    move |source| HarnessError::Io {
        path: path.to_path_buf(),
        source,
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ExperimentKind {
    Scaling,
    Approximation,
    Lowerbound,
    Diagnostics,
}

impl FromStr for ExperimentKind {
    type Err = HarnessError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "scaling" => Ok(ExperimentKind::Scaling),
            "approx" | "approximation" => Ok(ExperimentKind::Approximation),
            "lowerbound" => Ok(ExperimentKind::Lowerbound),
            "diagnostics" => Ok(ExperimentKind::Diagnostics),
            _ => Err(HarnessError::InvalidSpec(format!("unknown experiment kind {s:?}"))),
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub enum GraphSource {
    PaSequential,
    PaWeighted,
    Family(FamilyKind),
    File(PathBuf),
    /// Connected G(n, p) graphs.
    ErdosRenyi,
}

impl FromStr for GraphSource {
    type Err = HarnessError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        if let Some(name) = s.strip_prefix("family:") {
            return Ok(GraphSource::Family(name.parse()?));
        }
        if let Some(path) = s.strip_prefix("file:") {
            return Ok(GraphSource::File(PathBuf::from(path)));
        }
        match s {
            "pa-sequential" | "ba" => Ok(GraphSource::PaSequential),
            "pa-weighted" | "br" => Ok(GraphSource::PaWeighted),
            "er" => Ok(GraphSource::ErdosRenyi),
            _ => Err(HarnessError::InvalidSpec(format!("unknown graph source {s:?}"))),
        }
    }
}

impl fmt::Display for GraphSource {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            GraphSource::PaSequential => f.write_str("pa-sequential"),
            GraphSource::PaWeighted => f.write_str("pa-weighted"),
            GraphSource::Family(k) => write!(f, "family:{k}"),
            GraphSource::File(p) => write!(f, "file:{}", p.display()),
            GraphSource::ErdosRenyi => f.write_str("er"),
        }
    }
}

/// Flat `key = value` experiment description. Lines starting with `#` are
/// comments. `n` takes a comma-separated list; entries may be written as
/// `2^14` or `1e5`.
#[derive(Clone, Debug, PartialEq)]
pub struct ExperimentSpec {
    pub kind: ExperimentKind,
    pub source: GraphSource,
    pub n: Vec<usize>,
    pub m: usize,
    pub r: usize,
    pub k: usize,
    pub c: f64,
    pub rho: f64,
    pub epsilon: f64,
    /// Edge probability for the G(n, p) corpus.
    pub p: f64,
    /// Trials per cell; for approximation runs, the number of instances.
    pub trials: usize,
    /// Algorithm runs per approximation instance.
    pub runs: usize,
    pub seed: u64,
    pub algorithm: Option<String>,
    pub budget: Option<usize>,
    pub output: Option<PathBuf>,
}

impl ExperimentSpec {
    pub fn new(kind: ExperimentKind, source: GraphSource, n: Vec<usize>) -> Self {
        ExperimentSpec {
            kind,
            source,
            n,
            m: 2,
            r: 1,
            k: 1,
            c: 2.0,
            rho: 0.5,
            epsilon: 0.5,
            p: 0.3,
            trials: 1,
            runs: 100,
            seed: 0,
            algorithm: None,
            budget: None,
            output: None,
        }
    }

    pub fn from_file(path: &Path) -> Result<Self, HarnessError> {
        let text = fs::read_to_string(path).map_err(io_err(path))?;
        text.parse()
    }

    pub fn validate(&self) -> Result<(), HarnessError> {
        let bad = |msg: &str| Err(HarnessError::InvalidSpec(msg.to_string()));
        if self.trials == 0 {
            return bad("trials must be at least 1");
        }
        if self.n.is_empty() {
            return bad("the n grid is empty");
        }
        if self.runs == 0 {
            return bad("runs must be at least 1");
        }
        if self.m == 0 || self.k == 0 || self.r == 0 {
            return bad("m, r and k must be positive");
        }
        if !(self.rho > 0.0 && self.rho <= 1.0) {
            return bad("rho must lie in (0, 1]");
        }
        if !(self.p >= 0.0 && self.p <= 1.0) {
            return bad("p must lie in [0, 1]");
        }
        Ok(())
    }

    /// Budget for root walks at size `n`.
    pub fn budget_for(&self, n: usize) -> BudgetPolicy {
        match self.budget {
            Some(b) => BudgetPolicy {
                max_queries: b.max(1),
                stop_rule: StopRule::RootFound,
            },
            None => BudgetPolicy::default_for(n),
        }
    }
}

fn parse_size(s: &str) -> Option<usize> {
    if let Some((b, e)) = s.split_once('^') {
        let b: usize = b.trim().parse().ok()?;
        return b.checked_pow(e.trim().parse().ok()?);
    }
    if let Ok(v) = s.parse::<usize>() {
        return Some(v);
    }
    let f: f64 = s.parse().ok()?;
    (f >= 0.0 && f.fract() == 0.0 && f < 1e15).then_some(f as usize)
}

impl FromStr for ExperimentSpec {
    type Err = HarnessError;

    fn from_str(text: &str) -> Result<Self, Self::Err> {
        let mut kind = None;
        let mut source = None;
        let mut spec = ExperimentSpec::new(ExperimentKind::Scaling, GraphSource::PaSequential, Vec::new());
        for (i, raw) in text.lines().enumerate() {
            let line = i + 1;
            let trimmed = raw.trim();
            if trimmed.is_empty() || trimmed.starts_with('#') {
                continue;
            }
            let err = |msg: String| HarnessError::SpecSyntax { line, msg };
            let (key, value) = trimmed
                .split_once('=')
                .ok_or_else(|| err("expected key = value".into()))?;
            let (key, value) = (key.trim(), value.trim());
            let num = |v: &str| parse_size(v).ok_or_else(|| err(format!("bad integer {v:?}")));
            let float = |v: &str| {
                v.parse::<f64>()
                    .map_err(|_| err(format!("bad number {v:?}")))
            };
            match key {
                "kind" => kind = Some(value.parse()?),
                "source" => source = Some(value.parse()?),
                "n" => {
                    spec.n = value
                        .split(',')
                        .map(|v| num(v.trim()))
                        .collect::<Result<_, _>>()?
                }
                "m" => spec.m = num(value)?,
                "r" => spec.r = num(value)?,
                "k" => spec.k = num(value)?,
                "c" => spec.c = float(value)?,
                "rho" => spec.rho = float(value)?,
                "epsilon" => spec.epsilon = float(value)?,
                "p" => spec.p = float(value)?,
                "trials" => spec.trials = num(value)?,
                "runs" => spec.runs = num(value)?,
                "seed" => spec.seed = value.parse().map_err(|_| err(format!("bad seed {value:?}")))?,
                "algorithm" => spec.algorithm = Some(value.to_string()),
                "budget" => spec.budget = Some(num(value)?),
                "output" => spec.output = Some(PathBuf::from(value)),
                _ => return Err(err(format!("unknown key {key:?}"))),
            }
        }
        spec.kind = kind.ok_or_else(|| HarnessError::InvalidSpec("missing kind".into()))?;
        spec.source = source.ok_or_else(|| HarnessError::InvalidSpec("missing source".into()))?;
        spec.validate()?;
        Ok(spec)
    }
}

pub fn median(values: &[f64]) -> f64 {
    assert!(!values.is_empty(), "median of nothing");
    let mut v = values.to_vec();
    v.sort_by(f64::total_cmp);
    let h = v.len() / 2;
    if v.len() % 2 == 1 {
        v[h]
    } else {
        (v[h - 1] + v[h]) / 2.0
    }
}

pub fn mean(values: &[f64]) -> f64 {
    values.iter().sum::<f64>() / values.len() as f64
}

/// Connected G(n, p), resampled until connected.
pub fn er_connected<R: Rng + ?Sized>(n: usize, p: f64, rng: &mut R) -> Graph {
    loop {
        let mut edges = Vec::new();
        for a in 1..=n as u32 {
            for b in a + 1..=n as u32 {
                if rng.gen_bool(p) {
                    edges.push((NodeId(a), NodeId(b)));
                }
            }
        }
        let g = Graph::from_edges(n, edges).expect("ids in range");
        if is_connected(&g) {
            return g;
        }
    }
}

fn load_graph(path: &Path) -> Result<Graph, HarnessError> {
    let f = fs::File::open(path).map_err(io_err(path))?;
    Ok(Graph::read_text(io::BufReader::new(f))?)
}

fn pa_graph(source: &GraphSource, n: usize, m: usize, seed: u64) -> Result<Graph, HarnessError> {
    let params = PaParams::new(n, m, seed)?;
    match source {
        GraphSource::PaSequential => Ok(generate_sequential(&params).0),
        GraphSource::PaWeighted => Ok(generate_weighted(&params).0),
        GraphSource::File(p) => load_graph(p),
        other => Err(HarnessError::InvalidSpec(format!(
            "source {other} does not produce preferential-attachment graphs"
        ))),
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ScalingRow {
    pub n: usize,
    pub m: usize,
    pub trial: usize,
    pub queries: usize,
    pub success: bool,
    pub root_hit_step: Option<usize>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ScalingSummary {
    pub n: usize,
    pub m: usize,
    pub trials: usize,
    pub median_queries: f64,
    pub mean_queries: f64,
    pub success_rate: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct ScalingOutput {
    pub rows: Vec<ScalingRow>,
    pub summary: Vec<ScalingSummary>,
}

fn scaling_trial(spec: &ExperimentSpec, n: usize, trial: usize, seed: u64) -> Result<ScalingRow, HarnessError> {
    let mut rng = rng_from_seed(seed);
    let g = pa_graph(&spec.source, n, spec.m, rng.gen())?;
    let n = g.node_count();
    let start = NodeId(rng.gen_range(1..=n as u32));
    let mut oracle = Oracle::new(&g, OracleConfig::one_local(rng.gen()), Some(start))?;
    let res = traverse_to_root(&mut oracle, &spec.budget_for(n), &mut rng)?;
    Ok(ScalingRow {
        n,
        m: spec.m,
        trial,
        queries: res.query_count(),
        success: res.success,
        root_hit_step: res.metrics.root_hit_step,
    })
}

/// Root walks from uniform random start nodes on fresh graphs.
pub fn run_scaling_experiment(spec: &ExperimentSpec) -> Result<ScalingOutput, HarnessError> {
    spec.validate()?;
    let cells: Vec<(usize, usize, usize)> = spec
        .n
        .iter()
        .enumerate()
        .flat_map(|(c, &n)| (0..spec.trials).map(move |t| (c, n, t)))
        .collect();
    let rows = cells
        .par_iter()
        .map(|&(c, n, t)| scaling_trial(spec, n, t, derive_seed(spec.seed, c as u32, t as u32)))
        .collect::<Result<Vec<_>, _>>()?;
    let summary = summarize_scaling(&rows);
    Ok(ScalingOutput { rows, summary })
}

/// Per-(n, m) statistics in first-appearance order.
pub fn summarize_scaling(rows: &[ScalingRow]) -> Vec<ScalingSummary> {
    let mut keys: Vec<(usize, usize)> = Vec::new();
    for r in rows {
        if !keys.contains(&(r.n, r.m)) {
            keys.push((r.n, r.m));
        }
    }
    keys.into_iter()
        .map(|(n, m)| {
            let cell: Vec<&ScalingRow> = rows.iter().filter(|r| r.n == n && r.m == m).collect();
            let q: Vec<f64> = cell.iter().map(|r| r.queries as f64).collect();
            ScalingSummary {
                n,
                m,
                trials: cell.len(),
                median_queries: median(&q),
                mean_queries: mean(&q),
                success_rate: cell.iter().filter(|r| r.success).count() as f64 / cell.len() as f64,
            }
        })
        .collect()
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FitReport {
    pub model: String,
    pub a: f64,
    pub b: f64,
    /// Standard error of ln A.
    pub se_ln_a: f64,
    pub se_b: f64,
    /// Residual norm of the polylog model in log space.
    pub residual_norm: f64,
    /// Residual norm of q = a·n in log space.
    pub linear_residual_norm: f64,
    pub b_max: f64,
    pub verdict: bool,
}

pub const POLYLOG_B_MAX: f64 = 6.0;

/// Least squares of ln q = ln A + b·ln ln n against a linear-in-n
/// comparator ln q = ln a + ln n.
pub fn fit_polylog_exponent(points: &[(usize, f64)]) -> Result<FitReport, HarnessError> {
    let mut ns: Vec<usize> = points.iter().map(|p| p.0).collect();
    ns.sort_unstable();
    ns.dedup();
    if ns.len() < 4 {
        return Err(HarnessError::Fit(format!("need at least 4 distinct n, got {}", ns.len())));
    }
    if ns[ns.len() - 1] < 4 * ns[0] {
        return Err(HarnessError::Fit("n values must span at least two octaves".into()));
    }
    if ns[0] < 3 {
        return Err(HarnessError::Fit("n must be at least 3 for ln ln n".into()));
    }
    if let Some(&(n, q)) = points.iter().find(|p| !(p.1 > 0.0 && p.1.is_finite())) {
        return Err(HarnessError::Fit(format!("median {q} at n={n} is not positive")));
    }
    let k = points.len() as f64;
    let x: Vec<f64> = points.iter().map(|p| (p.0 as f64).ln().ln()).collect();
    let y: Vec<f64> = points.iter().map(|p| p.1.ln()).collect();
    let xm = mean(&x);
    let ym = mean(&y);
    let sxx: f64 = x.iter().map(|v| (v - xm).powi(2)).sum();
    let sxy: f64 = x.iter().zip(&y).map(|(a, b)| (a - xm) * (b - ym)).sum();
    let b = sxy / sxx;
    let ln_a = ym - b * xm;
    let rss: f64 = x.iter().zip(&y).map(|(a, v)| (v - ln_a - b * a).powi(2)).sum();

    let ln_n: Vec<f64> = points.iter().map(|p| (p.0 as f64).ln()).collect();
    let offset = mean(&y.iter().zip(&ln_n).map(|(v, l)| v - l).collect::<Vec<_>>());
    let rss_lin: f64 = y.iter().zip(&ln_n).map(|(v, l)| (v - l - offset).powi(2)).sum();

    let s2 = if k > 2.0 { rss / (k - 2.0) } else { f64::NAN };
    let se_b = (s2 / sxx).sqrt();
    let se_ln_a = (s2 * (1.0 / k + xm * xm / sxx)).sqrt();
    Ok(FitReport {
        model: "q = A*(ln n)^b".into(),
        a: ln_a.exp(),
        b,
        se_ln_a,
        se_b,
        residual_norm: rss.sqrt(),
        linear_residual_norm: rss_lin.sqrt(),
        b_max: POLYLOG_B_MAX,
        verdict: b.is_finite() && b <= POLYLOG_B_MAX && rss < rss_lin,
    })
}

/// (n, median queries) pairs from a scaling summary.
pub fn medians(summary: &[ScalingSummary]) -> Vec<(usize, f64)> {
    summary.iter().map(|s| (s.n, s.median_queries)).collect()
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ApproxAlgorithm {
    AltRandom,
    AltJump,
    NeighborCollect,
}

impl FromStr for ApproxAlgorithm {
    type Err = HarnessError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "altrandom" | "alt_random" => Ok(ApproxAlgorithm::AltRandom),
            "altjump" | "alt_jump" => Ok(ApproxAlgorithm::AltJump),
            "neighborcollect" | "neighbor_collect" => Ok(ApproxAlgorithm::NeighborCollect),
            _ => Err(HarnessError::InvalidSpec(format!(
                "{s:?} is not an approximation algorithm"
            ))),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ApproxRow {
    pub instance: usize,
    pub n: usize,
    pub algorithm: ApproxAlgorithm,
    pub runs: usize,
    pub max_degree: usize,
    /// Empirical mean of |S| or f(S).
    pub mean_value: f64,
    pub exact_value: f64,
    pub ratio: f64,
    pub bound: f64,
    pub within_bound: bool,
    /// Runs whose output met the problem's feasibility condition.
    pub feasible_runs: usize,
    /// Single runs above 2(2+H(Δ))·OPT (dominating set only).
    pub tail_violations: usize,
}

/// Stop-rule check for coverage runs: the final set reaches `target` and
/// the set before its last addition did not.
pub fn coverage_stop_rule_holds(oracle: &Oracle<'_>, target: usize) -> bool {
    let g = oracle.hidden_graph();
    let nodes: Vec<NodeId> = oracle.queried_nodes().iter().collect();
    let all: VertexSet = nodes.iter().copied().collect();
    let before: VertexSet = nodes[..nodes.len().saturating_sub(1)].iter().copied().collect();
    let ok_final = dominated_count(g, &all).expect("valid") >= target;
    let ok_before = nodes.is_empty() || dominated_count(g, &before).expect("valid") < target;
    ok_final && ok_before
}

fn approx_instance(
    spec: &ExperimentSpec,
    alg: ApproxAlgorithm,
    instance: usize,
    g: &Graph,
) -> Result<ApproxRow, HarnessError> {
    let n = g.node_count();
    let (_, delta) = max_degree(g);
    let h = harmonic_number(delta);
    let (exact, bound) = match alg {
        ApproxAlgorithm::AltRandom => {
            let opt = brute_force_mds(g)?.value;
            (opt, 2.0 * (1.0 + h) * opt + 1.0)
        }
        ApproxAlgorithm::AltJump => {
            let scale = spec.rho * (1.0 + spec.epsilon);
            if scale > 1.0 {
                return Err(HarnessError::InvalidSpec("rho(1+epsilon) exceeds 1".into()));
            }
            let opt = brute_force_partial_cover(g, coverage_target(n, scale))?.value;
            (opt, 3.0 * opt * h / (spec.rho * spec.epsilon))
        }
        ApproxAlgorithm::NeighborCollect => {
            let opt = brute_force_neighbor_collect(g, spec.c)?.value;
            (opt, 2.0 * spec.c * (1.0 + h) * opt)
        }
    };
    let target = coverage_target(n, spec.rho);
    let tail = 2.0 * (2.0 + h) * exact;
    let mut values = Vec::with_capacity(spec.runs);
    let mut feasible = 0;
    let mut tail_violations = 0;
    for run in 0..spec.runs {
        let mut rng = rng_from_seed(derive_seed(spec.seed, instance as u32, run as u32));
        let mut oracle = Oracle::new(g, OracleConfig::one_plus_local(rng.gen()), None)?;
        let (value, ok) = match alg {
            ApproxAlgorithm::AltRandom => {
                let r = alternate_random(&mut oracle, &mut rng)?;
                (r.metrics.set_size as f64, r.metrics.dominated_count == n)
            }
            ApproxAlgorithm::AltJump => {
                let r = alternate_random_and_jump(&mut oracle, spec.rho, &mut rng)?;
                (r.metrics.set_size as f64, coverage_stop_rule_holds(&oracle, target))
            }
            ApproxAlgorithm::NeighborCollect => {
                let r = neighbor_collect(&mut oracle, spec.c, &mut rng)?;
                (r.f_value.expect("set by neighbor_collect"), r.metrics.dominated_count == n)
            }
        };
        if alg == ApproxAlgorithm::AltRandom && value > tail {
            tail_violations += 1;
        }
        feasible += ok as usize;
        values.push(value);
    }
    let mean_value = mean(&values);
    Ok(ApproxRow {
        instance,
        n,
        algorithm: alg,
        runs: spec.runs,
        max_degree: delta,
        mean_value,
        exact_value: exact,
        ratio: mean_value / exact,
        bound,
        within_bound: mean_value <= bound,
        feasible_runs: feasible,
        tail_violations,
    })
}

/// Instance graphs for approximation runs; instance i uses the i-th n of
/// the grid, cycling.
pub fn approximation_corpus(spec: &ExperimentSpec) -> Result<Vec<Graph>, HarnessError> {
    (0..spec.trials)
        .map(|i| {
            let n = spec.n[i % spec.n.len()];
            let mut rng = rng_from_seed(derive_seed(spec.seed, u32::MAX, i as u32));
            match &spec.source {
                GraphSource::ErdosRenyi => Ok(er_connected(n, spec.p, &mut rng)),
                GraphSource::File(p) => load_graph(p),
                GraphSource::Family(kind) => {
                    let args = FamilyArgs { n, r: spec.r, k: spec.k };
                    Ok(build(*kind, args, rng.gen())?.graph)
                }
                src => pa_graph(src, n, spec.m, rng.gen()),
            }
        })
        .collect()
}

pub fn run_approximation_experiment(spec: &ExperimentSpec) -> Result<Vec<ApproxRow>, HarnessError> {
    spec.validate()?;
    let alg: ApproxAlgorithm = spec.algorithm.as_deref().unwrap_or("altrandom").parse()?;
    let corpus = approximation_corpus(spec)?;
    corpus
        .par_iter()
        .enumerate()
        .map(|(i, g)| approx_instance(spec, alg, i, g))
        .collect()
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LowerboundRow {
    pub family: String,
    pub n: usize,
    pub algorithm: String,
    pub trials: usize,
    /// Median local query count.
    pub local_queries: f64,
    /// Median full-information query count.
    pub full_info_queries: f64,
    pub ratio: f64,
    pub success_rate: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LowerboundReport {
    pub rows: Vec<LowerboundRow>,
    /// Log-log slope of median local queries against n.
    pub slope: Option<f64>,
}

struct LowerboundTrial {
    local: usize,
    full: usize,
    success: bool,
}

/// The local algorithm each family is paired with.
pub fn lowerbound_algorithm(kind: FamilyKind) -> &'static str {
    match kind {
        FamilyKind::BrokenPaths | FamilyKind::TreeHub => "stsearch",
        FamilyKind::CliquePendant => "degreegreedy",
        FamilyKind::TwoStarsPaths => "altjump",
        FamilyKind::StarsWithPendants | FamilyKind::CliqueStar => "neighborcollect",
    }
}

fn lowerbound_trial(
    spec: &ExperimentSpec,
    inst: &FamilyInstance,
    rng: &mut SimRng,
) -> Result<LowerboundTrial, HarnessError> {
    let g = &inst.graph;
    let n = g.node_count();
    let budget = BudgetPolicy {
        max_queries: 4 * n,
        stop_rule: StopRule::RootFound,
    };
    let res: RunResult;
    let full;
    match inst.family {
        FamilyKind::BrokenPaths => {
            let (s, t) = (inst.special("s"), inst.special("t"));
            let mut o = Oracle::new(g, OracleConfig::one_local(rng.gen()), Some(s))?;
            let tl = o.label_of(t);
            res = st_search(&mut o, tl, &budget, rng)?;
            full = bfs_shortest_path(g, s, t)?.map_or(0, |p| p.len() - 1);
        }
        FamilyKind::TreeHub => {
            let hub = inst.special("hub");
            let start = NodeId(rng.gen_range(1..=n as u32));
            let mut o = Oracle::new(g, OracleConfig::one_local(rng.gen()), Some(start))?;
            let hl = o.label_of(hub);
            res = st_search(&mut o, hl, &budget, rng)?;
            full = bfs_shortest_path(g, inst.special("root"), hub)?.map_or(0, |p| p.len());
        }
        FamilyKind::CliquePendant => {
            let mut o = Oracle::new(g, OracleConfig::one_local(rng.gen()), None)?;
            res = degree_greedy_cover(&mut o, rng)?;
            full = inst.planted_opt.len();
        }
        FamilyKind::TwoStarsPaths => {
            let mut o = Oracle::new(g, OracleConfig::one_plus_local(rng.gen()), None)?;
            res = alternate_random_and_jump(&mut o, spec.rho, rng)?;
            full = inst.planted_opt.len();
        }
        FamilyKind::StarsWithPendants | FamilyKind::CliqueStar => {
            let mut o = Oracle::new(g, OracleConfig::one_plus_local(rng.gen()), None)?;
            res = neighbor_collect(&mut o, spec.c, rng)?;
            full = inst.planted_opt.len();
        }
    }
    Ok(LowerboundTrial {
        local: res.query_count(),
        full,
        success: res.success,
    })
}

/// Log-log least-squares slope of y against x.
pub fn loglog_slope(points: &[(f64, f64)]) -> Option<f64> {
    if points.len() < 2 || points.iter().any(|p| !(p.0 > 0.0 && p.1 > 0.0)) {
        return None;
    }
    let x: Vec<f64> = points.iter().map(|p| p.0.ln()).collect();
    let y: Vec<f64> = points.iter().map(|p| p.1.ln()).collect();
    let (xm, ym) = (mean(&x), mean(&y));
    let sxx: f64 = x.iter().map(|v| (v - xm).powi(2)).sum();
    if sxx == 0.0 {
        return None;
    }
    let sxy: f64 = x.iter().zip(&y).map(|(a, b)| (a - xm) * (b - ym)).sum();
    Some(sxy / sxx)
}

/// Local versus full-information effort on a family across the n grid; a
/// fresh instance is drawn for every trial.
pub fn run_lowerbound_demo(spec: &ExperimentSpec) -> Result<LowerboundReport, HarnessError> {
    spec.validate()?;
    let GraphSource::Family(kind) = spec.source else {
        return Err(HarnessError::InvalidSpec("lowerbound needs source = family:<name>".into()));
    };
    let mut rows = Vec::new();
    for (cell, &n) in spec.n.iter().enumerate() {
        let args = FamilyArgs { n, r: spec.r, k: spec.k };
        let trials = (0..spec.trials)
            .into_par_iter()
            .map(|t| {
                let mut rng = rng_from_seed(derive_seed(spec.seed, cell as u32, t as u32));
                let inst = build(kind, args, rng.gen())?;
                let out = lowerbound_trial(spec, &inst, &mut rng)?;
                Ok((inst.params.n, out))
            })
            .collect::<Result<Vec<_>, HarnessError>>()?;
        let actual_n = trials[0].0;
        let local: Vec<f64> = trials.iter().map(|t| t.1.local as f64).collect();
        let full: Vec<f64> = trials.iter().map(|t| t.1.full as f64).collect();
        let (lm, fm) = (median(&local), median(&full));
        rows.push(LowerboundRow {
            family: kind.name().to_string(),
            n: actual_n,
            algorithm: lowerbound_algorithm(kind).to_string(),
            trials: spec.trials,
            local_queries: lm,
            full_info_queries: fm,
            ratio: lm / fm,
            success_rate: trials.iter().filter(|t| t.1.success).count() as f64 / spec.trials as f64,
        });
    }
    let pts: Vec<(f64, f64)> = rows.iter().map(|r| (r.n as f64, r.local_queries)).collect();
    Ok(LowerboundReport {
        slope: loglog_slope(&pts),
        rows,
    })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DiagnosticsRow {
    pub n: usize,
    pub m: usize,
    pub trial: usize,
    pub root_degree_value: usize,
    pub max_degree: usize,
    pub degree_sum: usize,
    pub loops: usize,
    /// deg(1) ≥ m·sqrt(n)/ln n.
    pub root_bound_ok: bool,
    /// max degree ≤ m·sqrt(n)·ln n.
    pub max_bound_ok: bool,
    pub degree_sum_ok: bool,
    pub upper_degree: String,
    pub lower_degree: String,
    pub weight_concentration: String,
    pub asymptotic_regime: bool,
}

fn outcome_str(e: &EventOutcome) -> String {
    match e {
        EventOutcome::Pass => "pass".into(),
        EventOutcome::Fail { worst_index } => format!("fail@{worst_index}"),
        EventOutcome::NotApplicable => "n/a".into(),
    }
}

pub fn diagnostics_trial(
    source: &GraphSource,
    n: usize,
    m: usize,
    trial: usize,
    seed: u64,
) -> Result<DiagnosticsRow, HarnessError> {
    let params = PaParams::new(n, m, seed)?;
    let (g, ws) = match source {
        GraphSource::PaSequential => (generate_sequential(&params).0, None),
        GraphSource::PaWeighted => {
            let (g, _, ws) = generate_weighted(&params);
            (g, Some(ws))
        }
        other => {
            return Err(HarnessError::InvalidSpec(format!(
                "diagnostics need a generated source, got {other}"
            )))
        }
    };
    let d = DiagnosticsParams::new(n, m);
    let rep = degree_diagnostics(&g, ws.as_ref(), &d);
    let (nf, mf) = (n as f64, m as f64);
    let (_, maxd) = max_degree(&g);
    let degree_sum: usize = g.nodes().map(|v| g.degree(v)).sum();
    Ok(DiagnosticsRow {
        n,
        m,
        trial,
        root_degree_value: rep.root_deg,
        max_degree: maxd,
        degree_sum,
        loops: rep.loops,
        root_bound_ok: rep.root_deg as f64 >= mf * nf.sqrt() / nf.ln(),
        max_bound_ok: maxd as f64 <= mf * nf.sqrt() * nf.ln(),
        degree_sum_ok: degree_sum == 2 * m * n,
        upper_degree: outcome_str(&rep.upper_degree),
        lower_degree: outcome_str(&rep.lower_degree),
        weight_concentration: outcome_str(&rep.weight_concentration),
        asymptotic_regime: rep.asymptotic_regime,
    })
}

pub fn run_diagnostics_experiment(spec: &ExperimentSpec) -> Result<Vec<DiagnosticsRow>, HarnessError> {
    spec.validate()?;
    let cells: Vec<(usize, usize, usize)> = spec
        .n
        .iter()
        .enumerate()
        .flat_map(|(c, &n)| (0..spec.trials).map(move |t| (c, n, t)))
        .collect();
    cells
        .par_iter()
        .map(|&(c, n, t)| {
            diagnostics_trial(&spec.source, n, spec.m, t, derive_seed(spec.seed, c as u32, t as u32))
        })
        .collect()
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum OutputFormat {
    Csv,
    Json,
}

impl FromStr for OutputFormat {
    type Err = HarnessError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "csv" => Ok(OutputFormat::Csv),
            "json" => Ok(OutputFormat::Json),
            _ => Err(HarnessError::InvalidSpec(format!("unknown format {s:?}"))),
        }
    }
}

/// Writes rows with a header in struct field order. Refuses empty input
/// without touching the file system.
pub fn emit_results<T: Serialize>(rows: &[T], path: &Path, format: OutputFormat) -> Result<(), HarnessError> {
    if rows.is_empty() {
        return Err(HarnessError::EmptyRows);
    }
    match format {
        OutputFormat::Csv => {
            let csv_err = |source| HarnessError::Csv {
                path: path.to_path_buf(),
                source,
            };
            let mut w = csv::WriterBuilder::new()
                .terminator(csv::Terminator::Any(b'\n'))
                .from_path(path)
                .map_err(csv_err)?;
            for r in rows {
                w.serialize(r).map_err(csv_err)?;
            }
            w.flush().map_err(io_err(path))?;
        }
        OutputFormat::Json => {
            let mut text = serde_json::to_string_pretty(rows).expect("plain data");
            text.push('\n');
            fs::write(path, text).map_err(io_err(path))?;
        }
    }
    Ok(())
}

pub fn read_csv<T: DeserializeOwned>(path: &Path) -> Result<Vec<T>, HarnessError> {
    let csv_err = |source| HarnessError::Csv {
        path: path.to_path_buf(),
        source,
    };
    let mut r = csv::Reader::from_path(path).map_err(csv_err)?;
    r.deserialize().collect::<Result<_, _>>().map_err(csv_err)
}

pub fn read_json<T: DeserializeOwned>(path: &Path) -> Result<Vec<T>, HarnessError> {
    let text = fs::read_to_string(path).map_err(io_err(path))?;
    serde_json::from_str(&text).map_err(|e| HarnessError::Io {
        path: path.to_path_buf(),
        source: e.into(),
    })
}

fn write_json<T: Serialize>(value: &T, path: &Path) -> Result<(), HarnessError> {
    let mut text = serde_json::to_string_pretty(value).expect("plain data");
    text.push('\n');
    fs::write(path, text).map_err(io_err(path))
}

/// Runs the experiment and writes its files into `out_dir`, returning the
/// paths written.
pub fn run_experiment(spec: &ExperimentSpec, out_dir: &Path) -> Result<Vec<PathBuf>, HarnessError> {
    fs::create_dir_all(out_dir).map_err(io_err(out_dir))?;
    let mut written = Vec::new();
    let mut put = |name: &str| {
        let p = out_dir.join(name);
        written.push(p.clone());
        p
    };
    match spec.kind {
        ExperimentKind::Scaling => {
            let out = run_scaling_experiment(spec)?;
            emit_results(&out.rows, &put("scaling.csv"), OutputFormat::Csv)?;
            emit_results(&out.summary, &put("scaling_summary.csv"), OutputFormat::Csv)?;
            let pts = medians(&out.summary);
            if pts.len() >= 4 {
                write_json(&fit_polylog_exponent(&pts)?, &put("fit.json"))?;
            }
        }
        ExperimentKind::Approximation => {
            let rows = run_approximation_experiment(spec)?;
            emit_results(&rows, &put("approx.csv"), OutputFormat::Csv)?;
        }
        ExperimentKind::Lowerbound => {
            let rep = run_lowerbound_demo(spec)?;
            emit_results(&rep.rows, &put("lowerbound.csv"), OutputFormat::Csv)?;
            write_json(&rep, &put("lowerbound.json"))?;
        }
        ExperimentKind::Diagnostics => {
            let rows = run_diagnostics_experiment(spec)?;
            emit_results(&rows, &put("diagnostics.csv"), OutputFormat::Csv)?;
        }
    }
    Ok(written)
}

/// Compact JSON record of one algorithm run.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RunSummary {
    pub algorithm: String,
    pub n: usize,
    pub m: Option<usize>,
    pub seed: u64,
    pub queries: usize,
    pub set_size: usize,
    pub dominated: usize,
    pub root_hit_step: Option<usize>,
    pub f_value: Option<f64>,
    pub success: bool,
}

impl RunSummary {
    /// `m` is inferred as edges/n when that divides evenly.
    pub fn new(res: &RunResult, g: &Graph, seed: u64) -> Self {
        let (n, e) = (g.node_count(), g.edge_count());
        RunSummary {
            algorithm: res.algorithm.to_string(),
            n,
            m: (e > 0 && e % n == 0).then(|| e / n),
            seed,
            queries: res.query_count(),
            set_size: res.metrics.set_size,
            dominated: res.metrics.dominated_count,
            root_hit_step: res.metrics.root_hit_step,
            f_value: res.f_value,
            success: res.success,
        }
    }
}
