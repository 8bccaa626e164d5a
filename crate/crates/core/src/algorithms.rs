//! Local-information algorithms. Everything here talks to the hidden graph
//! only through [`Oracle`] jumps, crawls and view accessors; ground-truth
//! probes are used solely to decide when a root search may stop.

use std::collections::{BTreeMap, BTreeSet, HashSet};

use rand::seq::SliceRandom;
use rand::Rng;
use serde::Serialize;
use thiserror::Error;

use crate::graph::{dominated_count, Mode, NodeId, VertexSet};
use crate::oracle::{Label, Oracle, OracleError, QueryEntry, QueryLog, Reveal};

#[derive(Debug, Error, PartialEq)]
pub enum AlgoError {
    #[error("{algorithm} needs a radius-1 {expected:?} oracle")]
    WrongOracle {
        algorithm: &'static str,
        expected: Mode,
    },
    #[error("rho must lie in (0, 1], got {0}")]
    BadRho(f64),
    #[error("cost c must be at least 1, got {0}")]
    BadCost(f64),
    #[error("k must be at least 1")]
    BadK,
    #[error("budget must allow at least one query")]
    ZeroBudget,
    #[error(transparent)]
    Oracle(#[from] OracleError),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum StopRule {
    /// Stop as soon as a probe confirms the root is queried.
    RootFound,
    /// Spend the whole budget; the root hit step is still recorded.
    BudgetExhausted,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub struct BudgetPolicy {
    pub max_queries: usize,
    pub stop_rule: StopRule,
}

impl BudgetPolicy {
    pub fn new(max_queries: usize, stop_rule: StopRule) -> Result<Self, AlgoError> {
        if max_queries == 0 {
            return Err(AlgoError::ZeroBudget);
        }
        Ok(BudgetPolicy {
            max_queries,
            stop_rule,
        })
    }

    /// min(n, 10^6) queries, stopping at the root.
    pub fn default_for(n: usize) -> Self {
        BudgetPolicy {
            max_queries: n.clamp(1, 1_000_000),
            stop_rule: StopRule::RootFound,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum RunStatus {
    Success,
    /// Nothing left to crawl before the goal was met.
    Stranded,
    BudgetExhausted,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum StepKind {
    Jump,
    Greedy,
    Random,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct RunMetrics {
    pub set_size: usize,
    pub dominated_count: usize,
    pub root_hit_step: Option<usize>,
    pub steps: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct GainPerCost {
    /// max over prefixes S_i of |D(S_i)| / |S_i|.
    pub best_prefix_ratio: f64,
    pub best_prefix_len: usize,
    /// Member v maximizing |D({v})|.
    pub best_singleton: Label,
    pub best_singleton_ratio: f64,
    pub best_degree: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct RunResult {
    pub algorithm: &'static str,
    pub output_set: Vec<Label>,
    pub queries: QueryLog,
    pub metrics: RunMetrics,
    pub status: RunStatus,
    pub success: bool,
    pub trace: Vec<StepKind>,
    /// Highest-degree members, for the top-k search.
    pub top: Vec<(Label, usize)>,
    pub gain_per_cost: Option<GainPerCost>,
    pub f_value: Option<f64>,
}

impl RunResult {
    fn from_oracle(
        algorithm: &'static str,
        oracle: &Oracle<'_>,
        status: RunStatus,
        root_hit_step: Option<usize>,
        trace: Vec<StepKind>,
    ) -> Self {
        let queries = oracle.log().clone();
        RunResult {
            algorithm,
            output_set: oracle.queried(),
            metrics: RunMetrics {
                set_size: oracle.queried_len(),
                dominated_count: oracle.dominated_count(),
                root_hit_step,
                steps: queries.query_count(),
            },
            queries,
            success: status == RunStatus::Success,
            status,
            trace,
            top: Vec::new(),
            gain_per_cost: None,
            f_value: None,
        }
    }

    pub fn query_count(&self) -> usize {
        self.queries.query_count()
    }
}

fn require(oracle: &Oracle<'_>, algorithm: &'static str, mode: Mode) -> Result<(), AlgoError> {
    let cfg = oracle.config();
    if cfg.radius != 1 || cfg.mode != mode {
        return Err(AlgoError::WrongOracle {
            algorithm,
            expected: mode,
        });
    }
    Ok(())
}

fn pick<R: Rng + ?Sized>(options: &[Label], rng: &mut R) -> Option<Label> {
    options.choose(rng).copied()
}

/// Visible non-members ordered by degree.
struct DegreeFrontier {
    by_degree: BTreeSet<(usize, Label)>,
}

impl DegreeFrontier {
    fn new(oracle: &Oracle<'_>) -> Self {
        let by_degree = oracle
            .visible_labels()
            .filter(|&l| !oracle.is_queried(l))
            .map(|l| (oracle.degree(l).expect("visible"), l))
            .collect();
        DegreeFrontier { by_degree }
    }

    fn absorb(&mut self, oracle: &Oracle<'_>, reveal: &Reveal) {
        if let Some(d) = oracle.degree(reveal.label) {
            self.by_degree.remove(&(d, reveal.label));
        }
        for &l in &reveal.newly_visible {
            if !oracle.is_queried(l) {
                self.by_degree.insert((oracle.degree(l).expect("visible"), l));
            }
        }
    }

    /// A maximum-degree candidate, uniformly among ties.
    fn best<R: Rng + ?Sized>(&self, rng: &mut R) -> Option<Label> {
        let &(top, _) = self.by_degree.last()?;
        let ties: Vec<Label> = self
            .by_degree
            .range((top, Label(0))..)
            .map(|&(_, l)| l)
            .collect();
        pick(&ties, rng)
    }

    fn is_empty(&self) -> bool {
        self.by_degree.is_empty()
    }

    /// Crawls one maximum-degree candidate. `None` when nothing is left.
    fn step<R: Rng + ?Sized>(
        &mut self,
        oracle: &mut Oracle<'_>,
        rng: &mut R,
    ) -> Result<Option<Label>, AlgoError> {
        let Some(x) = self.best(rng) else {
            return Ok(None);
        };
        let reveal = oracle.crawl(x)?;
        self.absorb(oracle, &reveal);
        Ok(Some(x))
    }
}

/// Visible non-members keyed to the number of their edges leading outside
/// the view. In a radius-1 closed view this is |N(v) \ D(S)| on simple
/// graphs.
struct CoverageFrontier {
    score: BTreeMap<Label, usize>,
}

impl CoverageFrontier {
    fn new(oracle: &Oracle<'_>) -> Self {
        let score = oracle
            .visible_labels()
            .filter(|&l| !oracle.is_queried(l))
            .map(|l| (l, Self::score_of(oracle, l)))
            .collect();
        CoverageFrontier { score }
    }

    fn score_of(oracle: &Oracle<'_>, l: Label) -> usize {
        let seen: usize = oracle
            .visible_incident(l)
            .iter()
            .map(|&w| if w == l { 2 } else { 1 })
            .sum();
        oracle.degree(l).expect("visible") - seen
    }

    fn absorb(&mut self, oracle: &Oracle<'_>, reveal: &Reveal) {
        self.score.remove(&reveal.label);
        let fresh: HashSet<Label> = reveal.newly_visible.iter().copied().collect();
        for &w in &reveal.newly_visible {
            for v in oracle.visible_incident(w) {
                if v == w || fresh.contains(&v) {
                    continue;
                }
                if let Some(s) = self.score.get_mut(&v) {
                    *s -= 1;
                }
            }
        }
        for &w in &reveal.newly_visible {
            if !oracle.is_queried(w) {
                self.score.insert(w, Self::score_of(oracle, w));
            }
        }
    }

    /// Argmax of the score, uniformly among ties.
    fn best<R: Rng + ?Sized>(&self, rng: &mut R) -> Option<(Label, usize)> {
        let top = *self.score.values().max()?;
        let ties: Vec<Label> = self
            .score
            .iter()
            .filter(|&(_, &s)| s == top)
            .map(|(&l, _)| l)
            .collect();
        pick(&ties, rng).map(|l| (l, top))
    }
}

/// Distinct neighbors of a member that are not yet queried.
fn unqueried_neighbors(oracle: &Oracle<'_>, x: Label) -> Vec<Label> {
    let mut out: Vec<Label> = oracle
        .visible_incident(x)
        .into_iter()
        .filter(|&w| w != x && !oracle.is_queried(w))
        .collect();
    out.sort_unstable();
    out.dedup();
    out
}

struct RootWalk {
    status: RunStatus,
    root_hit_step: Option<usize>,
    frontier: DegreeFrontier,
}

fn walk_to_root<R: Rng + ?Sized>(
    oracle: &mut Oracle<'_>,
    budget: &BudgetPolicy,
    rng: &mut R,
    trace: &mut Vec<StepKind>,
) -> Result<RootWalk, AlgoError> {
    if oracle.queried_len() == 0 {
        oracle.jump();
        trace.push(StepKind::Jump);
    }
    let mut frontier = DegreeFrontier::new(oracle);
    let mut root_hit_step = oracle.root_hit().then(|| oracle.query_count());
    let status = loop {
        if root_hit_step.is_some() && budget.stop_rule == StopRule::RootFound {
            break RunStatus::Success;
        }
        if oracle.query_count() >= budget.max_queries {
            break RunStatus::BudgetExhausted;
        }
        if frontier.step(oracle, rng)?.is_none() {
            break RunStatus::Stranded;
        }
        trace.push(StepKind::Greedy);
        if root_hit_step.is_none() && oracle.root_hit() {
            root_hit_step = Some(oracle.query_count());
        }
    };
    let status = if root_hit_step.is_some() {
        RunStatus::Success
    } else {
        status
    };
    Ok(RootWalk {
        status,
        root_hit_step,
        frontier,
    })
}

/// Greedy walk toward the root: repeatedly crawl a maximum-degree visible
/// node. Needs a 1-local oracle seeded at the start node.
pub fn traverse_to_root<R: Rng + ?Sized>(
    oracle: &mut Oracle<'_>,
    budget: &BudgetPolicy,
    rng: &mut R,
) -> Result<RunResult, AlgoError> {
    require(oracle, "traverse_to_root", Mode::Open)?;
    let mut trace = Vec::new();
    let walk = walk_to_root(oracle, budget, rng, &mut trace)?;
    Ok(RunResult::from_oracle(
        "traverse",
        oracle,
        walk.status,
        walk.root_hit_step,
        trace,
    ))
}

/// Runs the root walk from `s` (the oracle's seed) and from `t`, returning
/// the union of both queried sets.
pub fn st_connect<R: Rng + ?Sized>(
    oracle: &mut Oracle<'_>,
    t: Label,
    budget: &BudgetPolicy,
    rng: &mut R,
) -> Result<RunResult, AlgoError> {
    require(oracle, "st_connect", Mode::Open)?;
    let s = oracle.queried();
    if s == [t] {
        return Ok(RunResult::from_oracle(
            "stconnect",
            oracle,
            RunStatus::Success,
            None,
            Vec::new(),
        ));
    }
    let mut other = oracle.sibling(t, rng.gen())?;
    let first = traverse_to_root(oracle, budget, rng)?;
    let second = traverse_to_root(&mut other, budget, rng)?;

    let mut union: VertexSet<Label> = first.output_set.iter().copied().collect();
    for &l in &second.output_set {
        union.insert(l);
    }
    let nodes: VertexSet = union
        .iter()
        .map(|l| oracle.node_of(l).expect("labels come from the oracle"))
        .collect();
    let mut queries = first.queries.clone();
    let offset = queries.entries.len();
    queries
        .entries
        .extend(second.queries.entries.iter().map(|e| QueryEntry {
            step: e.step + offset,
            ..*e
        }));
    queries.jumps += second.queries.jumps;
    queries.crawls += second.queries.crawls;
    queries.probes += second.queries.probes;

    let success = first.success && second.success;
    let status = if success {
        RunStatus::Success
    } else if first.status != RunStatus::Success {
        first.status
    } else {
        second.status
    };
    let root_hit_step = match (first.metrics.root_hit_step, second.metrics.root_hit_step) {
        (Some(_), Some(b)) => Some(first.query_count() + b),
        _ => None,
    };
    let mut trace = first.trace;
    trace.extend(second.trace);
    Ok(RunResult {
        algorithm: "stconnect",
        output_set: union.iter().collect(),
        metrics: RunMetrics {
            set_size: union.len(),
            dominated_count: dominated_count(oracle.hidden_graph(), &nodes)
                .expect("valid nodes"),
            root_hit_step,
            steps: queries.query_count(),
        },
        queries,
        status,
        success,
        trace,
        top: Vec::new(),
        gain_per_cost: None,
        f_value: None,
    })
}

/// Root walk followed by `k` further greedy crawls; reports the `k`
/// highest-degree members, non-increasing, ties in random order.
pub fn top_k_degrees<R: Rng + ?Sized>(
    oracle: &mut Oracle<'_>,
    k: usize,
    budget: &BudgetPolicy,
    rng: &mut R,
) -> Result<RunResult, AlgoError> {
    require(oracle, "top_k_degrees", Mode::Open)?;
    if k == 0 {
        return Err(AlgoError::BadK);
    }
    let mut trace = Vec::new();
    let mut walk = walk_to_root(oracle, budget, rng, &mut trace)?;
    if walk.status == RunStatus::Success {
        for _ in 0..k {
            if walk.frontier.step(oracle, rng)?.is_none() {
                break;
            }
            trace.push(StepKind::Greedy);
        }
    }
    let mut members: Vec<(Label, usize)> = oracle
        .queried()
        .into_iter()
        .map(|l| (l, oracle.degree(l).expect("members are visible")))
        .collect();
    members.shuffle(rng);
    members.sort_by_key(|m| std::cmp::Reverse(m.1));
    members.truncate(k);
    let mut result =
        RunResult::from_oracle("topk", oracle, walk.status, walk.root_hit_step, trace);
    result.top = members;
    Ok(result)
}

/// Root walk that also tracks the best coverage-per-node prefix and the
/// member with the largest closed neighborhood.
pub fn gain_per_cost_run<R: Rng + ?Sized>(
    oracle: &mut Oracle<'_>,
    budget: &BudgetPolicy,
    rng: &mut R,
) -> Result<RunResult, AlgoError> {
    require(oracle, "gain_per_cost_run", Mode::Open)?;
    let mut trace = Vec::new();
    if oracle.queried_len() == 0 {
        oracle.jump();
        trace.push(StepKind::Jump);
    }
    let mut frontier = DegreeFrontier::new(oracle);
    // with radius 1 the visible set is exactly D(S)
    let ratio = |o: &Oracle<'_>| o.visible_count() as f64 / o.queried_len() as f64;
    let mut best_prefix = (ratio(oracle), oracle.queried_len());
    let mut root_hit_step = oracle.root_hit().then(|| oracle.query_count());
    let status = loop {
        if root_hit_step.is_some() && budget.stop_rule == StopRule::RootFound {
            break RunStatus::Success;
        }
        if oracle.query_count() >= budget.max_queries {
            break RunStatus::BudgetExhausted;
        }
        if frontier.step(oracle, rng)?.is_none() {
            break RunStatus::Stranded;
        }
        trace.push(StepKind::Greedy);
        let r = ratio(oracle);
        if r > best_prefix.0 {
            best_prefix = (r, oracle.queried_len());
        }
        if root_hit_step.is_none() && oracle.root_hit() {
            root_hit_step = Some(oracle.query_count());
        }
    };
    let status = if root_hit_step.is_some() {
        RunStatus::Success
    } else {
        status
    };

    let mut best: Option<(Label, usize)> = None;
    let mut best_degree = 0;
    for l in oracle.queried() {
        let closed = 1 + unqueried_or_not_neighbors(oracle, l);
        if best.is_none_or(|(_, c)| closed > c) {
            best = Some((l, closed));
        }
        best_degree = best_degree.max(oracle.degree(l).expect("visible"));
    }
    let (best_singleton, closed) = best.expect("queried set is non-empty");
    let mut result = RunResult::from_oracle("gainpercost", oracle, status, root_hit_step, trace);
    result.gain_per_cost = Some(GainPerCost {
        best_prefix_ratio: best_prefix.0,
        best_prefix_len: best_prefix.1,
        best_singleton,
        best_singleton_ratio: closed as f64,
        best_degree,
    });
    Ok(result)
}

fn unqueried_or_not_neighbors(oracle: &Oracle<'_>, x: Label) -> usize {
    let mut out: Vec<Label> = oracle
        .visible_incident(x)
        .into_iter()
        .filter(|&w| w != x)
        .collect();
    out.sort_unstable();
    out.dedup();
    out.len()
}

/// Greedy coverage with a random neighbor after every greedy pick. Runs
/// until every node is dominated. Needs a 1⁺-local oracle.
pub fn alternate_random<R: Rng + ?Sized>(
    oracle: &mut Oracle<'_>,
    rng: &mut R,
) -> Result<RunResult, AlgoError> {
    require(oracle, "alternate_random", Mode::Closed)?;
    let n = oracle.node_count();
    let mut trace = Vec::new();
    if oracle.queried_len() == 0 {
        oracle.jump();
        trace.push(StepKind::Jump);
    }
    let mut board = CoverageFrontier::new(oracle);
    while oracle.visible_count() < n {
        match board.best(rng) {
            Some((x, gain)) if gain > 0 => {
                let reveal = oracle.crawl(x)?;
                board.absorb(oracle, &reveal);
                trace.push(StepKind::Greedy);
                if let Some(y) = pick(&unqueried_neighbors(oracle, x), rng) {
                    let reveal = oracle.crawl(y)?;
                    board.absorb(oracle, &reveal);
                    trace.push(StepKind::Random);
                }
            }
            // nothing reachable adds coverage: the rest lies in other components
            _ => {
                let reveal = oracle.jump();
                board.absorb(oracle, &reveal);
                trace.push(StepKind::Jump);
            }
        }
    }
    Ok(RunResult::from_oracle(
        "altrandom",
        oracle,
        RunStatus::Success,
        None,
        trace,
    ))
}

/// Jump, greedy crawl, random-neighbor crawl, repeated until at least
/// ⌈ρn⌉ nodes are dominated. Needs a 1⁺-local oracle.
pub fn alternate_random_and_jump<R: Rng + ?Sized>(
    oracle: &mut Oracle<'_>,
    rho: f64,
    rng: &mut R,
) -> Result<RunResult, AlgoError> {
    require(oracle, "alternate_random_and_jump", Mode::Closed)?;
    if !(rho > 0.0 && rho <= 1.0) {
        return Err(AlgoError::BadRho(rho));
    }
    let target = coverage_target(oracle.node_count(), rho);
    let mut trace = Vec::new();
    let mut board = CoverageFrontier::new(oracle);
    let done = |o: &Oracle<'_>| o.queried_len() > 0 && o.visible_count() >= target;
    'outer: while !done(oracle) {
        let reveal = oracle.jump();
        board.absorb(oracle, &reveal);
        trace.push(StepKind::Jump);
        if done(oracle) {
            break;
        }
        let Some((x, _)) = board.best(rng) else {
            continue;
        };
        let reveal = oracle.crawl(x)?;
        board.absorb(oracle, &reveal);
        trace.push(StepKind::Greedy);
        if done(oracle) {
            break;
        }
        if let Some(y) = pick(&unqueried_neighbors(oracle, x), rng) {
            let reveal = oracle.crawl(y)?;
            board.absorb(oracle, &reveal);
            trace.push(StepKind::Random);
            if done(oracle) {
                break 'outer;
            }
        }
    }
    Ok(RunResult::from_oracle(
        "altjump",
        oracle,
        RunStatus::Success,
        None,
        trace,
    ))
}

/// ⌈ρn⌉, computed so that exact products do not round up spuriously.
pub fn coverage_target(n: usize, rho: f64) -> usize {
    let x = rho * n as f64;
    let r = x.round();
    if (x - r).abs() < 1e-9 {
        r as usize
    } else {
        x.ceil() as usize
    }
}

/// Neighbor-collecting run: alternate_random to full domination, scored by
/// f(S) = c|S| + |V \ D(S)|.
pub fn neighbor_collect<R: Rng + ?Sized>(
    oracle: &mut Oracle<'_>,
    c: f64,
    rng: &mut R,
) -> Result<RunResult, AlgoError> {
    if c.is_nan() || c < 1.0 {
        return Err(AlgoError::BadCost(c));
    }
    let mut result = alternate_random(oracle, rng)?;
    result.algorithm = "neighborcollect";
    result.f_value = Some(neighbor_collect_value(
        c,
        result.metrics.set_size,
        oracle.node_count() - result.metrics.dominated_count,
    ));
    Ok(result)
}

/// c·|S| + undominated.
pub fn neighbor_collect_value(c: f64, set_size: usize, undominated: usize) -> f64 {
    c * set_size as f64 + undominated as f64
}

/// Dominating set built with degree information only: crawl a
/// maximum-degree visible node until everything is dominated, jumping when
/// nothing is crawlable. Works with a 1-local oracle.
pub fn degree_greedy_cover<R: Rng + ?Sized>(
    oracle: &mut Oracle<'_>,
    rng: &mut R,
) -> Result<RunResult, AlgoError> {
    require(oracle, "degree_greedy_cover", Mode::Open)?;
    let n = oracle.node_count();
    let mut trace = Vec::new();
    if oracle.queried_len() == 0 {
        oracle.jump();
        trace.push(StepKind::Jump);
    }
    let mut frontier = DegreeFrontier::new(oracle);
    while oracle.visible_count() < n {
        if frontier.is_empty() {
            let reveal = oracle.jump();
            frontier.absorb(oracle, &reveal);
            trace.push(StepKind::Jump);
        } else {
            frontier.step(oracle, rng)?;
            trace.push(StepKind::Greedy);
        }
    }
    Ok(RunResult::from_oracle(
        "degreegreedy",
        oracle,
        RunStatus::Success,
        None,
        trace,
    ))
}

/// Local s-t search from the oracle's seed: crawl `t` once visible,
/// otherwise a maximum-degree visible node.
pub fn st_search<R: Rng + ?Sized>(
    oracle: &mut Oracle<'_>,
    t: Label,
    budget: &BudgetPolicy,
    rng: &mut R,
) -> Result<RunResult, AlgoError> {
    require(oracle, "st_search", Mode::Open)?;
    let mut trace = Vec::new();
    let mut frontier = DegreeFrontier::new(oracle);
    let status = loop {
        if oracle.is_queried(t) {
            break RunStatus::Success;
        }
        if oracle.query_count() >= budget.max_queries {
            break RunStatus::BudgetExhausted;
        }
        if oracle.is_visible(t) {
            let reveal = oracle.crawl(t)?;
            frontier.absorb(oracle, &reveal);
        } else if frontier.step(oracle, rng)?.is_none() {
            break RunStatus::Stranded;
        }
        trace.push(StepKind::Greedy);
    };
    Ok(RunResult::from_oracle("stsearch", oracle, status, None, trace))
}

/// Hidden node ids of a run's output, for evaluation against baselines.
pub fn output_nodes(oracle: &Oracle<'_>, result: &RunResult) -> Vec<NodeId> {
    result
        .output_set
        .iter()
        .map(|&l| oracle.node_of(l).expect("labels come from the oracle"))
        .collect()
}
