use netlocal::algorithms::{
    alternate_random, alternate_random_and_jump, coverage_target, gain_per_cost_run,
    neighbor_collect, output_nodes, st_connect, top_k_degrees, traverse_to_root, AlgoError,
    BudgetPolicy, RunResult, RunStatus, StepKind, StopRule,
};
use netlocal::graph::{is_connected, is_dominating, Graph, Mode, NodeId, VertexSet};
use netlocal::harness::{coverage_stop_rule_holds, er_connected, median};
use netlocal::oracle::{Label, Oracle, OracleConfig, QueryKind};
use netlocal::pa::{generate_sequential, PaParams};
use netlocal::rng::{derive_seed, rng_from_seed};
use proptest::prelude::*;
use rand::Rng;

fn pa(n: usize, seed: u64) -> Graph {
    generate_sequential(&PaParams::new(n, 2, seed).unwrap()).0
}

/// Replays `res` on a fresh oracle built from the same inputs, calling
/// `check(oracle_before_step, entry_index)` before each query.
fn replay<'g>(
    g: &'g Graph,
    cfg: OracleConfig,
    seed: Option<NodeId>,
    res: &RunResult,
    mut check: impl FnMut(&Oracle<'g>, usize),
) -> Oracle<'g> {
    let mut o = Oracle::new(g, cfg, seed).unwrap();
    for (i, e) in res.queries.entries.iter().enumerate() {
        check(&o, i);
        match e.kind {
            QueryKind::Jump => assert_eq!(o.jump().label, e.label),
            QueryKind::Crawl => {
                o.crawl(e.label).unwrap();
            }
        }
    }
    o
}

fn frontier_max_degree(o: &Oracle<'_>) -> Option<usize> {
    o.visible_labels()
        .filter(|&l| !o.is_queried(l))
        .map(|l| o.degree(l).unwrap())
        .max()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(40))]

    #[test]
    fn traverse_always_crawls_a_max_degree_frontier_node(n in 2usize..400, gseed: u64, seed: u64) {
        let g = pa(n, gseed);
        let mut rng = rng_from_seed(seed);
        let start = NodeId(rng.gen_range(1..=n as u32));
        let cfg = OracleConfig::one_local(seed);
        let mut o = Oracle::new(&g, cfg, Some(start)).unwrap();
        let res = traverse_to_root(&mut o, &BudgetPolicy::default_for(n), &mut rng).unwrap();
        prop_assert!(res.success);
        prop_assert!(output_nodes(&o, &res).contains(&NodeId(1)));
        prop_assert_eq!(res.metrics.set_size, res.output_set.len());
        prop_assert!(res.metrics.root_hit_step.unwrap_or(0) <= res.metrics.steps);
        let entries = res.queries.entries.clone();
        replay(&g, cfg, Some(start), &res, |before, i| {
            let e = entries[i];
            assert_eq!(e.kind, QueryKind::Crawl);
            assert_eq!(Some(before.degree(e.label).unwrap()), frontier_max_degree(before));
        });
    }

    #[test]
    fn alternate_random_pattern(n in 2usize..40, gseed: u64, seed: u64) {
        let mut grng = rng_from_seed(gseed);
        let g = er_connected(n, 0.25, &mut grng);
        let mut rng = rng_from_seed(seed);
        let cfg = OracleConfig::one_plus_local(seed);
        let mut o = Oracle::new(&g, cfg, None).unwrap();
        let res = alternate_random(&mut o, &mut rng).unwrap();
        prop_assert!(is_dominating(&g, &output_nodes(&o, &res).into_iter().collect()).unwrap());
        prop_assert_eq!(res.trace.len(), res.queries.entries.len());

        let trace = res.trace.clone();
        let entries = res.queries.entries.clone();
        let mut last_greedy: Option<Label> = None;
        replay(&g, cfg, None, &res, |before, i| {
            match trace[i] {
                StepKind::Random => {
                    let x = last_greedy.take().expect("random step follows a greedy step");
                    let xn = before.node_of(x).unwrap();
                    let y = before.node_of(entries[i].label).unwrap();
                    assert!(g.neighbors(xn).any(|w| w == y));
                    assert!(!before.is_queried(entries[i].label));
                }
                other => {
                    // a skipped random crawl means N(x) \ S was empty
                    if let Some(x) = last_greedy.take() {
                        let xn = before.node_of(x).unwrap();
                        assert!(g.neighbors(xn).all(|w| before.is_queried(before.label_of(w))));
                    }
                    if other == StepKind::Greedy {
                        last_greedy = Some(entries[i].label);
                    }
                }
            }
        });
    }

    #[test]
    fn altjump_stop_rule(n in 1usize..40, gseed: u64, seed: u64, rho in 0.05f64..=1.0) {
        let g = pa(n, gseed);
        let mut rng = rng_from_seed(seed);
        let mut o = Oracle::new(&g, OracleConfig::one_plus_local(seed), None).unwrap();
        let res = alternate_random_and_jump(&mut o, rho, &mut rng).unwrap();
        let target = coverage_target(n, rho);
        prop_assert!(res.metrics.dominated_count >= target);
        prop_assert!(coverage_stop_rule_holds(&o, target));
        // each round opens with a jump
        for w in res.trace.windows(2) {
            prop_assert!(!(w[0] == StepKind::Random && w[1] != StepKind::Jump));
        }
        prop_assert_eq!(res.trace.first(), Some(&StepKind::Jump));
    }

    #[test]
    fn neighbor_collect_value_is_c_times_size(n in 1usize..40, gseed: u64, seed: u64, c in 1.0f64..5.0) {
        let g = pa(n, gseed);
        let mut rng = rng_from_seed(seed);
        let mut o = Oracle::new(&g, OracleConfig::one_plus_local(seed), None).unwrap();
        let res = neighbor_collect(&mut o, c, &mut rng).unwrap();
        prop_assert_eq!(res.metrics.dominated_count, n);
        prop_assert_eq!(res.f_value, Some(c * res.metrics.set_size as f64));
    }

    #[test]
    fn top_k_is_sorted_and_sized(n in 2usize..300, gseed: u64, seed: u64, k in 1usize..6) {
        let g = pa(n, gseed);
        let mut rng = rng_from_seed(seed);
        let start = NodeId(rng.gen_range(1..=n as u32));
        let mut o = Oracle::new(&g, OracleConfig::one_local(seed), Some(start)).unwrap();
        let res = top_k_degrees(&mut o, k, &BudgetPolicy::default_for(n), &mut rng).unwrap();
        prop_assert_eq!(res.top.len(), k.min(res.metrics.set_size));
        for w in res.top.windows(2) {
            prop_assert!(w[0].1 >= w[1].1);
        }
        for &(l, d) in &res.top {
            prop_assert_eq!(g.degree(o.node_of(l).unwrap()), d);
        }
    }
}

#[test]
fn st_connect_union_is_connected_and_contains_root() {
    for t in 0..20u32 {
        let mut rng = rng_from_seed(derive_seed(1, 0, t));
        let n = 500;
        let g = pa(n, rng.gen());
        let s = NodeId(rng.gen_range(1..=n as u32));
        let tn = NodeId(rng.gen_range(1..=n as u32));
        let mut o = Oracle::new(&g, OracleConfig::one_local(rng.gen()), Some(s)).unwrap();
        let tl = o.label_of(tn);
        let res = st_connect(&mut o, tl, &BudgetPolicy::default_for(n), &mut rng).unwrap();
        assert!(res.success);
        let nodes: Vec<NodeId> = output_nodes(&o, &res);
        assert!(nodes.contains(&s) && nodes.contains(&tn) && nodes.contains(&NodeId(1)));
        // induced subgraph on the union
        let index: std::collections::BTreeMap<NodeId, u32> =
            nodes.iter().enumerate().map(|(i, &v)| (v, i as u32 + 1)).collect();
        let edges = g
            .edges()
            .iter()
            .filter_map(|(a, b)| Some((NodeId(*index.get(a)?), NodeId(*index.get(b)?))))
            .collect();
        assert!(is_connected(&Graph::from_edges(nodes.len(), edges).unwrap()));
        assert_eq!(res.query_count(), res.queries.entries.len());
    }
}

#[test]
fn st_connect_same_endpoint_is_free() {
    let g = pa(50, 3);
    let mut o = Oracle::new(&g, OracleConfig::one_local(0), Some(NodeId(7))).unwrap();
    let l = o.label_of(NodeId(7));
    let res = st_connect(&mut o, l, &BudgetPolicy::default_for(50), &mut rng_from_seed(0)).unwrap();
    assert_eq!(res.output_set, vec![l]);
    assert_eq!(res.query_count(), 0);
}

#[test]
fn st_connect_size_against_single_traversal() {
    let n = 1 << 14;
    let mut sizes = Vec::new();
    let mut single = Vec::new();
    let mut ok = 0;
    for t in 0..100u32 {
        let mut rng = rng_from_seed(derive_seed(2, 0, t));
        let g = pa(n, rng.gen());
        let s = NodeId(rng.gen_range(1..=n as u32));
        let tn = NodeId(rng.gen_range(1..=n as u32));
        let label_seed = rng.gen();
        let budget = BudgetPolicy::default_for(n);
        let mut o = Oracle::new(&g, OracleConfig::one_local(label_seed), Some(s)).unwrap();
        let tl = o.label_of(tn);
        let res = st_connect(&mut o, tl, &budget, &mut rng).unwrap();
        if res.success {
            ok += 1;
        }
        sizes.push(res.metrics.set_size as f64);
        let mut o = Oracle::new(&g, OracleConfig::one_local(label_seed), Some(s)).unwrap();
        single.push(traverse_to_root(&mut o, &budget, &mut rng).unwrap().metrics.set_size as f64);
    }
    assert!(ok >= 90, "success {ok}/100");
    let (m2, m1) = (median(&sizes), median(&single));
    assert!(m2 <= 2.0 * m1, "st-connect median {m2} vs traversal median {m1}");
}

#[test]
fn gain_per_cost_finds_a_high_degree_node() {
    let n = 100_000;
    let nf = n as f64;
    let threshold = nf.sqrt() / (4.0 * nf.ln().powi(3));
    let mut good = 0;
    for t in 0..100u32 {
        let mut rng = rng_from_seed(derive_seed(3, 0, t));
        let g = pa(n, rng.gen());
        let start = NodeId(rng.gen_range(1..=n as u32));
        let mut o = Oracle::new(&g, OracleConfig::one_local(rng.gen()), Some(start)).unwrap();
        let res = gain_per_cost_run(&mut o, &BudgetPolicy::default_for(n), &mut rng).unwrap();
        let gpc = res.gain_per_cost.unwrap();
        assert!(gpc.best_prefix_ratio >= 1.0);
        if gpc.best_degree as f64 >= threshold {
            good += 1;
        }
    }
    assert!(good >= 90, "{good}/100 above {threshold}");
}

#[test]
fn wrong_oracle_mode_is_rejected() {
    let g = pa(20, 0);
    let mut rng = rng_from_seed(0);
    let mut closed = Oracle::new(&g, OracleConfig::one_plus_local(0), Some(NodeId(3))).unwrap();
    assert!(matches!(
        traverse_to_root(&mut closed, &BudgetPolicy::default_for(20), &mut rng),
        Err(AlgoError::WrongOracle { expected: Mode::Open, .. })
    ));
    let mut open = Oracle::new(&g, OracleConfig::one_local(0), None).unwrap();
    assert!(matches!(
        alternate_random(&mut open, &mut rng),
        Err(AlgoError::WrongOracle { expected: Mode::Closed, .. })
    ));
}

#[test]
fn budget_stops_the_walk() {
    let edges = (1..200).map(|i| (NodeId(i), NodeId(i + 1))).collect();
    let g = Graph::from_edges(200, edges).unwrap();
    let mut o = Oracle::new(&g, OracleConfig::one_local(1), Some(NodeId(200))).unwrap();
    let budget = BudgetPolicy::new(10, StopRule::RootFound).unwrap();
    let res = traverse_to_root(&mut o, &budget, &mut rng_from_seed(1)).unwrap();
    assert_eq!(res.status, RunStatus::BudgetExhausted);
    assert_eq!(res.query_count(), 10);
    assert!(!res.success);
    assert!(BudgetPolicy::new(0, StopRule::RootFound).is_err());
}

#[test]
fn disconnected_start_is_stranded() {
    let g = Graph::from_text("4 2\n1 2\n3 4\n").unwrap();
    let mut o = Oracle::new(&g, OracleConfig::one_local(1), Some(NodeId(4))).unwrap();
    let res = traverse_to_root(&mut o, &BudgetPolicy::default_for(4), &mut rng_from_seed(1)).unwrap();
    assert_eq!(res.status, RunStatus::Stranded);
    let set: VertexSet = output_nodes(&o, &res).into_iter().collect();
    assert!(!set.contains(&NodeId(1)));
}
