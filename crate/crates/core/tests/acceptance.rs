//! Acceptance suite. Prints one PASS/FAIL line per criterion and exits
//! non-zero if any criterion fails.

use std::process::ExitCode;
use std::time::Instant;

use rand::Rng;

use netlocal::algorithms::{
    alternate_random, alternate_random_and_jump, degree_greedy_cover, gain_per_cost_run,
    neighbor_collect, st_connect, st_search, top_k_degrees, traverse_to_root, AlgoError,
    BudgetPolicy,
};
use netlocal::baselines::exact_max_degree;
use netlocal::families::{build, FamilyArgs, FamilyKind};
use netlocal::graph::{neighborhood_view, Graph, Mode, NodeId, VertexSet};
use netlocal::harness::{
    diagnostics_trial, er_connected, fit_polylog_exponent, medians, run_approximation_experiment,
    run_lowerbound_demo, run_scaling_experiment, ApproxRow, ExperimentKind, ExperimentSpec,
    GraphSource,
};
use netlocal::oracle::{Oracle, OracleConfig, OracleError};
use netlocal::pa::{generate_sequential, generate_weighted, PaParams};
use netlocal::rng::{derive_seed, rng_from_seed};

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: String) -> Outcome {
    Outcome { pass, detail }
}

type Criterion = (&'static str, fn() -> Outcome);

const MASTER: u64 = 0x5eed_2024;

fn c1_traversal_scaling() -> Outcome {
    let n: Vec<usize> = [10, 12, 14, 16, 18].iter().map(|e| 1usize << e).collect();
    let mut spec = ExperimentSpec::new(ExperimentKind::Scaling, GraphSource::PaSequential, n);
    spec.m = 2;
    spec.trials = 100;
    spec.seed = MASTER;
    let out = run_scaling_experiment(&spec).expect("scaling run");
    let rates_ok = out.summary.iter().all(|s| s.success_rate >= 0.95);
    let fit = fit_polylog_exponent(&medians(&out.summary)).expect("fit");
    let cells: Vec<String> = out
        .summary
        .iter()
        .map(|s| format!("n={} median={} success={:.2}", s.n, s.median_queries, s.success_rate))
        .collect();
    outcome(
        rates_ok && fit.verdict,
        format!(
            "{}; b={:.3} (se {:.3}), polylog rss={:.3}, linear rss={:.3}",
            cells.join(", "),
            fit.b,
            fit.se_b,
            fit.residual_norm,
            fit.linear_residual_norm
        ),
    )
}

fn c2_root_and_max_degree() -> Outcome {
    let (n, m, seeds) = (100_000, 2, 100);
    let rows: Vec<_> = (0..seeds)
        .map(|t| diagnostics_trial(&GraphSource::PaSequential, n, m, t, derive_seed(MASTER, 2, t as u32)).unwrap())
        .collect();
    let root = rows.iter().filter(|r| r.root_bound_ok).count();
    let maxd = rows.iter().filter(|r| r.max_bound_ok).count();
    let sums = rows.iter().filter(|r| r.degree_sum_ok).count();
    outcome(
        root >= 90 && maxd >= 90 && sums == seeds,
        format!("deg(1) >= m*sqrt(n)/ln n in {root}/100, max degree <= m*sqrt(n)*ln n in {maxd}/100, degree sum 2mn in {sums}/100"),
    )
}

fn c3_top_degree_ratio() -> Outcome {
    let n = 100_000;
    let threshold = 1.0 / (n as f64).ln().powi(2);
    let mut good = 0;
    let mut worst = f64::INFINITY;
    for t in 0..100u32 {
        let mut rng = rng_from_seed(derive_seed(MASTER, 3, t));
        let (g, _) = generate_sequential(&PaParams::new(n, 2, rng.gen()).unwrap());
        let start = NodeId(rng.gen_range(1..=n as u32));
        let mut o = Oracle::new(&g, OracleConfig::one_local(rng.gen()), Some(start)).unwrap();
        let res = top_k_degrees(&mut o, 1, &BudgetPolicy::default_for(n), &mut rng).unwrap();
        let (_, dmax) = exact_max_degree(&g);
        let ratio = res.top[0].1 as f64 / dmax as f64;
        worst = worst.min(ratio);
        if ratio >= threshold {
            good += 1;
        }
    }
    outcome(
        good >= 90,
        format!("ratio >= 1/ln^2 n ({threshold:.5}) in {good}/100 runs, worst ratio {worst:.4}"),
    )
}

fn approx_spec(n: Vec<usize>, instances: usize, algorithm: &str, cell: u64) -> ExperimentSpec {
    let mut spec = ExperimentSpec::new(ExperimentKind::Approximation, GraphSource::ErdosRenyi, n);
    spec.p = 0.3;
    spec.trials = instances;
    spec.runs = 100;
    spec.seed = MASTER ^ cell;
    spec.algorithm = Some(algorithm.to_string());
    spec
}

fn within(rows: &[ApproxRow]) -> usize {
    rows.iter().filter(|r| r.within_bound).count()
}

fn c4_mds_bound() -> Outcome {
    let spec = approx_spec((6..=16).collect(), 200, "altrandom", 4);
    let rows = run_approximation_experiment(&spec).unwrap();
    let ok = within(&rows);
    let dominating = rows.iter().all(|r| r.feasible_runs == r.runs);
    // pooled tail frequency against the pooled e^{-OPT} with 3 sigma slack
    let runs: usize = rows.iter().map(|r| r.runs).sum();
    let violations: usize = rows.iter().map(|r| r.tail_violations).sum();
    let expected: f64 = rows.iter().map(|r| r.runs as f64 * (-r.exact_value).exp()).sum::<f64>();
    let var: f64 = rows
        .iter()
        .map(|r| {
            let p = (-r.exact_value).exp();
            r.runs as f64 * p * (1.0 - p)
        })
        .sum();
    let freq = violations as f64 / runs as f64;
    let limit = (expected + 3.0 * var.sqrt()) / runs as f64;
    outcome(
        ok * 100 >= 95 * rows.len() && dominating && freq <= limit,
        format!(
            "mean |S| within 2(1+H)OPT+1 on {ok}/{} instances, all outputs dominating: {dominating}, tail frequency {freq:.5} <= {limit:.5}",
            rows.len()
        ),
    )
}

fn c5_first_success_charge() -> Outcome {
    let trials = 100_000;
    let mut rng = rng_from_seed(derive_seed(MASTER, 5, 0));
    let mut sum = 0.0;
    let mut sq = 0.0;
    for _ in 0..trials {
        let len = rng.gen_range(1..=40);
        let skew: f64 = rng.gen_range(0.5..4.0);
        let mut total = 0.0;
        for _ in 0..len {
            let p: f64 = rng.gen::<f64>().powf(skew);
            total += p;
            if rng.gen_bool(p) {
                break;
            }
        }
        sum += total;
        sq += total * total;
    }
    let mean = sum / trials as f64;
    let se = ((sq / trials as f64 - mean * mean) / trials as f64).sqrt();
    outcome(
        mean <= 1.0 + 3.0 * se,
        format!("mean charge {mean:.5}, limit 1 + 3se = {:.5}", 1.0 + 3.0 * se),
    )
}

fn c6_partial_cover_bound() -> Outcome {
    let mut spec = approx_spec((6..=14).collect(), 100, "altjump", 6);
    spec.rho = 0.5;
    spec.epsilon = 0.5;
    let rows = run_approximation_experiment(&spec).unwrap();
    let ok = within(&rows);
    let stop_ok: usize = rows.iter().map(|r| r.feasible_runs).sum();
    let runs: usize = rows.iter().map(|r| r.runs).sum();
    outcome(
        ok * 100 >= 95 * rows.len() && stop_ok == runs,
        format!(
            "mean |S| within 3|OPT|H/(rho*eps) on {ok}/{} instances, stop rule held in {stop_ok}/{runs} runs",
            rows.len()
        ),
    )
}

fn c7_neighbor_collect_bound() -> Outcome {
    let mut spec = approx_spec((6..=16).collect(), 100, "neighborcollect", 7);
    spec.c = 2.0;
    let rows = run_approximation_experiment(&spec).unwrap();
    let ok = within(&rows);
    let worst = rows.iter().map(|r| r.mean_value / r.bound).fold(0.0, f64::max);
    outcome(
        ok * 100 >= 95 * rows.len(),
        format!(
            "mean f(S) within 2c(1+H)f(OPT) on {ok}/{} instances, worst mean/bound {worst:.3}",
            rows.len()
        ),
    )
}

fn lowerbound_spec(kind: FamilyKind, n: Vec<usize>, cell: u64) -> ExperimentSpec {
    let mut spec = ExperimentSpec::new(ExperimentKind::Lowerbound, GraphSource::Family(kind), n);
    spec.trials = 100;
    spec.r = 1;
    spec.k = 1;
    spec.rho = 0.5;
    spec.seed = MASTER ^ cell;
    spec
}

fn medians_text(rep: &netlocal::harness::LowerboundReport) -> String {
    let med: Vec<String> = rep.rows.iter().map(|r| format!("n={} median={}", r.n, r.local_queries)).collect();
    med.join(", ")
}

fn c8a_broken_paths() -> Outcome {
    let rep = run_lowerbound_demo(&lowerbound_spec(FamilyKind::BrokenPaths, vec![62, 122, 242], 81)).unwrap();
    let slope = rep.slope.unwrap();
    let full_const = rep.rows.iter().all(|r| r.full_info_queries == 7.0);
    outcome(
        (0.8..=1.2).contains(&slope) && full_const,
        format!("{}; slope {slope:.3}, BFS path length constant 7: {full_const}", medians_text(&rep)),
    )
}

fn c8b_clique_pendant() -> Outcome {
    let rep = run_lowerbound_demo(&lowerbound_spec(FamilyKind::CliquePendant, vec![64, 128, 256], 82)).unwrap();
    let ok = rep.rows.iter().all(|r| r.local_queries >= r.n as f64 / 8.0);
    outcome(ok, format!("degree-only greedy {} (need >= n/8)", medians_text(&rep)))
}

fn c8c_two_stars() -> Outcome {
    let rep = run_lowerbound_demo(&lowerbound_spec(FamilyKind::TwoStarsPaths, vec![1000, 4000, 16000], 83)).unwrap();
    let slope = rep.slope.unwrap();
    outcome(slope >= 0.4, format!("{}; slope {slope:.3}", medians_text(&rep)))
}

/// Small graphs: fixed shapes, multigraph quirks, random and family graphs.
fn view_corpus() -> Vec<Graph> {
    let g = |n: usize, e: &[(u32, u32)]| {
        Graph::from_edges(n, e.iter().map(|&(a, b)| (NodeId(a), NodeId(b))).collect()).unwrap()
    };
    let path: Vec<(u32, u32)> = (1..12).map(|i| (i, i + 1)).collect();
    let cycle: Vec<(u32, u32)> = (1..=9).map(|i| (i, i % 9 + 1)).collect();
    let mut corpus = vec![
        g(1, &[(1, 1)]),
        g(3, &[(1, 2), (1, 2), (2, 2), (3, 3)]),
        g(12, &path),
        g(9, &cycle),
        g(6, &[(1, 2), (3, 4)]),
    ];
    let mut rng = rng_from_seed(derive_seed(MASTER, 9, 0));
    for n in [10, 20, 35, 50] {
        corpus.push(generate_sequential(&PaParams::new(n, 2, rng.gen()).unwrap()).0);
        corpus.push(er_connected(n, 4.0 / n as f64, &mut rng));
    }
    corpus.push(generate_weighted(&PaParams::new(30, 3, rng.gen()).unwrap()).0);
    for (kind, n) in [
        (FamilyKind::BrokenPaths, 50),
        (FamilyKind::CliquePendant, 20),
        (FamilyKind::TwoStarsPaths, 50),
        (FamilyKind::CliqueStar, 30),
    ] {
        corpus.push(build(kind, FamilyArgs::new(n), rng.gen()).unwrap().graph);
    }
    corpus
}

fn subsets_up_to_3(n: u32) -> impl Iterator<Item = Vec<NodeId>> {
    (1..=n).flat_map(move |a| {
        std::iter::once(vec![NodeId(a)])
            .chain((a + 1..=n).flat_map(move |b| {
                std::iter::once(vec![NodeId(a), NodeId(b)])
                    .chain((b + 1..=n).map(move |c| vec![NodeId(a), NodeId(b), NodeId(c)]))
            }))
    })
}

fn c9_oracle_soundness() -> Outcome {
    let corpus = view_corpus();
    let mut checked = 0u64;
    let mut mismatches = 0u64;
    for (gi, g) in corpus.iter().enumerate() {
        for r in [1, 2] {
            for mode in [Mode::Open, Mode::Closed] {
                let cfg = OracleConfig {
                    radius: r,
                    mode,
                    ..OracleConfig::one_local(gi as u64)
                };
                for s in subsets_up_to_3(g.node_count() as u32) {
                    let o = Oracle::with_queried(g, cfg, &s).unwrap();
                    let set: VertexSet = s.iter().copied().collect();
                    let want = neighborhood_view(g, &set, r, mode).unwrap().map_labels(|v| o.label_of(v));
                    checked += 1;
                    if o.current_view() != want {
                        mismatches += 1;
                    }
                }
            }
        }
    }

    // every algorithm over the corpus plus PA graphs; any locality error counts
    let mut runs = 0;
    let mut violations = 0;
    let mut other_errors = 0;
    let mut rng = rng_from_seed(derive_seed(MASTER, 9, 1));
    let mut graphs = corpus.clone();
    for n in [200, 1000] {
        graphs.push(generate_sequential(&PaParams::new(n, 2, rng.gen()).unwrap()).0);
    }
    for g in &graphs {
        let n = g.node_count();
        let budget = BudgetPolicy::default_for(n);
        for trial in 0..5 {
            let start = NodeId(rng.gen_range(1..=n as u32));
            let other = NodeId(rng.gen_range(1..=n as u32));
            let seed = rng.gen();
            let open = || Oracle::new(g, OracleConfig::one_local(seed), Some(start)).unwrap();
            let closed = || Oracle::new(g, OracleConfig::one_plus_local(seed), None).unwrap();
            let results: Vec<Result<_, AlgoError>> = vec![
                traverse_to_root(&mut open(), &budget, &mut rng).map(|_| ()),
                {
                    let mut o = open();
                    let t = o.label_of(other);
                    st_connect(&mut o, t, &budget, &mut rng).map(|_| ())
                },
                {
                    let mut o = open();
                    let t = o.label_of(other);
                    st_search(&mut o, t, &budget, &mut rng).map(|_| ())
                },
                top_k_degrees(&mut open(), 1 + trial, &budget, &mut rng).map(|_| ()),
                gain_per_cost_run(&mut open(), &budget, &mut rng).map(|_| ()),
                degree_greedy_cover(&mut open(), &mut rng).map(|_| ()),
                alternate_random(&mut closed(), &mut rng).map(|_| ()),
                alternate_random_and_jump(&mut closed(), 0.5, &mut rng).map(|_| ()),
                neighbor_collect(&mut closed(), 2.0, &mut rng).map(|_| ()),
            ];
            for r in results {
                runs += 1;
                match r {
                    Ok(()) => {}
                    Err(AlgoError::Oracle(OracleError::LocalityViolation(_))) => violations += 1,
                    Err(_) => other_errors += 1,
                }
            }
        }
    }
    outcome(
        mismatches == 0 && violations == 0 && other_errors == 0,
        format!(
            "{checked} views compared on {} graphs, {mismatches} discrepancies; {runs} algorithm runs, {violations} locality violations, {other_errors} other errors",
            corpus.len()
        ),
    )
}

fn c10_generator_cross_check() -> Outcome {
    let (n, m) = (10_000, 2);
    let mut seq = 0.0;
    let mut wtd = 0.0;
    for t in 0..100u32 {
        let p = PaParams::new(n, m, derive_seed(MASTER, 10, t)).unwrap();
        seq += generate_sequential(&p).0.degree(NodeId(1)) as f64;
        let p = PaParams::new(n, m, derive_seed(MASTER, 11, t)).unwrap();
        wtd += generate_weighted(&p).0.degree(NodeId(1)) as f64;
    }
    let (seq, wtd) = (seq / 100.0, wtd / 100.0);
    let rel = (seq - wtd).abs() / seq.max(wtd);
    outcome(
        rel < 0.10,
        format!("mean deg(1): sequential {seq:.1}, weighted {wtd:.1}, relative difference {rel:.4}"),
    )
}

fn main() -> ExitCode {
    let criteria: [Criterion; 12] = [
        ("1 traversal scaling", c1_traversal_scaling),
        ("2 root and max degree", c2_root_and_max_degree),
        ("3 top degree ratio", c3_top_degree_ratio),
        ("4 dominating set bound", c4_mds_bound),
        ("5 first-success charge", c5_first_success_charge),
        ("6 partial cover bound", c6_partial_cover_bound),
        ("7 neighbor-collecting bound", c7_neighbor_collect_bound),
        ("8a broken paths", c8a_broken_paths),
        ("8b clique pendant", c8b_clique_pendant),
        ("8c two stars", c8c_two_stars),
        ("9 oracle soundness", c9_oracle_soundness),
        ("10 generator cross-check", c10_generator_cross_check),
    ];
    let mut failed = 0;
    for (name, f) in criteria {
        let t = Instant::now();
        let o = f();
        let tag = if o.pass { "PASS" } else { "FAIL" };
        println!("criterion {name}: {tag} ({:.1}s) {}", t.elapsed().as_secs_f64(), o.detail);
        if !o.pass {
            failed += 1;
        }
    }
    if failed == 0 {
        println!("acceptance: all criteria passed");
        ExitCode::SUCCESS
    } else {
        println!("acceptance: {failed} criteria failed");
        ExitCode::FAILURE
    }
}
