use std::collections::BTreeSet;
use std::fs;

use netlocal::algorithms::alternate_random;
use netlocal::families::{build, FamilyArgs, FamilyKind};
use netlocal::harness::{
    emit_results, fit_polylog_exponent, median, read_csv, read_json, run_experiment,
    run_lowerbound_demo, run_scaling_experiment, summarize_scaling, ApproxRow, DiagnosticsRow,
    ExperimentKind, ExperimentSpec, GraphSource, HarnessError, LowerboundRow, OutputFormat,
    ScalingRow, ScalingSummary,
};
use netlocal::oracle::{Oracle, OracleConfig};
use netlocal::rng::{derive_seed, rng_from_seed};
use proptest::prelude::*;
use rand::Rng;
use tempfile::tempdir;

fn scaling_spec(n: Vec<usize>, trials: usize, seed: u64) -> ExperimentSpec {
    let mut spec = ExperimentSpec::new(ExperimentKind::Scaling, GraphSource::PaSequential, n);
    spec.trials = trials;
    spec.seed = seed;
    spec
}

#[test]
fn scaling_row_accounting_and_success() {
    let spec = scaling_spec(vec![1 << 10, 1 << 12, 1 << 14], 50, 21);
    let out = run_scaling_experiment(&spec).unwrap();
    assert_eq!(out.rows.len(), 150);
    assert_eq!(out.summary.len(), 3);
    for s in &out.summary {
        assert_eq!(s.trials, 50);
        assert!(s.success_rate >= 0.95, "n={} rate {}", s.n, s.success_rate);
    }
}

#[test]
fn scaling_files_are_byte_identical_across_reruns() {
    let spec = scaling_spec(vec![256, 512, 1024, 2048], 5, 4);
    let (a, b) = (tempdir().unwrap(), tempdir().unwrap());
    let pa = run_experiment(&spec, a.path()).unwrap();
    let pb = run_experiment(&spec, b.path()).unwrap();
    assert_eq!(pa.len(), 3);
    for (x, y) in pa.iter().zip(&pb) {
        assert_eq!(fs::read(x).unwrap(), fs::read(y).unwrap(), "{}", x.display());
    }
    let text = fs::read_to_string(a.path().join("scaling.csv")).unwrap();
    assert_eq!(text.lines().next(), Some("n,m,trial,queries,success,root_hit_step"));
    assert!(!text.contains('\r'));

    // summaries recomputed from the raw rows match the emitted ones
    let rows: Vec<ScalingRow> = read_csv(&a.path().join("scaling.csv")).unwrap();
    let summary: Vec<ScalingSummary> = read_csv(&a.path().join("scaling_summary.csv")).unwrap();
    assert_eq!(summarize_scaling(&rows), summary);
    let fit: serde_json::Value = serde_json::from_str(&fs::read_to_string(a.path().join("fit.json")).unwrap()).unwrap();
    assert!(fit["b"].as_f64().unwrap().is_finite());
}

#[test]
fn emit_refuses_empty_rows() {
    let dir = tempdir().unwrap();
    let path = dir.path().join("empty.csv");
    let rows: Vec<ScalingRow> = Vec::new();
    assert!(matches!(emit_results(&rows, &path, OutputFormat::Csv), Err(HarnessError::EmptyRows)));
    assert!(!path.exists());
}

fn arb_rows() -> impl Strategy<Value = Vec<ScalingRow>> {
    prop::collection::vec(
        (1usize..1 << 20, 1usize..5, 0usize..100, 0usize..1000, any::<bool>(), prop::option::of(0usize..1000)),
        1..20,
    )
    .prop_map(|v| {
        v.into_iter()
            .map(|(n, m, trial, queries, success, root_hit_step)| ScalingRow { n, m, trial, queries, success, root_hit_step })
            .collect()
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn csv_and_json_round_trip(rows in arb_rows()) {
        let dir = tempdir().unwrap();
        let csv = dir.path().join("r.csv");
        let json = dir.path().join("r.json");
        emit_results(&rows, &csv, OutputFormat::Csv).unwrap();
        emit_results(&rows, &json, OutputFormat::Json).unwrap();
        prop_assert_eq!(read_csv::<ScalingRow>(&csv).unwrap(), rows.clone());
        prop_assert_eq!(read_json::<ScalingRow>(&json).unwrap(), rows);
    }

    #[test]
    fn per_trial_seeds_are_distinct(master: u64) {
        let mut seen = BTreeSet::new();
        for cell in 0..20u32 {
            for trial in 0..50u32 {
                prop_assert!(seen.insert(derive_seed(master, cell, trial)));
            }
        }
    }
}

#[test]
fn fit_on_synthetic_inputs() {
    let grid = [1usize << 10, 1 << 12, 1 << 14, 1 << 16, 1 << 18];
    let poly: Vec<(usize, f64)> = grid.iter().map(|&n| (n, 3.0 * (n as f64).ln().powi(4))).collect();
    let fit = fit_polylog_exponent(&poly).unwrap();
    assert!((fit.b - 4.0).abs() <= 0.1);
    assert!(fit.verdict);

    let linear: Vec<(usize, f64)> = grid.iter().map(|&n| (n, n as f64)).collect();
    assert!(!fit_polylog_exponent(&linear).unwrap().verdict);

    let flat: Vec<(usize, f64)> = grid.iter().map(|&n| (n, 7.0)).collect();
    let fit = fit_polylog_exponent(&flat).unwrap();
    assert!(fit.b.abs() < 1e-9);
    assert!(fit.verdict);

    let zero: Vec<(usize, f64)> = grid.iter().map(|&n| (n, 0.0)).collect();
    assert!(fit_polylog_exponent(&zero).is_err());
    assert!(fit_polylog_exponent(&poly[..3]).is_err());
}

#[test]
fn spec_file_parsing() {
    let spec: ExperimentSpec = "# grid\nkind = scaling\nsource = ba\nn = 2^10, 4096, 1e4\ntrials = 3\nseed = 9\n"
        .parse()
        .unwrap();
    assert_eq!(spec.n, vec![1024, 4096, 10_000]);
    assert_eq!((spec.trials, spec.seed, spec.m), (3, 9, 2));
    assert!(matches!(
        "kind = scaling\nsource = ba\nn = 10\nbogus = 1\n".parse::<ExperimentSpec>(),
        Err(HarnessError::SpecSyntax { line: 4, .. })
    ));
    assert!("source = ba\nn = 10\n".parse::<ExperimentSpec>().is_err());
    assert!("kind = scaling\nsource = ba\nn = 10\ntrials = 0\n".parse::<ExperimentSpec>().is_err());
    let family: ExperimentSpec = "kind = lowerbound\nsource = family:two-stars-paths\nn = 1000\n".parse().unwrap();
    assert_eq!(family.source, GraphSource::Family(FamilyKind::TwoStarsPaths));
}

#[test]
fn approximation_and_diagnostics_files() {
    let dir = tempdir().unwrap();
    let mut spec = ExperimentSpec::new(ExperimentKind::Approximation, GraphSource::ErdosRenyi, vec![8, 10]);
    spec.trials = 4;
    spec.runs = 10;
    spec.algorithm = Some("altrandom".into());
    run_experiment(&spec, dir.path()).unwrap();
    let rows: Vec<ApproxRow> = read_csv(&dir.path().join("approx.csv")).unwrap();
    assert_eq!(rows.len(), 4);
    for r in &rows {
        assert!(r.ratio >= 1.0 - 1e-9);
        assert!((r.ratio - r.mean_value / r.exact_value).abs() < 1e-9);
    }

    let mut spec = ExperimentSpec::new(ExperimentKind::Diagnostics, GraphSource::PaWeighted, vec![2000]);
    spec.trials = 3;
    run_experiment(&spec, dir.path()).unwrap();
    let rows: Vec<DiagnosticsRow> = read_csv(&dir.path().join("diagnostics.csv")).unwrap();
    assert_eq!(rows.len(), 3);
    assert!(rows.iter().all(|r| r.degree_sum_ok && !r.asymptotic_regime));
}

#[test]
fn broken_paths_queries_roughly_double() {
    let mut spec = ExperimentSpec::new(
        ExperimentKind::Lowerbound,
        GraphSource::Family(FamilyKind::BrokenPaths),
        vec![62, 122, 242],
    );
    spec.trials = 100;
    spec.seed = 17;
    let rep = run_lowerbound_demo(&spec).unwrap();
    let rows: &[LowerboundRow] = &rep.rows;
    for w in rows.windows(2) {
        let ratio = w[1].local_queries / w[0].local_queries;
        assert!((1.5..=2.5).contains(&ratio), "{} -> {}: {ratio}", w[0].n, w[1].n);
        assert_eq!(w[0].full_info_queries, 7.0);
    }
}

#[test]
fn clique_pendant_closed_view_beats_degree_greedy() {
    let mut spec = ExperimentSpec::new(
        ExperimentKind::Lowerbound,
        GraphSource::Family(FamilyKind::CliquePendant),
        vec![64, 128, 256],
    );
    spec.trials = 30;
    spec.seed = 5;
    let rep = run_lowerbound_demo(&spec).unwrap();
    for row in &rep.rows {
        let mut sizes = Vec::new();
        for t in 0..30u32 {
            let mut rng = rng_from_seed(derive_seed(5, row.n as u32, t));
            let inst = build(FamilyKind::CliquePendant, FamilyArgs::new(row.n), rng.gen()).unwrap();
            let mut o = Oracle::new(&inst.graph, OracleConfig::one_plus_local(t as u64), None).unwrap();
            sizes.push(alternate_random(&mut o, &mut rng).unwrap().query_count() as f64);
        }
        let closed = median(&sizes);
        assert!(closed * 4.0 < row.local_queries, "n={}: {closed} vs {}", row.n, row.local_queries);
    }
}
