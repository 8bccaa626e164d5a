use std::fs::File;
use std::io::{BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use rand::Rng;

use netlocal::algorithms::{
    alternate_random, alternate_random_and_jump, gain_per_cost_run, neighbor_collect, st_connect,
    top_k_degrees, traverse_to_root, BudgetPolicy, RunResult, StopRule,
};
use netlocal::families::{build, FamilyArgs, FamilyKind};
use netlocal::graph::{Graph, NodeId};
use netlocal::harness::{run_experiment, ExperimentKind, ExperimentSpec, RunSummary};
use netlocal::oracle::{Oracle, OracleConfig};
use netlocal::pa::{generate_sequential, generate_weighted, PaParams};
use netlocal::rng::rng_from_seed;

#[derive(Parser)]
#[command(name = "netlocal", version, about = "Local-information graph algorithms and experiments")]
struct Cli {
    #[command(subcommand)]
    cmd: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Generate a graph and write it in the text edge-list format.
    Generate {
        /// ba (sequential PA), br (weight-sequence PA) or family:<name>
        #[arg(long)]
        model: String,
        #[arg(long)]
        n: usize,
        #[arg(long, default_value_t = 2)]
        m: usize,
        #[arg(long, default_value_t = 1)]
        k: usize,
        #[arg(long, default_value_t = 1)]
        r: usize,
        /// Node cost recorded for neighbor-collecting families.
        #[arg(long)]
        c: Option<f64>,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        out: PathBuf,
    },
    /// Run one algorithm on a graph file and write a JSON summary.
    Run {
        #[arg(long, value_enum)]
        alg: Alg,
        #[arg(long)]
        graph: PathBuf,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value_t = 0.5)]
        rho: f64,
        #[arg(long, default_value_t = 2.0)]
        c: f64,
        #[arg(long)]
        budget: Option<usize>,
        /// Number of top-degree nodes for topk.
        #[arg(long, default_value_t = 1)]
        k: usize,
        /// Start node; uniform random when omitted.
        #[arg(long)]
        source: Option<u32>,
        /// Second endpoint for stconnect; uniform random when omitted.
        #[arg(long)]
        target: Option<u32>,
        #[arg(long)]
        out: PathBuf,
    },
    /// Run an experiment described by a key=value spec file.
    Experiment {
        #[arg(value_enum)]
        kind: Kind,
        #[arg(long)]
        spec: PathBuf,
        #[arg(long)]
        out: PathBuf,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum Alg {
    Traverse,
    Stconnect,
    Topk,
    Gainpercost,
    Altrandom,
    Altjump,
    Neighborcollect,
}

#[derive(Clone, Copy, ValueEnum)]
enum Kind {
    Scaling,
    Approx,
    Lowerbound,
    Diagnostics,
}

type AnyError = Box<dyn std::error::Error>;

fn create(path: &Path) -> Result<BufWriter<File>, AnyError> {
    File::create(path)
        .map(BufWriter::new)
        .map_err(|e| format!("{}: {e}", path.display()).into())
}

fn with_suffix(path: &Path, suffix: &str) -> PathBuf {
    let mut s = path.as_os_str().to_owned();
    s.push(suffix);
    PathBuf::from(s)
}

#[allow(clippy::too_many_arguments)]
fn generate(
    model: &str,
    n: usize,
    m: usize,
    k: usize,
    r: usize,
    c: Option<f64>,
    seed: u64,
    out: &Path,
) -> Result<(), AnyError> {
    if let Some(name) = model.strip_prefix("family:") {
        let kind: FamilyKind = name.parse()?;
        let mut inst = build(kind, FamilyArgs { n, r, k }, seed)?;
        inst.params.c = c;
        inst.write_files(create(out)?, create(&with_suffix(out, ".json"))?)?;
        return Ok(());
    }
    let params = PaParams::new(n, m, seed)?;
    match model {
        "ba" => generate_sequential(&params).0.write_text(create(out)?)?,
        "br" => {
            let (g, _, ws) = generate_weighted(&params);
            g.write_text(create(out)?)?;
            let mut w = create(&with_suffix(out, ".weights"))?;
            ws.write_text(&mut w)?;
            w.flush()?;
        }
        other => return Err(format!("unknown model {other:?}").into()),
    }
    Ok(())
}

fn node_arg(g: &Graph, v: Option<u32>, rng: &mut impl Rng) -> Result<NodeId, AnyError> {
    let n = g.node_count() as u32;
    match v {
        Some(v) if (1..=n).contains(&v) => Ok(NodeId(v)),
        Some(v) => Err(format!("node {v} is not in 1..={n}").into()),
        None => Ok(NodeId(rng.gen_range(1..=n))),
    }
}

#[allow(clippy::too_many_arguments)]
fn run(
    alg: Alg,
    graph: &Path,
    seed: u64,
    rho: f64,
    c: f64,
    budget: Option<usize>,
    k: usize,
    source: Option<u32>,
    target: Option<u32>,
    out: &Path,
) -> Result<(), AnyError> {
    let f = File::open(graph).map_err(|e| format!("{}: {e}", graph.display()))?;
    let g = Graph::read_text(BufReader::new(f))?;
    let mut rng = rng_from_seed(seed);
    let budget = match budget {
        Some(b) => BudgetPolicy::new(b, StopRule::RootFound)?,
        None => BudgetPolicy::default_for(g.node_count()),
    };
    let label_seed: u64 = rng.gen();
    let local = OracleConfig::one_local(label_seed);
    let plus = OracleConfig::one_plus_local(label_seed);
    let res: RunResult = match alg {
        Alg::Traverse | Alg::Topk | Alg::Gainpercost | Alg::Stconnect => {
            let s = node_arg(&g, source, &mut rng)?;
            let mut o = Oracle::new(&g, local, Some(s))?;
            match alg {
                Alg::Traverse => traverse_to_root(&mut o, &budget, &mut rng)?,
                Alg::Topk => top_k_degrees(&mut o, k, &budget, &mut rng)?,
                Alg::Gainpercost => gain_per_cost_run(&mut o, &budget, &mut rng)?,
                _ => {
                    let t = node_arg(&g, target, &mut rng)?;
                    let tl = o.label_of(t);
                    st_connect(&mut o, tl, &budget, &mut rng)?
                }
            }
        }
        Alg::Altrandom | Alg::Altjump | Alg::Neighborcollect => {
            let start = source.map(|v| node_arg(&g, Some(v), &mut rng)).transpose()?;
            let mut o = Oracle::new(&g, plus, start)?;
            match alg {
                Alg::Altrandom => alternate_random(&mut o, &mut rng)?,
                Alg::Altjump => alternate_random_and_jump(&mut o, rho, &mut rng)?,
                _ => neighbor_collect(&mut o, c, &mut rng)?,
            }
        }
    };
    let mut w = create(out)?;
    serde_json::to_writer_pretty(&mut w, &RunSummary::new(&res, &g, seed))?;
    w.write_all(b"\n")?;
    w.flush()?;
    let mut log = create(&with_suffix(out, ".log.jsonl"))?;
    res.queries.write_jsonl(&mut log)?;
    log.flush()?;
    Ok(())
}

fn experiment(kind: Kind, spec: &Path, out: &Path) -> Result<(), AnyError> {
    let mut spec = ExperimentSpec::from_file(spec)?;
    spec.kind = match kind {
        Kind::Scaling => ExperimentKind::Scaling,
        Kind::Approx => ExperimentKind::Approximation,
        Kind::Lowerbound => ExperimentKind::Lowerbound,
        Kind::Diagnostics => ExperimentKind::Diagnostics,
    };
    for p in run_experiment(&spec, out)? {
        println!("{}", p.display());
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() {
                ExitCode::from(1)
            } else {
                ExitCode::SUCCESS
            };
        }
    };
    let outcome = match cli.cmd {
        Command::Generate {
            model,
            n,
            m,
            k,
            r,
            c,
            seed,
            out,
        } => generate(&model, n, m, k, r, c, seed, &out),
        Command::Run {
            alg,
            graph,
            seed,
            rho,
            c,
            budget,
            k,
            source,
            target,
            out,
        } => run(alg, &graph, seed, rho, c, budget, k, source, target, &out),
        Command::Experiment { kind, spec, out } => experiment(kind, &spec, &out),
    };
    match outcome {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
    }
}
