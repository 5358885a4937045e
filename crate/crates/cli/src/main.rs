//! `rcd`: simulate data, learn skeletons and CPDAGs, run benchmarks and
//! exhaustive self-checks.
//!
//! Exit codes: 0 success, 1 usage error, 2 data error, 3 internal
//! consistency error.

use std::collections::BTreeMap;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use serde::Serialize;

use rcd_core::bench::{self, Algo, AlgoOptions, BenchConfig};
use rcd_core::check::{self, CheckOptions};
use rcd_core::ci::{with_cache, CiStats, CiTester, FisherZ, GraphOracle, DEFAULT_ALPHA};
use rcd_core::data::Dataset;
use rcd_core::graph::edgelist::{self, default_names, write_mixed, write_undirected};
use rcd_core::graph::{MixedGraph, VStructure};
use rcd_core::mb::{compute_mb_tc, Symmetrize};
use rcd_core::orient::{
    assemble_vstructures, complete_sepsets, meek_close, vstructures_from_sepsets,
};
use rcd_core::rol::{HcConfig, DEFAULT_VI_CAP};
use rcd_core::sim::{gen_sem, sample_sem, Preset, SemConfig};
use rcd_core::{Error, LearnConfig, MbMethod, VertexSet};

const THREADS_ENV: &str = "RCD_THREADS";

#[derive(Parser)]
#[command(name = "rcd", version, about = "Recursive causal structure learning")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Generate a random DAG, a linear-Gaussian SEM over it and samples.
    Simulate(SimulateArgs),
    /// Learn a skeleton (and optionally a CPDAG) from data or a true graph.
    Learn(LearnArgs),
    /// Run a benchmark sweep described by a JSON config.
    Bench(BenchArgs),
    /// Run the exhaustive property suites against brute-force oracles.
    OracleCheck(OracleCheckArgs),
}

#[derive(clap::Args)]
struct SimulateArgs {
    #[arg(long)]
    n: usize,
    #[arg(long)]
    p: f64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// plain, diamond-free, or clique:M
    #[arg(long, default_value = "plain", value_parser = parse_preset)]
    preset: Preset,
    /// Number of latent vertices.
    #[arg(long, default_value_t = 0)]
    hidden: usize,
    /// Rows of data to sample; 0 writes no data.
    #[arg(long, default_value_t = 1000)]
    rows: usize,
    #[arg(long, default_value = ".")]
    out_dir: PathBuf,
}

#[derive(Clone, Copy, ValueEnum)]
enum CiKind {
    Oracle,
    FisherZ,
}

#[derive(Clone, Copy, ValueEnum)]
enum MbKind {
    /// Total conditioning.
    Tc,
    /// Grow-shrink, symmetrised by union.
    Gs,
    /// Grow-shrink, symmetrised by intersection.
    GsIntersection,
}

#[derive(clap::Args)]
struct LearnArgs {
    #[arg(long, value_parser = parse_algo)]
    algo: Algo,
    #[arg(long, value_enum, default_value = "fisher-z")]
    ci: CiKind,
    /// CSV data with a header row (fisher-z mode).
    #[arg(long)]
    data: Option<PathBuf>,
    /// True graph as an edge list (oracle mode); any data file is ignored.
    #[arg(long)]
    graph: Option<PathBuf>,
    /// Comma-separated latent vertex names of the true graph (oracle mode).
    #[arg(long, value_delimiter = ',')]
    latent: Vec<String>,
    #[arg(long, default_value_t = DEFAULT_ALPHA)]
    alpha: f64,
    #[arg(long, value_enum, default_value = "tc")]
    mb: MbKind,
    /// Clique-number bound for rsl-w.
    #[arg(long)]
    clique_bound: Option<usize>,
    #[arg(long, default_value_t = HcConfig::default().max_iter)]
    max_iter: usize,
    #[arg(long, default_value_t = HcConfig::default().max_swap)]
    max_swap: usize,
    #[arg(long, default_value_t = DEFAULT_VI_CAP)]
    vi_cap: usize,
    /// Fail instead of forcing out a vertex when none is removable.
    #[arg(long)]
    strict: bool,
    /// Write the learned skeleton here (stdout JSON always carries the edges).
    #[arg(long)]
    out_skeleton: Option<PathBuf>,
    /// Orient and write the CPDAG here (DAG learners only).
    #[arg(long)]
    out_cpdag: Option<PathBuf>,
    /// Write the stats block here instead of stdout.
    #[arg(long)]
    stats: Option<PathBuf>,
    /// Write a line-delimited JSON trace here.
    #[arg(long)]
    trace: Option<PathBuf>,
    /// Write the initial Markov boundaries (name -> names) as JSON here.
    #[arg(long)]
    mb_dump: Option<PathBuf>,
}

#[derive(clap::Args)]
struct BenchArgs {
    #[arg(long)]
    config: PathBuf,
    /// CSV report; stdout if absent.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Fill in the runtime column (makes the report non-reproducible).
    #[arg(long)]
    timing: bool,
}

#[derive(clap::Args)]
struct OracleCheckArgs {
    #[arg(long, default_value_t = CheckOptions::default().max_n)]
    max_n: usize,
    #[arg(long, default_value_t = CheckOptions::default().random)]
    random: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
}

fn parse_preset(s: &str) -> Result<Preset, String> {
    match s {
        "plain" => Ok(Preset::Plain),
        "diamond-free" => Ok(Preset::DiamondFree),
        _ => s
            .strip_prefix("clique:")
            .and_then(|m| m.parse().ok())
            .map(Preset::CliqueBounded)
            .ok_or_else(|| format!("unknown preset `{s}` (plain, diamond-free, clique:M)")),
    }
}

fn parse_algo(s: &str) -> Result<Algo, String> {
    s.parse().map_err(|e: Error| e.to_string())
}

fn exit_code(e: &Error) -> u8 {
    match e {
        Error::Consistency(_) => 3,
        Error::InvalidArgument(_) | Error::Generation(_) => 1,
        _ => 2,
    }
}

fn read(path: &Path) -> Result<String, Error> {
    fs::read_to_string(path).map_err(|e| {
        Error::Io(std::io::Error::new(
            e.kind(),
            format!("{}: {e}", path.display()),
        ))
    })
}

fn write(path: &Path, contents: &str) -> Result<(), Error> {
    fs::write(path, contents).map_err(|e| {
        Error::Io(std::io::Error::new(
            e.kind(),
            format!("{}: {e}", path.display()),
        ))
    })
}

/// Prints a line to stdout; a closed pipe is not an error.
fn emit(line: &str) -> Result<(), Error> {
    let mut out = std::io::stdout().lock();
    match writeln!(out, "{line}") {
        Err(e) if e.kind() != std::io::ErrorKind::BrokenPipe => Err(Error::Io(e)),
        _ => Ok(()),
    }
}

fn usage(msg: impl Into<String>) -> Error {
    Error::InvalidArgument(msg.into())
}

fn configure_threads() -> Result<(), Error> {
    let Ok(v) = std::env::var(THREADS_ENV) else {
        return Ok(());
    };
    let n: usize = v.parse().ok().filter(|&n| n > 0).ok_or_else(|| {
        usage(format!(
            "{THREADS_ENV} must be a positive integer, got `{v}`"
        ))
    })?;
    rayon::ThreadPoolBuilder::new()
        .num_threads(n)
        .build_global()
        .map_err(|e| usage(e.to_string()))
}

#[derive(Serialize)]
struct SimulateSummary {
    n: usize,
    observed: usize,
    edges: usize,
    hidden: Vec<String>,
    files: Vec<String>,
}

fn simulate(a: &SimulateArgs) -> Result<(), Error> {
    // Same seed streams as `bench`, so a reported row can be regenerated here.
    let inst = bench::make_instance(a.n, a.p, a.seed, a.preset, a.hidden)?;
    let hidden = inst.dag.vertices().difference(&inst.observed);
    let names = default_names(a.n);
    fs::create_dir_all(&a.out_dir)?;
    let mut files = Vec::new();
    let mut put = |name: &str, contents: &str| -> Result<(), Error> {
        let p = a.out_dir.join(name);
        write(&p, contents)?;
        files.push(p.display().to_string());
        Ok(())
    };
    put("graph.txt", &write_mixed(&names, &inst.dag)?)?;
    let obs_names: Vec<String> = inst.observed.iter().map(|v| names[v].clone()).collect();
    put("truth.txt", &write_mixed(&obs_names, &inst.truth)?)?;
    let spec = gen_sem(
        &inst.dag,
        &hidden,
        bench::sub_seed(a.seed, 2),
        &SemConfig::default(),
    )?;
    put("sem.json", &spec.to_json()?)?;
    if a.rows > 0 {
        let data = sample_sem(&spec, a.rows, bench::sub_seed(a.seed, 3))?;
        let mut buf = Vec::new();
        data.to_csv(&mut buf)?;
        put("data.csv", &String::from_utf8(buf).expect("csv is utf-8"))?;
    }
    let summary = SimulateSummary {
        n: a.n,
        observed: inst.truth.n(),
        edges: inst.dag.num_edges(),
        hidden: hidden.iter().map(|v| names[v].clone()).collect(),
        files,
    };
    emit(&serde_json::to_string_pretty(&summary)?)
}

#[derive(Serialize)]
struct LearnReport {
    algorithm: String,
    variables: usize,
    edges: Vec<String>,
    removal_order: Vec<String>,
    stats: CiStats,
    forced_removals: usize,
    warnings: Vec<String>,
    clique_bound: Option<usize>,
    order_cost: Option<usize>,
    /// Unshielded colliders `(parent, child, parent)` implied by the
    /// learned separating sets.
    colliders: Vec<String>,
    cpdag: Option<CpdagEdges>,
}

#[derive(Serialize)]
struct CpdagEdges {
    directed: Vec<String>,
    undirected: Vec<String>,
}

/// Loads the tester and variable names for `learn`.
fn load_tester(a: &LearnArgs) -> Result<(Box<dyn CiTester>, Vec<String>), Error> {
    match a.ci {
        CiKind::Oracle => {
            let path = a
                .graph
                .as_ref()
                .ok_or_else(|| usage("oracle mode needs --graph"))?;
            let (names, g): (Vec<String>, MixedGraph) = edgelist::parse_mixed(&read(path)?)?;
            let mut latent = VertexSet::new();
            for l in &a.latent {
                let v = names
                    .iter()
                    .position(|n| n == l)
                    .ok_or_else(|| usage(format!("latent vertex `{l}` is not in the graph")))?;
                latent.insert(v);
            }
            let observed = g.vertices().difference(&latent);
            let obs_names = observed.iter().map(|v| names[v].clone()).collect();
            Ok((
                Box::new(with_cache(GraphOracle::marginal(g, &observed)?)),
                obs_names,
            ))
        }
        CiKind::FisherZ => {
            let path = a
                .data
                .as_ref()
                .ok_or_else(|| usage("fisher-z mode needs --data"))?;
            if !(a.alpha > 0.0 && a.alpha < 1.0) {
                return Err(usage(format!("alpha {} outside (0, 1)", a.alpha)));
            }
            let file = fs::File::open(path).map_err(|e| {
                Error::Io(std::io::Error::new(
                    e.kind(),
                    format!("{}: {e}", path.display()),
                ))
            })?;
            let data = Dataset::from_csv(file)?;
            let names = data.names().to_vec();
            Ok((Box::new(with_cache(FisherZ::new(&data, a.alpha)?)), names))
        }
    }
}

fn learn(a: &LearnArgs) -> Result<(), Error> {
    if a.algo == Algo::RslW && a.clique_bound.is_none() {
        return Err(usage("rsl-w needs --clique-bound"));
    }
    if a.out_cpdag.is_some() && !a.algo.assumes_dag() {
        return Err(usage(format!(
            "{} learns a MAG skeleton; no CPDAG is defined",
            a.algo
        )));
    }
    let (tester, names) = load_tester(a)?;
    let vars = VertexSet::full(names.len());
    let opts = AlgoOptions {
        learn: LearnConfig {
            mb_method: match a.mb {
                MbKind::Tc => MbMethod::TotalConditioning,
                MbKind::Gs => MbMethod::GrowShrink(Symmetrize::Union),
                MbKind::GsIntersection => MbMethod::GrowShrink(Symmetrize::Intersection),
            },
            strict: a.strict,
            trace: a.trace.is_some(),
            ..LearnConfig::default()
        },
        clique_bound: a.clique_bound,
        hc: HcConfig {
            max_iter: a.max_iter,
            max_swap: a.max_swap,
            init: None,
        },
        vi_cap: a.vi_cap,
    };
    let learned = bench::learn(a.algo, tester.as_ref(), &vars, &opts)?;
    let stats = learned.stats.clone();

    let mut sepsets = learned.sepsets.clone();
    let missing = complete_sepsets(tester.as_ref(), &learned.skeleton, &mut sepsets)?;
    let mut warnings = learned.warnings.clone();
    if missing > 0 {
        warnings.push(format!(
            "{missing} non-adjacent pair(s) sharing a neighbour have no separating set"
        ));
    }
    let colliders = vstructures_from_sepsets(&learned.skeleton, &sepsets);
    let name3 = |v: &VStructure| {
        format!(
            "{} -> {} <- {}",
            names[v.parent1], names[v.child], names[v.parent2]
        )
    };
    let undirected = |&(x, y): &(usize, usize)| format!("{} -- {}", names[x], names[y]);
    let directed = |&(x, y): &(usize, usize)| format!("{} -> {}", names[x], names[y]);

    let cpdag = match &a.out_cpdag {
        Some(path) => {
            let mut result = learned.to_skeleton_result();
            result.sepsets = sepsets.clone();
            let c = meek_close(&learned.skeleton, &assemble_vstructures(&result)?)?;
            write(path, &c.write(&names)?)?;
            Some(CpdagEdges {
                directed: c.directed_edges().iter().map(directed).collect(),
                undirected: c.undirected_edges().iter().map(undirected).collect(),
            })
        }
        None => None,
    };
    if let Some(path) = &a.out_skeleton {
        write(path, &write_undirected(&names, &learned.skeleton)?)?;
    }
    if let Some(path) = &a.trace {
        write(path, &learned.trace)?;
    }
    if let Some(path) = &a.mb_dump {
        let mb = compute_mb_tc(tester.as_ref(), &vars)?;
        let dump: BTreeMap<&str, Vec<&str>> = vars
            .iter()
            .map(|v| {
                let mut members: Vec<&str> = mb[v].iter().map(|u| names[u].as_str()).collect();
                members.sort_unstable();
                (names[v].as_str(), members)
            })
            .collect();
        write(path, &serde_json::to_string_pretty(&dump)?)?;
    }

    let report = LearnReport {
        algorithm: a.algo.to_string(),
        variables: names.len(),
        edges: learned.skeleton.edges().iter().map(undirected).collect(),
        removal_order: learned.order.iter().map(|&v| names[v].clone()).collect(),
        stats,
        forced_removals: learned.forced_removals,
        warnings,
        clique_bound: learned.clique_bound,
        order_cost: learned.order_cost,
        colliders: colliders.iter().map(name3).collect(),
        cpdag,
    };
    let json = serde_json::to_string_pretty(&report)?;
    match &a.stats {
        Some(path) => write(path, &json)?,
        None => emit(&json)?,
    }
    Ok(())
}

fn run_bench(a: &BenchArgs) -> Result<(), Error> {
    let mut cfg = BenchConfig::from_json(&read(&a.config)?)?;
    cfg.timing |= a.timing;
    let csv = bench::rows_to_csv(&bench::run_bench(&cfg)?)?;
    match &a.out {
        Some(path) => write(path, &csv),
        None => emit(csv.trim_end()),
    }
}

fn oracle_check(a: &OracleCheckArgs) -> Result<(), Error> {
    if a.max_n > 5 {
        return Err(usage(
            "--max-n above 5 is not supported (factorial order enumeration)",
        ));
    }
    let opts = CheckOptions {
        max_n: a.max_n,
        random: a.random,
        seed: a.seed,
    };
    let reports = check::run_all(&opts)?;
    let mut failed = Vec::new();
    for r in &reports {
        emit(&serde_json::to_string(r)?)?;
        if !r.passed() {
            failed.push(r.name.clone());
        }
    }
    if failed.is_empty() {
        Ok(())
    } else {
        Err(Error::Consistency(format!(
            "property suites failed: {}",
            failed.join(", ")
        )))
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
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
    let result = configure_threads().and_then(|()| match &cli.command {
        Command::Simulate(a) => simulate(a),
        Command::Learn(a) => learn(a),
        Command::Bench(a) => run_bench(a),
        Command::OracleCheck(a) => oracle_check(a),
    });
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(exit_code(&e))
        }
    }
}
