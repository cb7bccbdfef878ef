//! `gsim`: graph construction, GSI-M distances, Gram matrices, throughput
//! runs, transport oracles and the built-in self-test.

use std::fs::File;
use std::io::{BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::str::FromStr;

use clap::{Args, Parser, Subcommand, ValueEnum};
use thiserror::Error;

use gsim_core::baselines::{ow_oracle, w1_oracle, BaselineError};
use gsim_core::gram::{io as gram_io, GramError};
use gsim_core::graph::io as graph_io;
use gsim_core::solver::SolverError;
use gsim_core::{
    benchmark_pairs, build_random_graph, farthest_point_clustering, gram_distances,
    gsim_distance, pairwise_distances, random_pairs, seeded_root, EdgeFlow, EdgeProfile, Graph,
    GraphMode, Measure, NFunction, RootedIndex, SolverOptions,
};

#[derive(Debug, Error)]
enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error("{0}")]
    Data(String),
    #[error("{0}")]
    NonConvergence(String),
}

impl CliError {
    fn code(&self) -> u8 {
        match self {
            CliError::Usage(_) => 1,
            CliError::Data(_) => 2,
            CliError::NonConvergence(_) => 3,
        }
    }
}

impl From<SolverError> for CliError {
    fn from(e: SolverError) -> Self {
        match e {
            SolverError::NonConvergence { .. } => CliError::NonConvergence(e.to_string()),
            SolverError::InvalidOptions(_) => CliError::Usage(e.to_string()),
            other => CliError::Data(other.to_string()),
        }
    }
}

impl From<GramError> for CliError {
    fn from(e: GramError) -> Self {
        match e {
            GramError::Pair {
                source: SolverError::NonConvergence { .. },
                ..
            } => CliError::NonConvergence(e.to_string()),
            other => CliError::Data(other.to_string()),
        }
    }
}

impl From<BaselineError> for CliError {
    fn from(e: BaselineError) -> Self {
        CliError::Data(e.to_string())
    }
}

impl From<gsim_core::GraphError> for CliError {
    fn from(e: gsim_core::GraphError) -> Self {
        CliError::Data(e.to_string())
    }
}

#[derive(Debug, Parser)]
#[command(name = "gsim", version, about = "GSI-M distances between measures on a graph")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Cluster a point cloud and build a random graph over the centroids.
    GraphBuild(GraphBuildArgs),
    /// Distance between two measures.
    Dist(DistArgs),
    /// Pairwise distance matrix over a list of measures.
    Gram(GramArgs),
    /// Time distance evaluations over measure pairs.
    Bench(BenchArgs),
    /// Exact transport oracles on small supports.
    Oracle(OracleArgs),
    /// Run the built-in consistency checks.
    Selftest,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum ModeArg {
    Log,
    Sqrt,
}

#[derive(Debug, Args)]
struct GraphBuildArgs {
    /// Point file: one point per line, whitespace-separated coordinates.
    #[arg(long)]
    points: PathBuf,
    /// Number of centroids.
    #[arg(long = "centroids", short = 'm')]
    centroids: usize,
    #[arg(long, value_enum, default_value = "log")]
    mode: ModeArg,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long)]
    out: PathBuf,
}

/// `--root <id>` or `--root auto:<seed>`.
#[derive(Debug, Clone, Copy)]
enum RootSpec {
    Node(usize),
    Auto(u64),
}

impl FromStr for RootSpec {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        if let Some(seed) = s.strip_prefix("auto:") {
            seed.parse()
                .map(RootSpec::Auto)
                .map_err(|_| format!("invalid seed in `{s}`"))
        } else {
            s.parse()
                .map(RootSpec::Node)
                .map_err(|_| format!("expected a node id or auto:<seed>, got `{s}`"))
        }
    }
}

fn parse_phi(s: &str) -> Result<NFunction, String> {
    s.parse().map_err(|e: gsim_core::NFuncError| e.to_string())
}

fn parse_tol(s: &str) -> Result<f64, String> {
    let t: f64 = s.parse().map_err(|_| format!("invalid tolerance `{s}`"))?;
    if t > 0.0 && t <= 1e-2 {
        Ok(t)
    } else {
        Err(format!("tolerance must lie in (0, 1e-2], got {t}"))
    }
}

#[derive(Debug, Args)]
struct SolveArgs {
    /// N-function: p:<f>, ps:<f>, exp, expsq or linear.
    #[arg(long, value_parser = parse_phi, default_value = "exp")]
    phi: NFunction,
    /// Root node id, or auto:<seed> for a seeded random root.
    #[arg(long, default_value = "0")]
    root: RootSpec,
    #[arg(long, value_parser = parse_tol, default_value_t = 1e-10)]
    tol: f64,
    /// Use the univariate minimizer even where a closed form exists.
    #[arg(long)]
    force_optimizer: bool,
}

impl SolveArgs {
    fn options(&self) -> SolverOptions {
        SolverOptions {
            tol: self.tol,
            force_optimizer: self.force_optimizer,
            ..SolverOptions::default()
        }
    }
}

#[derive(Debug, Args)]
struct DistArgs {
    #[arg(long)]
    graph: PathBuf,
    #[arg(long)]
    mu: PathBuf,
    #[arg(long)]
    nu: PathBuf,
    #[command(flatten)]
    solve: SolveArgs,
}

#[derive(Debug, Args)]
struct GramArgs {
    #[arg(long)]
    graph: PathBuf,
    /// Measure files, one matrix row per file.
    #[arg(long, num_args = 1.., required = true)]
    measures: Vec<PathBuf>,
    #[command(flatten)]
    solve: SolveArgs,
    #[arg(long, default_value_t = 1, value_parser = clap::value_parser!(u32).range(1..))]
    threads: u32,
    /// Binary matrix output.
    #[arg(long)]
    out: PathBuf,
    /// Optional CSV copy of the matrix.
    #[arg(long)]
    csv: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct BenchArgs {
    #[arg(long)]
    graph: PathBuf,
    #[arg(long, num_args = 1.., required = true)]
    measures: Vec<PathBuf>,
    #[command(flatten)]
    solve: SolveArgs,
    #[arg(long, default_value_t = 1, value_parser = clap::value_parser!(u32).range(1..))]
    threads: u32,
    /// Number of random pairs; all unordered pairs when omitted.
    #[arg(long)]
    pairs: Option<usize>,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Write the report line here instead of stdout.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum OracleKind {
    W1,
    Ow,
}

#[derive(Debug, Args)]
struct OracleArgs {
    #[arg(value_enum)]
    kind: OracleKind,
    #[arg(long)]
    graph: PathBuf,
    #[arg(long)]
    mu: PathBuf,
    #[arg(long)]
    nu: PathBuf,
    /// N-function for the Orlicz-Wasserstein oracle.
    #[arg(long, value_parser = parse_phi, default_value = "exp")]
    phi: NFunction,
}

fn open(path: &Path) -> Result<BufReader<File>, CliError> {
    File::open(path)
        .map(BufReader::new)
        .map_err(|e| CliError::Data(format!("{}: {e}", path.display())))
}

fn create(path: &Path) -> Result<BufWriter<File>, CliError> {
    File::create(path)
        .map(BufWriter::new)
        .map_err(|e| CliError::Data(format!("{}: {e}", path.display())))
}

fn load_graph(path: &Path) -> Result<Graph, CliError> {
    graph_io::read_graph(open(path)?).map_err(|e| CliError::Data(format!("{}: {e}", path.display())))
}

fn load_measure(path: &Path) -> Result<Measure, CliError> {
    graph_io::read_measure(open(path)?)
        .map_err(|e| CliError::Data(format!("{}: {e}", path.display())))
}

fn rooted(g: &Graph, root: RootSpec) -> Result<(RootedIndex, EdgeProfile), CliError> {
    let root = match root {
        RootSpec::Node(v) => v,
        RootSpec::Auto(seed) => seeded_root(g.node_count(), seed)?,
    };
    let idx = RootedIndex::new(g, root).map_err(|e| CliError::Usage(e.to_string()))?;
    let prof = EdgeProfile::new(g, &idx);
    Ok((idx, prof))
}

fn write_err(e: std::io::Error) -> CliError {
    CliError::Data(format!("write failed: {e}"))
}

fn graph_build(a: &GraphBuildArgs) -> Result<(), CliError> {
    let points = graph_io::read_points(open(&a.points)?)?;
    let clusters = farthest_point_clustering(&points, a.centroids, a.seed)?;
    let centroids = clusters.centroids(&points);
    let mode = match a.mode {
        ModeArg::Log => GraphMode::Log,
        ModeArg::Sqrt => GraphMode::Sqrt,
    };
    let g = build_random_graph(&centroids, mode, a.seed)?;
    let mut out = create(&a.out)?;
    graph_io::write_graph(&g, &mut out).map_err(write_err)?;
    out.flush().map_err(write_err)?;
    println!(
        "nodes={} edges={} sampled={}",
        g.node_count(),
        g.edge_count(),
        mode.edge_budget(centroids.len())
    );
    Ok(())
}

fn dist(a: &DistArgs) -> Result<(), CliError> {
    let g = load_graph(&a.graph)?;
    let (mu, nu) = (load_measure(&a.mu)?, load_measure(&a.nu)?);
    let (idx, prof) = rooted(&g, a.solve.root)?;
    let flow = EdgeFlow::new(&idx, &mu, &nu)?;
    let r = gsim_distance(&prof, &flow, &a.solve.phi, &a.solve.options())?;
    println!("distance={:.16e}", r.distance);
    if let Some(k) = r.k_star {
        println!("k_star={k:.16e}");
        println!("iterations={}", r.iterations);
    }
    Ok(())
}

fn gram(a: &GramArgs) -> Result<(), CliError> {
    let g = load_graph(&a.graph)?;
    let measures = a
        .measures
        .iter()
        .map(|p| load_measure(p))
        .collect::<Result<Vec<_>, _>>()?;
    let (idx, prof) = rooted(&g, a.solve.root)?;
    let m = gram_distances(
        &prof,
        &idx,
        &measures,
        &a.solve.phi,
        &a.solve.options(),
        a.threads as usize,
    )?;
    let mut out = create(&a.out)?;
    gram_io::write_binary(&m, &mut out)?;
    out.flush().map_err(write_err)?;
    if let Some(csv) = &a.csv {
        let mut c = create(csv)?;
        gram_io::write_csv(&m, &mut c)?;
        c.flush().map_err(write_err)?;
    }
    println!("n={} phi={} root={}", m.n(), m.meta.phi, m.meta.root);
    Ok(())
}

fn bench(a: &BenchArgs) -> Result<(), CliError> {
    let g = load_graph(&a.graph)?;
    let measures = a
        .measures
        .iter()
        .map(|p| load_measure(p))
        .collect::<Result<Vec<_>, _>>()?;
    let (idx, prof) = rooted(&g, a.solve.root)?;
    let n = measures.len();
    let pairs = match a.pairs {
        Some(count) => random_pairs(n, count, a.seed),
        None => (0..n).flat_map(|i| (i + 1..n).map(move |j| (i, j))).collect(),
    };
    let report = benchmark_pairs(
        &prof,
        &idx,
        &measures,
        &pairs,
        &a.solve.phi,
        &a.solve.options(),
        a.threads as usize,
        false,
    )?;
    match &a.out {
        Some(path) => {
            let mut out = create(path)?;
            writeln!(out, "{report}").map_err(write_err)?;
            out.flush().map_err(write_err)?;
        }
        None => println!("{report}"),
    }
    Ok(())
}

fn oracle(a: &OracleArgs) -> Result<(), CliError> {
    let g = load_graph(&a.graph)?;
    let (mu, nu) = (load_measure(&a.mu)?, load_measure(&a.nu)?);
    for m in [&mu, &nu] {
        m.check_nodes(g.node_count())?;
    }
    let src: Vec<usize> = mu.support().iter().map(|s| s.0).collect();
    let dst: Vec<usize> = nu.support().iter().map(|s| s.0).collect();
    let mut nodes = src.clone();
    nodes.extend(&dst);
    nodes.sort_unstable();
    nodes.dedup();
    let d = pairwise_distances(&g, &nodes)?;
    let at = |v: usize| nodes.binary_search(&v).expect("support node listed");
    let cost: Vec<Vec<f64>> = src
        .iter()
        .map(|&i| dst.iter().map(|&j| d[at(i)][at(j)]).collect())
        .collect();
    let a_mass: Vec<f64> = mu.support().iter().map(|s| s.1).collect();
    let b_mass: Vec<f64> = nu.support().iter().map(|s| s.1).collect();
    let value = match a.kind {
        OracleKind::W1 => w1_oracle(&cost, &a_mass, &b_mass)?.0,
        OracleKind::Ow => ow_oracle(&cost, &a_mass, &b_mass, &a.phi)?,
    };
    println!("value={value:.16e}");
    Ok(())
}

fn selftest() -> Result<(), CliError> {
    let outcomes = gsim_core::selftest::run_all();
    let mut failed = Vec::new();
    for o in &outcomes {
        if o.passed {
            println!("PASS {}", o.name);
        } else {
            println!("FAIL {}: {}", o.name, o.detail);
            failed.push(o.name);
        }
    }
    if failed.is_empty() {
        Ok(())
    } else {
        Err(CliError::Data(format!("failed checks: {}", failed.join(", "))))
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    let result = match &cli.command {
        Command::GraphBuild(a) => graph_build(a),
        Command::Dist(a) => dist(a),
        Command::Gram(a) => gram(a),
        Command::Bench(a) => bench(a),
        Command::Oracle(a) => oracle(a),
        Command::Selftest => selftest(),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.code())
        }
    }
}
