use std::fs::File;
use std::io::{self, BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use dne::baselines::{partition_baseline, BaselineKind};
use dne::engine::{run, EngineConfig};
use dne::format::{append_reports, read_partition_file, write_partition_file, write_trace};
use dne::graph::{generate_rmat, load_edge_list, write_edge_list, RmatParams};
use dne::metrics::{replica_limit, validate_claims, QualityReport, CSV_HEADER};
use dne::runtime::Scheduler;
use dne::{Error, Graph, PartitionAssignment};

const USAGE: u8 = 1;
const INVALID: u8 = 2;
const INTERNAL: u8 = 3;

#[derive(Parser)]
#[command(
    name = "dne",
    version,
    about = "Vertex-cut edge partitioning by distributed neighbor expansion"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Write an RMAT graph as an edge list.
    Generate(GenerateArgs),
    /// Partition one graph and report its quality.
    Partition(PartitionArgs),
    /// Partition one graph under several lambda or partition-count settings.
    Sweep(SweepArgs),
    /// Check a partition file against its graph.
    Verify(VerifyArgs),
}

#[derive(Args)]
struct GenerateArgs {
    #[arg(long)]
    scale: u32,
    #[arg(long, default_value_t = 16)]
    edge_factor: u32,
    /// Quadrant probabilities a,b,c,d.
    #[arg(long, value_delimiter = ',', num_args = 4)]
    probabilities: Option<Vec<f64>>,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(short, long)]
    output: PathBuf,
}

#[derive(Args, Clone)]
struct InputArgs {
    /// Edge-list file.
    #[arg(short, long, conflicts_with = "rmat", required_unless_present = "rmat")]
    input: Option<PathBuf>,
    /// Generate the input instead: scale,edge_factor[,a,b,c,d]. Uses --seed.
    #[arg(long, value_delimiter = ',')]
    rmat: Option<Vec<f64>>,
}

#[derive(Copy, Clone, PartialEq, Eq, ValueEnum)]
enum Method {
    Dne,
    Random,
    Grid,
    Dbh,
    Seqne,
}

impl Method {
    fn name(self) -> &'static str {
        match self {
            Method::Dne => "dne",
            Method::Random => "random",
            Method::Grid => "grid",
            Method::Dbh => "dbh",
            Method::Seqne => "seqne",
        }
    }
}

#[derive(Args, Clone)]
struct RunArgs {
    #[command(flatten)]
    input: InputArgs,
    #[arg(long, value_enum, default_value_t = Method::Dne)]
    method: Method,
    #[arg(long, default_value_t = 1.1)]
    alpha: f64,
    #[arg(long, default_value_t = 0.1)]
    lambda: f64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Run every process on one thread in a fixed order.
    #[arg(long)]
    deterministic: bool,
    /// Worker threads in parallel mode (default: one per partition).
    #[arg(long)]
    workers: Option<usize>,
    /// Append quality rows to this CSV file.
    #[arg(long)]
    report: Option<PathBuf>,
}

#[derive(Args)]
struct PartitionArgs {
    #[command(flatten)]
    run: RunArgs,
    #[arg(short = 'P', long = "partitions")]
    partitions: usize,
    /// Partition file to write (`src dst partition` per edge).
    #[arg(short, long)]
    output: Option<PathBuf>,
    /// Write the message trace here (dne only).
    #[arg(long)]
    trace: Option<PathBuf>,
}

#[derive(Args)]
struct SweepArgs {
    #[command(flatten)]
    run: RunArgs,
    /// Partition counts to sweep.
    #[arg(
        short = 'P',
        long = "partitions",
        value_delimiter = ',',
        required = true
    )]
    partitions: Vec<usize>,
    /// Lambda values to sweep (default: --lambda alone).
    #[arg(long, value_delimiter = ',')]
    lambdas: Option<Vec<f64>>,
}

#[derive(Args)]
struct VerifyArgs {
    /// Edge-list file of the partitioned graph.
    #[arg(short, long)]
    input: PathBuf,
    /// Partition file to check.
    #[arg(long)]
    partition: PathBuf,
    /// Number of partitions (default: largest id in the file plus one).
    #[arg(short = 'P', long = "partitions")]
    partitions: Option<usize>,
}

struct Failure {
    code: u8,
    message: String,
}

impl Failure {
    fn usage(message: impl Into<String>) -> Self {
        Failure {
            code: USAGE,
            message: message.into(),
        }
    }

    fn at(path: &Path, err: Error) -> Self {
        let mut f = Failure::from(err);
        f.message = format!("{}: {}", path.display(), f.message);
        f
    }
}

impl From<Error> for Failure {
    fn from(err: Error) -> Self {
        let code = match &err {
            Error::Parse { .. }
            | Error::EmptyGraph
            | Error::InvalidParameter(_)
            | Error::VertexOutOfRange { .. }
            | Error::Io(_) => USAGE,
            Error::InvalidAssignment(_)
            | Error::BoundViolation { .. }
            | Error::CapExceeded { .. } => INVALID,
            _ => INTERNAL,
        };
        Failure {
            code,
            message: err.to_string(),
        }
    }
}

type CliResult<T> = std::result::Result<T, Failure>;

fn create(path: &Path) -> CliResult<BufWriter<File>> {
    File::create(path)
        .map(BufWriter::new)
        .map_err(|e| Failure::at(path, e.into()))
}

fn load(path: &Path) -> CliResult<Graph> {
    let file = File::open(path).map_err(|e| Failure::at(path, e.into()))?;
    load_edge_list(BufReader::new(file)).map_err(|e| Failure::at(path, e))
}

fn rmat_params(spec: &[f64], seed: u64) -> CliResult<RmatParams> {
    let whole = |x: f64| (x >= 0.0 && x.fract() == 0.0 && x <= u32::MAX as f64).then_some(x as u32);
    let (scale, ef) = match spec {
        [s, e] | [s, e, _, _, _, _] => (whole(*s), whole(*e)),
        _ => return Err(Failure::usage("--rmat takes scale,edge_factor[,a,b,c,d]")),
    };
    let (Some(scale), Some(ef)) = (scale, ef) else {
        return Err(Failure::usage(
            "--rmat scale and edge factor must be non-negative integers",
        ));
    };
    let mut params = RmatParams::new(scale, ef, seed);
    if let [_, _, a, b, c, d] = spec {
        params = params.with_probabilities([*a, *b, *c, *d]);
    }
    params.validate()?;
    Ok(params)
}

/// The graph and the name used for it in reports.
fn input_graph(args: &InputArgs, seed: u64) -> CliResult<(Graph, String)> {
    match (&args.input, &args.rmat) {
        (Some(path), _) => {
            let name = path
                .file_stem()
                .map(|s| s.to_string_lossy().into_owned())
                .unwrap_or_else(|| path.display().to_string());
            Ok((load(path)?, name))
        }
        (None, Some(spec)) => {
            let params = rmat_params(spec, seed)?;
            let name = format!("rmat{}x{}", params.scale, params.edge_factor);
            Ok((generate_rmat(&params)?, name))
        }
        (None, None) => Err(Failure::usage("one of --input or --rmat is required")),
    }
}

struct Outcome {
    assignment: PartitionAssignment,
    report: QualityReport,
    trace: Vec<dne::runtime::TraceRecord>,
}

fn partition_once(
    graph: &Graph,
    name: &str,
    args: &RunArgs,
    partitions: usize,
    lambda: f64,
    trace: bool,
) -> CliResult<Outcome> {
    let (assignment, iterations, elapsed_ms, records) = match args.method {
        Method::Dne => {
            let mut config = EngineConfig::new(partitions)
                .with_seed(args.seed)
                .with_alpha(args.alpha)
                .with_lambda(lambda);
            config.scheduler = if args.deterministic {
                Scheduler::Deterministic
            } else {
                Scheduler::Parallel {
                    workers: args.workers.unwrap_or(partitions).max(1),
                }
            };
            config.trace = trace;
            let out = run(graph, &config)?;
            (
                out.assignment,
                Some(out.iterations),
                out.elapsed_ms,
                out.trace,
            )
        }
        method => {
            let kind = match method {
                Method::Random => BaselineKind::Random1D,
                Method::Grid => BaselineKind::Grid2D,
                Method::Dbh => BaselineKind::Dbh,
                _ => BaselineKind::SequentialNe,
            };
            let start = std::time::Instant::now();
            let a = partition_baseline(kind, graph, partitions, args.alpha, args.seed)?;
            (a, None, start.elapsed().as_secs_f64() * 1e3, Vec::new())
        }
    };
    let mut report = QualityReport::measure(graph, &assignment)?;
    report.graph = name.to_string();
    report.partitioner = args.method.name().to_string();
    report.seed = args.seed;
    report.iterations = iterations;
    report.elapsed_ms = elapsed_ms;
    if args.method == Method::Dne {
        report.alpha = Some(args.alpha);
        report.lambda = Some(lambda);
    } else if args.method == Method::Seqne {
        report.alpha = Some(args.alpha);
    }
    Ok(Outcome {
        assignment,
        report,
        trace: records,
    })
}

fn emit(rows: &[QualityReport], report: Option<&Path>) -> CliResult<()> {
    if let Some(path) = report {
        append_reports(path, rows).map_err(|e| Failure::at(path, e))?;
    }
    let mut out = io::stdout().lock();
    let _ = writeln!(out, "{CSV_HEADER}");
    for r in rows {
        let _ = writeln!(out, "{}", r.csv_row());
    }
    Ok(())
}

fn cmd_generate(args: GenerateArgs) -> CliResult<()> {
    let mut params = RmatParams::new(args.scale, args.edge_factor, args.seed);
    if let Some(p) = args.probabilities {
        params = params.with_probabilities([p[0], p[1], p[2], p[3]]);
    }
    params.validate()?;
    let graph = generate_rmat(&params)?;
    let w = create(&args.output)?;
    write_edge_list(&graph, w).map_err(|e| Failure::at(&args.output, e))?;
    println!("|V|={} |E|={}", graph.vertex_count(), graph.edge_count());
    Ok(())
}

fn cmd_partition(args: PartitionArgs) -> CliResult<()> {
    if args.trace.is_some() && args.run.method != Method::Dne {
        return Err(Failure::usage(
            "--trace is only available with --method dne",
        ));
    }
    let (graph, name) = input_graph(&args.run.input, args.run.seed)?;
    let outcome = partition_once(
        &graph,
        &name,
        &args.run,
        args.partitions,
        args.run.lambda,
        args.trace.is_some(),
    )?;
    if let Some(path) = &args.output {
        let w = create(path)?;
        write_partition_file(&graph, &outcome.assignment, w).map_err(|e| Failure::at(path, e))?;
    }
    if let Some(path) = &args.trace {
        let w = create(path)?;
        write_trace(&outcome.trace, w).map_err(|e| Failure::at(path, e))?;
    }
    emit(&[outcome.report], args.run.report.as_deref())
}

fn cmd_sweep(args: SweepArgs) -> CliResult<()> {
    let lambdas = args
        .lambdas
        .clone()
        .unwrap_or_else(|| vec![args.run.lambda]);
    if lambdas.is_empty() || args.partitions.is_empty() {
        return Err(Failure::usage("sweep lists must not be empty"));
    }
    let (graph, name) = input_graph(&args.run.input, args.run.seed)?;
    let mut rows = Vec::new();
    for &p in &args.partitions {
        for &lambda in &lambdas {
            rows.push(partition_once(&graph, &name, &args.run, p, lambda, false)?.report);
        }
    }
    emit(&rows, args.run.report.as_deref())
}

fn cmd_verify(args: VerifyArgs) -> CliResult<()> {
    let graph = load(&args.input)?;
    let file = File::open(&args.partition).map_err(|e| Failure::at(&args.partition, e.into()))?;
    let claims = read_partition_file(&graph, BufReader::new(file))
        .map_err(|e| Failure::at(&args.partition, e))?;
    let partitions = match args.partitions {
        Some(p) if p > 0 => p,
        Some(_) => return Err(Failure::usage("-P must be positive")),
        None => claims
            .iter()
            .map(|&(_, p)| p as usize + 1)
            .max()
            .unwrap_or(1),
    };
    let violations = validate_claims(&graph, partitions, &claims);
    if !violations.is_empty() {
        for v in &violations {
            eprintln!("{v}");
        }
        return Err(Failure {
            code: INVALID,
            message: format!("{} violations", violations.len()),
        });
    }
    let assignment = PartitionAssignment::from_claims(&graph, partitions, &claims)?;
    let replicas = assignment.replica_count(&graph);
    let limit = replica_limit(graph.vertex_count(), graph.edge_count(), partitions);
    if replicas > limit {
        return Err(Error::BoundViolation { replicas, limit }.into());
    }
    println!(
        "ok: {} edges in {partitions} partitions, {replicas} replicas (limit {limit})",
        graph.edge_count()
    );
    Ok(())
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() {
                ExitCode::from(USAGE)
            } else {
                ExitCode::SUCCESS
            };
        }
    };
    let result = match cli.command {
        Command::Generate(a) => cmd_generate(a),
        Command::Partition(a) => cmd_partition(a),
        Command::Sweep(a) => cmd_sweep(a),
        Command::Verify(a) => cmd_verify(a),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("error: {}", f.message);
            ExitCode::from(f.code)
        }
    }
}
