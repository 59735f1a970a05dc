//! `hetree-cli`: build trees, replay exploration scripts, run the benchmark harness, or serve the API.

mod input;
mod script;

use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;
use std::time::{Duration, Instant};

use clap::{Args, Parser, Subcommand};
use hetree::{build_tree, estimate_params, sort_dataset, EstimateOptions, TreeParams, Variant, VisBounds};
use hetree_bench::{ada_reports, AdaRow, BenchRow, Distribution, HarnessConfig};

use crate::input::InputArgs;

#[derive(Debug, Parser)]
#[command(name = "hetree-cli", version, about = "Hierarchical exploration trees over numeric and temporal RDF data")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Build a full tree and print its JSON document.
    Build(BuildArgs),
    /// Replay an exploration script, printing each view and the construction per step.
    Explore(ExploreArgs),
    /// Run the benchmark harness and print CSV.
    ///
    /// Columns: size, construction_ms (median sort + full build), first_response_nodes_full
    /// (nodes of the full tree), first_response_nodes_ico (nodes built incrementally for the
    /// basic scenario's first view), ico_init_bsc, ico_init_res, ico_init_ran (initial nodes
    /// per scenario), leaves, degree. With --ada the adaptation report columns are printed instead.
    Bench(BenchArgs),
    /// Serve the HTTP API.
    Serve(ServeArgs),
}

#[derive(Debug, Args)]
struct ShapeArgs {
    #[arg(long, default_value = "C")]
    variant: Variant,
    #[arg(long, requires = "degree", conflicts_with = "auto")]
    leaves: Option<usize>,
    #[arg(long, requires = "leaves", conflicts_with = "auto")]
    degree: Option<usize>,
    /// Estimate ℓ and d from per-leaf bounds λmin λmax (default when no shape is given: 10 50).
    #[arg(long, num_args = 2, value_names = ["LAMBDA_MIN", "LAMBDA_MAX"])]
    auto: Option<Vec<usize>>,
    #[arg(long, default_value_t = 6)]
    d_max: usize,
}

impl ShapeArgs {
    fn params(&self, n: usize) -> hetree::Result<TreeParams> {
        if let (Some(leaves), Some(degree)) = (self.leaves, self.degree) {
            return Ok(TreeParams::new(self.variant, leaves, degree));
        }
        let bounds = match self.auto.as_deref() {
            Some(&[lo, hi]) => VisBounds::new(lo, hi)?,
            _ => VisBounds::default(),
        };
        estimate_params(n, bounds, self.variant, EstimateOptions { d_max: self.d_max, ..Default::default() })
    }
}

#[derive(Debug, Args)]
struct BuildArgs {
    #[command(flatten)]
    input: InputArgs,
    #[command(flatten)]
    shape: ShapeArgs,
    /// Write the tree document here instead of stdout.
    #[arg(long, short)]
    output: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct ExploreArgs {
    #[command(flatten)]
    input: InputArgs,
    #[command(flatten)]
    shape: ShapeArgs,
    /// Script lines: `start bsc|res <subject>|ran <lower> <upper>`, `drill <k>`, `rollup`,
    /// `adapt degree <d>|leaves <l>`. Blank lines and `#` comments are ignored.
    #[arg(long)]
    script: PathBuf,
    /// Build only what each view needs instead of the full tree.
    #[arg(long)]
    incremental: bool,
    /// Print only the per-step counts.
    #[arg(long)]
    quiet: bool,
}

#[derive(Debug, Args)]
struct BenchArgs {
    /// Comma-separated sizes; scientific notation such as 1e5 is accepted.
    #[arg(long, value_delimiter = ',', default_value = "1e3,1e4,1e5", value_parser = parse_size)]
    sizes: Vec<usize>,
    #[arg(long, default_value = "uniform")]
    dist: Distribution,
    #[arg(long, default_value = "C")]
    variant: Variant,
    #[arg(long, default_value_t = 5)]
    repeat: usize,
    #[arg(long, default_value_t = 42)]
    seed: u64,
    /// Fix d and choose ℓ as a power of d within the default leaf bounds.
    #[arg(long)]
    degree: Option<usize>,
    /// Report one adaptation per case for each size instead.
    #[arg(long)]
    ada: bool,
}

#[derive(Debug, Args)]
struct ServeArgs {
    #[arg(long, env = "HETREE_PORT", default_value_t = 8080)]
    port: u16,
    /// Idle seconds before a session is evicted.
    #[arg(long, env = "HETREE_IDLE_TTL", default_value_t = 1800)]
    idle_ttl: u64,
    #[arg(long, env = "HETREE_LAMBDA_MIN", default_value_t = 10)]
    lambda_min: usize,
    #[arg(long, env = "HETREE_LAMBDA_MAX", default_value_t = 50)]
    lambda_max: usize,
    #[arg(long, env = "HETREE_D_MAX", default_value_t = 6)]
    d_max: usize,
}

fn parse_size(s: &str) -> Result<usize, String> {
    let v: f64 = s.trim().parse().map_err(|_| format!("not a size: {s:?}"))?;
    if v < 1.0 || v.fract() != 0.0 || v > 1e12 {
        return Err(format!("not a positive whole size: {s:?}"));
    }
    Ok(v as usize)
}

/// Failure with its process exit code.
#[derive(Debug)]
pub enum Failure {
    Usage(String),
    Data(String),
    Script { line: usize, message: String },
    Other(anyhow::Error),
}

impl Failure {
    fn code(&self) -> u8 {
        match self {
            Failure::Usage(_) => 2,
            Failure::Data(_) => 3,
            Failure::Script { .. } => 4,
            Failure::Other(_) => 1,
        }
    }
}

impl std::fmt::Display for Failure {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Failure::Usage(m) | Failure::Data(m) => f.write_str(m),
            Failure::Script { line, message } => write!(f, "script line {line}: {message}"),
            Failure::Other(e) => write!(f, "{e:#}"),
        }
    }
}

/// Domain errors about the input data are data failures; the rest are usage failures.
fn classify(e: hetree::Error) -> Failure {
    match e.kind() {
        hetree::ErrorKind::Data => Failure::Data(e.to_string()),
        hetree::ErrorKind::Internal => Failure::Other(e.into()),
        _ => Failure::Usage(e.to_string()),
    }
}

fn build(args: BuildArgs) -> Result<(), Failure> {
    let raw = args.input.load()?;
    let params = args.shape.params(raw.len()).map_err(classify)?;
    let t0 = Instant::now();
    let (tree, counters) = build_tree(sort_dataset(raw), params).map_err(classify)?;
    let ms = t0.elapsed().as_secs_f64() * 1e3;
    let doc = serde_json::to_string_pretty(&tree.to_document()).map_err(|e| Failure::Other(e.into()))?;
    match &args.output {
        Some(path) => std::fs::write(path, doc + "\n").map_err(|e| Failure::Other(e.into()))?,
        None => println!("{doc}"),
    }
    eprintln!(
        "built {} tree with leaves={} degree={}: {} nodes, height {}, {:.3} ms",
        params.variant,
        params.leaves,
        params.degree,
        counters.nodes_built,
        tree.height(),
        ms
    );
    Ok(())
}

/// A closed stdout (for example `| head`) ends the output quietly.
fn emit(out: &mut impl Write, line: &str) -> Result<(), Failure> {
    match writeln!(out, "{line}") {
        Err(e) if e.kind() != std::io::ErrorKind::BrokenPipe => Err(Failure::Other(e.into())),
        _ => Ok(()),
    }
}

fn bench(args: BenchArgs) -> Result<(), Failure> {
    let mut out = std::io::stdout().lock();
    if args.ada {
        emit(&mut out, &AdaRow::csv_header())?;
        for &size in &args.sizes {
            for row in ada_reports(size, args.dist, args.variant, args.seed).map_err(classify)? {
                emit(&mut out, &row.csv_row())?;
            }
        }
        return Ok(());
    }
    let config = HarnessConfig {
        sizes: args.sizes,
        dist: args.dist,
        variant: args.variant,
        repeat: args.repeat,
        seed: args.seed,
        bounds: VisBounds::default(),
        degree: args.degree,
    };
    emit(&mut out, BenchRow::CSV_HEADER)?;
    for row in hetree_bench::run(&config).map_err(classify)? {
        emit(&mut out, &row.csv_row())?;
    }
    Ok(())
}

fn serve(args: ServeArgs) -> Result<(), Failure> {
    let bounds = VisBounds::new(args.lambda_min, args.lambda_max).map_err(classify)?;
    let config = hetree_service::ServiceConfig {
        port: args.port,
        idle_ttl: Duration::from_secs(args.idle_ttl),
        bounds,
        d_max: args.d_max,
        ..Default::default()
    };
    let runtime = tokio::runtime::Runtime::new().map_err(|e| Failure::Other(e.into()))?;
    runtime
        .block_on(hetree_service::serve(config, async {
            let _ = tokio::signal::ctrl_c().await;
        }))
        .map_err(|e| Failure::Other(e.into()))
}

fn main() -> ExitCode {
    tracing_subscriber::fmt()
        .with_env_filter(tracing_subscriber::EnvFilter::try_from_default_env().unwrap_or_else(|_| "info".into()))
        .with_writer(std::io::stderr)
        .init();
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Build(a) => build(a),
        Command::Explore(a) => script::explore(a),
        Command::Bench(a) => bench(a),
        Command::Serve(a) => serve(a),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("error: {f}");
            ExitCode::from(f.code())
        }
    }
}
