//! Command-line front end: generate scenes, build with a chosen
//! verification strategy, run query batches, and reproduce the depth
//! versus search-path ratio experiments as CSV.

use std::fmt::Write as _;
use std::io::Write as _;
use std::path::PathBuf;
use std::str::FromStr;
use std::time::Instant;

use clap::{Parser, Subcommand, ValueEnum};

use traprix::arrangement_depth::verify_arrangement_depth;
use traprix::build::{build, derive_seed, BuildConfig, BuildError, InsertOrder, VerifierKind};
use traprix::dag::LocateKind;
use traprix::geometry::{Point, Rational};
use traprix::longest_path::max_search_path_length;
use traprix::scenarios::{
    gen_random_segments, gen_recursive_blocks, gen_sqrt_blocks, read_scene, write_scene, Scene,
    ScenarioError,
};

pub const CSV_HEADER: &str = "scenario,n,seed,D,L,ratio,nodes,paths,arrdepth,rebuilds,ms";

const EXIT_VALIDATION: i32 = 2;
const EXIT_REBUILD_LIMIT: i32 = 3;
const EXIT_IO: i32 = 4;

#[derive(Debug)]
struct CliError {
    code: i32,
    msg: String,
}

impl CliError {
    fn validation(msg: impl Into<String>) -> Self {
        CliError {
            code: EXIT_VALIDATION,
            msg: msg.into(),
        }
    }
    fn io(msg: impl Into<String>) -> Self {
        CliError {
            code: EXIT_IO,
            msg: msg.into(),
        }
    }
}

impl From<ScenarioError> for CliError {
    fn from(e: ScenarioError) -> Self {
        match e {
            ScenarioError::Io(inner) => CliError::io(inner.to_string()),
            other => CliError::validation(other.to_string()),
        }
    }
}

impl From<BuildError> for CliError {
    fn from(e: BuildError) -> Self {
        match e {
            BuildError::RebuildLimitExceeded { .. } => CliError {
                code: EXIT_REBUILD_LIMIT,
                msg: e.to_string(),
            },
            other => CliError::validation(other.to_string()),
        }
    }
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum VerifierArg {
    /// Rebuild on DAG depth over the bound.
    Depth,
    /// Rebuild on longest feasible query path over the bound.
    Lqpl,
    /// Rebuild on arrangement depth of all created trapezoids.
    Arrdepth,
    /// Accept the first build unconditionally.
    None,
}

impl From<VerifierArg> for VerifierKind {
    fn from(v: VerifierArg) -> Self {
        match v {
            VerifierArg::Depth => VerifierKind::DepthThreshold,
            VerifierArg::Lqpl => VerifierKind::LongestPath,
            VerifierArg::Arrdepth => VerifierKind::ArrangementDepth,
            VerifierArg::None => VerifierKind::None,
        }
    }
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum OrderArg {
    /// Insert in the scene's suggested (file) order on the first attempt.
    Suggested,
    /// Seeded random permutation.
    Shuffled,
}

impl From<OrderArg> for InsertOrder {
    fn from(v: OrderArg) -> Self {
        match v {
            OrderArg::Suggested => InsertOrder::AsGiven,
            OrderArg::Shuffled => InsertOrder::Shuffled,
        }
    }
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum ScenarioArg {
    Random,
    Sqrt,
    Recursive,
}

impl ScenarioArg {
    fn label(self) -> &'static str {
        match self {
            ScenarioArg::Random => "random",
            ScenarioArg::Sqrt => "sqrt",
            ScenarioArg::Recursive => "recursive",
        }
    }

    /// `param` is the generator parameter: segment count for random and
    /// recursive scenes, block count for sqrt scenes.
    fn generate(self, param: usize, seed: u64) -> Result<Scene, ScenarioError> {
        match self {
            ScenarioArg::Random => gen_random_segments(param, seed),
            ScenarioArg::Sqrt => Ok(gen_sqrt_blocks(param)),
            ScenarioArg::Recursive => Ok(gen_recursive_blocks(param)),
        }
    }
}

#[derive(Parser)]
#[command(
    name = "traprix",
    about = "Trapezoidal-map point location with verified query-time bounds",
    version
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Generate a scene file.
    Gen {
        #[command(subcommand)]
        kind: GenKind,
    },
    /// Build a scene and print one CSV stats row.
    Build {
        /// Scene file path.
        #[arg(long)]
        scene: PathBuf,
        /// Verification strategy deciding rebuilds.
        #[arg(long, value_enum, default_value = "none")]
        verifier: VerifierArg,
        /// Seed (falls back to TRAPRIX_SEED, then 0).
        #[arg(long)]
        seed: Option<u64>,
        /// Depth/path bound multiplier: bound = depth-c * log2(n + 1).
        #[arg(long, default_value_t = 6.0)]
        depth_c: f64,
        /// Size limit multiplier: rebuild when nodes exceed size-c * n.
        #[arg(long, default_value_t = 12.0)]
        size_c: f64,
        #[arg(long, default_value_t = 32)]
        max_rebuilds: u32,
        /// Insertion order of the first attempt.
        #[arg(long, value_enum, default_value = "shuffled")]
        order: OrderArg,
    },
    /// Locate a batch of query points against a scene.
    Query {
        #[arg(long)]
        scene: PathBuf,
        /// One query point per line: two whitespace-separated rationals.
        #[arg(long)]
        queries: PathBuf,
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long, value_enum, default_value = "shuffled")]
        order: OrderArg,
    },
    /// Depth-vs-path ratio experiment over generated scenes; CSV output.
    Ratio {
        #[arg(long, value_enum)]
        scenario: ScenarioArg,
        /// Generator parameters (n, or k for sqrt), comma separated.
        #[arg(long, value_delimiter = ',')]
        n_list: Vec<usize>,
        #[arg(long, default_value_t = 3)]
        repeats: u64,
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long, value_enum, default_value = "shuffled")]
        order: OrderArg,
        /// Output path, `-` for stdout.
        #[arg(long, default_value = "-")]
        out: String,
        /// Record wall times in the ms column. Off by default so identical
        /// invocations emit byte-identical CSV.
        #[arg(long, default_value_t = false)]
        timings: bool,
    },
}

#[derive(Subcommand)]
enum GenKind {
    /// Random non-crossing segments in [-1,1]^2.
    Random {
        #[arg(long)]
        n: usize,
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long)]
        out: PathBuf,
    },
    /// k blocks of k horizontal segments (k^2 total).
    Sqrt {
        #[arg(long)]
        k: usize,
        #[arg(long)]
        out: PathBuf,
    },
    /// Recursive block construction with n segments.
    Recursive {
        #[arg(long)]
        n: usize,
        #[arg(long)]
        out: PathBuf,
    },
}

fn resolve_seed(flag: Option<u64>) -> u64 {
    flag.or_else(|| {
        std::env::var("TRAPRIX_SEED")
            .ok()
            .and_then(|v| v.parse().ok())
    })
    .unwrap_or(0)
}

/// One experiment data row. Emission checks the row invariants.
struct ExperimentRow {
    scenario: String,
    n: usize,
    seed: u64,
    depth: u32,
    longest: u32,
    node_count: usize,
    feasible_paths: u64,
    arr_depth: u32,
    rebuilds: u32,
    ms: u128,
}

impl ExperimentRow {
    fn ratio(&self) -> f64 {
        self.depth as f64 / self.longest as f64
    }

    fn to_csv(&self) -> String {
        assert!(
            self.longest <= self.depth,
            "row invariant violated: L > D ({} > {})",
            self.longest,
            self.depth
        );
        assert!(
            self.longest as u64 <= 3 * self.arr_depth as u64,
            "row invariant violated: L > 3 * arrangement depth"
        );
        if self.longest > 0 {
            assert!(self.ratio() >= 1.0, "row invariant violated: ratio < 1");
        }
        format!(
            "{},{},{},{},{},{:.4},{},{},{},{},{}",
            self.scenario,
            self.n,
            self.seed,
            self.depth,
            self.longest,
            self.ratio(),
            self.node_count,
            self.feasible_paths,
            self.arr_depth,
            self.rebuilds,
            self.ms
        )
    }
}

fn build_row(
    scenario: &str,
    scene: &Scene,
    config: &BuildConfig,
    timings: bool,
) -> Result<ExperimentRow, CliError> {
    let started = Instant::now();
    let outcome = build(&scene.ordered_segments(), &scene.bbox, config)?;
    let elapsed = started.elapsed();
    let stats = outcome.dag.stats();
    let paths = max_search_path_length(&outcome.dag);
    let report = verify_arrangement_depth(&outcome.dag, u32::MAX)
        .map_err(|e| CliError::validation(e.to_string()))?;
    Ok(ExperimentRow {
        scenario: scenario.to_string(),
        n: stats.n_segments,
        seed: config.seed,
        depth: stats.depth,
        longest: paths.longest,
        node_count: stats.node_count,
        feasible_paths: paths.feasible_paths,
        arr_depth: report.max_depth,
        rebuilds: outcome.rebuilds,
        ms: if timings { elapsed.as_millis() } else { 0 },
    })
}

fn cmd_gen(kind: GenKind) -> Result<(), CliError> {
    let (scene, out) = match kind {
        GenKind::Random { n, seed, out } => {
            (gen_random_segments(n, resolve_seed(seed))?, out)
        }
        GenKind::Sqrt { k, out } => (gen_sqrt_blocks(k), out),
        GenKind::Recursive { n, out } => (gen_recursive_blocks(n), out),
    };
    write_scene(&scene, &out)?;
    println!("wrote {} segments to {}", scene.segments.len(), out.display());
    Ok(())
}

#[allow(clippy::too_many_arguments)]
fn cmd_build(
    scene_path: PathBuf,
    verifier: VerifierArg,
    seed: Option<u64>,
    depth_c: f64,
    size_c: f64,
    max_rebuilds: u32,
    order: OrderArg,
) -> Result<(), CliError> {
    let scene = read_scene(&scene_path)?;
    let config = BuildConfig {
        seed: resolve_seed(seed),
        order: order.into(),
        verifier: verifier.into(),
        size_c,
        depth_c,
        max_rebuilds,
        validate: false, // read_scene already validated
    };
    let row = build_row("file", &scene, &config, true)?;
    println!("{CSV_HEADER}");
    println!("{}", row.to_csv());
    Ok(())
}

fn parse_query_line(line: &str) -> Result<Point, String> {
    let toks: Vec<&str> = line.split_whitespace().collect();
    if toks.len() != 2 {
        return Err(format!("expected 2 coordinates, found {}", toks.len()));
    }
    let x = Rational::from_str(toks[0]).map_err(|e| e.to_string())?;
    let y = Rational::from_str(toks[1]).map_err(|e| e.to_string())?;
    Ok(Point::new(x, y))
}

fn cmd_query(
    scene_path: PathBuf,
    queries_path: PathBuf,
    seed: Option<u64>,
    order: OrderArg,
) -> Result<(), CliError> {
    let scene = read_scene(&scene_path)?;
    let config = BuildConfig {
        seed: resolve_seed(seed),
        order: order.into(),
        validate: false,
        ..BuildConfig::default()
    };
    let outcome = build(&scene.ordered_segments(), &scene.bbox, &config)?;
    let text = std::fs::read_to_string(&queries_path).map_err(|e| CliError::io(e.to_string()))?;
    let stdout = std::io::stdout();
    let mut out = stdout.lock();
    for (idx, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let p = parse_query_line(line).map_err(|msg| {
            CliError::validation(format!("queries line {}: {}", idx + 1, msg))
        })?;
        match outcome.dag.locate(&p) {
            Ok(res) => {
                let kind = match res.kind {
                    LocateKind::Face(_) => "FACE",
                    LocateKind::Edge(_) => "EDGE",
                    LocateKind::Vertex(_) => "VERTEX",
                };
                writeln!(out, "{} {}", kind, res.path_len)
                    .map_err(|e| CliError::io(e.to_string()))?;
            }
            Err(_) => {
                writeln!(out, "OUTOFBOX 0").map_err(|e| CliError::io(e.to_string()))?;
            }
        }
    }
    Ok(())
}

/// Renders a complete ratio experiment as CSV with per-n summary comments.
/// Pure with respect to its inputs, which is what makes repeated identical
/// invocations byte-identical when timings are off.
fn ratio_csv(
    scenario: ScenarioArg,
    n_list: &[usize],
    repeats: u64,
    seed: u64,
    order: InsertOrder,
    timings: bool,
) -> Result<String, CliError> {
    let mut csv = String::new();
    let _ = writeln!(csv, "{CSV_HEADER}");
    for &param in n_list {
        let scene_seed = derive_seed(seed, param as u64);
        let scene = scenario.generate(param, scene_seed)?;
        scene.validate()?;
        let mut ratios: Vec<f64> = Vec::with_capacity(repeats as usize);
        for rep in 0..repeats {
            let config = BuildConfig {
                seed: derive_seed(scene_seed, rep),
                order,
                verifier: VerifierKind::None,
                validate: false,
                ..BuildConfig::default()
            };
            let row = build_row(scenario.label(), &scene, &config, timings)?;
            ratios.push(row.ratio());
            let _ = writeln!(csv, "{}", row.to_csv());
        }
        if !ratios.is_empty() {
            let mean = ratios.iter().sum::<f64>() / ratios.len() as f64;
            let min = ratios.iter().cloned().fold(f64::INFINITY, f64::min);
            let max = ratios.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
            let _ = writeln!(
                csv,
                "# summary scenario={} param={} repeats={} ratio_mean={:.4} ratio_min={:.4} ratio_max={:.4}",
                scenario.label(),
                param,
                repeats,
                mean,
                min,
                max
            );
        }
    }
    Ok(csv)
}

#[allow(clippy::too_many_arguments)]
fn cmd_ratio(
    scenario: ScenarioArg,
    n_list: Vec<usize>,
    repeats: u64,
    seed: Option<u64>,
    order: OrderArg,
    out: String,
    timings: bool,
) -> Result<(), CliError> {
    let csv = ratio_csv(
        scenario,
        &n_list,
        repeats,
        resolve_seed(seed),
        order.into(),
        timings,
    )?;
    if out == "-" {
        print!("{csv}");
    } else {
        std::fs::write(&out, csv).map_err(|e| CliError::io(e.to_string()))?;
    }
    Ok(())
}

fn run(cli: Cli) -> Result<(), CliError> {
    match cli.command {
        Command::Gen { kind } => cmd_gen(kind),
        Command::Build {
            scene,
            verifier,
            seed,
            depth_c,
            size_c,
            max_rebuilds,
            order,
        } => cmd_build(scene, verifier, seed, depth_c, size_c, max_rebuilds, order),
        Command::Query {
            scene,
            queries,
            seed,
            order,
        } => cmd_query(scene, queries, seed, order),
        Command::Ratio {
            scenario,
            n_list,
            repeats,
            seed,
            order,
            out,
            timings,
        } => cmd_ratio(scenario, n_list, repeats, seed, order, out, timings),
    }
}

fn main() {
    let cli = Cli::parse();
    if let Err(e) = run(cli) {
        eprintln!("error: {}", e.msg);
        std::process::exit(e.code);
    }
}
