//! Command-line front end: `generate`, `verify` and `bench`.
//!
//! Exit codes: 0 on success with complete coverage, 1 on runtime or coverage
//! failure, 2 on usage or input errors.

use std::ffi::OsString;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use rayon::prelude::*;
use serde::Serialize;

use crate::bench::{self, BenchOptions, BenchmarkRecord, Selection};
use crate::gsa::{DistanceMetric, GsaParams, KbestSchedule};
use crate::strategy::{generate_suite_with, GenerateOptions, StrategyReport};
use crate::suite_file::{parse_suite, ValueLabels};
use crate::sut::SutConfig;
use crate::verify::{verify_coverage, CoverageReport};

pub const SCHEMA_VERSION: u32 = 1;

pub const EXIT_OK: i32 = 0;
pub const EXIT_FAILURE: i32 = 1;
pub const EXIT_USAGE: i32 = 2;

#[derive(Debug, Parser)]
#[command(
    name = "pgsas",
    version,
    about = "Pairwise test suite generation with gravitational search"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Generate a pairwise test suite.
    Generate(GenerateArgs),
    /// Check a suite file for full pairwise coverage.
    Verify(VerifyArgs),
    /// Run the builtin best-of-N benchmarks.
    Bench(BenchArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum OutputFormat {
    Plain,
    Structured,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum KbestArg {
    Linear,
    All,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum DistanceArg {
    /// Euclidean distance between positions.
    Position,
    /// Absolute difference of normalized masses.
    Mass,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum SuiteArg {
    Quick,
    Full,
    #[value(name = "tableIII")]
    TableIii,
    #[value(name = "tableIV")]
    TableIv,
}

#[derive(Debug, Args)]
struct SearchArgs {
    /// Population size N.
    #[arg(long, default_value_t = 200)]
    population: usize,
    /// Iterations per cycle T.
    #[arg(long, default_value_t = 500)]
    iterations: usize,
    /// Initial gravitational constant G0.
    #[arg(long, default_value_t = 10.0)]
    g0: f64,
    /// Attenuation factor alpha.
    #[arg(long, default_value_t = 20.0)]
    alpha: f64,
    /// Softening constant added to distances.
    #[arg(long, default_value_t = 1e-9)]
    epsilon: f64,
    /// Kbest schedule.
    #[arg(long, value_enum, default_value_t = KbestArg::Linear)]
    kbest: KbestArg,
    /// Distance used in the force denominator.
    #[arg(long, value_enum, default_value_t = DistanceArg::Position)]
    distance: DistanceArg,
}

impl SearchArgs {
    fn params(&self) -> GsaParams {
        GsaParams {
            population_size: self.population,
            g0: self.g0,
            alpha: self.alpha,
            epsilon: self.epsilon,
            max_iterations: self.iterations,
            kbest: match self.kbest {
                KbestArg::Linear => KbestSchedule::LinearDecay,
                KbestArg::All => KbestSchedule::All,
            },
            distance: match self.distance {
                DistanceArg::Position => DistanceMetric::Position,
                DistanceArg::Mass => DistanceMetric::MassDifference,
            },
        }
    }
}

#[derive(Debug, Args)]
struct GenerateArgs {
    /// SUT configuration, e.g. "3^4 2^2".
    #[arg(long)]
    config: String,
    /// Seed of the first run; run k uses seed + k.
    #[arg(long, env = "PGSAS_SEED", default_value_t = 0)]
    seed: u64,
    /// Independent runs; the smallest suite is kept.
    #[arg(long, default_value_t = 1)]
    runs: usize,
    #[command(flatten)]
    search: SearchArgs,
    #[arg(long, value_enum, default_value_t = OutputFormat::Plain)]
    output: OutputFormat,
    /// Write the suite or report here instead of stdout.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Write the convergence trace of the kept run as CSV.
    #[arg(long)]
    trace: Option<PathBuf>,
    /// Value names, one line per parameter; used by plain output.
    #[arg(long)]
    labels: Option<PathBuf>,
    /// Zero all wall-clock fields so output is reproducible byte for byte.
    #[arg(long)]
    omit_timing: bool,
}

#[derive(Debug, Args)]
struct VerifyArgs {
    #[arg(long)]
    config: String,
    /// Suite file: one case per line, `#` comments allowed.
    #[arg(long)]
    suite: PathBuf,
    #[arg(long, value_enum, default_value_t = OutputFormat::Plain)]
    output: OutputFormat,
}

#[derive(Debug, Args)]
struct BenchArgs {
    #[arg(long, value_enum, default_value_t = SuiteArg::Quick)]
    suite: SuiteArg,
    #[arg(long, default_value_t = 0)]
    seed_base: u64,
    /// Worker threads; defaults to all cores.
    #[arg(long)]
    jobs: Option<usize>,
    /// Runs per benchmark.
    #[arg(long, default_value_t = bench::DEFAULT_RUNS)]
    runs: usize,
    /// Per-run wall-clock cap in seconds.
    #[arg(long, default_value_t = bench::DEFAULT_TIME_LIMIT.as_secs())]
    time_limit: u64,
    #[command(flatten)]
    search: SearchArgs,
    #[arg(long, value_enum, default_value_t = OutputFormat::Plain)]
    output: OutputFormat,
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long)]
    omit_timing: bool,
}

#[derive(Debug, Serialize)]
struct RunSummary {
    seed: u64,
    size: usize,
}

#[derive(Debug, Serialize)]
struct GenerateDocument<'a> {
    schema_version: u32,
    kind: &'static str,
    config: String,
    runs: Vec<RunSummary>,
    coverage: &'a CoverageReport,
    report: &'a StrategyReport,
}

#[derive(Debug, Serialize)]
struct VerifyDocument<'a> {
    schema_version: u32,
    kind: &'static str,
    config: String,
    cases: usize,
    coverage: &'a CoverageReport,
}

#[derive(Debug, Serialize)]
struct BenchDocument<'a> {
    schema_version: u32,
    kind: &'static str,
    suite: &'static str,
    seed_base: u64,
    params: &'a GsaParams,
    records: &'a [BenchmarkRecord],
}

/// Parses `args` (including the program name) and runs the command.
pub fn run<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = e.exit_code();
            let text = e.render().to_string();
            if code == 0 {
                let _ = write!(out, "{text}");
                return EXIT_OK;
            }
            let _ = write!(err, "{text}");
            return EXIT_USAGE;
        }
    };
    match cli.command {
        Command::Generate(args) => cmd_generate(args, out, err),
        Command::Verify(args) => cmd_verify(args, out, err),
        Command::Bench(args) => cmd_bench(args, out, err),
    }
}

fn emit(path: Option<&Path>, text: &str, out: &mut dyn Write, err: &mut dyn Write) -> Result<(), i32> {
    match path {
        Some(p) => fs::write(p, text).map_err(|e| {
            let _ = writeln!(err, "error: cannot write {}: {e}", p.display());
            EXIT_FAILURE
        }),
        None => out.write_all(text.as_bytes()).map_err(|_| EXIT_FAILURE),
    }
}

fn parse_config(text: &str, err: &mut dyn Write) -> Result<SutConfig, i32> {
    SutConfig::parse(text).map_err(|e| {
        let _ = writeln!(err, "error: invalid configuration: {e}");
        EXIT_USAGE
    })
}

fn to_json<T: Serialize>(doc: &T) -> String {
    let mut s = serde_json::to_string_pretty(doc).expect("report serializes");
    s.push('\n');
    s
}

fn cmd_generate(args: GenerateArgs, out: &mut dyn Write, err: &mut dyn Write) -> i32 {
    let config = match parse_config(&args.config, err) {
        Ok(c) => c,
        Err(code) => return code,
    };
    let params = args.search.params();
    if let Err(e) = params.validate() {
        let _ = writeln!(err, "error: {e}");
        return EXIT_USAGE;
    }
    if args.runs == 0 {
        let _ = writeln!(err, "error: --runs must be at least 1");
        return EXIT_USAGE;
    }
    let labels = match &args.labels {
        None => None,
        Some(path) => match fs::read_to_string(path) {
            Err(e) => {
                let _ = writeln!(err, "error: cannot read {}: {e}", path.display());
                return EXIT_USAGE;
            }
            Ok(text) => match ValueLabels::parse(&text, &config) {
                Ok(l) => Some(l),
                Err(e) => {
                    let _ = writeln!(err, "error: {}: {e}", path.display());
                    return EXIT_USAGE;
                }
            },
        },
    };

    let options = GenerateOptions {
        trace: args.trace.is_some(),
        time_limit: None,
    };
    let results: Result<Vec<StrategyReport>, _> = (0..args.runs)
        .into_par_iter()
        .map(|k| generate_suite_with(&config, &params, args.seed.wrapping_add(k as u64), options))
        .collect();
    let mut reports = match results {
        Ok(r) => r,
        Err(e) => {
            let _ = writeln!(err, "error: {e}");
            return EXIT_FAILURE;
        }
    };
    let runs: Vec<RunSummary> = reports
        .iter()
        .map(|r| RunSummary {
            seed: r.seed,
            size: r.suite.len(),
        })
        .collect();
    let best_idx = (0..reports.len())
        .min_by_key(|&i| (reports[i].suite.len(), i))
        .expect("at least one run");
    let mut best = reports.swap_remove(best_idx);
    if args.omit_timing {
        best.strip_timing();
    }
    let coverage = verify_coverage(best.suite.cases(), &config);

    let text = match args.output {
        OutputFormat::Plain => match &labels {
            None => best.suite.to_plain(),
            Some(l) => best.suite.cases().iter().map(|c| l.render(c) + "\n").collect(),
        },
        OutputFormat::Structured => to_json(&GenerateDocument {
            schema_version: SCHEMA_VERSION,
            kind: "generate",
            config: config.to_string(),
            runs,
            coverage: &coverage,
            report: &best,
        }),
    };
    if let Err(code) = emit(args.out.as_deref(), &text, out, err) {
        return code;
    }
    if let (Some(path), Some(csv)) = (&args.trace, best.trace_csv()) {
        if let Err(code) = emit(Some(path), &csv, out, err) {
            return code;
        }
    }
    let _ = writeln!(
        err,
        "size {} (seed {}), coverage {} ({}/{} tuples)",
        best.suite.len(),
        best.seed,
        if coverage.complete { "complete" } else { "INCOMPLETE" },
        coverage.covered,
        coverage.total
    );
    if coverage.complete {
        EXIT_OK
    } else {
        EXIT_FAILURE
    }
}

fn cmd_verify(args: VerifyArgs, out: &mut dyn Write, err: &mut dyn Write) -> i32 {
    let config = match parse_config(&args.config, err) {
        Ok(c) => c,
        Err(code) => return code,
    };
    let text = match fs::read_to_string(&args.suite) {
        Ok(t) => t,
        Err(e) => {
            let _ = writeln!(err, "error: cannot read {}: {e}", args.suite.display());
            return EXIT_USAGE;
        }
    };
    let cases = match parse_suite(&text, &config) {
        Ok(c) => c,
        Err(e) => {
            let _ = writeln!(err, "error: {}: {e}", args.suite.display());
            return EXIT_USAGE;
        }
    };
    let report = verify_coverage(&cases, &config);
    let body = match args.output {
        OutputFormat::Structured => to_json(&VerifyDocument {
            schema_version: SCHEMA_VERSION,
            kind: "verify",
            config: config.to_string(),
            cases: cases.len(),
            coverage: &report,
        }),
        OutputFormat::Plain => {
            let mut s = format!(
                "{} cases, {}/{} tuples covered ({:.2}%)\n",
                cases.len(),
                report.covered,
                report.total,
                report.percentage()
            );
            if report.complete {
                s.push_str("complete\n");
            } else {
                s.push_str(&format!("missing {} tuples (i,j,a,b):\n", report.missing.len()));
                for m in &report.missing {
                    s.push_str(&format!("{},{},{},{}\n", m.i, m.j, m.a, m.b));
                }
            }
            s
        }
    };
    if let Err(code) = emit(None, &body, out, err) {
        return code;
    }
    if report.complete {
        EXIT_OK
    } else {
        EXIT_FAILURE
    }
}

fn cmd_bench(args: BenchArgs, out: &mut dyn Write, err: &mut dyn Write) -> i32 {
    let params = args.search.params();
    if let Err(e) = params.validate() {
        let _ = writeln!(err, "error: {e}");
        return EXIT_USAGE;
    }
    if args.runs == 0 || args.jobs == Some(0) {
        let _ = writeln!(err, "error: --runs and --jobs must be at least 1");
        return EXIT_USAGE;
    }
    let (selection, suite_name) = match args.suite {
        SuiteArg::Quick => (Selection::Quick, "quick"),
        SuiteArg::Full => (Selection::Full, "full"),
        SuiteArg::TableIii => (Selection::Configurations, "tableIII"),
        SuiteArg::TableIv => (Selection::BinaryScaling, "tableIV"),
    };
    let specs: Vec<_> = bench::select(selection)
        .into_iter()
        .map(|mut s| {
            s.runs = args.runs;
            s
        })
        .collect();
    let options = BenchOptions {
        time_limit: Some(std::time::Duration::from_secs(args.time_limit)),
    };
    let mut builder = rayon::ThreadPoolBuilder::new();
    if let Some(j) = args.jobs {
        builder = builder.num_threads(j);
    }
    let pool = match builder.build() {
        Ok(p) => p,
        Err(e) => {
            let _ = writeln!(err, "error: cannot start worker pool: {e}");
            return EXIT_FAILURE;
        }
    };

    let mut records = Vec::with_capacity(specs.len());
    for spec in &specs {
        match pool.install(|| bench::run_benchmark(spec, &params, args.seed_base, options)) {
            Ok(mut rec) => {
                if args.omit_timing {
                    rec.strip_timing();
                }
                let _ = writeln!(
                    err,
                    "{}: best {} (published {})",
                    rec.name, rec.best, rec.published_size
                );
                records.push(rec);
            }
            Err(e) => {
                let _ = writeln!(err, "error: {e}");
                return EXIT_FAILURE;
            }
        }
    }
    let body = match args.output {
        OutputFormat::Plain => bench::render_table(&records, !args.omit_timing),
        OutputFormat::Structured => to_json(&BenchDocument {
            schema_version: SCHEMA_VERSION,
            kind: "bench",
            suite: suite_name,
            seed_base: args.seed_base,
            params: &params,
            records: &records,
        }),
    };
    match emit(args.out.as_deref(), &body, out, err) {
        Ok(()) => EXIT_OK,
        Err(code) => code,
    }
}
