//! Command-line front end: `analyze`, `simulate`, `verify` and `report`.
//!
//! Exit codes: 0 success, 1 invalid input or usage, 2 a verification gate
//! failed, 3 an internal consistency or numerical check failed.

use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use serde::Serialize;

use crate::analysis::{Analysis, AnalysisReport, SCHEMA_VERSION};
use crate::error::{Error, Result};
use crate::export;
use crate::growth::{parse_script, Mode, Simulator};
use crate::model::BlockSet;
use crate::verify::{self, Tolerances, VerificationReport, VerifyConfig};

pub const EXIT_OK: i32 = 0;
pub const EXIT_VERIFICATION: i32 = 2;

#[derive(Debug, Parser)]
#[command(name = "blocknet", version, about = "Grow hooking and bipolar networks and check their degree-census limit laws")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Degree profile, urn intensity matrix, spectrum and limit covariance.
    Analyze(AnalyzeArgs),
    /// Grow one network and write its census trajectory as CSV.
    Simulate(SimulateArgs),
    /// Monte-Carlo check of the mean and Gaussian fluctuations.
    Verify(VerifyArgs),
    /// Analysis and verification in one document.
    Report(VerifyArgs),
}

#[derive(Debug, Args)]
pub struct InputArgs {
    /// Block-set JSON file.
    #[arg(long)]
    pub input: PathBuf,
    /// Override the number of tracked essential degrees.
    #[arg(long)]
    pub r: Option<usize>,
}

#[derive(Debug, Args)]
pub struct AnalyzeArgs {
    #[command(flatten)]
    pub input: InputArgs,
    /// Write the JSON report here.
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Print JSON instead of the table.
    #[arg(long)]
    pub json: bool,
}

#[derive(Debug, Args)]
pub struct SimulateArgs {
    #[command(flatten)]
    pub input: InputArgs,
    #[arg(long, default_value_t = 1000)]
    pub steps: u64,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long, default_value = "census", value_parser = parse_mode)]
    pub mode: Mode,
    /// CSV trajectory path; printed to stdout when absent.
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Write the final network as Graphviz DOT (graph mode).
    #[arg(long)]
    pub export_dot: Option<PathBuf>,
    /// Write the final network as an edge list (graph mode).
    #[arg(long)]
    pub export_edges: Option<PathBuf>,
    /// JSON list of scripted attachments replacing the random steps.
    #[arg(long)]
    pub script: Option<PathBuf>,
    /// Abort once the network would exceed this many vertices.
    #[arg(long)]
    pub max_vertices: Option<u64>,
}

#[derive(Debug, Args)]
pub struct VerifyArgs {
    #[command(flatten)]
    pub input: InputArgs,
    #[arg(long, default_value_t = 100_000)]
    pub steps: u64,
    #[arg(long, default_value_t = 400)]
    pub replicates: usize,
    #[arg(long, default_value_t = 42)]
    pub seed: u64,
    /// Worker threads for the replicates.
    #[arg(long, default_value_t = 1)]
    pub jobs: usize,
    /// Inflate the predicted mean by this relative amount (negative control).
    #[arg(long, default_value_t = 0.0)]
    pub perturb_mean: f64,
    /// Scale the predicted covariance by this factor (negative control).
    #[arg(long, default_value_t = 1.0)]
    pub sigma_scale: f64,
    /// JSON file overriding gate tolerances.
    #[arg(long)]
    pub tolerances: Option<PathBuf>,
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[arg(long)]
    pub json: bool,
}

fn parse_mode(s: &str) -> std::result::Result<Mode, String> {
    s.parse().map_err(|e: Error| e.to_string())
}

fn read(path: &Path) -> Result<String> {
    std::fs::read_to_string(path)
        .map_err(|e| Error::Usage(format!("cannot read {}: {e}", path.display())))
}

fn write(path: &Path, text: &str) -> Result<()> {
    std::fs::write(path, text)
        .map_err(|e| Error::Usage(format!("cannot write {}: {e}", path.display())))
}

fn load(args: &InputArgs) -> Result<BlockSet> {
    let bs = BlockSet::from_json(&read(&args.input)?)?;
    match args.r {
        Some(r) => Ok(bs.with_r(r)?),
        None => Ok(bs),
    }
}

fn to_json<T: Serialize>(value: &T) -> String {
    serde_json::to_string_pretty(value).expect("reports serialize")
}

/// Parses `args` (including the program name) and runs the command, writing
/// human-readable output to `out`. Returns the process exit code.
pub fn execute<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = write!(err, "{e}");
            return code;
        }
    };
    match run(&cli, out) {
        Ok(code) => code,
        Err(e) => {
            let _ = writeln!(err, "error: {e}");
            e.exit_code()
        }
    }
}

pub fn run(cli: &Cli, out: &mut dyn Write) -> Result<i32> {
    match &cli.command {
        Command::Analyze(a) => analyze(a, out),
        Command::Simulate(a) => simulate(a, out),
        Command::Verify(a) => run_verify(a, out, false),
        Command::Report(a) => run_verify(a, out, true),
    }
}

fn analyze(args: &AnalyzeArgs, out: &mut dyn Write) -> Result<i32> {
    let bs = load(&args.input)?;
    let report = Analysis::run(&bs)?.report(&bs);
    let json = to_json(&report);
    if let Some(path) = &args.out {
        write(path, &json)?;
    }
    if args.json {
        writeln!(out, "{json}")?;
    } else {
        write!(out, "{}", report.table())?;
    }
    Ok(EXIT_OK)
}

fn simulate(args: &SimulateArgs, out: &mut dyn Write) -> Result<i32> {
    let bs = load(&args.input)?;
    let essential = crate::profile::essential_degrees(&bs, bs.r)?;
    let script = match &args.script {
        Some(path) => Some(parse_script(&read(path)?)?),
        None => None,
    };
    let mode = if script.is_some() { Mode::Graph } else { args.mode };
    let mut limits = crate::growth::Limits::default();
    if let Some(max) = args.max_vertices {
        limits.max_vertices = max;
    }
    let mut sim = Simulator::with_limits(&bs, mode, args.seed, 0, limits)?;
    let mut rows = vec![sim.state().census_vector(&essential)];
    match &script {
        Some(steps) => {
            for s in steps {
                sim.scripted_step(s)?;
                rows.push(sim.state().census_vector(&essential));
            }
        }
        None => {
            for _ in 0..args.steps {
                sim.step()?;
                rows.push(sim.state().census_vector(&essential));
            }
        }
    }
    let state = sim.into_state();
    state.check()?;
    let csv = export::trajectory_csv(&essential, &rows);
    match &args.out {
        Some(path) => write(path, &csv)?,
        None => write!(out, "{csv}")?,
    }
    if args.export_dot.is_some() || args.export_edges.is_some() {
        let g = state
            .graph
            .as_ref()
            .ok_or_else(|| Error::Usage("graph exports need --mode graph".into()))?;
        if let Some(path) = &args.export_dot {
            write(path, &export::to_dot(g))?;
        }
        if let Some(path) = &args.export_edges {
            write(path, &export::to_edge_list(g))?;
        }
    }
    Ok(EXIT_OK)
}

#[derive(Serialize)]
struct CombinedReport<'a> {
    schema_version: u32,
    analysis: &'a AnalysisReport,
    verification: &'a VerificationReport,
}

fn run_verify(args: &VerifyArgs, out: &mut dyn Write, combined: bool) -> Result<i32> {
    if args.jobs == 0 {
        return Err(Error::Usage("--jobs must be positive".into()));
    }
    if args.steps == 0 || args.replicates < 2 {
        return Err(Error::Usage("--steps must be positive and --replicates at least 2".into()));
    }
    let bs = load(&args.input)?;
    let tolerances = match &args.tolerances {
        Some(path) => Tolerances::from_json(&read(path)?)?,
        None => Tolerances::default(),
    };
    let config = VerifyConfig {
        steps: args.steps,
        replicates: args.replicates,
        seed: args.seed,
        jobs: args.jobs,
        perturb_mean: args.perturb_mean,
        sigma_scale: args.sigma_scale,
        tolerances,
    };
    let analysis = Analysis::run(&bs)?;
    let report = verify::verify(&bs, &analysis, &config)?;
    let (json, table) = if combined {
        let analysis_report = analysis.report(&bs);
        let doc = CombinedReport {
            schema_version: SCHEMA_VERSION,
            analysis: &analysis_report,
            verification: &report,
        };
        (to_json(&doc), format!("{}\n{}", analysis_report.table(), report.table()))
    } else {
        (to_json(&report), report.table())
    };
    if let Some(path) = &args.out {
        write(path, &json)?;
    }
    if args.json {
        writeln!(out, "{json}")?;
    } else {
        write!(out, "{table}")?;
    }
    Ok(if report.passed { EXIT_OK } else { EXIT_VERIFICATION })
}
