//! Command-line front end.
//!
//! Exit codes: 0 on success, 2 on a parse, validation or I/O error, 3 when
//! propagation finds a contradiction (the dump is still written to `--out`).

mod chart;

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use log::info;
use thiserror::Error;

use crate::algebra::{AlgebraError, Bidegree, PageShift};
use crate::ingest::{self, IngestError};
use crate::propagate::{self, Contradiction, ExplainError, Mode, PropagationError, Status};
use crate::results::ResultsDocument;

pub use chart::{render_svg, RenderSpec, STAGE_COLORS};

pub const EXIT_OK: i32 = 0;
pub const EXIT_INPUT: i32 = 2;
pub const EXIT_CONTRADICTION: i32 = 3;
const EXIT_INTERNAL: i32 = 1;

#[derive(Debug, Parser)]
#[command(name = "adams-leibniz", version, about = "Deduce differentials from the Leibniz rule")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Propagate constraints on a chart and write a results file.
    Run(RunArgs),
    /// Render a results file as an SVG chart.
    Chart(ChartArgs),
    /// Show the deductions behind one bidegree.
    Explain(ExplainArgs),
    /// Summarize how many differentials were determined.
    Stats(StatsArgs),
    /// Run twice with alternative seeds and list the bidegrees that differ.
    Compare(CompareArgs),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum ModeArg {
    Sequential,
    Parallel,
}

impl From<ModeArg> for Mode {
    fn from(m: ModeArg) -> Self {
        match m {
            ModeArg::Sequential => Mode::Sequential,
            ModeArg::Parallel => Mode::ParallelPass,
        }
    }
}

#[derive(Debug, Args)]
pub struct RunArgs {
    #[arg(long)]
    pub chart: PathBuf,
    #[arg(long)]
    pub seeds: Option<PathBuf>,
    /// Page of the differential; defaults to the chart's.
    #[arg(long)]
    pub r: Option<u32>,
    /// Restrict the printed summary to stems up to this one.
    #[arg(long)]
    pub max_stem: Option<i32>,
    #[arg(long, value_enum, default_value_t = ModeArg::Sequential)]
    pub mode: ModeArg,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Svg,
}

#[derive(Debug, Args)]
pub struct ChartArgs {
    #[arg(long)]
    pub results: PathBuf,
    #[arg(long, value_enum, default_value_t = Format::Svg)]
    pub format: Format,
    /// Inclusive stem range, e.g. `0..20`.
    #[arg(long, value_parser = parse_range)]
    pub stems: Option<(i32, i32)>,
    /// Inclusive filtration range, e.g. `0..8`.
    #[arg(long, value_parser = parse_range)]
    pub filtrations: Option<(i32, i32)>,
    /// Writes to stdout when absent.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct ExplainArgs {
    #[arg(long)]
    pub results: PathBuf,
    /// `n,s`, e.g. `1,1`.
    #[arg(long, value_parser = parse_bidegree)]
    pub bidegree: Bidegree,
}

#[derive(Debug, Args)]
pub struct StatsArgs {
    #[arg(long)]
    pub results: PathBuf,
    #[arg(long)]
    pub max_stem: Option<i32>,
    #[arg(long)]
    pub json: bool,
}

#[derive(Debug, Args)]
pub struct CompareArgs {
    #[arg(long)]
    pub chart: PathBuf,
    #[arg(long)]
    pub left: PathBuf,
    #[arg(long)]
    pub right: PathBuf,
    #[arg(long)]
    pub r: Option<u32>,
    #[arg(long, value_enum, default_value_t = ModeArg::Sequential)]
    pub mode: ModeArg,
}

fn parse_range(s: &str) -> Result<(i32, i32), String> {
    let (lo, hi) = s.split_once("..").ok_or_else(|| format!("expected a..b, got {s:?}"))?;
    let lo: i32 = lo.trim().parse().map_err(|e| format!("{lo:?}: {e}"))?;
    let hi: i32 = hi.trim().parse().map_err(|e| format!("{hi:?}: {e}"))?;
    if lo > hi {
        return Err(format!("empty range {s:?}"));
    }
    Ok((lo, hi))
}

fn parse_bidegree(s: &str) -> Result<Bidegree, String> {
    let inner = s.trim().trim_start_matches('(').trim_end_matches(')');
    let (n, t) = inner.split_once(',').ok_or_else(|| format!("expected n,s, got {s:?}"))?;
    let n = n.trim().parse().map_err(|e| format!("{n:?}: {e}"))?;
    let t = t.trim().parse().map_err(|e| format!("{t:?}: {e}"))?;
    Ok(Bidegree::new(n, t))
}

#[derive(Debug, Error)]
pub enum CliError {
    #[error(transparent)]
    Ingest(#[from] IngestError),
    #[error(transparent)]
    Explain(#[from] ExplainError),
    #[error("{path}: {message}")]
    Io { path: String, message: String },
    #[error("{0}")]
    Contradiction(Box<Contradiction>),
    #[error(transparent)]
    Propagation(PropagationError),
}

impl From<PropagationError> for CliError {
    fn from(e: PropagationError) -> Self {
        match e {
            PropagationError::Contradiction(c) => CliError::Contradiction(c),
            e => CliError::Propagation(e),
        }
    }
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Contradiction(_) => EXIT_CONTRADICTION,
            CliError::Propagation(PropagationError::Seed(_)) => EXIT_INPUT,
            CliError::Propagation(_) => EXIT_INTERNAL,
            _ => EXIT_INPUT,
        }
    }
}

fn write_file(path: &Path, contents: &str) -> Result<(), CliError> {
    fs::write(path, contents).map_err(|e| CliError::Io {
        path: path.display().to_string(),
        message: e.to_string(),
    })
}

fn page_override(r: Option<u32>, default: PageShift) -> Result<PageShift, CliError> {
    match r {
        None => Ok(default),
        Some(r) => PageShift::new(r).map_err(|source: AlgebraError| {
            IngestError::Algebra {
                context: "--r".into(),
                source,
            }
            .into()
        }),
    }
}

/// Runs a parsed command, printing human-readable output to `out`.
pub fn execute(cli: Cli, out: &mut dyn Write) -> Result<(), CliError> {
    match cli.command {
        Command::Run(a) => cmd_run(&a, out),
        Command::Chart(a) => cmd_chart(&a, out),
        Command::Explain(a) => cmd_explain(&a, out),
        Command::Stats(a) => cmd_stats(&a, out),
        Command::Compare(a) => cmd_compare(&a, out),
    }
}

/// [`execute`] with errors reported on stderr, returning the exit code.
pub fn main_with(cli: Cli, out: &mut dyn Write) -> i32 {
    match execute(cli, out) {
        Ok(()) => EXIT_OK,
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}

fn emit(out: &mut dyn Write, text: &str) -> Result<(), CliError> {
    writeln!(out, "{text}").map_err(|e| CliError::Io {
        path: "<output>".into(),
        message: e.to_string(),
    })
}

pub fn cmd_run(a: &RunArgs, out: &mut dyn Write) -> Result<(), CliError> {
    let chart = ingest::load_chart(&a.chart)?;
    let page = page_override(a.r, chart.page)?;
    let seeds = match &a.seeds {
        Some(p) => ingest::load_seeds(p, &chart.algebra, page)?,
        None => Vec::new(),
    };
    let mode = Mode::from(a.mode);
    info!("{} bidegrees, {} seeds, r = {}", chart.algebra.dims().len(), seeds.len(), page.r());
    match propagate::run_staged(&chart.algebra, page, &seeds, mode) {
        Ok(run) => {
            let doc = ResultsDocument::success(
                &chart.algebra,
                run.final_state(),
                &run.classification,
                &run.events,
                &run.passes,
                mode,
            );
            write_file(&a.out, &doc.to_json())?;
            emit(out, &propagate::stats(&run.classification, a.max_stem).to_string())
        }
        Err(PropagationError::Contradiction(c)) => {
            let doc = ResultsDocument::contradiction(&chart.algebra, page, mode, &c);
            write_file(&a.out, &doc.to_json())?;
            Err(CliError::Contradiction(c))
        }
        Err(e) => Err(e.into()),
    }
}

pub fn cmd_chart(a: &ChartArgs, out: &mut dyn Write) -> Result<(), CliError> {
    let doc = ResultsDocument::load(&a.results)?;
    let spec = RenderSpec {
        stems: a.stems,
        filtrations: a.filtrations,
        ..RenderSpec::default()
    };
    let svg = render_svg(&doc, &spec);
    match &a.out {
        Some(p) => write_file(p, &svg),
        None => emit(out, svg.trim_end()),
    }
}

pub fn cmd_explain(a: &ExplainArgs, out: &mut dyn Write) -> Result<(), CliError> {
    let doc = ResultsDocument::load(&a.results)?;
    let ex = propagate::explain(&doc.events, &doc.classification()?, a.bidegree)?;
    emit(out, &ex.to_string())
}

pub fn cmd_stats(a: &StatsArgs, out: &mut dyn Write) -> Result<(), CliError> {
    let doc = ResultsDocument::load(&a.results)?;
    let s = propagate::stats(&doc.classification()?, a.max_stem);
    if a.json {
        emit(out, &serde_json::to_string_pretty(&s).expect("stats serialize"))
    } else {
        emit(out, &s.to_string())
    }
}

fn describe(s: &Status) -> String {
    match s {
        Status::DeterminedZero => "zero".into(),
        Status::DeterminedNonzero { matrix } => format!("nonzero {:?}", matrix.to_u8_rows()),
        Status::Partial { dim, .. } => format!("partial (dim {dim})"),
    }
}

pub fn cmd_compare(a: &CompareArgs, out: &mut dyn Write) -> Result<(), CliError> {
    let chart = ingest::load_chart(&a.chart)?;
    let page = page_override(a.r, chart.page)?;
    let left = ingest::load_seeds(&a.left, &chart.algebra, page)?;
    let right = ingest::load_seeds(&a.right, &chart.algebra, page)?;
    let cmp = propagate::compare(&chart.algebra, page, &left, &right, Mode::from(a.mode))?;
    for (side, r) in [("left", &cmp.left), ("right", &cmp.right)] {
        if let Err(c) = r {
            emit(out, &format!("{side}: {c}"))?;
        }
    }
    if cmp.left.is_ok() && cmp.right.is_ok() {
        if cmp.differences.is_empty() {
            emit(out, "no differences")?;
        }
        for d in &cmp.differences {
            emit(out, &format!("{}: {} | {}", d.bidegree, describe(&d.left), describe(&d.right)))?;
        }
    }
    Ok(())
}
