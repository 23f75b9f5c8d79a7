//! Command-line driver: single-task verification and corpus benchmarking.
//!
//! Exit codes:
//!
//! | code | meaning |
//! |------|---------|
//! | 0 | SAFE, a finished bench run, or `--help`/`--version` |
//! | 1 | UNSAFE |
//! | 2 | UNKNOWN |
//! | 3 | usage error: bad flags or invalid limits |
//! | 4 | input error: unreadable or malformed task or manifest |
//! | 5 | output error: a report file could not be written |
//! | 6 | internal error |

pub mod bench;
pub mod config;

use std::ffi::OsString;
use std::fs;
use std::io::{self, Write};
use std::path::{Path, PathBuf};
use std::time::Instant;

use clap::Parser;
use evcheck_core::cegar::{verify, AnalysisMode, CegarOutcome, Verdict};
use evcheck_core::lang::{load, LangError, VerificationProblem};

pub use bench::{
    read_manifest, run_bench, BenchReport, BenchRow, Expected, ManifestEntry, Outcome,
};
pub use config::{Cli, Command, RunConfig, Scoring};

pub const EXIT_SAFE: i32 = 0;
pub const EXIT_UNSAFE: i32 = 1;
pub const EXIT_UNKNOWN: i32 = 2;
pub const EXIT_USAGE: i32 = 3;
pub const EXIT_INPUT: i32 = 4;
pub const EXIT_OUTPUT: i32 = 5;
pub const EXIT_INTERNAL: i32 = 6;

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error("invalid configuration: {0}")]
    Config(String),
    #[error("cannot read {}: {source}", path.display())]
    Input { path: PathBuf, source: io::Error },
    #[error("{}: {source}", path.display())]
    Parse { path: PathBuf, source: LangError },
    #[error("{}:{line}: {message}", path.display())]
    Manifest {
        path: PathBuf,
        line: usize,
        message: String,
    },
    #[error("cannot write {}: {source}", path.display())]
    Output { path: PathBuf, source: io::Error },
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Usage(_) | CliError::Config(_) => EXIT_USAGE,
            CliError::Input { .. } | CliError::Parse { .. } | CliError::Manifest { .. } => {
                EXIT_INPUT
            }
            CliError::Output { .. } => EXIT_OUTPUT,
        }
    }
}

/// Measurements for one analysed task.
#[derive(Debug, Clone)]
pub struct TaskResult {
    pub task: String,
    pub verdict: Verdict,
    pub time_ms: u128,
    pub refinements: usize,
    /// Largest ARG over the run.
    pub arg_states: usize,
    /// ARG nodes created over the run, restarts included.
    pub arg_nodes_created: usize,
    /// Most variables tracked at a single location.
    pub max_precision_size: usize,
    pub precision_pairs: usize,
    pub path_elimination_violations: usize,
}

impl TaskResult {
    pub fn exit_code(&self) -> i32 {
        match self.verdict {
            Verdict::Safe => EXIT_SAFE,
            Verdict::Unsafe(_) => EXIT_UNSAFE,
            Verdict::Unknown(_) => EXIT_UNKNOWN,
        }
    }
}

/// Runs the configured analysis on a loaded task.
pub fn analyse(
    config: &RunConfig,
    task: &str,
    problem: &VerificationProblem,
) -> (TaskResult, CegarOutcome) {
    let start = Instant::now();
    let out = verify(problem, &config.cegar());
    let time_ms = start.elapsed().as_millis();
    debug_assert!(config.mode == AnalysisMode::ExplicitCegar || out.stats.refinements == 0);
    let result = TaskResult {
        task: task.to_string(),
        verdict: out.verdict.clone(),
        time_ms,
        refinements: out.stats.refinements,
        arg_states: out.stats.arg_nodes_peak,
        arg_nodes_created: out.stats.arg_nodes_created,
        max_precision_size: out.stats.max_precision_size,
        precision_pairs: out.stats.precision_pairs,
        path_elimination_violations: out.stats.path_elimination_violations,
    };
    (result, out)
}

pub fn load_task(path: &Path) -> Result<VerificationProblem, CliError> {
    let source = fs::read_to_string(path).map_err(|source| CliError::Input {
        path: path.to_path_buf(),
        source,
    })?;
    load(&source).map_err(|source| CliError::Parse {
        path: path.to_path_buf(),
        source,
    })
}

fn write_file(path: &Path, contents: &str) -> Result<(), CliError> {
    fs::write(path, contents).map_err(|source| CliError::Output {
        path: path.to_path_buf(),
        source,
    })
}

fn task_name(path: &Path) -> String {
    path.file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_else(|| path.display().to_string())
}

/// Verifies one task and prints the report to `out`.
pub fn run_verify(args: &config::VerifyArgs, out: &mut dyn Write) -> Result<TaskResult, CliError> {
    let config = RunConfig::try_from(&args.analysis)?;
    let problem = load_task(&args.task)?;
    let (result, outcome) = analyse(&config, &task_name(&args.task), &problem);
    let stdout_err = |source| CliError::Output {
        path: PathBuf::from("<stdout>"),
        source,
    };
    let mut report = format!("VERDICT: {}\n", result.verdict);
    report += &format!("refinements: {}\n", result.refinements);
    report += &format!(
        "arg nodes: {} created, {} peak\n",
        result.arg_nodes_created, result.arg_states
    );
    report += &format!(
        "precision: {} variables at most per location, {} pairs\n",
        result.max_precision_size, result.precision_pairs
    );
    report += &format!("time: {} ms\n", result.time_ms);
    if args.show_precision {
        report += &format!("{}", outcome.precision);
        if !report.ends_with('\n') {
            report.push('\n');
        }
    }
    if let Some(path) = &args.arg_dump {
        write_file(path, &outcome.arg.to_dot(&problem))?;
    }
    if let Verdict::Unsafe(w) = &result.verdict {
        match &args.witness {
            Some(path) => {
                write_file(path, &format!("{w}\n"))?;
                report += &format!("witness: {}\n", path.display());
            }
            None => report += &format!("witness:\n{w}\n"),
        }
    }
    out.write_all(report.as_bytes()).map_err(stdout_err)?;
    Ok(result)
}

/// Runs a corpus and writes the CSV.
pub fn run_bench_cmd(
    args: &config::BenchArgs,
    out: &mut dyn Write,
    err: &mut dyn Write,
) -> Result<BenchReport, CliError> {
    let config = RunConfig::try_from(&args.analysis)?;
    if args.jobs == 0 {
        return Err(CliError::Config("jobs must be positive".into()));
    }
    let report = run_bench(
        &config,
        &args.corpus,
        args.jobs,
        Scoring::from(&args.scoring),
    )?;
    for w in &report.warnings {
        let _ = writeln!(err, "warning: {w}");
    }
    let csv = report.to_csv();
    match &args.csv {
        Some(path) => {
            write_file(path, &csv)?;
            let t = report.totals();
            let _ = writeln!(
                out,
                "{} tasks: {} correct, {} wrong, {} unknown, score {}",
                report.rows.len(),
                t.correct,
                t.wrong,
                t.unknown,
                t.score
            );
        }
        None => out
            .write_all(csv.as_bytes())
            .map_err(|source| CliError::Output {
                path: PathBuf::from("<stdout>"),
                source,
            })?,
    }
    Ok(report)
}

/// Parses `args` (program name first), runs the command and returns the
/// exit code.
pub fn run<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            return if e.use_stderr() {
                let _ = write!(err, "{}", e.render());
                EXIT_USAGE
            } else {
                let _ = write!(out, "{}", e.render());
                EXIT_SAFE
            };
        }
    };
    let result = match &cli.command {
        Command::Verify(v) => run_verify(v, out).map(|r| r.exit_code()),
        Command::Bench(b) => run_bench_cmd(b, out, err).map(|_| EXIT_SAFE),
    };
    match result {
        Ok(code) => code,
        Err(e) => {
            let _ = writeln!(err, "error: {e}");
            e.exit_code()
        }
    }
}
