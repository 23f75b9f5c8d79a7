use std::path::PathBuf;
use std::time::Duration;

use clap::{Args, Parser, Subcommand, ValueEnum};
use evcheck_core::cegar::{AnalysisMode, CegarConfig, RefineStrategy};
use evcheck_core::cpa::Traversal;

use crate::CliError;

#[derive(Debug, Parser)]
#[command(
    name = "evcheck",
    version,
    about = "Explicit-value model checker for .ev programs"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Check a single task for reachable error() calls.
    Verify(VerifyArgs),
    /// Run every task listed in a corpus manifest and emit CSV.
    Bench(BenchArgs),
}

#[derive(Debug, Args)]
pub struct VerifyArgs {
    #[command(flatten)]
    pub analysis: AnalysisArgs,
    /// Write the counterexample here instead of standard output.
    #[arg(long, value_name = "PATH")]
    pub witness: Option<PathBuf>,
    /// Write the final ARG in Graphviz format.
    #[arg(long, value_name = "PATH")]
    pub arg_dump: Option<PathBuf>,
    /// Print the final precision.
    #[arg(long)]
    pub show_precision: bool,
    pub task: PathBuf,
}

#[derive(Debug, Args)]
pub struct BenchArgs {
    #[command(flatten)]
    pub analysis: AnalysisArgs,
    /// Write the CSV here instead of standard output.
    #[arg(long, value_name = "PATH")]
    pub csv: Option<PathBuf>,
    /// Number of tasks run concurrently.
    #[arg(long, value_name = "N", default_value_t = 1)]
    pub jobs: usize,
    #[command(flatten)]
    pub scoring: ScoringArgs,
    pub corpus: PathBuf,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum ModeArg {
    ExplicitFull,
    ExplicitCegar,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum RefineArg {
    Prune,
    Restart,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum TraversalArg {
    Dfs,
    Bfs,
}

#[derive(Debug, Clone, Args)]
pub struct AnalysisArgs {
    #[arg(long, value_enum, default_value = "explicit-cegar")]
    pub mode: ModeArg,
    #[arg(long, value_enum, default_value = "prune")]
    pub refine: RefineArg,
    /// Spread refined variables over their whole scope.
    #[arg(long, value_name = "BOOL", default_value_t = true, action = clap::ArgAction::Set)]
    pub scoped_precision: bool,
    #[arg(long, value_enum, default_value = "dfs")]
    pub traversal: TraversalArg,
    /// Maximum number of ARG nodes created per task.
    #[arg(long, value_name = "N", default_value_t = 1_000_000)]
    pub state_budget: usize,
    #[arg(long, value_name = "N", default_value_t = 100)]
    pub max_refinements: usize,
    /// Wall-clock limit per task, in seconds.
    #[arg(long, value_name = "SECS", allow_negative_numbers = true)]
    pub time_limit: Option<f64>,
}

#[derive(Debug, Clone, Args)]
pub struct ScoringArgs {
    #[arg(
        long,
        value_name = "N",
        default_value_t = 2,
        allow_negative_numbers = true
    )]
    pub score_correct_safe: i64,
    #[arg(
        long,
        value_name = "N",
        default_value_t = 1,
        allow_negative_numbers = true
    )]
    pub score_correct_unsafe: i64,
    /// Score for UNSAFE on a safe task.
    #[arg(long, value_name = "N", default_value_t = -4, allow_negative_numbers = true)]
    pub score_false_unsafe: i64,
    /// Score for SAFE on an unsafe task.
    #[arg(long, value_name = "N", default_value_t = -8, allow_negative_numbers = true)]
    pub score_false_safe: i64,
}

/// Validated analysis settings for one run.
#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub mode: AnalysisMode,
    pub refine: RefineStrategy,
    pub scoped_precision: bool,
    pub traversal: Traversal,
    pub state_budget: usize,
    pub max_refinements: usize,
    pub time_limit: Option<Duration>,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig::from_cegar(&CegarConfig::default())
    }
}

impl RunConfig {
    pub fn from_cegar(c: &CegarConfig) -> Self {
        RunConfig {
            mode: c.mode,
            refine: c.refine,
            scoped_precision: c.scoped_precision,
            traversal: c.traversal,
            state_budget: c.state_budget,
            max_refinements: c.max_refinements,
            time_limit: c.time_limit,
        }
    }

    pub fn validate(&self) -> Result<(), CliError> {
        if self.state_budget == 0 {
            return Err(CliError::Config("state budget must be positive".into()));
        }
        if self.max_refinements == 0 {
            return Err(CliError::Config("max refinements must be positive".into()));
        }
        if self.time_limit.is_some_and(|t| t.is_zero()) {
            return Err(CliError::Config("time limit must be positive".into()));
        }
        Ok(())
    }

    pub fn cegar(&self) -> CegarConfig {
        CegarConfig {
            mode: self.mode,
            refine: self.refine,
            scoped_precision: self.scoped_precision,
            traversal: self.traversal,
            state_budget: self.state_budget,
            max_refinements: self.max_refinements,
            time_limit: self.time_limit,
            ..CegarConfig::default()
        }
    }
}

impl TryFrom<&AnalysisArgs> for RunConfig {
    type Error = CliError;

    fn try_from(a: &AnalysisArgs) -> Result<Self, CliError> {
        let time_limit = match a.time_limit {
            None => None,
            Some(s) if s.is_finite() && s > 0.0 => Some(
                Duration::try_from_secs_f64(s)
                    .map_err(|e| CliError::Config(format!("time limit: {e}")))?,
            ),
            Some(s) => {
                return Err(CliError::Config(format!(
                    "time limit must be positive, got {s}"
                )))
            }
        };
        let config = RunConfig {
            mode: match a.mode {
                ModeArg::ExplicitFull => AnalysisMode::ExplicitFull,
                ModeArg::ExplicitCegar => AnalysisMode::ExplicitCegar,
            },
            refine: match a.refine {
                RefineArg::Prune => RefineStrategy::Prune,
                RefineArg::Restart => RefineStrategy::Restart,
            },
            scoped_precision: a.scoped_precision,
            traversal: match a.traversal {
                TraversalArg::Dfs => Traversal::Dfs,
                TraversalArg::Bfs => Traversal::Bfs,
            },
            state_budget: a.state_budget,
            max_refinements: a.max_refinements,
            time_limit,
        };
        config.validate()?;
        Ok(config)
    }
}

/// Points awarded per outcome.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Scoring {
    pub correct_safe: i64,
    pub correct_unsafe: i64,
    pub false_unsafe: i64,
    pub false_safe: i64,
}

impl Default for Scoring {
    fn default() -> Self {
        Scoring {
            correct_safe: 2,
            correct_unsafe: 1,
            false_unsafe: -4,
            false_safe: -8,
        }
    }
}

impl From<&ScoringArgs> for Scoring {
    fn from(s: &ScoringArgs) -> Self {
        Scoring {
            correct_safe: s.score_correct_safe,
            correct_unsafe: s.score_correct_unsafe,
            false_unsafe: s.score_false_unsafe,
            false_safe: s.score_false_safe,
        }
    }
}
