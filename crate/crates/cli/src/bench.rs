//! Corpus runs: manifest parsing, scoring and CSV output.

use std::collections::{BTreeSet, HashSet};
use std::fmt;
use std::fs;
use std::path::{Path, PathBuf};

use evcheck_core::cegar::Verdict;
use rayon::prelude::*;

use crate::{analyse, load_task, CliError, RunConfig, Scoring, TaskResult};

pub const MANIFEST: &str = "manifest.tsv";
pub const CSV_HEADER: [&str; 7] = [
    "task",
    "expected",
    "verdict",
    "time_ms",
    "refinements",
    "arg_states",
    "score",
];

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Expected {
    Safe,
    Unsafe,
}

impl fmt::Display for Expected {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Expected::Safe => "SAFE",
            Expected::Unsafe => "UNSAFE",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ManifestEntry {
    /// File stem of the task inside the corpus directory.
    pub task: String,
    pub expected: Expected,
}

/// Reads `name<TAB>SAFE|UNSAFE` lines. Blank lines and `#` comments are
/// ignored; the `.ev` suffix on names is optional.
pub fn read_manifest(path: &Path) -> Result<Vec<ManifestEntry>, CliError> {
    let text = fs::read_to_string(path).map_err(|source| CliError::Input {
        path: path.to_path_buf(),
        source,
    })?;
    let bad = |line: usize, message: String| CliError::Manifest {
        path: path.to_path_buf(),
        line,
        message,
    };
    let mut entries = Vec::new();
    let mut seen = HashSet::new();
    for (i, raw) in text.lines().enumerate() {
        let line = raw.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let fields: Vec<&str> = line
            .split('\t')
            .map(str::trim)
            .filter(|f| !f.is_empty())
            .collect();
        let [name, verdict] = fields[..] else {
            return Err(bad(
                i + 1,
                format!("expected `task<TAB>SAFE|UNSAFE`, got `{line}`"),
            ));
        };
        let expected = match verdict {
            "SAFE" => Expected::Safe,
            "UNSAFE" => Expected::Unsafe,
            other => return Err(bad(i + 1, format!("unknown verdict `{other}`"))),
        };
        let task = name.strip_suffix(".ev").unwrap_or(name).to_string();
        if task.is_empty() || task.contains([',', '"', '/']) {
            return Err(bad(i + 1, format!("invalid task name `{name}`")));
        }
        if !seen.insert(task.clone()) {
            return Err(bad(i + 1, format!("duplicate task `{task}`")));
        }
        entries.push(ManifestEntry { task, expected });
    }
    Ok(entries)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Outcome {
    CorrectSafe,
    CorrectUnsafe,
    FalseSafe,
    FalseUnsafe,
    Unknown,
    /// The task could not be loaded.
    Error,
}

impl Outcome {
    pub fn classify(expected: Expected, verdict: &Verdict) -> Outcome {
        match (expected, verdict) {
            (_, Verdict::Unknown(_)) => Outcome::Unknown,
            (Expected::Safe, Verdict::Safe) => Outcome::CorrectSafe,
            (Expected::Unsafe, Verdict::Unsafe(_)) => Outcome::CorrectUnsafe,
            (Expected::Unsafe, Verdict::Safe) => Outcome::FalseSafe,
            (Expected::Safe, Verdict::Unsafe(_)) => Outcome::FalseUnsafe,
        }
    }

    pub fn score(self, s: &Scoring) -> i64 {
        match self {
            Outcome::CorrectSafe => s.correct_safe,
            Outcome::CorrectUnsafe => s.correct_unsafe,
            Outcome::FalseSafe => s.false_safe,
            Outcome::FalseUnsafe => s.false_unsafe,
            Outcome::Unknown | Outcome::Error => 0,
        }
    }

    pub fn is_correct(self) -> bool {
        matches!(self, Outcome::CorrectSafe | Outcome::CorrectUnsafe)
    }

    pub fn is_wrong(self) -> bool {
        matches!(self, Outcome::FalseSafe | Outcome::FalseUnsafe)
    }
}

#[derive(Debug, Clone)]
pub struct BenchRow {
    pub task: String,
    pub expected: Expected,
    /// `None` if the task failed to load.
    pub result: Option<TaskResult>,
    pub outcome: Outcome,
    pub score: i64,
}

impl BenchRow {
    pub fn verdict(&self) -> String {
        match &self.result {
            Some(r) => r.verdict.to_string(),
            None => "ERROR".to_string(),
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Totals {
    pub correct: usize,
    pub wrong: usize,
    pub unknown: usize,
    pub errors: usize,
    pub time_ms: u128,
    pub refinements: usize,
    pub arg_states: usize,
    pub score: i64,
}

#[derive(Debug, Clone, Default)]
pub struct BenchReport {
    /// One row per manifest entry with a task file, in manifest order.
    pub rows: Vec<BenchRow>,
    pub warnings: Vec<String>,
}

impl BenchReport {
    pub fn totals(&self) -> Totals {
        let mut t = Totals::default();
        for row in &self.rows {
            match row.outcome {
                o if o.is_correct() => t.correct += 1,
                o if o.is_wrong() => t.wrong += 1,
                Outcome::Error => t.errors += 1,
                _ => t.unknown += 1,
            }
            if let Some(r) = &row.result {
                t.time_ms += r.time_ms;
                t.refinements += r.refinements;
                t.arg_states += r.arg_states;
            }
            t.score += row.score;
        }
        t
    }

    /// Header, one row per task, then a `TOTAL` row.
    pub fn to_csv(&self) -> String {
        let mut w = csv::Writer::from_writer(Vec::new());
        let mut put = |rec: &[String]| w.write_record(rec).expect("writing to memory");
        put(&CSV_HEADER.map(String::from));
        for row in &self.rows {
            let (time, refinements, states) = match &row.result {
                Some(r) => (
                    r.time_ms.to_string(),
                    r.refinements.to_string(),
                    r.arg_states.to_string(),
                ),
                None => (String::new(), String::new(), String::new()),
            };
            put(&[
                row.task.clone(),
                row.expected.to_string(),
                row.verdict(),
                time,
                refinements,
                states,
                row.score.to_string(),
            ]);
        }
        let t = self.totals();
        let safe = self
            .rows
            .iter()
            .filter(|r| r.expected == Expected::Safe)
            .count();
        put(&[
            "TOTAL".to_string(),
            format!("safe={safe};unsafe={}", self.rows.len() - safe),
            format!(
                "correct={};wrong={};unknown={};error={}",
                t.correct, t.wrong, t.unknown, t.errors
            ),
            t.time_ms.to_string(),
            t.refinements.to_string(),
            t.arg_states.to_string(),
            t.score.to_string(),
        ]);
        String::from_utf8(w.into_inner().expect("writing to memory")).expect("csv is utf-8")
    }
}

fn ev_files(dir: &Path) -> Result<BTreeSet<String>, CliError> {
    let entries = fs::read_dir(dir).map_err(|source| CliError::Input {
        path: dir.to_path_buf(),
        source,
    })?;
    let mut names = BTreeSet::new();
    for e in entries {
        let path = e
            .map_err(|source| CliError::Input {
                path: dir.to_path_buf(),
                source,
            })?
            .path();
        if path.extension().is_some_and(|x| x == "ev") && path.is_file() {
            if let Some(stem) = path.file_stem() {
                names.insert(stem.to_string_lossy().into_owned());
            }
        }
    }
    Ok(names)
}

/// Runs every task of `dir` listed in its manifest, `jobs` at a time.
pub fn run_bench(
    config: &RunConfig,
    dir: &Path,
    jobs: usize,
    scoring: Scoring,
) -> Result<BenchReport, CliError> {
    config.validate()?;
    let manifest = read_manifest(&dir.join(MANIFEST))?;
    let files = ev_files(dir)?;
    let mut warnings = Vec::new();
    let listed: HashSet<&str> = manifest.iter().map(|e| e.task.as_str()).collect();
    for f in &files {
        if !listed.contains(f.as_str()) {
            warnings.push(format!("{f}.ev has no manifest entry; skipped"));
        }
    }
    let mut tasks = Vec::new();
    for e in &manifest {
        if files.contains(&e.task) {
            tasks.push(e.clone());
        } else {
            warnings.push(format!(
                "manifest entry {} has no task file; skipped",
                e.task
            ));
        }
    }
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(jobs.max(1))
        .build()
        .map_err(|e| CliError::Config(format!("thread pool: {e}")))?;
    let rows: Vec<(BenchRow, Option<String>)> = pool.install(|| {
        tasks
            .par_iter()
            .map(|e| run_one(config, dir, e, &scoring))
            .collect()
    });
    let mut report = BenchReport {
        rows: Vec::with_capacity(rows.len()),
        warnings,
    };
    for (row, warning) in rows {
        report.warnings.extend(warning);
        report.rows.push(row);
    }
    Ok(report)
}

fn run_one(
    config: &RunConfig,
    dir: &Path,
    e: &ManifestEntry,
    scoring: &Scoring,
) -> (BenchRow, Option<String>) {
    let path: PathBuf = dir.join(format!("{}.ev", e.task));
    match load_task(&path) {
        Ok(problem) => {
            let (result, _) = analyse(config, &e.task, &problem);
            let outcome = Outcome::classify(e.expected, &result.verdict);
            let row = BenchRow {
                task: e.task.clone(),
                expected: e.expected,
                score: outcome.score(scoring),
                outcome,
                result: Some(result),
            };
            (row, None)
        }
        Err(err) => {
            let row = BenchRow {
                task: e.task.clone(),
                expected: e.expected,
                result: None,
                outcome: Outcome::Error,
                score: 0,
            };
            (row, Some(format!("{err}")))
        }
    }
}
