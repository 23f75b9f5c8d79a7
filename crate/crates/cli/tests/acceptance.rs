//! Acceptance criteria 1 to 9. Runs without the libtest harness so that
//! every criterion prints one PASS/FAIL line, then exits nonzero if any
//! criterion failed.

use std::collections::BTreeMap;
use std::panic::{self, AssertUnwindSafe};
use std::path::{Path, PathBuf};
use std::process::{Command, ExitCode};
use std::time::{Duration, Instant};

use evcheck_cli::{run_bench, Expected, Outcome, RunConfig, Scoring};
use evcheck_core::cegar::{
    verify, AnalysisMode, CegarConfig, RefineStrategy, UnknownReason, Verdict,
};
use evcheck_core::domain::AbstractAssignment;
use evcheck_core::lang::{load, parse, LocId, Var};
use evcheck_testkit::fixtures::SYSTEM_CALL_LOOP;
use evcheck_testkit::gen::{self, program, ProgramShape};
use evcheck_testkit::interp::{oracle_verdict, OracleVerdict};
use evcheck_testkit::laws::{
    check_assignment_interpolant, check_interpolant, check_lattice, check_sp_soundness, stores,
};

type Check = Result<String, String>;
type Criterion = (&'static str, fn() -> Check);

fn corpus() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../corpus")
}

fn evcheck() -> Command {
    Command::new(env!("CARGO_BIN_EXE_evcheck"))
}

fn ensure(ok: bool, msg: impl Into<String>) -> Result<(), String> {
    if ok {
        Ok(())
    } else {
        Err(msg.into())
    }
}

fn exit_branch(src: &str) -> LocId {
    let p = load(src).unwrap();
    p.cfa
        .edges()
        .iter()
        .find(|e| e.op.to_string() == "[flag > 0]")
        .expect("guard of the error call")
        .source
}

fn system_call_loop_reproduction() -> Check {
    let path = corpus().join("system_call_loop.ev");
    let src = std::fs::read_to_string(&path).map_err(|e| e.to_string())?;
    ensure(
        src == SYSTEM_CALL_LOOP,
        "corpus/system_call_loop.ev differs from the fixture",
    )?;
    let p = load(&src).map_err(|e| e.to_string())?;
    let exit = exit_branch(&src);
    let flag = Var::new("flag");
    let ticks = Var::new("ticks");

    let start = Instant::now();
    let out = verify(&p, &CegarConfig::default());
    let elapsed = start.elapsed();
    ensure(
        out.verdict == Verdict::Safe,
        format!("scoped verdict {}", out.verdict),
    )?;
    ensure(
        elapsed < Duration::from_secs(1),
        format!("took {elapsed:?}"),
    )?;
    ensure(
        out.stats.refinements == 1,
        format!("{} refinements scoped", out.stats.refinements),
    )?;
    ensure(
        out.precision.at(exit).contains(&flag),
        "flag not tracked at the exit branch",
    )?;
    ensure(!out.precision.variables().contains(&ticks), "ticks tracked")?;

    let unscoped = verify(
        &p,
        &CegarConfig {
            scoped_precision: false,
            ..CegarConfig::default()
        },
    );
    ensure(
        unscoped.verdict == Verdict::Safe,
        format!("unscoped verdict {}", unscoped.verdict),
    )?;
    ensure(
        unscoped.stats.refinements <= 2,
        format!("{} refinements unscoped", unscoped.stats.refinements),
    )?;
    ensure(
        unscoped.precision.at(exit).contains(&flag),
        "unscoped: flag missing",
    )?;
    ensure(
        !unscoped.precision.variables().contains(&ticks),
        "unscoped: ticks tracked",
    )?;

    let cli = evcheck()
        .arg("verify")
        .arg(&path)
        .output()
        .map_err(|e| e.to_string())?;
    let stdout = String::from_utf8_lossy(&cli.stdout);
    ensure(
        cli.status.code() == Some(0),
        format!("exit {:?}", cli.status.code()),
    )?;
    ensure(
        stdout.starts_with("VERDICT: SAFE\nrefinements: 1\n"),
        stdout.to_string(),
    )?;
    Ok(format!(
        "SAFE in {elapsed:?}, 1 refinement scoped, {} unscoped, flag at {exit}, no ticks",
        unscoped.stats.refinements
    ))
}

fn naive_divergence() -> Check {
    let p = load(SYSTEM_CALL_LOOP).unwrap();
    let out = verify(
        &p,
        &CegarConfig {
            mode: AnalysisMode::ExplicitFull,
            state_budget: 100_000,
            ..CegarConfig::default()
        },
    );
    ensure(
        out.verdict == Verdict::Unknown(UnknownReason::StateBudgetExceeded),
        format!("verdict {}", out.verdict),
    )?;
    ensure(out.stats.refinements == 0, "full mode refined")?;
    let cli = evcheck()
        .args([
            "verify",
            "--mode",
            "explicit-full",
            "--state-budget",
            "100000",
        ])
        .arg(corpus().join("system_call_loop.ev"))
        .output()
        .map_err(|e| e.to_string())?;
    ensure(
        cli.status.code() == Some(2),
        format!("exit {:?}", cli.status.code()),
    )?;
    ensure(
        String::from_utf8_lossy(&cli.stdout).starts_with("VERDICT: UNKNOWN(StateBudgetExceeded)"),
        "cli verdict line",
    )?;
    Ok(format!(
        "UNKNOWN(StateBudgetExceeded) after {} nodes",
        out.stats.arg_nodes_created
    ))
}

fn interpolant_suite() -> Check {
    let mut rng = evcheck_testkit::rng(301);
    let start = Instant::now();
    let mut failures = Vec::new();
    for _ in 0..1000 {
        let (minus, plus) = gen::contradicting_sequences(&mut rng, 5, 6, -3, 3);
        if let Err(e) = check_interpolant(&minus, &plus) {
            failures.push(e);
        }
    }
    let elapsed = start.elapsed();
    ensure(
        failures.is_empty(),
        format!(
            "{} failures, first: {}",
            failures.len(),
            failures.first().cloned().unwrap_or_default()
        ),
    )?;
    ensure(
        elapsed < Duration::from_secs(30),
        format!("took {elapsed:?}"),
    )?;
    Ok(format!("1000 pairs, 0 failures, {elapsed:?}"))
}

fn assignment_lemma() -> Check {
    let mut rng = evcheck_testkit::rng(401);
    let mut failures = Vec::new();
    for _ in 0..1000 {
        let (vm, vp) = gen::contradicting_assignments(&mut rng, 5, -3, 3);
        if let Err(e) = check_assignment_interpolant(&vm, &vp) {
            failures.push(e);
        }
    }
    ensure(
        failures.is_empty(),
        format!(
            "{} failures, first: {}",
            failures.len(),
            failures.first().cloned().unwrap_or_default()
        ),
    )?;
    Ok("1000 pairs, restriction and minimized interpolant valid".into())
}

struct OracleRuns {
    agree: usize,
    unknown: usize,
    refinements: usize,
    violations: usize,
}

fn oracle_runs() -> &'static Result<OracleRuns, String> {
    static RUNS: std::sync::OnceLock<Result<OracleRuns, String>> = std::sync::OnceLock::new();
    RUNS.get_or_init(|| {
        let mut rng = evcheck_testkit::rng(501);
        let shape = ProgramShape::default();
        let cfg = CegarConfig {
            state_budget: 100_000,
            ..CegarConfig::default()
        };
        let mut runs = OracleRuns {
            agree: 0,
            unknown: 0,
            refinements: 0,
            violations: 0,
        };
        for _ in 0..200 {
            let src = program(&mut rng, &shape);
            let ast = parse(&src).map_err(|e| format!("{e}\n{src}"))?;
            let expected = oracle_verdict(&ast, 0..=3, 10_000);
            let out = verify(&load(&src).unwrap(), &cfg);
            runs.refinements += out.stats.refinements;
            runs.violations += out.stats.path_elimination_violations;
            match (&out.verdict, expected) {
                (Verdict::Unknown(_), _) => runs.unknown += 1,
                (_, OracleVerdict::Inconclusive) => {
                    return Err(format!("enumeration inconclusive\n{src}"))
                }
                (Verdict::Safe, OracleVerdict::Safe)
                | (Verdict::Unsafe(_), OracleVerdict::Unsafe) => runs.agree += 1,
                (v, e) => return Err(format!("verdict {v}, enumeration {e:?}\n{src}")),
            }
        }
        Ok(runs)
    })
}

fn oracle_equivalence() -> Check {
    let runs = oracle_runs().as_ref().map_err(Clone::clone)?;
    ensure(
        runs.unknown * 20 <= 200,
        format!("{} of 200 UNKNOWN", runs.unknown),
    )?;
    Ok(format!(
        "{} agree, {} UNKNOWN of 200",
        runs.agree, runs.unknown
    ))
}

fn path_elimination() -> Check {
    let runs = oracle_runs().as_ref().map_err(Clone::clone)?;
    ensure(
        runs.violations == 0,
        format!("{} violations", runs.violations),
    )?;
    ensure(runs.refinements > 0, "no refinements performed")?;
    Ok(format!("{} refinements, 0 violations", runs.refinements))
}

fn lattice_sp_suite() -> Check {
    let mut rng = evcheck_testkit::rng(701);
    let vars = gen::vars(3);
    let universe = stores(&vars, -4, 4);
    let draw = |rng: &mut _, i: usize| {
        if i % 10 == 9 {
            AbstractAssignment::bottom()
        } else {
            gen::assignment(rng, &vars, -4, 4, 0.5)
        }
    };
    let start = Instant::now();
    let mut failures = Vec::new();
    for i in 0..5000 {
        let u = draw(&mut rng, i);
        let v = draw(&mut rng, i / 3);
        let w = draw(&mut rng, i / 7);
        if let Err(e) = check_lattice(&u, &v, &w, &universe) {
            failures.push(e);
        }
        let op = gen::operation(&mut rng, &vars, -4, 4);
        if let Err(e) = check_sp_soundness(&v, &op, &universe, -4, 4) {
            failures.push(e);
        }
    }
    let elapsed = start.elapsed();
    ensure(
        failures.is_empty(),
        format!(
            "{} failures, first: {}",
            failures.len(),
            failures.first().cloned().unwrap_or_default()
        ),
    )?;
    ensure(
        elapsed < Duration::from_secs(60),
        format!("took {elapsed:?}"),
    )?;
    Ok(format!("10000 cases, 0 failures, {elapsed:?}"))
}

fn bench_config(mode: AnalysisMode, refine: RefineStrategy) -> RunConfig {
    RunConfig {
        mode,
        refine,
        state_budget: 100_000,
        ..RunConfig::default()
    }
}

fn prune_restart_equivalence() -> Check {
    let run = |r| {
        run_bench(
            &bench_config(AnalysisMode::ExplicitCegar, r),
            &corpus(),
            1,
            Scoring::default(),
        )
        .map_err(|e| e.to_string())
    };
    let prune = run(RefineStrategy::Prune)?;
    let restart = run(RefineStrategy::Restart)?;
    ensure(
        prune.rows.len() >= 20,
        format!("only {} tasks", prune.rows.len()),
    )?;
    ensure(prune.rows.len() == restart.rows.len(), "row counts differ")?;
    let mut cheaper = 0;
    for (p, r) in prune.rows.iter().zip(&restart.rows) {
        ensure(
            p.verdict() == r.verdict(),
            format!("{}: {} vs {}", p.task, p.verdict(), r.verdict()),
        )?;
        let (pc, rc) = (
            p.result.as_ref().map_or(0, |x| x.arg_nodes_created),
            r.result.as_ref().map_or(0, |x| x.arg_nodes_created),
        );
        if pc <= rc {
            cheaper += 1;
        }
    }
    let n = prune.rows.len();
    ensure(
        cheaper * 10 >= n * 9,
        format!("prune cheaper on {cheaper} of {n}"),
    )?;
    Ok(format!(
        "identical verdicts on {n} tasks, prune <= restart nodes on {cheaper}"
    ))
}

fn bench_output() -> Check {
    let dir = tempfile::tempdir().map_err(|e| e.to_string())?;
    let manifest =
        evcheck_cli::read_manifest(&corpus().join("manifest.tsv")).map_err(|e| e.to_string())?;
    let mut scores = BTreeMap::new();
    for mode in ["explicit-cegar", "explicit-full"] {
        let csv_path = dir.path().join(format!("{mode}.csv"));
        let out = evcheck()
            .args(["bench", "--mode", mode, "--state-budget", "100000", "--csv"])
            .arg(&csv_path)
            .arg(corpus())
            .output()
            .map_err(|e| e.to_string())?;
        ensure(
            out.status.code() == Some(0),
            format!("{mode}: exit {:?}", out.status.code()),
        )?;
        let mut reader = csv::Reader::from_path(&csv_path).map_err(|e| e.to_string())?;
        let header: Vec<String> = reader
            .headers()
            .map_err(|e| e.to_string())?
            .iter()
            .map(String::from)
            .collect();
        ensure(
            header
                == [
                    "task",
                    "expected",
                    "verdict",
                    "time_ms",
                    "refinements",
                    "arg_states",
                    "score",
                ],
            format!("header {header:?}"),
        )?;
        let records: Vec<csv::StringRecord> = reader
            .records()
            .collect::<Result<_, _>>()
            .map_err(|e| e.to_string())?;
        ensure(
            records.len() == manifest.len() + 1,
            format!("{mode}: {} rows", records.len()),
        )?;
        let mut total = 0i64;
        for (rec, entry) in records.iter().zip(&manifest) {
            ensure(rec.len() == 7, format!("{mode}: row {rec:?}"))?;
            ensure(
                rec[0] == *entry.task && rec[1] == *entry.expected.to_string(),
                format!("{mode}: order at {rec:?}"),
            )?;
            ensure(
                ["SAFE", "UNSAFE"].contains(&&rec[2]) || rec[2].starts_with("UNKNOWN("),
                format!("{mode}: verdict {}", &rec[2]),
            )?;
            for i in 3..6 {
                rec[i]
                    .parse::<u64>()
                    .map_err(|_| format!("{mode}: field {i} of {rec:?}"))?;
            }
            let expected = match &rec[1] {
                "SAFE" => Expected::Safe,
                _ => Expected::Unsafe,
            };
            let outcome = match &rec[2] {
                "SAFE" => Outcome::classify(expected, &Verdict::Safe),
                "UNSAFE" if expected == Expected::Unsafe => Outcome::CorrectUnsafe,
                "UNSAFE" => Outcome::FalseUnsafe,
                _ => Outcome::Unknown,
            };
            let score: i64 = rec[6]
                .parse()
                .map_err(|_| format!("{mode}: score {}", &rec[6]))?;
            ensure(
                score == outcome.score(&Scoring::default()),
                format!("{mode}: score of {rec:?}"),
            )?;
            if mode == "explicit-full" {
                ensure(&rec[4] == "0", format!("full mode refined on {}", &rec[0]))?;
            }
            total += score;
        }
        let summary = records.last().unwrap();
        ensure(&summary[0] == "TOTAL", "missing summary row")?;
        ensure(
            summary[6].parse::<i64>() == Ok(total),
            format!("{mode}: total {} vs {total}", &summary[6]),
        )?;
        scores.insert(mode, total);
    }
    let (cegar, full) = (scores["explicit-cegar"], scores["explicit-full"]);
    ensure(cegar >= full, format!("cegar {cegar} < full {full}"))?;
    Ok(format!(
        "{} tasks, score cegar {cegar} vs full {full}",
        manifest.len()
    ))
}

fn main() -> ExitCode {
    let criteria: [Criterion; 9] = [
        (
            "system-call loop reproduction",
            system_call_loop_reproduction,
        ),
        ("naive-analysis divergence", naive_divergence),
        ("interpolant property suite", interpolant_suite),
        ("assignment-interpolant lemma", assignment_lemma),
        ("oracle equivalence", oracle_equivalence),
        ("path elimination", path_elimination),
        ("lattice/SP soundness suite", lattice_sp_suite),
        ("pruning/restart equivalence", prune_restart_equivalence),
        ("bench output", bench_output),
    ];
    let filter: Vec<String> = std::env::args()
        .skip(1)
        .filter(|a| !a.starts_with('-'))
        .collect();
    panic::set_hook(Box::new(|_| {}));
    let mut failed = 0;
    for (i, (name, check)) in criteria.iter().enumerate() {
        if !filter.is_empty() && !filter.iter().any(|f| name.contains(f.as_str())) {
            continue;
        }
        let start = Instant::now();
        let result = panic::catch_unwind(AssertUnwindSafe(check)).unwrap_or_else(|p| {
            Err(p
                .downcast_ref::<String>()
                .cloned()
                .or_else(|| p.downcast_ref::<&str>().map(|s| s.to_string()))
                .unwrap_or_else(|| "panicked".into()))
        });
        let secs = start.elapsed().as_secs_f64();
        match result {
            Ok(detail) => println!("criterion {}: PASS  {name}: {detail} ({secs:.1}s)", i + 1),
            Err(why) => {
                failed += 1;
                println!("criterion {}: FAIL  {name}: {why} ({secs:.1}s)", i + 1);
            }
        }
    }
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        println!("{failed} criteria failed");
        ExitCode::FAILURE
    }
}
