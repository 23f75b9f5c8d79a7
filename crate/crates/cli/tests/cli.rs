use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use evcheck_testkit::fixtures::{DIVERGING, INPUT_SEVEN, SYSTEM_CALL_LOOP, TRIVIALLY_UNSAFE};

fn evcheck<I, S>(args: I) -> Output
where
    I: IntoIterator<Item = S>,
    S: AsRef<std::ffi::OsStr>,
{
    Command::new(env!("CARGO_BIN_EXE_evcheck"))
        .args(args)
        .output()
        .unwrap()
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

fn task(dir: &Path, name: &str, src: &str) -> String {
    let p = dir.join(name);
    fs::write(&p, src).unwrap();
    p.to_string_lossy().into_owned()
}

#[test]
fn safe_task_exits_zero() {
    let dir = tempfile::tempdir().unwrap();
    let t = task(dir.path(), "loop.ev", SYSTEM_CALL_LOOP);
    let o = evcheck(["verify", &t]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let out = stdout(&o);
    assert!(out.starts_with("VERDICT: SAFE\n"), "{out}");
    assert!(out.contains("refinements: 1\n"), "{out}");
}

#[test]
fn unsafe_task_exits_one_with_witness() {
    let dir = tempfile::tempdir().unwrap();
    let t = task(dir.path(), "bad.ev", TRIVIALLY_UNSAFE);
    let w = dir.path().join("witness.txt");
    let o = evcheck(["verify", "--witness", w.to_str().unwrap(), &t]);
    assert_eq!(o.status.code(), Some(1), "{}", stderr(&o));
    assert!(stdout(&o).starts_with("VERDICT: UNSAFE\n"));
    let witness = fs::read_to_string(&w).unwrap();
    let steps: Vec<_> = witness.lines().filter(|l| l.starts_with("line")).collect();
    assert_eq!(steps, ["line    2: error()"], "{witness}");
    assert!(witness.contains("concrete replay: confirmed"), "{witness}");
}

#[test]
fn witness_goes_to_stdout_without_path() {
    let dir = tempfile::tempdir().unwrap();
    let t = task(dir.path(), "seven.ev", INPUT_SEVEN);
    let o = evcheck(["verify", &t]);
    assert_eq!(o.status.code(), Some(1));
    let out = stdout(&o);
    assert!(out.contains("witness:\n"), "{out}");
    assert!(out.contains("inputs: [7]"), "{out}");
}

#[test]
fn budget_exhaustion_exits_two() {
    let dir = tempfile::tempdir().unwrap();
    let t = task(dir.path(), "div.ev", DIVERGING);
    let o = evcheck([
        "verify",
        "--mode",
        "explicit-full",
        "--state-budget",
        "10000",
        &t,
    ]);
    assert_eq!(o.status.code(), Some(2), "{}", stderr(&o));
    let out = stdout(&o);
    assert!(
        out.starts_with("VERDICT: UNKNOWN(StateBudgetExceeded)\n"),
        "{out}"
    );
    assert!(out.contains("refinements: 0\n"), "{out}");
}

#[test]
fn usage_errors_exit_three() {
    let dir = tempfile::tempdir().unwrap();
    let t = task(dir.path(), "ok.ev", INPUT_SEVEN);
    for args in [
        vec![],
        vec!["verify"],
        vec!["frobnicate", &t],
        vec!["verify", "--mode", "smt", &t],
        vec!["verify", "--state-budget", "0", &t],
        vec!["verify", "--max-refinements", "0", &t],
        vec!["verify", "--time-limit", "0", &t],
        vec!["verify", "--time-limit", "-2", &t],
        vec!["verify", "--scoped-precision=maybe", &t],
        vec!["bench", "--jobs", "0", dir.path().to_str().unwrap()],
    ] {
        let o = evcheck(&args);
        assert_eq!(o.status.code(), Some(3), "{args:?}: {}", stderr(&o));
        assert!(!stderr(&o).is_empty());
    }
}

#[test]
fn help_and_version_exit_zero() {
    for args in [["--help"], ["--version"]] {
        assert_eq!(evcheck(args).status.code(), Some(0));
    }
    let help = stdout(&evcheck(["verify", "--help"]));
    for flag in [
        "--mode",
        "--refine",
        "--scoped-precision",
        "--traversal",
        "--state-budget",
        "--max-refinements",
        "--time-limit",
        "--witness",
        "--arg-dump",
    ] {
        assert!(help.contains(flag), "{flag}");
    }
    let help = stdout(&evcheck(["bench", "--help"]));
    assert!(help.contains("--csv") && help.contains("--jobs"));
}

#[test]
fn input_errors_exit_four() {
    let dir = tempfile::tempdir().unwrap();
    let missing = dir.path().join("nope.ev");
    let o = evcheck(["verify", missing.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(4));
    assert!(stderr(&o).contains("nope.ev"));

    let t = task(dir.path(), "broken.ev", "int main() { x = ; }");
    let o = evcheck(["verify", &t]);
    assert_eq!(o.status.code(), Some(4));
    assert!(stderr(&o).contains("broken.ev"), "{}", stderr(&o));

    let o = evcheck(["bench", dir.path().to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(4), "no manifest");
}

#[test]
fn output_errors_exit_five() {
    let dir = tempfile::tempdir().unwrap();
    let t = task(dir.path(), "bad.ev", TRIVIALLY_UNSAFE);
    let w = dir.path().join("no/such/dir/w.txt");
    let o = evcheck(["verify", "--witness", w.to_str().unwrap(), &t]);
    assert_eq!(o.status.code(), Some(5), "{}", stderr(&o));
}

#[test]
fn arg_dump_is_graphviz() {
    let dir = tempfile::tempdir().unwrap();
    let t = task(dir.path(), "loop.ev", SYSTEM_CALL_LOOP);
    let dot = dir.path().join("arg.dot");
    let o = evcheck(["verify", "--arg-dump", dot.to_str().unwrap(), &t]);
    assert_eq!(o.status.code(), Some(0));
    let text = fs::read_to_string(dot).unwrap();
    assert!(text.starts_with("digraph"));
    assert!(text.trim_end().ends_with('}'));
}

fn small_corpus(dir: &Path) {
    task(dir, "safe.ev", SYSTEM_CALL_LOOP);
    task(dir, "unsafe.ev", INPUT_SEVEN);
    task(dir, "unknown.ev", DIVERGING);
    fs::write(
        dir.join("manifest.tsv"),
        "unsafe\tUNSAFE\nsafe\tSAFE\nunknown\tSAFE\n",
    )
    .unwrap();
}

fn without_time(csv: &str) -> Vec<Vec<String>> {
    csv.lines()
        .map(|l| {
            let mut f: Vec<String> = l.split(',').map(String::from).collect();
            f.remove(3);
            f
        })
        .collect()
}

#[test]
fn bench_rows_follow_manifest() {
    let dir = tempfile::tempdir().unwrap();
    small_corpus(dir.path());
    let o = evcheck([
        "bench",
        "--state-budget",
        "5000",
        dir.path().to_str().unwrap(),
    ]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let csv = stdout(&o);
    let rows = without_time(&csv);
    assert_eq!(rows.len(), 5, "{csv}");
    assert_eq!(
        rows[0],
        [
            "task",
            "expected",
            "verdict",
            "refinements",
            "arg_states",
            "score"
        ]
    );
    assert_eq!(rows[1][..3], ["unsafe", "UNSAFE", "UNSAFE"]);
    assert_eq!(rows[1][5], "1");
    assert_eq!(rows[2][..3], ["safe", "SAFE", "SAFE"]);
    assert_eq!(rows[2][3], "1");
    assert_eq!(rows[2][5], "2");
    assert_eq!(
        rows[3][..3],
        ["unknown", "SAFE", "UNKNOWN(StateBudgetExceeded)"]
    );
    assert_eq!(rows[3][5], "0");
    assert_eq!(rows[4][0], "TOTAL");
    assert_eq!(rows[4][2], "correct=2;wrong=0;unknown=1;error=0");
    assert_eq!(rows[4][5], "3");
}

#[test]
fn bench_is_deterministic_modulo_time() {
    let dir = tempfile::tempdir().unwrap();
    small_corpus(dir.path());
    let d = dir.path().to_str().unwrap();
    let run = |jobs: &str, name: &str| {
        let csv = dir.path().join(name);
        let o = evcheck([
            "bench",
            "--state-budget",
            "5000",
            "--jobs",
            jobs,
            "--csv",
            csv.to_str().unwrap(),
            d,
        ]);
        assert_eq!(o.status.code(), Some(0));
        assert!(
            stdout(&o).contains("3 tasks: 2 correct, 0 wrong, 1 unknown, score 3"),
            "{}",
            stdout(&o)
        );
        without_time(&fs::read_to_string(csv).unwrap())
    };
    let first = run("1", "a.csv");
    assert_eq!(first, run("1", "b.csv"));
    assert_eq!(first, run("3", "c.csv"));
}

#[test]
fn bench_skips_unlisted_and_missing_tasks() {
    let dir = tempfile::tempdir().unwrap();
    small_corpus(dir.path());
    task(dir.path(), "extra.ev", TRIVIALLY_UNSAFE);
    fs::write(
        dir.path().join("manifest.tsv"),
        "safe\tSAFE\nghost\tUNSAFE\n",
    )
    .unwrap();
    let o = evcheck(["bench", dir.path().to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0));
    let err = stderr(&o);
    for name in ["extra", "unsafe", "unknown", "ghost"] {
        assert!(
            err.contains(&format!("warning: {name}")) || err.contains(&format!("entry {name} ")),
            "{name}: {err}"
        );
    }
    let csv = stdout(&o);
    assert_eq!(csv.lines().count(), 3, "{csv}");
    assert!(csv.lines().nth(1).unwrap().starts_with("safe,SAFE,SAFE,"));
}

#[test]
fn weights_are_configurable() {
    let dir = tempfile::tempdir().unwrap();
    task(dir.path(), "bad.ev", TRIVIALLY_UNSAFE);
    fs::write(dir.path().join("manifest.tsv"), "bad\tSAFE\n").unwrap();
    let o = evcheck([
        "bench",
        "--score-false-unsafe",
        "-10",
        dir.path().to_str().unwrap(),
    ]);
    assert_eq!(o.status.code(), Some(0));
    let csv = stdout(&o);
    let row: Vec<&str> = csv.lines().nth(1).unwrap().split(',').collect();
    assert_eq!(row[2], "UNSAFE");
    assert_eq!(row[6], "-10");
}
