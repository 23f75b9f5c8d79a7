//! Analysis verdicts against brute-force enumeration on generated programs.

use evcheck_core::cegar::{verify, CegarConfig, RefineStrategy, Verdict};
use evcheck_core::lang::{build_cfa, parse};
use evcheck_testkit::explore::explore_cfa;
use evcheck_testkit::gen::{program, ProgramShape};
use evcheck_testkit::interp::{explore, oracle_verdict, OracleVerdict};

const STEP_LIMIT: usize = 10_000;

#[test]
fn generated_programs_parse() {
    let mut rng = evcheck_testkit::rng(11);
    for _ in 0..100 {
        let src = program(&mut rng, &ProgramShape::default());
        if let Err(e) = parse(&src) {
            panic!("{e}\n{src}");
        }
    }
}

#[test]
fn lowering_preserves_behaviour() {
    let mut rng = evcheck_testkit::rng(12);
    for _ in 0..60 {
        let src = program(&mut rng, &ProgramShape::default());
        let ast = parse(&src).unwrap();
        let problem = build_cfa(&ast);
        let by_ast = explore(&ast, 0..=3, STEP_LIMIT, usize::MAX);
        let by_cfa = explore_cfa(&problem, 0..=3, 1_000_000);
        assert!(!by_ast.truncated && !by_cfa.truncated, "{src}");
        assert_eq!(by_ast.error_reachable, by_cfa.error_reachable, "{src}");
        if !by_ast.error_reachable {
            assert_eq!(by_ast.final_stores, by_cfa.final_stores, "{src}");
        }
    }
}

#[test]
fn cegar_agrees_with_enumeration() {
    let mut rng = evcheck_testkit::rng(13);
    let mut counts = [0usize; 3];
    for _ in 0..80 {
        let src = program(&mut rng, &ProgramShape::default());
        let problem = evcheck_core::lang::load(&src).unwrap();
        let expected = oracle_verdict(&parse(&src).unwrap(), 0..=3, STEP_LIMIT);
        for refine in [RefineStrategy::Prune, RefineStrategy::Restart] {
            let cfg = CegarConfig {
                refine,
                state_budget: 100_000,
                ..CegarConfig::default()
            };
            let out = verify(&problem, &cfg);
            assert_eq!(out.stats.path_elimination_violations, 0, "{src}");
            match (&out.verdict, expected) {
                (Verdict::Safe, OracleVerdict::Safe) => counts[0] += 1,
                (Verdict::Unsafe(w), OracleVerdict::Unsafe) => {
                    counts[1] += 1;
                    assert!(w.confirmed, "{src}\n{w}");
                }
                (Verdict::Unknown(_), _) => counts[2] += 1,
                (v, e) => panic!("verdict {v} but enumeration says {e:?}\n{src}"),
            }
        }
    }
    eprintln!("safe/unsafe/unknown: {counts:?}");
    // precision-induced loop unrolling can exhaust the budget
    assert!(counts[2] * 20 <= 160, "{counts:?}");
    assert!(counts[0] > 0 && counts[1] > 0, "{counts:?}");
}
