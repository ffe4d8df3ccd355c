mod common;

use arrchc_core::cli::run;
use common::*;

fn call(args: &[&str]) -> (i32, String) {
    let mut out = Vec::new();
    let code = run(std::iter::once("arrchc").chain(args.iter().copied()), &mut out);
    (code, String::from_utf8(out).unwrap())
}

fn path(sub: &str) -> String {
    corpus(sub).to_string_lossy().into_owned()
}

#[test]
fn solve_prints_an_invariant() {
    let (code, out) = call(&["solve", "--validate", &path("chc/counter-safe.smt2")]);
    assert_eq!(code, 0);
    assert!(out.starts_with("sat\n"), "{}", out);
    assert!(out.contains("(define-fun Inv ((x Int)) Bool"), "{}", out);
}

#[test]
fn solve_reports_unsafe_systems() {
    let (code, out) = call(&["solve", &path("chc/counter-bad3.smt2")]);
    assert_eq!((code, out.trim()), (0, "unsat"));
}

#[test]
fn solve_gives_up_at_the_depth_bound() {
    let (code, out) = call(&["solve", "--max-depth", "1", &path("chc/counter-bad3.smt2")]);
    assert_eq!((code, out.trim()), (1, "unknown"));
}

#[test]
fn usage_errors_exit_with_two() {
    assert_eq!(call(&["solve"]).0, 2);
    assert_eq!(call(&["frobnicate"]).0, 2);
    assert_eq!(call(&["solve", "--heuristic-array-eq", "maybe", "x.smt2"]).0, 2);
}

#[test]
fn missing_files_are_errors() {
    assert_eq!(call(&["solve", "/nonexistent.smt2"]).0, 1);
}

#[test]
fn qe_on_the_worked_example() {
    let (code, out) = call(&["qe", &path("qe/worked-qe.smt2")]);
    assert_eq!(code, 0);
    assert!(out.starts_with("(exists ("), "{}", out);
    assert!(!out.contains(" a ") && !out.contains(" a)"), "{}", out);
}

#[test]
fn mbp_respects_hints() {
    let (code, out) = call(&["mbp", &path("qe/worked-mbp.smt2")]);
    assert_eq!(code, 0);
    assert!(!out.contains(" b ") && !out.contains("qe!"), "{}", out);
}

#[test]
fn oracle_subcommands() {
    let (code, out) = call(&["oracle", "brute-qe", "--values", "0,6", &path("qe/worked-qe.smt2")]);
    assert_eq!(code, 0);
    assert!(out.ends_with("agree\n"), "{}", out);

    let (code, out) = call(&["oracle", "enumerate", &path("qe/worked-qe.smt2")]);
    assert_eq!(code, 0);
    assert!(out.contains("; complete after"), "{}", out);

    let (code, out) = call(&["oracle", "bmc", "--depth", "4", &path("chc/counter-bad3.smt2")]);
    assert_eq!((code, out.trim()), (0, "reachable at depth 3"));

    let (code, out) = call(&["oracle", "bmc", "--depth", "3", &path("chc/counter-safe.smt2")]);
    assert_eq!((code, out.trim()), (0, "unreachable up to depth 3"));
}

#[test]
fn generated_tasks_feed_back_into_qe() {
    let dir = std::env::temp_dir().join(format!("arrchc-cli-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    for seed in 0..5 {
        let (code, text) = call(&["oracle", "gen", "--seed", &seed.to_string()]);
        assert_eq!(code, 0);
        let f = dir.join(format!("t{}.smt2", seed));
        std::fs::write(&f, &text).unwrap();
        let f = f.to_string_lossy().into_owned();
        assert_eq!(call(&["qe", &f]).0, 0, "{}", text);
        let (code, out) = call(&["oracle", "brute-qe", "--values", "0,1,2", &f]);
        assert_eq!(code, 0, "{}", text);
        assert!(out.ends_with("agree\n"));
    }
    std::fs::remove_dir_all(&dir).unwrap();
}
