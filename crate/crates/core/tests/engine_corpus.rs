mod common;

use arrchc_core::chc::ChcSystem;
use arrchc_core::engine::{solve, validate_invariant, EngineOptions, Verdict};
use arrchc_core::frontend::load_system;
use arrchc_core::oracles::bmc_reach;
use common::*;
use std::time::Duration;

const EXPECTED: &[(&str, bool)] = &[
    ("counter-safe", true),
    ("counter-bad3", false),
    ("bounded-counter-safe", true),
    ("lockstep-safe", true),
    ("double-step-bad", false),
    ("sign-change", true),
    ("array-cell-safe", true),
    ("array-cell-bad", false),
    ("array-mirror-safe", true),
    ("flags-safe", true),
    ("sum-call-safe", true),
    ("sum-call-bad", false),
    ("array-call-safe", true),
    ("array-call-bad", false),
];

fn load(name: &str) -> ChcSystem {
    let text = std::fs::read_to_string(corpus(&format!("chc/{}.smt2", name))).unwrap();
    load_system(&text).unwrap()
}

fn opts() -> EngineOptions {
    EngineOptions {
        heuristic_array_eq: true,
        validate: true,
        debug_checks: true,
        time_budget: Some(Duration::from_secs(60)),
        ..EngineOptions::default()
    }
}

#[test]
fn corpus_verdicts_hold_up_under_bmc() {
    let mut s = session();
    for (name, safe) in EXPECTED {
        let sys = load(name);
        let r = solve(&sys, &opts());
        assert!(r.violations.is_empty(), "{}: {:?}", name, r.violations);
        match &r.verdict {
            Verdict::Safe(inv) => {
                assert!(safe, "{} reported safe", name);
                validate_invariant(&sys, inv, &mut s).unwrap();
                let depth = if sys.has_call { 4 } else { 6 };
                for d in 0..=depth {
                    assert!(!bmc_reach(&sys, d, &mut s).unwrap().is_reachable(), "{} reaches bad at {}", name, d);
                }
            }
            Verdict::Unsafe { depth, .. } => {
                assert!(!safe, "{} reported unsafe", name);
                assert!(bmc_reach(&sys, *depth, &mut s).unwrap().is_reachable(), "{} at {}", name, depth);
            }
            Verdict::Unknown(why) => panic!("{}: unknown ({})", name, why),
        }
    }
}

#[test]
fn counter_fails_at_depth_three() {
    let r = solve(&load("counter-bad3"), &opts());
    assert!(matches!(r.verdict, Verdict::Unsafe { depth: 3, .. }), "{:?}", r.verdict);
}

#[test]
fn depth_bound_gives_unknown() {
    let o = EngineOptions { max_depth: Some(1), ..opts() };
    assert!(matches!(solve(&load("counter-bad3"), &o).verdict, Verdict::Unknown(_)));
}

#[test]
fn invariant_validation_rejects_wrong_candidates() {
    let sys = load("counter-safe");
    let x = sys.state_vars[0].term();
    let mut s = session();
    assert!(validate_invariant(&sys, &Term::le(&Term::int(0), &x), &mut s).is_ok());
    assert!(validate_invariant(&sys, &Term::le(&Term::int(1), &x), &mut s).is_err());
    assert!(validate_invariant(&sys, &Term::tt(), &mut s).is_err());
}

#[test]
fn lockstep_invariant_relates_both_counters() {
    let sys = load("lockstep-safe");
    let Verdict::Safe(inv) = solve(&sys, &opts()).verdict else { panic!() };
    let (x, y) = (sys.state_vars[0].term(), sys.state_vars[1].term());
    let mut s = session();
    assert_eq!(s.entails(&inv, &Term::eq(&x, &y)).unwrap(), arrchc_core::smt::Entailment::Valid);
}

use arrchc_core::term::Term;
