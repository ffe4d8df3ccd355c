mod common;

use arrchc_core::mbp::{array_mbp, combined_mbp, MbpOptions, MbpRecord, MbpTask};
use arrchc_core::model::{IndexDomain, Model, Value};
use arrchc_core::oracles::{brute_exists_equal, check_mbp_record, enumeration_bound, gen, mbp_enumerate, ContractCheck, FiniteDomainSpec};
use arrchc_core::qe::{ackermann_ordered, array_qe, QeTask};
use arrchc_core::smt::{Exists, SatResult, Session, SolverConfig};
use arrchc_core::term::{Sort, Term, Var};
use common::*;
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use std::time::Duration;

fn quick() -> Session {
    Session::new(SolverConfig::default().with_timeout(Duration::from_secs(3))).unwrap()
}

fn task(seed: u64) -> QeTask {
    let cfg = gen::GenConfig { index_vars: 2, ..Default::default() };
    gen::qe_task(&mut ChaCha8Rng::seed_from_u64(seed), &cfg)
}

fn model_of(s: &mut Session, body: &Term) -> Option<Model> {
    match s.check_one(body).unwrap() {
        SatResult::Sat(m) => Some(m),
        _ => None,
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(40))]

    #[test]
    fn projection_contract(seed in any::<u64>()) {
        let t = task(seed);
        let mut s = quick();
        let Some(m) = model_of(&mut s, &t.body) else { return Ok(()) };
        let q = vec![t.quantified.clone()];
        let out = combined_mbp(&MbpTask { quantified: q.clone(), body: t.body.clone(), model: m.clone() }, &MbpOptions::default()).unwrap();
        let rec = MbpRecord { quantified: q, body: t.body.clone(), model: m, domain: IndexDomain::Infinite, result: out.result };
        let c = check_mbp_record(&rec, &mut s);
        prop_assert!(!matches!(c, ContractCheck::Violation(_)), "{:?} on {}", c, t.body);
    }

    #[test]
    fn projecting_arrays_and_integers_together(seed in any::<u64>()) {
        let t = task(seed);
        let mut s = quick();
        let Some(m) = model_of(&mut s, &t.body) else { return Ok(()) };
        let q = vec![t.quantified.clone(), Var::new("v0", Sort::Int)];
        let out = combined_mbp(&MbpTask { quantified: q.clone(), body: t.body.clone(), model: m.clone() }, &MbpOptions::default()).unwrap();
        let rec = MbpRecord { quantified: q, body: t.body.clone(), model: m, domain: IndexDomain::Infinite, result: out.result };
        let c = check_mbp_record(&rec, &mut s);
        prop_assert!(!matches!(c, ContractCheck::Violation(_)), "{:?} on {}", c, t.body);
    }

    #[test]
    fn per_model_cost_is_polynomial(seed in any::<u64>()) {
        let t = task(seed);
        let mut s = quick();
        let Some(m) = model_of(&mut s, &t.body) else { return Ok(()) };
        let r = array_mbp(&t.quantified, &t.body, &m, &MbpOptions::default()).unwrap();
        let n = t.body.size();
        prop_assert!(r.rule_applications <= 8 * n * n);
    }

    #[test]
    fn ordered_ackermann_is_sound(idx in prop::collection::vec(prop_oneof![Just("i"), Just("j"), Just("k")], 1..5),
                                  vals in prop::collection::vec(-2i64..3, 3)) {
        let reads: Vec<(Var, Term)> = idx.iter().enumerate()
            .map(|(n, i)| (Var::new(&format!("s{}", n), Sort::Int), int_var(i))).collect();
        let mut m = Model::new();
        for (name, v) in ["i", "j", "k"].iter().zip(&vals) {
            m.set(&Var::new(name, Sort::Int), Value::Int(*v));
        }
        // a model where equal indices read equal values
        for (s, t) in &reads {
            let v = m.eval(t).unwrap();
            m.set(s, v);
        }
        let out = ackermann_ordered(&reads, &m).unwrap();
        prop_assert!(m.eval_bool(&out).unwrap());
        let mut plain = vec![];
        for (k, (sk, tk)) in reads.iter().enumerate() {
            for (sl, tl) in &reads[k + 1..] {
                plain.push(Term::implies(&Term::eq(tk, tl), &Term::eq(&sk.term(), &sl.term())));
            }
        }
        let mut s = quick();
        prop_assert!(matches!(s.entails(&out, &Term::and(plain)).unwrap(), arrchc_core::smt::Entailment::Valid));
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(25))]

    #[test]
    fn enumeration_is_finite_and_exact(seed in any::<u64>()) {
        let t = task(seed);
        let qe = array_qe(&t).unwrap();
        let bound = enumeration_bound(&t.body, &qe);
        let cap = bound.min(5000) as usize;
        let mut s = quick();
        let e = mbp_enumerate(&t.body, std::slice::from_ref(&t.quantified), &mut s, &MbpOptions::default(), cap).unwrap();
        if e.used_substitution {
            return Ok(());
        }
        prop_assert!(e.complete, "no fixpoint within {} on {}", cap, t.body);
        let lhs = Exists::plain(e.disjunction());
        let rhs = Exists::new(qe.fresh_vars(), qe.matrix.clone());
        match s.is_equivalent(&lhs, &rhs) {
            Ok(same) => prop_assert!(same),
            Err(_) => {
                let spec = FiniteDomainSpec::new(vec![0, 1], vec![0, 1]).unwrap().with_padding(1).with_margin(1);
                prop_assert!(brute_exists_equal(&qe.fresh_vars(), &e.disjunction(), &qe.matrix, &spec).unwrap().is_none());
            }
        }
    }
}

#[test]
fn worked_mbp_golden() {
    let q = arrchc_core::frontend::parse_quantified_script(&std::fs::read_to_string(corpus("qe/worked-mbp.smt2")).unwrap()).unwrap();
    let mut s = session();
    let mut hints = vec![q.body.clone()];
    hints.extend(q.hints.iter().cloned());
    let m = model_of(&mut s, &Term::and(hints)).unwrap();
    let out = combined_mbp(&MbpTask { quantified: q.quantified.clone(), body: q.body.clone(), model: m.clone() }, &MbpOptions::default()).unwrap();
    assert!(m.eval_bool(&out.result).unwrap());
    assert!(!out.used_substitution);
    let (i2, i3, i4) = (int_var("i2"), int_var("i3"), int_var("i4"));
    let expected = Term::and2(&Term::neq(&i2, &i3), &Term::eq(&i3, &i4));
    assert!(s.is_equivalent_qf(&out.result, &expected).unwrap());
}

#[test]
fn unsatisfiable_body_enumerates_nothing() {
    let a = Var::new("a", Sort::int_array());
    let i = int_var("i");
    let r = Term::rd(&a.term(), &i);
    let body = Term::and2(&Term::gt(&r, &Term::int(0)), &Term::lt(&r, &Term::int(0)));
    let e = mbp_enumerate(&body, &[a], &mut session(), &MbpOptions::default(), 10).unwrap();
    assert!(e.complete && e.results.is_empty());
}

#[test]
fn substitution_fallback_is_not_finite() {
    // ∃i. rd(a,i) > 0 has no quantifier-free equivalent
    let a = arr_var("a");
    let i = Var::new("i", Sort::Int);
    let body = Term::gt(&Term::rd(&a, &i.term()), &Term::int(0));
    let opts = MbpOptions { substitute_only: true, ..MbpOptions::default() };
    let e = mbp_enumerate(&body, &[i], &mut session(), &opts, 15).unwrap();
    assert!(e.used_substitution);
    assert!(!e.complete);
    assert_eq!(e.results.len(), 15);
}
