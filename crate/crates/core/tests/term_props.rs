mod common;

use arrchc_core::model::{ArrayValue, Evaluator, IndexDomain, Model, Value};
use arrchc_core::term::parse::{parse_term_str, Env};
use arrchc_core::term::{expand_peq, to_nnf, Kind, Sort, Subst, Term};
use common::*;
use proptest::prelude::*;
use std::sync::Arc;

proptest! {
    #![proptest_config(ProptestConfig::with_cases(300))]

    #[test]
    fn print_parse_round_trip(t in formula(40)) {
        let mut env = Env::with_vars(&vars());
        let back = parse_term_str(&t.to_string(), &mut env).unwrap();
        prop_assert_eq!(back, t);
    }

    #[test]
    fn substitution_is_homomorphic(t in formula(30), s in int_term()) {
        let x = arrchc_core::term::Var::new("x", Sort::Int);
        let sub = Subst::single(&x, &s);
        let whole = sub.apply(&t);
        let parts: Vec<Term> = t.children().into_iter().map(|c| sub.apply(c)).collect();
        if t.as_var().is_none() {
            prop_assert_eq!(whole, t.with_children(parts));
        }
    }

    #[test]
    fn nnf_is_negation_normal(t in formula(20)) {
        prop_assert!(arrchc_core::term::is_nnf(&to_nnf(&t)));
    }
}

fn small_models(points: &[i64]) -> Vec<Model> {
    let ints = [-1i64, 0, 1];
    let arrays: Vec<Value> = {
        let mut out = vec![];
        let n = 2usize.pow(points.len() as u32);
        for code in 0..n {
            let g = points.iter().enumerate().map(|(k, p)| (Value::Int(*p), Value::Int(((code >> k) & 1) as i64)));
            out.push(Value::Array(Arc::new(ArrayValue::from_graph(Sort::int_array(), Value::Int(0), g))));
        }
        out
    };
    let vs = vars();
    let mut models = vec![];
    for (k, a) in arrays.iter().enumerate() {
        let b = &arrays[(k * 7 + 3) % arrays.len()];
        for (xi, x) in ints.iter().enumerate() {
            for p in points {
                let m = Model::new()
                    .with(&vs[0], Value::Int(*x))
                    .with(&vs[1], Value::Int(ints[(xi + 1) % 3]))
                    .with(&vs[2], Value::Int(*p))
                    .with(&vs[3], Value::Int(points[0]))
                    .with(&vs[4], a.clone())
                    .with(&vs[5], b.clone())
                    .with(&vs[6], Value::Bool(xi % 2 == 0));
                models.push(m);
            }
        }
    }
    models
}

fn has_peq(t: &Term) -> bool {
    t.any(&mut |n| matches!(n.kind(), Kind::Peq(..)))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(100))]

    #[test]
    fn expand_peq_agrees_over_finite_domains(t in formula(25).prop_filter("has peq", has_peq), n in 1usize..4) {
        let points: Vec<i64> = (0..n as i64).collect();
        let e = expand_peq(&t);
        // index literals outside the domain are folded into it
        let fold = |t: &Term| t.rewrite_bottom_up(&mut |s| match s.as_int() {
            Some(c) if s.sort() == &Sort::Int && !points.contains(&c) => Some(Term::int(c.rem_euclid(n as i64))),
            _ => None,
        });
        let (t, e) = (fold(&t), fold(&e));
        for m in small_models(&points) {
            let ev = Evaluator::with_domain(&m, IndexDomain::Finite(points.clone()));
            prop_assert_eq!(ev.eval_bool(&t).unwrap(), ev.eval_bool(&e).unwrap());
        }
    }

    #[test]
    fn eval_of_expanded_peq_matches(t in formula(25).prop_filter("has peq", has_peq)) {
        let e = expand_peq(&t);
        for m in small_models(&[0, 1, 2]) {
            prop_assert_eq!(m.eval_bool(&t).unwrap(), m.eval_bool(&e).unwrap());
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(40))]

    #[test]
    fn nnf_is_equivalent_by_backend(t in formula(20)) {
        let mut s = session();
        prop_assert!(s.is_equivalent_qf(&t, &to_nnf(&t)).unwrap());
    }

    #[test]
    fn expand_peq_is_equivalent_by_backend(t in formula(20).prop_filter("has peq", has_peq)) {
        let mut s = session();
        prop_assert!(s.is_equivalent_qf(&t, &expand_peq(&t)).unwrap());
    }

    #[test]
    fn backend_models_satisfy_formulas(t in formula(20)) {
        let mut s = session();
        if let arrchc_core::smt::SatResult::Sat(m) = s.check_one(&t).unwrap() {
            let ev = Evaluator::new(&m);
            prop_assert!(ev.eval_bool(&t).unwrap());
            prop_assert!(ev.steps() <= 64 * t.size() + 64);
        }
    }
}
