#![allow(dead_code)]

use arrchc_core::smt::Session;
use arrchc_core::term::{Sort, Term, Var};
use proptest::prelude::*;
use std::path::PathBuf;

pub fn int_var(n: &str) -> Term {
    Term::new_var(n, Sort::Int)
}

pub fn arr_var(n: &str) -> Term {
    Term::new_var(n, Sort::int_array())
}

pub fn corpus(sub: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../corpus").join(sub)
}

pub fn session() -> Session {
    Session::default_session().expect("z3 on PATH")
}

pub fn vars() -> Vec<Var> {
    ["x", "y", "i", "j"].iter().map(|n| Var::new(n, Sort::Int)).chain(
        ["a", "b"].iter().map(|n| Var::new(n, Sort::int_array())),
    ).chain(std::iter::once(Var::new("p", Sort::Bool))).collect()
}

fn index() -> impl Strategy<Value = Term> {
    prop_oneof![Just(int_var("i")), Just(int_var("j")), (-1i64..3).prop_map(Term::int)]
}

pub fn array() -> impl Strategy<Value = Term> {
    let leaf = prop_oneof![Just(arr_var("a")), Just(arr_var("b"))];
    leaf.prop_recursive(2, 6, 1, |inner| {
        (inner, index(), int_leaf()).prop_map(|(a, i, v)| Term::wr(&a, &i, &v))
    })
}

fn int_leaf() -> impl Strategy<Value = Term> {
    prop_oneof![Just(int_var("x")), Just(int_var("y")), (-3i64..4).prop_map(Term::int)]
}

pub fn int_term() -> impl Strategy<Value = Term> {
    let leaf = prop_oneof![
        3 => int_leaf(),
        1 => (array(), index()).prop_map(|(a, i)| Term::rd(&a, &i)),
    ];
    leaf.prop_recursive(2, 6, 2, |inner| {
        prop_oneof![
            (inner.clone(), inner.clone()).prop_map(|(a, b)| Term::plus(&a, &b)),
            (-2i64..3, inner).prop_map(|(c, t)| Term::mul(c, &t)),
        ]
    })
}

pub fn atom() -> impl Strategy<Value = Term> {
    prop_oneof![
        (int_term(), int_term()).prop_map(|(a, b)| Term::lt(&a, &b)),
        (int_term(), int_term()).prop_map(|(a, b)| Term::le(&a, &b)),
        (int_term(), int_term()).prop_map(|(a, b)| Term::eq(&a, &b)),
        (array(), array()).prop_map(|(a, b)| Term::eq(&a, &b)),
        (array(), array(), prop::collection::vec(index(), 0..3)).prop_map(|(a, b, ix)| Term::peq(&a, &b, &ix)),
        Just(Term::new_var("p", Sort::Bool)),
        (2i64..4, int_term()).prop_map(|(d, t)| Term::divides(d, &t)),
    ]
}

/// Formulas of at most `nodes` nodes.
pub fn formula(nodes: usize) -> impl Strategy<Value = Term> {
    atom()
        .prop_recursive(3, 12, 3, |inner| {
            prop_oneof![
                prop::collection::vec(inner.clone(), 2..3).prop_map(Term::and),
                prop::collection::vec(inner.clone(), 2..3).prop_map(Term::or),
                inner.clone().prop_map(|t| Term::not(&t)),
                (inner.clone(), inner.clone()).prop_map(|(a, b)| Term::implies(&a, &b)),
                (inner.clone(), inner.clone(), inner).prop_map(|(c, a, b)| Term::ite(&c, &a, &b)),
            ]
        })
        .prop_filter("size bound", move |t| t.size() <= nodes)
}
