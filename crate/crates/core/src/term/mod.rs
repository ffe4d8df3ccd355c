//! Sorted terms over Bool, Int and arrays, with partial equalities.
//!
//! Terms are immutable and reference counted. Smart constructors perform the
//! minimal canonicalization the rewriters rely on (flattening of `and`/`or`,
//! unit and absorbing elements, double negation) and nothing else.

mod nnf;
mod print;
mod subst;

pub mod parse;

pub use nnf::{is_nnf, to_nnf};
pub use print::{smtlib_symbol, SmtLibDisplay};
pub use subst::{expand_peq, Subst};

use indexmap::IndexSet;
use std::fmt;
use std::sync::Arc;
use thiserror::Error;

pub type Symbol = Arc<str>;

#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Debug)]
pub enum Sort {
    Bool,
    Int,
    Array(Arc<Sort>, Arc<Sort>),
}

impl Sort {
    /// Array sort. Index and value sorts must be basic.
    pub fn array(index: Sort, value: Sort) -> Sort {
        assert!(index.is_basic(), "array index sort must be Bool or Int");
        assert!(value.is_basic(), "array value sort must be Bool or Int");
        Sort::Array(Arc::new(index), Arc::new(value))
    }

    pub fn int_array() -> Sort {
        Sort::array(Sort::Int, Sort::Int)
    }

    pub fn is_basic(&self) -> bool {
        !matches!(self, Sort::Array(..))
    }

    pub fn is_array(&self) -> bool {
        matches!(self, Sort::Array(..))
    }

    pub fn index(&self) -> Option<&Sort> {
        match self {
            Sort::Array(i, _) => Some(i),
            _ => None,
        }
    }

    pub fn value(&self) -> Option<&Sort> {
        match self {
            Sort::Array(_, v) => Some(v),
            _ => None,
        }
    }
}

impl fmt::Display for Sort {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Sort::Bool => write!(f, "Bool"),
            Sort::Int => write!(f, "Int"),
            Sort::Array(i, v) => write!(f, "(Array {} {})", i, v),
        }
    }
}

#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Debug)]
pub struct Var {
    pub name: Symbol,
    pub sort: Sort,
}

impl Var {
    pub fn new(name: &str, sort: Sort) -> Var {
        Var { name: Arc::from(name), sort }
    }

    pub fn term(&self) -> Term {
        Term::var(self.clone())
    }

    /// Same sort, new name.
    pub fn renamed(&self, name: &str) -> Var {
        Var::new(name, self.sort.clone())
    }
}

impl fmt::Display for Var {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", smtlib_symbol(&self.name))
    }
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum TermError {
    #[error("sort mismatch in {op}: {detail}")]
    Sort { op: &'static str, detail: String },
    #[error("non-linear term: {0}")]
    NonLinear(String),
    #[error("divisor must be positive, got {0}")]
    Divisor(i64),
}

fn sort_err(op: &'static str, detail: String) -> TermError {
    TermError::Sort { op, detail }
}

#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Debug)]
pub enum Kind {
    Var(Var),
    Int(i64),
    Bool(bool),
    Add(Vec<Term>),
    /// Multiplication by a constant.
    Mul(i64, Term),
    /// `d | t` with constant `d > 0`.
    Divides(i64, Term),
    Lt(Term, Term),
    Le(Term, Term),
    Eq(Term, Term),
    And(Vec<Term>),
    Or(Vec<Term>),
    Not(Term),
    Ite(Term, Term, Term),
    Rd(Term, Term),
    Wr(Term, Term, Term),
    /// Arrays agree everywhere except possibly at the listed indices.
    Peq(Term, Term, Vec<Term>),
}

#[derive(PartialEq, Eq, Hash, PartialOrd, Ord, Debug)]
struct Node {
    kind: Kind,
    sort: Sort,
    size: usize,
}

/// An immutable sorted term. Formulas are terms of sort Bool.
#[derive(Clone, Eq, Hash, PartialOrd, Ord, Debug)]
pub struct Term(Arc<Node>);

impl PartialEq for Term {
    fn eq(&self, other: &Term) -> bool {
        Arc::ptr_eq(&self.0, &other.0) || self.0 == other.0
    }
}

impl Term {
    fn mk(kind: Kind, sort: Sort) -> Term {
        let size = 1 + kind_children(&kind).iter().map(|c| c.size()).sum::<usize>();
        Term(Arc::new(Node { kind, sort, size }))
    }

    pub fn kind(&self) -> &Kind {
        &self.0.kind
    }

    pub fn sort(&self) -> &Sort {
        &self.0.sort
    }

    /// Number of nodes in the term tree.
    pub fn size(&self) -> usize {
        self.0.size
    }

    pub fn ptr_id(&self) -> usize {
        Arc::as_ptr(&self.0) as usize
    }

    pub fn children(&self) -> Vec<&Term> {
        kind_children(&self.0.kind)
    }

    pub fn is_true(&self) -> bool {
        matches!(self.kind(), Kind::Bool(true))
    }

    pub fn is_false(&self) -> bool {
        matches!(self.kind(), Kind::Bool(false))
    }

    pub fn is_bool(&self) -> bool {
        *self.sort() == Sort::Bool
    }

    pub fn as_var(&self) -> Option<&Var> {
        match self.kind() {
            Kind::Var(v) => Some(v),
            _ => None,
        }
    }

    pub fn as_int(&self) -> Option<i64> {
        match self.kind() {
            Kind::Int(n) => Some(*n),
            _ => None,
        }
    }

    // ---- leaves ----

    pub fn var(v: Var) -> Term {
        let sort = v.sort.clone();
        Term::mk(Kind::Var(v), sort)
    }

    pub fn new_var(name: &str, sort: Sort) -> Term {
        Term::var(Var::new(name, sort))
    }

    pub fn int(n: i64) -> Term {
        Term::mk(Kind::Int(n), Sort::Int)
    }

    pub fn bool(b: bool) -> Term {
        Term::mk(Kind::Bool(b), Sort::Bool)
    }

    pub fn tt() -> Term {
        Term::bool(true)
    }

    pub fn ff() -> Term {
        Term::bool(false)
    }

    // ---- arithmetic ----

    pub fn try_add(args: Vec<Term>) -> Result<Term, TermError> {
        for a in &args {
            if *a.sort() != Sort::Int {
                return Err(sort_err("+", format!("{} is not Int", a)));
            }
        }
        Ok(match args.len() {
            0 => Term::int(0),
            1 => args.into_iter().next().unwrap(),
            _ => Term::mk(Kind::Add(args), Sort::Int),
        })
    }

    pub fn add(args: Vec<Term>) -> Term {
        Term::try_add(args).unwrap()
    }

    pub fn plus(a: &Term, b: &Term) -> Term {
        Term::add(vec![a.clone(), b.clone()])
    }

    pub fn try_mul(c: i64, t: Term) -> Result<Term, TermError> {
        if *t.sort() != Sort::Int {
            return Err(sort_err("*", format!("{} is not Int", t)));
        }
        if c == 1 {
            return Ok(t);
        }
        if let Kind::Int(n) = t.kind() {
            return Ok(Term::int(c.wrapping_mul(*n)));
        }
        Ok(Term::mk(Kind::Mul(c, t), Sort::Int))
    }

    pub fn mul(c: i64, t: &Term) -> Term {
        Term::try_mul(c, t.clone()).unwrap()
    }

    pub fn neg(t: &Term) -> Term {
        Term::mul(-1, t)
    }

    pub fn sub(a: &Term, b: &Term) -> Term {
        Term::add(vec![a.clone(), Term::neg(b)])
    }

    pub fn try_divides(d: i64, t: Term) -> Result<Term, TermError> {
        if d <= 0 {
            return Err(TermError::Divisor(d));
        }
        if *t.sort() != Sort::Int {
            return Err(sort_err("divisible", format!("{} is not Int", t)));
        }
        if d == 1 {
            return Ok(Term::tt());
        }
        Ok(Term::mk(Kind::Divides(d, t), Sort::Bool))
    }

    pub fn divides(d: i64, t: &Term) -> Term {
        Term::try_divides(d, t.clone()).unwrap()
    }

    fn int_pair(op: &'static str, a: &Term, b: &Term) -> Result<(), TermError> {
        if *a.sort() != Sort::Int || *b.sort() != Sort::Int {
            return Err(sort_err(op, format!("{} and {} must be Int", a, b)));
        }
        Ok(())
    }

    pub fn try_lt(a: Term, b: Term) -> Result<Term, TermError> {
        Term::int_pair("<", &a, &b)?;
        Ok(Term::mk(Kind::Lt(a, b), Sort::Bool))
    }

    pub fn try_le(a: Term, b: Term) -> Result<Term, TermError> {
        Term::int_pair("<=", &a, &b)?;
        Ok(Term::mk(Kind::Le(a, b), Sort::Bool))
    }

    pub fn lt(a: &Term, b: &Term) -> Term {
        Term::try_lt(a.clone(), b.clone()).unwrap()
    }

    pub fn le(a: &Term, b: &Term) -> Term {
        Term::try_le(a.clone(), b.clone()).unwrap()
    }

    pub fn gt(a: &Term, b: &Term) -> Term {
        Term::lt(b, a)
    }

    pub fn ge(a: &Term, b: &Term) -> Term {
        Term::le(b, a)
    }

    // ---- equality and Boolean structure ----

    pub fn try_eq(a: Term, b: Term) -> Result<Term, TermError> {
        if a.sort() != b.sort() {
            return Err(sort_err("=", format!("{} : {} vs {} : {}", a, a.sort(), b, b.sort())));
        }
        Ok(Term::mk(Kind::Eq(a, b), Sort::Bool))
    }

    pub fn eq(a: &Term, b: &Term) -> Term {
        Term::try_eq(a.clone(), b.clone()).unwrap()
    }

    pub fn neq(a: &Term, b: &Term) -> Term {
        Term::not(&Term::eq(a, b))
    }

    fn nary(args: Vec<Term>, conj: bool) -> Term {
        let mut out: IndexSet<Term> = IndexSet::new();
        for a in args {
            assert!(a.is_bool(), "Boolean connective over non-Bool term {}", a);
            match a.kind() {
                Kind::Bool(b) if *b == conj => {}
                Kind::Bool(_) => return Term::bool(!conj),
                Kind::And(xs) if conj => out.extend(xs.iter().cloned()),
                Kind::Or(xs) if !conj => out.extend(xs.iter().cloned()),
                _ => {
                    out.insert(a);
                }
            }
        }
        match out.len() {
            0 => Term::bool(conj),
            1 => out.into_iter().next().unwrap(),
            _ => {
                let v: Vec<Term> = out.into_iter().collect();
                Term::mk(if conj { Kind::And(v) } else { Kind::Or(v) }, Sort::Bool)
            }
        }
    }

    pub fn and(args: Vec<Term>) -> Term {
        Term::nary(args, true)
    }

    pub fn or(args: Vec<Term>) -> Term {
        Term::nary(args, false)
    }

    pub fn and2(a: &Term, b: &Term) -> Term {
        Term::and(vec![a.clone(), b.clone()])
    }

    pub fn or2(a: &Term, b: &Term) -> Term {
        Term::or(vec![a.clone(), b.clone()])
    }

    pub fn try_not(a: Term) -> Result<Term, TermError> {
        if !a.is_bool() {
            return Err(sort_err("not", format!("{} is not Bool", a)));
        }
        Ok(match a.kind() {
            Kind::Bool(b) => Term::bool(!b),
            Kind::Not(x) => x.clone(),
            _ => Term::mk(Kind::Not(a), Sort::Bool),
        })
    }

    pub fn not(a: &Term) -> Term {
        Term::try_not(a.clone()).unwrap()
    }

    pub fn implies(a: &Term, b: &Term) -> Term {
        Term::or(vec![Term::not(a), b.clone()])
    }

    pub fn try_ite(c: Term, t: Term, e: Term) -> Result<Term, TermError> {
        if !c.is_bool() {
            return Err(sort_err("ite", format!("condition {} is not Bool", c)));
        }
        if t.sort() != e.sort() {
            return Err(sort_err("ite", format!("branches {} and {} differ in sort", t, e)));
        }
        let sort = t.sort().clone();
        Ok(Term::mk(Kind::Ite(c, t, e), sort))
    }

    pub fn ite(c: &Term, t: &Term, e: &Term) -> Term {
        Term::try_ite(c.clone(), t.clone(), e.clone()).unwrap()
    }

    // ---- arrays ----

    pub fn try_rd(a: Term, i: Term) -> Result<Term, TermError> {
        let (idx, val) = match a.sort() {
            Sort::Array(i, v) => (i.clone(), v.clone()),
            s => return Err(sort_err("select", format!("{} has non-array sort {}", a, s))),
        };
        if *i.sort() != *idx {
            return Err(sort_err("select", format!("index {} is not {}", i, idx)));
        }
        Ok(Term::mk(Kind::Rd(a, i), (*val).clone()))
    }

    pub fn rd(a: &Term, i: &Term) -> Term {
        Term::try_rd(a.clone(), i.clone()).unwrap()
    }

    pub fn try_wr(a: Term, i: Term, v: Term) -> Result<Term, TermError> {
        let (idx, val) = match a.sort() {
            Sort::Array(i, v) => (i.clone(), v.clone()),
            s => return Err(sort_err("store", format!("{} has non-array sort {}", a, s))),
        };
        if *i.sort() != *idx {
            return Err(sort_err("store", format!("index {} is not {}", i, idx)));
        }
        if *v.sort() != *val {
            return Err(sort_err("store", format!("value {} is not {}", v, val)));
        }
        let sort = a.sort().clone();
        Ok(Term::mk(Kind::Wr(a, i, v), sort))
    }

    pub fn wr(a: &Term, i: &Term, v: &Term) -> Term {
        Term::try_wr(a.clone(), i.clone(), v.clone()).unwrap()
    }

    /// Nested writes `wr(..wr(a, i1, v1).., in, vn)`.
    pub fn wr_all(a: &Term, idx: &[Term], vals: &[Term]) -> Term {
        assert_eq!(idx.len(), vals.len());
        idx.iter().zip(vals).fold(a.clone(), |acc, (i, v)| Term::wr(&acc, i, v))
    }

    pub fn try_peq(a: Term, b: Term, idx: Vec<Term>) -> Result<Term, TermError> {
        if !a.sort().is_array() || a.sort() != b.sort() {
            return Err(sort_err("peq", format!("{} and {} must share an array sort", a, b)));
        }
        let isort = a.sort().index().unwrap().clone();
        for i in &idx {
            if *i.sort() != isort {
                return Err(sort_err("peq", format!("excluded index {} is not {}", i, isort)));
            }
        }
        if a == b {
            return Ok(Term::tt());
        }
        let idx: IndexSet<Term> = idx.into_iter().collect();
        Ok(Term::mk(Kind::Peq(a, b, idx.into_iter().collect()), Sort::Bool))
    }

    pub fn peq(a: &Term, b: &Term, idx: &[Term]) -> Term {
        Term::try_peq(a.clone(), b.clone(), idx.to_vec()).unwrap()
    }

    // ---- traversal ----

    /// Free variables in order of first occurrence.
    pub fn free_vars(&self) -> IndexSet<Var> {
        let mut out = IndexSet::new();
        let mut seen = std::collections::HashSet::new();
        fn go(t: &Term, out: &mut IndexSet<Var>, seen: &mut std::collections::HashSet<usize>) {
            if !seen.insert(t.ptr_id()) {
                return;
            }
            if let Kind::Var(v) = t.kind() {
                out.insert(v.clone());
            }
            for c in t.children() {
                go(c, out, seen);
            }
        }
        go(self, &mut out, &mut seen);
        out
    }

    pub fn contains_var(&self, v: &Var) -> bool {
        self.any(&mut |t| matches!(t.kind(), Kind::Var(w) if w == v))
    }

    pub fn contains_any(&self, vs: &std::collections::HashSet<Var>) -> bool {
        !vs.is_empty() && self.any(&mut |t| matches!(t.kind(), Kind::Var(w) if vs.contains(w)))
    }

    /// Does some subterm (pre-order) satisfy `p`?
    pub fn any(&self, p: &mut dyn FnMut(&Term) -> bool) -> bool {
        if p(self) {
            return true;
        }
        self.children().into_iter().any(|c| c.any(p))
    }

    /// Visit every subterm in post-order (children left to right first).
    pub fn visit_post(&self, f: &mut dyn FnMut(&Term)) {
        for c in self.children() {
            c.visit_post(f);
        }
        f(self);
    }

    /// Rebuild this node over new children through the smart constructors.
    pub fn with_children(&self, ch: Vec<Term>) -> Term {
        let mut it = ch.into_iter();
        let mut next = || it.next().expect("child count");
        match self.kind() {
            Kind::Var(_) | Kind::Int(_) | Kind::Bool(_) => self.clone(),
            Kind::Add(xs) => Term::add((0..xs.len()).map(|_| next()).collect()),
            Kind::Mul(c, _) => Term::mul(*c, &next()),
            Kind::Divides(d, _) => Term::divides(*d, &next()),
            Kind::Lt(..) => {
                let a = next();
                Term::lt(&a, &next())
            }
            Kind::Le(..) => {
                let a = next();
                Term::le(&a, &next())
            }
            Kind::Eq(..) => {
                let a = next();
                Term::eq(&a, &next())
            }
            Kind::And(xs) => Term::and((0..xs.len()).map(|_| next()).collect()),
            Kind::Or(xs) => Term::or((0..xs.len()).map(|_| next()).collect()),
            Kind::Not(_) => Term::not(&next()),
            Kind::Ite(..) => {
                let c = next();
                let t = next();
                Term::ite(&c, &t, &next())
            }
            Kind::Rd(..) => {
                let a = next();
                Term::rd(&a, &next())
            }
            Kind::Wr(..) => {
                let a = next();
                let i = next();
                Term::wr(&a, &i, &next())
            }
            Kind::Peq(_, _, idx) => {
                let a = next();
                let b = next();
                let idx: Vec<Term> = (0..idx.len()).map(|_| next()).collect();
                Term::peq(&a, &b, &idx)
            }
        }
    }

    /// Bottom-up rewrite: `f` sees each node after its children were rewritten;
    /// returning `None` keeps the rebuilt node.
    pub fn rewrite_bottom_up(&self, f: &mut dyn FnMut(&Term) -> Option<Term>) -> Term {
        let mut memo = std::collections::HashMap::new();
        self.rewrite_memo(f, &mut memo)
    }

    fn rewrite_memo(
        &self,
        f: &mut dyn FnMut(&Term) -> Option<Term>,
        memo: &mut std::collections::HashMap<usize, Term>,
    ) -> Term {
        if let Some(t) = memo.get(&self.ptr_id()) {
            return t.clone();
        }
        let ch = self.children();
        let rebuilt = if ch.is_empty() {
            self.clone()
        } else {
            let new: Vec<Term> = ch.iter().map(|c| c.rewrite_memo(f, memo)).collect();
            if new.iter().zip(&ch).all(|(n, o)| Arc::ptr_eq(&n.0, &o.0)) {
                self.clone()
            } else {
                self.with_children(new)
            }
        };
        let out = f(&rebuilt).unwrap_or(rebuilt);
        memo.insert(self.ptr_id(), out.clone());
        out
    }

    /// Replace every occurrence of `from` (structurally) by `to`.
    pub fn replace(&self, from: &Term, to: &Term) -> Term {
        self.rewrite_top_down(&mut |t| if t == from { Some(to.clone()) } else { None })
    }

    /// Top-down rewrite: if `f` returns a replacement the subtree is not
    /// descended into.
    pub fn rewrite_top_down(&self, f: &mut dyn FnMut(&Term) -> Option<Term>) -> Term {
        if let Some(t) = f(self) {
            return t;
        }
        let ch = self.children();
        if ch.is_empty() {
            return self.clone();
        }
        let new: Vec<Term> = ch.iter().map(|c| c.rewrite_top_down(f)).collect();
        if new.iter().zip(&ch).all(|(n, o)| Arc::ptr_eq(&n.0, &o.0)) {
            self.clone()
        } else {
            self.with_children(new)
        }
    }

    /// Top-level conjuncts.
    pub fn conjuncts(&self) -> Vec<Term> {
        match self.kind() {
            Kind::And(xs) => xs.clone(),
            Kind::Bool(true) => vec![],
            _ => vec![self.clone()],
        }
    }

    /// Top-level disjuncts.
    pub fn disjuncts(&self) -> Vec<Term> {
        match self.kind() {
            Kind::Or(xs) => xs.clone(),
            Kind::Bool(false) => vec![],
            _ => vec![self.clone()],
        }
    }

    /// Atom or negated atom.
    pub fn is_literal(&self) -> bool {
        match self.kind() {
            Kind::And(_) | Kind::Or(_) => false,
            Kind::Not(x) => !matches!(x.kind(), Kind::And(_) | Kind::Or(_) | Kind::Not(_)),
            _ => true,
        }
    }

    /// Array-sorted subterms in post-order, deduplicated.
    pub fn array_subterms(&self) -> IndexSet<Term> {
        let mut out = IndexSet::new();
        self.visit_post(&mut |t| {
            if t.sort().is_array() {
                out.insert(t.clone());
            }
        });
        out
    }
}

fn kind_children(k: &Kind) -> Vec<&Term> {
    match k {
        Kind::Var(_) | Kind::Int(_) | Kind::Bool(_) => vec![],
        Kind::Add(xs) | Kind::And(xs) | Kind::Or(xs) => xs.iter().collect(),
        Kind::Mul(_, t) | Kind::Divides(_, t) | Kind::Not(t) => vec![t],
        Kind::Lt(a, b) | Kind::Le(a, b) | Kind::Eq(a, b) | Kind::Rd(a, b) => vec![a, b],
        Kind::Ite(a, b, c) | Kind::Wr(a, b, c) => vec![a, b, c],
        Kind::Peq(a, b, idx) => {
            let mut v = vec![a, b];
            v.extend(idx.iter());
            v
        }
    }
}

/// Generator of fresh names with a fixed prefix.
#[derive(Clone, Debug)]
pub struct FreshNames {
    prefix: String,
    next: usize,
}

impl FreshNames {
    pub fn new(prefix: &str) -> FreshNames {
        FreshNames { prefix: prefix.to_string(), next: 0 }
    }

    pub fn fresh(&mut self, sort: Sort) -> Var {
        let v = Var::new(&format!("{}{}", self.prefix, self.next), sort);
        self.next += 1;
        v
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn iv(n: &str) -> Term {
        Term::new_var(n, Sort::Int)
    }

    fn av(n: &str) -> Term {
        Term::new_var(n, Sort::int_array())
    }

    #[test]
    fn and_units_and_flattening() {
        let p = Term::new_var("p", Sort::Bool);
        let q = Term::new_var("q", Sort::Bool);
        assert_eq!(Term::and(vec![Term::tt(), p.clone()]), p);
        assert_eq!(Term::and(vec![Term::ff(), p.clone()]), Term::ff());
        let nested = Term::and(vec![p.clone(), Term::and2(&q, &p)]);
        assert_eq!(nested.conjuncts(), vec![p.clone(), q.clone()]);
        assert_eq!(Term::or(vec![]), Term::ff());
    }

    #[test]
    fn double_negation_folds() {
        let p = Term::new_var("p", Sort::Bool);
        assert_eq!(Term::not(&Term::not(&p)), p);
    }

    #[test]
    fn trivial_peq_is_true() {
        let a = av("a");
        assert_eq!(Term::peq(&a, &a, &[]), Term::tt());
        let i = iv("i");
        match Term::peq(&a, &av("b"), &[i.clone(), i.clone()]).kind() {
            Kind::Peq(_, _, idx) => assert_eq!(idx.len(), 1),
            _ => panic!(),
        }
    }

    #[test]
    fn rd_over_wr_is_not_reduced() {
        let a = av("a");
        let (i, v) = (iv("i"), iv("v"));
        let t = Term::rd(&Term::wr(&a, &i, &v), &i);
        assert!(matches!(t.kind(), Kind::Rd(..)));
    }

    #[test]
    fn sort_errors() {
        assert!(Term::try_rd(iv("x"), iv("i")).is_err());
        assert!(Term::try_eq(iv("x"), av("a")).is_err());
        assert!(Term::try_wr(av("a"), Term::tt(), iv("v")).is_err());
        assert!(Term::try_divides(0, iv("x")).is_err());
    }

    #[test]
    fn free_vars_order() {
        let (a, i, x) = (av("a"), iv("i"), iv("x"));
        let t = Term::plus(&Term::rd(&a, &i), &x);
        let names: Vec<String> = t.free_vars().iter().map(|v| v.name.to_string()).collect();
        assert_eq!(names, ["a", "i", "x"]);
        assert!(Term::tt().free_vars().is_empty());
        let w = Term::wr(&a, &i, &Term::rd(&a, &iv("j")));
        let names: Vec<String> = w.free_vars().iter().map(|v| v.name.to_string()).collect();
        assert_eq!(names, ["a", "i", "j"]);
    }

    #[test]
    fn sizes() {
        let t = Term::lt(&iv("x"), &Term::int(3));
        assert_eq!(t.size(), 3);
    }
}
