//! Finite models and evaluation.

use crate::sexp::{parse_all, Sexp, SexpKind};
use crate::term::parse::parse_sort;
use crate::term::{Kind, Sort, Term, Var};
use std::cell::Cell;
use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::fmt;
use std::sync::Arc;
use thiserror::Error;

#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Value {
    Bool(bool),
    Int(i64),
    Array(Arc<ArrayValue>),
}

/// A function from indices to values: a default plus finitely many
/// exceptions. The graph never maps an index to the default.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct ArrayValue {
    sort: Sort,
    default: Value,
    graph: BTreeMap<Value, Value>,
}

impl ArrayValue {
    pub fn constant(sort: Sort, default: Value) -> ArrayValue {
        ArrayValue { sort, default, graph: BTreeMap::new() }
    }

    pub fn from_graph(sort: Sort, default: Value, graph: impl IntoIterator<Item = (Value, Value)>) -> ArrayValue {
        let mut a = ArrayValue::constant(sort, default);
        for (i, v) in graph {
            a = a.store(i, v);
        }
        a
    }

    pub fn sort(&self) -> &Sort {
        &self.sort
    }

    pub fn default_value(&self) -> &Value {
        &self.default
    }

    pub fn graph(&self) -> &BTreeMap<Value, Value> {
        &self.graph
    }

    pub fn select(&self, i: &Value) -> Value {
        self.graph.get(i).cloned().unwrap_or_else(|| self.default.clone())
    }

    pub fn store(&self, i: Value, v: Value) -> ArrayValue {
        let mut out = self.clone();
        if v == self.default {
            out.graph.remove(&i);
        } else {
            out.graph.insert(i, v);
        }
        out
    }
}

impl Value {
    pub fn as_bool(&self) -> Option<bool> {
        match self {
            Value::Bool(b) => Some(*b),
            _ => None,
        }
    }

    pub fn as_int(&self) -> Option<i64> {
        match self {
            Value::Int(n) => Some(*n),
            _ => None,
        }
    }

    pub fn as_array(&self) -> Option<&ArrayValue> {
        match self {
            Value::Array(a) => Some(a),
            _ => None,
        }
    }

    /// Literal term for a basic value.
    pub fn to_term(&self) -> Option<Term> {
        match self {
            Value::Bool(b) => Some(Term::bool(*b)),
            Value::Int(n) => Some(Term::int(*n)),
            Value::Array(_) => None,
        }
    }

    pub fn default_for(sort: &Sort) -> Value {
        match sort {
            Sort::Bool => Value::Bool(false),
            Sort::Int => Value::Int(0),
            Sort::Array(_, v) => Value::Array(Arc::new(ArrayValue::constant(sort.clone(), Value::default_for(v)))),
        }
    }

    pub fn has_sort(&self, sort: &Sort) -> bool {
        match (self, sort) {
            (Value::Bool(_), Sort::Bool) | (Value::Int(_), Sort::Int) => true,
            (Value::Array(a), s) => a.sort == *s,
            _ => false,
        }
    }
}

impl fmt::Display for Value {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Value::Bool(b) => write!(f, "{}", b),
            Value::Int(n) if *n < 0 => write!(f, "(- {})", n.unsigned_abs()),
            Value::Int(n) => write!(f, "{}", n),
            Value::Array(a) => {
                for _ in &a.graph {
                    write!(f, "(store ")?;
                }
                write!(f, "((as const {}) {})", a.sort, a.default)?;
                for (i, v) in &a.graph {
                    write!(f, " {} {})", i, v)?;
                }
                Ok(())
            }
        }
    }
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum EvalError {
    #[error("unassigned variable {0}")]
    Unassigned(String),
    #[error("sort mismatch evaluating {0}")]
    Sort(String),
    #[error("integer overflow evaluating {0}")]
    Overflow(String),
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
#[error("backend protocol error: {0}")]
pub struct ModelError(pub String);

/// How array equality treats indices.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub enum IndexDomain {
    /// Int indices range over all integers.
    #[default]
    Infinite,
    /// Int indices range over exactly these points.
    Finite(Vec<i64>),
}

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct Model {
    assignment: BTreeMap<Var, Value>,
}

impl Model {
    pub fn new() -> Model {
        Model::default()
    }

    pub fn get(&self, v: &Var) -> Option<&Value> {
        self.assignment.get(v)
    }

    pub fn set(&mut self, v: &Var, val: Value) {
        assert!(val.has_sort(&v.sort), "value {} does not match sort of {}", val, v);
        self.assignment.insert(v.clone(), val);
    }

    pub fn with(mut self, v: &Var, val: Value) -> Model {
        self.set(v, val);
        self
    }

    pub fn remove(&mut self, v: &Var) {
        self.assignment.remove(v);
    }

    pub fn vars(&self) -> impl Iterator<Item = &Var> {
        self.assignment.keys()
    }

    pub fn iter(&self) -> impl Iterator<Item = (&Var, &Value)> {
        self.assignment.iter()
    }

    pub fn len(&self) -> usize {
        self.assignment.len()
    }

    pub fn is_empty(&self) -> bool {
        self.assignment.is_empty()
    }

    /// Assign defaults to every unassigned variable in `vars`.
    pub fn complete<'a>(&self, vars: impl IntoIterator<Item = &'a Var>) -> Model {
        let mut m = self.clone();
        for v in vars {
            if !m.assignment.contains_key(v) {
                m.assignment.insert(v.clone(), Value::default_for(&v.sort));
            }
        }
        m
    }

    pub fn restrict<'a>(&self, vars: impl IntoIterator<Item = &'a Var>) -> Model {
        let keep: BTreeSet<&Var> = vars.into_iter().collect();
        Model {
            assignment: self
                .assignment
                .iter()
                .filter(|(v, _)| keep.contains(v))
                .map(|(v, x)| (v.clone(), x.clone()))
                .collect(),
        }
    }

    pub fn eval(&self, t: &Term) -> Result<Value, EvalError> {
        Evaluator::new(self).eval(t)
    }

    pub fn eval_bool(&self, t: &Term) -> Result<bool, EvalError> {
        Evaluator::new(self).eval_bool(t)
    }

    /// Truth of `t`, treating evaluation errors as a bug in the caller.
    pub fn holds(&self, t: &Term) -> bool {
        self.eval_bool(t).unwrap_or_else(|e| panic!("evaluating {}: {}", t, e))
    }
}

impl fmt::Display for Model {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "(")?;
        for (v, x) in &self.assignment {
            writeln!(f, "  (define-fun {} () {} {})", v, v.sort, x)?;
        }
        write!(f, ")")
    }
}

pub struct Evaluator<'m> {
    model: &'m Model,
    domain: IndexDomain,
    steps: Cell<usize>,
}

impl<'m> Evaluator<'m> {
    pub fn new(model: &'m Model) -> Evaluator<'m> {
        Evaluator { model, domain: IndexDomain::Infinite, steps: Cell::new(0) }
    }

    pub fn with_domain(model: &'m Model, domain: IndexDomain) -> Evaluator<'m> {
        Evaluator { model, domain, steps: Cell::new(0) }
    }

    /// Number of term nodes visited so far.
    pub fn steps(&self) -> usize {
        self.steps.get()
    }

    pub fn eval_bool(&self, t: &Term) -> Result<bool, EvalError> {
        self.eval(t)?.as_bool().ok_or_else(|| EvalError::Sort(t.to_string()))
    }

    fn eval_int(&self, t: &Term) -> Result<i64, EvalError> {
        self.eval(t)?.as_int().ok_or_else(|| EvalError::Sort(t.to_string()))
    }

    fn eval_array(&self, t: &Term) -> Result<Arc<ArrayValue>, EvalError> {
        match self.eval(t)? {
            Value::Array(a) => Ok(a),
            _ => Err(EvalError::Sort(t.to_string())),
        }
    }

    pub fn eval(&self, t: &Term) -> Result<Value, EvalError> {
        self.steps.set(self.steps.get() + 1);
        let ovf = || EvalError::Overflow(t.to_string());
        Ok(match t.kind() {
            Kind::Var(v) => {
                let val = self.model.get(v).ok_or_else(|| EvalError::Unassigned(v.name.to_string()))?;
                if !val.has_sort(&v.sort) {
                    return Err(EvalError::Sort(t.to_string()));
                }
                val.clone()
            }
            Kind::Int(n) => Value::Int(*n),
            Kind::Bool(b) => Value::Bool(*b),
            Kind::Add(xs) => {
                let mut acc: i64 = 0;
                for x in xs {
                    acc = acc.checked_add(self.eval_int(x)?).ok_or_else(ovf)?;
                }
                Value::Int(acc)
            }
            Kind::Mul(c, x) => Value::Int(c.checked_mul(self.eval_int(x)?).ok_or_else(ovf)?),
            Kind::Divides(d, x) => Value::Bool(self.eval_int(x)?.rem_euclid(*d) == 0),
            Kind::Lt(a, b) => Value::Bool(self.eval_int(a)? < self.eval_int(b)?),
            Kind::Le(a, b) => Value::Bool(self.eval_int(a)? <= self.eval_int(b)?),
            Kind::Eq(a, b) => {
                if a.sort().is_array() {
                    let (x, y) = (self.eval_array(a)?, self.eval_array(b)?);
                    Value::Bool(self.arrays_agree(&x, &y, &BTreeSet::new()))
                } else {
                    Value::Bool(self.eval(a)? == self.eval(b)?)
                }
            }
            Kind::And(xs) => {
                for x in xs {
                    if !self.eval_bool(x)? {
                        return Ok(Value::Bool(false));
                    }
                }
                Value::Bool(true)
            }
            Kind::Or(xs) => {
                for x in xs {
                    if self.eval_bool(x)? {
                        return Ok(Value::Bool(true));
                    }
                }
                Value::Bool(false)
            }
            Kind::Not(x) => Value::Bool(!self.eval_bool(x)?),
            Kind::Ite(c, a, b) => {
                if self.eval_bool(c)? {
                    self.eval(a)?
                } else {
                    self.eval(b)?
                }
            }
            Kind::Rd(a, i) => {
                let arr = self.eval_array(a)?;
                arr.select(&self.eval(i)?)
            }
            Kind::Wr(a, i, v) => {
                let arr = self.eval_array(a)?;
                Value::Array(Arc::new(arr.store(self.eval(i)?, self.eval(v)?)))
            }
            Kind::Peq(a, b, idx) => {
                let (x, y) = (self.eval_array(a)?, self.eval_array(b)?);
                let mut excl = BTreeSet::new();
                for i in idx {
                    excl.insert(self.eval(i)?);
                }
                Value::Bool(self.arrays_agree(&x, &y, &excl))
            }
        })
    }

    /// Do the arrays agree at every index outside `excl`?
    fn arrays_agree(&self, x: &ArrayValue, y: &ArrayValue, excl: &BTreeSet<Value>) -> bool {
        let points: Vec<Value> = match (x.sort.index(), &self.domain) {
            (Some(Sort::Bool), _) => vec![Value::Bool(false), Value::Bool(true)],
            (_, IndexDomain::Finite(d)) => d.iter().map(|n| Value::Int(*n)).collect(),
            _ => {
                if x.default != y.default {
                    return false;
                }
                x.graph.keys().chain(y.graph.keys()).cloned().collect()
            }
        };
        points.iter().filter(|p| !excl.contains(p)).all(|p| x.select(p) == y.select(p))
    }
}

/// Interpret a backend model or `get-value` response over `vars`, then
/// complete it. Entries for other symbols and for functions are ignored.
pub fn parse_model<'a>(text: &str, vars: impl IntoIterator<Item = &'a Var> + Clone) -> Result<Model, ModelError> {
    let items = parse_all(text).map_err(|e| ModelError(e.to_string()))?;
    let by_name: HashMap<String, &Var> = vars.clone().into_iter().map(|v| (v.name.to_string(), v)).collect();
    let mut m = Model::new();
    let mut entries: Vec<&Sexp> = Vec::new();
    for it in &items {
        match it.list() {
            Some(xs) if it.head() == Some("model") => entries.extend(&xs[1..]),
            Some(_) if it.head() == Some("define-fun") => entries.push(it),
            Some(xs) => entries.extend(xs.iter()),
            None => return Err(ModelError(format!("unexpected model item {}", it))),
        }
    }
    for e in entries {
        let xs = e.list().ok_or_else(|| ModelError(format!("unexpected model entry {}", e)))?;
        let (name, value) = if e.head() == Some("define-fun") {
            if xs.len() != 5 {
                return Err(ModelError(format!("malformed define-fun {}", e)));
            }
            if xs[2].list().map(|a| !a.is_empty()).unwrap_or(true) {
                continue;
            }
            (xs[1].sym().unwrap_or_default().to_string(), &xs[4])
        } else if xs.len() == 2 {
            (xs[0].sym().unwrap_or_default().to_string(), &xs[1])
        } else {
            return Err(ModelError(format!("unexpected model entry {}", e)));
        };
        if let Some(v) = by_name.get(&name) {
            let val = parse_value(value, &v.sort, &mut HashMap::new())?;
            m.set(v, val);
        }
    }
    Ok(m.complete(vars))
}

/// Parse a value expression of the given sort.
pub fn parse_value(s: &Sexp, sort: &Sort, lets: &mut HashMap<String, Value>) -> Result<Value, ModelError> {
    let bad = || ModelError(format!("cannot read {} as a value of sort {}", s, sort));
    match (&s.kind, sort) {
        (SexpKind::Num(n), Sort::Int) => n.parse().map(Value::Int).map_err(|_| bad()),
        (SexpKind::Sym(b), Sort::Bool) if b == "true" || b == "false" => Ok(Value::Bool(b == "true")),
        (SexpKind::Sym(n), _) => lets.get(n).cloned().filter(|v| v.has_sort(sort)).ok_or_else(bad),
        (SexpKind::List(xs), _) => {
            if s.head() == Some("let") && xs.len() == 3 {
                let binds = xs[1].list().ok_or_else(bad)?;
                let mut saved = Vec::new();
                for b in binds {
                    let (n, t) = match b.list() {
                        Some([n, t]) => (n.sym().ok_or_else(bad)?, t),
                        _ => return Err(bad()),
                    };
                    let val = parse_untyped(t, lets)?;
                    saved.push((n.to_string(), lets.insert(n.to_string(), val)));
                }
                let out = parse_value(&xs[2], sort, lets);
                for (n, prev) in saved.into_iter().rev() {
                    match prev {
                        Some(p) => lets.insert(n, p),
                        None => lets.remove(&n),
                    };
                }
                return out;
            }
            match (s.head(), sort) {
                (Some("-"), Sort::Int) if xs.len() == 2 => match parse_value(&xs[1], sort, lets)? {
                    Value::Int(n) => Ok(Value::Int(-n)),
                    _ => Err(bad()),
                },
                (Some("store"), Sort::Array(i, v)) if xs.len() == 4 => {
                    let base = parse_value(&xs[1], sort, lets)?;
                    let idx = parse_value(&xs[2], i, lets)?;
                    let val = parse_value(&xs[3], v, lets)?;
                    Ok(Value::Array(Arc::new(base.as_array().ok_or_else(bad)?.store(idx, val))))
                }
                (Some("lambda"), _) | (Some("_"), _) => Err(ModelError(format!(
                    "unsupported array value form {}",
                    s
                ))),
                (None, Sort::Array(_, v)) if xs.len() == 2 => {
                    // ((as const (Array I V)) d)
                    let h = xs[0].list().ok_or_else(bad)?;
                    if h.len() != 3 || h[0].sym() != Some("as") || h[1].sym() != Some("const") {
                        return Err(bad());
                    }
                    let srt = parse_sort(&h[2]).map_err(|e| ModelError(e.to_string()))?;
                    if srt != *sort {
                        return Err(bad());
                    }
                    let d = parse_value(&xs[1], v, lets)?;
                    Ok(Value::Array(Arc::new(ArrayValue::constant(sort.clone(), d))))
                }
                _ => Err(bad()),
            }
        }
        _ => Err(bad()),
    }
}

fn parse_untyped(s: &Sexp, lets: &mut HashMap<String, Value>) -> Result<Value, ModelError> {
    let basic = [Sort::Int, Sort::Bool];
    let arrays = basic.iter().flat_map(|i| basic.iter().map(|v| Sort::array(i.clone(), v.clone())));
    for sort in basic.iter().cloned().chain(arrays) {
        if let Ok(v) = parse_value(s, &sort, lets) {
            return Ok(v);
        }
    }
    Err(ModelError(format!("cannot read let-bound value {}", s)))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn arr() -> Sort {
        Sort::int_array()
    }

    #[test]
    fn read_over_write_evaluates() {
        let a = Var::new("a", arr());
        let (i, v) = (Var::new("i", Sort::Int), Var::new("v", Sort::Int));
        let m = Model::new().complete([&a]).with(&i, Value::Int(2)).with(&v, Value::Int(9));
        let t = Term::rd(&Term::wr(&a.term(), &i.term(), &v.term()), &i.term());
        assert_eq!(m.eval(&t).unwrap(), Value::Int(9));
    }

    #[test]
    fn peq_compares_outside_exclusions() {
        let (a, b) = (Var::new("a", arr()), Var::new("b", arr()));
        let bv = ArrayValue::from_graph(arr(), Value::Int(0), [(Value::Int(5), Value::Int(1))]);
        let m = Model::new().complete([&a]).with(&b, Value::Array(Arc::new(bv)));
        assert!(m.holds(&Term::peq(&a.term(), &b.term(), &[Term::int(5)])));
        assert!(!m.holds(&Term::peq(&a.term(), &b.term(), &[Term::int(4)])));
        assert!(!m.holds(&Term::eq(&a.term(), &b.term())));
    }

    #[test]
    fn finite_domain_equality() {
        let (a, b) = (Var::new("a", arr()), Var::new("b", arr()));
        let bv = ArrayValue::from_graph(arr(), Value::Int(1), [(Value::Int(0), Value::Int(0))]);
        let m = Model::new().complete([&a]).with(&b, Value::Array(Arc::new(bv)));
        let eq = Term::eq(&a.term(), &b.term());
        assert!(!m.holds(&eq));
        let ev = Evaluator::with_domain(&m, IndexDomain::Finite(vec![0]));
        assert!(ev.eval_bool(&eq).unwrap());
    }

    #[test]
    fn complete_fills_defaults() {
        let x = Var::new("x", Sort::Int);
        let a = Var::new("a", arr());
        let m = Model::new().complete([&x, &a]);
        assert_eq!(m.get(&x), Some(&Value::Int(0)));
        assert_eq!(m.get(&a), Some(&Value::default_for(&arr())));
        let m2 = Model::new().with(&x, Value::Int(3)).complete([&x]);
        assert_eq!(m2.get(&x), Some(&Value::Int(3)));
    }

    #[test]
    fn parses_model_responses() {
        let x = Var::new("x", Sort::Int);
        let a = Var::new("a", arr());
        let p = Var::new("p", Sort::Bool);
        let text = "((define-fun k!0 () Bool true) (define-fun x () Int (- 3)) \
                    (define-fun f ((y Int)) Int y) \
                    (define-fun a () (Array Int Int) (store ((as const (Array Int Int)) 0) 5 1)))";
        let m = parse_model(text, [&x, &a, &p]).unwrap();
        assert_eq!(m.get(&x), Some(&Value::Int(-3)));
        assert_eq!(m.get(&p), Some(&Value::Bool(false)));
        let av = m.get(&a).unwrap().as_array().unwrap();
        assert_eq!(av.select(&Value::Int(5)), Value::Int(1));
        assert_eq!(av.select(&Value::Int(4)), Value::Int(0));
        let m = parse_model("((x 7) (a ((as const (Array Int Int)) 2)))", [&x, &a]).unwrap();
        assert_eq!(m.get(&x), Some(&Value::Int(7)));
        assert!(parse_model("((a (lambda ((i Int)) 0)))", [&a]).is_err());
        assert!(parse_model("((a (_ as-array f)))", [&a]).is_err());
    }

    #[test]
    fn value_display_round_trips() {
        let a = Var::new("a", arr());
        let v = Value::Array(Arc::new(ArrayValue::from_graph(
            arr(),
            Value::Int(0),
            [(Value::Int(1), Value::Int(-2)), (Value::Int(3), Value::Int(4))],
        )));
        let text = format!("((a {}))", v);
        let m = parse_model(&text, [&a]).unwrap();
        assert_eq!(m.get(&a), Some(&v));
    }

    #[test]
    fn eval_step_count_is_linear() {
        let x = Var::new("x", Sort::Int);
        let m = Model::new().with(&x, Value::Int(1));
        let mut t = x.term();
        for k in 0..50 {
            t = Term::plus(&t, &Term::int(k));
        }
        let f = Term::lt(&t, &Term::int(10_000));
        let ev = Evaluator::new(&m);
        assert!(ev.eval_bool(&f).unwrap());
        assert!(ev.steps() <= f.size());
    }

    #[test]
    fn let_bound_arrays() {
        let a = Var::new("a", arr());
        let text = "((define-fun a () (Array Int Int) (let ((a!1 (store ((as const (Array Int Int)) 3) 4 5))) (store a!1 6 7))))";
        let m = parse_model(text, [&a]).unwrap();
        let av = m.get(&a).unwrap().as_array().unwrap().clone();
        assert_eq!(av.select(&Value::Int(4)), Value::Int(5));
        assert_eq!(av.select(&Value::Int(6)), Value::Int(7));
        assert_eq!(av.select(&Value::Int(0)), Value::Int(3));
    }
}
