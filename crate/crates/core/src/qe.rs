//! Quantifier elimination for an existentially quantified array variable.
//!
//! The same rewriting pipeline serves model-based projection: when a model
//! is supplied, every disjunction a rule introduces is resolved against the
//! model on the spot, and the case split keeps only the case the model
//! satisfies.

use crate::model::{Evaluator, IndexDomain, Model, Value};
use crate::term::{to_nnf, FreshNames, Kind, Sort, Subst, Term, Var};
use indexmap::IndexSet;
use std::collections::{BTreeMap, HashSet};
use thiserror::Error;

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum IndexMode {
    /// Index sort is infinite: array disequalities can always be satisfied.
    Infinite,
    /// Index sort is finite; the hint is informational.
    Finite(Option<usize>),
}

#[derive(Clone, Debug)]
pub struct QeTask {
    pub quantified: Var,
    pub body: Term,
    pub index_mode: IndexMode,
}

impl QeTask {
    pub fn new(quantified: Var, body: Term) -> QeTask {
        QeTask { quantified, body, index_mode: IndexMode::Infinite }
    }

    pub fn finite(mut self) -> QeTask {
        self.index_mode = IndexMode::Finite(None);
        self
    }
}

#[derive(Clone, Debug, Default)]
pub struct QeStats {
    pub rule_applications: usize,
    pub per_rule: BTreeMap<&'static str, usize>,
    /// Partial equalities on the eliminated variable after write elimination.
    pub peqs: usize,
    /// Cases produced by the split.
    pub disjuncts: usize,
}

#[derive(Clone, Debug)]
pub struct QeResult {
    pub fresh_value_vars: Vec<Var>,
    pub fresh_index_vars: Vec<Var>,
    pub matrix: Term,
    pub stats: QeStats,
}

impl QeResult {
    pub fn fresh_vars(&self) -> Vec<Var> {
        self.fresh_value_vars.iter().chain(&self.fresh_index_vars).cloned().collect()
    }
}

#[derive(Clone, Debug, Default)]
pub struct QeConfig {
    /// Ceiling on intermediate formula size; zero means the default.
    pub node_budget: usize,
    /// Model mode only: resolve every disjunction, not just introduced ones.
    pub resolve_all: bool,
    /// Record each rewrite for equivalence testing.
    pub record_trace: bool,
}

const DEFAULT_BUDGET: usize = 2_000_000;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum QeError {
    #[error("formula size {size} exceeds the budget of {limit} nodes")]
    Budget { size: usize, limit: usize },
    #[error("{0} is not an array variable")]
    NotArray(String),
    #[error("model does not satisfy the formula")]
    ModelMismatch,
    #[error("internal invariant violated: {0}")]
    Internal(String),
}

/// One recorded rewrite: `exists vars. before` is equivalent to
/// `exists vars. after` (for model mode, `after` entails `before`).
#[derive(Clone, Debug)]
pub struct TraceStep {
    pub rule: &'static str,
    pub vars: Vec<Var>,
    pub before: Term,
    pub after: Term,
}

/// A case of the split before elimination: `body ∧ peq(a,t,ī)? ∧ ⋀¬peq(a,t',ī')`.
#[derive(Clone, Debug)]
pub struct Disjunct {
    pub body: Term,
    pub peq: Option<(Term, Vec<Term>)>,
    pub diseqs: Vec<(Term, Vec<Term>)>,
    /// Factored reads `s = rd(a, t)` used by this case.
    pub reads: Vec<(Var, Term)>,
}

impl Disjunct {
    /// Conjunction ordered as body, partial equality, disequalities, reads.
    pub fn to_formula(&self, a: &Var) -> Term {
        let at = a.term();
        let mut parts = vec![self.body.clone()];
        if let Some((t, idx)) = &self.peq {
            parts.push(Term::peq(&at, t, idx));
        }
        for (t, idx) in &self.diseqs {
            parts.push(Term::not(&Term::peq(&at, t, idx)));
        }
        for (s, t) in &self.reads {
            parts.push(Term::eq(&s.term(), &Term::rd(&at, t)));
        }
        Term::and(parts)
    }
}

/// Branches of a rewrite: the conditions are exhaustive, and under each
/// condition the redex equals its replacement.
struct Step {
    rule: &'static str,
    redex: Term,
    branches: Vec<(Term, Term)>,
}

pub(crate) struct Elim {
    a: Var,
    finite: bool,
    model: Option<Model>,
    domain: IndexDomain,
    values: FreshNames,
    indices: FreshNames,
    pub(crate) fresh_values: Vec<Var>,
    pub(crate) fresh_indices: Vec<Var>,
    pub(crate) stats: QeStats,
    budget: usize,
    resolve_all: bool,
    pub(crate) trace: Option<Vec<TraceStep>>,
}

impl Elim {
    pub(crate) fn new(a: &Var, finite: bool, model: Option<Model>, domain: IndexDomain, cfg: &QeConfig) -> Elim {
        Elim {
            a: a.clone(),
            finite: finite || a.sort.index() == Some(&Sort::Bool),
            model,
            domain,
            values: FreshNames::new("qe!v!"),
            indices: FreshNames::new("qe!i!"),
            fresh_values: vec![],
            fresh_indices: vec![],
            stats: QeStats::default(),
            budget: if cfg.node_budget == 0 { DEFAULT_BUDGET } else { cfg.node_budget },
            resolve_all: cfg.resolve_all,
            trace: if cfg.record_trace { Some(vec![]) } else { None },
        }
    }

    pub(crate) fn into_model(self) -> Option<Model> {
        self.model
    }

    /// Continue fresh numbering after names already in use.
    pub(crate) fn skip_names(&mut self, values: usize, indices: usize) {
        for _ in 0..values {
            self.values.fresh(Sort::Int);
        }
        for _ in 0..indices {
            self.indices.fresh(Sort::Int);
        }
    }

    fn count(&mut self, rule: &'static str) {
        self.stats.rule_applications += 1;
        *self.stats.per_rule.entry(rule).or_insert(0) += 1;
    }

    fn check_budget(&self, t: &Term) -> Result<(), QeError> {
        if t.size() > self.budget {
            return Err(QeError::Budget { size: t.size(), limit: self.budget });
        }
        Ok(())
    }

    fn holds(&self, t: &Term) -> Result<bool, QeError> {
        let m = self.model.as_ref().expect("model mode");
        Evaluator::with_domain(m, self.domain.clone())
            .eval_bool(t)
            .map_err(|e| QeError::Internal(format!("evaluating {}: {}", t, e)))
    }

    fn value_of(&self, t: &Term) -> Result<Value, QeError> {
        let m = self.model.as_ref().expect("model mode");
        Evaluator::with_domain(m, self.domain.clone())
            .eval(t)
            .map_err(|e| QeError::Internal(format!("evaluating {}: {}", t, e)))
    }

    fn record(&mut self, rule: &'static str, vars: Vec<Var>, before: &Term, after: &Term) {
        if let Some(tr) = self.trace.as_mut() {
            tr.push(TraceStep { rule, vars, before: before.clone(), after: after.clone() });
        }
    }

    fn fresh_value(&mut self) -> Var {
        let v = self.fresh_vname(self.a.sort.value().unwrap().clone());
        self.fresh_values.push(v.clone());
        v
    }

    fn fresh_vname(&mut self, sort: Sort) -> Var {
        self.values.fresh(sort)
    }

    // ---------------------------------------------------------------
    // Write elimination

    /// Eliminate writes, array equalities and array `ite` over the target
    /// variables. Works literal by literal on an NNF formula.
    pub(crate) fn elim_wr(&mut self, phi: &Term, targets: &HashSet<Var>) -> Result<Term, QeError> {
        match phi.kind() {
            Kind::And(xs) => {
                let ys = xs.iter().map(|x| self.elim_wr(x, targets)).collect::<Result<Vec<_>, _>>()?;
                Ok(Term::and(ys))
            }
            Kind::Or(xs) => {
                let ys = xs.iter().map(|x| self.elim_wr(x, targets)).collect::<Result<Vec<_>, _>>()?;
                if self.model.is_some() && self.resolve_all {
                    return self.resolve_or(ys);
                }
                Ok(Term::or(ys))
            }
            _ => self.rewrite_literal(phi, targets),
        }
    }

    fn resolve_or(&mut self, ys: Vec<Term>) -> Result<Term, QeError> {
        for y in &ys {
            if self.holds(y)? {
                self.count("MbpResolve");
                return Ok(y.clone());
            }
        }
        self.count("MbpVac");
        Ok(Term::ff())
    }

    fn rewrite_literal(&mut self, lit: &Term, targets: &HashSet<Var>) -> Result<Term, QeError> {
        let (atom, pos) = match lit.kind() {
            Kind::Not(x) => (x.clone(), false),
            _ => (lit.clone(), true),
        };
        let step = match find_redex(&atom, targets) {
            None => return Ok(lit.clone()),
            Some(s) => s,
        };
        self.count(step.rule);
        let branches: Vec<Term> = step
            .branches
            .iter()
            .map(|(c, r)| {
                let a = atom.replace(&step.redex, r);
                let a = if pos { a } else { Term::not(&a) };
                to_nnf(&Term::and2(c, &a))
            })
            .collect();
        let out = if branches.len() == 1 {
            branches.into_iter().next().unwrap()
        } else if self.model.is_some() {
            let mut chosen = None;
            for b in &branches {
                if self.holds(b)? {
                    chosen = Some(b.clone());
                    break;
                }
            }
            match chosen {
                Some(b) => {
                    self.count("MbpResolve");
                    b
                }
                None => {
                    self.count("MbpVac");
                    Term::ff()
                }
            }
        } else {
            Term::or(branches)
        };
        self.record(step.rule, vec![], lit, &out);
        self.check_budget(&out)?;
        self.elim_wr(&out, targets)
    }

    // ---------------------------------------------------------------
    // Case split and read factoring

    /// Partial equalities on `a`, oriented with `a` on the left.
    fn orient(&self, phi: &Term) -> Term {
        let a = self.a.term();
        phi.rewrite_bottom_up(&mut |t| match t.kind() {
            Kind::Peq(l, r, idx) if *r == a && *l != a => Some(Term::peq(&a, l, idx)),
            _ => None,
        })
    }

    fn collect_peqs(&self, phi: &Term) -> Vec<Term> {
        let a = self.a.term();
        let mut out: IndexSet<Term> = IndexSet::new();
        phi.visit_post(&mut |t| {
            if let Kind::Peq(l, _, _) = t.kind() {
                if *l == a {
                    out.insert(t.clone());
                }
            }
        });
        out.into_iter().collect()
    }

    pub(crate) fn split(&mut self, phi: &Term) -> Result<Vec<Disjunct>, QeError> {
        let phi = self.orient(phi);
        let peqs = self.collect_peqs(&phi);
        self.stats.peqs = peqs.len();
        let parts = |p: &Term| match p.kind() {
            Kind::Peq(_, t, idx) => (t.clone(), idx.clone()),
            _ => unreachable!(),
        };
        let all_false = |phi: &Term| {
            peqs.iter().fold(phi.clone(), |acc, p| acc.replace(p, &Term::ff()))
        };
        let mut cases = Vec::new();
        if self.model.is_some() {
            let mut chosen = None;
            for p in &peqs {
                if self.holds(p)? {
                    chosen = Some(p.clone());
                    break;
                }
            }
            if !peqs.is_empty() {
                self.count("CaseSplitEq");
            }
            match chosen {
                Some(p) => cases.push(Disjunct {
                    body: phi.replace(&p, &Term::tt()),
                    peq: Some(parts(&p)),
                    diseqs: vec![],
                    reads: vec![],
                }),
                None => cases.push(Disjunct {
                    body: all_false(&phi),
                    peq: None,
                    diseqs: peqs.iter().map(parts).collect(),
                    reads: vec![],
                }),
            }
        } else {
            for p in &peqs {
                self.count("CaseSplitEq");
                cases.push(Disjunct {
                    body: phi.replace(p, &Term::tt()),
                    peq: Some(parts(p)),
                    diseqs: vec![],
                    reads: vec![],
                });
            }
            cases.push(Disjunct {
                body: all_false(&phi),
                peq: None,
                diseqs: peqs.iter().map(parts).collect(),
                reads: vec![],
            });
        }
        self.stats.disjuncts = cases.len();
        cases.retain(|c| !c.body.is_false());
        if self.trace.is_some() {
            let after = Term::or(cases.iter().map(|c| c.to_formula(&self.a)).collect());
            self.record("CaseSplitEq", vec![self.a.clone()], &phi, &after);
        }
        Ok(cases)
    }

    /// Innermost read `rd(a, t)` with `t` free of `a`, in traversal order.
    fn find_read(&self, terms: &[&Term]) -> Option<Term> {
        let a = self.a.term();
        let mut found = None;
        for t in terms {
            t.visit_post(&mut |n| {
                if found.is_none() {
                    if let Kind::Rd(arr, i) = n.kind() {
                        if *arr == a && !i.contains_var(&self.a) {
                            found = Some(n.clone());
                        }
                    }
                }
            });
            if found.is_some() {
                break;
            }
        }
        found
    }

    /// Replace reads over `a` by fresh value variables, shared across cases.
    pub(crate) fn factor_reads(&mut self, cases: &mut [Disjunct], reads: &mut Vec<(Var, Term)>) -> Result<(), QeError> {
        loop {
            let mut terms: Vec<&Term> = Vec::new();
            for c in cases.iter() {
                terms.push(&c.body);
                if let Some((t, idx)) = &c.peq {
                    terms.push(t);
                    terms.extend(idx.iter());
                }
                for (t, idx) in &c.diseqs {
                    terms.push(t);
                    terms.extend(idx.iter());
                }
            }
            let r = match self.find_read(&terms) {
                Some(r) => r,
                None => break,
            };
            self.count("FactorRd");
            let s = self.fresh_value();
            if self.model.is_some() {
                let val = self.value_of(&r)?;
                self.model.as_mut().unwrap().set(&s, val);
            }
            let st = s.term();
            for c in cases.iter_mut() {
                c.body = c.body.replace(&r, &st);
                if let Some((t, idx)) = &mut c.peq {
                    *t = t.replace(&r, &st);
                    *idx = idx.iter().map(|i| i.replace(&r, &st)).collect();
                }
                for (t, idx) in c.diseqs.iter_mut() {
                    *t = t.replace(&r, &st);
                    *idx = idx.iter().map(|i| i.replace(&r, &st)).collect();
                }
            }
            let idx = match r.kind() {
                Kind::Rd(_, i) => i.clone(),
                _ => unreachable!(),
            };
            reads.push((s, idx));
        }
        // each case keeps the reads it mentions, closed under dependencies
        for c in cases.iter_mut() {
            let mut used: HashSet<Var> = HashSet::new();
            let mut mentioned = c.body.free_vars();
            if let Some((t, idx)) = &c.peq {
                mentioned.extend(t.free_vars());
                idx.iter().for_each(|i| mentioned.extend(i.free_vars()));
            }
            for (t, idx) in &c.diseqs {
                mentioned.extend(t.free_vars());
                idx.iter().for_each(|i| mentioned.extend(i.free_vars()));
            }
            used.extend(mentioned);
            for (s, t) in reads.iter().rev() {
                if used.contains(s) {
                    used.extend(t.free_vars());
                }
            }
            c.reads = reads.iter().filter(|(s, _)| used.contains(s)).cloned().collect();
        }
        Ok(())
    }

    // ---------------------------------------------------------------
    // Per-case elimination

    pub(crate) fn elim_disjunct(&mut self, d: &Disjunct) -> Result<Term, QeError> {
        let a = self.a.term();
        let before = if self.trace.is_some() { Some(d.to_formula(&self.a)) } else { None };
        let (nv, ni) = (self.fresh_values.len(), self.fresh_indices.len());
        let out = if let Some((t, idx)) = &d.peq {
            if t.contains_var(&self.a) {
                return Err(QeError::Internal(format!("ElimEq with {} in {}", self.a.name, t)));
            }
            self.count("ElimEq");
            let vs: Vec<Var> = idx.iter().map(|_| self.fresh_value()).collect();
            if self.model.is_some() {
                for (v, i) in vs.iter().zip(idx) {
                    let val = self.value_of(&Term::rd(&a, i))?;
                    self.model.as_mut().unwrap().set(v, val);
                }
            }
            let vts: Vec<Term> = vs.iter().map(|v| v.term()).collect();
            let w = Term::wr_all(t, idx, &vts);
            let sub = Subst::single(&self.a, &w);
            let mut parts = vec![sub.apply(&d.body)];
            for (s, i) in &d.reads {
                parts.push(Term::eq(&s.term(), &Term::rd(&w, &sub.apply(i))));
            }
            for (t2, idx2) in &d.diseqs {
                let p = Term::peq(&w, &sub.apply(t2), &idx2.iter().map(|i| sub.apply(i)).collect::<Vec<_>>());
                parts.push(Term::not(&p));
            }
            let r = Term::and(parts);
            if self.model.is_some() && !vs.is_empty() {
                // keep the new value variables out of array terms
                let targets: HashSet<Var> = vs.into_iter().collect();
                self.elim_wr(&to_nnf(&r), &targets)?
            } else {
                r
            }
        } else {
            let mut body = d.body.clone();
            let mut reads = d.reads.clone();
            if !self.finite {
                for _ in &d.diseqs {
                    self.count("ElimDiseq");
                }
            } else {
                let mut extra = Vec::new();
                for (t, idx) in &d.diseqs {
                    self.count("ElimDiseqFinite");
                    let j = self.indices.fresh(self.a.sort.index().unwrap().clone());
                    self.fresh_indices.push(j.clone());
                    let jt = j.term();
                    if self.model.is_some() {
                        let w = self.diseq_witness(t, idx)?;
                        self.model.as_mut().unwrap().set(&j, w);
                    }
                    extra.push(Term::neq(&Term::rd(&a, &jt), &Term::rd(t, &jt)));
                    for i in idx {
                        extra.push(Term::neq(&jt, i));
                    }
                }
                let mut tmp = [Disjunct { body: Term::and(extra), peq: None, diseqs: vec![], reads: vec![] }];
                let mut new_reads = Vec::new();
                self.factor_reads(&mut tmp, &mut new_reads)?;
                body = Term::and2(&body, &tmp[0].body);
                reads.extend(new_reads);
            }
            let ack = self.ackermann(&reads)?;
            Term::and2(&body, &ack)
        };
        if out.contains_var(&self.a) {
            return Err(QeError::Internal(format!("{} survives elimination in {}", self.a.name, out)));
        }
        self.check_budget(&out)?;
        if let Some(b) = before {
            let mut vars = vec![self.a.clone()];
            vars.extend(d.reads.iter().map(|(s, _)| s.clone()));
            vars.extend(self.fresh_values[nv..].iter().cloned());
            vars.extend(self.fresh_indices[ni..].iter().cloned());
            self.record("ElimDisjunct", vars, &b, &out);
        }
        Ok(out)
    }

    /// An index outside `idx` where the model's `a` and `t` differ.
    fn diseq_witness(&self, t: &Term, idx: &[Term]) -> Result<Value, QeError> {
        let excl: Vec<Value> = idx.iter().map(|i| self.value_of(i)).collect::<Result<_, _>>()?;
        let av = self.value_of(&self.a.term())?;
        let tv = self.value_of(t)?;
        let (av, tv) = (av.as_array().unwrap(), tv.as_array().unwrap());
        let candidates: Vec<Value> = match (self.a.sort.index().unwrap(), &self.domain) {
            (Sort::Bool, _) => vec![Value::Bool(false), Value::Bool(true)],
            (_, IndexDomain::Finite(d)) => d.iter().map(|n| Value::Int(*n)).collect(),
            _ => av.graph().keys().chain(tv.graph().keys()).cloned().collect(),
        };
        candidates
            .into_iter()
            .find(|p| !excl.contains(p) && av.select(p) != tv.select(p))
            .ok_or_else(|| QeError::Internal("no witness for an array disequality".into()))
    }

    fn ackermann(&mut self, reads: &[(Var, Term)]) -> Result<Term, QeError> {
        if reads.len() < 2 {
            return Ok(Term::tt());
        }
        if self.model.is_none() {
            let mut parts = Vec::new();
            for k in 0..reads.len() {
                for l in k + 1..reads.len() {
                    self.count("Ackermann");
                    let (sk, tk) = &reads[k];
                    let (sl, tl) = &reads[l];
                    parts.push(Term::implies(&Term::eq(tk, tl), &Term::eq(&sk.term(), &sl.term())));
                }
            }
            return Ok(Term::and(parts));
        }
        let model = self.model.clone().unwrap();
        if *self.a.sort.index().unwrap() == Sort::Int {
            for _ in reads {
                self.count("AckermannOrdered");
            }
            return ackermann_ordered_in(reads, &model, &self.domain)
                .map_err(|e| QeError::Internal(e.to_string()));
        }
        let mut parts = Vec::new();
        for k in 0..reads.len() {
            for l in k + 1..reads.len() {
                self.count("AckermannM");
                let (sk, tk) = &reads[k];
                let (sl, tl) = &reads[l];
                let eq = Term::eq(tk, tl);
                if self.holds(&eq)? {
                    parts.push(eq);
                    parts.push(Term::eq(&sk.term(), &sl.term()));
                } else {
                    parts.push(Term::not(&eq));
                }
            }
        }
        Ok(Term::and(parts))
    }

    /// The whole pipeline on one body.
    pub(crate) fn run(&mut self, body: &Term) -> Result<Term, QeError> {
        if !self.a.sort.is_array() {
            return Err(QeError::NotArray(self.a.name.to_string()));
        }
        if self.model.is_some() && !self.holds(body)? {
            return Err(QeError::ModelMismatch);
        }
        let phi = to_nnf(body);
        let targets: HashSet<Var> = [self.a.clone()].into_iter().collect();
        let phi = self.elim_wr(&phi, &targets)?;
        let mut cases = self.split(&phi)?;
        let mut reads = Vec::new();
        self.factor_reads(&mut cases, &mut reads)?;
        let mut out = Vec::new();
        for c in &cases {
            out.push(self.elim_disjunct(c)?);
        }
        let r = Term::or(out);
        self.check_budget(&r)?;
        Ok(r)
    }
}

fn contains_target(t: &Term, targets: &HashSet<Var>) -> bool {
    t.contains_any(targets)
}

/// Leftmost-innermost redex of a write-elimination rule inside `atom`.
fn find_redex(atom: &Term, targets: &HashSet<Var>) -> Option<Step> {
    let mut found: Option<Step> = None;
    atom.visit_post(&mut |n| {
        if found.is_some() {
            return;
        }
        found = redex_at(n, targets);
    });
    found
}

fn redex_at(n: &Term, targets: &HashSet<Var>) -> Option<Step> {
    match n.kind() {
        Kind::Rd(w, j) => {
            if let Kind::Wr(t, i, v) = w.kind() {
                if contains_target(w, targets) {
                    return Some(Step {
                        rule: "ElimWrRd",
                        redex: n.clone(),
                        branches: vec![(Term::eq(i, j), v.clone()), (Term::neq(i, j), Term::rd(t, j))],
                    });
                }
            }
            None
        }
        Kind::Ite(c, x, y) if n.sort().is_array() && contains_target(n, targets) => Some(Step {
            rule: "ElimIte",
            redex: n.clone(),
            branches: vec![(to_nnf(c), x.clone()), (to_nnf(&Term::not(c)), y.clone())],
        }),
        Kind::Eq(l, r) if l.sort().is_array() && contains_target(n, targets) => Some(Step {
            rule: "PartialEq",
            redex: n.clone(),
            branches: vec![(Term::tt(), Term::peq(l, r, &[]))],
        }),
        Kind::Peq(l, r, idx) if contains_target(n, targets) => {
            let is_twr = |t: &Term| matches!(t.kind(), Kind::Wr(..)) && contains_target(t, targets);
            if is_twr(l) {
                let (t1, j, v) = match l.kind() {
                    Kind::Wr(t1, j, v) => (t1, j, v),
                    _ => unreachable!(),
                };
                if idx.contains(j) {
                    return Some(Step {
                        rule: "ElimWrEq",
                        redex: n.clone(),
                        branches: vec![(Term::tt(), Term::peq(t1, r, idx))],
                    });
                }
                let mut branches: Vec<(Term, Term)> =
                    idx.iter().map(|i| (Term::eq(j, i), Term::peq(t1, r, idx))).collect();
                let mut ext = idx.clone();
                ext.push(j.clone());
                let outside = Term::and(idx.iter().map(|i| Term::neq(j, i)).collect());
                branches.push((outside, Term::and2(&Term::peq(t1, r, &ext), &Term::eq(v, &Term::rd(r, j)))));
                Some(Step { rule: "ElimWrEq", redex: n.clone(), branches })
            } else if is_twr(r) {
                Some(Step { rule: "Symm", redex: n.clone(), branches: vec![(Term::tt(), Term::peq(r, l, idx))] })
            } else {
                None
            }
        }
        _ => None,
    }
}

/// Ordered Ackermannization: index terms grouped by model value, class
/// members equated to a representative along with their read values, and
/// representatives chained by `<` in model order.
pub fn ackermann_ordered(reads: &[(Var, Term)], model: &Model) -> Result<Term, crate::model::EvalError> {
    ackermann_ordered_in(reads, model, &IndexDomain::Infinite)
}

fn ackermann_ordered_in(
    reads: &[(Var, Term)],
    model: &Model,
    domain: &IndexDomain,
) -> Result<Term, crate::model::EvalError> {
    let ev = Evaluator::with_domain(model, domain.clone());
    let mut classes: BTreeMap<i64, Vec<&(Var, Term)>> = BTreeMap::new();
    for r in reads {
        let k = ev.eval(&r.1)?.as_int().ok_or_else(|| crate::model::EvalError::Sort(r.1.to_string()))?;
        classes.entry(k).or_default().push(r);
    }
    let mut parts = Vec::new();
    let mut reps: Vec<&Term> = Vec::new();
    for members in classes.values() {
        let (s0, t0) = members[0];
        for (s, t) in &members[1..] {
            if t != t0 {
                parts.push(Term::eq(t, t0));
            }
            parts.push(Term::eq(&s.term(), &s0.term()));
        }
        reps.push(t0);
    }
    for w in reps.windows(2) {
        parts.push(Term::lt(w[0], w[1]));
    }
    Ok(Term::and(parts))
}

// ---------------------------------------------------------------------
// Public entry points

/// Eliminate `task.quantified` from `task.body`.
pub fn array_qe(task: &QeTask) -> Result<QeResult, QeError> {
    array_qe_with(task, &QeConfig::default()).map(|(r, _)| r)
}

/// As [`array_qe`], also returning the recorded rewrite trace when enabled.
pub fn array_qe_with(task: &QeTask, cfg: &QeConfig) -> Result<(QeResult, Vec<TraceStep>), QeError> {
    let finite = matches!(task.index_mode, IndexMode::Finite(_));
    let mut e = Elim::new(&task.quantified, finite, None, IndexDomain::Infinite, cfg);
    let matrix = e.run(&task.body)?;
    let trace = e.trace.take().unwrap_or_default();
    Ok((
        QeResult {
            fresh_value_vars: e.fresh_values,
            fresh_index_vars: e.fresh_indices,
            matrix,
            stats: e.stats,
        },
        trace,
    ))
}

/// Write elimination for the array variable `a` on an NNF formula.
pub fn elim_wr(phi: &Term, a: &Var) -> Term {
    let mut e = Elim::new(a, false, None, IndexDomain::Infinite, &QeConfig::default());
    let targets: HashSet<Var> = [a.clone()].into_iter().collect();
    e.elim_wr(&to_nnf(phi), &targets).expect("no budget in plain write elimination")
}

/// Case split on partial equalities over `a` and factoring of reads, on a
/// formula already free of relevant writes. Returns the cases and the fresh
/// read variables with their index terms.
pub fn case_split_and_factor(phi: &Term, a: &Var) -> (Vec<Disjunct>, Vec<(Var, Term)>) {
    let mut e = Elim::new(a, false, None, IndexDomain::Infinite, &QeConfig::default());
    let mut cases = e.split(phi).expect("split without a model");
    let mut reads = Vec::new();
    e.factor_reads(&mut cases, &mut reads).expect("factoring without a model");
    (cases, reads)
}

/// The cases as formulas, each ordered body, partial equality,
/// disequalities, read definitions.
pub fn lift_eq_diseq_rd(cases: &[Disjunct], a: &Var) -> Vec<Term> {
    cases.iter().map(|c| c.to_formula(a)).collect()
}

/// Eliminate `a` from one case. Fresh value variables continue after
/// `used_names` already taken by the caller.
pub fn elim_disjunct(d: &Disjunct, a: &Var, mode: &IndexMode, used_names: usize) -> Result<(Term, Vec<Var>), QeError> {
    let mut e = Elim::new(a, matches!(mode, IndexMode::Finite(_)), None, IndexDomain::Infinite, &QeConfig::default());
    e.skip_names(used_names, 0);
    let t = e.elim_disjunct(d)?;
    let fresh = e.fresh_values.iter().chain(&e.fresh_indices).cloned().collect();
    Ok((t, fresh))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn iv(n: &str) -> Term {
        Term::new_var(n, Sort::Int)
    }

    fn arr(n: &str) -> Var {
        Var::new(n, Sort::int_array())
    }

    #[test]
    fn write_elimination_examples() {
        let a = arr("a");
        let (i, j, v) = (iv("i"), iv("j"), iv("v"));
        let lit = Term::gt(&Term::rd(&Term::wr(&a.term(), &i, &v), &j), &Term::int(0));
        let r = elim_wr(&lit, &a);
        let expect = Term::or(vec![
            Term::and2(&Term::eq(&i, &j), &Term::gt(&v, &Term::int(0))),
            Term::and2(&Term::neq(&i, &j), &Term::gt(&Term::rd(&a.term(), &j), &Term::int(0))),
        ]);
        assert_eq!(r, expect);

        let b = arr("b");
        let (i1, v1) = (iv("i1"), iv("v1"));
        let r = elim_wr(&Term::eq(&b.term(), &Term::wr(&a.term(), &i1, &v1)), &a);
        let expect = Term::and2(
            &Term::peq(&a.term(), &b.term(), &[i1.clone()]),
            &Term::eq(&v1, &Term::rd(&b.term(), &i1)),
        );
        assert_eq!(r, expect);

        let t = Term::and2(&Term::peq(&b.term(), &b.term(), &[i.clone()]), &Term::gt(&i, &j));
        assert_eq!(elim_wr(&t, &a), Term::gt(&i, &j));
    }

    #[test]
    fn unrelated_writes_are_left_alone() {
        let a = arr("a");
        let b = arr("b");
        let (i, v) = (iv("i"), iv("v"));
        let t = Term::gt(&Term::rd(&Term::wr(&b.term(), &i, &v), &i), &Term::rd(&a.term(), &i));
        assert_eq!(elim_wr(&t, &a), t);
    }

    #[test]
    fn exists_a_equal_b_is_true() {
        let a = arr("a");
        let b = arr("b");
        let r = array_qe(&QeTask::new(a.clone(), Term::eq(&a.term(), &b.term()))).unwrap();
        assert_eq!(r.matrix, Term::tt());
    }

    #[test]
    fn two_reads_produce_ackermann_constraint() {
        let a = arr("a");
        let (i, j) = (iv("i"), iv("j"));
        let body = Term::and2(
            &Term::gt(&Term::rd(&a.term(), &i), &Term::int(0)),
            &Term::lt(&Term::rd(&a.term(), &j), &Term::int(0)),
        );
        let r = array_qe(&QeTask::new(a, body)).unwrap();
        assert_eq!(r.fresh_value_vars.len(), 2);
        let (s0, s1) = (r.fresh_value_vars[0].term(), r.fresh_value_vars[1].term());
        let expect = Term::and(vec![
            Term::gt(&s0, &Term::int(0)),
            Term::lt(&s1, &Term::int(0)),
            Term::implies(&Term::eq(&i, &j), &Term::eq(&s0, &s1)),
        ]);
        assert_eq!(r.matrix, expect);
    }

    #[test]
    fn n_plus_one_cases() {
        let a = arr("a");
        let bs: Vec<Var> = (0..3).map(|k| arr(&format!("b{}", k))).collect();
        let body = Term::or(bs.iter().map(|b| Term::eq(&a.term(), &b.term())).collect());
        let r = array_qe(&QeTask::new(a, body)).unwrap();
        assert_eq!(r.stats.peqs, 3);
        assert_eq!(r.stats.disjuncts, 4);
    }

    #[test]
    fn ordered_ackermann_examples() {
        let (s1, s2) = (Var::new("s1", Sort::Int), Var::new("s2", Sort::Int));
        let (t1, t2) = (Var::new("t1", Sort::Int), Var::new("t2", Sort::Int));
        let reads = vec![(s1.clone(), t1.term()), (s2.clone(), t2.term())];
        let m = Model::new().with(&t1, Value::Int(7)).with(&t2, Value::Int(7));
        let r = ackermann_ordered(&reads, &m).unwrap();
        assert_eq!(r, Term::and2(&Term::eq(&t2.term(), &t1.term()), &Term::eq(&s2.term(), &s1.term())));
        let m = Model::new().with(&t1, Value::Int(3)).with(&t2, Value::Int(9));
        assert_eq!(ackermann_ordered(&reads, &m).unwrap(), Term::lt(&t1.term(), &t2.term()));
        assert_eq!(ackermann_ordered(&reads[..1], &m).unwrap(), Term::tt());
    }

    #[test]
    fn budget_is_enforced() {
        let a = arr("a");
        let b = arr("b");
        let body = Term::eq(&a.term(), &Term::wr(&b.term(), &iv("i"), &iv("v")));
        let cfg = QeConfig { node_budget: 3, ..Default::default() };
        let err = array_qe_with(&QeTask::new(a, body), &cfg).unwrap_err();
        assert!(matches!(err, QeError::Budget { .. }));
    }
}
