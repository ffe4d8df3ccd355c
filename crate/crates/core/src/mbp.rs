//! Model-based projection for arrays and linear integer arithmetic.
//!
//! [`combined_mbp`] runs equality resolution, array projection per array
//! variable, LIA projection for integers outside array terms, and model
//! value substitution for whatever is left.

use crate::model::{EvalError, Evaluator, IndexDomain, Model, Value};
use crate::qe::{Elim, QeConfig, QeError};
use crate::term::{to_nnf, Kind, Sort, Subst, Term, Var};
use indexmap::IndexMap;
use std::collections::HashSet;
use std::sync::Mutex;
use thiserror::Error;

#[derive(Clone, Debug)]
pub struct MbpTask {
    /// Arrays first, then integers and Booleans.
    pub quantified: Vec<Var>,
    pub body: Term,
    pub model: Model,
}

#[derive(Clone, Debug)]
pub struct MbpOptions {
    pub resolve_all: bool,
    pub finite_index: bool,
    pub domain: IndexDomain,
    pub eq_resolution: bool,
    pub strengthen: bool,
    /// Skip projection and substitute every non-array variable.
    pub substitute_only: bool,
    pub node_budget: usize,
}

impl Default for MbpOptions {
    fn default() -> MbpOptions {
        MbpOptions {
            resolve_all: false,
            finite_index: false,
            domain: IndexDomain::Infinite,
            eq_resolution: true,
            strengthen: false,
            substitute_only: false,
            node_budget: 0,
        }
    }
}

#[derive(Clone, Debug)]
pub struct MbpOutcome {
    pub result: Term,
    pub used_substitution: bool,
    pub strengthening_literals: Vec<Term>,
    /// Result literals produced by substituting integer model values.
    pub substituted_literals: Vec<Term>,
    pub rule_applications: usize,
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum MbpError {
    #[error("model does not satisfy the projected formula")]
    ModelMismatch,
    #[error(transparent)]
    Qe(#[from] QeError),
    #[error("unsupported for LIA projection: {0}")]
    Unsupported(String),
    #[error("arithmetic overflow in projection")]
    Overflow,
    #[error(transparent)]
    Eval(#[from] EvalError),
    #[error("internal invariant violated: {0}")]
    Internal(String),
}

// ---------------------------------------------------------------------
// Call recording

/// One projection call, kept for contract checking.
#[derive(Clone, Debug)]
pub struct MbpRecord {
    pub quantified: Vec<Var>,
    pub body: Term,
    pub model: Model,
    pub domain: IndexDomain,
    pub result: Term,
}

static RECORDER: Mutex<Option<Vec<MbpRecord>>> = Mutex::new(None);

/// Start logging every [`combined_mbp`] call in this process.
pub fn start_recording() {
    *RECORDER.lock().unwrap() = Some(Vec::new());
}

/// Stop logging and return what was recorded.
pub fn take_recording() -> Vec<MbpRecord> {
    RECORDER.lock().unwrap().take().unwrap_or_default()
}

fn record(task: &MbpTask, domain: &IndexDomain, result: &Term) {
    if let Some(log) = RECORDER.lock().unwrap().as_mut() {
        log.push(MbpRecord {
            quantified: task.quantified.clone(),
            body: task.body.clone(),
            model: task.model.clone(),
            domain: domain.clone(),
            result: result.clone(),
        });
    }
}

// ---------------------------------------------------------------------
// Resolution

fn ev<'m>(m: &'m Model, d: &IndexDomain) -> Evaluator<'m> {
    Evaluator::with_domain(m, d.clone())
}

/// Replace every disjunction of an NNF formula by its first disjunct true
/// in `m`, or by ⊥ when none is.
pub fn mbp_resolve(phi: &Term, m: &Model) -> Result<Term, EvalError> {
    resolve_in(phi, &ev(m, &IndexDomain::Infinite))
}

fn resolve_in(phi: &Term, e: &Evaluator) -> Result<Term, EvalError> {
    match phi.kind() {
        Kind::And(xs) => Ok(Term::and(xs.iter().map(|x| resolve_in(x, e)).collect::<Result<_, _>>()?)),
        Kind::Or(xs) => {
            for x in xs {
                if e.eval_bool(x)? {
                    return resolve_in(x, e);
                }
            }
            Ok(Term::ff())
        }
        _ => Ok(phi.clone()),
    }
}

/// Replace `ite` terms by the branch `m` selects, conjoining the resolved
/// condition.
fn resolve_ites(phi: &Term, e: &Evaluator) -> Result<Term, EvalError> {
    let mut phi = phi.clone();
    loop {
        let mut found = None;
        phi.visit_post(&mut |t| {
            if found.is_none() && matches!(t.kind(), Kind::Ite(..)) {
                found = Some(t.clone());
            }
        });
        let ite = match found {
            None => return Ok(phi),
            Some(t) => t,
        };
        let (c, x, y) = match ite.kind() {
            Kind::Ite(c, x, y) => (c, x, y),
            _ => unreachable!(),
        };
        let (side, branch) = if e.eval_bool(c)? {
            (to_nnf(c), x)
        } else {
            (to_nnf(&Term::not(c)), y)
        };
        let side = resolve_in(&side, e)?;
        phi = Term::and2(&phi.replace(&ite, branch), &side);
    }
}

// ---------------------------------------------------------------------
// Linear expressions

/// `Σ cᵢ·atomᵢ + constant`, where atoms are variables or opaque integer
/// terms such as reads.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct LinExpr {
    pub coeffs: IndexMap<Term, i128>,
    pub constant: i128,
}

impl LinExpr {
    pub fn constant(c: i128) -> LinExpr {
        LinExpr { coeffs: IndexMap::new(), constant: c }
    }

    pub fn from_term(t: &Term) -> LinExpr {
        let mut e = LinExpr::default();
        e.add_term(t, 1);
        e
    }

    fn add_term(&mut self, t: &Term, k: i128) {
        match t.kind() {
            Kind::Int(n) => self.constant += k * *n as i128,
            Kind::Add(xs) => xs.iter().for_each(|x| self.add_term(x, k)),
            Kind::Mul(c, x) => self.add_term(x, k * *c as i128),
            _ => self.add_atom(t, k),
        }
    }

    fn add_atom(&mut self, t: &Term, k: i128) {
        let c = self.coeffs.entry(t.clone()).or_insert(0);
        *c += k;
        if *c == 0 {
            self.coeffs.shift_remove(t);
        }
    }

    pub fn coeff(&self, atom: &Term) -> i128 {
        self.coeffs.get(atom).copied().unwrap_or(0)
    }

    pub fn without(&self, atom: &Term) -> LinExpr {
        let mut e = self.clone();
        e.coeffs.shift_remove(atom);
        e
    }

    pub fn scale(&self, k: i128) -> LinExpr {
        if k == 0 {
            return LinExpr::default();
        }
        LinExpr {
            coeffs: self.coeffs.iter().map(|(t, c)| (t.clone(), c * k)).collect(),
            constant: self.constant * k,
        }
    }

    pub fn plus(&self, o: &LinExpr) -> LinExpr {
        let mut e = self.clone();
        e.constant += o.constant;
        for (t, c) in &o.coeffs {
            e.add_atom(t, *c);
        }
        e
    }

    pub fn minus(&self, o: &LinExpr) -> LinExpr {
        self.plus(&o.scale(-1))
    }

    pub fn is_constant(&self) -> bool {
        self.coeffs.is_empty()
    }

    pub fn eval(&self, e: &Evaluator) -> Result<i128, MbpError> {
        let mut s = self.constant;
        for (t, c) in &self.coeffs {
            let v = e.eval(t)?.as_int().ok_or_else(|| MbpError::Internal(format!("{} is not Int", t)))?;
            s += c * v as i128;
        }
        Ok(s)
    }

    fn gcd_coeffs(&self) -> i128 {
        self.coeffs.values().fold(0, |g, c| gcd(g, *c))
    }

    fn check(&self) -> Result<(), MbpError> {
        let lim = i64::MAX as i128 / 4;
        if self.constant.abs() > lim || self.coeffs.values().any(|c| c.abs() > lim) {
            return Err(MbpError::Overflow);
        }
        Ok(())
    }

    /// Terms for the positive and negated-negative parts: `self = p - n`.
    fn sides(&self) -> Result<(Term, Term), MbpError> {
        self.check()?;
        let mut p = Vec::new();
        let mut n = Vec::new();
        for (t, c) in &self.coeffs {
            if *c > 0 {
                p.push(Term::mul(*c as i64, t));
            } else {
                n.push(Term::mul(-*c as i64, t));
            }
        }
        if self.constant > 0 {
            p.push(Term::int(self.constant as i64));
        } else if self.constant < 0 {
            n.push(Term::int(-self.constant as i64));
        }
        Ok((Term::add(p), Term::add(n)))
    }

    pub fn to_term(&self) -> Result<Term, MbpError> {
        self.check()?;
        let mut parts: Vec<Term> = self.coeffs.iter().map(|(t, c)| Term::mul(*c as i64, t)).collect();
        if self.constant != 0 || parts.is_empty() {
            parts.push(Term::int(self.constant as i64));
        }
        Ok(Term::add(parts))
    }
}

fn gcd(a: i128, b: i128) -> i128 {
    let (mut a, mut b) = (a.abs(), b.abs());
    while b != 0 {
        let r = a % b;
        a = b;
        b = r;
    }
    a
}

fn lcm(a: i128, b: i128) -> i128 {
    if a == 0 || b == 0 {
        return 0;
    }
    (a / gcd(a, b) * b).abs()
}

/// Arithmetic literal in normal form.
#[derive(Clone, Debug)]
enum Lit {
    /// e ≥ 0
    Ge(LinExpr),
    /// e = 0
    Eq(LinExpr),
    /// e ≠ 0
    Ne(LinExpr),
    /// d | e
    Div(i128, LinExpr),
    /// ¬(d | e)
    NDiv(i128, LinExpr),
}

impl Lit {
    fn parse(t: &Term) -> Option<Lit> {
        let lin = LinExpr::from_term;
        match t.kind() {
            Kind::Lt(a, b) => Some(Lit::Ge(lin(b).minus(&lin(a)).plus(&LinExpr::constant(-1)))),
            Kind::Le(a, b) => Some(Lit::Ge(lin(b).minus(&lin(a)))),
            Kind::Eq(a, b) if *a.sort() == Sort::Int => Some(Lit::Eq(lin(a).minus(&lin(b)))),
            Kind::Divides(d, a) => Some(Lit::Div(*d as i128, lin(a))),
            Kind::Not(x) => match x.kind() {
                Kind::Lt(a, b) => Some(Lit::Ge(lin(a).minus(&lin(b)))),
                Kind::Le(a, b) => Some(Lit::Ge(lin(a).minus(&lin(b)).plus(&LinExpr::constant(-1)))),
                Kind::Eq(a, b) if *a.sort() == Sort::Int => Some(Lit::Ne(lin(a).minus(&lin(b)))),
                Kind::Divides(d, a) => Some(Lit::NDiv(*d as i128, lin(a))),
                _ => None,
            },
            _ => None,
        }
    }

    fn expr(&self) -> &LinExpr {
        match self {
            Lit::Ge(e) | Lit::Eq(e) | Lit::Ne(e) | Lit::Div(_, e) | Lit::NDiv(_, e) => e,
        }
    }

    fn to_term(&self) -> Result<Term, MbpError> {
        match self {
            Lit::Ge(e) => {
                let g = e.gcd_coeffs();
                if g == 0 {
                    return Ok(Term::bool(e.constant >= 0));
                }
                let e = LinExpr {
                    coeffs: e.coeffs.iter().map(|(t, c)| (t.clone(), c / g)).collect(),
                    constant: e.constant.div_euclid(g),
                };
                let (p, n) = e.sides()?;
                Ok(Term::le(&n, &p))
            }
            Lit::Eq(e) | Lit::Ne(e) => {
                let g = e.gcd_coeffs();
                let pos = matches!(self, Lit::Eq(_));
                if g == 0 {
                    return Ok(Term::bool((e.constant == 0) == pos));
                }
                if e.constant % g != 0 {
                    return Ok(Term::bool(!pos));
                }
                let e = LinExpr {
                    coeffs: e.coeffs.iter().map(|(t, c)| (t.clone(), c / g)).collect(),
                    constant: e.constant / g,
                };
                let (p, n) = e.sides()?;
                let eq = Term::eq(&n, &p);
                Ok(if pos { eq } else { Term::not(&eq) })
            }
            Lit::Div(d, e) | Lit::NDiv(d, e) => {
                let pos = matches!(self, Lit::Div(..));
                let e = LinExpr {
                    coeffs: e.coeffs.iter().map(|(t, c)| (t.clone(), c.rem_euclid(*d))).filter(|(_, c)| *c != 0).collect(),
                    constant: e.constant.rem_euclid(*d),
                };
                if e.is_constant() || *d == 1 {
                    return Ok(Term::bool((e.constant == 0) == pos));
                }
                if *d > i64::MAX as i128 {
                    return Err(MbpError::Overflow);
                }
                let t = Term::divides(*d as i64, &e.to_term()?);
                Ok(if pos { t } else { Term::not(&t) })
            }
        }
    }
}

// ---------------------------------------------------------------------
// LIA projection

/// Project integer variables out of a formula by model-guided virtual
/// substitution. The variables must not occur inside array terms.
pub fn lia_mbp(quantified: &[Var], phi: &Term, m: &Model) -> Result<Term, MbpError> {
    let e = ev(m, &IndexDomain::Infinite);
    if !e.eval_bool(phi)? {
        return Err(MbpError::ModelMismatch);
    }
    let cube = resolve_in(&resolve_ites(&to_nnf(phi), &e)?, &e)?;
    let mut lits = cube.conjuncts();
    for x in quantified {
        lits = lia_project_var(x, lits, &e)?;
    }
    Ok(Term::and(lits))
}

fn in_array_term(t: &Term, x: &Var) -> bool {
    t.any(&mut |n| matches!(n.kind(), Kind::Rd(..) | Kind::Wr(..) | Kind::Peq(..)) && n.contains_var(x))
}

fn lia_project_var(x: &Var, lits: Vec<Term>, e: &Evaluator) -> Result<Vec<Term>, MbpError> {
    let xt = x.term();
    let mut keep = Vec::new();
    let mut with_x: Vec<Lit> = Vec::new();
    for l in lits {
        if !l.contains_var(x) {
            keep.push(l);
            continue;
        }
        let lit = Lit::parse(&l).ok_or_else(|| MbpError::Unsupported(l.to_string()))?;
        let ex = lit.expr();
        if ex.coeffs.keys().any(|a| *a != xt && a.contains_var(x)) {
            return Err(MbpError::Unsupported(l.to_string()));
        }
        if ex.coeff(&xt) == 0 {
            keep.push(lit.to_term()?);
        } else {
            with_x.push(lit);
        }
    }
    let mut out: Vec<Lit> = Vec::new();
    if let Some(pos) = with_x.iter().position(|l| matches!(l, Lit::Eq(_))) {
        // equality resolution: c·x = u with c > 0
        let eq = with_x.remove(pos);
        let mut c = eq.expr().coeff(&xt);
        let mut t = eq.expr().without(&xt);
        if c < 0 {
            c = -c;
        } else {
            t = t.scale(-1);
        }
        let u = t;
        if c > 1 {
            out.push(Lit::Div(c, u.clone()));
        }
        for l in with_x {
            let k = l.expr().coeff(&xt);
            let ne = u.scale(k).plus(&l.expr().without(&xt).scale(c));
            out.push(match l {
                Lit::Ge(_) => Lit::Ge(ne),
                Lit::Eq(_) => Lit::Eq(ne),
                Lit::Ne(_) => Lit::Ne(ne),
                Lit::Div(d, _) => Lit::Div(d * c, ne),
                Lit::NDiv(d, _) => Lit::NDiv(d * c, ne),
            });
        }
    } else {
        // disequalities and non-divisibility become bounds and residues
        let mut norm: Vec<Lit> = Vec::new();
        for l in with_x {
            norm.push(match l {
                Lit::Ne(ex) => {
                    if ex.eval(e)? > 0 {
                        Lit::Ge(ex.plus(&LinExpr::constant(-1)))
                    } else {
                        Lit::Ge(ex.scale(-1).plus(&LinExpr::constant(-1)))
                    }
                }
                Lit::NDiv(d, ex) => {
                    let k = ex.eval(e)?.rem_euclid(d);
                    Lit::Div(d, ex.plus(&LinExpr::constant(-k)))
                }
                l => l,
            });
        }
        let big_l = norm.iter().fold(1, |acc, l| lcm(acc, l.expr().coeff(&xt)));
        // y = L·x; every literal is rewritten as ±y + t
        let mut lowers: Vec<LinExpr> = Vec::new();
        let mut uppers: Vec<LinExpr> = Vec::new();
        let mut divs: Vec<(i128, LinExpr)> = Vec::new();
        for l in norm {
            let c = l.expr().coeff(&xt);
            let m = big_l / c.abs();
            let t = l.expr().without(&xt).scale(m);
            match l {
                Lit::Ge(_) if c > 0 => lowers.push(t.scale(-1)),
                Lit::Ge(_) => uppers.push(t),
                Lit::Div(d, _) => divs.push((d * m, if c > 0 { t } else { t.scale(-1) })),
                _ => unreachable!(),
            }
        }
        if big_l > 1 {
            divs.push((big_l, LinExpr::default()));
        }
        let delta = divs.iter().fold(1, |acc, (d, _)| lcm(acc, *d));
        let my = big_l * e.eval(&xt)?.as_int().ok_or(MbpError::Overflow)? as i128;
        let pick = |bs: &[LinExpr], best: fn(i128, i128) -> bool| -> Result<Option<usize>, MbpError> {
            let mut chosen: Option<(usize, i128)> = None;
            for (k, b) in bs.iter().enumerate() {
                let v = b.eval(e)?;
                if chosen.is_none_or(|(_, w)| best(v, w)) {
                    chosen = Some((k, v));
                }
            }
            Ok(chosen.map(|(k, _)| k))
        };
        let y: LinExpr = if let Some(k) = pick(&lowers, |v, w| v > w)? {
            let glb = &lowers[k];
            let r = (my - glb.eval(e)?).rem_euclid(delta);
            glb.plus(&LinExpr::constant(r))
        } else if let Some(k) = pick(&uppers, |v, w| v < w)? {
            let lub = &uppers[k];
            let r = (lub.eval(e)? - my).rem_euclid(delta);
            lub.plus(&LinExpr::constant(-r))
        } else {
            LinExpr::constant(my.rem_euclid(delta))
        };
        for b in &lowers {
            out.push(Lit::Ge(y.minus(b)));
        }
        for b in &uppers {
            out.push(Lit::Ge(b.minus(&y)));
        }
        for (d, t) in &divs {
            out.push(Lit::Div(*d, y.plus(t)));
        }
    }
    for l in out {
        let t = l.to_term()?;
        if !t.is_true() {
            keep.push(t);
        }
    }
    Ok(keep)
}

// ---------------------------------------------------------------------
// Substitution and equality resolution

/// Replace each variable by its model value.
pub fn substitute_model_values(quantified: &[Var], phi: &Term, m: &Model) -> Result<Term, MbpError> {
    Ok(value_subst(quantified, m)?.apply(phi))
}

fn value_subst(vars: &[Var], m: &Model) -> Result<Subst, MbpError> {
    let mut s = Subst::new();
    for v in vars {
        let val = m.get(v).ok_or_else(|| EvalError::Unassigned(v.name.to_string()))?;
        let t = val.to_term().ok_or_else(|| MbpError::Unsupported(format!("substituting array {}", v.name)))?;
        s.bind(v, &t);
    }
    Ok(s)
}

/// Substitute out quantified variables defined by a top-level equality.
pub fn equality_resolution_prepass(quantified: &[Var], phi: &Term) -> (Vec<Var>, Term) {
    let mut q: Vec<Var> = quantified.to_vec();
    let mut phi = phi.clone();
    loop {
        let mut hit = None;
        'outer: for c in phi.conjuncts() {
            if let Kind::Eq(l, r) = c.kind() {
                for (x, t) in [(l, r), (r, l)] {
                    if let Some(v) = x.as_var() {
                        if q.contains(v) && !t.contains_var(v) {
                            hit = Some((c.clone(), v.clone(), t.clone()));
                            break 'outer;
                        }
                    }
                }
            }
        }
        match hit {
            None => return (q, phi),
            Some((c, v, t)) => {
                let rest = phi.replace(&c, &Term::tt());
                phi = Subst::single(&v, &t).apply(&rest);
                q.retain(|x| *x != v);
            }
        }
    }
}

/// Conjoin the model's (dis)equality for every pair of array terms.
pub fn strengthen_with_array_literals(psi: &Term, m: &Model) -> Result<(Term, Vec<Term>), MbpError> {
    strengthen_in(psi, &ev(m, &IndexDomain::Infinite))
}

fn strengthen_in(psi: &Term, e: &Evaluator) -> Result<(Term, Vec<Term>), MbpError> {
    let arrays: Vec<Term> = psi.array_subterms().into_iter().collect();
    let mut lits = Vec::new();
    for i in 0..arrays.len() {
        for j in i + 1..arrays.len() {
            let (a, b) = (&arrays[i], &arrays[j]);
            if a.sort() != b.sort() {
                continue;
            }
            let eq = Term::eq(a, b);
            lits.push(if e.eval_bool(&eq)? { eq } else { Term::not(&eq) });
        }
    }
    let mut parts = vec![psi.clone()];
    parts.extend(lits.iter().cloned());
    Ok((Term::and(parts), lits))
}

// ---------------------------------------------------------------------
// Array projection

#[derive(Clone, Debug)]
pub struct ArrayMbp {
    pub result: Term,
    /// Fresh value and index variables left for the caller.
    pub fresh_vars: Vec<Var>,
    /// Input model extended over the fresh variables.
    pub model: Model,
    pub rule_applications: usize,
}

/// Project one array variable. The result may mention fresh variables,
/// which the model is extended over.
pub fn array_mbp(a: &Var, body: &Term, m: &Model, opts: &MbpOptions) -> Result<ArrayMbp, MbpError> {
    array_mbp_named(a, body, m, opts, (0, 0))
}

fn array_mbp_named(a: &Var, body: &Term, m: &Model, opts: &MbpOptions, used: (usize, usize)) -> Result<ArrayMbp, MbpError> {
    let cfg = QeConfig { node_budget: opts.node_budget, resolve_all: opts.resolve_all, record_trace: false };
    let mut el = Elim::new(a, opts.finite_index, Some(m.clone()), opts.domain.clone(), &cfg);
    el.skip_names(used.0, used.1);
    let result = el.run(body).map_err(|e| match e {
        QeError::ModelMismatch => MbpError::ModelMismatch,
        e => MbpError::Qe(e),
    })?;
    let fresh_vars: Vec<Var> = el.fresh_values.iter().chain(&el.fresh_indices).cloned().collect();
    let rule_applications = el.stats.rule_applications;
    let model = el.into_model().unwrap();
    Ok(ArrayMbp { result, fresh_vars, model, rule_applications })
}

/// The full projection pipeline.
pub fn combined_mbp(task: &MbpTask, opts: &MbpOptions) -> Result<MbpOutcome, MbpError> {
    let out = combined_inner(task, opts)?;
    record(task, &opts.domain, &out.result);
    Ok(out)
}

fn combined_inner(task: &MbpTask, opts: &MbpOptions) -> Result<MbpOutcome, MbpError> {
    let mut m = task.model.clone();
    if !ev(&m, &opts.domain).eval_bool(&task.body)? {
        return Err(MbpError::ModelMismatch);
    }
    let all_q: HashSet<Var> = task.quantified.iter().cloned().collect();
    let (mut q, mut phi) = if opts.eq_resolution {
        equality_resolution_prepass(&task.quantified, &task.body)
    } else {
        (task.quantified.clone(), task.body.clone())
    };
    let mut out = MbpOutcome {
        result: Term::tt(),
        used_substitution: false,
        strengthening_literals: vec![],
        substituted_literals: vec![],
        rule_applications: 0,
    };

    let mut used = (0, 0);
    let mut fresh: Vec<Var> = Vec::new();
    for a in q.iter().filter(|v| v.sort.is_array()) {
        if !phi.contains_var(a) {
            continue;
        }
        let r = array_mbp_named(a, &phi, &m, opts, used)?;
        for v in &r.fresh_vars {
            if v.name.starts_with("qe!v!") {
                used.0 += 1;
            } else {
                used.1 += 1;
            }
        }
        phi = r.result;
        m = r.model;
        fresh.extend(r.fresh_vars);
        out.rule_applications += r.rule_applications;
    }
    q.retain(|v| !v.sort.is_array());
    q.extend(fresh.iter().cloned());

    let e = ev(&m, &opts.domain);
    let phi = resolve_in(&resolve_ites(&to_nnf(&phi), &e)?, &e)?;
    if !e.eval_bool(&phi)? {
        return Err(MbpError::Internal(format!("resolved formula {} is false in the model", phi)));
    }
    let mut lits = phi.conjuncts();
    q.retain(|v| lits.iter().any(|l| l.contains_var(v)));

    let (subst, lia): (Vec<Var>, Vec<Var>) = q.iter().cloned().partition(|v| {
        opts.substitute_only || v.sort == Sort::Bool || lits.iter().any(|l| in_array_term(l, v))
    });
    if !subst.is_empty() {
        let s = value_subst(&subst, &m)?;
        let int_vars: HashSet<Var> = subst.iter().filter(|v| v.sort == Sort::Int).cloned().collect();
        out.used_substitution = !int_vars.is_empty();
        let mut next = Vec::new();
        for l in lits {
            if l.contains_any(&subst.iter().cloned().collect()) {
                let nl = fold_ground(&s.apply(&l));
                if nl.is_true() {
                    continue;
                }
                if l.contains_any(&int_vars) {
                    out.substituted_literals.push(nl.clone());
                }
                next.push(nl);
            } else {
                next.push(l);
            }
        }
        lits = next;
    }
    for x in &lia {
        lits = lia_project_var(x, lits, &e)?;
    }
    let mut result = Term::and(lits);
    if let Some(v) = result.free_vars().into_iter().find(|v| all_q.contains(v) || fresh.contains(v)) {
        return Err(MbpError::Internal(format!("{} survives projection", v.name)));
    }
    if opts.strengthen {
        let (r, lits) = strengthen_in(&result, &ev(&task.model, &opts.domain))?;
        result = r;
        out.strengthening_literals = lits;
    }
    if !ev(&task.model, &opts.domain).eval_bool(&result)? {
        return Err(MbpError::Internal(format!("projection {} is false in the model", result)));
    }
    out.result = result;
    Ok(out)
}

/// Evaluate variable-free literals to ⊤ or ⊥.
fn fold_ground(t: &Term) -> Term {
    if t.free_vars().is_empty() {
        if let Ok(Value::Bool(b)) = Model::new().eval(t) {
            return Term::bool(b);
        }
    }
    t.clone()
}
