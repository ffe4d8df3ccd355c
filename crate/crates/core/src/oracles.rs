//! Independent oracles: brute-force finite-domain quantifier elimination,
//! enumeration of projections under blocking, and bounded reachability.

use crate::chc::ChcSystem;
use crate::mbp::{combined_mbp, MbpError, MbpOptions, MbpRecord, MbpTask};
use crate::model::{ArrayValue, EvalError, Evaluator, IndexDomain, Model, Value};
use crate::qe::{QeResult, QeTask};
use crate::smt::{BackendError, Exists, SatResult, Session};
use crate::term::{Kind, Sort, Subst, Term, Var};
use std::collections::HashSet;
use std::sync::Arc;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum OracleError {
    #[error("domain too large: {0}")]
    DomainTooLarge(String),
    #[error("unsupported sort for enumeration: {0}")]
    Sort(String),
    #[error(transparent)]
    Backend(#[from] BackendError),
    #[error(transparent)]
    Mbp(#[from] MbpError),
    #[error(transparent)]
    Eval(#[from] EvalError),
}

// ---------------------------------------------------------------------
// Finite domains

/// Finite universe for brute-force checks. Padding points extend the index
/// domain of arrays without being values of any variable, which mimics an
/// infinite index sort for formulas that only mention variable indices.
/// The margin widens the value range of quantified variables and array
/// contents beyond that of free variables, so that integer projections
/// such as `∃s. s < v ≡ ⊤` stay valid.
#[derive(Clone, Debug)]
pub struct FiniteDomainSpec {
    pub index: Vec<i64>,
    pub values: Vec<i64>,
    pub padding: usize,
    pub margin: i64,
}

const PAD_BASE: i64 = 1000;

impl FiniteDomainSpec {
    pub fn new(index: Vec<i64>, values: Vec<i64>) -> Result<FiniteDomainSpec, OracleError> {
        if index.is_empty() || index.len() > 4 || values.is_empty() || values.len() > 5 {
            return Err(OracleError::DomainTooLarge(format!("{} indices, {} values", index.len(), values.len())));
        }
        Ok(FiniteDomainSpec { index, values, padding: 0, margin: 0 })
    }

    pub fn with_padding(mut self, n: usize) -> FiniteDomainSpec {
        self.padding = n;
        self
    }

    pub fn with_margin(mut self, k: i64) -> FiniteDomainSpec {
        self.margin = k;
        self
    }

    fn wide_values(&self) -> Vec<i64> {
        let (lo, hi) = (*self.values.iter().min().unwrap(), *self.values.iter().max().unwrap());
        let mut v: Vec<i64> = (lo - self.margin..lo).collect();
        v.extend(&self.values);
        v.extend(hi + 1..=hi + self.margin);
        v
    }

    /// Array index points: the index domain plus padding.
    pub fn points(&self) -> Vec<i64> {
        let mut p = self.index.clone();
        p.extend((0..self.padding as i64).map(|k| PAD_BASE + k));
        p
    }

    pub fn domain(&self) -> IndexDomain {
        IndexDomain::Finite(self.points())
    }

    fn basic(&self, s: &Sort, index_role: bool, wide: bool) -> Result<Vec<Value>, OracleError> {
        match s {
            Sort::Bool => Ok(vec![Value::Bool(false), Value::Bool(true)]),
            Sort::Int if index_role => Ok(self.index.iter().map(|n| Value::Int(*n)).collect()),
            Sort::Int if wide => Ok(self.wide_values().into_iter().map(Value::Int).collect()),
            Sort::Int => Ok(self.values.iter().map(|n| Value::Int(*n)).collect()),
            s => Err(OracleError::Sort(s.to_string())),
        }
    }

    /// All arrays of the given sort over the finite universe; `wide` arrays
    /// range over the values within the margin.
    pub fn arrays(&self, s: &Sort, wide: bool) -> Result<Vec<Value>, OracleError> {
        let (is, vs) = match s {
            Sort::Array(i, v) => (i.as_ref(), v.as_ref()),
            _ => return Err(OracleError::Sort(s.to_string())),
        };
        let points: Vec<Value> = match is {
            Sort::Bool => vec![Value::Bool(false), Value::Bool(true)],
            _ => self.points().into_iter().map(Value::Int).collect(),
        };
        let vals = self.basic(vs, false, wide)?;
        let total = (vals.len() as u64).checked_pow(points.len() as u32).unwrap_or(u64::MAX);
        if total > 100_000 {
            return Err(OracleError::DomainTooLarge(format!("{} arrays", total)));
        }
        let mut out = Vec::with_capacity(total as usize);
        for code in 0..total {
            let mut c = code;
            let graph: Vec<(Value, Value)> = points
                .iter()
                .map(|p| {
                    let v = vals[(c % vals.len() as u64) as usize].clone();
                    c /= vals.len() as u64;
                    (p.clone(), v)
                })
                .collect();
            out.push(Value::Array(Arc::new(ArrayValue::from_graph(s.clone(), vals[0].clone(), graph))));
        }
        Ok(out)
    }

    fn values_for(&self, v: &Var, index_vars: &HashSet<Var>, quantified: bool) -> Result<Vec<Value>, OracleError> {
        if v.sort.is_array() {
            return self.arrays(&v.sort, quantified);
        }
        if v.name.starts_with("qe!i!") {
            return match v.sort {
                Sort::Bool => self.basic(&Sort::Bool, true, false),
                _ => Ok(self.points().into_iter().map(Value::Int).collect()),
            };
        }
        self.basic(&v.sort, index_vars.contains(v), quantified)
    }
}

/// Variables occurring in index positions.
pub fn index_vars(t: &Term) -> HashSet<Var> {
    let mut out = HashSet::new();
    t.visit_post(&mut |n| match n.kind() {
        Kind::Rd(_, i) | Kind::Wr(_, i, _) => out.extend(i.free_vars()),
        Kind::Peq(_, _, idx) => idx.iter().for_each(|i| out.extend(i.free_vars())),
        _ => {}
    });
    out
}

/// Truth table of a formula over its free variables.
#[derive(Clone, Debug)]
pub struct Table {
    pub vars: Vec<Var>,
    pub rows: Vec<(Vec<Value>, bool)>,
}

impl Table {
    pub fn is_constant(&self, b: bool) -> bool {
        self.rows.iter().all(|(_, v)| *v == b)
    }
}

/// Iterate over all assignments of `vars`, calling `f` until it returns true.
fn search(
    vars: &[Var],
    doms: &[Vec<Value>],
    m: &mut Model,
    f: &mut dyn FnMut(&Model) -> Result<bool, OracleError>,
) -> Result<bool, OracleError> {
    if vars.is_empty() {
        return f(m);
    }
    for val in &doms[0] {
        m.set(&vars[0], val.clone());
        if search(&vars[1..], &doms[1..], m, f)? {
            return Ok(true);
        }
    }
    Ok(false)
}

/// `∃vars. phi` under `m`, by enumeration.
fn exists_in(vars: &[Var], doms: &[Vec<Value>], phi: &Term, m: &Model, domain: &IndexDomain) -> Result<bool, OracleError> {
    let mut m = m.clone();
    search(vars, doms, &mut m, &mut |m| Ok(Evaluator::with_domain(m, domain.clone()).eval_bool(phi)?))
}

/// Truth table of `∃ task.quantified. task.body` over the finite universe.
pub fn brute_qe(task: &QeTask, spec: &FiniteDomainSpec) -> Result<Table, OracleError> {
    let ivars = index_vars(&task.body);
    let free: Vec<Var> = task.body.free_vars().into_iter().filter(|v| *v != task.quantified).collect();
    let doms = free.iter().map(|v| spec.values_for(v, &ivars, false)).collect::<Result<Vec<_>, _>>()?;
    let arrays = spec.arrays(&task.quantified.sort, true)?;
    let domain = spec.domain();
    let mut rows = Vec::new();
    let mut m = Model::new();
    search(&free, &doms, &mut m, &mut |m| {
        let ok = exists_in(std::slice::from_ref(&task.quantified), std::slice::from_ref(&arrays), &task.body, m, &domain)?;
        rows.push((free.iter().map(|v| m.get(v).unwrap().clone()).collect(), ok));
        Ok(false)
    })?;
    Ok(Table { vars: free, rows })
}

/// Compare a QE result with the brute-force table; returns the first
/// disagreeing assignment.
pub fn check_qe_pointwise(task: &QeTask, result: &QeResult, spec: &FiniteDomainSpec) -> Result<Option<Model>, OracleError> {
    let table = brute_qe(task, spec)?;
    let mut ivars = index_vars(&task.body);
    ivars.extend(index_vars(&result.matrix));
    let fresh = result.fresh_vars();
    let fdoms = fresh.iter().map(|v| spec.values_for(v, &ivars, true)).collect::<Result<Vec<_>, _>>()?;
    let domain = spec.domain();
    for (vals, expect) in &table.rows {
        let m = table.vars.iter().zip(vals).fold(Model::new(), |m, (v, x)| m.with(v, x.clone()));
        let got = exists_in(&fresh, &fdoms, &result.matrix, &m, &domain)?;
        if got != *expect {
            return Ok(Some(m));
        }
    }
    Ok(None)
}

/// Compare `∃vars. phi` and `∃vars. psi` pointwise over the finite universe;
/// returns the first disagreeing assignment of the free variables.
pub fn brute_exists_equal(vars: &[Var], phi: &Term, psi: &Term, spec: &FiniteDomainSpec) -> Result<Option<Model>, OracleError> {
    let mut ivars = index_vars(phi);
    ivars.extend(index_vars(psi));
    let mut all = phi.free_vars();
    all.extend(psi.free_vars());
    let free: Vec<Var> = all.into_iter().filter(|v| !vars.contains(v)).collect();
    let doms = free.iter().map(|v| spec.values_for(v, &ivars, false)).collect::<Result<Vec<_>, _>>()?;
    let qdoms = vars.iter().map(|v| spec.values_for(v, &ivars, true)).collect::<Result<Vec<_>, _>>()?;
    let domain = spec.domain();
    let mut found = None;
    let mut m = Model::new();
    search(&free, &doms, &mut m, &mut |m| {
        let a = exists_in(vars, &qdoms, phi, m, &domain)?;
        let b = exists_in(vars, &qdoms, psi, m, &domain)?;
        if a != b {
            found = Some(m.clone());
        }
        Ok(a != b)
    })?;
    Ok(found)
}

/// Find an assignment where `phi` holds but `∃vars. psi` does not.
pub fn brute_entails(phi: &Term, vars: &[Var], psi: &Term, spec: &FiniteDomainSpec) -> Result<Option<Model>, OracleError> {
    brute_entails_confirmed(phi, vars, psi, spec, &mut |_| Ok(true))
}

/// Like [`brute_entails`], but each candidate must also pass `confirm`;
/// rejected candidates are skipped.
pub fn brute_entails_confirmed(
    phi: &Term,
    vars: &[Var],
    psi: &Term,
    spec: &FiniteDomainSpec,
    confirm: &mut dyn FnMut(&Model) -> Result<bool, OracleError>,
) -> Result<Option<Model>, OracleError> {
    let mut ivars = index_vars(phi);
    ivars.extend(index_vars(psi));
    let mut all = phi.free_vars();
    all.extend(psi.free_vars());
    let free: Vec<Var> = all.into_iter().filter(|v| !vars.contains(v)).collect();
    let doms = free.iter().map(|v| spec.values_for(v, &ivars, false)).collect::<Result<Vec<_>, _>>()?;
    let qdoms = vars.iter().map(|v| spec.values_for(v, &ivars, true)).collect::<Result<Vec<_>, _>>()?;
    let domain = spec.domain();
    let mut found = None;
    let mut m = Model::new();
    search(&free, &doms, &mut m, &mut |m| {
        let bad = Evaluator::with_domain(m, domain.clone()).eval_bool(phi)?
            && !exists_in(vars, &qdoms, psi, m, &domain)?
            && confirm(m)?;
        if bad {
            found = Some(m.clone());
        }
        Ok(bad)
    })?;
    Ok(found)
}

/// Outcome of checking one logged projection.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum ContractCheck {
    /// Entailment decided by the backend.
    Backend,
    /// Backend inconclusive; entailment checked by enumeration.
    Enumerated,
    Violation(String),
    Inconclusive(String),
}

/// Check `M ⊨ result`, absence of the projected variables, and
/// `result ⟹ ∃quantified. body`.
pub fn check_mbp_record(rec: &MbpRecord, sess: &mut Session) -> ContractCheck {
    match Evaluator::with_domain(&rec.model, rec.domain.clone()).eval_bool(&rec.result) {
        Ok(true) => {}
        Ok(false) => return ContractCheck::Violation(format!("model falsifies {}", rec.result)),
        Err(e) => return ContractCheck::Violation(format!("cannot evaluate {}: {}", rec.result, e)),
    }
    if let Some(v) = rec.quantified.iter().find(|v| rec.result.contains_var(v)) {
        return ContractCheck::Violation(format!("{} survives in {}", v.name, rec.result));
    }
    let lhs = Exists::plain(rec.result.clone());
    let rhs = Exists::new(rec.quantified.clone(), rec.body.clone());
    match sess.entails_closed(&lhs, &rhs) {
        Ok(true) => return ContractCheck::Backend,
        Ok(false) => return ContractCheck::Violation(format!("{} does not entail the projected body", rec.result)),
        Err(_) => {}
    }
    let spec = FiniteDomainSpec { index: vec![0, 1], values: vec![0, 1], padding: 1, margin: 1 };
    // A finite witness search can miss witnesses outside the value range, so
    // a candidate only counts once the backend confirms it on the ground
    // instance: the result holds there, and no witness exists at all.
    let points = spec.points();
    let mut confirm = |m: &Model| -> Result<bool, OracleError> {
        let mut pins = vec![rec.result.clone()];
        for (v, val) in m.iter() {
            match val {
                Value::Array(arr) => {
                    let keys: Vec<Value> = match v.sort.index() {
                        Some(Sort::Bool) => vec![Value::Bool(false), Value::Bool(true)],
                        _ => points.iter().map(|p| Value::Int(*p)).collect(),
                    };
                    pins.extend(keys.iter().map(|k| {
                        Term::eq(&Term::rd(&v.term(), &k.to_term().unwrap()), &arr.select(k).to_term().unwrap())
                    }));
                }
                _ => pins.push(Term::eq(&v.term(), &val.to_term().unwrap())),
            }
        }
        let pinned = Term::and(pins);
        match sess.check_one(&pinned)? {
            SatResult::Unsat(_) => return Ok(false),
            SatResult::Unknown(r) => return Err(OracleError::Backend(BackendError::Unknown(r))),
            SatResult::Sat(_) => {}
        }
        match sess.check_one(&Term::and2(&pinned, &rec.body))? {
            SatResult::Unsat(_) => Ok(true),
            SatResult::Sat(_) => Ok(false),
            SatResult::Unknown(r) => Err(OracleError::Backend(BackendError::Unknown(r))),
        }
    };
    match brute_entails_confirmed(&rec.result, &rec.quantified, &rec.body, &spec, &mut confirm) {
        Ok(None) => ContractCheck::Enumerated,
        Ok(Some(m)) => ContractCheck::Violation(format!("{} does not entail the projected body at {}", rec.result, m)),
        Err(e) => ContractCheck::Inconclusive(e.to_string()),
    }
}

// ---------------------------------------------------------------------
// Projection enumeration

#[derive(Clone, Debug)]
pub struct Enumeration {
    pub results: Vec<Term>,
    pub used_substitution: bool,
    /// False when the iteration cap stopped the loop.
    pub complete: bool,
}

impl Enumeration {
    pub fn disjunction(&self) -> Term {
        Term::or(self.results.clone())
    }
}

/// Solve, project, block, repeat until the body is exhausted.
pub fn mbp_enumerate(
    body: &Term,
    quantified: &[Var],
    sess: &mut Session,
    opts: &MbpOptions,
    cap: usize,
) -> Result<Enumeration, OracleError> {
    let mut out = Enumeration { results: vec![], used_substitution: false, complete: false };
    let mut blocked = vec![body.clone()];
    loop {
        let items: Vec<(String, Term)> = blocked.iter().enumerate().map(|(k, t)| (format!("b{}", k), t.clone())).collect();
        match sess.check(&items)? {
            SatResult::Unsat(_) => {
                out.complete = true;
                return Ok(out);
            }
            SatResult::Unknown(r) => return Err(OracleError::Backend(BackendError::Unknown(r))),
            SatResult::Sat(_) if out.results.len() >= cap => return Ok(out),
            SatResult::Sat(m) => {
                let task = MbpTask { quantified: quantified.to_vec(), body: body.clone(), model: m };
                let r = combined_mbp(&task, opts)?;
                out.used_substitution |= r.used_substitution;
                blocked.push(Term::not(&r.result));
                out.results.push(r.result);
            }
        }
    }
}

/// Number of cubes in the disjunctive normal form of an NNF formula.
fn cube_count(t: &Term) -> u128 {
    match t.kind() {
        Kind::Or(xs) => xs.iter().map(cube_count).fold(0u128, |a, b| a.saturating_add(b)),
        Kind::And(xs) => xs.iter().map(cube_count).fold(1u128, |a, b| a.saturating_mul(b)),
        _ => 1,
    }
}

/// Upper bound on the number of distinct projections of `∃a. body`: the
/// lifted disjuncts times the cubes of the input, times the ways a model can resolve each branching
/// rewrite, order the read indices, and pick bounds for the value variables.
pub fn enumeration_bound(body: &Term, qe: &QeResult) -> u128 {
    let rule = |r: &str| *qe.stats.per_rule.get(r).unwrap_or(&0) as u32;
    let fubini = |n: u32| -> u128 {
        // ordered set partitions
        let mut f = vec![1u128];
        for m in 1..=n as usize {
            let mut sum = 0u128;
            let mut binom = 1u128;
            for k in 1..=m {
                binom = binom * (m - k + 1) as u128 / k as u128;
                sum = sum.saturating_add(binom.saturating_mul(f[m - k]));
            }
            f.push(sum);
        }
        f[n as usize]
    };
    let lia = (body.size() as u128 + 1).saturating_pow(qe.fresh_vars().len() as u32);
    (qe.stats.disjuncts.max(1) as u128)
        .saturating_mul(cube_count(&crate::term::to_nnf(body)))
        .saturating_mul(2u128.saturating_pow(rule("ElimWrRd") + rule("ElimIte")))
        .saturating_mul(4u128.saturating_pow(rule("ElimWrEq")))
        .saturating_mul(fubini(rule("FactorRd")))
        .saturating_mul(lia)
}

// ---------------------------------------------------------------------
// Bounded reachability

#[derive(Clone, Debug)]
pub enum Reach {
    Reachable(Model),
    Unreachable,
}

impl Reach {
    pub fn is_reachable(&self) -> bool {
        matches!(self, Reach::Reachable(_))
    }
}

fn node_vars(sys: &ChcSystem, tag: &str) -> Vec<Var> {
    sys.state_vars.iter().map(|v| v.renamed(&format!("{}!bmc{}", v.name, tag))).collect()
}

fn local_renaming(sys: &ChcSystem, f: &Term, tag: &str) -> Vec<(Var, Var)> {
    sys.locals_of(f).into_iter().map(|v| {
        let w = v.renamed(&format!("{}!bmc{}", v.name, tag));
        (v, w)
    }).collect()
}

/// States derivable within `depth` steps, over the node copy `tag`.
fn reach_formula(sys: &ChcSystem, depth: usize, tag: &str) -> Term {
    let here = node_vars(sys, tag);
    let mut pairs: Vec<(Var, Var)> = sys.state_vars.iter().cloned().zip(here.iter().cloned()).collect();
    pairs.extend(local_renaming(sys, &sys.init, tag));
    let init = Subst::renaming(&pairs).apply(&sys.init);
    if depth == 0 {
        return init;
    }
    let (lt, rt) = (format!("{}l", tag), format!("{}r", tag));
    let mut pairs: Vec<(Var, Var)> = sys.post_vars.iter().cloned().zip(here.iter().cloned()).collect();
    pairs.extend(sys.state_vars.iter().cloned().zip(node_vars(sys, &lt)));
    pairs.extend(sys.call_vars.iter().cloned().zip(node_vars(sys, &rt)));
    pairs.extend(local_renaming(sys, &sys.tr, tag));
    let tr = Subst::renaming(&pairs).apply(&sys.tr);
    let mut step = vec![reach_formula(sys, depth - 1, &lt), tr];
    if sys.has_call {
        step.push(reach_formula(sys, depth - 1, &rt));
    }
    Term::or2(&init, &Term::and(step))
}

/// Is a bad state derivable within `depth` steps?
pub fn bmc_reach(sys: &ChcSystem, depth: usize, sess: &mut Session) -> Result<Reach, BackendError> {
    let root = "";
    let reach = reach_formula(sys, depth, root);
    let mut pairs: Vec<(Var, Var)> = sys.state_vars.iter().cloned().zip(node_vars(sys, root)).collect();
    pairs.extend(local_renaming(sys, &sys.bad, "!q"));
    let bad = Subst::renaming(&pairs).apply(&sys.bad);
    match sess.check(&[("reach".into(), reach), ("bad".into(), bad)])? {
        SatResult::Sat(m) => Ok(Reach::Reachable(m)),
        SatResult::Unsat(_) => Ok(Reach::Unreachable),
        SatResult::Unknown(r) => Err(BackendError::Unknown(r)),
    }
}

/// Smallest depth ≤ `max` at which a bad state is derivable.
pub fn bmc_min_depth(sys: &ChcSystem, max: usize, sess: &mut Session) -> Result<Option<usize>, BackendError> {
    for d in 0..=max {
        if bmc_reach(sys, d, sess)?.is_reachable() {
            return Ok(Some(d));
        }
    }
    Ok(None)
}

// ---------------------------------------------------------------------
// Random tasks

pub mod gen {
    use super::*;
    use rand::Rng;

    #[derive(Clone, Debug)]
    pub struct GenConfig {
        pub index_sort: Sort,
        pub value_sort: Sort,
        pub index_vars: usize,
        pub value_vars: usize,
        pub other_arrays: usize,
        pub max_writes: usize,
        pub max_reads: usize,
        pub atoms: usize,
        pub constants: Vec<i64>,
    }

    impl Default for GenConfig {
        fn default() -> GenConfig {
            GenConfig {
                index_sort: Sort::Int,
                value_sort: Sort::Int,
                index_vars: 3,
                value_vars: 1,
                other_arrays: 1,
                max_writes: 3,
                max_reads: 4,
                atoms: 3,
                constants: vec![0, 1],
            }
        }
    }

    struct G<'r, R: Rng> {
        rng: &'r mut R,
        cfg: GenConfig,
        a: Term,
        others: Vec<Term>,
        idx: Vec<Term>,
        vals: Vec<Term>,
        writes: usize,
        reads: usize,
    }

    impl<R: Rng> G<'_, R> {
        fn pick(&mut self, xs: &[Term]) -> Term {
            xs[self.rng.random_range(0..xs.len())].clone()
        }

        fn index(&mut self) -> Term {
            let xs = self.idx.clone();
            self.pick(&xs)
        }

        fn value(&mut self) -> Term {
            if self.cfg.value_sort == Sort::Bool {
                if self.vals.is_empty() || self.rng.random_bool(0.3) {
                    return Term::bool(self.rng.random_bool(0.5));
                }
                let xs = self.vals.clone();
                return self.pick(&xs);
            }
            if self.vals.is_empty() || self.rng.random_bool(0.4) {
                let k = self.rng.random_range(0..self.cfg.constants.len());
                return Term::int(self.cfg.constants[k]);
            }
            let xs = self.vals.clone();
            self.pick(&xs)
        }

        fn array(&mut self) -> Term {
            let mut t = if self.others.is_empty() || self.rng.random_bool(0.6) {
                self.a.clone()
            } else {
                let xs = self.others.clone();
                self.pick(&xs)
            };
            while self.writes < self.cfg.max_writes && self.rng.random_bool(0.35) {
                self.writes += 1;
                let (i, v) = (self.index(), self.value());
                t = Term::wr(&t, &i, &v);
            }
            t
        }

        fn read_atom(&mut self) -> Term {
            self.reads += 1;
            let r = Term::rd(&self.array(), &self.index());
            if self.cfg.value_sort == Sort::Bool {
                return if self.rng.random_bool(0.5) { r } else { Term::eq(&r, &self.value()) };
            }
            let v = self.value();
            match self.rng.random_range(0..3) {
                0 => Term::eq(&r, &v),
                1 => Term::lt(&r, &v),
                _ => Term::lt(&v, &r),
            }
        }

        fn atom(&mut self) -> Term {
            let k = self.rng.random_range(0..10);
            if k < 5 && self.reads < self.cfg.max_reads {
                self.read_atom()
            } else if k < 8 {
                let (x, y) = (self.array(), self.array());
                Term::eq(&x, &y)
            } else {
                let (i, j) = (self.index(), self.index());
                Term::eq(&i, &j)
            }
        }

        fn formula(&mut self, atoms: usize) -> Term {
            if atoms <= 1 {
                let a = self.atom();
                return if self.rng.random_bool(0.3) { Term::not(&a) } else { a };
            }
            let left = self.rng.random_range(1..atoms);
            let (x, y) = (self.formula(left), self.formula(atoms - left));
            let f = if self.rng.random_bool(0.5) { Term::and2(&x, &y) } else { Term::or2(&x, &y) };
            if self.rng.random_bool(0.15) {
                Term::not(&f)
            } else {
                f
            }
        }
    }

    /// A random task `∃a. body` within the configured size bounds.
    pub fn qe_task<R: Rng>(rng: &mut R, cfg: &GenConfig) -> QeTask {
        let asort = Sort::array(cfg.index_sort.clone(), cfg.value_sort.clone());
        let a = Var::new("a", asort.clone());
        let others = (0..cfg.other_arrays).map(|k| Term::new_var(&format!("b{}", k), asort.clone())).collect();
        let idx = (0..cfg.index_vars).map(|k| Term::new_var(&format!("i{}", k), cfg.index_sort.clone())).collect();
        let vals = (0..cfg.value_vars).map(|k| Term::new_var(&format!("v{}", k), cfg.value_sort.clone())).collect();
        let mut g = G { rng, cfg: cfg.clone(), a: a.term(), others, idx, vals, writes: 0, reads: 0 };
        let mut body = g.formula(cfg.atoms);
        if !body.contains_var(&a) {
            let extra = Term::rd(&a.term(), &g.index());
            let extra = if cfg.value_sort == Sort::Bool { extra } else { Term::lt(&g.value(), &extra) };
            body = Term::and2(&body, &extra);
        }
        QeTask::new(a, body)
    }
}
