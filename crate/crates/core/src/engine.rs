//! Proof search over may and must summaries.
//!
//! Frames are kept as lemma deltas: `O_i` is the conjunction of the lemmas
//! stored at levels `i` and above, plus `init` at level 0 when `init` has
//! no local variables. This makes `O_i ⟹ O_{i+1}` hold by construction.
//! `O_{-1}` is ⊥.

use crate::chc::{ChcSystem, Copy};
use crate::mbp::{combined_mbp, MbpOptions, MbpOutcome, MbpTask};
use crate::model::{IndexDomain, Model};
use crate::oracles::{bmc_reach, Reach};
use crate::smt::{BackendError, Entailment, SatResult, Session, SolverConfig};
use crate::term::{to_nnf, Term, Var};
use std::collections::{BTreeMap, HashSet};
use std::fmt;
use std::time::{Duration, Instant};

#[derive(Clone, Debug)]
pub struct EngineOptions {
    pub solver: SolverConfig,
    /// Bound on the level `N`; exceeding it yields Unknown.
    pub max_depth: Option<usize>,
    pub time_budget: Option<Duration>,
    pub heuristic_array_eq: bool,
    pub heuristic_eq_res: bool,
    pub successor_mbp: bool,
    pub finite_index: bool,
    /// Re-check Safe invariants against the clauses and Unsafe depths by BMC.
    pub validate: bool,
    /// Check the trace invariants after every rule application.
    pub debug_checks: bool,
    /// Echo trace events to stderr as they happen.
    pub trace: bool,
}

impl Default for EngineOptions {
    fn default() -> EngineOptions {
        EngineOptions {
            solver: SolverConfig::default(),
            max_depth: None,
            time_budget: None,
            heuristic_array_eq: false,
            heuristic_eq_res: true,
            successor_mbp: true,
            finite_index: false,
            validate: false,
            debug_checks: false,
            trace: false,
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub enum Verdict {
    Safe(Term),
    /// Depth of the must-summary derivation hitting `bad`, and the
    /// must-summary disjuncts along it, deepest first.
    Unsafe { depth: usize, witness: Vec<Term> },
    Unknown(String),
}

impl Verdict {
    pub fn is_safe(&self) -> bool {
        matches!(self, Verdict::Safe(_))
    }

    pub fn is_unsafe(&self) -> bool {
        matches!(self, Verdict::Unsafe { .. })
    }
}

#[derive(Clone, Debug)]
pub struct TraceEvent {
    pub rule: &'static str,
    pub level: usize,
    pub size: usize,
    pub note: String,
}

impl fmt::Display for TraceEvent {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "event={} level={} size={}", self.rule, self.level, self.size)?;
        if !self.note.is_empty() {
            write!(f, " note={:?}", self.note)?;
        }
        Ok(())
    }
}

#[derive(Clone, Debug, Default)]
pub struct EngineStats {
    pub rules: BTreeMap<&'static str, usize>,
    pub queries: usize,
    pub lemmas: usize,
    pub mbp_calls: usize,
    pub substitutions: usize,
    /// Blocked (cube, level) pairs seen again.
    pub blocked_cache_hits: usize,
    pub invariant_checks: usize,
    pub backend_checks: usize,
    pub level: usize,
}

#[derive(Clone, Debug)]
pub struct SolveReport {
    pub verdict: Verdict,
    pub stats: EngineStats,
    pub trace: Vec<TraceEvent>,
    /// Trace-invariant or interpolation violations seen in debug mode.
    pub violations: Vec<String>,
}

struct UDisjunct {
    cube: Term,
    depth: usize,
    parents: Vec<usize>,
}

#[derive(Clone)]
struct Query {
    cube: Term,
    lits: Vec<Term>,
    subst_lits: Vec<Term>,
    level: usize,
    created: usize,
}

enum Stop {
    Verdict(Verdict),
    Error(String),
}

impl From<BackendError> for Stop {
    fn from(e: BackendError) -> Stop {
        Stop::Error(format!("backend: {}", e))
    }
}

type Step<T> = Result<T, Stop>;

struct Engine<'a> {
    sys: &'a ChcSystem,
    opts: &'a EngineOptions,
    sess: Session,
    delta: Vec<Vec<Term>>,
    u: Vec<UDisjunct>,
    queue: Vec<Query>,
    n: usize,
    clock: usize,
    blocked: HashSet<(Term, usize)>,
    stats: EngineStats,
    trace: Vec<TraceEvent>,
    violations: Vec<String>,
    start: Instant,
    init_in_o0: bool,
}

/// Solve a normalized system.
pub fn solve(sys: &ChcSystem, opts: &EngineOptions) -> SolveReport {
    let sess = match Session::new(opts.solver.clone()) {
        Ok(s) => s,
        Err(e) => {
            return SolveReport {
                verdict: Verdict::Unknown(format!("backend: {}", e)),
                stats: EngineStats::default(),
                trace: vec![],
                violations: vec![],
            }
        }
    };
    let mut e = Engine {
        sys,
        opts,
        sess,
        delta: vec![vec![], vec![]],
        u: vec![UDisjunct { cube: sys.init.clone(), depth: 0, parents: vec![] }],
        queue: vec![],
        n: 0,
        clock: 0,
        blocked: HashSet::new(),
        stats: EngineStats::default(),
        trace: vec![],
        violations: vec![],
        start: Instant::now(),
        init_in_o0: !sys.init_has_locals(),
    };
    let verdict = match e.run() {
        Ok(v) => v,
        Err(Stop::Verdict(v)) => v,
        Err(Stop::Error(msg)) => Verdict::Unknown(msg),
    };
    let verdict = if opts.validate { e.validate(verdict) } else { verdict };
    e.stats.level = e.n;
    e.stats.backend_checks = e.sess.stats().checks;
    SolveReport { verdict, stats: e.stats, trace: e.trace, violations: e.violations }
}

impl Engine<'_> {
    fn event(&mut self, rule: &'static str, level: usize, f: &Term, note: String) {
        *self.stats.rules.entry(rule).or_insert(0) += 1;
        let ev = TraceEvent { rule, level, size: f.size(), note };
        if self.opts.trace {
            eprintln!("{}", ev);
        }
        self.trace.push(ev);
    }

    // ---- summaries ----

    /// `O_i`; level -1 is ⊥.
    fn frame(&self, i: isize) -> Term {
        if i < 0 {
            return Term::ff();
        }
        let i = i as usize;
        let mut parts = Vec::new();
        if i == 0 && self.init_in_o0 {
            parts.push(self.sys.init.clone());
        }
        for d in self.delta.iter().skip(i) {
            parts.extend(d.iter().cloned());
        }
        Term::and(parts)
    }

    /// `U` over the given copy.
    fn must(&self, c: Copy) -> Term {
        let mut parts = vec![self.sys.init_at(c)];
        parts.extend(self.u.iter().skip(1).map(|d| self.sys.to_copy(&d.cube, c)));
        Term::or(parts)
    }

    fn f(&self, a: &Term, b: &Term) -> Term {
        self.sys.mk_f(a, b)
    }

    fn f_must(&self, a: &Term) -> Term {
        let step = if self.sys.has_call {
            Term::and(vec![a.clone(), self.must(Copy::Call), self.sys.tr.clone()])
        } else {
            Term::and2(a, &self.sys.tr)
        };
        Term::or2(&self.sys.init_at(Copy::Post), &step)
    }

    fn f_u(&self) -> Term {
        let step = if self.sys.has_call {
            Term::and(vec![self.must(Copy::Cur), self.must(Copy::Call), self.sys.tr.clone()])
        } else {
            Term::and2(&self.must(Copy::Cur), &self.sys.tr)
        };
        Term::or2(&self.sys.init_at(Copy::Post), &step)
    }

    // ---- backend helpers ----

    fn sat(&mut self, parts: &[Term]) -> Step<Option<Model>> {
        let items: Vec<(String, Term)> = parts.iter().enumerate().map(|(k, t)| (format!("p{}", k), t.clone())).collect();
        match self.sess.check(&items)? {
            SatResult::Sat(m) => Ok(Some(m)),
            SatResult::Unsat(_) => Ok(None),
            SatResult::Unknown(r) => Err(Stop::Error(format!("backend unknown: {}", r))),
        }
    }

    fn valid(&mut self, phi: &Term, psi: &Term) -> Step<bool> {
        match self.sess.entails(phi, psi)? {
            Entailment::Valid => Ok(true),
            Entailment::Countermodel(_) => Ok(false),
        }
    }

    fn project(&mut self, body: &Term, keep: Copy, model: Model, queries: bool, substitute: bool) -> Step<MbpOutcome> {
        let keep_vars: HashSet<&Var> = self.sys.vars_of(keep).iter().collect();
        let mut quantified: Vec<Var> = body.free_vars().into_iter().filter(|v| !keep_vars.contains(v)).collect();
        quantified.sort_by_key(|v| !v.sort.is_array());
        let opts = MbpOptions {
            finite_index: self.opts.finite_index,
            domain: IndexDomain::Infinite,
            eq_resolution: self.opts.heuristic_eq_res,
            strengthen: queries && self.opts.heuristic_array_eq,
            substitute_only: substitute,
            ..MbpOptions::default()
        };
        self.stats.mbp_calls += 1;
        let out = combined_mbp(&MbpTask { quantified, body: body.clone(), model }, &opts)
            .map_err(|e| Stop::Error(format!("projection: {}", e)))?;
        if out.used_substitution {
            self.stats.substitutions += 1;
        }
        Ok(out)
    }

    // ---- queries ----

    fn push_query(&mut self, out: &MbpOutcome, from: Copy, level: usize) -> Step<()> {
        let cube = self.sys.from_copy(&out.result, from);
        let subst_lits: Vec<Term> = out.substituted_literals.iter().map(|l| self.sys.from_copy(l, from)).collect();
        if self.blocked.contains(&(cube.clone(), level)) {
            self.stats.blocked_cache_hits += 1;
        }
        if self.opts.debug_checks {
            self.stats.invariant_checks += 1;
            if self.sat(std::slice::from_ref(&cube))?.is_none() {
                self.violations.push(format!("unsatisfiable query {}", cube));
            }
        }
        self.clock += 1;
        self.stats.queries += 1;
        self.queue.push(Query { lits: cube.conjuncts(), cube, subst_lits, level, created: self.clock });
        Ok(())
    }

    /// Lowest level first, newest first within a level.
    fn pop_query(&mut self) -> Option<Query> {
        let k = (0..self.queue.len()).min_by_key(|&k| (self.queue[k].level, std::cmp::Reverse(self.queue[k].created)))?;
        Some(self.queue.swap_remove(k))
    }

    // ---- main loop ----

    fn check_budget(&self) -> Step<()> {
        if let Some(b) = self.opts.time_budget {
            if self.start.elapsed() > b {
                return Err(Stop::Error(format!("time budget of {:?} exhausted at level {}", b, self.n)));
            }
        }
        Ok(())
    }

    fn run(&mut self) -> Step<Verdict> {
        if self.sat(&[self.sys.init.clone(), self.sys.bad.clone()])?.is_some() {
            self.event("Unsafe", 0, &self.sys.init.clone(), "init meets bad".into());
            return Ok(Verdict::Unsafe { depth: 0, witness: vec![self.sys.init.clone()] });
        }
        self.debug_check()?;
        loop {
            self.check_budget()?;
            if let Some(q) = self.pop_query() {
                self.process(q)?;
                self.debug_check()?;
                continue;
            }
            let on = self.frame(self.n as isize);
            if let Some(m) = self.sat(&[on.clone(), self.sys.bad.clone()])? {
                let body = Term::and2(&on, &self.sys.bad);
                let out = self.project(&body, Copy::Cur, m, true, false)?;
                self.event("Candidate", self.n, &out.result, String::new());
                self.push_query(&out, Copy::Cur, self.n)?;
                continue;
            }
            if let Some(max) = self.opts.max_depth {
                if self.n >= max {
                    return Err(Stop::Error(format!("depth bound {} reached", max)));
                }
            }
            self.n += 1;
            while self.delta.len() <= self.n + 1 {
                self.delta.push(vec![]);
            }
            self.event("Unfold", self.n, &on, String::new());
            self.debug_check()?;
            self.induction()?;
            if let Some(inv) = self.safe()? {
                return Ok(Verdict::Safe(inv));
            }
        }
    }

    fn process(&mut self, q: Query) -> Step<()> {
        let level = q.level;
        let qp = self.sys.to_copy(&q.cube, Copy::Post);

        // Successor
        let fu = self.f_u();
        if let Some(m) = self.sat(&[fu.clone(), qp.clone()])? {
            let (depth, parents) = self.derivation(&m)?;
            let body = Term::and2(&fu, &qp);
            let out = self.project(&body, Copy::Post, m, false, !self.opts.successor_mbp)?;
            let cube = self.sys.from_copy(&out.result, Copy::Post);
            self.event("Successor", level, &cube, format!("depth {}", depth));
            if self.opts.debug_checks {
                self.stats.invariant_checks += 1;
                if self.sat(std::slice::from_ref(&cube))?.is_none() {
                    self.violations.push(format!("unsatisfiable must disjunct {}", cube));
                }
            }
            self.u.push(UDisjunct { cube: cube.clone(), depth, parents });
            if self.sat(&[cube.clone(), self.sys.bad.clone()])?.is_some() {
                let k = self.u.len() - 1;
                self.event("Unsafe", self.n, &cube, format!("depth {}", depth));
                return Err(Stop::Verdict(Verdict::Unsafe { depth, witness: self.trail(k) }));
            }
            return Ok(());
        }
        if level == 0 {
            return self.conflict(q);
        }
        let prev = self.frame(level as isize - 1);

        // DecideMust
        let fm = self.f_must(&prev);
        if let Some(m) = self.sat(&[fm.clone(), qp.clone()])? {
            let out = self.project(&Term::and2(&fm, &qp), Copy::Cur, m, true, false)?;
            self.event("DecideMust", level - 1, &out.result, String::new());
            self.queue.push(q);
            return self.push_query(&out, Copy::Cur, level - 1);
        }

        // DecideMay
        if self.sys.has_call {
            let ff = self.f(&prev, &prev);
            if let Some(m) = self.sat(&[ff.clone(), qp.clone()])? {
                let out = self.project(&Term::and2(&ff, &qp), Copy::Call, m, true, false)?;
                self.event("DecideMay", level - 1, &out.result, String::new());
                self.queue.push(q);
                return self.push_query(&out, Copy::Call, level - 1);
            }
        }
        self.conflict(q)
    }

    /// Depth and parents of the derivation the model witnesses for `F(U)`.
    fn derivation(&mut self, m: &Model) -> Step<(usize, Vec<usize>)> {
        let holds = |t: &Term| m.eval_bool(t).unwrap_or(false);
        if holds(&self.sys.init_at(Copy::Post)) {
            return Ok((0, vec![]));
        }
        let mut parents = Vec::new();
        let copies: &[Copy] = if self.sys.has_call { &[Copy::Cur, Copy::Call] } else { &[Copy::Cur] };
        for &c in copies {
            let k = (0..self.u.len()).find(|&k| {
                let d = if k == 0 { self.sys.init_at(c) } else { self.sys.to_copy(&self.u[k].cube, c) };
                holds(&d)
            });
            match k {
                Some(k) => parents.push(k),
                None => return Err(Stop::Error("must-summary model matches no disjunct".into())),
            }
        }
        let depth = 1 + parents.iter().map(|&k| self.u[k].depth).max().unwrap_or(0);
        Ok((depth, parents))
    }

    fn trail(&self, k: usize) -> Vec<Term> {
        let mut out = Vec::new();
        let mut stack = vec![k];
        while let Some(k) = stack.pop() {
            out.push(self.u[k].cube.clone());
            stack.extend(self.u[k].parents.iter().rev());
        }
        out
    }

    // ---- Conflict, Leaf ----

    fn conflict(&mut self, q: Query) -> Step<()> {
        let level = q.level;
        let fprev = if level == 0 {
            self.sys.init_at(Copy::Post)
        } else {
            let p = self.frame(level as isize - 1);
            self.f(&p, &p)
        };
        let post = |e: &Engine, l: &Term| e.sys.to_copy(l, Copy::Post);
        let mut kept: Vec<Term> = q.lits.clone();
        // generalize literals produced by value substitution
        for l in &q.subst_lits {
            if !kept.contains(l) {
                continue;
            }
            let trial: Vec<Term> = kept.iter().filter(|k| *k != l).cloned().collect();
            let mut parts = vec![fprev.clone()];
            parts.extend(trial.iter().map(|t| post(self, t)));
            if self.sat(&parts)?.is_none() {
                kept = trial;
            }
        }
        let mut items = vec![("F".to_string(), fprev.clone())];
        items.extend(kept.iter().enumerate().map(|(k, l)| (format!("l{}", k), post(self, l))));
        match self.sess.check(&items)? {
            SatResult::Unsat(core) => {
                let core: HashSet<String> = core.into_iter().collect();
                kept = kept
                    .into_iter()
                    .enumerate()
                    .filter(|(k, _)| core.contains(&format!("l{}", k)))
                    .map(|(_, l)| l)
                    .collect();
            }
            SatResult::Sat(_) => return Err(Stop::Error("conflict guard failed".into())),
            SatResult::Unknown(r) => return Err(Stop::Error(format!("backend unknown: {}", r))),
        }
        let lemma = to_nnf(&Term::not(&Term::and(kept)));
        if self.opts.debug_checks {
            self.stats.invariant_checks += 1;
            let lp = self.sys.to_copy(&lemma, Copy::Post);
            if !self.valid(&fprev, &lp)? {
                self.violations.push(format!("interpolant {} not implied at level {}", lemma, level));
            }
            if self.sat(&[lemma.clone(), q.cube.clone()])?.is_some() {
                self.violations.push(format!("interpolant {} does not block {}", lemma, q.cube));
            }
        }
        self.add_lemma(&lemma, level);
        self.blocked.insert((q.cube.clone(), level));
        self.event("Conflict", level, &lemma, String::new());
        if level < self.n {
            self.clock += 1;
            self.event("Leaf", level + 1, &q.cube, String::new());
            self.queue.push(Query { level: level + 1, created: self.clock, ..q });
        }
        Ok(())
    }

    fn add_lemma(&mut self, lemma: &Term, level: usize) {
        while self.delta.len() <= level + 1 {
            self.delta.push(vec![]);
        }
        if self.delta.iter().skip(level).any(|d| d.contains(lemma)) {
            return;
        }
        self.stats.lemmas += 1;
        self.delta[level].push(lemma.clone());
    }

    // ---- Induction, Safe ----

    /// `F(φ ∧ O_i) ⟹ φ'`.
    fn inductive(&mut self, phi: &Term, i: usize) -> Step<bool> {
        let a = Term::and2(phi, &self.frame(i as isize));
        let f = self.f(&a, &a);
        let pp = self.sys.to_copy(phi, Copy::Post);
        self.valid(&f, &pp)
    }

    fn induction(&mut self) -> Step<()> {
        for i in 0..self.n {
            let lemmas = self.delta[i].clone();
            for lemma in lemmas {
                self.check_budget()?;
                let mut disj = lemma.disjuncts();
                let mut ok = self.inductive(&lemma, i)?;
                if disj.len() > 1 && disj.len() <= 8 {
                    let mut k = 0;
                    while k < disj.len() && disj.len() > 1 {
                        let trial: Vec<Term> = disj.iter().enumerate().filter(|(j, _)| *j != k).map(|(_, d)| d.clone()).collect();
                        if self.inductive(&Term::or(trial.clone()), i)? {
                            disj = trial;
                            ok = true;
                        } else {
                            k += 1;
                        }
                    }
                }
                if !ok {
                    continue;
                }
                let phi = Term::or(disj);
                self.delta[i].retain(|l| *l != lemma);
                self.add_lemma(&phi, i + 1);
                self.event("Induction", i + 1, &phi, String::new());
                self.debug_check()?;
            }
        }
        Ok(())
    }

    fn safe(&mut self) -> Step<Option<Term>> {
        for i in 0..self.n {
            let (oi, on) = (self.frame(i as isize), self.frame(i as isize + 1));
            let syntactic = self.delta[i].is_empty() && (i > 0 || !self.init_in_o0);
            if syntactic || self.valid(&on, &oi)? {
                self.event("Safe", i, &oi, String::new());
                return Ok(Some(oi));
            }
        }
        Ok(None)
    }

    // ---- checking ----

    fn debug_check(&mut self) -> Step<()> {
        if !self.opts.debug_checks {
            return Ok(());
        }
        self.stats.invariant_checks += 1;
        let o0 = self.frame(0);
        if !self.valid(&self.sys.init.clone(), &o0)? {
            self.violations.push("init does not imply O_0".into());
        }
        for i in 0..self.n {
            let (a, b) = (self.frame(i as isize), self.frame(i as isize + 1));
            if !self.valid(&a, &b)? {
                self.violations.push(format!("O_{} does not imply O_{}", i, i + 1));
            }
        }
        Ok(())
    }

    fn validate(&mut self, v: Verdict) -> Verdict {
        let r = match &v {
            Verdict::Safe(inv) => self.validate_safe(inv),
            Verdict::Unsafe { depth, .. } => match bmc_reach(self.sys, *depth, &mut self.sess) {
                Ok(Reach::Reachable(_)) => Ok(()),
                Ok(Reach::Unreachable) => Err(format!("bad not reachable within depth {}", depth)),
                Err(e) => Err(format!("backend: {}", e)),
            },
            Verdict::Unknown(_) => Ok(()),
        };
        match r {
            Ok(()) => v,
            Err(msg) => Verdict::Unknown(format!("validation failed: {}", msg)),
        }
    }

    fn validate_safe(&mut self, inv: &Term) -> Result<(), String> {
        validate_invariant(self.sys, inv, &mut self.sess)
    }
}

/// Check `inv` against the three clauses of the system.
pub fn validate_invariant(sys: &ChcSystem, inv: &Term, sess: &mut Session) -> Result<(), String> {
    let err = |e: BackendError| format!("backend: {}", e);
    let valid = |sess: &mut Session, a: &Term, b: &Term| -> Result<bool, String> {
        Ok(matches!(sess.entails(a, b).map_err(err)?, Entailment::Valid))
    };
    if !valid(sess, &sys.init, inv)? {
        return Err("init does not imply the invariant".into());
    }
    let body = if sys.has_call {
        Term::and(vec![inv.clone(), sys.to_copy(inv, Copy::Call), sys.tr.clone()])
    } else {
        Term::and2(inv, &sys.tr)
    };
    if !valid(sess, &body, &sys.to_copy(inv, Copy::Post))? {
        return Err("invariant is not inductive".into());
    }
    if !valid(sess, &Term::and2(inv, &sys.bad), &Term::ff())? {
        return Err("invariant meets bad".into());
    }
    Ok(())
}
