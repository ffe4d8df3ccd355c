//! SMT-LIB2 client for an external solver process.
//!
//! Every check runs inside a `push`/`pop` pair with named assertions, so the
//! session returns to its base scope afterwards. Declarations live at the
//! base scope and accumulate.

use crate::model::{parse_model, Model};
use crate::sexp::{parse_one, SexpKind, Splitter};
use crate::term::{smtlib_symbol, SmtLibDisplay, Sort, Symbol, Term, Var};
use indexmap::IndexSet;
use std::collections::HashMap;
use std::io::{BufWriter, Read, Write};
use std::process::{Child, ChildStdin, Command, Stdio};
use std::sync::mpsc::{channel, Receiver, RecvTimeoutError};
use std::time::{Duration, Instant};
use thiserror::Error;

#[derive(Clone, Debug)]
pub struct SolverConfig {
    /// Program and arguments; the process must read SMT-LIB2 on stdin.
    pub command: Vec<String>,
    /// Wall-clock budget for each backend call.
    pub timeout: Duration,
    pub logic: Option<String>,
}

impl Default for SolverConfig {
    fn default() -> SolverConfig {
        SolverConfig {
            command: vec!["z3".into(), "-in".into(), "-smt2".into()],
            timeout: Duration::from_secs(20),
            logic: None,
        }
    }
}

impl SolverConfig {
    /// Parse a whitespace-separated command line.
    pub fn with_command(mut self, cmd: &str) -> SolverConfig {
        self.command = cmd.split_whitespace().map(String::from).collect();
        self
    }

    pub fn with_timeout(mut self, t: Duration) -> SolverConfig {
        self.timeout = t;
        self
    }
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum BackendError {
    #[error("cannot start solver: {0}")]
    Spawn(String),
    #[error("solver process died: {0}")]
    ProcessDied(String),
    #[error("solver call exceeded {0:?}")]
    Timeout(Duration),
    #[error("solver protocol violation: {0}")]
    Protocol(String),
    #[error("solver returned unknown: {0}")]
    Unknown(String),
}

#[derive(Clone, Debug, PartialEq)]
pub enum SatResult {
    Sat(Model),
    /// Names of the assertions in an unsatisfiable core.
    Unsat(Vec<String>),
    Unknown(String),
}

impl SatResult {
    pub fn is_sat(&self) -> bool {
        matches!(self, SatResult::Sat(_))
    }

    pub fn is_unsat(&self) -> bool {
        matches!(self, SatResult::Unsat(_))
    }
}

#[derive(Clone, Debug, PartialEq)]
pub enum Entailment {
    Valid,
    Countermodel(Model),
}

/// An existentially closed formula `exists vars . body`.
#[derive(Clone, Debug, PartialEq)]
pub struct Exists {
    pub vars: Vec<Var>,
    pub body: Term,
}

impl Exists {
    pub fn new(vars: Vec<Var>, body: Term) -> Exists {
        Exists { vars, body }
    }

    pub fn plain(body: Term) -> Exists {
        Exists { vars: vec![], body }
    }

    pub fn free_vars(&self) -> IndexSet<Var> {
        let mut fv = self.body.free_vars();
        fv.retain(|v| !self.vars.contains(v));
        fv
    }

    fn render(&self, negate: bool) -> String {
        let body = SmtLibDisplay(&self.body).to_string();
        let core = if self.vars.is_empty() {
            body
        } else {
            let binders: Vec<String> = self.vars.iter().map(|v| format!("({} {})", v, v.sort)).collect();
            format!("(exists ({}) {})", binders.join(" "), body)
        };
        if negate {
            format!("(not {})", core)
        } else {
            core
        }
    }
}

#[derive(Clone, Debug, Default)]
pub struct SessionStats {
    pub checks: usize,
    pub sat: usize,
    pub unsat: usize,
    pub unknown: usize,
    pub errors: usize,
    pub restarts: usize,
    pub time: Duration,
}

struct Proc {
    child: Child,
    stdin: BufWriter<ChildStdin>,
    rx: Receiver<String>,
}

impl Drop for Proc {
    fn drop(&mut self) {
        let _ = writeln!(self.stdin, "(exit)");
        let _ = self.stdin.flush();
        let _ = self.child.kill();
        let _ = self.child.wait();
    }
}

pub struct Session {
    config: SolverConfig,
    proc: Option<Proc>,
    declared: HashMap<Symbol, Sort>,
    next_name: u64,
    depth: usize,
    stats: SessionStats,
}

impl Session {
    pub fn new(config: SolverConfig) -> Result<Session, BackendError> {
        let mut s = Session {
            config,
            proc: None,
            declared: HashMap::new(),
            next_name: 0,
            depth: 0,
            stats: SessionStats::default(),
        };
        s.ensure()?;
        Ok(s)
    }

    pub fn default_session() -> Result<Session, BackendError> {
        Session::new(SolverConfig::default())
    }

    pub fn config(&self) -> &SolverConfig {
        &self.config
    }

    pub fn stats(&self) -> &SessionStats {
        &self.stats
    }

    /// Pushes minus pops; zero between operations.
    pub fn scope_depth(&self) -> usize {
        self.depth
    }

    fn spawn(&self) -> Result<Proc, BackendError> {
        let (prog, args) = self
            .config
            .command
            .split_first()
            .ok_or_else(|| BackendError::Spawn("empty solver command".into()))?;
        let mut child = Command::new(prog)
            .args(args)
            .stdin(Stdio::piped())
            .stdout(Stdio::piped())
            .stderr(Stdio::null())
            .spawn()
            .map_err(|e| BackendError::Spawn(format!("{}: {}", prog, e)))?;
        let stdin = BufWriter::new(child.stdin.take().unwrap());
        let mut stdout = child.stdout.take().unwrap();
        let (tx, rx) = channel();
        std::thread::spawn(move || {
            let mut split = Splitter::default();
            let mut buf = [0u8; 8192];
            let mut out = Vec::new();
            loop {
                match stdout.read(&mut buf) {
                    Ok(0) | Err(_) => return,
                    Ok(n) => {
                        for c in String::from_utf8_lossy(&buf[..n]).chars() {
                            split.feed(c, &mut out);
                        }
                        for item in out.drain(..) {
                            if tx.send(item).is_err() {
                                return;
                            }
                        }
                    }
                }
            }
        });
        Ok(Proc { child, stdin, rx })
    }

    fn ensure(&mut self) -> Result<(), BackendError> {
        if self.proc.is_some() {
            return Ok(());
        }
        self.proc = Some(self.spawn()?);
        self.declared.clear();
        self.depth = 0;
        let deadline = Instant::now() + self.config.timeout;
        self.command("(set-option :print-success true)", deadline)?;
        self.command("(set-option :produce-models true)", deadline)?;
        self.command("(set-option :produce-unsat-cores true)", deadline)?;
        if let Some(l) = self.config.logic.clone() {
            self.command(&format!("(set-logic {})", l), deadline)?;
        }
        Ok(())
    }

    fn kill(&mut self) {
        if self.proc.take().is_some() {
            self.stats.restarts += 1;
        }
        self.declared.clear();
        self.depth = 0;
    }

    fn send(&mut self, cmd: &str) -> Result<(), BackendError> {
        let p = self.proc.as_mut().ok_or_else(|| BackendError::ProcessDied("no process".into()))?;
        let r = writeln!(p.stdin, "{}", cmd).and_then(|_| p.stdin.flush());
        if let Err(e) = r {
            self.kill();
            return Err(BackendError::ProcessDied(e.to_string()));
        }
        Ok(())
    }

    fn recv(&mut self, deadline: Instant) -> Result<String, BackendError> {
        let p = self.proc.as_ref().ok_or_else(|| BackendError::ProcessDied("no process".into()))?;
        let wait = deadline.saturating_duration_since(Instant::now());
        match p.rx.recv_timeout(wait) {
            Ok(s) => Ok(s),
            Err(RecvTimeoutError::Timeout) => {
                self.kill();
                Err(BackendError::Timeout(self.config.timeout))
            }
            Err(RecvTimeoutError::Disconnected) => {
                self.kill();
                Err(BackendError::ProcessDied("solver closed its output".into()))
            }
        }
    }

    /// Send a command that must answer `success`.
    fn command(&mut self, cmd: &str, deadline: Instant) -> Result<(), BackendError> {
        self.send(cmd)?;
        let r = self.recv(deadline)?;
        if r.trim() == "success" {
            Ok(())
        } else {
            self.kill();
            Err(BackendError::Protocol(format!("{} answered {}", cmd, r)))
        }
    }

    fn declare(&mut self, vars: &IndexSet<Var>, deadline: Instant) -> Result<(), BackendError> {
        for v in vars {
            match self.declared.get(&v.name) {
                Some(s) if *s == v.sort => continue,
                Some(s) => {
                    return Err(BackendError::Protocol(format!(
                        "symbol {} declared as {} and used as {}",
                        v.name, s, v.sort
                    )))
                }
                None => {}
            }
            self.command(&format!("(declare-fun {} () {})", v, v.sort), deadline)?;
            self.declared.insert(v.name.clone(), v.sort.clone());
        }
        Ok(())
    }

    fn run(
        &mut self,
        items: &[(String, String)],
        free: &IndexSet<Var>,
    ) -> Result<SatResult, BackendError> {
        let start = Instant::now();
        self.stats.checks += 1;
        let r = self.run_inner(items, free, start + self.config.timeout);
        self.stats.time += start.elapsed();
        match &r {
            Ok(SatResult::Sat(_)) => self.stats.sat += 1,
            Ok(SatResult::Unsat(_)) => self.stats.unsat += 1,
            Ok(SatResult::Unknown(_)) => self.stats.unknown += 1,
            Err(_) => {
                self.stats.errors += 1;
                self.kill();
            }
        }
        r
    }

    fn run_inner(
        &mut self,
        items: &[(String, String)],
        free: &IndexSet<Var>,
        deadline: Instant,
    ) -> Result<SatResult, BackendError> {
        self.ensure()?;
        self.declare(free, deadline)?;
        self.command("(push 1)", deadline)?;
        self.depth += 1;
        let mut names: HashMap<String, String> = HashMap::new();
        for (user, text) in items {
            let k = format!("k!{}", self.next_name);
            self.next_name += 1;
            names.insert(k.clone(), user.clone());
            self.command(&format!("(assert (! {} :named {}))", text, k), deadline)?;
        }
        self.send("(check-sat)")?;
        let answer = self.recv(deadline)?;
        let result = match answer.trim() {
            "sat" => {
                if free.is_empty() {
                    SatResult::Sat(Model::new())
                } else {
                    let syms: Vec<String> = free.iter().map(|v| smtlib_symbol(&v.name)).collect();
                    self.send(&format!("(get-value ({}))", syms.join(" ")))?;
                    let resp = self.recv(deadline)?;
                    let m = parse_model(&resp, free.iter()).map_err(|e| {
                        self.kill();
                        BackendError::Protocol(e.to_string())
                    })?;
                    SatResult::Sat(m)
                }
            }
            "unsat" => {
                self.send("(get-unsat-core)")?;
                let resp = self.recv(deadline)?;
                let core = parse_one(&resp)
                    .ok()
                    .and_then(|s| s.list().map(|xs| xs.to_vec()))
                    .ok_or_else(|| BackendError::Protocol(format!("bad unsat core {}", resp)))?;
                let mut out = Vec::new();
                for c in core {
                    match c.sym().and_then(|k| names.get(k)) {
                        Some(n) => out.push(n.clone()),
                        None => return Err(BackendError::Protocol(format!("unknown core name {}", c))),
                    }
                }
                SatResult::Unsat(out)
            }
            "unknown" => {
                self.send("(get-info :reason-unknown)")?;
                let resp = self.recv(deadline)?;
                let reason = parse_one(&resp)
                    .ok()
                    .and_then(|s| s.list().and_then(|xs| xs.get(1).cloned()))
                    .map(|s| match s.kind {
                        SexpKind::Str(r) | SexpKind::Sym(r) => r,
                        _ => s.to_string(),
                    })
                    .unwrap_or(resp);
                SatResult::Unknown(reason)
            }
            other => {
                self.kill();
                return Err(BackendError::Protocol(format!("check-sat answered {}", other)));
            }
        };
        self.command("(pop 1)", deadline)?;
        self.depth -= 1;
        Ok(result)
    }

    /// Satisfiability of the conjunction of named quantifier-free assertions.
    pub fn check(&mut self, assertions: &[(String, Term)]) -> Result<SatResult, BackendError> {
        let mut free = IndexSet::new();
        let items: Vec<(String, String)> = assertions
            .iter()
            .map(|(n, t)| {
                free.extend(t.free_vars());
                (n.clone(), SmtLibDisplay(t).to_string())
            })
            .collect();
        self.run(&items, &free)
    }

    /// Satisfiability of a single formula.
    pub fn check_one(&mut self, t: &Term) -> Result<SatResult, BackendError> {
        self.check(&[("f".to_string(), t.clone())])
    }

    /// Satisfiability of existentially closed formulas, some negated.
    pub fn check_closed(&mut self, parts: &[(Exists, bool)]) -> Result<SatResult, BackendError> {
        let mut free = IndexSet::new();
        let items: Vec<(String, String)> = parts
            .iter()
            .enumerate()
            .map(|(k, (e, neg))| {
                free.extend(e.free_vars());
                (format!("p{}", k), e.render(*neg))
            })
            .collect();
        self.run(&items, &free)
    }

    pub fn entails(&mut self, phi: &Term, psi: &Term) -> Result<Entailment, BackendError> {
        match self.check(&[("phi".into(), phi.clone()), ("neg".into(), Term::not(psi))])? {
            SatResult::Unsat(_) => Ok(Entailment::Valid),
            SatResult::Sat(m) => Ok(Entailment::Countermodel(m)),
            SatResult::Unknown(r) => Err(BackendError::Unknown(r)),
        }
    }

    /// Does `phi` entail the existential closure `psi`?
    pub fn entails_closed(&mut self, phi: &Exists, psi: &Exists) -> Result<bool, BackendError> {
        let psi = rename_bound(psi, "r!");
        let phi = rename_bound(phi, "l!");
        match self.check_closed(&[(phi, false), (psi, true)])? {
            SatResult::Unsat(_) => Ok(true),
            SatResult::Sat(_) => Ok(false),
            SatResult::Unknown(r) => Err(BackendError::Unknown(r)),
        }
    }

    pub fn is_equivalent(&mut self, phi: &Exists, psi: &Exists) -> Result<bool, BackendError> {
        Ok(self.entails_closed(phi, psi)? && self.entails_closed(psi, phi)?)
    }

    pub fn is_equivalent_qf(&mut self, phi: &Term, psi: &Term) -> Result<bool, BackendError> {
        self.is_equivalent(&Exists::plain(phi.clone()), &Exists::plain(psi.clone()))
    }
}

/// Rename bound variables apart from the free ones.
fn rename_bound(e: &Exists, prefix: &str) -> Exists {
    if e.vars.is_empty() {
        return e.clone();
    }
    let pairs: Vec<(Var, Var)> =
        e.vars.iter().map(|v| (v.clone(), v.renamed(&format!("{}{}", prefix, v.name)))).collect();
    let s = crate::term::Subst::renaming(&pairs);
    Exists { vars: pairs.into_iter().map(|(_, b)| b).collect(), body: s.apply(&e.body) }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::Value;

    fn x() -> Term {
        Term::new_var("x", Sort::Int)
    }

    #[test]
    fn sat_unsat_and_scope_restoration() {
        let mut s = Session::default_session().unwrap();
        let r = s
            .check(&[("a".into(), Term::gt(&x(), &Term::int(0))), ("b".into(), Term::lt(&x(), &Term::int(0)))])
            .unwrap();
        match r {
            SatResult::Unsat(core) => assert!(!core.is_empty() && core.iter().all(|c| c == "a" || c == "b")),
            other => panic!("{:?}", other),
        }
        assert_eq!(s.scope_depth(), 0);
        // canary: the contradictory assertions above must be gone
        match s.check(&[("a".into(), Term::eq(&x(), &Term::int(1)))]).unwrap() {
            SatResult::Sat(m) => assert_eq!(m.get(x().as_var().unwrap()), Some(&Value::Int(1))),
            other => panic!("{:?}", other),
        }
    }

    #[test]
    fn models_agree_with_eval() {
        let mut s = Session::default_session().unwrap();
        let a = Term::new_var("a", Sort::int_array());
        let i = Term::new_var("i", Sort::Int);
        let f = Term::and2(&Term::gt(&Term::rd(&a, &i), &Term::int(0)), &Term::eq(&i, &Term::int(3)));
        match s.check_one(&f).unwrap() {
            SatResult::Sat(m) => {
                assert!(m.holds(&f));
                assert!(m.holds(&Term::gt(&Term::rd(&a, &Term::int(3)), &Term::int(0))));
            }
            other => panic!("{:?}", other),
        }
    }

    #[test]
    fn entailment_and_equivalence() {
        let mut s = Session::default_session().unwrap();
        let (one, zero) = (Term::int(1), Term::int(0));
        assert_eq!(s.entails(&Term::gt(&x(), &one), &Term::gt(&x(), &zero)).unwrap(), Entailment::Valid);
        match s.entails(&Term::gt(&x(), &zero), &Term::gt(&x(), &one)).unwrap() {
            Entailment::Countermodel(m) => assert_eq!(m.get(x().as_var().unwrap()), Some(&Value::Int(1))),
            Entailment::Valid => panic!(),
        }
        let (a, b) = (Term::new_var("a", Sort::int_array()), Term::new_var("b", Sort::int_array()));
        let j = Term::new_var("j", Sort::Int);
        assert_eq!(
            s.entails(&Term::eq(&a, &b), &Term::eq(&Term::rd(&a, &j), &Term::rd(&b, &j))).unwrap(),
            Entailment::Valid
        );
        assert!(s.is_equivalent_qf(&Term::gt(&x(), &zero), &Term::ge(&x(), &one)).unwrap());
        let v = Var::new("v", Sort::Int);
        let ex = Exists::new(vec![v.clone()], Term::lt(&x(), &v.term()));
        assert!(s.is_equivalent(&ex, &Exists::plain(Term::tt())).unwrap());
    }

    #[test]
    fn cores_are_genuine() {
        let mut s = Session::default_session().unwrap();
        let y = Term::new_var("y", Sort::Int);
        let parts = vec![
            ("p".to_string(), Term::lt(&x(), &y)),
            ("q".to_string(), Term::eq(&y, &Term::int(4))),
            ("r".to_string(), Term::gt(&x(), &Term::int(7))),
            ("s".to_string(), Term::gt(&y, &Term::int(-3))),
        ];
        let core = match s.check(&parts).unwrap() {
            SatResult::Unsat(c) => c,
            other => panic!("{:?}", other),
        };
        let sub: Vec<(String, Term)> = parts.into_iter().filter(|(n, _)| core.contains(n)).collect();
        assert!(s.check(&sub).unwrap().is_unsat());
    }

    #[test]
    fn divisibility_and_peq_are_rendered_for_the_backend() {
        let mut s = Session::default_session().unwrap();
        let f = Term::and2(&Term::divides(3, &x()), &Term::eq(&x(), &Term::int(7)));
        assert!(s.check_one(&f).unwrap().is_unsat());
        let (a, b) = (Term::new_var("a", Sort::int_array()), Term::new_var("b", Sort::int_array()));
        let i = Term::new_var("i", Sort::Int);
        let p = Term::and(vec![
            Term::peq(&a, &b, &[i.clone()]),
            Term::neq(&Term::rd(&a, &Term::int(5)), &Term::rd(&b, &Term::int(5))),
            Term::neq(&i, &Term::int(5)),
        ]);
        assert!(s.check_one(&p).unwrap().is_unsat());
    }

    #[test]
    fn timeouts_and_bad_commands_are_errors() {
        let cfg = SolverConfig::default().with_command("sleep 5").with_timeout(Duration::from_millis(200));
        match Session::new(cfg) {
            Err(BackendError::Timeout(_)) => {}
            Err(e) => panic!("unexpected {}", e),
            Ok(_) => panic!("expected timeout"),
        }
        let cfg = SolverConfig::default().with_command("no-such-solver-binary");
        assert!(matches!(Session::new(cfg), Err(BackendError::Spawn(_))));
        let cfg = SolverConfig::default().with_command("true");
        assert!(matches!(Session::new(cfg), Err(BackendError::ProcessDied(_))));
    }

    #[test]
    fn sort_clash_is_reported() {
        let mut s = Session::default_session().unwrap();
        s.check_one(&Term::gt(&x(), &Term::int(0))).unwrap();
        let xb = Term::new_var("x", Sort::Bool);
        assert!(matches!(s.check_one(&xb), Err(BackendError::Protocol(_))));
        assert_eq!(s.scope_depth(), 0);
    }
}
