//! SMT-LIB2 HORN scripts: parsing, normalization to a single-predicate
//! system, and verdict printing. Also reads the small quantified scripts
//! taken by the `qe` and `mbp` subcommands.

use crate::chc::{call_var, post_var, ChcError, ChcSystem};
use crate::engine::Verdict;
use crate::sexp::{parse_all, Sexp, SexpError};
use crate::term::parse::{parse_sort, parse_sorted_vars, parse_term, Env};
use crate::term::{smtlib_symbol, SmtLibDisplay, Sort, Subst, Term, Var};
use std::collections::HashMap;
use std::fmt::Write;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum FrontendError {
    #[error("syntax error at {0}")]
    Syntax(#[from] SexpError),
    #[error("{0}")]
    Shape(String),
    #[error(transparent)]
    System(#[from] ChcError),
}

#[derive(Clone, Debug, PartialEq)]
pub struct PredApp {
    pub pred: String,
    pub args: Vec<Term>,
}

#[derive(Clone, Debug, PartialEq)]
pub enum Head {
    Pred(PredApp),
    Formula(Term),
}

/// One clause `∀vars. body ∧ constraint ⟹ head`.
#[derive(Clone, Debug, PartialEq)]
pub struct RawChc {
    pub vars: Vec<Var>,
    pub body: Vec<PredApp>,
    pub constraint: Term,
    pub head: Head,
}

impl RawChc {
    pub fn is_query(&self) -> bool {
        matches!(self.head, Head::Formula(_))
    }
}

#[derive(Clone, Debug, Default, PartialEq)]
pub struct ChcScript {
    pub preds: Vec<(String, Vec<Sort>)>,
    pub clauses: Vec<RawChc>,
}

fn shape(s: &Sexp, msg: impl Into<String>) -> FrontendError {
    FrontendError::Syntax(s.error(msg))
}

pub fn parse_chc_script(text: &str) -> Result<ChcScript, FrontendError> {
    let mut script = ChcScript::default();
    for cmd in parse_all(text)? {
        let xs = cmd.list().ok_or_else(|| shape(&cmd, "expected a command"))?;
        match cmd.head() {
            Some("set-logic") => {
                if xs.get(1).and_then(|s| s.sym()) != Some("HORN") {
                    return Err(shape(&cmd, "expected (set-logic HORN)"));
                }
            }
            Some("set-info" | "set-option" | "check-sat" | "get-model" | "exit") => {}
            Some("declare-fun") => {
                let (name, args, ret) = match xs {
                    [_, n, a, r] => (n, a, r),
                    _ => return Err(shape(&cmd, "malformed declare-fun")),
                };
                if ret.sym() != Some("Bool") {
                    return Err(shape(&cmd, "only predicate declarations are supported"));
                }
                let name = name.sym().ok_or_else(|| shape(name, "expected a symbol"))?;
                let sorts = args
                    .list()
                    .ok_or_else(|| shape(args, "expected a sort list"))?
                    .iter()
                    .map(parse_sort)
                    .collect::<Result<Vec<_>, _>>()?;
                script.preds.push((name.to_string(), sorts));
            }
            Some("assert") if xs.len() == 2 => {
                let c = parse_clause(&xs[1], &script.preds)?;
                script.clauses.push(c);
            }
            _ => return Err(shape(&cmd, format!("unsupported command {}", cmd))),
        }
    }
    Ok(script)
}

fn parse_clause(s: &Sexp, preds: &[(String, Vec<Sort>)]) -> Result<RawChc, FrontendError> {
    let (vars, body) = match s.head() {
        Some("forall") => match s.list() {
            Some([_, vs, b]) => (parse_sorted_vars(vs)?, b),
            _ => return Err(shape(s, "malformed forall")),
        },
        _ => (vec![], s),
    };
    let mut env = Env::with_vars(&vars);
    let mut c = RawChc { vars, body: vec![], constraint: Term::tt(), head: Head::Formula(Term::ff()) };
    let mut constraints = Vec::new();
    match body.head() {
        Some("=>") => {
            let xs = body.list().unwrap();
            if xs.len() != 3 {
                return Err(shape(body, "malformed implication"));
            }
            body_items(&xs[1], preds, &mut env, &mut c.body, &mut constraints)?;
            c.head = match pred_app(&xs[2], preds, &mut env)? {
                Some(p) => Head::Pred(p),
                None => Head::Formula(parse_term(&xs[2], &mut env)?),
            };
        }
        Some("not") => {
            let xs = body.list().unwrap();
            if xs.len() != 2 {
                return Err(shape(body, "malformed negation"));
            }
            body_items(&xs[1], preds, &mut env, &mut c.body, &mut constraints)?;
        }
        _ => match pred_app(body, preds, &mut env)? {
            Some(p) => c.head = Head::Pred(p),
            None => return Err(shape(body, "not a Horn clause")),
        },
    }
    c.constraint = Term::and(constraints);
    Ok(c)
}

fn body_items(
    s: &Sexp,
    preds: &[(String, Vec<Sort>)],
    env: &mut Env,
    apps: &mut Vec<PredApp>,
    constraints: &mut Vec<Term>,
) -> Result<(), FrontendError> {
    if s.head() == Some("and") {
        for x in &s.list().unwrap()[1..] {
            body_items(x, preds, env, apps, constraints)?;
        }
        return Ok(());
    }
    match pred_app(s, preds, env)? {
        Some(p) => apps.push(p),
        None => {
            let t = parse_term(s, env)?;
            if mentions_pred(s, preds) {
                return Err(shape(s, "predicate under a connective is not a Horn clause"));
            }
            constraints.push(t)
        }
    }
    Ok(())
}

fn mentions_pred(s: &Sexp, preds: &[(String, Vec<Sort>)]) -> bool {
    match s.list() {
        Some(xs) => xs.iter().any(|x| mentions_pred(x, preds)),
        None => s.sym().is_some_and(|n| preds.iter().any(|(p, _)| p == n)),
    }
}

fn pred_app(s: &Sexp, preds: &[(String, Vec<Sort>)], env: &mut Env) -> Result<Option<PredApp>, FrontendError> {
    let (name, args) = match (s.sym(), s.list()) {
        (Some(n), _) => (n, &[][..]),
        (_, Some(xs)) if !xs.is_empty() && xs[0].sym().is_some() => (xs[0].sym().unwrap(), &xs[1..]),
        _ => return Ok(None),
    };
    let Some((_, sorts)) = preds.iter().find(|(p, _)| p == name) else {
        return Ok(None);
    };
    if sorts.len() != args.len() {
        return Err(shape(s, format!("{} expects {} arguments", name, sorts.len())));
    }
    let args = args.iter().map(|a| parse_term(a, env)).collect::<Result<Vec<_>, _>>()?;
    for (a, srt) in args.iter().zip(sorts) {
        if a.sort() != srt {
            return Err(shape(s, format!("argument {} of {} has the wrong sort", a, name)));
        }
    }
    Ok(Some(PredApp { pred: name.to_string(), args }))
}

fn write_app(out: &mut String, p: &PredApp) {
    if p.args.is_empty() {
        out.push_str(&smtlib_symbol(&p.pred));
        return;
    }
    let _ = write!(out, "({}", smtlib_symbol(&p.pred));
    for a in &p.args {
        let _ = write!(out, " {}", a);
    }
    out.push(')');
}

/// Print a script that parses back to the same clauses.
pub fn print_chc_script(s: &ChcScript) -> String {
    let mut out = String::from("(set-logic HORN)\n");
    for (p, sorts) in &s.preds {
        let sorts: Vec<String> = sorts.iter().map(|s| s.to_string()).collect();
        let _ = writeln!(out, "(declare-fun {} ({}) Bool)", smtlib_symbol(p), sorts.join(" "));
    }
    for c in &s.clauses {
        let mut body = String::new();
        let items = c.body.len() + usize::from(!c.constraint.is_true());
        if items != 1 {
            body.push_str("(and");
        }
        for p in &c.body {
            if items != 1 {
                body.push(' ');
            }
            write_app(&mut body, p);
        }
        if !c.constraint.is_true() {
            if items != 1 {
                body.push(' ');
            }
            let _ = write!(body, "{}", c.constraint);
        }
        if items != 1 {
            body.push(')');
        }
        let mut head = String::new();
        match &c.head {
            Head::Pred(p) => write_app(&mut head, p),
            Head::Formula(f) => {
                let _ = write!(head, "{}", f);
            }
        }
        let imp = format!("(=> {} {})", body, head);
        if c.vars.is_empty() {
            let _ = writeln!(out, "(assert {})", imp);
        } else {
            let vs: Vec<String> = c.vars.iter().map(|v| format!("({} {})", smtlib_symbol(&v.name), v.sort)).collect();
            let _ = writeln!(out, "(assert (forall ({}) {}))", vs.join(" "), imp);
        }
    }
    out.push_str("(check-sat)\n");
    out
}

// ---------------------------------------------------------------------
// Normalization

#[derive(Clone, Copy)]
enum Role {
    Init,
    Tr,
    Bad,
}

impl Role {
    fn tag(self) -> &'static str {
        match self {
            Role::Init => "init",
            Role::Tr => "tr",
            Role::Bad => "bad",
        }
    }
}

/// Substitute predicate arguments by interface variables; everything else
/// in the clause becomes local and is renamed apart with `suffix`.
fn instantiate(c: &RawChc, apps: &[(&PredApp, &[Var])], suffix: &str) -> Term {
    let mut s = Subst::new();
    let mut eqs = Vec::new();
    for (app, iface) in apps {
        for (arg, x) in app.args.iter().zip(iface.iter()) {
            match arg.as_var() {
                Some(v) if c.vars.contains(v) && s.get(v).is_none() => s.bind(v, &x.term()),
                _ => eqs.push((x.clone(), arg.clone())),
            }
        }
    }
    for v in &c.vars {
        if s.get(v).is_none() {
            s.bind(v, &v.renamed(&format!("{}!{}", v.name, suffix)).term());
        }
    }
    let mut parts: Vec<Term> = eqs.iter().map(|(x, t)| Term::eq(&x.term(), &s.apply(t))).collect();
    parts.push(s.apply(&c.constraint));
    Term::and(parts)
}

fn state_names(script: &ChcScript, pred: &str, sorts: &[Sort]) -> Vec<Var> {
    let distinct_vars = |args: &[Term]| -> Option<Vec<Var>> {
        let vs: Vec<Var> = args.iter().map(|a| a.as_var().cloned()).collect::<Option<_>>()?;
        let mut names: Vec<&str> = vs.iter().map(|v| &*v.name).collect();
        names.sort();
        names.dedup();
        (names.len() == vs.len() && names.iter().all(|n| !n.contains('!'))).then_some(vs)
    };
    let apps = script.clauses.iter().flat_map(|c| {
        let head = match &c.head {
            Head::Pred(p) => Some(p),
            _ => None,
        };
        head.into_iter().chain(c.body.iter())
    });
    for p in apps.filter(|p| p.pred == pred) {
        if let Some(vs) = distinct_vars(&p.args) {
            return vs;
        }
    }
    sorts.iter().enumerate().map(|(k, s)| Var::new(&format!("x{}", k), s.clone())).collect()
}

pub fn normalize(script: &ChcScript) -> Result<ChcSystem, FrontendError> {
    let (pred, sorts) = match script.preds.as_slice() {
        [p] => p.clone(),
        ps => return Err(FrontendError::Shape(format!("expected exactly one predicate, found {}", ps.len()))),
    };
    let x = state_names(script, &pred, &sorts);
    let xp: Vec<Var> = x.iter().map(post_var).collect();
    let xc: Vec<Var> = x.iter().map(call_var).collect();
    let (mut init, mut tr, mut bad) = (vec![], vec![], vec![]);
    let mut has_call = false;
    let mut pending = Vec::new();
    for (k, c) in script.clauses.iter().enumerate() {
        let what = |msg: &str| FrontendError::Shape(format!("clause {}: {}", k + 1, msg));
        let role = match (&c.head, c.body.len()) {
            (Head::Pred(_), 0) => Role::Init,
            (Head::Pred(_), 1 | 2) => Role::Tr,
            (Head::Formula(_), 1) => Role::Bad,
            (Head::Formula(_), 0) => return Err(what("query without a predicate in the body")),
            _ => return Err(what("more than two predicate occurrences in the body")),
        };
        if role as u8 == Role::Tr as u8 && c.body.len() == 2 {
            has_call = true;
        }
        pending.push((k, role));
    }
    for (k, role) in pending {
        let c = &script.clauses[k];
        let suffix = format!("{}{}", role.tag(), k + 1);
        let f = match (role, &c.head) {
            (Role::Init, Head::Pred(h)) => instantiate(c, &[(h, &x)], &suffix),
            (Role::Tr, Head::Pred(h)) => {
                let mut apps: Vec<(&PredApp, &[Var])> = vec![(h, &xp), (&c.body[0], &x)];
                if let Some(b) = c.body.get(1) {
                    apps.push((b, &xc));
                }
                let f = instantiate(c, &apps, &suffix);
                if has_call && c.body.len() == 1 {
                    let same = x.iter().zip(&xc).map(|(a, b)| Term::eq(&a.term(), &b.term()));
                    Term::and(std::iter::once(f).chain(same).collect())
                } else {
                    f
                }
            }
            (Role::Bad, Head::Formula(h)) => {
                let f = instantiate(c, &[(&c.body[0], &x)], &suffix);
                let neg = instantiate(&RawChc { constraint: Term::not(h), ..c.clone() }, &[(&c.body[0], &x)], &suffix);
                Term::and2(&f, &neg)
            }
            _ => unreachable!(),
        };
        match role {
            Role::Init => init.push(f),
            Role::Tr => tr.push(f),
            Role::Bad => bad.push(f),
        }
    }
    Ok(ChcSystem::new(&pred, x, Term::or(init), Term::or(tr), Term::or(bad), has_call)?)
}

pub fn load_system(text: &str) -> Result<ChcSystem, FrontendError> {
    normalize(&parse_chc_script(text)?)
}

/// `sat` with the invariant, `unsat`, or `unknown`.
pub fn format_verdict(sys: &ChcSystem, v: &Verdict) -> String {
    match v {
        Verdict::Safe(inv) => {
            let params: Vec<String> =
                sys.state_vars.iter().map(|v| format!("({} {})", smtlib_symbol(&v.name), v.sort)).collect();
            format!(
                "sat\n(define-fun {} ({}) Bool {})",
                smtlib_symbol(&sys.pred),
                params.join(" "),
                SmtLibDisplay(inv)
            )
        }
        Verdict::Unsafe { .. } => "unsat".into(),
        Verdict::Unknown(_) => "unknown".into(),
    }
}

// ---------------------------------------------------------------------
// Quantified scripts for qe and mbp

/// `(declare-const ..)*`, one `(assert (exists (..) body))`, and further
/// assertions used as model hints.
#[derive(Clone, Debug)]
pub struct QuantifiedScript {
    pub free: Vec<Var>,
    pub quantified: Vec<Var>,
    pub body: Term,
    pub hints: Vec<Term>,
}

pub fn parse_quantified_script(text: &str) -> Result<QuantifiedScript, FrontendError> {
    let mut env = Env::new();
    let mut free = Vec::new();
    let mut found: Option<(Vec<Var>, Term)> = None;
    let mut hints = Vec::new();
    let mut names: HashMap<String, Var> = HashMap::new();
    for cmd in parse_all(text)? {
        let xs = cmd.list().ok_or_else(|| shape(&cmd, "expected a command"))?;
        match (cmd.head(), xs) {
            (Some("set-logic" | "set-info" | "set-option" | "check-sat" | "get-model" | "exit"), _) => {}
            (Some("declare-const"), [_, n, s]) | (Some("declare-fun"), [_, n, _, s]) => {
                if cmd.head() == Some("declare-fun") && xs[2].list().is_none_or(|l| !l.is_empty()) {
                    return Err(shape(&cmd, "only constants may be declared"));
                }
                let name = n.sym().ok_or_else(|| shape(n, "expected a symbol"))?;
                let v = Var::new(name, parse_sort(s)?);
                env.declare(&v);
                names.insert(name.to_string(), v.clone());
                free.push(v);
            }
            (Some("assert"), [_, f]) if f.head() == Some("exists") && found.is_none() => {
                let (vs, b) = match f.list() {
                    Some([_, vs, b]) => (parse_sorted_vars(vs)?, b),
                    _ => return Err(shape(f, "malformed exists")),
                };
                let mut inner = env.clone();
                for v in &vs {
                    if names.contains_key(&*v.name) {
                        return Err(shape(f, format!("{} is both free and bound", v.name)));
                    }
                    inner.declare(v);
                }
                found = Some((vs, parse_term(b, &mut inner)?));
            }
            (Some("assert"), [_, f]) => hints.push(parse_term(f, &mut env)?),
            _ => return Err(shape(&cmd, format!("unsupported command {}", cmd))),
        }
    }
    let (quantified, body) = found.ok_or_else(|| FrontendError::Shape("no (assert (exists ..)) found".into()))?;
    Ok(QuantifiedScript { free, quantified, body, hints })
}

#[cfg(test)]
mod tests {
    use super::*;

    const SIGN: &str = "(set-logic HORN)
(declare-fun Inv ((Array Int Int) (Array Int Int)) Bool)
(assert (forall ((a (Array Int Int)) (b (Array Int Int))) (=> (= a b) (Inv a b))))
(assert (forall ((a (Array Int Int)) (b (Array Int Int)) (j Int))
  (=> (and (Inv a b) (< (select a j) 0) (> (select b j) 0)) false)))
(check-sat)";

    #[test]
    fn sign_change_shape() {
        let s = parse_chc_script(SIGN).unwrap();
        assert_eq!(s.clauses.len(), 2);
        assert!(!s.clauses[0].is_query());
        assert!(s.clauses[1].is_query());
        let sys = normalize(&s).unwrap();
        assert_eq!(sys.init.to_string(), "(= a b)");
        assert!(sys.tr.is_false());
        assert_eq!(sys.bad.to_string(), "(and (< (select a j!bad2) 0) (< 0 (select b j!bad2)))");
    }

    #[test]
    fn round_trip() {
        let s = parse_chc_script(SIGN).unwrap();
        let again = parse_chc_script(&print_chc_script(&s)).unwrap();
        assert_eq!(s, again);
    }

    #[test]
    fn ground_fact_and_arguments_that_are_not_variables() {
        let text = "(set-logic HORN)
(declare-fun P (Int) Bool)
(assert (P 0))
(assert (forall ((x Int)) (=> (P x) (P (+ x 1)))))
(assert (forall ((x Int)) (=> (and (P x) (< x 0)) false)))";
        let s = parse_chc_script(text).unwrap();
        assert!(s.clauses[0].vars.is_empty());
        let sys = normalize(&s).unwrap();
        assert_eq!(sys.init.to_string(), "(= x 0)");
        assert_eq!(sys.tr.to_string(), "(= x!next (+ x 1))");
    }

    #[test]
    fn rejected_shapes() {
        let two = "(set-logic HORN)
(declare-fun P (Int) Bool)
(declare-fun Q (Int) Bool)
(assert (forall ((x Int)) (=> (P x) (Q x))))";
        assert!(parse_chc_script(two).is_ok());
        assert!(matches!(load_system(two), Err(FrontendError::Shape(_))));
        let three = "(set-logic HORN)
(declare-fun P (Int) Bool)
(assert (forall ((x Int) (y Int) (z Int) (w Int)) (=> (and (P x) (P y) (P z)) (P w))))";
        assert!(matches!(load_system(three), Err(FrontendError::Shape(_))));
        let bad_syntax = "(set-logic HORN)\n(declare-fun P (Int) Bool)\n(assert (forall ((x Int)) (=> (P x) (P y))))";
        match parse_chc_script(bad_syntax) {
            Err(FrontendError::Syntax(e)) => assert_eq!(e.line, 3),
            r => panic!("{:?}", r),
        }
    }

    #[test]
    fn call_shape_and_linear_rule_alignment() {
        let text = "(set-logic HORN)
(declare-fun S (Int) Bool)
(assert (forall ((x Int)) (=> (= x 0) (S x))))
(assert (forall ((x Int) (y Int) (z Int)) (=> (and (S x) (S y) (= z (+ x y))) (S z))))
(assert (forall ((x Int) (z Int)) (=> (and (S x) (= z (+ x 1))) (S z))))
(assert (forall ((x Int)) (=> (and (S x) (< x 0)) false)))";
        let sys = load_system(text).unwrap();
        assert!(sys.has_call);
        assert_eq!(sys.state_vars[0].name.as_ref() as &str, "x");
        assert_eq!(sys.tr.disjuncts().len(), 2);
        assert!(sys.tr.to_string().contains("(= x x!call)"));
    }

    #[test]
    fn quantified_script() {
        let q = parse_quantified_script(
            "(declare-const b (Array Int Int)) (declare-const i Int)
             (assert (exists ((a (Array Int Int))) (= (store a i 0) b)))
             (assert (> i 2))",
        )
        .unwrap();
        assert_eq!(q.free.len(), 2);
        assert_eq!(q.quantified.len(), 1);
        assert_eq!(q.hints.len(), 1);
    }
}
