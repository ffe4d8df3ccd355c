//! Terms from SMT-LIB2 s-expressions.

use super::{Sort, Term, Var};
use crate::sexp::{parse_one, Sexp, SexpError, SexpKind};
use std::collections::HashMap;

pub type ParseError = SexpError;

/// Symbol table: declared variables and `let` bindings.
#[derive(Clone, Debug, Default)]
pub struct Env {
    names: HashMap<String, Term>,
}

impl Env {
    pub fn new() -> Env {
        Env::default()
    }

    pub fn declare(&mut self, v: &Var) {
        self.names.insert(v.name.to_string(), v.term());
    }

    pub fn with_vars<'a>(vars: impl IntoIterator<Item = &'a Var>) -> Env {
        let mut e = Env::new();
        for v in vars {
            e.declare(v);
        }
        e
    }

    pub fn bind(&mut self, name: &str, t: Term) -> Option<Term> {
        self.names.insert(name.to_string(), t)
    }

    pub fn unbind(&mut self, name: &str, prev: Option<Term>) {
        match prev {
            Some(t) => {
                self.names.insert(name.to_string(), t);
            }
            None => {
                self.names.remove(name);
            }
        }
    }

    pub fn lookup(&self, name: &str) -> Option<&Term> {
        self.names.get(name)
    }
}

pub fn parse_sort(s: &Sexp) -> Result<Sort, ParseError> {
    match &s.kind {
        SexpKind::Sym(n) if n == "Int" => Ok(Sort::Int),
        SexpKind::Sym(n) if n == "Bool" => Ok(Sort::Bool),
        SexpKind::List(xs) if xs.len() == 3 && xs[0].sym() == Some("Array") => {
            let i = parse_sort(&xs[1])?;
            let v = parse_sort(&xs[2])?;
            if !i.is_basic() || !v.is_basic() {
                return Err(s.error("unsupported sort: nested arrays"));
            }
            Ok(Sort::array(i, v))
        }
        _ => Err(s.error(format!("unsupported sort {}", s))),
    }
}

/// Parse `((x Int) (y Bool))`.
pub fn parse_sorted_vars(s: &Sexp) -> Result<Vec<Var>, ParseError> {
    let xs = s.list().ok_or_else(|| s.error("expected a list of sorted variables"))?;
    xs.iter()
        .map(|p| match p.list() {
            Some([n, srt]) => {
                let name = n.sym().ok_or_else(|| n.error("expected a symbol"))?;
                Ok(Var::new(name, parse_sort(srt)?))
            }
            _ => Err(p.error("expected (name sort)")),
        })
        .collect()
}

pub fn parse_term_str(text: &str, env: &mut Env) -> Result<Term, ParseError> {
    parse_term(&parse_one(text)?, env)
}

fn lift<T>(s: &Sexp, r: Result<T, super::TermError>) -> Result<T, ParseError> {
    r.map_err(|e| s.error(e.to_string()))
}

fn parse_int(s: &Sexp, n: &str) -> Result<i64, ParseError> {
    n.parse::<i64>().map_err(|_| s.error(format!("integer literal {} out of range", n)))
}

fn as_const(t: &Term) -> Option<i64> {
    t.as_int()
}

pub fn parse_term(s: &Sexp, env: &mut Env) -> Result<Term, ParseError> {
    match &s.kind {
        SexpKind::Num(n) => Ok(Term::int(parse_int(s, n)?)),
        SexpKind::Sym(n) => match n.as_str() {
            "true" => Ok(Term::tt()),
            "false" => Ok(Term::ff()),
            _ => env.lookup(n).cloned().ok_or_else(|| s.error(format!("unknown symbol {}", n))),
        },
        SexpKind::List(xs) if xs.is_empty() => Err(s.error("empty application")),
        SexpKind::List(xs) => {
            if let Some(h) = xs[0].list() {
                if h.len() == 3 && h[0].sym() == Some("_") && h[1].sym() == Some("divisible") {
                    let d = match &h[2].kind {
                        SexpKind::Num(n) => parse_int(&h[2], n)?,
                        _ => return Err(h[2].error("expected a numeral divisor")),
                    };
                    if xs.len() != 2 {
                        return Err(s.error("divisible takes one argument"));
                    }
                    let t = parse_term(&xs[1], env)?;
                    return lift(s, Term::try_divides(d, t));
                }
                return Err(xs[0].error(format!("unsupported operator {}", xs[0])));
            }
            let op = xs[0].sym().ok_or_else(|| xs[0].error("expected an operator"))?;
            match op {
                "let" => return parse_let(s, xs, env),
                "exists" | "forall" => {
                    return Err(s.error("quantifiers are not supported inside terms"))
                }
                _ => {}
            }
            let args = xs[1..]
                .iter()
                .map(|a| parse_term(a, env))
                .collect::<Result<Vec<_>, _>>()?;
            apply(s, op, args)
        }
        _ => Err(s.error(format!("unexpected {}", s))),
    }
}

fn parse_let(s: &Sexp, xs: &[Sexp], env: &mut Env) -> Result<Term, ParseError> {
    if xs.len() != 3 {
        return Err(s.error("malformed let"));
    }
    let binds = xs[1].list().ok_or_else(|| xs[1].error("malformed let bindings"))?;
    let mut vals = Vec::new();
    for b in binds {
        match b.list() {
            Some([n, t]) => {
                let name = n.sym().ok_or_else(|| n.error("expected a symbol"))?;
                vals.push((name.to_string(), parse_term(t, env)?));
            }
            _ => return Err(b.error("malformed let binding")),
        }
    }
    let mut saved = Vec::new();
    for (n, t) in vals {
        let prev = env.bind(&n, t);
        saved.push((n, prev));
    }
    let body = parse_term(&xs[2], env);
    for (n, prev) in saved.into_iter().rev() {
        env.unbind(&n, prev);
    }
    body
}

fn arity(s: &Sexp, op: &str, args: &[Term], n: usize) -> Result<(), ParseError> {
    if args.len() != n {
        return Err(s.error(format!("{} expects {} arguments, got {}", op, n, args.len())));
    }
    Ok(())
}

fn chain(
    s: &Sexp,
    args: &[Term],
    f: fn(Term, Term) -> Result<Term, super::TermError>,
) -> Result<Term, ParseError> {
    if args.len() < 2 {
        return Err(s.error("comparison needs at least two arguments"));
    }
    let parts = args
        .windows(2)
        .map(|w| lift(s, f(w[0].clone(), w[1].clone())))
        .collect::<Result<Vec<_>, _>>()?;
    Ok(Term::and(parts))
}

fn apply(s: &Sexp, op: &str, args: Vec<Term>) -> Result<Term, ParseError> {
    let bools = |args: &[Term]| -> Result<(), ParseError> {
        match args.iter().find(|a| !a.is_bool()) {
            Some(a) => Err(s.error(format!("{} expects Bool arguments, got {}", op, a))),
            None => Ok(()),
        }
    };
    match op {
        "and" => {
            bools(&args)?;
            Ok(Term::and(args))
        }
        "or" => {
            bools(&args)?;
            Ok(Term::or(args))
        }
        "not" => {
            arity(s, op, &args, 1)?;
            lift(s, Term::try_not(args[0].clone()))
        }
        "=>" => {
            bools(&args)?;
            if args.len() < 2 {
                return Err(s.error("=> needs at least two arguments"));
            }
            let mut it = args.into_iter().rev();
            let last = it.next().unwrap();
            Ok(it.fold(last, |acc, a| Term::implies(&a, &acc)))
        }
        "xor" => {
            arity(s, op, &args, 2)?;
            bools(&args)?;
            Ok(Term::not(&Term::eq(&args[0], &args[1])))
        }
        "=" => chain(s, &args, Term::try_eq),
        "distinct" => {
            let mut parts = Vec::new();
            for i in 0..args.len() {
                for j in i + 1..args.len() {
                    parts.push(Term::not(&lift(s, Term::try_eq(args[i].clone(), args[j].clone()))?));
                }
            }
            Ok(Term::and(parts))
        }
        "ite" => {
            arity(s, op, &args, 3)?;
            lift(s, Term::try_ite(args[0].clone(), args[1].clone(), args[2].clone()))
        }
        "<" => chain(s, &args, Term::try_lt),
        "<=" => chain(s, &args, Term::try_le),
        ">" => chain(s, &args, |a, b| Term::try_lt(b, a)),
        ">=" => chain(s, &args, |a, b| Term::try_le(b, a)),
        "+" => lift(s, Term::try_add(args)),
        "-" => {
            if args.len() == 1 {
                let a = &args[0];
                if let Some(n) = as_const(a) {
                    return Ok(Term::int(-n));
                }
                return lift(s, Term::try_mul(-1, a.clone()));
            }
            if args.is_empty() {
                return Err(s.error("- needs arguments"));
            }
            let mut parts = vec![args[0].clone()];
            for a in &args[1..] {
                parts.push(lift(s, Term::try_mul(-1, a.clone()))?);
            }
            lift(s, Term::try_add(parts))
        }
        "*" => {
            let mut c: i64 = 1;
            let mut rest = Vec::new();
            for a in args {
                match as_const(&a) {
                    Some(n) => c = c.checked_mul(n).ok_or_else(|| s.error("constant overflow"))?,
                    None => rest.push(a),
                }
            }
            match rest.len() {
                0 => Ok(Term::int(c)),
                1 => lift(s, Term::try_mul(c, rest.pop().unwrap())),
                _ => Err(s.error(format!("non-linear multiplication in {}", s))),
            }
        }
        "select" => {
            arity(s, op, &args, 2)?;
            lift(s, Term::try_rd(args[0].clone(), args[1].clone()))
        }
        "store" => {
            arity(s, op, &args, 3)?;
            lift(s, Term::try_wr(args[0].clone(), args[1].clone(), args[2].clone()))
        }
        "peq" => {
            if args.len() < 2 {
                return Err(s.error("peq expects two arrays and excluded indices"));
            }
            lift(s, Term::try_peq(args[0].clone(), args[1].clone(), args[2..].to_vec()))
        }
        "div" | "mod" | "abs" => Err(s.error(format!("unsupported non-linear operator {}", op))),
        _ => Err(s.error(format!("unknown operator {}", op))),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn env() -> Env {
        Env::with_vars(&[
            Var::new("x", Sort::Int),
            Var::new("y", Sort::Int),
            Var::new("p", Sort::Bool),
            Var::new("a", Sort::int_array()),
            Var::new("b", Sort::int_array()),
            Var::new("x'", Sort::Int),
        ])
    }

    #[test]
    fn parses_arithmetic_and_arrays() {
        let mut e = env();
        let t = parse_term_str("(> (select (store a x 3) y) (- 5))", &mut e).unwrap();
        assert_eq!(t.to_string(), "(< (- 5) (select (store a x 3) y))");
        let t = parse_term_str("(= (* 2 x 3) (- x y))", &mut e).unwrap();
        assert_eq!(t.to_string(), "(= (* 6 x) (+ x (- y)))");
        let t = parse_term_str("(= |x'| (+ x 1))", &mut e).unwrap();
        assert_eq!(t.to_string(), "(= |x'| (+ x 1))");
    }

    #[test]
    fn parses_let_and_divisible() {
        let mut e = env();
        let t = parse_term_str("(let ((z (+ x 1))) ((_ divisible 2) z))", &mut e).unwrap();
        assert_eq!(t.to_string(), "((_ divisible 2) (+ x 1))");
        assert!(e.lookup("z").is_none());
    }

    #[test]
    fn rejects_bad_input() {
        let mut e = env();
        assert!(parse_term_str("(* x y)", &mut e).is_err());
        assert!(parse_term_str("(select x 1)", &mut e).is_err());
        assert!(parse_term_str("(foo x)", &mut e).is_err());
        let err = parse_term_str("(and p\n  q)", &mut e).unwrap_err();
        assert_eq!((err.line, err.col), (2, 3));
    }

    #[test]
    fn peq_round_trip() {
        let mut e = env();
        let t = parse_term_str("(peq a b x y)", &mut e).unwrap();
        assert_eq!(parse_term_str(&t.to_string(), &mut e).unwrap(), t);
    }
}
