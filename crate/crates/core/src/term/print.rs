use super::{Kind, Term};
use std::fmt;

const RESERVED: &[&str] = &[
    "_", "!", "as", "let", "exists", "forall", "match", "par", "BINARY", "DECIMAL", "HEXADECIMAL",
    "NUMERAL", "STRING",
];

fn is_simple_symbol(s: &str) -> bool {
    let extra = |c: char| "~!@$%^&*_-+=<>.?/".contains(c);
    let mut cs = s.chars();
    match cs.next() {
        Some(c) if c.is_ascii_alphabetic() || extra(c) => {}
        _ => return false,
    }
    cs.all(|c| c.is_ascii_alphanumeric() || extra(c)) && !RESERVED.contains(&s)
}

/// Print a symbol, quoting it with bars when needed.
pub fn smtlib_symbol(s: &str) -> String {
    if is_simple_symbol(s) {
        s.to_string()
    } else {
        format!("|{}|", s)
    }
}

fn write_int(f: &mut fmt::Formatter<'_>, n: i64) -> fmt::Result {
    if n < 0 {
        write!(f, "(- {})", n.unsigned_abs())
    } else {
        write!(f, "{}", n)
    }
}

fn write_app(f: &mut fmt::Formatter<'_>, op: &str, args: &[&Term], backend: bool) -> fmt::Result {
    write!(f, "({}", op)?;
    for a in args {
        write!(f, " ")?;
        write_term(f, a, backend)?;
    }
    write!(f, ")")
}

fn write_term(f: &mut fmt::Formatter<'_>, t: &Term, backend: bool) -> fmt::Result {
    match t.kind() {
        Kind::Var(v) => write!(f, "{}", smtlib_symbol(&v.name)),
        Kind::Int(n) => write_int(f, *n),
        Kind::Bool(b) => write!(f, "{}", b),
        Kind::Add(xs) => write_app(f, "+", &xs.iter().collect::<Vec<_>>(), backend),
        Kind::Mul(-1, x) => write_app(f, "-", &[x], backend),
        Kind::Mul(c, x) => {
            write!(f, "(* ")?;
            write_int(f, *c)?;
            write!(f, " ")?;
            write_term(f, x, backend)?;
            write!(f, ")")
        }
        Kind::Divides(d, x) => {
            if backend {
                write!(f, "(= (mod ")?;
                write_term(f, x, backend)?;
                write!(f, " {}) 0)", d)
            } else {
                write!(f, "((_ divisible {}) ", d)?;
                write_term(f, x, backend)?;
                write!(f, ")")
            }
        }
        Kind::Lt(a, b) => write_app(f, "<", &[a, b], backend),
        Kind::Le(a, b) => write_app(f, "<=", &[a, b], backend),
        Kind::Eq(a, b) => write_app(f, "=", &[a, b], backend),
        Kind::And(xs) => write_app(f, "and", &xs.iter().collect::<Vec<_>>(), backend),
        Kind::Or(xs) => write_app(f, "or", &xs.iter().collect::<Vec<_>>(), backend),
        Kind::Not(x) => write_app(f, "not", &[x], backend),
        Kind::Ite(c, a, b) => write_app(f, "ite", &[c, a, b], backend),
        Kind::Rd(a, i) => write_app(f, "select", &[a, i], backend),
        Kind::Wr(a, i, v) => write_app(f, "store", &[a, i, v], backend),
        Kind::Peq(a, b, idx) => {
            if backend {
                // a agrees with b updated at the excluded indices by a's own values.
                let vals: Vec<Term> = idx.iter().map(|i| Term::rd(a, i)).collect();
                let rhs = Term::wr_all(b, idx, &vals);
                write_app(f, "=", &[a, &rhs], backend)
            } else {
                let mut args = vec![a, b];
                args.extend(idx.iter());
                write_app(f, "peq", &args, backend)
            }
        }
    }
}

impl fmt::Display for Term {
    /// SMT-LIB2 syntax, with partial equalities as `(peq a b i1 .. in)` and
    /// divisibility as `((_ divisible d) t)`. Parses back to an equal term.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write_term(f, self, false)
    }
}

/// Backend rendering: partial equalities expanded into store chains and
/// divisibility written with `mod`.
pub struct SmtLibDisplay<'a>(pub &'a Term);

impl fmt::Display for SmtLibDisplay<'_> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write_term(f, self.0, true)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::term::Sort;

    #[test]
    fn symbols_are_quoted_when_needed() {
        assert_eq!(smtlib_symbol("x"), "x");
        assert_eq!(smtlib_symbol("qe!v!0"), "qe!v!0");
        assert_eq!(smtlib_symbol("x'"), "|x'|");
        assert_eq!(smtlib_symbol("1x"), "|1x|");
        assert_eq!(smtlib_symbol("let"), "|let|");
    }

    #[test]
    fn prints_internal_and_backend_forms() {
        let a = Term::new_var("a", Sort::int_array());
        let b = Term::new_var("b", Sort::int_array());
        let i = Term::new_var("i", Sort::Int);
        let p = Term::peq(&a, &b, &[i.clone()]);
        assert_eq!(p.to_string(), "(peq a b i)");
        assert_eq!(
            SmtLibDisplay(&p).to_string(),
            "(= a (store b i (select a i)))"
        );
        let d = Term::divides(3, &Term::neg(&i));
        assert_eq!(d.to_string(), "((_ divisible 3) (- i))");
        assert_eq!(SmtLibDisplay(&d).to_string(), "(= (mod (- i) 3) 0)");
        assert_eq!(Term::int(-4).to_string(), "(- 4)");
    }
}
