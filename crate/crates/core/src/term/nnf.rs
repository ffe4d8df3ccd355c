use super::{Kind, Sort, Term};

/// Negation normal form. Negations end up on atoms; `not` over `<`/`<=` is
/// turned into the dual comparison, Boolean equalities and Boolean `ite`
/// are expanded.
pub fn to_nnf(t: &Term) -> Term {
    nnf(t, true)
}

fn nnf(t: &Term, pos: bool) -> Term {
    match t.kind() {
        Kind::Bool(b) => Term::bool(*b == pos),
        Kind::Not(x) => nnf(x, !pos),
        Kind::And(xs) | Kind::Or(xs) => {
            let conj = matches!(t.kind(), Kind::And(_)) == pos;
            let ys: Vec<Term> = xs.iter().map(|x| nnf(x, pos)).collect();
            if conj {
                Term::and(ys)
            } else {
                Term::or(ys)
            }
        }
        Kind::Lt(a, b) if !pos => Term::le(b, a),
        Kind::Le(a, b) if !pos => Term::lt(b, a),
        Kind::Eq(a, b) if *a.sort() == Sort::Bool => {
            let (pa, na) = (nnf(a, true), nnf(a, false));
            let (pb, nb) = (nnf(b, true), nnf(b, false));
            if pos {
                Term::or(vec![Term::and2(&pa, &pb), Term::and2(&na, &nb)])
            } else {
                Term::or(vec![Term::and2(&pa, &nb), Term::and2(&na, &pb)])
            }
        }
        Kind::Ite(c, a, b) if t.is_bool() => {
            let (pc, nc) = (nnf(c, true), nnf(c, false));
            Term::or(vec![Term::and2(&pc, &nnf(a, pos)), Term::and2(&nc, &nnf(b, pos))])
        }
        _ => {
            if pos {
                t.clone()
            } else {
                Term::not(t)
            }
        }
    }
}

/// Is `t` in negation normal form?
pub fn is_nnf(t: &Term) -> bool {
    match t.kind() {
        Kind::And(xs) | Kind::Or(xs) => xs.iter().all(is_nnf),
        Kind::Not(x) => matches!(
            x.kind(),
            Kind::Var(_) | Kind::Eq(..) | Kind::Peq(..) | Kind::Divides(..) | Kind::Rd(..)
        ) && !matches!(x.kind(), Kind::Eq(a, _) if a.is_bool()),
        Kind::Ite(..) => !t.is_bool(),
        Kind::Eq(a, _) => !a.is_bool(),
        _ => true,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn b(n: &str) -> Term {
        Term::new_var(n, Sort::Bool)
    }

    #[test]
    fn de_morgan_and_involution() {
        let (p, q) = (b("p"), b("q"));
        let t = to_nnf(&Term::not(&Term::and2(&p, &q)));
        assert_eq!(t, Term::or2(&Term::not(&p), &Term::not(&q)));
        assert_eq!(to_nnf(&Term::not(&Term::not(&p))), p);
    }

    #[test]
    fn negated_comparisons_flip() {
        let x = Term::new_var("x", Sort::Int);
        let y = Term::new_var("y", Sort::Int);
        assert_eq!(to_nnf(&Term::not(&Term::lt(&x, &y))), Term::le(&y, &x));
        assert_eq!(to_nnf(&Term::not(&Term::le(&x, &y))), Term::lt(&y, &x));
        let ne = Term::not(&Term::eq(&x, &y));
        assert_eq!(to_nnf(&ne), ne);
    }

    #[test]
    fn bool_equality_is_expanded() {
        let (p, q) = (b("p"), b("q"));
        let t = to_nnf(&Term::not(&Term::eq(&p, &q)));
        assert!(is_nnf(&t));
        assert!(matches!(t.kind(), Kind::Or(_)));
    }
}
