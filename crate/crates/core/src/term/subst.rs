use super::{Kind, Term, Var};
use std::collections::HashMap;

/// Simultaneous substitution of variables by terms of the same sort.
#[derive(Clone, Debug, Default)]
pub struct Subst {
    map: HashMap<Var, Term>,
}

impl Subst {
    pub fn new() -> Subst {
        Subst::default()
    }

    pub fn single(v: &Var, t: &Term) -> Subst {
        let mut s = Subst::new();
        s.bind(v, t);
        s
    }

    pub fn bind(&mut self, v: &Var, t: &Term) {
        assert_eq!(v.sort, *t.sort(), "binding {} to term of wrong sort", v);
        self.map.insert(v.clone(), t.clone());
    }

    pub fn get(&self, v: &Var) -> Option<&Term> {
        self.map.get(v)
    }

    pub fn is_empty(&self) -> bool {
        self.map.is_empty()
    }

    pub fn apply(&self, t: &Term) -> Term {
        if self.map.is_empty() {
            return t.clone();
        }
        t.rewrite_bottom_up(&mut |n| match n.kind() {
            Kind::Var(v) => self.map.get(v).cloned(),
            _ => None,
        })
    }

    /// Variable renaming from a list of pairs.
    pub fn renaming(pairs: &[(Var, Var)]) -> Subst {
        let mut s = Subst::new();
        for (a, b) in pairs {
            s.bind(a, &b.term());
        }
        s
    }
}

impl FromIterator<(Var, Term)> for Subst {
    fn from_iter<I: IntoIterator<Item = (Var, Term)>>(iter: I) -> Subst {
        let mut s = Subst::new();
        for (v, t) in iter {
            s.bind(&v, &t);
        }
        s
    }
}

/// Simplify partial equalities: a write on the left is unfolded by the
/// write rule of partial equality and an empty exclusion list becomes
/// array equality.
pub fn expand_peq(t: &Term) -> Term {
    t.rewrite_bottom_up(&mut |n| match n.kind() {
        Kind::Peq(a, b, idx) => Some(expand_one(a, b, idx)),
        _ => None,
    })
}

fn expand_one(a: &Term, b: &Term, idx: &[Term]) -> Term {
    if let Kind::Wr(base, j, v) = a.kind() {
        if idx.contains(j) {
            return expand_one(base, b, idx);
        }
        let inside = Term::or(idx.iter().map(|i| Term::eq(j, i)).collect());
        let outside = Term::and(idx.iter().map(|i| Term::neq(j, i)).collect());
        let mut ext = idx.to_vec();
        ext.push(j.clone());
        return Term::or(vec![
            Term::and2(&inside, &expand_one(base, b, idx)),
            Term::and(vec![outside, expand_one(base, b, &ext), Term::eq(&Term::rd(b, j), v)]),
        ]);
    }
    if idx.is_empty() {
        if a == b {
            Term::tt()
        } else {
            Term::eq(a, b)
        }
    } else {
        Term::peq(a, b, idx)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::term::Sort;

    fn iv(n: &str) -> Term {
        Term::new_var(n, Sort::Int)
    }

    fn av(n: &str) -> Term {
        Term::new_var(n, Sort::int_array())
    }

    #[test]
    fn substitution_examples() {
        let (a, b, i, v) = (av("a"), av("b"), iv("i"), iv("v"));
        let av_ = a.as_var().unwrap().clone();
        let t = Term::gt(&Term::rd(&a, &i), &Term::int(0));
        let s = Subst::single(&av_, &b);
        assert_eq!(s.apply(&t), Term::gt(&Term::rd(&b, &i), &Term::int(0)));
        let w = Term::wr(&b, &i, &v);
        let s = Subst::single(&av_, &w);
        assert_eq!(s.apply(&Term::eq(&a, &b)), Term::eq(&w, &b));
    }

    #[test]
    fn substitution_is_simultaneous() {
        let (x, y) = (iv("x"), iv("y"));
        let s: Subst = vec![
            (x.as_var().unwrap().clone(), y.clone()),
            (y.as_var().unwrap().clone(), x.clone()),
        ]
        .into_iter()
        .collect();
        assert_eq!(s.apply(&Term::lt(&x, &y)), Term::lt(&y, &x));
    }

    #[test]
    fn expand_peq_examples() {
        let (a, b, i, j, v) = (av("a"), av("b"), iv("i"), iv("j"), iv("v"));
        assert_eq!(expand_peq(&Term::peq(&a, &b, &[])), Term::eq(&a, &b));
        let w = Term::wr(&a, &j, &v);
        assert_eq!(expand_peq(&Term::peq(&w, &b, &[j.clone()])), Term::peq(&a, &b, &[j.clone()]));
        let e = expand_peq(&Term::peq(&w, &b, &[i.clone()]));
        let expect = Term::or(vec![
            Term::and2(&Term::eq(&j, &i), &Term::peq(&a, &b, &[i.clone()])),
            Term::and(vec![
                Term::neq(&j, &i),
                Term::peq(&a, &b, &[i.clone(), j.clone()]),
                Term::eq(&Term::rd(&b, &j), &v),
            ]),
        ]);
        assert_eq!(e, expect);
    }
}
