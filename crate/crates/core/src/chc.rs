//! Normalized single-predicate Horn systems.
//!
//! ```text
//! Inv(x)                          <- init(x)
//! Inv(x') <- Inv(x), Inv(x°),        tr(x, x°, x')
//! false   <- Inv(x),                 bad(x)
//! ```
//!
//! Variables other than `x`, `x°` and `x'` are clause-local and implicitly
//! existential.

use crate::term::{Subst, Term, Var};
use std::collections::HashSet;
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
#[error("malformed system: {0}")]
pub struct ChcError(pub String);

/// Which copy of the state vector a formula is instantiated over.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Copy {
    Cur,
    Call,
    Post,
}

#[derive(Clone, Debug)]
pub struct ChcSystem {
    pub pred: String,
    pub state_vars: Vec<Var>,
    pub post_vars: Vec<Var>,
    pub call_vars: Vec<Var>,
    pub init: Term,
    pub tr: Term,
    pub bad: Term,
    pub has_call: bool,
}

pub fn post_var(v: &Var) -> Var {
    v.renamed(&format!("{}!next", v.name))
}

pub fn call_var(v: &Var) -> Var {
    v.renamed(&format!("{}!call", v.name))
}

impl ChcSystem {
    /// `tr` must use [`post_var`] and [`call_var`] names for `x'` and `x°`.
    pub fn new(pred: &str, state_vars: Vec<Var>, init: Term, tr: Term, bad: Term, has_call: bool) -> Result<ChcSystem, ChcError> {
        let post_vars: Vec<Var> = state_vars.iter().map(post_var).collect();
        let call_vars: Vec<Var> = state_vars.iter().map(call_var).collect();
        let sys = ChcSystem { pred: pred.to_string(), state_vars, post_vars, call_vars, init, tr, bad, has_call };
        sys.check()?;
        Ok(sys)
    }

    fn check(&self) -> Result<(), ChcError> {
        let names: HashSet<&str> = self.state_vars.iter().map(|v| &*v.name).collect();
        if names.len() != self.state_vars.len() {
            return Err(ChcError("duplicate state variable".into()));
        }
        for (what, f) in [("init", &self.init), ("tr", &self.tr), ("bad", &self.bad)] {
            if !f.is_bool() {
                return Err(ChcError(format!("{} is not a formula", what)));
            }
        }
        let post: HashSet<&Var> = self.post_vars.iter().collect();
        let call: HashSet<&Var> = self.call_vars.iter().collect();
        for (what, f) in [("init", &self.init), ("bad", &self.bad)] {
            if let Some(v) = f.free_vars().iter().find(|v| post.contains(v) || call.contains(v)) {
                return Err(ChcError(format!("{} mentions {}", what, v.name)));
            }
        }
        if !self.has_call {
            if let Some(v) = self.tr.free_vars().iter().find(|v| call.contains(v)) {
                return Err(ChcError(format!("tr mentions {} without a call", v.name)));
            }
        }
        let all: Vec<&Var> = self.state_vars.iter().chain(&self.post_vars).chain(&self.call_vars).collect();
        for v in self.locals() {
            if all.iter().any(|w| w.name == v.name) {
                return Err(ChcError(format!("{} is used with two sorts", v.name)));
            }
        }
        Ok(())
    }

    fn is_interface(&self, v: &Var) -> bool {
        self.state_vars.contains(v) || self.post_vars.contains(v) || self.call_vars.contains(v)
    }

    /// Clause-local variables of `f`.
    pub fn locals_of(&self, f: &Term) -> Vec<Var> {
        f.free_vars().into_iter().filter(|v| !self.is_interface(v)).collect()
    }

    pub fn locals(&self) -> Vec<Var> {
        let mut out = self.locals_of(&self.init);
        for f in [&self.tr, &self.bad] {
            for v in self.locals_of(f) {
                if !out.contains(&v) {
                    out.push(v);
                }
            }
        }
        out
    }

    pub fn init_has_locals(&self) -> bool {
        !self.locals_of(&self.init).is_empty()
    }

    pub fn vars_of(&self, c: Copy) -> &[Var] {
        match c {
            Copy::Cur => &self.state_vars,
            Copy::Call => &self.call_vars,
            Copy::Post => &self.post_vars,
        }
    }

    /// Rename a formula over `x` to the given copy.
    pub fn to_copy(&self, f: &Term, c: Copy) -> Term {
        self.rename(f, Copy::Cur, c)
    }

    /// Rename a formula over copy `c` back to `x`.
    pub fn from_copy(&self, f: &Term, c: Copy) -> Term {
        self.rename(f, c, Copy::Cur)
    }

    fn rename(&self, f: &Term, from: Copy, to: Copy) -> Term {
        if from == to {
            return f.clone();
        }
        let pairs: Vec<(Var, Var)> =
            self.vars_of(from).iter().cloned().zip(self.vars_of(to).iter().cloned()).collect();
        Subst::renaming(&pairs).apply(f)
    }

    /// `init` over the given copy, with its locals renamed apart per copy.
    pub fn init_at(&self, c: Copy) -> Term {
        let f = self.to_copy(&self.init, c);
        let suffix = match c {
            Copy::Cur => return f,
            Copy::Call => "!call",
            Copy::Post => "!next",
        };
        let pairs: Vec<(Var, Var)> = self
            .locals_of(&self.init)
            .into_iter()
            .map(|v| {
                let w = v.renamed(&format!("{}{}", v.name, suffix));
                (v, w)
            })
            .collect();
        Subst::renaming(&pairs).apply(&f)
    }

    /// `F(a, b) = init(x') ∨ (a(x) ∧ b(x°) ∧ tr)`; `b` is ignored without a call.
    pub fn mk_f(&self, a: &Term, b: &Term) -> Term {
        let step = if self.has_call {
            Term::and(vec![a.clone(), self.to_copy(b, Copy::Call), self.tr.clone()])
        } else {
            Term::and2(a, &self.tr)
        };
        Term::or2(&self.init_at(Copy::Post), &step)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::term::Sort;

    #[test]
    fn counter_f() {
        let x = Var::new("x", Sort::Int);
        let xp = post_var(&x);
        let init = Term::eq(&x.term(), &Term::int(0));
        let tr = Term::eq(&xp.term(), &Term::plus(&x.term(), &Term::int(1)));
        let bad = Term::lt(&x.term(), &Term::int(0));
        let sys = ChcSystem::new("Inv", vec![x.clone()], init, tr.clone(), bad, false).unwrap();
        let a = Term::ge(&x.term(), &Term::int(0));
        let f = sys.mk_f(&a, &Term::tt());
        assert_eq!(f, Term::or2(&Term::eq(&xp.term(), &Term::int(0)), &Term::and2(&a, &tr)));
        assert_eq!(sys.mk_f(&Term::ff(), &Term::ff()), Term::eq(&xp.term(), &Term::int(0)));
        assert_eq!(sys.mk_f(&Term::tt(), &Term::tt()), Term::or2(&Term::eq(&xp.term(), &Term::int(0)), &tr));
    }

    #[test]
    fn call_vars_require_call() {
        let x = Var::new("x", Sort::Int);
        let tr = Term::eq(&post_var(&x).term(), &call_var(&x).term());
        assert!(ChcSystem::new("Inv", vec![x.clone()], Term::tt(), tr.clone(), Term::ff(), false).is_err());
        assert!(ChcSystem::new("Inv", vec![x], Term::tt(), tr, Term::ff(), true).is_ok());
    }

    #[test]
    fn init_locals_are_renamed_per_copy() {
        let x = Var::new("x", Sort::Int);
        let y = Var::new("y!init", Sort::Int);
        let init = Term::lt(&x.term(), &y.term());
        let sys = ChcSystem::new("Inv", vec![x.clone()], init, Term::ff(), Term::ff(), false).unwrap();
        assert!(sys.init_has_locals());
        let p = sys.init_at(Copy::Post);
        assert_eq!(p.to_string(), "(< x!next y!init!next)");
    }
}
