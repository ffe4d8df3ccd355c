//! Python bindings. Formulas cross the boundary as SMT-LIB text.

use arrchc_core::chc;
use arrchc_core::engine::{self, EngineOptions, Verdict};
use arrchc_core::frontend::{self, QuantifiedScript};
use arrchc_core::mbp::{combined_mbp, MbpOptions, MbpTask};
use arrchc_core::oracles::{self, gen, FiniteDomainSpec};
use arrchc_core::qe::{self as core_qe, QeTask};
use arrchc_core::smt::{SatResult, Session, SolverConfig};
use arrchc_core::term::{smtlib_symbol, SmtLibDisplay, Sort};
use pyo3::exceptions::{PyRuntimeError, PyValueError};
use pyo3::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use std::time::Duration;

fn value_err(e: impl ToString) -> PyErr {
    PyValueError::new_err(e.to_string())
}

fn runtime_err(e: impl ToString) -> PyErr {
    PyRuntimeError::new_err(e.to_string())
}

fn session(timeout_ms: u64) -> PyResult<Session> {
    Session::new(SolverConfig::default().with_timeout(Duration::from_millis(timeout_ms))).map_err(runtime_err)
}

/// An immutable formula or term.
#[pyclass(frozen, skip_from_py_object, module = "arrchc")]
#[derive(Clone)]
struct Term {
    inner: arrchc_core::term::Term,
}

#[pymethods]
impl Term {
    fn size(&self) -> usize {
        self.inner.size()
    }

    /// Free variables as `(name, sort)` pairs.
    fn free_vars(&self) -> Vec<(String, String)> {
        self.inner.free_vars().into_iter().map(|v| (v.name.to_string(), v.sort.to_string())).collect()
    }

    fn __str__(&self) -> String {
        SmtLibDisplay(&self.inner).to_string()
    }

    fn __repr__(&self) -> String {
        format!("Term({})", SmtLibDisplay(&self.inner))
    }

    fn __eq__(&self, other: &Term) -> bool {
        self.inner == other.inner
    }
}

fn wrap(t: &arrchc_core::term::Term) -> Term {
    Term { inner: t.clone() }
}

#[pyclass(frozen, get_all, module = "arrchc")]
struct QeResult {
    matrix: Term,
    /// Existentially quantified value and index variables left in the matrix.
    fresh: Vec<(String, String)>,
    disjuncts: usize,
    peqs: usize,
    rule_applications: usize,
}

#[pymethods]
impl QeResult {
    /// The result as a closed SMT-LIB formula.
    fn __str__(&self) -> String {
        if self.fresh.is_empty() {
            return self.matrix.__str__();
        }
        let binder: Vec<String> = self.fresh.iter().map(|(n, s)| format!("({} {})", smtlib_symbol(n), s)).collect();
        format!("(exists ({}) {})", binder.join(" "), self.matrix.__str__())
    }
}

#[pyclass(frozen, get_all, module = "arrchc")]
struct MbpResult {
    result: Term,
    used_substitution: bool,
}

/// A normalized single-predicate Horn system.
#[pyclass(frozen, module = "arrchc")]
struct ChcSystem {
    inner: chc::ChcSystem,
}

#[pymethods]
impl ChcSystem {
    #[staticmethod]
    fn parse(text: &str) -> PyResult<ChcSystem> {
        Ok(ChcSystem { inner: frontend::load_system(text).map_err(value_err)? })
    }

    #[getter]
    fn predicate(&self) -> String {
        self.inner.pred.clone()
    }

    #[getter]
    fn state_vars(&self) -> Vec<(String, String)> {
        self.inner.state_vars.iter().map(|v| (v.name.to_string(), v.sort.to_string())).collect()
    }

    #[getter]
    fn has_call(&self) -> bool {
        self.inner.has_call
    }

    #[getter]
    fn init(&self) -> Term {
        wrap(&self.inner.init)
    }

    #[getter]
    fn tr(&self) -> Term {
        wrap(&self.inner.tr)
    }

    #[getter]
    fn bad(&self) -> Term {
        wrap(&self.inner.bad)
    }

    #[pyo3(signature = (heuristic_array_eq=false, validate=false, debug_checks=false, budget_ms=None, max_depth=None, finite_index=false))]
    fn solve(
        &self,
        py: Python<'_>,
        heuristic_array_eq: bool,
        validate: bool,
        debug_checks: bool,
        budget_ms: Option<u64>,
        max_depth: Option<usize>,
        finite_index: bool,
    ) -> SolveReport {
        let opts = EngineOptions {
            heuristic_array_eq,
            validate,
            debug_checks,
            time_budget: budget_ms.map(Duration::from_millis),
            max_depth,
            finite_index,
            ..EngineOptions::default()
        };
        let r = py.detach(|| engine::solve(&self.inner, &opts));
        let (verdict, invariant, depth, reason) = match &r.verdict {
            Verdict::Safe(inv) => ("safe", Some(wrap(inv)), None, None),
            Verdict::Unsafe { depth, .. } => ("unsafe", None, Some(*depth), None),
            Verdict::Unknown(why) => ("unknown", None, None, Some(why.clone())),
        };
        SolveReport {
            verdict: verdict.to_string(),
            invariant,
            depth,
            reason,
            output: frontend::format_verdict(&self.inner, &r.verdict),
            violations: r.violations.clone(),
            lemmas: r.stats.lemmas,
            mbp_calls: r.stats.mbp_calls,
        }
    }

    /// Smallest depth at most `depth` where a bad state is derivable.
    #[pyo3(signature = (depth=5))]
    fn bmc(&self, depth: usize) -> PyResult<Option<usize>> {
        oracles::bmc_min_depth(&self.inner, depth, &mut session(20_000)?).map_err(runtime_err)
    }

    /// Checks a candidate invariant given as SMT-LIB over the state variables.
    fn validate(&self, invariant: &str) -> PyResult<bool> {
        let mut env = arrchc_core::term::parse::Env::with_vars(&self.inner.state_vars);
        let inv = arrchc_core::term::parse::parse_term_str(invariant, &mut env).map_err(value_err)?;
        Ok(engine::validate_invariant(&self.inner, &inv, &mut session(20_000)?).is_ok())
    }
}

#[pyclass(frozen, get_all, module = "arrchc")]
struct SolveReport {
    /// "safe", "unsafe" or "unknown".
    verdict: String,
    invariant: Option<Term>,
    depth: Option<usize>,
    reason: Option<String>,
    /// What the `solve` command prints.
    output: String,
    violations: Vec<String>,
    lemmas: usize,
    mbp_calls: usize,
}

#[pymethods]
impl SolveReport {
    fn __repr__(&self) -> String {
        format!("SolveReport(verdict={:?}, depth={:?})", self.verdict, self.depth)
    }
}

fn quantified(text: &str) -> PyResult<QuantifiedScript> {
    frontend::parse_quantified_script(text).map_err(value_err)
}

fn single_task(q: &QuantifiedScript, finite: bool) -> PyResult<QeTask> {
    match q.quantified.as_slice() {
        [a] if a.sort.is_array() => {
            let t = QeTask::new(a.clone(), q.body.clone());
            Ok(if finite { t.finite() } else { t })
        }
        _ => Err(PyValueError::new_err("expected exactly one quantified array")),
    }
}

/// Eliminates the quantified array of a script `(assert (exists ((a ..)) body))`.
#[pyfunction]
#[pyo3(signature = (script, finite_index=false))]
fn qe(script: &str, finite_index: bool) -> PyResult<QeResult> {
    let task = single_task(&quantified(script)?, finite_index)?;
    let r = core_qe::array_qe(&task).map_err(runtime_err)?;
    Ok(QeResult {
        matrix: wrap(&r.matrix),
        fresh: r.fresh_vars().iter().map(|v| (v.name.to_string(), v.sort.to_string())).collect(),
        disjuncts: r.stats.disjuncts,
        peqs: r.stats.peqs,
        rule_applications: r.stats.rule_applications,
    })
}

/// Projects the quantified variables under a backend model of the body and
/// any further assertions in the script.
#[pyfunction]
#[pyo3(signature = (script, heuristic_array_eq=false, finite_index=false))]
fn mbp(script: &str, heuristic_array_eq: bool, finite_index: bool) -> PyResult<MbpResult> {
    let q = quantified(script)?;
    let mut items = vec![("body".to_string(), q.body.clone())];
    items.extend(q.hints.iter().enumerate().map(|(k, h)| (format!("h{}", k), h.clone())));
    let model = match session(20_000)?.check(&items).map_err(runtime_err)? {
        SatResult::Sat(m) => m,
        SatResult::Unsat(_) => return Err(PyValueError::new_err("body and hints are unsatisfiable")),
        SatResult::Unknown(r) => return Err(runtime_err(format!("backend unknown: {}", r))),
    };
    let opts = MbpOptions { strengthen: heuristic_array_eq, finite_index, ..MbpOptions::default() };
    let task = MbpTask { quantified: q.quantified.clone(), body: q.body.clone(), model };
    let r = combined_mbp(&task, &opts).map_err(runtime_err)?;
    Ok(MbpResult { result: wrap(&r.result), used_substitution: r.used_substitution })
}

/// Compares `qe` with brute-force evaluation over a finite universe.
#[pyfunction]
#[pyo3(signature = (script, index=vec![0, 1], values=vec![0, 1], padding=1, finite_index=false))]
fn brute_check(script: &str, index: Vec<i64>, values: Vec<i64>, padding: usize, finite_index: bool) -> PyResult<bool> {
    let task = single_task(&quantified(script)?, finite_index)?;
    let spec = FiniteDomainSpec::new(index, values).map_err(value_err)?.with_padding(padding);
    let r = core_qe::array_qe(&task).map_err(runtime_err)?;
    Ok(oracles::check_qe_pointwise(&task, &r, &spec).map_err(runtime_err)?.is_none())
}

/// All projections of the script's existential, until the models run out or `cap` is hit.
#[pyfunction]
#[pyo3(signature = (script, cap=200))]
fn enumerate(script: &str, cap: usize) -> PyResult<(Vec<Term>, bool)> {
    let q = quantified(script)?;
    let e = oracles::mbp_enumerate(&q.body, &q.quantified, &mut session(20_000)?, &MbpOptions::default(), cap)
        .map_err(runtime_err)?;
    Ok((e.results.iter().map(wrap).collect(), e.complete))
}

/// A random QE task as a script.
#[pyfunction]
#[pyo3(signature = (seed, bool_index=false))]
fn gen_task(seed: u64, bool_index: bool) -> String {
    let cfg = if bool_index { gen::GenConfig { index_sort: Sort::Bool, ..Default::default() } } else { Default::default() };
    let t = gen::qe_task(&mut ChaCha8Rng::seed_from_u64(seed), &cfg);
    let mut out = String::new();
    for v in t.body.free_vars() {
        if v != t.quantified {
            out.push_str(&format!("(declare-const {} {})\n", smtlib_symbol(&v.name), v.sort));
        }
    }
    out.push_str(&format!(
        "(assert (exists (({} {})) {}))\n",
        smtlib_symbol(&t.quantified.name),
        t.quantified.sort,
        SmtLibDisplay(&t.body)
    ));
    out
}

#[pymodule]
fn arrchc(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<Term>()?;
    m.add_class::<QeResult>()?;
    m.add_class::<MbpResult>()?;
    m.add_class::<ChcSystem>()?;
    m.add_class::<SolveReport>()?;
    m.add_function(wrap_pyfunction!(qe, m)?)?;
    m.add_function(wrap_pyfunction!(mbp, m)?)?;
    m.add_function(wrap_pyfunction!(brute_check, m)?)?;
    m.add_function(wrap_pyfunction!(enumerate, m)?)?;
    m.add_function(wrap_pyfunction!(gen_task, m)?)?;
    Ok(())
}
