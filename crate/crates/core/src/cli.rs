//! Command-line interface: `solve`, `qe`, `mbp` and `oracle`.

use crate::engine::{solve, EngineOptions, Verdict};
use crate::frontend::{format_verdict, load_system, parse_quantified_script, QuantifiedScript};
use crate::mbp::{combined_mbp, MbpOptions, MbpTask};
use crate::oracles::{self, gen, FiniteDomainSpec};
use crate::qe::{array_qe, IndexMode, QeTask};
use crate::smt::{SatResult, Session, SolverConfig};
use crate::term::{smtlib_symbol, SmtLibDisplay, Sort, Var};
use clap::{Args, Parser, Subcommand, ValueEnum};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use std::io::Write;
use std::path::PathBuf;
use std::time::Duration;

#[derive(Parser, Debug)]
#[command(name = "arrchc", version, about = "Horn clause solving over arrays and integers")]
pub struct Cli {
    #[command(flatten)]
    pub common: Common,
    #[command(subcommand)]
    pub cmd: Cmd,
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, ValueEnum)]
pub enum Switch {
    On,
    Off,
}

impl Switch {
    fn on(self) -> bool {
        self == Switch::On
    }
}

#[derive(Args, Debug)]
pub struct Common {
    /// Backend command line; must speak SMT-LIB2 on stdin.
    #[arg(long, global = true, default_value = "z3 -in -smt2")]
    pub solver_cmd: String,
    /// Timeout for each backend call.
    #[arg(long, global = true, default_value_t = 20000)]
    pub timeout_ms: u64,
    /// Print structured trace events on stderr.
    #[arg(long, global = true)]
    pub trace: bool,
    /// Treat the index sort as finite.
    #[arg(long, global = true)]
    pub finite_index: bool,
}

impl Common {
    fn solver(&self) -> SolverConfig {
        SolverConfig::default().with_command(&self.solver_cmd).with_timeout(Duration::from_millis(self.timeout_ms))
    }
}

#[derive(Subcommand, Debug)]
pub enum Cmd {
    /// Solve a HORN script.
    Solve {
        file: PathBuf,
        /// Bound on the level N.
        #[arg(long)]
        max_depth: Option<usize>,
        /// Wall-clock budget for the whole run.
        #[arg(long)]
        budget_ms: Option<u64>,
        /// Re-check the verdict against the clauses or by bounded unrolling.
        #[arg(long)]
        validate: bool,
        /// Check the summary invariants after every rule.
        #[arg(long)]
        debug_checks: bool,
        #[arg(long, value_enum, default_value = "off")]
        heuristic_array_eq: Switch,
        #[arg(long, value_enum, default_value = "on")]
        heuristic_eq_res: Switch,
        #[arg(long, value_enum, default_value = "on")]
        successor_mbp: Switch,
    },
    /// Eliminate the array quantifier of `(assert (exists ((a ..)) ..))`.
    Qe { file: PathBuf },
    /// Project the quantified variables under a model of the body and the
    /// other assertions.
    Mbp {
        file: PathBuf,
        #[arg(long, value_enum, default_value = "off")]
        heuristic_array_eq: Switch,
    },
    /// Brute-force and enumeration oracles.
    Oracle {
        #[command(subcommand)]
        which: OracleCmd,
    },
}

#[derive(Subcommand, Debug)]
pub enum OracleCmd {
    /// Compare `qe` against exhaustive evaluation over a finite universe.
    BruteQe {
        file: PathBuf,
        #[arg(long, value_delimiter = ',', default_value = "0,1")]
        index: Vec<i64>,
        #[arg(long, value_delimiter = ',', default_value = "0,1")]
        values: Vec<i64>,
        /// Extra array index points outside the index domain.
        #[arg(long, default_value_t = 1)]
        padding: usize,
    },
    /// Enumerate projections until the body is exhausted.
    Enumerate {
        file: PathBuf,
        #[arg(long, default_value_t = 200)]
        cap: usize,
        /// Force the substitution fallback for integers.
        #[arg(long)]
        substitute: bool,
    },
    /// Bounded reachability of a bad state.
    Bmc {
        file: PathBuf,
        #[arg(long, default_value_t = 5)]
        depth: usize,
    },
    /// Print a random task.
    Gen {
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        bool_index: bool,
    },
}

/// Run the CLI; returns the process exit code.
pub fn run<I, T>(args: I, out: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let _ = e.print();
            return code;
        }
    };
    match dispatch(&cli, out) {
        Ok(code) => code,
        Err(msg) => {
            eprintln!("error: {}", msg);
            1
        }
    }
}

fn read(p: &PathBuf) -> Result<String, String> {
    std::fs::read_to_string(p).map_err(|e| format!("{}: {}", p.display(), e))
}

fn single_array(q: &QuantifiedScript, finite: bool) -> Result<QeTask, String> {
    match q.quantified.as_slice() {
        [a] if a.sort.is_array() => {
            let mut t = QeTask::new(a.clone(), q.body.clone());
            if finite {
                t.index_mode = IndexMode::Finite(None);
            }
            Ok(t)
        }
        _ => Err("qe expects exactly one quantified array".into()),
    }
}

fn binder(vs: &[Var]) -> String {
    vs.iter().map(|v| format!("({} {})", smtlib_symbol(&v.name), v.sort)).collect::<Vec<_>>().join(" ")
}

fn dispatch(cli: &Cli, out: &mut dyn Write) -> Result<i32, String> {
    let io = |e: std::io::Error| e.to_string();
    match &cli.cmd {
        Cmd::Solve {
            file,
            max_depth,
            budget_ms,
            validate,
            debug_checks,
            heuristic_array_eq,
            heuristic_eq_res,
            successor_mbp,
        } => {
            let sys = load_system(&read(file)?).map_err(|e| e.to_string())?;
            let opts = EngineOptions {
                solver: cli.common.solver(),
                max_depth: *max_depth,
                time_budget: budget_ms.map(Duration::from_millis),
                heuristic_array_eq: heuristic_array_eq.on(),
                heuristic_eq_res: heuristic_eq_res.on(),
                successor_mbp: successor_mbp.on(),
                finite_index: cli.common.finite_index,
                validate: *validate,
                debug_checks: *debug_checks,
                trace: cli.common.trace,
            };
            let report = solve(&sys, &opts);
            writeln!(out, "{}", format_verdict(&sys, &report.verdict)).map_err(io)?;
            for v in &report.violations {
                eprintln!("violation: {}", v);
            }
            match &report.verdict {
                Verdict::Unknown(why) => {
                    eprintln!("unknown: {}", why);
                    Ok(1)
                }
                Verdict::Unsafe { depth, .. } => {
                    if cli.common.trace {
                        eprintln!("counterexample depth {}", depth);
                    }
                    Ok(0)
                }
                Verdict::Safe(_) => Ok(0),
            }
        }
        Cmd::Qe { file } => {
            let q = parse_quantified_script(&read(file)?).map_err(|e| e.to_string())?;
            let task = single_array(&q, cli.common.finite_index)?;
            let r = array_qe(&task).map_err(|e| e.to_string())?;
            let fresh = r.fresh_vars();
            if fresh.is_empty() {
                writeln!(out, "{}", SmtLibDisplay(&r.matrix)).map_err(io)?;
            } else {
                writeln!(out, "(exists ({}) {})", binder(&fresh), SmtLibDisplay(&r.matrix)).map_err(io)?;
            }
            if cli.common.trace {
                eprintln!("event=qe rules={} peqs={} disjuncts={}", r.stats.rule_applications, r.stats.peqs, r.stats.disjuncts);
            }
            Ok(0)
        }
        Cmd::Mbp { file, heuristic_array_eq } => {
            let q = parse_quantified_script(&read(file)?).map_err(|e| e.to_string())?;
            let mut sess = Session::new(cli.common.solver()).map_err(|e| e.to_string())?;
            let mut items = vec![("body".to_string(), q.body.clone())];
            items.extend(q.hints.iter().enumerate().map(|(k, h)| (format!("h{}", k), h.clone())));
            let m = match sess.check(&items).map_err(|e| e.to_string())? {
                SatResult::Sat(m) => m,
                SatResult::Unsat(_) => return Err("body and hints are unsatisfiable".into()),
                SatResult::Unknown(r) => return Err(format!("backend unknown: {}", r)),
            };
            if cli.common.trace {
                eprintln!("model: {}", m);
            }
            let opts = MbpOptions {
                finite_index: cli.common.finite_index,
                strengthen: heuristic_array_eq.on(),
                ..MbpOptions::default()
            };
            let task = MbpTask { quantified: q.quantified.clone(), body: q.body.clone(), model: m };
            let r = combined_mbp(&task, &opts).map_err(|e| e.to_string())?;
            writeln!(out, "{}", SmtLibDisplay(&r.result)).map_err(io)?;
            Ok(0)
        }
        Cmd::Oracle { which } => oracle(cli, which, out),
    }
}

fn oracle(cli: &Cli, which: &OracleCmd, out: &mut dyn Write) -> Result<i32, String> {
    let io = |e: std::io::Error| e.to_string();
    match which {
        OracleCmd::BruteQe { file, index, values, padding } => {
            let q = parse_quantified_script(&read(file)?).map_err(|e| e.to_string())?;
            let task = single_array(&q, cli.common.finite_index)?;
            let spec = FiniteDomainSpec::new(index.clone(), values.clone())
                .map_err(|e| e.to_string())?
                .with_padding(*padding);
            let table = oracles::brute_qe(&task, &spec).map_err(|e| e.to_string())?;
            for (vals, b) in &table.rows {
                let cells: Vec<String> = table.vars.iter().zip(vals).map(|(v, x)| format!("{}={}", v.name, x)).collect();
                writeln!(out, "{} -> {}", cells.join(" "), b).map_err(io)?;
            }
            let r = array_qe(&task).map_err(|e| e.to_string())?;
            match oracles::check_qe_pointwise(&task, &r, &spec).map_err(|e| e.to_string())? {
                None => {
                    writeln!(out, "agree").map_err(io)?;
                    Ok(0)
                }
                Some(m) => {
                    writeln!(out, "disagree at {}", m).map_err(io)?;
                    Ok(1)
                }
            }
        }
        OracleCmd::Enumerate { file, cap, substitute } => {
            let q = parse_quantified_script(&read(file)?).map_err(|e| e.to_string())?;
            let mut sess = Session::new(cli.common.solver()).map_err(|e| e.to_string())?;
            let opts = MbpOptions { finite_index: cli.common.finite_index, substitute_only: *substitute, ..MbpOptions::default() };
            let e = oracles::mbp_enumerate(&q.body, &q.quantified, &mut sess, &opts, *cap).map_err(|e| e.to_string())?;
            for r in &e.results {
                writeln!(out, "{}", SmtLibDisplay(r)).map_err(io)?;
            }
            if e.complete {
                writeln!(out, "; complete after {} projections", e.results.len()).map_err(io)?;
                Ok(0)
            } else {
                writeln!(out, "; cap of {} reached", cap).map_err(io)?;
                Ok(1)
            }
        }
        OracleCmd::Bmc { file, depth } => {
            let sys = load_system(&read(file)?).map_err(|e| e.to_string())?;
            let mut sess = Session::new(cli.common.solver()).map_err(|e| e.to_string())?;
            let d = oracles::bmc_min_depth(&sys, *depth, &mut sess).map_err(|e| e.to_string())?;
            match d {
                Some(d) => writeln!(out, "reachable at depth {}", d).map_err(io)?,
                None => writeln!(out, "unreachable up to depth {}", depth).map_err(io)?,
            }
            Ok(0)
        }
        OracleCmd::Gen { seed, bool_index } => {
            let mut rng = ChaCha8Rng::seed_from_u64(*seed);
            let cfg = if *bool_index { gen::GenConfig { index_sort: Sort::Bool, ..Default::default() } } else { Default::default() };
            let t = gen::qe_task(&mut rng, &cfg);
            for v in t.body.free_vars() {
                if v != t.quantified {
                    writeln!(out, "(declare-const {} {})", smtlib_symbol(&v.name), v.sort).map_err(io)?;
                }
            }
            writeln!(out, "(assert (exists ({}) {}))", binder(std::slice::from_ref(&t.quantified)), t.body).map_err(io)?;
            Ok(0)
        }
    }
}
