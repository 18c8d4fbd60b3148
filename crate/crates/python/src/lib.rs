//! Python bindings: terms, rewrite systems, analyses and completion sessions.
//!
//! Reports cross the boundary as plain dicts and lists (the same shapes as the
//! CLI's `--json` output); terms are passed either as `Term` objects or as
//! strings in the problem syntax.

use pyo3::create_exception;
use pyo3::exceptions::PyValueError;
use pyo3::prelude::*;
use pyo3::types::PyModule;
use serde::Serialize;
use termlab_core::annotation::{annotated_normalize, check_annotation, parse_annotation};
use termlab_core::budget::Deadline;
use termlab_core::completion::{
    decide_validity, symbols_in_order, Command, CompletionError, CompletionState, OrderParams, PrecedenceSpec,
    ReductionOrder, Status,
};
use termlab_core::complexity::{dc_empirical, dh, rc_empirical};
use termlab_core::confluence::{analyze_confluence, ConfluenceConfig};
use termlab_core::critical::critical_pairs;
use termlab_core::termination::{prove_termination, Method, Template, TerminationConfig};
use termlab_core::{normalize, parse_problem, print_trs, step, Equation, ProblemFile, Strategy};

create_exception!(termlab, TermlabError, PyValueError);

fn err(e: impl std::fmt::Display) -> PyErr {
    TermlabError::new_err(e.to_string())
}

/// Converts a serializable report into Python objects via JSON.
fn to_py<T: Serialize>(py: Python<'_>, v: &T) -> PyResult<Py<PyAny>> {
    let text = serde_json::to_string(v).map_err(err)?;
    Ok(py.import("json")?.call_method1("loads", (text,))?.unbind())
}

/// An immutable first-order term.
#[pyclass(name = "Term", module = "termlab", frozen, eq, hash, from_py_object)]
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct PyTerm {
    inner: termlab_core::Term,
}

#[pymethods]
impl PyTerm {
    /// Parses `text`; identifiers listed in `variables` are variables.
    #[staticmethod]
    #[pyo3(signature = (text, variables = Vec::new()))]
    fn parse(text: &str, variables: Vec<String>) -> PyResult<Self> {
        let vars = variables.into_iter().collect();
        termlab_core::parse_term(text, &vars)
            .map(|inner| PyTerm { inner })
            .map_err(err)
    }

    #[getter]
    fn size(&self) -> usize {
        self.inner.size()
    }

    /// Head symbol, or `None` for a variable.
    #[getter]
    fn root(&self) -> Option<String> {
        self.inner.root().map(|f| f.to_string())
    }

    #[getter]
    fn args(&self) -> Vec<PyTerm> {
        match &self.inner {
            termlab_core::Term::Var(_) => Vec::new(),
            termlab_core::Term::App(_, args) => args.iter().map(|a| PyTerm { inner: a.clone() }).collect(),
        }
    }

    fn is_var(&self) -> bool {
        self.inner.is_var()
    }

    fn __str__(&self) -> String {
        self.inner.to_string()
    }

    fn __repr__(&self) -> String {
        format!("Term('{}')", self.inner)
    }
}

/// A term argument: a `Term` or its text.
#[derive(FromPyObject)]
enum TermArg {
    Term(PyTerm),
    Text(String),
}

/// A rewrite system parsed from a problem file.
#[pyclass(name = "Trs", module = "termlab", frozen)]
pub struct PyTrs {
    problem: ProblemFile,
    trs: termlab_core::Trs,
}

impl PyTrs {
    fn arg(&self, t: TermArg) -> PyResult<termlab_core::Term> {
        match t {
            TermArg::Term(t) => Ok(t.inner),
            TermArg::Text(s) => self.problem.parse_term(&s).map_err(err),
        }
    }
}

fn strategy(name: &str) -> PyResult<Strategy> {
    Strategy::parse(name).ok_or_else(|| err(format!("unknown strategy '{name}' (expected li, lo, max or full)")))
}

#[pymethods]
impl PyTrs {
    /// Parses a problem in the `(VAR …)(RULES …)` format.
    #[new]
    fn new(text: &str) -> PyResult<Self> {
        let problem = parse_problem(text).map_err(err)?;
        let trs = problem.trs().map_err(err)?;
        Ok(PyTrs { problem, trs })
    }

    /// `(id, lhs, rhs)` for each rule, terms as strings.
    #[getter]
    fn rules(&self) -> Vec<(String, String, String)> {
        self.trs
            .rules()
            .iter()
            .enumerate()
            .map(|(i, r)| (self.trs.rule_label(i), r.lhs.to_string(), r.rhs.to_string()))
            .collect()
    }

    fn __len__(&self) -> usize {
        self.trs.rules().len()
    }

    fn __str__(&self) -> String {
        print_trs(&self.trs)
    }

    /// Parses a term with this system's variables.
    fn term(&self, text: &str) -> PyResult<PyTerm> {
        Ok(PyTerm {
            inner: self.problem.parse_term(text).map_err(err)?,
        })
    }

    /// One step under `strategy`: `(result, rule, position)` or `None`.
    #[pyo3(signature = (term, strategy = "li"))]
    fn step(&self, term: TermArg, strategy: &str) -> PyResult<Option<(PyTerm, String, Vec<usize>)>> {
        let t = self.arg(term)?;
        Ok(step(&t, &self.trs, self::strategy(strategy)?).map(|(u, rx)| {
            (PyTerm { inner: u }, self.trs.rule_label(rx.rule), rx.position.0.clone())
        }))
    }

    /// Normalizes with at most `fuel` steps: `{outcome, term, steps}`.
    #[pyo3(signature = (term, strategy = "li", fuel = 1000))]
    fn normalize(&self, py: Python<'_>, term: TermArg, strategy: &str, fuel: usize) -> PyResult<Py<PyAny>> {
        let t = self.arg(term)?;
        let s = self::strategy(strategy)?;
        let r = py.detach(|| normalize(&t, &self.trs, s, fuel));
        to_py(py, &r)
    }

    /// Normalizes under a strategy annotation given as text.
    #[pyo3(signature = (term, annotation, fuel = 1000))]
    fn annotated_normalize(&self, py: Python<'_>, term: TermArg, annotation: &str, fuel: usize) -> PyResult<Py<PyAny>> {
        let t = self.arg(term)?;
        let a = parse_annotation(annotation).map_err(err)?;
        let r = annotated_normalize(&t, &self.trs, &a, fuel).map_err(err)?;
        to_py(py, &r)
    }

    /// Fullness and in-time report for an annotation.
    fn check_annotation(&self, py: Python<'_>, annotation: &str) -> PyResult<Py<PyAny>> {
        let a = parse_annotation(annotation).map_err(err)?;
        to_py(py, &check_annotation(&a, &self.trs))
    }

    fn critical_pairs(&self, py: Python<'_>) -> PyResult<Py<PyAny>> {
        to_py(py, &critical_pairs(&self.trs))
    }

    /// Termination proof or disproof; `timeout` in seconds.
    #[pyo3(signature = (method = "auto", template = None, timeout = None))]
    fn termination(&self, py: Python<'_>, method: &str, template: Option<&str>, timeout: Option<f64>) -> PyResult<Py<PyAny>> {
        let mut cfg = TerminationConfig {
            method: method.parse::<Method>().map_err(err)?,
            ..TerminationConfig::default()
        };
        if let Some(t) = template {
            cfg.template = Template::parse(t).map_err(err)?;
        }
        if let Some(s) = timeout {
            cfg.deadline = Deadline::after(std::time::Duration::from_secs_f64(s.max(0.0)));
        }
        let report = py.detach(|| prove_termination(&self.trs, &cfg)).map_err(err)?;
        to_py(py, &report)
    }

    fn confluence(&self, py: Python<'_>) -> PyResult<Py<PyAny>> {
        let report = py.detach(|| analyze_confluence(&self.trs, &ConfluenceConfig::default()));
        to_py(py, &report)
    }

    /// Derivation height with a longest derivation (or a cycle).
    #[pyo3(signature = (term, node_cap = 200_000))]
    fn dh(&self, py: Python<'_>, term: TermArg, node_cap: usize) -> PyResult<Py<PyAny>> {
        let t = self.arg(term)?;
        let r = py.detach(|| dh(&t, &self.trs, node_cap)).map_err(err)?;
        to_py(py, &r)
    }

    /// `max dh` over ground terms of size `n`, with a witness.
    #[pyo3(signature = (n, node_cap = 200_000))]
    fn dc(&self, py: Python<'_>, n: usize, node_cap: usize) -> PyResult<Py<PyAny>> {
        let r = py.detach(|| dc_empirical(&self.trs, n, node_cap)).map_err(err)?;
        to_py(py, &r)
    }

    /// `max dh` over basic terms of size `n`, with a witness.
    #[pyo3(signature = (n, node_cap = 200_000))]
    fn rc(&self, py: Python<'_>, n: usize, node_cap: usize) -> PyResult<Py<PyAny>> {
        let r = py.detach(|| rc_empirical(&self.trs, n, node_cap)).map_err(err)?;
        to_py(py, &r)
    }

    /// Decides `left = right` assuming this system is convergent.
    #[pyo3(signature = (left, right, fuel = 100_000))]
    fn validity(&self, py: Python<'_>, left: TermArg, right: TermArg, fuel: usize) -> PyResult<Py<PyAny>> {
        let (s, t) = (self.arg(left)?, self.arg(right)?);
        to_py(py, &decide_validity(&self.trs, &s, &t, fuel))
    }
}

fn completion_err(e: CompletionError) -> PyErr {
    TermlabError::new_err(format!("{}: {e}", e.code()))
}

/// An interactive Knuth–Bendix completion session with undo.
#[pyclass(name = "CompletionSession", module = "termlab")]
pub struct PySession {
    state: CompletionState,
}

#[pymethods]
impl PySession {
    /// `problem` holds EQUATIONS (or RULES, read as equations); `order` is
    /// kbo, lpo or poly; `precedence` like "i > f > e".
    #[new]
    #[pyo3(signature = (problem, order = "kbo", precedence = None))]
    fn new(problem: &str, order: &str, precedence: Option<String>) -> PyResult<Self> {
        let p = parse_problem(problem).map_err(err)?;
        let equations: Vec<Equation> = if p.equations.is_empty() {
            p.rules.iter().map(|r| Equation::new(r.lhs.clone(), r.rhs.clone())).collect()
        } else {
            p.equations
        };
        let params = OrderParams {
            precedence: precedence.map(PrecedenceSpec::Text),
            ..OrderParams::default()
        };
        let order = ReductionOrder::build(order, &params, &symbols_in_order(&equations)).map_err(completion_err)?;
        let state = CompletionState::new(equations, order).map_err(completion_err)?;
        Ok(PySession { state })
    }

    /// Applies a command such as "orient e1 lr", "deduce r1 r2", "auto" or
    /// "undo"; returns the message. A failed automatic round is recorded and
    /// reported through `status`.
    fn apply(&mut self, command: &str) -> PyResult<String> {
        let cmd: Command = command.parse().map_err(err)?;
        match self.state.apply(&cmd) {
            Ok(msg) => Ok(msg),
            Err(CompletionError::Stuck(reason)) => Ok(format!("stuck: {reason}")),
            Err(e) => Err(completion_err(e)),
        }
    }

    fn auto_step(&mut self) -> PyResult<String> {
        self.apply("auto")
    }

    fn undo(&mut self) -> PyResult<String> {
        self.apply("undo")
    }

    /// Runs automatic rounds until success, failure or `fuel` rounds;
    /// returns the final status.
    #[pyo3(signature = (fuel = 1000))]
    fn run(&mut self, py: Python<'_>, fuel: usize) -> PyResult<String> {
        let state = &mut self.state;
        py.detach(|| {
            for _ in 0..fuel {
                if state.status() != Status::Running {
                    break;
                }
                match state.auto_step() {
                    Ok(_) | Err(CompletionError::Stuck(_)) => {}
                    Err(e) => return Err(completion_err(e)),
                }
            }
            Ok(())
        })?;
        Ok(self.status())
    }

    #[getter]
    fn status(&self) -> String {
        match self.state.status() {
            Status::Running => "running",
            Status::Success => "success",
            Status::Stuck => "stuck",
        }
        .to_string()
    }

    /// `{equations, rules, status, historyLength, …}` with terms as strings.
    fn state(&self, py: Python<'_>) -> PyResult<Py<PyAny>> {
        to_py(py, &self.state.view())
    }

    /// The current rules in the problem format.
    fn export(&self) -> String {
        print_trs(&self.state.trs())
    }

    /// The current rules as a `Trs`.
    fn trs(&self) -> PyResult<PyTrs> {
        PyTrs::new(&self.export())
    }
}

#[pymodule]
fn termlab(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<PyTerm>()?;
    m.add_class::<PyTrs>()?;
    m.add_class::<PySession>()?;
    m.add("TermlabError", m.py().get_type::<TermlabError>())?;
    Ok(())
}
