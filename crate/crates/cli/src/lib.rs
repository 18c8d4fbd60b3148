//! The `termlab` command line.
//!
//! Every analysis is a subcommand taking a problem file. Output is text by
//! default and a single JSON document with `--json`. Exit codes: 0 for a
//! definite answer, 1 for an inconclusive one (MAYBE, stuck, out of fuel or
//! time), 2 for usage and input errors.

use std::io::BufRead;
use std::net::{IpAddr, SocketAddr};
use std::path::{Path, PathBuf};
use std::time::Duration;

use clap::{Args, Parser, Subcommand};
use serde_json::{json, Value};
use termlab_core::annotation::{annotated_normalize, check_annotation, parse_annotation};
use termlab_core::budget::Deadline;
use termlab_core::completion::{
    decide_validity, symbols_in_order, Command, CompletionError, CompletionState, OrderParams, PrecedenceSpec,
    ReductionOrder, Status,
};
use termlab_core::complexity::{curve_csv, dc_empirical, dh, rc_empirical, ComplexityError, CurvePoint, Dh};
use termlab_core::confluence::{analyze_confluence, ConfluenceConfig, Verdict};
use termlab_core::critical::critical_pairs;
use termlab_core::termination::{prove_termination, Answer, Method, Template, TerminationConfig};
use termlab_core::{normalize, parse_problem, print_problem, print_trs, Equation, Outcome, ProblemFile, Strategy, Term, Trs};

pub const EXIT_DEFINITE: i32 = 0;
pub const EXIT_INCONCLUSIVE: i32 = 1;
pub const EXIT_ERROR: i32 = 2;

const DEFAULT_FUEL: usize = 1000;
const DEFAULT_NODE_CAP: usize = 200_000;

#[derive(Debug, Parser)]
#[command(name = "termlab", version, about = "Term rewriting analysis workbench")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Cmd,
    #[command(flatten)]
    pub common: Common,
}

#[derive(Debug, Clone, Args)]
pub struct Common {
    /// Print one JSON document instead of text.
    #[arg(long, global = true)]
    pub json: bool,
    /// Step bound for rewriting, round bound for completion, node budget for complexity.
    #[arg(long, global = true, value_name = "N")]
    pub fuel: Option<usize>,
    /// Search depth: loop search for termination, joining and witnesses for confluence.
    #[arg(long, global = true, value_name = "N")]
    pub depth: Option<usize>,
    /// Wall-clock bound per analysis; exceeding it yields an inconclusive answer.
    #[arg(long, global = true, value_name = "SECONDS")]
    pub timeout: Option<f64>,
}

#[derive(Debug, Subcommand)]
pub enum Cmd {
    /// Parse a problem file and print it back in normalized form.
    Parse { file: PathBuf },
    /// Rewrite a term under a strategy or a strategy annotation.
    Rewrite {
        file: PathBuf,
        #[arg(long)]
        term: String,
        /// li, lo or max.
        #[arg(long, default_value = "li")]
        strategy: String,
        /// Just-in-time strategy annotation file; overrides --strategy.
        #[arg(long, value_name = "FILE")]
        annotation: Option<PathBuf>,
        /// Print every step.
        #[arg(long)]
        trace: bool,
    },
    /// List the critical pairs.
    Cps { file: PathBuf },
    /// Decide confluence.
    Confluence { file: PathBuf },
    /// Prove or disprove termination.
    Termination {
        file: PathBuf,
        /// auto, poly, matrix, lpo, kbo or loop.
        #[arg(long, default_value = "auto")]
        method: String,
        /// Partial certificate, e.g. 'b = 4*x1 + _'. Repeatable.
        #[arg(long, value_name = "S")]
        template: Vec<String>,
        /// Required precedence facts, e.g. 'f > g'. Repeatable.
        #[arg(long, value_name = "S")]
        prec: Vec<String>,
        /// Fixed KBO weights, e.g. 'f=0' or 'w0=1'. Repeatable.
        #[arg(long, value_name = "S")]
        weight: Vec<String>,
        #[arg(long, value_name = "N")]
        max_coeff: Option<u64>,
        #[arg(long, value_name = "N")]
        dim: Option<usize>,
    },
    /// Knuth-Bendix completion of the equations; interactive on stdin unless --auto.
    Complete {
        file: PathBuf,
        /// kbo, lpo or poly.
        #[arg(long, default_value = "kbo")]
        order: String,
        /// Precedence, greatest first, e.g. 'i > f > e'.
        #[arg(long, value_name = "S")]
        prec: Option<String>,
        /// Run the automatic strategy to completion.
        #[arg(long)]
        auto: bool,
    },
    /// Decide an equation with a convergent system (equations are completed first).
    Validity {
        file: PathBuf,
        #[arg(long)]
        left: String,
        #[arg(long)]
        right: String,
        /// Order used when the file holds equations.
        #[arg(long, default_value = "kbo")]
        order: String,
    },
    /// Derivation heights and empirical complexity curves.
    Complexity {
        file: PathBuf,
        /// Derivation height of a term.
        #[arg(long, value_name = "T", group = "measure", required_unless_present_any = ["dc", "rc"])]
        dh: Option<String>,
        /// Derivational complexity for sizes 1..=N.
        #[arg(long, value_name = "N", group = "measure")]
        dc: Option<usize>,
        /// Runtime complexity (basic terms) for sizes 1..=N.
        #[arg(long, value_name = "N", group = "measure")]
        rc: Option<usize>,
    },
    /// Run the HTTP completion service.
    Serve {
        #[arg(long, default_value_t = 8080)]
        port: u16,
        #[arg(long, default_value = "127.0.0.1")]
        bind: IpAddr,
        /// Load sessions from and save them to this directory.
        #[arg(long, value_name = "DIR")]
        persist: Option<PathBuf>,
        /// Allowed CORS origin ('*' for any). Repeatable.
        #[arg(long, value_name = "ORIGIN")]
        cors: Vec<String>,
        #[arg(long, default_value_t = 1024)]
        max_sessions: usize,
        /// Concurrent analyses.
        #[arg(long, default_value_t = 4)]
        workers: usize,
    },
}

/// What a run produced.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Output {
    pub code: i32,
    pub stdout: String,
    pub stderr: String,
}

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error("{0}")]
    Input(String),
}

struct Report {
    code: i32,
    text: String,
    json: Value,
}

impl Report {
    fn new(code: i32, text: String, json: Value) -> Self {
        Report { code, text, json }
    }
}

/// Parses `args` (including the program name) and runs the command, reading
/// interactive input from `stdin`.
pub fn run<I, T>(args: I, stdin: &mut dyn BufRead) -> Output
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_ERROR } else { EXIT_DEFINITE };
            let text = e.render().to_string();
            return if e.use_stderr() {
                Output { code, stdout: String::new(), stderr: text }
            } else {
                Output { code, stdout: text, stderr: String::new() }
            };
        }
    };
    match execute(&cli, stdin) {
        Ok(r) => {
            let stdout = if cli.common.json {
                let mut s = serde_json::to_string_pretty(&r.json).expect("reports serialize");
                s.push('\n');
                s
            } else {
                r.text
            };
            Output {
                code: r.code,
                stdout,
                stderr: String::new(),
            }
        }
        Err(e) => {
            let stdout = if cli.common.json {
                let kind = match e {
                    CliError::Usage(_) => "usage",
                    CliError::Input(_) => "input",
                };
                format!("{}\n", json!({ "error": { "kind": kind, "message": e.to_string() } }))
            } else {
                String::new()
            };
            Output {
                code: EXIT_ERROR,
                stdout,
                stderr: format!("error: {e}\n"),
            }
        }
    }
}

fn usage(msg: impl Into<String>) -> CliError {
    CliError::Usage(msg.into())
}

fn input(msg: impl Into<String>) -> CliError {
    CliError::Input(msg.into())
}

fn validate(common: &Common) -> Result<Option<Duration>, CliError> {
    if common.fuel == Some(0) {
        return Err(usage("--fuel must be positive"));
    }
    match common.timeout {
        None => Ok(None),
        Some(t) if t.is_finite() && t > 0.0 => Ok(Some(Duration::from_secs_f64(t))),
        Some(t) => Err(usage(format!("--timeout must be a positive number of seconds, got {t}"))),
    }
}

fn load(path: &Path) -> Result<ProblemFile, CliError> {
    let text = std::fs::read_to_string(path).map_err(|e| input(format!("cannot read {}: {e}", path.display())))?;
    parse_problem(&text).map_err(|e| input(format!("{}: {e}", path.display())))
}

fn rules_of(p: &ProblemFile, path: &Path) -> Result<Trs, CliError> {
    p.trs().map_err(|e| input(format!("{}: {e}", path.display())))
}

fn term(p: &ProblemFile, flag: &str, text: &str) -> Result<Term, CliError> {
    p.parse_term(text).map_err(|e| input(format!("{flag}: {e}")))
}

fn to_json<T: serde::Serialize>(v: &T) -> Value {
    serde_json::to_value(v).expect("reports serialize")
}

fn execute(cli: &Cli, stdin: &mut dyn BufRead) -> Result<Report, CliError> {
    let timeout = validate(&cli.common)?;
    let c = &cli.common;
    match &cli.command {
        Cmd::Parse { file } => cmd_parse(file),
        Cmd::Rewrite {
            file,
            term: t,
            strategy,
            annotation,
            trace,
        } => cmd_rewrite(file, t, strategy, annotation.as_deref(), *trace, c),
        Cmd::Cps { file } => cmd_cps(file),
        Cmd::Confluence { file } => cmd_confluence(file, c, timeout),
        Cmd::Termination {
            file,
            method,
            template,
            prec,
            weight,
            max_coeff,
            dim,
        } => {
            let mut cfg = termination_config(method, template, prec, weight, *max_coeff, *dim)?;
            if let Some(d) = c.depth {
                cfg.loop_depth = d;
            }
            if let Some(t) = timeout {
                cfg.deadline = Deadline::after(t);
            }
            cmd_termination(file, &cfg)
        }
        Cmd::Complete { file, order, prec, auto } => {
            let p = load(file)?;
            let mut state = new_session(&p, order, prec.as_deref())?;
            if *auto {
                cmd_complete_auto(&mut state, c.fuel.unwrap_or(DEFAULT_FUEL), timeout)
            } else {
                cmd_complete_interactive(&mut state, stdin)
            }
        }
        Cmd::Validity { file, left, right, order } => cmd_validity(file, left, right, order, c, timeout),
        Cmd::Complexity { file, dh: t, dc, rc } => cmd_complexity(file, t.as_deref(), *dc, *rc, c, timeout),
        Cmd::Serve {
            port,
            bind,
            persist,
            cors,
            max_sessions,
            workers,
        } => {
            let config = termlab_service::ServiceConfig {
                bind: SocketAddr::new(*bind, *port),
                max_sessions: *max_sessions,
                persist: persist.clone(),
                cors_origins: cors.clone(),
                analysis_workers: *workers,
                analysis_timeout: timeout.unwrap_or(Duration::from_secs(10)),
                ..termlab_service::ServiceConfig::default()
            };
            let rt = tokio::runtime::Runtime::new().map_err(|e| input(format!("cannot start runtime: {e}")))?;
            rt.block_on(termlab_service::serve(config))
                .map_err(|e| input(format!("serve: {e}")))?;
            Ok(Report::new(EXIT_DEFINITE, String::new(), json!({ "stopped": true })))
        }
    }
}

fn cmd_parse(file: &Path) -> Result<Report, CliError> {
    let p = load(file)?;
    let sig = p.signature().map_err(|e| input(format!("{}: {e}", file.display())))?;
    let rules: Vec<Value> = p
        .rules
        .iter()
        .enumerate()
        .map(|(i, r)| {
            let id = r.id.clone().unwrap_or_else(|| format!("r{}", i + 1));
            json!({ "id": id, "lhs": r.lhs.to_string(), "rhs": r.rhs.to_string() })
        })
        .collect();
    let equations: Vec<Value> = p
        .equations
        .iter()
        .map(|e| json!({ "lhs": e.lhs.to_string(), "rhs": e.rhs.to_string() }))
        .collect();
    let signature: Vec<Value> = sig.iter().map(|(f, n)| json!({ "symbol": f.to_string(), "arity": n })).collect();
    let json = json!({
        "variables": p.variables,
        "signature": signature,
        "rules": rules,
        "equations": equations,
        "comments": p.comments,
    });
    Ok(Report::new(EXIT_DEFINITE, print_problem(&p), json))
}

fn cmd_rewrite(
    file: &Path,
    t: &str,
    strategy: &str,
    annotation: Option<&Path>,
    trace: bool,
    c: &Common,
) -> Result<Report, CliError> {
    let p = load(file)?;
    let trs = rules_of(&p, file)?;
    let start = term(&p, "--term", t)?;
    let fuel = c.fuel.unwrap_or(DEFAULT_FUEL);
    let mut text = String::new();
    let (label, result, ann_report) = match annotation {
        Some(path) => {
            let src = std::fs::read_to_string(path).map_err(|e| input(format!("cannot read {}: {e}", path.display())))?;
            let a = parse_annotation(&src).map_err(|e| input(format!("{}: {e}", path.display())))?;
            a.validate(&trs).map_err(|e| input(format!("{}: {e}", path.display())))?;
            let report = check_annotation(&a, &trs);
            for v in &report.violations {
                text.push_str(&format!("warning: {v}\n"));
            }
            let r = annotated_normalize(&start, &trs, &a, fuel).map_err(|e| input(e.to_string()))?;
            ("annotation".to_string(), r, Some(report))
        }
        None => {
            let s = match Strategy::parse(strategy) {
                Some(s @ (Strategy::LeftmostInnermost | Strategy::LeftmostOutermost | Strategy::Maximal)) => s,
                _ => return Err(usage(format!("--strategy: expected li, lo or max, got '{strategy}'"))),
            };
            (s.to_string(), normalize(&start, &trs, s, fuel), None)
        }
    };
    if trace {
        let mut cur = start.to_string();
        for s in &result.steps {
            text.push_str(&format!("{cur} -> {}   [{} at {}]\n", s.result, s.rule, s.position));
            cur = s.result.to_string();
        }
    }
    let n = result.steps.len();
    let code = match result.outcome {
        Outcome::NormalForm => {
            text.push_str(&format!("normal form: {} ({n} steps)\n", result.term));
            EXIT_DEFINITE
        }
        Outcome::Stuck => {
            text.push_str(&format!("stuck: {} ({n} steps)\n", result.term));
            EXIT_INCONCLUSIVE
        }
        Outcome::FuelExhausted => {
            text.push_str(&format!("fuel exhausted after {n} steps: {}\n", result.term));
            EXIT_INCONCLUSIVE
        }
    };
    let mut json = json!({
        "start": start.to_string(),
        "strategy": label,
        "outcome": to_json(&result.outcome),
        "result": result.term.to_string(),
        "stepCount": n,
        "steps": to_json(&result.steps),
    });
    if let Some(r) = ann_report {
        json["annotation"] = to_json(&r);
    }
    Ok(Report::new(code, text, json))
}

fn cmd_cps(file: &Path) -> Result<Report, CliError> {
    let p = load(file)?;
    let trs = rules_of(&p, file)?;
    let cps = critical_pairs(&trs);
    let mut text = format!("{} critical pair(s)\n", cps.len());
    for cp in &cps {
        text.push_str(&format!(
            "  {} = {}   [{} into {} at {}; peak {}]\n",
            cp.left, cp.right, cp.overlap.inner_id, cp.overlap.outer_id, cp.overlap.position, cp.peak
        ));
    }
    Ok(Report::new(
        EXIT_DEFINITE,
        text,
        json!({ "count": cps.len(), "criticalPairs": to_json(&cps) }),
    ))
}

fn cmd_confluence(file: &Path, c: &Common, timeout: Option<Duration>) -> Result<Report, CliError> {
    let p = load(file)?;
    let trs = rules_of(&p, file)?;
    let mut cfg = ConfluenceConfig::default();
    if let Some(d) = c.depth {
        cfg.join_depth = d;
        cfg.witness_depth = d;
    }
    if let Some(t) = timeout {
        cfg.termination.deadline = Deadline::after(t);
    }
    let report = analyze_confluence(&trs, &cfg);
    let code = if report.verdict == Verdict::Maybe { EXIT_INCONCLUSIVE } else { EXIT_DEFINITE };
    Ok(Report::new(code, report.to_text(), to_json(&report)))
}

fn termination_config(
    method: &str,
    template: &[String],
    prec: &[String],
    weight: &[String],
    max_coeff: Option<u64>,
    dim: Option<usize>,
) -> Result<TerminationConfig, CliError> {
    let mut cfg = TerminationConfig {
        method: method.parse::<Method>().map_err(|e| usage(format!("--method: {e}")))?,
        ..TerminationConfig::default()
    };
    let mut t = Template::default();
    for entry in template {
        let parsed = Template::parse(entry).map_err(|e| usage(format!("--template: {e}")))?;
        t.poly.extend(parsed.poly);
        t.precedence.extend(parsed.precedence);
        t.weights.extend(parsed.weights);
        t.w0 = parsed.w0.or(t.w0);
    }
    for entry in prec {
        t.add_precedence(entry).map_err(|e| usage(format!("--prec: {e}")))?;
    }
    for entry in weight {
        t.add_weight(entry).map_err(|e| usage(format!("--weight: {e}")))?;
    }
    cfg.template = t;
    if let Some(m) = max_coeff {
        cfg.max_coeff = m;
    }
    if let Some(d) = dim {
        if !(1..=4).contains(&d) {
            return Err(usage("--dim must be between 1 and 4"));
        }
        cfg.matrix_dim = d;
    }
    Ok(cfg)
}

fn cmd_termination(file: &Path, cfg: &TerminationConfig) -> Result<Report, CliError> {
    let p = load(file)?;
    let trs = rules_of(&p, file)?;
    let report = prove_termination(&trs, cfg).map_err(|e| usage(e.to_string()))?;
    let code = if report.answer == Answer::Maybe { EXIT_INCONCLUSIVE } else { EXIT_DEFINITE };
    Ok(Report::new(code, report.to_text(), to_json(&report)))
}

fn equations_of(p: &ProblemFile) -> Vec<Equation> {
    if p.equations.is_empty() {
        p.rules.iter().map(|r| Equation::new(r.lhs.clone(), r.rhs.clone())).collect()
    } else {
        p.equations.clone()
    }
}

fn new_session(p: &ProblemFile, order: &str, prec: Option<&str>) -> Result<CompletionState, CliError> {
    let equations = equations_of(p);
    if equations.is_empty() {
        return Err(input("the problem has no equations"));
    }
    let params = OrderParams {
        precedence: prec.map(|s| PrecedenceSpec::Text(s.to_string())),
        ..OrderParams::default()
    };
    let order = ReductionOrder::build(order, &params, &symbols_in_order(&equations)).map_err(|e| usage(format!("--order: {e}")))?;
    CompletionState::new(equations, order).map_err(|e| input(e.to_string()))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum AutoOutcome {
    Completed,
    Failed,
    FuelExhausted,
    Timeout,
}

impl AutoOutcome {
    fn name(self) -> &'static str {
        match self {
            AutoOutcome::Completed => "completed",
            AutoOutcome::Failed => "failed",
            AutoOutcome::FuelExhausted => "fuel_exhausted",
            AutoOutcome::Timeout => "timeout",
        }
    }
}

/// Runs automatic rounds until success, failure, or a bound is hit.
fn auto_run(state: &mut CompletionState, fuel: usize, timeout: Option<Duration>) -> Result<(AutoOutcome, usize), CliError> {
    let deadline = timeout.map(Deadline::after).unwrap_or_else(Deadline::none);
    let mut rounds = 0;
    let outcome = loop {
        match state.status() {
            Status::Success => break AutoOutcome::Completed,
            Status::Stuck => break AutoOutcome::Failed,
            Status::Running => {}
        }
        if rounds >= fuel {
            break AutoOutcome::FuelExhausted;
        }
        if deadline.expired() {
            break AutoOutcome::Timeout;
        }
        rounds += 1;
        match state.auto_step() {
            Ok(_) | Err(CompletionError::Stuck(_)) => {}
            Err(e) => return Err(input(e.to_string())),
        }
    };
    Ok((outcome, rounds))
}

fn state_json(state: &CompletionState) -> Value {
    to_json(&state.view())
}

fn state_text(state: &CompletionState) -> String {
    let v = state.view();
    let mut out = String::new();
    out.push_str(&format!("status: {}\n", to_json(&v.status).as_str().unwrap_or("?")));
    if let Some(f) = &v.failure {
        out.push_str(&format!("failure: {f}\n"));
    }
    out.push_str("E:\n");
    for e in &v.equations {
        out.push_str(&format!("  {}: {} = {}\n", e.id, e.lhs, e.rhs));
    }
    out.push_str("R:\n");
    for r in &v.rules {
        out.push_str(&format!("  {}: {} -> {}\n", r.id, r.lhs, r.rhs));
    }
    out
}

fn cmd_complete_auto(state: &mut CompletionState, fuel: usize, timeout: Option<Duration>) -> Result<Report, CliError> {
    let (outcome, rounds) = auto_run(state, fuel, timeout)?;
    let code = if outcome == AutoOutcome::Completed { EXIT_DEFINITE } else { EXIT_INCONCLUSIVE };
    let trs_text = print_trs(&state.trs());
    let mut text = format!("{} after {rounds} round(s) with {}\n", outcome.name(), state.order);
    if outcome == AutoOutcome::Completed {
        text.push_str(&trs_text);
    } else {
        text.push_str(&state_text(state));
    }
    let mut json = state_json(state);
    json["outcome"] = json!(outcome.name());
    json["rounds"] = json!(rounds);
    json["trs"] = json!(trs_text);
    Ok(Report::new(code, text, json))
}

/// Reads one command per line (`orient e1 lr`, `deduce r1 r2`, `auto`,
/// `undo`, `show`, `quit`, …) and prints the state after each.
fn cmd_complete_interactive(state: &mut CompletionState, stdin: &mut dyn BufRead) -> Result<Report, CliError> {
    let mut text = state_text(state);
    let mut log = Vec::new();
    let mut line = String::new();
    loop {
        line.clear();
        let n = stdin.read_line(&mut line).map_err(|e| input(format!("stdin: {e}")))?;
        let cmd_text = line.split('#').next().unwrap_or("").trim();
        if n == 0 || cmd_text == "quit" || cmd_text == "exit" {
            break;
        }
        if cmd_text.is_empty() {
            continue;
        }
        if cmd_text == "show" {
            text.push_str(&state_text(state));
            continue;
        }
        text.push_str(&format!("> {cmd_text}\n"));
        let entry = match cmd_text.parse::<Command>() {
            Err(e) => {
                text.push_str(&format!("error: {e}\n"));
                json!({ "input": cmd_text, "ok": false, "error": { "code": "invalid-command", "message": e } })
            }
            Ok(cmd) => match state.apply(&cmd) {
                Ok(msg) => {
                    text.push_str(&format!("{msg}\n"));
                    text.push_str(&state_text(state));
                    json!({ "input": cmd_text, "ok": true, "message": msg, "state": state_json(state) })
                }
                Err(e) => {
                    text.push_str(&format!("error: {e}\n"));
                    if matches!(e, CompletionError::Stuck(_)) {
                        text.push_str(&state_text(state));
                    }
                    json!({
                        "input": cmd_text,
                        "ok": false,
                        "error": { "code": e.code(), "message": e.to_string() },
                        "state": state_json(state),
                    })
                }
            },
        };
        log.push(entry);
    }
    let status = state.status();
    let code = if status == Status::Success { EXIT_DEFINITE } else { EXIT_INCONCLUSIVE };
    if status == Status::Success {
        text.push_str(&print_trs(&state.trs()));
    }
    let mut json = state_json(state);
    json["log"] = Value::Array(log);
    json["trs"] = json!(print_trs(&state.trs()));
    Ok(Report::new(code, text, json))
}

fn cmd_validity(
    file: &Path,
    left: &str,
    right: &str,
    order: &str,
    c: &Common,
    timeout: Option<Duration>,
) -> Result<Report, CliError> {
    let p = load(file)?;
    let s = term(&p, "--left", left)?;
    let t = term(&p, "--right", right)?;
    let mut text = String::new();
    let trs = if p.rules.is_empty() {
        // complete the equations first
        let mut state = new_session(&p, order, None)?;
        let (outcome, rounds) = auto_run(&mut state, DEFAULT_FUEL, timeout)?;
        if outcome != AutoOutcome::Completed {
            let msg = format!("completion {} after {rounds} round(s); validity is undecided\n", outcome.name());
            return Ok(Report::new(
                EXIT_INCONCLUSIVE,
                msg,
                json!({ "valid": null, "completion": outcome.name(), "rounds": rounds }),
            ));
        }
        text.push_str(&format!("completed in {rounds} round(s)\n"));
        state.trs()
    } else {
        rules_of(&p, file)?
    };
    let v = decide_validity(&trs, &s, &t, c.fuel.unwrap_or(DEFAULT_FUEL));
    let code = if v.complete { EXIT_DEFINITE } else { EXIT_INCONCLUSIVE };
    if !v.complete {
        text.push_str("fuel exhausted; the normal forms below may not be final\n");
    }
    text.push_str(&format!(
        "{}\n  {} ->* {} ({} steps)\n  {} ->* {} ({} steps)\n",
        if v.valid { "VALID" } else { "INVALID" },
        s,
        v.left_normal_form,
        v.left_steps.len(),
        t,
        v.right_normal_form,
        v.right_steps.len()
    ));
    Ok(Report::new(code, text, to_json(&v)))
}

fn cmd_complexity(
    file: &Path,
    t: Option<&str>,
    dc: Option<usize>,
    rc: Option<usize>,
    c: &Common,
    timeout: Option<Duration>,
) -> Result<Report, CliError> {
    let p = load(file)?;
    let trs = rules_of(&p, file)?;
    let cap = c.fuel.unwrap_or(DEFAULT_NODE_CAP);
    if let Some(t) = t {
        let start = term(&p, "--dh", t)?;
        return Ok(match dh(&start, &trs, cap) {
            Ok(Dh::Finite { value, derivation }) => {
                let mut text = format!("dh({start}) = {value}\n");
                let mut cur = start.to_string();
                for s in &derivation {
                    text.push_str(&format!("  {cur} -> {}   [{} at {}]\n", s.result, s.rule, s.position));
                    cur = s.result.to_string();
                }
                let d = Dh::Finite { value, derivation };
                Report::new(EXIT_DEFINITE, text, json!({ "term": start.to_string(), "dh": to_json(&d) }))
            }
            Ok(d @ Dh::Infinite { .. }) => {
                let Dh::Infinite { cycle } = &d else { unreachable!() };
                let shown: Vec<String> = cycle.iter().map(Term::to_string).collect();
                let text = format!("dh({start}) is infinite: {}\n", shown.join(" -> "));
                Report::new(EXIT_DEFINITE, text, json!({ "term": start.to_string(), "dh": to_json(&d) }))
            }
            Err(e @ ComplexityError::BudgetExceeded { .. }) => Report::new(
                EXIT_INCONCLUSIVE,
                format!("MAYBE: {e}\n"),
                json!({ "term": start.to_string(), "dh": null, "error": { "code": e.code(), "message": e.to_string() } }),
            ),
            Err(e) => return Err(input(e.to_string())),
        });
    }
    let (max, f, kind): (usize, fn(&Trs, usize, usize) -> Result<CurvePoint, ComplexityError>, &str) = match (dc, rc) {
        (Some(n), _) => (n, dc_empirical, "dc"),
        (None, Some(n)) => (n, rc_empirical, "rc"),
        (None, None) => return Err(usage("one of --dh, --dc or --rc is required")),
    };
    if max == 0 {
        return Err(usage(format!("--{kind} must be positive")));
    }
    let deadline = timeout.map(Deadline::after).unwrap_or_else(Deadline::none);
    let mut points = Vec::new();
    let mut notes = Vec::new();
    let mut code = EXIT_DEFINITE;
    for n in 1..=max {
        if deadline.expired() {
            notes.push(format!("timeout before size {n}"));
            code = EXIT_INCONCLUSIVE;
            break;
        }
        match f(&trs, n, cap) {
            Ok(pt) => points.push(pt),
            Err(ComplexityError::NoTerms(_)) => notes.push(format!("no terms of size {n}")),
            Err(e @ ComplexityError::Infinite { .. }) => {
                notes.push(e.to_string());
                break;
            }
            Err(e) => {
                notes.push(e.to_string());
                code = EXIT_INCONCLUSIVE;
                break;
            }
        }
    }
    let mut text = curve_csv(&points);
    for n in &notes {
        text.push_str(&format!("# {n}\n"));
    }
    let json = json!({ "kind": kind, "points": to_json(&points), "notes": notes });
    Ok(Report::new(code, text, json))
}
