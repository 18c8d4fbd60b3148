//! Termination analysis: interpretations, path orders, loop detection and a
//! portfolio prover whose positive answers are re-verified before reporting.

mod kbo;
mod loops;
mod lpo;
mod matrix;
mod poly;
mod precedence;
mod search;

use std::collections::BTreeMap;
use std::fmt::Write as _;

use serde::Serialize;
use thiserror::Error;

use crate::budget::{Budget, Deadline, Exhausted};
use crate::term::{Name, Signature, Trs};

pub use kbo::{check_kbo, kbo_evidence, kbo_gt, prove_kbo, KboCertificate};
pub use loops::{check_loop, find_loop, LoopWitness};
pub use lpo::{check_lpo, lpo_evidence, lpo_gt, prove_lpo, LpoCertificate};
pub use matrix::{check_matrix, matrix_evidence, prove_matrix, LinearForm, Matrix, MatrixEntry, MatrixInterpretation};
pub use poly::{check_poly, poly_evidence, prove_poly, LinearPoly, PolyInterpretation};
pub use precedence::Precedence;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum TerminationError {
    #[error("interpretation does not cover symbol {0}")]
    MissingSymbol(String),
    #[error("arithmetic overflow while interpreting a term")]
    Overflow,
    #[error("invalid template entry '{entry}': {reason}")]
    Template { entry: String, reason: String },
    #[error("unknown termination method '{0}'")]
    UnknownMethod(String),
}

/// How one rule is oriented by a certificate.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct RuleEvidence {
    pub rule: String,
    pub text: String,
    pub lhs: String,
    pub rhs: String,
    pub relation: String,
}

/// User-supplied partial certificate. Absent entries are searched for.
#[derive(Debug, Clone, PartialEq, Eq, Default, Serialize)]
pub struct Template {
    /// symbol -> (0 = constant, i = coefficient of the i-th argument) -> fixed value or hole
    pub poly: BTreeMap<Name, BTreeMap<usize, Option<u64>>>,
    /// Required precedence facts `f > g`.
    pub precedence: Vec<(Name, Name)>,
    pub weights: BTreeMap<Name, u64>,
    pub w0: Option<u64>,
}

fn template_err(entry: &str, reason: &str) -> TerminationError {
    TerminationError::Template {
        entry: entry.to_string(),
        reason: reason.to_string(),
    }
}

impl Template {
    pub fn is_empty(&self) -> bool {
        self.poly.is_empty() && self.precedence.is_empty() && self.weights.is_empty() && self.w0.is_none()
    }

    /// Parses `;`- or newline-separated entries: `f > g > h` adds precedence
    /// facts, `w0 = 2` fixes the variable weight, anything else of the form
    /// `f = …` is an interpretation entry (see [`Template::add_poly`]).
    pub fn parse(text: &str) -> Result<Template, TerminationError> {
        let mut t = Template::default();
        for entry in text.split([';', '\n']).map(str::trim).filter(|e| !e.is_empty()) {
            if entry.contains('>') {
                t.add_precedence(entry)?;
            } else if entry.split('=').next().is_some_and(|l| l.trim() == "w0") {
                t.add_weight(entry)?;
            } else {
                t.add_poly(entry)?;
            }
        }
        Ok(t)
    }

    /// `b = 4*x1 + _`: summands are constants, `_` (a constant hole) or
    /// `[c|_][*]xi` for the i-th argument. Arguments count from 1 unless the
    /// entry mentions `x0`, in which case they count from 0. Unmentioned
    /// coefficients are holes.
    pub fn add_poly(&mut self, entry: &str) -> Result<(), TerminationError> {
        let (f, rhs) = entry.split_once('=').ok_or_else(|| template_err(entry, "expected 'f = …'"))?;
        let f = f.trim();
        if f.is_empty() {
            return Err(template_err(entry, "missing symbol"));
        }
        let mut raw: Vec<(Option<usize>, Option<u64>)> = Vec::new();
        for summand in rhs.split('+').map(str::trim) {
            if summand.is_empty() {
                return Err(template_err(entry, "empty summand"));
            }
            let (coef, var) = match summand.find('x') {
                None => (summand, None),
                Some(i) => {
                    let idx: usize = summand[i + 1..]
                        .trim()
                        .parse()
                        .map_err(|_| template_err(entry, "bad argument index"))?;
                    (summand[..i].trim().trim_end_matches('*').trim(), Some(idx))
                }
            };
            let value = match coef {
                "_" => None,
                "" if var.is_some() => Some(1),
                c => Some(c.parse().map_err(|_| template_err(entry, "bad coefficient"))?),
            };
            raw.push((var, value));
        }
        let zero_based = raw.iter().any(|(v, _)| *v == Some(0));
        let slot = self.poly.entry(Name::from(f)).or_default();
        for (var, value) in raw {
            let k = match var {
                None => 0,
                Some(i) if zero_based => i + 1,
                Some(0) => unreachable!(),
                Some(i) => i,
            };
            if slot.insert(k, value).is_some() {
                return Err(template_err(entry, "coefficient given twice"));
            }
        }
        Ok(())
    }

    /// `f > g > h`.
    pub fn add_precedence(&mut self, entry: &str) -> Result<(), TerminationError> {
        let syms: Vec<&str> = entry.split('>').map(str::trim).collect();
        if syms.len() < 2 || syms.iter().any(|s| s.is_empty()) {
            return Err(template_err(entry, "expected 'f > g'"));
        }
        for w in syms.windows(2) {
            self.precedence.push((Name::from(w[0]), Name::from(w[1])));
        }
        Ok(())
    }

    /// `f = 0` fixes a weight; `w0 = n` fixes the variable weight.
    pub fn add_weight(&mut self, entry: &str) -> Result<(), TerminationError> {
        let (f, v) = entry.split_once('=').ok_or_else(|| template_err(entry, "expected 'f = n'"))?;
        let v: u64 = v.trim().parse().map_err(|_| template_err(entry, "bad weight"))?;
        match f.trim() {
            "" => return Err(template_err(entry, "missing symbol")),
            "w0" => self.w0 = Some(v),
            f => {
                self.weights.insert(Name::from(f), v);
            }
        }
        Ok(())
    }

    /// Every referenced symbol must exist with a compatible arity.
    pub fn validate(&self, sig: &Signature) -> Result<(), TerminationError> {
        let known = |f: &Name| sig.contains_key(f);
        for (f, entries) in &self.poly {
            let n = *sig
                .get(f)
                .ok_or_else(|| template_err(f, "symbol not in signature"))?;
            if entries.keys().any(|&k| k > n) {
                return Err(template_err(f, "argument index exceeds arity"));
            }
            if entries.iter().any(|(&k, v)| k > 0 && *v == Some(0)) {
                return Err(template_err(f, "argument coefficients must be at least 1"));
            }
        }
        for (f, g) in &self.precedence {
            for s in [f, g] {
                if !known(s) {
                    return Err(template_err(s, "symbol not in signature"));
                }
            }
        }
        for f in self.weights.keys() {
            if !known(f) {
                return Err(template_err(f, "symbol not in signature"));
            }
        }
        if self.w0 == Some(0) {
            return Err(template_err("w0", "must be positive"));
        }
        Ok(())
    }

    /// `[c0, c1..cn]` with `None` for holes.
    pub(crate) fn poly_entries(&self, f: &Name, n: usize) -> Vec<Option<u64>> {
        let fixed = self.poly.get(f);
        (0..=n)
            .map(|k| fixed.and_then(|m| m.get(&k).copied().flatten()))
            .collect()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Method {
    Auto,
    Poly,
    Matrix,
    Lpo,
    Kbo,
    Loop,
}

impl std::str::FromStr for Method {
    type Err = TerminationError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Ok(match s {
            "auto" => Method::Auto,
            "poly" => Method::Poly,
            "matrix" => Method::Matrix,
            "lpo" => Method::Lpo,
            "kbo" => Method::Kbo,
            "loop" => Method::Loop,
            other => return Err(TerminationError::UnknownMethod(other.to_string())),
        })
    }
}

impl std::fmt::Display for Method {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Method::Auto => "auto",
            Method::Poly => "poly",
            Method::Matrix => "matrix",
            Method::Lpo => "lpo",
            Method::Kbo => "kbo",
            Method::Loop => "loop",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum Certificate {
    Poly(PolyInterpretation),
    Matrix(MatrixInterpretation),
    Lpo(LpoCertificate),
    Kbo(KboCertificate),
}

impl Certificate {
    pub fn method(&self) -> Method {
        match self {
            Certificate::Poly(_) => Method::Poly,
            Certificate::Matrix(_) => Method::Matrix,
            Certificate::Lpo(_) => Method::Lpo,
            Certificate::Kbo(_) => Method::Kbo,
        }
    }

    pub fn describe(&self) -> Vec<String> {
        match self {
            Certificate::Poly(i) => i.describe(),
            Certificate::Matrix(i) => i.describe(),
            Certificate::Lpo(c) => vec![format!("precedence: {}", c.precedence)],
            Certificate::Kbo(c) => {
                let ws: Vec<String> = c.weights.iter().map(|(f, w)| format!("w({f}) = {w}")).collect();
                vec![
                    format!("weights: {}, w0 = {}", ws.join(", "), c.w0),
                    format!("precedence: {}", c.precedence),
                ]
            }
        }
    }

    pub fn evidence(&self, trs: &Trs) -> Vec<RuleEvidence> {
        match self {
            Certificate::Poly(i) => poly_evidence(i, trs),
            Certificate::Matrix(i) => matrix_evidence(i, trs),
            Certificate::Lpo(c) => lpo_evidence(c, trs),
            Certificate::Kbo(c) => kbo_evidence(c, trs),
        }
    }
}

/// Independent re-check of a certificate against every rule.
pub fn check_certificate(cert: &Certificate, trs: &Trs) -> bool {
    match cert {
        Certificate::Poly(i) => check_poly(i, trs) == Ok(true),
        Certificate::Matrix(i) => check_matrix(i, trs) == Ok(true),
        Certificate::Lpo(c) => check_lpo(c, trs),
        Certificate::Kbo(c) => check_kbo(c, trs),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Answer {
    #[serde(rename = "YES")]
    Yes,
    #[serde(rename = "NO")]
    No,
    #[serde(rename = "MAYBE")]
    Maybe,
}

impl std::fmt::Display for Answer {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Answer::Yes => "YES",
            Answer::No => "NO",
            Answer::Maybe => "MAYBE",
        })
    }
}

#[derive(Debug, Clone)]
pub struct TerminationConfig {
    pub method: Method,
    pub max_coeff: u64,
    pub matrix_dim: usize,
    pub matrix_bound: u64,
    pub max_weight: u64,
    pub loop_depth: usize,
    /// Terms explored per start term during loop search.
    pub node_cap: usize,
    /// Search nodes allowed per method.
    pub candidate_budget: u64,
    pub template: Template,
    pub deadline: Deadline,
}

impl Default for TerminationConfig {
    fn default() -> Self {
        TerminationConfig {
            method: Method::Auto,
            max_coeff: 5,
            matrix_dim: 2,
            matrix_bound: 3,
            max_weight: 3,
            loop_depth: 5,
            node_cap: 20_000,
            candidate_budget: 2_000_000,
            template: Template::default(),
            deadline: Deadline::none(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct TerminationReport {
    pub answer: Answer,
    pub method: Option<Method>,
    pub certificate: Option<Certificate>,
    #[serde(rename = "loop")]
    pub loop_witness: Option<LoopWitness>,
    #[serde(rename = "perRuleEvidence")]
    pub evidence: Vec<RuleEvidence>,
    pub notes: Vec<String>,
}

impl TerminationReport {
    fn maybe(notes: Vec<String>) -> Self {
        TerminationReport {
            answer: Answer::Maybe,
            method: None,
            certificate: None,
            loop_witness: None,
            evidence: Vec::new(),
            notes,
        }
    }

    /// Human-readable proof text.
    pub fn to_text(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(out, "{}", self.answer);
        if let Some(m) = self.method {
            let _ = writeln!(out, "method: {m}");
        }
        if let Some(c) = &self.certificate {
            for line in c.describe() {
                let _ = writeln!(out, "  {line}");
            }
        }
        for e in &self.evidence {
            let _ = writeln!(out, "  {}: {}    {} {} {}", e.rule, e.text, e.lhs, e.relation, e.rhs);
        }
        if let Some(w) = &self.loop_witness {
            let _ = writeln!(out, "loop: {}", w.describe());
            let mut cur = w.start.to_string();
            for s in &w.trace {
                let _ = writeln!(out, "  {cur} -> {}   [{} at {}]", s.result, s.rule, s.position);
                cur = s.result.to_string();
            }
        }
        for n in &self.notes {
            let _ = writeln!(out, "note: {n}");
        }
        out
    }
}

fn run_method(trs: &Trs, m: Method, cfg: &TerminationConfig, budget: &mut Budget) -> Result<Option<Certificate>, Exhausted> {
    let t = &cfg.template;
    Ok(match m {
        Method::Poly => prove_poly(trs, cfg.max_coeff, t, budget)?.map(Certificate::Poly),
        Method::Matrix => prove_matrix(trs, cfg.matrix_dim, cfg.matrix_bound, t, budget)?.map(Certificate::Matrix),
        Method::Lpo => prove_lpo(trs, t, budget)?.map(Certificate::Lpo),
        Method::Kbo => prove_kbo(trs, cfg.max_weight, t, budget)?.map(Certificate::Kbo),
        Method::Auto | Method::Loop => None,
    })
}

/// Runs the configured method, or the portfolio loop → poly → LPO → KBO →
/// matrix for [`Method::Auto`].
pub fn prove_termination(trs: &Trs, cfg: &TerminationConfig) -> Result<TerminationReport, TerminationError> {
    cfg.template.validate(trs.signature())?;
    let methods: Vec<Method> = match cfg.method {
        Method::Auto => vec![Method::Loop, Method::Poly, Method::Lpo, Method::Kbo, Method::Matrix],
        m => vec![m],
    };
    let mut notes = Vec::new();
    for m in methods {
        if cfg.deadline.expired() {
            notes.push("timeout".to_string());
            break;
        }
        if m == Method::Loop {
            match find_loop(trs, cfg.loop_depth, cfg.node_cap) {
                Ok(Some(w)) if check_loop(&w, trs) => {
                    return Ok(TerminationReport {
                        answer: Answer::No,
                        method: Some(Method::Loop),
                        certificate: None,
                        loop_witness: Some(w),
                        evidence: Vec::new(),
                        notes,
                    })
                }
                Ok(Some(_)) => notes.push("loop: witness failed replay (discarded)".into()),
                Ok(None) => notes.push(format!("loop: none within depth {}", cfg.loop_depth)),
                Err(e) => notes.push(format!("loop: {e}")),
            }
            continue;
        }
        let mut budget = Budget::new(cfg.candidate_budget, cfg.deadline);
        match run_method(trs, m, cfg, &mut budget) {
            Ok(Some(cert)) => {
                if check_certificate(&cert, trs) {
                    return Ok(TerminationReport {
                        answer: Answer::Yes,
                        method: Some(m),
                        evidence: cert.evidence(trs),
                        certificate: Some(cert),
                        loop_witness: None,
                        notes,
                    });
                }
                notes.push(format!("{m}: certificate failed re-check (discarded)"));
            }
            Ok(None) => notes.push(format!("{m}: no certificate within bounds")),
            Err(Exhausted) if cfg.deadline.expired() => {
                notes.push(format!("{m}: timeout"));
                break;
            }
            Err(Exhausted) => notes.push(format!("{m}: search budget exhausted")),
        }
    }
    Ok(TerminationReport::maybe(notes))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::parse::parse_problem;

    fn trs(s: &str) -> Trs {
        parse_problem(s).unwrap().trs().unwrap()
    }

    #[test]
    fn template_syntax() {
        let t = Template::parse("b = 4*x1 + _").unwrap();
        assert_eq!(t.poly["b"][&1], Some(4));
        assert_eq!(t.poly["b"][&0], None);
        let t = Template::parse("b = 4x0+_").unwrap();
        assert_eq!(t.poly["b"][&1], Some(4));
        let t = Template::parse("f = x1 + 2*x2 + 3; f > g > h; w0 = 2").unwrap();
        assert_eq!(t.poly_entries(&Name::from("f"), 2), vec![Some(3), Some(1), Some(2)]);
        assert_eq!(t.precedence.len(), 2);
        assert_eq!(t.w0, Some(2));
        assert!(Template::parse("f = 2*y").is_err());
        assert!(Template::parse("= 3").is_err());
        let r = trs("(VAR x)(RULES f(x) -> x)");
        assert!(Template::parse("g = x1").unwrap().validate(r.signature()).is_err());
        assert!(Template::parse("f = x2").unwrap().validate(r.signature()).is_err());
        assert!(Template::parse("f = 0*x1").unwrap().validate(r.signature()).is_err());
    }

    #[test]
    fn portfolio() {
        let r2 = trs("(VAR x)(RULES b(b(x)) -> w(w(w(w(x))))  w(w(x)) -> w(x)  b(w(x)) -> w(w(w(b(x))))  w(b(x)) -> b(x))");
        let rep = prove_termination(&r2, &TerminationConfig::default()).unwrap();
        assert_eq!(rep.answer, Answer::Yes);
        assert_eq!(rep.method, Some(Method::Poly));
        assert_eq!(rep.evidence.len(), 4);

        let fa = trs("(VAR)(RULES f(a) -> a)");
        assert_eq!(prove_termination(&fa, &TerminationConfig::default()).unwrap().answer, Answer::Yes);

        let lp = trs("(VAR x)(RULES f(x) -> f(x))");
        let rep = prove_termination(&lp, &TerminationConfig::default()).unwrap();
        assert_eq!(rep.answer, Answer::No);
        assert!(rep.to_text().contains("loop"));
    }

    #[test]
    fn single_methods_report_maybe_on_failure() {
        let cyc = trs("(VAR)(RULES a -> b  b -> a)");
        for m in [Method::Poly, Method::Lpo, Method::Kbo, Method::Matrix] {
            let cfg = TerminationConfig {
                method: m,
                ..TerminationConfig::default()
            };
            let rep = prove_termination(&cyc, &cfg).unwrap();
            assert_eq!(rep.answer, Answer::Maybe, "{m}");
            assert_eq!(rep.notes.len(), 1);
        }
    }

    #[test]
    fn zero_budget_gives_up() {
        let r = trs("(VAR x)(RULES f(f(x)) -> f(g(f(x))))");
        let cfg = TerminationConfig {
            method: Method::Matrix,
            candidate_budget: 0,
            ..TerminationConfig::default()
        };
        let rep = prove_termination(&r, &cfg).unwrap();
        assert_eq!(rep.answer, Answer::Maybe);
        assert!(rep.notes[0].contains("budget"));
    }
}
