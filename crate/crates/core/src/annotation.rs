//! Strategy annotations: per-symbol lists of argument positions and rule
//! names that steer where the next redex is looked for.
//!
//! Annotation files contain one line per symbol, e.g. `and : [2, alpha, beta, 1]`;
//! `#` starts a comment. Symbols without a line get the empty list.

use std::collections::BTreeMap;
use std::fmt;

use serde::{Serialize, Serializer};

use crate::rewrite::{is_normal_form, NormalizeResult, Outcome, Redex, StepRecord};
use crate::term::{match_pattern, Name, Position, Term, Trs};

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum AnnotationError {
    #[error("line {line}: {message}")]
    Syntax { line: usize, message: String },
    #[error("symbol {0} is annotated twice")]
    DuplicateSymbol(String),
    #[error("{symbol}: {message}")]
    Invalid { symbol: String, message: String },
    #[error("the annotation is not full: {0}")]
    NotFull(String),
    #[error("the annotation is not in-time: {0}")]
    NotInTime(String),
    #[error("fuel must be at least 1")]
    ZeroFuel,
}

impl AnnotationError {
    pub fn code(&self) -> &'static str {
        match self {
            AnnotationError::Syntax { .. } | AnnotationError::DuplicateSymbol(_) => "annotation-syntax",
            AnnotationError::Invalid { .. } => "annotation-invalid",
            AnnotationError::NotFull(_) => "annotation-not-full",
            AnnotationError::NotInTime(_) => "annotation-not-in-time",
            AnnotationError::ZeroFuel => "invalid-fuel",
        }
    }
}

/// An argument index (1-based) or a rule reference.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Entry {
    Arg(usize),
    Rule(String),
}

impl fmt::Display for Entry {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Entry::Arg(i) => write!(f, "{i}"),
            Entry::Rule(r) => f.write_str(r),
        }
    }
}

impl Serialize for Entry {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize)]
#[serde(transparent)]
pub struct Annotation {
    entries: BTreeMap<Name, Vec<Entry>>,
}

impl Annotation {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn set(&mut self, f: &str, entries: Vec<Entry>) {
        self.entries.insert(Name::from(f), entries);
    }

    /// Entries for `f` (empty if unannotated).
    pub fn get(&self, f: &str) -> &[Entry] {
        self.entries.get(f).map(Vec::as_slice).unwrap_or(&[])
    }

    pub fn symbols(&self) -> impl Iterator<Item = &Name> {
        self.entries.keys()
    }

    /// `[1..n, rules of f]`: arguments first, which yields leftmost-innermost.
    pub fn innermost(trs: &Trs) -> Self {
        Self::canonical(trs, true)
    }

    /// `[rules of f, 1..n]`: rules first, which yields leftmost-outermost.
    pub fn outermost(trs: &Trs) -> Self {
        Self::canonical(trs, false)
    }

    fn canonical(trs: &Trs, args_first: bool) -> Self {
        let mut a = Annotation::new();
        for (f, &n) in trs.signature() {
            let args: Vec<Entry> = (1..=n).map(Entry::Arg).collect();
            let rules: Vec<Entry> = trs.rules_rooted_at(f).iter().map(|&i| Entry::Rule(trs.rule_label(i))).collect();
            let list = if args_first {
                args.into_iter().chain(rules).collect()
            } else {
                rules.into_iter().chain(args).collect()
            };
            a.set(f, list);
        }
        a
    }

    /// Checks the well-formedness invariants against `trs`: rule references
    /// exist and are rooted at the annotated symbol, argument indices are in
    /// range, nothing is listed twice.
    pub fn validate(&self, trs: &Trs) -> Result<(), AnnotationError> {
        for (f, list) in &self.entries {
            let invalid = |message: String| AnnotationError::Invalid {
                symbol: f.to_string(),
                message,
            };
            let Some(&n) = trs.signature().get(f) else {
                return Err(invalid("not a symbol of the system".into()));
            };
            for (k, e) in list.iter().enumerate() {
                if list[..k].contains(e) {
                    return Err(invalid(format!("{e} is listed twice")));
                }
                match e {
                    Entry::Arg(i) if *i == 0 || *i > n => {
                        return Err(invalid(format!("argument {i} is out of range for arity {n}")))
                    }
                    Entry::Arg(_) => {}
                    Entry::Rule(r) => {
                        let Some(idx) = trs.rule_index(r) else {
                            return Err(invalid(format!("unknown rule {r}")));
                        };
                        if trs.rules()[idx].lhs.root() != Some(f) {
                            return Err(invalid(format!("rule {r} is not rooted at {f}")));
                        }
                    }
                }
            }
        }
        Ok(())
    }
}

impl fmt::Display for Annotation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (g, list) in &self.entries {
            let parts: Vec<String> = list.iter().map(Entry::to_string).collect();
            writeln!(f, "{g} : [{}]", parts.join(", "))?;
        }
        Ok(())
    }
}

/// Parses the annotation file format.
pub fn parse_annotation(text: &str) -> Result<Annotation, AnnotationError> {
    let mut a = Annotation::new();
    for (k, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let err = |message: &str| AnnotationError::Syntax {
            line: k + 1,
            message: message.to_string(),
        };
        let (sym, list) = line.rsplit_once(':').ok_or_else(|| err("expected `symbol : [entries]`"))?;
        let sym = sym.trim();
        if sym.is_empty() {
            return Err(err("missing symbol"));
        }
        let list = list.trim();
        let inner = list
            .strip_prefix('[')
            .and_then(|s| s.strip_suffix(']'))
            .ok_or_else(|| err("entries must be enclosed in [ ]"))?;
        let mut entries = Vec::new();
        for item in inner.split(',').map(str::trim) {
            if item.is_empty() {
                if inner.trim().is_empty() {
                    break;
                }
                return Err(err("empty entry"));
            }
            entries.push(match item.parse::<usize>() {
                Ok(i) => Entry::Arg(i),
                Err(_) => Entry::Rule(item.to_string()),
            });
        }
        if a.entries.contains_key(sym) {
            return Err(AnnotationError::DuplicateSymbol(sym.to_string()));
        }
        a.set(sym, entries);
    }
    Ok(a)
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Violation {
    /// An argument index or rule of the symbol is not listed.
    Missing { symbol: String, entry: Entry },
    /// A rule is listed before an argument its left-hand side inspects.
    RuleBeforeNeededArg { symbol: String, rule: String, arg: usize },
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Violation::Missing { symbol, entry } => write!(f, "{symbol}: {entry} is not listed"),
            Violation::RuleBeforeNeededArg { symbol, rule, arg } => {
                write!(f, "{symbol}: rule {rule} is listed before argument {arg}, which it needs")
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct AnnotationReport {
    pub full: bool,
    pub in_time: bool,
    pub violations: Vec<Violation>,
}

/// Fullness: every argument index and every rule of each symbol is listed.
/// In-time: no rule is listed before an argument index at which its
/// left-hand side has a non-variable subterm (an index missing altogether is
/// reported once, as a fullness violation).
pub fn check_annotation(a: &Annotation, trs: &Trs) -> AnnotationReport {
    let mut violations = Vec::new();
    let mut full = true;
    let mut in_time = true;
    for (f, &n) in trs.signature() {
        let list = a.get(f);
        let needed: Vec<Entry> = (1..=n)
            .map(Entry::Arg)
            .chain(trs.rules_rooted_at(f).iter().map(|&i| Entry::Rule(trs.rule_label(i))))
            .collect();
        for e in needed {
            if !list.contains(&e) {
                full = false;
                violations.push(Violation::Missing {
                    symbol: f.to_string(),
                    entry: e,
                });
            }
        }
        for (k, e) in list.iter().enumerate() {
            let Entry::Rule(r) = e else { continue };
            let Some(idx) = trs.rule_index(r) else { continue };
            for (i, arg) in trs.rules()[idx].lhs.args().iter().enumerate() {
                let needed = Entry::Arg(i + 1);
                if !arg.is_var() && list[k + 1..].contains(&needed) {
                    in_time = false;
                    violations.push(Violation::RuleBeforeNeededArg {
                        symbol: f.to_string(),
                        rule: r.clone(),
                        arg: i + 1,
                    });
                }
            }
        }
    }
    AnnotationReport {
        full,
        in_time,
        violations,
    }
}

fn match_rule(t: &Term, trs: &Trs, label: &str, position: &Position) -> Option<Redex> {
    let rule = trs.rule_index(label)?;
    let subst = match_pattern(&trs.rules()[rule].lhs, t)?;
    Some(Redex {
        position: position.clone(),
        rule,
        subst,
    })
}

fn find(t: &Term, trs: &Trs, a: &Annotation, pos: &mut Vec<usize>) -> Option<Redex> {
    let Term::App(f, args) = t else { return None };
    for e in a.get(f) {
        match e {
            Entry::Arg(i) => {
                let Some(arg) = args.get(i.wrapping_sub(1)) else { continue };
                pos.push(*i);
                let found = find(arg, trs, a, pos);
                pos.pop();
                if found.is_some() {
                    return found;
                }
            }
            Entry::Rule(r) => {
                if let Some(rx) = match_rule(t, trs, r, &Position(pos.clone())) {
                    return Some(rx);
                }
            }
        }
    }
    None
}

/// The redex selected by the annotation, scanning from the root; `None`
/// means the term is stuck.
pub fn annotated_redex(t: &Term, trs: &Trs, a: &Annotation) -> Option<Redex> {
    find(t, trs, a, &mut Vec::new())
}

/// One annotation-guided step; `None` means stuck.
pub fn annotated_step(t: &Term, trs: &Trs, a: &Annotation) -> Option<(Term, Redex)> {
    let rx = annotated_redex(t, trs, a)?;
    Some((rx.contract(t, trs), rx))
}

fn finish(term: Term, trs: &Trs, steps: Vec<StepRecord>) -> NormalizeResult {
    let outcome = if is_normal_form(&term, trs) {
        Outcome::NormalForm
    } else {
        Outcome::Stuck
    };
    NormalizeResult { outcome, term, steps }
}

/// Repeats [`annotated_step`] from the root until stuck or out of fuel.
pub fn annotated_normalize(t: &Term, trs: &Trs, a: &Annotation, fuel: usize) -> Result<NormalizeResult, AnnotationError> {
    if fuel == 0 {
        return Err(AnnotationError::ZeroFuel);
    }
    let mut cur = t.clone();
    let mut steps = Vec::new();
    while let Some((u, rx)) = annotated_step(&cur, trs, a) {
        if steps.len() >= fuel {
            return Ok(NormalizeResult {
                outcome: Outcome::FuelExhausted,
                term: cur,
                steps,
            });
        }
        steps.push(StepRecord {
            position: rx.position,
            rule: trs.rule_label(rx.rule),
            result: u.clone(),
        });
        cur = u;
    }
    Ok(finish(cur, trs, steps))
}

/// Like [`annotated_normalize`] but after each contraction the scan resumes
/// at the contracted position, with every enclosing symbol continuing after
/// the argument that led there. Requires a full, in-time annotation.
pub fn normalize_incremental(t: &Term, trs: &Trs, a: &Annotation, fuel: usize) -> Result<NormalizeResult, AnnotationError> {
    if fuel == 0 {
        return Err(AnnotationError::ZeroFuel);
    }
    let report = check_annotation(a, trs);
    let describe = |vs: &[&Violation]| vs.iter().map(|v| v.to_string()).collect::<Vec<_>>().join("; ");
    if !report.full {
        let vs: Vec<&Violation> = report
            .violations
            .iter()
            .filter(|v| matches!(v, Violation::Missing { .. }))
            .collect();
        return Err(AnnotationError::NotFull(describe(&vs)));
    }
    if !report.in_time {
        let vs: Vec<&Violation> = report.violations.iter().collect();
        return Err(AnnotationError::NotInTime(describe(&vs)));
    }
    let mut cur = t.clone();
    let mut steps = Vec::new();
    // (position, index of the next entry to try)
    let mut stack: Vec<(Vec<usize>, usize)> = vec![(Vec::new(), 0)];
    while let Some((pos, next)) = stack.last().cloned() {
        let here = cur.get(&Position(pos.clone())).expect("stack positions stay valid");
        let entries: &[Entry] = match here {
            Term::App(f, _) => a.get(f),
            Term::Var(_) => &[],
        };
        let Some(entry) = entries.get(next) else {
            stack.pop();
            continue;
        };
        stack.last_mut().expect("non-empty").1 += 1;
        match entry {
            Entry::Arg(i) => {
                if *i <= here.args().len() {
                    let mut child = pos.clone();
                    child.push(*i);
                    stack.push((child, 0));
                }
            }
            Entry::Rule(r) => {
                let position = Position(pos.clone());
                let Some(rx) = match_rule(here, trs, r, &position) else { continue };
                if steps.len() >= fuel {
                    return Ok(NormalizeResult {
                        outcome: Outcome::FuelExhausted,
                        term: cur,
                        steps,
                    });
                }
                let u = rx.contract(&cur, trs);
                steps.push(StepRecord {
                    position,
                    rule: trs.rule_label(rx.rule),
                    result: u.clone(),
                });
                cur = u;
                // re-scan the new subterm from its first entry
                stack.last_mut().expect("non-empty").1 = 0;
            }
        }
    }
    Ok(finish(cur, trs, steps))
}
