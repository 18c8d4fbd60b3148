//! Knuth–Bendix completion as an explicit state machine over `(E, R)`.
//!
//! Every inference is a [`Command`]; applying one records the previous state
//! so it can be undone. [`CompletionState::auto_step`] performs one round of a
//! Huet-style strategy using the same commands, and [`auto_complete`] runs it
//! to a fixpoint.

use std::collections::BTreeMap;
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::critical::overlaps_between;
use crate::rewrite::{normalize, redexes, step, StepRecord, Strategy};
use crate::term::{merge_signature, variable_pool, Equation, Name, Rule, Signature, Term, TermError, Trs};
use crate::termination::{kbo_gt, lpo_gt, KboCertificate, LpoCertificate, PolyInterpretation, Precedence};

/// Fuel for normalizing with the current rules; they terminate by construction.
const NORMALIZE_FUEL: usize = 100_000;

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum CompletionError {
    #[error("unknown equation {0}")]
    UnknownEquation(String),
    #[error("unknown rule {0}")]
    UnknownRule(String),
    #[error("cannot orient {equation} as {rule}: {reason}")]
    NotOrientable { equation: String, rule: String, reason: String },
    #[error("cannot orient {equation} as {rule}: {reason}")]
    VariableViolation { equation: String, rule: String, reason: String },
    #[error("{command} is not applicable: {reason}")]
    NotApplicable { command: String, reason: String },
    #[error("nothing to undo")]
    EmptyHistory,
    #[error("completion failed: {0}")]
    Stuck(String),
    #[error("invalid reduction order: {0}")]
    InvalidOrder(String),
    #[error(transparent)]
    Term(#[from] TermError),
}

impl CompletionError {
    /// Stable machine-readable code.
    pub fn code(&self) -> &'static str {
        match self {
            CompletionError::UnknownEquation(_) => "unknown-equation",
            CompletionError::UnknownRule(_) => "unknown-rule",
            CompletionError::NotOrientable { .. } => "not-orientable",
            CompletionError::VariableViolation { .. } => "variable-violation",
            CompletionError::NotApplicable { .. } => "not-applicable",
            CompletionError::EmptyHistory => "empty-history",
            CompletionError::Stuck(_) => "stuck",
            CompletionError::InvalidOrder(_) => "invalid-order",
            CompletionError::Term(_) => "invalid-term",
        }
    }
}

/// The reduction order used to orient equations.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum ReductionOrder {
    Lpo(LpoCertificate),
    Kbo(KboCertificate),
    Poly(PolyInterpretation),
}

/// Loosely typed order parameters as supplied by a user.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct OrderParams {
    /// Either `"f > g > h"` or a list, greatest first.
    pub precedence: Option<PrecedenceSpec>,
    pub weights: Option<BTreeMap<Name, u64>>,
    pub w0: Option<u64>,
    /// `f ↦ [c0, c1, …, cn]` for polynomial orders.
    pub interpretation: Option<BTreeMap<Name, Vec<u64>>>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum PrecedenceSpec {
    Text(String),
    List(Vec<Name>),
}

impl PrecedenceSpec {
    fn symbols(&self) -> Vec<Name> {
        match self {
            PrecedenceSpec::Text(s) => s
                .split('>')
                .map(str::trim)
                .filter(|s| !s.is_empty())
                .map(Name::from)
                .collect(),
            PrecedenceSpec::List(v) => v.clone(),
        }
    }
}

impl ReductionOrder {
    /// Builds an order of the given kind (`lpo`, `kbo`, `poly`) for `sig`.
    ///
    /// Symbols missing from a given precedence are appended in order of first
    /// occurrence; missing weights default to 1; missing polynomial entries to
    /// `1 + x1 + … + xn`.
    pub fn build(kind: &str, params: &OrderParams, sig: &[(Name, usize)]) -> Result<ReductionOrder, CompletionError> {
        let bad = |m: String| CompletionError::InvalidOrder(m);
        let mut prec: Vec<Name> = params.precedence.as_ref().map(|p| p.symbols()).unwrap_or_default();
        for (i, f) in prec.iter().enumerate() {
            if prec[..i].contains(f) {
                return Err(bad(format!("symbol {f} occurs twice in the precedence")));
            }
            if !sig.iter().any(|(g, _)| g == f) {
                return Err(bad(format!("unknown symbol {f} in the precedence")));
            }
        }
        for (f, _) in sig {
            if !prec.contains(f) {
                prec.push(f.clone());
            }
        }
        let precedence = Precedence::new(&prec);
        match kind.to_ascii_lowercase().as_str() {
            "lpo" => Ok(ReductionOrder::Lpo(LpoCertificate { precedence })),
            "kbo" => {
                let w0 = params.w0.unwrap_or(1);
                let given = params.weights.clone().unwrap_or_default();
                let weights: BTreeMap<Name, u64> = sig
                    .iter()
                    .map(|(f, _)| (f.clone(), given.get(f).copied().unwrap_or(1)))
                    .collect();
                let cert = KboCertificate { weights, w0, precedence };
                let arities: Signature = sig.iter().cloned().collect();
                if !cert.is_admissible(&arities) {
                    return Err(bad("weights are not admissible for KBO".into()));
                }
                Ok(ReductionOrder::Kbo(cert))
            }
            "poly" => {
                let given = params.interpretation.clone().unwrap_or_default();
                let mut symbols = BTreeMap::new();
                for (f, n) in sig {
                    let cs = given.get(f).cloned().unwrap_or_else(|| vec![1; n + 1]);
                    if cs.len() != n + 1 {
                        return Err(bad(format!("{f} needs {} coefficients", n + 1)));
                    }
                    symbols.insert(f.clone(), cs);
                }
                let i = PolyInterpretation { symbols };
                if !i.is_monotone() {
                    return Err(bad("every argument coefficient must be at least 1".into()));
                }
                Ok(ReductionOrder::Poly(i))
            }
            other => Err(bad(format!("unknown order kind {other:?}"))),
        }
    }

    /// `s > t` in the order.
    pub fn gt(&self, s: &Term, t: &Term) -> bool {
        match self {
            ReductionOrder::Lpo(c) => lpo_gt(&c.precedence, s, t),
            ReductionOrder::Kbo(c) => kbo_gt(c, s, t),
            ReductionOrder::Poly(i) => match (i.interpret(s), i.interpret(t)) {
                (Ok(a), Ok(b)) => a.strictly_dominates(&b),
                _ => false,
            },
        }
    }

    pub fn kind(&self) -> &'static str {
        match self {
            ReductionOrder::Lpo(_) => "lpo",
            ReductionOrder::Kbo(_) => "kbo",
            ReductionOrder::Poly(_) => "poly",
        }
    }
}

impl fmt::Display for ReductionOrder {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ReductionOrder::Lpo(c) => write!(f, "LPO with {}", c.precedence),
            ReductionOrder::Kbo(c) => {
                let ws: Vec<String> = c.weights.iter().map(|(g, w)| format!("w({g})={w}")).collect();
                write!(f, "KBO with {}, {}, w0={}", c.precedence, ws.join(" "), c.w0)
            }
            ReductionOrder::Poly(i) => write!(f, "polynomial order {}", i.describe().join("; ")),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Direction {
    #[serde(alias = "LR", alias = "left-to-right")]
    Lr,
    #[serde(alias = "RL", alias = "right-to-left")]
    Rl,
}

/// A completion inference addressed by equation/rule ids.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", content = "args", rename_all = "snake_case")]
pub enum Command {
    Orient {
        #[serde(alias = "id")]
        equation: String,
        direction: Direction,
    },
    Delete {
        #[serde(alias = "id")]
        equation: String,
    },
    Deduce { rule1: String, rule2: String },
    Simplify {
        #[serde(alias = "id")]
        equation: String,
        #[serde(default)]
        full: bool,
    },
    Compose {
        #[serde(alias = "id")]
        rule: String,
    },
    Collapse {
        #[serde(alias = "id")]
        rule: String,
    },
    AutoStep,
    Undo,
}

impl fmt::Display for Command {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Command::Orient { equation, direction } => {
                let d = if *direction == Direction::Lr { "LR" } else { "RL" };
                write!(f, "orient {equation} {d}")
            }
            Command::Delete { equation } => write!(f, "delete {equation}"),
            Command::Deduce { rule1, rule2 } => write!(f, "deduce {rule1} {rule2}"),
            Command::Simplify { equation, full } => {
                write!(f, "simplify {equation}{}", if *full { " (full)" } else { "" })
            }
            Command::Compose { rule } => write!(f, "compose {rule}"),
            Command::Collapse { rule } => write!(f, "collapse {rule}"),
            Command::AutoStep => f.write_str("auto-step"),
            Command::Undo => f.write_str("undo"),
        }
    }
}

impl std::str::FromStr for Command {
    type Err = String;

    /// The textual forms printed by `Display`: `orient e1 lr`, `delete e1`,
    /// `deduce r1 r2`, `simplify e1 [full]`, `compose r1`, `collapse r1`,
    /// `auto-step` (or `auto`), `undo`.
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let words: Vec<&str> = s.split_whitespace().collect();
        let arg = |i: usize| {
            words
                .get(i)
                .map(|w| w.to_string())
                .ok_or_else(|| format!("'{}' needs more arguments", words[0]))
        };
        let Some(&head) = words.first() else {
            return Err("empty command".into());
        };
        let (cmd, arity) = match head {
            "orient" => {
                let direction = match arg(2)?.to_ascii_lowercase().as_str() {
                    "lr" => Direction::Lr,
                    "rl" => Direction::Rl,
                    d => return Err(format!("unknown direction '{d}' (expected lr or rl)")),
                };
                (Command::Orient { equation: arg(1)?, direction }, 3)
            }
            "delete" => (Command::Delete { equation: arg(1)? }, 2),
            "deduce" => (Command::Deduce { rule1: arg(1)?, rule2: arg(2)? }, 3),
            "simplify" => {
                let full = match words.get(2) {
                    None => false,
                    Some(&"full") | Some(&"(full)") => true,
                    Some(w) => return Err(format!("unexpected '{w}' after simplify")),
                };
                (Command::Simplify { equation: arg(1)?, full }, if full { 3 } else { 2 })
            }
            "compose" => (Command::Compose { rule: arg(1)? }, 2),
            "collapse" => (Command::Collapse { rule: arg(1)? }, 2),
            "auto" | "auto-step" | "auto_step" => (Command::AutoStep, 1),
            "undo" => (Command::Undo, 1),
            other => return Err(format!("unknown command '{other}'")),
        };
        if words.len() > arity {
            return Err(format!("too many arguments for '{head}'"));
        }
        Ok(cmd)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct EquationEntry {
    pub id: String,
    pub equation: Equation,
}

/// The part of a session that commands change.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Snapshot {
    pub equations: Vec<EquationEntry>,
    /// Every rule carries its id.
    pub rules: Vec<Rule>,
    next_id: usize,
    pub failure: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct HistoryEntry {
    pub command: Command,
    pub before: Snapshot,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Status {
    /// Work remains.
    Running,
    /// `E` is empty and all critical pairs of `R` are joinable.
    Success,
    /// The automatic strategy met an equation it cannot orient.
    Stuck,
}

/// A completion session: the order, current `(E, R)` and undo history.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CompletionState {
    pub order: ReductionOrder,
    pub current: Snapshot,
    pub history: Vec<HistoryEntry>,
    signature: Signature,
}

/// A rendered id-tagged equation or rule.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct ItemView {
    pub id: String,
    pub lhs: String,
    pub rhs: String,
}

/// What clients see of a session: terms as strings.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct StateView {
    pub equations: Vec<ItemView>,
    pub rules: Vec<ItemView>,
    pub status: Status,
    pub history_length: usize,
    pub history: Vec<String>,
    pub order: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub failure: Option<String>,
}

fn not_applicable(cmd: &Command, reason: impl Into<String>) -> CompletionError {
    CompletionError::NotApplicable {
        command: cmd.to_string(),
        reason: reason.into(),
    }
}

fn id_number(id: &str) -> usize {
    id.trim_start_matches(|c: char| !c.is_ascii_digit()).parse().unwrap_or(usize::MAX)
}

impl CompletionState {
    /// Starts a session on `equations` with ids `e1, e2, …`.
    pub fn new(equations: Vec<Equation>, order: ReductionOrder) -> Result<Self, CompletionError> {
        let mut signature = Signature::new();
        for e in &equations {
            merge_signature(&mut signature, &e.lhs)?;
            merge_signature(&mut signature, &e.rhs)?;
        }
        let n = equations.len();
        let equations = equations
            .into_iter()
            .enumerate()
            .map(|(i, equation)| EquationEntry {
                id: format!("e{}", i + 1),
                equation,
            })
            .collect();
        Ok(CompletionState {
            order,
            current: Snapshot {
                equations,
                rules: Vec::new(),
                next_id: n + 1,
                failure: None,
            },
            history: Vec::new(),
            signature,
        })
    }

    pub fn equations(&self) -> &[EquationEntry] {
        &self.current.equations
    }

    pub fn rules(&self) -> &[Rule] {
        &self.current.rules
    }

    pub fn signature(&self) -> &Signature {
        &self.signature
    }

    /// The current rules as a rewrite system (labels are the rule ids).
    pub fn trs(&self) -> Trs {
        Trs::with_signature(self.current.rules.clone(), self.signature.clone())
            .expect("rules stay within the session signature")
    }

    pub fn status(&self) -> Status {
        if self.current.failure.is_some() {
            Status::Stuck
        } else if self.current.equations.is_empty() && self.critical_pairs_joinable() {
            Status::Success
        } else {
            Status::Running
        }
    }

    fn critical_pairs_joinable(&self) -> bool {
        let trs = self.trs();
        let pool = self.pool();
        let pool: Vec<&str> = pool.iter().map(String::as_str).collect();
        let rules = &self.current.rules;
        for (i, a) in rules.iter().enumerate() {
            for (j, b) in rules.iter().enumerate() {
                let ida = a.id.as_deref().unwrap_or("");
                let idb = b.id.as_deref().unwrap_or("");
                for cp in overlaps_between((i, ida, a), (j, idb, b), &pool) {
                    let l = normalize(&cp.left, &trs, Strategy::LeftmostInnermost, NORMALIZE_FUEL);
                    let r = normalize(&cp.right, &trs, Strategy::LeftmostInnermost, NORMALIZE_FUEL);
                    if !l.is_normal_form() || !r.is_normal_form() || l.term != r.term {
                        return false;
                    }
                }
            }
        }
        true
    }

    pub fn view(&self) -> StateView {
        let item = |id: &str, l: &Term, r: &Term| ItemView {
            id: id.to_string(),
            lhs: l.to_string(),
            rhs: r.to_string(),
        };
        StateView {
            equations: self
                .current
                .equations
                .iter()
                .map(|e| item(&e.id, &e.equation.lhs, &e.equation.rhs))
                .collect(),
            rules: self
                .current
                .rules
                .iter()
                .map(|r| item(r.id.as_deref().unwrap_or(""), &r.lhs, &r.rhs))
                .collect(),
            status: self.status(),
            history_length: self.history.len(),
            history: self.history.iter().map(|h| h.command.to_string()).collect(),
            order: self.order.to_string(),
            failure: self.current.failure.clone(),
        }
    }

    fn pool(&self) -> Vec<String> {
        variable_pool(&self.signature)
    }

    fn fresh_id(&mut self, prefix: &str) -> String {
        let id = format!("{prefix}{}", self.current.next_id);
        self.current.next_id += 1;
        id
    }

    fn equation_index(&self, id: &str) -> Result<usize, CompletionError> {
        self.current
            .equations
            .iter()
            .position(|e| e.id == id)
            .ok_or_else(|| CompletionError::UnknownEquation(id.to_string()))
    }

    fn rule_index(&self, id: &str) -> Result<usize, CompletionError> {
        self.current
            .rules
            .iter()
            .position(|r| r.id.as_deref() == Some(id))
            .ok_or_else(|| CompletionError::UnknownRule(id.to_string()))
    }

    fn rule(&self, id: &str) -> Result<&Rule, CompletionError> {
        Ok(&self.current.rules[self.rule_index(id)?])
    }

    /// Applies `cmd`; on success the previous state is pushed to the history
    /// (except for `Undo`, which pops it). On error the state is unchanged.
    pub fn apply(&mut self, cmd: &Command) -> Result<String, CompletionError> {
        if *cmd == Command::Undo {
            let last = self.history.pop().ok_or(CompletionError::EmptyHistory)?;
            self.current = last.before;
            return Ok(format!("undid {}", last.command));
        }
        let before = self.current.clone();
        let result = match cmd {
            Command::AutoStep => self.auto_step_inner(&mut |_, _| {}),
            _ => self.apply_basic(cmd),
        };
        match result {
            Ok(msg) => {
                // a manual inference lets the user continue past a failure
                self.current.failure = None;
                self.history.push(HistoryEntry {
                    command: cmd.clone(),
                    before,
                });
                Ok(msg)
            }
            Err(CompletionError::Stuck(reason)) => {
                // the failure itself is recorded so it can be undone
                self.current = before.clone();
                self.current.failure = Some(reason.clone());
                self.history.push(HistoryEntry {
                    command: cmd.clone(),
                    before,
                });
                Err(CompletionError::Stuck(reason))
            }
            Err(e) => {
                self.current = before;
                Err(e)
            }
        }
    }

    fn apply_basic(&mut self, cmd: &Command) -> Result<String, CompletionError> {
        match cmd {
            Command::Orient { equation, direction } => self.orient(equation, *direction),
            Command::Delete { equation } => {
                let i = self.equation_index(equation)?;
                let e = &self.current.equations[i].equation;
                if e.lhs != e.rhs {
                    return Err(not_applicable(cmd, format!("{} and {} differ", e.lhs, e.rhs)));
                }
                self.current.equations.remove(i);
                Ok(format!("deleted {equation}"))
            }
            Command::Deduce { rule1, rule2 } => {
                let added = self.deduce(rule1, rule2)?;
                Ok(if added.is_empty() {
                    "no new critical pairs".to_string()
                } else {
                    format!("added {}", added.join(", "))
                })
            }
            Command::Simplify { equation, full } => {
                let i = self.equation_index(equation)?;
                let trs = self.trs();
                let e = self.current.equations[i].equation.clone();
                let rewrite = |t: &Term| -> Option<Term> {
                    if *full {
                        let r = normalize(t, &trs, Strategy::LeftmostInnermost, NORMALIZE_FUEL);
                        (!r.steps.is_empty()).then_some(r.term)
                    } else {
                        step(t, &trs, Strategy::LeftmostOutermost).map(|(u, _)| u)
                    }
                };
                let (l, r) = (rewrite(&e.lhs), rewrite(&e.rhs));
                if l.is_none() && r.is_none() {
                    return Err(not_applicable(cmd, "both sides are in normal form"));
                }
                let new = Equation::new(l.unwrap_or(e.lhs), r.unwrap_or(e.rhs));
                let msg = format!("{equation} is now {} = {}", new.lhs, new.rhs);
                self.current.equations[i].equation = new;
                Ok(msg)
            }
            Command::Compose { rule } => {
                let i = self.rule_index(rule)?;
                let trs = self.trs();
                let r = normalize(&self.current.rules[i].rhs, &trs, Strategy::LeftmostInnermost, NORMALIZE_FUEL);
                if r.steps.is_empty() {
                    return Err(not_applicable(cmd, "the right-hand side is in normal form"));
                }
                self.current.rules[i].rhs = r.term;
                Ok(format!("{rule} is now {}", self.current.rules[i]))
            }
            Command::Collapse { rule } => {
                let i = self.rule_index(rule)?;
                let Some(lhs) = self.collapse_target(i) else {
                    return Err(not_applicable(
                        cmd,
                        "the left-hand side is not reducible by another rule with a strictly encompassed left-hand side",
                    ));
                };
                let removed = self.current.rules.remove(i);
                let id = self.fresh_id("e");
                let msg = format!("{rule} became equation {id}");
                self.current.equations.push(EquationEntry {
                    id,
                    equation: Equation::new(lhs, removed.rhs),
                });
                Ok(msg)
            }
            Command::AutoStep | Command::Undo => unreachable!("handled by apply"),
        }
    }

    fn orient(&mut self, id: &str, direction: Direction) -> Result<String, CompletionError> {
        let i = self.equation_index(id)?;
        let e = &self.current.equations[i].equation;
        let (l, r) = match direction {
            Direction::Lr => (e.lhs.clone(), e.rhs.clone()),
            Direction::Rl => (e.rhs.clone(), e.lhs.clone()),
        };
        let shown = format!("{l} -> {r}");
        if l.is_var() {
            return Err(CompletionError::VariableViolation {
                equation: id.to_string(),
                rule: shown,
                reason: "the left-hand side is a variable".into(),
            });
        }
        let lv = l.var_set();
        if let Some(x) = r.vars().into_iter().find(|x| !lv.contains(x)) {
            return Err(CompletionError::VariableViolation {
                equation: id.to_string(),
                rule: shown,
                reason: format!("variable {x} does not occur on the left"),
            });
        }
        if !self.order.gt(&l, &r) {
            return Err(CompletionError::NotOrientable {
                equation: id.to_string(),
                rule: shown,
                reason: format!("{l} is not greater than {r} in the {}", self.order.kind().to_uppercase()),
            });
        }
        self.current.equations.remove(i);
        let rid = self.fresh_id("r");
        let rule = Rule::named(&rid, l, r)?;
        let msg = format!("added {rid}: {rule}");
        self.current.rules.push(rule);
        Ok(msg)
    }

    /// Left-hand side of rule `i` rewritten once by another rule whose
    /// left-hand side it strictly encompasses.
    fn collapse_target(&self, i: usize) -> Option<Term> {
        let trs = self.trs();
        let lhs = &self.current.rules[i].lhs;
        redexes(lhs, &trs)
            .into_iter()
            .find(|rx| rx.rule != i && (!rx.position.is_root() || !rx.subst.is_renaming()))
            .map(|rx| rx.contract(lhs, &trs))
    }

    /// Adds the critical pairs between two rules (both ways) as equations,
    /// skipping variants of existing equations and rules.
    fn deduce(&mut self, a: &str, b: &str) -> Result<Vec<String>, CompletionError> {
        let ia = self.rule_index(a)?;
        let ib = self.rule_index(b)?;
        let ra = self.rule(a)?.clone();
        let rb = self.rule(b)?.clone();
        let pool = self.pool();
        let pool: Vec<&str> = pool.iter().map(String::as_str).collect();
        let mut cps = overlaps_between((ia, a, &ra), (ib, b, &rb), &pool);
        if ia != ib {
            cps.extend(overlaps_between((ib, b, &rb), (ia, a, &ra), &pool));
        }
        let mut added = Vec::new();
        for cp in cps {
            let eq = Equation::new(cp.left, cp.right);
            let known = self.current.equations.iter().any(|e| e.equation.is_variant_of(&eq))
                || self
                    .current
                    .rules
                    .iter()
                    .any(|r| Equation::new(r.lhs.clone(), r.rhs.clone()).is_variant_of(&eq));
            if known {
                continue;
            }
            let id = self.fresh_id("e");
            added.push(id.clone());
            self.current.equations.push(EquationEntry { id, equation: eq });
        }
        Ok(added)
    }

    /// Runs `cmd` as part of an automatic round, reporting it to `trace`.
    fn sub(
        &mut self,
        cmd: Command,
        trace: &mut dyn FnMut(&Command, &Snapshot),
    ) -> Result<String, CompletionError> {
        let before = self.current.clone();
        let msg = self.apply_basic(&cmd)?;
        trace(&cmd, &before);
        Ok(msg)
    }

    /// One round of the automatic strategy, recorded as a single history entry.
    pub fn auto_step(&mut self) -> Result<String, CompletionError> {
        self.apply(&Command::AutoStep)
    }

    /// Picks the smallest equation, simplifies it fully, then deletes or
    /// orients it; a new rule is used to compose or collapse the others and
    /// its critical pairs with all rules are added.
    fn auto_step_inner(&mut self, trace: &mut dyn FnMut(&Command, &Snapshot)) -> Result<String, CompletionError> {
        if let Some(reason) = &self.current.failure {
            return Err(not_applicable(&Command::AutoStep, format!("completion is stuck: {reason}")));
        }
        let Some(pick) = self
            .current
            .equations
            .iter()
            .min_by_key(|e| (e.equation.lhs.size() + e.equation.rhs.size(), id_number(&e.id)))
            .map(|e| e.id.clone())
        else {
            if self.critical_pairs_joinable() {
                return Err(not_applicable(&Command::AutoStep, "completion has already succeeded"));
            }
            let ids: Vec<String> = self.current.rules.iter().filter_map(|r| r.id.clone()).collect();
            let mut any = false;
            for (k, a) in ids.iter().enumerate() {
                for b in &ids[k..] {
                    let before = self.current.equations.len();
                    self.sub(Command::Deduce { rule1: a.clone(), rule2: b.clone() }, trace)?;
                    any |= self.current.equations.len() > before;
                }
            }
            if !any {
                return Err(CompletionError::Stuck("no new critical pairs can be deduced".into()));
            }
            return Ok("deduced critical pairs".into());
        };
        let _ = self.sub(Command::Simplify { equation: pick.clone(), full: true }, trace);
        let e = self.current.equations[self.equation_index(&pick)?].equation.clone();
        if e.lhs == e.rhs {
            self.sub(Command::Delete { equation: pick.clone() }, trace)?;
            return Ok(format!("deleted {pick}"));
        }
        let direction = if self.order.gt(&e.lhs, &e.rhs) {
            Direction::Lr
        } else if self.order.gt(&e.rhs, &e.lhs) {
            Direction::Rl
        } else {
            return Err(CompletionError::Stuck(format!("cannot orient {} = {}", e.lhs, e.rhs)));
        };
        let msg = self.sub(Command::Orient { equation: pick, direction }, trace)?;
        let new = self.current.rules.last().and_then(|r| r.id.clone()).expect("orient adds a rule");
        let others: Vec<String> = self
            .current
            .rules
            .iter()
            .filter_map(|r| r.id.clone())
            .filter(|id| *id != new)
            .collect();
        for id in &others {
            let i = self.rule_index(id)?;
            if self.collapse_target(i).is_some() {
                self.sub(Command::Collapse { rule: id.to_string() }, trace)?;
            } else {
                let _ = self.sub(Command::Compose { rule: id.to_string() }, trace);
            }
        }
        let partners: Vec<String> = self.current.rules.iter().filter_map(|r| r.id.clone()).collect();
        for id in partners {
            self.sub(Command::Deduce { rule1: new.clone(), rule2: id }, trace)?;
        }
        Ok(msg)
    }
}

/// A single inference performed by [`auto_complete`] and the state before it.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TraceStep {
    pub command: Command,
    pub before: Snapshot,
    pub after: Snapshot,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum CompletionOutcome {
    /// A convergent system equivalent to the input equations.
    Completed(Trs),
    Failed(String),
    FuelExhausted,
}

#[derive(Debug, Clone)]
pub struct CompletionRun {
    pub outcome: CompletionOutcome,
    pub state: CompletionState,
    /// Number of automatic rounds performed.
    pub rounds: usize,
    pub trace: Vec<TraceStep>,
}

/// Runs at most `fuel` automatic rounds on `equations`.
pub fn auto_complete(
    equations: Vec<Equation>,
    order: ReductionOrder,
    fuel: usize,
) -> Result<CompletionRun, CompletionError> {
    let mut state = CompletionState::new(equations, order)?;
    let mut trace = Vec::new();
    let mut rounds = 0;
    let outcome = loop {
        if state.current.equations.is_empty() && state.critical_pairs_joinable() {
            break CompletionOutcome::Completed(state.trs());
        }
        if rounds >= fuel {
            break CompletionOutcome::FuelExhausted;
        }
        rounds += 1;
        let mut steps: Vec<(Command, Snapshot)> = Vec::new();
        let result = state.auto_step_inner(&mut |cmd, before| steps.push((cmd.clone(), before.clone())));
        // each step's successor state is the next step's predecessor
        let afters: Vec<Snapshot> = steps
            .iter()
            .skip(1)
            .map(|(_, b)| b.clone())
            .chain(std::iter::once(state.current.clone()))
            .collect();
        for ((command, before), after) in steps.into_iter().zip(afters) {
            trace.push(TraceStep { command, before, after });
        }
        match result {
            Ok(_) => {}
            Err(CompletionError::Stuck(reason)) => {
                state.current.failure = Some(reason.clone());
                break CompletionOutcome::Failed(reason);
            }
            Err(e) => return Err(e),
        }
    };
    Ok(CompletionRun {
        outcome,
        state,
        rounds,
        trace,
    })
}

/// Result of deciding `s ≈ t` with a convergent system.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct Validity {
    pub valid: bool,
    #[serde(serialize_with = "crate::report::term_as_string")]
    pub left_normal_form: Term,
    #[serde(serialize_with = "crate::report::term_as_string")]
    pub right_normal_form: Term,
    pub left_steps: Vec<StepRecord>,
    pub right_steps: Vec<StepRecord>,
    /// False if normalization ran out of fuel (the verdict is then unreliable).
    pub complete: bool,
}

/// Decides `s ≈ t` by comparing normal forms in a convergent `trs`.
pub fn decide_validity(trs: &Trs, s: &Term, t: &Term, fuel: usize) -> Validity {
    let l = normalize(s, trs, Strategy::LeftmostInnermost, fuel);
    let r = normalize(t, trs, Strategy::LeftmostInnermost, fuel);
    Validity {
        valid: l.term == r.term,
        complete: l.is_normal_form() && r.is_normal_form(),
        left_normal_form: l.term,
        right_normal_form: r.term,
        left_steps: l.steps,
        right_steps: r.steps,
    }
}

/// Symbols of `equations` in order of first occurrence, with arities.
pub fn symbols_in_order(equations: &[Equation]) -> Vec<(Name, usize)> {
    fn walk(t: &Term, out: &mut Vec<(Name, usize)>) {
        if let Term::App(f, args) = t {
            if !out.iter().any(|(g, _)| g == f) {
                out.push((f.clone(), args.len()));
            }
            for a in args.iter() {
                walk(a, out);
            }
        }
    }
    let mut out = Vec::new();
    for e in equations {
        walk(&e.lhs, &mut out);
        walk(&e.rhs, &mut out);
    }
    out
}
