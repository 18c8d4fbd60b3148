//! Confluence analysis: orthogonality, Newman's lemma over critical pairs,
//! and non-confluence witnesses with two distinct normal forms.

use serde::Serialize;

use crate::critical::{critical_pairs, is_orthogonal, joinable, CriticalPair, Joinability, DEFAULT_JOIN_DEPTH};
use crate::rewrite::{is_normal_form, normalize, Exploration, RewriteError, StepRecord, Strategy};
use crate::term::{Name, Substitution, Term, Trs};
use crate::termination::{prove_termination, Answer, TerminationConfig, TerminationReport};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Verdict {
    #[serde(rename = "YES")]
    Yes,
    #[serde(rename = "NO")]
    No,
    #[serde(rename = "MAYBE")]
    Maybe,
}

impl std::fmt::Display for Verdict {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Verdict::Yes => "YES",
            Verdict::No => "NO",
            Verdict::Maybe => "MAYBE",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Reason {
    Orthogonal,
    NewmanCriticalPairs,
    DistinctNormalForms,
    Inconclusive,
}

/// How (and whether) one critical pair was joined.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct CpJoin {
    #[serde(flatten)]
    pub pair: CriticalPair,
    pub joined: bool,
    #[serde(rename = "joinTrace")]
    pub join: Joinability,
}

/// `left ←* top →* right` with `left ≠ right` both in normal form.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct Witness {
    #[serde(serialize_with = "crate::report::term_as_string")]
    pub top: Term,
    #[serde(serialize_with = "crate::report::term_as_string")]
    pub left: Term,
    #[serde(serialize_with = "crate::report::term_as_string")]
    pub right: Term,
    pub left_trace: Vec<StepRecord>,
    pub right_trace: Vec<StepRecord>,
}

impl Witness {
    /// Replays both derivations and checks the normal-form conditions.
    pub fn check(&self, trs: &Trs) -> bool {
        let replay = |trace: &[StepRecord], end: &Term| {
            let mut cur = self.top.clone();
            for st in trace {
                let Some(i) = trs.rule_index(&st.rule) else { return false };
                let rule = &trs.rules()[i];
                let Some(sigma) = cur.get(&st.position).and_then(|s| crate::term::match_pattern(&rule.lhs, s)) else {
                    return false;
                };
                match cur.replace_at(&st.position, sigma.apply(&rule.rhs)) {
                    Ok(next) if next == st.result => cur = next,
                    _ => return false,
                }
            }
            &cur == end
        };
        self.left != self.right
            && is_normal_form(&self.left, trs)
            && is_normal_form(&self.right, trs)
            && replay(&self.left_trace, &self.left)
            && replay(&self.right_trace, &self.right)
    }
}

#[derive(Debug, Clone)]
pub struct ConfluenceConfig {
    pub join_depth: usize,
    pub witness_depth: usize,
    pub node_cap: usize,
    /// Fuel for full normalization of critical pair sides in terminating systems.
    pub normalize_fuel: usize,
    pub termination: TerminationConfig,
}

impl Default for ConfluenceConfig {
    fn default() -> Self {
        ConfluenceConfig {
            join_depth: DEFAULT_JOIN_DEPTH,
            witness_depth: 8,
            node_cap: 50_000,
            normalize_fuel: 100_000,
            termination: TerminationConfig::default(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct ConfluenceReport {
    pub verdict: Verdict,
    pub reason: Reason,
    #[serde(rename = "criticalPairs")]
    pub critical_pairs: Vec<CpJoin>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub witness: Option<Witness>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub termination: Option<TerminationReport>,
    pub notes: Vec<String>,
}

impl ConfluenceReport {
    pub fn to_text(&self) -> String {
        use std::fmt::Write as _;
        let mut out = String::new();
        let _ = writeln!(out, "{}", self.verdict);
        let _ = writeln!(
            out,
            "reason: {}",
            match self.reason {
                Reason::Orthogonal => "orthogonal (left-linear, no critical pairs)",
                Reason::NewmanCriticalPairs => "terminating and all critical pairs are joinable (Newman)",
                Reason::DistinctNormalForms => "a term has two distinct normal forms",
                Reason::Inconclusive => "inconclusive",
            }
        );
        if let Some(t) = &self.termination {
            if let Some(m) = t.method {
                let _ = writeln!(out, "termination: {} via {m}", t.answer);
            }
        }
        for cp in &self.critical_pairs {
            let status = match &cp.join {
                Joinability::Joined { witness, .. } => format!("joins at {witness}"),
                Joinability::Unknown => "not joined".to_string(),
            };
            let _ = writeln!(
                out,
                "  {} <- {} -> {}   [{} at {} in {}]  {status}",
                cp.pair.left,
                cp.pair.peak,
                cp.pair.right,
                cp.pair.overlap.inner_id,
                cp.pair.overlap.position,
                cp.pair.overlap.outer_id
            );
        }
        if let Some(w) = &self.witness {
            let _ = writeln!(out, "witness: {} ->* {} and {} ->* {}", w.top, w.left, w.top, w.right);
        }
        for n in &self.notes {
            let _ = writeln!(out, "note: {n}");
        }
        out
    }
}

/// Checks every critical pair of a terminating system: bounded joinability
/// first, then full normalization of both sides. Returns the per-pair
/// results and, if some pair has distinct normal forms, a witness.
pub fn newman_confluence(
    trs: &Trs,
    cps: &[CriticalPair],
    cfg: &ConfluenceConfig,
) -> Result<(Vec<CpJoin>, Option<Witness>), RewriteError> {
    let mut out = Vec::new();
    let mut witness = None;
    for cp in cps {
        let mut join = joinable(&cp.left, &cp.right, trs, cfg.join_depth, cfg.node_cap)?;
        if !join.is_joined() {
            let l = normalize(&cp.left, trs, Strategy::LeftmostInnermost, cfg.normalize_fuel);
            let r = normalize(&cp.right, trs, Strategy::LeftmostInnermost, cfg.normalize_fuel);
            if l.is_normal_form() && r.is_normal_form() {
                if l.term == r.term {
                    join = Joinability::Joined {
                        witness: l.term.clone(),
                        left_steps: l.steps,
                        right_steps: r.steps,
                    };
                } else if witness.is_none() {
                    witness = Some(peak_witness(cp, trs, l.term, l.steps, r.term, r.steps));
                }
            }
        }
        out.push(CpJoin {
            pair: cp.clone(),
            joined: join.is_joined(),
            join,
        });
    }
    Ok((out, witness))
}

fn peak_witness(
    cp: &CriticalPair,
    trs: &Trs,
    left: Term,
    left_rest: Vec<StepRecord>,
    right: Term,
    right_rest: Vec<StepRecord>,
) -> Witness {
    let first = |t: &Term| -> Vec<StepRecord> {
        crate::rewrite::successors(&cp.peak, trs)
            .into_iter()
            .find(|(_, u)| u == t)
            .map(|(rx, u)| StepRecord {
                position: rx.position,
                rule: trs.rule_label(rx.rule),
                result: u,
            })
            .into_iter()
            .collect()
    };
    let mut lt = first(&cp.left);
    lt.extend(left_rest);
    let mut rt = first(&cp.right);
    rt.extend(right_rest);
    Witness {
        top: cp.peak.clone(),
        left,
        right,
        left_trace: lt,
        right_trace: rt,
    }
}

/// A constant name that does not occur in the signature.
fn fresh_constant(trs: &Trs) -> Name {
    let sig = trs.signature();
    std::iter::once("e".to_string())
        .chain((1..).map(|i| format!("e{i}")))
        .find(|n| sig.get(n.as_str()).is_none_or(|&a| a == 0))
        .map(Name::from)
        .expect("infinitely many candidates")
}

fn ground_with(t: &Term, c: &Name) -> Term {
    let ground = Term::constant(c);
    Substitution::from_pairs(t.vars().into_iter().map(|x| (x, ground.clone()))).apply(t)
}

/// Searches critical peaks and grounded left-hand sides for a term with two
/// distinct normal forms among its reducts of at most `depth` steps.
pub fn non_confluence_witness(trs: &Trs, depth: usize, cap: usize) -> Result<Option<Witness>, RewriteError> {
    let cps = critical_pairs(trs);
    let e = fresh_constant(trs);
    let degenerate = |cp: &CriticalPair| cp.left == cp.peak || cp.right == cp.peak;
    let mut seeds: Vec<Term> = Vec::new();
    seeds.extend(cps.iter().filter(|c| c.peak.is_ground() && !degenerate(c)).map(|c| c.peak.clone()));
    seeds.extend(cps.iter().filter(|c| c.peak.is_ground() && degenerate(c)).map(|c| c.peak.clone()));
    seeds.extend(cps.iter().filter(|c| !c.peak.is_ground()).map(|c| ground_with(&c.peak, &e)));
    seeds.extend(trs.rules().iter().map(|r| ground_with(&r.lhs, &e)));
    let mut tried = std::collections::HashSet::new();
    for seed in seeds {
        if !tried.insert(seed.clone()) {
            continue;
        }
        let ex = match Exploration::run(&seed, trs, depth, cap) {
            Ok(ex) => ex,
            Err(RewriteError::BudgetExceeded { .. }) => continue,
        };
        let nfs: Vec<&Term> = ex.terms().iter().filter(|t| is_normal_form(t, trs)).take(2).collect();
        if let [a, b] = nfs[..] {
            return Ok(Some(Witness {
                top: seed.clone(),
                left: a.clone(),
                right: b.clone(),
                left_trace: ex.path_to(a, trs).unwrap_or_default(),
                right_trace: ex.path_to(b, trs).unwrap_or_default(),
            }));
        }
    }
    Ok(None)
}

/// Orthogonality, then Newman (after proving termination), then witness search.
pub fn analyze_confluence(trs: &Trs, cfg: &ConfluenceConfig) -> ConfluenceReport {
    let mut report = ConfluenceReport {
        verdict: Verdict::Maybe,
        reason: Reason::Inconclusive,
        critical_pairs: Vec::new(),
        witness: None,
        termination: None,
        notes: Vec::new(),
    };
    if is_orthogonal(trs) {
        report.verdict = Verdict::Yes;
        report.reason = Reason::Orthogonal;
        return report;
    }
    let cps = critical_pairs(trs);
    let term = match prove_termination(trs, &cfg.termination) {
        Ok(t) => t,
        Err(e) => {
            report.notes.push(format!("termination: {e}"));
            return report;
        }
    };
    let terminating = term.answer == Answer::Yes;
    report.termination = Some(term);
    if terminating {
        match newman_confluence(trs, &cps, cfg) {
            Ok((joins, witness)) => {
                let all = joins.iter().all(|j| j.joined);
                report.critical_pairs = joins;
                if let Some(w) = witness.filter(|w| w.check(trs)) {
                    report.verdict = Verdict::No;
                    report.reason = Reason::DistinctNormalForms;
                    report.witness = Some(w);
                    return report;
                }
                if all {
                    report.verdict = Verdict::Yes;
                    report.reason = Reason::NewmanCriticalPairs;
                    return report;
                }
                report.notes.push("some critical pair could not be normalized within the fuel".into());
            }
            Err(e) => report.notes.push(format!("joinability: {e}")),
        }
    } else {
        let mut joins = Vec::new();
        for cp in &cps {
            match joinable(&cp.left, &cp.right, trs, cfg.join_depth, cfg.node_cap) {
                Ok(join) => joins.push(CpJoin {
                    pair: cp.clone(),
                    joined: join.is_joined(),
                    join,
                }),
                Err(e) => {
                    report.notes.push(format!("joinability: {e}"));
                    break;
                }
            }
        }
        if joins.len() == cps.len() && joins.iter().all(|j| j.joined) {
            report.notes.push(format!("locally confluent: all critical pairs join within depth {}", cfg.join_depth));
        }
        report.critical_pairs = joins;
    }
    match non_confluence_witness(trs, cfg.witness_depth, cfg.node_cap) {
        Ok(Some(w)) if w.check(trs) => {
            report.verdict = Verdict::No;
            report.reason = Reason::DistinctNormalForms;
            report.witness = Some(w);
        }
        Ok(_) => report.notes.push(format!("no witness within depth {}", cfg.witness_depth)),
        Err(e) => report.notes.push(format!("witness search: {e}")),
    }
    report
}

/// Convenience wrapper using default bounds.
pub fn is_confluent(trs: &Trs) -> Verdict {
    analyze_confluence(trs, &ConfluenceConfig::default()).verdict
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::parse::parse_problem;

    fn trs(s: &str) -> Trs {
        parse_problem(s).unwrap().trs().unwrap()
    }

    #[test]
    fn fort_witness() {
        let g = trs("(VAR x)(RULES g(g(x)) -> g(g(g(c)))  g(g(g(c))) -> c)");
        let w = non_confluence_witness(&g, 8, 10_000).unwrap().unwrap();
        assert_eq!(w.top.to_string(), "g(g(g(g(c))))");
        assert_eq!((w.left.to_string().as_str(), w.right.to_string().as_str()), ("g(c)", "c"));
        assert!(w.check(&g));
        let rep = analyze_confluence(&g, &ConfluenceConfig::default());
        assert_eq!(rep.verdict, Verdict::No);
    }

    #[test]
    fn ars_witness() {
        let ars = trs("(VAR)(RULES a -> b  b -> a  a -> c  b -> d)");
        let w = non_confluence_witness(&ars, 8, 10_000).unwrap().unwrap();
        assert_eq!(w.top.to_string(), "a");
        assert_eq!((w.left.to_string().as_str(), w.right.to_string().as_str()), ("c", "d"));
        assert!(w.check(&ars));
    }

    #[test]
    fn beans_confluent() {
        let r1 = trs("(VAR x)(RULES b(b(x)) -> w(x)  w(w(x)) -> w(x)  b(w(x)) -> b(x)  w(b(x)) -> b(x))");
        let rep = analyze_confluence(&r1, &ConfluenceConfig::default());
        assert_eq!(rep.verdict, Verdict::Yes);
        assert_eq!(rep.reason, Reason::NewmanCriticalPairs);
        assert_eq!(rep.critical_pairs.len(), 8);
        for cp in &rep.critical_pairs {
            match &cp.join {
                Joinability::Joined { left_steps, right_steps, .. } => {
                    assert!(left_steps.len() <= 1 && right_steps.len() <= 1)
                }
                Joinability::Unknown => panic!("unjoined"),
            }
        }
        assert_eq!(non_confluence_witness(&r1, 5, 10_000), Ok(None));
        assert_eq!(is_confluent(&Trs::empty()), Verdict::Yes);
    }

    #[test]
    fn unjoinable_pair_of_terminating_system() {
        let r = trs("(VAR x)(RULES f(a) -> b  a -> c)");
        let rep = analyze_confluence(&r, &ConfluenceConfig::default());
        assert_eq!(rep.verdict, Verdict::No);
        let w = rep.witness.unwrap();
        assert_eq!(w.top.to_string(), "f(a)");
        assert!(w.check(&r));
    }
}
