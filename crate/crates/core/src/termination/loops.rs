//! Nontermination witnesses: a term that rewrites to a context around an
//! instance of itself.

use std::collections::{HashMap, VecDeque};

use serde::Serialize;

use crate::rewrite::{successors, RewriteError, StepRecord};
use crate::term::{match_pattern, Position, Substitution, Term, Trs};

/// `start →+ t'` with `t'|context_position = start σ`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct LoopWitness {
    #[serde(serialize_with = "crate::report::term_as_string")]
    pub start: Term,
    pub trace: Vec<StepRecord>,
    pub context_position: Position,
    #[serde(rename = "sigma")]
    pub subst: Substitution,
}

impl LoopWitness {
    pub fn describe(&self) -> String {
        let end = self.trace.last().map(|s| &s.result).unwrap_or(&self.start);
        format!(
            "{} ->+ {} contains {} at position {}",
            self.start,
            end,
            self.subst.apply(&self.start),
            self.context_position
        )
    }
}

fn embedding(start: &Term, u: &Term) -> Option<(Position, Substitution)> {
    u.positions()
        .into_iter()
        .find_map(|p| match_pattern(start, u.get(&p)?).map(|s| (p, s)))
}

/// Breadth-first search from each left-hand side (in rule order) for a
/// reduct of at most `depth` steps that embeds an instance of the start term.
pub fn find_loop(trs: &Trs, depth: usize, cap: usize) -> Result<Option<LoopWitness>, RewriteError> {
    for rule in trs.rules() {
        let start = &rule.lhs;
        let mut parent: HashMap<Term, Option<(Term, Position, usize)>> = HashMap::new();
        parent.insert(start.clone(), None);
        let mut queue = VecDeque::from([(start.clone(), 0usize)]);
        while let Some((t, d)) = queue.pop_front() {
            if d == depth {
                continue;
            }
            for (rx, u) in successors(&t, trs) {
                if let Some((pos, subst)) = embedding(start, &u) {
                    let mut trace = path(&parent, &t, trs);
                    trace.push(StepRecord {
                        position: rx.position,
                        rule: trs.rule_label(rx.rule),
                        result: u,
                    });
                    return Ok(Some(LoopWitness {
                        start: start.clone(),
                        trace,
                        context_position: pos,
                        subst,
                    }));
                }
                if parent.contains_key(&u) {
                    continue;
                }
                if parent.len() >= cap {
                    return Err(RewriteError::BudgetExceeded { cap });
                }
                parent.insert(u.clone(), Some((t.clone(), rx.position, rx.rule)));
                queue.push_back((u, d + 1));
            }
        }
    }
    Ok(None)
}

fn path(parent: &HashMap<Term, Option<(Term, Position, usize)>>, t: &Term, trs: &Trs) -> Vec<StepRecord> {
    let mut out = Vec::new();
    let mut cur = t.clone();
    while let Some(Some((p, pos, rule))) = parent.get(&cur) {
        out.push(StepRecord {
            position: pos.clone(),
            rule: trs.rule_label(*rule),
            result: cur.clone(),
        });
        cur = p.clone();
    }
    out.reverse();
    out
}

/// Replays the trace rule by rule and checks the final embedding.
pub fn check_loop(w: &LoopWitness, trs: &Trs) -> bool {
    if w.trace.is_empty() {
        return false;
    }
    let mut cur = w.start.clone();
    for st in &w.trace {
        let Some(i) = trs.rule_index(&st.rule) else { return false };
        let rule = &trs.rules()[i];
        let Some(sub) = cur.get(&st.position) else { return false };
        let Some(sigma) = match_pattern(&rule.lhs, sub) else { return false };
        let Ok(next) = cur.replace_at(&st.position, sigma.apply(&rule.rhs)) else { return false };
        if next != st.result {
            return false;
        }
        cur = next;
    }
    cur.get(&w.context_position) == Some(&w.subst.apply(&w.start))
}
