//! Rewrite steps, redex selection strategies, normalization and bounded
//! reachability.

use std::collections::{BTreeSet, HashMap, VecDeque};
use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::term::{match_pattern, Position, Substitution, Term, Trs};

/// Default bound on the number of distinct terms explored by breadth-first searches.
pub const DEFAULT_NODE_CAP: usize = 200_000;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum RewriteError {
    #[error("search budget exceeded: more than {cap} terms explored")]
    BudgetExceeded { cap: usize },
}

/// A redex occurrence: `subject|_position = lhs(rule) σ`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Redex {
    pub position: Position,
    /// Index into the rule list of the TRS it was computed for.
    pub rule: usize,
    pub subst: Substitution,
}

impl Redex {
    /// Contracts this redex in `t`.
    pub fn contract(&self, t: &Term, trs: &Trs) -> Term {
        let rhs = self.subst.apply(&trs.rules()[self.rule].rhs);
        t.replace_at(&self.position, rhs)
            .expect("redex position is valid in its subject")
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Strategy {
    LeftmostInnermost,
    LeftmostOutermost,
    /// Contracts all outermost redexes at once (Gross–Knuth).
    Maximal,
    /// Any redex; `step` picks the first one in enumeration order.
    Full,
}

impl Strategy {
    pub fn parse(s: &str) -> Option<Strategy> {
        match s {
            "li" | "leftmost-innermost" => Some(Strategy::LeftmostInnermost),
            "lo" | "leftmost-outermost" => Some(Strategy::LeftmostOutermost),
            "max" | "maximal" => Some(Strategy::Maximal),
            "full" => Some(Strategy::Full),
            _ => None,
        }
    }
}

impl fmt::Display for Strategy {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Strategy::LeftmostInnermost => "leftmost-innermost",
            Strategy::LeftmostOutermost => "leftmost-outermost",
            Strategy::Maximal => "maximal",
            Strategy::Full => "full",
        })
    }
}

/// One recorded rewrite step.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct StepRecord {
    pub position: Position,
    pub rule: String,
    #[serde(serialize_with = "crate::report::term_as_string")]
    pub result: Term,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Outcome {
    NormalForm,
    /// Annotation-guided evaluation found no redex although the term is reducible.
    Stuck,
    FuelExhausted,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct NormalizeResult {
    pub outcome: Outcome,
    #[serde(serialize_with = "crate::report::term_as_string")]
    pub term: Term,
    pub steps: Vec<StepRecord>,
}

impl NormalizeResult {
    pub fn is_normal_form(&self) -> bool {
        self.outcome == Outcome::NormalForm
    }
}

fn root_redex(t: &Term, trs: &Trs) -> Option<(usize, Substitution)> {
    let f = t.root()?;
    trs.rules_rooted_at(f)
        .iter()
        .find_map(|&i| match_pattern(&trs.rules()[i].lhs, t).map(|s| (i, s)))
}

fn root_redexes(t: &Term, trs: &Trs) -> Vec<(usize, Substitution)> {
    match t.root() {
        None => Vec::new(),
        Some(f) => trs
            .rules_rooted_at(f)
            .iter()
            .filter_map(|&i| match_pattern(&trs.rules()[i].lhs, t).map(|s| (i, s)))
            .collect(),
    }
}

/// True if some rule applies at the root of `t`.
pub fn is_root_redex(t: &Term, trs: &Trs) -> bool {
    root_redex(t, trs).is_some()
}

/// All redexes of `t`: positions in preorder, rules in listing order per position.
pub fn redexes(t: &Term, trs: &Trs) -> Vec<Redex> {
    let mut out = Vec::new();
    let mut path = Vec::new();
    collect_redexes(t, trs, &mut path, &mut out);
    out
}

fn collect_redexes(t: &Term, trs: &Trs, path: &mut Vec<usize>, out: &mut Vec<Redex>) {
    for (rule, subst) in root_redexes(t, trs) {
        out.push(Redex {
            position: Position(path.clone()),
            rule,
            subst,
        });
    }
    for (i, a) in t.args().iter().enumerate() {
        path.push(i + 1);
        collect_redexes(a, trs, path, out);
        path.pop();
    }
}

pub fn is_normal_form(t: &Term, trs: &Trs) -> bool {
    if is_root_redex(t, trs) {
        return false;
    }
    t.args().iter().all(|a| is_normal_form(a, trs))
}

/// All one-step reducts, paired with the redex that produced them.
pub fn successors(t: &Term, trs: &Trs) -> Vec<(Redex, Term)> {
    redexes(t, trs)
        .into_iter()
        .map(|rx| {
            let u = rx.contract(t, trs);
            (rx, u)
        })
        .collect()
}

fn leftmost_innermost(t: &Term, trs: &Trs, path: &mut Vec<usize>) -> Option<Redex> {
    for (i, a) in t.args().iter().enumerate() {
        path.push(i + 1);
        let found = leftmost_innermost(a, trs, path);
        path.pop();
        if found.is_some() {
            return found;
        }
    }
    root_redex(t, trs).map(|(rule, subst)| Redex {
        position: Position(path.clone()),
        rule,
        subst,
    })
}

/// The leftmost-innermost redex of `t` given that the previous step
/// contracted at `p`: everything left of `p` in postorder is unchanged and was
/// found to be in normal form, so the search starts at `p` and moves right
/// and up.
fn leftmost_innermost_from(t: &Term, trs: &Trs, p: &[usize]) -> Option<Redex> {
    let mut ancestors = Vec::with_capacity(p.len());
    let mut cur = t;
    for &i in p {
        ancestors.push(cur);
        cur = &cur.args()[i - 1];
    }
    let mut path = p.to_vec();
    if let Some(rx) = leftmost_innermost(cur, trs, &mut path) {
        return Some(rx);
    }
    for depth in (0..p.len()).rev() {
        let anc = ancestors[depth];
        path.truncate(depth);
        for j in p[depth] + 1..=anc.args().len() {
            path.push(j);
            if let Some(rx) = leftmost_innermost(&anc.args()[j - 1], trs, &mut path) {
                return Some(rx);
            }
            path.pop();
        }
        if let Some((rule, subst)) = root_redex(anc, trs) {
            return Some(Redex {
                position: Position(path.clone()),
                rule,
                subst,
            });
        }
    }
    None
}

fn leftmost_outermost(t: &Term, trs: &Trs, path: &mut Vec<usize>) -> Option<Redex> {
    if let Some((rule, subst)) = root_redex(t, trs) {
        return Some(Redex {
            position: Position(path.clone()),
            rule,
            subst,
        });
    }
    for (i, a) in t.args().iter().enumerate() {
        path.push(i + 1);
        let found = leftmost_outermost(a, trs, path);
        path.pop();
        if found.is_some() {
            return found;
        }
    }
    None
}

/// Outermost redexes, computed on `t` before any contraction, left to right.
pub fn outermost_redexes(t: &Term, trs: &Trs) -> Vec<Redex> {
    fn go(t: &Term, trs: &Trs, path: &mut Vec<usize>, out: &mut Vec<Redex>) {
        if let Some((rule, subst)) = root_redex(t, trs) {
            out.push(Redex {
                position: Position(path.clone()),
                rule,
                subst,
            });
            return;
        }
        for (i, a) in t.args().iter().enumerate() {
            path.push(i + 1);
            go(a, trs, path, out);
            path.pop();
        }
    }
    let mut out = Vec::new();
    go(t, trs, &mut Vec::new(), &mut out);
    out
}

/// Contracts all outermost redexes of `t` simultaneously.
pub fn maximal_step(t: &Term, trs: &Trs) -> Option<(Term, Vec<Redex>)> {
    let all = outermost_redexes(t, trs);
    if all.is_empty() {
        return None;
    }
    // Outermost positions are pairwise parallel, so the order is irrelevant.
    let mut u = t.clone();
    for rx in &all {
        u = rx.contract(&u, trs);
    }
    Some((u, all))
}

/// One step under `strategy`; `None` iff `t` is a normal form. For `Maximal`
/// the reported redex is the leftmost contracted one.
pub fn step(t: &Term, trs: &Trs, strategy: Strategy) -> Option<(Term, Redex)> {
    let rx = match strategy {
        Strategy::LeftmostInnermost => leftmost_innermost(t, trs, &mut Vec::new()),
        Strategy::LeftmostOutermost | Strategy::Full => leftmost_outermost(t, trs, &mut Vec::new()),
        Strategy::Maximal => {
            return maximal_step(t, trs).map(|(u, mut all)| (u, all.swap_remove(0)));
        }
    }?;
    let u = rx.contract(t, trs);
    Some((u, rx))
}

/// Iterates `step` at most `fuel` times.
pub fn normalize(t: &Term, trs: &Trs, strategy: Strategy, fuel: usize) -> NormalizeResult {
    let mut cur = t.clone();
    let mut steps: Vec<StepRecord> = Vec::new();
    loop {
        let next = match (strategy, steps.last()) {
            (Strategy::LeftmostInnermost, Some(last)) => {
                leftmost_innermost_from(&cur, trs, &last.position.0).map(|rx| (rx.contract(&cur, trs), rx))
            }
            _ => step(&cur, trs, strategy),
        };
        match next {
            None => {
                return NormalizeResult {
                    outcome: Outcome::NormalForm,
                    term: cur,
                    steps,
                }
            }
            Some(_) if steps.len() >= fuel => {
                return NormalizeResult {
                    outcome: Outcome::FuelExhausted,
                    term: cur,
                    steps,
                }
            }
            Some((u, rx)) => {
                steps.push(StepRecord {
                    position: rx.position,
                    rule: trs.rule_label(rx.rule),
                    result: u.clone(),
                });
                cur = u;
            }
        }
    }
}

/// Normal form under leftmost-innermost rewriting, for systems known to terminate.
pub fn normal_form(t: &Term, trs: &Trs, fuel: usize) -> Option<Term> {
    let r = normalize(t, trs, Strategy::LeftmostInnermost, fuel);
    r.is_normal_form().then_some(r.term)
}

/// Breadth-first exploration of the reduction graph with parent links.
#[derive(Debug, Clone)]
pub struct Exploration {
    pub start: Term,
    /// term -> (distance, parent term and step that reached it)
    nodes: HashMap<Term, (usize, Option<(Term, Position, usize)>)>,
    order: Vec<Term>,
}

impl Exploration {
    /// Explores all terms reachable from `start` in at most `depth` steps.
    pub fn run(start: &Term, trs: &Trs, depth: usize, cap: usize) -> Result<Self, RewriteError> {
        let mut nodes = HashMap::new();
        let mut order = vec![start.clone()];
        nodes.insert(start.clone(), (0, None));
        let mut queue = VecDeque::from([(start.clone(), 0usize)]);
        while let Some((t, d)) = queue.pop_front() {
            if d == depth {
                continue;
            }
            for (rx, u) in successors(&t, trs) {
                if nodes.contains_key(&u) {
                    continue;
                }
                if nodes.len() >= cap {
                    return Err(RewriteError::BudgetExceeded { cap });
                }
                nodes.insert(u.clone(), (d + 1, Some((t.clone(), rx.position, rx.rule))));
                order.push(u.clone());
                queue.push_back((u, d + 1));
            }
        }
        Ok(Exploration {
            start: start.clone(),
            nodes,
            order,
        })
    }

    /// Reached terms in discovery (breadth-first) order.
    pub fn terms(&self) -> &[Term] {
        &self.order
    }

    pub fn contains(&self, t: &Term) -> bool {
        self.nodes.contains_key(t)
    }

    pub fn distance(&self, t: &Term) -> Option<usize> {
        self.nodes.get(t).map(|(d, _)| *d)
    }

    /// Shortest recorded derivation from the start to `t`.
    pub fn path_to(&self, t: &Term, trs: &Trs) -> Option<Vec<StepRecord>> {
        let mut steps = Vec::new();
        let mut cur = t.clone();
        loop {
            let (_, parent) = self.nodes.get(&cur)?;
            match parent {
                None => break,
                Some((p, pos, rule)) => {
                    steps.push(StepRecord {
                        position: pos.clone(),
                        rule: trs.rule_label(*rule),
                        result: cur.clone(),
                    });
                    cur = p.clone();
                }
            }
        }
        steps.reverse();
        Some(steps)
    }
}

/// All terms reachable from `t` in at most `depth` steps.
pub fn reachable(t: &Term, trs: &Trs, depth: usize, cap: usize) -> Result<BTreeSet<Term>, RewriteError> {
    let ex = Exploration::run(t, trs, depth, cap)?;
    Ok(ex.order.into_iter().collect())
}
