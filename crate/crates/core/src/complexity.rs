//! Derivation heights and empirical derivational / runtime complexity.
//!
//! `dh(t)` is the length of a longest reduction from `t`, computed as the
//! longest path in the reduction graph. Curves are measured over ground terms
//! of a fixed size; when the relevant symbols contain no constant, a fresh
//! constant `⊥` is added.

use std::collections::{BTreeSet, HashMap, HashSet};
use std::fmt;

use serde::Serialize;

use crate::rewrite::{successors, StepRecord};
use crate::term::{Name, Term, Trs};

/// The fresh constant used when a term family has no constant to start from.
pub const BOTTOM: &str = "⊥";

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum ComplexityError {
    #[error("the reduction graph exceeded {cap} terms")]
    BudgetExceeded { cap: usize },
    #[error("size {n}: {term} admits an infinite reduction")]
    Infinite { n: usize, term: String },
    #[error("there are no terms of size {0}")]
    NoTerms(usize),
    #[error("size must be at least 1")]
    ZeroSize,
}

impl ComplexityError {
    pub fn code(&self) -> &'static str {
        match self {
            ComplexityError::BudgetExceeded { .. } => "budget-exceeded",
            ComplexityError::Infinite { .. } => "infinite",
            ComplexityError::NoTerms(_) => "no-terms",
            ComplexityError::ZeroSize => "invalid-size",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Dh {
    /// A longest derivation, of length `value`.
    Finite { value: usize, derivation: Vec<StepRecord> },
    /// `cycle[0] →⁺ cycle[0]`, listed step by step (first term repeated last).
    Infinite {
        #[serde(serialize_with = "terms_as_strings")]
        cycle: Vec<Term>,
    },
}

fn terms_as_strings<S: serde::Serializer>(ts: &[Term], s: S) -> Result<S::Ok, S::Error> {
    s.collect_seq(ts.iter().map(|t| t.to_string()))
}

impl Dh {
    pub fn value(&self) -> Option<usize> {
        match self {
            Dh::Finite { value, .. } => Some(*value),
            Dh::Infinite { .. } => None,
        }
    }
}

#[derive(Debug, Clone)]
struct Done {
    height: usize,
    /// First successor realising the height.
    next: Option<StepRecord>,
}

/// Memoizing derivation-height solver; the memo is shared between queries.
#[derive(Debug, Clone)]
pub struct DhSolver<'a> {
    trs: &'a Trs,
    done: HashMap<Term, Done>,
    /// Bound on the number of terms explored by a single query.
    pub node_cap: usize,
    /// Cycle met by the last exploration, if any.
    pending_cycle: Option<Vec<Term>>,
}

struct Frame {
    term: Term,
    succs: Vec<(StepRecord, Term)>,
    idx: usize,
    best: Option<(usize, usize)>,
}

impl<'a> DhSolver<'a> {
    pub fn new(trs: &'a Trs, node_cap: usize) -> Self {
        DhSolver {
            trs,
            done: HashMap::new(),
            node_cap,
            pending_cycle: None,
        }
    }

    fn frame(&self, t: Term) -> Frame {
        let succs = successors(&t, self.trs)
            .into_iter()
            .map(|(rx, u)| {
                let rec = StepRecord {
                    position: rx.position.clone(),
                    rule: self.trs.rule_label(rx.rule),
                    result: u.clone(),
                };
                (rec, u)
            })
            .collect();
        Frame {
            term: t,
            succs,
            idx: 0,
            best: None,
        }
    }

    /// Derivation height of `t`.
    pub fn dh(&mut self, t: &Term) -> Result<Dh, ComplexityError> {
        if !self.done.contains_key(t) {
            self.explore(t)?;
            if let Some(cycle) = self.pending_cycle.take() {
                return Ok(Dh::Infinite { cycle });
            }
        }
        Ok(Dh::Finite {
            value: self.done[t].height,
            derivation: self.derivation(t),
        })
    }

    /// Only the height (cheaper: no derivation is rebuilt).
    pub fn height(&mut self, t: &Term) -> Result<Option<usize>, ComplexityError> {
        if !self.done.contains_key(t) {
            self.explore(t)?;
            if self.pending_cycle.take().is_some() {
                return Ok(None);
            }
        }
        Ok(Some(self.done[t].height))
    }

    fn derivation(&self, t: &Term) -> Vec<StepRecord> {
        let mut out = Vec::new();
        let mut cur = t;
        while let Some(rec) = self.done.get(cur).and_then(|d| d.next.as_ref()) {
            out.push(rec.clone());
            cur = &rec.result;
        }
        out
    }

    /// Iterative DFS; terms on the current path are "grey", memoized ones
    /// are finished. Meeting a grey term means a cycle.
    fn explore(&mut self, start: &Term) -> Result<(), ComplexityError> {
        self.pending_cycle = None;
        let mut stack: Vec<Frame> = vec![self.frame(start.clone())];
        let mut on_stack: HashSet<Term> = HashSet::from([start.clone()]);
        let mut explored = 1usize;
        while let Some(top) = stack.last_mut() {
            if top.idx < top.succs.len() {
                let u = &top.succs[top.idx].1;
                if let Some(d) = self.done.get(u) {
                    let h = d.height + 1;
                    if top.best.is_none_or(|(b, _)| h > b) {
                        top.best = Some((h, top.idx));
                    }
                    top.idx += 1;
                } else if on_stack.contains(u) {
                    let u = u.clone();
                    let from = stack.iter().position(|f| f.term == u).expect("on stack");
                    let mut cycle: Vec<Term> = stack[from..].iter().map(|f| f.term.clone()).collect();
                    cycle.push(u);
                    self.pending_cycle = Some(cycle);
                    return Ok(());
                } else {
                    explored += 1;
                    if explored > self.node_cap {
                        return Err(ComplexityError::BudgetExceeded { cap: self.node_cap });
                    }
                    let u = u.clone();
                    on_stack.insert(u.clone());
                    let f = self.frame(u);
                    stack.push(f);
                }
            } else {
                let mut f = stack.pop().expect("non-empty");
                on_stack.remove(&f.term);
                let done = match f.best {
                    None => Done { height: 0, next: None },
                    Some((h, i)) => Done {
                        height: h,
                        next: Some(f.succs.swap_remove(i).0),
                    },
                };
                self.done.insert(f.term, done);
            }
        }
        Ok(())
    }
}

/// Derivation height of `t` with a fresh memo.
pub fn dh(t: &Term, trs: &Trs, node_cap: usize) -> Result<Dh, ComplexityError> {
    DhSolver::new(trs, node_cap).dh(t)
}

/// Symbols rooting some left-hand side.
pub fn defined_symbols(trs: &Trs) -> BTreeSet<Name> {
    trs.defined_symbols()
}

/// `symbols` plus `⊥` if it has no constant.
fn with_bottom(mut symbols: Vec<(Name, usize)>) -> Vec<(Name, usize)> {
    if !symbols.iter().any(|(_, n)| *n == 0) {
        symbols.push((Name::from(BOTTOM), 0));
    }
    symbols
}

/// All terms over `symbols` of size exactly `n`, in a deterministic order.
fn terms_of_size(symbols: &[(Name, usize)], n: usize, memo: &mut HashMap<usize, Vec<Term>>) -> Vec<Term> {
    if n == 0 {
        return Vec::new();
    }
    if let Some(v) = memo.get(&n) {
        return v.clone();
    }
    let mut out = Vec::new();
    for (f, k) in symbols {
        if *k == 0 {
            if n == 1 {
                out.push(Term::App(f.clone(), Vec::new().into()));
            }
            continue;
        }
        if n < 1 + k {
            continue;
        }
        for sizes in compositions(n - 1, *k) {
            let mut partial: Vec<Vec<Term>> = vec![Vec::new()];
            for s in sizes {
                let choices = terms_of_size(symbols, s, memo);
                partial = partial
                    .into_iter()
                    .flat_map(|p| {
                        choices.iter().map(move |c| {
                            let mut q = p.clone();
                            q.push(c.clone());
                            q
                        })
                    })
                    .collect();
            }
            out.extend(partial.into_iter().map(|args| Term::App(f.clone(), args.into())));
        }
    }
    memo.insert(n, out.clone());
    out
}

/// Ways to write `n` as an ordered sum of `k` positive parts.
fn compositions(n: usize, k: usize) -> Vec<Vec<usize>> {
    if k == 0 {
        return if n == 0 { vec![Vec::new()] } else { Vec::new() };
    }
    let mut out = Vec::new();
    for first in 1..=n.saturating_sub(k - 1) {
        for mut rest in compositions(n - first, k - 1) {
            rest.insert(0, first);
            out.push(rest);
        }
    }
    out
}

/// Ground terms of size `n` over the signature (plus `⊥` if needed).
pub fn ground_terms(trs: &Trs, n: usize) -> Vec<Term> {
    let symbols = with_bottom(trs.signature().iter().map(|(f, k)| (f.clone(), *k)).collect());
    terms_of_size(&symbols, n, &mut HashMap::new())
}

/// Basic terms of size `n`: a defined root applied to ground constructor
/// terms (constructors plus `⊥` if they include no constant).
pub fn basic_terms(trs: &Trs, n: usize) -> Vec<Term> {
    let defined = trs.defined_symbols();
    let constructors = with_bottom(
        trs.signature()
            .iter()
            .filter(|(f, _)| !defined.contains(*f))
            .map(|(f, k)| (f.clone(), *k))
            .collect(),
    );
    let mut memo = HashMap::new();
    let mut out = Vec::new();
    for f in &defined {
        let k = trs.signature()[f];
        if k == 0 {
            if n == 1 {
                out.push(Term::App(f.clone(), Vec::new().into()));
            }
            continue;
        }
        if n < 1 + k {
            continue;
        }
        for sizes in compositions(n - 1, k) {
            let mut partial: Vec<Vec<Term>> = vec![Vec::new()];
            for s in sizes {
                let choices = terms_of_size(&constructors, s, &mut memo);
                partial = partial
                    .into_iter()
                    .flat_map(|p| {
                        choices.iter().map(move |c| {
                            let mut q = p.clone();
                            q.push(c.clone());
                            q
                        })
                    })
                    .collect();
            }
            out.extend(partial.into_iter().map(|args| Term::App(f.clone(), args.into())));
        }
    }
    out
}

/// True if `t` has a defined root and constructor-only arguments.
pub fn is_basic(t: &Term, trs: &Trs) -> bool {
    let defined = trs.defined_symbols();
    match t {
        Term::App(f, args) => {
            defined.contains(f) && args.iter().all(|a| a.symbols().keys().all(|g| !defined.contains(g)))
        }
        Term::Var(_) => false,
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum CurveKind {
    Dc,
    Rc,
}

impl fmt::Display for CurveKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            CurveKind::Dc => "dc",
            CurveKind::Rc => "rc",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct CurvePoint {
    pub kind: CurveKind,
    pub n: usize,
    pub value: usize,
    #[serde(serialize_with = "crate::report::term_as_string")]
    pub witness: Term,
    /// Number of terms measured.
    pub terms: usize,
}

fn measure(kind: CurveKind, n: usize, terms: Vec<Term>, trs: &Trs, node_cap: usize) -> Result<CurvePoint, ComplexityError> {
    if n == 0 {
        return Err(ComplexityError::ZeroSize);
    }
    if terms.is_empty() {
        return Err(ComplexityError::NoTerms(n));
    }
    let mut solver = DhSolver::new(trs, node_cap);
    let mut best: Option<(usize, String, Term)> = None;
    let count = terms.len();
    for t in terms {
        let Some(h) = solver.height(&t)? else {
            return Err(ComplexityError::Infinite { n, term: t.to_string() });
        };
        let shown = t.to_string();
        let better = match &best {
            None => true,
            Some((bh, bs, _)) => h > *bh || (h == *bh && shown < *bs),
        };
        if better {
            best = Some((h, shown, t));
        }
    }
    let (value, _, witness) = best.expect("non-empty");
    Ok(CurvePoint {
        kind,
        n,
        value,
        witness,
        terms: count,
    })
}

/// `max { dh(t) | t ground, |t| = n }` with a witness (smallest in print
/// order among the maximal ones).
pub fn dc_empirical(trs: &Trs, n: usize, node_cap: usize) -> Result<CurvePoint, ComplexityError> {
    measure(CurveKind::Dc, n, ground_terms(trs, n), trs, node_cap)
}

/// `max { dh(t) | t basic, |t| = n }` with a witness.
pub fn rc_empirical(trs: &Trs, n: usize, node_cap: usize) -> Result<CurvePoint, ComplexityError> {
    measure(CurveKind::Rc, n, basic_terms(trs, n), trs, node_cap)
}

/// Renders points as CSV with header `kind,n,value,witness`.
pub fn curve_csv(points: &[CurvePoint]) -> String {
    let mut out = String::from("kind,n,value,witness\n");
    for p in points {
        let w = p.witness.to_string().replace('"', "\"\"");
        out.push_str(&format!("{},{},{},\"{}\"\n", p.kind, p.n, p.value, w));
    }
    out
}

/// The `order`-th forward differences of `values`.
pub fn finite_differences(values: &[i64], order: usize) -> Vec<i64> {
    let mut cur = values.to_vec();
    for _ in 0..order {
        cur = cur.windows(2).map(|w| w[1] - w[0]).collect();
    }
    cur
}
