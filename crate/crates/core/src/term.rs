//! First-order terms, positions, substitutions, matching and unification.
//!
//! Terms are immutable and share their argument vectors through `Arc`, so
//! cloning a term or replacing a subterm only copies the spine that changes.

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::fmt;
use std::sync::Arc;

use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Interned-ish symbol or variable name.
pub type Name = Arc<str>;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum TermError {
    #[error("position {position} is not valid in {term}")]
    InvalidPosition { position: Position, term: String },
    #[error("symbol `{symbol}` used with arity {found}, expected {expected}")]
    ArityMismatch {
        symbol: String,
        expected: usize,
        found: usize,
    },
    #[error("rule {rule}: left-hand side is a variable")]
    VariableLhs { rule: String },
    #[error("rule {rule}: variable `{var}` of the right-hand side does not occur on the left")]
    UnboundRhsVariable { rule: String, var: String },
    #[error("duplicate rule id `{0}`")]
    DuplicateRuleId(String),
    #[error("invalid symbol name `{0}`")]
    InvalidName(String),
}

/// A function symbol with its arity.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Symbol {
    pub name: String,
    pub arity: usize,
}

impl Symbol {
    pub fn new(name: impl Into<String>, arity: usize) -> Result<Self, TermError> {
        let name = name.into();
        if !valid_name(&name) {
            return Err(TermError::InvalidName(name));
        }
        Ok(Symbol { name, arity })
    }
}

impl fmt::Display for Symbol {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}/{}", self.name, self.arity)
    }
}

pub(crate) fn valid_name(name: &str) -> bool {
    !name.is_empty()
        && !name
            .chars()
            .any(|c| c.is_whitespace() || c == '(' || c == ')' || c == ',')
}

/// A first-order term.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Term {
    Var(Name),
    App(Name, Arc<[Term]>),
}

impl Term {
    pub fn var(name: &str) -> Term {
        Term::Var(Name::from(name))
    }

    pub fn app(head: &str, args: Vec<Term>) -> Term {
        Term::App(Name::from(head), args.into())
    }

    pub fn constant(name: &str) -> Term {
        Term::App(Name::from(name), Arc::from(Vec::new()))
    }

    pub(crate) fn with_args(head: &Name, args: Vec<Term>) -> Term {
        Term::App(head.clone(), args.into())
    }

    /// Builds `f1(f2(...fk(tail)))` from a word `[f1, ..., fk]` of unary symbols.
    pub fn word<S: AsRef<str>>(letters: &[S], tail: Term) -> Term {
        letters
            .iter()
            .rev()
            .fold(tail, |acc, f| Term::app(f.as_ref(), vec![acc]))
    }

    pub fn is_var(&self) -> bool {
        matches!(self, Term::Var(_))
    }

    pub fn root(&self) -> Option<&Name> {
        match self {
            Term::App(f, _) => Some(f),
            Term::Var(_) => None,
        }
    }

    pub fn args(&self) -> &[Term] {
        match self {
            Term::App(_, args) => args,
            Term::Var(_) => &[],
        }
    }

    pub fn as_var(&self) -> Option<&Name> {
        match self {
            Term::Var(x) => Some(x),
            Term::App(..) => None,
        }
    }

    /// Number of variable and function symbol occurrences.
    pub fn size(&self) -> usize {
        match self {
            Term::Var(_) => 1,
            Term::App(_, args) => 1 + args.iter().map(Term::size).sum::<usize>(),
        }
    }

    pub fn depth(&self) -> usize {
        match self {
            Term::Var(_) => 0,
            Term::App(_, args) => 1 + args.iter().map(Term::depth).max().unwrap_or(0),
        }
    }

    pub fn is_ground(&self) -> bool {
        match self {
            Term::Var(_) => false,
            Term::App(_, args) => args.iter().all(Term::is_ground),
        }
    }

    /// Variables in order of first occurrence (left to right).
    pub fn vars(&self) -> Vec<Name> {
        let mut out = Vec::new();
        self.collect_vars(&mut out);
        out
    }

    fn collect_vars(&self, out: &mut Vec<Name>) {
        match self {
            Term::Var(x) => {
                if !out.contains(x) {
                    out.push(x.clone());
                }
            }
            Term::App(_, args) => args.iter().for_each(|a| a.collect_vars(out)),
        }
    }

    pub fn var_set(&self) -> BTreeSet<Name> {
        self.vars().into_iter().collect()
    }

    /// Occurrence counts of every variable.
    pub fn var_counts(&self) -> HashMap<Name, usize> {
        let mut counts = HashMap::new();
        self.count_vars(&mut counts);
        counts
    }

    fn count_vars(&self, counts: &mut HashMap<Name, usize>) {
        match self {
            Term::Var(x) => *counts.entry(x.clone()).or_insert(0) += 1,
            Term::App(_, args) => args.iter().for_each(|a| a.count_vars(counts)),
        }
    }

    pub fn contains_var(&self, x: &str) -> bool {
        match self {
            Term::Var(y) => &**y == x,
            Term::App(_, args) => args.iter().any(|a| a.contains_var(x)),
        }
    }

    pub fn contains_symbol(&self, f: &str) -> bool {
        match self {
            Term::Var(_) => false,
            Term::App(g, args) => &**g == f || args.iter().any(|a| a.contains_symbol(f)),
        }
    }

    /// Function symbols with their arities.
    pub fn symbols(&self) -> BTreeMap<Name, usize> {
        let mut out = BTreeMap::new();
        self.collect_symbols(&mut out);
        out
    }

    pub(crate) fn collect_symbols(&self, out: &mut BTreeMap<Name, usize>) {
        if let Term::App(f, args) = self {
            out.entry(f.clone()).or_insert(args.len());
            args.iter().for_each(|a| a.collect_symbols(out));
        }
    }

    pub fn is_subterm_of(&self, other: &Term) -> bool {
        self == other || other.args().iter().any(|a| self.is_subterm_of(a))
    }

    /// All positions in preorder.
    pub fn positions(&self) -> Vec<Position> {
        let mut out = Vec::new();
        let mut path = Vec::new();
        self.walk_positions(&mut path, &mut out, false);
        out
    }

    /// Positions of function symbol occurrences in left-to-right preorder.
    pub fn fun_positions(&self) -> Vec<Position> {
        let mut out = Vec::new();
        let mut path = Vec::new();
        self.walk_positions(&mut path, &mut out, true);
        out
    }

    fn walk_positions(&self, path: &mut Vec<usize>, out: &mut Vec<Position>, fun_only: bool) {
        match self {
            Term::Var(_) => {
                if !fun_only {
                    out.push(Position(path.clone()));
                }
            }
            Term::App(_, args) => {
                out.push(Position(path.clone()));
                for (i, a) in args.iter().enumerate() {
                    path.push(i + 1);
                    a.walk_positions(path, out, fun_only);
                    path.pop();
                }
            }
        }
    }

    pub fn get(&self, p: &Position) -> Option<&Term> {
        let mut cur = self;
        for &i in &p.0 {
            cur = cur.args().get(i.checked_sub(1)?)?;
        }
        Some(cur)
    }

    /// `t|_p`.
    pub fn subterm_at(&self, p: &Position) -> Result<&Term, TermError> {
        self.get(p).ok_or_else(|| TermError::InvalidPosition {
            position: p.clone(),
            term: self.to_string(),
        })
    }

    /// `t[u]_p`.
    pub fn replace_at(&self, p: &Position, u: Term) -> Result<Term, TermError> {
        self.replace_inner(&p.0, u).ok_or_else(|| TermError::InvalidPosition {
            position: p.clone(),
            term: self.to_string(),
        })
    }

    fn replace_inner(&self, path: &[usize], u: Term) -> Option<Term> {
        let Some((&i, rest)) = path.split_first() else {
            return Some(u);
        };
        match self {
            Term::Var(_) => None,
            Term::App(f, args) => {
                let idx = i.checked_sub(1)?;
                let child = args.get(idx)?.replace_inner(rest, u)?;
                let mut new_args = args.to_vec();
                new_args[idx] = child;
                Some(Term::with_args(f, new_args))
            }
        }
    }

    /// Renames every variable through `f`.
    pub fn rename(&self, f: &mut impl FnMut(&Name) -> Name) -> Term {
        match self {
            Term::Var(x) => Term::Var(f(x)),
            Term::App(g, args) => {
                Term::with_args(g, args.iter().map(|a| a.rename(f)).collect())
            }
        }
    }
}

impl fmt::Display for Term {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Term::Var(x) => f.write_str(x),
            Term::App(g, args) => {
                f.write_str(g)?;
                if !args.is_empty() {
                    f.write_str("(")?;
                    for (i, a) in args.iter().enumerate() {
                        if i > 0 {
                            f.write_str(",")?;
                        }
                        write!(f, "{a}")?;
                    }
                    f.write_str(")")?;
                }
                Ok(())
            }
        }
    }
}

impl fmt::Debug for Term {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Term::Var(x) => write!(f, "?{x}"),
            Term::App(..) => write!(f, "{self}"),
        }
    }
}

/// Structured serde form: `{"var": "x"}` or `{"fun": "f", "args": [...]}`.
#[derive(Serialize, Deserialize)]
#[serde(untagged)]
enum TermRepr {
    Var { var: String },
    App { fun: String, #[serde(default)] args: Vec<Term> },
}

impl Serialize for Term {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        let repr = match self {
            Term::Var(x) => TermRepr::Var { var: x.to_string() },
            Term::App(f, args) => TermRepr::App {
                fun: f.to_string(),
                args: args.to_vec(),
            },
        };
        repr.serialize(s)
    }
}

impl<'de> Deserialize<'de> for Term {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        Ok(match TermRepr::deserialize(d)? {
            TermRepr::Var { var } => Term::var(&var),
            TermRepr::App { fun, args } => Term::app(&fun, args),
        })
    }
}

/// A position: a path of 1-based argument indices; empty is the root.
#[derive(Debug, Clone, Default, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Position(pub Vec<usize>);

impl Position {
    pub fn root() -> Self {
        Position(Vec::new())
    }

    pub fn is_root(&self) -> bool {
        self.0.is_empty()
    }

    pub fn child(&self, i: usize) -> Position {
        let mut p = self.0.clone();
        p.push(i);
        Position(p)
    }

    pub fn concat(&self, other: &Position) -> Position {
        let mut p = self.0.clone();
        p.extend_from_slice(&other.0);
        Position(p)
    }

    /// `self` is a prefix of `other` (including equality).
    pub fn is_prefix_of(&self, other: &Position) -> bool {
        other.0.starts_with(&self.0)
    }

    /// Neither position is a prefix of the other.
    pub fn is_parallel_to(&self, other: &Position) -> bool {
        !self.is_prefix_of(other) && !other.is_prefix_of(self)
    }
}

impl From<Vec<usize>> for Position {
    fn from(v: Vec<usize>) -> Self {
        Position(v)
    }
}

impl fmt::Display for Position {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.0.is_empty() {
            return f.write_str("ε");
        }
        let parts: Vec<String> = self.0.iter().map(usize::to_string).collect();
        f.write_str(&parts.join("."))
    }
}

/// A finite map from variables to terms. Trivial bindings `x ↦ x` are never stored.
#[derive(Debug, Clone, Default, PartialEq, Eq, Hash)]
pub struct Substitution(BTreeMap<Name, Term>);

impl Substitution {
    pub fn new() -> Self {
        Substitution(BTreeMap::new())
    }

    pub fn from_pairs<I: IntoIterator<Item = (Name, Term)>>(pairs: I) -> Self {
        let mut s = Substitution::new();
        for (x, t) in pairs {
            s.insert(x, t);
        }
        s
    }

    pub fn insert(&mut self, x: Name, t: Term) {
        if t.as_var() == Some(&x) {
            self.0.remove(&x);
        } else {
            self.0.insert(x, t);
        }
    }

    pub fn get(&self, x: &str) -> Option<&Term> {
        self.0.get(x)
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = (&Name, &Term)> {
        self.0.iter()
    }

    pub fn domain(&self) -> impl Iterator<Item = &Name> {
        self.0.keys()
    }

    /// `tσ`.
    pub fn apply(&self, t: &Term) -> Term {
        if self.0.is_empty() {
            return t.clone();
        }
        match t {
            Term::Var(x) => self.0.get(x).cloned().unwrap_or_else(|| t.clone()),
            Term::App(f, args) => {
                if args.is_empty() {
                    return t.clone();
                }
                Term::with_args(f, args.iter().map(|a| self.apply(a)).collect())
            }
        }
    }

    /// Composition `self` then `other`: `t(self ∘ other) = (t self) other`.
    pub fn then(&self, other: &Substitution) -> Substitution {
        let mut out = Substitution::new();
        for (x, t) in &self.0 {
            out.insert(x.clone(), other.apply(t));
        }
        for (x, t) in &other.0 {
            if !self.0.contains_key(x) {
                out.insert(x.clone(), t.clone());
            }
        }
        out
    }

    /// True if the substitution is an injective variable renaming.
    pub fn is_renaming(&self) -> bool {
        let mut seen = BTreeSet::new();
        self.0
            .values()
            .all(|t| t.as_var().is_some_and(|y| seen.insert(y.clone())))
    }
}

impl fmt::Display for Substitution {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("{")?;
        for (i, (x, t)) in self.0.iter().enumerate() {
            if i > 0 {
                f.write_str(", ")?;
            }
            write!(f, "{x} ↦ {t}")?;
        }
        f.write_str("}")
    }
}

impl Serialize for Substitution {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        let m: BTreeMap<String, String> = self
            .0
            .iter()
            .map(|(k, v)| (k.to_string(), v.to_string()))
            .collect();
        m.serialize(s)
    }
}

/// One-sided matching: returns σ with `pattern σ = subject`.
pub fn match_pattern(pattern: &Term, subject: &Term) -> Option<Substitution> {
    let mut sigma = BTreeMap::new();
    if match_into(pattern, subject, &mut sigma) {
        Some(Substitution::from_pairs(sigma))
    } else {
        None
    }
}

pub(crate) fn match_into(pattern: &Term, subject: &Term, sigma: &mut BTreeMap<Name, Term>) -> bool {
    match pattern {
        Term::Var(x) => match sigma.get(x) {
            Some(bound) => bound == subject,
            None => {
                sigma.insert(x.clone(), subject.clone());
                true
            }
        },
        Term::App(f, pargs) => match subject {
            Term::App(g, sargs) if f == g && pargs.len() == sargs.len() => pargs
                .iter()
                .zip(sargs.iter())
                .all(|(p, s)| match_into(p, s, sigma)),
            _ => false,
        },
    }
}

/// Syntactic unification with occurs check. The result is idempotent and most general.
pub fn unify(s: &Term, t: &Term) -> Option<Substitution> {
    let mut sigma = Substitution::new();
    let mut work = vec![(s.clone(), t.clone())];
    while let Some((a, b)) = work.pop() {
        let a = sigma.apply(&a);
        let b = sigma.apply(&b);
        match (&a, &b) {
            (Term::Var(x), Term::Var(y)) if x == y => {}
            (Term::Var(x), other) | (other, Term::Var(x)) => {
                if other.contains_var(x) {
                    return None;
                }
                let single = Substitution::from_pairs([(x.clone(), other.clone())]);
                sigma = sigma.then(&single);
            }
            (Term::App(f, fargs), Term::App(g, gargs)) => {
                if f != g || fargs.len() != gargs.len() {
                    return None;
                }
                work.extend(fargs.iter().cloned().zip(gargs.iter().cloned()));
            }
        }
    }
    Some(sigma)
}

/// `a` and `b` are equal up to an injective renaming of variables.
pub fn is_variant(a: &Term, b: &Term) -> bool {
    match_pattern(a, b).is_some_and(|s| s.is_renaming())
        && match_pattern(b, a).is_some_and(|s| s.is_renaming())
}

/// Renames variables in order of first occurrence over `terms`, drawing names
/// from `pool` and continuing with `x1, x2, ...` once it is used up.
pub fn canonical_rename(terms: &[&Term], pool: &[&str]) -> Vec<Term> {
    let mut map: HashMap<Name, Name> = HashMap::new();
    let mut next = 0usize;
    let mut fresh = |x: &Name| -> Name {
        map.entry(x.clone())
            .or_insert_with(|| {
                let n = pool
                    .get(next)
                    .map(|s| Name::from(*s))
                    .unwrap_or_else(|| Name::from(format!("x{}", next + 1 - pool.len())));
                next += 1;
                n
            })
            .clone()
    };
    terms.iter().map(|t| t.rename(&mut fresh)).collect()
}

/// Conventional variable names that do not clash with any symbol of `avoid`.
pub fn variable_pool(avoid: &Signature) -> Vec<String> {
    ["x", "y", "z", "u", "v", "w"]
        .iter()
        .map(|s| s.to_string())
        .chain((1..=64).map(|i| format!("x{i}")))
        .filter(|n| !avoid.contains_key(n.as_str()))
        .collect()
}

/// A rewrite rule `lhs → rhs`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Rule {
    pub lhs: Term,
    pub rhs: Term,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub id: Option<String>,
}

impl Rule {
    /// Checks that the left-hand side is not a variable and `vars(rhs) ⊆ vars(lhs)`.
    pub fn new(lhs: Term, rhs: Term) -> Result<Rule, TermError> {
        Rule::build(lhs, rhs, None)
    }

    pub fn named(id: &str, lhs: Term, rhs: Term) -> Result<Rule, TermError> {
        Rule::build(lhs, rhs, Some(id.to_string()))
    }

    fn build(lhs: Term, rhs: Term, id: Option<String>) -> Result<Rule, TermError> {
        let label = || id.clone().unwrap_or_else(|| format!("{lhs} -> {rhs}"));
        if lhs.is_var() {
            return Err(TermError::VariableLhs { rule: label() });
        }
        let lvars = lhs.var_set();
        if let Some(x) = rhs.vars().into_iter().find(|x| !lvars.contains(x)) {
            return Err(TermError::UnboundRhsVariable {
                rule: label(),
                var: x.to_string(),
            });
        }
        Ok(Rule { lhs, rhs, id })
    }

    pub fn rename(&self, f: &mut impl FnMut(&Name) -> Name) -> Rule {
        Rule {
            lhs: self.lhs.rename(f),
            rhs: self.rhs.rename(f),
            id: self.id.clone(),
        }
    }

    pub fn is_variant_of(&self, other: &Rule) -> bool {
        let a = Term::app("→", vec![self.lhs.clone(), self.rhs.clone()]);
        let b = Term::app("→", vec![other.lhs.clone(), other.rhs.clone()]);
        is_variant(&a, &b)
    }

    pub fn is_left_linear(&self) -> bool {
        self.lhs.var_counts().values().all(|&n| n == 1)
    }
}

impl fmt::Display for Rule {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} -> {}", self.lhs, self.rhs)
    }
}

/// Variable-disjoint variants of two rules: the first gets suffix `1`, the second `2`.
pub fn rename_apart(r1: &Rule, r2: &Rule) -> (Rule, Rule) {
    let suffix = |s: &'static str| move |x: &Name| Name::from(format!("{x}{s}"));
    (r1.rename(&mut suffix("1")), r2.rename(&mut suffix("2")))
}

/// An equation `lhs ≈ rhs`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Equation {
    pub lhs: Term,
    pub rhs: Term,
}

impl Equation {
    pub fn new(lhs: Term, rhs: Term) -> Self {
        Equation { lhs, rhs }
    }

    pub fn flipped(&self) -> Equation {
        Equation::new(self.rhs.clone(), self.lhs.clone())
    }

    /// Variant of `other` in either orientation.
    pub fn is_variant_of(&self, other: &Equation) -> bool {
        let pair = |l: &Term, r: &Term| Term::app("≈", vec![l.clone(), r.clone()]);
        let me = pair(&self.lhs, &self.rhs);
        is_variant(&me, &pair(&other.lhs, &other.rhs))
            || is_variant(&me, &pair(&other.rhs, &other.lhs))
    }
}

impl fmt::Display for Equation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} == {}", self.lhs, self.rhs)
    }
}

/// Signature as a name-to-arity map.
pub type Signature = BTreeMap<Name, usize>;

/// Adds the symbols of `t` to `sig`, failing on an arity clash.
pub fn merge_signature(sig: &mut Signature, t: &Term) -> Result<(), TermError> {
    merge_symbols(sig, t)
}

pub(crate) fn merge_symbols(sig: &mut Signature, t: &Term) -> Result<(), TermError> {
    match t {
        Term::Var(_) => Ok(()),
        Term::App(f, args) => {
            match sig.get(f) {
                Some(&n) if n != args.len() => {
                    return Err(TermError::ArityMismatch {
                        symbol: f.to_string(),
                        expected: n,
                        found: args.len(),
                    })
                }
                Some(_) => {}
                None => {
                    sig.insert(f.clone(), args.len());
                }
            }
            args.iter().try_for_each(|a| merge_symbols(sig, a))
        }
    }
}

/// A term rewrite system: rules plus a signature containing every symbol they use.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Trs {
    signature: Signature,
    rules: Vec<Rule>,
    by_root: BTreeMap<Name, Vec<usize>>,
}

impl Trs {
    pub fn new(rules: Vec<Rule>) -> Result<Trs, TermError> {
        Trs::with_signature(rules, Signature::new())
    }

    pub fn empty() -> Trs {
        Trs {
            signature: Signature::new(),
            rules: Vec::new(),
            by_root: BTreeMap::new(),
        }
    }

    /// Builds a TRS whose signature is `extra` plus all symbols used in `rules`.
    pub fn with_signature(rules: Vec<Rule>, extra: Signature) -> Result<Trs, TermError> {
        let mut signature = extra;
        for r in &rules {
            merge_symbols(&mut signature, &r.lhs)?;
            merge_symbols(&mut signature, &r.rhs)?;
        }
        let mut by_root: BTreeMap<Name, Vec<usize>> = BTreeMap::new();
        for (i, r) in rules.iter().enumerate() {
            let root = r.lhs.root().expect("rule lhs is never a variable");
            by_root.entry(root.clone()).or_default().push(i);
        }
        let trs = Trs {
            signature,
            rules,
            by_root,
        };
        let mut seen = BTreeSet::new();
        for i in 0..trs.rules.len() {
            let label = trs.rule_label(i);
            if !seen.insert(label.clone()) {
                return Err(TermError::DuplicateRuleId(label));
            }
        }
        Ok(trs)
    }

    pub fn rules(&self) -> &[Rule] {
        &self.rules
    }

    pub fn signature(&self) -> &Signature {
        &self.signature
    }

    pub fn len(&self) -> usize {
        self.rules.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rules.is_empty()
    }

    /// User-supplied id, or `r<k>` for the k-th rule (1-based).
    pub fn rule_label(&self, i: usize) -> String {
        self.rules[i]
            .id
            .clone()
            .unwrap_or_else(|| format!("r{}", i + 1))
    }

    pub fn rule_index(&self, label: &str) -> Option<usize> {
        (0..self.rules.len()).find(|&i| self.rule_label(i) == label)
    }

    /// Indices of rules whose left-hand side is rooted at `f`, in listing order.
    pub fn rules_rooted_at(&self, f: &str) -> &[usize] {
        self.by_root.get(f).map(Vec::as_slice).unwrap_or(&[])
    }

    /// Symbols at the root of some left-hand side.
    pub fn defined_symbols(&self) -> BTreeSet<Name> {
        self.by_root.keys().cloned().collect()
    }

    pub fn symbols(&self) -> Vec<Symbol> {
        self.signature
            .iter()
            .map(|(f, &n)| Symbol {
                name: f.to_string(),
                arity: n,
            })
            .collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn v(x: &str) -> Term {
        Term::var(x)
    }
    fn c(x: &str) -> Term {
        Term::constant(x)
    }
    fn f1(f: &str, a: Term) -> Term {
        Term::app(f, vec![a])
    }

    #[test]
    fn subterm_and_replace() {
        let t = Term::app("f", vec![c("a"), f1("g", c("b"))]);
        assert_eq!(t.subterm_at(&Position(vec![2, 1])).unwrap(), &c("b"));
        assert_eq!(t.subterm_at(&Position::root()).unwrap(), &t);
        assert!(t.subterm_at(&Position(vec![3])).is_err());
        assert!(t.subterm_at(&Position(vec![1, 1])).is_err());

        let u = f1("w", f1("b", v("x")));
        assert_eq!(u.subterm_at(&Position(vec![1])).unwrap(), &f1("b", v("x")));

        let fab = Term::app("f", vec![c("a"), c("b")]);
        assert_eq!(
            fab.replace_at(&Position(vec![1]), c("c")).unwrap(),
            Term::app("f", vec![c("c"), c("b")])
        );
        let www = f1("w", f1("w", f1("w", v("x"))));
        assert_eq!(
            www.replace_at(&Position(vec![1]), f1("w", v("x"))).unwrap(),
            f1("w", f1("w", v("x")))
        );
        assert!(fab.replace_at(&Position(vec![0]), c("c")).is_err());
    }

    #[test]
    fn substitution_application() {
        let s = Substitution::from_pairs([(Name::from("x"), c("a"))]);
        assert_eq!(
            s.apply(&Term::app("f", vec![v("x"), v("y")])),
            Term::app("f", vec![c("a"), v("y")])
        );
        assert_eq!(Substitution::new().apply(&v("x")), v("x"));
        let s = Substitution::from_pairs([(Name::from("x"), f1("w", c("e")))]);
        assert_eq!(s.apply(&f1("b", v("x"))), f1("b", f1("w", c("e"))));
        let trivial = Substitution::from_pairs([(Name::from("x"), v("x"))]);
        assert!(trivial.is_empty());
    }

    #[test]
    fn matching_examples() {
        let fxx = Term::app("f", vec![v("x"), v("x")]);
        let s = match_pattern(&fxx, &Term::app("f", vec![c("a"), c("a")])).unwrap();
        assert_eq!(s.get("x"), Some(&c("a")));
        assert!(match_pattern(&fxx, &Term::app("f", vec![c("a"), c("b")])).is_none());
        let pat = f1("b", f1("b", v("x")));
        let subj = f1("b", f1("b", f1("w", c("e"))));
        let s = match_pattern(&pat, &subj).unwrap();
        assert_eq!(s.get("x"), Some(&f1("w", c("e"))));
    }

    #[test]
    fn unification_examples() {
        let s = unify(&f1("w", f1("w", v("x"))), &f1("w", v("y"))).unwrap();
        assert_eq!(s.len(), 1);
        assert_eq!(s.get("y"), Some(&f1("w", v("x"))));
        assert!(unify(&v("x"), &f1("f", v("x"))).is_none());
        let ggc = f1("g", f1("g", c("c")));
        let s = unify(&f1("g", v("x")), &f1("g", ggc.clone())).unwrap();
        assert_eq!(s.get("x"), Some(&ggc));
    }

    #[test]
    fn renaming_apart() {
        let r1 = Rule::new(f1("f", v("x")), v("x")).unwrap();
        let r2 = Rule::new(f1("g", v("x")), v("x")).unwrap();
        let (a, b) = rename_apart(&r1, &r2);
        assert_eq!(a.to_string(), "f(x1) -> x1");
        assert_eq!(b.to_string(), "g(x2) -> x2");
        let (a, b) = rename_apart(&r1, &r1);
        assert!(a.is_variant_of(&r1) && b.is_variant_of(&r1));
        assert!(a.lhs.var_set().is_disjoint(&b.lhs.var_set()));
    }

    #[test]
    fn function_positions() {
        assert!(v("x").fun_positions().is_empty());
        let t = Term::app("f", vec![v("x"), c("a")]);
        assert_eq!(t.fun_positions(), vec![Position::root(), Position(vec![2])]);
        let t = f1("w", f1("b", v("x")));
        assert_eq!(t.fun_positions(), vec![Position::root(), Position(vec![1])]);
    }

    #[test]
    fn rule_invariants() {
        assert!(matches!(
            Rule::new(v("x"), c("a")),
            Err(TermError::VariableLhs { .. })
        ));
        assert!(matches!(
            Rule::new(f1("f", v("x")), v("y")),
            Err(TermError::UnboundRhsVariable { .. })
        ));
        let r = Rule::named("a", c("a"), c("b")).unwrap();
        let dup = Trs::new(vec![r.clone(), r]);
        assert!(matches!(dup, Err(TermError::DuplicateRuleId(_))));
        let bad = Trs::new(vec![
            Rule::new(f1("f", c("a")), c("a")).unwrap(),
            Rule::new(Term::app("f", vec![c("a"), c("a")]), c("a")).unwrap(),
        ]);
        assert!(matches!(bad, Err(TermError::ArityMismatch { .. })));
    }

    #[test]
    fn size_counts_vars_and_symbols() {
        assert_eq!(f1("f", v("x")).size(), 2);
        assert_eq!(c("a").size(), 1);
    }

    #[test]
    fn serde_structured_terms() {
        let t = Term::app("f", vec![v("x"), c("a")]);
        let json = serde_json::to_string(&t).unwrap();
        assert_eq!(json, r#"{"fun":"f","args":[{"var":"x"},{"fun":"a","args":[]}]}"#);
        let back: Term = serde_json::from_str(&json).unwrap();
        assert_eq!(back, t);
    }
}
