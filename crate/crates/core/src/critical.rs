//! Critical overlaps, critical pairs and bounded joinability.

use serde::Serialize;

use crate::rewrite::{Exploration, RewriteError, StepRecord};
use crate::term::{canonical_rename, rename_apart, unify, variable_pool, Position, Rule, Substitution, Term, Trs};

/// Default depth bound for joinability checks.
pub const DEFAULT_JOIN_DEPTH: usize = 8;

/// `inner.lhs` unifies with `outer.lhs|_position` (rules renamed apart).
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct Overlap {
    pub inner: usize,
    pub outer: usize,
    pub inner_id: String,
    pub outer_id: String,
    pub position: Position,
    pub mgu: Substitution,
    /// The renamed copies the unifier refers to.
    #[serde(skip)]
    pub inner_rule: Rule,
    #[serde(skip)]
    pub outer_rule: Rule,
}

/// `left = outer.lhsσ[inner.rhsσ]_p`, `right = outer.rhsσ`, `peak = outer.lhsσ`.
///
/// The three terms are jointly renamed to conventional variable names.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct CriticalPair {
    #[serde(serialize_with = "crate::report::term_as_string")]
    pub left: Term,
    #[serde(serialize_with = "crate::report::term_as_string")]
    pub right: Term,
    #[serde(serialize_with = "crate::report::term_as_string")]
    pub peak: Term,
    pub overlap: Overlap,
}

impl CriticalPair {
    pub fn is_trivial(&self) -> bool {
        self.left == self.right
    }
}

/// Critical pairs of `outer` with `inner` overlapping into it. Indices and
/// labels are only recorded in the result.
pub fn overlaps_between(
    inner: (usize, &str, &Rule),
    outer: (usize, &str, &Rule),
    pool: &[&str],
) -> Vec<CriticalPair> {
    let (ri, ro) = rename_apart(inner.2, outer.2);
    let mut out = Vec::new();
    for p in ro.lhs.fun_positions() {
        if p.is_root() && (inner.0 == outer.0 || inner.2.is_variant_of(outer.2)) {
            continue;
        }
        let sub = ro.lhs.get(&p).expect("function position");
        let Some(mgu) = unify(sub, &ri.lhs) else { continue };
        let peak = mgu.apply(&ro.lhs);
        let left = peak
            .replace_at(&p, mgu.apply(&ri.rhs))
            .expect("overlap position is valid");
        let right = mgu.apply(&ro.rhs);
        let mut named = canonical_rename(&[&left, &right, &peak], pool).into_iter();
        let (left, right, peak) = (named.next().unwrap(), named.next().unwrap(), named.next().unwrap());
        out.push(CriticalPair {
            left,
            right,
            peak,
            overlap: Overlap {
                inner: inner.0,
                outer: outer.0,
                inner_id: inner.1.to_string(),
                outer_id: outer.1.to_string(),
                position: p,
                mgu,
                inner_rule: ri.clone(),
                outer_rule: ro.clone(),
            },
        });
    }
    out
}

/// All critical pairs of a labelled rule list, ordered by (outer rule, position, inner rule).
pub fn critical_pairs_of(rules: &[(String, Rule)], pool: &[&str]) -> Vec<CriticalPair> {
    let mut all = Vec::new();
    for (o, (oid, outer)) in rules.iter().enumerate() {
        for (i, (iid, inner)) in rules.iter().enumerate() {
            all.extend(overlaps_between((i, iid, inner), (o, oid, outer), pool));
        }
    }
    all.sort_by(|a, b| {
        (a.overlap.outer, &a.overlap.position, a.overlap.inner)
            .cmp(&(b.overlap.outer, &b.overlap.position, b.overlap.inner))
    });
    all
}

pub fn critical_pairs(trs: &Trs) -> Vec<CriticalPair> {
    let pool = variable_pool(trs.signature());
    let pool: Vec<&str> = pool.iter().map(String::as_str).collect();
    let labelled: Vec<(String, Rule)> = trs
        .rules()
        .iter()
        .enumerate()
        .map(|(i, r)| (trs.rule_label(i), r.clone()))
        .collect();
    critical_pairs_of(&labelled, &pool)
}

/// Non-overlapping and left-linear.
pub fn is_orthogonal(trs: &Trs) -> bool {
    trs.rules().iter().all(Rule::is_left_linear) && critical_pairs(trs).is_empty()
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
#[serde(tag = "status", rename_all = "snake_case", rename_all_fields = "camelCase")]
pub enum Joinability {
    Joined {
        #[serde(serialize_with = "crate::report::term_as_string")]
        witness: Term,
        left_steps: Vec<StepRecord>,
        right_steps: Vec<StepRecord>,
    },
    Unknown,
}

impl Joinability {
    pub fn is_joined(&self) -> bool {
        matches!(self, Joinability::Joined { .. })
    }
}

/// Looks for a common reduct of `s` and `t` within `depth` steps on each side.
/// The witness minimizes the combined derivation length.
pub fn joinable(s: &Term, t: &Term, trs: &Trs, depth: usize, cap: usize) -> Result<Joinability, RewriteError> {
    let es = Exploration::run(s, trs, depth, cap)?;
    let et = Exploration::run(t, trs, depth, cap)?;
    let best = es
        .terms()
        .iter()
        .filter_map(|u| Some((es.distance(u)? + et.distance(u)?, u)))
        .min_by_key(|(d, _)| *d);
    Ok(match best {
        None => Joinability::Unknown,
        Some((_, u)) => Joinability::Joined {
            witness: u.clone(),
            left_steps: es.path_to(u, trs).unwrap_or_default(),
            right_steps: et.path_to(u, trs).unwrap_or_default(),
        },
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::parse::parse_problem;
    use crate::rewrite::DEFAULT_NODE_CAP;
    use crate::term::is_variant;

    fn beans1() -> Trs {
        parse_problem(
            "(VAR x)(RULES b(b(x)) -> w(x)  w(w(x)) -> w(x)  b(w(x)) -> b(x)  w(b(x)) -> b(x))",
        )
        .unwrap()
        .trs()
        .unwrap()
    }

    #[test]
    fn bean_critical_pairs() {
        let cps = critical_pairs(&beans1());
        assert_eq!(cps.len(), 8);
        for cp in &cps {
            assert!(!cp.overlap.position.is_root());
        }
        let ww: Vec<_> = cps
            .iter()
            .filter(|cp| cp.overlap.inner == 1 && cp.overlap.outer == 1)
            .collect();
        assert_eq!(ww.len(), 1);
        assert_eq!(ww[0].left.to_string(), "w(w(x))");
        assert_eq!(ww[0].right.to_string(), "w(w(x))");
        assert_eq!(ww[0].peak.to_string(), "w(w(w(x)))");
    }

    #[test]
    fn cp_invariant_holds_up_to_renaming() {
        for cp in critical_pairs(&beans1()) {
            let o = &cp.overlap;
            let peak = o.mgu.apply(&o.outer_rule.lhs);
            let left = peak.replace_at(&o.position, o.mgu.apply(&o.inner_rule.rhs)).unwrap();
            let right = o.mgu.apply(&o.outer_rule.rhs);
            let pack = |a: &Term, b: &Term, c: &Term| Term::app("t", vec![a.clone(), b.clone(), c.clone()]);
            assert!(is_variant(&pack(&left, &right, &peak), &pack(&cp.left, &cp.right, &cp.peak)));
        }
    }

    #[test]
    fn root_overlaps_between_distinct_rules() {
        let ars = parse_problem("(VAR)(RULES a -> b  b -> a  a -> c  b -> d)").unwrap().trs().unwrap();
        let cps = critical_pairs(&ars);
        let shown: Vec<String> = cps.iter().map(|c| format!("{} {}", c.left, c.right)).collect();
        assert_eq!(shown, vec!["c b", "d a", "b c", "a d"]);
    }

    #[test]
    fn joinability() {
        let r1 = beans1();
        let e = Term::constant("e");
        let t1 = Term::word(&["w", "b"], e.clone());
        let t2 = Term::word(&["b", "w"], e.clone());
        match joinable(&t1, &t2, &r1, 1, DEFAULT_NODE_CAP).unwrap() {
            Joinability::Joined { witness, left_steps, right_steps } => {
                assert_eq!(witness, Term::word(&["b"], e.clone()));
                assert_eq!((left_steps.len(), right_steps.len()), (1, 1));
            }
            Joinability::Unknown => panic!("expected joinable"),
        }
        assert!(joinable(&t1, &t1, &r1, 0, 10).unwrap().is_joined());
        let g = parse_problem("(VAR x)(RULES g(g(x)) -> g(g(g(c)))  g(g(g(c))) -> c)")
            .unwrap()
            .trs()
            .unwrap();
        let gc = Term::app("g", vec![Term::constant("c")]);
        assert_eq!(
            joinable(&gc, &Term::constant("c"), &g, 5, DEFAULT_NODE_CAP).unwrap(),
            Joinability::Unknown
        );
    }
}
