//! The Knuth–Bendix order.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use super::precedence::{search_precedence, Precedence};
use super::search::{backtrack_with_leaf, symbol_order};
use super::{RuleEvidence, Template};
use crate::budget::{Budget, Exhausted};
use crate::term::{Name, Rule, Term, Trs};

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct KboCertificate {
    pub weights: BTreeMap<Name, u64>,
    pub w0: u64,
    pub precedence: Precedence,
}

impl KboCertificate {
    pub fn weight(&self, t: &Term) -> u64 {
        weight_in(&self.weights, self.w0, t)
    }

    /// `w0 > 0`, constants weigh at least `w0`, and a unary symbol of weight
    /// zero is the greatest symbol of the signature.
    pub fn is_admissible(&self, sig: &BTreeMap<Name, usize>) -> bool {
        self.w0 >= 1
            && sig.iter().all(|(f, &n)| {
                let Some(&w) = self.weights.get(f) else { return false };
                (n != 0 || w >= self.w0)
                    && (n != 1 || w != 0 || sig.keys().all(|g| g == f || self.precedence.gt(f, g)))
            })
    }
}

fn weight_in(weights: &BTreeMap<Name, u64>, w0: u64, t: &Term) -> u64 {
    match t {
        Term::Var(_) => w0,
        Term::App(f, args) => {
            weights.get(f).copied().unwrap_or(0) + args.iter().map(|a| weight_in(weights, w0, a)).sum::<u64>()
        }
    }
}

fn variable_condition(s: &Term, t: &Term) -> bool {
    let sc = s.var_counts();
    t.var_counts().iter().all(|(x, n)| sc.get(x).copied().unwrap_or(0) >= *n)
}

/// `s >kbo t`.
pub fn kbo_gt(cert: &KboCertificate, s: &Term, t: &Term) -> bool {
    if !variable_condition(s, t) {
        return false;
    }
    let (ws, wt) = (cert.weight(s), cert.weight(t));
    if ws != wt {
        return ws > wt;
    }
    match (s, t) {
        (Term::Var(_), _) => false,
        (Term::App(..), Term::Var(x)) => {
            // s = f^k(x) for a unary f and k ≥ 1
            let mut cur = s;
            loop {
                match cur {
                    Term::App(_, a) if a.len() == 1 => cur = &a[0],
                    Term::Var(y) => return y == x && cur != s,
                    _ => return false,
                }
            }
        }
        (Term::App(f, ss), Term::App(g, ts)) => {
            if f != g {
                return cert.precedence.gt(f, g);
            }
            match ss.iter().zip(ts.iter()).find(|(a, b)| a != b) {
                Some((a, b)) => kbo_gt(cert, a, b),
                None => false,
            }
        }
    }
}

pub fn check_kbo(cert: &KboCertificate, trs: &Trs) -> bool {
    cert.is_admissible(trs.signature()) && trs.rules().iter().all(|r| kbo_gt(cert, &r.lhs, &r.rhs))
}

pub fn kbo_evidence(cert: &KboCertificate, trs: &Trs) -> Vec<RuleEvidence> {
    trs.rules()
        .iter()
        .enumerate()
        .map(|(k, r)| RuleEvidence {
            rule: trs.rule_label(k),
            text: r.to_string(),
            lhs: format!("weight {}", cert.weight(&r.lhs)),
            rhs: format!("weight {}", cert.weight(&r.rhs)),
            relation: if kbo_gt(cert, &r.lhs, &r.rhs) { ">kbo" } else { "not >kbo" }.into(),
        })
        .collect()
}

/// Searches weights in `1..=max_weight` then `0` per symbol (template values
/// fixed), and for each weight assignment a precedence.
pub fn prove_kbo(
    trs: &Trs,
    max_weight: u64,
    template: &Template,
    budget: &mut Budget,
) -> Result<Option<KboCertificate>, Exhausted> {
    let w0 = template.w0.unwrap_or(1).max(1);
    let sig = trs.signature().clone();
    let domain = |f: &Name| -> Vec<u64> {
        if let Some(&w) = template.weights.get(f) {
            return vec![w];
        }
        if sig[f] == 0 {
            (w0..=max_weight.max(w0)).collect()
        } else {
            (1..=max_weight).chain(std::iter::once(0)).collect()
        }
    };
    let order = symbol_order(trs, |f| domain(f).len());
    let weak = |assign: &BTreeMap<Name, u64>, r: &Rule| {
        variable_condition(&r.lhs, &r.rhs) && weight_in(assign, w0, &r.lhs) >= weight_in(assign, w0, &r.rhs)
    };
    let mut found: Option<KboCertificate> = None;
    backtrack_with_leaf(
        &order,
        trs,
        |f| Box::new(domain(f).into_iter()),
        weak,
        |weights, budget| {
            let zero_unary: Vec<&Name> = weights
                .iter()
                .filter(|(f, w)| **w == 0 && sig[*f] == 1)
                .map(|(f, _)| f)
                .collect();
            if zero_unary.len() > 1 {
                return Ok(false);
            }
            let mut cert = KboCertificate {
                weights: weights.clone(),
                w0,
                precedence: Precedence::default(),
            };
            let check = |p: &Precedence, r: &Rule| {
                let c = KboCertificate {
                    weights: weights.clone(),
                    w0,
                    precedence: p.clone(),
                };
                kbo_gt(&c, &r.lhs, &r.rhs)
            };
            match search_precedence(trs, &template.precedence, zero_unary.first().copied(), &check, budget)? {
                Some(p) => {
                    cert.precedence = p;
                    found = Some(cert);
                    Ok(true)
                }
                None => Ok(false),
            }
        },
        budget,
    )?;
    Ok(found)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::parse::parse_problem;

    fn trs(s: &str) -> Trs {
        parse_problem(s).unwrap().trs().unwrap()
    }

    #[test]
    fn beans_unit_weights() {
        let r1 = trs("(VAR x)(RULES b(b(x)) -> w(x)  w(w(x)) -> w(x)  b(w(x)) -> b(x)  w(b(x)) -> b(x))");
        let cert = prove_kbo(&r1, 3, &Template::default(), &mut Budget::unlimited()).unwrap().unwrap();
        assert_eq!(cert.w0, 1);
        assert!(cert.weights.values().all(|&w| w == 1));
        assert!(check_kbo(&cert, &r1));
    }

    #[test]
    fn variable_condition_blocks_duplication() {
        let cert = KboCertificate {
            weights: BTreeMap::from([(Name::from("f"), 5), (Name::from("g"), 0)]),
            w0: 1,
            precedence: Precedence::new(&["f", "g"]),
        };
        let s = Term::app("f", vec![Term::var("x")]);
        let t = Term::app("g", vec![Term::var("x"), Term::var("x")]);
        assert!(!kbo_gt(&cert, &s, &t));
        let cyc = trs("(VAR)(RULES a -> b  b -> a)");
        assert_eq!(prove_kbo(&cyc, 3, &Template::default(), &mut Budget::unlimited()), Ok(None));
    }

    #[test]
    fn zero_weight_unary_must_be_greatest() {
        let r = trs("(VAR x)(RULES f(g(x)) -> g(f(x)))");
        let cert = KboCertificate {
            weights: BTreeMap::from([(Name::from("f"), 0), (Name::from("g"), 1)]),
            w0: 1,
            precedence: Precedence::new(&["g", "f"]),
        };
        assert!(!cert.is_admissible(r.signature()));
        let found = prove_kbo(&r, 2, &Template::default(), &mut Budget::unlimited()).unwrap().unwrap();
        assert!(check_kbo(&found, &r));
    }

    #[test]
    fn unary_tower_over_variable() {
        let cert = KboCertificate {
            weights: BTreeMap::from([(Name::from("f"), 0)]),
            w0: 1,
            precedence: Precedence::new(&["f"]),
        };
        let s = Term::app("f", vec![Term::app("f", vec![Term::var("x")])]);
        assert!(kbo_gt(&cert, &s, &Term::var("x")));
        assert!(!kbo_gt(&cert, &Term::var("x"), &Term::var("x")));
    }
}
