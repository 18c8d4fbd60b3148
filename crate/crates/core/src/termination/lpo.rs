//! The lexicographic path order.

use serde::{Deserialize, Serialize};

use super::precedence::{search_precedence, Precedence};
use super::{RuleEvidence, Template};
use crate::budget::{Budget, Exhausted};
use crate::term::{Term, Trs};

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct LpoCertificate {
    pub precedence: Precedence,
}

/// `s >lpo t`.
pub fn lpo_gt(prec: &Precedence, s: &Term, t: &Term) -> bool {
    let Term::App(f, ss) = s else { return false };
    if let Term::Var(x) = t {
        return s.contains_var(x);
    }
    if ss.iter().any(|si| si == t || lpo_gt(prec, si, t)) {
        return true;
    }
    let Term::App(g, ts) = t else { unreachable!() };
    if prec.gt(f, g) {
        return ts.iter().all(|tj| lpo_gt(prec, s, tj));
    }
    if f == g && ss.len() == ts.len() {
        for (i, (si, ti)) in ss.iter().zip(ts.iter()).enumerate() {
            if si == ti {
                continue;
            }
            return lpo_gt(prec, si, ti) && ts[i + 1..].iter().all(|tj| lpo_gt(prec, s, tj));
        }
    }
    false
}

pub fn check_lpo(cert: &LpoCertificate, trs: &Trs) -> bool {
    trs.rules().iter().all(|r| lpo_gt(&cert.precedence, &r.lhs, &r.rhs))
}

pub fn lpo_evidence(cert: &LpoCertificate, trs: &Trs) -> Vec<RuleEvidence> {
    trs.rules()
        .iter()
        .enumerate()
        .map(|(k, r)| RuleEvidence {
            rule: trs.rule_label(k),
            text: r.to_string(),
            lhs: r.lhs.to_string(),
            rhs: r.rhs.to_string(),
            relation: if lpo_gt(&cert.precedence, &r.lhs, &r.rhs) { ">lpo" } else { "not >lpo" }.into(),
        })
        .collect()
}

/// First total precedence (lexicographically) consistent with the template
/// that orients every rule.
pub fn prove_lpo(trs: &Trs, template: &Template, budget: &mut Budget) -> Result<Option<LpoCertificate>, Exhausted> {
    let found = search_precedence(
        trs,
        &template.precedence,
        None,
        &|p, r| lpo_gt(p, &r.lhs, &r.rhs),
        budget,
    )?;
    Ok(found.map(|precedence| LpoCertificate { precedence }))
}
