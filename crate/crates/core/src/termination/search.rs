//! Backtracking over per-symbol parameter choices with early rule checks.

use std::collections::{BTreeMap, BTreeSet};

use crate::budget::{Budget, Exhausted};
use crate::term::{Name, Rule, Trs};

fn rule_symbols(r: &Rule) -> BTreeSet<Name> {
    let mut s = r.lhs.symbols();
    s.extend(r.rhs.symbols());
    s.into_keys().collect()
}

/// Orders symbols so that rules become checkable as early as possible:
/// fixed symbols first, then greedily the symbol completing most rules.
pub(crate) fn symbol_order(trs: &Trs, candidates: impl Fn(&Name) -> usize) -> Vec<Name> {
    let rule_syms: Vec<BTreeSet<Name>> = trs.rules().iter().map(rule_symbols).collect();
    let mut remaining: Vec<Name> = trs.signature().keys().cloned().collect();
    let mut placed: BTreeSet<Name> = BTreeSet::new();
    let mut order = Vec::new();
    while !remaining.is_empty() {
        let score = |f: &Name| {
            let completed = rule_syms
                .iter()
                .filter(|s| !s.is_subset(&placed) && s.iter().all(|g| g == f || placed.contains(g)))
                .count();
            let occurs = rule_syms.iter().filter(|s| s.contains(f)).count();
            (candidates(f) == 1, completed, occurs)
        };
        let (idx, _) = remaining
            .iter()
            .enumerate()
            .max_by(|(i, a), (j, b)| score(a).cmp(&score(b)).then(j.cmp(i)))
            .expect("nonempty");
        let f = remaining.remove(idx);
        placed.insert(f.clone());
        order.push(f);
    }
    order
}

/// Assigns candidates to symbols in `order`, checking each rule as soon as all
/// of its symbols are assigned. Returns the first complete assignment found.
pub(crate) fn backtrack<'a, C: Clone>(
    order: &[Name],
    trs: &Trs,
    candidates: impl Fn(&Name) -> Box<dyn Iterator<Item = C> + 'a>,
    check: impl Fn(&BTreeMap<Name, C>, &Rule) -> bool,
    budget: &mut Budget,
) -> Result<Option<BTreeMap<Name, C>>, Exhausted> {
    backtrack_with_leaf(order, trs, candidates, check, |_, _| Ok(true), budget)
}

/// Like [`backtrack`], with a final acceptance test on complete assignments.
pub(crate) fn backtrack_with_leaf<'a, C: Clone>(
    order: &[Name],
    trs: &Trs,
    candidates: impl Fn(&Name) -> Box<dyn Iterator<Item = C> + 'a>,
    check: impl Fn(&BTreeMap<Name, C>, &Rule) -> bool,
    mut leaf: impl FnMut(&BTreeMap<Name, C>, &mut Budget) -> Result<bool, Exhausted>,
    budget: &mut Budget,
) -> Result<Option<BTreeMap<Name, C>>, Exhausted> {
    let rule_syms: Vec<BTreeSet<Name>> = trs.rules().iter().map(rule_symbols).collect();
    let mut due: Vec<Vec<usize>> = vec![Vec::new(); order.len()];
    for (ri, syms) in rule_syms.iter().enumerate() {
        let last = syms
            .iter()
            .map(|f| order.iter().position(|g| g == f).expect("rule symbol in signature"))
            .max();
        match last {
            Some(k) => due[k].push(ri),
            // A rule without symbols cannot exist (lhs is not a variable).
            None => unreachable!(),
        }
    }
    let mut assign = BTreeMap::new();
    let ok = go(0, order, &candidates, &due, trs, &check, &mut leaf, &mut assign, budget)?;
    Ok(ok.then_some(assign))
}

#[allow(clippy::too_many_arguments)]
fn go<'a, C: Clone>(
    k: usize,
    order: &[Name],
    cands: &impl Fn(&Name) -> Box<dyn Iterator<Item = C> + 'a>,
    due: &[Vec<usize>],
    trs: &Trs,
    check: &impl Fn(&BTreeMap<Name, C>, &Rule) -> bool,
    leaf: &mut impl FnMut(&BTreeMap<Name, C>, &mut Budget) -> Result<bool, Exhausted>,
    assign: &mut BTreeMap<Name, C>,
    budget: &mut Budget,
) -> Result<bool, Exhausted> {
    if k == order.len() {
        return leaf(assign, budget);
    }
    for c in cands(&order[k]) {
        budget.tick()?;
        assign.insert(order[k].clone(), c);
        if due[k].iter().all(|&ri| check(assign, &trs.rules()[ri]))
            && go(k + 1, order, cands, due, trs, check, leaf, assign, budget)?
        {
            return Ok(true);
        }
    }
    assign.remove(&order[k]);
    Ok(false)
}
