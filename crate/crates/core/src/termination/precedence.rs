//! Total precedences on function symbols and their enumeration.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::budget::{Budget, Exhausted};
use crate::term::{Name, Rule, Trs};

/// A total strict order on symbols, stored greatest first.
#[derive(Debug, Clone, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(into = "Vec<Name>", from = "Vec<Name>")]
pub struct Precedence {
    order: Vec<Name>,
    rank: BTreeMap<Name, usize>,
}

impl From<Vec<Name>> for Precedence {
    fn from(order: Vec<Name>) -> Self {
        Precedence::new(&order)
    }
}

impl From<Precedence> for Vec<Name> {
    fn from(p: Precedence) -> Self {
        p.order
    }
}

impl Precedence {
    /// `order[0] > order[1] > …`
    pub fn new<S: AsRef<str>>(order: &[S]) -> Self {
        let order: Vec<Name> = order.iter().map(|s| Name::from(s.as_ref())).collect();
        let n = order.len();
        let rank = order.iter().enumerate().map(|(i, f)| (f.clone(), n - i)).collect();
        Precedence { order, rank }
    }

    pub fn gt(&self, f: &str, g: &str) -> bool {
        match (self.rank.get(f), self.rank.get(g)) {
            (Some(a), Some(b)) => a > b,
            _ => false,
        }
    }

    pub fn order(&self) -> &[Name] {
        &self.order
    }

    /// Adjacent facts `f > g` generating the order.
    pub fn facts(&self) -> Vec<(Name, Name)> {
        self.order.windows(2).map(|w| (w[0].clone(), w[1].clone())).collect()
    }

    pub fn contains(&self, f: &str) -> bool {
        self.rank.contains_key(f)
    }
}

impl fmt::Display for Precedence {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<&str> = self.order.iter().map(|s| &**s).collect();
        f.write_str(&parts.join(" > "))
    }
}

/// Closes `f > g` facts transitively; `None` if they are cyclic.
pub(crate) fn transitive_facts(facts: &[(Name, Name)]) -> Option<BTreeSet<(Name, Name)>> {
    let mut closure: BTreeSet<(Name, Name)> = facts.iter().cloned().collect();
    loop {
        let mut added = Vec::new();
        for (a, b) in &closure {
            for (c, d) in &closure {
                if b == c && !closure.contains(&(a.clone(), d.clone())) {
                    added.push((a.clone(), d.clone()));
                }
            }
        }
        if added.is_empty() {
            break;
        }
        closure.extend(added);
    }
    closure.iter().all(|(a, b)| a != b).then_some(closure)
}

/// Enumerates total precedences over the signature of `trs` in lexicographic
/// order (greatest symbol chosen first), consistent with `facts` and with
/// `top` placed first when given. Each rule is checked as soon as all its
/// symbols are placed. Returns the first precedence orienting every rule.
pub(crate) fn search_precedence(
    trs: &Trs,
    facts: &[(Name, Name)],
    top: Option<&Name>,
    check: &dyn Fn(&Precedence, &Rule) -> bool,
    budget: &mut Budget,
) -> Result<Option<Precedence>, Exhausted> {
    let Some(required) = transitive_facts(facts) else {
        return Ok(None);
    };
    let symbols: Vec<Name> = trs.signature().keys().cloned().collect();
    let rule_syms: Vec<BTreeSet<Name>> = trs
        .rules()
        .iter()
        .map(|r| {
            let mut s = r.lhs.symbols();
            s.extend(r.rhs.symbols());
            s.into_keys().collect()
        })
        .collect();
    let mut placed: Vec<Name> = Vec::new();
    let mut done = vec![false; trs.len()];
    let found = place(&symbols, &required, top, trs, &rule_syms, check, &mut placed, &mut done, budget)?;
    Ok(found.then(|| Precedence::new(&placed)))
}

#[allow(clippy::too_many_arguments)]
fn place(
    symbols: &[Name],
    required: &BTreeSet<(Name, Name)>,
    top: Option<&Name>,
    trs: &Trs,
    rule_syms: &[BTreeSet<Name>],
    check: &dyn Fn(&Precedence, &Rule) -> bool,
    placed: &mut Vec<Name>,
    done: &mut Vec<bool>,
    budget: &mut Budget,
) -> Result<bool, Exhausted> {
    if placed.len() == symbols.len() {
        return Ok(true);
    }
    for f in symbols {
        if placed.contains(f) {
            continue;
        }
        if placed.is_empty() && top.is_some_and(|t| t != f) {
            continue;
        }
        // every symbol required above f must already be placed
        if required.iter().any(|(a, b)| b == f && !placed.contains(a)) {
            continue;
        }
        budget.tick()?;
        placed.push(f.clone());
        // Unplaced symbols are below all placed ones, so ranking the prefix
        // is exact for rules whose symbols are all placed.
        let prefix = Precedence::new(placed);
        let newly: Vec<usize> = (0..rule_syms.len())
            .filter(|&i| !done[i] && rule_syms[i].iter().all(|g| prefix.contains(g)))
            .collect();
        if newly.iter().all(|&i| check(&prefix, &trs.rules()[i])) {
            for &i in &newly {
                done[i] = true;
            }
            if place(symbols, required, top, trs, rule_syms, check, placed, done, budget)? {
                return Ok(true);
            }
            for &i in &newly {
                done[i] = false;
            }
        }
        placed.pop();
    }
    Ok(false)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn order_queries() {
        let p = Precedence::new(&["f", "g", "h"]);
        assert!(p.gt("f", "h"));
        assert!(!p.gt("h", "f"));
        assert!(!p.gt("f", "f"));
        assert!(!p.gt("f", "zz"));
        assert_eq!(p.to_string(), "f > g > h");
        assert_eq!(p.facts().len(), 2);
    }

    #[test]
    fn cyclic_facts_rejected() {
        let f = Name::from("f");
        let g = Name::from("g");
        assert!(transitive_facts(&[(f.clone(), g.clone()), (g, f)]).is_none());
    }
}
