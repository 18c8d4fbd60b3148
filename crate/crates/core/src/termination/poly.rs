//! Linear polynomial interpretations over ℕ.

use std::collections::BTreeMap;
use std::fmt;

use serde::{Deserialize, Serialize};

use super::search::{backtrack, symbol_order};
use super::{RuleEvidence, Template, TerminationError};
use crate::budget::{Budget, Exhausted};
use crate::term::{Name, Rule, Term, Trs};

/// `c0 + Σ ci·xi`.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct LinearPoly {
    pub constant: u64,
    pub coeffs: BTreeMap<Name, u64>,
}

impl LinearPoly {
    pub fn var(x: &Name) -> Self {
        LinearPoly {
            constant: 0,
            coeffs: BTreeMap::from([(x.clone(), 1)]),
        }
    }

    fn scaled(&self, k: u64) -> Option<LinearPoly> {
        let mut coeffs = BTreeMap::new();
        for (x, c) in &self.coeffs {
            let v = c.checked_mul(k)?;
            if v != 0 {
                coeffs.insert(x.clone(), v);
            }
        }
        Some(LinearPoly {
            constant: self.constant.checked_mul(k)?,
            coeffs,
        })
    }

    fn add_assign(&mut self, other: &LinearPoly) -> Option<()> {
        self.constant = self.constant.checked_add(other.constant)?;
        for (x, c) in &other.coeffs {
            let e = self.coeffs.entry(x.clone()).or_insert(0);
            *e = e.checked_add(*c)?;
        }
        Some(())
    }

    pub fn coeff(&self, x: &str) -> u64 {
        self.coeffs.get(x).copied().unwrap_or(0)
    }

    /// Absolute positiveness of `self - other - 1`: implies `self > other` on ℕ.
    pub fn strictly_dominates(&self, other: &LinearPoly) -> bool {
        self.constant > other.constant && self.weakly_dominates_vars(other)
    }

    pub fn weakly_dominates(&self, other: &LinearPoly) -> bool {
        self.constant >= other.constant && self.weakly_dominates_vars(other)
    }

    fn weakly_dominates_vars(&self, other: &LinearPoly) -> bool {
        other.coeffs.iter().all(|(x, c)| self.coeff(x) >= *c)
    }

    pub fn eval(&self, env: &dyn Fn(&str) -> u64) -> u128 {
        self.coeffs
            .iter()
            .map(|(x, c)| *c as u128 * env(x) as u128)
            .sum::<u128>()
            + self.constant as u128
    }
}

impl fmt::Display for LinearPoly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut parts: Vec<String> = self
            .coeffs
            .iter()
            .filter(|(_, c)| **c != 0)
            .map(|(x, c)| if *c == 1 { x.to_string() } else { format!("{c}{x}") })
            .collect();
        if self.constant != 0 || parts.is_empty() {
            parts.push(self.constant.to_string());
        }
        f.write_str(&parts.join(" + "))
    }
}

/// `f(x1..xn) ↦ c0 + c1·x1 + … + cn·xn`, stored as `[c0, c1, …, cn]`.
#[derive(Debug, Clone, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct PolyInterpretation {
    pub symbols: BTreeMap<Name, Vec<u64>>,
}

impl PolyInterpretation {
    pub fn new<I: IntoIterator<Item = (&'static str, Vec<u64>)>>(entries: I) -> Self {
        PolyInterpretation {
            symbols: entries.into_iter().map(|(f, c)| (Name::from(f), c)).collect(),
        }
    }

    pub fn interpret(&self, t: &Term) -> Result<LinearPoly, TerminationError> {
        interpret_in(&self.symbols, t)
    }

    /// Strict monotonicity: every argument coefficient is at least 1.
    pub fn is_monotone(&self) -> bool {
        self.symbols.values().all(|cs| cs[1..].iter().all(|&c| c >= 1))
    }

    pub fn describe(&self) -> Vec<String> {
        self.symbols
            .iter()
            .map(|(f, cs)| {
                let vars: Vec<String> = (1..cs.len()).map(|i| format!("x{i}")).collect();
                let poly = LinearPoly {
                    constant: cs[0],
                    coeffs: vars
                        .iter()
                        .zip(&cs[1..])
                        .map(|(x, c)| (Name::from(x.as_str()), *c))
                        .collect(),
                };
                if vars.is_empty() {
                    format!("{f} = {poly}")
                } else {
                    format!("{f}({}) = {poly}", vars.join(","))
                }
            })
            .collect()
    }
}

fn interpret_in(symbols: &BTreeMap<Name, Vec<u64>>, t: &Term) -> Result<LinearPoly, TerminationError> {
    match t {
        Term::Var(x) => Ok(LinearPoly::var(x)),
        Term::App(f, args) => {
            let cs = symbols
                .get(f)
                .ok_or_else(|| TerminationError::MissingSymbol(f.to_string()))?;
            if cs.len() != args.len() + 1 {
                return Err(TerminationError::MissingSymbol(format!("{f}/{}", args.len())));
            }
            let mut acc = LinearPoly {
                constant: cs[0],
                coeffs: BTreeMap::new(),
            };
            for (a, c) in args.iter().zip(&cs[1..]) {
                let p = interpret_in(symbols, a)?.scaled(*c).ok_or(TerminationError::Overflow)?;
                acc.add_assign(&p).ok_or(TerminationError::Overflow)?;
            }
            Ok(acc)
        }
    }
}

fn rule_oriented(symbols: &BTreeMap<Name, Vec<u64>>, r: &Rule) -> bool {
    match (interpret_in(symbols, &r.lhs), interpret_in(symbols, &r.rhs)) {
        (Ok(l), Ok(rh)) => l.strictly_dominates(&rh),
        _ => false,
    }
}

/// True iff `I` is monotone and every rule decreases by absolute positiveness.
pub fn check_poly(i: &PolyInterpretation, trs: &Trs) -> Result<bool, TerminationError> {
    for (f, n) in trs.signature() {
        match i.symbols.get(f) {
            None => return Err(TerminationError::MissingSymbol(f.to_string())),
            Some(cs) if cs.len() != n + 1 => {
                return Err(TerminationError::MissingSymbol(format!("{f}/{n}")))
            }
            _ => {}
        }
    }
    if !i.is_monotone() {
        return Ok(false);
    }
    for r in trs.rules() {
        let l = i.interpret(&r.lhs)?;
        let rh = i.interpret(&r.rhs)?;
        if !l.strictly_dominates(&rh) {
            return Ok(false);
        }
    }
    Ok(true)
}

pub fn poly_evidence(i: &PolyInterpretation, trs: &Trs) -> Vec<RuleEvidence> {
    trs.rules()
        .iter()
        .enumerate()
        .map(|(k, r)| {
            let show = |t: &Term| i.interpret(t).map(|p| p.to_string()).unwrap_or_else(|e| e.to_string());
            RuleEvidence {
                rule: trs.rule_label(k),
                text: r.to_string(),
                lhs: show(&r.lhs),
                rhs: show(&r.rhs),
                relation: ">".into(),
            }
        })
        .collect()
}

/// Coefficient vectors `[c0, c1..cn]` with `c0 ∈ 0..=max`, `ci ∈ 1..=max`,
/// honouring fixed template entries, in lexicographic order of `(c1..cn, c0)`.
pub(crate) fn coefficient_candidates(arity: usize, max: u64, fixed: &[Option<u64>]) -> Vec<Vec<u64>> {
    let range = |k: usize| -> Vec<u64> {
        match fixed.get(k).copied().flatten() {
            Some(v) => vec![v],
            None if k == 0 => (0..=max).collect(),
            None => (1..=max).collect(),
        }
    };
    let mut out: Vec<Vec<u64>> = vec![Vec::new()];
    for k in (1..=arity).chain(std::iter::once(0)) {
        let r = range(k);
        out = out
            .into_iter()
            .flat_map(|prefix| {
                r.iter().map(move |v| {
                    let mut p = prefix.clone();
                    p.push(*v);
                    p
                })
            })
            .collect();
    }
    out.into_iter()
        .map(|v| {
            let mut cs = vec![v[arity]];
            cs.extend_from_slice(&v[..arity]);
            cs
        })
        .collect()
}

/// Searches a linear interpretation with coefficients bounded by `max`.
pub fn prove_poly(
    trs: &Trs,
    max: u64,
    template: &Template,
    budget: &mut Budget,
) -> Result<Option<PolyInterpretation>, Exhausted> {
    let sig = trs.signature();
    let cands: BTreeMap<Name, Vec<Vec<u64>>> = sig
        .iter()
        .map(|(f, &n)| {
            let fixed = template.poly_entries(f, n);
            (f.clone(), coefficient_candidates(n, max, &fixed))
        })
        .collect();
    let order = symbol_order(trs, |f| cands[f].len());
    let found = backtrack(
        &order,
        trs,
        |f| Box::new(cands[f].clone().into_iter()),
        |assign: &BTreeMap<Name, Vec<u64>>, r: &Rule| rule_oriented(assign, r),
        budget,
    )?;
    Ok(found.map(|symbols| PolyInterpretation { symbols }))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::parse::parse_problem;

    fn trs(s: &str) -> Trs {
        parse_problem(s).unwrap().trs().unwrap()
    }

    fn beans2() -> Trs {
        trs("(VAR x)(RULES b(b(x)) -> w(w(w(w(x))))  w(w(x)) -> w(x)  b(w(x)) -> w(w(w(b(x))))  w(b(x)) -> b(x))")
    }

    #[test]
    fn bean_interpretation() {
        let i = PolyInterpretation::new([("w", vec![1, 1]), ("b", vec![1, 4])]);
        assert_eq!(check_poly(&i, &beans2()), Ok(true));
        let ev = poly_evidence(&i, &beans2());
        assert_eq!((ev[0].lhs.as_str(), ev[0].rhs.as_str()), ("16x + 5", "x + 4"));
        assert_eq!((ev[3].lhs.as_str(), ev[3].rhs.as_str()), ("4x + 2", "4x + 1"));
        let weak = PolyInterpretation::new([("w", vec![1, 1]), ("b", vec![1, 1])]);
        assert_eq!(check_poly(&weak, &beans2()), Ok(false));
        assert_eq!(check_poly(&PolyInterpretation::default(), &Trs::empty()), Ok(true));
        assert!(matches!(
            check_poly(&PolyInterpretation::default(), &beans2()),
            Err(TerminationError::MissingSymbol(_))
        ));
    }

    #[test]
    fn search_with_template() {
        let t = Template::parse("b = 4*x1 + _").unwrap();
        let found = prove_poly(&beans2(), 5, &t, &mut Budget::unlimited()).unwrap().unwrap();
        assert_eq!(found.symbols["b"], vec![1, 4]);
        assert_eq!(found.symbols["w"], vec![1, 1]);
        assert_eq!(check_poly(&found, &beans2()), Ok(true));
    }

    #[test]
    fn search_failures() {
        let loop_ = trs("(VAR)(RULES a -> a)");
        assert_eq!(prove_poly(&loop_, 5, &Template::default(), &mut Budget::unlimited()), Ok(None));
        let r1 = trs("(VAR x)(RULES b(b(x)) -> w(x)  w(w(x)) -> w(x)  b(w(x)) -> b(x)  w(b(x)) -> b(x))");
        let found = prove_poly(&r1, 2, &Template::default(), &mut Budget::unlimited()).unwrap().unwrap();
        assert_eq!(check_poly(&found, &r1), Ok(true));
    }

    #[test]
    fn candidates_respect_ranges() {
        let c = coefficient_candidates(1, 2, &[]);
        assert_eq!(c, vec![vec![0, 1], vec![1, 1], vec![2, 1], vec![0, 2], vec![1, 2], vec![2, 2]]);
        let c = coefficient_candidates(1, 5, &[None, Some(4)]);
        assert_eq!(c.len(), 6);
        assert!(c.iter().all(|v| v[1] == 4));
    }
}
