//! Matrix interpretations over ℕ^d with the first component as the
//! well-founded measure.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use super::search::{backtrack, symbol_order};
use super::{RuleEvidence, Template, TerminationError};
use crate::budget::{Budget, Exhausted};
use crate::term::{Name, Rule, Term, Trs};

pub type Matrix = Vec<Vec<u64>>;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct MatrixEntry {
    /// One `d×d` matrix per argument.
    pub matrices: Vec<Matrix>,
    pub constant: Vec<u64>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct MatrixInterpretation {
    pub dim: usize,
    pub symbols: BTreeMap<Name, MatrixEntry>,
}

/// `constant + Σ M_x·x` over vectors of naturals.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LinearForm {
    pub constant: Vec<u64>,
    pub coeffs: BTreeMap<Name, Matrix>,
}

fn identity(d: usize) -> Matrix {
    (0..d).map(|i| (0..d).map(|j| u64::from(i == j)).collect()).collect()
}

fn mat_mul(a: &Matrix, b: &Matrix) -> Option<Matrix> {
    let d = a.len();
    let mut out = vec![vec![0u64; d]; d];
    for i in 0..d {
        for j in 0..d {
            let mut s = 0u64;
            for (k, bk) in b.iter().enumerate() {
                s = s.checked_add(a[i][k].checked_mul(bk[j])?)?;
            }
            out[i][j] = s;
        }
    }
    Some(out)
}

fn mat_vec(a: &Matrix, v: &[u64]) -> Option<Vec<u64>> {
    a.iter()
        .map(|row| {
            row.iter()
                .zip(v)
                .try_fold(0u64, |s, (x, y)| s.checked_add(x.checked_mul(*y)?))
        })
        .collect()
}

fn add_into(a: &mut [u64], b: &[u64]) -> Option<()> {
    for (x, y) in a.iter_mut().zip(b) {
        *x = x.checked_add(*y)?;
    }
    Some(())
}

fn geq(a: &Matrix, b: &Matrix) -> bool {
    a.iter().zip(b).all(|(r, s)| r.iter().zip(s).all(|(x, y)| x >= y))
}

fn show_vec(v: &[u64]) -> String {
    let parts: Vec<String> = v.iter().map(u64::to_string).collect();
    format!("[{}]", parts.join(","))
}

fn show_mat(m: &Matrix) -> String {
    let rows: Vec<String> = m.iter().map(|r| show_vec(r)).collect();
    format!("[{}]", rows.join(","))
}

impl std::fmt::Display for LinearForm {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        for (x, m) in &self.coeffs {
            write!(f, "{}{} + ", show_mat(m), x)?;
        }
        f.write_str(&show_vec(&self.constant))
    }
}

fn interpret_in(symbols: &BTreeMap<Name, MatrixEntry>, d: usize, t: &Term) -> Result<LinearForm, TerminationError> {
    match t {
        Term::Var(x) => Ok(LinearForm {
            constant: vec![0; d],
            coeffs: BTreeMap::from([(x.clone(), identity(d))]),
        }),
        Term::App(f, args) => {
            let e = symbols
                .get(f)
                .ok_or_else(|| TerminationError::MissingSymbol(f.to_string()))?;
            if e.matrices.len() != args.len() {
                return Err(TerminationError::MissingSymbol(format!("{f}/{}", args.len())));
            }
            let mut acc = LinearForm {
                constant: e.constant.clone(),
                coeffs: BTreeMap::new(),
            };
            for (a, m) in args.iter().zip(&e.matrices) {
                let sub = interpret_in(symbols, d, a)?;
                let c = mat_vec(m, &sub.constant).ok_or(TerminationError::Overflow)?;
                add_into(&mut acc.constant, &c).ok_or(TerminationError::Overflow)?;
                for (x, mx) in &sub.coeffs {
                    let p = mat_mul(m, mx).ok_or(TerminationError::Overflow)?;
                    match acc.coeffs.get_mut(x) {
                        None => {
                            acc.coeffs.insert(x.clone(), p);
                        }
                        Some(q) => {
                            for (qr, pr) in q.iter_mut().zip(&p) {
                                add_into(qr, pr).ok_or(TerminationError::Overflow)?;
                            }
                        }
                    }
                }
            }
            Ok(acc)
        }
    }
}

/// Weak decrease in every entry, strict decrease in the first constant component.
fn decreasing(l: &LinearForm, r: &LinearForm) -> bool {
    l.constant[0] > r.constant[0]
        && l.constant.iter().zip(&r.constant).all(|(a, b)| a >= b)
        && r.coeffs.iter().all(|(x, m)| l.coeffs.get(x).is_some_and(|lm| geq(lm, m)))
}

fn rule_oriented(symbols: &BTreeMap<Name, MatrixEntry>, d: usize, r: &Rule) -> bool {
    match (interpret_in(symbols, d, &r.lhs), interpret_in(symbols, d, &r.rhs)) {
        (Ok(l), Ok(rh)) => decreasing(&l, &rh),
        _ => false,
    }
}

impl MatrixInterpretation {
    pub fn interpret(&self, t: &Term) -> Result<LinearForm, TerminationError> {
        interpret_in(&self.symbols, self.dim, t)
    }

    fn well_formed(&self) -> bool {
        let d = self.dim;
        self.symbols.values().all(|e| {
            e.constant.len() == d
                && e.matrices
                    .iter()
                    .all(|m| m.len() == d && m.iter().all(|r| r.len() == d) && m[0][0] >= 1)
        })
    }

    pub fn describe(&self) -> Vec<String> {
        self.symbols
            .iter()
            .map(|(f, e)| {
                let mut parts: Vec<String> = e
                    .matrices
                    .iter()
                    .enumerate()
                    .map(|(i, m)| format!("{}x{}", show_mat(m), i + 1))
                    .collect();
                parts.push(show_vec(&e.constant));
                let args: Vec<String> = (1..=e.matrices.len()).map(|i| format!("x{i}")).collect();
                if args.is_empty() {
                    format!("{f} = {}", parts.join(" + "))
                } else {
                    format!("{f}({}) = {}", args.join(","), parts.join(" + "))
                }
            })
            .collect()
    }
}

/// True iff the interpretation is well formed, monotone in the first
/// component, and decreases every rule.
pub fn check_matrix(i: &MatrixInterpretation, trs: &Trs) -> Result<bool, TerminationError> {
    if i.dim == 0 {
        return Ok(false);
    }
    for (f, n) in trs.signature() {
        match i.symbols.get(f) {
            None => return Err(TerminationError::MissingSymbol(f.to_string())),
            Some(e) if e.matrices.len() != *n => return Err(TerminationError::MissingSymbol(format!("{f}/{n}"))),
            _ => {}
        }
    }
    if !i.well_formed() {
        return Ok(false);
    }
    for r in trs.rules() {
        if !decreasing(&i.interpret(&r.lhs)?, &i.interpret(&r.rhs)?) {
            return Ok(false);
        }
    }
    Ok(true)
}

pub fn matrix_evidence(i: &MatrixInterpretation, trs: &Trs) -> Vec<RuleEvidence> {
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

/// Lazily enumerates entries for an `n`-ary symbol with all values `≤ bound`,
/// top-left matrix entries `≥ 1`, and the template's first-component entries fixed.
fn entry_candidates(n: usize, d: usize, bound: u64, fixed: Vec<Option<u64>>) -> impl Iterator<Item = MatrixEntry> {
    // Digit layout: matrices row-major, then the constant vector.
    let len = n * d * d + d;
    let ranges: Vec<(u64, u64)> = (0..len)
        .map(|k| {
            let pin = if k < n * d * d {
                (k % (d * d) == 0).then(|| fixed.get(k / (d * d) + 1).copied().flatten()).flatten()
            } else if k == n * d * d {
                fixed.first().copied().flatten()
            } else {
                None
            };
            match pin {
                Some(v) => (v, v),
                None if k < n * d * d && k % (d * d) == 0 => (1, bound.max(1)),
                None => (0, bound),
            }
        })
        .collect();
    let mut digits: Option<Vec<u64>> = Some(ranges.iter().map(|r| r.0).collect());
    std::iter::from_fn(move || {
        let cur = digits.clone()?;
        // advance odometer, last digit fastest
        let mut next = cur.clone();
        let mut k = len;
        digits = loop {
            if k == 0 {
                break None;
            }
            k -= 1;
            if next[k] < ranges[k].1 {
                next[k] += 1;
                break Some(next);
            }
            next[k] = ranges[k].0;
        };
        let matrices = (0..n)
            .map(|i| {
                (0..d)
                    .map(|r| cur[i * d * d + r * d..i * d * d + (r + 1) * d].to_vec())
                    .collect()
            })
            .collect();
        Some(MatrixEntry {
            matrices,
            constant: cur[n * d * d..].to_vec(),
        })
    })
}

/// Searches a `d`-dimensional interpretation, deepening the entry bound from 1 to `bound`.
pub fn prove_matrix(
    trs: &Trs,
    d: usize,
    bound: u64,
    template: &Template,
    budget: &mut Budget,
) -> Result<Option<MatrixInterpretation>, Exhausted> {
    if d == 0 {
        return Ok(None);
    }
    let sig = trs.signature().clone();
    for b in 1..=bound.max(1) {
        let sig2 = sig.clone();
        let cands = move |f: &Name| -> Box<dyn Iterator<Item = MatrixEntry>> {
            let n = sig2[f];
            Box::new(entry_candidates(n, d, b, template.poly_entries(f, n)))
        };
        let count = |f: &Name| if template.poly_entries(f, sig[f]).iter().all(Option::is_some) && d == 1 { 1 } else { 2 };
        let order = symbol_order(trs, count);
        let found = backtrack(
            &order,
            trs,
            cands,
            |assign: &BTreeMap<Name, MatrixEntry>, r: &Rule| rule_oriented(assign, d, r),
            budget,
        )?;
        if let Some(symbols) = found {
            return Ok(Some(MatrixInterpretation { dim: d, symbols }));
        }
    }
    Ok(None)
}
