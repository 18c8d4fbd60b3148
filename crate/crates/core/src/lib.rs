//! Term rewriting analysis: parsing, rewriting under strategies, critical
//! pairs, termination and confluence provers, Knuth–Bendix completion,
//! strategy annotations and derivational complexity.

pub mod annotation;
pub mod budget;
pub mod completion;
pub mod complexity;
pub mod confluence;
pub mod critical;
pub mod parse;
pub mod report;
pub mod rewrite;
pub mod term;
pub mod termination;

pub use parse::{parse_problem, parse_term, print_problem, print_term, print_trs, ParseError, ProblemFile};
pub use rewrite::{normalize, reachable, redexes, step, NormalizeResult, Outcome, Redex, Strategy};
pub use term::{Equation, Name, Position, Rule, Signature, Substitution, Term, TermError, Trs};
