//! Shared serialization helpers for analysis reports.

use serde::Serializer;

use crate::term::Term;

/// Serializes a term in its concrete (prefix) syntax.
pub fn term_as_string<S: Serializer>(t: &Term, s: S) -> Result<S::Ok, S::Error> {
    s.collect_str(t)
}

/// Serializes a pair of terms as two strings.
pub fn pair_as_strings<S: Serializer>(p: &(Term, Term), s: S) -> Result<S::Ok, S::Error> {
    use serde::ser::SerializeTuple;
    let mut t = s.serialize_tuple(2)?;
    t.serialize_element(&p.0.to_string())?;
    t.serialize_element(&p.1.to_string())?;
    t.end()
}
