//! Reader and printer for the parenthesized `(VAR ...)(RULES ...)` problem format.
//!
//! ```text
//! problem := section+
//! section := "(" "VAR" ident* ")" | "(" "RULES" rule* ")" | "(" "EQUATIONS" eq* ")"
//!          | "(" "COMMENT" any ")" | "(" "THEORY" any ")"
//! rule    := [ident ":"] term "->" term
//! eq      := term "==" term
//! term    := ident | ident "(" term ("," term)* ")"
//! ```
//!
//! Identifiers are maximal runs of characters other than whitespace, `(`, `)`
//! and `,`; the separators `->` and `==` also end an identifier. An identifier
//! is a variable iff it is declared in a VAR section. THEORY sections are
//! rejected since rewriting modulo theories is not supported.

use std::collections::BTreeSet;
use std::fmt::Write as _;

use thiserror::Error;

use crate::term::{merge_symbols, Equation, Rule, Signature, Term, TermError, Trs};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ParseError {
    #[error("syntax error at {line}:{column}: {message}")]
    Syntax {
        line: usize,
        column: usize,
        message: String,
    },
    #[error("arity mismatch at {line}:{column}: {source}")]
    Arity {
        line: usize,
        column: usize,
        source: TermError,
    },
    #[error("unsupported theory ({theory}) at {line}:{column}: rewriting modulo theories is not supported")]
    UnsupportedTheory {
        theory: String,
        line: usize,
        column: usize,
    },
    #[error("invalid rule {rule} at line {line}: {source}")]
    InvalidRule {
        rule: String,
        line: usize,
        source: TermError,
    },
}

/// A parsed problem file.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct ProblemFile {
    pub variables: Vec<String>,
    pub rules: Vec<Rule>,
    pub equations: Vec<Equation>,
    pub comments: Vec<String>,
}

impl ProblemFile {
    pub fn trs(&self) -> Result<Trs, TermError> {
        Trs::new(self.rules.clone())
    }

    /// Symbols of rules and equations.
    pub fn signature(&self) -> Result<Signature, TermError> {
        let mut sig = Signature::new();
        for r in &self.rules {
            merge_symbols(&mut sig, &r.lhs)?;
            merge_symbols(&mut sig, &r.rhs)?;
        }
        for e in &self.equations {
            merge_symbols(&mut sig, &e.lhs)?;
            merge_symbols(&mut sig, &e.rhs)?;
        }
        Ok(sig)
    }

    pub fn var_set(&self) -> BTreeSet<String> {
        self.variables.iter().cloned().collect()
    }

    /// Parses a term using this problem's variable declarations and checks
    /// arities against its signature.
    pub fn parse_term(&self, text: &str) -> Result<Term, ParseError> {
        let t = parse_term(text, &self.var_set())?;
        let mut sig = self.signature().unwrap_or_default();
        merge_symbols(&mut sig, &t).map_err(|source| ParseError::Arity {
            line: 1,
            column: 1,
            source,
        })?;
        Ok(t)
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
enum Tok {
    Open,
    Close,
    Comma,
    Arrow,
    EqEq,
    Ident(String),
}

#[derive(Debug, Clone)]
struct Token {
    tok: Tok,
    line: usize,
    column: usize,
    offset: usize,
}

fn tokenize(text: &str) -> Vec<Token> {
    let mut out = Vec::new();
    let mut line = 1;
    let mut column = 1;
    let mut chars = text.char_indices().peekable();
    while let Some(&(offset, ch)) = chars.peek() {
        let rest = &text[offset..];
        let simple = match ch {
            '(' => Some(Tok::Open),
            ')' => Some(Tok::Close),
            ',' => Some(Tok::Comma),
            _ => None,
        };
        if ch == '\n' {
            chars.next();
            line += 1;
            column = 1;
            continue;
        }
        if ch.is_whitespace() {
            chars.next();
            column += 1;
            continue;
        }
        if let Some(tok) = simple {
            out.push(Token { tok, line, column, offset });
            chars.next();
            column += 1;
            continue;
        }
        if rest.starts_with("->") || rest.starts_with("==") {
            let tok = if rest.starts_with("->") { Tok::Arrow } else { Tok::EqEq };
            out.push(Token { tok, line, column, offset });
            chars.next();
            chars.next();
            column += 2;
            continue;
        }
        let start_col = column;
        let mut ident = String::new();
        while let Some(&(off, c)) = chars.peek() {
            let r = &text[off..];
            if c.is_whitespace()
                || c == '('
                || c == ')'
                || c == ','
                || r.starts_with("->")
                || r.starts_with("==")
            {
                break;
            }
            ident.push(c);
            chars.next();
            column += 1;
        }
        out.push(Token {
            tok: Tok::Ident(ident),
            line,
            column: start_col,
            offset,
        });
    }
    out
}

struct Parser<'a> {
    text: &'a str,
    toks: Vec<Token>,
    pos: usize,
    vars: BTreeSet<String>,
}

impl<'a> Parser<'a> {
    fn peek(&self) -> Option<&Tok> {
        self.toks.get(self.pos).map(|t| &t.tok)
    }

    fn peek_at(&self, k: usize) -> Option<&Tok> {
        self.toks.get(self.pos + k).map(|t| &t.tok)
    }

    fn here(&self) -> (usize, usize) {
        match self.toks.get(self.pos) {
            Some(t) => (t.line, t.column),
            None => {
                let line = self.text.lines().count().max(1);
                let column = self.text.lines().last().map_or(0, |l| l.chars().count()) + 1;
                (line, column)
            }
        }
    }

    fn error(&self, message: impl Into<String>) -> ParseError {
        let (line, column) = self.here();
        ParseError::Syntax {
            line,
            column,
            message: message.into(),
        }
    }

    fn describe(&self) -> String {
        match self.peek() {
            None => "end of input".into(),
            Some(Tok::Open) => "`(`".into(),
            Some(Tok::Close) => "`)`".into(),
            Some(Tok::Comma) => "`,`".into(),
            Some(Tok::Arrow) => "`->`".into(),
            Some(Tok::EqEq) => "`==`".into(),
            Some(Tok::Ident(s)) => format!("`{s}`"),
        }
    }

    fn expect(&mut self, want: Tok, what: &str) -> Result<(), ParseError> {
        if self.peek() == Some(&want) {
            self.pos += 1;
            Ok(())
        } else {
            Err(self.error(format!("expected {what}, found {}", self.describe())))
        }
    }

    fn ident(&mut self) -> Result<String, ParseError> {
        match self.peek() {
            Some(Tok::Ident(s)) => {
                let s = s.clone();
                self.pos += 1;
                Ok(s)
            }
            _ => Err(self.error(format!("expected identifier, found {}", self.describe()))),
        }
    }

    fn term(&mut self) -> Result<Term, ParseError> {
        let (line, column) = self.here();
        let name = self.ident()?;
        if self.peek() == Some(&Tok::Open) {
            if self.vars.contains(&name) {
                return Err(ParseError::Syntax {
                    line,
                    column,
                    message: format!("variable `{name}` applied to arguments"),
                });
            }
            self.pos += 1;
            let mut args = vec![self.term()?];
            loop {
                match self.peek() {
                    Some(Tok::Comma) => {
                        self.pos += 1;
                        args.push(self.term()?);
                    }
                    Some(Tok::Close) => {
                        self.pos += 1;
                        break;
                    }
                    _ => {
                        return Err(
                            self.error(format!("expected `,` or `)`, found {}", self.describe()))
                        )
                    }
                }
            }
            Ok(Term::app(&name, args))
        } else if self.vars.contains(&name) {
            Ok(Term::var(&name))
        } else {
            Ok(Term::constant(&name))
        }
    }

    /// Skips a balanced section body and returns its raw text.
    fn raw_body(&mut self) -> Result<String, ParseError> {
        let start = self.toks.get(self.pos).map(|t| t.offset);
        let mut depth = 0usize;
        loop {
            match self.peek() {
                None => return Err(self.error("unterminated section")),
                Some(Tok::Open) => depth += 1,
                Some(Tok::Close) if depth == 0 => {
                    let end = self.toks[self.pos].offset;
                    self.pos += 1;
                    return Ok(start.map_or(String::new(), |s| self.text[s..end].trim().to_string()));
                }
                Some(Tok::Close) => depth -= 1,
                _ => {}
            }
            self.pos += 1;
        }
    }
}

/// Parses a complete problem file.
pub fn parse_problem(text: &str) -> Result<ProblemFile, ParseError> {
    let toks = tokenize(text);
    // VAR sections may appear anywhere, so collect declarations first.
    let mut vars = BTreeSet::new();
    let mut declared = Vec::new();
    for i in 1..toks.len() {
        if toks[i - 1].tok == Tok::Open && toks[i].tok == Tok::Ident("VAR".into()) {
            for t in &toks[i + 1..] {
                match &t.tok {
                    Tok::Ident(x) => {
                        if vars.insert(x.clone()) {
                            declared.push(x.clone());
                        }
                    }
                    _ => break,
                }
            }
        }
    }
    let mut p = Parser {
        text,
        toks,
        pos: 0,
        vars,
    };
    let mut problem = ProblemFile {
        variables: declared,
        ..Default::default()
    };
    let mut rule_lines = Vec::new();
    let mut sig = Signature::new();
    let mut check_arity = |t: &Term, line: usize, column: usize| {
        merge_symbols(&mut sig, t).map_err(|source| ParseError::Arity {
            line,
            column,
            source,
        })
    };
    if p.peek().is_none() {
        return Err(p.error("empty problem"));
    }
    while p.peek().is_some() {
        p.expect(Tok::Open, "`(`")?;
        let (kw_line, kw_col) = p.here();
        let keyword = p.ident()?;
        match keyword.as_str() {
            "VAR" => {
                while let Some(Tok::Ident(_)) = p.peek() {
                    p.pos += 1;
                }
                p.expect(Tok::Close, "`)` closing VAR")?;
            }
            "RULES" => {
                while p.peek() != Some(&Tok::Close) {
                    if p.peek().is_none() {
                        return Err(p.error("unterminated RULES section"));
                    }
                    let mut label = None;
                    // `id : lhs -> rhs`; a term is never followed by a bare `:`.
                    if let (Some(Tok::Ident(l)), Some(Tok::Ident(colon))) = (p.peek(), p.peek_at(1)) {
                        if colon == ":" {
                            label = Some(l.clone());
                            p.pos += 2;
                        }
                    }
                    let (line, column) = p.here();
                    let lhs = p.term()?;
                    p.expect(Tok::Arrow, "`->`")?;
                    let rhs = p.term()?;
                    check_arity(&lhs, line, column)?;
                    check_arity(&rhs, line, column)?;
                    let index = problem.rules.len() + 1;
                    let rule = match &label {
                        Some(l) => Rule::named(l, lhs, rhs),
                        None => Rule::new(lhs, rhs),
                    }
                    .map_err(|source| ParseError::InvalidRule {
                        rule: label.clone().unwrap_or_else(|| format!("#{index}")),
                        line,
                        source,
                    })?;
                    problem.rules.push(rule);
                    rule_lines.push(line);
                }
                p.pos += 1;
            }
            "EQUATIONS" => {
                while p.peek() != Some(&Tok::Close) {
                    if p.peek().is_none() {
                        return Err(p.error("unterminated EQUATIONS section"));
                    }
                    let (line, column) = p.here();
                    let lhs = p.term()?;
                    p.expect(Tok::EqEq, "`==`")?;
                    let rhs = p.term()?;
                    check_arity(&lhs, line, column)?;
                    check_arity(&rhs, line, column)?;
                    problem.equations.push(Equation::new(lhs, rhs));
                }
                p.pos += 1;
            }
            "COMMENT" => {
                let body = p.raw_body()?;
                problem.comments.push(body);
            }
            "THEORY" => {
                let body = p.raw_body()?;
                let theory = body
                    .trim()
                    .trim_start_matches('(')
                    .trim_end_matches(')')
                    .trim()
                    .to_string();
                return Err(ParseError::UnsupportedTheory {
                    theory,
                    line: kw_line,
                    column: kw_col,
                });
            }
            other => {
                return Err(ParseError::Syntax {
                    line: kw_line,
                    column: kw_col,
                    message: format!("unknown section `{other}`"),
                })
            }
        }
    }
    // Rule ids must be unique.
    if let Err(source) = Trs::new(problem.rules.clone()) {
        if let TermError::DuplicateRuleId(id) = &source {
            let line = problem
                .rules
                .iter()
                .zip(&rule_lines)
                .filter(|(r, _)| r.id.as_deref() == Some(id))
                .nth(1)
                .map_or(1, |(_, &l)| l);
            return Err(ParseError::InvalidRule {
                rule: id.clone(),
                line,
                source,
            });
        }
    }
    Ok(problem)
}

/// Parses a single term; identifiers in `vars` are variables.
pub fn parse_term(text: &str, vars: &BTreeSet<String>) -> Result<Term, ParseError> {
    let mut p = Parser {
        text,
        toks: tokenize(text),
        pos: 0,
        vars: vars.clone(),
    };
    let t = p.term()?;
    if p.peek().is_some() {
        return Err(p.error(format!("unexpected {} after term", p.describe())));
    }
    let mut sig = Signature::new();
    merge_symbols(&mut sig, &t).map_err(|source| ParseError::Arity {
        line: 1,
        column: 1,
        source,
    })?;
    Ok(t)
}

pub fn print_term(t: &Term) -> String {
    t.to_string()
}

/// Prints a problem in the canonical layout. Variables used but not declared
/// are added to the VAR section.
pub fn print_problem(p: &ProblemFile) -> String {
    let mut vars: Vec<String> = p.variables.clone();
    let mut seen: BTreeSet<String> = vars.iter().cloned().collect();
    let mut add = |t: &Term| {
        for x in t.vars() {
            if seen.insert(x.to_string()) {
                vars.push(x.to_string());
            }
        }
    };
    for r in &p.rules {
        add(&r.lhs);
        add(&r.rhs);
    }
    for e in &p.equations {
        add(&e.lhs);
        add(&e.rhs);
    }
    let mut out = String::new();
    out.push_str("(VAR");
    for v in &vars {
        out.push(' ');
        out.push_str(v);
    }
    out.push_str(")\n");
    if !p.rules.is_empty() || p.equations.is_empty() {
        out.push_str("(RULES\n");
        for r in &p.rules {
            match &r.id {
                Some(id) => {
                    let _ = writeln!(out, "  {id} : {} -> {}", r.lhs, r.rhs);
                }
                None => {
                    let _ = writeln!(out, "  {} -> {}", r.lhs, r.rhs);
                }
            }
        }
        out.push_str(")\n");
    }
    if !p.equations.is_empty() {
        out.push_str("(EQUATIONS\n");
        for e in &p.equations {
            let _ = writeln!(out, "  {} == {}", e.lhs, e.rhs);
        }
        out.push_str(")\n");
    }
    for c in &p.comments {
        let _ = writeln!(out, "(COMMENT {c})");
    }
    out
}

/// Prints a TRS as a problem file.
pub fn print_trs(trs: &Trs) -> String {
    print_problem(&ProblemFile {
        rules: trs.rules().to_vec(),
        ..Default::default()
    })
}

#[cfg(test)]
pub(crate) fn names(vars: &[&str]) -> BTreeSet<String> {
    vars.iter().map(|s| s.to_string()).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_bean_rule() {
        let p = parse_problem("(VAR x)(RULES b(b(x)) -> w(w(w(w(x)))))").unwrap();
        assert_eq!(p.rules.len(), 1);
        let sig = p.signature().unwrap();
        assert_eq!(sig.len(), 2);
        assert_eq!(sig.get("b"), Some(&1));
        assert_eq!(sig.get("w"), Some(&1));
    }

    #[test]
    fn empty_sections() {
        let p = parse_problem("(VAR)(RULES)").unwrap();
        assert!(p.rules.is_empty() && p.variables.is_empty());
        assert!(p.trs().unwrap().is_empty());
    }

    #[test]
    fn rejects_theory() {
        let err = parse_problem("(VAR x)(THEORY (AC p))(RULES p(g,r) -> p(b,b))").unwrap_err();
        match err {
            ParseError::UnsupportedTheory { theory, .. } => assert!(theory.contains("AC")),
            other => panic!("unexpected {other:?}"),
        }
        assert!(err_text("(VAR x)(THEORY (AC p))(RULES)").contains("AC p"));
    }

    fn err_text(s: &str) -> String {
        parse_problem(s).unwrap_err().to_string()
    }

    #[test]
    fn term_parsing() {
        let t = parse_term("take(s(s(0)),primes)", &BTreeSet::new()).unwrap();
        assert_eq!(t.root().map(|s| &**s), Some("take"));
        assert_eq!(t.args().len(), 2);
        assert_eq!(parse_term("x", &names(&["x"])).unwrap(), Term::var("x"));
        assert!(matches!(
            parse_term("f(x,", &names(&["x"])),
            Err(ParseError::Syntax { .. })
        ));
        assert_eq!(print_term(&parse_term("f(x,g(y))", &names(&["x", "y"])).unwrap()), "f(x,g(y))");
        assert_eq!(print_term(&Term::constant("c")), "c");
    }

    #[test]
    fn reports_rule_errors() {
        let e = err_text("(VAR x y)(RULES f(x) -> a  x -> f(x))");
        assert!(e.contains("#2") && e.contains("variable"), "{e}");
        let e = err_text("(VAR x y)(RULES f(x) -> g(y))");
        assert!(e.contains("#1") && e.contains("`y`"), "{e}");
        let e = err_text("(VAR x)(RULES f(x) -> a\n f(x,x) -> a)");
        assert!(e.contains("2:"), "{e}");
    }

    #[test]
    fn syntax_error_positions() {
        match parse_problem("(VAR x)\n(RULES f(x) => x)").unwrap_err() {
            ParseError::Syntax { line, .. } => assert_eq!(line, 2),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn labels_and_cons_symbol() {
        let p = parse_problem(
            "(VAR n x y)(RULES alpha : and(x,T) -> x\n from(n) -> :(n,from(s(n)))\n beta : :(x,y) -> y)",
        )
        .unwrap();
        assert_eq!(p.rules[0].id.as_deref(), Some("alpha"));
        assert_eq!(p.rules[1].id, None);
        assert_eq!(p.rules[1].rhs.root().map(|s| &**s), Some(":"));
        assert_eq!(p.rules[2].id.as_deref(), Some("beta"));
        assert_eq!(p.rules[2].lhs.root().map(|s| &**s), Some(":"));
    }

    #[test]
    fn equations_and_comments() {
        let text = "(VAR x)(EQUATIONS T(C(A(T(x)))) == T(x))(COMMENT genes (milk) to cola)";
        let p = parse_problem(text).unwrap();
        assert_eq!(p.equations.len(), 1);
        assert_eq!(p.comments, vec!["genes (milk) to cola".to_string()]);
        let again = parse_problem(&print_problem(&p)).unwrap();
        assert_eq!(again, p);
    }

    #[test]
    fn arrows_without_spaces() {
        let p = parse_problem("(VAR x)(RULES f(x)->x a->b)").unwrap();
        assert_eq!(p.rules.len(), 2);
    }
}
