//! Reader and printer for the s-expression surface language used by KB
//! files, rules and queries.
//!
//! ```text
//! (capitalCity ?X France)
//! (and (physicalPartTypes Backhoe ?X) (genls ?X SolidTangibleArtifact))
//! ```
//!
//! `?`-prefixed atoms are variables, double-quoted atoms are strings and
//! everything else (numbers included) is a case-sensitive symbol. A `;`
//! starts a comment that runs to the end of the line.

use std::fmt;

use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum SExpr {
    Symbol(String),
    /// Stored without the leading `?`.
    Variable(String),
    Str(String),
    List(Vec<SExpr>),
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ParseError {
    #[error("empty input")]
    EmptyInput,
    #[error("unbalanced parentheses at byte {offset}")]
    UnbalancedParens { offset: usize },
    #[error("trailing input after expression at byte {offset}")]
    TrailingGarbage { offset: usize },
    #[error("unterminated string starting at byte {offset}")]
    UnterminatedString { offset: usize },
    #[error("variable without a name at byte {offset}")]
    EmptyVariable { offset: usize },
}

impl ParseError {
    pub fn offset(&self) -> Option<usize> {
        match *self {
            ParseError::EmptyInput => None,
            ParseError::UnbalancedParens { offset }
            | ParseError::TrailingGarbage { offset }
            | ParseError::UnterminatedString { offset }
            | ParseError::EmptyVariable { offset } => Some(offset),
        }
    }
}

impl SExpr {
    pub fn symbol(name: impl Into<String>) -> Self {
        SExpr::Symbol(name.into())
    }

    pub fn var(name: impl Into<String>) -> Self {
        SExpr::Variable(name.into())
    }

    pub fn list(items: impl IntoIterator<Item = SExpr>) -> Self {
        SExpr::List(items.into_iter().collect())
    }

    pub fn as_symbol(&self) -> Option<&str> {
        match self {
            SExpr::Symbol(s) => Some(s),
            _ => None,
        }
    }

    pub fn as_list(&self) -> Option<&[SExpr]> {
        match self {
            SExpr::List(items) => Some(items),
            _ => None,
        }
    }

    /// True when no variable occurs anywhere inside the expression.
    pub fn is_ground(&self) -> bool {
        match self {
            SExpr::Variable(_) => false,
            SExpr::List(items) => items.iter().all(SExpr::is_ground),
            _ => true,
        }
    }

    /// Appends the variables of the expression in order of first occurrence.
    pub fn collect_vars(&self, out: &mut Vec<String>) {
        match self {
            SExpr::Variable(v) => {
                if !out.iter().any(|o| o == v) {
                    out.push(v.clone());
                }
            }
            SExpr::List(items) => items.iter().for_each(|i| i.collect_vars(out)),
            _ => {}
        }
    }

    pub fn vars(&self) -> Vec<String> {
        let mut out = Vec::new();
        self.collect_vars(&mut out);
        out
    }
}

impl fmt::Display for SExpr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            SExpr::Symbol(s) => f.write_str(s),
            SExpr::Variable(v) => write!(f, "?{v}"),
            SExpr::Str(s) => {
                f.write_str("\"")?;
                for c in s.chars() {
                    match c {
                        '"' => f.write_str("\\\"")?,
                        '\\' => f.write_str("\\\\")?,
                        '\n' => f.write_str("\\n")?,
                        c => write!(f, "{c}")?,
                    }
                }
                f.write_str("\"")
            }
            SExpr::List(items) => {
                f.write_str("(")?;
                for (i, item) in items.iter().enumerate() {
                    if i > 0 {
                        f.write_str(" ")?;
                    }
                    write!(f, "{item}")?;
                }
                f.write_str(")")
            }
        }
    }
}

/// Canonical rendering; `parse(&print(e)) == Ok(e)` for every valid `e`.
pub fn print(expr: &SExpr) -> String {
    expr.to_string()
}

/// Parses exactly one expression, allowing surrounding whitespace and comments.
pub fn parse(text: &str) -> Result<SExpr, ParseError> {
    let mut reader = Reader::new(text);
    let expr = reader.next_expr()?.ok_or(ParseError::EmptyInput)?;
    reader.skip_trivia();
    if reader.pos < reader.src.len() {
        let offset = reader.pos;
        return Err(if reader.src[offset] == b')' {
            ParseError::UnbalancedParens { offset }
        } else {
            ParseError::TrailingGarbage { offset }
        });
    }
    Ok(expr)
}

/// Parses every top-level expression in `text`.
pub fn parse_all(text: &str) -> Result<Vec<SExpr>, ParseError> {
    let mut reader = Reader::new(text);
    let mut out = Vec::new();
    while let Some(expr) = reader.next_expr()? {
        out.push(expr);
    }
    Ok(out)
}

fn is_delimiter(b: u8) -> bool {
    b.is_ascii_whitespace() || matches!(b, b'(' | b')' | b'"' | b';')
}

struct Reader<'a> {
    text: &'a str,
    src: &'a [u8],
    pos: usize,
}

impl<'a> Reader<'a> {
    fn new(text: &'a str) -> Self {
        Reader {
            text,
            src: text.as_bytes(),
            pos: 0,
        }
    }

    fn skip_trivia(&mut self) {
        while self.pos < self.src.len() {
            let b = self.src[self.pos];
            if b.is_ascii_whitespace() {
                self.pos += 1;
            } else if b == b';' {
                while self.pos < self.src.len() && self.src[self.pos] != b'\n' {
                    self.pos += 1;
                }
            } else {
                break;
            }
        }
    }

    fn next_expr(&mut self) -> Result<Option<SExpr>, ParseError> {
        self.skip_trivia();
        if self.pos >= self.src.len() {
            return Ok(None);
        }
        match self.src[self.pos] {
            b')' => Err(ParseError::UnbalancedParens { offset: self.pos }),
            _ => self.expr().map(Some),
        }
    }

    fn expr(&mut self) -> Result<SExpr, ParseError> {
        let start = self.pos;
        match self.src[start] {
            b'(' => {
                self.pos += 1;
                let mut items = Vec::new();
                loop {
                    self.skip_trivia();
                    match self.src.get(self.pos) {
                        None => return Err(ParseError::UnbalancedParens { offset: start }),
                        Some(b')') => {
                            self.pos += 1;
                            return Ok(SExpr::List(items));
                        }
                        Some(_) => items.push(self.expr()?),
                    }
                }
            }
            b'"' => self.string(),
            _ => {
                while self.pos < self.src.len() && !is_delimiter(self.src[self.pos]) {
                    self.pos += 1;
                }
                let token = &self.text[start..self.pos];
                match token.strip_prefix('?') {
                    Some("") => Err(ParseError::EmptyVariable { offset: start }),
                    Some(name) => Ok(SExpr::Variable(name.to_string())),
                    None => Ok(SExpr::Symbol(token.to_string())),
                }
            }
        }
    }

    fn string(&mut self) -> Result<SExpr, ParseError> {
        let start = self.pos;
        self.pos += 1;
        let mut out = String::new();
        let mut chars = self.text[self.pos..].char_indices();
        while let Some((i, c)) = chars.next() {
            match c {
                '"' => {
                    self.pos += i + 1;
                    return Ok(SExpr::Str(out));
                }
                '\\' => match chars.next() {
                    Some((_, 'n')) => out.push('\n'),
                    Some((_, other)) => out.push(other),
                    None => break,
                },
                c => out.push(c),
            }
        }
        Err(ParseError::UnterminatedString { offset: start })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn sym(s: &str) -> SExpr {
        SExpr::symbol(s)
    }

    #[test]
    fn parses_simple_query() {
        let e = parse("(capitalCity ?X France)").unwrap();
        assert_eq!(e, SExpr::list([sym("capitalCity"), SExpr::var("X"), sym("France")]));
    }

    #[test]
    fn parses_conjunction() {
        let e = parse("(and (physicalPartTypes Backhoe ?X) (genls ?X SolidTangibleArtifact))").unwrap();
        let items = e.as_list().unwrap();
        assert_eq!(items.len(), 3);
        assert_eq!(items[0], sym("and"));
        assert!(matches!(items[1], SExpr::List(_)));
        assert!(matches!(items[2], SExpr::List(_)));
    }

    #[test]
    fn errors_carry_offsets() {
        assert_eq!(parse("(("), Err(ParseError::UnbalancedParens { offset: 1 }));
        assert_eq!(parse(""), Err(ParseError::EmptyInput));
        assert_eq!(parse("   ; only a comment\n"), Err(ParseError::EmptyInput));
        assert_eq!(parse("(a) b"), Err(ParseError::TrailingGarbage { offset: 4 }));
        assert_eq!(parse("(a))"), Err(ParseError::UnbalancedParens { offset: 3 }));
        assert_eq!(parse(")"), Err(ParseError::UnbalancedParens { offset: 0 }));
        assert_eq!(parse("(a \"x"), Err(ParseError::UnterminatedString { offset: 3 }));
        assert_eq!(parse("(p ?)"), Err(ParseError::EmptyVariable { offset: 3 }));
    }

    #[test]
    fn prints_canonically() {
        let e = SExpr::list([sym("capitalCity"), SExpr::var("X"), sym("France")]);
        assert_eq!(print(&e), "(capitalCity ?X France)");
        assert_eq!(print(&sym("France")), "France");
        assert_eq!(print(&SExpr::Str("rich ruler".into())), "\"rich ruler\"");
        assert_eq!(print(&SExpr::List(vec![])), "()");
    }

    #[test]
    fn comments_and_numbers() {
        let e = parse("; header\n(population France 67) ; trailing\n").unwrap();
        assert_eq!(e, SExpr::list([sym("population"), sym("France"), sym("67")]));
    }

    #[test]
    fn symbols_are_case_sensitive() {
        assert_ne!(parse("Rich").unwrap(), parse("rich").unwrap());
    }

    #[test]
    fn nested_functional_terms_keep_structure() {
        let text = "(SubcollectionOfWithRelationToFn Leader personalWealthOwned GreatWealth)";
        let e = parse(text).unwrap();
        assert_eq!(print(&e), text);
        assert!(e.is_ground());
    }

    #[test]
    fn string_escapes_round_trip() {
        let e = SExpr::Str("say \"hi\"\\now\n".into());
        assert_eq!(parse(&print(&e)).unwrap(), e);
    }

    #[test]
    fn parse_all_reads_sequence() {
        let all = parse_all("(a b) c ; x\n (d)").unwrap();
        assert_eq!(all.len(), 3);
    }

    #[test]
    fn vars_in_order() {
        let e = parse("(and (p ?B ?A) (q ?A ?C))").unwrap();
        assert_eq!(e.vars(), vec!["B", "A", "C"]);
    }

    pub(crate) fn arb_sexpr() -> impl Strategy<Value = SExpr> {
        let name = "[A-Za-z0-9_#$*+<=>!./:-]{1,8}";
        let leaf = prop_oneof![
            name.prop_map(SExpr::Symbol),
            name.prop_map(SExpr::Variable),
            "[ -~]{0,10}".prop_map(SExpr::Str),
        ];
        leaf.prop_recursive(4, 48, 6, |inner| {
            prop::collection::vec(inner, 0..6).prop_map(SExpr::List)
        })
    }

    fn spaced(e: &SExpr, pad: &str) -> String {
        match e {
            SExpr::List(items) => {
                let inner: Vec<String> = items.iter().map(|i| spaced(i, pad)).collect();
                format!("({pad}{}{pad})", inner.join(&format!(" {pad}")))
            }
            other => print(other),
        }
    }

    proptest! {
        #[test]
        fn print_parse_round_trip(e in arb_sexpr()) {
            prop_assert_eq!(parse(&print(&e)).unwrap(), e);
        }

        #[test]
        fn extra_whitespace_is_ignored(e in arb_sexpr(), pad in "[ \t\n]{1,4}") {
            prop_assert_eq!(parse(&spaced(&e, &pad)).unwrap(), e);
        }
    }
}
