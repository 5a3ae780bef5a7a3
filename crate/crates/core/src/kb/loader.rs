//! KB file format: one s-expression per line. Facts are bare atoms, rules are
//! `(<= head body...)`, and `;` starts a comment.

use std::path::Path;

use thiserror::Error;

use super::{Assertion, HornRule, KbError, KnowledgeBase};
use crate::sexpr::{self, ParseError, SExpr};

#[derive(Debug, Error)]
pub enum KbLoadError {
    #[error("cannot read KB file: {0}")]
    Io(#[from] std::io::Error),
    #[error("line {line}: {source}")]
    Parse { line: usize, source: ParseError },
    #[error("line {line}: {source}")]
    Invalid { line: usize, source: KbError },
}

impl KbLoadError {
    pub fn line(&self) -> Option<usize> {
        match self {
            KbLoadError::Io(_) => None,
            KbLoadError::Parse { line, .. } | KbLoadError::Invalid { line, .. } => Some(*line),
        }
    }
}

pub fn load_kb(path: impl AsRef<Path>) -> Result<KnowledgeBase, KbLoadError> {
    load_kb_str(&std::fs::read_to_string(path)?)
}

pub fn load_kb_str(text: &str) -> Result<KnowledgeBase, KbLoadError> {
    let mut kb = KnowledgeBase::new();
    extend_from_str(&mut kb, text)?;
    Ok(kb)
}

/// Adds every fact and rule in `text` to `kb`.
pub(crate) fn extend_from_str(kb: &mut KnowledgeBase, text: &str) -> Result<(), KbLoadError> {
    for (i, raw) in text.lines().enumerate() {
        let line = i + 1;
        let trimmed = raw.trim();
        if trimmed.is_empty() || trimmed.starts_with(';') {
            continue;
        }
        let expr = sexpr::parse(trimmed).map_err(|source| KbLoadError::Parse { line, source })?;
        let invalid = |source| KbLoadError::Invalid { line, source };
        let is_rule = matches!(expr.as_list().and_then(|l| l.first()), Some(SExpr::Symbol(s)) if s == "<=");
        if is_rule {
            kb.add_rule(HornRule::from_sexpr(&expr).map_err(invalid)?);
        } else {
            if let Some(op @ ("and" | "or" | "not")) = expr.as_list().and_then(|l| l.first()).and_then(SExpr::as_symbol)
            {
                return Err(invalid(KbError::Unsupported(format!("`{op}` as a fact"))));
            }
            kb.assert_fact(Assertion::from_sexpr(&expr).map_err(invalid)?);
        }
    }
    Ok(())
}

impl KnowledgeBase {
    /// Appends the facts and rules of a KB file's text.
    pub fn extend_from_str(&mut self, text: &str) -> Result<(), KbLoadError> {
        extend_from_str(self, text)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn reports_line_numbers() {
        let err = load_kb_str("; header\n(p a)\n\n(q b\n").unwrap_err();
        assert_eq!(err.line(), Some(4));
        assert!(matches!(err, KbLoadError::Parse { .. }));
        let err = load_kb_str("(p a)\n(p ?X)\n").unwrap_err();
        assert_eq!(err.line(), Some(2));
        let err = load_kb_str("(<= (p ?X) (q ?Y))\n").unwrap_err();
        assert!(matches!(
            err,
            KbLoadError::Invalid {
                line: 1,
                source: KbError::UnsafeRule { .. }
            }
        ));
        let err = load_kb_str("(p a)\n(or (p a) (q b))\n").unwrap_err();
        assert!(matches!(
            err,
            KbLoadError::Invalid {
                line: 2,
                source: KbError::Unsupported(_)
            }
        ));
        let err = load_kb_str("atom\n").unwrap_err();
        assert_eq!(err.line(), Some(1));
    }

    #[test]
    fn loads_facts_rules_and_comments() {
        let kb = load_kb_str(
            "; parts\n(genls Bulldozer RoadVehicle) ; inline\n\
             (<= (partOf ?M ?P) (genls ?M ?C) (partOf ?C ?P))\n(partOf RoadVehicle Wheel)\n",
        )
        .unwrap();
        assert_eq!(kb.fact_count(), 2);
        assert_eq!(kb.rules().len(), 1);
        assert_eq!(kb.query_str("(partOf Bulldozer ?P)").unwrap().len(), 1);
    }
}
