//! Surface term ↔ KB concept mapping with part of speech and grammatical
//! number.
//!
//! File format is tab-separated `term  concept  pos  number`, one entry per
//! line, `#` comments. The concept column is an s-expression so functional
//! terms can be mapped as well as plain constants.

use std::collections::{BTreeSet, HashMap};
use std::fmt;
use std::path::Path;
use std::str::FromStr;

use thiserror::Error;

use crate::sexpr::{self, SExpr};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Pos {
    Noun,
    Verb,
    Adjective,
    Adverb,
    Name,
    Other,
}

impl FromStr for Pos {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Ok(match s {
            "noun" => Pos::Noun,
            "verb" => Pos::Verb,
            "adjective" => Pos::Adjective,
            "adverb" => Pos::Adverb,
            "name" => Pos::Name,
            "other" => Pos::Other,
            _ => return Err(format!("unknown part of speech `{s}`")),
        })
    }
}

impl fmt::Display for Pos {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Pos::Noun => "noun",
            Pos::Verb => "verb",
            Pos::Adjective => "adjective",
            Pos::Adverb => "adverb",
            Pos::Name => "name",
            Pos::Other => "other",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Number {
    Singular,
    Plural,
    NotApplicable,
}

impl FromStr for Number {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Ok(match s {
            "singular" => Number::Singular,
            "plural" => Number::Plural,
            "n/a" => Number::NotApplicable,
            _ => return Err(format!("unknown grammatical number `{s}`")),
        })
    }
}

impl fmt::Display for Number {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Number::Singular => "singular",
            Number::Plural => "plural",
            Number::NotApplicable => "n/a",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct LexEntry {
    pub term: String,
    pub concept: SExpr,
    pub pos: Pos,
    pub number: Number,
}

#[derive(Debug, Error)]
pub enum LexiconError {
    #[error("cannot read lexicon: {0}")]
    Io(#[from] std::io::Error),
    #[error("line {line}: {reason}")]
    BadRow { line: usize, reason: String },
    #[error("line {line}: duplicate entry for ({term}, {concept})")]
    Duplicate { line: usize, term: String, concept: String },
    #[error("no lexicon entry for concept {0}")]
    UnknownConcept(String),
}

#[derive(Debug, Clone, Default)]
pub struct Lexicon {
    entries: Vec<LexEntry>,
    by_term: HashMap<String, Vec<usize>>,
    by_folded: HashMap<String, Vec<usize>>,
    by_concept: HashMap<SExpr, Vec<usize>>,
}

impl Lexicon {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self, LexiconError> {
        Self::from_tsv(&std::fs::read_to_string(path)?)
    }

    pub fn from_tsv(text: &str) -> Result<Self, LexiconError> {
        let mut lex = Lexicon::new();
        for (i, raw) in text.lines().enumerate() {
            let line = i + 1;
            if raw.trim().is_empty() || raw.trim_start().starts_with('#') {
                continue;
            }
            let bad = |reason: String| LexiconError::BadRow { line, reason };
            let cols: Vec<&str> = raw.split('\t').map(str::trim).collect();
            let [term, concept, pos, number] = cols[..] else {
                return Err(bad(format!("expected 4 tab-separated columns, found {}", cols.len())));
            };
            if term.is_empty() {
                return Err(bad("empty term".into()));
            }
            let concept = sexpr::parse(concept).map_err(|e| bad(format!("concept: {e}")))?;
            if !concept.is_ground() {
                return Err(bad(format!("concept {concept} contains a variable")));
            }
            let entry = LexEntry {
                term: term.to_string(),
                concept,
                pos: pos.parse().map_err(bad)?,
                number: number.parse().map_err(bad)?,
            };
            lex.insert(entry).map_err(|e| match e {
                LexiconError::Duplicate { term, concept, .. } => LexiconError::Duplicate { line, term, concept },
                other => other,
            })?;
        }
        Ok(lex)
    }

    /// Adds an entry; a repeated `(term, concept)` pair is an error.
    pub fn insert(&mut self, entry: LexEntry) -> Result<(), LexiconError> {
        if self.exact(&entry.term).any(|e| e.concept == entry.concept) {
            return Err(LexiconError::Duplicate {
                line: 0,
                term: entry.term,
                concept: entry.concept.to_string(),
            });
        }
        let idx = self.entries.len();
        self.by_term.entry(entry.term.clone()).or_default().push(idx);
        self.by_folded.entry(entry.term.to_lowercase()).or_default().push(idx);
        self.by_concept.entry(entry.concept.clone()).or_default().push(idx);
        self.entries.push(entry);
        Ok(())
    }

    pub fn entries(&self) -> &[LexEntry] {
        &self.entries
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    fn exact<'a>(&'a self, term: &str) -> impl Iterator<Item = &'a LexEntry> + 'a {
        self.by_term.get(term).into_iter().flatten().map(|&i| &self.entries[i])
    }

    /// Entries for `term`: exact matches if any, otherwise case-folded ones.
    pub fn lookup(&self, term: &str) -> Vec<&LexEntry> {
        let exact: Vec<_> = self.exact(term).collect();
        if !exact.is_empty() {
            return exact;
        }
        self.by_folded
            .get(&term.to_lowercase())
            .into_iter()
            .flatten()
            .map(|&i| &self.entries[i])
            .collect()
    }

    /// Concepts the term maps to, in file order, without duplicates.
    pub fn word2kb(&self, term: &str) -> Vec<SExpr> {
        let mut out: Vec<SExpr> = Vec::new();
        for e in self.lookup(term) {
            if !out.contains(&e.concept) {
                out.push(e.concept.clone());
            }
        }
        out
    }

    /// Surface forms of a concept, preferred (first-listed) first.
    pub fn kb2word(&self, concept: &SExpr) -> Result<Vec<String>, LexiconError> {
        let idxs = self
            .by_concept
            .get(concept)
            .ok_or_else(|| LexiconError::UnknownConcept(concept.to_string()))?;
        let mut out: Vec<String> = Vec::new();
        for &i in idxs {
            if !out.contains(&self.entries[i].term) {
                out.push(self.entries[i].term.clone());
            }
        }
        Ok(out)
    }

    /// Preferred surface form, falling back to the printed concept.
    pub fn surface(&self, concept: &SExpr) -> String {
        self.kb2word(concept)
            .ok()
            .and_then(|v| v.into_iter().next())
            .unwrap_or_else(|| concept.to_string())
    }

    /// Empty means the term is unknown, which callers treat as unconstrained.
    pub fn pos_of(&self, term: &str) -> BTreeSet<Pos> {
        self.lookup(term).into_iter().map(|e| e.pos).collect()
    }

    /// Grammatical number of the term; `n/a` entries are left out so that an
    /// empty set again means unconstrained.
    pub fn number_of(&self, term: &str) -> BTreeSet<Number> {
        self.lookup(term)
            .into_iter()
            .map(|e| e.number)
            .filter(|n| *n != Number::NotApplicable)
            .collect()
    }

    pub fn to_tsv(&self) -> String {
        let mut out = String::new();
        for e in &self.entries {
            out.push_str(&format!("{}\t{}\t{}\t{}\n", e.term, e.concept, e.pos, e.number));
        }
        out
    }
}
