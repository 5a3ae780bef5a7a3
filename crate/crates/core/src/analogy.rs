//! Four-term analogies `a : b :: c : ?` solved from vector offsets, from KB
//! predicate patterns, or from both together.

use std::collections::{BTreeMap, BTreeSet, HashSet};
use std::fmt;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::kb::{KbError, KnowledgeBase};
use crate::lexicon::Lexicon;
use crate::sexpr::SExpr;
use crate::vecspace::{EmbeddingSpace, VecError};

pub const DEFAULT_MAX_SENSES: usize = 8;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum AnalogyError {
    #[error(transparent)]
    Vector(#[from] VecError),
    #[error(transparent)]
    Kb(#[from] KbError),
    #[error("the KB has no answer")]
    NoKbAnswer,
    #[error("no candidate answer")]
    NoAnswer,
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct AnalogyProblem {
    pub a: String,
    pub b: String,
    pub c: String,
}

impl AnalogyProblem {
    pub fn new(a: impl Into<String>, b: impl Into<String>, c: impl Into<String>) -> Self {
        AnalogyProblem {
            a: a.into(),
            b: b.into(),
            c: c.into(),
        }
    }
}

impl fmt::Display for AnalogyProblem {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} : {} :: {} : ?", self.a, self.b, self.c)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum AnswerSource {
    Dsvs,
    KbPredicate,
    KbAnchor,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AnalogyAnswer {
    pub term: String,
    pub source: AnswerSource,
    /// Cosine distance to the offset vector; infinite when the term has no vector.
    pub distance: f64,
}

#[derive(Debug, Clone, Copy)]
pub struct AnalogySolver<'a> {
    pub kb: &'a KnowledgeBase,
    pub space: &'a EmbeddingSpace,
    pub lexicon: &'a Lexicon,
    pub max_senses: usize,
}

fn by_distance_then_term(a: &AnalogyAnswer, b: &AnalogyAnswer) -> std::cmp::Ordering {
    a.distance.total_cmp(&b.distance).then_with(|| a.term.cmp(&b.term))
}

impl<'a> AnalogySolver<'a> {
    pub fn new(kb: &'a KnowledgeBase, space: &'a EmbeddingSpace, lexicon: &'a Lexicon) -> Self {
        AnalogySolver {
            kb,
            space,
            lexicon,
            max_senses: DEFAULT_MAX_SENSES,
        }
    }

    fn senses(&self, term: &str) -> Vec<SExpr> {
        let mut s = self.lexicon.word2kb(term);
        s.truncate(self.max_senses);
        s
    }

    /// The `k` terms nearest `v(b) - v(a) + v(c)`, never returning an input
    /// term except `b` when `a == c` (the arithmetic forces `b` there).
    pub fn solve_dsvs(&self, p: &AnalogyProblem, k: usize) -> Result<Vec<AnalogyAnswer>, AnalogyError> {
        let target = self.space.analogy_vector(&p.a, &p.b, &p.c)?;
        let mut exclude: HashSet<String> = [p.a.clone(), p.c.clone()].into();
        if p.a != p.c {
            exclude.insert(p.b.clone());
        }
        Ok(self
            .space
            .vec2word(&target, k, &exclude)?
            .into_iter()
            .map(|n| AnalogyAnswer {
                term: n.term,
                source: AnswerSource::Dsvs,
                distance: n.distance,
            })
            .collect())
    }

    /// KB answers from predicates linking `a` and `b` and from shared-anchor
    /// patterns, applied to every sense of `c`. When neither pattern links
    /// `a` and `b`, the rearranged problem `a : c :: b : ?` is tried.
    /// Sorted by distance to the offset vector.
    pub fn solve_kb(&self, p: &AnalogyProblem) -> Result<Vec<AnalogyAnswer>, AnalogyError> {
        let (sa, sb, sc) = (self.senses(&p.a), self.senses(&p.b), self.senses(&p.c));
        let mut found = self.kb_concepts(&sa, &sb, &sc)?;
        if found.is_empty() {
            found = self.kb_concepts(&sa, &sc, &sb)?;
        }
        let target = self.space.analogy_vector(&p.a, &p.b, &p.c).ok();
        let mut by_term: BTreeMap<String, AnalogyAnswer> = BTreeMap::new();
        for (concept, source) in found {
            let term = self.lexicon.surface(&concept);
            let distance = match (&target, self.space.word2vec(&term)) {
                (Some(t), Ok(v)) => crate::vecspace::cosine_distance(t, &v).unwrap_or(f64::INFINITY),
                _ => f64::INFINITY,
            };
            let answer = AnalogyAnswer {
                term: term.clone(),
                source,
                distance,
            };
            match by_term.get(&term) {
                Some(prev) if prev.source <= source => {}
                _ => {
                    by_term.insert(term, answer);
                }
            }
        }
        let mut out: Vec<AnalogyAnswer> = by_term.into_values().collect();
        out.sort_by(by_distance_then_term);
        Ok(out)
    }

    fn kb_concepts(
        &self,
        first: &[SExpr],
        second: &[SExpr],
        at: &[SExpr],
    ) -> Result<BTreeSet<(SExpr, AnswerSource)>, KbError> {
        let mut out = BTreeSet::new();
        for x in first {
            for y in second {
                for (pred, order) in self.kb.predicates_between(x, y)? {
                    for z in at {
                        for d in self.kb.apply_predicate(&pred, order, z)? {
                            if &d != z {
                                out.insert((d, AnswerSource::KbPredicate));
                            }
                        }
                    }
                }
                for pat in self.kb.shared_anchor_patterns(x, y)? {
                    for z in at {
                        for d in self.kb.apply_anchor(&pat.first, &pat.second, z)? {
                            if &d != z {
                                out.insert((d, AnswerSource::KbAnchor));
                            }
                        }
                    }
                }
            }
        }
        Ok(out)
    }

    /// Keeps candidates whose part of speech and number agree with the
    /// problem; falls back to the input when nothing survives.
    pub fn pos_filter(&self, candidates: &[AnalogyAnswer], p: &AnalogyProblem) -> Vec<AnalogyAnswer> {
        let lex = self.lexicon;
        let pos_ok = admissible(&lex.pos_of(&p.a), &lex.pos_of(&p.b), &lex.pos_of(&p.c));
        let num_ok = admissible(&lex.number_of(&p.a), &lex.number_of(&p.b), &lex.number_of(&p.c));
        let kept: Vec<AnalogyAnswer> = candidates
            .iter()
            .filter(|cand| passes(&pos_ok, &lex.pos_of(&cand.term)) && passes(&num_ok, &lex.number_of(&cand.term)))
            .cloned()
            .collect();
        if kept.is_empty() {
            candidates.to_vec()
        } else {
            kept
        }
    }

    /// The KB answer nearest the offset vector, or the best agreeing vector
    /// answer when the KB has none.
    pub fn solve_combined(&self, p: &AnalogyProblem, k: usize) -> Result<AnalogyAnswer, AnalogyError> {
        // inputs without vectors are an error even when the KB could answer
        self.space.analogy_vector(&p.a, &p.b, &p.c)?;
        if let Some(best) = self.solve_kb(p)?.into_iter().next() {
            return Ok(best);
        }
        let dsvs = self.solve_dsvs(p, k)?;
        self.pos_filter(&dsvs, p)
            .into_iter()
            .next()
            .ok_or(AnalogyError::NoAnswer)
    }

    /// A uniformly chosen KB answer.
    pub fn solve_kb_random(&self, p: &AnalogyProblem, seed: u64) -> Result<AnalogyAnswer, AnalogyError> {
        let mut answers = self.solve_kb(p)?;
        if answers.is_empty() {
            return Err(AnalogyError::NoKbAnswer);
        }
        answers.sort_by(|x, y| x.term.cmp(&y.term));
        let i = ChaCha8Rng::seed_from_u64(seed).random_range(0..answers.len());
        Ok(answers.swap_remove(i))
    }
}

/// `pos(b)` is admissible when `a` and `c` agree, `pos(c)` when `a` and `b`
/// agree. `None` means unconstrained.
fn admissible<T: Ord + Clone>(a: &BTreeSet<T>, b: &BTreeSet<T>, c: &BTreeSet<T>) -> Option<BTreeSet<T>> {
    let mut allowed = BTreeSet::new();
    if !a.is_disjoint(c) {
        allowed.extend(b.iter().cloned());
    }
    if !a.is_disjoint(b) {
        allowed.extend(c.iter().cloned());
    }
    (!allowed.is_empty()).then_some(allowed)
}

fn passes<T: Ord>(allowed: &Option<BTreeSet<T>>, have: &BTreeSet<T>) -> bool {
    match allowed {
        None => true,
        Some(allowed) => have.is_empty() || !allowed.is_disjoint(have),
    }
}
