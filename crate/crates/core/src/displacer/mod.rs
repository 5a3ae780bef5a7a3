//! Hybrid pipelines: answer a KB query for a term the KB does not cover by
//! running it on nearby covered terms and carrying the answers across with
//! displacement vectors.

mod config;
pub mod kmeans;

use std::collections::{BTreeMap, BTreeSet, HashSet};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::kb::{Binding, KbError, KnowledgeBase, QueryExpr};
use crate::lexicon::Lexicon;
use crate::sexpr::SExpr;
use crate::vecspace::{cosine_distance, EmbeddingSpace, VecError, Vector};

pub use config::{ClassifyMode, ClusterCount, PipelineConfig, Ranking};
pub use kmeans::{kmeans, Clustering, KmeansError};

/// Ranks tracked by [`RankProbabilities`]; anything lower counts as missed.
pub const TRACKED_RANKS: usize = 4;

/// Candidate pool drawn around the averaged estimate before re-ranking.
const MIN_CANDIDATE_POOL: usize = 20;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum DisplacerError {
    #[error(transparent)]
    Vector(#[from] VecError),
    #[error(transparent)]
    Kb(#[from] KbError),
    #[error(transparent)]
    Kmeans(#[from] KmeansError),
    #[error("no neighbor of {0:?} has a KB answer")]
    NoCoverage(String),
    #[error("no label has a majority: {0:?}")]
    Tie(Vec<String>),
    #[error("need at least 2 (term, answer) pairs, found {0}")]
    InsufficientData(usize),
    #[error("invalid configuration: {0}")]
    BadConfig(String),
    #[error("bad query template: {0}")]
    BadTemplate(String),
}

/// A query with one input hole and one answer variable.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct QueryTemplate {
    pub expr: QueryExpr,
    pub input_var: String,
    pub answer_var: String,
}

impl QueryTemplate {
    pub fn new(
        expr: QueryExpr,
        input_var: impl Into<String>,
        answer_var: impl Into<String>,
    ) -> Result<Self, DisplacerError> {
        let (input_var, answer_var) = (input_var.into(), answer_var.into());
        let vars = expr.vars();
        for v in [&input_var, &answer_var] {
            if !vars.contains(v) {
                return Err(DisplacerError::BadTemplate(format!("?{v} does not occur in {expr}")));
            }
        }
        if input_var == answer_var {
            return Err(DisplacerError::BadTemplate(
                "input and answer variables coincide".into(),
            ));
        }
        expr.check_safety()?;
        Ok(QueryTemplate {
            expr,
            input_var,
            answer_var,
        })
    }

    pub fn parse(text: &str, input_var: &str, answer_var: &str) -> Result<Self, DisplacerError> {
        Self::new(QueryExpr::parse(text)?, input_var, answer_var)
    }

    /// The query with the input hole filled.
    pub fn instantiate(&self, concept: &SExpr) -> QueryExpr {
        let mut b = Binding::new();
        b.insert(self.input_var.clone(), concept.clone());
        self.expr.substitute(&b)
    }

    /// Conjuncts that mention only the answer variable, e.g. `(isa ?Y Country)`.
    pub fn answer_constraint(&self) -> Option<QueryExpr> {
        let conjuncts: Vec<&QueryExpr> = match &self.expr {
            QueryExpr::And(xs) => xs.iter().collect(),
            _ => return None,
        };
        let only_answer: Vec<QueryExpr> = conjuncts
            .into_iter()
            .filter(|c| matches!(c, QueryExpr::Pattern(_)))
            .filter(|c| c.vars() == [self.answer_var.clone()])
            .cloned()
            .collect();
        (!only_answer.is_empty()).then_some(QueryExpr::And(only_answer))
    }
}

impl std::fmt::Display for QueryTemplate {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{} [?{} -> ?{}]", self.expr, self.input_var, self.answer_var)
    }
}

/// A nearby term together with its KB senses.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NeighborSenses {
    pub term: String,
    pub distance: f64,
    pub concepts: Vec<String>,
}

/// One answer `B` of a neighbor `A`, moved to the target term `A'`.
#[derive(Debug, Clone, PartialEq)]
pub struct DisplacementEstimate {
    pub source_term: String,
    pub source_answer: String,
    pub target_term: String,
    /// `v(B) - v(A) + v(A')`
    pub estimated: Vector,
    pub source_sense: SExpr,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RankedAnswer {
    pub term: String,
    /// The value the list is sorted by; lower is better.
    pub score: f64,
    pub centroid_distance: f64,
    pub mean_distance: f64,
    pub support: usize,
    /// Maps only to concepts that fail the template's answer type.
    pub demoted: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Classification {
    pub label: String,
    /// Votes per label (majority mode) from (neighbor, answer) pairs.
    pub votes: BTreeMap<String, usize>,
    /// Winning vote share, or the winning label's distance in label-vector mode.
    pub score: f64,
}

/// Outcome of hiding one `(term, answer)` pair and re-deriving it.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HeldOutOutcome {
    pub input: String,
    pub gold: String,
    pub predicted: Option<String>,
    /// 1-based rank of the gold answer among the returned answers.
    pub rank: Option<usize>,
    pub error: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RankProbabilities {
    pub outcomes: Vec<HeldOutOutcome>,
    /// `counts[r]` = pairs whose gold answer came back at rank `r + 1`.
    pub counts: [usize; TRACKED_RANKS],
    pub missed: usize,
}

impl RankProbabilities {
    pub fn total(&self) -> usize {
        self.outcomes.len()
    }

    pub fn probabilities(&self) -> [f64; TRACKED_RANKS] {
        let n = self.total().max(1) as f64;
        self.counts.map(|c| c as f64 / n)
    }

    pub fn missed_probability(&self) -> f64 {
        self.missed as f64 / self.total().max(1) as f64
    }
}

/// Hidden pair during leave-one-out.
#[derive(Debug, Clone)]
struct Holdout {
    input: SExpr,
    answer: SExpr,
}

/// The three stores the pipelines read; all must be frozen for concurrent use.
#[derive(Debug, Clone, Copy)]
pub struct Displacer<'a> {
    pub kb: &'a KnowledgeBase,
    pub space: &'a EmbeddingSpace,
    pub lexicon: &'a Lexicon,
}

impl<'a> Displacer<'a> {
    pub fn new(kb: &'a KnowledgeBase, space: &'a EmbeddingSpace, lexicon: &'a Lexicon) -> Self {
        Displacer { kb, space, lexicon }
    }

    fn senses(&self, term: &str, cfg: &PipelineConfig) -> Vec<SExpr> {
        let mut s = self.lexicon.word2kb(term);
        s.truncate(cfg.max_senses);
        s
    }

    /// First surface form of `concept` that has a vector.
    pub fn concept_vector(&self, concept: &SExpr) -> Option<(String, Vector)> {
        let surfaces = self
            .lexicon
            .kb2word(concept)
            .unwrap_or_else(|_| vec![concept.to_string()]);
        surfaces
            .into_iter()
            .find_map(|t| self.space.word2vec(&t).ok().map(|v| (t, v)))
    }

    fn answers(
        &self,
        template: &QueryTemplate,
        concept: &SExpr,
        hide: Option<&Holdout>,
    ) -> Result<BTreeSet<SExpr>, DisplacerError> {
        let mut out: BTreeSet<SExpr> = self
            .kb
            .query(&template.instantiate(concept))?
            .into_iter()
            .filter_map(|mut b| b.remove(&template.answer_var))
            .filter(SExpr::is_ground)
            .collect();
        if let Some(h) = hide {
            if &h.input == concept {
                out.remove(&h.answer);
            }
        }
        Ok(out)
    }

    /// Nearest terms that have at least one KB sense, up to `n_neighbors`.
    pub fn expand_neighbors(&self, term: &str, cfg: &PipelineConfig) -> Result<Vec<NeighborSenses>, DisplacerError> {
        let v = self.space.word2vec(term)?;
        let exclude: HashSet<String> = [term.to_string()].into();
        let mut out = Vec::new();
        for n in self.space.vec2word(&v, cfg.search_cap, &exclude)? {
            let senses = self.senses(&n.term, cfg);
            if senses.is_empty() {
                continue;
            }
            out.push(NeighborSenses {
                term: n.term,
                distance: n.distance,
                concepts: senses.iter().map(SExpr::to_string).collect(),
            });
            if out.len() == cfg.n_neighbors {
                break;
            }
        }
        Ok(out)
    }

    /// Displacement estimates from the nearest neighbors whose senses
    /// answer the template.
    pub fn estimates(
        &self,
        term: &str,
        template: &QueryTemplate,
        cfg: &PipelineConfig,
    ) -> Result<Vec<DisplacementEstimate>, DisplacerError> {
        self.estimates_hiding(term, template, cfg, None)
    }

    fn estimates_hiding(
        &self,
        term: &str,
        template: &QueryTemplate,
        cfg: &PipelineConfig,
        hide: Option<&Holdout>,
    ) -> Result<Vec<DisplacementEstimate>, DisplacerError> {
        cfg.validate().map_err(DisplacerError::BadConfig)?;
        let target = self.space.word2vec(term)?;
        let exclude: HashSet<String> = [term.to_string()].into();
        let mut out = Vec::new();
        let mut used = 0;
        for n in self.space.vec2word(&target, cfg.search_cap, &exclude)? {
            let Ok(source) = self.space.word2vec(&n.term) else {
                continue;
            };
            let mut found = false;
            for sense in self.senses(&n.term, cfg) {
                for answer in self.answers(template, &sense, hide)? {
                    let Some((surface, vb)) = self.concept_vector(&answer) else {
                        continue;
                    };
                    found = true;
                    out.push(DisplacementEstimate {
                        source_term: n.term.clone(),
                        source_answer: surface,
                        target_term: term.to_string(),
                        estimated: &(&vb - &source) + &target,
                        source_sense: sense.clone(),
                    });
                }
            }
            if found {
                used += 1;
                if used == cfg.n_neighbors {
                    break;
                }
            }
        }
        if out.is_empty() {
            return Err(DisplacerError::NoCoverage(term.to_string()));
        }
        Ok(out)
    }

    /// Whether a candidate surface term is known to violate the answer type.
    fn violates(&self, constraint: &QueryExpr, answer_var: &str, term: &str) -> Result<bool, DisplacerError> {
        let senses = self.lexicon.word2kb(term);
        if senses.is_empty() {
            return Ok(false);
        }
        for s in senses {
            let mut b = Binding::new();
            b.insert(answer_var.to_string(), s);
            if !self.kb.query(&constraint.substitute(&b))?.is_empty() {
                return Ok(false);
            }
        }
        Ok(true)
    }

    /// Single-answer estimate for `term`: average the displaced answers of
    /// its neighbors and rank the vocabulary around that average.
    pub fn displace_single(
        &self,
        term: &str,
        template: &QueryTemplate,
        cfg: &PipelineConfig,
    ) -> Result<Vec<RankedAnswer>, DisplacerError> {
        self.displace_single_hiding(term, template, cfg, None)
    }

    fn displace_single_hiding(
        &self,
        term: &str,
        template: &QueryTemplate,
        cfg: &PipelineConfig,
        hide: Option<&Holdout>,
    ) -> Result<Vec<RankedAnswer>, DisplacerError> {
        let estimates = self.estimates_hiding(term, template, cfg, hide)?;
        let centroid = Vector::mean(estimates.iter().map(|e| &e.estimated)).expect("nonempty");
        let mut exclude: HashSet<String> = estimates.iter().map(|e| e.source_term.clone()).collect();
        exclude.insert(term.to_string());

        let pool = cfg.answers_returned.max(MIN_CANDIDATE_POOL);
        let candidates = self.space.vec2word(&centroid, pool, &exclude)?;
        let constraint = template.answer_constraint();

        // each estimate votes for the candidate nearest to it
        let mut support = vec![0usize; candidates.len()];
        let mut mean = vec![0.0f64; candidates.len()];
        let mut voted: Vec<BTreeSet<&str>> = vec![BTreeSet::new(); candidates.len()];
        for e in &estimates {
            let mut best = (usize::MAX, f64::INFINITY);
            for (i, c) in candidates.iter().enumerate() {
                let d = self.space.distance_to(&e.estimated, &c.term).unwrap_or(2.0);
                mean[i] += d;
                if d < best.1 {
                    best = (i, d);
                }
            }
            if best.0 != usize::MAX && voted[best.0].insert(e.source_term.as_str()) {
                support[best.0] += 1;
            }
        }
        let mut ranked = Vec::with_capacity(candidates.len());
        for (i, c) in candidates.into_iter().enumerate() {
            let mean_distance = mean[i] / estimates.len() as f64;
            let demoted = match &constraint {
                Some(q) => self.violates(q, &template.answer_var, &c.term)?,
                None => false,
            };
            ranked.push(RankedAnswer {
                score: match cfg.ranking {
                    Ranking::Centroid => c.distance,
                    Ranking::MeanDistance => mean_distance,
                },
                term: c.term,
                centroid_distance: c.distance,
                mean_distance,
                support: support[i],
                demoted,
            });
        }
        sort_answers(&mut ranked);
        ranked.truncate(cfg.answers_returned);
        Ok(ranked)
    }

    /// Labels `term` from the template answers of its neighbors.
    pub fn classify_by_neighbors(
        &self,
        term: &str,
        template: &QueryTemplate,
        labels: &[String],
        cfg: &PipelineConfig,
    ) -> Result<Classification, DisplacerError> {
        let estimates = self.estimates(term, template, cfg)?;
        let label_of = |answer: &str| labels.iter().find(|l| l.eq_ignore_ascii_case(answer)).cloned();
        match cfg.classify_mode {
            ClassifyMode::Majority => {
                let mut votes: BTreeMap<String, usize> = labels.iter().map(|l| (l.clone(), 0)).collect();
                let mut seen = HashSet::new();
                for e in &estimates {
                    let Some(label) = label_of(&e.source_answer) else {
                        continue;
                    };
                    if seen.insert((e.source_term.as_str(), label.clone())) {
                        *votes.get_mut(&label).unwrap() += 1;
                    }
                }
                let total: usize = votes.values().sum();
                if total == 0 {
                    return Err(DisplacerError::NoCoverage(term.to_string()));
                }
                let (best, &count) = votes.iter().max_by(|a, b| a.1.cmp(b.1).then(b.0.cmp(a.0))).unwrap();
                if 2 * count <= total {
                    let top: Vec<String> = votes
                        .iter()
                        .filter(|(_, &c)| c == count)
                        .map(|(l, _)| l.clone())
                        .collect();
                    return Err(DisplacerError::Tie(top));
                }
                Ok(Classification {
                    label: best.clone(),
                    score: count as f64 / total as f64,
                    votes,
                })
            }
            ClassifyMode::LabelVector => {
                let mut answer_vectors = Vec::new();
                let mut votes: BTreeMap<String, usize> = BTreeMap::new();
                for e in &estimates {
                    answer_vectors.push(self.space.word2vec(&e.source_answer)?);
                    if let Some(l) = label_of(&e.source_answer) {
                        *votes.entry(l).or_default() += 1;
                    }
                }
                let mean = Vector::mean(&answer_vectors).expect("nonempty");
                let mut best: Option<(String, f64)> = None;
                for l in labels {
                    let d = cosine_distance(&mean, &self.space.word2vec(l)?)?;
                    if best.as_ref().is_none_or(|b| d < b.1) {
                        best = Some((l.clone(), d));
                    }
                }
                let (label, score) = best.ok_or_else(|| DisplacerError::BadConfig("no labels given".into()))?;
                Ok(Classification { label, votes, score })
            }
        }
    }

    /// All `(input, answer)` concept pairs of the template, optionally
    /// restricted to inputs satisfying `domain` (which uses the input variable).
    pub fn template_pairs(
        &self,
        template: &QueryTemplate,
        domain: Option<&QueryExpr>,
    ) -> Result<Vec<(SExpr, SExpr)>, DisplacerError> {
        let mut pairs = Vec::new();
        for b in self.kb.query(&template.expr)? {
            let (Some(i), Some(a)) = (b.get(&template.input_var), b.get(&template.answer_var)) else {
                continue;
            };
            if let Some(d) = domain {
                let mut only_input = Binding::new();
                only_input.insert(template.input_var.clone(), i.clone());
                if self.kb.query(&d.substitute(&only_input))?.is_empty() {
                    continue;
                }
            }
            pairs.push((i.clone(), a.clone()));
        }
        pairs.sort();
        pairs.dedup();
        Ok(pairs)
    }

    /// Leave-one-out over every KB pair: hide it, re-derive it with
    /// [`displace_single`](Self::displace_single), record the gold rank.
    pub fn estimate_rank_probabilities(
        &self,
        template: &QueryTemplate,
        domain: Option<&QueryExpr>,
        cfg: &PipelineConfig,
    ) -> Result<RankProbabilities, DisplacerError> {
        cfg.validate().map_err(DisplacerError::BadConfig)?;
        let pairs = self.template_pairs(template, domain)?;
        if pairs.len() < 2 {
            return Err(DisplacerError::InsufficientData(pairs.len()));
        }
        self.kb.freeze()?;
        let outcomes: Vec<HeldOutOutcome> = pairs
            .par_iter()
            .map(|(input, answer)| self.held_out(template, cfg, input, answer))
            .collect();
        let mut counts = [0usize; TRACKED_RANKS];
        let mut missed = 0;
        for o in &outcomes {
            match o.rank {
                Some(r) if r <= TRACKED_RANKS => counts[r - 1] += 1,
                _ => missed += 1,
            }
        }
        Ok(RankProbabilities {
            outcomes,
            counts,
            missed,
        })
    }

    fn held_out(
        &self,
        template: &QueryTemplate,
        cfg: &PipelineConfig,
        input: &SExpr,
        answer: &SExpr,
    ) -> HeldOutOutcome {
        let term = self.lexicon.surface(input);
        let golds = self
            .lexicon
            .kb2word(answer)
            .unwrap_or_else(|_| vec![answer.to_string()]);
        let hide = Holdout {
            input: input.clone(),
            answer: answer.clone(),
        };
        let mut outcome = HeldOutOutcome {
            input: term.clone(),
            gold: golds[0].clone(),
            predicted: None,
            rank: None,
            error: None,
        };
        match self.displace_single_hiding(&term, template, cfg, Some(&hide)) {
            Ok(ranked) => {
                outcome.predicted = ranked.first().map(|r| r.term.clone());
                outcome.rank = ranked.iter().position(|r| golds.contains(&r.term)).map(|p| p + 1);
            }
            Err(e) => outcome.error = Some(e.to_string()),
        }
        outcome
    }

    /// Multi-answer estimate: displace every neighbor answer, cluster the
    /// displaced vectors and name each cluster by the term nearest its mean.
    pub fn displace_multi(
        &self,
        term: &str,
        template: &QueryTemplate,
        cfg: &PipelineConfig,
    ) -> Result<Vec<RankedAnswer>, DisplacerError> {
        let estimates = self.estimates(term, template, cfg)?;
        let points: Vec<Vector> = estimates.iter().map(|e| e.estimated.clone()).collect();
        let k = cfg.k_clusters.resolve(points.len());
        let clustering = kmeans(&points, k, cfg.seed)?;
        let mut exclude: HashSet<String> = estimates.iter().map(|e| e.source_term.clone()).collect();
        exclude.insert(term.to_string());

        let mut best: BTreeMap<String, RankedAnswer> = BTreeMap::new();
        for (c, members) in clustering.members().into_iter().enumerate() {
            if members.is_empty() {
                continue;
            }
            let mean = &clustering.means[c];
            let Some(hit) = self.space.vec2word(mean, 1, &exclude)?.into_iter().next() else {
                continue;
            };
            let spread = members
                .iter()
                .map(|&i| cosine_distance(&points[i], mean).unwrap_or(2.0))
                .sum::<f64>()
                / members.len() as f64;
            let candidate = RankedAnswer {
                term: hit.term.clone(),
                score: spread,
                centroid_distance: hit.distance,
                mean_distance: spread,
                support: members.len(),
                demoted: false,
            };
            match best.get(&hit.term) {
                Some(prev) if prev.score <= candidate.score => {}
                _ => {
                    best.insert(hit.term, candidate);
                }
            }
        }
        let mut ranked: Vec<RankedAnswer> = best.into_values().collect();
        sort_answers(&mut ranked);
        ranked.truncate(cfg.answers_returned);
        Ok(ranked)
    }
}

fn sort_answers(ranked: &mut [RankedAnswer]) {
    ranked.sort_by(|a, b| {
        a.demoted
            .cmp(&b.demoted)
            .then(a.score.total_cmp(&b.score))
            .then_with(|| a.term.cmp(&b.term))
    });
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::kb::load_kb_str;

    /// Countries on a ring, capitals offset by a shared vector.
    fn world() -> (KnowledgeBase, EmbeddingSpace, Lexicon) {
        let names = ["Aland", "Bodia", "Cyra", "Dovia", "Elam", "Fira"];
        let mut rows = Vec::new();
        let mut kb_text = String::new();
        let mut lex = String::new();
        for (i, n) in names.iter().enumerate() {
            let t = i as f32 * 0.3;
            let country = vec![4.0, t.cos(), t.sin(), 0.0];
            let mut capital = country.clone();
            capital[3] += 2.0;
            rows.push((n.to_string(), country));
            rows.push((format!("{n}ville"), capital));
            if i > 0 {
                kb_text.push_str(&format!("(capitalCity {n}villeCity {n}Country)\n"));
            }
            kb_text.push_str(&format!("(isa {n}Country Country)\n"));
            lex.push_str(&format!(
                "{n}\t{n}Country\tname\tsingular\n{n}ville\t{n}villeCity\tname\tsingular\n"
            ));
        }
        rows.push(("noise".into(), vec![0.0, 0.0, 0.0, -1.0]));
        (
            load_kb_str(&kb_text).unwrap(),
            EmbeddingSpace::from_rows(4, rows).unwrap(),
            Lexicon::from_tsv(&lex).unwrap(),
        )
    }

    fn capital_template() -> QueryTemplate {
        QueryTemplate::parse("(capitalCity ?Y ?X)", "X", "Y").unwrap()
    }

    #[test]
    fn template_validation() {
        assert!(QueryTemplate::parse("(p ?X ?Y)", "X", "Z").is_err());
        assert!(QueryTemplate::parse("(p ?X ?Y)", "X", "X").is_err());
        let t = QueryTemplate::parse("(and (capitalCity ?Y ?X) (isa ?Y City))", "X", "Y").unwrap();
        assert_eq!(t.answer_constraint().unwrap().to_string(), "(and (isa ?Y City))");
        assert_eq!(
            t.instantiate(&SExpr::symbol("F")).to_string(),
            "(and (capitalCity ?Y F) (isa ?Y City))"
        );
    }

    #[test]
    fn recovers_missing_capital() {
        let (kb, space, lex) = world();
        let d = Displacer::new(&kb, &space, &lex);
        let ranked = d
            .displace_single("Aland", &capital_template(), &PipelineConfig::default())
            .unwrap();
        assert_eq!(ranked[0].term, "Alandville");
        assert!(ranked[0].centroid_distance < 1e-6);
        assert!(ranked.windows(2).all(|w| w[0].score <= w[1].score));
    }

    #[test]
    fn identity_displacement() {
        let (kb, space, lex) = world();
        let d = Displacer::new(&kb, &space, &lex);
        let est = d
            .estimates("Bodia", &capital_template(), &PipelineConfig::default())
            .unwrap();
        // with A' = A the estimate is v(B) itself
        let e = &est[0];
        let self_est = &(&space.word2vec(&e.source_answer).unwrap() - &space.word2vec(&e.source_term).unwrap())
            + &space.word2vec(&e.source_term).unwrap();
        assert_eq!(self_est, space.word2vec(&e.source_answer).unwrap());
    }

    #[test]
    fn no_coverage() {
        let (_, space, lex) = world();
        let kb = KnowledgeBase::new();
        let d = Displacer::new(&kb, &space, &lex);
        assert_eq!(
            d.displace_single("Aland", &capital_template(), &PipelineConfig::default()),
            Err(DisplacerError::NoCoverage("Aland".into()))
        );
    }

    #[test]
    fn leave_one_out_on_exact_world() {
        let (kb, space, lex) = world();
        let d = Displacer::new(&kb, &space, &lex);
        let table = d
            .estimate_rank_probabilities(&capital_template(), None, &PipelineConfig::default())
            .unwrap();
        assert_eq!(table.total(), 5);
        assert_eq!(table.counts, [5, 0, 0, 0]);
        let p = table.probabilities();
        assert!((p.iter().sum::<f64>() + table.missed_probability() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn majority_votes() {
        let kb = load_kb_str("(gender Al Male)\n(gender Bo Male)\n(gender Cy Male)\n(gender Di Female)\n").unwrap();
        let space = EmbeddingSpace::from_rows(
            3,
            [
                ("Q", vec![1.0, 0.0, 0.0]),
                ("Al", vec![1.0, 0.1, 0.0]),
                ("Bo", vec![1.0, 0.2, 0.0]),
                ("Cy", vec![1.0, 0.3, 0.0]),
                ("Di", vec![1.0, 0.4, 0.0]),
                ("male", vec![0.0, 1.0, 0.0]),
                ("female", vec![0.0, 0.0, 1.0]),
            ],
        )
        .unwrap();
        let lex = Lexicon::from_tsv(
            "Al\tAl\tname\tsingular\nBo\tBo\tname\tsingular\nCy\tCy\tname\tsingular\nDi\tDi\tname\tsingular\nmale\tMale\tadjective\tn/a\nfemale\tFemale\tadjective\tn/a\n",
        )
        .unwrap();
        let d = Displacer::new(&kb, &space, &lex);
        let t = QueryTemplate::parse("(gender ?N ?G)", "N", "G").unwrap();
        let labels = vec!["male".to_string(), "female".to_string()];
        let c = d
            .classify_by_neighbors("Q", &t, &labels, &PipelineConfig::default())
            .unwrap();
        assert_eq!(c.label, "male");
        assert_eq!(c.votes["male"], 3);
        assert_eq!(c.score, 0.75);

        let two = PipelineConfig {
            n_neighbors: 2,
            ..Default::default()
        };
        let c = d.classify_by_neighbors("Q", &t, &labels, &two).unwrap();
        assert_eq!(c.score, 1.0);

        let kb2 = load_kb_str("(gender Al Male)\n(gender Bo Female)\n").unwrap();
        let d2 = Displacer::new(&kb2, &space, &lex);
        assert!(matches!(
            d2.classify_by_neighbors("Q", &t, &labels, &PipelineConfig::default()),
            Err(DisplacerError::Tie(_))
        ));
        let lv = PipelineConfig {
            classify_mode: ClassifyMode::LabelVector,
            ..Default::default()
        };
        assert_eq!(d.classify_by_neighbors("Q", &t, &labels, &lv).unwrap().label, "male");
    }

    #[test]
    fn multi_single_cluster() {
        let kb = load_kb_str("(partOf M1 Blade)\n(partOf M2 Blade)\n").unwrap();
        let space = EmbeddingSpace::from_rows(
            3,
            [
                ("m0", vec![1.0, 0.0, 0.0]),
                ("m1", vec![1.0, 0.0, 0.0]),
                ("m2", vec![1.0, 0.0, 0.0]),
                ("blade", vec![1.0, 1.0, 0.0]),
                ("other", vec![0.0, 0.0, 1.0]),
            ],
        )
        .unwrap();
        let lex = Lexicon::from_tsv("m1\tM1\tnoun\tsingular\nm2\tM2\tnoun\tsingular\nblade\tBlade\tnoun\tsingular\n")
            .unwrap();
        let d = Displacer::new(&kb, &space, &lex);
        let t = QueryTemplate::parse("(partOf ?M ?P)", "M", "P").unwrap();
        let cfg = PipelineConfig {
            k_clusters: ClusterCount::Fixed(1),
            ..Default::default()
        };
        let out = d.displace_multi("m0", &t, &cfg).unwrap();
        assert_eq!(out.len(), 1);
        assert_eq!(out[0].term, "blade");
        assert_eq!(out[0].score, 0.0);
        assert_eq!(out[0].support, 2);
    }
}
