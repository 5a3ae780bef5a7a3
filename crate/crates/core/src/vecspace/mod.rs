//! Embedding store: term lookup, phrase composition and nearest-neighbor
//! search under cosine distance.

mod hnsw;
mod io;
mod vector;

use std::cmp::Ordering;
use std::collections::{HashMap, HashSet};
use std::sync::OnceLock;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

pub use hnsw::HnswParams;
pub use io::{LoadError, LoadOptions};
pub use vector::{cosine_distance, Vector};

use hnsw::Hnsw;
use vector::cosine_from_parts;

const STOPWORDS: [&str; 4] = ["a", "an", "the", "of"];

/// Below this many rows an exact scan runs on the calling thread.
const PARALLEL_SCAN_MIN: usize = 20_000;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum VecError {
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },
    #[error("zero vector has no direction")]
    ZeroVector,
    #[error("out of vocabulary: {0}")]
    OutOfVocabulary(String),
    #[error("non-finite component")]
    NonFinite,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SearchMode {
    #[default]
    Exact,
    Approximate,
}

impl std::str::FromStr for SearchMode {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "exact" => Ok(SearchMode::Exact),
            "approximate" | "approx" => Ok(SearchMode::Approximate),
            other => Err(format!("unknown search mode {other:?}")),
        }
    }
}

impl std::fmt::Display for SearchMode {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            SearchMode::Exact => "exact",
            SearchMode::Approximate => "approximate",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Neighbor {
    pub term: String,
    /// Cosine distance in `[0, 2]`.
    pub distance: f64,
}

fn by_distance_then_term(a: &Neighbor, b: &Neighbor) -> Ordering {
    a.distance.total_cmp(&b.distance).then_with(|| a.term.cmp(&b.term))
}

/// Vocabulary of nonzero vectors of one dimension, immutable once built
/// except through [`EmbeddingSpace::insert`].
#[derive(Debug)]
pub struct EmbeddingSpace {
    dim: usize,
    terms: Vec<String>,
    ids: HashMap<String, usize>,
    /// Row-major, `dim` columns.
    rows: Vec<f32>,
    sq_norms: Vec<f64>,
    mode: SearchMode,
    hnsw_params: HnswParams,
    hnsw: OnceLock<Hnsw>,
}

impl Clone for EmbeddingSpace {
    fn clone(&self) -> Self {
        EmbeddingSpace {
            dim: self.dim,
            terms: self.terms.clone(),
            ids: self.ids.clone(),
            rows: self.rows.clone(),
            sq_norms: self.sq_norms.clone(),
            mode: self.mode,
            hnsw_params: self.hnsw_params,
            hnsw: OnceLock::new(),
        }
    }
}

fn dot_f32_f64(row: &[f32], q: &[f64]) -> f64 {
    row.iter().zip(q).map(|(&r, &x)| f64::from(r) * x).sum()
}

impl EmbeddingSpace {
    pub fn new(dim: usize) -> Self {
        EmbeddingSpace {
            dim,
            terms: Vec::new(),
            ids: HashMap::new(),
            rows: Vec::new(),
            sq_norms: Vec::new(),
            mode: SearchMode::Exact,
            hnsw_params: HnswParams::default(),
            hnsw: OnceLock::new(),
        }
    }

    /// Builds a space from `(term, row)` pairs; later duplicates win.
    pub fn from_rows<S: Into<String>>(
        dim: usize,
        rows: impl IntoIterator<Item = (S, Vec<f32>)>,
    ) -> Result<Self, VecError> {
        let mut space = EmbeddingSpace::new(dim);
        for (term, row) in rows {
            space.insert(term, &row)?;
        }
        Ok(space)
    }

    pub fn with_search_mode(mut self, mode: SearchMode) -> Self {
        self.mode = mode;
        self
    }

    pub fn set_search_mode(&mut self, mode: SearchMode) {
        self.mode = mode;
    }

    /// Mode used by [`vec2word`](Self::vec2word).
    pub fn search_mode(&self) -> SearchMode {
        self.mode
    }

    pub fn with_hnsw_params(mut self, params: HnswParams) -> Self {
        self.hnsw_params = params;
        self.hnsw = OnceLock::new();
        self
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    /// Terms in insertion order.
    pub fn terms(&self) -> &[String] {
        &self.terms
    }

    pub fn contains(&self, term: &str) -> bool {
        self.ids.contains_key(term)
    }

    pub(crate) fn row(&self, id: usize) -> &[f32] {
        &self.rows[id * self.dim..(id + 1) * self.dim]
    }

    /// Stored vector of a vocabulary term, with no phrase handling.
    pub fn get(&self, term: &str) -> Option<Vector> {
        self.ids.get(term).map(|&id| Vector::from_f32(self.row(id)))
    }

    /// Inserts or replaces a row. Zero and non-finite rows are rejected.
    pub fn insert(&mut self, term: impl Into<String>, row: &[f32]) -> Result<(), VecError> {
        if row.len() != self.dim {
            return Err(VecError::DimensionMismatch {
                expected: self.dim,
                found: row.len(),
            });
        }
        if row.iter().any(|x| !x.is_finite()) {
            return Err(VecError::NonFinite);
        }
        let sq: f64 = row.iter().map(|&x| f64::from(x) * f64::from(x)).sum();
        if sq == 0.0 {
            return Err(VecError::ZeroVector);
        }
        let term = term.into();
        match self.ids.get(&term) {
            Some(&id) => {
                log::warn!("duplicate embedding for {term:?}; keeping the later row");
                self.rows[id * self.dim..(id + 1) * self.dim].copy_from_slice(row);
                self.sq_norms[id] = sq;
            }
            None => {
                self.ids.insert(term.clone(), self.terms.len());
                self.terms.push(term);
                self.rows.extend_from_slice(row);
                self.sq_norms.push(sq);
            }
        }
        self.hnsw = OnceLock::new();
        Ok(())
    }

    /// Vector for a term or phrase: the verbatim entry, then the
    /// underscore-joined form, then the mean of the known content words.
    pub fn word2vec(&self, phrase: &str) -> Result<Vector, VecError> {
        if let Some(v) = self.get(phrase) {
            return Ok(v);
        }
        if phrase.contains(' ') {
            let joined = phrase.split_whitespace().collect::<Vec<_>>().join("_");
            if let Some(v) = self.get(&joined) {
                return Ok(v);
            }
        }
        // sorted so the mean does not depend on word order, even in rounding
        let mut tokens: Vec<&str> = phrase
            .split_whitespace()
            .filter(|t| !STOPWORDS.contains(&t.to_lowercase().as_str()))
            .collect();
        tokens.sort_unstable();
        let known: Vec<Vector> = tokens.iter().filter_map(|t| self.get(t)).collect();
        Vector::mean(&known).ok_or_else(|| VecError::OutOfVocabulary(phrase.to_string()))
    }

    /// `v(b) - v(a) + v(c)`.
    pub fn analogy_vector(&self, a: &str, b: &str, c: &str) -> Result<Vector, VecError> {
        let (va, vb, vc) = (self.word2vec(a)?, self.word2vec(b)?, self.word2vec(c)?);
        Ok(&(&vb - &va) + &vc)
    }

    /// Cosine distance between a query and a vocabulary term.
    pub fn distance_to(&self, v: &Vector, term: &str) -> Result<f64, VecError> {
        let &id = self
            .ids
            .get(term)
            .ok_or_else(|| VecError::OutOfVocabulary(term.to_string()))?;
        self.check_query(v)?;
        Ok(self.distance_to_id(v.as_slice(), v.dot(v), id))
    }

    fn distance_to_id(&self, q: &[f64], qq: f64, id: usize) -> f64 {
        cosine_from_parts(dot_f32_f64(self.row(id), q), qq, self.sq_norms[id])
    }

    fn check_query(&self, v: &Vector) -> Result<(), VecError> {
        if v.dim() != self.dim {
            return Err(VecError::DimensionMismatch {
                expected: self.dim,
                found: v.dim(),
            });
        }
        if !v.is_finite() {
            return Err(VecError::NonFinite);
        }
        if v.dot(v) == 0.0 {
            return Err(VecError::ZeroVector);
        }
        Ok(())
    }

    /// `k` nearest terms not in `exclude`, using the space's search mode.
    pub fn vec2word(&self, v: &Vector, k: usize, exclude: &HashSet<String>) -> Result<Vec<Neighbor>, VecError> {
        self.knn_excluding(v, k, self.mode, exclude)
    }

    pub fn knn(&self, v: &Vector, k: usize, mode: SearchMode) -> Result<Vec<Neighbor>, VecError> {
        self.knn_excluding(v, k, mode, &HashSet::new())
    }

    /// Nearest terms ascending by `(distance, term)`, skipping `exclude`.
    pub fn knn_excluding(
        &self,
        v: &Vector,
        k: usize,
        mode: SearchMode,
        exclude: &HashSet<String>,
    ) -> Result<Vec<Neighbor>, VecError> {
        self.check_query(v)?;
        if k == 0 || self.is_empty() {
            return Ok(Vec::new());
        }
        let mut out = match mode {
            SearchMode::Exact => self.exact_scan(v, k, exclude),
            SearchMode::Approximate => self.approximate(v, k, exclude),
        };
        out.truncate(k);
        Ok(out)
    }

    fn exact_scan(&self, v: &Vector, k: usize, exclude: &HashSet<String>) -> Vec<Neighbor> {
        let q = v.as_slice();
        let qq = v.dot(v);
        let score = |id: usize| (self.distance_to_id(q, qq, id), id);
        let mut scored: Vec<(f64, usize)> = if self.len() >= PARALLEL_SCAN_MIN {
            (0..self.len()).into_par_iter().map(score).collect()
        } else {
            (0..self.len()).map(score).collect()
        };
        if !exclude.is_empty() {
            scored.retain(|&(_, id)| !exclude.contains(&self.terms[id]));
        }
        let cmp = |a: &(f64, usize), b: &(f64, usize)| {
            a.0.total_cmp(&b.0).then_with(|| self.terms[a.1].cmp(&self.terms[b.1]))
        };
        if scored.len() > k {
            scored.select_nth_unstable_by(k - 1, cmp);
            scored.truncate(k);
        }
        scored.sort_unstable_by(cmp);
        scored
            .into_iter()
            .map(|(distance, id)| Neighbor {
                term: self.terms[id].clone(),
                distance,
            })
            .collect()
    }

    fn approximate(&self, v: &Vector, k: usize, exclude: &HashSet<String>) -> Vec<Neighbor> {
        let index = self.index();
        let q32: Vec<f32> = v.as_slice().iter().map(|&x| x as f32).collect();
        let qq = v.dot(v);
        let wanted = (k + exclude.len()).min(self.len());
        let mut out: Vec<Neighbor> = index
            .search(&q32, wanted)
            .into_iter()
            .filter(|&(id, _)| !exclude.contains(&self.terms[id]))
            .map(|(id, _)| Neighbor {
                term: self.terms[id].clone(),
                distance: self.distance_to_id(v.as_slice(), qq, id),
            })
            .collect();
        out.sort_by(by_distance_then_term);
        out
    }

    /// Builds the approximate index now instead of on first use.
    pub fn build_index(&self) {
        self.index();
    }

    fn index(&self) -> &Hnsw {
        self.hnsw
            .get_or_init(|| Hnsw::build(&self.rows, self.dim, self.hnsw_params))
    }
}
