//! Lloyd's k-means with k-means++ seeding under squared Euclidean distance.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

use crate::vecspace::Vector;

pub const MAX_ITERATIONS: usize = 100;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum KmeansError {
    #[error("k = {k} is invalid for {n} points")]
    BadK { k: usize, n: usize },
    #[error("points have differing dimensions")]
    RaggedInput,
}

#[derive(Debug, Clone)]
pub struct Clustering {
    pub means: Vec<Vector>,
    /// Cluster index of each input point.
    pub assignments: Vec<usize>,
    /// Sum of squared distances after each assignment step.
    pub sse_history: Vec<f64>,
    pub iterations: usize,
}

impl Clustering {
    pub fn sse(&self) -> f64 {
        self.sse_history.last().copied().unwrap_or(0.0)
    }

    /// Point indices per cluster.
    pub fn members(&self) -> Vec<Vec<usize>> {
        let mut out = vec![Vec::new(); self.means.len()];
        for (i, &c) in self.assignments.iter().enumerate() {
            out[c].push(i);
        }
        out
    }
}

pub fn kmeans(points: &[Vector], k: usize, seed: u64) -> Result<Clustering, KmeansError> {
    let n = points.len();
    if k == 0 || k > n {
        return Err(KmeansError::BadK { k, n });
    }
    let dim = points[0].dim();
    if points.iter().any(|p| p.dim() != dim) {
        return Err(KmeansError::RaggedInput);
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut means = seed_means(points, k, &mut rng);
    let mut assignments = vec![usize::MAX; n];
    let mut sse_history = Vec::new();
    let mut iterations = 0;

    while iterations < MAX_ITERATIONS {
        iterations += 1;
        let mut changed = false;
        let mut sse = 0.0;
        for (i, p) in points.iter().enumerate() {
            let (best, d) = nearest(p, &means);
            sse += d;
            if assignments[i] != best {
                assignments[i] = best;
                changed = true;
            }
        }
        sse_history.push(sse);
        if !changed {
            break;
        }
        update_means(points, &assignments, &mut means);
    }
    Ok(Clustering {
        means,
        assignments,
        sse_history,
        iterations,
    })
}

fn nearest(p: &Vector, means: &[Vector]) -> (usize, f64) {
    let mut best = (0, f64::INFINITY);
    for (c, m) in means.iter().enumerate() {
        let d = p.sq_dist(m);
        if d < best.1 {
            best = (c, d);
        }
    }
    best
}

fn seed_means(points: &[Vector], k: usize, rng: &mut ChaCha8Rng) -> Vec<Vector> {
    let mut means = vec![points[rng.random_range(0..points.len())].clone()];
    let mut d2: Vec<f64> = points.iter().map(|p| p.sq_dist(&means[0])).collect();
    while means.len() < k {
        let total: f64 = d2.iter().sum();
        let pick = if total > 0.0 {
            let mut target = rng.random::<f64>() * total;
            let mut idx = d2.len() - 1;
            for (i, &w) in d2.iter().enumerate() {
                if target < w {
                    idx = i;
                    break;
                }
                target -= w;
            }
            idx
        } else {
            // every point coincides with a mean already
            rng.random_range(0..points.len())
        };
        means.push(points[pick].clone());
        for (i, p) in points.iter().enumerate() {
            d2[i] = d2[i].min(p.sq_dist(&means[means.len() - 1]));
        }
    }
    means
}

/// Recomputes each mean from its members; an empty cluster takes over the
/// point farthest from its current mean.
fn update_means(points: &[Vector], assignments: &[usize], means: &mut [Vector]) {
    let dim = points[0].dim();
    let mut sums = vec![Vector::zeros(dim); means.len()];
    let mut counts = vec![0usize; means.len()];
    for (p, &c) in points.iter().zip(assignments) {
        sums[c].add_assign(p);
        counts[c] += 1;
    }
    let mut taken = vec![false; points.len()];
    for c in 0..means.len() {
        if counts[c] > 0 {
            means[c] = sums[c].scale(1.0 / counts[c] as f64);
        }
    }
    for c in 0..means.len() {
        if counts[c] > 0 {
            continue;
        }
        let far = points
            .iter()
            .enumerate()
            .filter(|(i, _)| !taken[*i])
            .map(|(i, p)| (i, p.sq_dist(&means[assignments[i]])))
            .max_by(|a, b| a.1.total_cmp(&b.1).then(b.0.cmp(&a.0)));
        if let Some((i, _)) = far {
            taken[i] = true;
            means[c] = points[i].clone();
        }
    }
}

/// Cluster count used when none is configured: `min(ceil(sqrt(m)) + 2, m)`.
pub fn auto_k(m: usize) -> usize {
    ((m as f64).sqrt().ceil() as usize + 2).min(m)
}
