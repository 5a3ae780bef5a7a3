//! Hierarchical navigable small-world graph over unit-normalized rows,
//! searched with cosine distance.

use std::cmp::{Ordering, Reverse};
use std::collections::BinaryHeap;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct HnswParams {
    /// Links per node on upper layers; layer 0 keeps twice as many.
    pub m: usize,
    pub ef_construction: usize,
    pub ef_search: usize,
    pub seed: u64,
}

impl Default for HnswParams {
    fn default() -> Self {
        HnswParams {
            m: 20,
            ef_construction: 64,
            ef_search: 400,
            seed: 0x5eed,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
struct Scored {
    dist: f32,
    id: u32,
}

impl Eq for Scored {}

impl Ord for Scored {
    fn cmp(&self, other: &Self) -> Ordering {
        self.dist.total_cmp(&other.dist).then(self.id.cmp(&other.id))
    }
}

impl PartialOrd for Scored {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

#[derive(Debug)]
pub(crate) struct Hnsw {
    params: HnswParams,
    dim: usize,
    unit: Vec<f32>,
    /// `links[node][layer]`
    links: Vec<Vec<Vec<u32>>>,
    entry: u32,
    top_layer: usize,
}

struct Visited {
    stamp: Vec<u32>,
    gen: u32,
}

impl Visited {
    fn new(n: usize) -> Self {
        Visited {
            stamp: vec![0; n],
            gen: 0,
        }
    }

    fn reset(&mut self) {
        self.gen = self.gen.wrapping_add(1);
        if self.gen == 0 {
            self.stamp.fill(0);
            self.gen = 1;
        }
    }

    /// Marks `id`; returns false if it was already marked.
    fn insert(&mut self, id: u32) -> bool {
        let slot = &mut self.stamp[id as usize];
        if *slot == self.gen {
            false
        } else {
            *slot = self.gen;
            true
        }
    }
}

#[inline]
fn dot(a: &[f32], b: &[f32]) -> f32 {
    let mut acc = [0f32; 8];
    let chunks = a.len() / 8;
    for c in 0..chunks {
        let (x, y) = (&a[c * 8..c * 8 + 8], &b[c * 8..c * 8 + 8]);
        for i in 0..8 {
            acc[i] += x[i] * y[i];
        }
    }
    let mut s: f32 = acc.iter().sum();
    for i in chunks * 8..a.len() {
        s += a[i] * b[i];
    }
    s
}

impl Hnsw {
    /// Builds the graph over `rows` (row-major, `dim` columns).
    pub fn build(rows: &[f32], dim: usize, params: HnswParams) -> Self {
        let n = rows.len().checked_div(dim).unwrap_or(0);
        let mut unit = Vec::with_capacity(rows.len());
        for row in rows.chunks_exact(dim.max(1)) {
            let norm = dot(row, row).sqrt();
            let inv = if norm > 0.0 { 1.0 / norm } else { 0.0 };
            unit.extend(row.iter().map(|x| x * inv));
        }
        let mut graph = Hnsw {
            params,
            dim,
            unit,
            links: Vec::with_capacity(n),
            entry: 0,
            top_layer: 0,
        };
        let mut rng = ChaCha8Rng::seed_from_u64(params.seed);
        let level_mult = 1.0 / (params.m.max(2) as f64).ln();
        let mut visited = Visited::new(n);
        for id in 0..n as u32 {
            let r: f64 = rng.random::<f64>().max(f64::MIN_POSITIVE);
            let level = ((-r.ln()) * level_mult).floor() as usize;
            graph.insert(id, level.min(16), &mut visited);
        }
        graph
    }

    fn vector(&self, id: u32) -> &[f32] {
        let s = id as usize * self.dim;
        &self.unit[s..s + self.dim]
    }

    fn dist_to(&self, q: &[f32], id: u32) -> f32 {
        1.0 - dot(q, self.vector(id))
    }

    fn max_links(&self, layer: usize) -> usize {
        if layer == 0 {
            self.params.m * 2
        } else {
            self.params.m
        }
    }

    fn insert(&mut self, id: u32, level: usize, visited: &mut Visited) {
        self.links.push(vec![Vec::new(); level + 1]);
        if id == 0 {
            self.entry = 0;
            self.top_layer = level;
            return;
        }
        let q = self.vector(id).to_vec();
        let mut ep = Scored {
            dist: self.dist_to(&q, self.entry),
            id: self.entry,
        };
        for layer in (level + 1..=self.top_layer).rev() {
            ep = self.greedy(&q, ep, layer);
        }
        let mut eps = vec![ep];
        for layer in (0..=level.min(self.top_layer)).rev() {
            let found = self.search_layer(&q, &eps, self.params.ef_construction, layer, visited);
            let chosen = self.select(&found, self.params.m);
            self.links[id as usize][layer] = chosen.iter().map(|s| s.id).collect();
            for s in &chosen {
                self.link_back(s.id, id, layer);
            }
            eps = found;
        }
        if level > self.top_layer {
            self.top_layer = level;
            self.entry = id;
        }
    }

    fn link_back(&mut self, from: u32, to: u32, layer: usize) {
        let cap = self.max_links(layer);
        let list = &mut self.links[from as usize][layer];
        list.push(to);
        if list.len() <= cap {
            return;
        }
        let base = self.vector(from).to_vec();
        let mut cands: Vec<Scored> = self.links[from as usize][layer]
            .iter()
            .map(|&n| Scored {
                dist: self.dist_to(&base, n),
                id: n,
            })
            .collect();
        cands.sort();
        let kept = self.select(&cands, cap);
        self.links[from as usize][layer] = kept.into_iter().map(|s| s.id).collect();
    }

    /// Diversity heuristic: keep a candidate only if it is closer to the base
    /// than to every already-kept neighbor, then top up with the rest.
    /// `sorted` must be ascending by distance.
    fn select(&self, sorted: &[Scored], m: usize) -> Vec<Scored> {
        let mut kept: Vec<Scored> = Vec::with_capacity(m);
        let mut pruned = Vec::new();
        for &c in sorted {
            if kept.len() >= m {
                break;
            }
            let cv = self.vector(c.id);
            if kept.iter().all(|k| 1.0 - dot(cv, self.vector(k.id)) > c.dist) {
                kept.push(c);
            } else {
                pruned.push(c);
            }
        }
        for c in pruned {
            if kept.len() >= m {
                break;
            }
            kept.push(c);
        }
        kept
    }

    fn greedy(&self, q: &[f32], mut cur: Scored, layer: usize) -> Scored {
        loop {
            let mut improved = false;
            for &n in &self.links[cur.id as usize][layer] {
                let d = self.dist_to(q, n);
                if d < cur.dist {
                    cur = Scored { dist: d, id: n };
                    improved = true;
                }
            }
            if !improved {
                return cur;
            }
        }
    }

    /// Beam search on one layer; returns up to `ef` results ascending.
    fn search_layer(&self, q: &[f32], entry: &[Scored], ef: usize, layer: usize, visited: &mut Visited) -> Vec<Scored> {
        visited.reset();
        let mut frontier: BinaryHeap<Reverse<Scored>> = BinaryHeap::new();
        let mut best: BinaryHeap<Scored> = BinaryHeap::new();
        for &e in entry {
            if visited.insert(e.id) {
                frontier.push(Reverse(e));
                best.push(e);
            }
        }
        while best.len() > ef {
            best.pop();
        }
        while let Some(Reverse(c)) = frontier.pop() {
            if best.len() >= ef && c.dist > best.peek().unwrap().dist {
                break;
            }
            for &n in &self.links[c.id as usize][layer] {
                if !visited.insert(n) {
                    continue;
                }
                let d = self.dist_to(q, n);
                if best.len() < ef || d < best.peek().unwrap().dist {
                    let s = Scored { dist: d, id: n };
                    frontier.push(Reverse(s));
                    best.push(s);
                    if best.len() > ef {
                        best.pop();
                    }
                }
            }
        }
        best.into_sorted_vec()
    }

    /// Approximate nearest rows to `query` (any norm), ascending by cosine
    /// distance, at most `k` results.
    pub fn search(&self, query: &[f32], k: usize) -> Vec<(usize, f32)> {
        if self.links.is_empty() || k == 0 {
            return Vec::new();
        }
        let norm = dot(query, query).sqrt();
        if norm == 0.0 {
            return Vec::new();
        }
        let q: Vec<f32> = query.iter().map(|x| x / norm).collect();
        let mut ep = Scored {
            dist: self.dist_to(&q, self.entry),
            id: self.entry,
        };
        for layer in (1..=self.top_layer).rev() {
            ep = self.greedy(&q, ep, layer);
        }
        let mut visited = Visited::new(self.links.len());
        let ef = self.params.ef_search.max(k);
        let mut found = self.search_layer(&q, &[ep], ef, 0, &mut visited);
        found.truncate(k);
        found.into_iter().map(|s| (s.id as usize, s.dist)).collect()
    }

    #[cfg(test)]
    fn len(&self) -> usize {
        self.links.len()
    }
}
