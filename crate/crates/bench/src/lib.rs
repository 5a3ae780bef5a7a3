//! Fixtures shared by the benchmarks.

use displacer_core::harness::{gen_synthetic_world, world, GeneratedWorld, RunConfig, Stores, SyntheticWorldSpec};
use displacer_core::EmbeddingSpace;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// `n` uniformly random rows of width `dim`.
pub fn random_space(n: usize, dim: usize, seed: u64) -> EmbeddingSpace {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let rows = (0..n).map(|i| {
        let row: Vec<f32> = (0..dim).map(|_| rng.random_range(-1.0..1.0)).collect();
        (format!("w{i}"), row)
    });
    EmbeddingSpace::from_rows(dim, rows).expect("rows have the declared width")
}

/// A KB text with `n` nodes on a `next` chain and a transitive `reach` rule,
/// so the closure holds roughly n^2/2 facts. The doubling rule keeps the
/// derivation depth logarithmic in `n`.
pub fn chain_kb(n: usize) -> String {
    let mut text = String::from("(<= (reach ?X ?Y) (next ?X ?Y))\n(<= (reach ?X ?Z) (reach ?X ?Y) (reach ?Y ?Z))\n");
    for i in 0..n.saturating_sub(1) {
        text.push_str(&format!("(next n{i} n{})\n", i + 1));
    }
    text
}

pub fn world(preset: &str, seed: u64) -> GeneratedWorld {
    let spec = SyntheticWorldSpec::preset(preset, seed).expect("known preset");
    gen_synthetic_world(&spec).expect("preset is valid")
}

pub fn stores(world: &GeneratedWorld) -> Stores {
    Stores::from_generated(world, &RunConfig::default()).expect("generated world parses")
}

pub fn kb_text(world: &GeneratedWorld) -> &str {
    world.file(world::KB_FILE).unwrap_or_default()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn chain_closure_size() {
        let kb = displacer_core::kb::load_kb_str(&chain_kb(10)).unwrap();
        // 9 next facts plus 45 reach pairs
        assert_eq!(kb.closure_size().unwrap(), 9 + 45);
    }

    #[test]
    fn fixtures_load() {
        assert_eq!(random_space(50, 8, 1).len(), 50);
        let w = world("capitals", 0);
        assert!(stores(&w).kb.fact_count() > 0);
    }
}
