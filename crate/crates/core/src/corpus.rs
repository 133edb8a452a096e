//! Seeded random structures.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::relation::BinRel;
use crate::structure::FinStructure;

pub const DEFAULT_SEED: u64 = 0x05ee_df02;
pub const DEFAULT_COUNT: usize = 200;
pub const MAX_SIZE: usize = 6;
pub const DENSITY: f64 = 0.3;
pub const RELATION_NAMES: [&str; 2] = ["E", "F"];

/// Each pair lands in each relation independently with probability `density`.
pub fn random_structure(rng: &mut impl Rng, name: &str, size: usize, relations: usize, density: f64) -> FinStructure {
    let mut m = FinStructure::new(name, size).expect("nonempty");
    for rel_name in RELATION_NAMES.iter().take(relations) {
        let rel = BinRel::from_fn(size, |_, _| rng.gen_bool(density));
        m = m.expand_with_relation(rel_name, &rel).expect("fresh");
    }
    m
}

/// `count` structures of size `1..=6` with one or two relations.
pub fn corpus(seed: u64, count: usize) -> Vec<FinStructure> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..count)
        .map(|i| {
            let size = rng.gen_range(1..=MAX_SIZE);
            let relations = rng.gen_range(1..=RELATION_NAMES.len());
            random_structure(&mut rng, &format!("R{i:03}"), size, relations, DENSITY)
        })
        .collect()
}

pub fn default_corpus() -> Vec<FinStructure> {
    corpus(DEFAULT_SEED, DEFAULT_COUNT)
}
