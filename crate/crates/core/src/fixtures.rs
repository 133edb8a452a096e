//! Named structures used across tests, the CLI and the acceptance run.

use crate::adn::build_adn_model;
use crate::structure::{disjoint_union, FinStructure};

/// One element with a loop.
pub fn loop1() -> FinStructure {
    FinStructure::new("LOOP1", 1).and_then(|m| m.with_relation("E", [(0, 0)])).unwrap()
}

/// A single directed edge `0 → 1`.
pub fn edge() -> FinStructure {
    FinStructure::new("EDGE", 2).and_then(|m| m.with_relation("E", [(0, 1)])).unwrap()
}

/// The directed cycle `i → i+1 mod n`.
pub fn cycle(n: usize) -> FinStructure {
    FinStructure::new(format!("C{n}"), n)
        .and_then(|m| m.with_relation("E", (0..n).map(|i| (i, (i + 1) % n))))
        .unwrap()
}

pub fn c3() -> FinStructure {
    cycle(3)
}

pub fn c7() -> FinStructure {
    cycle(7)
}

/// `C3` on `0..3` beside `C7` on `3..10`.
pub fn c3c7() -> FinStructure {
    disjoint_union(&c3(), &c7()).unwrap().renamed("C3C7")
}

pub fn adn45() -> FinStructure {
    build_adn_model()
}

pub const NAMES: [&str; 6] = ["LOOP1", "EDGE", "C3", "C7", "C3C7", "ADN45"];

/// Looks a fixture up by name, ignoring case.
pub fn by_name(name: &str) -> Option<FinStructure> {
    Some(match name.to_ascii_uppercase().as_str() {
        "LOOP1" => loop1(),
        "EDGE" => edge(),
        "C3" => c3(),
        "C7" => c7(),
        "C3C7" => c3c7(),
        "ADN45" => adn45(),
        _ => return None,
    })
}

/// The small fixtures, without ADN45.
pub fn small() -> Vec<FinStructure> {
    vec![loop1(), edge(), c3(), c7(), c3c7()]
}
