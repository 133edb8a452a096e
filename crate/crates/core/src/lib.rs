//! Finite model theory for binary structures in two- and three-variable
//! logic: stable colorings as types, 2-partial isomorphisms, transitive
//! companions, automorphism search, definability checks, and a 45-element
//! structure that no transitive model matches in three variables.

pub mod adn;
pub mod automorphism;
pub mod beth;
pub mod companion;
pub mod corpus;
pub mod equiv;
pub mod fixtures;
pub mod formula;
pub mod relation;
pub mod structure;
pub mod types;

pub use automorphism::{check_31_transitive, check_transitive, find_automorphism, orbits, Permutation};
pub use companion::{build_companion, check_homogeneous, CompanionResult};
pub use equiv::{build_iso2, equiv2, equiv3, verify_iso2, PartialIso2};
pub use formula::{evaluate, parse_formula, Formula, Mode, Var};
pub use relation::BinRel;
pub use structure::FinStructure;
pub use types::{refine_pairs, refine_triples, ColorTable};
