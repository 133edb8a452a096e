//! The 45-element structure on `ℤ₅ × 9` whose elements all share one
//! three-variable type but are not all automorphic, together with the
//! relation-algebra closure of its basic relations.

use std::collections::HashSet;

use serde::Serialize;
use thiserror::Error;

use crate::automorphism::orbits;
use crate::companion::check_homogeneous;
use crate::relation::{ra_apply, BinRel, RaOp};
use crate::structure::FinStructure;
use crate::types::{refine_pairs, refine_triples, RefineError, DEFAULT_TRIPLE_BUDGET};

pub const LEVELS: usize = 5;
pub const BLOCK: usize = 9;
pub const ADN_SIZE: usize = LEVELS * BLOCK;
pub const DEFAULT_CLOSURE_CAP: usize = 100_000;

/// `s = (012)(345)(678)` as an image table.
pub const S_PERM: [usize; 9] = [1, 2, 0, 4, 5, 3, 7, 8, 6];
/// `g = (036)(147)(258)` as an image table.
pub const G_PERM: [usize; 9] = [3, 4, 5, 6, 7, 8, 0, 1, 2];

#[rustfmt::skip]
/// `{0,3,6}×{0,1,2} ∪ {1,4,7}×{3,4,5} ∪ {2,5,8}×{6,7,8}`.
pub const R_TABLE: [(usize, usize); 27] = [
    (0, 0), (0, 1), (0, 2), (3, 0), (3, 1), (3, 2), (6, 0), (6, 1), (6, 2),
    (1, 3), (1, 4), (1, 5), (4, 3), (4, 4), (4, 5), (7, 3), (7, 4), (7, 5),
    (2, 6), (2, 7), (2, 8), (5, 6), (5, 7), (5, 8), (8, 6), (8, 7), (8, 8),
];

#[rustfmt::skip]
/// `{0,4,8}×{0,5,7} ∪ {1,5,6}×{1,3,8} ∪ {2,3,7}×{2,4,6}`.
pub const B_TABLE: [(usize, usize); 27] = [
    (0, 0), (0, 5), (0, 7), (4, 0), (4, 5), (4, 7), (8, 0), (8, 5), (8, 7),
    (1, 1), (1, 3), (1, 8), (5, 1), (5, 3), (5, 8), (6, 1), (6, 3), (6, 8),
    (2, 2), (2, 4), (2, 6), (3, 2), (3, 4), (3, 6), (7, 2), (7, 4), (7, 6),
];

/// Element `(i, j)` of `5 × 9`.
pub fn encode(level: usize, j: usize) -> usize {
    BLOCK * level + j
}

fn lifted(step: usize, table: impl Fn(usize, usize) -> bool) -> Vec<(usize, usize)> {
    let mut out = Vec::new();
    for i in 0..LEVELS {
        for j in 0..BLOCK {
            for k in 0..BLOCK {
                if table(j, k) {
                    out.push((encode(i, j), encode((i + step) % LEVELS, k)));
                }
            }
        }
    }
    out
}

/// The structure with relations `S`, `G` (permutations within a level),
/// `R` (level `i` to `i+1` via `r`) and `B` (level `i` to `i+2` via `b`).
pub fn build_adn_model() -> FinStructure {
    let in_table = |t: &'static [(usize, usize)]| move |j: usize, k: usize| t.contains(&(j, k));
    FinStructure::new("ADN45", ADN_SIZE)
        .and_then(|m| m.with_relation("S", lifted(0, |j, k| S_PERM[j] == k)))
        .and_then(|m| m.with_relation("G", lifted(0, |j, k| G_PERM[j] == k)))
        .and_then(|m| m.with_relation("R", lifted(1, in_table(&R_TABLE))))
        .and_then(|m| m.with_relation("B", lifted(2, in_table(&B_TABLE))))
        .expect("well-formed model")
}

/// Closure of a set of relations under the relation-algebra operations.
#[derive(Debug, Clone)]
pub struct RaClosure {
    pub base: usize,
    pub generators: Vec<BinRel>,
    /// Elements in insertion order; identity and generators first.
    pub elements: Vec<BinRel>,
    pub cap: usize,
    /// False when the cap stopped the closure early.
    pub complete: bool,
}

impl RaClosure {
    pub fn len(&self) -> usize {
        self.elements.len()
    }

    pub fn is_empty(&self) -> bool {
        self.elements.is_empty()
    }

    pub fn contains(&self, r: &BinRel) -> bool {
        self.elements.contains(r)
    }

    /// Re-applies every operation to every element (pair) and checks membership.
    pub fn is_closed(&self) -> bool {
        let set: HashSet<&BinRel> = self.elements.iter().collect();
        if !set.contains(&BinRel::identity(self.base)) {
            return false;
        }
        self.elements.iter().all(|a| {
            set.contains(&a.complement())
                && set.contains(&a.converse())
                && self.elements.iter().all(|b| {
                    set.contains(&a.union(b).unwrap()) && set.contains(&a.compose(b).unwrap())
                })
        })
    }
}

/// Breadth-first closure from the identity and `generators`: element `i` is
/// complemented and conversed, then combined with every `j ≤ i` by union and
/// both compositions, until nothing new appears or `cap` elements exist.
pub fn ra_closure(base: usize, generators: &[BinRel], cap: usize) -> RaClosure {
    let mut elements: Vec<BinRel> = Vec::new();
    let mut seen: HashSet<BinRel> = HashSet::new();
    let mut complete = true;
    let mut add = |r: BinRel, elements: &mut Vec<BinRel>| -> bool {
        if seen.contains(&r) {
            return true;
        }
        if elements.len() >= cap {
            return false;
        }
        seen.insert(r.clone());
        elements.push(r);
        true
    };
    let mut ok = add(BinRel::identity(base), &mut elements);
    for g in generators {
        assert_eq!(g.size(), base, "generator over a different base");
        ok = ok && add(g.clone(), &mut elements);
    }
    let mut i = 0;
    'outer: while ok && i < elements.len() {
        let a = elements[i].clone();
        for op in [RaOp::Complement, RaOp::Converse] {
            if !add(ra_apply(op, &a, None).expect("unary"), &mut elements) {
                ok = false;
                break 'outer;
            }
        }
        for j in 0..=i {
            let b = elements[j].clone();
            let results = [
                ra_apply(RaOp::Union, &a, Some(&b)),
                ra_apply(RaOp::Compose, &a, Some(&b)),
                ra_apply(RaOp::Compose, &b, Some(&a)),
            ];
            for r in results {
                if !add(r.expect("same base"), &mut elements) {
                    ok = false;
                    break 'outer;
                }
            }
        }
        i += 1;
    }
    if !ok {
        complete = false;
    }
    RaClosure {
        base,
        generators: generators.to_vec(),
        elements,
        cap,
        complete,
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct AdnSizes {
    pub universe: usize,
    pub s: usize,
    pub g: usize,
    pub r: usize,
    pub b: usize,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct AdnReport {
    pub sizes: AdnSizes,
    pub diag_color_count_2: usize,
    pub diag_color_count_3: usize,
    pub orbit_count: usize,
    pub orbits: Vec<Vec<usize>>,
    pub homogeneous: bool,
    pub conclusions: Vec<String>,
    /// Claims reported but not checked here.
    pub unchecked: Vec<String>,
}

#[derive(Debug, Error, PartialEq)]
pub enum AdnError {
    #[error(transparent)]
    Refine(#[from] RefineError),
    #[error("check failed: {0}")]
    CheckFailed(String, Box<AdnReport>),
}

/// Sizes, uniform 2- and 3-types, orbit count and the resulting conclusions.
pub fn verify_adn() -> Result<AdnReport, AdnError> {
    verify_adn_with_budget(DEFAULT_TRIPLE_BUDGET)
}

pub fn verify_adn_with_budget(budget: usize) -> Result<AdnReport, AdnError> {
    let m = build_adn_model();
    let len = |name: &str| m.relation(name).map_or(0, BinRel::len);
    let sizes = AdnSizes {
        universe: m.size(),
        s: len("S"),
        g: len("G"),
        r: len("R"),
        b: len("B"),
    };
    let pairs = refine_pairs(std::slice::from_ref(&m))?;
    let triples = refine_triples(std::slice::from_ref(&m), budget)?;
    let orbits = orbits(&m);
    let diag2 = pairs.diagonal_colors(0).len();
    let diag3 = triples.diagonal_colors(0).len();

    let mut failures = Vec::new();
    if sizes != (AdnSizes { universe: 45, s: 45, g: 45, r: 135, b: 135 }) {
        failures.push(format!("unexpected sizes {sizes:?}"));
    }
    if diag2 != 1 {
        failures.push(format!("{diag2} diagonal pair colors"));
    }
    if diag3 != 1 {
        failures.push(format!("{diag3} diagonal triple colors"));
    }
    if orbits.len() < 2 {
        failures.push("automorphisms act transitively".to_string());
    }
    let mut conclusions = Vec::new();
    if diag3 == 1 && orbits.len() >= 2 {
        conclusions.push("not 3,1-transitive".to_string());
        conclusions.push("not transitive".to_string());
    }
    let report = AdnReport {
        sizes,
        diag_color_count_2: diag2,
        diag_color_count_3: diag3,
        orbit_count: orbits.len(),
        orbits,
        homogeneous: check_homogeneous(&m).holds,
        conclusions,
        unchecked: vec!["not 3-equivalent to any transitive model (rests on the cited relation-algebra result)".to_string()],
    };
    if let Some(first) = failures.first() {
        return Err(AdnError::CheckFailed(first.clone(), Box::new(report)));
    }
    Ok(report)
}
