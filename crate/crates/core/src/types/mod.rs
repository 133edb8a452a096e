//! Stable colorings of pairs and triples.
//!
//! Pair colors computed here are exactly the two-variable types of a finite
//! structure: two pairs share a color iff the duplicator wins the unbounded
//! two-pebble game between them. Refinement signatures use *sets* of
//! neighbouring colors, never multisets, since the logic cannot count.

mod charform;
mod view;

use std::collections::HashMap;

use rayon::prelude::*;
use thiserror::Error;

use crate::structure::FinStructure;

pub use charform::{characteristic_formula, CharacteristicBuilder};
pub use view::{type_view, TypeView};

/// Triple budget used when none is given.
pub const DEFAULT_TRIPLE_BUDGET: usize = 1_000_000;

pub type Color = u32;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum RefineError {
    #[error("no structures to refine")]
    NoStructures,
    #[error("signature mismatch: {0:?} vs {1:?}")]
    SignatureMismatch(Vec<String>, Vec<String>),
    #[error("{needed} tuples exceed the budget of {budget}")]
    BudgetExceeded { needed: usize, budget: usize },
    #[error("expected a table of arity {expected}, found arity {found}")]
    ArityMismatch { expected: usize, found: usize },
    #[error("unknown color {0}")]
    UnknownColor(Color),
    #[error("structure index {0} out of range")]
    UnknownStructure(usize),
}

/// The quantifier-free part of a pair type.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct AtomicPairType {
    pub equal: bool,
    /// Per relation in signature order: `R(x,x), R(x,y), R(y,x), R(y,y)`.
    pub relations: Vec<[bool; 4]>,
}

impl AtomicPairType {
    pub fn of(s: &FinStructure, a: usize, b: usize) -> Self {
        AtomicPairType {
            equal: a == b,
            relations: s
                .relations()
                .map(|(_, r)| [r.contains(a, a), r.contains(a, b), r.contains(b, a), r.contains(b, b)])
                .collect(),
        }
    }

    /// Whether `R(x,y)` holds, for the relation at `index` in signature order.
    pub fn forward(&self, index: usize) -> bool {
        self.relations[index][1]
    }

    /// Signed atoms as text, e.g. `x=y,~E(x,x),E(x,y),...`.
    pub fn describe(&self, signature: &[String]) -> String {
        const SHAPES: [(&str, &str); 4] = [("x", "x"), ("x", "y"), ("y", "x"), ("y", "y")];
        let mut parts = vec![if self.equal { "x=y".to_string() } else { "~x=y".to_string() }];
        for (name, bits) in signature.iter().zip(&self.relations) {
            for ((a, b), &on) in SHAPES.iter().zip(bits) {
                parts.push(format!("{}{name}({a},{b})", if on { "" } else { "~" }));
            }
        }
        parts.join(",")
    }
}

/// A stable coloring of all pairs (arity 2) or triples (arity 3) of one or
/// more structures over a shared color space.
#[derive(Debug, Clone)]
pub struct ColorTable {
    arity: usize,
    structures: Vec<FinStructure>,
    signature: Vec<String>,
    colors: Vec<Vec<Color>>,
    class_sizes: Vec<usize>,
    rounds: usize,
    // Pair tables only.
    history: Vec<Vec<Vec<Color>>>,
    atomic: Vec<AtomicPairType>,
    right_ext: Vec<Vec<Color>>,
    left_ext: Vec<Vec<Color>>,
    converse: Vec<Color>,
}

fn tuple_index(n: usize, tuple: &[usize]) -> usize {
    tuple.iter().fold(0, |acc, &e| acc * n + e)
}

fn check_signatures(structures: &[FinStructure]) -> Result<(), RefineError> {
    let first = structures.first().ok_or(RefineError::NoStructures)?;
    for s in &structures[1..] {
        if !first.same_signature(s) {
            return Err(RefineError::SignatureMismatch(first.signature(), s.signature()));
        }
    }
    Ok(())
}

/// Assigns dense ids to keys in order of first appearance.
struct Interner<K> {
    ids: HashMap<K, Color>,
}

impl<K: std::hash::Hash + Eq> Interner<K> {
    fn new() -> Self {
        Interner { ids: HashMap::new() }
    }

    fn id(&mut self, key: K) -> Color {
        let next = self.ids.len() as Color;
        *self.ids.entry(key).or_insert(next)
    }

    fn len(&self) -> usize {
        self.ids.len()
    }
}

fn initial_colors(structures: &[FinStructure], arity: usize) -> (Vec<Vec<Color>>, usize) {
    let mut interner = Interner::new();
    let colors = structures
        .iter()
        .map(|s| {
            let n = s.size();
            let rels: Vec<_> = s.relations().map(|(_, r)| r).collect();
            let count = n.pow(arity as u32);
            let mut out = Vec::with_capacity(count);
            let mut tuple = vec![0usize; arity];
            for idx in 0..count {
                let mut rest = idx;
                for slot in tuple.iter_mut().rev() {
                    *slot = rest % n;
                    rest /= n;
                }
                let mut key = Vec::with_capacity(arity * arity * (rels.len() + 1));
                for i in 0..arity {
                    for j in i + 1..arity {
                        key.push(tuple[i] == tuple[j]);
                    }
                }
                for r in &rels {
                    for &a in &tuple {
                        for &b in &tuple {
                            key.push(r.contains(a, b));
                        }
                    }
                }
                out.push(interner.id(key));
            }
            out
        })
        .collect();
    (colors, interner.len())
}

/// For every tuple, the sorted set of colors reached by replacing coordinate `pos`.
fn extension_sets(colors: &[Color], n: usize, arity: usize, pos: usize) -> Vec<Vec<Color>> {
    let stride = n.pow((arity - 1 - pos) as u32);
    (0..colors.len())
        .into_par_iter()
        .map(|idx| {
            let coord = (idx / stride) % n;
            let base = idx - coord * stride;
            let mut set: Vec<Color> = (0..n).map(|e| colors[base + e * stride]).collect();
            set.sort_unstable();
            set.dedup();
            set
        })
        .collect()
}

fn refine_round(colors: &[Vec<Color>], sizes: &[usize], arity: usize) -> (Vec<Vec<Color>>, usize) {
    let ext: Vec<Vec<Vec<Vec<Color>>>> = colors
        .iter()
        .zip(sizes)
        .map(|(c, &n)| (0..arity).map(|pos| extension_sets(c, n, arity, pos)).collect())
        .collect();
    let mut sets = Interner::new();
    let mut sigs = Interner::new();
    let next = colors
        .iter()
        .zip(ext)
        .map(|(c, mut ext)| {
            (0..c.len())
                .map(|idx| {
                    let mut sig = Vec::with_capacity(arity + 1);
                    sig.push(c[idx]);
                    for per_pos in ext.iter_mut() {
                        sig.push(sets.id(std::mem::take(&mut per_pos[idx])));
                    }
                    sigs.id(sig)
                })
                .collect()
        })
        .collect();
    (next, sigs.len())
}

fn refine(structures: &[FinStructure], arity: usize) -> ColorTable {
    let sizes: Vec<usize> = structures.iter().map(FinStructure::size).collect();
    let (mut colors, mut count) = initial_colors(structures, arity);
    let mut history = Vec::new();
    let mut rounds = 0;
    loop {
        if arity == 2 {
            history.push(colors.clone());
        }
        let (next, next_count) = refine_round(&colors, &sizes, arity);
        if next_count == count {
            break;
        }
        colors = next;
        count = next_count;
        rounds += 1;
    }
    let mut class_sizes = vec![0usize; count];
    for c in colors.iter().flatten() {
        class_sizes[*c as usize] += 1;
    }
    let mut table = ColorTable {
        arity,
        signature: structures[0].signature(),
        structures: structures.to_vec(),
        colors,
        class_sizes,
        rounds,
        history,
        atomic: Vec::new(),
        right_ext: Vec::new(),
        left_ext: Vec::new(),
        converse: Vec::new(),
    };
    if arity == 2 {
        table.fill_pair_data();
    }
    table
}

/// Joint stable coloring of all pairs. Extension sets range within each
/// pair's own structure; the color space is shared.
pub fn refine_pairs(structures: &[FinStructure]) -> Result<ColorTable, RefineError> {
    check_signatures(structures)?;
    Ok(refine(structures, 2))
}

/// Joint stable coloring of all triples, refusing more than `budget` triples.
pub fn refine_triples(structures: &[FinStructure], budget: usize) -> Result<ColorTable, RefineError> {
    check_signatures(structures)?;
    let needed: usize = structures.iter().map(|s| s.size().pow(3)).sum();
    if needed > budget {
        return Err(RefineError::BudgetExceeded { needed, budget });
    }
    Ok(refine(structures, 3))
}

impl ColorTable {
    fn fill_pair_data(&mut self) {
        let count = self.class_sizes.len();
        let mut atomic = vec![None; count];
        let mut right = vec![None; count];
        let mut left = vec![None; count];
        let mut converse = vec![Color::MAX; count];
        for (k, s) in self.structures.iter().enumerate() {
            let n = s.size();
            let col = &self.colors[k];
            for a in 0..n {
                for b in 0..n {
                    let c = col[a * n + b] as usize;
                    if atomic[c].is_none() {
                        atomic[c] = Some(AtomicPairType::of(s, a, b));
                        let mut r: Vec<Color> = (0..n).map(|e| col[a * n + e]).collect();
                        r.sort_unstable();
                        r.dedup();
                        let mut l: Vec<Color> = (0..n).map(|e| col[e * n + b]).collect();
                        l.sort_unstable();
                        l.dedup();
                        right[c] = Some(r);
                        left[c] = Some(l);
                    }
                    let conv = col[b * n + a];
                    debug_assert!(converse[c] == Color::MAX || converse[c] == conv);
                    converse[c] = conv;
                }
            }
        }
        self.atomic = atomic.into_iter().map(Option::unwrap).collect();
        self.right_ext = right.into_iter().map(Option::unwrap).collect();
        self.left_ext = left.into_iter().map(Option::unwrap).collect();
        self.converse = converse;
    }

    pub fn arity(&self) -> usize {
        self.arity
    }

    pub fn structures(&self) -> &[FinStructure] {
        &self.structures
    }

    pub fn signature(&self) -> &[String] {
        &self.signature
    }

    pub fn num_colors(&self) -> usize {
        self.class_sizes.len()
    }

    /// Number of rounds after which the coloring was stable.
    pub fn rounds(&self) -> usize {
        self.rounds
    }

    pub fn class_size(&self, c: Color) -> usize {
        self.class_sizes[c as usize]
    }

    pub fn class_sizes(&self) -> &[usize] {
        &self.class_sizes
    }

    /// Colors of structure `k`, row-major over its tuples.
    pub fn colors(&self, k: usize) -> &[Color] {
        &self.colors[k]
    }

    pub fn color_of(&self, k: usize, tuple: &[usize]) -> Color {
        assert_eq!(tuple.len(), self.arity, "tuple length must equal table arity");
        self.colors[k][tuple_index(self.structures[k].size(), tuple)]
    }

    pub fn pair_color(&self, k: usize, a: usize, b: usize) -> Color {
        debug_assert_eq!(self.arity, 2);
        let n = self.structures[k].size();
        self.colors[k][a * n + b]
    }

    /// Color of the diagonal tuple `(a, a)` or `(a, a, a)`.
    pub fn diagonal_color(&self, k: usize, a: usize) -> Color {
        self.color_of(k, &vec![a; self.arity])
    }

    /// Distinct diagonal colors realized in structure `k`, ascending.
    pub fn diagonal_colors(&self, k: usize) -> Vec<Color> {
        let mut v: Vec<Color> = (0..self.structures[k].size()).map(|a| self.diagonal_color(k, a)).collect();
        v.sort_unstable();
        v.dedup();
        v
    }

    /// Distinct colors realized in structure `k`, ascending.
    pub fn realized_colors(&self, k: usize) -> Vec<Color> {
        let mut v = self.colors[k].clone();
        v.sort_unstable();
        v.dedup();
        v
    }

    fn require_pairs(&self) -> Result<(), RefineError> {
        if self.arity == 2 {
            Ok(())
        } else {
            Err(RefineError::ArityMismatch { expected: 2, found: self.arity })
        }
    }

    fn require_color(&self, c: Color) -> Result<(), RefineError> {
        if (c as usize) < self.num_colors() {
            Ok(())
        } else {
            Err(RefineError::UnknownColor(c))
        }
    }

    pub fn atomic(&self, c: Color) -> Result<&AtomicPairType, RefineError> {
        self.require_pairs()?;
        self.require_color(c)?;
        Ok(&self.atomic[c as usize])
    }

    pub fn converse(&self, c: Color) -> Result<Color, RefineError> {
        self.require_pairs()?;
        self.require_color(c)?;
        Ok(self.converse[c as usize])
    }

    /// Colors `{color(a, e)}` over `e`, for any pair `(a, b)` of color `c`.
    pub fn right_ext(&self, c: Color) -> Result<&[Color], RefineError> {
        self.require_pairs()?;
        self.require_color(c)?;
        Ok(&self.right_ext[c as usize])
    }

    /// Colors `{color(e, b)}` over `e`, for any pair `(a, b)` of color `c`.
    pub fn left_ext(&self, c: Color) -> Result<&[Color], RefineError> {
        self.require_pairs()?;
        self.require_color(c)?;
        Ok(&self.left_ext[c as usize])
    }

    /// Pair color after `round` refinement rounds (clamped to the stable round).
    pub fn pair_color_at_round(&self, round: usize, k: usize, a: usize, b: usize) -> Color {
        let h = &self.history[round.min(self.history.len() - 1)];
        h[k][a * self.structures[k].size() + b]
    }

    /// All pairs `(structure, a, b)` of color `c`.
    pub fn pair_members(&self, c: Color) -> Vec<(usize, usize, usize)> {
        let mut out = Vec::new();
        for (k, s) in self.structures.iter().enumerate() {
            let n = s.size();
            for (idx, &col) in self.colors[k].iter().enumerate() {
                if col == c {
                    out.push((k, idx / n, idx % n));
                }
            }
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn cycle(n: usize) -> FinStructure {
        FinStructure::new(format!("C{n}"), n)
            .unwrap()
            .with_relation("E", (0..n).map(|i| (i, (i + 1) % n)))
            .unwrap()
    }

    #[test]
    fn c3_has_three_pair_colors() {
        let t = refine_pairs(&[cycle(3)]).unwrap();
        assert_eq!(t.num_colors(), 3);
        assert_eq!(t.class_sizes(), &[3, 3, 3]);
        let succ = t.pair_color(0, 0, 1);
        let pred = t.pair_color(0, 1, 0);
        assert_eq!(t.converse(succ).unwrap(), pred);
        assert_eq!(t.rounds(), 0);
    }

    #[test]
    fn numbering_is_first_appearance() {
        let t = refine_pairs(&[cycle(3)]).unwrap();
        assert_eq!(&t.colors(0)[..3], &[0, 1, 2]);
    }

    #[test]
    fn edge_has_four() {
        let edge = FinStructure::new("EDGE", 2).unwrap().with_relation("E", [(0, 1)]).unwrap();
        let t = refine_pairs(&[edge]).unwrap();
        assert_eq!(t.num_colors(), 4);
        assert_eq!(t.rounds(), 1);
    }

    #[test]
    fn joint_refinement_of_c3_and_c7_splits_diagonals() {
        let t = refine_pairs(&[cycle(3), cycle(7)]).unwrap();
        assert_ne!(t.diagonal_colors(0), t.diagonal_colors(1));
    }

    #[test]
    fn signature_mismatch() {
        let other = FinStructure::new("F", 1).unwrap().with_relation("F", []).unwrap();
        assert!(matches!(refine_pairs(&[cycle(3), other]), Err(RefineError::SignatureMismatch(..))));
        assert_eq!(refine_pairs(&[]).unwrap_err(), RefineError::NoStructures);
    }

    #[test]
    fn triple_budget() {
        assert_eq!(
            refine_triples(&[cycle(7)], 100).unwrap_err(),
            RefineError::BudgetExceeded { needed: 343, budget: 100 }
        );
        let t = refine_triples(&[cycle(3)], DEFAULT_TRIPLE_BUDGET).unwrap();
        assert_eq!(t.diagonal_colors(0).len(), 1);
        assert!(t.atomic(0).is_err());
    }

    #[test]
    fn describe_atomic() {
        let t = refine_pairs(&[cycle(3)]).unwrap();
        let d = t.atomic(t.pair_color(0, 0, 0)).unwrap().describe(t.signature());
        assert_eq!(d, "x=y,~E(x,x),~E(x,y),~E(y,x),~E(y,y)");
    }
}
