use std::collections::HashMap;
use std::sync::Arc;

use super::{Color, ColorTable, RefineError};
use crate::formula::{Formula, Sub, Var};

/// Builds characteristic formulas over a shared DAG keyed by `(color, depth)`.
///
/// At depth 0 a color's formula is the conjunction of its signed atoms. At
/// depth `d + 1` it additionally requires every right extension color to be
/// reachable (`E y .`), every right extension to fall among them (`A y .`),
/// and symmetrically for left extensions with `x`.
pub struct CharacteristicBuilder<'t> {
    table: &'t ColorTable,
    cache: HashMap<(Color, usize), Sub>,
}

impl<'t> CharacteristicBuilder<'t> {
    pub fn new(table: &'t ColorTable) -> Result<Self, RefineError> {
        if table.arity() != 2 {
            return Err(RefineError::ArityMismatch { expected: 2, found: table.arity() });
        }
        Ok(CharacteristicBuilder {
            table,
            cache: HashMap::new(),
        })
    }

    /// Number of distinct `(color, depth)` nodes built so far.
    pub fn cached(&self) -> usize {
        self.cache.len()
    }

    pub fn formula(&mut self, color: Color, depth: usize) -> Result<Sub, RefineError> {
        if color as usize >= self.table.num_colors() {
            return Err(RefineError::UnknownColor(color));
        }
        Ok(self.build(color, depth))
    }

    fn build(&mut self, color: Color, depth: usize) -> Sub {
        if let Some(f) = self.cache.get(&(color, depth)) {
            return f.clone();
        }
        let f = if depth == 0 {
            self.atomic(color)
        } else {
            let prev = self.build(color, depth - 1);
            let right = self.table.right_ext(color).expect("pair table").to_vec();
            let left = self.table.left_ext(color).expect("pair table").to_vec();
            let mut parts = vec![prev];
            parts.extend(self.extension(&right, Var::Y, depth - 1));
            parts.extend(self.extension(&left, Var::X, depth - 1));
            Formula::conjunction(parts).expect("nonempty")
        };
        self.cache.insert((color, depth), f.clone());
        f
    }

    fn extension(&mut self, colors: &[Color], var: Var, depth: usize) -> Vec<Sub> {
        let subs: Vec<Sub> = colors.iter().map(|&c| self.build(c, depth)).collect();
        let mut parts: Vec<Sub> = subs.iter().map(|f| Arc::new(Formula::Exists(var, f.clone()))).collect();
        let any = Formula::disjunction(subs).expect("extension sets are nonempty");
        parts.push(Arc::new(Formula::Forall(var, any)));
        parts
    }

    fn atomic(&self, color: Color) -> Sub {
        let at = self.table.atomic(color).expect("pair table");
        let signed = |f: Formula, on: bool| Arc::new(if on { f } else { Formula::not(f) });
        let mut parts = vec![signed(Formula::Equals(Var::X, Var::Y), at.equal)];
        const SHAPES: [(Var, Var); 4] = [(Var::X, Var::X), (Var::X, Var::Y), (Var::Y, Var::X), (Var::Y, Var::Y)];
        for (name, bits) in self.table.signature().iter().zip(&at.relations) {
            for (&(a, b), &on) in SHAPES.iter().zip(bits) {
                parts.push(signed(Formula::atom(name, a, b), on));
            }
        }
        Formula::conjunction(parts).expect("nonempty")
    }
}

/// The depth-`depth` characteristic formula of a pair color.
pub fn characteristic_formula(table: &ColorTable, color: Color, depth: usize) -> Result<Sub, RefineError> {
    CharacteristicBuilder::new(table)?.formula(color, depth)
}
