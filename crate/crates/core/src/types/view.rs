use std::collections::BTreeSet;

use super::{Color, ColorTable, RefineError};

/// The type vocabulary of one structure: element classes (elements sharing a
/// one-variable type), the pair colors between classes, converse and identity.
///
/// Classes are numbered in increasing order of their diagonal color.
#[derive(Debug, Clone)]
pub struct TypeView {
    structure: usize,
    classes: Vec<Vec<usize>>,
    class_of: Vec<usize>,
    identity: Vec<Color>,
    between: Vec<Vec<BTreeSet<Color>>>,
    converse: Vec<Color>,
}

pub fn type_view(table: &ColorTable, structure: usize) -> Result<TypeView, RefineError> {
    if table.arity() != 2 {
        return Err(RefineError::ArityMismatch { expected: 2, found: table.arity() });
    }
    let s = table
        .structures()
        .get(structure)
        .ok_or(RefineError::UnknownStructure(structure))?;
    let n = s.size();
    let identity = table.diagonal_colors(structure);
    let class_of: Vec<usize> = (0..n)
        .map(|a| {
            let d = table.diagonal_color(structure, a);
            identity.binary_search(&d).expect("diagonal color listed")
        })
        .collect();
    let mut classes = vec![Vec::new(); identity.len()];
    for (a, &c) in class_of.iter().enumerate() {
        classes[c].push(a);
    }
    let k = classes.len();
    let mut between = vec![vec![BTreeSet::new(); k]; k];
    for a in 0..n {
        for b in 0..n {
            between[class_of[a]][class_of[b]].insert(table.pair_color(structure, a, b));
        }
    }
    let converse = (0..table.num_colors() as Color)
        .map(|c| table.converse(c).expect("pair table"))
        .collect();
    Ok(TypeView {
        structure,
        classes,
        class_of,
        identity,
        between,
        converse,
    })
}

impl TypeView {
    pub fn structure_index(&self) -> usize {
        self.structure
    }

    pub fn num_classes(&self) -> usize {
        self.classes.len()
    }

    pub fn classes(&self) -> &[Vec<usize>] {
        &self.classes
    }

    pub fn class(&self, u: usize) -> &[usize] {
        &self.classes[u]
    }

    pub fn class_of(&self, a: usize) -> usize {
        self.class_of[a]
    }

    pub fn is_singleton(&self, u: usize) -> bool {
        self.classes[u].len() == 1
    }

    pub fn converse(&self, c: Color) -> Color {
        self.converse[c as usize]
    }

    pub fn identity_of(&self, u: usize) -> Color {
        self.identity[u]
    }

    /// Pair colors realized by `class(u) × class(v)`, ascending.
    pub fn types_between(&self, u: usize, v: usize) -> &BTreeSet<Color> {
        &self.between[u][v]
    }

    /// Class whose identity color is `c`, if any.
    pub fn class_with_identity(&self, c: Color) -> Option<usize> {
        self.identity.binary_search(&c).ok()
    }
}
