//! Finite binary relational structures and the `.fos` text format.

use std::collections::BTreeMap;
use std::fmt::Write as _;

use thiserror::Error;

use crate::relation::BinRel;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum StructureError {
    #[error("line {line}, column {column}: {message}")]
    Syntax {
        line: usize,
        column: usize,
        message: String,
    },
    #[error("empty universe: structures must have at least one element")]
    EmptyUniverse,
    #[error("element index {index} out of range for universe of size {size}")]
    IndexOutOfRange { index: usize, size: usize },
    #[error("duplicate relation name `{0}`")]
    DuplicateRelation(String),
    #[error("relation name `{0}` already in the signature")]
    NameClash(String),
    #[error("invalid relation name `{0}`")]
    InvalidName(String),
    #[error("signature mismatch: {0:?} vs {1:?}")]
    SignatureMismatch(Vec<String>, Vec<String>),
}

/// A finite universe `0..size` with named binary relations.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FinStructure {
    name: String,
    size: usize,
    relations: BTreeMap<String, BinRel>,
}

pub(crate) fn valid_name(name: &str) -> bool {
    let mut chars = name.chars();
    match chars.next() {
        Some(c) if c.is_ascii_alphabetic() || c == '_' => {}
        _ => return false,
    }
    chars.all(|c| c.is_ascii_alphanumeric() || c == '_')
}

impl FinStructure {
    pub fn new(name: impl Into<String>, size: usize) -> Result<Self, StructureError> {
        if size == 0 {
            return Err(StructureError::EmptyUniverse);
        }
        Ok(FinStructure {
            name: name.into(),
            size,
            relations: BTreeMap::new(),
        })
    }

    /// Adds a relation given as pairs, consuming and returning the structure.
    pub fn with_relation<I>(mut self, name: &str, pairs: I) -> Result<Self, StructureError>
    where
        I: IntoIterator<Item = (usize, usize)>,
    {
        let mut rel = BinRel::empty(self.size);
        for (a, b) in pairs {
            let index = a.max(b);
            if index >= self.size {
                return Err(StructureError::IndexOutOfRange { index, size: self.size });
            }
            rel.insert(a, b).expect("range checked");
        }
        self.add_relation(name, rel)?;
        Ok(self)
    }

    fn add_relation(&mut self, name: &str, rel: BinRel) -> Result<(), StructureError> {
        if !valid_name(name) {
            return Err(StructureError::InvalidName(name.to_string()));
        }
        if self.relations.contains_key(name) {
            return Err(StructureError::NameClash(name.to_string()));
        }
        if rel.size() != self.size {
            return Err(StructureError::IndexOutOfRange { index: rel.size().max(self.size) - 1, size: self.size });
        }
        self.relations.insert(name.to_string(), rel);
        Ok(())
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn renamed(mut self, name: impl Into<String>) -> Self {
        self.name = name.into();
        self
    }

    pub fn size(&self) -> usize {
        self.size
    }

    pub fn relation(&self, name: &str) -> Option<&BinRel> {
        self.relations.get(name)
    }

    /// Relations in name order.
    pub fn relations(&self) -> impl Iterator<Item = (&str, &BinRel)> {
        self.relations.iter().map(|(k, v)| (k.as_str(), v))
    }

    pub fn signature(&self) -> Vec<String> {
        self.relations.keys().cloned().collect()
    }

    pub fn same_signature(&self, other: &FinStructure) -> bool {
        self.relations.keys().eq(other.relations.keys())
    }

    pub fn check_signature(&self, other: &FinStructure) -> Result<(), StructureError> {
        if self.same_signature(other) {
            Ok(())
        } else {
            Err(StructureError::SignatureMismatch(self.signature(), other.signature()))
        }
    }

    /// Adds a relation under a fresh name; the original is left unchanged.
    pub fn expand_with_relation(&self, name: &str, rel: &BinRel) -> Result<FinStructure, StructureError> {
        if rel.size() != self.size {
            return Err(StructureError::IndexOutOfRange { index: rel.size().max(1) - 1, size: self.size });
        }
        let mut out = self.clone();
        out.add_relation(name, rel.clone())?;
        Ok(out)
    }

    /// Removes a relation, returning the reduct and the removed relation.
    pub fn without_relation(&self, name: &str) -> Option<(FinStructure, BinRel)> {
        let mut out = self.clone();
        let rel = out.relations.remove(name)?;
        Some((out, rel))
    }

    /// A relation name not yet used, derived from `base`.
    pub fn fresh_name(&self, base: &str) -> String {
        if !self.relations.contains_key(base) {
            return base.to_string();
        }
        (0..)
            .map(|i| format!("{base}_{i}"))
            .find(|n| !self.relations.contains_key(n))
            .expect("unbounded search")
    }

    /// Image of the structure under an element permutation.
    pub fn permuted(&self, perm: &[usize]) -> FinStructure {
        FinStructure {
            name: self.name.clone(),
            size: self.size,
            relations: self.relations.iter().map(|(k, r)| (k.clone(), r.permute(perm))).collect(),
        }
    }

    /// Canonical `.fos` text: relations by name, pairs lexicographic.
    pub fn to_fos(&self) -> String {
        let mut out = String::new();
        writeln!(out, "structure {}", self.name).unwrap();
        writeln!(out, "universe {}", self.size).unwrap();
        for (name, rel) in &self.relations {
            writeln!(out, "rel {name}").unwrap();
            for (a, b) in rel.pairs() {
                writeln!(out, "{a} {b}").unwrap();
            }
            writeln!(out, "end").unwrap();
        }
        out
    }

    pub fn parse_fos(text: &str) -> Result<FinStructure, StructureError> {
        FosParser::default().parse(text)
    }
}

/// Builds the disjoint union; elements of `b` are shifted by `a.size()`.
pub fn disjoint_union(a: &FinStructure, b: &FinStructure) -> Result<FinStructure, StructureError> {
    a.check_signature(b)?;
    let shift = a.size;
    let size = a.size + b.size;
    let relations = a
        .relations
        .iter()
        .map(|(name, ra)| {
            let rb = &b.relations[name];
            let pairs = ra.pairs().chain(rb.pairs().map(|(x, y)| (x + shift, y + shift)));
            (name.clone(), BinRel::from_pairs(size, pairs).expect("in range"))
        })
        .collect();
    Ok(FinStructure {
        name: format!("{}_{}", a.name, b.name),
        size,
        relations,
    })
}

#[derive(Default)]
struct FosParser {
    name: Option<String>,
    structure: Option<FinStructure>,
}

fn syntax(line: usize, column: usize, message: impl Into<String>) -> StructureError {
    StructureError::Syntax {
        line,
        column,
        message: message.into(),
    }
}

/// Splits a line into tokens with their 1-based columns.
fn tokens(line: &str) -> Vec<(usize, &str)> {
    let mut out = Vec::new();
    let mut start = None;
    for (i, c) in line.char_indices() {
        if c.is_whitespace() {
            if let Some(s) = start.take() {
                out.push((s + 1, &line[s..i]));
            }
        } else if start.is_none() {
            start = Some(i);
        }
    }
    if let Some(s) = start {
        out.push((s + 1, &line[s..]));
    }
    out
}

impl FosParser {
    fn parse(mut self, text: &str) -> Result<FinStructure, StructureError> {
        let mut open: Option<(String, BinRel)> = None;
        let mut last_line = 0;
        for (idx, raw) in text.lines().enumerate() {
            let lineno = idx + 1;
            last_line = lineno;
            let trimmed = raw.trim_start();
            if trimmed.is_empty() || trimmed.starts_with('#') {
                continue;
            }
            let toks = tokens(raw);
            let (col, head) = toks[0];

            if let Some((name, rel)) = open.as_mut() {
                if head == "end" {
                    if toks.len() > 1 {
                        return Err(syntax(lineno, toks[1].0, "unexpected token after `end`"));
                    }
                    let (name, rel) = open.take().unwrap();
                    let s = self.structure.as_mut().unwrap();
                    if s.relations.contains_key(&name) {
                        return Err(StructureError::DuplicateRelation(name));
                    }
                    s.relations.insert(name, rel);
                    continue;
                }
                if toks.len() != 2 {
                    return Err(syntax(lineno, col, format!("expected `I J` pair or `end` in relation `{name}`")));
                }
                let size = rel.size();
                let mut pair = [0usize; 2];
                for (k, &(c, t)) in toks.iter().enumerate() {
                    let v: usize = t
                        .parse()
                        .map_err(|_| syntax(lineno, c, format!("expected element index, found `{t}`")))?;
                    if v >= size {
                        return Err(StructureError::IndexOutOfRange { index: v, size });
                    }
                    pair[k] = v;
                }
                rel.insert(pair[0], pair[1]).expect("range checked");
                continue;
            }

            match head {
                "structure" => {
                    if self.structure.is_some() || self.name.is_some() {
                        return Err(syntax(lineno, col, "`structure` must come first and only once"));
                    }
                    match toks.as_slice() {
                        [_, (_, n)] => self.name = Some(n.to_string()),
                        _ => return Err(syntax(lineno, col, "expected `structure NAME`")),
                    }
                }
                "universe" => {
                    if self.structure.is_some() {
                        return Err(syntax(lineno, col, "duplicate `universe` line"));
                    }
                    let (c, t) = match toks.as_slice() {
                        [_, ct] => *ct,
                        _ => return Err(syntax(lineno, col, "expected `universe N`")),
                    };
                    let n: usize = t
                        .parse()
                        .map_err(|_| syntax(lineno, c, format!("expected universe size, found `{t}`")))?;
                    let name = self.name.clone().unwrap_or_else(|| "anon".to_string());
                    self.structure = Some(FinStructure::new(name, n)?);
                }
                "rel" => {
                    let s = self
                        .structure
                        .as_ref()
                        .ok_or_else(|| syntax(lineno, col, "`rel` before `universe`"))?;
                    let (c, name) = match toks.as_slice() {
                        [_, ct] => *ct,
                        _ => return Err(syntax(lineno, col, "expected `rel NAME`")),
                    };
                    if !valid_name(name) {
                        return Err(syntax(lineno, c, format!("invalid relation name `{name}`")));
                    }
                    open = Some((name.to_string(), BinRel::empty(s.size)));
                }
                other => return Err(syntax(lineno, col, format!("unexpected `{other}`"))),
            }
        }
        if let Some((name, _)) = open {
            return Err(syntax(last_line + 1, 1, format!("relation `{name}` not terminated by `end`")));
        }
        self.structure
            .ok_or_else(|| syntax(last_line + 1, 1, "missing `universe` line"))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const C3: &str = "structure C3\nuniverse 3\nrel E\n0 1\n1 2\n2 0\nend\n";

    #[test]
    fn parse_c3() {
        let s = FinStructure::parse_fos(C3).unwrap();
        assert_eq!(s.size(), 3);
        assert_eq!(s.relation("E").unwrap().len(), 3);
        assert_eq!(s.to_fos(), C3);
    }

    #[test]
    fn comments_and_default_name() {
        let s = FinStructure::parse_fos("# hi\n\nuniverse 2\n  rel E\n 1   0 \n# inside\nend\n").unwrap();
        assert_eq!(s.name(), "anon");
        assert!(s.relation("E").unwrap().contains(1, 0));
    }

    #[test]
    fn empty_universe_rejected() {
        assert_eq!(FinStructure::parse_fos("universe 0"), Err(StructureError::EmptyUniverse));
    }

    #[test]
    fn index_out_of_range() {
        assert_eq!(
            FinStructure::parse_fos("universe 2\nrel E\n0 5\nend\n"),
            Err(StructureError::IndexOutOfRange { index: 5, size: 2 })
        );
    }

    #[test]
    fn duplicate_relation() {
        let text = "universe 2\nrel E\nend\nrel E\nend\n";
        assert_eq!(
            FinStructure::parse_fos(text),
            Err(StructureError::DuplicateRelation("E".into()))
        );
    }

    #[test]
    fn syntax_errors_report_position() {
        match FinStructure::parse_fos("universe 2\nrel E\n0 x\nend\n") {
            Err(StructureError::Syntax { line, column, .. }) => assert_eq!((line, column), (3, 3)),
            other => panic!("{other:?}"),
        }
        assert!(matches!(
            FinStructure::parse_fos("universe 2\nrel E\n0 1\n"),
            Err(StructureError::Syntax { line: 4, .. })
        ));
        assert!(matches!(
            FinStructure::parse_fos("rel E\nend\n"),
            Err(StructureError::Syntax { line: 1, column: 1, .. })
        ));
    }

    #[test]
    fn empty_relation_block() {
        let s = FinStructure::new("e", 2).unwrap().with_relation("E", []).unwrap();
        assert!(s.to_fos().contains("rel E\nend\n"));
    }

    #[test]
    fn disjoint_union_shifts() {
        let loop1 = FinStructure::new("L", 1).unwrap().with_relation("E", [(0, 0)]).unwrap();
        let u = disjoint_union(&loop1, &loop1).unwrap();
        assert_eq!(u.size(), 2);
        assert_eq!(u.relation("E").unwrap().pairs().collect::<Vec<_>>(), vec![(0, 0), (1, 1)]);
        let other = FinStructure::new("F", 1).unwrap().with_relation("F", []).unwrap();
        assert!(matches!(disjoint_union(&loop1, &other), Err(StructureError::SignatureMismatch(..))));
    }

    #[test]
    fn expand_and_clash() {
        let c3 = FinStructure::parse_fos(C3).unwrap();
        let r = BinRel::from_pairs(3, [(0, 1)]).unwrap();
        let x = c3.expand_with_relation("R", &r).unwrap();
        assert_eq!(x.signature(), vec!["E", "R"]);
        assert_eq!(x.without_relation("R").unwrap().0, c3);
        assert_eq!(
            c3.expand_with_relation("E", &BinRel::empty(3)),
            Err(StructureError::NameClash("E".into()))
        );
        assert_eq!(c3.fresh_name("E"), "E_0");
    }
}
