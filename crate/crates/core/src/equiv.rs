//! Deciding 2- and 3-equivalence, and explicit 2-partial isomorphisms.
//!
//! A 2-partial isomorphism `I` relates elements of `M` to elements of `N`
//! and pairs of `M` to pairs of `N` such that
//!
//! * it only relates elements to elements and pairs to pairs,
//! * every related pair is a partial isomorphism on its (one- or
//!   two-element) domain,
//! * related pairs project to related elements,
//! * every element has a partner on both sides, and every related
//!   element pair extends forth and back to related pairs.
//!
//! [`verify_iso2`] checks these clauses directly and shares no code with
//! [`build_iso2`].

use std::collections::BTreeMap;
use std::fmt::Write as _;

use serde::Serialize;
use thiserror::Error;

use crate::structure::FinStructure;
use crate::types::{refine_pairs, refine_triples, RefineError};

#[derive(Debug, Error, PartialEq, Eq)]
pub enum IsoError {
    #[error(transparent)]
    Refine(#[from] RefineError),
    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },
}

#[derive(Debug, Clone, PartialEq, Eq)]
struct BitSet {
    words: Vec<u64>,
}

impl BitSet {
    fn new(bits: usize) -> Self {
        BitSet { words: vec![0; bits.div_ceil(64)] }
    }

    fn set(&mut self, i: usize) {
        self.words[i / 64] |= 1 << (i % 64);
    }

    fn get(&self, i: usize) -> bool {
        self.words[i / 64] & (1 << (i % 64)) != 0
    }

    fn ones(&self) -> impl Iterator<Item = usize> + '_ {
        self.words.iter().enumerate().flat_map(|(w, &word)| {
            let mut rest = word;
            std::iter::from_fn(move || {
                if rest == 0 {
                    return None;
                }
                let bit = rest.trailing_zeros() as usize;
                rest &= rest - 1;
                Some(w * 64 + bit)
            })
        })
    }

    fn count(&self) -> usize {
        self.words.iter().map(|w| w.count_ones() as usize).sum()
    }
}

/// A set of element links `(a, b)` and pair links `((a, a'), (b, b'))`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PartialIso2 {
    m_size: usize,
    n_size: usize,
    elements: BitSet,
    pairs: BitSet,
}

impl PartialIso2 {
    pub fn new(m_size: usize, n_size: usize) -> Self {
        PartialIso2 {
            m_size,
            n_size,
            elements: BitSet::new(m_size * n_size),
            pairs: BitSet::new(m_size * m_size * n_size * n_size),
        }
    }

    pub fn sizes(&self) -> (usize, usize) {
        (self.m_size, self.n_size)
    }

    fn pair_index(&self, a: usize, a2: usize, b: usize, b2: usize) -> usize {
        ((a * self.m_size + a2) * self.n_size + b) * self.n_size + b2
    }

    pub fn link_elements(&mut self, a: usize, b: usize) {
        assert!(a < self.m_size && b < self.n_size, "element link out of range");
        self.elements.set(a * self.n_size + b);
    }

    pub fn link_pairs(&mut self, (a, a2): (usize, usize), (b, b2): (usize, usize)) {
        assert!(a.max(a2) < self.m_size && b.max(b2) < self.n_size, "pair link out of range");
        let i = self.pair_index(a, a2, b, b2);
        self.pairs.set(i);
    }

    pub fn has_element_link(&self, a: usize, b: usize) -> bool {
        a < self.m_size && b < self.n_size && self.elements.get(a * self.n_size + b)
    }

    pub fn has_pair_link(&self, (a, a2): (usize, usize), (b, b2): (usize, usize)) -> bool {
        a.max(a2) < self.m_size && b.max(b2) < self.n_size && self.pairs.get(self.pair_index(a, a2, b, b2))
    }

    pub fn element_links(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        self.elements.ones().map(|i| (i / self.n_size, i % self.n_size))
    }

    /// Pair links as `(a, a', b, b')`, lexicographic.
    pub fn pair_links(&self) -> impl Iterator<Item = (usize, usize, usize, usize)> + '_ {
        let (m, n) = (self.m_size, self.n_size);
        self.pairs.ones().map(move |i| {
            let b2 = i % n;
            let b = (i / n) % n;
            let a2 = (i / (n * n)) % m;
            let a = i / (n * n * m);
            (a, a2, b, b2)
        })
    }

    pub fn num_element_links(&self) -> usize {
        self.elements.count()
    }

    pub fn num_pair_links(&self) -> usize {
        self.pairs.count()
    }

    /// Text form: `e a b` and `p a a' b b'` lines.
    pub fn to_text(&self) -> String {
        let mut out = String::new();
        for (a, b) in self.element_links() {
            writeln!(out, "e {a} {b}").unwrap();
        }
        for (a, a2, b, b2) in self.pair_links() {
            writeln!(out, "p {a} {a2} {b} {b2}").unwrap();
        }
        out
    }

    pub fn parse_text(text: &str, m_size: usize, n_size: usize) -> Result<Self, IsoError> {
        let mut iso = PartialIso2::new(m_size, n_size);
        for (idx, line) in text.lines().enumerate() {
            let line_no = idx + 1;
            let t = line.trim();
            if t.is_empty() || t.starts_with('#') {
                continue;
            }
            let err = |message: String| IsoError::Parse { line: line_no, message };
            let mut parts = t.split_whitespace();
            let kind = parts.next().unwrap();
            let nums: Vec<usize> = parts
                .map(|p| p.parse().map_err(|_| err(format!("expected index, found `{p}`"))))
                .collect::<Result<_, _>>()?;
            match (kind, nums.as_slice()) {
                ("e", &[a, b]) => {
                    if a >= m_size || b >= n_size {
                        return Err(err(format!("element link ({a}, {b}) out of range")));
                    }
                    iso.link_elements(a, b);
                }
                ("p", &[a, a2, b, b2]) => {
                    if a.max(a2) >= m_size || b.max(b2) >= n_size {
                        return Err(err(format!("pair link ({a}, {a2}, {b}, {b2}) out of range")));
                    }
                    iso.link_pairs((a, a2), (b, b2));
                }
                _ => return Err(err(format!("malformed line `{t}`"))),
            }
        }
        Ok(iso)
    }
}

/// Clauses of the 2-partial isomorphism definition.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
pub enum Clause {
    /// Links must relate elements of the two given universes over one signature.
    Shape,
    /// Linked elements and pairs are partial isomorphisms.
    LocalIsomorphism,
    /// Linked pairs project to linked elements.
    Restriction,
    /// Every element of `M` is linked.
    ForthElement,
    /// Every element of `N` is linked.
    BackElement,
    /// Every linked `(a, b)` extends along every `a'`.
    ForthPair,
    /// Every linked `(a, b)` extends along every `b'`.
    BackPair,
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Serialize)]
pub struct Violation {
    pub clause: Clause,
    pub witness: Vec<usize>,
    pub detail: String,
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize)]
pub struct IsoReport {
    pub violations: Vec<Violation>,
}

impl IsoReport {
    pub fn is_ok(&self) -> bool {
        self.violations.is_empty()
    }

    pub fn violates(&self, clause: Clause) -> bool {
        self.violations.iter().any(|v| v.clause == clause)
    }

    /// First violation per clause, in clause order.
    pub fn summary(&self) -> Vec<&Violation> {
        let mut seen = BTreeMap::new();
        for v in &self.violations {
            seen.entry(v.clause).or_insert(v);
        }
        seen.into_values().collect()
    }
}

/// Exhaustively checks every clause and reports every violation found.
pub fn verify_iso2(iso: &PartialIso2, m: &FinStructure, n: &FinStructure) -> IsoReport {
    let mut out = Vec::new();
    let mut push = |clause, witness: Vec<usize>, detail: String| {
        out.push(Violation { clause, witness, detail });
    };
    if iso.m_size != m.size() || iso.n_size != n.size() {
        push(
            Clause::Shape,
            vec![iso.m_size, iso.n_size],
            format!("links sized {}x{} for universes {} and {}", iso.m_size, iso.n_size, m.size(), n.size()),
        );
        return IsoReport { violations: out };
    }
    if !m.same_signature(n) {
        push(Clause::Shape, vec![], format!("signatures differ: {:?} vs {:?}", m.signature(), n.signature()));
        return IsoReport { violations: out };
    }
    let rels: Vec<_> = m.relations().zip(n.relations()).map(|((name, r), (_, s))| (name, r, s)).collect();

    // local isomorphism on single elements
    for (a, b) in iso.element_links() {
        for (name, r, s) in &rels {
            if r.contains(a, a) != s.contains(b, b) {
                push(Clause::LocalIsomorphism, vec![a, b], format!("{name} differs on element link ({a}, {b})"));
            }
        }
    }
    for (a, a2, b, b2) in iso.pair_links() {
        // local isomorphism on pairs
        if (a == a2) != (b == b2) {
            push(
                Clause::LocalIsomorphism,
                vec![a, a2, b, b2],
                format!("equality differs on ({a}, {a2}) vs ({b}, {b2})"),
            );
        }
        for (name, r, s) in &rels {
            let lhs = [r.contains(a, a), r.contains(a, a2), r.contains(a2, a), r.contains(a2, a2)];
            let rhs = [s.contains(b, b), s.contains(b, b2), s.contains(b2, b), s.contains(b2, b2)];
            if lhs != rhs {
                push(
                    Clause::LocalIsomorphism,
                    vec![a, a2, b, b2],
                    format!("{name} differs on ({a}, {a2}) vs ({b}, {b2})"),
                );
            }
        }
        // restriction
        if !iso.has_element_link(a, b) || !iso.has_element_link(a2, b2) {
            push(
                Clause::Restriction,
                vec![a, a2, b, b2],
                format!("pair link ({a}, {a2}) ~ ({b}, {b2}) lacks an element link"),
            );
        }
    }
    // forth and back
    for a in 0..m.size() {
        if !(0..n.size()).any(|b| iso.has_element_link(a, b)) {
            push(Clause::ForthElement, vec![a], format!("element {a} of M is unmatched"));
        }
    }
    for b in 0..n.size() {
        if !(0..m.size()).any(|a| iso.has_element_link(a, b)) {
            push(Clause::BackElement, vec![b], format!("element {b} of N is unmatched"));
        }
    }
    for (a, b) in iso.element_links() {
        for a2 in 0..m.size() {
            if !(0..n.size()).any(|b2| iso.has_pair_link((a, a2), (b, b2))) {
                push(Clause::ForthPair, vec![a, b, a2], format!("link ({a}, {b}) has no extension for {a2} in M"));
            }
        }
        for b2 in 0..n.size() {
            if !(0..m.size()).any(|a2| iso.has_pair_link((a, a2), (b, b2))) {
                push(Clause::BackPair, vec![a, b, b2], format!("link ({a}, {b}) has no extension for {b2} in N"));
            }
        }
    }
    out.sort();
    IsoReport { violations: out }
}

/// Whether `m` and `n` satisfy the same two-variable sentences.
pub fn equiv2(m: &FinStructure, n: &FinStructure) -> Result<bool, RefineError> {
    let t = refine_pairs(&[m.clone(), n.clone()])?;
    Ok(t.diagonal_colors(0) == t.diagonal_colors(1))
}

/// Links elements and pairs of equal joint color; `None` when `m` and `n`
/// are not 2-equivalent.
pub fn build_iso2(m: &FinStructure, n: &FinStructure) -> Result<Option<PartialIso2>, RefineError> {
    let t = refine_pairs(&[m.clone(), n.clone()])?;
    if t.diagonal_colors(0) != t.diagonal_colors(1) {
        return Ok(None);
    }
    let mut iso = PartialIso2::new(m.size(), n.size());
    for a in 0..m.size() {
        for b in 0..n.size() {
            if t.diagonal_color(0, a) == t.diagonal_color(1, b) {
                iso.link_elements(a, b);
            }
        }
    }
    type Members = Vec<(usize, usize)>;
    let mut by_color: Vec<(Members, Members)> = vec![Default::default(); t.num_colors()];
    for (k, s) in [m, n].into_iter().enumerate() {
        for a in 0..s.size() {
            for b in 0..s.size() {
                let bucket = &mut by_color[t.pair_color(k, a, b) as usize];
                if k == 0 {
                    bucket.0.push((a, b));
                } else {
                    bucket.1.push((a, b));
                }
            }
        }
    }
    for (ms, ns) in &by_color {
        for &p in ms {
            for &q in ns {
                iso.link_pairs(p, q);
            }
        }
    }
    Ok(Some(iso))
}

/// Whether `m` and `n` satisfy the same three-variable sentences.
pub fn equiv3(m: &FinStructure, n: &FinStructure, budget: usize) -> Result<bool, RefineError> {
    let t = refine_triples(&[m.clone(), n.clone()], budget)?;
    Ok(t.diagonal_colors(0) == t.diagonal_colors(1))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::types::DEFAULT_TRIPLE_BUDGET;

    fn cycle(n: usize) -> FinStructure {
        FinStructure::new(format!("C{n}"), n)
            .unwrap()
            .with_relation("E", (0..n).map(|i| (i, (i + 1) % n)))
            .unwrap()
    }

    #[test]
    fn c3_self_iso() {
        let c3 = cycle(3);
        let iso = build_iso2(&c3, &c3).unwrap().unwrap();
        assert_eq!(iso.num_element_links(), 9);
        // three colors, three pairs each side
        assert_eq!(iso.num_pair_links(), 27);
        assert!(verify_iso2(&iso, &c3, &c3).is_ok());
    }

    #[test]
    fn c3_vs_c7() {
        assert!(!equiv2(&cycle(3), &cycle(7)).unwrap());
        assert!(build_iso2(&cycle(3), &cycle(7)).unwrap().is_none());
        assert!(!equiv3(&cycle(3), &cycle(7), DEFAULT_TRIPLE_BUDGET).unwrap());
    }

    #[test]
    fn lone_link_is_reported() {
        let c3 = cycle(3);
        let mut iso = PartialIso2::new(3, 3);
        iso.link_elements(0, 0);
        let report = verify_iso2(&iso, &c3, &c3);
        assert!(report.violations.contains(&Violation {
            clause: Clause::ForthElement,
            witness: vec![1],
            detail: "element 1 of M is unmatched".into(),
        }));
    }

    #[test]
    fn edge_to_non_edge_breaks_local_iso() {
        let c3 = cycle(3);
        let mut iso = build_iso2(&c3, &c3).unwrap().unwrap();
        iso.link_pairs((0, 1), (1, 0));
        let report = verify_iso2(&iso, &c3, &c3);
        assert!(report.violates(Clause::LocalIsomorphism));
    }

    #[test]
    fn text_round_trip() {
        let c3 = cycle(3);
        let iso = build_iso2(&c3, &c3).unwrap().unwrap();
        let back = PartialIso2::parse_text(&iso.to_text(), 3, 3).unwrap();
        assert_eq!(back, iso);
        assert!(matches!(PartialIso2::parse_text("e 0 9\n", 3, 3), Err(IsoError::Parse { line: 1, .. })));
        assert!(matches!(PartialIso2::parse_text("q 0 0\n", 3, 3), Err(IsoError::Parse { .. })));
    }

    #[test]
    fn shape_mismatch() {
        let iso = PartialIso2::new(2, 2);
        assert!(verify_iso2(&iso, &cycle(3), &cycle(3)).violates(Clause::Shape));
    }
}
