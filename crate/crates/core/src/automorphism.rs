//! Exact automorphism search, orbits, and the transitivity checks.
//!
//! Pins are individualized by expanding the structure with one fresh
//! diagonal relation per pin, once on the source side and once on the target
//! side, and refining both jointly. The backtracking search then only maps an
//! element to candidates whose pair colors agree with every element already
//! mapped, with forward checking on the remaining candidate sets.

use serde::Serialize;

use crate::relation::BinRel;
use crate::structure::FinStructure;
use crate::types::{refine_pairs, refine_triples, ColorTable, RefineError};

/// A bijection on `0..n`, stored as its image array.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Permutation(Vec<usize>);

impl Permutation {
    pub fn identity(n: usize) -> Self {
        Permutation((0..n).collect())
    }

    /// Checks bijectivity.
    pub fn from_images(images: Vec<usize>) -> Option<Self> {
        let n = images.len();
        let mut seen = vec![false; n];
        for &i in &images {
            if i >= n || std::mem::replace(&mut seen[i], true) {
                return None;
            }
        }
        Some(Permutation(images))
    }

    pub fn images(&self) -> &[usize] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn apply(&self, i: usize) -> usize {
        self.0[i]
    }

    /// `self` after `first`: `i ↦ self(first(i))`.
    pub fn after(&self, first: &Permutation) -> Permutation {
        Permutation(first.0.iter().map(|&i| self.0[i]).collect())
    }

    pub fn inverse(&self) -> Permutation {
        let mut inv = vec![0; self.0.len()];
        for (i, &j) in self.0.iter().enumerate() {
            inv[j] = i;
        }
        Permutation(inv)
    }

    /// Whether every relation of `m` is mapped exactly onto itself.
    pub fn is_automorphism_of(&self, m: &FinStructure) -> bool {
        self.0.len() == m.size() && m.relations().all(|(_, r)| r.permute(&self.0) == *r)
    }

    pub fn preserves(&self, r: &BinRel) -> bool {
        r.permute(&self.0) == *r
    }
}

/// Small fixed-width bit set over candidate targets.
#[derive(Clone)]
struct Domain(Vec<u64>);

impl Domain {
    fn empty(n: usize) -> Self {
        Domain(vec![0; n.div_ceil(64).max(1)])
    }

    fn insert(&mut self, i: usize) {
        self.0[i / 64] |= 1 << (i % 64);
    }

    fn remove(&mut self, i: usize) {
        self.0[i / 64] &= !(1 << (i % 64));
    }

    fn count(&self) -> usize {
        self.0.iter().map(|w| w.count_ones() as usize).sum()
    }

    fn iter(&self) -> impl Iterator<Item = usize> + '_ {
        self.0.iter().enumerate().flat_map(|(w, &word)| {
            let mut rest = word;
            std::iter::from_fn(move || {
                if rest == 0 {
                    return None;
                }
                let b = rest.trailing_zeros() as usize;
                rest &= rest - 1;
                Some(w * 64 + b)
            })
        })
    }
}

fn pinned(m: &FinStructure, points: &[usize]) -> FinStructure {
    let mut out = m.clone();
    for (i, &p) in points.iter().enumerate() {
        let name = out.fresh_name(&format!("pin{i}"));
        let rel = BinRel::from_pairs(m.size(), [(p, p)]).expect("pin in range");
        out = out.expand_with_relation(&name, &rel).expect("fresh name");
    }
    out
}

struct Search<'t> {
    table: &'t ColorTable,
    n: usize,
    assignment: Vec<Option<usize>>,
}

impl Search<'_> {
    fn compatible(&self, x: usize, y: usize, x2: usize, y2: usize) -> bool {
        let t = self.table;
        t.pair_color(0, x, x2) == t.pair_color(1, y, y2) && t.pair_color(0, x2, x) == t.pair_color(1, y2, y)
    }

    fn run(&mut self, domains: Vec<Domain>) -> bool {
        // most constrained unassigned element first
        let next = (0..self.n)
            .filter(|&x| self.assignment[x].is_none())
            .min_by_key(|&x| (domains[x].count(), x));
        let Some(x) = next else {
            return true;
        };
        for y in domains[x].iter().collect::<Vec<_>>() {
            let mut narrowed = domains.clone();
            let mut dead = false;
            for x2 in 0..self.n {
                if self.assignment[x2].is_some() || x2 == x {
                    continue;
                }
                let d = &mut narrowed[x2];
                d.remove(y);
                for y2 in d.iter().collect::<Vec<_>>() {
                    if !self.compatible(x, y, x2, y2) {
                        d.remove(y2);
                    }
                }
                if d.count() == 0 {
                    dead = true;
                    break;
                }
            }
            if dead {
                continue;
            }
            self.assignment[x] = Some(y);
            if self.run(narrowed) {
                return true;
            }
            self.assignment[x] = None;
        }
        false
    }
}

/// An automorphism of `m` sending each pinned source to its target, if one exists.
pub fn find_automorphism(m: &FinStructure, pins: &[(usize, usize)]) -> Option<Permutation> {
    let n = m.size();
    let mut pins: Vec<(usize, usize)> = pins.to_vec();
    pins.sort_unstable();
    pins.dedup();
    for (i, &(a, b)) in pins.iter().enumerate() {
        if a >= n || b >= n {
            return None;
        }
        if pins[..i].iter().any(|&(a2, b2)| (a2 == a) != (b2 == b)) {
            return None;
        }
    }
    let sources: Vec<usize> = pins.iter().map(|p| p.0).collect();
    let targets: Vec<usize> = pins.iter().map(|p| p.1).collect();
    let src = pinned(m, &sources);
    let dst = pinned(m, &targets);
    let table = refine_pairs(&[src, dst]).expect("same signature");

    let mut counts = vec![0i64; table.num_colors()];
    for &c in table.colors(0) {
        counts[c as usize] += 1;
    }
    for &c in table.colors(1) {
        counts[c as usize] -= 1;
    }
    if counts.iter().any(|&c| c != 0) {
        return None;
    }

    let domains: Vec<Domain> = (0..n)
        .map(|x| {
            let mut d = Domain::empty(n);
            for y in 0..n {
                if table.diagonal_color(0, x) == table.diagonal_color(1, y) {
                    d.insert(y);
                }
            }
            d
        })
        .collect();
    if domains.iter().any(|d| d.count() == 0) {
        return None;
    }
    let mut search = Search {
        table: &table,
        n,
        assignment: vec![None; n],
    };
    if !search.run(domains) {
        return None;
    }
    let perm = Permutation(search.assignment.into_iter().map(Option::unwrap).collect());
    debug_assert!(perm.is_automorphism_of(m));
    debug_assert!(pins.iter().all(|&(a, b)| perm.apply(a) == b));
    Some(perm)
}

struct UnionFind(Vec<usize>);

impl UnionFind {
    fn new(n: usize) -> Self {
        UnionFind((0..n).collect())
    }

    fn find(&mut self, mut i: usize) -> usize {
        while self.0[i] != i {
            self.0[i] = self.0[self.0[i]];
            i = self.0[i];
        }
        i
    }

    fn union(&mut self, a: usize, b: usize) {
        let (ra, rb) = (self.find(a), self.find(b));
        if ra != rb {
            let (lo, hi) = (ra.min(rb), ra.max(rb));
            self.0[hi] = lo;
        }
    }

    fn groups(&mut self) -> Vec<Vec<usize>> {
        let n = self.0.len();
        let mut by_root: Vec<Vec<usize>> = vec![Vec::new(); n];
        for i in 0..n {
            let r = self.find(i);
            by_root[r].push(i);
        }
        by_root.into_iter().filter(|g| !g.is_empty()).collect()
    }
}

/// Orbits of the automorphism group together with the automorphisms found.
#[derive(Debug, Clone)]
pub struct OrbitData {
    pub orbits: Vec<Vec<usize>>,
    pub generators: Vec<Permutation>,
}

/// Orbit partition of the universe, each orbit ascending, orbits ordered by
/// their least element.
pub fn orbits(m: &FinStructure) -> Vec<Vec<usize>> {
    orbit_data(m).orbits
}

pub fn orbit_data(m: &FinStructure) -> OrbitData {
    let n = m.size();
    let table = refine_pairs(std::slice::from_ref(m)).expect("single structure");
    let mut uf = UnionFind::new(n);
    let mut generators = Vec::new();
    for b in 0..n {
        // representatives: least element of each known orbit with b's 1-type
        let mut tried = Vec::new();
        for a in 0..b {
            if table.diagonal_color(0, a) != table.diagonal_color(0, b) {
                continue;
            }
            let ra = uf.find(a);
            if ra == uf.find(b) {
                break;
            }
            if ra != a || tried.contains(&ra) {
                continue;
            }
            tried.push(ra);
            if let Some(p) = find_automorphism(m, &[(a, b)]) {
                for i in 0..n {
                    uf.union(i, p.apply(i));
                }
                generators.push(p);
                break;
            }
        }
    }
    OrbitData {
        orbits: uf.groups(),
        generators,
    }
}

/// Orbits of the automorphism group acting on ordered pairs.
pub fn pair_orbits(m: &FinStructure) -> Vec<Vec<(usize, usize)>> {
    let n = m.size();
    let table = refine_pairs(std::slice::from_ref(m)).expect("single structure");
    let mut uf = UnionFind::new(n * n);
    let absorb = |uf: &mut UnionFind, p: &Permutation| {
        for a in 0..n {
            for b in 0..n {
                uf.union(a * n + b, p.apply(a) * n + p.apply(b));
            }
        }
    };
    for p in &orbit_data(m).generators {
        absorb(&mut uf, p);
    }
    let mut reps: Vec<Vec<usize>> = vec![Vec::new(); table.num_colors()];
    for idx in 0..n * n {
        let c = table.colors(0)[idx] as usize;
        let mut merged = false;
        for &q in &reps[c] {
            if uf.find(q) == uf.find(idx) {
                merged = true;
                break;
            }
        }
        if !merged {
            for &q in &reps[c].clone() {
                if let Some(p) = find_automorphism(m, &[(q / n, idx / n), (q % n, idx % n)]) {
                    absorb(&mut uf, &p);
                    merged = true;
                    break;
                }
            }
        }
        if !merged {
            reps[c].push(idx);
        }
    }
    uf.groups()
        .into_iter()
        .map(|g| g.into_iter().map(|i| (i / n, i % n)).collect())
        .collect()
}

/// Whether `r` is mapped onto itself by every automorphism of `m`, i.e. is a
/// union of pair orbits.
pub fn is_invariant(m: &FinStructure, r: &BinRel) -> bool {
    pair_orbits(m)
        .iter()
        .all(|orbit| orbit.iter().all(|&(a, b)| r.contains(a, b)) || orbit.iter().all(|&(a, b)| !r.contains(a, b)))
}

/// Outcome of a transitivity check; `witness` is a same-type pair of
/// elements no automorphism connects.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct TransitivityCheck {
    pub holds: bool,
    pub witness: Option<(usize, usize)>,
    pub orbit_count: usize,
}

fn check_classes(m: &FinStructure, class_color: impl Fn(usize) -> u32) -> TransitivityCheck {
    let orbits = orbits(m);
    let mut orbit_of = vec![0; m.size()];
    for (i, o) in orbits.iter().enumerate() {
        for &a in o {
            orbit_of[a] = i;
        }
    }
    for a in 0..m.size() {
        for b in a + 1..m.size() {
            if class_color(a) == class_color(b) && orbit_of[a] != orbit_of[b] {
                return TransitivityCheck {
                    holds: false,
                    witness: Some((a, b)),
                    orbit_count: orbits.len(),
                };
            }
        }
    }
    TransitivityCheck {
        holds: true,
        witness: None,
        orbit_count: orbits.len(),
    }
}

/// Any two elements of the same two-variable type are connected by an automorphism.
pub fn check_transitive(m: &FinStructure) -> TransitivityCheck {
    let t = refine_pairs(std::slice::from_ref(m)).expect("single structure");
    check_classes(m, |a| t.diagonal_color(0, a))
}

/// Any two elements of the same three-variable type are connected by an automorphism.
pub fn check_31_transitive(m: &FinStructure, budget: usize) -> Result<TransitivityCheck, RefineError> {
    let t = refine_triples(std::slice::from_ref(m), budget)?;
    Ok(check_classes(m, |a| t.diagonal_color(0, a)))
}
