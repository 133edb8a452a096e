//! Transitive companions: every finite binary structure is 2-equivalent to a
//! finite structure in which same-typed elements are automorphic.
//!
//! Each non-singleton element class is replaced by a copy of an odd cyclic
//! group, and the type of a companion pair is read off a system of maps
//! `λ_{u,v}` from group elements to the pair colors realized between classes
//! `u` and `v`. Singleton classes keep their single element.

use serde::Serialize;
use thiserror::Error;

use crate::automorphism::{check_transitive, TransitivityCheck};
use crate::equiv::{verify_iso2, IsoReport, PartialIso2};
use crate::relation::BinRel;
use crate::structure::FinStructure;
use crate::types::{refine_pairs, type_view, Color, ColorTable, RefineError, TypeView};

#[derive(Debug, Error, PartialEq)]
pub enum CompanionError {
    #[error(transparent)]
    Refine(#[from] RefineError),
    #[error("group of order {modulus} is too small for classes {u},{v}: {types} types need {needed}")]
    GroupTooSmall { u: usize, v: usize, types: usize, needed: usize, modulus: usize },
    #[error("lambda for classes {u},{v} is not surjective")]
    NotSurjective { u: usize, v: usize },
    #[error("lambda for classes {u},{v} breaks the converse law at {g}")]
    ConverseLaw { u: usize, v: usize, g: usize },
    #[error("lambda for class {u} maps {g} to the wrong kind of color")]
    Identity { u: usize, g: usize },
    #[error("a class pair touching singleton {u} realizes {types} types")]
    SingletonSpread { u: usize, types: usize },
    #[error("companion failed verification: {0}")]
    Verification(String, Box<CompanionReport>),
}

/// The cyclic group `ℤₙ` for odd `n`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct CyclicGroup {
    modulus: usize,
}

impl CyclicGroup {
    /// `None` unless `modulus` is odd.
    pub fn new(modulus: usize) -> Option<Self> {
        (modulus % 2 == 1).then_some(CyclicGroup { modulus })
    }

    pub fn modulus(&self) -> usize {
        self.modulus
    }

    pub fn add(&self, a: usize, b: usize) -> usize {
        (a + b) % self.modulus
    }

    pub fn neg(&self, a: usize) -> usize {
        (self.modulus - a % self.modulus) % self.modulus
    }

    pub fn sub(&self, a: usize, b: usize) -> usize {
        self.add(a, self.neg(b))
    }

    /// `P = {1, …, (n-1)/2}`; `P`, `-P` and `{0}` partition the group.
    pub fn positive_half(&self) -> std::ops::RangeInclusive<usize> {
        1..=(self.modulus - 1) / 2
    }

    pub fn is_positive(&self, g: usize) -> bool {
        g >= 1 && g <= (self.modulus - 1) / 2
    }
}

/// Largest number of pair colors between two non-singleton classes.
pub fn t_max(view: &TypeView) -> usize {
    let k = view.num_classes();
    let mut best = 0;
    for u in 0..k {
        for v in 0..k {
            if !view.is_singleton(u) && !view.is_singleton(v) {
                best = best.max(view.types_between(u, v).len());
            }
        }
    }
    best
}

/// Smallest odd cyclic group of order at least `max(3, 2·t_max)`.
pub fn choose_group(view: &TypeView) -> CyclicGroup {
    let n = (2 * t_max(view)).max(3);
    CyclicGroup::new(n | 1).expect("odd")
}

/// The maps `λ_{u,v}`, tabulated over the whole group.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct LambdaSystem {
    group: CyclicGroup,
    maps: Vec<Vec<Vec<Color>>>,
}

impl LambdaSystem {
    pub fn group(&self) -> CyclicGroup {
        self.group
    }

    pub fn num_classes(&self) -> usize {
        self.maps.len()
    }

    pub fn get(&self, u: usize, v: usize, g: usize) -> Color {
        self.maps[u][v][g % self.group.modulus]
    }

    pub fn map(&self, u: usize, v: usize) -> &[Color] {
        &self.maps[u][v]
    }

    /// Surjectivity, the converse law and the identity conditions.
    pub fn check(&self, view: &TypeView) -> Result<(), CompanionError> {
        let g = self.group;
        let k = self.num_classes();
        for u in 0..k {
            for v in 0..k {
                let range: std::collections::BTreeSet<Color> = self.maps[u][v].iter().copied().collect();
                if &range != view.types_between(u, v) {
                    return Err(CompanionError::NotSurjective { u, v });
                }
                for x in 0..g.modulus {
                    if self.get(u, v, x) != view.converse(self.get(v, u, g.neg(x))) {
                        return Err(CompanionError::ConverseLaw { u, v, g: x });
                    }
                }
            }
            if view.is_singleton(u) {
                continue;
            }
            for x in 0..g.modulus {
                if (self.get(u, u, x) == view.identity_of(u)) != (x == 0) {
                    return Err(CompanionError::Identity { u, g: x });
                }
            }
        }
        Ok(())
    }
}

/// The canonical λ-system: cyclic enumeration of `types_between` across
/// classes, and `L: P → S ∪ A` with its converse on `-P` within a class.
pub fn build_lambda(view: &TypeView, group: CyclicGroup) -> Result<LambdaSystem, CompanionError> {
    let n = group.modulus();
    let k = view.num_classes();
    for u in 0..k {
        for v in 0..k {
            let types = view.types_between(u, v).len();
            if view.is_singleton(u) || view.is_singleton(v) {
                if types != 1 {
                    return Err(CompanionError::SingletonSpread { u: if view.is_singleton(u) { u } else { v }, types });
                }
            } else if n < 2 * types {
                return Err(CompanionError::GroupTooSmall { u, v, types, needed: 2 * types, modulus: n });
            }
        }
    }
    let mut maps = vec![vec![Vec::new(); k]; k];
    for u in 0..k {
        for v in u..k {
            let colors: Vec<Color> = view.types_between(u, v).iter().copied().collect();
            let forward: Vec<Color> = if view.is_singleton(u) || view.is_singleton(v) {
                vec![colors[0]; n]
            } else if u < v {
                (0..n).map(|g| colors[g % colors.len()]).collect()
            } else {
                self_lambda(view, u, &colors, group)
            };
            maps[v][u] = (0..n).map(|g| view.converse(forward[group.neg(g)])).collect();
            maps[u][v] = forward;
        }
    }
    let system = LambdaSystem { group, maps };
    system.check(view)?;
    Ok(system)
}

fn self_lambda(view: &TypeView, u: usize, colors: &[Color], group: CyclicGroup) -> Vec<Color> {
    let id = view.identity_of(u);
    // S: symmetric non-identity colors; A: the smaller of each asymmetric converse pair
    let targets: Vec<Color> = colors
        .iter()
        .copied()
        .filter(|&c| c != id && c <= view.converse(c))
        .collect();
    let mut out = vec![id; group.modulus()];
    for (i, g) in group.positive_half().enumerate() {
        let c = targets[i % targets.len()];
        out[g] = c;
        out[group.neg(g)] = view.converse(c);
    }
    out
}

/// Machine-readable summary of a companion build.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct CompanionReport {
    pub group_modulus: usize,
    pub class_sizes: Vec<usize>,
    pub t_max: usize,
    pub companion_size: usize,
    pub verified: bool,
    pub violations: Vec<String>,
}

#[derive(Debug, Clone)]
pub struct CompanionResult {
    pub companion: FinStructure,
    /// 2-partial isomorphism from the input to the companion.
    pub witness: PartialIso2,
    /// Companion element index to `(class, group element)`.
    pub element_map: Vec<(usize, usize)>,
    pub lambda: LambdaSystem,
    pub report: CompanionReport,
}

impl CompanionResult {
    /// The type `ty(p, q) = λ_{u,v}(h - g)` of companion elements `p = (u,g)`, `q = (v,h)`.
    pub fn ty(&self, p: usize, q: usize) -> Color {
        let (u, g) = self.element_map[p];
        let (v, h) = self.element_map[q];
        self.lambda.get(u, v, self.lambda.group().sub(h, g))
    }

    /// Translation by `k` on non-singleton classes.
    pub fn shift(&self, k: usize) -> Vec<usize> {
        let index: std::collections::HashMap<(usize, usize), usize> =
            self.element_map.iter().enumerate().map(|(i, &e)| (e, i)).collect();
        let group = self.lambda.group();
        self.element_map
            .iter()
            .enumerate()
            .map(|(i, &(c, g))| {
                if index.contains_key(&(c, 1)) {
                    index[&(c, group.add(g, k))]
                } else {
                    i
                }
            })
            .collect()
    }
}

/// Builds and self-verifies the transitive companion of `m`.
pub fn build_companion(m: &FinStructure) -> Result<CompanionResult, CompanionError> {
    let table = refine_pairs(std::slice::from_ref(m))?;
    let view = type_view(&table, 0)?;
    let group = choose_group(&view);
    let lambda = build_lambda(&view, group)?;

    let mut element_map = Vec::new();
    for u in 0..view.num_classes() {
        let copies = if view.is_singleton(u) { 1 } else { group.modulus() };
        element_map.extend((0..copies).map(|g| (u, g)));
    }
    let size = element_map.len();
    let ty = |p: usize, q: usize| {
        let (u, g) = element_map[p];
        let (v, h) = element_map[q];
        lambda.get(u, v, group.sub(h, g))
    };

    let mut companion = FinStructure::new(format!("{}_companion", m.name()), size).expect("nonempty");
    for (i, name) in table.signature().iter().enumerate() {
        let rel = BinRel::from_fn(size, |p, q| table.atomic(ty(p, q)).expect("pair color").forward(i));
        companion = companion.expand_with_relation(name, &rel).expect("fresh relation");
    }

    let witness = build_witness(m, &table, &view, &element_map, size, &ty);

    let mut violations = Vec::new();
    let iso_report: IsoReport = verify_iso2(&witness, m, &companion);
    violations.extend(iso_report.violations.iter().map(|v| format!("{:?} at {:?}: {}", v.clause, v.witness, v.detail)));
    let transitive: TransitivityCheck = check_transitive(&companion);
    if let Some((a, b)) = transitive.witness {
        violations.push(format!("companion not transitive: no automorphism maps {a} to {b}"));
    }
    for p in 0..size {
        for q in 0..size {
            if ty(p, q) != view.converse(ty(q, p)) {
                violations.push(format!("ty({p},{q}) is not the converse of ty({q},{p})"));
            }
        }
    }

    let report = CompanionReport {
        group_modulus: group.modulus(),
        class_sizes: view.classes().iter().map(Vec::len).collect(),
        t_max: t_max(&view),
        companion_size: size,
        verified: violations.is_empty(),
        violations,
    };
    if !report.verified {
        return Err(CompanionError::Verification(report.violations[0].clone(), Box::new(report)));
    }
    Ok(CompanionResult {
        companion,
        witness,
        element_map,
        lambda,
        report,
    })
}

fn build_witness(
    m: &FinStructure,
    table: &ColorTable,
    view: &TypeView,
    element_map: &[(usize, usize)],
    size: usize,
    ty: &impl Fn(usize, usize) -> Color,
) -> PartialIso2 {
    let mut iso = PartialIso2::new(m.size(), size);
    for a in 0..m.size() {
        for (p, &(u, _)) in element_map.iter().enumerate() {
            if view.class_of(a) == u {
                iso.link_elements(a, p);
            }
        }
    }
    // group companion pairs by type so each input pair scans only its matches
    let mut by_color: std::collections::HashMap<Color, Vec<(usize, usize)>> = std::collections::HashMap::new();
    for p in 0..size {
        for q in 0..size {
            by_color.entry(ty(p, q)).or_default().push((p, q));
        }
    }
    for a in 0..m.size() {
        for b in 0..m.size() {
            if let Some(targets) = by_color.get(&table.pair_color(0, a, b)) {
                for &(p, q) in targets {
                    iso.link_pairs((a, b), (p, q));
                }
            }
        }
    }
    iso
}

/// Outcome of the 2-homogeneity check; `witness` is `(a, b, c)` where `a`
/// and `b` share a type but no `d` answers `c`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct HomogeneityCheck {
    pub holds: bool,
    pub witness: Option<(usize, usize, usize)>,
}

/// For all same-typed `a`, `b` and every `c` there is `d` with
/// `color(a,c) = color(b,d)`.
pub fn check_homogeneous(m: &FinStructure) -> HomogeneityCheck {
    let t = refine_pairs(std::slice::from_ref(m)).expect("single structure");
    let n = m.size();
    let reach: Vec<std::collections::BTreeSet<Color>> =
        (0..n).map(|a| (0..n).map(|c| t.pair_color(0, a, c)).collect()).collect();
    for a in 0..n {
        for b in 0..n {
            if a == b || t.diagonal_color(0, a) != t.diagonal_color(0, b) {
                continue;
            }
            if let Some(c) = (0..n).find(|&c| !reach[b].contains(&t.pair_color(0, a, c))) {
                return HomogeneityCheck {
                    holds: false,
                    witness: Some((a, b, c)),
                };
            }
        }
    }
    HomogeneityCheck {
        holds: true,
        witness: None,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::automorphism::find_automorphism;
    use crate::equiv::equiv2;
    use crate::structure::disjoint_union;

    fn cycle(n: usize) -> FinStructure {
        FinStructure::new(format!("C{n}"), n)
            .unwrap()
            .with_relation("E", (0..n).map(|i| (i, (i + 1) % n)))
            .unwrap()
    }

    fn view_of(m: &FinStructure) -> TypeView {
        type_view(&refine_pairs(std::slice::from_ref(m)).unwrap(), 0).unwrap()
    }

    #[test]
    fn group_choice() {
        assert_eq!(choose_group(&view_of(&cycle(3))).modulus(), 7);
        let c3c7 = disjoint_union(&cycle(3), &cycle(7)).unwrap();
        assert_eq!(choose_group(&view_of(&c3c7)).modulus(), 9);
        let loop1 = FinStructure::new("LOOP1", 1).unwrap().with_relation("E", [(0, 0)]).unwrap();
        assert_eq!(choose_group(&view_of(&loop1)).modulus(), 3);
    }

    #[test]
    fn group_halves_partition() {
        let g = CyclicGroup::new(9).unwrap();
        let mut seen = [0; 9];
        seen[0] += 1;
        for p in g.positive_half() {
            seen[p] += 1;
            seen[g.neg(p)] += 1;
        }
        assert_eq!(seen, [1; 9]);
        assert!(CyclicGroup::new(4).is_none());
    }

    #[test]
    fn c3_lambda() {
        let m = cycle(3);
        let t = refine_pairs(std::slice::from_ref(&m)).unwrap();
        let view = type_view(&t, 0).unwrap();
        let lambda = build_lambda(&view, CyclicGroup::new(7).unwrap()).unwrap();
        let (diag, succ, pred) = (t.pair_color(0, 0, 0), t.pair_color(0, 0, 1), t.pair_color(0, 1, 0));
        assert_eq!(lambda.map(0, 0), &[diag, succ, succ, succ, pred, pred, pred]);
    }

    #[test]
    fn c3_companion_is_circulant_tournament() {
        let r = build_companion(&cycle(3)).unwrap();
        assert_eq!(r.companion.size(), 7);
        let e = r.companion.relation("E").unwrap();
        for g in 0..7 {
            for h in 0..7 {
                assert_eq!(e.contains(g, h), (1..=3).contains(&((h + 7 - g) % 7)));
            }
        }
        assert!(equiv2(&cycle(3), &r.companion).unwrap());
        assert!(r.report.verified);
    }

    #[test]
    fn edge_companion_is_edge() {
        let edge = FinStructure::new("EDGE", 2).unwrap().with_relation("E", [(0, 1)]).unwrap();
        let r = build_companion(&edge).unwrap();
        assert_eq!(r.companion.size(), 2);
        let e = r.companion.relation("E").unwrap();
        assert_eq!(e.pairs().collect::<Vec<_>>(), vec![(0, 1)]);
    }

    #[test]
    fn c3c7_companion() {
        let c3c7 = disjoint_union(&cycle(3), &cycle(7)).unwrap();
        let r = build_companion(&c3c7).unwrap();
        assert_eq!(r.companion.size(), 9);
        assert!(equiv2(&c3c7, &r.companion).unwrap());
        assert_eq!(r.lambda.get(0, 0, 2), view_of(&c3c7).converse(r.lambda.get(0, 0, 7)));
        for k in 0..9 {
            let s = r.shift(k);
            assert!(crate::automorphism::Permutation::from_images(s).unwrap().is_automorphism_of(&r.companion));
        }
        assert!(find_automorphism(&r.companion, &[(0, 4)]).is_some());
    }

    #[test]
    fn homogeneity() {
        assert!(check_homogeneous(&cycle(3)).holds);
        assert!(check_homogeneous(&disjoint_union(&cycle(3), &cycle(7)).unwrap()).holds);
    }
}
