//! Independent oracles: exhaustive pebble games, brute-force automorphism
//! search and random formulas. Nothing here calls the refinement code.
#![allow(dead_code)]

use std::sync::Arc;

use fo2kit::formula::{Formula, Sub, Var};
use fo2kit::structure::FinStructure;
use rand::Rng;

/// Relations as plain adjacency matrices, in signature order.
pub struct Adjacency {
    pub size: usize,
    pub rels: Vec<Vec<Vec<bool>>>,
}

impl Adjacency {
    pub fn of(s: &FinStructure) -> Self {
        let n = s.size();
        Adjacency {
            size: n,
            rels: s
                .relations()
                .map(|(_, r)| (0..n).map(|a| (0..n).map(|b| r.contains(a, b)).collect()).collect())
                .collect(),
        }
    }

    /// Whether the tuple `xs` of `self` and `ys` of `other` induce the same
    /// equalities and atomic facts.
    fn consistent(&self, other: &Adjacency, xs: &[usize], ys: &[usize]) -> bool {
        for i in 0..xs.len() {
            for j in 0..xs.len() {
                if (xs[i] == xs[j]) != (ys[i] == ys[j]) {
                    return false;
                }
                for (r, q) in self.rels.iter().zip(&other.rels) {
                    if r[xs[i]][xs[j]] != q[ys[i]][ys[j]] {
                        return false;
                    }
                }
            }
        }
        true
    }
}

/// Greatest fixpoint of the `k`-pebble game between `a` and `b`: a position
/// places pebble `i` on `xs[i]` in `a` and `ys[i]` in `b`.
pub struct PebbleGame {
    k: usize,
    na: usize,
    nb: usize,
    win: Vec<bool>,
}

impl PebbleGame {
    fn index(&self, xs: &[usize], ys: &[usize]) -> usize {
        let mut i = 0;
        for &x in xs {
            i = i * self.na + x;
        }
        for &y in ys {
            i = i * self.nb + y;
        }
        i
    }

    fn decode(&self, mut i: usize) -> (Vec<usize>, Vec<usize>) {
        let mut ys = vec![0; self.k];
        let mut xs = vec![0; self.k];
        for y in ys.iter_mut().rev() {
            *y = i % self.nb;
            i /= self.nb;
        }
        for x in xs.iter_mut().rev() {
            *x = i % self.na;
            i /= self.na;
        }
        (xs, ys)
    }

    pub fn solve(a: &FinStructure, b: &FinStructure, k: usize) -> Self {
        assert_eq!(a.signature(), b.signature());
        let (aa, ab) = (Adjacency::of(a), Adjacency::of(b));
        let (na, nb) = (a.size(), b.size());
        let total = na.pow(k as u32) * nb.pow(k as u32);
        let mut game = PebbleGame { k, na, nb, win: vec![false; total] };
        for i in 0..total {
            let (xs, ys) = game.decode(i);
            game.win[i] = aa.consistent(&ab, &xs, &ys);
        }
        loop {
            let mut changed = false;
            for i in 0..total {
                if !game.win[i] {
                    continue;
                }
                let (xs, ys) = game.decode(i);
                let survives = (0..k).all(|p| {
                    let forth = (0..na).all(|x| {
                        (0..nb).any(|y| {
                            let (mut xs2, mut ys2) = (xs.clone(), ys.clone());
                            xs2[p] = x;
                            ys2[p] = y;
                            game.win[game.index(&xs2, &ys2)]
                        })
                    });
                    let back = (0..nb).all(|y| {
                        (0..na).any(|x| {
                            let (mut xs2, mut ys2) = (xs.clone(), ys.clone());
                            xs2[p] = x;
                            ys2[p] = y;
                            game.win[game.index(&xs2, &ys2)]
                        })
                    });
                    forth && back
                });
                if !survives {
                    game.win[i] = false;
                    changed = true;
                }
            }
            if !changed {
                return game;
            }
        }
    }

    pub fn wins(&self, xs: &[usize], ys: &[usize]) -> bool {
        self.win[self.index(xs, ys)]
    }

    /// Duplicator survives the opening move on either side.
    pub fn equivalent(&self) -> bool {
        let all = |x: usize, y: usize| self.wins(&vec![x; self.k], &vec![y; self.k]);
        (0..self.na).all(|x| (0..self.nb).any(|y| all(x, y))) && (0..self.nb).all(|y| (0..self.na).any(|x| all(x, y)))
    }
}

/// Duplicator wins the unbounded 2-pebble game from `(a1,a2)` vs `(b1,b2)`.
pub fn pebble2(a: &FinStructure, b: &FinStructure) -> PebbleGame {
    PebbleGame::solve(a, b, 2)
}

pub fn pebble3(a: &FinStructure, b: &FinStructure) -> PebbleGame {
    PebbleGame::solve(a, b, 3)
}

/// Every permutation of `0..n`, in lexicographic order.
pub fn permutations(n: usize) -> Vec<Vec<usize>> {
    fn go(prefix: &mut Vec<usize>, used: &mut Vec<bool>, out: &mut Vec<Vec<usize>>) {
        if prefix.len() == used.len() {
            out.push(prefix.clone());
            return;
        }
        for i in 0..used.len() {
            if !used[i] {
                used[i] = true;
                prefix.push(i);
                go(prefix, used, out);
                prefix.pop();
                used[i] = false;
            }
        }
    }
    let mut out = Vec::new();
    go(&mut Vec::new(), &mut vec![false; n], &mut out);
    out
}

pub fn preserves(s: &FinStructure, p: &[usize]) -> bool {
    s.relations().all(|(_, r)| r.pairs().all(|(a, b)| r.contains(p[a], p[b])))
}

/// All automorphisms, by trying every permutation.
pub fn brute_automorphisms(s: &FinStructure) -> Vec<Vec<usize>> {
    permutations(s.size()).into_iter().filter(|p| preserves(s, p)).collect()
}

pub fn brute_find(s: &FinStructure, pins: &[(usize, usize)]) -> Option<Vec<usize>> {
    brute_automorphisms(s).into_iter().find(|p| pins.iter().all(|&(a, b)| p[a] == b))
}

pub fn brute_orbits(s: &FinStructure) -> Vec<Vec<usize>> {
    let auts = brute_automorphisms(s);
    let mut orbits: Vec<Vec<usize>> = Vec::new();
    for a in 0..s.size() {
        if orbits.iter().any(|o| o.contains(&a)) {
            continue;
        }
        let mut o: Vec<usize> = auts.iter().map(|p| p[a]).collect();
        o.sort_unstable();
        o.dedup();
        orbits.push(o);
    }
    orbits
}

/// A random formula over `rels` whose variables come from `vars`, with at
/// most `depth` nested connectives or quantifiers.
pub fn random_formula(rng: &mut impl Rng, depth: usize, vars: &[Var], rels: &[&str]) -> Sub {
    let pick = |rng: &mut dyn rand::RngCore| vars[rng.gen_range(0..vars.len())];
    if depth == 0 || rng.gen_bool(0.2) {
        return Arc::new(if rng.gen_bool(0.25) {
            Formula::Equals(pick(rng), pick(rng))
        } else {
            Formula::atom(rels[rng.gen_range(0..rels.len())], pick(rng), pick(rng))
        });
    }
    let d = depth - 1;
    Arc::new(match rng.gen_range(0..7) {
        0 => Formula::not(random_formula(rng, d, vars, rels)),
        1 => Formula::and(random_formula(rng, d, vars, rels), random_formula(rng, d, vars, rels)),
        2 => Formula::or(random_formula(rng, d, vars, rels), random_formula(rng, d, vars, rels)),
        3 => Formula::implies(random_formula(rng, d, vars, rels), random_formula(rng, d, vars, rels)),
        4 => Formula::iff(random_formula(rng, d, vars, rels), random_formula(rng, d, vars, rels)),
        5 => Formula::exists(pick(rng), random_formula(rng, d, vars, rels)),
        _ => Formula::forall(pick(rng), random_formula(rng, d, vars, rels)),
    })
}

/// Universal closure over the free variables of `f`.
pub fn close(f: Sub) -> Sub {
    f.free_vars().into_iter().fold(f, |g, v| Arc::new(Formula::forall(v, g)))
}

/// Number of nested quantifiers along the deepest path.
pub fn quantifier_depth(f: &Formula) -> usize {
    let inner = f.children().into_iter().map(|c| quantifier_depth(c)).max().unwrap_or(0);
    match f {
        Formula::Exists(..) | Formula::Forall(..) => inner + 1,
        _ => inner,
    }
}

/// All single-relation structures over `n` elements, indexed by bit mask.
pub fn all_graphs(n: usize) -> Vec<FinStructure> {
    (0..1u64 << (n * n))
        .map(|mask| {
            let pairs = (0..n * n).filter(|i| mask >> i & 1 == 1).map(|i| (i / n, i % n));
            FinStructure::new(format!("G{mask}"), n).unwrap().with_relation("E", pairs).unwrap()
        })
        .collect()
}
