mod common;

use common::{close, pebble2, pebble3, quantifier_depth, random_formula};
use fo2kit::corpus::{corpus, random_structure};
use fo2kit::equiv::{build_iso2, equiv2, equiv3, verify_iso2};
use fo2kit::formula::{evaluate, Assignment, Var};
use fo2kit::types::DEFAULT_TRIPLE_BUDGET;
use fo2kit::{fixtures, FinStructure};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn one_relation_corpus() -> Vec<FinStructure> {
    let mut out: Vec<FinStructure> = corpus(31, 60).into_iter().filter(|m| m.relations().count() == 1).collect();
    out.extend(fixtures::small());
    out
}

#[test]
fn equivalence_relation() {
    let c = one_relation_corpus();
    let k = c.len();
    let m: Vec<Vec<bool>> = (0..k).map(|i| (0..k).map(|j| equiv2(&c[i], &c[j]).unwrap()).collect()).collect();
    for i in 0..k {
        assert!(m[i][i]);
        for j in 0..k {
            assert_eq!(m[i][j], m[j][i]);
            for l in 0..k {
                if m[i][j] && m[j][l] {
                    assert!(m[i][l]);
                }
            }
        }
    }
}

#[test]
fn equivalent_structures_agree_on_sentences() {
    let mut rng = ChaCha8Rng::seed_from_u64(32);
    let c = one_relation_corpus();
    let mut pairs = vec![(fixtures::c3(), fixtures::c7())];
    for i in 0..c.len() {
        for j in i + 1..c.len() {
            if equiv2(&c[i], &c[j]).unwrap() && c[i].size() != c[j].size() {
                pairs.push((c[i].clone(), c[j].clone()));
            }
        }
    }
    let comp = fo2kit::build_companion(&fixtures::c3c7()).unwrap().companion;
    pairs.push((fixtures::c3c7(), comp));
    let mut checked = 0;
    while checked < 500 {
        let f = close(random_formula(&mut rng, 6, &[Var::X, Var::Y], &["E"]));
        if quantifier_depth(&f) > 4 {
            continue;
        }
        for (a, b) in &pairs {
            assert_eq!(
                evaluate(a, &f, &Assignment::empty()).unwrap(),
                evaluate(b, &f, &Assignment::empty()).unwrap()
            );
        }
        checked += 1;
    }
}

#[test]
fn equiv3_implies_equiv2() {
    let c = one_relation_corpus();
    for a in &c {
        for b in &c {
            if equiv3(a, b, DEFAULT_TRIPLE_BUDGET).unwrap() {
                assert!(equiv2(a, b).unwrap());
            }
        }
    }
}

#[test]
fn equiv3_matches_three_pebble_game() {
    let mut rng = ChaCha8Rng::seed_from_u64(33);
    let mut structures: Vec<FinStructure> = (0..40).map(|_| {
        let n = 1 + (rand::Rng::gen_range(&mut rng, 0..3usize));
        random_structure(&mut rng, "T", n, 1, 0.4)
    }).collect();
    structures.push(fixtures::c3());
    for a in &structures {
        for b in &structures {
            assert_eq!(equiv3(a, b, DEFAULT_TRIPLE_BUDGET).unwrap(), pebble3(a, b).equivalent());
        }
    }
}

#[test]
fn built_witnesses_verify() {
    let c = corpus(34, 120);
    for a in &c {
        for b in &c {
            if !a.same_signature(b) {
                continue;
            }
            match build_iso2(a, b).unwrap() {
                Some(iso) => assert!(verify_iso2(&iso, a, b).is_ok()),
                None => assert!(!pebble2(a, b).equivalent()),
            }
        }
    }
}
