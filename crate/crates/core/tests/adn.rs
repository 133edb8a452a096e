use fo2kit::adn::{build_adn_model, ra_closure};
use fo2kit::automorphism::Permutation;
use fo2kit::corpus::random_structure;
use fo2kit::relation::{ra_apply, RaOp};
use fo2kit::BinRel;
use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn random_rel(rng: &mut ChaCha8Rng, n: usize, density: f64) -> BinRel {
    random_structure(rng, "r", n, 1, density).relation("E").unwrap().clone()
}

#[test]
fn ra_laws() {
    let mut rng = ChaCha8Rng::seed_from_u64(71);
    for n in 1..=7 {
        for _ in 0..40 {
            let (a, b, c) = (random_rel(&mut rng, n, 0.3), random_rel(&mut rng, n, 0.3), random_rel(&mut rng, n, 0.3));
            let id = ra_apply(RaOp::Identity, &a, None).unwrap();
            let conv = |x: &BinRel| ra_apply(RaOp::Converse, x, None).unwrap();
            let comp = |x: &BinRel, y: &BinRel| ra_apply(RaOp::Compose, x, Some(y)).unwrap();
            let not = |x: &BinRel| ra_apply(RaOp::Complement, x, None).unwrap();
            let or = |x: &BinRel, y: &BinRel| ra_apply(RaOp::Union, x, Some(y)).unwrap();
            assert_eq!(conv(&conv(&a)), a);
            assert_eq!(comp(&comp(&a, &b), &c), comp(&a, &comp(&b, &c)));
            assert_eq!(comp(&a, &id), a);
            assert_eq!(comp(&id, &a), a);
            assert_eq!(not(&or(&a, &b)), not(&a).intersection(&not(&b)).unwrap());
            assert_eq!(not(&not(&a)), a);
        }
    }
    assert!(ra_apply(RaOp::Union, &BinRel::empty(2), None).is_err());
    assert!(ra_apply(RaOp::Compose, &BinRel::empty(2), Some(&BinRel::empty(3))).is_err());
}

/// A permutation fixes every element of a closure iff it fixes the generators.
#[test]
fn base_automorphism_reduction() {
    let mut rng = ChaCha8Rng::seed_from_u64(72);
    for n in 2..=5 {
        for round in 0..12 {
            let gens: Vec<BinRel> = (0..1 + round % 2).map(|_| random_rel(&mut rng, n, 0.35)).collect();
            let closure = ra_closure(n, &gens, 5000);
            if !closure.complete {
                continue;
            }
            assert!(closure.is_closed());
            let mut perms: Vec<Vec<usize>> = vec![(0..n).collect()];
            for _ in 0..20 {
                let mut p: Vec<usize> = (0..n).collect();
                p.shuffle(&mut rng);
                perms.push(p);
            }
            for p in perms {
                let fixes_gens = gens.iter().all(|g| g.permute(&p) == *g);
                let fixes_all = closure.elements.iter().all(|r| r.permute(&p) == *r);
                assert_eq!(fixes_gens, fixes_all);
            }
        }
    }
}

#[test]
fn adn_generators_and_closure_prefix() {
    let m = build_adn_model();
    let gens: Vec<BinRel> = m.relations().map(|(_, r)| r.clone()).collect();
    let closure = ra_closure(45, &gens, 2000);
    assert!(!closure.complete);
    // the level shift fixes all four generators, hence every closure element
    let shift = Permutation::from_images((0..45).map(|a| (a + 9) % 45).collect()).unwrap();
    assert!(shift.is_automorphism_of(&m));
    assert!(closure.elements.iter().all(|r| shift.preserves(r)));
}
