mod common;

use std::collections::BTreeSet;

use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha20Rng;

use common::*;
use tsabe::group::{BilinearGroup, TransparentSuite};
use tsabe::lsss::{compile, reconstruct_coeffs, share, Attribute, Policy};

fn case(seed: u64, leaves: usize, mask: u8) -> (Policy, BTreeSet<Attribute>) {
    let uni = universe(6);
    let mut rng = ChaCha20Rng::seed_from_u64(seed);
    let p = random_policy(&mut rng, &uni, leaves);
    let s = uni.iter().enumerate().filter(|(i, _)| mask >> i & 1 == 1).map(|(_, a)| a.clone()).collect();
    (p, s)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(400))]

    #[test]
    fn coefficients_exist_iff_policy_holds(seed: u64, leaves in 1usize..10, mask: u8) {
        let g = TransparentSuite::default();
        let (p, s) = case(seed, leaves, mask);
        let access = compile(&p, g.order());
        prop_assert_eq!(access.rows(), p.leaf_count());
        prop_assert_eq!(reconstruct_coeffs(&access, &s).is_some(), holds(&p, &s));
        prop_assert_eq!(p.evaluate(&s), holds(&p, &s));
    }

    #[test]
    fn coefficients_recover_every_sharing(seed: u64, leaves in 1usize..10, share_seed: u64) {
        let g = TransparentSuite::default();
        let uni = universe(6);
        let mut rng = ChaCha20Rng::seed_from_u64(seed);
        let p = random_policy(&mut rng, &uni, leaves);
        let s = satisfying_set(&mut rng, &p);
        let access = compile(&p, g.order());
        let c = reconstruct_coeffs(&access, &s).expect("satisfying set");
        let mut rng = ChaCha20Rng::seed_from_u64(share_seed);
        for _ in 0..5 {
            let w = g.random_scalar(&mut rng);
            let shares = share(&access, w, &mut rng);
            prop_assert_eq!(c.combine(&shares), w);
            prop_assert!(c.rows().iter().all(|&r| s.contains(access.rho(r))));
        }
    }

    #[test]
    fn subsets_of_failing_sets_fail(seed: u64, leaves in 2usize..8) {
        let g = TransparentSuite::default();
        let uni = universe(6);
        let mut rng = ChaCha20Rng::seed_from_u64(seed);
        let p = random_policy(&mut rng, &uni, leaves);
        let s = failing_set(&mut rng, &p, &uni);
        let access = compile(&p, g.order());
        let sub: Vec<Attribute> = s.iter().cloned().collect();
        for mask in 0u32..(1 << sub.len()) {
            let t: BTreeSet<Attribute> = sub.iter().enumerate().filter(|(i, _)| mask >> i & 1 == 1).map(|(_, a)| a.clone()).collect();
            prop_assert!(reconstruct_coeffs(&access, &t).is_none());
        }
    }

    #[test]
    fn display_parses_back(seed: u64, leaves in 1usize..10) {
        let uni = universe(6);
        let mut rng = ChaCha20Rng::seed_from_u64(seed);
        let p = random_policy(&mut rng, &uni, leaves);
        let q: Policy = p.to_string().parse().unwrap();
        let g = TransparentSuite::default();
        prop_assert_eq!(compile(&q, g.order()), compile(&p, g.order()));
    }
}

#[test]
fn empty_set_never_satisfies() {
    let g = TransparentSuite::default();
    let p: Policy = "a0 OR a1 OR a2".parse().unwrap();
    assert!(reconstruct_coeffs(&compile(&p, g.order()), &BTreeSet::new()).is_none());
}
