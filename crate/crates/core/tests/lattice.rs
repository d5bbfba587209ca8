mod common;

use common::{c, random_subspace, rng, C};
use nevpick_core::lattice::{canonical_form, decomposition_consistency, join, meet, polynomial_inner_divisor, InvariantSubspace};
use nevpick_core::{BlaschkeProduct, Error};
use proptest::prelude::*;

proptest! {
    #![proptest_config(ProptestConfig::with_cases(96))]

    #[test]
    fn canonical_form_is_idempotent(seed in any::<u64>(), n in 1u32..=4) {
        let s = random_subspace(&mut rng(seed), n);
        let f = canonical_form(&s).unwrap();
        let again = canonical_form(&InvariantSubspace::new(f.phi.clone(), f.w_basis.clone(), n).unwrap()).unwrap();
        prop_assert!(again.phi.same_zeros(&f.phi).unwrap());
        let v = decomposition_consistency(&f.phi, &f.w_basis, &again.phi, &again.w_basis, n).unwrap();
        prop_assert!(v.equal_subspaces && v.same_polynomial_part);
    }

    // W ⊕ z^N H^2 has no common inner factor left: some element of W is
    // nonzero at the origin.
    #[test]
    fn canonical_part_is_coprime_to_z(seed in any::<u64>(), n in 1u32..=4) {
        let f = canonical_form(&random_subspace(&mut rng(seed), n)).unwrap();
        prop_assert!(f.w_basis.iter().any(|w| w[0].norm() > 1e-12));
        let again = canonical_form(&InvariantSubspace::new(f.phi.clone(), f.w_basis.clone(), n).unwrap()).unwrap();
        prop_assert!(again.theta.is_one());
    }

    #[test]
    fn canonical_form_describes_the_same_subspace(seed in any::<u64>(), n in 1u32..=4) {
        let s = random_subspace(&mut rng(seed), n);
        let f = canonical_form(&s).unwrap();
        let v = decomposition_consistency(&s.psi, &s.v_basis, &f.phi, &f.w_basis, n).unwrap();
        prop_assert!(v.equal_subspaces);
        prop_assert!(v.biconditional_holds);
        prop_assert!(s.psi.divides(&f.phi).unwrap());
    }

    #[test]
    fn meet_respects_divisor_bounds(seed in any::<u64>(), n in 1u32..=4) {
        let mut r = rng(seed);
        let a = random_subspace(&mut r, n);
        let b = random_subspace(&mut r, n);
        let m = meet(&a, &b).unwrap();
        prop_assert!(m.bounds_hold);
        prop_assert!(m.lower.divides(&m.canonical.phi).unwrap());
        prop_assert!(m.canonical.phi.divides(&m.upper).unwrap());
        prop_assert!(a.psi.divides(&m.canonical.phi).unwrap() && b.psi.divides(&m.canonical.phi).unwrap());
    }

    #[test]
    fn join_divisor_is_the_gcd(seed in any::<u64>(), n in 1u32..=4) {
        let mut r = rng(seed);
        let a = random_subspace(&mut r, n);
        let b = random_subspace(&mut r, n);
        let j = join(&a, &b).unwrap();
        prop_assert!(j.law_holds);
        let expected = canonical_form(&a).unwrap().phi.gcd(&canonical_form(&b).unwrap().phi).unwrap();
        prop_assert!(j.canonical.phi.same_zeros(&expected).unwrap());
    }

    #[test]
    fn meet_and_join_are_commutative(seed in any::<u64>(), n in 1u32..=3) {
        let mut r = rng(seed);
        let a = random_subspace(&mut r, n);
        let b = random_subspace(&mut r, n);
        let (ab, ba) = (meet(&a, &b).unwrap(), meet(&b, &a).unwrap());
        prop_assert!(ab.canonical.phi.same_zeros(&ba.canonical.phi).unwrap());
        let (ab, ba) = (join(&a, &b).unwrap(), join(&b, &a).unwrap());
        prop_assert!(ab.canonical.phi.same_zeros(&ba.canonical.phi).unwrap());
    }

    // Roots placed inside the disk come back as the inner divisor.
    #[test]
    fn inner_divisor_recovers_planted_roots(
        inside in prop::collection::vec((0.1..0.8f64, 0.0..std::f64::consts::TAU), 0..3),
        outside in prop::collection::vec((1.3..3.0f64, 0.0..std::f64::consts::TAU), 0..3),
        origin in 0usize..3,
    ) {
        let roots: Vec<C> = inside.iter().chain(&outside).map(|&(r, t)| C::from_polar(r, t)).collect();
        let mut p = vec![c(1.0, 0.0)];
        for root in &roots {
            let mut next = vec![c(0.0, 0.0); p.len() + 1];
            for (i, &x) in p.iter().enumerate() {
                next[i + 1] += x;
                next[i] -= x * root;
            }
            p = next;
        }
        let mut shifted = vec![c(0.0, 0.0); origin];
        shifted.extend(p);
        let d = polynomial_inner_divisor(&shifted).unwrap();
        let mut expected: Vec<(C, u32)> = inside.iter().map(|&(r, t)| (C::from_polar(r, t), 1)).collect();
        if origin > 0 {
            expected.push((c(0.0, 0.0), origin as u32));
        }
        prop_assume!(BlaschkeProduct::new(expected.clone()).is_ok());
        prop_assert_eq!(d.degree(), inside.len() + origin);
        for (z, _) in expected {
            prop_assert!(d.zeros().iter().any(|w| (w.alpha - z).norm() < 1e-8));
        }
    }
}

#[test]
fn non_monomial_inner_parts_are_unsupported() {
    let psi = BlaschkeProduct::from_points(&[c(0.5, 0.0)]).unwrap();
    let a = InvariantSubspace::new(psi, vec![vec![c(1.0, 0.0)]], 2).unwrap();
    let b = InvariantSubspace::new(BlaschkeProduct::one(), vec![vec![c(1.0, 0.0)]], 2).unwrap();
    assert!(matches!(meet(&a, &b), Err(Error::Unsupported(_))));
    assert!(matches!(join(&a, &b), Err(Error::Unsupported(_))));
}

#[test]
fn invalid_polynomial_parts_are_rejected() {
    let one = BlaschkeProduct::one();
    assert!(InvariantSubspace::new(one.clone(), vec![vec![c(0.0, 0.0), c(0.0, 0.0), c(1.0, 0.0)]], 2).is_err());
    let p = vec![c(1.0, 0.0), c(2.0, 0.0)];
    let q = vec![c(2.0, 0.0), c(4.0, 0.0)];
    assert!(InvariantSubspace::new(one.clone(), vec![p, q], 2).is_err());
    assert!(InvariantSubspace::new(one, vec![], 0).is_err());
}
