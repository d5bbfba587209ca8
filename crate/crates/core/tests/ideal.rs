mod common;

use common::{c, random_complex, random_problem, rng, separated_points, C};
use nevpick_core::ideal::{
    construct_interpolant, construct_matrix_interpolant, idempotents, ideal_structure, representative_nodes,
    separating_function,
};
use nevpick_core::{Analytic, BlaschkeProduct, InterpolationProblem, Targets};
use proptest::prelude::*;
use rand::Rng;

fn without_zero_nodes(seed: u64) -> InterpolationProblem {
    let mut r = rng(seed);
    let m = r.gen_range(1..=2);
    let zeros = separated_points(&mut r, m, 0.75, 0.2, &[]);
    let b = BlaschkeProduct::new(zeros.iter().map(|&z| (z, 2))).unwrap();
    let count = r.gen_range(1..=3);
    let nodes = separated_points(&mut r, count, 0.75, 0.2, &zeros);
    let targets = (0..count).map(|_| random_complex(&mut r, 1.0)).collect();
    InterpolationProblem::scalar(b, nodes, targets).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    // lcm(B, E) q vanishes at every node and lies in H∞_B.
    #[test]
    fn generator_multiples_lie_in_the_ideal(seed in any::<u64>()) {
        let mut r = rng(seed);
        let m = r.gen_range(1..=3);
        let free = r.gen_range(1..=3);
        let p = random_problem(&mut r, m, free, true, 0.2, 0.75);
        let g = ideal_structure(&p).unwrap().generator_inner.unwrap();
        let q: Vec<C> = (0..3).map(|_| random_complex(&mut r, 1.0)).collect();
        for &z in p.nodes() {
            prop_assert!((g.eval(z) * common::horner(&q, z)).norm() < 1e-12);
        }
        prop_assert!(p.blaschke().divides(&g).unwrap());
    }

    #[test]
    fn zero_free_generator_vanishes_at_nodes(seed in any::<u64>()) {
        let p = without_zero_nodes(seed);
        let d = ideal_structure(&p).unwrap();
        prop_assert_eq!(d.case_r, 0);
        for &z in p.nodes() {
            prop_assert!(d.eval_w(z).unwrap().norm() < 1e-10);
        }
        for zero in p.blaschke().zeros() {
            prop_assert!((d.eval_w(zero.alpha).unwrap() - c(1.0, 0.0)).norm() < 1e-12);
        }
    }

    #[test]
    fn idempotents_are_lagrange(seed in any::<u64>()) {
        let mut r = rng(seed);
        let m = r.gen_range(1..=2);
        let free = r.gen_range(1..=3);
        let p = random_problem(&mut r, m, free, true, 0.2, 0.75);
        let g = separating_function(&p, seed).unwrap().g;
        let es = idempotents(&p, &g).unwrap();
        let reps = representative_nodes(&p);
        prop_assert_eq!(es.len(), reps.len());
        for z in p.nodes() {
            let total: C = es.iter().map(|e| e.eval(*z)).sum();
            prop_assert!((total - c(1.0, 0.0)).norm() < 1e-9);
        }
        for (j, e) in es.iter().enumerate() {
            for (i, &node) in reps.iter().enumerate() {
                let want = if i == j { 1.0 } else { 0.0 };
                prop_assert!((e.eval(p.nodes()[node]) - c(want, 0.0)).norm() < 1e-9);
            }
        }
    }

    #[test]
    fn interpolants_round_trip(seed in any::<u64>(), zero_free in any::<bool>()) {
        let p = if zero_free {
            without_zero_nodes(seed)
        } else {
            let mut r = rng(seed);
            random_problem(&mut r, 2, 2, true, 0.2, 0.75)
        };
        let h = construct_interpolant(&p, seed).unwrap();
        prop_assert!(h.residual <= 1e-9);
        let common_value = h.function.eval(p.blaschke().zeros()[0].alpha);
        for zero in p.blaschke().zeros() {
            let jet = h.function.jet(zero.alpha, zero.mult as usize - 1);
            prop_assert!((jet.value() - common_value).norm() < 1e-9);
            for t in 1..zero.mult as usize {
                prop_assert!(jet.derivative(t).norm() < 1e-9);
            }
        }
    }

    #[test]
    fn matrix_interpolants_round_trip(seed in any::<u64>()) {
        let mut r = rng(seed);
        let p = random_problem(&mut r, 2, 2, false, 0.2, 0.75);
        let lambda = common::Mat::from_fn(2, 2, |_, _| random_complex(&mut r, 1.0));
        let mut blocks = vec![lambda];
        for _ in 1..p.n() {
            blocks.push(common::Mat::from_fn(2, 2, |_, _| random_complex(&mut r, 1.0)));
        }
        let q = p.with_targets(Targets::Matrix(blocks.clone())).unwrap();
        let h = construct_matrix_interpolant(&q, seed).unwrap();
        prop_assert!(h.residual <= 1e-9);
        for (&z, w) in q.nodes().iter().zip(&blocks) {
            prop_assert!((h.function.eval(z) - w).norm() <= 1e-9);
        }
    }
}

#[test]
fn single_representative_gives_constant_interpolant() {
    let b = BlaschkeProduct::monomial(2);
    let p = InterpolationProblem::scalar(b, vec![c(0.0, 0.0)], vec![c(0.3, -0.2)]).unwrap();
    let h = construct_interpolant(&p, 0).unwrap();
    assert_eq!(h.function.degrees(), (0, 0));
    assert!((h.function.eval(c(0.6, 0.1)) - c(0.3, -0.2)).norm() < 1e-15);
}
