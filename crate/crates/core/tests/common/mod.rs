//! Independent oracles and random instance generators shared by the
//! integration tests. Nothing here goes through the library's Grammian or
//! compression code.
#![allow(dead_code)]

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use nevpick_core::lattice::InvariantSubspace;
use nevpick_core::{BlaschkeProduct, InterpolationProblem};

pub type C = Complex64;
pub type Mat = DMatrix<C>;

pub const QUAD_POINTS: usize = 1 << 14;
pub const TAYLOR_N: usize = 1024;

pub fn c(re: f64, im: f64) -> C {
    C::new(re, im)
}

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Uniform point in the disk of radius `radius`.
pub fn disk_point(rng: &mut impl Rng, radius: f64) -> C {
    let r = radius * rng.gen::<f64>().sqrt();
    C::from_polar(r, rng.gen_range(0.0..std::f64::consts::TAU))
}

/// `count` points in `|z| <= radius`, pairwise at least `sep` apart and at
/// least `sep` from every point of `avoid`.
pub fn separated_points(rng: &mut impl Rng, count: usize, radius: f64, sep: f64, avoid: &[C]) -> Vec<C> {
    let mut out: Vec<C> = Vec::new();
    while out.len() < count {
        let p = disk_point(rng, radius);
        if out.iter().chain(avoid).all(|q| (p - q).norm() >= sep) {
            out.push(p);
        }
    }
    out
}

pub fn random_complex(rng: &mut impl Rng, scale: f64) -> C {
    c(rng.gen_range(-scale..scale), rng.gen_range(-scale..scale))
}

/// Neumaier-compensated complex sum.
pub fn compensated_sum(terms: impl Iterator<Item = C>) -> C {
    let (mut s, mut comp) = (C::new(0.0, 0.0), C::new(0.0, 0.0));
    let two_sum = |a: f64, b: f64| {
        let s = a + b;
        let bb = s - a;
        (s, (a - (s - bb)) + (b - bb))
    };
    for t in terms {
        let (re, ere) = two_sum(s.re, t.re);
        let (im, eim) = two_sum(s.im, t.im);
        s = C::new(re, im);
        comp += C::new(ere, eim);
    }
    s + comp
}

/// `<f, g>` in `H^2` by the trapezoid rule on `QUAD_POINTS` points of the circle.
pub fn quad_inner(f: impl Fn(C) -> C, g: impl Fn(C) -> C) -> C {
    let n = QUAD_POINTS;
    let sum = compensated_sum((0..n).map(|k| {
        let z = C::from_polar(1.0, std::f64::consts::TAU * k as f64 / n as f64);
        f(z) * g(z).conj()
    }));
    sum / n as f64
}

/// Evaluates `z^i / (1 - conj(w) z)^(i+1)` directly.
pub fn kernel_fn(w: C, i: u32) -> impl Fn(C) -> C {
    move |z: C| z.powu(i) / (C::new(1.0, 0.0) - w.conj() * z).powu(i + 1)
}

pub fn horner(p: &[C], z: C) -> C {
    p.iter().rev().fold(C::new(0.0, 0.0), |acc, &a| acc * z + a)
}

fn binomial(n: usize, k: usize) -> f64 {
    (0..k).fold(1.0, |acc, i| acc * (n - i) as f64 / (i + 1) as f64)
}

/// Polynomial `p` of degree `< sum of conditions` with `p^(t)(x)/t! = value`
/// for each `(x, t, value)`.
pub fn hermite(conditions: &[(C, usize, C)]) -> Vec<C> {
    let d = conditions.len();
    let a = Mat::from_fn(d, d, |row, e| {
        let (x, t, _) = conditions[row];
        if e < t {
            C::new(0.0, 0.0)
        } else {
            x.powu((e - t) as u32) * binomial(e, t)
        }
    });
    let rhs = DVector::from_iterator(d, conditions.iter().map(|c| c.2));
    let sol = a.lu().solve(&rhs).expect("confluent Vandermonde system is regular");
    sol.iter().copied().collect()
}

/// Hermite conditions for the scalar class `(λ, free values)`: value `λ` and
/// vanishing derivatives at every zero of `B`, values at the free nodes.
pub fn class_conditions(b: &BlaschkeProduct, lambda: C, free: &[C], free_values: &[C]) -> Vec<(C, usize, C)> {
    let mut out = Vec::new();
    for z in b.zeros() {
        for t in 0..z.mult as usize {
            out.push((z.alpha, t, if t == 0 { lambda } else { C::new(0.0, 0.0) }));
        }
    }
    for (&x, &w) in free.iter().zip(free_values) {
        out.push((x, 0, w));
    }
    out
}

/// Taylor coefficients (up to `n`) of `prod (alpha - z)/(1 - conj(alpha) z)`
/// over the given zeros (with multiplicity); the unimodular normalizers are
/// irrelevant to the ranges used here.
pub fn inner_taylor(zeros: &[C], n: usize) -> Vec<C> {
    let mut out = vec![C::new(0.0, 0.0); n];
    out[0] = C::new(1.0, 0.0);
    for &a in zeros {
        // geometric series of 1/(1 - conj(a) z)
        let mut series = vec![C::new(0.0, 0.0); n];
        let mut pow = C::new(1.0, 0.0);
        for s in series.iter_mut() {
            *s = pow;
            pow *= a.conj();
        }
        let factor: Vec<C> = (0..n)
            .map(|k| a * series[k] - if k > 0 { series[k - 1] } else { C::new(0.0, 0.0) })
            .collect();
        let mut next = vec![C::new(0.0, 0.0); n];
        for (i, &x) in out.iter().enumerate() {
            if x == C::new(0.0, 0.0) {
                continue;
            }
            for (j, &y) in factor[..n - i].iter().enumerate() {
                next[i + j] += x * y;
            }
        }
        out = next;
    }
    out
}

/// Orthonormal basis of `H^2 ⊖ Θ H^2` truncated to the first `n` Taylor
/// coefficients, where `Θ` has the given zeros. Built with a randomized range
/// finder applied to `I - T_Θ T_Θ^*`.
pub fn coinvariant_basis(theta_zeros: &[C], n: usize, seed: u64) -> Mat {
    let theta = inner_taylor(theta_zeros, n);
    let d = theta_zeros.len();
    let probes = d + 8;
    let mut r = rng(seed);
    let g = Mat::from_fn(n, probes, |_, _| random_complex(&mut r, 1.0));
    let mut y = g.clone();
    for col in 0..probes {
        // T^* g: (T^* g)_i = sum_{j >= i} conj(theta_{j-i}) g_j
        let tg: Vec<C> = (0..n)
            .map(|i| (i..n).map(|j| theta[j - i].conj() * g[(j, col)]).sum())
            .collect();
        for i in 0..n {
            let t: C = (0..=i).map(|j| theta[i - j] * tg[j]).sum();
            y[(i, col)] -= t;
        }
    }
    let svd = y.svd(true, false);
    let u = svd.u.expect("left vectors requested");
    let mut order: Vec<usize> = (0..svd.singular_values.len()).collect();
    order.sort_by(|&a, &b| svd.singular_values[b].total_cmp(&svd.singular_values[a]));
    let gap = svd.singular_values[order[d - 1]] / svd.singular_values[order[0]];
    assert!(gap > 1e-6, "range finder lost rank: {gap}");
    if probes > d {
        let tail = svd.singular_values[order[d]] / svd.singular_values[order[0]];
        assert!(tail < 1e-8, "co-invariant subspace wider than deg Θ: {tail}");
    }
    Mat::from_fn(n, d, |i, j| u[(i, order[j])])
}

/// `U^* T_p U` for the polynomial `p` (lower-triangular Toeplitz action).
pub fn compress(u: &Mat, p: &[C]) -> Mat {
    let n = u.nrows();
    let mut tu = Mat::zeros(n, u.ncols());
    for col in 0..u.ncols() {
        for i in 0..n {
            let mut s = C::new(0.0, 0.0);
            for (k, &pk) in p.iter().enumerate().take(i + 1) {
                s += pk * u[(i - k, col)];
            }
            tu[(i, col)] = s;
        }
    }
    u.adjoint() * tu
}

pub fn spectral_norm(m: &Mat) -> f64 {
    m.clone().singular_values().iter().copied().fold(0.0, f64::max)
}

/// Zeros of `lcm(B, E)` with multiplicity, `E` having simple zeros at the nodes.
pub fn lcm_zeros(b: &BlaschkeProduct, nodes: &[C]) -> Vec<C> {
    let mut out = Vec::new();
    for z in b.zeros() {
        out.extend(std::iter::repeat_n(z.alpha, z.mult as usize));
    }
    for &x in nodes {
        if b.zeros().iter().all(|z| z.alpha != x) {
            out.push(x);
        }
    }
    out
}

/// Quotient norm of the scalar class `(λ, free values)` via truncated Taylor
/// coefficients: the norm of `P_K T_p |_K` with `p` a Hermite interpolant.
pub fn taylor_norm(b: &BlaschkeProduct, free: &[C], lambda: C, free_values: &[C], n: usize) -> f64 {
    let p = hermite(&class_conditions(b, lambda, free, free_values));
    let u = coinvariant_basis(&lcm_zeros(b, free), n, 17);
    spectral_norm(&compress(&u, &p))
}

/// Matrix version: `k x k` blocks, entrywise Hermite interpolation.
pub fn taylor_norm_matrix(b: &BlaschkeProduct, free: &[C], lambda: &Mat, free_values: &[Mat], n: usize) -> f64 {
    let k = lambda.nrows();
    let u = coinvariant_basis(&lcm_zeros(b, free), n, 17);
    let d = u.ncols();
    let mut big = Mat::zeros(d * k, d * k);
    for a in 0..k {
        for bb in 0..k {
            let vals: Vec<C> = free_values.iter().map(|w| w[(a, bb)]).collect();
            let p = hermite(&class_conditions(b, lambda[(a, bb)], free, &vals));
            big.view_mut((a * d, bb * d), (d, d)).copy_from(&compress(&u, &p));
        }
    }
    spectral_norm(&big)
}

/// Random `r >= 1` scalar problem: `m` distinct zeros of `B` (random
/// multiplicities when `allow_mult`), the first zero used as a node,
/// `free` further nodes. Returns the problem and its common value.
pub fn random_problem(
    rng: &mut impl Rng,
    m: usize,
    free: usize,
    allow_mult: bool,
    sep: f64,
    radius: f64,
) -> InterpolationProblem {
    loop {
        let zeros = separated_points(rng, m, radius, sep, &[]);
        let mults: Vec<u32> = (0..m)
            .map(|_| if allow_mult { rng.gen_range(1..=2) } else { 1 })
            .collect();
        let total: u32 = mults.iter().sum();
        if total < 2 {
            continue;
        }
        let b = BlaschkeProduct::new(zeros.iter().copied().zip(mults)).unwrap();
        let free_nodes = separated_points(rng, free, radius, sep, &zeros);
        let lambda = random_complex(rng, 0.7);
        let mut nodes = vec![zeros[0]];
        let mut targets = vec![lambda];
        for &x in &free_nodes {
            nodes.push(x);
            targets.push(random_complex(rng, 0.7));
        }
        return InterpolationProblem::scalar(b, nodes, targets).unwrap();
    }
}

/// Sup norm on the circle estimated on a fine grid.
pub fn boundary_sup(f: impl Fn(C) -> C, points: usize) -> f64 {
    (0..points)
        .map(|k| f(C::from_polar(1.0, std::f64::consts::TAU * k as f64 / points as f64)).norm())
        .fold(0.0, f64::max)
}

/// `z^a ([p_1, ..] ⊕ z^N H^2)` with each `p_i` having a random order at 0.
pub fn random_subspace(rng: &mut impl Rng, n: u32) -> InvariantSubspace {
    loop {
        let a = rng.gen_range(0..=2);
        let dim = rng.gen_range(1..=2usize.min(n as usize));
        let basis: Vec<Vec<C>> = (0..dim)
            .map(|_| {
                let order = rng.gen_range(0..n as usize);
                (0..n as usize)
                    .map(|i| if i < order { c(0.0, 0.0) } else { c(rng.gen_range(-2..=2) as f64, rng.gen_range(-1..=1) as f64) })
                    .collect()
            })
            .collect();
        if let Ok(s) = InvariantSubspace::new(BlaschkeProduct::monomial(a), basis, n) {
            return s;
        }
    }
}
