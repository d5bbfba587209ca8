//! The ideal of `H∞_B` vanishing at the nodes, and interpolants built from
//! separating functions and Lagrange idempotents.
//!
//! Elements of `H∞_B` are stored as `f = λ + B h` with `h = sum_{k,j} c_{kj} z^j B^k`
//! kept as a polynomial in the two symbols `z` and `B`. Products and affine
//! combinations stay in this form, so the membership constraints hold by
//! construction.

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::blaschke::BlaschkeProduct;
use crate::error::{Error, Result};
use crate::jet::{Analytic, Jet};
use crate::linalg::{hermitian_eigen, CMatrix, CVector, ONE, ZERO};
use crate::modelspace::szego;
use crate::problem::{InterpolationProblem, Targets};

/// `λ + B h` with `h[k][j]` the coefficient of `z^j B^k`.
#[derive(Debug, Clone, PartialEq)]
pub struct ConstrainedFunction {
    pub b: BlaschkeProduct,
    pub lambda: Complex64,
    pub h: Vec<Vec<Complex64>>,
}

fn add_into(acc: &mut Vec<Vec<Complex64>>, other: &[Vec<Complex64>], scale: Complex64, shift: usize) {
    if acc.len() < other.len() + shift {
        acc.resize(other.len() + shift, Vec::new());
    }
    for (k, row) in other.iter().enumerate() {
        let dst = &mut acc[k + shift];
        if dst.len() < row.len() {
            dst.resize(row.len(), ZERO);
        }
        for (j, c) in row.iter().enumerate() {
            dst[j] += c * scale;
        }
    }
}

fn bivariate_mul(a: &[Vec<Complex64>], b: &[Vec<Complex64>]) -> Vec<Vec<Complex64>> {
    if a.is_empty() || b.is_empty() {
        return Vec::new();
    }
    let mut out = vec![Vec::new(); a.len() + b.len() - 1];
    for (ka, ra) in a.iter().enumerate() {
        for (kb, rb) in b.iter().enumerate() {
            if ra.is_empty() || rb.is_empty() {
                continue;
            }
            let dst = &mut out[ka + kb];
            if dst.len() < ra.len() + rb.len() - 1 {
                dst.resize(ra.len() + rb.len() - 1, ZERO);
            }
            for (ja, ca) in ra.iter().enumerate() {
                for (jb, cb) in rb.iter().enumerate() {
                    dst[ja + jb] += ca * cb;
                }
            }
        }
    }
    out
}

impl ConstrainedFunction {
    pub fn constant(b: &BlaschkeProduct, c: Complex64) -> Self {
        Self {
            b: b.clone(),
            lambda: c,
            h: Vec::new(),
        }
    }

    /// `λ + B p(z)` for a polynomial `p`.
    pub fn new(b: &BlaschkeProduct, lambda: Complex64, p: Vec<Complex64>) -> Self {
        Self {
            b: b.clone(),
            lambda,
            h: vec![p],
        }
    }

    pub fn add(&self, other: &Self) -> Self {
        let mut h = self.h.clone();
        add_into(&mut h, &other.h, ONE, 0);
        Self {
            b: self.b.clone(),
            lambda: self.lambda + other.lambda,
            h,
        }
    }

    pub fn scale(&self, s: Complex64) -> Self {
        Self {
            b: self.b.clone(),
            lambda: self.lambda * s,
            h: self
                .h
                .iter()
                .map(|row| row.iter().map(|c| c * s).collect())
                .collect(),
        }
    }

    pub fn add_scalar(&self, s: Complex64) -> Self {
        let mut out = self.clone();
        out.lambda += s;
        out
    }

    /// `(λ1 + B h1)(λ2 + B h2) = λ1 λ2 + B (λ1 h2 + λ2 h1 + B h1 h2)`.
    pub fn mul(&self, other: &Self) -> Self {
        let mut h = Vec::new();
        add_into(&mut h, &other.h, self.lambda, 0);
        add_into(&mut h, &self.h, other.lambda, 0);
        add_into(&mut h, &bivariate_mul(&self.h, &other.h), ONE, 1);
        Self {
            b: self.b.clone(),
            lambda: self.lambda * other.lambda,
            h,
        }
    }

    /// Largest power of `B` and of `z` occurring in `h`.
    pub fn degrees(&self) -> (usize, usize) {
        let kb = self.h.len().saturating_sub(1);
        let kz = self.h.iter().map(|r| r.len()).max().unwrap_or(1).saturating_sub(1);
        (kb, kz)
    }
}

impl Analytic for ConstrainedFunction {
    fn jet(&self, z: Complex64, order: usize) -> Jet {
        let bj = self.b.jet(z, order);
        let var = Jet::variable(z, order);
        let mut acc = Jet::constant(ZERO, order);
        for row in self.h.iter().rev() {
            let mut p = Jet::constant(ZERO, order);
            for c in row.iter().rev() {
                p = (&p * &var).add_scalar(*c);
            }
            acc = &(&acc * &bj) + &p;
        }
        (&acc * &bj).add_scalar(self.lambda)
    }
}

/// `k x k` array of constrained functions.
#[derive(Debug, Clone, PartialEq)]
pub struct MatrixFunction {
    pub entries: Vec<Vec<ConstrainedFunction>>,
}

impl MatrixFunction {
    pub fn size(&self) -> usize {
        self.entries.len()
    }

    pub fn eval(&self, z: Complex64) -> CMatrix {
        let k = self.size();
        CMatrix::from_fn(k, k, |a, b| self.entries[a][b].eval(z))
    }
}

/// Description of `I = {f in H∞_B : f(z_j) = 0 for all j}`.
#[derive(Debug, Clone)]
pub struct IdealDescription {
    pub case_r: usize,
    /// `lcm(B, E)` when `r >= 1`; then `I = lcm(B, E) H∞`.
    pub generator_inner: Option<BlaschkeProduct>,
    /// `r = 0`: coefficients `c` of `w = 1 + B sum_j c_j k_{z_j}`.
    pub w_coeffs: Option<Vec<Complex64>>,
    pub w_dim: usize,
    nodes: Vec<Complex64>,
    b: BlaschkeProduct,
}

impl IdealDescription {
    /// Evaluates the `r = 0` generator `w`.
    pub fn eval_w(&self, z: Complex64) -> Option<Complex64> {
        let c = self.w_coeffs.as_ref()?;
        let s: Complex64 = c
            .iter()
            .zip(&self.nodes)
            .map(|(cj, zj)| cj * szego(z, *zj))
            .sum();
        Some(ONE + self.b.value(z) * s)
    }
}

pub fn ideal_structure(problem: &InterpolationProblem) -> Result<IdealDescription> {
    let b = problem.blaschke().clone();
    let nodes = problem.nodes().to_vec();
    let r = problem.r();
    if r >= 1 {
        let e = problem.node_blaschke()?;
        return Ok(IdealDescription {
            case_r: r,
            generator_inner: Some(b.lcm(&e)?),
            w_coeffs: None,
            w_dim: r,
            nodes,
            b,
        });
    }
    // diag(B(z_i)) [k_{z_j}(z_i)] c = -1
    let n = nodes.len();
    let sys = CMatrix::from_fn(n, n, |i, j| b.value(nodes[i]) * szego(nodes[i], nodes[j]));
    let rhs = CVector::from_element(n, -ONE);
    let c = sys
        .lu()
        .solve(&rhs)
        .ok_or_else(|| Error::Internal("singular system for the ideal generator".into()))?;
    Ok(IdealDescription {
        case_r: 0,
        generator_inner: None,
        w_coeffs: Some(c.iter().copied().collect()),
        w_dim: 1,
        nodes,
        b,
    })
}

/// Indices (in stored order) of the nodes whose values are independent:
/// the first zero node and every free node, or all nodes when `r = 0`.
pub fn representative_nodes(problem: &InterpolationProblem) -> Vec<usize> {
    if problem.r() == 0 {
        (0..problem.n()).collect()
    } else {
        std::iter::once(0).chain(problem.r()..problem.n()).collect()
    }
}

fn pairwise_separation(values: &[Complex64]) -> (f64, f64) {
    let mut min = f64::INFINITY;
    let mut diam: f64 = 0.0;
    for i in 0..values.len() {
        for j in 0..i {
            let d = (values[i] - values[j]).norm();
            min = min.min(d);
            diam = diam.max(d);
        }
    }
    (min, diam)
}

#[derive(Debug, Clone)]
pub struct SeparatingFunction {
    pub g: ConstrainedFunction,
    /// Minimum pairwise distance of `g` over the representative nodes.
    pub separation: f64,
    pub attempts: usize,
}

const SEPARATION_RETRIES: usize = 50;
const SEPARATION_REL: f64 = 1e-6;

/// Random `g = λ0 + B (c0 + c1 z)` taking distinct values on the representative
/// nodes, coefficients drawn on the annulus `0.5 <= |c| <= 1.5`.
pub fn separating_function(problem: &InterpolationProblem, seed: u64) -> Result<SeparatingFunction> {
    let b = problem.blaschke();
    let reps: Vec<Complex64> = representative_nodes(problem)
        .into_iter()
        .map(|i| problem.nodes()[i])
        .collect();
    if reps.len() == 1 {
        return Ok(SeparatingFunction {
            g: ConstrainedFunction::constant(b, ZERO),
            separation: f64::INFINITY,
            attempts: 0,
        });
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let annulus = |rng: &mut ChaCha8Rng| {
        Complex64::from_polar(rng.gen_range(0.5..1.5), rng.gen_range(0.0..std::f64::consts::TAU))
    };
    let mut best = 0.0;
    for attempt in 1..=SEPARATION_RETRIES {
        let lambda0 = annulus(&mut rng);
        let p = vec![annulus(&mut rng), annulus(&mut rng)];
        let g = ConstrainedFunction::new(b, lambda0, p);
        let values: Vec<Complex64> = reps.iter().map(|&z| g.eval(z)).collect();
        let (min, diam) = pairwise_separation(&values);
        if min >= SEPARATION_REL * diam && min > 0.0 {
            return Ok(SeparatingFunction {
                g,
                separation: min,
                attempts: attempt,
            });
        }
        best = f64::max(best, min);
    }
    Err(Error::Separation {
        attained: best,
        required: SEPARATION_REL,
    })
}

/// Lagrange idempotents `e_j = prod_{i != j} (g - g(z_i)) / (g(z_j) - g(z_i))`
/// over the representative nodes.
pub fn idempotents(problem: &InterpolationProblem, g: &ConstrainedFunction) -> Result<Vec<ConstrainedFunction>> {
    let b = problem.blaschke();
    let reps = representative_nodes(problem);
    let values: Vec<Complex64> = reps.iter().map(|&i| g.eval(problem.nodes()[i])).collect();
    let (min, diam) = pairwise_separation(&values);
    if reps.len() > 1 && (min == 0.0 || min < SEPARATION_REL * diam) {
        return Err(Error::Separation {
            attained: min,
            required: SEPARATION_REL * diam,
        });
    }
    let mut out = Vec::with_capacity(reps.len());
    for j in 0..reps.len() {
        let mut e = ConstrainedFunction::constant(b, ONE);
        for i in 0..reps.len() {
            if i == j {
                continue;
            }
            let factor = g.add_scalar(-values[i]).scale((values[j] - values[i]).inv());
            e = e.mul(&factor);
        }
        out.push(e);
    }
    Ok(out)
}

#[derive(Debug, Clone, PartialEq)]
pub enum DependenceVerdict {
    /// `v_last` lies in the span; `consistent` reports whether every target
    /// with a nonzero coefficient equals the last one.
    Dependent {
        alpha: Vec<Complex64>,
        residual: f64,
        consistent: bool,
    },
    NotDependent {
        residual: f64,
    },
}

pub const DEPENDENCE_RESIDUAL: f64 = 1e-10;

/// Given vectors `v_1..v_{n+1}` (columns of `kernels`) in a Hilbert space with
/// Gram matrix `gram`, and targets `W_1..W_{n+1}`: if
/// `v_{n+1} = sum alpha_i v_i`, then a contractive interpolant forces
/// `W_i = W_{n+1}` whenever `alpha_i != 0`.
pub fn dependence_check(kernels: &CMatrix, targets: &[CMatrix], gram: &CMatrix) -> Result<DependenceVerdict> {
    let cols = kernels.ncols();
    if cols < 2 || targets.len() != cols {
        return Err(Error::DimensionMismatch {
            expected: cols,
            got: targets.len(),
        });
    }
    let v = kernels.columns(0, cols - 1).into_owned();
    let last = kernels.column(cols - 1).into_owned();
    let normal = v.adjoint() * gram * &v;
    let (eigs, _) = hermitian_eigen(&normal);
    if eigs[0] <= 1e-14 * eigs.last().copied().unwrap_or(1.0).max(1e-300) {
        return Err(Error::InvalidParameter(
            "the first vectors of a dependence check must be independent".into(),
        ));
    }
    let rhs = v.adjoint() * gram * &last;
    let alpha = normal
        .lu()
        .solve(&rhs)
        .ok_or_else(|| Error::Internal("singular normal equations".into()))?;
    let diff = &v * &alpha - &last;
    let residual = (diff.adjoint() * gram * &diff)[(0, 0)].re.max(0.0).sqrt();
    let scale = (last.adjoint() * gram * &last)[(0, 0)].re.max(0.0).sqrt().max(1.0);
    if residual > DEPENDENCE_RESIDUAL * scale {
        return Ok(DependenceVerdict::NotDependent { residual });
    }
    let w_last = &targets[cols - 1];
    let consistent = alpha.iter().enumerate().all(|(i, a)| {
        a.norm() <= DEPENDENCE_RESIDUAL || (&targets[i] - w_last).norm() <= 1e-9 * w_last.norm().max(1.0)
    });
    Ok(DependenceVerdict::Dependent {
        alpha: alpha.iter().copied().collect(),
        residual,
        consistent,
    })
}

/// Kernel vectors of `[v] ⊕ B H^2` at the nodes, with `v` the normalized
/// Szegő kernel at the first zero of `B`, in coordinates `(v, B k_{z_1}, ..., B k_{z_n})`.
fn constrained_kernel_vectors(problem: &InterpolationProblem) -> (CMatrix, CMatrix) {
    let b = problem.blaschke();
    let nodes = problem.nodes();
    let n = nodes.len();
    let alpha = b.zeros()[0].alpha;
    let norm = (1.0 - alpha.norm_sqr()).sqrt().recip();
    let v = |z: Complex64| szego(z, alpha) / norm;
    let mut kernels = CMatrix::zeros(n + 1, n);
    for (j, &z) in nodes.iter().enumerate() {
        kernels[(0, j)] = v(z).conj();
        kernels[(j + 1, j)] = b.value(z).conj();
    }
    let mut gram = CMatrix::zeros(n + 1, n + 1);
    gram[(0, 0)] = ONE;
    for a in 0..n {
        for c in 0..n {
            // <B k_{z_c}, B k_{z_a}> = k_{z_c}(z_a)
            gram[(a + 1, c + 1)] = szego(nodes[a], nodes[c]);
        }
    }
    (kernels, gram)
}

/// Checks that targets at the zero nodes agree (they must, since every
/// element of `H∞_B` is constant on the zeros of `B`).
fn check_zero_node_targets(problem: &InterpolationProblem, blocks: &[CMatrix]) -> Result<()> {
    if problem.r() < 2 {
        return Ok(());
    }
    let (kernels, gram) = constrained_kernel_vectors(problem);
    for j in 1..problem.r() {
        let pair = CMatrix::from_columns(&[kernels.column(0), kernels.column(j)]);
        match dependence_check(&pair, &[blocks[0].clone(), blocks[j].clone()], &gram)? {
            DependenceVerdict::Dependent { consistent: false, .. } => {
                return Err(Error::InfeasibleByStructure(format!(
                    "targets at zeros {} and {} of B differ",
                    problem.nodes()[0],
                    problem.nodes()[j]
                )));
            }
            DependenceVerdict::Dependent { .. } => {}
            DependenceVerdict::NotDependent { residual } => {
                return Err(Error::Internal(format!(
                    "kernels at two zeros of B are independent (residual {residual})"
                )));
            }
        }
    }
    Ok(())
}

#[derive(Debug, Clone)]
pub struct Interpolant {
    pub function: ConstrainedFunction,
    pub separation: f64,
    /// `max_j |h(z_j) - w_j|`.
    pub residual: f64,
}

#[derive(Debug, Clone)]
pub struct MatrixInterpolant {
    pub function: MatrixFunction,
    pub separation: f64,
    pub residual: f64,
}

fn build_idempotents(problem: &InterpolationProblem, seed: u64) -> Result<(Vec<ConstrainedFunction>, f64)> {
    let sep = separating_function(problem, seed)?;
    Ok((idempotents(problem, &sep.g)?, sep.separation))
}

/// Some `h in H∞_B` with `h(z_j) = w_j` (no norm control).
pub fn construct_interpolant(problem: &InterpolationProblem, seed: u64) -> Result<Interpolant> {
    let targets = match problem.targets() {
        Targets::Scalar(t) => t.clone(),
        Targets::Matrix(_) => {
            return Err(Error::InvalidParameter(
                "matrix targets: use construct_matrix_interpolant".into(),
            ))
        }
    };
    check_zero_node_targets(problem, &problem.targets().as_blocks())?;
    let (es, separation) = build_idempotents(problem, seed)?;
    let reps = representative_nodes(problem);
    let mut h = ConstrainedFunction::constant(problem.blaschke(), ZERO);
    for (e, &i) in es.iter().zip(&reps) {
        h = h.add(&e.scale(targets[i]));
    }
    let residual = problem
        .nodes()
        .iter()
        .zip(&targets)
        .map(|(&z, &w)| (h.eval(z) - w).norm())
        .fold(0.0, f64::max);
    Ok(Interpolant {
        function: h,
        separation,
        residual,
    })
}

/// Entrywise interpolant for `k x k` targets.
pub fn construct_matrix_interpolant(problem: &InterpolationProblem, seed: u64) -> Result<MatrixInterpolant> {
    let blocks = problem.targets().as_blocks();
    check_zero_node_targets(problem, &blocks)?;
    let (es, separation) = build_idempotents(problem, seed)?;
    let reps = representative_nodes(problem);
    let k = problem.block_size();
    let b = problem.blaschke();
    let mut entries = vec![vec![ConstrainedFunction::constant(b, ZERO); k]; k];
    for (row_idx, row) in entries.iter_mut().enumerate() {
        for (col_idx, entry) in row.iter_mut().enumerate() {
            for (e, &i) in es.iter().zip(&reps) {
                *entry = entry.add(&e.scale(blocks[i][(row_idx, col_idx)]));
            }
        }
    }
    let function = MatrixFunction { entries };
    let residual = problem
        .nodes()
        .iter()
        .zip(&blocks)
        .map(|(&z, w)| (function.eval(z) - w).norm())
        .fold(0.0, f64::max);
    Ok(MatrixInterpolant {
        function,
        separation,
        residual,
    })
}
