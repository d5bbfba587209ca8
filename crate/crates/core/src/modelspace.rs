//! Derivative-kernel bases for model spaces `H^2 ⊖ φH^2` of finite Blaschke
//! products.
//!
//! The label `(w, i)` stands for the function `z^i / (1 - conj(w) z)^(i+1)`,
//! which reproduces `i`-th Taylor coefficients at `w`:
//! `<f, z^i k_w^(i+1)> = f^(i)(w) / i!`. For `φ` with zeros `α_j` of
//! multiplicity `m_j`, the labels `(α_j, i)` with `i < m_j` span the model space.

use num_complex::Complex64;

use crate::blaschke::BlaschkeProduct;
use crate::error::{Error, Result};
use crate::jet::{factorial, Jet};
use crate::linalg::{hermitian_eigen, hermitian_function, CMatrix, CVector, ONE, ZERO};

/// Zeros farther out than this trigger a conditioning warning.
pub const CONDITIONING_RADIUS: f64 = 0.95;
/// Grammian eigenvalues below this mean the labels are numerically dependent.
pub const MIN_GRAM_EIGENVALUE: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DerivativeKernelLabel {
    pub w: Complex64,
    pub order: u32,
}

impl DerivativeKernelLabel {
    pub fn new(w: Complex64, order: u32) -> Self {
        Self { w, order }
    }

    pub fn eval(&self, z: Complex64) -> Complex64 {
        eval_label(self, z)
    }

    /// Taylor jet of the labelled function at `z`.
    pub fn jet(&self, z: Complex64, order: usize) -> Jet {
        let var = Jet::variable(z, order);
        let den = var.scale(-self.w.conj()).add_scalar(ONE);
        var.powi(self.order)
            .div(&den.powi(self.order + 1))
    }
}

/// The Szegő kernel `k_w(z) = 1/(1 - conj(w) z)`.
pub fn szego(z: Complex64, w: Complex64) -> Complex64 {
    (ONE - w.conj() * z).inv()
}

/// `z^i / (1 - conj(w) z)^(i+1)` for the label `(w, i)`.
pub fn eval_label(label: &DerivativeKernelLabel, z: Complex64) -> Complex64 {
    let k = szego(z, label.w);
    z.powu(label.order) * k.powu(label.order + 1)
}

/// `<e_a, e_b>` in `H^2`: the `b.order`-th Taylor coefficient of `e_a` at `b.w`,
/// written out with the Leibniz rule.
pub fn inner_product(a: &DerivativeKernelLabel, b: &DerivativeKernelLabel) -> Complex64 {
    let p = a.order as usize;
    let q = b.order as usize;
    let ub = a.w.conj();
    let w = b.w;
    let base = (ONE - ub * w).inv();
    let mut sum = ZERO;
    for i in 0..=p.min(q) {
        // i-th derivative of z^p at w
        let mono = factorial(p) / factorial(p - i) * w.powu((p - i) as u32);
        // (q-i)-th derivative of (1 - ub z)^{-(p+1)} at w
        let j = q - i;
        let rising: f64 = (1..=j).map(|t| (p + t) as f64).product();
        let kern = ub.powu(j as u32) * rising * base.powu((p + 1 + j) as u32);
        sum += mono * kern * binomial(q, i);
    }
    sum / factorial(q)
}

fn binomial(n: usize, k: usize) -> f64 {
    factorial(n) / (factorial(k) * factorial(n - k))
}

/// Labels spanning `H^2 ⊖ B H^2`: zeros in stored order, orders ascending.
pub fn model_space_labels(b: &BlaschkeProduct) -> Vec<DerivativeKernelLabel> {
    b.zeros()
        .iter()
        .flat_map(|z| (0..z.mult).map(move |i| DerivativeKernelLabel::new(z.alpha, i)))
        .collect()
}

/// Grammian of a label list together with its Hermitian square roots.
///
/// Entry `(a, b)` is `<e_b, e_a>`, so `c* Q c = ||sum c_j e_j||^2` and the
/// kernel-only block is the Pick matrix `[1/(1 - z_a conj(z_b))]`.
#[derive(Debug, Clone)]
pub struct GrammianRep {
    pub labels: Vec<DerivativeKernelLabel>,
    pub q: CMatrix,
    pub q_half: CMatrix,
    pub q_invhalf: CMatrix,
    pub eigenvalues: Vec<f64>,
    pub warnings: Vec<String>,
}

impl GrammianRep {
    pub fn dim(&self) -> usize {
        self.labels.len()
    }

    pub fn condition_number(&self) -> f64 {
        self.eigenvalues.last().copied().unwrap_or(1.0) / self.eigenvalues[0]
    }
}

pub fn gram_matrix(labels: &[DerivativeKernelLabel]) -> CMatrix {
    let n = labels.len();
    CMatrix::from_fn(n, n, |a, b| inner_product(&labels[b], &labels[a]))
}

pub fn grammian(labels: &[DerivativeKernelLabel]) -> Result<GrammianRep> {
    for (i, a) in labels.iter().enumerate() {
        if a.w.norm() >= 1.0 {
            return Err(Error::InvalidParameter(format!(
                "label point {} is not in the open unit disk",
                a.w
            )));
        }
        if labels[..i].iter().any(|b| b == a) {
            return Err(Error::InvalidParameter(format!(
                "duplicate label ({}, {})",
                a.w, a.order
            )));
        }
    }
    let mut warnings = Vec::new();
    if let Some(far) = labels.iter().find(|l| l.w.norm() > CONDITIONING_RADIUS) {
        warnings.push(format!(
            "point {} lies beyond radius {CONDITIONING_RADIUS}; Grammian may be ill-conditioned",
            far.w
        ));
    }
    let q = gram_matrix(labels);
    let (eigenvalues, vectors) = hermitian_eigen(&q);
    let min = eigenvalues.first().copied().unwrap_or(1.0);
    if min < MIN_GRAM_EIGENVALUE {
        return Err(Error::NearDependentBasis { min_eigenvalue: min });
    }
    let q_half = hermitian_function(&eigenvalues, &vectors, f64::sqrt);
    let q_invhalf = hermitian_function(&eigenvalues, &vectors, |x| 1.0 / x.sqrt());
    Ok(GrammianRep {
        labels: labels.to_vec(),
        q,
        q_half,
        q_invhalf,
        eigenvalues,
        warnings,
    })
}

/// A vector of `H^2 ⊖ B H^2` in derivative-kernel coordinates.
#[derive(Debug, Clone, PartialEq)]
pub struct ModelVector {
    pub labels: Vec<DerivativeKernelLabel>,
    pub coeffs: CVector,
}

impl ModelVector {
    pub fn new(labels: Vec<DerivativeKernelLabel>, coeffs: CVector) -> Result<Self> {
        if labels.len() != coeffs.len() {
            return Err(Error::DimensionMismatch {
                expected: labels.len(),
                got: coeffs.len(),
            });
        }
        Ok(Self { labels, coeffs })
    }

    pub fn eval(&self, z: Complex64) -> Complex64 {
        self.labels
            .iter()
            .zip(self.coeffs.iter())
            .map(|(l, c)| c * eval_label(l, z))
            .sum()
    }

    pub fn norm_sqr(&self) -> f64 {
        let q = gram_matrix(&self.labels);
        (self.coeffs.adjoint() * q * &self.coeffs)[(0, 0)].re
    }

    pub fn normalized(&self) -> Self {
        let n = self.norm_sqr().sqrt();
        Self {
            labels: self.labels.clone(),
            coeffs: self.coeffs.unscale(n),
        }
    }

    /// Rotates so the first coordinate with modulus above `1e-12` is real and
    /// nonnegative.
    pub fn phase_fixed(&self) -> Self {
        let mut out = self.clone();
        if let Some(c) = self.coeffs.iter().find(|c| c.norm() > 1e-12) {
            let rot = c.conj() / c.norm();
            out.coeffs *= rot;
        }
        out
    }
}

/// `K^v(z, w) = v(z) conj(v(w)) + B(z) conj(B(w)) / (1 - z conj(w))`, the
/// reproducing kernel of `[v] ⊕ B H^2`.
pub fn constrained_kernel(
    b: &BlaschkeProduct,
    v: &ModelVector,
    z: Complex64,
    w: Complex64,
) -> Result<Complex64> {
    let n = v.norm_sqr();
    if (n - 1.0).abs() > 1e-12 {
        return Err(Error::InvalidParameter(format!(
            "kernel vector is not a unit vector (norm^2 = {n})"
        )));
    }
    Ok(v.eval(z) * v.eval(w).conj() + b.value(z) * b.value(w).conj() * szego(z, w))
}
