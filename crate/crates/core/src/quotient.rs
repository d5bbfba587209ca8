//! Exact norms in `H∞_B / I`, where `I` is the ideal of functions vanishing at
//! every node.
//!
//! For `r >= 1` the quotient acts on `K = H^2 ⊖ lcm(B, E) H^2`, spanned by
//! the derivative kernels at the zeros of `B` followed by the Szegő kernels of
//! the free nodes. On that basis `M_f^*` is diagonal with entries
//! `conj(λ)` (repeated `m` times) and `conj(f(z_j))`, so with the Grammian `Q`
//! the compression is `ρ(f) = Q^{-1/2} D_f Q^{1/2}` and the quotient norm is its
//! largest singular value.

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::jet::Analytic;
use crate::linalg::{kron, min_eigenvalue, spectral_norm, CMatrix};
use crate::modelspace::{grammian, model_space_labels, DerivativeKernelLabel, GrammianRep};
use crate::problem::InterpolationProblem;

/// A class `f + I`, determined by `f`'s common value at the zeros of `B` and
/// its values at the free nodes. Scalars are the `1 x 1` case.
#[derive(Debug, Clone, PartialEq)]
pub struct QuotientElement {
    pub common_value: CMatrix,
    pub free_values: Vec<CMatrix>,
}

impl QuotientElement {
    pub fn scalar(common_value: Complex64, free_values: &[Complex64]) -> Self {
        Self {
            common_value: CMatrix::from_element(1, 1, common_value),
            free_values: free_values
                .iter()
                .map(|&w| CMatrix::from_element(1, 1, w))
                .collect(),
        }
    }

    pub fn matrix(common_value: CMatrix, free_values: Vec<CMatrix>) -> Result<Self> {
        let k = common_value.nrows();
        if common_value.ncols() != k {
            return Err(Error::InvalidParameter("common value must be square".into()));
        }
        if let Some(bad) = free_values.iter().find(|w| w.shape() != (k, k)) {
            return Err(Error::DimensionMismatch {
                expected: k,
                got: bad.nrows().max(bad.ncols()),
            });
        }
        Ok(Self {
            common_value,
            free_values,
        })
    }

    /// The class of the constant `c`.
    pub fn constant(c: Complex64, free_count: usize) -> Self {
        Self::scalar(c, &vec![c; free_count])
    }

    /// Class of a scalar function of `H∞_B`; its value at the first zero of
    /// `B` is taken as the common value.
    pub fn from_function(problem: &InterpolationProblem, f: &impl Analytic) -> Self {
        let alpha = problem.blaschke().zeros()[0].alpha;
        let free: Vec<Complex64> = problem.free_nodes().iter().map(|&z| f.eval(z)).collect();
        Self::scalar(f.eval(alpha), &free)
    }

    pub fn block_size(&self) -> usize {
        self.common_value.nrows()
    }

    pub fn is_scalar(&self) -> bool {
        self.block_size() == 1
    }

    /// Entrywise product of the node data (the class of `f g`).
    pub fn mul(&self, other: &Self) -> Result<Self> {
        if self.free_values.len() != other.free_values.len() || self.block_size() != other.block_size() {
            return Err(Error::DimensionMismatch {
                expected: self.free_values.len(),
                got: other.free_values.len(),
            });
        }
        Ok(Self {
            common_value: &self.common_value * &other.common_value,
            free_values: self
                .free_values
                .iter()
                .zip(&other.free_values)
                .map(|(a, b)| a * b)
                .collect(),
        })
    }
}

/// The basis of `H^2 ⊖ lcm(B, E) H^2` and its Grammian.
#[derive(Debug, Clone)]
pub struct CompressionRep {
    pub gram: GrammianRep,
    /// Number of labels coming from the zeros of `B` (the degree `m`).
    pub m: usize,
    pub r: usize,
    pub n: usize,
}

impl CompressionRep {
    pub fn labels(&self) -> &[DerivativeKernelLabel] {
        &self.gram.labels
    }

    pub fn dim(&self) -> usize {
        self.gram.dim()
    }

    pub fn free_count(&self) -> usize {
        self.n - self.r
    }
}

pub fn build_compression(problem: &InterpolationProblem) -> Result<CompressionRep> {
    if problem.r() == 0 {
        return Err(Error::Unsupported(
            "exact quotient norms need at least one node at a zero of B; \
             use the feasibility sweep for this problem"
                .into(),
        ));
    }
    let b = problem.blaschke();
    let mut labels = model_space_labels(b);
    labels.extend(
        problem
            .free_nodes()
            .iter()
            .map(|&z| DerivativeKernelLabel::new(z, 0)),
    );
    let gram = grammian(&labels)?;
    let rep = CompressionRep {
        gram,
        m: problem.m(),
        r: problem.r(),
        n: problem.n(),
    };
    if rep.dim() != rep.m + rep.n - rep.r {
        return Err(Error::Internal(format!(
            "compression basis has {} elements, expected m + n - r = {}",
            rep.dim(),
            rep.m + rep.n - rep.r
        )));
    }
    Ok(rep)
}

/// `M_f^*` applied to the label `(w, i)`:
/// `sum_{j <= i} conj(f^(j)(w)) / j! * (w, i - j)`.
pub fn mfstar_on_label(
    f: &impl Analytic,
    label: &DerivativeKernelLabel,
) -> Vec<(DerivativeKernelLabel, Complex64)> {
    let i = label.order as usize;
    let jet = f.jet(label.w, i);
    (0..=i)
        .map(|j| {
            (
                DerivativeKernelLabel::new(label.w, (i - j) as u32),
                jet.coeffs()[j].conj(),
            )
        })
        .collect()
}

/// Matrix of `M_f^*` on the span of `labels`; column `b` holds the coordinates
/// of `M_f^* e_b`. Fails if the image leaves the span.
pub fn mfstar_matrix(f: &impl Analytic, labels: &[DerivativeKernelLabel]) -> Result<CMatrix> {
    let d = labels.len();
    let mut out = CMatrix::zeros(d, d);
    for (b, label) in labels.iter().enumerate() {
        for (image, coeff) in mfstar_on_label(f, label) {
            let a = labels.iter().position(|l| *l == image).ok_or_else(|| {
                Error::InvalidParameter(format!(
                    "label ({}, {}) is not in the basis",
                    image.w, image.order
                ))
            })?;
            out[(a, b)] += coeff;
        }
    }
    Ok(out)
}

/// Block diagonal `D_f`, node-major: `m` copies of the common value, then the
/// free values.
pub fn diagonal(elem: &QuotientElement, comp: &CompressionRep) -> Result<CMatrix> {
    if elem.free_values.len() != comp.free_count() {
        return Err(Error::DimensionMismatch {
            expected: comp.free_count(),
            got: elem.free_values.len(),
        });
    }
    let k = elem.block_size();
    let d = comp.dim();
    let mut out = CMatrix::zeros(d * k, d * k);
    for slot in 0..d {
        let block = if slot < comp.m {
            &elem.common_value
        } else {
            &elem.free_values[slot - comp.m]
        };
        out.view_mut((slot * k, slot * k), (k, k)).copy_from(block);
    }
    Ok(out)
}

fn lifted(q: &CMatrix, k: usize) -> CMatrix {
    if k == 1 {
        q.clone()
    } else {
        kron(q, &CMatrix::identity(k, k))
    }
}

/// `ρ(f) = Q^{-1/2} D_f Q^{1/2}` (with `Q ⊗ I_k` for `k x k` data).
pub fn rho(elem: &QuotientElement, comp: &CompressionRep) -> Result<CMatrix> {
    let k = elem.block_size();
    let d = diagonal(elem, comp)?;
    Ok(lifted(&comp.gram.q_invhalf, k) * d * lifted(&comp.gram.q_half, k))
}

/// `||f + I||`.
pub fn quotient_norm(elem: &QuotientElement, comp: &CompressionRep) -> Result<f64> {
    Ok(spectral_norm(&rho(elem, comp)?))
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ContractionReport {
    pub contraction: bool,
    /// `λ_min(Q - D_f Q D_f^*)`.
    pub margin: f64,
}

/// Contraction test `Q - D_f Q D_f^* >= 0`, thresholded at `-tau_psd`.
pub fn is_contraction(elem: &QuotientElement, comp: &CompressionRep, tau_psd: f64) -> Result<ContractionReport> {
    let k = elem.block_size();
    let d = diagonal(elem, comp)?;
    let q = lifted(&comp.gram.q, k);
    let margin = min_eigenvalue(&(&q - &d * &q * d.adjoint()));
    let contraction = margin >= -tau_psd;
    #[cfg(debug_assertions)]
    {
        let norm = quotient_norm(elem, comp)?;
        // the two criteria may only disagree inside the rounding band around 1
        let band = 1e-8 * comp.gram.condition_number();
        debug_assert!(
            contraction == (norm <= 1.0 + tau_psd) || (norm - 1.0).abs() < band.max(tau_psd),
            "contraction test ({margin}) disagrees with norm ({norm})"
        );
    }
    Ok(ContractionReport { contraction, margin })
}
