//! The C*-algebra generated by the compressed quotient `ρ(H∞_B / I)`.
//!
//! `ρ` is linear and multiplicative, and the quotient is spanned by the
//! idempotents `e_0` (value 1 at the zeros of `B`, 0 at the free nodes) and
//! `e_j` (1 at the `j`-th free node only), so `C*(ρ(·))` is generated by their
//! images. Its dimension is `d^2` exactly when it is all of `M_d`, which in turn
//! happens exactly when its commutant is the scalars.

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::linalg::{column_space, kron, null_space, singular_values, CMatrix, CVector};
use crate::problem::InterpolationProblem;
use crate::quotient::{build_compression, rho, CompressionRep, QuotientElement};

/// New directions with residual below this (after normalization) are dropped.
pub const SPAN_TOL: f64 = 1e-9;
/// Relative singular-value threshold for the commutant nullspace.
pub const NULL_TOL: f64 = 1e-9;

#[derive(Debug, Clone)]
pub struct MatrixAlgebraBasis {
    pub d: usize,
    /// Orthonormal for `<A, B> = tr(A^* B)`.
    pub basis: Vec<CMatrix>,
    /// Singular values of the last saturation round, for rank diagnostics.
    pub singular_values: Vec<f64>,
}

impl MatrixAlgebraBasis {
    pub fn dim(&self) -> usize {
        self.basis.len()
    }
}

#[derive(Debug, Clone)]
pub struct CommutantReport {
    pub dim: usize,
    pub basis: Vec<CMatrix>,
    pub singular_values: Vec<f64>,
    pub warnings: Vec<String>,
}

#[derive(Debug, Clone)]
pub struct EnvelopeReport {
    pub m: usize,
    pub free_count: usize,
    /// `m + n - r`.
    pub d: usize,
    pub algebra_dim: usize,
    pub commutant_dim: usize,
    /// `algebra_dim == d^2`.
    pub is_full: bool,
    /// `m <= n - r`.
    pub predicted_full: bool,
    pub agreement: bool,
    pub warnings: Vec<String>,
}

/// `ρ(e_0), ρ(e_1), ..., ρ(e_{n-r})`.
pub fn generators(comp: &CompressionRep) -> Result<Vec<CMatrix>> {
    let free = comp.free_count();
    let zero = Complex64::new(0.0, 0.0);
    let one = Complex64::new(1.0, 0.0);
    let mut out = vec![rho(&QuotientElement::scalar(one, &vec![zero; free]), comp)?];
    for j in 0..free {
        let mut vals = vec![zero; free];
        vals[j] = one;
        out.push(rho(&QuotientElement::scalar(zero, &vals), comp)?);
    }
    Ok(out)
}

fn vec_of(m: &CMatrix) -> CVector {
    CVector::from_column_slice(m.as_slice())
}

fn unvec(v: &[Complex64], d: usize) -> CMatrix {
    CMatrix::from_column_slice(d, d, v)
}

/// Orthonormal basis (columns) of the span of `mats`, with the singular values
/// of the stacked matrix.
fn span_basis(mats: &[CMatrix], d: usize) -> (CMatrix, Vec<f64>) {
    let mut stacked = CMatrix::zeros(d * d, mats.len());
    for (j, m) in mats.iter().enumerate() {
        stacked.set_column(j, &vec_of(m));
    }
    let sv = singular_values(&stacked);
    (column_space(&stacked, SPAN_TOL), sv)
}

/// Smallest unital *-closed algebra containing `gens`.
///
/// Each round takes the current span, adds all pairwise products and
/// adjoints, and re-orthonormalizes through an SVD with relative rank
/// threshold `SPAN_TOL`, until the dimension stops growing.
pub fn star_algebra_closure(gens: &[CMatrix]) -> Result<MatrixAlgebraBasis> {
    let d = gens.first().map_or(0, |g| g.nrows());
    if d == 0 || gens.iter().any(|g| g.shape() != (d, d)) {
        return Err(Error::InvalidParameter(
            "generators must be nonempty square matrices of one size".into(),
        ));
    }
    let mut current: Vec<CMatrix> = vec![CMatrix::identity(d, d)];
    for g in gens {
        let norm = g.norm();
        if norm > 0.0 {
            let g = g / Complex64::new(norm, 0.0);
            current.push(g.adjoint());
            current.push(g);
        }
    }
    let (mut basis, _) = span_basis(&current, d);
    let mut singular_values;
    loop {
        let elems: Vec<CMatrix> = (0..basis.ncols())
            .map(|j| unvec(basis.column(j).as_slice(), d))
            .collect();
        let mut cands = elems.clone();
        for a in &elems {
            cands.push(a.adjoint());
            for b in &elems {
                cands.push(a * b);
            }
        }
        let (next, sv) = span_basis(&cands, d);
        singular_values = sv;
        if next.ncols() < basis.ncols() {
            return Err(Error::RankTolerance(format!(
                "span dimension dropped from {} to {}; singular values {:?}",
                basis.ncols(),
                next.ncols(),
                singular_values
            )));
        }
        let grown = next.ncols() > basis.ncols();
        basis = next;
        if !grown || basis.ncols() == d * d {
            break;
        }
    }
    let basis = (0..basis.ncols())
        .map(|j| unvec(basis.column(j).as_slice(), d))
        .collect();
    Ok(MatrixAlgebraBasis {
        d,
        basis,
        singular_values,
    })
}

/// `{X : XG = GX for all G in the algebra}`.
pub fn commutant(algebra: &MatrixAlgebraBasis) -> Result<CommutantReport> {
    let d = algebra.d;
    let dd = d * d;
    let eye = CMatrix::identity(d, d);
    let mut stacked = CMatrix::zeros(algebra.basis.len() * dd, dd);
    for (i, g) in algebra.basis.iter().enumerate() {
        // column-major vec: vec(XG) = (G^T ⊗ I) vec X, vec(GX) = (I ⊗ G) vec X
        let block = kron(&g.transpose(), &eye) - kron(&eye, g);
        stacked.view_mut((i * dd, 0), (dd, dd)).copy_from(&block);
    }
    let (null, singular_values) = null_space(&stacked, NULL_TOL);
    let smax = singular_values.iter().copied().fold(0.0, f64::max).max(f64::MIN_POSITIVE);
    let mut warnings = Vec::new();
    for s in &singular_values {
        let rel = s / smax;
        if (1e-11..=1e-7).contains(&rel) {
            warnings.push(format!("borderline singular value {rel:e} in commutant system"));
        }
    }
    let basis = (0..null.ncols())
        .map(|j| unvec(null.column(j).as_slice(), d))
        .collect();
    Ok(CommutantReport {
        dim: null.ncols(),
        basis,
        singular_values,
        warnings,
    })
}

/// Generated algebra, commutant and the `m <= n - r` prediction, computed
/// independently and compared.
pub fn envelope_report(problem: &InterpolationProblem) -> Result<EnvelopeReport> {
    let comp = build_compression(problem)?;
    let gens = generators(&comp)?;
    let algebra = star_algebra_closure(&gens)?;
    let comm = commutant(&algebra)?;
    let d = comp.dim();
    let is_full = algebra.dim() == d * d;
    let trivial_commutant = comm.dim == 1;
    let prediction = comp.m <= comp.free_count();
    let mut warnings = comp.gram.warnings.clone();
    warnings.extend(comm.warnings);
    let agreement = is_full == prediction && trivial_commutant == is_full;
    if !agreement {
        return Err(Error::Internal(format!(
            "envelope computation disagrees: algebra_dim={} (d^2={}), commutant_dim={}, m={}, n-r={}",
            algebra.dim(),
            d * d,
            comm.dim,
            comp.m,
            comp.free_count()
        )));
    }
    Ok(EnvelopeReport {
        m: comp.m,
        free_count: comp.free_count(),
        d,
        algebra_dim: algebra.dim(),
        commutant_dim: comm.dim,
        is_full,
        predicted_full: prediction,
        agreement,
        warnings,
    })
}
