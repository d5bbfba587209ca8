//! Invariant subspaces of `H∞_B` acting on `H^2`, for `B = z^N`.
//!
//! Every such subspace has the form `ψ (V ⊕ z^N H^2)` with `ψ` inner and `V` a
//! space of polynomials of degree `< N`. The canonical form pulls the common
//! inner factor of `V ⊕ z^N H^2` out into `φ = ψ θ`, leaving a `W` with
//! `gcd(W, z^N) = 1`. Meets and joins are computed on polynomial coefficients
//! modulo `z^D`, which is exact because both subspaces contain `z^c H^2` for some
//! `c <= D`.

use num_complex::Complex64;

use crate::blaschke::BlaschkeProduct;
use crate::error::{Error, Result};
use crate::linalg::{column_space, eigenvalues, svd, CMatrix};

/// Roots closer than this are merged when extracting inner divisors.
pub const ROOT_CLUSTER_TOL: f64 = 1e-8;
/// Roots with modulus below `1 - DISK_MARGIN` count as inside the disk.
pub const DISK_MARGIN: f64 = 1e-6;
const COEFF_TOL: f64 = 1e-12;
const RANK_TOL: f64 = 1e-10;

#[derive(Debug, Clone, PartialEq)]
pub struct InvariantSubspace {
    pub psi: BlaschkeProduct,
    /// Coefficients (ascending) of polynomials spanning `V`, each of degree `< N`.
    pub v_basis: Vec<Vec<Complex64>>,
    pub n: u32,
}

#[derive(Debug, Clone, PartialEq)]
pub struct CanonicalForm {
    pub phi: BlaschkeProduct,
    /// `θ = gcd(V ⊕ z^N H^2)`.
    pub theta: BlaschkeProduct,
    pub w_basis: Vec<Vec<Complex64>>,
}

#[derive(Debug, Clone)]
pub struct MeetReport {
    pub subspace: InvariantSubspace,
    pub canonical: CanonicalForm,
    pub lower: BlaschkeProduct,
    pub upper: BlaschkeProduct,
    /// `lcm(φ_M, φ_N) <= φ_X <= z^N lcm(φ_M, φ_N)`.
    pub bounds_hold: bool,
}

#[derive(Debug, Clone)]
pub struct JoinReport {
    pub subspace: InvariantSubspace,
    pub canonical: CanonicalForm,
    pub expected: BlaschkeProduct,
    /// `φ_Y = gcd(φ_M, φ_N)`.
    pub law_holds: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ConsistencyVerdict {
    pub equal_subspaces: bool,
    pub same_inner: bool,
    pub same_polynomial_part: bool,
    /// `ψ = φ` iff `V = W`, evaluated on this instance.
    pub biconditional_holds: bool,
}

/// Order of vanishing at 0 (`None` for the zero polynomial).
fn order_at_zero(p: &[Complex64]) -> Option<usize> {
    let scale = p.iter().map(|c| c.norm()).fold(0.0, f64::max);
    if scale == 0.0 {
        return None;
    }
    p.iter().position(|c| c.norm() > COEFF_TOL * scale)
}

fn trim(p: &[Complex64]) -> Vec<Complex64> {
    let scale = p.iter().map(|c| c.norm()).fold(0.0, f64::max);
    let mut out = p.to_vec();
    while out.len() > 1 && out.last().is_some_and(|c| c.norm() <= COEFF_TOL * scale) {
        out.pop();
    }
    out
}

/// Roots of a polynomial via the eigenvalues of its companion matrix.
fn roots(p: &[Complex64]) -> Result<Vec<Complex64>> {
    let p = trim(p);
    let deg = p.len() - 1;
    if deg == 0 {
        return Ok(Vec::new());
    }
    let lead = p[deg];
    let mut comp = CMatrix::zeros(deg, deg);
    for i in 1..deg {
        comp[(i, i - 1)] = Complex64::new(1.0, 0.0);
    }
    for i in 0..deg {
        comp[(i, deg - 1)] = -p[i] / lead;
    }
    eigenvalues(&comp).ok_or_else(|| Error::Internal("companion eigenvalues did not converge".into()))
}

/// Inner factor of a polynomial: its zeros in `|z| < 1 - DISK_MARGIN`, with
/// exact zeros at the origin counted from the coefficients and the remaining
/// roots clustered within `ROOT_CLUSTER_TOL`.
pub fn polynomial_inner_divisor(p: &[Complex64]) -> Result<BlaschkeProduct> {
    let Some(order) = order_at_zero(p) else {
        return Err(Error::InvalidParameter("the zero polynomial has no inner divisor".into()));
    };
    let mut zeros: Vec<(Complex64, u32)> = Vec::new();
    if order > 0 {
        zeros.push((Complex64::new(0.0, 0.0), order as u32));
    }
    let mut clusters: Vec<(Complex64, u32)> = Vec::new();
    for r in roots(&p[order..])? {
        if r.norm() >= 1.0 - DISK_MARGIN {
            continue;
        }
        match clusters.iter_mut().find(|(c, _)| (c - r).norm() < ROOT_CLUSTER_TOL) {
            Some((c, m)) => {
                *c = (*c * *m as f64 + r) / (*m as f64 + 1.0);
                *m += 1;
            }
            None => clusters.push((r, 1)),
        }
    }
    zeros.extend(clusters);
    BlaschkeProduct::new(zeros)
}

impl InvariantSubspace {
    pub fn new(psi: BlaschkeProduct, v_basis: Vec<Vec<Complex64>>, n: u32) -> Result<Self> {
        if n == 0 {
            return Err(Error::InvalidParameter("exponent N must be positive".into()));
        }
        for (i, p) in v_basis.iter().enumerate() {
            if trim(p).len() > n as usize && order_at_zero(p).is_some() {
                return Err(Error::InvalidParameter(format!(
                    "basis polynomial {i} has degree >= N = {n}"
                )));
            }
        }
        let s = Self { psi, v_basis, n };
        let v = s.v_matrix();
        if column_space(&v, RANK_TOL).ncols() != s.v_basis.len() {
            return Err(Error::InvalidParameter("V basis is linearly dependent".into()));
        }
        Ok(s)
    }

    fn v_matrix(&self) -> CMatrix {
        let n = self.n as usize;
        CMatrix::from_fn(n, self.v_basis.len(), |i, j| {
            self.v_basis[j].get(i).copied().unwrap_or_default()
        })
    }
}

pub fn canonical_form(s: &InvariantSubspace) -> Result<CanonicalForm> {
    let n = s.n as usize;
    // θ = gcd(z^N, inner(v) for v in V); only zeros at the origin survive
    let mut theta = BlaschkeProduct::monomial(s.n);
    for p in &s.v_basis {
        theta = theta.gcd(&polynomial_inner_divisor(p)?)?;
    }
    if !theta.is_monomial() {
        return Err(Error::Internal(format!("gcd with z^N produced {theta}")));
    }
    let t = theta.degree();
    let mut w: Vec<Vec<Complex64>> = Vec::new();
    for p in &s.v_basis {
        // exact division by z^t
        if p.iter().take(t).any(|c| c.norm() > COEFF_TOL * p.iter().map(|c| c.norm()).fold(0.0, f64::max)) {
            return Err(Error::Internal("V element not divisible by its inner divisor".into()));
        }
        let mut q: Vec<Complex64> = p.iter().skip(t).copied().collect();
        q.resize(n, Complex64::new(0.0, 0.0));
        w.push(q);
    }
    for k in (n - t)..n {
        let mut q = vec![Complex64::new(0.0, 0.0); n];
        q[k] = Complex64::new(1.0, 0.0);
        w.push(q);
    }
    if !w.iter().any(|q| q[0].norm() > COEFF_TOL) {
        return Err(Error::Internal("W is not coprime to z^N".into()));
    }
    Ok(CanonicalForm {
        phi: s.psi.mul(&theta)?,
        theta,
        w_basis: w,
    })
}

fn monomial_exponent(b: &BlaschkeProduct) -> Result<usize> {
    if !b.is_monomial() {
        return Err(Error::Unsupported(format!(
            "coefficient-space lattice operations need a monomial inner factor, got {b}"
        )));
    }
    Ok(b.degree())
}

/// Orthonormal basis of `ψ (V ⊕ z^N H^2)` truncated to degree `< d`.
fn truncated(s: &InvariantSubspace, d: usize) -> Result<CMatrix> {
    let a = monomial_exponent(&s.psi)?;
    let n = s.n as usize;
    let tail = (a + n)..d;
    let cols = s.v_basis.len() + tail.len();
    let mut m = CMatrix::zeros(d, cols);
    for (j, p) in s.v_basis.iter().enumerate() {
        for (i, c) in p.iter().enumerate() {
            if a + i < d {
                m[(a + i, j)] = *c;
            }
        }
    }
    for (j, k) in tail.enumerate() {
        m[(k, s.v_basis.len() + j)] = Complex64::new(1.0, 0.0);
    }
    Ok(column_space(&m, RANK_TOL))
}

fn truncation_degree(a: &InvariantSubspace, b: &InvariantSubspace) -> Result<usize> {
    if a.n != b.n {
        return Err(Error::InvalidParameter(format!(
            "subspaces for different exponents {} and {}",
            a.n, b.n
        )));
    }
    let top = monomial_exponent(&a.psi)?.max(monomial_exponent(&b.psi)?);
    Ok(top + 2 * a.n as usize)
}

/// Reads `X = z^t (W ⊕ z^N H^2)` off a truncated basis that contains
/// `z^c ... z^{d-1}` for some `c`.
fn from_truncated(basis: &CMatrix, n: u32) -> Result<InvariantSubspace> {
    let d = basis.nrows();
    let n_us = n as usize;
    let t = (0..d)
        .find(|&i| basis.row(i).norm() > RANK_TOL)
        .ok_or_else(|| Error::Internal("empty subspace".into()))?;
    // the tail z^{t+N} .. z^{d-1} must lie in the subspace
    let proj = basis * basis.adjoint();
    for k in (t + n_us)..d {
        let mut e = CMatrix::zeros(d, 1);
        e[(k, 0)] = Complex64::new(1.0, 0.0);
        if (&proj * &e - &e).norm() > 1e-8 {
            return Err(Error::Internal(format!(
                "subspace does not contain z^{k}; decomposition inconsistent"
            )));
        }
    }
    // W = (X / z^t) mod z^N
    let mut shifted = CMatrix::zeros(n_us, basis.ncols());
    for j in 0..basis.ncols() {
        for i in 0..n_us.min(d - t) {
            shifted[(i, j)] = basis[(t + i, j)];
        }
    }
    let w = column_space(&shifted, RANK_TOL);
    let v_basis = (0..w.ncols())
        .map(|j| clean(w.column(j).iter().copied().collect()))
        .collect();
    InvariantSubspace::new(BlaschkeProduct::monomial(t as u32), v_basis, n)
}

/// Flushes rounding-level coefficients to zero.
fn clean(p: Vec<Complex64>) -> Vec<Complex64> {
    let scale = p.iter().map(|c| c.norm()).fold(0.0, f64::max);
    p.into_iter()
        .map(|c| if c.norm() <= RANK_TOL * scale { Complex64::new(0.0, 0.0) } else { c })
        .collect()
}

fn intersect(u1: &CMatrix, u2: &CMatrix) -> CMatrix {
    let d = u1.nrows();
    if u1.ncols() == 0 || u2.ncols() == 0 {
        return CMatrix::zeros(d, 0);
    }
    let (u, s, _) = svd(&(u1.adjoint() * u2));
    let keep: Vec<usize> = (0..s.len()).filter(|&i| s[i] >= 1.0 - RANK_TOL).collect();
    let mut out = CMatrix::zeros(d, keep.len());
    for (dst, &src) in keep.iter().enumerate() {
        out.set_column(dst, &(u1 * u.column(src)));
    }
    column_space(&out, RANK_TOL)
}

pub fn meet(a: &InvariantSubspace, b: &InvariantSubspace) -> Result<MeetReport> {
    let d = truncation_degree(a, b)?;
    let x = intersect(&truncated(a, d)?, &truncated(b, d)?);
    let subspace = from_truncated(&x, a.n)?;
    let canonical = canonical_form(&subspace)?;
    let lower = canonical_form(a)?.phi.lcm(&canonical_form(b)?.phi)?;
    let upper = BlaschkeProduct::monomial(a.n).mul(&lower)?;
    let bounds_hold = lower.divides(&canonical.phi)? && canonical.phi.divides(&upper)?;
    if !bounds_hold {
        return Err(Error::Internal(format!(
            "meet divisor {} violates {} <= phi <= {}",
            canonical.phi, lower, upper
        )));
    }
    Ok(MeetReport {
        subspace,
        canonical,
        lower,
        upper,
        bounds_hold,
    })
}

pub fn join(a: &InvariantSubspace, b: &InvariantSubspace) -> Result<JoinReport> {
    let d = truncation_degree(a, b)?;
    let ua = truncated(a, d)?;
    let ub = truncated(b, d)?;
    let mut both = CMatrix::zeros(d, ua.ncols() + ub.ncols());
    both.columns_mut(0, ua.ncols()).copy_from(&ua);
    both.columns_mut(ua.ncols(), ub.ncols()).copy_from(&ub);
    let y = column_space(&both, RANK_TOL);
    let subspace = from_truncated(&y, a.n)?;
    let canonical = canonical_form(&subspace)?;
    let expected = canonical_form(a)?.phi.gcd(&canonical_form(b)?.phi)?;
    let law_holds = canonical.phi.same_zeros(&expected)?;
    if !law_holds {
        return Err(Error::Internal(format!(
            "join divisor {} differs from gcd {}",
            canonical.phi, expected
        )));
    }
    Ok(JoinReport {
        subspace,
        canonical,
        expected,
        law_holds,
    })
}

fn same_span(a: &CMatrix, b: &CMatrix) -> bool {
    let ra = column_space(a, RANK_TOL).ncols();
    let rb = column_space(b, RANK_TOL).ncols();
    let mut both = CMatrix::zeros(a.nrows(), a.ncols() + b.ncols());
    both.columns_mut(0, a.ncols()).copy_from(a);
    both.columns_mut(a.ncols(), b.ncols()).copy_from(b);
    let rab = column_space(&both, RANK_TOL).ncols();
    ra == rb && ra == rab
}

/// Compares `ψ (V ⊕ z^N H^2)` with `φ (W ⊕ z^N H^2)`.
pub fn decomposition_consistency(
    psi: &BlaschkeProduct,
    v: &[Vec<Complex64>],
    phi: &BlaschkeProduct,
    w: &[Vec<Complex64>],
    n: u32,
) -> Result<ConsistencyVerdict> {
    let left = InvariantSubspace::new(psi.clone(), v.to_vec(), n)?;
    let right = InvariantSubspace::new(phi.clone(), w.to_vec(), n)?;
    let d = truncation_degree(&left, &right)?;
    let equal_subspaces = same_span(&truncated(&left, d)?, &truncated(&right, d)?);
    let same_inner = psi.same_zeros(phi)?;
    let same_polynomial_part = same_span(&left.v_matrix(), &right.v_matrix());
    Ok(ConsistencyVerdict {
        equal_subspaces,
        same_inner,
        same_polynomial_part,
        biconditional_holds: !equal_subspaces || same_inner == same_polynomial_part,
    })
}
