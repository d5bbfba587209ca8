//! Serializable report pieces. Struct field order is the key order.

use nevpick_core::ideal::ConstrainedFunction;
use nevpick_core::linalg::CMatrix;
use nevpick_core::{BlaschkeProduct, ModelVector};
use num_complex::Complex64;
use serde::Serialize;

#[derive(Debug, Clone, Copy, Serialize)]
pub struct Cx {
    pub re: f64,
    pub im: f64,
}

impl From<Complex64> for Cx {
    fn from(z: Complex64) -> Self {
        Self { re: z.re, im: z.im }
    }
}

pub fn cx_vec(v: impl IntoIterator<Item = Complex64>) -> Vec<Cx> {
    v.into_iter().map(Cx::from).collect()
}

pub fn matrix(m: &CMatrix) -> Vec<Vec<Cx>> {
    (0..m.nrows())
        .map(|i| (0..m.ncols()).map(|j| m[(i, j)].into()).collect())
        .collect()
}

#[derive(Debug, Clone, Serialize)]
pub struct ZeroOut {
    pub re: f64,
    pub im: f64,
    pub mult: u32,
}

pub fn zeros(b: &BlaschkeProduct) -> Vec<ZeroOut> {
    b.zeros()
        .iter()
        .map(|z| ZeroOut {
            re: z.alpha.re,
            im: z.alpha.im,
            mult: z.mult,
        })
        .collect()
}

#[derive(Debug, Clone, Serialize)]
pub struct LabelOut {
    pub w: Cx,
    pub order: u32,
}

#[derive(Debug, Clone, Serialize)]
pub struct VectorOut {
    pub labels: Vec<LabelOut>,
    pub coeffs: Vec<Cx>,
}

impl From<&ModelVector> for VectorOut {
    fn from(v: &ModelVector) -> Self {
        Self {
            labels: v
                .labels
                .iter()
                .map(|l| LabelOut {
                    w: l.w.into(),
                    order: l.order,
                })
                .collect(),
            coeffs: cx_vec(v.coeffs.iter().copied()),
        }
    }
}

/// `λ + B Σ_k Σ_j h[k][j] z^j B^k`.
#[derive(Debug, Clone, Serialize)]
pub struct FunctionOut {
    pub lambda: Cx,
    pub h: Vec<Vec<Cx>>,
    pub degree_in_b: usize,
    pub degree_in_z: usize,
}

impl From<&ConstrainedFunction> for FunctionOut {
    fn from(f: &ConstrainedFunction) -> Self {
        let (kb, kz) = f.degrees();
        Self {
            lambda: f.lambda.into(),
            h: f.h.iter().map(|row| cx_vec(row.iter().copied())).collect(),
            degree_in_b: kb,
            degree_in_z: kz,
        }
    }
}

pub fn to_json(report: &impl Serialize) -> String {
    serde_json::to_string_pretty(report).expect("reports serialize") + "\n"
}
