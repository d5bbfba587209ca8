//! Truncated Taylor arithmetic.
//!
//! A [`Jet`] of order `K` at a base point `z0` holds the Taylor coefficients
//! `c_0, ..., c_K` of `f(z0 + t) = sum c_k t^k`, so that `f^{(k)}(z0) = k! c_k`.
//! Sums, products and quotients of jets are exact up to rounding, which gives
//! derivatives of rational functions without symbolic differentiation.

use std::ops::{Add, Mul, Neg, Sub};

use num_complex::Complex64;

#[derive(Debug, Clone, PartialEq)]
pub struct Jet {
    coeffs: Vec<Complex64>,
}

impl Jet {
    pub fn constant(value: Complex64, order: usize) -> Self {
        let mut coeffs = vec![Complex64::new(0.0, 0.0); order + 1];
        coeffs[0] = value;
        Self { coeffs }
    }

    /// The identity function `z` expanded at `z0`.
    pub fn variable(z0: Complex64, order: usize) -> Self {
        let mut jet = Self::constant(z0, order);
        if order >= 1 {
            jet.coeffs[1] = Complex64::new(1.0, 0.0);
        }
        jet
    }

    pub fn from_coeffs(coeffs: Vec<Complex64>) -> Self {
        assert!(!coeffs.is_empty(), "jet needs at least one coefficient");
        Self { coeffs }
    }

    pub fn order(&self) -> usize {
        self.coeffs.len() - 1
    }

    pub fn coeffs(&self) -> &[Complex64] {
        &self.coeffs
    }

    pub fn value(&self) -> Complex64 {
        self.coeffs[0]
    }

    /// `f^{(k)}(z0)`.
    pub fn derivative(&self, k: usize) -> Complex64 {
        self.coeffs[k] * factorial(k)
    }

    pub fn scale(&self, s: Complex64) -> Self {
        Self {
            coeffs: self.coeffs.iter().map(|c| c * s).collect(),
        }
    }

    pub fn add_scalar(&self, s: Complex64) -> Self {
        let mut out = self.clone();
        out.coeffs[0] += s;
        out
    }

    pub fn recip(&self) -> Self {
        let a0 = self.coeffs[0];
        assert!(a0.norm() > 0.0, "reciprocal of a jet vanishing at its base point");
        let n = self.coeffs.len();
        let mut out = vec![Complex64::new(0.0, 0.0); n];
        out[0] = a0.inv();
        for k in 1..n {
            let mut s = Complex64::new(0.0, 0.0);
            for j in 1..=k {
                s += self.coeffs[j] * out[k - j];
            }
            out[k] = -s * out[0];
        }
        Self { coeffs: out }
    }

    pub fn div(&self, other: &Jet) -> Self {
        self * &other.recip()
    }

    pub fn powi(&self, exp: u32) -> Self {
        let mut acc = Jet::constant(Complex64::new(1.0, 0.0), self.order());
        for _ in 0..exp {
            acc = &acc * self;
        }
        acc
    }
}

/// Functions analytic on a neighbourhood of the closed disk, described by
/// their local Taylor data.
pub trait Analytic {
    fn jet(&self, z: Complex64, order: usize) -> Jet;

    fn eval(&self, z: Complex64) -> Complex64 {
        self.jet(z, 0).value()
    }
}

/// Polynomial with coefficients in ascending degree.
#[derive(Debug, Clone, PartialEq)]
pub struct Polynomial(pub Vec<Complex64>);

impl Analytic for Polynomial {
    fn jet(&self, z: Complex64, order: usize) -> Jet {
        let var = Jet::variable(z, order);
        let mut acc = Jet::constant(Complex64::new(0.0, 0.0), order);
        for c in self.0.iter().rev() {
            acc = (&acc * &var).add_scalar(*c);
        }
        acc
    }
}

pub(crate) fn factorial(k: usize) -> f64 {
    (1..=k).fold(1.0, |acc, j| acc * j as f64)
}

impl Add for &Jet {
    type Output = Jet;
    fn add(self, rhs: &Jet) -> Jet {
        assert_eq!(self.coeffs.len(), rhs.coeffs.len());
        Jet {
            coeffs: self
                .coeffs
                .iter()
                .zip(&rhs.coeffs)
                .map(|(a, b)| a + b)
                .collect(),
        }
    }
}

impl Sub for &Jet {
    type Output = Jet;
    fn sub(self, rhs: &Jet) -> Jet {
        assert_eq!(self.coeffs.len(), rhs.coeffs.len());
        Jet {
            coeffs: self
                .coeffs
                .iter()
                .zip(&rhs.coeffs)
                .map(|(a, b)| a - b)
                .collect(),
        }
    }
}

impl Neg for &Jet {
    type Output = Jet;
    fn neg(self) -> Jet {
        Jet {
            coeffs: self.coeffs.iter().map(|c| -c).collect(),
        }
    }
}

impl Mul for &Jet {
    type Output = Jet;
    fn mul(self, rhs: &Jet) -> Jet {
        assert_eq!(self.coeffs.len(), rhs.coeffs.len());
        let n = self.coeffs.len();
        let mut out = vec![Complex64::new(0.0, 0.0); n];
        for (i, a) in self.coeffs.iter().enumerate() {
            if *a == Complex64::new(0.0, 0.0) {
                continue;
            }
            for (j, b) in rhs.coeffs[..n - i].iter().enumerate() {
                out[i + j] += a * b;
            }
        }
        Jet { coeffs: out }
    }
}
