//! Finite Blaschke products and their divisor lattice.
//!
//! A product is stored as a multiset of zeros in the open unit disk. Each
//! factor carries the normalizing constant `|a|/a`, so `B(0) > 0` whenever
//! `0` is not a zero. Inner functions are identified up to unimodular
//! constants, so the lattice operations only look at zero multisets.

use std::fmt;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::jet::{Analytic, Jet};

/// Zeros closer than this (but not identical) are reported as ambiguous.
pub const ZERO_MATCH_TOL: f64 = 1e-9;

const ONE: Complex64 = Complex64::new(1.0, 0.0);

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Zero {
    pub alpha: Complex64,
    pub mult: u32,
}

#[derive(Debug, Clone, PartialEq)]
pub struct BlaschkeProduct {
    zeros: Vec<Zero>,
}

/// The disk automorphism `(a - z)/(1 - conj(a) z)`, and `z` itself for `a = 0`.
pub fn mobius(a: Complex64, z: Complex64) -> Result<Complex64> {
    if a.norm() >= 1.0 {
        return Err(Error::InvalidParameter(format!(
            "Mobius parameter {a} is not in the open unit disk"
        )));
    }
    if a == Complex64::new(0.0, 0.0) {
        return Ok(z);
    }
    Ok((a - z) / (ONE - a.conj() * z))
}

enum Match {
    Same,
    Distinct,
}

fn match_zeros(a: Complex64, b: Complex64) -> Result<Match> {
    if a == b {
        return Ok(Match::Same);
    }
    let distance = (a - b).norm();
    if distance < ZERO_MATCH_TOL {
        return Err(Error::AmbiguousMatch {
            a: a.to_string(),
            b: b.to_string(),
            distance,
            tolerance: ZERO_MATCH_TOL,
        });
    }
    Ok(Match::Distinct)
}

impl BlaschkeProduct {
    /// Builds a product from `(zero, multiplicity)` pairs. Exactly repeated
    /// zeros are merged; nearly repeated zeros are rejected.
    pub fn new(zeros: impl IntoIterator<Item = (Complex64, u32)>) -> Result<Self> {
        let mut out = Self { zeros: Vec::new() };
        for (alpha, mult) in zeros {
            if !(alpha.re.is_finite() && alpha.im.is_finite()) || alpha.norm() >= 1.0 {
                return Err(Error::InvalidParameter(format!(
                    "zero {alpha} is not in the open unit disk"
                )));
            }
            if mult == 0 {
                return Err(Error::InvalidParameter(format!(
                    "zero {alpha} has multiplicity 0"
                )));
            }
            out.push_zero(alpha, mult)?;
        }
        Ok(out)
    }

    /// The constant function 1.
    pub fn one() -> Self {
        Self { zeros: Vec::new() }
    }

    /// `z^n`.
    pub fn monomial(n: u32) -> Self {
        if n == 0 {
            return Self::one();
        }
        Self {
            zeros: vec![Zero {
                alpha: Complex64::new(0.0, 0.0),
                mult: n,
            }],
        }
    }

    /// Product with a simple zero at each point.
    pub fn from_points(points: &[Complex64]) -> Result<Self> {
        Self::new(points.iter().map(|&p| (p, 1)))
    }

    fn push_zero(&mut self, alpha: Complex64, mult: u32) -> Result<()> {
        for z in self.zeros.iter_mut() {
            if let Match::Same = match_zeros(z.alpha, alpha)? {
                z.mult += mult;
                return Ok(());
            }
        }
        self.zeros.push(Zero { alpha, mult });
        Ok(())
    }

    pub fn zeros(&self) -> &[Zero] {
        &self.zeros
    }

    pub fn degree(&self) -> usize {
        self.zeros.iter().map(|z| z.mult as usize).sum()
    }

    pub fn is_one(&self) -> bool {
        self.zeros.is_empty()
    }

    /// Multiplicity of `point` as a zero (0 when it is not a zero).
    pub fn multiplicity_at(&self, point: Complex64) -> Result<u32> {
        for z in &self.zeros {
            if let Match::Same = match_zeros(z.alpha, point)? {
                return Ok(z.mult);
            }
        }
        Ok(0)
    }

    /// True when every zero sits at the origin.
    pub fn is_monomial(&self) -> bool {
        self.zeros
            .iter()
            .all(|z| z.alpha == Complex64::new(0.0, 0.0))
    }

    /// Taylor jet of `B` at `z`, truncated at `order`.
    pub fn jet(&self, z: Complex64, order: usize) -> Jet {
        let var = Jet::variable(z, order);
        let mut acc = Jet::constant(ONE, order);
        for zero in &self.zeros {
            let a = zero.alpha;
            let factor = if a == Complex64::new(0.0, 0.0) {
                var.clone()
            } else {
                let num = (-&var).add_scalar(a);
                let den = var.scale(-a.conj()).add_scalar(ONE);
                num.div(&den).scale(Complex64::new(a.norm(), 0.0) / a)
            };
            acc = &acc * &factor.powi(zero.mult);
        }
        acc
    }

    /// `B^{(k)}(z)` for `|z| <= 1`.
    pub fn evaluate(&self, z: Complex64, deriv_order: usize) -> Result<Complex64> {
        if z.norm() > 1.0 + 1e-12 {
            return Err(Error::InvalidParameter(format!(
                "evaluation point {z} lies outside the closed unit disk"
            )));
        }
        Ok(self.jet(z, deriv_order).derivative(deriv_order))
    }

    /// `B(z)` without the domain check, for internal hot loops.
    pub(crate) fn value(&self, z: Complex64) -> Complex64 {
        let mut acc = ONE;
        for zero in &self.zeros {
            let a = zero.alpha;
            let f = if a == Complex64::new(0.0, 0.0) {
                z
            } else {
                (a - z) / (ONE - a.conj() * z) * (a.norm() / a)
            };
            acc *= f.powu(zero.mult);
        }
        acc
    }

    pub fn mul(&self, other: &Self) -> Result<Self> {
        let mut out = self.clone();
        for z in &other.zeros {
            out.push_zero(z.alpha, z.mult)?;
        }
        Ok(out)
    }

    /// Pointwise minimum of multiplicities.
    pub fn gcd(&self, other: &Self) -> Result<Self> {
        let mut zeros = Vec::new();
        for z in &self.zeros {
            let m = other.multiplicity_at(z.alpha)?;
            if m > 0 {
                zeros.push((z.alpha, z.mult.min(m)));
            }
        }
        Self::new(zeros)
    }

    /// Pointwise maximum of multiplicities.
    pub fn lcm(&self, other: &Self) -> Result<Self> {
        let mut zeros: Vec<(Complex64, u32)> = Vec::new();
        for z in &self.zeros {
            let m = other.multiplicity_at(z.alpha)?;
            zeros.push((z.alpha, z.mult.max(m)));
        }
        for z in &other.zeros {
            if self.multiplicity_at(z.alpha)? == 0 {
                zeros.push((z.alpha, z.mult));
            }
        }
        Self::new(zeros)
    }

    /// `self` divides `other` as inner functions.
    pub fn divides(&self, other: &Self) -> Result<bool> {
        for z in &self.zeros {
            if other.multiplicity_at(z.alpha)? < z.mult {
                return Ok(false);
            }
        }
        Ok(true)
    }

    /// Same zero multiset (order of listing ignored).
    pub fn same_zeros(&self, other: &Self) -> Result<bool> {
        Ok(self.divides(other)? && other.divides(self)?)
    }

    /// Zeros repeated according to multiplicity, in storage order.
    pub fn zero_list(&self) -> Vec<Complex64> {
        self.zeros
            .iter()
            .flat_map(|z| std::iter::repeat(z.alpha).take(z.mult as usize))
            .collect()
    }
}

impl Analytic for BlaschkeProduct {
    fn jet(&self, z: Complex64, order: usize) -> Jet {
        BlaschkeProduct::jet(self, z, order)
    }

    fn eval(&self, z: Complex64) -> Complex64 {
        self.value(z)
    }
}

impl fmt::Display for BlaschkeProduct {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.zeros.is_empty() {
            return write!(f, "1");
        }
        let parts: Vec<String> = self
            .zeros
            .iter()
            .map(|z| {
                let base = if z.alpha == Complex64::new(0.0, 0.0) {
                    "z".to_string()
                } else {
                    format!("phi[{}]", z.alpha)
                };
                if z.mult == 1 {
                    base
                } else {
                    format!("{base}^{}", z.mult)
                }
            })
            .collect();
        write!(f, "{}", parts.join("*"))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn mobius_examples() {
        let z = c(0.3, 0.1);
        assert_eq!(mobius(c(0.0, 0.0), z).unwrap(), z);
        assert_eq!(mobius(c(0.5, 0.0), c(0.5, 0.0)).unwrap(), c(0.0, 0.0));
        assert_eq!(mobius(c(0.5, 0.0), c(1.0, 0.0)).unwrap(), c(-1.0, 0.0));
        assert!(matches!(
            mobius(c(1.0, 0.0), z),
            Err(Error::InvalidParameter(_))
        ));
    }

    #[test]
    fn evaluate_examples() {
        let b = BlaschkeProduct::monomial(2);
        assert_eq!(b.evaluate(c(0.5, 0.0), 0).unwrap(), c(0.25, 0.0));
        assert_eq!(b.evaluate(c(0.0, 0.0), 1).unwrap(), c(0.0, 0.0));
        assert_eq!(b.evaluate(c(0.0, 0.0), 2).unwrap(), c(2.0, 0.0));

        // term-by-term product of normalized factors
        let b = BlaschkeProduct::new([(c(0.3, 0.0), 1), (c(0.0, 0.5), 1)]).unwrap();
        let z = c(0.2, 0.0);
        let f1 = (c(0.3, 0.0) - z) / (c(1.0, 0.0) - c(0.3, 0.0) * z);
        let a = c(0.0, 0.5);
        let f2 = (c(0.5, 0.0) / a) * (a - z) / (c(1.0, 0.0) - a.conj() * z);
        assert!((b.evaluate(z, 0).unwrap() - f1 * f2).norm() < 1e-15);
    }

    #[test]
    fn normalization_makes_value_at_origin_positive() {
        let b = BlaschkeProduct::new([(c(0.3, 0.4), 2), (c(-0.1, 0.5), 1)]).unwrap();
        let v = b.evaluate(c(0.0, 0.0), 0).unwrap();
        assert!(v.re > 0.0 && v.im.abs() < 1e-15);
    }

    #[test]
    fn lattice_examples() {
        let z2 = BlaschkeProduct::monomial(2);
        let z3 = BlaschkeProduct::monomial(3);
        assert!(z2.gcd(&z3).unwrap().same_zeros(&z2).unwrap());
        assert!(z2.lcm(&z3).unwrap().same_zeros(&z3).unwrap());

        let p3 = BlaschkeProduct::from_points(&[c(0.3, 0.0)]).unwrap();
        let p5 = BlaschkeProduct::from_points(&[c(0.5, 0.0)]).unwrap();
        assert!(p3.gcd(&p5).unwrap().is_one());
        let l = p3.lcm(&p5).unwrap();
        assert!(l.same_zeros(&p3.mul(&p5).unwrap()).unwrap());

        let p4 = BlaschkeProduct::from_points(&[c(0.4, 0.0)]).unwrap();
        assert!(z2.divides(&z2.mul(&p4).unwrap()).unwrap());
        assert!(!p4.divides(&z2).unwrap());
    }

    #[test]
    fn near_zeros_are_ambiguous() {
        let a = BlaschkeProduct::from_points(&[c(0.3, 0.0)]).unwrap();
        let b = BlaschkeProduct::from_points(&[c(0.3 + 1e-11, 0.0)]).unwrap();
        assert!(matches!(a.gcd(&b), Err(Error::AmbiguousMatch { .. })));
        assert!(BlaschkeProduct::new([(c(0.2, 0.0), 1), (c(0.2, 1e-12), 1)]).is_err());
    }

    #[test]
    fn rejects_bad_zeros() {
        assert!(BlaschkeProduct::new([(c(1.0, 0.0), 1)]).is_err());
        assert!(BlaschkeProduct::new([(c(0.1, 0.0), 0)]).is_err());
        assert!(BlaschkeProduct::one().evaluate(c(0.3, 0.0), 0).unwrap() == c(1.0, 0.0));
    }

    fn arb_product() -> impl Strategy<Value = BlaschkeProduct> {
        // zeros drawn from a small lattice so that shared zeros actually occur
        let pool: Vec<Complex64> = (0..6)
            .map(|k| Complex64::from_polar(0.15 * k as f64, 1.1 * k as f64))
            .collect();
        prop::collection::vec((0usize..6, 1u32..4), 0..5).prop_map(move |items| {
            BlaschkeProduct::new(items.into_iter().map(|(i, m)| (pool[i], m))).unwrap()
        })
    }

    fn arb_disk_point() -> impl Strategy<Value = Complex64> {
        (0.0f64..0.9, 0.0f64..std::f64::consts::TAU).prop_map(|(r, t)| Complex64::from_polar(r, t))
    }

    proptest! {
        #[test]
        fn lattice_laws(a in arb_product(), b in arb_product(), c3 in arb_product()) {
            let same = |x: &BlaschkeProduct, y: &BlaschkeProduct| x.same_zeros(y).unwrap();
            prop_assert!(same(&a.gcd(&b).unwrap(), &b.gcd(&a).unwrap()));
            prop_assert!(same(&a.lcm(&b).unwrap(), &b.lcm(&a).unwrap()));
            prop_assert!(same(
                &a.gcd(&b).unwrap().gcd(&c3).unwrap(),
                &a.gcd(&b.gcd(&c3).unwrap()).unwrap()
            ));
            prop_assert!(same(
                &a.lcm(&b).unwrap().lcm(&c3).unwrap(),
                &a.lcm(&b.lcm(&c3).unwrap()).unwrap()
            ));
            prop_assert!(same(&a.gcd(&a.lcm(&b).unwrap()).unwrap(), &a));
            prop_assert!(same(&a.lcm(&a.gcd(&b).unwrap()).unwrap(), &a));
            let g = a.gcd(&b).unwrap();
            let l = a.lcm(&b).unwrap();
            prop_assert!(same(&g.mul(&l).unwrap(), &a.mul(&b).unwrap()));
            prop_assert_eq!(a.divides(&b).unwrap(), same(&g, &a));
        }

        #[test]
        fn evaluation_matches_factor_product(
            zs in prop::collection::vec((arb_disk_point(), 1u32..3), 1..4),
            z in arb_disk_point(),
        ) {
            let b = match BlaschkeProduct::new(zs.clone()) { Ok(b) => b, Err(_) => return Ok(()) };
            let mut direct = Complex64::new(1.0, 0.0);
            for zero in b.zeros() {
                let factor = if zero.alpha.norm() == 0.0 { z } else {
                    (zero.alpha.norm() / zero.alpha) * (zero.alpha - z) / (Complex64::new(1.0, 0.0) - zero.alpha.conj() * z)
                };
                for _ in 0..zero.mult { direct *= factor; }
            }
            prop_assert!((b.evaluate(z, 0).unwrap() - direct).norm() < 1e-12);
            prop_assert!(b.evaluate(z, 0).unwrap().norm() < 1.0);
            let boundary = Complex64::from_polar(1.0, z.arg());
            prop_assert!((b.evaluate(boundary, 0).unwrap().norm() - 1.0).abs() < 1e-12);
        }

        #[test]
        fn derivatives_match_finite_differences(
            zs in prop::collection::vec((arb_disk_point(), 1u32..3), 1..4),
            z in (0.0f64..0.7, 0.0f64..6.28).prop_map(|(r, t)| Complex64::from_polar(r, t)),
        ) {
            let b = match BlaschkeProduct::new(zs) { Ok(b) => b, Err(_) => return Ok(()) };
            let h = 1e-4;
            let hc = Complex64::new(h, 0.0);
            // fourth-order central differences of the next lower derivative
            for k in 1..=3usize {
                let f = |t: f64| b.evaluate(z + hc * t, k - 1).unwrap();
                let fd = (f(-2.0) - 8.0 * f(-1.0) + 8.0 * f(1.0) - f(2.0)) / (12.0 * h);
                let exact = b.evaluate(z, k).unwrap();
                let scale = exact.norm().max(1.0);
                prop_assert!((fd - exact).norm() / scale < 1e-6, "k={} fd={} exact={}", k, fd, exact);
            }
        }
    }
}
