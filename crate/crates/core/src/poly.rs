//! Dense univariate polynomials with `f64` coefficients.

use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use crate::error::{Error, Result};

/// Maximum degree a single polynomial piece may reach through products.
pub const DEGREE_CAP: usize = 16;

/// Polynomial stored by ascending degree, with trailing zeros trimmed.
///
/// The zero polynomial has an empty coefficient list.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct Poly {
    coeffs: Vec<f64>,
}

impl Poly {
    pub fn new(mut coeffs: Vec<f64>) -> Self {
        while coeffs.last() == Some(&0.0) {
            coeffs.pop();
        }
        Poly { coeffs }
    }

    pub fn zero() -> Self {
        Poly { coeffs: Vec::new() }
    }

    pub fn constant(c: f64) -> Self {
        Poly::new(vec![c])
    }

    /// `a + b x`
    pub fn linear(a: f64, b: f64) -> Self {
        Poly::new(vec![a, b])
    }

    pub fn coeffs(&self) -> &[f64] {
        &self.coeffs
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    /// Degree, with the zero polynomial reported as degree 0.
    pub fn degree(&self) -> usize {
        self.coeffs.len().saturating_sub(1)
    }

    pub fn max_abs_coeff(&self) -> f64 {
        self.coeffs.iter().fold(0.0, |m, c| m.max(c.abs()))
    }

    pub fn eval(&self, x: f64) -> f64 {
        self.coeffs.iter().rev().fold(0.0, |acc, &c| acc * x + c)
    }

    pub fn scale(&self, k: f64) -> Poly {
        Poly::new(self.coeffs.iter().map(|c| c * k).collect())
    }

    pub fn derivative(&self) -> Poly {
        Poly::new(
            self.coeffs
                .iter()
                .enumerate()
                .skip(1)
                .map(|(k, c)| c * k as f64)
                .collect(),
        )
    }

    /// Antiderivative vanishing at zero.
    pub fn antiderivative(&self) -> Poly {
        let mut out = Vec::with_capacity(self.coeffs.len() + 1);
        out.push(0.0);
        out.extend(
            self.coeffs
                .iter()
                .enumerate()
                .map(|(k, c)| c / (k as f64 + 1.0)),
        );
        Poly::new(out)
    }

    pub fn integral(&self, a: f64, b: f64) -> f64 {
        let anti = self.antiderivative();
        anti.eval(b) - anti.eval(a)
    }

    /// Product, failing when the result would exceed [`DEGREE_CAP`].
    pub fn checked_mul(&self, other: &Poly) -> Result<Poly> {
        if self.is_zero() || other.is_zero() {
            return Ok(Poly::zero());
        }
        let degree = self.degree() + other.degree();
        if degree > DEGREE_CAP {
            return Err(Error::DegreeOverflow {
                degree,
                cap: DEGREE_CAP,
            });
        }
        Ok(self * other)
    }

    /// `x ↦ p(a + b x)`
    pub fn compose_affine(&self, a: f64, b: f64) -> Poly {
        let inner = Poly::linear(a, b);
        let mut acc = Poly::zero();
        for &c in self.coeffs.iter().rev() {
            acc = &(&acc * &inner) + &Poly::constant(c);
        }
        acc
    }

    /// Real roots in `[lo, hi]`, sorted, found by isolating monotone
    /// stretches between the roots of the derivative.
    pub fn real_roots_in(&self, lo: f64, hi: f64) -> Vec<f64> {
        match self.coeffs.len() {
            0 | 1 => Vec::new(),
            2 => {
                let r = -self.coeffs[0] / self.coeffs[1];
                if (lo..=hi).contains(&r) {
                    vec![r]
                } else {
                    Vec::new()
                }
            }
            _ => {
                let mut knots = vec![lo];
                knots.extend(self.derivative().real_roots_in(lo, hi));
                knots.push(hi);
                let mut roots: Vec<f64> = Vec::new();
                for w in knots.windows(2) {
                    if let Some(r) = self.bisect_root(w[0], w[1]) {
                        if roots.last().is_none_or(|&last| r > last) {
                            roots.push(r);
                        }
                    }
                }
                roots
            }
        }
    }

    fn bisect_root(&self, mut a: f64, mut b: f64) -> Option<f64> {
        let mut fa = self.eval(a);
        let fb = self.eval(b);
        if fa == 0.0 {
            return Some(a);
        }
        if fb == 0.0 {
            return Some(b);
        }
        if fa.signum() == fb.signum() {
            return None;
        }
        for _ in 0..200 {
            let mid = 0.5 * (a + b);
            if mid <= a || mid >= b {
                break;
            }
            let fm = self.eval(mid);
            if fm == 0.0 {
                return Some(mid);
            }
            if fm.signum() == fa.signum() {
                a = mid;
                fa = fm;
            } else {
                b = mid;
            }
        }
        Some(0.5 * (a + b))
    }

    /// Total variation on `[lo, hi]`, i.e. `∫ |p'|`.
    pub fn variation(&self, lo: f64, hi: f64) -> f64 {
        let mut knots = vec![lo];
        knots.extend(self.derivative().real_roots_in(lo, hi));
        knots.push(hi);
        knots
            .windows(2)
            .map(|w| (self.eval(w[1]) - self.eval(w[0])).abs())
            .sum()
    }
}

impl From<Vec<f64>> for Poly {
    fn from(coeffs: Vec<f64>) -> Self {
        Poly::new(coeffs)
    }
}

impl Add for &Poly {
    type Output = Poly;
    fn add(self, rhs: &Poly) -> Poly {
        let n = self.coeffs.len().max(rhs.coeffs.len());
        let get = |v: &[f64], k: usize| v.get(k).copied().unwrap_or(0.0);
        Poly::new(
            (0..n)
                .map(|k| get(&self.coeffs, k) + get(&rhs.coeffs, k))
                .collect(),
        )
    }
}

impl Sub for &Poly {
    type Output = Poly;
    fn sub(self, rhs: &Poly) -> Poly {
        self + &(-rhs)
    }
}

impl Neg for &Poly {
    type Output = Poly;
    fn neg(self) -> Poly {
        Poly::new(self.coeffs.iter().map(|c| -c).collect())
    }
}

impl Mul for &Poly {
    type Output = Poly;
    fn mul(self, rhs: &Poly) -> Poly {
        if self.is_zero() || rhs.is_zero() {
            return Poly::zero();
        }
        let mut out = vec![0.0; self.coeffs.len() + rhs.coeffs.len() - 1];
        for (i, a) in self.coeffs.iter().enumerate() {
            for (j, b) in rhs.coeffs.iter().enumerate() {
                out[i + j] += a * b;
            }
        }
        Poly::new(out)
    }
}

impl fmt::Display for Poly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_zero() {
            return write!(f, "0");
        }
        let terms: Vec<String> = self
            .coeffs
            .iter()
            .enumerate()
            .filter(|(_, c)| **c != 0.0)
            .map(|(k, c)| match k {
                0 => format!("{c}"),
                1 => format!("{c}*x"),
                _ => format!("{c}*x^{k}"),
            })
            .collect();
        write!(f, "{}", terms.join(" + "))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn trims_trailing_zeros() {
        assert_eq!(Poly::new(vec![1.0, 2.0, 0.0, 0.0]).coeffs(), &[1.0, 2.0]);
        assert!(Poly::new(vec![0.0, 0.0]).is_zero());
    }

    #[test]
    fn compose_affine_matches_pointwise() {
        let p = Poly::new(vec![1.0, -2.0, 0.5, 3.0]);
        let q = p.compose_affine(0.25, -1.5);
        for k in 0..10 {
            let x = -1.0 + 0.2 * k as f64;
            assert!((q.eval(x) - p.eval(0.25 - 1.5 * x)).abs() < 1e-12);
        }
    }

    #[test]
    fn integral_of_ramp() {
        let beta = Poly::linear(0.5, 1.0);
        assert!((beta.integral(-0.5, 0.5) - 0.5).abs() < 1e-15);
    }

    #[test]
    fn roots_of_cubic() {
        // (x - 0.1)(x - 0.4)(x - 0.7)
        let p = &(&Poly::linear(-0.1, 1.0) * &Poly::linear(-0.4, 1.0)) * &Poly::linear(-0.7, 1.0);
        let r = p.real_roots_in(0.0, 1.0);
        assert_eq!(r.len(), 3);
        for (a, b) in r.iter().zip([0.1, 0.4, 0.7]) {
            assert!((a - b).abs() < 1e-12);
        }
    }

    #[test]
    fn variation_of_parabola() {
        let p = Poly::new(vec![0.0, 0.0, 1.0]);
        assert!((p.variation(-1.0, 1.0) - 2.0).abs() < 1e-14);
    }

    #[test]
    fn degree_cap_enforced() {
        let mut coeffs = vec![0.0; 10];
        coeffs[9] = 1.0;
        let p = Poly::new(coeffs);
        assert!(matches!(
            p.checked_mul(&p),
            Err(Error::DegreeOverflow { degree: 18, .. })
        ));
    }
}
