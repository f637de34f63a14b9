//! Piecewise polynomials on a closed interval.
//!
//! Each piece is stored in the normalized local coordinate of its own
//! subinterval, `x = (t - t_i) / (t_{i+1} - t_i) ∈ [0, 1]`. Rescaling a
//! piece onto a window of width `1/n` therefore never inflates its
//! coefficients, and products of functions that share breakpoints are
//! computed coefficient by coefficient without any change of variable.
//!
//! Values at breakpoints are never stored: only one-sided limits exist.

use std::fmt;

use crate::error::{Error, Result};
use crate::poly::Poly;

/// Relative distance below which two breakpoints are merged.
pub const BREAK_TOL: f64 = 1e-12;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Side {
    Left,
    Right,
}

impl Side {
    pub fn name(self) -> &'static str {
        match self {
            Side::Left => "left",
            Side::Right => "right",
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct PiecewisePoly {
    breaks: Vec<f64>,
    pieces: Vec<Poly>,
}

impl PiecewisePoly {
    /// Builds from pieces already expressed in local coordinates.
    pub fn from_local(breaks: Vec<f64>, pieces: Vec<Poly>) -> Result<Self> {
        if breaks.len() < 2 {
            return Err(Error::Domain("at least two breakpoints required".into()));
        }
        if pieces.len() != breaks.len() - 1 {
            return Err(Error::Invalid(format!(
                "{} pieces for {} breakpoints",
                pieces.len(),
                breaks.len()
            )));
        }
        if breaks.iter().any(|b| !b.is_finite()) {
            return Err(Error::Domain("non-finite breakpoint".into()));
        }
        if breaks.windows(2).any(|w| w[1] <= w[0]) {
            return Err(Error::Domain(
                "breakpoints must be strictly increasing".into(),
            ));
        }
        if pieces.iter().flat_map(|p| p.coeffs()).any(|c| !c.is_finite()) {
            return Err(Error::Invalid("non-finite coefficient".into()));
        }
        Ok(PiecewisePoly { breaks, pieces })
    }

    /// Builds from pieces written in the global variable `t`.
    pub fn from_global(breaks: Vec<f64>, pieces: Vec<Poly>) -> Result<Self> {
        let pw = PiecewisePoly::from_local(breaks, pieces)?;
        let pieces = pw
            .pieces
            .iter()
            .enumerate()
            .map(|(i, p)| {
                let (a, b) = pw.piece_bounds(i);
                p.compose_affine(a, b - a)
            })
            .collect();
        Ok(PiecewisePoly { pieces, ..pw })
    }

    /// A single polynomial `p(t)` on `[lo, hi]`.
    pub fn polynomial(lo: f64, hi: f64, p: Poly) -> Result<Self> {
        PiecewisePoly::from_global(vec![lo, hi], vec![p])
    }

    pub fn constant(lo: f64, hi: f64, c: f64) -> Result<Self> {
        PiecewisePoly::from_local(vec![lo, hi], vec![Poly::constant(c)])
    }

    pub fn zero(lo: f64, hi: f64) -> Result<Self> {
        PiecewisePoly::constant(lo, hi, 0.0)
    }

    /// `left` on `(lo, at)`, `right` on `(at, hi)`.
    pub fn step(lo: f64, hi: f64, at: f64, left: f64, right: f64) -> Result<Self> {
        if !(lo < at && at < hi) {
            return Err(Error::Domain(format!("step point {at} not inside ({lo}, {hi})")));
        }
        PiecewisePoly::from_local(
            vec![lo, at, hi],
            vec![Poly::constant(left), Poly::constant(right)],
        )
    }

    pub fn lo(&self) -> f64 {
        self.breaks[0]
    }

    pub fn hi(&self) -> f64 {
        *self.breaks.last().unwrap()
    }

    pub fn breakpoints(&self) -> &[f64] {
        &self.breaks
    }

    pub fn interior_breakpoints(&self) -> &[f64] {
        &self.breaks[1..self.breaks.len() - 1]
    }

    /// Pieces in local coordinates.
    pub fn pieces(&self) -> &[Poly] {
        &self.pieces
    }

    pub fn piece_bounds(&self, i: usize) -> (f64, f64) {
        (self.breaks[i], self.breaks[i + 1])
    }

    /// Piece `i` rewritten in the global variable `t`.
    pub fn piece_global(&self, i: usize) -> Poly {
        let (a, b) = self.piece_bounds(i);
        let h = b - a;
        self.pieces[i].compose_affine(-a / h, 1.0 / h)
    }

    /// Absolute breakpoint-merging tolerance for this domain.
    pub fn tol(&self) -> f64 {
        BREAK_TOL * (self.hi() - self.lo())
    }

    pub fn same_domain(&self, other: &PiecewisePoly) -> bool {
        let tol = self.tol().max(other.tol());
        (self.lo() - other.lo()).abs() <= tol && (self.hi() - other.hi()).abs() <= tol
    }

    pub fn max_abs_coeff(&self) -> f64 {
        self.pieces.iter().fold(0.0, |m, p| m.max(p.max_abs_coeff()))
    }

    pub fn max_degree(&self) -> usize {
        self.pieces.iter().map(Poly::degree).max().unwrap_or(0)
    }

    pub fn is_zero(&self) -> bool {
        self.pieces.iter().all(Poly::is_zero)
    }

    fn check_point(&self, t: f64) -> Result<()> {
        let tol = self.tol();
        if !t.is_finite() || t < self.lo() - tol || t > self.hi() + tol {
            return Err(Error::Domain(format!(
                "point {t} outside [{}, {}]",
                self.lo(),
                self.hi()
            )));
        }
        Ok(())
    }

    /// Index of the piece adjacent to `t` on the given side.
    pub fn locate(&self, t: f64, side: Side) -> Result<usize> {
        self.check_point(t)?;
        let tol = self.tol();
        let n = self.pieces.len();
        match side {
            Side::Right => {
                if t >= self.hi() - tol {
                    return Err(self.side_error(t, side));
                }
                let count = self.breaks[..n].partition_point(|&b| b <= t + tol);
                Ok(count.saturating_sub(1))
            }
            Side::Left => {
                if t <= self.lo() + tol {
                    return Err(self.side_error(t, side));
                }
                let count = self.breaks[1..].partition_point(|&b| b < t - tol);
                Ok(count.min(n - 1))
            }
        }
    }

    fn side_error(&self, t: f64, side: Side) -> Error {
        Error::Side {
            t,
            side: side.name(),
            lo: self.lo(),
            hi: self.hi(),
        }
    }

    fn local(&self, i: usize, t: f64) -> f64 {
        let (a, b) = self.piece_bounds(i);
        ((t - a) / (b - a)).clamp(0.0, 1.0)
    }

    /// One-sided limit at `t`.
    pub fn eval_side(&self, t: f64, side: Side) -> Result<f64> {
        let i = self.locate(t, side)?;
        Ok(self.pieces[i].eval(self.local(i, t)))
    }

    /// Value at a point that is not a breakpoint (right limit elsewhere, left limit at `hi`).
    pub fn eval(&self, t: f64) -> Result<f64> {
        self.check_point(t)?;
        if t >= self.hi() - self.tol() {
            self.eval_side(t, Side::Left)
        } else {
            self.eval_side(t, Side::Right)
        }
    }

    /// `∫_a^b p(t) dt`.
    pub fn integrate(&self, a: f64, b: f64) -> Result<f64> {
        self.check_point(a)?;
        self.check_point(b)?;
        if a > b {
            return Ok(-self.integrate(b, a)?);
        }
        let mut total = 0.0;
        for (i, p) in self.pieces.iter().enumerate() {
            let (lo, hi) = self.piece_bounds(i);
            let u = a.max(lo);
            let v = b.min(hi);
            if v > u {
                let h = hi - lo;
                total += h * p.integral(self.local(i, u), self.local(i, v));
            }
        }
        Ok(total)
    }

    pub fn integrate_all(&self) -> f64 {
        self.pieces
            .iter()
            .enumerate()
            .map(|(i, p)| {
                let (a, b) = self.piece_bounds(i);
                (b - a) * p.integral(0.0, 1.0)
            })
            .sum()
    }

    /// Union of breakpoints, merging points closer than the tolerance.
    fn merged_breaks(&self, other: &PiecewisePoly) -> Vec<f64> {
        let tol = self.tol().max(other.tol());
        let mut all: Vec<f64> = self
            .interior_breakpoints()
            .iter()
            .chain(other.interior_breakpoints())
            .copied()
            .collect();
        all.sort_by(|a, b| a.total_cmp(b));
        let (lo, hi) = (self.lo(), self.hi());
        let mut out = vec![lo];
        for b in all {
            if b > *out.last().unwrap() + tol && b < hi - tol {
                out.push(b);
            }
        }
        out.push(hi);
        out
    }

    /// Re-expresses the function on a finer breakpoint set that covers the same domain.
    pub fn refine(&self, breaks: &[f64]) -> PiecewisePoly {
        let pieces = breaks
            .windows(2)
            .map(|w| {
                let (u, v) = (w[0], w[1]);
                let j = self
                    .locate(0.5 * (u + v), Side::Right)
                    .expect("refinement inside the domain");
                let (a, b) = self.piece_bounds(j);
                if u == a && v == b {
                    return self.pieces[j].clone();
                }
                let h = b - a;
                let xu = (u - a) / h;
                let xv = (v - a) / h;
                self.pieces[j].compose_affine(xu, xv - xu)
            })
            .collect();
        PiecewisePoly {
            breaks: breaks.to_vec(),
            pieces,
        }
    }

    fn zip_with<F>(&self, other: &PiecewisePoly, f: F) -> Result<PiecewisePoly>
    where
        F: Fn(&Poly, &Poly) -> Result<Poly>,
    {
        if !self.same_domain(other) {
            return Err(Error::Domain(format!(
                "mismatched domains [{}, {}] and [{}, {}]",
                self.lo(),
                self.hi(),
                other.lo(),
                other.hi()
            )));
        }
        let breaks = self.merged_breaks(other);
        let a = self.refine(&breaks);
        let b = other.refine(&breaks);
        let pieces = a
            .pieces
            .iter()
            .zip(&b.pieces)
            .map(|(p, q)| f(p, q))
            .collect::<Result<Vec<_>>>()?;
        Ok(PiecewisePoly { breaks, pieces })
    }

    /// Pointwise product on the merged breakpoint set.
    pub fn multiply(&self, other: &PiecewisePoly) -> Result<PiecewisePoly> {
        self.zip_with(other, |p, q| p.checked_mul(q))
    }

    pub fn add(&self, other: &PiecewisePoly) -> Result<PiecewisePoly> {
        self.zip_with(other, |p, q| Ok(p + q))
    }

    pub fn sub(&self, other: &PiecewisePoly) -> Result<PiecewisePoly> {
        self.zip_with(other, |p, q| Ok(p - q))
    }

    pub fn scale(&self, k: f64) -> PiecewisePoly {
        self.map_pieces(|p| p.scale(k))
    }

    pub fn map_pieces<F: Fn(&Poly) -> Poly>(&self, f: F) -> PiecewisePoly {
        PiecewisePoly {
            breaks: self.breaks.clone(),
            pieces: self.pieces.iter().map(f).collect(),
        }
    }

    /// Piecewise derivative (jumps are discarded).
    pub fn derivative(&self) -> PiecewisePoly {
        let pieces = self
            .pieces
            .iter()
            .enumerate()
            .map(|(i, p)| {
                let (a, b) = self.piece_bounds(i);
                p.derivative().scale(1.0 / (b - a))
            })
            .collect();
        PiecewisePoly {
            breaks: self.breaks.clone(),
            pieces,
        }
    }

    /// `t ↦ p(scale·(t − shift))` on `[new_lo, new_hi]`.
    pub fn affine_rescale(
        &self,
        scale: f64,
        shift: f64,
        new_lo: f64,
        new_hi: f64,
    ) -> Result<PiecewisePoly> {
        if scale == 0.0 {
            return Err(Error::DegenerateMap);
        }
        if new_lo.is_nan() || new_hi.is_nan() || new_lo >= new_hi {
            return Err(Error::Domain(format!("empty interval [{new_lo}, {new_hi}]")));
        }
        let s_lo = scale * (new_lo - shift);
        let s_hi = scale * (new_hi - shift);
        let (s_min, s_max) = if s_lo < s_hi { (s_lo, s_hi) } else { (s_hi, s_lo) };
        let tol = self.tol();
        if s_min < self.lo() - tol || s_max > self.hi() + tol {
            return Err(Error::Domain(format!(
                "image [{s_min}, {s_max}] escapes [{}, {}]",
                self.lo(),
                self.hi()
            )));
        }
        let new_tol = BREAK_TOL * (new_hi - new_lo);
        let mut inner: Vec<f64> = self
            .interior_breakpoints()
            .iter()
            .filter(|&&b| b > s_min && b < s_max)
            .map(|&b| shift + b / scale)
            .collect();
        inner.sort_by(|a, b| a.total_cmp(b));
        let mut breaks = vec![new_lo];
        for t in inner {
            if t > *breaks.last().unwrap() + new_tol && t < new_hi - new_tol {
                breaks.push(t);
            }
        }
        breaks.push(new_hi);

        let image = |t: f64| (scale * (t - shift)).clamp(self.lo(), self.hi());
        let pieces = breaks
            .windows(2)
            .map(|w| {
                let (su, sv) = (image(w[0]), image(w[1]));
                let j = self
                    .locate(0.5 * (su + sv), Side::Right)
                    .expect("image inside the domain");
                let (a, b) = self.piece_bounds(j);
                let h = b - a;
                let xu = (su - a) / h;
                let xv = (sv - a) / h;
                self.pieces[j].compose_affine(xu, xv - xu)
            })
            .collect();
        Ok(PiecewisePoly { breaks, pieces })
    }

    /// Extends to `[lo, hi] ⊇ domain` with zero outside the current domain.
    pub fn extend_by_zero(&self, lo: f64, hi: f64) -> Result<PiecewisePoly> {
        let tol = BREAK_TOL * (hi - lo);
        if self.lo() < lo - tol || self.hi() > hi + tol {
            return Err(Error::Domain(format!(
                "[{}, {}] does not fit in [{lo}, {hi}]",
                self.lo(),
                self.hi()
            )));
        }
        let mut breaks = Vec::with_capacity(self.breaks.len() + 2);
        let mut pieces = Vec::with_capacity(self.pieces.len() + 2);
        if self.lo() > lo + tol {
            breaks.push(lo);
            pieces.push(Poly::zero());
        }
        breaks.extend_from_slice(&self.breaks);
        pieces.extend(self.pieces.iter().cloned());
        if self.hi() < hi - tol {
            pieces.push(Poly::zero());
        } else {
            breaks.pop();
        }
        breaks[0] = lo;
        breaks.push(hi);
        Ok(PiecewisePoly { breaks, pieces })
    }

    /// Right limit minus left limit at every interior breakpoint.
    pub fn jumps(&self) -> Vec<(f64, f64)> {
        (1..self.pieces.len())
            .map(|i| {
                let left = self.pieces[i - 1].eval(1.0);
                let right = self.pieces[i].eval(0.0);
                (self.breaks[i], right - left)
            })
            .collect()
    }

    /// True when every interior jump is within `tol` of zero.
    pub fn is_continuous(&self, tol: f64) -> bool {
        self.jumps().iter().all(|(_, s)| s.abs() <= tol)
    }

    /// Interior variation of every piece plus the absolute jumps.
    pub fn total_variation(&self) -> f64 {
        let interior: f64 = self.pieces.iter().map(|p| p.variation(0.0, 1.0)).sum();
        let jumps: f64 = self.jumps().iter().map(|(_, s)| s.abs()).sum();
        interior + jumps
    }

    /// `count` equispaced samples `(t, value)` over the domain.
    pub fn sample(&self, count: usize) -> Vec<(f64, f64)> {
        let count = count.max(2);
        let (lo, hi) = (self.lo(), self.hi());
        (0..count)
            .map(|k| {
                let t = lo + (hi - lo) * k as f64 / (count - 1) as f64;
                (t, self.eval(t).unwrap_or(0.0))
            })
            .collect()
    }
}

impl fmt::Display for PiecewisePoly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for i in 0..self.pieces.len() {
            let (a, b) = self.piece_bounds(i);
            if i > 0 {
                write!(f, " | ")?;
            }
            write!(f, "({a}, {b}): {}", self.piece_global(i))?;
        }
        Ok(())
    }
}
