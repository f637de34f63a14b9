//! Regulated functions, transition profiles and dynamic functions.
//!
//! A [`DynamicFn`] is an ordinary regulated function together with a finite
//! set of points at which its value is itself a function on the fast scale
//! `J = [-1/2, 1/2]`. At every discontinuity of the ordinary part the
//! profile connects the left limit (at `s = -1/2`) with the right limit
//! (at `s = 1/2`).

use crate::error::{Error, Result};
use crate::piecewise::{PiecewisePoly, Side};
use crate::poly::Poly;

pub const J_LO: f64 = -0.5;
pub const J_HI: f64 = 0.5;

/// Tolerance for matching one-sided limits and profile endpoints.
pub const MATCH_TOL: f64 = 1e-12;

pub(crate) fn close(a: f64, b: f64, tol: f64) -> bool {
    (a - b).abs() <= tol * (1.0 + a.abs().max(b.abs()))
}

/// Regulated function on a closed interval, identified by its one-sided limits.
#[derive(Clone, Debug, PartialEq)]
pub struct RegulatedFn {
    body: PiecewisePoly,
}

impl RegulatedFn {
    pub fn new(body: PiecewisePoly) -> Self {
        RegulatedFn { body }
    }

    pub fn zero(lo: f64, hi: f64) -> Result<Self> {
        Ok(RegulatedFn::new(PiecewisePoly::zero(lo, hi)?))
    }

    /// Heaviside step `θ_τ` on `[lo, hi]`.
    pub fn heaviside(lo: f64, hi: f64, tau: f64) -> Result<Self> {
        Ok(RegulatedFn::new(PiecewisePoly::step(lo, hi, tau, 0.0, 1.0)?))
    }

    pub fn body(&self) -> &PiecewisePoly {
        &self.body
    }

    pub fn into_body(self) -> PiecewisePoly {
        self.body
    }

    pub fn lo(&self) -> f64 {
        self.body.lo()
    }

    pub fn hi(&self) -> f64 {
        self.body.hi()
    }

    pub fn eval_side(&self, t: f64, side: Side) -> Result<f64> {
        self.body.eval_side(t, side)
    }

    /// Interior points where the one-sided limits differ.
    pub fn discontinuities(&self) -> Vec<(f64, f64)> {
        self.body
            .jumps()
            .into_iter()
            .filter(|&(t, s)| {
                let left = self.body.eval_side(t, Side::Left).unwrap_or(0.0);
                !close(left, left + s, MATCH_TOL)
            })
            .collect()
    }

    pub fn multiply(&self, other: &RegulatedFn) -> Result<RegulatedFn> {
        Ok(RegulatedFn::new(self.body.multiply(&other.body)?))
    }

    /// Equality of all one-sided limits on the union of breakpoints, plus
    /// agreement of the pieces in between.
    pub fn approx_eq(&self, other: &RegulatedFn, tol: f64) -> bool {
        match self.body.sub(&other.body) {
            Ok(diff) => diff.max_abs_coeff() <= tol,
            Err(_) => false,
        }
    }
}

/// Split of a regulated function into a continuous part and its jumps.
#[derive(Clone, Debug)]
pub struct JordanParts {
    /// Continuous part, agreeing with the input at the left endpoint.
    pub continuous: PiecewisePoly,
    /// `(τ, σ_τ)` for every nonzero jump.
    pub jumps: Vec<(f64, f64)>,
}

/// Splits `f` into `continuous + Σ σ_k θ_{τ_k}`.
pub fn jordan_decompose(f: &RegulatedFn) -> JordanParts {
    let body = f.body();
    let raw = body.jumps();
    let mut offset = 0.0;
    let mut pieces = Vec::with_capacity(body.pieces().len());
    pieces.push(body.pieces()[0].clone());
    for (i, (_, sigma)) in raw.iter().enumerate() {
        offset += sigma;
        pieces.push(&body.pieces()[i + 1] - &Poly::constant(offset));
    }
    let continuous = PiecewisePoly::from_local(body.breakpoints().to_vec(), pieces)
        .expect("same breakpoints as the input");
    let jumps = f.discontinuities();
    JordanParts { continuous, jumps }
}

/// Dynamic value at a point: a regulated curve on `J`.
#[derive(Clone, Debug, PartialEq)]
pub struct Profile {
    curve: PiecewisePoly,
}

impl Profile {
    pub fn new(curve: PiecewisePoly) -> Result<Self> {
        let tol = 1e-12;
        if (curve.lo() - J_LO).abs() > tol || (curve.hi() - J_HI).abs() > tol {
            return Err(Error::Domain(format!(
                "profile must live on [-1/2, 1/2], got [{}, {}]",
                curve.lo(),
                curve.hi()
            )));
        }
        Ok(Profile { curve })
    }

    /// Single polynomial in `s` on `J`.
    pub fn polynomial(p: Poly) -> Result<Self> {
        Profile::new(PiecewisePoly::polynomial(J_LO, J_HI, p)?)
    }

    pub fn constant(c: f64) -> Self {
        Profile {
            curve: PiecewisePoly::constant(J_LO, J_HI, c).expect("J is nonempty"),
        }
    }

    /// Two-valued step: `left` on `[-1/2, 0)`, `right` on `(0, 1/2]`.
    pub fn step(left: f64, right: f64) -> Self {
        Profile {
            curve: PiecewisePoly::step(J_LO, J_HI, 0.0, left, right).expect("0 is inside J"),
        }
    }

    /// Linear ramp from `left` to `right` across `J`.
    pub fn ramp(left: f64, right: f64) -> Self {
        Profile {
            curve: PiecewisePoly::from_local(vec![J_LO, J_HI], vec![Poly::linear(left, right - left)])
                .expect("J is nonempty"),
        }
    }

    pub fn curve(&self) -> &PiecewisePoly {
        &self.curve
    }

    /// Value at `s = -1/2`.
    pub fn start(&self) -> f64 {
        self.curve.eval_side(J_LO, Side::Right).expect("J is nonempty")
    }

    /// Value at `s = 1/2`.
    pub fn end(&self) -> f64 {
        self.curve.eval_side(J_HI, Side::Left).expect("J is nonempty")
    }

    /// Continuous across its breakpoints, hence absolutely continuous on `J`.
    pub fn is_continuous(&self) -> bool {
        let scale = 1.0 + self.curve.max_abs_coeff();
        self.curve.is_continuous(MATCH_TOL * scale)
    }

    pub fn is_constant(&self) -> bool {
        let scale = 1.0 + self.curve.max_abs_coeff();
        self.curve
            .pieces()
            .iter()
            .all(|p| p.coeffs().iter().skip(1).all(|c| c.abs() <= MATCH_TOL * scale))
            && self.is_continuous()
    }

    pub fn variation(&self) -> f64 {
        self.curve.total_variation()
    }

    pub fn multiply(&self, other: &Profile) -> Result<Profile> {
        Ok(Profile {
            curve: self.curve.multiply(&other.curve)?,
        })
    }

    fn combine(&self, other: &Profile, f: impl Fn(&PiecewisePoly, &PiecewisePoly) -> Result<PiecewisePoly>) -> Result<Profile> {
        Ok(Profile {
            curve: f(&self.curve, &other.curve)?,
        })
    }
}

/// Normalized density on `J`, the shape of a delta-function.
#[derive(Clone, Debug, PartialEq)]
pub struct Shape {
    density: PiecewisePoly,
}

impl Shape {
    pub fn new(density: PiecewisePoly) -> Result<Self> {
        Profile::new(density.clone())?;
        let mass = density.integrate_all();
        if mass.is_nan() || (mass - 1.0).abs() > 1e-12 {
            return Err(Error::Normalization { mass });
        }
        Ok(Shape { density })
    }

    pub fn polynomial(p: Poly) -> Result<Self> {
        Shape::new(PiecewisePoly::polynomial(J_LO, J_HI, p)?)
    }

    /// `α ≡ 1`.
    pub fn uniform() -> Self {
        Shape::polynomial(Poly::constant(1.0)).expect("unit mass")
    }

    /// `α(s) = 2s + 1`.
    pub fn ramp() -> Self {
        Shape::polynomial(Poly::linear(1.0, 2.0)).expect("unit mass")
    }

    /// `α(s) = 1 - 2s`.
    pub fn reverse_ramp() -> Self {
        Shape::polynomial(Poly::linear(1.0, -2.0)).expect("unit mass")
    }

    /// `α(s) = 3/2 - 6s²`, vanishing at both ends of `J`.
    pub fn quadratic() -> Self {
        Shape::polynomial(Poly::new(vec![1.5, 0.0, -6.0])).expect("unit mass")
    }

    pub fn density(&self) -> &PiecewisePoly {
        &self.density
    }

    /// Mass carried by `(0, 1/2]`.
    pub fn right_mass(&self) -> f64 {
        self.density.integrate(0.0, J_HI).expect("inside J")
    }
}

/// Dynamic function of bounded variation with finitely many profiles.
#[derive(Clone, Debug, PartialEq)]
pub struct DynamicFn {
    ordinary: RegulatedFn,
    profiles: Vec<(f64, Profile)>,
}

impl DynamicFn {
    /// Validates endpoint matching, and gives every discontinuity without an
    /// explicit profile the step profile of the canonical embedding.
    pub fn new(ordinary: RegulatedFn, mut profiles: Vec<(f64, Profile)>) -> Result<Self> {
        let (lo, hi) = (ordinary.lo(), ordinary.hi());
        let tol = ordinary.body().tol();
        profiles.sort_by(|a, b| a.0.total_cmp(&b.0));
        for w in profiles.windows(2) {
            if w[1].0 - w[0].0 <= tol {
                return Err(Error::Invalid(format!("two profiles at {}", w[0].0)));
            }
        }
        for (tau, profile) in &profiles {
            if !(*tau > lo + tol && *tau < hi - tol) {
                return Err(Error::Domain(format!("profile point {tau} outside ({lo}, {hi})")));
            }
            let left = ordinary.eval_side(*tau, Side::Left)?;
            let right = ordinary.eval_side(*tau, Side::Right)?;
            if !close(profile.start(), left, MATCH_TOL) || !close(profile.end(), right, MATCH_TOL) {
                return Err(Error::Invalid(format!(
                    "profile at {tau} runs from {} to {}, limits are {left} and {right}",
                    profile.start(),
                    profile.end()
                )));
            }
        }
        for (t, _) in ordinary.discontinuities() {
            if !profiles.iter().any(|(tau, _)| (tau - t).abs() <= tol) {
                let left = ordinary.eval_side(t, Side::Left)?;
                let right = ordinary.eval_side(t, Side::Right)?;
                profiles.push((t, Profile::step(left, right)));
            }
        }
        profiles.sort_by(|a, b| a.0.total_cmp(&b.0));
        Ok(DynamicFn { ordinary, profiles })
    }

    pub fn from_pw(body: PiecewisePoly, profiles: Vec<(f64, Profile)>) -> Result<Self> {
        DynamicFn::new(RegulatedFn::new(body), profiles)
    }

    pub fn constant(lo: f64, hi: f64, c: f64) -> Result<Self> {
        DynamicFn::from_pw(PiecewisePoly::constant(lo, hi, c)?, Vec::new())
    }

    /// Dynamic Heaviside function `θ_τ^β`; `β` must run from 0 to 1.
    pub fn heaviside(lo: f64, hi: f64, tau: f64, beta: Profile) -> Result<Self> {
        DynamicFn::new(RegulatedFn::heaviside(lo, hi, tau)?, vec![(tau, beta)])
    }

    pub fn lo(&self) -> f64 {
        self.ordinary.lo()
    }

    pub fn hi(&self) -> f64 {
        self.ordinary.hi()
    }

    pub fn ordinary(&self) -> &RegulatedFn {
        &self.ordinary
    }

    pub fn profiles(&self) -> &[(f64, Profile)] {
        &self.profiles
    }

    pub fn profile_at(&self, tau: f64) -> Option<&Profile> {
        let tol = self.ordinary.body().tol();
        self.profiles
            .iter()
            .find(|(t, _)| (t - tau).abs() <= tol)
            .map(|(_, p)| p)
    }

    /// True when no profile is a step (every profile is absolutely continuous).
    pub fn is_sbv(&self) -> bool {
        self.profiles.iter().all(|(_, p)| p.is_continuous())
    }

    /// Dynamic value at `τ`: the stored profile, or the constant ordinary value.
    pub fn dynamic_value(&self, tau: f64) -> Result<Profile> {
        if let Some(p) = self.profile_at(tau) {
            return Ok(p.clone());
        }
        let left = self.ordinary.eval_side(tau, Side::Left)?;
        let right = self.ordinary.eval_side(tau, Side::Right)?;
        if close(left, right, MATCH_TOL) {
            Ok(Profile::constant(0.5 * (left + right)))
        } else {
            Ok(Profile::step(left, right))
        }
    }

    pub fn eval_side(&self, t: f64, side: Side) -> Result<f64> {
        self.ordinary.eval_side(t, side)
    }

    /// `f(τ+) − f(τ−)`.
    pub fn jump(&self, tau: f64) -> Result<f64> {
        let tol = self.ordinary.body().tol();
        if !(tau > self.lo() + tol && tau < self.hi() - tol) {
            return Err(Error::Domain(format!(
                "{tau} outside ({}, {})",
                self.lo(),
                self.hi()
            )));
        }
        Ok(self.eval_side(tau, Side::Right)? - self.eval_side(tau, Side::Left)?)
    }

    pub fn ordinary_part(&self) -> RegulatedFn {
        self.ordinary.clone()
    }

    fn profile_points(&self, other: &DynamicFn) -> Vec<f64> {
        let tol = self.ordinary.body().tol();
        let mut pts: Vec<f64> = self
            .profiles
            .iter()
            .chain(&other.profiles)
            .map(|(t, _)| *t)
            .collect();
        pts.sort_by(|a, b| a.total_cmp(b));
        pts.dedup_by(|b, a| (*b - *a).abs() <= tol);
        pts
    }

    fn combine<F, G>(&self, other: &DynamicFn, ord: F, prof: G) -> Result<DynamicFn>
    where
        F: Fn(&PiecewisePoly, &PiecewisePoly) -> Result<PiecewisePoly>,
        G: Fn(&PiecewisePoly, &PiecewisePoly) -> Result<PiecewisePoly>,
    {
        if !self.ordinary.body().same_domain(other.ordinary.body()) {
            return Err(Error::Domain("dynamic functions on different intervals".into()));
        }
        let ordinary = RegulatedFn::new(ord(self.ordinary.body(), other.ordinary.body())?);
        let profiles = self
            .profile_points(other)
            .into_iter()
            .map(|tau| {
                let a = self.dynamic_value(tau)?;
                let b = other.dynamic_value(tau)?;
                Ok((tau, a.combine(&b, &prof)?))
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(DynamicFn { ordinary, profiles })
    }

    /// Pointwise product of dynamic values.
    pub fn multiply(&self, other: &DynamicFn) -> Result<DynamicFn> {
        self.combine(other, PiecewisePoly::multiply, PiecewisePoly::multiply)
    }

    pub fn add(&self, other: &DynamicFn) -> Result<DynamicFn> {
        self.combine(other, PiecewisePoly::add, PiecewisePoly::add)
    }

    pub fn sub(&self, other: &DynamicFn) -> Result<DynamicFn> {
        self.combine(other, PiecewisePoly::sub, PiecewisePoly::sub)
    }

    pub fn scale(&self, k: f64) -> DynamicFn {
        DynamicFn {
            ordinary: RegulatedFn::new(self.ordinary.body().scale(k)),
            profiles: self
                .profiles
                .iter()
                .map(|(t, p)| (*t, Profile { curve: p.curve.scale(k) }))
                .collect(),
        }
    }

    /// Drops profiles that are constant and agree with a continuous ordinary value.
    pub fn pruned(&self) -> DynamicFn {
        let profiles = self
            .profiles
            .iter()
            .filter(|(t, p)| {
                let left = self.eval_side(*t, Side::Left).unwrap_or(f64::NAN);
                let right = self.eval_side(*t, Side::Right).unwrap_or(f64::NAN);
                !(p.is_constant() && close(left, right, MATCH_TOL))
            })
            .cloned()
            .collect();
        DynamicFn {
            ordinary: self.ordinary.clone(),
            profiles,
        }
    }

    /// Variation of the continuous Jordan part plus the variation of every profile.
    pub fn total_variation(&self) -> f64 {
        let parts = jordan_decompose(&self.ordinary);
        parts.continuous.total_variation()
            + self.profiles.iter().map(|(_, p)| p.variation()).sum::<f64>()
    }

    /// `|f(a+)| + ‖f̂_c‖_BV + Σ var_J f(τ)(·)`.
    pub fn sbv_norm(&self) -> f64 {
        let start = self
            .ordinary
            .eval_side(self.lo(), Side::Right)
            .expect("left endpoint");
        start.abs() + self.total_variation()
    }

    /// Equal one-sided limits everywhere and equal profiles, within `tol`.
    pub fn approx_eq(&self, other: &DynamicFn, tol: f64) -> bool {
        let Ok(diff) = self.sub(other) else {
            return false;
        };
        diff.ordinary.body().max_abs_coeff() <= tol
            && diff
                .profiles
                .iter()
                .all(|(_, p)| p.curve.max_abs_coeff() <= tol)
    }
}

/// Canonical inclusion of a regulated function: step profiles at its jumps.
pub fn embed_regulated(g: &RegulatedFn) -> DynamicFn {
    DynamicFn::new(g.clone(), Vec::new()).expect("step profiles always match")
}

/// `f_n(t) = γ(n(t − τ))` on `(τ − 1/(2n), τ + 1/(2n))`, zero elsewhere on `[lo, hi]`.
pub fn sequential_representation(
    profile: &Profile,
    tau: f64,
    n: u32,
    lo: f64,
    hi: f64,
) -> Result<RegulatedFn> {
    if n == 0 {
        return Err(Error::Invalid("n must be positive".into()));
    }
    let n = n as f64;
    let half = 0.5 / n;
    let tol = crate::piecewise::BREAK_TOL * (hi - lo);
    if tau - half < lo - tol || tau + half > hi + tol {
        return Err(Error::Domain(format!(
            "window ({}, {}) escapes ({lo}, {hi})",
            tau - half,
            tau + half
        )));
    }
    let window = profile
        .curve()
        .affine_rescale(n, tau, tau - half, tau + half)?;
    Ok(RegulatedFn::new(window.extend_by_zero(lo, hi)?))
}
