//! Distributions acting on dynamic test functions, in closed form.
//!
//! A [`Distribution`] is the sum of
//!
//! - a regular part `φ ↦ ∫ f̂ φ̂ dt`,
//! - a Stieltjes part `φ ↦ ∫ φ̂ dg_c` against a continuous piecewise-polynomial
//!   integrator `g_c`,
//! - finitely many [`Atom`]s `φ ↦ a·φ(τ+) + b·φ(τ−) + ∫_J φ(τ)(s) μ(s) ds`.
//!
//! Shaped deltas `δ_τ^α` are atoms with `μ = α` and no point weights; the
//! point-weight delta `δ_τ^λ` is an atom with `(a, b) = (λ, 1 − λ)` and `μ = 0`.
//! Carrying all three components in one atom keeps the family closed under
//! multiplication by dynamic functions.

use rayon::prelude::*;

use crate::dynamic::{close, jordan_decompose, DynamicFn, RegulatedFn, Shape, J_HI, J_LO, MATCH_TOL};
use crate::error::{Error, Result};
use crate::piecewise::{PiecewisePoly, Side, BREAK_TOL};

/// Compactly supported dynamic function; the argument of a pairing.
#[derive(Clone, Debug, PartialEq)]
pub struct TestFn {
    body: DynamicFn,
    support: (f64, f64),
}

impl TestFn {
    /// `body` must vanish outside `[c, d]`, and `[c, d]` must lie inside the open interval.
    pub fn new(body: DynamicFn, c: f64, d: f64) -> Result<Self> {
        let (lo, hi) = (body.lo(), body.hi());
        let tol = BREAK_TOL * (hi - lo);
        if !(c <= d && c > lo + tol && d < hi - tol) {
            return Err(Error::Domain(format!(
                "support [{c}, {d}] is not a closed subinterval of ({lo}, {hi})"
            )));
        }
        let ord = body.ordinary().body();
        for (i, p) in ord.pieces().iter().enumerate() {
            let (a, b) = ord.piece_bounds(i);
            let outside = (c.min(b) - a > tol) || (b - d.max(a) > tol);
            if outside && !p.is_zero() {
                return Err(Error::Invalid(format!(
                    "test function is nonzero on ({a}, {b}), outside its support [{c}, {d}]"
                )));
            }
        }
        let mut kept = Vec::new();
        for (tau, profile) in body.profiles() {
            if *tau < c - tol || *tau > d + tol {
                if !profile.curve().is_zero() {
                    return Err(Error::Invalid(format!(
                        "test function has a profile at {tau}, outside its support"
                    )));
                }
            } else {
                kept.push((*tau, profile.clone()));
            }
        }
        let body = DynamicFn::new(body.ordinary().clone(), kept)?;
        Ok(TestFn {
            body,
            support: (c, d),
        })
    }

    pub fn body(&self) -> &DynamicFn {
        &self.body
    }

    pub fn support(&self) -> (f64, f64) {
        self.support
    }

    pub fn lo(&self) -> f64 {
        self.body.lo()
    }

    pub fn hi(&self) -> f64 {
        self.body.hi()
    }

    /// Test functions without profiles and without jumps.
    pub fn is_continuous(&self) -> bool {
        self.body.profiles().is_empty()
    }

    /// `g·φ`, again a test function with the same support.
    pub fn multiply(&self, g: &DynamicFn) -> Result<TestFn> {
        let (c, d) = self.support;
        TestFn::new(self.body.multiply(g)?, c, d)
    }
}

/// Point component of a distribution.
#[derive(Clone, Debug, PartialEq)]
pub struct Atom {
    pub tau: f64,
    /// Weight of `φ(τ+)`.
    pub right: f64,
    /// Weight of `φ(τ−)`.
    pub left: f64,
    /// Density on `J` integrated against the dynamic value `φ(τ)(·)`.
    pub density: PiecewisePoly,
}

impl Atom {
    pub fn shaped(tau: f64, density: PiecewisePoly) -> Self {
        Atom {
            tau,
            right: 0.0,
            left: 0.0,
            density,
        }
    }

    pub fn is_shaped(&self) -> bool {
        self.right == 0.0 && self.left == 0.0
    }

    /// Total mass, the pairing with the constant 1.
    pub fn mass(&self) -> f64 {
        self.right + self.left + self.density.integrate_all()
    }

    /// Normalized shape `μ / ∫μ`, when the density carries mass.
    pub fn shape(&self) -> Option<PiecewisePoly> {
        let m = self.density.integrate_all();
        if m.abs() <= MATCH_TOL * (1.0 + self.density.max_abs_coeff()) {
            None
        } else {
            Some(self.density.scale(1.0 / m))
        }
    }

    pub fn act(&self, phi: &DynamicFn) -> Result<f64> {
        let mut v = 0.0;
        if self.right != 0.0 {
            v += self.right * phi.eval_side(self.tau, Side::Right)?;
        }
        if self.left != 0.0 {
            v += self.left * phi.eval_side(self.tau, Side::Left)?;
        }
        if !self.density.is_zero() {
            let value = phi.dynamic_value(self.tau)?;
            v += value.curve().multiply(&self.density)?.integrate_all();
        }
        Ok(v)
    }
}

/// Element of the dual of the dynamic test space, in closed form.
#[derive(Clone, Debug, PartialEq)]
pub struct Distribution {
    regular: PiecewisePoly,
    stieltjes: PiecewisePoly,
    atoms: Vec<Atom>,
}

fn zero_on_j() -> PiecewisePoly {
    PiecewisePoly::zero(J_LO, J_HI).expect("J is nonempty")
}

impl Distribution {
    pub fn zero(lo: f64, hi: f64) -> Result<Self> {
        Ok(Distribution {
            regular: PiecewisePoly::zero(lo, hi)?,
            stieltjes: PiecewisePoly::zero(lo, hi)?,
            atoms: Vec::new(),
        })
    }

    /// Validates the parts and merges atoms sharing a location.
    pub fn from_parts(
        regular: PiecewisePoly,
        stieltjes: PiecewisePoly,
        atoms: Vec<Atom>,
    ) -> Result<Self> {
        if !regular.same_domain(&stieltjes) {
            return Err(Error::Domain("regular and Stieltjes parts on different intervals".into()));
        }
        let scale = 1.0 + stieltjes.max_abs_coeff();
        if !stieltjes.is_continuous(MATCH_TOL * scale) {
            return Err(Error::Invalid("Stieltjes integrator must be continuous".into()));
        }
        let (lo, hi) = (regular.lo(), regular.hi());
        let tol = regular.tol();
        let mut merged: Vec<Atom> = Vec::with_capacity(atoms.len());
        let mut atoms = atoms;
        atoms.sort_by(|a, b| a.tau.total_cmp(&b.tau));
        for atom in atoms {
            if !(atom.tau > lo + tol && atom.tau < hi - tol) {
                return Err(Error::Domain(format!("atom at {} outside ({lo}, {hi})", atom.tau)));
            }
            crate::dynamic::Profile::new(atom.density.clone())?;
            match merged.last_mut() {
                Some(last) if (atom.tau - last.tau).abs() <= tol => {
                    last.right += atom.right;
                    last.left += atom.left;
                    last.density = last.density.add(&atom.density)?;
                }
                _ => merged.push(atom),
            }
        }
        Ok(Distribution {
            regular,
            stieltjes,
            atoms: merged,
        })
    }

    /// Regular distribution with density `f̂`.
    pub fn regular(f: &RegulatedFn) -> Result<Self> {
        let body = f.body().clone();
        let zero = PiecewisePoly::zero(body.lo(), body.hi())?;
        Distribution::from_parts(body, zero, Vec::new())
    }

    /// `φ ↦ ∫ φ̂ dg_c`.
    pub fn stieltjes(g_c: &PiecewisePoly) -> Result<Self> {
        let zero = PiecewisePoly::zero(g_c.lo(), g_c.hi())?;
        Distribution::from_parts(zero, g_c.clone(), Vec::new())
    }

    /// Shaped delta `δ_τ^α` on `(lo, hi)`.
    pub fn delta(lo: f64, hi: f64, tau: f64, shape: &Shape) -> Result<Self> {
        Distribution::with_atoms(lo, hi, vec![Atom::shaped(tau, shape.density().clone())])
    }

    /// Point-weight delta `δ_τ^λ = λφ(τ+) + (1 − λ)φ(τ−)`.
    pub fn delta_lambda(lo: f64, hi: f64, tau: f64, lambda: f64) -> Result<Self> {
        let atom = Atom {
            tau,
            right: lambda,
            left: 1.0 - lambda,
            density: zero_on_j(),
        };
        Distribution::with_atoms(lo, hi, vec![atom])
    }

    pub fn with_atoms(lo: f64, hi: f64, atoms: Vec<Atom>) -> Result<Self> {
        Distribution::from_parts(
            PiecewisePoly::zero(lo, hi)?,
            PiecewisePoly::zero(lo, hi)?,
            atoms,
        )
    }

    pub fn lo(&self) -> f64 {
        self.regular.lo()
    }

    pub fn hi(&self) -> f64 {
        self.regular.hi()
    }

    pub fn regular_part(&self) -> &PiecewisePoly {
        &self.regular
    }

    pub fn stieltjes_part(&self) -> &PiecewisePoly {
        &self.stieltjes
    }

    pub fn atoms(&self) -> &[Atom] {
        &self.atoms
    }

    pub fn atom_at(&self, tau: f64) -> Option<&Atom> {
        let tol = self.regular.tol();
        self.atoms.iter().find(|a| (a.tau - tau).abs() <= tol)
    }

    /// Moves the Stieltjes part into the regular density `(g_c)′`.
    pub fn absorb_stieltjes(&self) -> Result<Distribution> {
        let regular = self.regular.add(&self.stieltjes.derivative())?;
        let zero = PiecewisePoly::zero(self.lo(), self.hi())?;
        Ok(Distribution {
            regular,
            stieltjes: zero,
            atoms: self.atoms.clone(),
        })
    }

    pub fn add(&self, other: &Distribution) -> Result<Distribution> {
        let mut atoms = self.atoms.clone();
        atoms.extend(other.atoms.iter().cloned());
        Distribution::from_parts(
            self.regular.add(&other.regular)?,
            self.stieltjes.add(&other.stieltjes)?,
            atoms,
        )
    }

    pub fn scale(&self, k: f64) -> Distribution {
        Distribution {
            regular: self.regular.scale(k),
            stieltjes: self.stieltjes.scale(k),
            atoms: self
                .atoms
                .iter()
                .map(|a| Atom {
                    tau: a.tau,
                    right: k * a.right,
                    left: k * a.left,
                    density: a.density.scale(k),
                })
                .collect(),
        }
    }

    /// `(T, φ)`.
    pub fn pair(&self, phi: &TestFn) -> Result<f64> {
        let body = phi.body();
        let hat = body.ordinary().body();
        if !self.regular.same_domain(hat) {
            return Err(Error::Domain("distribution and test function on different intervals".into()));
        }
        let mut v = self.regular.multiply(hat)?.integrate_all();
        if !self.stieltjes.is_zero() {
            v += self.stieltjes.derivative().multiply(hat)?.integrate_all();
        }
        for atom in &self.atoms {
            v += atom.act(body)?;
        }
        Ok(v)
    }

    /// Product `gT`, defined by `(gT, φ) = (T, gφ)`.
    pub fn multiply(&self, g: &DynamicFn) -> Result<Distribution> {
        let hat = g.ordinary().body();
        if !self.regular.same_domain(hat) {
            return Err(Error::Domain("distribution and multiplier on different intervals".into()));
        }
        let mut regular = self.regular.multiply(hat)?;
        if !self.stieltjes.is_zero() {
            regular = regular.add(&self.stieltjes.derivative().multiply(hat)?)?;
        }
        let atoms = self
            .atoms
            .iter()
            .map(|a| {
                let right = if a.right != 0.0 {
                    a.right * g.eval_side(a.tau, Side::Right)?
                } else {
                    0.0
                };
                let left = if a.left != 0.0 {
                    a.left * g.eval_side(a.tau, Side::Left)?
                } else {
                    0.0
                };
                let density = g.dynamic_value(a.tau)?.curve().multiply(&a.density)?;
                Ok(Atom {
                    tau: a.tau,
                    right,
                    left,
                    density,
                })
            })
            .collect::<Result<Vec<_>>>()?;
        let zero = PiecewisePoly::zero(self.lo(), self.hi())?;
        Distribution::from_parts(regular, zero, atoms)
    }

    /// Replaces every shaped atom by `ω_n(t) = n μ(n(t − τ))` on its window.
    pub fn mollify(&self, n: u32) -> Result<RegulatedFn> {
        if n == 0 {
            return Err(Error::Invalid("n must be positive".into()));
        }
        let (lo, hi) = (self.lo(), self.hi());
        let tol = self.regular.tol();
        let half = 0.5 / n as f64;
        let mut total = self.regular.add(&self.stieltjes.derivative())?;
        let mut prev_end = f64::NEG_INFINITY;
        for atom in &self.atoms {
            if !atom.is_shaped() {
                return Err(Error::LambdaAtom { tau: atom.tau });
            }
            let (a, b) = (atom.tau - half, atom.tau + half);
            if a < lo - tol || b > hi + tol {
                return Err(Error::Domain(format!(
                    "mollifier window ({a}, {b}) escapes ({lo}, {hi})"
                )));
            }
            if a < prev_end - tol {
                return Err(Error::Domain(format!(
                    "mollifier windows overlap near {}",
                    atom.tau
                )));
            }
            prev_end = b;
            let window = atom
                .density
                .affine_rescale(n as f64, atom.tau, a.max(lo), b.min(hi))?
                .scale(n as f64);
            total = total.add(&window.extend_by_zero(lo, hi)?)?;
        }
        Ok(RegulatedFn::new(total))
    }

    /// Largest pairing difference over a battery of test functions.
    pub fn max_pairing_diff(&self, other: &Distribution, battery: &[TestFn]) -> Result<f64> {
        battery
            .par_iter()
            .map(|phi| Ok((self.pair(phi)? - other.pair(phi)?).abs()))
            .collect::<Result<Vec<f64>>>()
            .map(|v| v.into_iter().fold(0.0, f64::max))
    }

    /// Extensional equality on a battery, plus structural agreement of the parts.
    pub fn approx_eq(&self, other: &Distribution, battery: &[TestFn], tol: f64) -> Result<bool> {
        if self.max_pairing_diff(other, battery)? > tol {
            return Ok(false);
        }
        let a = self.absorb_stieltjes()?;
        let b = other.absorb_stieltjes()?;
        if a.regular.sub(&b.regular)?.max_abs_coeff() > tol {
            return Ok(false);
        }
        let diff = a.add(&b.scale(-1.0))?;
        Ok(diff.atoms.iter().all(|at| {
            at.right.abs() <= tol && at.left.abs() <= tol && at.density.max_abs_coeff() <= tol
        }))
    }
}

/// Derivative of a dynamic function of bounded variation.
///
/// The continuous Jordan part of the ordinary part becomes the Stieltjes
/// integrator; every profile contributes an atom whose density is the
/// profile's `s`-derivative, so its mass equals the jump.
pub fn derivative(f: &DynamicFn) -> Result<Distribution> {
    if let Some((tau, _)) = f.profiles().iter().find(|(_, p)| !p.is_continuous()) {
        return Err(Error::NotDifferentiable { tau: *tau });
    }
    let parts = jordan_decompose(f.ordinary());
    let atoms = f
        .profiles()
        .iter()
        .map(|(tau, p)| Atom::shaped(*tau, p.curve().derivative()))
        .filter(|a| !a.density.is_zero())
        .collect();
    let zero = PiecewisePoly::zero(f.lo(), f.hi())?;
    Distribution::from_parts(zero, parts.continuous, atoms)
}

/// `max_φ |((fg)˙, φ) − (ḟg + fġ, φ)|` over the battery.
pub fn leibniz_residual(f: &DynamicFn, g: &DynamicFn, battery: &[TestFn]) -> Result<f64> {
    let lhs = derivative(&f.multiply(g)?)?;
    let rhs = derivative(f)?
        .multiply(g)?
        .add(&derivative(g)?.multiply(f)?)?;
    lhs.max_pairing_diff(&rhs, battery)
}

/// For each element of `seq`, the largest pairing difference with `limit`.
pub fn convergence_residual(
    seq: &[Distribution],
    limit: &Distribution,
    battery: &[TestFn],
) -> Result<Vec<f64>> {
    seq.iter()
        .map(|d| d.max_pairing_diff(limit, battery))
        .collect()
}

/// Whether two values agree to the matching tolerance used throughout the crate.
pub fn values_match(a: f64, b: f64) -> bool {
    close(a, b, MATCH_TOL)
}
