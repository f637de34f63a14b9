//! Reproducible families of test functions and random calculus objects.
//!
//! Distributions are compared extensionally: two of them are considered
//! equal when they agree on every member of a fixed battery. The battery is
//! drawn from a seeded ChaCha stream, so every run sees the same functions.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::distribution::{Atom, Distribution, TestFn};
use crate::dynamic::{jordan_decompose, DynamicFn, Profile, RegulatedFn, J_HI, J_LO};
use crate::error::Result;
use crate::piecewise::PiecewisePoly;
use crate::poly::Poly;

pub const BATTERY_SEED: u64 = 0x5EED;
pub const BATTERY_SIZE: usize = 32;

/// Cubic Hermite piece on `[0, 1]` in local coordinates.
fn hermite(y0: f64, y1: f64, m0: f64, m1: f64, h: f64) -> Poly {
    let h00 = Poly::new(vec![1.0, 0.0, -3.0, 2.0]);
    let h10 = Poly::new(vec![0.0, 1.0, -2.0, 1.0]);
    let h01 = Poly::new(vec![0.0, 0.0, 3.0, -2.0]);
    let h11 = Poly::new(vec![0.0, 0.0, -1.0, 1.0]);
    let terms = [h00.scale(y0), h10.scale(h * m0), h01.scale(y1), h11.scale(h * m1)];
    terms.iter().fold(Poly::zero(), |acc, p| &acc + p)
}

/// Random profile from `left` to `right`: a ramp plus a cubic bump vanishing at both ends.
pub fn random_profile<R: Rng>(rng: &mut R, left: f64, right: f64) -> Profile {
    let r0 = rng.gen_range(-1.0..1.0);
    let r1 = rng.gen_range(-1.0..1.0);
    // L + (R - L)(s + 1/2) + (s² - 1/4)(r0 + r1 s)
    let ramp = Poly::linear(left + 0.5 * (right - left), right - left);
    let bump = &Poly::new(vec![-0.25, 0.0, 1.0]) * &Poly::linear(r0, r1);
    Profile::polynomial(&ramp + &bump).expect("polynomial on J")
}

fn random_poly<R: Rng>(rng: &mut R, max_degree: usize) -> Poly {
    let degree = rng.gen_range(0..=max_degree);
    Poly::new((0..=degree).map(|_| rng.gen_range(-1.0..1.0)).collect())
}

/// Test function supported in a random subinterval covering `points`.
///
/// With `jumps = false` it is a continuous piecewise cubic without profiles.
/// With `jumps = true` it jumps at every point of `points` and carries a
/// random smooth profile there.
pub fn random_test_fn<R: Rng>(
    rng: &mut R,
    lo: f64,
    hi: f64,
    points: &[f64],
    jumps: bool,
) -> Result<TestFn> {
    let len = hi - lo;
    let first = points.iter().copied().fold(hi - 0.3 * len, f64::min);
    let last = points.iter().copied().fold(lo + 0.3 * len, f64::max);
    let c = rng.gen_range(lo + 0.02 * len..(first - 0.02 * len).max(lo + 0.03 * len));
    let d = rng.gen_range((last + 0.02 * len).min(hi - 0.03 * len)..hi - 0.02 * len);

    let mut knots: Vec<f64> = points.iter().copied().filter(|p| *p > c && *p < d).collect();
    knots.push(c);
    knots.push(d);
    for _ in 0..3 {
        let t = rng.gen_range(c..d);
        if knots.iter().all(|k| (k - t).abs() >= 1e-3 * len) {
            knots.push(t);
        }
    }
    knots.sort_by(|a, b| a.total_cmp(b));

    let is_jump = |t: f64| jumps && points.iter().any(|p| (p - t).abs() < 1e-3 * len);
    // (left value, right value, slope) at every knot
    let last_knot = knots.len() - 1;
    let values: Vec<(f64, f64, f64)> = knots
        .iter()
        .enumerate()
        .map(|(k, &t)| {
            if k == 0 || k == last_knot {
                (0.0, 0.0, rng.gen_range(-2.0..2.0))
            } else {
                let v = rng.gen_range(-1.0..1.0);
                let w = if is_jump(t) { rng.gen_range(-1.0..1.0) } else { v };
                (v, w, rng.gen_range(-2.0..2.0))
            }
        })
        .collect();

    let mut breaks = vec![lo];
    let mut pieces = vec![Poly::zero()];
    for k in 0..knots.len() - 1 {
        let h = knots[k + 1] - knots[k];
        let (_, y0, m0) = values[k];
        let (y1, _, m1) = values[k + 1];
        breaks.push(knots[k]);
        pieces.push(hermite(y0, y1, m0, m1, h));
    }
    breaks.push(d);
    pieces.push(Poly::zero());
    breaks.push(hi);
    let body = PiecewisePoly::from_local(breaks, pieces)?;

    let profiles = knots
        .iter()
        .zip(&values)
        .filter(|(t, _)| is_jump(**t))
        .map(|(&t, &(l, r, _))| (t, random_profile(rng, l, r)))
        .collect();
    TestFn::new(DynamicFn::from_pw(body, profiles)?, c, d)
}

/// The standard battery: 32 test functions, every other one with jumps and
/// smooth profiles at `points`.
pub fn battery(lo: f64, hi: f64, points: &[f64], seed: u64) -> Result<Vec<TestFn>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..BATTERY_SIZE)
        .map(|k| random_test_fn(&mut rng, lo, hi, points, k % 2 == 1))
        .collect()
}

/// Continuous members of the standard battery.
pub fn continuous_battery(lo: f64, hi: f64, points: &[f64], seed: u64) -> Result<Vec<TestFn>> {
    Ok(battery(lo, hi, points, seed)?
        .into_iter()
        .filter(TestFn::is_continuous)
        .collect())
}

fn random_pw<R: Rng>(rng: &mut R, lo: f64, hi: f64, points: &[f64], max_degree: usize) -> Result<PiecewisePoly> {
    let mut breaks = vec![lo];
    breaks.extend(points.iter().copied());
    breaks.push(hi);
    let pieces = (0..breaks.len() - 1).map(|_| random_poly(rng, max_degree)).collect();
    PiecewisePoly::from_local(breaks, pieces)
}

/// Random dynamic function of bounded variation: degree ≤ 3 pieces with
/// breakpoints at `points`, and a smooth cubic profile at each of them.
pub fn random_sbv<R: Rng>(rng: &mut R, lo: f64, hi: f64, points: &[f64]) -> Result<DynamicFn> {
    let body = random_pw(rng, lo, hi, points, 3)?;
    let profiles = points
        .iter()
        .map(|&t| {
            let l = body.eval_side(t, crate::Side::Left)?;
            let r = body.eval_side(t, crate::Side::Right)?;
            Ok((t, random_profile(rng, l, r)))
        })
        .collect::<Result<Vec<_>>>()?;
    DynamicFn::from_pw(body, profiles)
}

/// Random dynamic function where some discontinuities keep the step profile
/// of the canonical embedding.
pub fn random_dynamic<R: Rng>(rng: &mut R, lo: f64, hi: f64, points: &[f64]) -> Result<DynamicFn> {
    let body = random_pw(rng, lo, hi, points, 3)?;
    let mut profiles = Vec::new();
    for &t in points {
        if rng.gen_bool(0.5) {
            let l = body.eval_side(t, crate::Side::Left)?;
            let r = body.eval_side(t, crate::Side::Right)?;
            profiles.push((t, random_profile(rng, l, r)));
        }
    }
    DynamicFn::from_pw(body, profiles)
}

/// Random density on `J`, split at `s = 0` half of the time.
pub fn random_density<R: Rng>(rng: &mut R) -> Result<PiecewisePoly> {
    if rng.gen_bool(0.5) {
        PiecewisePoly::from_local(vec![J_LO, J_HI], vec![random_poly(rng, 3)])
    } else {
        PiecewisePoly::from_local(
            vec![J_LO, 0.0, J_HI],
            vec![random_poly(rng, 3), random_poly(rng, 3)],
        )
    }
}

/// Random distribution with all three parts and one general atom per point.
pub fn random_distribution<R: Rng>(rng: &mut R, lo: f64, hi: f64, points: &[f64]) -> Result<Distribution> {
    let regular = random_pw(rng, lo, hi, points, 3)?;
    let integrator = random_pw(rng, lo, hi, points, 3)?;
    let stieltjes = jordan_decompose(&RegulatedFn::new(integrator)).continuous;
    let atoms = points
        .iter()
        .map(|&tau| {
            Ok(Atom {
                tau,
                right: rng.gen_range(-1.0..1.0),
                left: rng.gen_range(-1.0..1.0),
                density: random_density(rng)?,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    Distribution::from_parts(regular, stieltjes, atoms)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn battery_is_reproducible() {
        let a = battery(-2.0, 2.0, &[0.0, 0.5], BATTERY_SEED).unwrap();
        let b = battery(-2.0, 2.0, &[0.0, 0.5], BATTERY_SEED).unwrap();
        assert_eq!(a, b);
        assert_eq!(a.len(), BATTERY_SIZE);
        assert_eq!(a.iter().filter(|f| f.is_continuous()).count(), BATTERY_SIZE / 2);
    }

    #[test]
    fn jumping_members_have_profiles_at_points() {
        let b = battery(-2.0, 2.0, &[0.0, 0.5], BATTERY_SEED).unwrap();
        for phi in b.iter().filter(|f| !f.is_continuous()) {
            assert!(phi.body().profile_at(0.0).is_some());
            assert!(phi.body().profile_at(0.5).is_some());
            assert!(phi.body().is_sbv());
        }
    }

    #[test]
    fn continuous_members_are_continuous() {
        for phi in continuous_battery(-1.0, 3.0, &[1.0], 7).unwrap() {
            assert!(phi.body().ordinary().body().is_continuous(1e-12));
            let (c, d) = phi.support();
            assert!(c < 1.0 && d > 1.0);
        }
    }
}
