//! Cauchy problems `ẋ = f(t,x) + g(t,x)δ_τ^α, x(t0−) = x0`.
//!
//! Away from the impulse times the state follows `ẋ = f(t,x)`. At each
//! impulse the dynamic value `γ` of the solution solves the fast-scale
//! equation `γ̇(s) = g(τ, γ(s))·α(s)` on `J`, starting from `x(τ−)`, and
//! `x(τ+) = γ(1/2)`. Here `α(s)` is the vector of shape values and the
//! product is a matrix–vector product.

use rayon::prelude::*;

use super::expr::FieldExpr;
use super::rk4::{aligned_grid, integrate_grid, rk4, SampleTable};
use crate::dynamic::{Shape, J_HI, J_LO};
use crate::error::{Error, Result};
use crate::piecewise::{PiecewisePoly, Side};

/// Minimum number of RK4 steps across each mollifier window.
pub const MIN_WINDOW_STEPS: usize = 256;

/// Drift `f: (t, x) ↦ ℝⁿ`.
#[derive(Clone, Debug, PartialEq)]
pub struct VectorField {
    components: Vec<FieldExpr>,
}

impl VectorField {
    pub fn new(components: Vec<FieldExpr>) -> Result<Self> {
        let n = components.len();
        if n == 0 {
            return Err(Error::Invalid("empty vector field".into()));
        }
        if let Some(e) = components.iter().find(|e| e.max_var() > n) {
            return Err(Error::Invalid(format!("{e} uses a variable beyond x{n}")));
        }
        Ok(VectorField { components })
    }

    pub fn parse(texts: &[&str]) -> Result<Self> {
        let n = texts.len();
        VectorField::new(
            texts
                .iter()
                .map(|s| FieldExpr::parse_with_dim(s, n))
                .collect::<Result<_>>()?,
        )
    }

    pub fn zero(n: usize) -> Self {
        VectorField {
            components: vec![FieldExpr::Num(0.0); n],
        }
    }

    pub fn dim(&self) -> usize {
        self.components.len()
    }

    pub fn components(&self) -> &[FieldExpr] {
        &self.components
    }

    pub fn eval_into(&self, t: f64, x: &[f64], out: &mut [f64]) {
        for (o, e) in out.iter_mut().zip(&self.components) {
            *o = e.eval(t, x);
        }
    }
}

/// Impulse gain `g: (t, x) ↦ n×n matrix`, stored by rows.
#[derive(Clone, Debug, PartialEq)]
pub struct MatrixField {
    rows: Vec<Vec<FieldExpr>>,
}

impl MatrixField {
    pub fn new(rows: Vec<Vec<FieldExpr>>) -> Result<Self> {
        let n = rows.len();
        if n == 0 || rows.iter().any(|r| r.len() != n) {
            return Err(Error::Invalid("gain matrix must be square and nonempty".into()));
        }
        if let Some(e) = rows.iter().flatten().find(|e| e.max_var() > n) {
            return Err(Error::Invalid(format!("{e} uses a variable beyond x{n}")));
        }
        Ok(MatrixField { rows })
    }

    pub fn parse(rows: &[&[&str]]) -> Result<Self> {
        let n = rows.len();
        MatrixField::new(
            rows.iter()
                .map(|r| r.iter().map(|s| FieldExpr::parse_with_dim(s, n)).collect::<Result<_>>())
                .collect::<Result<_>>()?,
        )
    }

    pub fn dim(&self) -> usize {
        self.rows.len()
    }

    pub fn rows(&self) -> &[Vec<FieldExpr>] {
        &self.rows
    }

    pub fn entry(&self, i: usize, j: usize, t: f64, x: &[f64]) -> f64 {
        self.rows[i][j].eval(t, x)
    }

    /// `out = g(t, x)·w`.
    pub fn apply_into(&self, t: f64, x: &[f64], w: &[f64], out: &mut [f64]) {
        for (o, row) in out.iter_mut().zip(&self.rows) {
            *o = row.iter().zip(w).map(|(e, wj)| e.eval(t, x) * wj).sum();
        }
    }

    /// True when every entry is a literal zero.
    pub fn is_zero(&self) -> bool {
        self.rows.iter().flatten().all(FieldExpr::is_zero)
    }
}

/// Impulse at `τ` with one shape per state component.
#[derive(Clone, Debug, PartialEq)]
pub struct Impulse {
    pub tau: f64,
    pub shapes: Vec<Shape>,
}

/// Cauchy problem data on a finite interval `(lo, hi)`.
#[derive(Clone, Debug, PartialEq)]
pub struct ImpulsiveIvp {
    pub lo: f64,
    pub hi: f64,
    pub t0: f64,
    pub x0: Vec<f64>,
    pub f: VectorField,
    pub g: MatrixField,
    pub impulses: Vec<Impulse>,
}

impl ImpulsiveIvp {
    pub fn new(
        (lo, hi): (f64, f64),
        t0: f64,
        x0: Vec<f64>,
        f: VectorField,
        g: MatrixField,
        impulses: Vec<Impulse>,
    ) -> Result<Self> {
        let n = x0.len();
        if f.dim() != n || g.dim() != n {
            return Err(Error::Invalid(format!(
                "state has {n} components, f has {}, g is {}×{}",
                f.dim(),
                g.dim(),
                g.dim()
            )));
        }
        if !(lo < t0 && t0 < hi) {
            return Err(Error::Domain(format!("t0 = {t0} outside ({lo}, {hi})")));
        }
        let mut prev = t0;
        for (k, imp) in impulses.iter().enumerate() {
            let ordered = if k == 0 { imp.tau >= prev } else { imp.tau > prev };
            if !ordered || imp.tau >= hi {
                return Err(Error::Domain(format!(
                    "impulse times must satisfy t0 ≤ τ1 < τ2 < … < {hi}; got {}",
                    imp.tau
                )));
            }
            if imp.shapes.len() != n {
                return Err(Error::Invalid(format!(
                    "impulse at {} has {} shapes for {n} components",
                    imp.tau,
                    imp.shapes.len()
                )));
            }
            prev = imp.tau;
        }
        Ok(ImpulsiveIvp {
            lo,
            hi,
            t0,
            x0,
            f,
            g,
            impulses,
        })
    }

    pub fn dim(&self) -> usize {
        self.x0.len()
    }
}

/// Smooth stretch `ẋ = f(t, x)` from `t_from` to `t_to`.
pub fn integrate_smooth(
    f: &VectorField,
    t_from: f64,
    t_to: f64,
    x_from: &[f64],
    steps: usize,
) -> Result<SampleTable> {
    rk4(|t, x, out| f.eval_into(t, x, out), t_from, t_to, x_from, steps)
}

/// Fast-scale solution at one impulse.
#[derive(Clone, Debug, PartialEq)]
pub struct JumpRecord {
    pub tau: f64,
    /// `γ` sampled over `s ∈ J`.
    pub profile: SampleTable,
    pub x_minus: Vec<f64>,
    pub x_plus: Vec<f64>,
}

fn shape_knots(shapes: &[Shape]) -> Vec<f64> {
    shapes
        .iter()
        .flat_map(|s| s.density().interior_breakpoints().to_vec())
        .collect()
}

/// Solves `γ̇(s) = g(τ, γ(s))·α(s)` on `J` from `γ(−1/2) = x_minus`.
pub fn jump_map(
    g: &MatrixField,
    tau: f64,
    shapes: &[Shape],
    x_minus: &[f64],
    steps: usize,
) -> Result<JumpRecord> {
    let n = x_minus.len();
    if steps == 0 {
        return Err(Error::Invalid("at least one step required".into()));
    }
    if shapes.len() != n || g.dim() != n {
        return Err(Error::Invalid(format!(
            "{} shapes and a {}×{} gain for a state of {n} components",
            shapes.len(),
            g.dim(),
            g.dim()
        )));
    }
    let grid = aligned_grid(J_LO, J_HI, &shape_knots(shapes), steps);
    let rhs = |s: f64, side: Side, x: &[f64], out: &mut [f64]| {
        let alpha: Vec<f64> = shapes
            .iter()
            .map(|a| eval_clamped(a.density(), s, side))
            .collect();
        g.apply_into(tau, x, &alpha, out);
    };
    let profile = integrate_grid(rhs, &grid, x_minus)?;
    let x_plus = profile.last().to_vec();
    Ok(JumpRecord {
        tau,
        profile,
        x_minus: x_minus.to_vec(),
        x_plus,
    })
}

/// One-sided value that falls back to the other side at the domain ends.
fn eval_clamped(p: &PiecewisePoly, t: f64, side: Side) -> f64 {
    p.eval_side(t, side)
        .or_else(|_| {
            let other = match side {
                Side::Left => Side::Right,
                Side::Right => Side::Left,
            };
            p.eval_side(t, other)
        })
        .unwrap_or(0.0)
}

/// Piecewise-smooth solution with its fast-scale profiles.
#[derive(Clone, Debug, PartialEq)]
pub struct Trajectory {
    /// Smooth stretches `[t0, τ1], [τ1, τ2], …, [τK, hi]`.
    pub segments: Vec<SampleTable>,
    pub jumps: Vec<JumpRecord>,
}

impl Trajectory {
    pub fn endpoint(&self) -> &[f64] {
        self.segments.last().expect("at least one segment").last()
    }
}

fn stay_put(t: f64, x: &[f64]) -> SampleTable {
    SampleTable {
        t: vec![t],
        x: vec![x.to_vec()],
    }
}

/// Alternates smooth integration and jump maps across the impulses.
pub fn solve(ivp: &ImpulsiveIvp, steps_per_segment: usize, steps_per_jump: usize) -> Result<Trajectory> {
    let mut segments = Vec::with_capacity(ivp.impulses.len() + 1);
    let mut jumps = Vec::with_capacity(ivp.impulses.len());
    let mut t = ivp.t0;
    let mut x = ivp.x0.clone();
    for imp in &ivp.impulses {
        let seg = if imp.tau > t {
            integrate_smooth(&ivp.f, t, imp.tau, &x, steps_per_segment)?
        } else {
            stay_put(t, &x)
        };
        let record = jump_map(&ivp.g, imp.tau, &imp.shapes, seg.last(), steps_per_jump)?;
        t = imp.tau;
        x = record.x_plus.clone();
        segments.push(seg);
        jumps.push(record);
    }
    segments.push(integrate_smooth(&ivp.f, t, ivp.hi, &x, steps_per_segment)?);
    Ok(Trajectory { segments, jumps })
}

/// Regularized problem `ẋ = f(t,x) + g(t,x)·ω_m(t)` solved by one RK4 pass
/// over `[t0, hi]`, with every impulse replaced by its delta-sequence term
/// `ω_m^{α_k}(t) = m α_k(m(t − τ_k))`.
///
/// `steps` sets the nominal step `(hi − t0)/steps`; the grid is aligned with
/// the mollifier windows and the shape breakpoints.
pub fn regularized_solve(ivp: &ImpulsiveIvp, m: u32, steps: usize) -> Result<SampleTable> {
    if m == 0 || steps == 0 {
        return Err(Error::Invalid("m and steps must be positive".into()));
    }
    let (a, b) = (ivp.t0, ivp.hi);
    let h = (b - a) / steps as f64;
    let half = 0.5 / m as f64;
    let n = ivp.dim();
    let tol = 1e-12 * (ivp.hi - ivp.lo);
    let mut prev_end = f64::NEG_INFINITY;
    for imp in &ivp.impulses {
        let substeps = (2.0 * half / h + 1e-9).floor() as usize;
        if substeps < MIN_WINDOW_STEPS {
            return Err(Error::Resolution {
                tau: imp.tau,
                substeps,
                required: MIN_WINDOW_STEPS,
            });
        }
        if imp.tau - half < a - tol || imp.tau + half > b + tol {
            return Err(Error::Domain(format!(
                "mollifier window around {} escapes [{a}, {b}]",
                imp.tau
            )));
        }
        if imp.tau - half < prev_end - tol {
            return Err(Error::Domain(format!("mollifier windows overlap near {}", imp.tau)));
        }
        prev_end = imp.tau + half;
    }

    // ω_j(t) for every component j, as a piecewise polynomial on [t0, hi]
    let mut omega = Vec::with_capacity(n);
    for j in 0..n {
        let mut w = PiecewisePoly::zero(a, b)?;
        for imp in &ivp.impulses {
            let (u, v) = ((imp.tau - half).max(a), (imp.tau + half).min(b));
            let window = imp.shapes[j]
                .density()
                .affine_rescale(m as f64, imp.tau, u, v)?
                .scale(m as f64);
            w = w.add(&window.extend_by_zero(a, b)?)?;
        }
        omega.push(w);
    }
    let knots: Vec<f64> = omega
        .iter()
        .flat_map(|w| w.interior_breakpoints().to_vec())
        .collect();
    let grid = aligned_grid(a, b, &knots, steps);
    let rhs = |t: f64, side: Side, x: &[f64], out: &mut [f64]| {
        ivp.f.eval_into(t, x, out);
        let w: Vec<f64> = omega.iter().map(|p| eval_clamped(p, t, side)).collect();
        if w.iter().any(|v| *v != 0.0) {
            let mut gw = vec![0.0; x.len()];
            ivp.g.apply_into(t, x, &w, &mut gw);
            for (o, v) in out.iter_mut().zip(gw) {
                *o += v;
            }
        }
    };
    integrate_grid(rhs, &grid, &ivp.x0)
}

/// Endpoints of the first jump map under several shape vectors.
#[derive(Clone, Debug, PartialEq)]
pub struct ShapeSweep {
    pub tau: f64,
    pub x_minus: Vec<f64>,
    pub endpoints: Vec<Vec<f64>>,
    /// Largest pairwise max-norm distance between endpoints.
    pub max_deviation: f64,
}

/// Runs the jump map of the first impulse from the same `x(τ−)` for every
/// shape vector in `shapes`.
pub fn shape_sensitivity(ivp: &ImpulsiveIvp, shapes: &[Vec<Shape>], steps: usize) -> Result<ShapeSweep> {
    let Some(first) = ivp.impulses.first() else {
        return Err(Error::Invalid("problem has no impulse".into()));
    };
    let x_minus = if first.tau > ivp.t0 {
        integrate_smooth(&ivp.f, ivp.t0, first.tau, &ivp.x0, steps)?
            .last()
            .to_vec()
    } else {
        ivp.x0.clone()
    };
    let endpoints = shapes
        .par_iter()
        .map(|alpha| Ok(jump_map(&ivp.g, first.tau, alpha, &x_minus, steps)?.x_plus))
        .collect::<Result<Vec<_>>>()?;
    let mut max_deviation: f64 = 0.0;
    for (i, a) in endpoints.iter().enumerate() {
        for b in &endpoints[i + 1..] {
            let d = a.iter().zip(b).fold(0.0_f64, |m, (u, v)| m.max((u - v).abs()));
            max_deviation = max_deviation.max(d);
        }
    }
    Ok(ShapeSweep {
        tau: first.tau,
        x_minus,
        endpoints,
        max_deviation,
    })
}
