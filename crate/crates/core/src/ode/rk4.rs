//! Classical fixed-step fourth-order Runge–Kutta with dense sample output.

use crate::error::{Error, Result};
use crate::piecewise::Side;

/// States sampled on the integration grid.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct SampleTable {
    pub t: Vec<f64>,
    pub x: Vec<Vec<f64>>,
}

impl SampleTable {
    pub fn len(&self) -> usize {
        self.t.len()
    }

    pub fn is_empty(&self) -> bool {
        self.t.is_empty()
    }

    pub fn first(&self) -> &[f64] {
        &self.x[0]
    }

    pub fn last(&self) -> &[f64] {
        self.x.last().expect("nonempty table")
    }

    pub fn last_t(&self) -> f64 {
        *self.t.last().expect("nonempty table")
    }
}

/// Uniform grid of `steps` steps on `[a, b]`.
pub fn uniform_grid(a: f64, b: f64, steps: usize) -> Vec<f64> {
    let h = (b - a) / steps as f64;
    let mut grid: Vec<f64> = (0..steps).map(|k| a + h * k as f64).collect();
    grid.push(b);
    grid
}

/// Grid on `[a, b]` containing every point of `knots` that lies strictly
/// inside, with each stretch between knots cut into steps no longer than
/// `(b - a) / steps`.
pub fn aligned_grid(a: f64, b: f64, knots: &[f64], steps: usize) -> Vec<f64> {
    let h = (b - a) / steps as f64;
    let tol = 1e-12 * (b - a);
    let mut stops: Vec<f64> = knots.iter().copied().filter(|&k| k > a + tol && k < b - tol).collect();
    stops.sort_by(|x, y| x.total_cmp(y));
    stops.dedup_by(|y, x| (*y - *x).abs() <= tol);
    stops.insert(0, a);
    stops.push(b);
    let mut grid = vec![a];
    for w in stops.windows(2) {
        let n = (((w[1] - w[0]) / h) - 1e-9).ceil().max(1.0) as usize;
        let step = (w[1] - w[0]) / n as f64;
        grid.extend((1..n).map(|k| w[0] + step * k as f64));
        grid.push(w[1]);
    }
    grid
}

/// Integrates `ẋ = rhs(t, x)` along `grid`.
///
/// The right-hand side receives the side from which a stage time should be
/// read: the first stage looks right of the step start, the last stage
/// looks left of the step end. Coefficients that jump at grid points are
/// therefore sampled from the correct piece.
pub fn integrate_grid<F>(rhs: F, grid: &[f64], x0: &[f64]) -> Result<SampleTable>
where
    F: Fn(f64, Side, &[f64], &mut [f64]),
{
    let n = x0.len();
    let mut table = SampleTable {
        t: Vec::with_capacity(grid.len()),
        x: Vec::with_capacity(grid.len()),
    };
    table.t.push(grid[0]);
    table.x.push(x0.to_vec());
    let mut x = x0.to_vec();
    let (mut k1, mut k2, mut k3, mut k4) = (vec![0.0; n], vec![0.0; n], vec![0.0; n], vec![0.0; n]);
    let mut tmp = vec![0.0; n];
    for w in grid.windows(2) {
        let (t, h) = (w[0], w[1] - w[0]);
        rhs(t, Side::Right, &x, &mut k1);
        for i in 0..n {
            tmp[i] = x[i] + 0.5 * h * k1[i];
        }
        rhs(t + 0.5 * h, Side::Right, &tmp, &mut k2);
        for i in 0..n {
            tmp[i] = x[i] + 0.5 * h * k2[i];
        }
        rhs(t + 0.5 * h, Side::Right, &tmp, &mut k3);
        for i in 0..n {
            tmp[i] = x[i] + h * k3[i];
        }
        rhs(w[1], Side::Left, &tmp, &mut k4);
        for i in 0..n {
            x[i] += h / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
        }
        if x.iter().any(|v| !v.is_finite()) {
            return Err(Error::Divergence { t: w[1] });
        }
        table.t.push(w[1]);
        table.x.push(x.clone());
    }
    Ok(table)
}

/// Fixed-step RK4 on `[t0, t1]` with `steps` equal steps.
pub fn rk4<F>(rhs: F, t0: f64, t1: f64, x0: &[f64], steps: usize) -> Result<SampleTable>
where
    F: Fn(f64, &[f64], &mut [f64]),
{
    if steps == 0 {
        return Err(Error::Invalid("at least one step required".into()));
    }
    integrate_grid(|t, _, x, out| rhs(t, x, out), &uniform_grid(t0, t1, steps), x0)
}
