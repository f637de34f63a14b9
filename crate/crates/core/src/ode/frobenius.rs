//! Commutation test for the columns of the impulse gain.
//!
//! The jump map of `ẋ = g(t,x)δ^α` is independent of the shape vector `α`
//! when the column fields `g_{·j}(τ, ·)` pairwise commute:
//! `Σ_k ∂g_{im}/∂x_k g_{kj} = Σ_k ∂g_{ij}/∂x_k g_{km}` for all `i, j, m`.

use rayon::prelude::*;

use super::impulsive::MatrixField;

/// Step of the central differences.
pub const FD_STEP: f64 = 1e-5;
/// Residual below which the condition counts as satisfied.
pub const FROBENIUS_TOL: f64 = 1e-6;
/// Lattice points per axis.
pub const LATTICE_POINTS: usize = 5;
/// Cap on the number of lattice points.
pub const LATTICE_CAP: usize = 125;

/// `∂g_{ij}/∂x_k` at `(t, x)`.
fn partial(g: &MatrixField, i: usize, j: usize, k: usize, t: f64, x: &[f64]) -> f64 {
    let mut xp = x.to_vec();
    let mut xm = x.to_vec();
    xp[k] += FD_STEP;
    xm[k] -= FD_STEP;
    (g.entry(i, j, t, &xp) - g.entry(i, j, t, &xm)) / (2.0 * FD_STEP)
}

/// `max_{i,j,m} |[g_{·j}, g_{·m}]_i|` at `(t, x)`.
pub fn frobenius_residual(g: &MatrixField, t: f64, x: &[f64]) -> f64 {
    let n = g.dim();
    let gv: Vec<Vec<f64>> = (0..n)
        .map(|i| (0..n).map(|j| g.entry(i, j, t, x)).collect())
        .collect();
    // d[i][j][k] = ∂g_ij/∂x_k
    let d: Vec<Vec<Vec<f64>>> = (0..n)
        .map(|i| {
            (0..n)
                .map(|j| (0..n).map(|k| partial(g, i, j, k, t, x)).collect())
                .collect()
        })
        .collect();
    let mut worst: f64 = 0.0;
    for di in &d {
        for j in 0..n {
            for m in j + 1..n {
                let lhs: f64 = (0..n).map(|k| di[m][k] * gv[k][j]).sum();
                let rhs: f64 = (0..n).map(|k| di[j][k] * gv[k][m]).sum();
                worst = worst.max((lhs - rhs).abs());
            }
        }
    }
    worst
}

#[derive(Clone, Debug, PartialEq)]
pub struct FrobeniusReport {
    /// Lattice points `(t, x)` that were checked.
    pub points: usize,
    pub max_residual: f64,
    /// Point where the maximum was attained.
    pub worst_t: f64,
    pub worst_x: Vec<f64>,
    pub satisfied: bool,
}

/// Checks the condition on a lattice over `t ∈ t_range` and the box
/// `x_k ∈ x_box[k]`, with up to five points per axis and at most 125 points.
pub fn frobenius_check(g: &MatrixField, t_range: (f64, f64), x_box: &[(f64, f64)]) -> FrobeniusReport {
    let axes: Vec<(f64, f64)> = std::iter::once(t_range).chain(x_box.iter().copied()).collect();
    let mut per_axis = LATTICE_POINTS;
    while per_axis > 1 && per_axis.pow(axes.len() as u32) > LATTICE_CAP {
        per_axis -= 1;
    }
    let coords: Vec<Vec<f64>> = axes
        .iter()
        .map(|&(a, b)| {
            if per_axis == 1 || a == b {
                vec![0.5 * (a + b)]
            } else {
                (0..per_axis)
                    .map(|k| a + (b - a) * k as f64 / (per_axis - 1) as f64)
                    .collect()
            }
        })
        .collect();
    let total: usize = coords.iter().map(Vec::len).product();
    let lattice: Vec<Vec<f64>> = (0..total)
        .map(|mut idx| {
            coords
                .iter()
                .map(|c| {
                    let v = c[idx % c.len()];
                    idx /= c.len();
                    v
                })
                .collect()
        })
        .collect();
    let (max_residual, worst) = lattice
        .par_iter()
        .map(|p| (frobenius_residual(g, p[0], &p[1..]), p))
        .reduce_with(|a, b| if b.0 > a.0 { b } else { a })
        .map(|(r, p)| (r, p.clone()))
        .unwrap_or((0.0, vec![0.5 * (t_range.0 + t_range.1)]));
    FrobeniusReport {
        points: total,
        max_residual,
        worst_t: worst[0],
        worst_x: worst[1..].to_vec(),
        satisfied: max_residual <= FROBENIUS_TOL,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn diagonal_linear_commutes() {
        let g = MatrixField::parse(&[&["0.3*x1", "0"], &["0", "0 - 0.2*x2"]]).unwrap();
        let r = frobenius_check(&g, (0.0, 1.0), &[(-1.0, 1.0), (-1.0, 1.0)]);
        assert!(r.satisfied, "{r:?}");
        assert_eq!(r.points, 125);
    }

    #[test]
    fn triangular_field_fails() {
        // columns (1, 0) and (0, x1): bracket is (0, 1)
        let g = MatrixField::parse(&[&["1", "0"], &["0", "x1"]]).unwrap();
        let res = frobenius_residual(&g, 0.0, &[0.3, -0.7]);
        assert!((res - 1.0).abs() < 1e-8);
        assert!(!frobenius_check(&g, (0.0, 1.0), &[(-1.0, 1.0), (-1.0, 1.0)]).satisfied);
    }

    #[test]
    fn scalar_gain_always_commutes() {
        let g = MatrixField::parse(&[&["sin(x1)*exp(t)"]]).unwrap();
        let r = frobenius_check(&g, (0.0, 2.0), &[(-3.0, 3.0)]);
        assert_eq!(r.max_residual, 0.0);
        assert_eq!(r.points, 25);
    }

    #[test]
    fn lattice_is_capped() {
        let g = MatrixField::parse(&[&["1", "0", "0"], &["0", "1", "0"], &["0", "0", "1"]]).unwrap();
        let r = frobenius_check(&g, (0.0, 1.0), &[(0.0, 1.0); 3]);
        assert!(r.points <= LATTICE_CAP);
        assert!(r.satisfied);
    }
}
