//! Browser bindings for three interactive views:
//! the step-times-delta product as the shape tilts, delta-sequence
//! mollifiers as `n` grows, and the jump of a non-commuting system as the
//! impulse shapes tilt against each other.
//!
//! The plain functions return `Result<_, String>` and are usable natively;
//! the `#[wasm_bindgen]` wrappers turn errors into JavaScript exceptions.

use wasm_bindgen::prelude::*;

use dyndist::ode::{jump_map, MatrixField};
use dyndist::{Distribution, DynamicFn, Poly, Profile, Shape, Side};

const LO: f64 = -1.0;
const HI: f64 = 1.0;

/// `1 + k s` on `J`; its mass is 1 for every `k`.
fn tilted(k: f64) -> Result<Shape, String> {
    Shape::polynomial(Poly::new(vec![1.0, k])).map_err(|e| e.to_string())
}

/// Product of the Heaviside step (step profile at 0) with `δ_0^α`,
/// `α(s) = 1 + (8c − 4)s`, so that the right mass of `α` is `c`.
///
/// Returns `[mass, s_0, v_0, s_1, v_1, ...]` with the product density
/// sampled at `samples` points of `J`, one-sided at the split `s = 0`.
pub fn step_product(c: f64, samples: usize) -> Result<Vec<f64>, String> {
    let theta = DynamicFn::heaviside(LO, HI, 0.0, Profile::step(0.0, 1.0)).map_err(|e| e.to_string())?;
    let delta = Distribution::delta(LO, HI, 0.0, &tilted(8.0 * c - 4.0)?).map_err(|e| e.to_string())?;
    let prod = delta.multiply(&theta).map_err(|e| e.to_string())?;
    let atom = &prod.atoms()[0];
    let mut out = vec![atom.mass()];
    for (s, side) in grid_on_j(samples) {
        out.push(s);
        out.push(atom.density.eval_side(s, side).map_err(|e| e.to_string())?);
    }
    Ok(out)
}

fn grid_on_j(samples: usize) -> Vec<(f64, Side)> {
    let n = samples.max(2);
    (0..n)
        .map(|k| {
            let s = -0.5 + k as f64 / (n - 1) as f64;
            (s, if k + 1 == n { Side::Left } else { Side::Right })
        })
        .collect()
}

/// Mollifier `n α(n t)` of `δ_0^α` with `α(s) = 1 + k s`, sampled on
/// `[-1, 1]` as `[t_0, v_0, t_1, v_1, ...]`.
pub fn mollifier(k: f64, n: u32, samples: usize) -> Result<Vec<f64>, String> {
    if n < 1 {
        return Err("n must be at least 1".into());
    }
    let delta = Distribution::delta(LO, HI, 0.0, &tilted(k)?).map_err(|e| e.to_string())?;
    let omega = delta.mollify(n).map_err(|e| e.to_string())?;
    Ok(omega.body().sample(samples).into_iter().flat_map(|(t, v)| [t, v]).collect())
}

/// Jump endpoints from `x(τ−) = (1, 1)` under the shape vector
/// `(1 + k s, 1 − k s)` for two gains: the non-commuting columns
/// `(1, 0), (0, x1)` and the commuting diagonal `diag(0.3 x1, −0.2 x2)`.
///
/// Returns `[x1, x2, y1, y2]`: non-commuting endpoint, then commuting one.
pub fn jump_endpoints(k: f64, steps: usize) -> Result<Vec<f64>, String> {
    let shapes = [tilted(k)?, tilted(-k)?];
    let mut out = Vec::with_capacity(4);
    for rows in [
        [["1", "0"], ["0", "x1"]],
        [["0.3*x1", "0"], ["0", "0 - 0.2*x2"]],
    ] {
        let g = MatrixField::parse(&[&rows[0], &rows[1]]).map_err(|e| e.to_string())?;
        let rec = jump_map(&g, 0.0, &shapes, &[1.0, 1.0], steps.max(1)).map_err(|e| e.to_string())?;
        out.extend(rec.x_plus);
    }
    Ok(out)
}

#[wasm_bindgen(js_name = stepProduct)]
pub fn step_product_js(c: f64, samples: usize) -> Result<Vec<f64>, JsError> {
    step_product(c, samples).map_err(|e| JsError::new(&e))
}

#[wasm_bindgen(js_name = mollifier)]
pub fn mollifier_js(k: f64, n: u32, samples: usize) -> Result<Vec<f64>, JsError> {
    mollifier(k, n, samples).map_err(|e| JsError::new(&e))
}

#[wasm_bindgen(js_name = jumpEndpoints)]
pub fn jump_endpoints_js(k: f64, steps: usize) -> Result<Vec<f64>, JsError> {
    jump_endpoints(k, steps).map_err(|e| JsError::new(&e))
}
