//! Browser bindings for the demo page: a witness heatmap, the plateau
//! profile of a hull vertex, and the distance between two measures.
//!
//! Measures cross the boundary as the same JSON the CLI reads.

use levy_prokhorov::reconstruct::{exposing_direction, witness_profile, KnownWitness, ProfileGrid};
use levy_prokhorov::{lp_distance as distance, witness, DiscreteMeasure, Error, Method, Point};
use serde_json::json;
use wasm_bindgen::prelude::*;

fn js(e: Error) -> JsError {
    JsError::new(&e.to_string())
}

fn measure(text: &str) -> Result<DiscreteMeasure, JsError> {
    DiscreteMeasure::from_json(text).map_err(js)
}

/// W(x) = π(δ_x, μ) on an `n × n` grid over `[lo, hi]²`, row-major with
/// `y` increasing down the rows. Planar measures only.
#[wasm_bindgen]
pub fn witness_field(measure_json: &str, lo: f64, hi: f64, n: usize) -> Result<Vec<f64>, JsError> {
    let mu = measure(measure_json)?;
    if mu.space().dim() != Some(2) {
        return Err(JsError::new("heatmap needs a measure on the plane"));
    }
    if n < 2 || n > 400 || !(hi > lo) {
        return Err(JsError::new("grid must have 2..=400 points per axis and lo < hi"));
    }
    let at = |k: usize| lo + (hi - lo) * k as f64 / (n - 1) as f64;
    let mut out = Vec::with_capacity(n * n);
    for i in 0..n {
        for j in 0..n {
            out.push(witness(&mu, &Point::Coords(vec![at(j), at(i)])).map_err(js)?);
        }
    }
    Ok(out)
}

/// Witness profile along a verified exposing ray from atom `atom`, as JSON:
/// `{samples: [[t, W]…], breakpoint, plateau, lambda_hat, weight, direction}`.
#[wasm_bindgen]
pub fn plateau_profile(measure_json: &str, atom: usize) -> Result<String, JsError> {
    let mu = measure(measure_json)?;
    let apex = mu
        .atoms()
        .get(atom)
        .ok_or_else(|| JsError::new(&format!("no atom {atom}")))?;
    let others: Vec<Point> = mu.points().filter(|p| **p != apex.point).cloned().collect();
    let ray = exposing_direction(mu.space(), &apex.point, &others).map_err(js)?;
    let prof = witness_profile(&KnownWitness { measure: &mu, s: 1.0 }, &ray, ProfileGrid::for_scale(1.0))
        .map_err(js)?;
    Ok(json!({
        "samples": prof.samples,
        "breakpoint": prof.breakpoint,
        "plateau": prof.plateau_value,
        "lambda_hat": prof.lambda_hat,
        "weight": apex.weight,
        "direction": prof.ray.direction,
    })
    .to_string())
}

/// π(μ, ν) by `"brute"`, `"flow"` or `"both"` (cross-checked).
#[wasm_bindgen]
pub fn lp_distance(mu_json: &str, nu_json: &str, method: &str) -> Result<f64, JsError> {
    let method: Method = method.parse().map_err(js)?;
    let (mu, nu) = (measure(mu_json)?, measure(nu_json)?);
    Ok(distance(&mu, &nu, method).map_err(js)?.value)
}
