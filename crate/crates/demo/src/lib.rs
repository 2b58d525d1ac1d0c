//! Browser bindings for three views: the smallest kernel eigenvalue around
//! the circle, the numerical range boundary, and `w_rho` as a function of
//! `rho`. Each binding takes a matrix in the JSON matrix format and returns
//! a JSON string; the plain functions below carry the logic so they can be
//! tested natively.

use rhoharnack::kernel::margin_profile;
use rhoharnack::linalg::io;
use rhoharnack::radii::rho_radius;
use rhoharnack::spectral::numerical_range_sweep;
use rhoharnack::{Tolerances, TorusGrid};
use serde::Serialize;
use wasm_bindgen::prelude::*;

/// Largest matrix the page accepts; larger inputs make the sliders sluggish.
pub const MAX_DIM: usize = 8;

#[derive(Serialize)]
struct MarginCurve {
    rho: f64,
    theta: Vec<f64>,
    min_eig: Vec<f64>,
    kernel_dim: Vec<usize>,
}

#[derive(Serialize)]
struct RangeBoundary {
    re: Vec<f64>,
    im: Vec<f64>,
    on_torus: Vec<bool>,
    numerical_radius: f64,
}

#[derive(Serialize)]
struct RadiusCurve {
    rho: Vec<f64>,
    w: Vec<f64>,
}

fn parse(matrix_json: &str) -> Result<rhoharnack::ComplexMatrix, String> {
    let t = io::from_json_str(matrix_json).map_err(|e| e.to_string())?;
    if t.dim() > MAX_DIM {
        return Err(format!("the demo handles matrices up to {MAX_DIM}x{MAX_DIM}"));
    }
    Ok(t)
}

fn to_json<T: Serialize>(value: &T) -> String {
    serde_json::to_string(value).expect("plain data serializes")
}

/// Smallest eigenvalue of the kernel at `points` angles on the circle of radius `r`.
pub fn margin_curve_json(matrix_json: &str, rho: f64, r: f64, points: usize) -> Result<String, String> {
    let t = parse(matrix_json)?;
    let grid = TorusGrid::new(points).map_err(|e| e.to_string())?;
    let rows = margin_profile(&t, rho, r, grid, &Tolerances::default()).map_err(|e| e.to_string())?;
    Ok(to_json(&MarginCurve {
        rho,
        theta: rows.iter().map(|row| row.theta).collect(),
        min_eig: rows.iter().map(|row| row.min_eig).collect(),
        kernel_dim: rows.iter().map(|row| row.kernel_dim).collect(),
    }))
}

/// Support points of the numerical range, one per angle.
pub fn range_boundary_json(matrix_json: &str, angles: usize) -> Result<String, String> {
    let t = parse(matrix_json)?;
    if angles < 16 {
        return Err("at least 16 angles are needed".into());
    }
    let points = numerical_range_sweep(&t, angles, Tolerances::default().boundary_tol);
    let numerical_radius = points.iter().map(|p| p.re.hypot(p.im)).fold(0.0, f64::max);
    Ok(to_json(&RangeBoundary {
        re: points.iter().map(|p| p.re).collect(),
        im: points.iter().map(|p| p.im).collect(),
        on_torus: points.iter().map(|p| p.on_torus).collect(),
        numerical_radius,
    }))
}

/// `w_rho(T)` at `steps` values of `rho` spread evenly over `[rho_min, rho_max]`.
pub fn radius_curve_json(matrix_json: &str, rho_min: f64, rho_max: f64, steps: usize) -> Result<String, String> {
    let t = parse(matrix_json)?;
    if !(rho_min >= 1.0 && rho_max > rho_min && (2..=64).contains(&steps)) {
        return Err("need 1 <= rho_min < rho_max and 2 to 64 steps".into());
    }
    let grid = TorusGrid::new(256).map_err(|e| e.to_string())?;
    let tol = Tolerances {
        radius_tol: 1e-4,
        ..Tolerances::default()
    };
    let rho: Vec<f64> = (0..steps)
        .map(|k| rho_min + (rho_max - rho_min) * k as f64 / (steps - 1) as f64)
        .collect();
    let w = rho
        .iter()
        .map(|&r| rho_radius(&t, r, grid, &tol).map(|rep| rep.value))
        .collect::<Result<Vec<_>, _>>()
        .map_err(|e| e.to_string())?;
    Ok(to_json(&RadiusCurve { rho, w }))
}

#[wasm_bindgen]
pub fn kernel_margin_curve(matrix_json: &str, rho: f64, r: f64, points: usize) -> Result<String, JsValue> {
    margin_curve_json(matrix_json, rho, r, points).map_err(|e| JsValue::from_str(&e))
}

#[wasm_bindgen]
pub fn numerical_range(matrix_json: &str, angles: usize) -> Result<String, JsValue> {
    range_boundary_json(matrix_json, angles).map_err(|e| JsValue::from_str(&e))
}

#[wasm_bindgen]
pub fn radius_curve(matrix_json: &str, rho_min: f64, rho_max: f64, steps: usize) -> Result<String, JsValue> {
    radius_curve_json(matrix_json, rho_min, rho_max, steps).map_err(|e| JsValue::from_str(&e))
}
