//! Browser bindings for the interactive demo page in `www/`.
//!
//! Every export returns a flat `Float64Array`; the layouts are documented on
//! the plain functions below, which are also what the native tests exercise.

// `!(x > 0.0)` is used on purpose so NaN fails validation
#![allow(clippy::neg_cmp_op_on_partial_ord)]

use nalgebra::DVector;
use nwidth_core::bounds::corollary1_bound;
use nwidth_core::models::{beam_default_x0, beam_model, BeamSpec};
use nwidth_core::reachset::{
    compare_report, BasisFamily, BoundFamily, CompareOptions, ControlSet, DirectionSelection, PropagationMethod,
};
use nwidth_core::widths::{width_profile, SnapshotCloud};
use wasm_bindgen::prelude::*;

/// Width profile of a planar cloud given as interleaved `x, y` coordinates.
///
/// Layout: `[lin0, lin1, lin2, aff0, aff1, aff2, ox, oy, dx, dy]` where
/// `(ox, oy) + t (dx, dy)` is the best affine line found.
pub fn planar_widths(xy: &[f64]) -> Result<Vec<f64>, String> {
    if xy.is_empty() || !xy.len().is_multiple_of(2) {
        return Err("expected a non-empty list of x, y pairs".into());
    }
    let points = xy.chunks(2).map(DVector::from_column_slice).collect();
    let cloud = SnapshotCloud::new(points, "canvas").map_err(|e| e.to_string())?;
    let profile = width_profile(&cloud, 2).map_err(|e| e.to_string())?;
    let mut out = profile.linear();
    out.extend(profile.affine());
    let line = &profile.entries[1].affine_subspace;
    out.extend(line.offset().iter());
    match line.basis().first() {
        Some(d) => out.extend(d.iter()),
        None => out.extend([0.0, 0.0]),
    }
    Ok(out)
}

/// Full-segment beam bound sampled on `points` horizons in `(0, t_max]`.
///
/// Layout: `[T_0, bound_0, T_1, bound_1, ...]`; the bound is NaN where the
/// hypothesis `sqrt(T) r / a < 1` fails.
pub fn bound_curve(
    stiffness: f64,
    x0_norm: f64,
    r: f64,
    d_nk: f64,
    t_max: f64,
    points: usize,
) -> Result<Vec<f64>, String> {
    if points == 0 || !(t_max > 0.0) {
        return Err("need at least one point and a positive horizon".into());
    }
    let mut out = Vec::with_capacity(2 * points);
    for i in 1..=points {
        let t = t_max * i as f64 / points as f64;
        let report = corollary1_bound(stiffness, x0_norm, t, r, d_nk).map_err(|e| e.to_string())?;
        out.push(t);
        out.push(report.value.unwrap_or(f64::NAN));
    }
    Ok(out)
}

/// Sampled reach report for the full-segment beam started in its first mode.
///
/// Layout: `[q, n_0, residual_0, width_0, bound_0, n_1, ...]` with NaN bounds
/// outside the valid regime.
pub fn beam_reach(
    n_modes: usize,
    horizon: f64,
    r: f64,
    m: usize,
    samples: usize,
    seed: u64,
) -> Result<Vec<f64>, String> {
    let spec = BeamSpec::full_segment(std::f64::consts::PI, 1.0, n_modes).map_err(|e| e.to_string())?;
    let model = beam_model(&spec).map_err(|e| e.to_string())?;
    let k = ControlSet::new(horizon, 32, BasisFamily::Legendre, m, r, samples, seed).map_err(|e| e.to_string())?;
    let options = CompareOptions {
        n_max: m + 1,
        method: PropagationMethod::Oracle,
        bound: BoundFamily::Corollary1 { a: spec.stiffness },
        selection: DirectionSelection::Greedy,
    };
    let report = compare_report(&model, &beam_default_x0(&spec), &k, &options).map_err(|e| e.to_string())?;
    let mut out = vec![report.q];
    for row in &report.rows {
        out.extend([
            row.n as f64,
            row.constructive_residual,
            row.affine_width_est,
            row.bound.value.unwrap_or(f64::NAN),
        ]);
    }
    Ok(out)
}

#[wasm_bindgen(js_name = planarWidths)]
pub fn planar_widths_js(xy: &[f64]) -> Result<Vec<f64>, JsError> {
    planar_widths(xy).map_err(|e| JsError::new(&e))
}

#[wasm_bindgen(js_name = boundCurve)]
pub fn bound_curve_js(
    stiffness: f64,
    x0_norm: f64,
    r: f64,
    d_nk: f64,
    t_max: f64,
    points: usize,
) -> Result<Vec<f64>, JsError> {
    bound_curve(stiffness, x0_norm, r, d_nk, t_max, points).map_err(|e| JsError::new(&e))
}

#[wasm_bindgen(js_name = beamReach)]
pub fn beam_reach_js(
    n_modes: usize,
    horizon: f64,
    r: f64,
    m: usize,
    samples: usize,
    seed: u64,
) -> Result<Vec<f64>, JsError> {
    beam_reach(n_modes, horizon, r, m, samples, seed).map_err(|e| JsError::new(&e))
}
