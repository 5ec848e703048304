//! Browser bindings for the static demo page in `www/`. Every export is a
//! plain function of numbers and strings, so the same code is tested natively.

use std::f64::consts::TAU;

use projflow_core::curvature::gaussian_curvature;
use projflow_core::finsler::{decomposition_forms, FinslerMetricSpec, ProjectivePoint};
use projflow_core::flows::{registry, run_flow, FlowConfig};
use projflow_core::gridcore::{ChartGrid, CP1_HALF_WIDTH};
use projflow_core::{metrics, C64};
use wasm_bindgen::prelude::*;

/// Largest grid side accepted from the page.
pub const MAX_SIDE: usize = 257;
/// Base grid of the fiber Ψ map.
const FIBER_BASE_N: usize = 32;

fn side(n: usize) -> Result<usize, String> {
    if (8..=MAX_SIDE).contains(&n) {
        Ok(n)
    } else {
        Err(format!("grid side {n} outside 8..={MAX_SIDE}"))
    }
}

/// Registry as JSON: id, description, kind and default t_end of every preset.
#[wasm_bindgen(js_name = presetsJson)]
pub fn presets_json() -> String {
    let list: Vec<serde_json::Value> = registry()
        .into_iter()
        .map(|p| serde_json::json!({ "id": p.id, "description": p.description, "kind": p.kind, "t_end": p.defaults.t_end }))
        .collect();
    serde_json::Value::Array(list).to_string()
}

/// Gaussian curvature on an n × n grid, row-major in (x, y). `surface` is
/// "torus" for g = e^{amp·cos x} on the flat torus, or "cp1" for the
/// Fubini-Study chart, where `amp` is ignored and nodes without a full
/// stencil are NaN.
#[wasm_bindgen(js_name = curvatureMap)]
pub fn curvature_map(surface: &str, amp: f64, n: usize) -> Result<Vec<f64>, String> {
    let n = side(n)?;
    let (grid, g) = match surface {
        "torus" => {
            let grid = ChartGrid::torus(1, n, TAU).map_err(|e| e.to_string())?;
            let g = metrics::conformal_torus(&grid, amp).map_err(|e| e.to_string())?;
            (grid, g)
        }
        "cp1" => {
            let grid = ChartGrid::cp1_chart(0, n, CP1_HALF_WIDTH).map_err(|e| e.to_string())?;
            let g = metrics::fubini_study(&grid).map_err(|e| e.to_string())?;
            (grid, g)
        }
        _ => return Err(format!("unknown surface {surface:?} (torus or cp1)")),
    };
    let k = gaussian_curvature(&g).map_err(|e| e.to_string())?;
    let strides = grid.strides();
    Ok((0..grid.len())
        .map(|i| {
            let full = (0..2).all(|ax| {
                grid.stencil_offsets(&grid.coords(i), ax, &strides)
                    .is_some()
            });
            if full {
                k.values[i].re
            } else {
                f64::NAN
            }
        })
        .collect())
}

/// Runs a preset to `t_end` and returns the monitored minimum as
/// [t₀, m₀, t₁, m₁, …].
#[wasm_bindgen(js_name = positivitySeries)]
pub fn positivity_series(preset: &str, t_end: f64) -> Result<Vec<f64>, String> {
    let cfg = FlowConfig {
        t_end,
        ..FlowConfig::from_preset(preset).map_err(|e| e.to_string())?
    };
    let report = run_flow(&cfg).map_err(|e| e.to_string())?;
    if let Some(m) = &report.summary.message {
        return Err(format!(
            "{:?} at t = {}: {m}",
            report.summary.stop_reason, report.summary.stop_time
        ));
    }
    Ok(report
        .rows
        .iter()
        .flat_map(|r| [r.t, r.min_value])
        .collect())
}

/// −Ψ of the perturbed Finsler metric G = H + ε·Q/H at the fiber points
/// [w : 1], w ∈ [−half_width, half_width]², at the base point (x, 0);
/// n × n values, row-major in (Re w, Im w). Fails when ε breaks
/// pseudoconvexity.
#[wasm_bindgen(js_name = fiberPsiMap)]
pub fn fiber_psi_map(x: f64, epsilon: f64, n: usize, half_width: f64) -> Result<Vec<f64>, String> {
    let n = side(n)?;
    if !(half_width > 0.0 && half_width.is_finite()) {
        return Err(format!("half_width = {half_width} must be positive"));
    }
    let grid = ChartGrid::torus(1, FIBER_BASE_N, TAU).map_err(|e| e.to_string())?;
    let h = metrics::anisotropic_rank2(&grid, 0.1, 0.05).map_err(|e| e.to_string())?;
    let spec = FinslerMetricSpec::perturbed_hermitian(h, epsilon).map_err(|e| e.to_string())?;
    let ix = ((x.rem_euclid(TAU) / grid.axes[0].spacing).round() as usize) % FIBER_BASE_N;
    let node = grid.index(&[ix, 0]);
    let step = 2.0 * half_width / (n - 1) as f64;
    let mut out = Vec::with_capacity(n * n);
    for i in 0..n {
        for j in 0..n {
            let w = C64::new(-half_width + i as f64 * step, -half_width + j as f64 * step);
            let p = ProjectivePoint::from_vector(node, &[w, C64::new(1.0, 0.0)])
                .map_err(|e| e.to_string())?;
            let d = decomposition_forms(&spec, &p).map_err(|e| e.to_string())?;
            out.push(-d.psi[(0, 0)].re);
        }
    }
    Ok(out)
}
