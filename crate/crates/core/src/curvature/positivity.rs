use serde::{Deserialize, Serialize};

use super::chern::ChernCurvatureField;
use crate::finsler::{chart_log_hessian, FinslerMetricSpec, ProjectivePoint};
use crate::gridcore::sampling::sphere_direction;
use crate::gridcore::{eigen_pencil, min_eigen_pencil, pair, HermitianMatrixField, Mat};
use crate::{Error, Result, C64};

/// Values ≥ −SEMIPOSITIVE_REL·field_scale count as nonnegative.
pub const SEMIPOSITIVE_REL: f64 = 1e-6;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ProbeKind {
    Griffiths,
    Bisectional,
    OneoneForm,
}

/// Where a probe attained its minimum. Directions are complex component lists.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct Argmin {
    pub chart: String,
    pub chart_index: usize,
    pub node: usize,
    /// Fiber direction X (griffiths) or fiber vector v (oneone form).
    pub x: Vec<C64>,
    /// Base direction Y (griffiths) or the minimizing tangent vector U on P(E*).
    pub y: Vec<C64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PositivityReport {
    pub probe: ProbeKind,
    pub samples: usize,
    pub min_value: f64,
    pub argmin: Argmin,
    pub field_scale: f64,
    pub time: Option<f64>,
}

impl PositivityReport {
    pub fn is_semipositive(&self) -> bool {
        self.min_value >= -SEMIPOSITIVE_REL * self.field_scale.max(f64::MIN_POSITIVE)
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }
}

/// Sampling density of the positivity probes.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ProbeConfig {
    pub base_samples: usize,
    pub fiber_samples: usize,
    pub refine_iterations: usize,
    /// Start index into the low-discrepancy direction sequence; runs derive it from their seed.
    #[serde(default)]
    pub sequence_offset: u64,
}

impl Default for ProbeConfig {
    fn default() -> Self {
        ProbeConfig {
            base_samples: 256,
            fiber_samples: 256,
            refine_iterations: 50,
            sequence_offset: 0,
        }
    }
}

/// R(X, X̄, Y, Ȳ) / (|X|²_h |Y|²_g).
pub fn griffiths_value(
    r: &ChernCurvatureField,
    h: &HermitianMatrixField,
    g: &HermitianMatrixField,
    node: usize,
    x: &[C64],
    y: &[C64],
) -> f64 {
    let num = r.pairing(node, x, y).re;
    num / (pair(&h.matrix(node), x, x).re * pair(&g.matrix(node), y, y).re)
}

/// Σ_{αβ} R_{αβ̄} Y^α Ȳ^β as an r×r matrix.
fn contract_base(r: &ChernCurvatureField, node: usize, y: &[C64]) -> Mat {
    let n = r.base_dim;
    let mut m = Mat::zeros(r.rank, r.rank);
    for a in 0..n {
        for b in 0..n {
            m += r.block(node, a, b) * (y[a] * y[b].conj());
        }
    }
    m
}

/// Best fiber direction for fixed Y: X = conj(eigenvector) of the pencil (R_Y, h).
fn fiber_min(
    r: &ChernCurvatureField,
    hm: &Mat,
    gm: &Mat,
    node: usize,
    y: &[C64],
) -> Result<(f64, Vec<C64>)> {
    let (vals, vecs) = eigen_pencil(&contract_base(r, node, y), hm)?;
    let x: Vec<C64> = vecs.column(0).iter().map(|z| z.conj()).collect();
    Ok((vals[0] / pair(gm, y, y).re, x))
}

/// Best base direction for fixed X via the pencil (C, g), C_{αβ} = R_{αβ̄}(X, X̄)/|X|²_h.
fn base_min(
    r: &ChernCurvatureField,
    hm: &Mat,
    gm: &Mat,
    node: usize,
    x: &[C64],
) -> Result<Vec<C64>> {
    let n = r.base_dim;
    let hx = pair(hm, x, x).re;
    let c = Mat::from_fn(n, n, |a, b| pair(&r.block(node, a, b), x, x) / hx);
    let (_, vecs) = eigen_pencil(&c, gm)?;
    Ok(vecs.column(0).iter().map(|z| z.conj()).collect())
}

/// One chart of a Griffiths probe.
pub struct GriffithsChart<'a> {
    pub curvature: &'a ChernCurvatureField,
    pub h: &'a HermitianMatrixField,
    pub g: &'a HermitianMatrixField,
}

/// Minimum of R(X, X̄, Y, Ȳ) over unit X (w.r.t. h) and Y (w.r.t. g) at every
/// active node. The fiber minimum is exact (pencil); base directions are
/// sampled on S^{2n−1} and refined by alternating exact minimization.
pub fn griffiths_min(
    r: &ChernCurvatureField,
    h: &HermitianMatrixField,
    g: &HermitianMatrixField,
    cfg: &ProbeConfig,
) -> Result<PositivityReport> {
    griffiths_min_charts(
        &[GriffithsChart { curvature: r, h, g }],
        ProbeKind::Griffiths,
        cfg,
    )
}

pub fn griffiths_min_charts(
    charts: &[GriffithsChart],
    probe: ProbeKind,
    cfg: &ProbeConfig,
) -> Result<PositivityReport> {
    let mut best: Option<(f64, Argmin)> = None;
    let mut samples = 0;
    let mut scale: f64 = 0.0;
    for (ci, ch) in charts.iter().enumerate() {
        let r = ch.curvature;
        let grid = &r.grid;
        let n = r.base_dim;
        for node in 0..grid.len() {
            if !r.valid[node] || !grid.is_active(node) {
                continue;
            }
            for a in 0..n {
                for b in 0..n {
                    scale = scale.max(
                        r.block(node, a, b)
                            .iter()
                            .map(|z| z.norm())
                            .fold(0.0, f64::max),
                    );
                }
            }
            let hm = ch.h.matrix(node);
            let gm = ch.g.matrix(node);
            let (x, y) = if n == 1 {
                samples += 1;
                let y = vec![C64::new(1.0, 0.0)];
                (fiber_min(r, &hm, &gm, node, &y)?.1, y)
            } else {
                let mut best_s = (f64::INFINITY, 0);
                for s in 0..cfg.base_samples {
                    let ys = sphere_direction(s as u64 + cfg.sequence_offset, n, 3);
                    let m = contract_base(r, node, &ys);
                    let v = min_eigen_pencil(&m, &hm)? / pair(&gm, &ys, &ys).re;
                    if v < best_s.0 {
                        best_s = (v, s);
                    }
                }
                samples += cfg.base_samples;
                let mut y = sphere_direction(best_s.1 as u64 + cfg.sequence_offset, n, 3);
                let (mut val, mut x) = fiber_min(r, &hm, &gm, node, &y)?;
                for _ in 0..cfg.refine_iterations {
                    let y2 = base_min(r, &hm, &gm, node, &x)?;
                    let (v2, x2) = fiber_min(r, &hm, &gm, node, &y2)?;
                    if !(v2 < val - 1e-15 * val.abs().max(1.0)) {
                        break;
                    }
                    (val, x, y) = (v2, x2, y2);
                }
                (x, y)
            };
            let exact = griffiths_value(r, ch.h, ch.g, node, &x, &y);
            if best.as_ref().is_none_or(|(b, _)| exact < *b) {
                best = Some((
                    exact,
                    Argmin {
                        chart: grid.chart_id.clone(),
                        chart_index: ci,
                        node,
                        x,
                        y,
                    },
                ));
            }
        }
    }
    let (min_value, argmin) =
        best.ok_or_else(|| Error::InvalidPoint("no active nodes with full stencils".into()))?;
    Ok(PositivityReport {
        probe,
        samples,
        min_value,
        argmin,
        field_scale: scale,
        time: None,
    })
}

/// The horizontal-frame reference form Ω = p*ω + ω_FS written in chart
/// coordinates, given the chart Hessian M of log G and the base metric g.
pub fn reference_form(m: &Mat, g: &Mat) -> Result<Mat> {
    let n = g.nrows();
    let d = m.nrows();
    let f = m.view((n, n), (d - n, d - n)).into_owned();
    let mzw = m.view((0, n), (n, d - n)).into_owned();
    let finv = crate::gridcore::inverse(&f)
        .map_err(|_| Error::Pseudoconvexity("singular fiber Hessian of log G".into()))?;
    let mut omega = m.clone();
    let horiz = g + &mzw * finv * mzw.adjoint();
    omega.view_mut((0, 0), (n, n)).copy_from(&horiz);
    Ok(omega)
}

/// Smallest eigenvalue of √−1∂∂̄log G against Ω at one projective point,
/// with the minimizing tangent vector.
pub fn oneone_value(
    spec: &FinslerMetricSpec,
    g: &HermitianMatrixField,
    point: &ProjectivePoint,
) -> Result<(f64, Vec<C64>)> {
    let m = chart_log_hessian(spec, point)?;
    let omega = reference_form(&m, &g.matrix(point.base))?;
    let (vals, vecs) = eigen_pencil(&m, &omega)?;
    Ok((vals[0], vecs.column(0).iter().copied().collect()))
}

/// Minimum over base nodes and deterministic fiber directions of the
/// generalized eigenvalues of √−1∂∂̄log G against Ω.
pub fn oneone_min_eigen_field(
    spec: &FinslerMetricSpec,
    g: &HermitianMatrixField,
    fiber_samples: usize,
) -> Result<PositivityReport> {
    let grid = spec.grid().clone();
    let r = spec.rank();
    let mut best: Option<(f64, Argmin)> = None;
    let mut samples = 0;
    let mut scale: f64 = 0.0;
    for node in 0..grid.len() {
        if !grid.is_active(node) || spec.check_node(node).is_err() {
            continue;
        }
        for s in 0..fiber_samples.max(1) {
            let v = if r == 1 {
                vec![C64::new(1.0, 0.0)]
            } else {
                sphere_direction(s as u64, r, 5)
            };
            let point = ProjectivePoint::from_vector(node, &v)?;
            let m = chart_log_hessian(spec, &point)?;
            scale = scale.max(m.iter().map(|z| z.norm()).fold(0.0, f64::max));
            let (val, u) = oneone_value(spec, g, &point)?;
            samples += 1;
            if best.as_ref().is_none_or(|(b, _)| val < *b) {
                best = Some((
                    val,
                    Argmin {
                        chart: grid.chart_id.clone(),
                        chart_index: point.pivot,
                        node,
                        x: point.vector(),
                        y: u,
                    },
                ));
            }
            if r == 1 {
                break;
            }
        }
    }
    let (min_value, argmin) =
        best.ok_or_else(|| Error::InvalidPoint("no interior base nodes".into()))?;
    Ok(PositivityReport {
        probe: ProbeKind::OneoneForm,
        samples,
        min_value,
        argmin,
        field_scale: scale,
        time: None,
    })
}
