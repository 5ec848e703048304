use serde::{Deserialize, Serialize};

use super::hym::inverse_metric;
use super::integrator::{advance, step_count, step_times, Scheme};
use crate::curvature::{Argmin, PositivityReport, ProbeKind};
use crate::gridcore::{
    apply_dd_bar, eigen_pencil, min_eigen_pencil, ChartGrid, HermitianMatrixField, Mat, Topology,
};
use crate::{Error, Result, C64};

/// Source terms σ(η, z, t) for which the null-eigenvector condition holds by
/// construction.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "type")]
pub enum Source {
    Zero,
    /// σ = c·η with constant c.
    Scalar {
        c: f64,
    },
    /// σ = c(z, t)·η with c = c0 + c1·cos(x¹ + t).
    Oscillating {
        c0: f64,
        c1: f64,
    },
    /// σ = A η A† with A(z) = [[0.3 + 0.1 cos x¹, 0.2i], [0.1, 0.2 sin y²]] (rank 2 only).
    Conjugation,
}

impl Source {
    /// Every source exercised by the tests and presets.
    pub fn catalog() -> Vec<(&'static str, Source)> {
        vec![
            ("zero", Source::Zero),
            ("linear", Source::Scalar { c: 1.0 }),
            ("oscillating", Source::Oscillating { c0: 0.2, c1: 0.5 }),
            ("conjugation", Source::Conjugation),
        ]
    }

    /// The scalar coefficient c(z, t), or None for matrix sources.
    pub fn coefficient(&self, p: &[f64], t: f64) -> Option<f64> {
        match *self {
            Source::Zero => Some(0.0),
            Source::Scalar { c } => Some(c),
            Source::Oscillating { c0, c1 } => Some(c0 + c1 * (p[0] + t).cos()),
            Source::Conjugation => None,
        }
    }

    fn conjugator(p: &[f64]) -> Mat {
        let y2 = p.get(3).copied().unwrap_or(0.0);
        Mat::from_row_slice(
            2,
            2,
            &[
                C64::new(0.3 + 0.1 * p[0].cos(), 0.0),
                C64::new(0.0, 0.2),
                C64::new(0.1, 0.0),
                C64::new(0.2 * y2.sin(), 0.0),
            ],
        )
    }

    pub fn apply(&self, eta: &Mat, p: &[f64], t: f64) -> Result<Mat> {
        match self.coefficient(p, t) {
            Some(c) => Ok(eta * C64::new(c, 0.0)),
            None => {
                if eta.nrows() != 2 {
                    return Err(Error::Shape(
                        "the conjugation source is defined for rank 2".into(),
                    ));
                }
                let a = Self::conjugator(p);
                Ok(&a * eta * a.adjoint())
            }
        }
    }
}

/// Spatially constant metric ω(t) = (1 + rate·t)·g₀ on a flat torus, where
/// the Chern Laplacian has no connection terms.
#[derive(Clone, Debug, PartialEq)]
pub struct MetricPath {
    pub g0: Mat,
    pub rate: f64,
}

impl MetricPath {
    pub fn at(&self, t: f64) -> Mat {
        &self.g0 * C64::new(1.0 + self.rate * t, 0.0)
    }
}

/// Result of a maximum-principle simulation.
#[derive(Clone, Debug)]
pub struct MaxPrincipleRun {
    pub series: Vec<PositivityReport>,
    pub eta: HermitianMatrixField,
}

fn check_flat_torus(grid: &ChartGrid, path: &MetricPath) -> Result<()> {
    if grid.axes.iter().any(|a| a.topology != Topology::Periodic) {
        return Err(Error::Shape(
            "the maximum-principle simulator runs on flat tori".into(),
        ));
    }
    if path.g0.nrows() != grid.complex_dim {
        return Err(Error::Shape(format!(
            "metric is {}x{} on a {}-dimensional base",
            path.g0.nrows(),
            path.g0.nrows(),
            grid.complex_dim
        )));
    }
    Ok(())
}

/// Δ_ω f = g^{αβ̄} ∂_α∂_β̄ f componentwise.
fn laplacian(grid: &ChartGrid, data: &[C64], ncomp: usize, ginv: &Mat) -> Vec<C64> {
    let n = grid.complex_dim;
    let mut out = vec![C64::default(); data.len()];
    for a in 0..n {
        for b in 0..n {
            let coef = ginv[(a, b)];
            if coef == C64::default() {
                continue;
            }
            let d = apply_dd_bar(grid, data, ncomp, a, b);
            for (o, x) in out.iter_mut().zip(d) {
                *o += coef * x;
            }
        }
    }
    out
}

/// Min pencil eigenvalue of η against ω(t) over the grid, with argmin.
pub fn eta_min(eta: &HermitianMatrixField, metric: &Mat, t: f64) -> Result<PositivityReport> {
    let mut best = (f64::INFINITY, 0);
    for node in 0..eta.grid().len() {
        let v = min_eigen_pencil(&eta.matrix(node), metric)?;
        if v < best.0 {
            best = (v, node);
        }
    }
    let (vals, vecs) = eigen_pencil(&eta.matrix(best.1), metric)?;
    let argmin = Argmin {
        chart: eta.grid().chart_id.clone(),
        chart_index: 0,
        node: best.1,
        x: vecs.column(0).iter().copied().collect(),
        y: vec![],
    };
    Ok(PositivityReport {
        probe: ProbeKind::OneoneForm,
        samples: eta.grid().len(),
        min_value: vals[0],
        argmin,
        field_scale: eta.field.max_abs(),
        time: Some(t),
    })
}

/// One step of ∂η/∂t = Δ_{ω(t)}η + σ starting at time t.
pub fn max_principle_step(
    eta: &HermitianMatrixField,
    source: &Source,
    path: &MetricPath,
    t: f64,
    dt: f64,
    scheme: Scheme,
) -> Result<HermitianMatrixField> {
    let grid = eta.grid();
    check_flat_torus(grid, path)?;
    let r = eta.rank();
    let nc = r * r;
    let positions: Vec<Vec<f64>> = (0..grid.len()).map(|i| grid.position(i)).collect();
    let values = advance(
        &eta.field.values,
        dt,
        scheme,
        |tau, y| {
            let ginv = inverse_metric(&path.at(t + tau))?;
            let mut out = laplacian(grid, y, nc, &ginv);
            for (node, p) in positions.iter().enumerate() {
                let m = Mat::from_row_slice(r, r, &y[node * nc..(node + 1) * nc]);
                let s = source.apply(&m, p, t + tau)?;
                for (k, x) in s.transpose().iter().enumerate() {
                    out[node * nc + k] += *x;
                }
            }
            Ok(out)
        },
        |_| {},
    )?;
    let mut out = eta.clone();
    out.field.values = values;
    out.hermitize();
    out.field.check_finite("maximum-principle field")?;
    Ok(out)
}

/// Evolves η to `t_end` and records the min eigenvalue at t = 0, after every
/// `monitor_every` steps and at the end.
pub fn max_principle_sim(
    eta0: &HermitianMatrixField,
    source: &Source,
    path: &MetricPath,
    dt: f64,
    t_end: f64,
    scheme: Scheme,
    monitor_every: usize,
) -> Result<MaxPrincipleRun> {
    check_flat_torus(eta0.grid(), path)?;
    let steps = step_count(dt, t_end)?;
    let mut eta = eta0.clone();
    let mut series = vec![eta_min(&eta, &path.at(0.0), 0.0)?];
    for step in 0..steps {
        let (t0, t1) = step_times(step, steps, dt, t_end);
        eta = max_principle_step(&eta, source, path, t0, t1 - t0, scheme)?;
        if (step + 1) % monitor_every.max(1) == 0 || step + 1 == steps {
            series.push(eta_min(&eta, &path.at(t1), t1)?);
        }
    }
    Ok(MaxPrincipleRun { series, eta })
}

/// Scalar comparison: ∂ψ/∂t = Δ_{ω(t)}ψ + c(z, t)ψ on the same grid with the
/// same scheme. For η₀ = ψ₀·g₀ and a scalar source, η(t) = ψ(t)·g₀ and the min
/// eigenvalue is min ψ(t) / (1 + rate·t). Returns that series.
#[allow(clippy::too_many_arguments)]
pub fn scalar_heat_oracle(
    grid: &ChartGrid,
    psi0: &[f64],
    source: &Source,
    path: &MetricPath,
    dt: f64,
    t_end: f64,
    scheme: Scheme,
    monitor_every: usize,
) -> Result<Vec<(f64, f64)>> {
    check_flat_torus(grid, path)?;
    if source.coefficient(&grid.position(0), 0.0).is_none() {
        return Err(Error::Config(
            "the scalar oracle needs a scalar source".into(),
        ));
    }
    let steps = step_count(dt, t_end)?;
    let positions: Vec<Vec<f64>> = (0..grid.len()).map(|i| grid.position(i)).collect();
    let min_of = |psi: &[f64], t: f64| {
        psi.iter().copied().fold(f64::INFINITY, f64::min) / (1.0 + path.rate * t)
    };
    let mut psi = psi0.to_vec();
    let mut series = vec![(0.0, min_of(&psi, 0.0))];
    for step in 0..steps {
        let (t, t1) = step_times(step, steps, dt, t_end);
        psi = advance(
            &psi,
            t1 - t,
            scheme,
            |tau, y| {
                let ginv = inverse_metric(&path.at(t + tau))?;
                let yc: Vec<C64> = y.iter().map(|&v| C64::new(v, 0.0)).collect();
                let lap = laplacian(grid, &yc, 1, &ginv);
                Ok(lap
                    .iter()
                    .zip(y)
                    .zip(&positions)
                    .map(|((l, &v), p)| l.re + source.coefficient(p, t + tau).unwrap_or(0.0) * v)
                    .collect())
            },
            |_| {},
        )?;
        if (step + 1) % monitor_every.max(1) == 0 || step + 1 == steps {
            series.push((t1, min_of(&psi, t1)));
        }
    }
    Ok(series)
}
