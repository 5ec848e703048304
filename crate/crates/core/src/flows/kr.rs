use std::sync::Arc;

use super::integrator::{advance, Scheme};
use crate::curvature::ricci_form;
use crate::gridcore::{Cp1Atlas, GhostTransform, HermitianMatrixField};
use crate::{Error, Result, C64};

/// A Kähler metric on the base: one periodic chart, or both charts of CP¹.
#[derive(Clone, Debug)]
pub enum BaseMetric {
    Chart(HermitianMatrixField),
    Cp1 {
        atlas: Arc<Cp1Atlas>,
        charts: [HermitianMatrixField; 2],
    },
}

impl BaseMetric {
    /// Fubini-Study metric on both charts of an atlas, ghosts included.
    pub fn fubini_study(atlas: Cp1Atlas) -> Result<Self> {
        let charts = [
            crate::metrics::fubini_study(&atlas.charts[0])?,
            crate::metrics::fubini_study(&atlas.charts[1])?,
        ];
        Ok(BaseMetric::Cp1 {
            atlas: Arc::new(atlas),
            charts,
        })
    }

    pub fn charts(&self) -> Vec<&HermitianMatrixField> {
        match self {
            BaseMetric::Chart(g) => vec![g],
            BaseMetric::Cp1 { charts, .. } => charts.iter().collect(),
        }
    }

    fn values(&self) -> Vec<C64> {
        self.charts()
            .iter()
            .flat_map(|g| g.field.values.iter().copied())
            .collect()
    }

    fn with_values(&self, values: &[C64]) -> Self {
        let mut out = self.clone();
        let mut off = 0;
        for g in out.charts_mut() {
            let len = g.field.values.len();
            g.field.values.copy_from_slice(&values[off..off + len]);
            off += len;
        }
        out
    }

    fn charts_mut(&mut self) -> Vec<&mut HermitianMatrixField> {
        match self {
            BaseMetric::Chart(g) => vec![g],
            BaseMetric::Cp1 { charts, .. } => charts.iter_mut().collect(),
        }
    }

    /// Smallest det g / det g_ref over active nodes.
    pub fn min_det_ratio(&self, reference: &BaseMetric) -> f64 {
        let mut min = f64::INFINITY;
        for (g, g0) in self.charts().iter().zip(reference.charts()) {
            for node in 0..g.grid().len() {
                if g.grid().is_active(node) {
                    min = min.min(g.determinant(node) / g0.determinant(node));
                }
            }
        }
        min
    }

    pub fn check_positive_definite(&self) -> Result<()> {
        self.charts()
            .iter()
            .try_for_each(|g| g.check_positive_definite("base metric"))
    }
}

fn refresh(atlas: Option<&Cp1Atlas>, y: &mut [C64]) {
    if let Some(a) = atlas {
        a.fill_ghosts(y, 1, 1, GhostTransform::Metric);
    }
}

/// −(Ric(g) + (n−1)g) chart by chart; zero at ghost nodes.
pub fn kr_rhs(g: &BaseMetric) -> Result<Vec<C64>> {
    let mut out = Vec::new();
    for chart in g.charts() {
        let n = chart.grid().complex_dim;
        let ric = ricci_form(chart)?;
        let nc = n * n;
        let grid = chart.grid();
        let bounded = grid
            .axes
            .iter()
            .any(|a| a.topology == crate::gridcore::Topology::Bounded);
        for node in 0..grid.len() {
            let active = !bounded || grid.is_active(node);
            for k in 0..nc {
                let v = -(ric.values[node * nc + k]
                    + chart.field.values[node * nc + k] * (n - 1) as f64);
                out.push(if active { v } else { C64::default() });
            }
        }
    }
    Ok(out)
}

/// One step of the Kähler-Ricci flow ∂g/∂t = −(Ric(g) + (n−1)g).
pub fn kr_step(g: &BaseMetric, dt: f64, scheme: Scheme) -> Result<BaseMetric> {
    let atlas = match g {
        BaseMetric::Cp1 { atlas, .. } => Some(atlas.as_ref()),
        BaseMetric::Chart(_) => None,
    };
    if let Some(a) = atlas {
        if g.charts().iter().any(|c| c.rank() != 1)
            || a.charts[0].len() != g.charts()[0].grid().len()
        {
            return Err(Error::Shape(
                "CP¹ metric must be scalar on the atlas grid".into(),
            ));
        }
    }
    let y0 = g.values();
    let values = advance(
        &y0,
        dt,
        scheme,
        |_, y| kr_rhs(&g.with_values(y)),
        |y| refresh(atlas, y),
    )?;
    let mut out = g.with_values(&values);
    for c in out.charts_mut() {
        c.hermitize();
        c.field.check_finite("kr step")?;
    }
    Ok(out)
}
