use std::f64::consts::TAU;

use serde::Serialize;

use super::integrator::Scheme;
use super::maxprinciple::Source;
use super::state::FlowKind;
use crate::gridcore::{ChartGrid, CP1_HALF_WIDTH};
use crate::{Error, Result};

/// Grid geometry of a preset.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
#[serde(rename_all = "snake_case", tag = "type")]
pub enum Geometry {
    /// Flat torus of complex dimension `complex_dim`, `n` nodes per real axis.
    Torus {
        complex_dim: usize,
        n: usize,
        period: f64,
    },
    /// Both charts of CP¹, `n × n` nodes each on [−1.55, 1.55]².
    Cp1 { n: usize },
    /// Torus curve times the CP¹ fiber atlas.
    TorusCurveTimesCp1 {
        base_n: usize,
        fiber_n: usize,
        period: f64,
    },
}

impl Geometry {
    pub fn min_spacing(&self) -> f64 {
        match *self {
            Geometry::Torus { n, period, .. } => period / n as f64,
            Geometry::Cp1 { n } => 2.0 * CP1_HALF_WIDTH / (n - 1) as f64,
            Geometry::TorusCurveTimesCp1 {
                base_n,
                fiber_n,
                period,
            } => (period / base_n as f64).min(2.0 * CP1_HALF_WIDTH / (fiber_n - 1) as f64),
        }
    }

    pub fn base_grid(&self) -> Result<ChartGrid> {
        match *self {
            Geometry::Torus {
                complex_dim,
                n,
                period,
            } => ChartGrid::torus(complex_dim, n, period),
            Geometry::Cp1 { n } => ChartGrid::cp1_chart(0, n, CP1_HALF_WIDTH),
            Geometry::TorusCurveTimesCp1 { base_n, period, .. } => {
                ChartGrid::torus(1, base_n, period)
            }
        }
    }
}

/// Initial data of a preset.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
#[serde(rename_all = "snake_case", tag = "type")]
pub enum InitialMetric {
    /// Constant rank-2 bundle metric [[2, 0.5+0.5i], [0.5−0.5i, 1]] over a flat base.
    FlatBundle,
    /// Constant Kähler metric [[1, 0.2+0.1i], [0.2−0.1i, 1.5]] on the torus.
    FlatBase,
    /// Twisted rank-2 bundle whose Griffiths minimum is exactly zero.
    TwistedSemipositive,
    /// diag(e^{−φ}, e^{φ}) with φ = amp·cos x.
    MixedSign { amp: f64 },
    /// Fubini-Study metric on CP¹.
    FubiniStudy,
    /// Hermitian-induced Finsler metric of the flat bundle metric.
    FinslerFlat,
    /// Hermitian-induced Finsler metric of the twisted semipositive bundle.
    FinslerTwistedSemipositive,
    /// η₀ = ψ·g₀ with ψ = 4 − Σ cos of every real coordinate, under ω(t) = (1 + t/2)g₀.
    EtaTouchingZero { source: Source },
}

/// Defaults a preset contributes to a FlowConfig.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct PresetDefaults {
    pub scheme: Scheme,
    pub dt: f64,
    pub t_end: f64,
    pub monitor_every: usize,
    pub positivity_tol: f64,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct ExperimentPreset {
    pub id: &'static str,
    pub description: &'static str,
    pub kind: FlowKind,
    pub geometry: Geometry,
    pub metric: InitialMetric,
    pub defaults: PresetDefaults,
    /// Whether the monitored minimum must stay above −positivity_tol.
    pub expect_semipositive: bool,
}

const fn defaults(
    dt: f64,
    t_end: f64,
    monitor_every: usize,
    positivity_tol: f64,
) -> PresetDefaults {
    PresetDefaults {
        scheme: Scheme::Rk4,
        dt,
        t_end,
        monitor_every,
        positivity_tol,
    }
}

/// The closed preset registry.
pub fn registry() -> Vec<ExperimentPreset> {
    vec![
        ExperimentPreset {
            id: "torus-hym-flat",
            description: "HYM flow of a constant rank-2 metric over a flat torus curve",
            kind: FlowKind::Hym,
            geometry: Geometry::Torus {
                complex_dim: 1,
                n: 16,
                period: TAU,
            },
            metric: InitialMetric::FlatBundle,
            defaults: defaults(1e-3, 0.5, 50, 1e-8),
            expect_semipositive: true,
        },
        ExperimentPreset {
            id: "torus-kr-flat",
            description: "Kahler-Ricci flow of a constant metric on a flat torus surface",
            kind: FlowKind::Kr,
            geometry: Geometry::Torus {
                complex_dim: 2,
                n: 8,
                period: TAU,
            },
            metric: InitialMetric::FlatBase,
            defaults: defaults(1e-3, 0.5, 100, 1e-5),
            expect_semipositive: true,
        },
        ExperimentPreset {
            id: "curve-hym-semipositive",
            description:
                "HYM flow of a twisted Griffiths-semipositive rank-2 metric over a torus curve",
            kind: FlowKind::Hym,
            geometry: Geometry::Torus {
                complex_dim: 1,
                n: 32,
                period: TAU,
            },
            metric: InitialMetric::TwistedSemipositive,
            defaults: defaults(5e-3, 0.5, 5, 1e-5),
            expect_semipositive: true,
        },
        ExperimentPreset {
            id: "curve-hym-mixed",
            description: "HYM flow of a rank-2 metric with curvature of both signs",
            kind: FlowKind::Hym,
            geometry: Geometry::Torus {
                complex_dim: 1,
                n: 32,
                period: TAU,
            },
            metric: InitialMetric::MixedSign { amp: 0.5 },
            defaults: defaults(5e-3, 0.5, 10, 1e-5),
            expect_semipositive: false,
        },
        ExperimentPreset {
            id: "cp1-kr",
            description: "Kahler-Ricci flow of the Fubini-Study metric on the two-chart CP1",
            kind: FlowKind::Kr,
            geometry: Geometry::Cp1 { n: 40 },
            metric: InitialMetric::FubiniStudy,
            defaults: defaults(4e-5, 0.2, 500, 1e-5),
            expect_semipositive: true,
        },
        ExperimentPreset {
            id: "torus-finsler-flat",
            description: "Finsler flow of a flat Hermitian-induced metric on torus x CP1",
            kind: FlowKind::Finsler,
            geometry: Geometry::TorusCurveTimesCp1 {
                base_n: 16,
                fiber_n: 24,
                period: TAU,
            },
            metric: InitialMetric::FinslerFlat,
            defaults: defaults(3e-3, 0.3, 10, 1e-4),
            expect_semipositive: true,
        },
        ExperimentPreset {
            id: "torus-finsler-semipositive",
            description: "Finsler flow from the twisted semipositive bundle on torus x CP1",
            kind: FlowKind::Finsler,
            geometry: Geometry::TorusCurveTimesCp1 {
                base_n: 32,
                fiber_n: 24,
                period: TAU,
            },
            metric: InitialMetric::FinslerTwistedSemipositive,
            defaults: defaults(3e-3, 0.3, 10, 1e-4),
            expect_semipositive: true,
        },
        ExperimentPreset {
            id: "torus-maxprinciple",
            description: "Tensor heat flow of a form touching zero, oscillating scalar source",
            kind: FlowKind::MaxPrinciple,
            geometry: Geometry::Torus {
                complex_dim: 2,
                n: 12,
                period: TAU,
            },
            metric: InitialMetric::EtaTouchingZero {
                source: Source::Oscillating { c0: 0.2, c1: 0.5 },
            },
            defaults: defaults(1e-2, 0.5, 5, 1e-6),
            expect_semipositive: true,
        },
    ]
}

pub fn preset(id: &str) -> Result<ExperimentPreset> {
    registry().into_iter().find(|p| p.id == id).ok_or_else(|| {
        let known: Vec<&str> = registry().iter().map(|p| p.id).collect();
        Error::Config(format!(
            "unknown preset {id:?}; known presets: {}",
            known.join(", ")
        ))
    })
}
