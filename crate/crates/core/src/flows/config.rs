use serde::{Deserialize, Serialize};

use super::integrator::Scheme;
use super::presets::{preset, ExperimentPreset};
use crate::{Error, Result};

/// Version of the config file format.
pub const SCHEMA_VERSION: u32 = 1;
/// Default diffusive step guard: dt ≤ CFL·(min spacing)².
pub const DEFAULT_CFL: f64 = 0.2;
/// Seed used when none is given.
pub const DEFAULT_SEED: u64 = 1;
/// Relative det g drop that stops a Kähler-Ricci run.
pub const COLLAPSE_RATIO: f64 = 1e-6;

fn default_cfl() -> f64 {
    DEFAULT_CFL
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Tolerances {
    /// Monitored minima below −positivity count as a violation.
    pub positivity: f64,
    /// Largest allowed disagreement of the fiber charts.
    pub stitching: f64,
    /// det g / det g₀ below this stops a Kähler-Ricci run.
    pub collapse_ratio: f64,
}

/// A complete, schema-versioned run description. Unknown keys are rejected.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FlowConfig {
    pub schema_version: u32,
    /// Registry id; fixes the geometry and the initial metric.
    pub preset: String,
    pub scheme: Scheme,
    pub dt: f64,
    pub t_end: f64,
    pub monitor_every: usize,
    pub seed: u64,
    #[serde(default = "default_cfl")]
    pub cfl_coefficient: f64,
    pub tolerance: Tolerances,
}

impl FlowConfig {
    /// The preset's default configuration.
    pub fn from_preset(id: &str) -> Result<Self> {
        let p = preset(id)?;
        Ok(FlowConfig {
            schema_version: SCHEMA_VERSION,
            preset: p.id.to_string(),
            scheme: p.defaults.scheme,
            dt: p.defaults.dt,
            t_end: p.defaults.t_end,
            monitor_every: p.defaults.monitor_every,
            seed: DEFAULT_SEED,
            cfl_coefficient: DEFAULT_CFL,
            tolerance: Tolerances {
                positivity: p.defaults.positivity_tol,
                stitching: crate::flows::STITCHING_TOL,
                collapse_ratio: COLLAPSE_RATIO,
            },
        })
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let cfg: FlowConfig =
            serde_json::from_str(text).map_err(|e| Error::Config(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    /// Checks every key and the diffusive step guard; returns the preset.
    pub fn validate(&self) -> Result<ExperimentPreset> {
        if self.schema_version != SCHEMA_VERSION {
            return Err(Error::Config(format!(
                "schema_version = {} (this build reads {SCHEMA_VERSION})",
                self.schema_version
            )));
        }
        let p = preset(&self.preset)?;
        let positive = |name: &str, v: f64| {
            if v > 0.0 && v.is_finite() {
                Ok(())
            } else {
                Err(Error::Config(format!(
                    "{name} = {v} must be positive and finite"
                )))
            }
        };
        positive("dt", self.dt)?;
        positive("cfl_coefficient", self.cfl_coefficient)?;
        positive("tolerance.positivity", self.tolerance.positivity)?;
        positive("tolerance.stitching", self.tolerance.stitching)?;
        positive("tolerance.collapse_ratio", self.tolerance.collapse_ratio)?;
        if !(self.t_end >= 0.0) || !self.t_end.is_finite() {
            return Err(Error::Config(format!(
                "t_end = {} must be nonnegative",
                self.t_end
            )));
        }
        if self.monitor_every == 0 {
            return Err(Error::Config("monitor_every must be at least 1".into()));
        }
        let h = p.geometry.min_spacing();
        let limit = self.cfl_coefficient * h * h;
        if self.dt > limit {
            return Err(Error::Config(format!(
                "dt = {} exceeds cfl_coefficient·(min spacing)² = {} (spacing {h:.4})",
                self.dt, limit
            )));
        }
        Ok(p)
    }
}
