//! Time evolution: the Finsler flow on P(E*), its Hermitian-Yang-Mills and
//! Kähler-Ricci reductions, the tensor maximum-principle simulator, presets
//! and run persistence.

mod config;
mod finsler_flow;
mod hym;
mod integrator;
mod kr;
mod maxprinciple;
mod presets;
mod run;
mod state;

pub use config::{
    FlowConfig, Tolerances, COLLAPSE_RATIO, DEFAULT_CFL, DEFAULT_SEED, SCHEMA_VERSION,
};
pub use finsler_flow::{ChartHessian, FinslerFlow, STITCHING_TOL};
pub use hym::{hym_rhs, hym_step};
pub use integrator::{advance, step_count, step_times, Scheme};
pub use kr::{kr_rhs, kr_step, BaseMetric};
pub use maxprinciple::{
    eta_min, max_principle_sim, max_principle_step, scalar_heat_oracle, MaxPrincipleRun,
    MetricPath, Source,
};
pub use presets::{preset, registry, ExperimentPreset, Geometry, InitialMetric, PresetDefaults};
pub use run::{
    flat_base_matrix, monitor_csv, run_flow, write_run_dir, FlowReport, MonitorRow, RunSummary,
    StopReason,
};
pub use state::{finsler_flow_step, CheckRecord, FlowKind, FlowState, Payload};
