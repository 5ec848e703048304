//! Complex Finsler metrics on E* and the objects built from them: jets, the
//! Kobayashi curvature Ψ, the fiber form ω_FS, the nonlinear connection and
//! the identities tying them together.

mod dual;
mod forms;
mod identities;
mod jet;
mod spec;

pub use dual::Dual;
pub use forms::{
    decomposition_forms, finsler_chern_tensor, kobayashi_curvature, kobayashi_curvature_dual,
    log_fiber_hessian, psi_from_jet, DecompositionForms,
};
pub use identities::*;
pub use jet::{chart_log_hessian, fiber_hessian, jet, FinslerJet, ProjectivePoint};
pub use spec::{
    FinslerMetricSpec, MetricFamily, DEFAULT_EPSILON, PSEUDOCONVEXITY_FLOOR,
    PSEUDOCONVEXITY_SAMPLES,
};
