//! Chern, Ricci and Gaussian curvature, positivity probes and the T-form.

mod chern;
mod mok;
mod positivity;

pub use chern::{
    check_kahler, chern_curvature, gaussian_curvature, kahler_defect, ricci_form,
    ChernCurvatureField, KAHLER_TOL,
};
pub use mok::{t_form, MokTermReport, FIBER_STEP};
pub use positivity::{
    griffiths_min, griffiths_min_charts, griffiths_value, oneone_min_eigen_field, oneone_value,
    reference_form, Argmin, GriffithsChart, PositivityReport, ProbeConfig, ProbeKind,
    SEMIPOSITIVE_REL,
};
