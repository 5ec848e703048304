use std::f64::consts::TAU;

use projflow_core::curvature::*;
use projflow_core::finsler::{FinslerMetricSpec, ProjectivePoint};
use projflow_core::gridcore::*;
use projflow_core::{metrics, Error, C64};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn c(re: f64, im: f64) -> C64 {
    C64::new(re, im)
}

fn unit(grid: &ChartGrid) -> HermitianMatrixField {
    HermitianMatrixField::constant(grid, &Mat::identity(grid.complex_dim, grid.complex_dim))
        .unwrap()
}

fn full_stencil(grid: &ChartGrid, i: usize) -> bool {
    let strides = grid.strides();
    let coords = grid.coords(i);
    (0..grid.axes.len()).all(|ax| grid.stencil_offsets(&coords, ax, &strides).is_some())
}

#[test]
fn fubini_study_has_gaussian_curvature_two() {
    let grid = ChartGrid::cp1_chart(0, 161, CP1_HALF_WIDTH).unwrap();
    let k = gaussian_curvature(&metrics::fubini_study(&grid).unwrap()).unwrap();
    let err = (0..grid.len())
        .filter(|&i| full_stencil(&grid, i))
        .map(|i| (k.values[i].re - 2.0).abs())
        .fold(0.0, f64::max);
    assert!(err < 1e-6, "max |K − 2| = {err:.3e}");
}

#[test]
fn conformal_torus_curvature_matches_closed_form() {
    // g = e^{a cos x} ⇒ K = (a/4) cos x · e^{−a cos x}.
    let grid = ChartGrid::torus(1, 64, TAU).unwrap();
    let a = 0.3;
    let k = gaussian_curvature(&metrics::conformal_torus(&grid, a).unwrap()).unwrap();
    assert!((k.values[0].re - 0.055_561_366_551_128_84).abs() < 1e-6);
    assert!((k.values[32 * 64].re + 0.101_239_410_568_200_23).abs() < 1e-6);
}

#[test]
fn line_bundle_griffiths_minimum_is_minus_quarter_amplitude() {
    // h = e^{−a cos x}: normalized curvature −(a/4) cos x, minimum −a/4 at x = 0.
    let grid = ChartGrid::torus(1, 64, TAU).unwrap();
    let h = metrics::line_bundle(&grid, 0.2).unwrap();
    let g = unit(&grid);
    let r = chern_curvature(&h).unwrap();
    let rep = griffiths_min(&r, &h, &g, &ProbeConfig::default()).unwrap();
    assert!((rep.min_value + 0.05).abs() < 1e-6, "{}", rep.min_value);
    assert_eq!(grid.position(rep.argmin.node)[0], 0.0);
}

#[test]
fn conformal_change_adds_dd_bar_phi() {
    // R(e^{−φ}h) = e^{−φ}(R(h) + ∂∂̄φ·h) for rank one.
    let grid = ChartGrid::torus(1, 64, TAU).unwrap();
    let base = metrics::conformal_torus(&grid, 0.3).unwrap();
    let phi = |x: f64| 0.2 * x.cos();
    let changed = HermitianMatrixField::from_fn(&grid, 1, |p| {
        base.matrix(grid.index(&[
            (p[0] / grid.axes[0].spacing).round() as usize % 64,
            (p[1] / grid.axes[1].spacing).round() as usize % 64,
        ])) * c((-phi(p[0])).exp(), 0.0)
    })
    .unwrap();
    let r0 = chern_curvature(&base).unwrap();
    let r1 = chern_curvature(&changed).unwrap();
    let err = (0..grid.len())
        .map(|i| {
            let x = grid.position(i)[0];
            let expect = (-phi(x)).exp()
                * (r0.block(i, 0, 0)[(0, 0)].re - 0.05 * x.cos() * base.matrix(i)[(0, 0)].re);
            (r1.block(i, 0, 0)[(0, 0)].re - expect).abs()
        })
        .fold(0.0, f64::max);
    assert!(err < 1e-5, "{err:.3e}");
}

#[test]
fn mixed_sign_bundle_reaches_minus_amplitude_over_four() {
    let grid = ChartGrid::torus(1, 64, TAU).unwrap();
    let h = metrics::mixed_sign(&grid, 0.5).unwrap();
    let r = chern_curvature(&h).unwrap();
    let rep = griffiths_min(&r, &h, &unit(&grid), &ProbeConfig::default()).unwrap();
    assert!((rep.min_value + 0.125).abs() < 1e-6, "{}", rep.min_value);
    assert!(!rep.is_semipositive());
}

#[test]
fn twisted_bundle_minimum_is_kappa_times_margin() {
    let grid = ChartGrid::torus(1, 64, TAU).unwrap();
    let h = metrics::twisted(&grid, metrics::TwistedParams::semipositive(TAU)).unwrap();
    let r = chern_curvature(&h).unwrap();
    let rep = griffiths_min(&r, &h, &unit(&grid), &ProbeConfig::default()).unwrap();
    assert!(
        (rep.min_value - 0.05 * metrics::TOUCH_MARGIN).abs() < 1e-6,
        "{}",
        rep.min_value
    );
}

#[test]
fn exactly_touching_bundle_dips_only_by_truncation_error() {
    let grid = ChartGrid::torus(1, 32, TAU).unwrap();
    let h = metrics::twisted(&grid, metrics::TwistedParams::touching(TAU)).unwrap();
    let r = chern_curvature(&h).unwrap();
    let rep = griffiths_min(&r, &h, &unit(&grid), &ProbeConfig::default()).unwrap();
    assert!(
        rep.min_value < 0.0 && rep.min_value > -2e-6,
        "{}",
        rep.min_value
    );
}

#[test]
fn griffiths_argmin_reproduces_the_reported_value() {
    let grid = ChartGrid::torus(1, 32, TAU).unwrap();
    let h = metrics::curved_rank2(&grid, 0.3, 0.1).unwrap();
    let g = metrics::conformal_torus(&grid, 0.2).unwrap();
    let r = chern_curvature(&h).unwrap();
    let rep = griffiths_min(&r, &h, &g, &ProbeConfig::default()).unwrap();
    let again = griffiths_value(&r, &h, &g, rep.argmin.node, &rep.argmin.x, &rep.argmin.y);
    assert!(
        (again - rep.min_value).abs() < 1e-12,
        "{again} vs {}",
        rep.min_value
    );
}

#[test]
fn oneone_argmin_reproduces_the_reported_value() {
    let grid = ChartGrid::torus(1, 16, TAU).unwrap();
    let spec =
        FinslerMetricSpec::hermitian_induced(metrics::curved_rank2(&grid, 0.3, 0.1).unwrap())
            .unwrap();
    let g = unit(&grid);
    let rep = oneone_min_eigen_field(&spec, &g, 16).unwrap();
    let p = ProjectivePoint::from_vector(rep.argmin.node, &rep.argmin.x).unwrap();
    let (again, _) = oneone_value(&spec, &g, &p).unwrap();
    assert!((again - rep.min_value).abs() < 1e-12);
}

#[test]
fn chern_curvature_is_hermitian_in_both_index_pairs() {
    let grid = ChartGrid::torus(1, 32, TAU).unwrap();
    let r = chern_curvature(&metrics::curved_rank2(&grid, 0.3, 0.1).unwrap()).unwrap();
    assert!(r.max_symmetry_defect() < 1e-12);
}

#[test]
fn non_kahler_metric_is_rejected() {
    // g_{12̄} = 0.2 cos x¹ gives ∂₁g_{21̄} ≠ ∂₂g_{11̄}.
    let grid = ChartGrid::torus(2, 8, TAU).unwrap();
    let g = HermitianMatrixField::from_fn(&grid, 2, |p| {
        Mat::from_row_slice(
            2,
            2,
            &[
                c(1.0, 0.0),
                c(0.2 * p[0].cos(), 0.0),
                c(0.2 * p[0].cos(), 0.0),
                c(1.0, 0.0),
            ],
        )
    })
    .unwrap();
    assert!(matches!(check_kahler(&g), Err(Error::NotKahler { .. })));
    check_kahler(&metrics::product_torus(&grid, 0.2).unwrap()).unwrap();
}

#[test]
fn ricci_of_flat_metric_vanishes() {
    let grid = ChartGrid::torus(2, 8, TAU).unwrap();
    let g = HermitianMatrixField::constant(
        &grid,
        &Mat::from_row_slice(2, 2, &[c(1.0, 0.0), c(0.2, 0.1), c(0.2, -0.1), c(1.5, 0.0)]),
    )
    .unwrap();
    assert!(ricci_form(&g).unwrap().max_abs() < 1e-12);
}

fn fubini_study_setup() -> (
    ChartGrid,
    HermitianMatrixField,
    FinslerMetricSpec,
    ChernCurvatureField,
) {
    let grid = ChartGrid::cp1_chart(0, 41, CP1_HALF_WIDTH).unwrap();
    let g = metrics::fubini_study(&grid).unwrap();
    let spec = FinslerMetricSpec::hermitian_induced(g.clone()).unwrap();
    let r = chern_curvature(&g).unwrap();
    (grid, g, spec, r)
}

#[test]
fn first_t_term_equals_its_basis_form_and_t_is_nonnegative() {
    let (grid, g, spec, r) = fubini_study_setup();
    let nodes: Vec<usize> = (0..grid.len())
        .filter(|&i| grid.is_active(i) && full_stencil(&grid, i))
        .collect();
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    for _ in 0..100 {
        let node = nodes[rng.gen_range(0..nodes.len())];
        let p = ProjectivePoint::from_vector(node, &[c(1.0, 0.0)]).unwrap();
        let u = [c(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0))];
        let rep = t_form(&spec, &g, &r, &p, &u).unwrap();
        let a = rep.term_a_basis.unwrap();
        assert!((rep.term_a - a).abs() < 1e-8 * a.abs().max(1.0));
        assert!(rep.term_b >= 0.0 && rep.t_value >= 0.0);
    }
}

#[test]
fn second_t_term_basis_form_adds_the_interior_product() {
    // Σ|R(V, ē_α, u, ē_β)|² = |i_u∂^VΨ|² + |i_uΨ|²_g; the last term vanishes
    // only where u is a null direction of Ψ.
    let grid = ChartGrid::torus(2, 12, TAU).unwrap();
    let g = metrics::product_torus(&grid, 0.2).unwrap();
    let spec = FinslerMetricSpec::hermitian_induced(g.clone()).unwrap();
    let r = chern_curvature(&g).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    for _ in 0..20 {
        let node = rng.gen_range(0..grid.len());
        let v: Vec<C64> = (0..2)
            .map(|_| c(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)))
            .collect();
        let u: Vec<C64> = (0..2)
            .map(|_| c(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)))
            .collect();
        let rep = t_form(
            &spec,
            &g,
            &r,
            &ProjectivePoint::from_vector(node, &v).unwrap(),
            &u,
        )
        .unwrap();
        let a = rep.term_a_basis.unwrap();
        let b = rep.term_b_basis.unwrap();
        assert!((rep.term_a - a).abs() < 1e-8 * a.abs().max(1.0));
        assert!(
            (rep.term_b + rep.null_defect - b).abs() < 1e-8 * b.abs().max(1.0),
            "{} + {} vs {b}",
            rep.term_b,
            rep.null_defect
        );
    }
}

#[test]
fn flat_data_has_vanishing_t_terms() {
    let grid = ChartGrid::torus(1, 16, TAU).unwrap();
    let g = unit(&grid);
    let spec = FinslerMetricSpec::hermitian_induced(
        metrics::flat(&grid, &metrics::flat_rank2_matrix()).unwrap(),
    )
    .unwrap();
    let r = chern_curvature(&g).unwrap();
    let p = ProjectivePoint::from_vector(5, &[c(0.3, 0.1), c(1.0, 0.0)]).unwrap();
    let rep = t_form(&spec, &g, &r, &p, &[c(0.6, -0.2)]).unwrap();
    assert!(rep.term_a.abs() < 1e-12 && rep.term_b.abs() < 1e-12);
}
