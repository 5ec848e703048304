use std::f64::consts::TAU;

use projflow_core::flows::*;
use projflow_core::gridcore::*;
use projflow_core::{metrics, Error, C64};

fn c(re: f64, im: f64) -> C64 {
    C64::new(re, im)
}

fn unit(grid: &ChartGrid) -> HermitianMatrixField {
    HermitianMatrixField::constant(grid, &Mat::identity(grid.complex_dim, grid.complex_dim))
        .unwrap()
}

fn max_diff(a: &[C64], b: &[C64]) -> f64 {
    a.iter()
        .zip(b)
        .map(|(x, y)| (x - y).norm())
        .fold(0.0, f64::max)
}

fn config(id: &str, edit: impl FnOnce(&mut FlowConfig)) -> FlowConfig {
    let mut cfg = FlowConfig::from_preset(id).unwrap();
    edit(&mut cfg);
    cfg
}

/// max over nodes of ‖g(0.5) − e^{−0.5}g₀‖/‖g₀‖ on the flat torus; Ric = 0 and n = 2.
fn kr_flat_error(dt: f64) -> f64 {
    let r = run_flow(&config("torus-kr-flat", |c| c.dt = dt)).unwrap();
    assert_eq!(r.summary.stop_reason, StopReason::Completed);
    let g0 = flat_base_matrix();
    let expect = &g0 * c((-0.5f64).exp(), 0.0);
    let g = &r.snapshot.fields[0].1;
    (0..g.grid.len())
        .map(|i| {
            (Mat::from_row_slice(2, 2, &g.values[4 * i..4 * i + 4]) - &expect).norm() / g0.norm()
        })
        .fold(0.0, f64::max)
}

#[test]
fn hym_flow_of_a_flat_metric_decays_exponentially() {
    // Λ R = 0 ⇒ h(t) = e^{−(r−1)t}h₀ with r = 2.
    let r = run_flow(&FlowConfig::from_preset("torus-hym-flat").unwrap()).unwrap();
    let m = metrics::flat_rank2_matrix();
    let e = (-0.5f64).exp();
    let h = &r.snapshot.fields[0].1;
    let err = (0..h.grid.len())
        .map(|i| {
            (Mat::from_row_slice(2, 2, &h.values[4 * i..4 * i + 4]) - &m * c(e, 0.0)).norm()
                / (m.norm() * e)
        })
        .fold(0.0, f64::max);
    assert!(err < 1e-8, "relative error {err:.3e}");
    assert!(r.rows.iter().all(|row| row.min_value.abs() < 1e-8));
    assert!((r.snapshot.time - 0.5).abs() < 1e-15);
}

#[test]
fn flat_kahler_ricci_matches_closed_form_at_fourth_order() {
    let fine = kr_flat_error(1e-3);
    assert!(fine < 1e-6, "dt = 1e-3: {fine:.3e}");
    let (e1, e2) = (kr_flat_error(2e-2), kr_flat_error(1e-2));
    assert!(
        e1 / e2 >= 15.0,
        "halving dt reduced the error only {:.2}x",
        e1 / e2
    );
}

#[test]
fn fubini_study_shrinks_linearly_under_kahler_ricci() {
    // Ric(ω_FS) = 2ω_FS and n = 1 ⇒ ω(t) = (1 − 2t)ω_FS, bisectional K(t) = 2/(1 − 2t).
    let r = run_flow(&FlowConfig::from_preset("cp1-kr").unwrap()).unwrap();
    assert_eq!(r.summary.stop_reason, StopReason::Completed);
    let t = 0.2;
    let mut err: f64 = 0.0;
    for (_, f) in &r.snapshot.fields {
        for i in (0..f.grid.len()).filter(|&i| f.grid.is_active(i)) {
            let p = f.grid.position(i);
            let exact = (1.0 - 2.0 * t) / (1.0 + p[0] * p[0] + p[1] * p[1]).powi(2);
            err = err.max((f.values[i].re - exact).abs() / exact);
        }
    }
    assert!(err < 1e-4, "relative error {err:.3e}");
    for row in &r.rows {
        let k = 2.0 / (1.0 - 2.0 * row.t);
        assert!(
            (row.min_value - k).abs() < 1e-3 * k,
            "t = {}: {} vs {k}",
            row.t,
            row.min_value
        );
    }
    assert!(r.check_max("min_det_ratio").unwrap() <= 1.0 + 1e-12);
}

#[test]
fn zero_step_is_the_identity_for_every_flow() {
    let grid = ChartGrid::torus(1, 16, TAU).unwrap();
    let h = metrics::curved_rank2(&grid, 0.3, 0.1).unwrap();
    let g = unit(&grid);
    for scheme in [Scheme::Euler, Scheme::Rk4] {
        let same = hym_step(&h, &g, 0.0, scheme).unwrap();
        assert!(max_diff(&same.field.values, &h.field.values) < 1e-15);

        let base = BaseMetric::Chart(metrics::conformal_torus(&grid, 0.3).unwrap());
        let next = kr_step(&base, 0.0, scheme).unwrap();
        assert!(
            max_diff(
                &next.charts()[0].field.values,
                &base.charts()[0].field.values
            ) < 1e-15
        );

        let eta = HermitianMatrixField::from_fn(&grid, 2, |p| {
            flat_base_matrix() * c(2.0 - p[0].cos(), 0.0)
        })
        .unwrap();
        let path = MetricPath {
            g0: Mat::identity(1, 1),
            rate: 0.5,
        };
        let same = max_principle_step(&eta, &Source::Conjugation, &path, 0.1, 0.0, scheme).unwrap();
        assert!(max_diff(&same.field.values, &eta.field.values) < 1e-15);
    }
    let coarse = ChartGrid::torus(1, 8, TAU).unwrap();
    let spec = projflow_core::finsler::FinslerMetricSpec::hermitian_induced(
        metrics::curved_rank2(&coarse, 0.3, 0.1).unwrap(),
    )
    .unwrap();
    let flow = FinslerFlow::new(&spec, &unit(&coarse), 12).unwrap();
    let state = FlowState::new(Payload::Finsler(flow.initial_state()), 0.0);
    let next = finsler_flow_step(&state, &flow, 0.0, Scheme::Rk4).unwrap();
    let (Payload::Finsler(a), Payload::Finsler(b)) = (&state.payload, &next.payload) else {
        unreachable!()
    };
    assert!(a.iter().zip(b).all(|(x, y)| (x - y).abs() < 1e-15));
}

#[test]
fn euler_forward_then_backward_returns_to_second_order() {
    let grid = ChartGrid::torus(1, 16, TAU).unwrap();
    let h = metrics::curved_rank2(&grid, 0.3, 0.1).unwrap();
    let g = unit(&grid);
    let round_trip = |dt: f64| {
        let there = hym_step(&h, &g, dt, Scheme::Euler).unwrap();
        let back = hym_step(&there, &g, -dt, Scheme::Euler).unwrap();
        max_diff(&back.field.values, &h.field.values)
    };
    let (e1, e2) = (round_trip(2e-3), round_trip(1e-3));
    assert!(
        e1 > 0.0 && (3.5..4.5).contains(&(e1 / e2)),
        "{e1:.3e} / {e2:.3e}"
    );
}

#[test]
fn semipositive_hym_run_keeps_its_griffiths_minimum() {
    let r = run_flow(&FlowConfig::from_preset("curve-hym-semipositive").unwrap()).unwrap();
    assert_eq!(r.summary.stop_reason, StopReason::Completed);
    assert!(r.rows[0].min_value >= 0.0);
    assert!(r.summary.min_monitored >= -1e-5 && !r.summary.positivity_violation);
    assert!(r.check_max("hermitian_defect").unwrap() < 1e-12);
}

#[test]
fn mixed_sign_hym_run_reports_its_negative_minimum() {
    let r = run_flow(&FlowConfig::from_preset("curve-hym-mixed").unwrap()).unwrap();
    assert!((r.rows[0].min_value + 0.125).abs() < 1e-4);
    assert!(
        !r.summary.positivity_violation,
        "mixed presets are not expected to stay semipositive"
    );
}

#[test]
fn flat_finsler_flow_is_a_pure_rescaling() {
    // Ψ ≡ 0 ⇒ ∂u/∂t = r − 1 = 1, so u(t) = t; the HYM companion follows e^{−t}h₀.
    let t_end = 0.06;
    let r = run_flow(&config("torus-finsler-flat", |c| c.t_end = t_end)).unwrap();
    assert_eq!(r.summary.stop_reason, StopReason::Completed);
    let err = r
        .snapshot
        .fields
        .iter()
        .flat_map(|(_, f)| f.values.iter().map(|v| (v.re - t_end).abs() / t_end))
        .fold(0.0, f64::max);
    assert!(err < 1e-6, "u − t: {err:.3e}");
    assert!(r.check_max("hym_gap").unwrap() < 1e-5);
    assert!(r.check_max("hermitian_fit_deviation").unwrap() < 1e-5);
    assert!(r.check_max("stitching_defect").unwrap() < STITCHING_TOL);
}

fn touching_eta(grid: &ChartGrid) -> (HermitianMatrixField, Vec<f64>) {
    let psi: Vec<f64> = (0..grid.len())
        .map(|i| 4.0 - grid.position(i).iter().map(|x| x.cos()).sum::<f64>())
        .collect();
    let eta = HermitianMatrixField::from_fn(grid, 2, |p| {
        flat_base_matrix() * c(4.0 - p.iter().map(|x| x.cos()).sum::<f64>(), 0.0)
    })
    .unwrap();
    (eta, psi)
}

#[test]
fn constant_multiple_of_the_metric_is_stationary() {
    let grid = ChartGrid::torus(2, 8, TAU).unwrap();
    let g0 = flat_base_matrix();
    let eta0 = HermitianMatrixField::constant(&grid, &(&g0 * c(0.7, 0.0))).unwrap();
    let path = MetricPath { g0, rate: 0.0 };
    let run = max_principle_sim(&eta0, &Source::Zero, &path, 1e-2, 0.5, Scheme::Rk4, 10).unwrap();
    assert!(max_diff(&run.eta.field.values, &eta0.field.values) < 1e-14);
    assert!(run.series.iter().all(|r| (r.min_value - 0.7).abs() < 1e-12));
}

#[test]
fn touching_form_stays_nonnegative_and_tracks_the_scalar_oracle() {
    let grid = ChartGrid::torus(2, 8, TAU).unwrap();
    let (eta0, psi0) = touching_eta(&grid);
    let path = MetricPath {
        g0: flat_base_matrix(),
        rate: 0.5,
    };
    for (name, source) in Source::catalog() {
        let run = max_principle_sim(&eta0, &source, &path, 1e-2, 0.5, Scheme::Rk4, 5).unwrap();
        let min = run
            .series
            .iter()
            .map(|r| r.min_value)
            .fold(f64::INFINITY, f64::min);
        assert!(min >= -1e-6, "{name}: {min:.3e}");
        if source.coefficient(&[0.0; 4], 0.0).is_none() {
            continue;
        }
        let oracle =
            scalar_heat_oracle(&grid, &psi0, &source, &path, 1e-2, 0.5, Scheme::Rk4, 5).unwrap();
        assert_eq!(oracle.len(), run.series.len());
        for (r, (t, m)) in run.series.iter().zip(&oracle) {
            assert_eq!(r.time, Some(*t));
            assert!(
                (r.min_value - m).abs() < 1e-5,
                "{name} t = {t}: {} vs {m}",
                r.min_value
            );
        }
    }
}

#[test]
fn linear_source_grows_the_form_where_it_is_positive() {
    let grid = ChartGrid::torus(2, 8, TAU).unwrap();
    let (eta0, _) = touching_eta(&grid);
    let path = MetricPath {
        g0: flat_base_matrix(),
        rate: 0.0,
    };
    let run = max_principle_sim(
        &eta0,
        &Source::Scalar { c: 1.0 },
        &path,
        1e-2,
        0.5,
        Scheme::Rk4,
        50,
    )
    .unwrap();
    // The mean of ψ obeys d/dt mean = mean exactly, so the trace grows by e^{t}.
    let trace =
        |f: &HermitianMatrixField| (0..grid.len()).map(|i| f.matrix(i).trace().re).sum::<f64>();
    let ratio = trace(&run.eta) / trace(&eta0);
    assert!((ratio - 0.5f64.exp()).abs() < 1e-8, "{ratio}");
}

#[test]
fn config_rejects_unknown_keys_bad_versions_and_unstable_steps() {
    let good = FlowConfig::from_preset("torus-hym-flat").unwrap();
    let json = good.to_json().unwrap();
    assert_eq!(FlowConfig::from_json(&json).unwrap(), good);

    let typo = json.replacen("\"dt\"", "\"dtt\"", 1);
    assert!(matches!(FlowConfig::from_json(&typo), Err(Error::Config(m)) if m.contains("dtt")));

    let version = json.replacen("\"schema_version\": 1", "\"schema_version\": 2", 1);
    assert!(
        matches!(FlowConfig::from_json(&version), Err(Error::Config(m)) if m.contains("schema_version"))
    );

    let unstable = config("torus-hym-flat", |c| c.dt = 0.5);
    assert!(matches!(unstable.validate(), Err(Error::Config(m)) if m.contains("dt")));

    let unknown = config("torus-hym-flat", |c| c.preset = "nope".into());
    assert!(matches!(run_flow(&unknown), Err(Error::Config(m)) if m.contains("torus-hym-flat")));

    let zero = config("torus-hym-flat", |c| c.monitor_every = 0);
    assert!(matches!(zero.validate(), Err(Error::Config(m)) if m.contains("monitor_every")));
}

#[test]
fn every_preset_resolves_to_a_valid_configuration() {
    for p in registry() {
        let cfg = FlowConfig::from_preset(p.id).unwrap();
        assert_eq!(cfg.validate().unwrap(), p);
    }
}

#[test]
fn reruns_reproduce_the_monitor_csv() {
    let cfg = FlowConfig::from_preset("curve-hym-semipositive").unwrap();
    let a = monitor_csv(&run_flow(&cfg).unwrap().rows).unwrap();
    let b = monitor_csv(&run_flow(&cfg).unwrap().rows).unwrap();
    assert_eq!(a, b);
}

#[test]
fn run_directory_holds_config_csv_snapshot_and_summary() {
    let cfg = config("torus-hym-flat", |c| c.t_end = 0.1);
    let report = run_flow(&cfg).unwrap();
    let dir = tempfile::tempdir().unwrap();
    write_run_dir(&report, dir.path()).unwrap();

    let csv = std::fs::read_to_string(dir.path().join("monitor.csv")).unwrap();
    assert_eq!(
        csv.lines().next().unwrap(),
        "t,min_value,argmin_index,field_scale,dt"
    );
    assert_eq!(csv.lines().count(), report.rows.len() + 1);

    let summary: RunSummary =
        serde_json::from_str(&std::fs::read_to_string(dir.path().join("summary.json")).unwrap())
            .unwrap();
    assert_eq!(summary.stop_reason, StopReason::Completed);
    assert_eq!(summary.step_count, 100);
    assert_eq!(summary.seed, DEFAULT_SEED);

    let snap = read_snapshot(std::fs::File::open(dir.path().join("final.snap")).unwrap()).unwrap();
    assert_eq!(snap, report.snapshot);

    let copy =
        FlowConfig::from_json(&std::fs::read_to_string(dir.path().join("config.json")).unwrap())
            .unwrap();
    assert_eq!(
        monitor_csv(&run_flow(&copy).unwrap().rows).unwrap(),
        csv.into_bytes()
    );
}
