use std::f64::consts::TAU;

use projflow_core::curvature::*;
use projflow_core::finsler::*;
use projflow_core::flows::*;
use projflow_core::gridcore::sampling::halton_point;
use projflow_core::gridcore::*;
use projflow_core::{metrics, Result, C64};

use crate::exit::CliError;

pub const SUITES: [&str; 3] = ["identities", "positivity", "reductions"];

/// How a row's value is judged against its tolerance.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Bound {
    Below,
    AtLeast,
}

#[derive(Clone, Debug)]
pub struct Row {
    pub name: String,
    pub value: f64,
    pub tol: f64,
    pub bound: Bound,
    pub note: Option<String>,
}

impl Row {
    fn new(name: impl Into<String>, result: Result<f64>, tol: f64, bound: Bound) -> Self {
        let (value, note) = match result {
            Ok(v) => (v, None),
            Err(e) => (f64::NAN, Some(e.to_string())),
        };
        Row {
            name: name.into(),
            value,
            tol,
            bound,
            note,
        }
    }

    fn below(name: impl Into<String>, result: Result<f64>, tol: f64) -> Self {
        Self::new(name, result, tol, Bound::Below)
    }

    fn at_least(name: impl Into<String>, result: Result<f64>, floor: f64) -> Self {
        Self::new(name, result, floor, Bound::AtLeast)
    }

    pub fn pass(&self) -> bool {
        match self.bound {
            Bound::Below => self.value < self.tol,
            Bound::AtLeast => self.value >= self.tol,
        }
    }
}

/// Deterministic (node, v, λ) samples from the Halton sequence.
fn samples(count: usize, nodes: usize, offset: usize) -> Vec<(usize, Vec<C64>, C64)> {
    (0..count as u64)
        .map(|k| {
            let h = halton_point(k, 7, offset);
            let node = ((h[0] * nodes as f64) as usize).min(nodes - 1);
            let s = |x: f64| 2.0 * x - 1.0;
            let v = vec![C64::new(s(h[1]), s(h[2])), C64::new(s(h[3]), s(h[4]))];
            (node, v, C64::new(2.0 * s(h[5]), 2.0 * s(h[6])))
        })
        .collect()
}

fn max_of(values: impl IntoIterator<Item = Result<f64>>) -> Result<f64> {
    values.into_iter().try_fold(0.0f64, |m, v| Ok(m.max(v?)))
}

fn torus64() -> Result<ChartGrid> {
    ChartGrid::torus(1, 64, TAU)
}

fn unit(grid: &ChartGrid) -> Result<HermitianMatrixField> {
    HermitianMatrixField::constant(grid, &Mat::identity(grid.complex_dim, grid.complex_dim))
}

fn family_rows(name: &str, spec: &FinslerMetricSpec) -> Vec<Row> {
    let len = spec.grid().len();
    let tag = |check: &str| format!("{check} [{name}]");
    let point = |node: usize, v: &[C64]| ProjectivePoint::from_vector(node, v);
    vec![
        Row::below(
            tag("homogeneity"),
            max_of(
                samples(100, len, 0)
                    .into_iter()
                    .map(|(n, v, l)| homogeneity_residuals(spec, n, &v, l).map(|(a, b)| a.max(b))),
            ),
            1e-8,
        ),
        Row::below(
            tag("jet identities"),
            max_of(
                samples(100, len, 0)
                    .into_iter()
                    .map(|(n, v, _)| jet(spec, n, &v).map(|j| jet_identity_residuals(&j).max())),
            ),
            1e-8,
        ),
        Row::below(
            tag("log-Hessian decomposition"),
            max_of(
                samples(100, len, 1)
                    .into_iter()
                    .map(|(n, v, _)| decomposition_residual(spec, &point(n, &v)?)),
            ),
            1e-5,
        ),
        Row::below(
            tag("coefficient identity"),
            max_of(
                samples(100, len, 1)
                    .into_iter()
                    .map(|(n, v, _)| coefficient_identity_residual(spec, &point(n, &v)?)),
            ),
            1e-8,
        ),
        Row::below(
            tag("pullback"),
            max_of(
                samples(50, len, 2)
                    .into_iter()
                    .map(|(n, v, _)| pullback_residual(spec, n, &v)),
            ),
            1e-5,
        ),
        Row::below(
            tag("Euler degeneracy"),
            max_of(
                samples(50, len, 2)
                    .into_iter()
                    .map(|(n, v, _)| euler_degeneracy(spec, n, &v)),
            ),
            1e-8,
        ),
        Row::below(
            tag("vertical Psi"),
            max_of(
                samples(20, len, 3)
                    .into_iter()
                    .map(|(n, v, _)| vertical_psi_residual(spec, &point(n, &v)?, 0, 0)),
            ),
            1e-4,
        ),
        Row::below(
            tag("vertical Laplacian forms"),
            (|| {
                let p = ProjectivePoint::in_chart(137, 1, vec![C64::new(0.3, 0.2)])?;
                let f = |w: &[C64]| (1.0 + w[0].norm_sqr()).ln() + 0.3 * w[0].re;
                let (a, b) = (
                    vertical_laplacian(spec, &p, &f)?,
                    vertical_laplacian_euclidean(spec, &p, &f)?,
                );
                Ok((a - b).abs() / a.abs().max(1.0))
            })(),
            1e-6,
        ),
        Row::at_least(
            tag("pseudoconvexity"),
            spec.pseudoconvexity_scan(PSEUDOCONVEXITY_SAMPLES),
            PSEUDOCONVEXITY_FLOOR,
        ),
    ]
}

/// Homogeneity, decomposition, pullback and vertical identities for both
/// metric families; `epsilon` sets the perturbation of the second family.
pub fn identities(epsilon: f64) -> std::result::Result<Vec<Row>, CliError> {
    let grid = torus64()?;
    let hermitian = FinslerMetricSpec::hermitian_induced(metrics::curved_rank2(&grid, 0.1, 0.05)?)?;
    let perturbed = FinslerMetricSpec::perturbed_hermitian_unchecked(
        metrics::anisotropic_rank2(&grid, 0.1, 0.05)?,
        epsilon,
    )?;
    let mut rows = family_rows("hermitian", &hermitian);
    rows.extend(family_rows(&format!("perturbed eps={epsilon}"), &perturbed));
    Ok(rows)
}

fn min_row(name: &str, expect: f64, tol: f64, report: Result<PositivityReport>) -> Row {
    Row::below(
        format!("{name} min = {expect}"),
        report.map(|r| (r.min_value - expect).abs()),
        tol,
    )
}

fn griffiths(h: &HermitianMatrixField, g: &HermitianMatrixField) -> Result<PositivityReport> {
    griffiths_min(&chern_curvature(h)?, h, g, &ProbeConfig::default())
}

/// Probe minima against closed forms, argmin reproducibility and the
/// T-form sign on Fubini-Study.
pub fn positivity() -> std::result::Result<Vec<Row>, CliError> {
    let grid = torus64()?;
    let one = unit(&grid)?;
    let twisted = metrics::TwistedParams::semipositive(TAU);
    let mut rows = vec![
        min_row(
            "line bundle amp 0.2",
            -0.05,
            1e-6,
            griffiths(&metrics::line_bundle(&grid, 0.2)?, &one),
        ),
        min_row(
            "mixed sign amp 0.5",
            -0.125,
            1e-6,
            griffiths(&metrics::mixed_sign(&grid, 0.5)?, &one),
        ),
        min_row(
            "twisted semipositive",
            twisted.kappa * metrics::TOUCH_MARGIN,
            1e-6,
            griffiths(&metrics::twisted(&grid, twisted)?, &one),
        ),
    ];

    let g32 = ChartGrid::torus(1, 32, TAU)?;
    let (h, g) = (
        metrics::curved_rank2(&g32, 0.3, 0.1)?,
        metrics::conformal_torus(&g32, 0.2)?,
    );
    rows.push(Row::below(
        "Griffiths argmin re-evaluation",
        (|| {
            let r = chern_curvature(&h)?;
            let rep = griffiths_min(&r, &h, &g, &ProbeConfig::default())?;
            Ok(
                (griffiths_value(&r, &h, &g, rep.argmin.node, &rep.argmin.x, &rep.argmin.y)
                    - rep.min_value)
                    .abs(),
            )
        })(),
        1e-12,
    ));
    let g16 = ChartGrid::torus(1, 16, TAU)?;
    rows.push(Row::below(
        "(1,1)-form argmin re-evaluation",
        (|| {
            let spec =
                FinslerMetricSpec::hermitian_induced(metrics::curved_rank2(&g16, 0.3, 0.1)?)?;
            let one = unit(&g16)?;
            let rep = oneone_min_eigen_field(&spec, &one, 16)?;
            let p = ProjectivePoint::from_vector(rep.argmin.node, &rep.argmin.x)?;
            Ok((oneone_value(&spec, &one, &p)?.0 - rep.min_value).abs())
        })(),
        1e-12,
    ));

    let cp1 = ChartGrid::cp1_chart(0, 161, CP1_HALF_WIDTH)?;
    rows.push(Row::below(
        "Fubini-Study K = 2",
        (|| {
            let k = gaussian_curvature(&metrics::fubini_study(&cp1)?)?;
            let strides = cp1.strides();
            Ok((0..cp1.len())
                .filter(|&i| {
                    (0..2).all(|ax| cp1.stencil_offsets(&cp1.coords(i), ax, &strides).is_some())
                })
                .map(|i| (k.values[i].re - 2.0).abs())
                .fold(0.0, f64::max))
        })(),
        1e-6,
    ));
    rows.push(Row::at_least(
        "T-form value on Fubini-Study",
        (|| {
            let grid = ChartGrid::cp1_chart(0, 41, CP1_HALF_WIDTH)?;
            let g = metrics::fubini_study(&grid)?;
            let spec = FinslerMetricSpec::hermitian_induced(g.clone())?;
            let r = chern_curvature(&g)?;
            let strides = grid.strides();
            let nodes: Vec<usize> = (0..grid.len())
                .filter(|&i| {
                    grid.is_active(i)
                        && (0..2).all(|ax| {
                            grid.stencil_offsets(&grid.coords(i), ax, &strides)
                                .is_some()
                        })
                })
                .collect();
            let mut min = f64::INFINITY;
            for (node, v, _) in samples(100, nodes.len(), 4) {
                let p = ProjectivePoint::from_vector(nodes[node], &[C64::new(1.0, 0.0)])?;
                min = min.min(t_form(&spec, &g, &r, &p, &v[..1])?.t_value);
            }
            Ok(min)
        })(),
        0.0,
    ));
    Ok(rows)
}

fn flat_error(values: &[C64], expect: &Mat) -> f64 {
    let r = expect.nrows();
    values
        .chunks(r * r)
        .map(|m| (Mat::from_row_slice(r, r, m) - expect).norm() / expect.norm())
        .fold(0.0, f64::max)
}

fn run(id: &str, edit: impl FnOnce(&mut FlowConfig)) -> Result<FlowReport> {
    let mut cfg = FlowConfig::from_preset(id)?;
    edit(&mut cfg);
    run_flow(&cfg)
}

/// The Hermitian-Yang-Mills, Kähler-Ricci and Finsler flows against closed
/// forms and against each other.
pub fn reductions() -> std::result::Result<Vec<Row>, CliError> {
    let e = (-0.5f64).exp();
    let mut rows = vec![
        Row::below(
            "HYM flat h(t) = e^-t h0",
            run("torus-hym-flat", |_| {}).map(|r| {
                flat_error(
                    &r.snapshot.fields[0].1.values,
                    &(metrics::flat_rank2_matrix() * C64::new(e, 0.0)),
                )
            }),
            1e-8,
        ),
        Row::below(
            "KR flat g(t) = e^-t g0",
            run("torus-kr-flat", |c| c.dt = 1e-2).map(|r| {
                flat_error(
                    &r.snapshot.fields[0].1.values,
                    &(flat_base_matrix() * C64::new(e, 0.0)),
                )
            }),
            1e-6,
        ),
    ];
    let kr_err = |dt: f64| {
        run("torus-kr-flat", |c| c.dt = dt).map(|r| {
            flat_error(
                &r.snapshot.fields[0].1.values,
                &(flat_base_matrix() * C64::new(e, 0.0)),
            )
        })
    };
    rows.push(Row::at_least(
        "KR RK4 error ratio under dt/2",
        (|| Ok(kr_err(2e-2)? / kr_err(1e-2)?))(),
        15.0,
    ));

    let t_end = 0.06;
    let finsler = run("torus-finsler-flat", |c| c.t_end = t_end);
    rows.push(Row::below(
        "Finsler flat u(t) = t",
        finsler.as_ref().map_err(clone_err).map(|r| {
            r.snapshot
                .fields
                .iter()
                .flat_map(|(_, f)| f.values.iter().map(|v| (v.re - t_end).abs() / t_end))
                .fold(0.0, f64::max)
        }),
        1e-6,
    ));
    for (check, tol) in [
        ("hym_gap", 1e-5),
        ("hermitian_fit_deviation", 1e-5),
        ("stitching_defect", STITCHING_TOL),
    ] {
        rows.push(Row::below(
            format!("Finsler flat {check}"),
            finsler
                .as_ref()
                .map_err(clone_err)
                .map(|r| r.check_max(check).unwrap_or(f64::NAN)),
            tol,
        ));
    }

    let grid = torus64()?;
    rows.push(Row::below(
        "Psi vs dual Chern curvature",
        (|| {
            let spec = FinslerMetricSpec::hermitian_induced(metrics::twisted(
                &grid,
                metrics::TwistedParams::semipositive(TAU),
            )?)?;
            let v = [C64::new(0.3, 0.2), C64::new(1.0, -0.1)];
            max_of([0usize, 137, 2000].map(|n| {
                Ok((kobayashi_curvature(&spec, n, &v)?[(0, 0)]
                    - kobayashi_curvature_dual(&spec, n, &v)?[(0, 0)])
                    .norm())
            }))
        })(),
        1e-6,
    ));
    rows.push(Row::below(
        "T-form second term with interior product",
        (|| {
            let grid = ChartGrid::torus(2, 12, TAU)?;
            let g = metrics::product_torus(&grid, 0.2)?;
            let spec = FinslerMetricSpec::hermitian_induced(g.clone())?;
            let r = chern_curvature(&g)?;
            max_of(samples(20, grid.len(), 5).into_iter().map(|(node, v, l)| {
                let u = [l, v[0] * v[1]];
                let rep = t_form(&spec, &g, &r, &ProjectivePoint::from_vector(node, &v)?, &u)?;
                let b = rep.term_b_basis.unwrap_or(f64::NAN);
                Ok((rep.term_b + rep.null_defect - b).abs() / b.abs().max(1.0))
            }))
        })(),
        1e-8,
    ));
    rows.push(Row::below(
        "stationary c*g under the heat flow",
        (|| {
            let grid = ChartGrid::torus(2, 8, TAU)?;
            let g0 = flat_base_matrix();
            let eta0 = HermitianMatrixField::constant(&grid, &(&g0 * C64::new(0.7, 0.0)))?;
            let run = max_principle_sim(
                &eta0,
                &Source::Zero,
                &MetricPath { g0, rate: 0.0 },
                1e-2,
                0.5,
                Scheme::Rk4,
                10,
            )?;
            Ok(run
                .series
                .iter()
                .map(|r| (r.min_value - 0.7).abs())
                .fold(0.0, f64::max))
        })(),
        1e-12,
    ));
    Ok(rows)
}

fn clone_err(e: &projflow_core::Error) -> projflow_core::Error {
    projflow_core::Error::Shape(e.to_string())
}

pub fn run_suite(id: &str, epsilon: f64) -> std::result::Result<Vec<Row>, CliError> {
    match id {
        "identities" => identities(epsilon),
        "positivity" => positivity(),
        "reductions" => reductions(),
        _ => Err(CliError::Config(format!(
            "unknown suite {id:?}; known suites: {}",
            SUITES.join(", ")
        ))),
    }
}

/// Fixed-width table: check, max residual, tolerance, status.
pub fn table(rows: &[Row]) -> String {
    let width = rows.iter().map(|r| r.name.len()).max().unwrap_or(5).max(5);
    let mut out = format!(
        "{:<width$}  {:>12}  {:>14}  status\n",
        "check", "value", "tolerance"
    );
    for r in rows {
        let bound = match r.bound {
            Bound::Below => format!("< {:.1e}", r.tol),
            Bound::AtLeast => format!(">= {:.1e}", r.tol),
        };
        out += &format!(
            "{:<width$}  {:>12.3e}  {:>14}  {}",
            r.name,
            r.value,
            bound,
            if r.pass() { "pass" } else { "FAIL" }
        );
        if let Some(note) = &r.note {
            out += &format!("  ({note})");
        }
        out.push('\n');
    }
    out
}
