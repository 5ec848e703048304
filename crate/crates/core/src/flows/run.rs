use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::config::FlowConfig;
use super::finsler_flow::FinslerFlow;
use super::hym::hym_step;
use super::integrator::{step_count, step_times};
use super::kr::{kr_step, BaseMetric};
use super::maxprinciple::{eta_min, max_principle_step, MetricPath, Source};
use super::presets::{ExperimentPreset, Geometry, InitialMetric};
use super::state::{finsler_flow_step, CheckRecord, FlowKind, FlowState, Payload};
use crate::curvature::{
    check_kahler, chern_curvature, griffiths_min, griffiths_min_charts, GriffithsChart,
    PositivityReport, ProbeConfig, ProbeKind,
};
use crate::finsler::FinslerMetricSpec;
use crate::gridcore::{
    write_snapshot, ChartGrid, Cp1Atlas, HermitianMatrixField, Mat, Snapshot, CP1_HALF_WIDTH,
    INTERP_NODES,
};
use crate::metrics::{self, TwistedParams};
use crate::{Error, Result, C64};

/// Why a run ended.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum StopReason {
    Completed,
    Collapse,
    PositivityLost,
    PseudoconvexityLost,
    StitchingFailure,
    NotKahler,
    NonFinite,
}

impl StopReason {
    pub fn is_numeric_halt(&self) -> bool {
        *self != StopReason::Completed
    }
}

/// One row of monitor.csv.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct MonitorRow {
    pub t: f64,
    pub min_value: f64,
    pub argmin_index: usize,
    pub field_scale: f64,
    pub dt: f64,
}

/// Contents of summary.json.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RunSummary {
    pub preset: String,
    pub kind: FlowKind,
    pub stop_reason: StopReason,
    pub stop_time: f64,
    pub step_count: usize,
    pub wall_time_s: f64,
    pub seed: u64,
    pub min_monitored: f64,
    pub positivity_violation: bool,
    pub message: Option<String>,
    /// Largest value of every logged check over the run.
    pub check_maxima: Vec<(String, f64)>,
}

#[derive(Clone, Debug)]
pub struct FlowReport {
    pub config: FlowConfig,
    pub rows: Vec<MonitorRow>,
    pub reports: Vec<PositivityReport>,
    pub checks: Vec<CheckRecord>,
    pub summary: RunSummary,
    pub snapshot: Snapshot,
}

impl FlowReport {
    /// Largest logged value of a named check.
    pub fn check_max(&self, name: &str) -> Option<f64> {
        self.checks
            .iter()
            .filter(|c| c.name == name)
            .map(|c| c.value)
            .reduce(f64::max)
    }
}

enum Context {
    Hym {
        g: HermitianMatrixField,
    },
    Kr {
        initial: BaseMetric,
    },
    Finsler {
        flow: Box<FinslerFlow>,
        companion: Option<(HermitianMatrixField, HermitianMatrixField)>,
    },
    MaxPrinciple {
        source: Source,
        path: MetricPath,
    },
}

/// Wall clock; wasm32-unknown-unknown has none, so it reads zero there.
struct Stopwatch(#[cfg(not(target_arch = "wasm32"))] std::time::Instant);

impl Stopwatch {
    fn start() -> Self {
        #[cfg(not(target_arch = "wasm32"))]
        return Stopwatch(std::time::Instant::now());
        #[cfg(target_arch = "wasm32")]
        return Stopwatch();
    }

    fn seconds(&self) -> f64 {
        #[cfg(not(target_arch = "wasm32"))]
        return self.0.elapsed().as_secs_f64();
        #[cfg(target_arch = "wasm32")]
        return 0.0;
    }
}

fn c(re: f64, im: f64) -> C64 {
    C64::new(re, im)
}

/// Constant Kähler metric of the flat-base presets.
pub fn flat_base_matrix() -> Mat {
    Mat::from_row_slice(2, 2, &[c(1.0, 0.0), c(0.2, 0.1), c(0.2, -0.1), c(1.5, 0.0)])
}

fn unit_metric(grid: &ChartGrid) -> Result<HermitianMatrixField> {
    HermitianMatrixField::constant(grid, &Mat::identity(grid.complex_dim, grid.complex_dim))
}

fn setup(p: &ExperimentPreset, probe: &ProbeConfig) -> Result<(Payload, Context)> {
    let grid = p.geometry.base_grid()?;
    let period = match p.geometry {
        Geometry::Torus { period, .. } | Geometry::TorusCurveTimesCp1 { period, .. } => period,
        Geometry::Cp1 { .. } => 0.0,
    };
    let bundle = |m: InitialMetric| -> Result<HermitianMatrixField> {
        match m {
            InitialMetric::FlatBundle | InitialMetric::FinslerFlat => {
                metrics::flat(&grid, &metrics::flat_rank2_matrix())
            }
            InitialMetric::TwistedSemipositive | InitialMetric::FinslerTwistedSemipositive => {
                metrics::twisted(&grid, TwistedParams::semipositive(period))
            }
            InitialMetric::MixedSign { amp } => metrics::mixed_sign(&grid, amp),
            _ => Err(Error::Config(format!(
                "preset {} has no bundle metric",
                p.id
            ))),
        }
    };
    match (p.kind, p.metric) {
        (FlowKind::Hym, m) => {
            let h = bundle(m)?;
            let g = unit_metric(&grid)?;
            if p.expect_semipositive {
                let r0 = griffiths_min(&chern_curvature(&h)?, &h, &g, probe)?;
                if !r0.is_semipositive() {
                    return Err(Error::Config(format!(
                        "preset {}: initial Griffiths minimum {:.3e} is not semipositive",
                        p.id, r0.min_value
                    )));
                }
            }
            Ok((Payload::Hym(h), Context::Hym { g }))
        }
        (FlowKind::Kr, InitialMetric::FlatBase) => {
            let g = BaseMetric::Chart(HermitianMatrixField::constant(&grid, &flat_base_matrix())?);
            Ok((Payload::Kr(g.clone()), Context::Kr { initial: g }))
        }
        (FlowKind::Kr, InitialMetric::FubiniStudy) => {
            let Geometry::Cp1 { n } = p.geometry else {
                return Err(Error::Config(format!(
                    "preset {}: Fubini-Study needs the CP1 geometry",
                    p.id
                )));
            };
            let g = BaseMetric::fubini_study(Cp1Atlas::new(n, CP1_HALF_WIDTH, INTERP_NODES)?)?;
            Ok((Payload::Kr(g.clone()), Context::Kr { initial: g }))
        }
        (FlowKind::Finsler, m) => {
            let Geometry::TorusCurveTimesCp1 { fiber_n, .. } = p.geometry else {
                return Err(Error::Config(format!(
                    "preset {}: the Finsler flow needs torus x CP1",
                    p.id
                )));
            };
            let h = bundle(m)?;
            let g = unit_metric(&grid)?;
            let spec = FinslerMetricSpec::hermitian_induced(h.clone())?;
            let flow = FinslerFlow::new(&spec, &g, fiber_n)?;
            let u = flow.initial_state();
            Ok((
                Payload::Finsler(u),
                Context::Finsler {
                    flow: Box::new(flow),
                    companion: Some((h, g)),
                },
            ))
        }
        (FlowKind::MaxPrinciple, InitialMetric::EtaTouchingZero { source }) => {
            let g0 = flat_base_matrix();
            let eta = HermitianMatrixField::from_fn(&grid, 2, |q| {
                let psi = 4.0 - q.iter().map(|x| x.cos()).sum::<f64>();
                &g0 * c(psi, 0.0)
            })?;
            Ok((
                Payload::MaxPrinciple(eta),
                Context::MaxPrinciple {
                    source,
                    path: MetricPath { g0, rate: 0.5 },
                },
            ))
        }
        _ => Err(Error::Config(format!(
            "preset {} pairs an unsupported metric with its flow",
            p.id
        ))),
    }
}

fn monitor(
    state: &FlowState,
    ctx: &Context,
    probe: &ProbeConfig,
) -> Result<(PositivityReport, usize)> {
    let (mut report, index) = match (&state.payload, ctx) {
        (Payload::Hym(h), Context::Hym { g }) => {
            let r = griffiths_min(&chern_curvature(h)?, h, g, probe)?;
            let i = r.argmin.node;
            (r, i)
        }
        (Payload::Kr(g), Context::Kr { .. }) => {
            let charts = g.charts();
            let curvs = charts
                .iter()
                .map(|c| chern_curvature(c))
                .collect::<Result<Vec<_>>>()?;
            let probes: Vec<GriffithsChart> = charts
                .iter()
                .zip(&curvs)
                .map(|(c, r)| GriffithsChart {
                    curvature: r,
                    h: c,
                    g: c,
                })
                .collect();
            let r = griffiths_min_charts(&probes, ProbeKind::Bisectional, probe)?;
            let i = r.argmin.chart_index * charts[0].grid().len() + r.argmin.node;
            (r, i)
        }
        (Payload::Finsler(u), Context::Finsler { flow, .. }) => {
            let r = flow.oneone_min(u)?;
            let i = r.argmin.node;
            (r, i)
        }
        (Payload::MaxPrinciple(eta), Context::MaxPrinciple { path, .. }) => {
            let r = eta_min(eta, &path.at(state.t), state.t)?;
            let i = r.argmin.node;
            (r, i)
        }
        _ => return Err(Error::Shape("payload and run context disagree".into())),
    };
    report.time = Some(state.t);
    Ok((report, index))
}

fn checks(state: &FlowState, ctx: &Context) -> Result<Vec<(String, f64)>> {
    let mut out = vec![];
    match (&state.payload, ctx) {
        (Payload::Hym(h), _) => out.push(("hermitian_defect".into(), h.max_hermitian_defect())),
        (Payload::Kr(g), Context::Kr { initial }) => {
            out.push(("min_det_ratio".into(), g.min_det_ratio(initial)));
            for chart in g.charts() {
                check_kahler(chart)?;
            }
        }
        (Payload::Finsler(u), Context::Finsler { flow, companion }) => {
            out.push(("stitching_defect".into(), flow.stitching_defect(u).0));
            out.push((
                "hermitian_fit_deviation".into(),
                flow.hermitian_fit_deviation(u)?,
            ));
            if let Some((h, _)) = companion {
                out.push(("hym_gap".into(), flow.hermitian_gap(u, h)?));
            }
        }
        _ => {}
    }
    Ok(out)
}

fn classify(e: &Error, kind: FlowKind) -> Option<StopReason> {
    match e {
        Error::Collapse { .. } => Some(StopReason::Collapse),
        Error::NotPositiveDefinite { .. } if kind == FlowKind::Kr => Some(StopReason::Collapse),
        Error::NotPositiveDefinite { .. } => Some(StopReason::PositivityLost),
        Error::Pseudoconvexity(_) => Some(StopReason::PseudoconvexityLost),
        Error::Stitching { .. } => Some(StopReason::StitchingFailure),
        Error::NotKahler { .. } => Some(StopReason::NotKahler),
        Error::NonFinite { .. } => Some(StopReason::NonFinite),
        _ => None,
    }
}

fn advance_state(
    state: &FlowState,
    ctx: &mut Context,
    cfg: &FlowConfig,
    t0: f64,
    dt: f64,
) -> Result<FlowState> {
    let payload = match (&state.payload, ctx) {
        (Payload::Hym(h), Context::Hym { g }) => Payload::Hym(hym_step(h, g, dt, cfg.scheme)?),
        (Payload::Kr(g), Context::Kr { initial }) => {
            let next = kr_step(g, dt, cfg.scheme)?;
            if next.min_det_ratio(initial) < cfg.tolerance.collapse_ratio {
                return Err(Error::Collapse { t: t0 + dt });
            }
            next.check_positive_definite()?;
            Payload::Kr(next)
        }
        (Payload::Finsler(_), Context::Finsler { flow, companion }) => {
            let next = finsler_flow_step(state, flow, dt, cfg.scheme)?;
            if let Some((h, g)) = companion {
                *h = hym_step(h, g, dt, cfg.scheme)?;
            }
            let Payload::Finsler(u) = next.payload else {
                unreachable!()
            };
            let (defect, location) = flow.stitching_defect(&u);
            if defect > cfg.tolerance.stitching {
                return Err(Error::Stitching { defect, location });
            }
            Payload::Finsler(u)
        }
        (Payload::MaxPrinciple(eta), Context::MaxPrinciple { source, path }) => {
            Payload::MaxPrinciple(max_principle_step(eta, source, path, t0, dt, cfg.scheme)?)
        }
        _ => return Err(Error::Shape("payload and run context disagree".into())),
    };
    Ok(FlowState {
        t: t0 + dt,
        payload,
        dt,
        step_count: state.step_count + 1,
        diagnostics: vec![],
        conserved: vec![],
    })
}

/// Runs a configuration to t_end or to the first numeric halt. Halts are
/// reported in the summary; only setup and I/O problems are errors.
pub fn run_flow(cfg: &FlowConfig) -> Result<FlowReport> {
    let preset = cfg.validate()?;
    let start = Stopwatch::start();
    let probe = ProbeConfig {
        sequence_offset: cfg.seed,
        ..ProbeConfig::default()
    };
    let (payload, mut ctx) = setup(&preset, &probe)?;
    let mut state = FlowState::new(payload, cfg.dt);
    let mut rows = vec![];
    let mut reports = vec![];
    let mut log = vec![];
    let record = |state: &FlowState,
                  ctx: &Context,
                  rows: &mut Vec<MonitorRow>,
                  reports: &mut Vec<PositivityReport>,
                  log: &mut Vec<CheckRecord>|
     -> Result<()> {
        let (report, index) = monitor(state, ctx, &probe)?;
        rows.push(MonitorRow {
            t: state.t,
            min_value: report.min_value,
            argmin_index: index,
            field_scale: report.field_scale,
            dt: state.dt,
        });
        reports.push(report);
        for (name, value) in checks(state, ctx)? {
            log.push(CheckRecord {
                t: state.t,
                name,
                value,
            });
        }
        Ok(())
    };
    let mut stop = (StopReason::Completed, None);
    if let Err(e) = record(&state, &ctx, &mut rows, &mut reports, &mut log) {
        match classify(&e, state.kind()) {
            Some(r) => stop = (r, Some(e.to_string())),
            None => return Err(e),
        }
    }
    let steps = step_count(cfg.dt, cfg.t_end)?;
    let mut stop_time = 0.0;
    if stop.0 == StopReason::Completed {
        for k in 0..steps {
            let (t0, t1) = step_times(k, steps, cfg.dt, cfg.t_end);
            // Only a genuinely shorter final step departs from cfg.dt.
            let h = if (t1 - t0 - cfg.dt).abs() <= 1e-9 * cfg.dt {
                cfg.dt
            } else {
                t1 - t0
            };
            let attempt = advance_state(&state, &mut ctx, cfg, t0, h).and_then(|mut next| {
                next.t = t1;
                if (k + 1) % cfg.monitor_every == 0 || k + 1 == steps {
                    record(&next, &ctx, &mut rows, &mut reports, &mut log)?;
                }
                Ok(next)
            });
            match attempt {
                Ok(next) => {
                    state = next;
                    state.t = t1;
                }
                Err(e) => match classify(&e, state.kind()) {
                    Some(r) => {
                        stop = (r, Some(e.to_string()));
                        stop_time = t1;
                        break;
                    }
                    None => return Err(e),
                },
            }
        }
    }
    if stop.0 == StopReason::Completed {
        stop_time = state.t;
    }
    let finsler = match &ctx {
        Context::Finsler { flow, .. } => Some(flow.as_ref()),
        _ => None,
    };
    let snapshot = Snapshot {
        time: state.t,
        kind: serde_json::to_value(state.kind())?
            .as_str()
            .unwrap_or("unknown")
            .to_string(),
        fields: state.fields(finsler)?,
    };
    let min_monitored = rows
        .iter()
        .map(|r| r.min_value)
        .fold(f64::INFINITY, f64::min);
    let positivity_violation =
        preset.expect_semipositive && min_monitored < -cfg.tolerance.positivity;
    let mut check_maxima: Vec<(String, f64)> = vec![];
    for c in &log {
        match check_maxima.iter_mut().find(|(n, _)| *n == c.name) {
            Some((_, v)) => *v = v.max(c.value),
            None => check_maxima.push((c.name.clone(), c.value)),
        }
    }
    state.diagnostics = reports.clone();
    state.conserved = log.clone();
    let summary = RunSummary {
        preset: cfg.preset.clone(),
        kind: state.kind(),
        stop_reason: stop.0,
        stop_time,
        step_count: state.step_count,
        wall_time_s: start.seconds(),
        seed: cfg.seed,
        min_monitored,
        positivity_violation,
        message: stop.1,
        check_maxima,
    };
    Ok(FlowReport {
        config: cfg.clone(),
        rows,
        reports,
        checks: log,
        summary,
        snapshot,
    })
}

/// monitor.csv as bytes; floats use shortest round-trip formatting.
pub fn monitor_csv(rows: &[MonitorRow]) -> Result<Vec<u8>> {
    let mut w = csv::Writer::from_writer(vec![]);
    for r in rows {
        w.serialize(r)
            .map_err(|e| Error::Io(std::io::Error::other(e)))?;
    }
    w.into_inner()
        .map_err(|e| Error::Io(std::io::Error::other(e.to_string())))
}

/// Writes config.json, monitor.csv, final.snap and summary.json.
pub fn write_run_dir(report: &FlowReport, dir: &Path) -> Result<()> {
    fs::create_dir_all(dir)?;
    fs::write(dir.join("config.json"), report.config.to_json()?)?;
    fs::write(dir.join("monitor.csv"), monitor_csv(&report.rows)?)?;
    let mut snap = fs::File::create(dir.join("final.snap"))?;
    write_snapshot(&mut snap, &report.snapshot)?;
    fs::write(
        dir.join("summary.json"),
        serde_json::to_string_pretty(&report.summary)?,
    )?;
    Ok(())
}
