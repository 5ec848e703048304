mod exit;
mod plot;
mod suite;

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use projflow_core::finsler::DEFAULT_EPSILON;
use projflow_core::flows::{
    registry, run_flow, write_run_dir, FlowConfig, Geometry, Scheme, StopReason,
};

use exit::{CliError, Exit};

#[derive(Parser)]
#[command(
    name = "projflow",
    version,
    about = "Finsler, Hermitian-Yang-Mills and Kahler-Ricci flow laboratory"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run a preset or a config file and write a run directory.
    Run(RunArgs),
    /// Run a check suite: identities, positivity or reductions.
    Suite(SuiteArgs),
    /// Plot a run's monitor.csv as SVG.
    Plot(PlotArgs),
    /// List the preset registry.
    Presets,
}

#[derive(Args)]
struct RunArgs {
    /// Preset id (see `presets`).
    #[arg(long, conflicts_with = "config", required_unless_present = "config")]
    preset: Option<String>,
    /// Config JSON, e.g. a run directory's config.json.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Run directory [default: runs/<preset>].
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long)]
    t_end: Option<f64>,
    #[arg(long)]
    dt: Option<f64>,
    /// euler or rk4.
    #[arg(long)]
    scheme: Option<Scheme>,
    /// Offset of the deterministic direction samples.
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    monitor_every: Option<usize>,
}

#[derive(Args)]
struct SuiteArgs {
    /// identities, positivity or reductions.
    id: String,
    /// Perturbation of the second metric family in the identities suite.
    #[arg(long, default_value_t = DEFAULT_EPSILON)]
    epsilon: f64,
}

#[derive(Args)]
struct PlotArgs {
    /// monitor.csv of a run directory.
    csv: PathBuf,
    /// Output SVG [default: the CSV path with an .svg extension].
    #[arg(long)]
    out: Option<PathBuf>,
}

fn load_config(args: &RunArgs) -> Result<FlowConfig, CliError> {
    let mut cfg = match (&args.preset, &args.config) {
        (_, Some(path)) => {
            let text = std::fs::read_to_string(path)
                .map_err(|e| CliError::Config(format!("--config {}: {e}", path.display())))?;
            FlowConfig::from_json(&text)
                .map_err(|e| CliError::Config(format!("{}: {e}", path.display())))?
        }
        (Some(id), None) => FlowConfig::from_preset(id)?,
        (None, None) => return Err(CliError::Config("give --preset or --config".into())),
    };
    if let Some(v) = args.t_end {
        cfg.t_end = v;
    }
    if let Some(v) = args.dt {
        cfg.dt = v;
    }
    if let Some(v) = args.scheme {
        cfg.scheme = v;
    }
    if let Some(v) = args.seed {
        cfg.seed = v;
    }
    if let Some(v) = args.monitor_every {
        cfg.monitor_every = v;
    }
    cfg.validate()?;
    Ok(cfg)
}

fn cmd_run(args: &RunArgs) -> Result<Exit, CliError> {
    let cfg = load_config(args)?;
    let out = args
        .out
        .clone()
        .unwrap_or_else(|| Path::new("runs").join(&cfg.preset));
    let report = run_flow(&cfg)?;
    write_run_dir(&report, &out)?;
    let s = &report.summary;
    println!(
        "{}: {:?} at t = {} after {} steps, min monitored {:.6e}, {:.2}s -> {}",
        s.preset,
        s.stop_reason,
        s.stop_time,
        s.step_count,
        s.min_monitored,
        s.wall_time_s,
        out.display()
    );
    if let Some(m) = &s.message {
        eprintln!("halt: {m}");
    }
    if s.stop_reason != StopReason::Completed {
        return Ok(Exit::NumericHalt);
    }
    if s.positivity_violation {
        let row = report
            .rows
            .iter()
            .min_by(|a, b| a.min_value.total_cmp(&b.min_value))
            .expect("monitor rows");
        eprintln!(
            "positivity violation: min {:.6e} < -{:e} at t = {}, grid index {}",
            row.min_value, cfg.tolerance.positivity, row.t, row.argmin_index
        );
        return Ok(Exit::Positivity);
    }
    Ok(Exit::Ok)
}

fn cmd_suite(args: &SuiteArgs) -> Result<Exit, CliError> {
    let rows = suite::run_suite(&args.id, args.epsilon)?;
    print!("{}", suite::table(&rows));
    let failed: Vec<&str> = rows
        .iter()
        .filter(|r| !r.pass())
        .map(|r| r.name.as_str())
        .collect();
    if failed.is_empty() {
        println!("suite {}: all {} checks pass", args.id, rows.len());
        Ok(Exit::Ok)
    } else {
        eprintln!(
            "suite {}: {} of {} checks failed: {}",
            args.id,
            failed.len(),
            rows.len(),
            failed.join("; ")
        );
        Ok(Exit::SuiteFailure)
    }
}

fn cmd_plot(args: &PlotArgs) -> Result<Exit, CliError> {
    let out = args
        .out
        .clone()
        .unwrap_or_else(|| args.csv.with_extension("svg"));
    let n = plot::plot_file(&args.csv, &out)?;
    println!("{n} points -> {}", out.display());
    Ok(Exit::Ok)
}

fn cmd_presets() -> Result<Exit, CliError> {
    println!(
        "{:<28} {:<14} {:<30} {:>8} {:>6}  description",
        "id", "flow", "grid", "dt", "t_end"
    );
    for p in registry() {
        let grid = match p.geometry {
            Geometry::Torus { complex_dim, n, .. } => {
                format!("torus, {n}^{} nodes", 2 * complex_dim)
            }
            Geometry::Cp1 { n } => format!("CP1, 2 charts of {n}^2"),
            Geometry::TorusCurveTimesCp1 {
                base_n, fiber_n, ..
            } => format!("{base_n}^2 torus x 2x{fiber_n}^2 fiber"),
        };
        let kind = serde_json::to_value(p.kind)
            .ok()
            .and_then(|v| v.as_str().map(String::from))
            .unwrap_or_default();
        println!(
            "{:<28} {:<14} {:<30} {:>8} {:>6}  {}",
            p.id, kind, grid, p.defaults.dt, p.defaults.t_end, p.description
        );
    }
    Ok(Exit::Ok)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match &cli.command {
        Command::Run(a) => cmd_run(a),
        Command::Suite(a) => cmd_suite(a),
        Command::Plot(a) => cmd_plot(a),
        Command::Presets => cmd_presets(),
    };
    match result {
        Ok(code) => code.into(),
        Err(e) => {
            eprintln!("error: {e}");
            e.exit().into()
        }
    }
}
