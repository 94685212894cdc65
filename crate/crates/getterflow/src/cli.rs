//! Command-line entry points. Data goes to stdout (or `--out`), a short
//! human summary goes to stderr, and every JSON payload echoes the resolved
//! configuration so a run can be reproduced from its own output.

use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::{Deserialize, Serialize};

use crate::analysis::{
    analyze, enhancement_from_rates, per_area_rate, Analysis, AnalysisOptions, Measured,
    PressureSeries,
};
use crate::config::{resolve_path, AnalyzeConfig, SimulateConfig, SweepConfig};
use crate::error::{Error, Result};
use crate::plot::{write_svg, PlotSpec, Series};
use crate::stats::{capture_probability, enhancement, CaptureRow, StickingProbability};
use crate::sweep::{run_sweep, sweep_csv, SweepRow};
use crate::tracer::{run_simulation_capped, HistogramReport, DEFAULT_MAX_COLLISIONS};

#[derive(Debug, Parser)]
#[command(
    name = "getterflow",
    version,
    about = "Free-molecular-flow simulation of structured getter surfaces \
             and pressure-log reduction"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
    /// Worker threads (default: all cores; also GETTERFLOW_WORKERS).
    #[arg(long, global = true)]
    pub workers: Option<usize>,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Trace molecules through one geometry and report the collision
    /// histogram.
    Simulate(SimulateArgs),
    /// Run the simulator across a parameter family and tabulate the means.
    Sweep(SweepArgs),
    /// Reduce a pump-down pressure log to a pumping coefficient.
    Analyze(AnalyzeArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum OutputFormat {
    Json,
    Csv,
}

#[derive(Debug, Args)]
pub struct SimulateArgs {
    /// JSON run configuration.
    #[arg(long)]
    pub config: PathBuf,
    /// Overrides the seed in the configuration.
    #[arg(long)]
    pub seed: Option<u64>,
    /// Overrides the particle count in the configuration.
    #[arg(long)]
    pub particles: Option<u64>,
    /// Output file (default: stdout).
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[arg(long, value_enum, default_value_t = OutputFormat::Json)]
    pub format: OutputFormat,
}

#[derive(Debug, Args)]
pub struct SweepArgs {
    #[arg(long)]
    pub config: PathBuf,
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long)]
    pub particles: Option<u64>,
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Writes an SVG plot of the sweep.
    #[arg(long)]
    pub plot: Option<PathBuf>,
    #[arg(long, value_enum, default_value_t = OutputFormat::Json)]
    pub format: OutputFormat,
}

#[derive(Debug, Args)]
pub struct AnalyzeArgs {
    #[arg(long)]
    pub config: PathBuf,
    /// Overrides the truncation threshold in the configuration.
    #[arg(long)]
    pub threshold: Option<f64>,
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[arg(long, value_enum, default_value_t = OutputFormat::Json)]
    pub format: OutputFormat,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimulateOutput {
    pub config: SimulateConfig,
    pub report: HistogramReport,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub capture: Option<Vec<CaptureRow>>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepOutput {
    pub config: SweepConfig,
    pub rows: Vec<SweepRow>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ComparisonRow {
    pub mode: String,
    pub enhancement: f64,
    pub enhancement_stderr: f64,
    pub per_area_rate: f64,
    pub per_area_rate_stderr: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AnalyzeOutput {
    pub config: AnalyzeConfig,
    pub analysis: Analysis,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub comparison: Option<Vec<ComparisonRow>>,
}

pub fn run_main() -> std::process::ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => std::process::ExitCode::SUCCESS,
        Err(e) => {
            let msg = serde_json::json!({ "error": e.kind(), "message": e.to_string() });
            eprintln!("{msg}");
            std::process::ExitCode::from(e.exit_code() as u8)
        }
    }
}

pub fn run(cli: Cli) -> Result<()> {
    let workers = cli.workers.or_else(|| {
        std::env::var("GETTERFLOW_WORKERS").ok().and_then(|v| v.parse().ok())
    });
    let command = cli.command;
    let body = move || match command {
        Command::Simulate(args) => cmd_simulate(&args),
        Command::Sweep(args) => cmd_sweep(&args),
        Command::Analyze(args) => cmd_analyze(&args),
    };
    match workers {
        Some(n) if n > 0 => rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build()
            .map_err(|e| Error::Config(format!("cannot build thread pool: {e}")))?
            .install(body),
        Some(_) => Err(Error::Config("workers must be at least 1".into())),
        None => body(),
    }
}

fn config_dir(path: &Path) -> PathBuf {
    path.parent()
        .filter(|p| !p.as_os_str().is_empty())
        .map(Path::to_path_buf)
        .unwrap_or_else(|| PathBuf::from("."))
}

fn emit(out: Option<&Path>, text: &str) -> Result<()> {
    match out {
        Some(path) => std::fs::write(path, text)?,
        None => print!("{text}"),
    }
    Ok(())
}

pub fn cmd_simulate(args: &SimulateArgs) -> Result<()> {
    let mut cfg = SimulateConfig::load(&args.config)?;
    let base = config_dir(&args.config);
    if let Some(seed) = args.seed {
        cfg.seed = seed;
    }
    if let Some(particles) = args.particles {
        cfg.particles = particles;
    }
    let geom = cfg.geometry.build(&base)?;
    let max = cfg.max_collisions.unwrap_or(DEFAULT_MAX_COLLISIONS);
    let hist = run_simulation_capped(&geom, cfg.model, cfg.particles, cfg.seed, max);
    let report = HistogramReport::new(&geom, cfg.model, &hist);

    let capture = match &cfg.sticking {
        None => None,
        Some(values) => {
            let mut rows = Vec::with_capacity(values.len());
            for &pv in values {
                let p = StickingProbability::new(pv)?;
                let cap = capture_probability(&hist, p)?;
                let enh = enhancement(&hist, p)?;
                rows.push(CaptureRow {
                    sticking: pv,
                    capture: cap.value,
                    capture_stderr: cap.stderr,
                    enhancement: enh.value,
                    enhancement_stderr: enh.stderr,
                });
            }
            Some(rows)
        }
    };

    match report.mean_collisions {
        Some(mean) => eprintln!(
            "mean collisions = {:.4} +/- {:.4} ({} exited, {} trapped, {} faults)",
            mean,
            report.stderr.unwrap_or(0.0),
            hist.exited(),
            report.trapped,
            report.faults
        ),
        None => eprintln!(
            "no particles exited ({} trapped, {} faults)",
            report.trapped, report.faults
        ),
    }

    match args.format {
        OutputFormat::Json => {
            let output = SimulateOutput { config: cfg, report, capture };
            let mut text = serde_json::to_string_pretty(&output)?;
            text.push('\n');
            emit(args.out.as_deref(), &text)
        }
        OutputFormat::Csv => {
            let mut text = String::from("collisions,count\n");
            for (n, c) in &report.counts {
                text.push_str(&format!("{n},{c}\n"));
            }
            emit(args.out.as_deref(), &text)
        }
    }
}

fn row_x(row: &SweepRow, axis: &str) -> Option<f64> {
    match axis {
        "theta_deg" => row.theta_deg,
        "sides" => row.sides.map(|s| s as f64),
        "truncation_ratio" => row.truncation_ratio,
        "side_to_depth" => row.side_to_depth,
        _ => None,
    }
}

pub fn cmd_sweep(args: &SweepArgs) -> Result<()> {
    let mut cfg = SweepConfig::load(&args.config)?;
    let base = config_dir(&args.config);
    if let Some(seed) = args.seed {
        cfg.seed = seed;
    }
    if let Some(particles) = args.particles {
        cfg.particles = particles;
    }
    let cases = cfg.cases(&base)?;
    let rows = run_sweep(&cases, &cfg.models, cfg.particles, cfg.seed);
    let failed = rows.iter().filter(|r| r.error.is_some()).count();
    eprintln!(
        "{} rows ({} cases x {} models), {} with errors",
        rows.len(),
        cases.len(),
        cfg.models.len(),
        failed
    );

    if let Some(plot_path) = &args.plot {
        let (axis_key, axis_label) = cfg.varied_axis();
        let series: Vec<Series> = cfg
            .models
            .iter()
            .map(|m| Series {
                label: m.label().to_string(),
                points: rows
                    .iter()
                    .filter(|r| r.model == m.label())
                    .filter_map(|r| row_x(r, axis_key).zip(r.mean_collisions))
                    .collect(),
            })
            .collect();
        let spec = PlotSpec {
            title: format!("mean wall collisions vs {axis_label}"),
            x_label: axis_label.to_string(),
            y_label: "mean wall collisions".to_string(),
            log_x: false,
            log_y: false,
        };
        write_svg(plot_path, &spec, &series)?;
    }

    match args.format {
        OutputFormat::Json => {
            let output = SweepOutput { config: cfg, rows };
            let mut text = serde_json::to_string_pretty(&output)?;
            text.push('\n');
            emit(args.out.as_deref(), &text)
        }
        OutputFormat::Csv => emit(args.out.as_deref(), &sweep_csv(&rows)),
    }
}

pub fn cmd_analyze(args: &AnalyzeArgs) -> Result<()> {
    let mut cfg = AnalyzeConfig::load(&args.config)?;
    let base = config_dir(&args.config);
    if let Some(threshold) = args.threshold {
        cfg.threshold = threshold;
    }
    let sample = PressureSeries::from_csv(&resolve_path(&base, &cfg.sample_log))?;
    let control = cfg
        .control_log
        .as_ref()
        .map(|p| PressureSeries::from_csv(&resolve_path(&base, p)))
        .transpose()?;
    let opts = AnalysisOptions { threshold: cfg.threshold, grid_points: cfg.grid_points };
    let analysis = analyze(&sample, control.as_ref(), &opts)?;

    let comparison = match &cfg.comparison {
        None => None,
        Some(comp) => {
            comp.validate()?;
            let reference = match (&comp.reference_log, comp.reference_gamma) {
                (Some(path), None) => {
                    let log = PressureSeries::from_csv(&resolve_path(&base, path))?;
                    let fit = analyze(&log, control.as_ref(), &opts)?.fit;
                    Measured { value: fit.gamma, stderr: fit.gamma_stderr }
                }
                (None, Some(gamma)) => {
                    Measured { value: gamma, stderr: comp.reference_gamma_stderr }
                }
                _ => unreachable!("validated above"),
            };
            let sample_rate =
                Measured { value: analysis.fit.gamma, stderr: analysis.fit.gamma_stderr };
            let mut rows = Vec::with_capacity(comp.modes.len());
            for &mode in &comp.modes {
                let enh = enhancement_from_rates(sample_rate, reference, mode, &comp.areas)?;
                let per = per_area_rate(sample_rate, reference, mode, &comp.areas)?;
                rows.push(ComparisonRow {
                    mode: mode.label().to_string(),
                    enhancement: enh.value,
                    enhancement_stderr: enh.stderr,
                    per_area_rate: per.value,
                    per_area_rate_stderr: per.stderr,
                });
            }
            Some(rows)
        }
    };

    eprintln!(
        "gamma = {:.6e} +/- {:.2e} 1/s, intake = {:.3e} +/- {:.2e} mbar/s ({} grid points)",
        analysis.fit.gamma,
        analysis.fit.gamma_stderr,
        analysis.fit.intake,
        analysis.fit.intake_stderr,
        analysis.fit.points
    );

    match args.format {
        OutputFormat::Json => {
            let output = AnalyzeOutput { config: cfg, analysis, comparison };
            let mut text = serde_json::to_string_pretty(&output)?;
            text.push('\n');
            emit(args.out.as_deref(), &text)
        }
        OutputFormat::Csv => {
            let mut text = String::new();
            text.push_str(&format!(
                "# label = {}, gamma = {:e}, gamma_stderr = {:e}, intake = {:e}, \
                 intake_stderr = {:e}\n",
                analysis.label,
                analysis.fit.gamma,
                analysis.fit.gamma_stderr,
                analysis.fit.intake,
                analysis.fit.intake_stderr
            ));
            if let Some(rows) = &comparison {
                for r in rows {
                    text.push_str(&format!(
                        "# comparison {} enhancement = {:.6} +/- {:.6}, \
                         per_area_rate = {:e} +/- {:e}\n",
                        r.mode,
                        r.enhancement,
                        r.enhancement_stderr,
                        r.per_area_rate,
                        r.per_area_rate_stderr
                    ));
                }
            }
            text.push_str("pressure,sample_rate,control_rate,net_rate\n");
            for (i, p) in analysis.grid.iter().enumerate() {
                let control_cell = analysis
                    .control_rate
                    .as_ref()
                    .map(|c| c[i].to_string())
                    .unwrap_or_default();
                text.push_str(&format!(
                    "{},{},{},{}\n",
                    p, analysis.sample_rate[i], control_cell, analysis.net_rate[i]
                ));
            }
            emit(args.out.as_deref(), &text)
        }
    }
}
