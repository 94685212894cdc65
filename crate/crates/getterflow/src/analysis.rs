//! Pressure-log reduction: turn pump-down logs p(t) into a wall pumping
//! coefficient and compare structured against plain surfaces.
//!
//! Model: dp/dt = C - gamma * p, with C a constant intake (outgassing plus
//! leaks) and gamma the volumetric pumping rate of the getter surface. The
//! fit runs on the rate curve r(p) = -dp/dt, which the model makes linear in
//! p: r = gamma * p - C.

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// A logged pump-down: strictly increasing times (s), positive pressures.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PressureSeries {
    pub label: String,
    pub times: Vec<f64>,
    pub pressures: Vec<f64>,
}

impl PressureSeries {
    pub fn new(label: &str, times: Vec<f64>, pressures: Vec<f64>) -> Result<PressureSeries> {
        if times.len() != pressures.len() {
            return Err(Error::InvalidParameter(format!(
                "{}: {} times but {} pressures",
                label,
                times.len(),
                pressures.len()
            )));
        }
        if times.is_empty() {
            return Err(Error::InvalidParameter(format!("{label}: empty series")));
        }
        for (i, w) in times.windows(2).enumerate() {
            if !(w[1] > w[0]) {
                return Err(Error::InvalidParameter(format!(
                    "{label}: times must be strictly increasing, violated at sample {}",
                    i + 1
                )));
            }
        }
        for (i, p) in pressures.iter().enumerate() {
            if !(p.is_finite() && *p > 0.0) {
                return Err(Error::InvalidParameter(format!(
                    "{label}: pressure must be positive and finite, got {p} at sample {i}"
                )));
            }
        }
        if !times.iter().all(|t| t.is_finite()) {
            return Err(Error::InvalidParameter(format!("{label}: non-finite time")));
        }
        Ok(PressureSeries { label: label.to_string(), times, pressures })
    }

    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    /// Loads a two-column time,pressure file. Lines starting with '#' are
    /// comments; a single non-numeric header line is tolerated.
    pub fn from_csv(path: &Path) -> Result<PressureSeries> {
        PressureSeries::from_delimited(path, ',', 0, 1)
    }

    /// Loads a delimited log with explicit column positions.
    pub fn from_delimited(
        path: &Path,
        delimiter: char,
        time_col: usize,
        pressure_col: usize,
    ) -> Result<PressureSeries> {
        let name = path.display().to_string();
        let text = std::fs::read_to_string(path)?;
        let mut times = Vec::new();
        let mut pressures = Vec::new();
        let mut saw_data = false;
        for (idx, line) in text.lines().enumerate() {
            let lineno = idx + 1;
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let fields: Vec<&str> = line.split(delimiter).map(str::trim).collect();
            let need = time_col.max(pressure_col) + 1;
            if fields.len() < need {
                return Err(Error::Parse {
                    path: name,
                    line: lineno,
                    message: format!("expected at least {need} columns, got {}", fields.len()),
                });
            }
            let parsed: Option<(f64, f64)> = fields[time_col]
                .parse()
                .ok()
                .zip(fields[pressure_col].parse().ok());
            match parsed {
                Some((t, p)) => {
                    if let Some(&prev) = times.last() {
                        if t <= prev {
                            return Err(Error::Parse {
                                path: name,
                                line: lineno,
                                message: format!("time {t} does not increase past {prev}"),
                            });
                        }
                    }
                    if !(p.is_finite() && p > 0.0) {
                        return Err(Error::Parse {
                            path: name,
                            line: lineno,
                            message: format!("pressure must be positive, got {p}"),
                        });
                    }
                    times.push(t);
                    pressures.push(p);
                    saw_data = true;
                }
                None if !saw_data => continue, // header line
                None => {
                    return Err(Error::Parse {
                        path: name,
                        line: lineno,
                        message: format!(
                            "bad numeric fields {:?} and {:?}",
                            fields[time_col], fields[pressure_col]
                        ),
                    });
                }
            }
        }
        if times.is_empty() {
            return Err(Error::Parse { path: name, line: 0, message: "no data rows".into() });
        }
        let label = Path::new(path)
            .file_stem()
            .map(|s| s.to_string_lossy().into_owned())
            .unwrap_or_else(|| name.clone());
        PressureSeries::new(&label, times, pressures)
    }

    /// Keeps everything up to and including the first sample at or below
    /// `threshold` after the global pressure maximum; later samples sit at
    /// the gauge noise floor and are dropped.
    pub fn truncate_at_threshold(&self, threshold: f64) -> Result<PressureSeries> {
        if !(threshold.is_finite() && threshold > 0.0) {
            return Err(Error::InvalidParameter(format!(
                "threshold must be positive, got {threshold}"
            )));
        }
        let peak = self
            .pressures
            .iter()
            .enumerate()
            .max_by(|a, b| a.1.total_cmp(b.1))
            .map(|(i, _)| i)
            .expect("non-empty series");
        let cut = (peak..self.len())
            .find(|&i| self.pressures[i] <= threshold)
            .ok_or(Error::ThresholdNeverReached { threshold })?;
        Ok(PressureSeries {
            label: self.label.clone(),
            times: self.times[..=cut].to_vec(),
            pressures: self.pressures[..=cut].to_vec(),
        })
    }
}

/// Pumping rate r = -dp/dt tabulated against pressure, ascending in p.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RateCurve {
    pub pressures: Vec<f64>,
    pub rates: Vec<f64>,
}

/// Central differences at interior samples; endpoints are dropped rather
/// than estimated one-sidedly.
pub fn rate_curve(series: &PressureSeries) -> Result<RateCurve> {
    let n = series.len();
    if n < 3 {
        return Err(Error::InvalidParameter(format!(
            "{}: need at least 3 samples for rates, got {n}",
            series.label
        )));
    }
    let mut pairs = Vec::with_capacity(n - 2);
    for i in 1..n - 1 {
        let dt = series.times[i + 1] - series.times[i - 1];
        let rate = -(series.pressures[i + 1] - series.pressures[i - 1]) / dt;
        pairs.push((series.pressures[i], rate));
    }
    pairs.sort_by(|a, b| a.0.total_cmp(&b.0));
    // Average duplicate pressures so interpolation sees a strict ordering.
    let mut pressures = Vec::with_capacity(pairs.len());
    let mut rates = Vec::with_capacity(pairs.len());
    for (p, r) in pairs {
        if pressures.last() == Some(&p) {
            let k = rates.len() - 1;
            rates[k] = (rates[k] + r) / 2.0;
        } else {
            pressures.push(p);
            rates.push(r);
        }
    }
    Ok(RateCurve { pressures, rates })
}

impl RateCurve {
    pub fn min_pressure(&self) -> f64 {
        self.pressures[0]
    }

    pub fn max_pressure(&self) -> f64 {
        *self.pressures.last().expect("non-empty curve")
    }

    /// Linear interpolation onto `grid`; every grid point must lie inside
    /// the tabulated pressure range.
    pub fn resample(&self, grid: &[f64]) -> Result<RateCurve> {
        let lo = self.min_pressure();
        let hi = self.max_pressure();
        let mut rates = Vec::with_capacity(grid.len());
        for &p in grid {
            if p < lo || p > hi {
                return Err(Error::GridMismatch(format!(
                    "grid pressure {p} outside tabulated range [{lo}, {hi}]"
                )));
            }
            let k = self.pressures.partition_point(|&x| x < p);
            let r = if k == 0 {
                self.rates[0]
            } else if k == self.pressures.len() {
                *self.rates.last().unwrap()
            } else {
                let (p0, p1) = (self.pressures[k - 1], self.pressures[k]);
                let (r0, r1) = (self.rates[k - 1], self.rates[k]);
                r0 + (r1 - r0) * (p - p0) / (p1 - p0)
            };
            rates.push(r);
        }
        Ok(RateCurve { pressures: grid.to_vec(), rates })
    }

    /// Pointwise difference of two curves tabulated on the same grid.
    pub fn subtract(&self, other: &RateCurve) -> Result<RateCurve> {
        if self.pressures != other.pressures {
            return Err(Error::GridMismatch(
                "rate curves are tabulated on different pressure grids".into(),
            ));
        }
        Ok(RateCurve {
            pressures: self.pressures.clone(),
            rates: self
                .rates
                .iter()
                .zip(&other.rates)
                .map(|(a, b)| a - b)
                .collect(),
        })
    }
}

/// Log-spaced grid with exact endpoints.
pub fn geometric_grid(lo: f64, hi: f64, points: usize) -> Result<Vec<f64>> {
    if !(lo.is_finite() && hi.is_finite() && lo > 0.0 && hi > lo) {
        return Err(Error::InvalidParameter(format!(
            "geometric grid needs 0 < lo < hi, got [{lo}, {hi}]"
        )));
    }
    if points < 2 {
        return Err(Error::InvalidParameter(format!(
            "geometric grid needs at least 2 points, got {points}"
        )));
    }
    let (lln, hln) = (lo.ln(), hi.ln());
    let mut grid: Vec<f64> = (0..points)
        .map(|i| (lln + (hln - lln) * i as f64 / (points - 1) as f64).exp())
        .collect();
    grid[0] = lo;
    grid[points - 1] = hi;
    Ok(grid)
}

/// Shared grid across curves: spans the intersection of their ranges.
pub fn common_grid(curves: &[&RateCurve], points: usize) -> Result<Vec<f64>> {
    let lo = curves
        .iter()
        .map(|c| c.min_pressure())
        .fold(f64::NEG_INFINITY, f64::max);
    let hi = curves
        .iter()
        .map(|c| c.max_pressure())
        .fold(f64::INFINITY, f64::min);
    if !(hi > lo) {
        return Err(Error::GridMismatch(format!(
            "pressure ranges do not overlap (intersection [{lo}, {hi}])"
        )));
    }
    geometric_grid(lo, hi, points)
}

/// Least-squares fit of r = gamma * p - C with standard errors.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GammaFit {
    /// Pumping rate coefficient (1/s).
    pub gamma: f64,
    pub gamma_stderr: f64,
    /// Constant intake C (mbar/s).
    pub intake: f64,
    pub intake_stderr: f64,
    pub points: usize,
    pub residual_rms: f64,
}

pub fn fit_rate_line(curve: &RateCurve) -> Result<GammaFit> {
    let n = curve.pressures.len();
    if n < 3 {
        return Err(Error::FitRejected(format!(
            "need at least 3 rate points for a line fit with errors, got {n}"
        )));
    }
    let nf = n as f64;
    let x_mean = curve.pressures.iter().sum::<f64>() / nf;
    let y_mean = curve.rates.iter().sum::<f64>() / nf;
    let mut sxx = 0.0;
    let mut sxy = 0.0;
    for (x, y) in curve.pressures.iter().zip(&curve.rates) {
        sxx += (x - x_mean) * (x - x_mean);
        sxy += (x - x_mean) * (y - y_mean);
    }
    if !(sxx > 0.0) {
        return Err(Error::FitRejected(
            "pressure values are degenerate (zero spread)".into(),
        ));
    }
    let gamma = sxy / sxx;
    let intercept = y_mean - gamma * x_mean;
    let ssr: f64 = curve
        .pressures
        .iter()
        .zip(&curve.rates)
        .map(|(x, y)| {
            let e = y - (gamma * x + intercept);
            e * e
        })
        .sum();
    let sigma2 = ssr / (nf - 2.0);
    let gamma_stderr = (sigma2 / sxx).sqrt();
    let intercept_stderr = (sigma2 * (1.0 / nf + x_mean * x_mean / sxx)).sqrt();
    if !(gamma.is_finite() && intercept.is_finite()) {
        return Err(Error::FitRejected("fit produced non-finite coefficients".into()));
    }
    Ok(GammaFit {
        gamma,
        gamma_stderr,
        intake: -intercept,
        intake_stderr: intercept_stderr,
        points: n,
        residual_rms: (ssr / nf).sqrt(),
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AnalysisOptions {
    /// Gauge noise floor; samples below it are discarded.
    pub threshold: f64,
    /// Size of the shared pressure grid.
    pub grid_points: usize,
}

impl Default for AnalysisOptions {
    fn default() -> Self {
        AnalysisOptions { threshold: 1e-5, grid_points: 40 }
    }
}

/// Full reduction of one log, optionally minus a control log.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Analysis {
    pub label: String,
    pub threshold: f64,
    pub kept_samples: usize,
    pub dropped_samples: usize,
    pub grid: Vec<f64>,
    pub sample_rate: Vec<f64>,
    pub control_rate: Option<Vec<f64>>,
    /// Sample rate minus control rate (equal to sample_rate without one).
    pub net_rate: Vec<f64>,
    pub fit: GammaFit,
}

/// Truncates, differentiates, regrids, optionally subtracts a control curve,
/// and fits the pumping line. The control keeps its full length if it never
/// reaches the threshold; the sample must reach it.
pub fn analyze(
    sample: &PressureSeries,
    control: Option<&PressureSeries>,
    opts: &AnalysisOptions,
) -> Result<Analysis> {
    let cut = sample.truncate_at_threshold(opts.threshold)?;
    let sample_curve = rate_curve(&cut)?;
    let control_curve = match control {
        None => None,
        Some(c) => {
            let cc = match c.truncate_at_threshold(opts.threshold) {
                Ok(t) => t,
                Err(Error::ThresholdNeverReached { .. }) => c.clone(),
                Err(e) => return Err(e),
            };
            Some(rate_curve(&cc)?)
        }
    };

    let grid = match &control_curve {
        Some(cc) => common_grid(&[&sample_curve, cc], opts.grid_points)?,
        None => common_grid(&[&sample_curve], opts.grid_points)?,
    };
    let sample_on_grid = sample_curve.resample(&grid)?;
    let (net, control_rate) = match &control_curve {
        Some(cc) => {
            let c_on_grid = cc.resample(&grid)?;
            (sample_on_grid.subtract(&c_on_grid)?, Some(c_on_grid.rates))
        }
        None => (sample_on_grid.clone(), None),
    };
    let fit = fit_rate_line(&net)?;
    Ok(Analysis {
        label: sample.label.clone(),
        threshold: opts.threshold,
        kept_samples: cut.len(),
        dropped_samples: sample.len() - cut.len(),
        grid,
        sample_rate: sample_on_grid.rates,
        control_rate,
        net_rate: net.rates,
        fit,
    })
}

/// Exact solution of dp/dt = C - gamma * p sampled on a uniform time grid.
pub fn synthesize_decay_log(
    label: &str,
    gamma: f64,
    intake: f64,
    p0: f64,
    dt: f64,
    samples: usize,
) -> Result<PressureSeries> {
    if !(gamma >= 0.0 && gamma.is_finite()) || !(intake >= 0.0 && intake.is_finite()) {
        return Err(Error::InvalidParameter(format!(
            "gamma and intake must be non-negative, got {gamma}, {intake}"
        )));
    }
    if !(p0 > 0.0 && dt > 0.0) || samples < 2 {
        return Err(Error::InvalidParameter(
            "need p0 > 0, dt > 0 and at least 2 samples".into(),
        ));
    }
    let times: Vec<f64> = (0..samples).map(|i| i as f64 * dt).collect();
    let pressures: Vec<f64> = times
        .iter()
        .map(|&t| {
            if gamma == 0.0 {
                p0 + intake * t
            } else {
                let floor = intake / gamma;
                floor + (p0 - floor) * (-gamma * t).exp()
            }
        })
        .collect();
    PressureSeries::new(label, times, pressures)
}

/// Measured areas of the vacuum test assembly (mm^2).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AreaBudget {
    /// Full coated area of the plain reference sample.
    pub reference: f64,
    /// Structured region of the patterned sample.
    pub structured: f64,
    /// Area of the pocket mouths alone within the structured region.
    pub mouths: f64,
    /// Extra coated area (fixture spillover) of uncertain character.
    pub spillover: f64,
}

impl AreaBudget {
    pub fn validate(&self) -> Result<()> {
        for (name, v) in [
            ("reference", self.reference),
            ("structured", self.structured),
            ("mouths", self.mouths),
            ("spillover", self.spillover),
        ] {
            if !(v.is_finite() && v > 0.0) {
                return Err(Error::InvalidParameter(format!(
                    "area budget field {name} must be positive, got {v}"
                )));
            }
        }
        if self.structured > self.reference || self.mouths > self.structured {
            return Err(Error::InvalidParameter(
                "expected mouths <= structured <= reference in the area budget".into(),
            ));
        }
        Ok(())
    }
}

/// How measured pumping is attributed to surface regions when reducing a
/// patterned sample against the plain reference.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum AreaMode {
    /// Whole sample treated as uniformly structured: raw rate ratio.
    WholeSample,
    /// Structured region pumps, the remainder behaves like plain getter.
    StructuredRegion,
    /// Only the pocket mouths pump beyond plain behavior.
    PocketMouths,
    /// Spillover area counted as structured (lower bound on the gain).
    SpilloverStructured,
    /// Spillover area counted as plain (upper bound on the gain).
    SpilloverFlat,
}

impl AreaMode {
    /// Returns (structured area, plain area) for the attribution.
    pub fn areas(self, b: &AreaBudget) -> (f64, f64) {
        match self {
            AreaMode::WholeSample => (b.reference, 0.0),
            AreaMode::StructuredRegion => (b.structured, b.reference - b.structured),
            AreaMode::PocketMouths => (b.mouths, b.reference - b.mouths),
            AreaMode::SpilloverStructured => {
                (b.structured + b.spillover, b.reference - b.structured)
            }
            AreaMode::SpilloverFlat => {
                (b.structured, b.reference - b.structured + b.spillover)
            }
        }
    }

    pub fn label(self) -> &'static str {
        match self {
            AreaMode::WholeSample => "whole_sample",
            AreaMode::StructuredRegion => "structured_region",
            AreaMode::PocketMouths => "pocket_mouths",
            AreaMode::SpilloverStructured => "spillover_structured",
            AreaMode::SpilloverFlat => "spillover_flat",
        }
    }

    pub fn all() -> [AreaMode; 5] {
        [
            AreaMode::WholeSample,
            AreaMode::StructuredRegion,
            AreaMode::PocketMouths,
            AreaMode::SpilloverStructured,
            AreaMode::SpilloverFlat,
        ]
    }
}

impl std::str::FromStr for AreaMode {
    type Err = Error;

    fn from_str(s: &str) -> Result<AreaMode> {
        AreaMode::all()
            .into_iter()
            .find(|m| m.label() == s)
            .ok_or_else(|| {
                Error::InvalidParameter(format!(
                    "unknown area mode {s:?} (expected one of {:?})",
                    AreaMode::all().map(AreaMode::label)
                ))
            })
    }
}

/// A value with a one-sigma uncertainty.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Measured {
    pub value: f64,
    pub stderr: f64,
}

/// Per-unit-area pumping coefficient of the structured region:
/// (gamma - gamma_flat_per_area * plain_area) / structured_area,
/// where the plain per-area coefficient comes from the reference sample.
pub fn per_area_rate(
    sample: Measured,
    reference: Measured,
    mode: AreaMode,
    budget: &AreaBudget,
) -> Result<Measured> {
    budget.validate()?;
    if !(reference.value > 0.0) {
        return Err(Error::InvalidParameter(format!(
            "reference pumping rate must be positive, got {}",
            reference.value
        )));
    }
    let (s_area, f_area) = mode.areas(budget);
    let flat = reference.value / budget.reference;
    let value = (sample.value - flat * f_area) / s_area;
    let d_sample = 1.0 / s_area;
    let d_reference = -f_area / (budget.reference * s_area);
    let stderr = ((d_sample * sample.stderr).powi(2)
        + (d_reference * reference.stderr).powi(2))
    .sqrt();
    Ok(Measured { value, stderr })
}

/// Pumping gain of the structured region over plain getter surface, the
/// ratio of per-area coefficients, with first-order error propagation.
pub fn enhancement_from_rates(
    sample: Measured,
    reference: Measured,
    mode: AreaMode,
    budget: &AreaBudget,
) -> Result<Measured> {
    budget.validate()?;
    if !(reference.value > 0.0) {
        return Err(Error::InvalidParameter(format!(
            "reference pumping rate must be positive, got {}",
            reference.value
        )));
    }
    let (s_area, f_area) = mode.areas(budget);
    let a_r = budget.reference;
    let value = (sample.value * a_r / reference.value - f_area) / s_area;
    let d_sample = a_r / (s_area * reference.value);
    let d_reference = -sample.value * a_r / (s_area * reference.value * reference.value);
    let stderr = ((d_sample * sample.stderr).powi(2)
        + (d_reference * reference.stderr).powi(2))
    .sqrt();
    Ok(Measured { value, stderr })
}
