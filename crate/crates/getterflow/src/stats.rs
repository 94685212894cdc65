//! Capture statistics: combine a collision histogram with a wall sticking
//! probability to get effective capture probabilities and the pumping gain
//! over a flat surface.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::tracer::CollisionHistogram;

/// Runs with more than this fraction of trapped or faulted particles are
/// rejected rather than silently biased.
pub const TRAPPED_GATE: f64 = 1e-3;

/// Probability that a single wall collision captures the molecule, in (0, 1].
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct StickingProbability(f64);

impl StickingProbability {
    pub fn new(value: f64) -> Result<StickingProbability> {
        if value.is_finite() && value > 0.0 && value <= 1.0 {
            Ok(StickingProbability(value))
        } else {
            Err(Error::InvalidParameter(format!(
                "sticking probability must lie in (0, 1], got {value}"
            )))
        }
    }

    #[inline]
    pub fn value(self) -> f64 {
        self.0
    }
}

/// Capture probability for a molecule that makes exactly `n` wall collisions,
/// 1 - (1 - p)^n, evaluated without cancellation for small p.
pub fn conditional_capture(n: u32, p: StickingProbability) -> f64 {
    let p = p.value();
    if n == 0 {
        return 0.0;
    }
    if p == 1.0 {
        return 1.0;
    }
    if n == 1 {
        return p;
    }
    -f64::exp_m1(n as f64 * f64::ln_1p(-p))
}

/// Monte Carlo estimate with its standard error.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CaptureEstimate {
    pub value: f64,
    pub stderr: f64,
}

fn ensure_clean(hist: &CollisionHistogram) -> Result<u64> {
    let exited = hist.exited();
    if exited == 0 {
        return Err(Error::InvalidParameter(
            "histogram has no exited particles".into(),
        ));
    }
    let bad = (hist.trapped + hist.faults) as f64 / hist.n_particles as f64;
    if bad > TRAPPED_GATE {
        return Err(Error::ExcessiveTrapped { fraction: bad, gate: TRAPPED_GATE });
    }
    Ok(exited)
}

/// Effective capture probability of the structured surface: the histogram
/// average of the per-particle capture probability.
pub fn capture_probability(
    hist: &CollisionHistogram,
    p: StickingProbability,
) -> Result<CaptureEstimate> {
    let exited = ensure_clean(hist)? as f64;
    let mut sum = 0.0;
    let mut sum_sq = 0.0;
    for (&n, &c) in &hist.counts {
        let q = conditional_capture(n, p);
        sum += q * c as f64;
        sum_sq += q * q * c as f64;
    }
    let mean = sum / exited;
    let var = (sum_sq / exited - mean * mean).max(0.0);
    Ok(CaptureEstimate { value: mean, stderr: (var / exited).sqrt() })
}

/// Pumping gain over a flat surface at finite sticking probability:
/// effective capture probability divided by p.
pub fn enhancement(hist: &CollisionHistogram, p: StickingProbability) -> Result<CaptureEstimate> {
    let est = capture_probability(hist, p)?;
    Ok(CaptureEstimate { value: est.value / p.value(), stderr: est.stderr / p.value() })
}

/// Pumping gain in the small-sticking-probability limit, where capture
/// scales linearly with p and the gain reduces to the mean collision count.
pub fn enhancement_limit(hist: &CollisionHistogram) -> Result<CaptureEstimate> {
    ensure_clean(hist)?;
    Ok(CaptureEstimate {
        value: hist.mean_collisions().expect("exited > 0"),
        stderr: hist.stderr().expect("exited > 0"),
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CaptureRow {
    pub sticking: f64,
    pub capture: f64,
    pub capture_stderr: f64,
    pub enhancement: f64,
    pub enhancement_stderr: f64,
}

/// Capture and gain on a log-spaced sticking-probability grid from 1e-4 to 1.
pub fn capture_table(hist: &CollisionHistogram, points: usize) -> Result<Vec<CaptureRow>> {
    if points < 2 {
        return Err(Error::InvalidParameter(format!(
            "capture table needs at least 2 points, got {points}"
        )));
    }
    let mut rows = Vec::with_capacity(points);
    for i in 0..points {
        let exp = -4.0 + 4.0 * i as f64 / (points - 1) as f64;
        let p = StickingProbability::new(10f64.powf(exp))?;
        let cap = capture_probability(hist, p)?;
        let enh = enhancement(hist, p)?;
        rows.push(CaptureRow {
            sticking: p.value(),
            capture: cap.value,
            capture_stderr: cap.stderr,
            enhancement: enh.value,
            enhancement_stderr: enh.stderr,
        });
    }
    Ok(rows)
}
