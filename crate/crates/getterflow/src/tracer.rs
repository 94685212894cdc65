//! Ballistic transport: follow one molecule from mouth entry through wall
//! re-emissions until it leaves through the mouth plane, and aggregate
//! collision counts over many molecules.
//!
//! Each particle gets its own counter-derived RNG stream, so a run is
//! bit-identical for a given seed regardless of thread count.

use std::collections::BTreeMap;

use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::geometry::{Geometry, HitKind, Ray, TraceFault};
use crate::sampler::{sample_emission, sample_incident, stream_rng, EmissionModel};

/// Collision cap; a particle exceeding it is tallied as trapped.
pub const DEFAULT_MAX_COLLISIONS: u32 = 10_000;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TraceOutcome {
    Exited { collisions: u32 },
    Trapped,
}

/// Follows an already-sampled entry ray to completion.
pub fn trace_particle<R: Rng>(
    geom: &Geometry,
    model: EmissionModel,
    entry: Ray,
    rng: &mut R,
    max_collisions: u32,
) -> Result<TraceOutcome, TraceFault> {
    let mut ray = entry;
    let mut collisions: u32 = 0;
    loop {
        let hit = geom.intersect(&ray)?;
        match hit.kind {
            HitKind::TopPlaneExit => return Ok(TraceOutcome::Exited { collisions }),
            HitKind::Facet { point, normal } => {
                collisions += 1;
                if collisions > max_collisions {
                    return Ok(TraceOutcome::Trapped);
                }
                let dir = sample_emission(model, normal, rng);
                // Lift off the wall so the departing ray cannot re-hit it.
                ray = Ray::unit(point + normal * geom.eps(), dir);
            }
        }
    }
}

/// Samples a mouth entry and follows it to completion.
pub fn trace_entry<R: Rng>(
    geom: &Geometry,
    model: EmissionModel,
    rng: &mut R,
    max_collisions: u32,
) -> Result<TraceOutcome, TraceFault> {
    let entry = sample_incident(geom.footprint(), rng);
    trace_particle(geom, model, entry, rng, max_collisions)
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FaultExample {
    pub particle: u64,
    pub detail: String,
}

/// Aggregated collision counts for one run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CollisionHistogram {
    /// collisions -> number of exited particles with that count.
    pub counts: BTreeMap<u32, u64>,
    pub trapped: u64,
    pub faults: u64,
    /// Up to eight lowest-index fault descriptions.
    pub fault_examples: Vec<FaultExample>,
    pub n_particles: u64,
    pub seed: u64,
    pub max_collisions: u32,
}

const MAX_FAULT_EXAMPLES: usize = 8;

impl CollisionHistogram {
    fn empty(seed: u64, max_collisions: u32) -> CollisionHistogram {
        CollisionHistogram {
            counts: BTreeMap::new(),
            trapped: 0,
            faults: 0,
            fault_examples: Vec::new(),
            n_particles: 0,
            seed,
            max_collisions,
        }
    }

    fn record(mut self, particle: u64, res: Result<TraceOutcome, TraceFault>) -> Self {
        self.n_particles += 1;
        match res {
            Ok(TraceOutcome::Exited { collisions }) => {
                *self.counts.entry(collisions).or_insert(0) += 1;
            }
            Ok(TraceOutcome::Trapped) => self.trapped += 1,
            Err(fault) => {
                self.faults += 1;
                if self.fault_examples.len() < MAX_FAULT_EXAMPLES {
                    self.fault_examples.push(FaultExample { particle, detail: fault.to_string() });
                }
            }
        }
        self
    }

    fn merge(mut self, other: CollisionHistogram) -> Self {
        for (n, c) in other.counts {
            *self.counts.entry(n).or_insert(0) += c;
        }
        self.trapped += other.trapped;
        self.faults += other.faults;
        self.n_particles += other.n_particles;
        // Keep the lowest-index examples so merges commute.
        self.fault_examples.extend(other.fault_examples);
        self.fault_examples.sort_by_key(|e| e.particle);
        self.fault_examples.truncate(MAX_FAULT_EXAMPLES);
        self
    }

    pub fn exited(&self) -> u64 {
        self.counts.values().sum()
    }

    pub fn trapped_fraction(&self) -> f64 {
        if self.n_particles == 0 {
            0.0
        } else {
            self.trapped as f64 / self.n_particles as f64
        }
    }

    /// Mean collision count over exited particles.
    pub fn mean_collisions(&self) -> Option<f64> {
        let e = self.exited();
        if e == 0 {
            return None;
        }
        let sum: f64 = self.counts.iter().map(|(&n, &c)| n as f64 * c as f64).sum();
        Some(sum / e as f64)
    }

    /// Standard error of the mean collision count.
    pub fn stderr(&self) -> Option<f64> {
        let e = self.exited();
        if e == 0 {
            return None;
        }
        let mean = self.mean_collisions()?;
        let m2: f64 =
            self.counts.iter().map(|(&n, &c)| (n as f64).powi(2) * c as f64).sum::<f64>()
                / e as f64;
        Some(((m2 - mean * mean).max(0.0) / e as f64).sqrt())
    }
}

/// Runs `n_particles` independent molecules in parallel.
pub fn run_simulation(
    geom: &Geometry,
    model: EmissionModel,
    n_particles: u64,
    seed: u64,
) -> CollisionHistogram {
    run_simulation_capped(geom, model, n_particles, seed, DEFAULT_MAX_COLLISIONS)
}

pub fn run_simulation_capped(
    geom: &Geometry,
    model: EmissionModel,
    n_particles: u64,
    seed: u64,
    max_collisions: u32,
) -> CollisionHistogram {
    (0..n_particles)
        .into_par_iter()
        .fold(
            || CollisionHistogram::empty(seed, max_collisions),
            |acc, i| {
                let mut rng = stream_rng(seed, i);
                acc.record(i, trace_entry(geom, model, &mut rng, max_collisions))
            },
        )
        .reduce(|| CollisionHistogram::empty(seed, max_collisions), CollisionHistogram::merge)
}

/// Serializable run summary: histogram plus the parameters that made it.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HistogramReport {
    pub geometry: String,
    pub model: String,
    pub seed: u64,
    pub n_particles: u64,
    pub max_collisions: u32,
    pub trapped: u64,
    pub faults: u64,
    pub mean_collisions: Option<f64>,
    pub stderr: Option<f64>,
    pub counts: BTreeMap<u32, u64>,
}

impl HistogramReport {
    pub fn new(geom: &Geometry, model: EmissionModel, hist: &CollisionHistogram) -> Self {
        HistogramReport {
            geometry: geom.label().to_string(),
            model: model.label().to_string(),
            seed: hist.seed,
            n_particles: hist.n_particles,
            max_collisions: hist.max_collisions,
            trapped: hist.trapped,
            faults: hist.faults,
            mean_collisions: hist.mean_collisions(),
            stderr: hist.stderr(),
            counts: hist.counts.clone(),
        }
    }
}
