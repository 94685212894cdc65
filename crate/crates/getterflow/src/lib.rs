//! Monte Carlo transport of molecules over structured getter-coated
//! surfaces in the free-molecular-flow regime, with a companion toolkit for
//! reducing measured pump-down pressure logs.
//!
//! A structured surface (polygonal pockets, cone arrays, or measured height
//! maps) makes an entering molecule collide with getter walls several times
//! before it can escape through the mouth plane open to the vacuum. Each
//! collision is a capture opportunity, so the structure pumps faster than a
//! flat surface of equal footprint. The simulator counts wall collisions per
//! molecule; the statistics layer converts collision histograms and a wall
//! sticking probability into effective capture probabilities and pumping
//! gains; the analysis layer extracts pumping coefficients from p(t) logs of
//! real pump-down experiments and attributes them to surface regions.
//!
//! Start with the runnable examples:
//!
//! * `hex_pocket`: one hexagonal pocket, collision histogram and capture
//!   statistics.
//! * `cone_array`: periodic cone lattice with lateral wrapping.
//! * `heightmap_pocket`: pocket built from a rasterized height grid, with
//!   STL export.
//! * `theta_sweep`: mean collisions against flank angle, SVG plot.
//! * `stretch_sweep`: height-map pocket stretched to varying depths.
//! * `pressure_analysis`: synthetic pump-down logs reduced to pumping
//!   coefficients and area-attributed gains.
//!
//! The same capabilities are exposed by the thin `getterflow` binary via the
//! `simulate`, `sweep`, and `analyze` subcommands.

pub mod analysis;
pub mod cli;
pub mod config;
pub mod error;
pub mod geometry;
pub mod plot;
pub mod sampler;
pub mod stats;
pub mod sweep;
pub mod tracer;
pub mod vec3;

pub use analysis::{
    analyze, fit_rate_line, AnalysisOptions, AreaBudget, AreaMode, GammaFit, Measured,
    PressureSeries, RateCurve,
};
pub use error::{Error, Result};
pub use geometry::{
    ConeArraySpec, Geometry, HeightMap, PolygonPocketSpec, SurfaceAngle, TraceFault,
};
pub use sampler::EmissionModel;
pub use stats::{
    capture_probability, enhancement, enhancement_limit, StickingProbability,
};
pub use tracer::{run_simulation, run_simulation_capped, CollisionHistogram, HistogramReport};
pub use vec3::Vec3;
