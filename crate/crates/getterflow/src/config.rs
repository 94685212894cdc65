//! Versioned JSON configuration for the command-line entry points. Unknown
//! fields are rejected so typos fail loudly, and every file carries a
//! `version` field for forward compatibility.

use std::path::{Path, PathBuf};

use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};

use crate::analysis::{AreaBudget, AreaMode};
use crate::error::{Error, Result};
use crate::geometry::{ConeArraySpec, Geometry, HeightMap, PolygonPocketSpec, SurfaceAngle};
use crate::sampler::EmissionModel;
use crate::sweep::{
    cone_theta_sweep, heightmap_stretch_sweep, pocket_sides_sweep, pocket_theta_sweep,
    pocket_truncation_sweep, SweepCase,
};

pub const CONFIG_VERSION: u32 = 1;

fn check_version(version: u32) -> Result<()> {
    if version == CONFIG_VERSION {
        Ok(())
    } else {
        Err(Error::Config(format!(
            "unsupported config version {version}, this build reads version {CONFIG_VERSION}"
        )))
    }
}

fn load_json<T: DeserializeOwned>(path: &Path) -> Result<T> {
    let text = std::fs::read_to_string(path)?;
    serde_json::from_str(&text)
        .map_err(|e| Error::Config(format!("{}: {e}", path.display())))
}

/// Resolves a config-relative path against the config file's directory.
pub fn resolve_path(base: &Path, p: &str) -> PathBuf {
    let candidate = Path::new(p);
    if candidate.is_absolute() {
        candidate.to_path_buf()
    } else {
        base.join(candidate)
    }
}

/// One surface geometry, buildable into a mesh.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum GeometryConfig {
    PolygonPocket {
        sides: u32,
        side_length: f64,
        theta_deg: f64,
        truncation_ratio: f64,
    },
    ConeArray {
        pitch: f64,
        theta_deg: f64,
        truncation_ratio: f64,
        base_radius: f64,
    },
    HeightmapCsv {
        path: String,
        cell_pitch: f64,
        hexagon_side: f64,
        depth_scale: f64,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        side_to_depth: Option<f64>,
    },
    HeightmapPgm {
        pgm: String,
        sidecar: String,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        side_to_depth: Option<f64>,
    },
}

impl GeometryConfig {
    /// Loads the underlying height map; errors for analytic geometries.
    pub fn load_heightmap(&self, base: &Path) -> Result<HeightMap> {
        let (map, stretch) = match self {
            GeometryConfig::HeightmapCsv {
                path,
                cell_pitch,
                hexagon_side,
                depth_scale,
                side_to_depth,
            } => (
                HeightMap::from_csv_grid(
                    &resolve_path(base, path),
                    *cell_pitch,
                    *hexagon_side,
                    *depth_scale,
                )?,
                *side_to_depth,
            ),
            GeometryConfig::HeightmapPgm { pgm, sidecar, side_to_depth } => (
                HeightMap::from_pgm(&resolve_path(base, pgm), &resolve_path(base, sidecar))?,
                *side_to_depth,
            ),
            other => {
                return Err(Error::Config(format!(
                    "geometry kind {other:?} is not a height map"
                )))
            }
        };
        match stretch {
            Some(ratio) => map.stretched(ratio),
            None => Ok(map),
        }
    }

    pub fn build(&self, base: &Path) -> Result<Geometry> {
        match self {
            GeometryConfig::PolygonPocket { sides, side_length, theta_deg, truncation_ratio } => {
                PolygonPocketSpec::new(
                    *sides,
                    *side_length,
                    SurfaceAngle::from_degrees(*theta_deg)?,
                    *truncation_ratio,
                )?
                .build()
            }
            GeometryConfig::ConeArray { pitch, theta_deg, truncation_ratio, base_radius } => {
                ConeArraySpec::new(
                    *pitch,
                    SurfaceAngle::from_degrees(*theta_deg)?,
                    *truncation_ratio,
                    *base_radius,
                )?
                .build()
            }
            GeometryConfig::HeightmapCsv { .. } | GeometryConfig::HeightmapPgm { .. } => {
                self.load_heightmap(base)?.build()
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SimulateConfig {
    pub version: u32,
    pub geometry: GeometryConfig,
    pub model: EmissionModel,
    pub particles: u64,
    pub seed: u64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub max_collisions: Option<u32>,
    /// Sticking probabilities to evaluate capture statistics at.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sticking: Option<Vec<f64>>,
}

impl SimulateConfig {
    pub fn load(path: &Path) -> Result<SimulateConfig> {
        let cfg: SimulateConfig = load_json(path)?;
        check_version(cfg.version)?;
        if cfg.particles == 0 {
            return Err(Error::Config("particles must be at least 1".into()));
        }
        Ok(cfg)
    }
}

fn default_models() -> Vec<EmissionModel> {
    EmissionModel::all().to_vec()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "snake_case")]
pub enum SweepFamilyConfig {
    PocketTheta {
        sides: u32,
        side_length: f64,
        truncation_ratio: f64,
        theta_deg: Vec<f64>,
    },
    PocketSides {
        side_length: f64,
        theta_deg: f64,
        truncation_ratio: f64,
        sides: Vec<u32>,
    },
    PocketTruncation {
        sides: u32,
        side_length: f64,
        theta_deg: f64,
        truncation_ratio: Vec<f64>,
    },
    ConeTheta {
        pitch: f64,
        base_radius: f64,
        truncation_ratio: f64,
        theta_deg: Vec<f64>,
    },
    HeightmapStretch {
        source: Box<GeometryConfig>,
        side_to_depth: Vec<f64>,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepConfig {
    pub version: u32,
    pub sweep: SweepFamilyConfig,
    #[serde(default = "default_models")]
    pub models: Vec<EmissionModel>,
    pub particles: u64,
    pub seed: u64,
}

impl SweepConfig {
    pub fn load(path: &Path) -> Result<SweepConfig> {
        let cfg: SweepConfig = load_json(path)?;
        check_version(cfg.version)?;
        if cfg.particles == 0 {
            return Err(Error::Config("particles must be at least 1".into()));
        }
        if cfg.models.is_empty() {
            return Err(Error::Config("models must not be empty".into()));
        }
        Ok(cfg)
    }

    pub fn cases(&self, base: &Path) -> Result<Vec<SweepCase>> {
        match &self.sweep {
            SweepFamilyConfig::PocketTheta { sides, side_length, truncation_ratio, theta_deg } => {
                // The base angle is irrelevant; each case replaces it.
                let spec = PolygonPocketSpec::new(
                    *sides,
                    *side_length,
                    SurfaceAngle::from_degrees(90.0)?,
                    *truncation_ratio,
                )?;
                pocket_theta_sweep(&spec, theta_deg)
            }
            SweepFamilyConfig::PocketSides { side_length, theta_deg, truncation_ratio, sides } => {
                let spec = PolygonPocketSpec::new(
                    3,
                    *side_length,
                    SurfaceAngle::from_degrees(*theta_deg)?,
                    *truncation_ratio,
                )?;
                pocket_sides_sweep(&spec, sides)
            }
            SweepFamilyConfig::PocketTruncation {
                sides,
                side_length,
                theta_deg,
                truncation_ratio,
            } => {
                let spec = PolygonPocketSpec::new(
                    *sides,
                    *side_length,
                    SurfaceAngle::from_degrees(*theta_deg)?,
                    0.0,
                )?;
                pocket_truncation_sweep(&spec, truncation_ratio)
            }
            SweepFamilyConfig::ConeTheta { pitch, base_radius, truncation_ratio, theta_deg } => {
                let spec = ConeArraySpec::new(
                    *pitch,
                    SurfaceAngle::from_degrees(90.0)?,
                    *truncation_ratio,
                    *base_radius,
                )?;
                cone_theta_sweep(&spec, theta_deg)
            }
            SweepFamilyConfig::HeightmapStretch { source, side_to_depth } => {
                let map = source.load_heightmap(base)?;
                heightmap_stretch_sweep(&map, side_to_depth)
            }
        }
    }

    /// Name of the varied quantity, for tables and plot axes.
    pub fn varied_axis(&self) -> (&'static str, &'static str) {
        match &self.sweep {
            SweepFamilyConfig::PocketTheta { .. } | SweepFamilyConfig::ConeTheta { .. } => {
                ("theta_deg", "surface angle (deg)")
            }
            SweepFamilyConfig::PocketSides { .. } => ("sides", "polygon sides"),
            SweepFamilyConfig::PocketTruncation { .. } => {
                ("truncation_ratio", "truncation ratio")
            }
            SweepFamilyConfig::HeightmapStretch { .. } => {
                ("side_to_depth", "mouth side / depth")
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ComparisonConfig {
    /// Pump-down log of the plain reference sample.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub reference_log: Option<String>,
    /// Alternative to `reference_log`: an already-fitted reference rate.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub reference_gamma: Option<f64>,
    #[serde(default)]
    pub reference_gamma_stderr: f64,
    pub areas: AreaBudget,
    pub modes: Vec<AreaMode>,
}

impl ComparisonConfig {
    pub fn validate(&self) -> Result<()> {
        match (&self.reference_log, self.reference_gamma) {
            (Some(_), Some(_)) => Err(Error::Config(
                "give either reference_log or reference_gamma, not both".into(),
            )),
            (None, None) => Err(Error::Config(
                "comparison needs reference_log or reference_gamma".into(),
            )),
            _ => {
                self.areas.validate()?;
                if self.modes.is_empty() {
                    return Err(Error::Config("comparison modes must not be empty".into()));
                }
                Ok(())
            }
        }
    }
}

fn default_threshold() -> f64 {
    1e-5
}

fn default_grid_points() -> usize {
    40
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AnalyzeConfig {
    pub version: u32,
    pub sample_log: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub control_log: Option<String>,
    #[serde(default = "default_threshold")]
    pub threshold: f64,
    #[serde(default = "default_grid_points")]
    pub grid_points: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub comparison: Option<ComparisonConfig>,
}

impl AnalyzeConfig {
    pub fn load(path: &Path) -> Result<AnalyzeConfig> {
        let cfg: AnalyzeConfig = load_json(path)?;
        check_version(cfg.version)?;
        if let Some(c) = &cfg.comparison {
            c.validate()?;
        }
        Ok(cfg)
    }
}
