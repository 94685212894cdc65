//! Direction and position sampling for molecular flux.
//!
//! Incident molecules cross the mouth plane with the cosine-weighted flux of
//! an isotropic gas regardless of the re-emission model; the model only
//! governs directions leaving a wall.

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::geometry::{Footprint, Ray};
use crate::vec3::Vec3;

/// Angular law for molecules leaving a surface.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EmissionModel {
    /// Knudsen cosine law, density proportional to cos(angle from normal).
    CosineLaw,
    /// Uniform over the outgoing hemisphere of directions.
    IsotropicHalfSpace,
}

impl EmissionModel {
    pub fn label(&self) -> &'static str {
        match self {
            EmissionModel::CosineLaw => "cosine_law",
            EmissionModel::IsotropicHalfSpace => "isotropic_half_space",
        }
    }

    pub fn all() -> [EmissionModel; 2] {
        [EmissionModel::CosineLaw, EmissionModel::IsotropicHalfSpace]
    }
}

impl std::str::FromStr for EmissionModel {
    type Err = crate::error::Error;

    fn from_str(s: &str) -> crate::error::Result<EmissionModel> {
        match s {
            "cosine_law" | "cosine" => Ok(EmissionModel::CosineLaw),
            "isotropic_half_space" | "isotropic" => Ok(EmissionModel::IsotropicHalfSpace),
            other => Err(crate::error::Error::InvalidParameter(format!(
                "unknown emission model {other:?} (expected cosine_law or isotropic_half_space)"
            ))),
        }
    }
}

impl std::fmt::Display for EmissionModel {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.label())
    }
}

/// Counter-based generator: one independent stream per particle, so results
/// do not depend on how particles are split across threads.
pub fn stream_rng(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

/// Tangent frame for a unit normal, stable for any orientation.
pub fn orthonormal_basis(n: Vec3) -> (Vec3, Vec3) {
    let sign = 1.0f64.copysign(n.z);
    let a = -1.0 / (sign + n.z);
    let b = n.x * n.y * a;
    (
        Vec3::new(1.0 + sign * n.x * n.x * a, sign * b, -sign * n.x),
        Vec3::new(b, sign + n.y * n.y * a, -n.y),
    )
}

/// Cosine-law direction in the local frame, +z up. The z component is
/// strictly positive because the unit draw lies in [0, 1).
pub fn cosine_hemisphere<R: Rng>(rng: &mut R) -> Vec3 {
    let u1: f64 = rng.gen();
    let u2: f64 = rng.gen();
    let r = u1.sqrt();
    let phi = 2.0 * std::f64::consts::PI * u2;
    Vec3::new(r * phi.cos(), r * phi.sin(), (1.0 - u1).sqrt())
}

/// Solid-angle-uniform direction in the upper half space, +z up.
pub fn uniform_hemisphere<R: Rng>(rng: &mut R) -> Vec3 {
    let mut z: f64 = rng.gen();
    while z == 0.0 {
        z = rng.gen();
    }
    let u2: f64 = rng.gen();
    let r = (1.0 - z * z).max(0.0).sqrt();
    let phi = 2.0 * std::f64::consts::PI * u2;
    Vec3::new(r * phi.cos(), r * phi.sin(), z)
}

/// Direction leaving a wall with the given unit normal.
pub fn sample_emission<R: Rng>(model: EmissionModel, normal: Vec3, rng: &mut R) -> Vec3 {
    let local = match model {
        EmissionModel::CosineLaw => cosine_hemisphere(rng),
        EmissionModel::IsotropicHalfSpace => uniform_hemisphere(rng),
    };
    let (t, b) = orthonormal_basis(normal);
    (t * local.x + b * local.y + normal * local.z)
        .normalized()
        .expect("emission direction is a rotation of a unit vector")
}

/// Uniform point on the footprint, in mouth-plane coordinates.
pub fn sample_on_footprint<R: Rng>(fp: &Footprint, rng: &mut R) -> [f64; 2] {
    match fp {
        Footprint::Parallelogram { origin, edge_a, edge_b } => {
            let u: f64 = rng.gen();
            let v: f64 = rng.gen();
            [
                origin[0] + u * edge_a[0] + v * edge_b[0],
                origin[1] + u * edge_a[1] + v * edge_b[1],
            ]
        }
        Footprint::Polygon(pts) => {
            // Fan from the first vertex, triangle picked by area.
            let v0 = pts[0];
            let mut areas = Vec::with_capacity(pts.len() - 2);
            let mut total = 0.0;
            for i in 1..pts.len() - 1 {
                let a = [pts[i][0] - v0[0], pts[i][1] - v0[1]];
                let b = [pts[i + 1][0] - v0[0], pts[i + 1][1] - v0[1]];
                total += 0.5 * (a[0] * b[1] - a[1] * b[0]).abs();
                areas.push(total);
            }
            let pick: f64 = rng.gen::<f64>() * total;
            let idx = areas.partition_point(|&cum| cum < pick).min(areas.len() - 1);
            let a = pts[idx + 1];
            let b = pts[idx + 2];
            let su = rng.gen::<f64>().sqrt();
            let v: f64 = rng.gen();
            let w0 = 1.0 - su;
            let w1 = su * (1.0 - v);
            let w2 = su * v;
            [
                w0 * v0[0] + w1 * a[0] + w2 * b[0],
                w0 * v0[1] + w1 * a[1] + w2 * b[1],
            ]
        }
    }
}

/// Molecule entering through the mouth plane: uniform over the footprint,
/// cosine-weighted direction pointing down into the structure.
pub fn sample_incident<R: Rng>(fp: &Footprint, rng: &mut R) -> Ray {
    let [x, y] = sample_on_footprint(fp, rng);
    let d = cosine_hemisphere(rng);
    Ray::unit(Vec3::new(x, y, 0.0), Vec3::new(d.x, d.y, -d.z))
}
