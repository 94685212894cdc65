//! Hexagonally packed cone array: protruding (truncated) cones on a flat
//! base plane, one cone per rhombic primitive cell, traced with periodic
//! lateral wrapping. The top plane sits at the cone tips; the base plane lies
//! at `z = -height`.

use serde::{Deserialize, Serialize};

use super::{Facet, Footprint, Geometry, LateralRule, SurfaceAngle};
use crate::error::{Error, Result};
use crate::vec3::Vec3;

/// Flank segments per cone. Enough that the polygonal approximation error is
/// far below Monte Carlo resolution at 1e5 particles.
const CONE_SEGMENTS: u32 = 96;

#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct ConeArraySpec {
    /// Center-to-center distance of neighboring cones.
    pub pitch: f64,
    pub theta: SurfaceAngle,
    /// Fraction of the untruncated cone height removed at the tip.
    pub truncation_ratio: f64,
    pub base_radius: f64,
}

impl ConeArraySpec {
    pub fn new(
        pitch: f64,
        theta: SurfaceAngle,
        truncation_ratio: f64,
        base_radius: f64,
    ) -> Result<ConeArraySpec> {
        let spec = ConeArraySpec { pitch, theta, truncation_ratio, base_radius };
        spec.validate()?;
        Ok(spec)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.pitch.is_finite() && self.pitch > 0.0) {
            return Err(Error::InvalidParameter(format!(
                "pitch must be positive, got {}",
                self.pitch
            )));
        }
        if !(self.base_radius.is_finite() && self.base_radius > 0.0) {
            return Err(Error::InvalidParameter(format!(
                "base_radius must be positive, got {}",
                self.base_radius
            )));
        }
        if self.base_radius > self.pitch / 2.0 {
            return Err(Error::InvalidParameter(format!(
                "base_radius {} exceeds pitch/2 = {}; cones would overlap",
                self.base_radius,
                self.pitch / 2.0
            )));
        }
        if !(0.0..1.0).contains(&self.truncation_ratio) {
            return Err(Error::InvalidParameter(format!(
                "truncation_ratio must be in [0, 1), got {}",
                self.truncation_ratio
            )));
        }
        Ok(())
    }

    /// Lattice vectors of the hexagonal packing (rhombic primitive cell).
    pub fn lattice(&self) -> ([f64; 2], [f64; 2]) {
        (
            [self.pitch, 0.0],
            [self.pitch / 2.0, self.pitch * 3.0f64.sqrt() / 2.0],
        )
    }

    /// Height of the untruncated cone.
    pub fn full_height(&self) -> f64 {
        self.theta.drop_over_run(self.base_radius)
    }

    /// Height of the realized (possibly truncated) cone.
    pub fn realized_height(&self) -> f64 {
        self.full_height() * (1.0 - self.truncation_ratio)
    }

    /// Wetted-to-cell area ratio for the smooth cone; equals the mean
    /// collision count under cosine re-emission.
    pub fn wetted_area_ratio(&self) -> f64 {
        let cell = self.pitch * self.pitch * 3.0f64.sqrt() / 2.0;
        let r = self.base_radius;
        let tau = self.truncation_ratio;
        if self.theta.is_flat() {
            return 1.0;
        }
        let disk = std::f64::consts::PI * r * r;
        let flank = disk * (1.0 - tau * tau) / self.theta.radians().sin();
        let tip = disk * tau * tau;
        (cell - disk + flank + tip) / cell
    }

    pub fn label(&self) -> String {
        format!(
            "cone_array pitch={} theta_deg={} t_over_h={} base_radius={}",
            self.pitch,
            self.theta.degrees(),
            self.truncation_ratio,
            self.base_radius
        )
    }

    /// Single primitive cell with periodic wrapping.
    pub fn build(&self) -> Result<Geometry> {
        self.build_tiled(1, 1)
    }

    /// `nx` x `ny` explicit tiles traced as one big periodic cell. Used to
    /// cross-check the single-cell wrapping path.
    pub fn build_tiled(&self, nx: u32, ny: u32) -> Result<Geometry> {
        self.validate()?;
        if nx == 0 || ny == 0 {
            return Err(Error::InvalidParameter("tile counts must be positive".into()));
        }
        let (a2, b2) = self.lattice();
        let a = Vec3::new(a2[0], a2[1], 0.0);
        let b = Vec3::new(b2[0], b2[1], 0.0);
        let big_a = [a2[0] * nx as f64, a2[1] * nx as f64];
        let big_b = [b2[0] * ny as f64, b2[1] * ny as f64];
        let footprint = Footprint::Parallelogram {
            origin: [0.0, 0.0],
            edge_a: big_a,
            edge_b: big_b,
        };
        let lateral = LateralRule::PeriodicCell { a: big_a, b: big_b };
        let height = self.realized_height();
        let mut label = self.label();
        if nx != 1 || ny != 1 {
            label.push_str(&format!(" tiled={nx}x{ny}"));
        }

        let mut facets: Vec<Facet> = Vec::new();
        // Base plane at the cone feet covering the whole (tiled) cell.
        let base_z = if height > 0.0 { -height } else { 0.0 };
        let up = Vec3::new(0.0, 0.0, 1.0);
        let c00 = Vec3::new(0.0, 0.0, base_z);
        let c10 = Vec3::new(big_a[0], big_a[1], base_z);
        let c11 = Vec3::new(big_a[0] + big_b[0], big_a[1] + big_b[1], base_z);
        let c01 = Vec3::new(big_b[0], big_b[1], base_z);
        facets.extend(Facet::new(c00, c10, c11, up));
        facets.extend(Facet::new(c00, c11, c01, up));

        if self.theta.is_flat() || height <= f64::EPSILON * self.pitch {
            // Zero-height cones: the cell is just the flat plane.
            return Geometry::assemble(label, facets, footprint, lateral);
        }

        // One cone per lattice site; a one-cell margin ring covers geometry
        // that intrudes across the traced cell's boundary.
        let centroid = (a + b) * 0.5;
        let cone = self.cone_facets(height);
        for i in -1..=nx as i64 {
            for j in -1..=ny as i64 {
                let offset = centroid + a * i as f64 + b * j as f64;
                for f in &cone {
                    facets.push(f.translated(offset));
                }
            }
        }
        Geometry::assemble(label, facets, footprint, lateral)
    }

    /// Facets of a single cone with its axis through the origin, base ring on
    /// the base plane, tip at z = 0.
    fn cone_facets(&self, height: f64) -> Vec<Facet> {
        let tau = self.truncation_ratio;
        let r_base = self.base_radius;
        let r_tip = r_base * tau;
        let n = CONE_SEGMENTS;
        let ring = |radius: f64, z: f64, k: u32| {
            let phi = 2.0 * std::f64::consts::PI * k as f64 / n as f64;
            Vec3::new(radius * phi.cos(), radius * phi.sin(), z)
        };
        let mut out = Vec::new();
        for k in 0..n {
            let b0 = ring(r_base, -height, k);
            let b1 = ring(r_base, -height, k + 1);
            // Outward hint: away from the cone axis.
            let mid = (b0 + b1) * 0.5;
            let outward = Vec3::new(mid.x, mid.y, 0.0);
            if tau > 0.0 {
                let t0 = ring(r_tip, 0.0, k);
                let t1 = ring(r_tip, 0.0, k + 1);
                if let Some(f) = Facet::new(b0, b1, t1, outward) {
                    out.push(f);
                }
                if let Some(f) = Facet::new(b0, t1, t0, outward) {
                    out.push(f);
                }
            } else {
                let apex = Vec3::new(0.0, 0.0, 0.0);
                if let Some(f) = Facet::new(b0, b1, apex, outward) {
                    out.push(f);
                }
            }
        }
        if tau > 0.0 {
            // Flat tip disk, flush with the top plane.
            let up = Vec3::new(0.0, 0.0, 1.0);
            let center = Vec3::new(0.0, 0.0, 0.0);
            for k in 0..n {
                let t0 = ring(r_tip, 0.0, k);
                let t1 = ring(r_tip, 0.0, k + 1);
                if let Some(f) = Facet::new(center, t0, t1, up) {
                    out.push(f);
                }
            }
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn spec(theta_deg: f64, tau: f64) -> ConeArraySpec {
        ConeArraySpec::new(1.0, SurfaceAngle::from_degrees(theta_deg).unwrap(), tau, 0.5)
            .unwrap()
    }

    #[test]
    fn rejects_overlapping_cones() {
        let th = SurfaceAngle::from_degrees(30.0).unwrap();
        assert!(ConeArraySpec::new(1.0, th, 0.0, 0.51).is_err());
        assert!(ConeArraySpec::new(1.0, th, 0.0, 0.5).is_ok());
    }

    #[test]
    fn heights_follow_angle_and_truncation() {
        let s = spec(45.0, 0.2);
        assert!((s.full_height() - 0.5).abs() < 1e-12);
        assert!((s.realized_height() - 0.4).abs() < 1e-12);
    }

    #[test]
    fn flat_cone_array_is_plane() {
        let geom = spec(90.0, 0.0).build().unwrap();
        assert_eq!(geom.facets().len(), 2);
        for f in geom.facets() {
            assert_eq!(f.max_corner().z, 0.0);
        }
    }

    #[test]
    fn mesh_flank_area_close_to_smooth_cone() {
        let s = spec(20.0, 0.3);
        let height = s.realized_height();
        let mesh: f64 = s.cone_facets(height).iter().map(|f| f.area()).sum();
        let disk = std::f64::consts::PI * 0.25;
        let smooth =
            disk * (1.0 - 0.09) / 20.0f64.to_radians().sin() + disk * 0.09;
        assert!(
            ((mesh - smooth) / smooth).abs() < 1e-3,
            "mesh {mesh} vs smooth {smooth}"
        );
    }

    #[test]
    fn tip_disk_sits_on_top_plane() {
        let geom = spec(30.0, 0.4).build().unwrap();
        let zmax = geom
            .facets()
            .iter()
            .map(|f| f.max_corner().z)
            .fold(f64::NEG_INFINITY, f64::max);
        assert_eq!(zmax, 0.0);
    }
}
