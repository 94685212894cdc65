//! Truncated polygonal pocket: an inverted pyramid sunk into the top plane.
//!
//! The mouth is a regular polygon in the top plane. Flanks descend from the
//! mouth edges toward the apex; the truncation ratio `t/h` is the fraction of
//! the untruncated apex height removed, leaving a flat bottom scaled by `t/h`
//! at depth `h (1 - t/h)`.

use serde::{Deserialize, Serialize};

use super::{fan_horizontal, regular_polygon, Facet, Footprint, Geometry, LateralRule, SurfaceAngle};
use crate::error::{Error, Result};
use crate::vec3::Vec3;

#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct PolygonPocketSpec {
    pub sides: u32,
    pub side_length: f64,
    pub theta: SurfaceAngle,
    pub truncation_ratio: f64,
}

impl PolygonPocketSpec {
    pub fn new(
        sides: u32,
        side_length: f64,
        theta: SurfaceAngle,
        truncation_ratio: f64,
    ) -> Result<PolygonPocketSpec> {
        let spec = PolygonPocketSpec { sides, side_length, theta, truncation_ratio };
        spec.validate()?;
        Ok(spec)
    }

    pub fn validate(&self) -> Result<()> {
        if self.sides < 3 {
            return Err(Error::InvalidParameter(format!(
                "polygon pocket needs at least 3 sides, got {}",
                self.sides
            )));
        }
        if !(self.side_length.is_finite() && self.side_length > 0.0) {
            return Err(Error::InvalidParameter(format!(
                "side_length must be positive, got {}",
                self.side_length
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

    /// Distance from the polygon center to an edge midpoint.
    pub fn apothem(&self) -> f64 {
        self.side_length / (2.0 * (std::f64::consts::PI / self.sides as f64).tan())
    }

    /// Apex depth of the untruncated pyramid.
    pub fn apex_depth(&self) -> f64 {
        self.theta.drop_over_run(self.apothem())
    }

    /// Depth of the realized (possibly truncated) pocket.
    pub fn realized_depth(&self) -> f64 {
        self.apex_depth() * (1.0 - self.truncation_ratio)
    }

    /// Wetted-to-mouth area ratio: (1 - tau^2)/sin(theta) + tau^2. For
    /// diffuse (cosine) re-emission this equals the mean collision count.
    pub fn wetted_area_ratio(&self) -> f64 {
        let tau = self.truncation_ratio;
        if self.theta.is_flat() {
            return 1.0;
        }
        (1.0 - tau * tau) / self.theta.radians().sin() + tau * tau
    }

    pub fn label(&self) -> String {
        format!(
            "polygon_pocket sides={} side={} theta_deg={} t_over_h={}",
            self.sides,
            self.side_length,
            self.theta.degrees(),
            self.truncation_ratio
        )
    }

    pub fn build(&self) -> Result<Geometry> {
        self.validate()?;
        let mouth = regular_polygon(self.sides, self.side_length);
        let footprint = Footprint::Polygon(mouth.clone());
        let mut facets: Vec<Facet> = Vec::new();

        let depth = self.realized_depth();
        if self.theta.is_flat() || depth <= f64::EPSILON * self.side_length {
            // Degenerate pocket: just the flat top plane over the mouth.
            fan_horizontal(&mouth, 0.0, &mut facets);
            return Geometry::assemble(self.label(), facets, footprint, LateralRule::ClosedWalls);
        }

        let tau = self.truncation_ratio;
        let n = mouth.len();
        if tau > 0.0 {
            // Flank trapezoids from the mouth down to the scaled bottom edge.
            let bottom: Vec<[f64; 2]> =
                mouth.iter().map(|[x, y]| [x * tau, y * tau]).collect();
            for i in 0..n {
                let j = (i + 1) % n;
                let m0 = Vec3::new(mouth[i][0], mouth[i][1], 0.0);
                let m1 = Vec3::new(mouth[j][0], mouth[j][1], 0.0);
                let b0 = Vec3::new(bottom[i][0], bottom[i][1], -depth);
                let b1 = Vec3::new(bottom[j][0], bottom[j][1], -depth);
                let mid = (m0 + m1 + b0 + b1) / 4.0;
                let inward = Vec3::new(-mid.x, -mid.y, 0.0);
                if let Some(f) = Facet::new(m0, m1, b1, inward) {
                    facets.push(f);
                }
                if let Some(f) = Facet::new(m0, b1, b0, inward) {
                    facets.push(f);
                }
            }
            fan_horizontal(&bottom, -depth, &mut facets);
        } else {
            let apex = Vec3::new(0.0, 0.0, -depth);
            for i in 0..n {
                let j = (i + 1) % n;
                let m0 = Vec3::new(mouth[i][0], mouth[i][1], 0.0);
                let m1 = Vec3::new(mouth[j][0], mouth[j][1], 0.0);
                let mid = (m0 + m1) / 2.0;
                let inward = Vec3::new(-mid.x, -mid.y, 0.0);
                if let Some(f) = Facet::new(m0, m1, apex, inward) {
                    facets.push(f);
                }
            }
        }
        Geometry::assemble(self.label(), facets, footprint, LateralRule::ClosedWalls)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn hex(theta_deg: f64, tau: f64) -> PolygonPocketSpec {
        PolygonPocketSpec::new(6, 1.0, SurfaceAngle::from_degrees(theta_deg).unwrap(), tau)
            .unwrap()
    }

    #[test]
    fn apex_depth_equals_apothem_at_45_degrees() {
        // Hexagon side 1: apothem = sqrt(3)/2; flank drop = apothem / tan(45).
        let spec = hex(45.0, 0.0);
        let apothem = 3.0f64.sqrt() / 2.0;
        assert!((spec.apothem() - apothem).abs() < 1e-12);
        assert!((spec.apex_depth() - apothem).abs() < 1e-12);
    }

    #[test]
    fn truncation_scales_depth_and_bottom() {
        let spec = hex(30.0, 0.25);
        let h = spec.apothem() / 30.0f64.to_radians().tan();
        assert!((spec.apex_depth() - h).abs() < 1e-12);
        assert!((spec.realized_depth() - 0.75 * h).abs() < 1e-12);
        // The mesh floor must sit at -realized_depth.
        let geom = spec.build().unwrap();
        let floor = geom
            .facets()
            .iter()
            .map(|f| f.min_corner().z)
            .fold(f64::INFINITY, f64::min);
        assert!((floor + spec.realized_depth()).abs() < 1e-12);
    }

    #[test]
    fn rejects_bad_parameters() {
        let th = SurfaceAngle::from_degrees(30.0).unwrap();
        assert!(PolygonPocketSpec::new(2, 1.0, th, 0.0).is_err());
        assert!(PolygonPocketSpec::new(6, 0.0, th, 0.0).is_err());
        assert!(PolygonPocketSpec::new(6, 1.0, th, 1.0).is_err());
        assert!(PolygonPocketSpec::new(6, 1.0, th, -0.1).is_err());
    }

    #[test]
    fn flat_pocket_is_top_plane_only() {
        let spec = hex(90.0, 0.0);
        let geom = spec.build().unwrap();
        for f in geom.facets() {
            assert_eq!(f.min_corner().z, 0.0);
            assert_eq!(f.max_corner().z, 0.0);
            assert!(f.normal.z > 0.999999999999);
        }
    }

    #[test]
    fn mesh_area_matches_closed_form_ratio() {
        // Facet area / mouth area must reproduce the closed-form wetted-area
        // ratio; the flanks are exact planes so this is tight.
        for (deg, tau) in [(20.0, 0.0), (30.0, 0.2), (60.0, 0.5), (10.0, 0.2)] {
            let spec = hex(deg, tau);
            let geom = spec.build().unwrap();
            let ratio = geom.surface_area() / geom.footprint().area();
            assert!(
                (ratio - spec.wetted_area_ratio()).abs() < 1e-9,
                "theta={deg} tau={tau}: mesh {ratio} vs closed form {}",
                spec.wetted_area_ratio()
            );
        }
    }

    #[test]
    fn triangle_pocket_builds() {
        let spec =
            PolygonPocketSpec::new(3, 1.0, SurfaceAngle::from_degrees(25.0).unwrap(), 0.2)
                .unwrap();
        let geom = spec.build().unwrap();
        assert_eq!(geom.facets().len(), 3 * 2 + 1); // 3 flank quads + bottom fan
    }
}
