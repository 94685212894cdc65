//! Planar triangle facet with a precomputed outward normal and a
//! Möller–Trumbore intersection kernel.

use crate::vec3::Vec3;

/// Barycentric slack for edge hits. Two facets sharing an edge both accept
/// rays through the shared edge, so meshes cannot leak between triangles.
const EDGE_SLACK: f64 = 1e-12;

#[derive(Debug, Clone)]
pub struct Facet {
    pub v0: Vec3,
    pub v1: Vec3,
    pub v2: Vec3,
    /// Unit normal pointing into the gas region.
    pub normal: Vec3,
    e1: Vec3,
    e2: Vec3,
}

impl Facet {
    /// Builds a facet; `gas_hint` is any direction with a positive component
    /// along the side of the triangle the gas occupies, used to orient the
    /// normal. Returns `None` for degenerate (near-zero-area) triangles.
    pub fn new(v0: Vec3, v1: Vec3, v2: Vec3, gas_hint: Vec3) -> Option<Facet> {
        let e1 = v1 - v0;
        let e2 = v2 - v0;
        let raw = e1.cross(e2);
        let span = e1.norm().max(e2.norm()).max((v2 - v1).norm());
        if raw.norm() < 1e-14 * span * span {
            return None;
        }
        let mut normal = raw.normalized()?;
        if normal.dot(gas_hint) < 0.0 {
            normal = -normal;
        }
        Some(Facet { v0, v1, v2, normal, e1, e2 })
    }

    /// Distance along `dir` (unit) from `origin` to the triangle, if the ray
    /// hits its front face within `(tmin, tmax]`.
    #[inline]
    pub fn hit(&self, origin: Vec3, dir: Vec3, tmin: f64, tmax: f64) -> Option<f64> {
        // Front face only: the gas side faces the incoming ray.
        if dir.dot(self.normal) >= 0.0 {
            return None;
        }
        let pvec = dir.cross(self.e2);
        let det = self.e1.dot(pvec);
        if det.abs() < 1e-300 {
            return None;
        }
        let inv_det = 1.0 / det;
        let tvec = origin - self.v0;
        let u = tvec.dot(pvec) * inv_det;
        if !(-EDGE_SLACK..=1.0 + EDGE_SLACK).contains(&u) {
            return None;
        }
        let qvec = tvec.cross(self.e1);
        let v = dir.dot(qvec) * inv_det;
        if v < -EDGE_SLACK || u + v > 1.0 + EDGE_SLACK {
            return None;
        }
        let t = self.e2.dot(qvec) * inv_det;
        if t > tmin && t <= tmax {
            Some(t)
        } else {
            None
        }
    }

    pub fn min_corner(&self) -> Vec3 {
        self.v0.min_components(self.v1).min_components(self.v2)
    }

    pub fn max_corner(&self) -> Vec3 {
        self.v0.max_components(self.v1).max_components(self.v2)
    }

    pub fn centroid(&self) -> Vec3 {
        (self.v0 + self.v1 + self.v2) / 3.0
    }

    pub fn area(&self) -> f64 {
        self.e1.cross(self.e2).norm() * 0.5
    }

    /// Translated copy, normal unchanged.
    pub fn translated(&self, offset: Vec3) -> Facet {
        Facet {
            v0: self.v0 + offset,
            v1: self.v1 + offset,
            v2: self.v2 + offset,
            normal: self.normal,
            e1: self.e1,
            e2: self.e2,
        }
    }
}
