//! Structured-surface geometry for free-molecular-flow transport.
//!
//! Conventions shared by every builder:
//! - the top plane is `z = 0`; the structure lies at `z <= 0`,
//! - facet normals point into the gas region,
//! - the surface angle is measured between an inclined facet and the top-plane
//!   normal, so 90 degrees is a flat surface and small angles are near-vertical
//!   walls.

mod bvh;
pub mod cone;
pub mod heightmap;
pub mod pocket;
pub mod stl;
mod triangle;

pub use cone::ConeArraySpec;
pub use heightmap::{rasterize_polygon_pocket, Grid, HeightMap, PgmSidecar};
pub use pocket::PolygonPocketSpec;
pub use triangle::Facet;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::vec3::Vec3;
use bvh::Bvh;

/// Relative intersection tolerance: hits closer than this fraction of the
/// cell diameter to the emission point are rejected as self-intersections.
pub const INTERSECT_TOL_REL: f64 = 1e-9;

/// Wrap iterations per segment before declaring the trace faulty.
const MAX_WRAPS: u64 = 1_000_000;

/// Inclination of a facet relative to the top-plane normal, in degrees.
/// Valid range is (0, 90]; 90 degrees degenerates to a flat surface.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct SurfaceAngle {
    degrees: f64,
}

impl SurfaceAngle {
    pub fn from_degrees(degrees: f64) -> Result<SurfaceAngle> {
        if !degrees.is_finite() || degrees <= 0.0 || degrees > 90.0 {
            return Err(Error::InvalidParameter(format!(
                "surface angle must be in (0, 90] degrees, got {degrees}"
            )));
        }
        Ok(SurfaceAngle { degrees })
    }

    pub fn degrees(self) -> f64 {
        self.degrees
    }

    pub fn radians(self) -> f64 {
        self.degrees.to_radians()
    }

    pub fn is_flat(self) -> bool {
        self.degrees == 90.0
    }

    /// Depth below the top plane reached by a flank after a horizontal run
    /// `r` toward the structure axis.
    pub fn drop_over_run(self, r: f64) -> f64 {
        if self.is_flat() {
            0.0
        } else {
            r / self.radians().tan()
        }
    }
}

/// A ray with a unit direction.
#[derive(Debug, Clone, Copy)]
pub struct Ray {
    pub origin: Vec3,
    pub direction: Vec3,
}

impl Ray {
    /// Normalizes `direction`; rejects zero or non-finite input.
    pub fn new(origin: Vec3, direction: Vec3) -> Result<Ray> {
        if !origin.is_finite() || !direction.is_finite() {
            return Err(Error::InvalidParameter("non-finite ray".into()));
        }
        let direction = direction
            .normalized()
            .ok_or_else(|| Error::InvalidParameter("zero-length ray direction".into()))?;
        Ok(Ray { origin, direction })
    }

    /// For directions already normalized by a sampler.
    #[inline]
    pub fn unit(origin: Vec3, direction: Vec3) -> Ray {
        debug_assert!((direction.norm() - 1.0).abs() < 1e-12);
        Ray { origin, direction }
    }
}

/// What a traced segment ran into.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum HitKind {
    /// Collision with the structured surface.
    Facet { point: Vec3, normal: Vec3 },
    /// Upward crossing of the top plane: the particle left the structure.
    TopPlaneExit,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Hit {
    pub kind: HitKind,
    /// Path length from the ray origin, including any wrapped sub-segments.
    pub distance: f64,
}

/// Hard geometry fault: a traced ray found no surface and no exit.
#[derive(Debug, Clone)]
pub enum TraceFault {
    /// The ray escaped below or sideways without hitting a facet.
    NoIntersection { origin: Vec3, direction: Vec3 },
    /// Lateral wrapping never terminated (pathological near-horizontal ray).
    WrapOverflow { origin: Vec3, direction: Vec3 },
}

impl std::fmt::Display for TraceFault {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            TraceFault::NoIntersection { origin, direction } => write!(
                f,
                "no intersection from ({:.6}, {:.6}, {:.6}) along ({:.6}, {:.6}, {:.6})",
                origin.x, origin.y, origin.z, direction.x, direction.y, direction.z
            ),
            TraceFault::WrapOverflow { origin, direction } => write!(
                f,
                "wrap overflow from ({:.6}, {:.6}, {:.6}) along ({:.6}, {:.6}, {:.6})",
                origin.x, origin.y, origin.z, direction.x, direction.y, direction.z
            ),
        }
    }
}

/// Top-plane region particles enter through; entry origins are sampled
/// uniformly over it.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub enum Footprint {
    /// Convex polygon (counter-clockwise vertices) in the top plane.
    Polygon(Vec<[f64; 2]>),
    /// Parallelogram cell spanned by two edge vectors.
    Parallelogram { origin: [f64; 2], edge_a: [f64; 2], edge_b: [f64; 2] },
}

impl Footprint {
    pub fn area(&self) -> f64 {
        match self {
            Footprint::Polygon(v) => {
                let mut twice = 0.0;
                for i in 0..v.len() {
                    let [x0, y0] = v[i];
                    let [x1, y1] = v[(i + 1) % v.len()];
                    twice += x0 * y1 - x1 * y0;
                }
                twice.abs() * 0.5
            }
            Footprint::Parallelogram { edge_a, edge_b, .. } => {
                (edge_a[0] * edge_b[1] - edge_a[1] * edge_b[0]).abs()
            }
        }
    }

    /// Point-inclusion test (convex polygon assumed); boundary counts as
    /// inside. Used by tests and validation, not by the tracer.
    pub fn contains(&self, x: f64, y: f64) -> bool {
        match self {
            Footprint::Polygon(v) => {
                let mut sign = 0.0f64;
                for i in 0..v.len() {
                    let [x0, y0] = v[i];
                    let [x1, y1] = v[(i + 1) % v.len()];
                    let cross = (x1 - x0) * (y - y0) - (y1 - y0) * (x - x0);
                    if cross.abs() < 1e-12 {
                        continue;
                    }
                    if sign == 0.0 {
                        sign = cross.signum();
                    } else if cross.signum() != sign {
                        return false;
                    }
                }
                true
            }
            Footprint::Parallelogram { origin, edge_a, edge_b } => {
                let det = edge_a[0] * edge_b[1] - edge_a[1] * edge_b[0];
                let px = x - origin[0];
                let py = y - origin[1];
                let u = (px * edge_b[1] - py * edge_b[0]) / det;
                let v = (py * edge_a[0] - px * edge_a[1]) / det;
                (-1e-12..=1.0 + 1e-12).contains(&u) && (-1e-12..=1.0 + 1e-12).contains(&v)
            }
        }
    }

    pub fn bounding_box(&self) -> ([f64; 2], [f64; 2]) {
        match self {
            Footprint::Polygon(v) => {
                let mut lo = [f64::INFINITY; 2];
                let mut hi = [f64::NEG_INFINITY; 2];
                for p in v {
                    for k in 0..2 {
                        lo[k] = lo[k].min(p[k]);
                        hi[k] = hi[k].max(p[k]);
                    }
                }
                (lo, hi)
            }
            Footprint::Parallelogram { origin, edge_a, edge_b } => {
                let mut lo = [f64::INFINITY; 2];
                let mut hi = [f64::NEG_INFINITY; 2];
                for (su, sv) in [(0.0, 0.0), (1.0, 0.0), (0.0, 1.0), (1.0, 1.0)] {
                    let p = [
                        origin[0] + su * edge_a[0] + sv * edge_b[0],
                        origin[1] + su * edge_a[1] + sv * edge_b[1],
                    ];
                    for k in 0..2 {
                        lo[k] = lo[k].min(p[k]);
                        hi[k] = hi[k].max(p[k]);
                    }
                }
                (lo, hi)
            }
        }
    }
}

/// Lateral closure of the simulated cell.
#[derive(Debug, Clone)]
pub enum LateralRule {
    /// Facets seal the cell sideways (pockets, height maps).
    ClosedWalls,
    /// Rays crossing the cell boundary re-enter translated by a lattice
    /// vector; `a` and `b` span the primitive cell in the top plane.
    PeriodicCell { a: [f64; 2], b: [f64; 2] },
}

/// Precomputed inverse of the 2x2 lattice matrix for fractional coordinates.
#[derive(Debug, Clone, Copy)]
struct CellBasis {
    a: Vec3,
    b: Vec3,
    inv: [[f64; 2]; 2],
}

impl CellBasis {
    fn new(a: [f64; 2], b: [f64; 2]) -> Result<CellBasis> {
        let det = a[0] * b[1] - a[1] * b[0];
        if det.abs() < 1e-300 {
            return Err(Error::InvalidParameter("degenerate periodic cell".into()));
        }
        Ok(CellBasis {
            a: Vec3::new(a[0], a[1], 0.0),
            b: Vec3::new(b[0], b[1], 0.0),
            inv: [[b[1] / det, -b[0] / det], [-a[1] / det, a[0] / det]],
        })
    }

    #[inline]
    fn fractional(&self, x: f64, y: f64) -> (f64, f64) {
        (
            self.inv[0][0] * x + self.inv[0][1] * y,
            self.inv[1][0] * x + self.inv[1][1] * y,
        )
    }
}

/// Triangulated cell of a structured surface, ready for tracing.
#[derive(Debug)]
pub struct Geometry {
    label: String,
    facets: Vec<Facet>,
    footprint: Footprint,
    lateral: LateralRule,
    basis: Option<CellBasis>,
    bvh: Bvh,
    eps: f64,
}

impl Geometry {
    /// Assembles a geometry from facets produced by a builder. `facets` must
    /// cover everything a ray inside the cell prism can reach.
    pub fn assemble(
        label: String,
        facets: Vec<Facet>,
        footprint: Footprint,
        lateral: LateralRule,
    ) -> Result<Geometry> {
        if facets.is_empty() {
            return Err(Error::InvalidParameter("geometry has no facets".into()));
        }
        let basis = match &lateral {
            LateralRule::ClosedWalls => None,
            LateralRule::PeriodicCell { a, b } => Some(CellBasis::new(*a, *b)?),
        };
        let mut lo = Vec3::new(f64::INFINITY, f64::INFINITY, f64::INFINITY);
        let mut hi = Vec3::new(f64::NEG_INFINITY, f64::NEG_INFINITY, f64::NEG_INFINITY);
        for f in &facets {
            lo = lo.min_components(f.min_corner());
            hi = hi.max_components(f.max_corner());
        }
        let (flo, fhi) = footprint.bounding_box();
        lo = lo.min_components(Vec3::new(flo[0], flo[1], 0.0));
        hi = hi.max_components(Vec3::new(fhi[0], fhi[1], 0.0));
        let diameter = (hi - lo).norm();
        if !(diameter.is_finite() && diameter > 0.0) {
            return Err(Error::InvalidParameter("degenerate geometry extent".into()));
        }
        let bvh = Bvh::build(&facets);
        Ok(Geometry {
            label,
            facets,
            footprint,
            lateral,
            basis,
            bvh,
            eps: INTERSECT_TOL_REL * diameter,
        })
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    pub fn facets(&self) -> &[Facet] {
        &self.facets
    }

    pub fn footprint(&self) -> &Footprint {
        &self.footprint
    }

    pub fn lateral_rule(&self) -> &LateralRule {
        &self.lateral
    }

    /// Intersection tolerance in world units (also the emission offset).
    pub fn eps(&self) -> f64 {
        self.eps
    }

    /// Nearest surface or top-plane event along `ray`, wrapping laterally as
    /// needed for periodic cells. Rays starting on or above the top plane
    /// (entry rays) may hit at distance zero; all other rays reject hits
    /// closer than the intersection tolerance.
    pub fn intersect(&self, ray: &Ray) -> std::result::Result<Hit, TraceFault> {
        let fault_ctx = (ray.origin, ray.direction);
        // Entry rays start on the top plane and may hit a flush facet at
        // distance zero, so their lower bound sits just below zero. Wall
        // emissions are offset by eps along the normal and reject anything
        // closer than that.
        let clearance = if ray.origin.z > -self.eps { -self.eps } else { self.eps };
        let dir = ray.direction;
        let mut origin = ray.origin;
        let mut traveled = 0.0f64;

        for _ in 0..MAX_WRAPS {
            let tmin = clearance - traveled;
            // Upward rays can always exit through the top plane; origin above
            // the plane exits immediately.
            let t_top = if dir.z > 0.0 {
                Some(((-origin.z) / dir.z).max(0.0))
            } else {
                None
            };
            let t_wrap = match self.basis {
                Some(basis) => self.next_wrap(&basis, origin, dir),
                None => None,
            };
            let window = match (t_top, t_wrap) {
                (Some(t), Some((w, _))) => t.min(w),
                (Some(t), None) => t,
                (None, Some((w, _))) => w,
                (None, None) => f64::INFINITY,
            };
            let facet_hit =
                self.bvh
                    .nearest(&self.facets, origin, dir, tmin, window + 4.0 * self.eps);

            let t_facet = facet_hit.map(|(t, _)| t).unwrap_or(f64::INFINITY);
            // Grazing ties between an exit and a facet resolve to the exit.
            if let Some(tt) = t_top {
                let wrap_t = t_wrap.map(|(w, _)| w).unwrap_or(f64::INFINITY);
                if tt <= t_facet && tt <= wrap_t {
                    return Ok(Hit { kind: HitKind::TopPlaneExit, distance: traveled + tt });
                }
            }
            if let Some((t, idx)) = facet_hit {
                let wrap_t = t_wrap.map(|(w, _)| w).unwrap_or(f64::INFINITY);
                if t <= wrap_t {
                    let f = &self.facets[idx as usize];
                    return Ok(Hit {
                        kind: HitKind::Facet { point: origin + dir * t, normal: f.normal },
                        distance: traveled + t,
                    });
                }
            }
            match t_wrap {
                Some((w, shift)) => {
                    origin = origin + dir * w - shift;
                    traveled += w;
                }
                None => {
                    return Err(TraceFault::NoIntersection {
                        origin: fault_ctx.0,
                        direction: fault_ctx.1,
                    })
                }
            }
        }
        Err(TraceFault::WrapOverflow { origin: fault_ctx.0, direction: fault_ctx.1 })
    }

    /// Distance to the next lateral cell-boundary crossing and the lattice
    /// translation to subtract on re-entry.
    fn next_wrap(&self, basis: &CellBasis, origin: Vec3, dir: Vec3) -> Option<(f64, Vec3)> {
        let (u, v) = basis.fractional(origin.x, origin.y);
        let (du, dv) = basis.fractional(dir.x, dir.y);
        let mut best: Option<(f64, Vec3)> = None;
        if du > 1e-300 {
            let t = ((1.0 - u) / du).max(0.0);
            best = Some((t, basis.a));
        } else if du < -1e-300 {
            let t = (-u / du).max(0.0);
            best = Some((t, -basis.a));
        }
        if dv > 1e-300 {
            let t = ((1.0 - v) / dv).max(0.0);
            if best.is_none_or(|(bt, _)| t < bt) {
                best = Some((t, basis.b));
            }
        } else if dv < -1e-300 {
            let t = (-v / dv).max(0.0);
            if best.is_none_or(|(bt, _)| t < bt) {
                best = Some((t, -basis.b));
            }
        }
        best
    }

    /// Total facet area (used by area-ratio oracles and reports).
    pub fn surface_area(&self) -> f64 {
        self.facets.iter().map(|f| f.area()).sum()
    }
}

/// Fan-triangulates a convex polygon lying in a horizontal plane at height
/// `z`, normals along +z.
pub(crate) fn fan_horizontal(
    polygon: &[[f64; 2]],
    z: f64,
    out: &mut Vec<Facet>,
) {
    let up = Vec3::new(0.0, 0.0, 1.0);
    for i in 1..polygon.len() - 1 {
        let v0 = Vec3::new(polygon[0][0], polygon[0][1], z);
        let v1 = Vec3::new(polygon[i][0], polygon[i][1], z);
        let v2 = Vec3::new(polygon[i + 1][0], polygon[i + 1][1], z);
        if let Some(f) = Facet::new(v0, v1, v2, up) {
            out.push(f);
        }
    }
}

/// Vertices of a regular polygon with `sides` sides and the given side
/// length, centered on the origin. The first vertex sits on the +x axis.
pub(crate) fn regular_polygon(sides: u32, side_length: f64) -> Vec<[f64; 2]> {
    let circumradius = side_length / (2.0 * (std::f64::consts::PI / sides as f64).sin());
    (0..sides)
        .map(|k| {
            let phi = 2.0 * std::f64::consts::PI * k as f64 / sides as f64;
            [circumradius * phi.cos(), circumradius * phi.sin()]
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn surface_angle_bounds() {
        assert!(SurfaceAngle::from_degrees(0.0).is_err());
        assert!(SurfaceAngle::from_degrees(-5.0).is_err());
        assert!(SurfaceAngle::from_degrees(90.5).is_err());
        assert!(SurfaceAngle::from_degrees(f64::NAN).is_err());
        assert!(SurfaceAngle::from_degrees(90.0).unwrap().is_flat());
    }

    #[test]
    fn angle_drop_is_run_over_tan() {
        let th = SurfaceAngle::from_degrees(45.0).unwrap();
        assert!((th.drop_over_run(2.0) - 2.0).abs() < 1e-12);
        let flat = SurfaceAngle::from_degrees(90.0).unwrap();
        assert_eq!(flat.drop_over_run(2.0), 0.0);
    }

    #[test]
    fn polygon_footprint_area() {
        // Hexagon with side 1: area = 3*sqrt(3)/2.
        let hex = Footprint::Polygon(regular_polygon(6, 1.0));
        assert!((hex.area() - 1.5 * 3.0f64.sqrt()).abs() < 1e-12);
    }

    #[test]
    fn parallelogram_contains_and_area() {
        let cell = Footprint::Parallelogram {
            origin: [0.0, 0.0],
            edge_a: [2.0, 0.0],
            edge_b: [1.0, 1.0],
        };
        assert!((cell.area() - 2.0).abs() < 1e-12);
        assert!(cell.contains(1.5, 0.5));
        assert!(!cell.contains(-0.5, 0.5));
    }

    #[test]
    fn ray_rejects_zero_direction() {
        assert!(Ray::new(Vec3::ZERO, Vec3::ZERO).is_err());
    }
}
