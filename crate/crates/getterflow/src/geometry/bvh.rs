//! Axis-aligned bounding-volume hierarchy over facets. Median split on the
//! longest centroid axis; flat node array, stack-based traversal.

use crate::geometry::triangle::Facet;
use crate::vec3::Vec3;

#[derive(Debug, Clone, Copy)]
struct Aabb {
    min: Vec3,
    max: Vec3,
}

impl Aabb {
    fn empty() -> Aabb {
        Aabb {
            min: Vec3::new(f64::INFINITY, f64::INFINITY, f64::INFINITY),
            max: Vec3::new(f64::NEG_INFINITY, f64::NEG_INFINITY, f64::NEG_INFINITY),
        }
    }

    fn grow_facet(&mut self, f: &Facet) {
        self.min = self.min.min_components(f.min_corner());
        self.max = self.max.max_components(f.max_corner());
    }

    /// Slab test. `inv_dir` components may be infinite for axis-parallel rays;
    /// the min/max ordering below handles the resulting infinities.
    #[inline]
    fn hit(&self, origin: Vec3, inv_dir: Vec3, tmax: f64) -> bool {
        let tx1 = (self.min.x - origin.x) * inv_dir.x;
        let tx2 = (self.max.x - origin.x) * inv_dir.x;
        let mut lo = tx1.min(tx2);
        let mut hi = tx1.max(tx2);
        let ty1 = (self.min.y - origin.y) * inv_dir.y;
        let ty2 = (self.max.y - origin.y) * inv_dir.y;
        lo = lo.max(ty1.min(ty2));
        hi = hi.min(ty1.max(ty2));
        let tz1 = (self.min.z - origin.z) * inv_dir.z;
        let tz2 = (self.max.z - origin.z) * inv_dir.z;
        lo = lo.max(tz1.min(tz2));
        hi = hi.min(tz1.max(tz2));
        hi >= lo.max(0.0) && lo <= tmax
    }
}

#[derive(Debug)]
struct Node {
    bounds: Aabb,
    /// Leaf: (first, count) into `order`. Inner: (left child, right child).
    a: u32,
    b: u32,
    is_leaf: bool,
}

#[derive(Debug)]
pub struct Bvh {
    nodes: Vec<Node>,
    /// Facet indices permuted so leaves are contiguous ranges.
    order: Vec<u32>,
}

const LEAF_SIZE: usize = 8;

impl Bvh {
    pub fn build(facets: &[Facet]) -> Bvh {
        let mut order: Vec<u32> = (0..facets.len() as u32).collect();
        let mut nodes = Vec::with_capacity(facets.len() / LEAF_SIZE * 2 + 1);
        if facets.is_empty() {
            nodes.push(Node { bounds: Aabb::empty(), a: 0, b: 0, is_leaf: true });
            return Bvh { nodes, order };
        }
        let centroids: Vec<Vec3> = facets.iter().map(|f| f.centroid()).collect();
        let len = order.len();
        Self::build_node(facets, &centroids, &mut order, 0, len, &mut nodes);
        Bvh { nodes, order }
    }

    fn build_node(
        facets: &[Facet],
        centroids: &[Vec3],
        order: &mut [u32],
        first: usize,
        count: usize,
        nodes: &mut Vec<Node>,
    ) -> u32 {
        let mut bounds = Aabb::empty();
        for &i in &order[first..first + count] {
            bounds.grow_facet(&facets[i as usize]);
        }
        let idx = nodes.len() as u32;
        nodes.push(Node { bounds, a: 0, b: 0, is_leaf: false });

        if count <= LEAF_SIZE {
            nodes[idx as usize].is_leaf = true;
            nodes[idx as usize].a = first as u32;
            nodes[idx as usize].b = count as u32;
            return idx;
        }

        // Longest axis of the centroid extents.
        let mut cmin = Vec3::new(f64::INFINITY, f64::INFINITY, f64::INFINITY);
        let mut cmax = Vec3::new(f64::NEG_INFINITY, f64::NEG_INFINITY, f64::NEG_INFINITY);
        for &i in &order[first..first + count] {
            cmin = cmin.min_components(centroids[i as usize]);
            cmax = cmax.max_components(centroids[i as usize]);
        }
        let ext = cmax - cmin;
        let axis = if ext.x >= ext.y && ext.x >= ext.z {
            0
        } else if ext.y >= ext.z {
            1
        } else {
            2
        };
        let key = |i: u32| -> f64 {
            let c = centroids[i as usize];
            match axis {
                0 => c.x,
                1 => c.y,
                _ => c.z,
            }
        };
        let mid = count / 2;
        order[first..first + count]
            .select_nth_unstable_by(mid, |&a, &b| key(a).total_cmp(&key(b)));

        let left = Self::build_node(facets, centroids, order, first, mid, nodes);
        let right = Self::build_node(facets, centroids, order, first + mid, count - mid, nodes);
        nodes[idx as usize].a = left;
        nodes[idx as usize].b = right;
        idx
    }

    /// Nearest front-face hit with distance in `(tmin, tmax]`.
    pub fn nearest(
        &self,
        facets: &[Facet],
        origin: Vec3,
        dir: Vec3,
        tmin: f64,
        tmax: f64,
    ) -> Option<(f64, u32)> {
        let inv_dir = Vec3::new(1.0 / dir.x, 1.0 / dir.y, 1.0 / dir.z);
        let mut best: Option<(f64, u32)> = None;
        let mut limit = tmax;
        let mut stack: Vec<u32> = Vec::with_capacity(64);
        stack.push(0);
        while let Some(ni) = stack.pop() {
            let node = &self.nodes[ni as usize];
            if !node.bounds.hit(origin, inv_dir, limit) {
                continue;
            }
            if node.is_leaf {
                for k in node.a..node.a + node.b {
                    let fi = self.order[k as usize];
                    if let Some(t) = facets[fi as usize].hit(origin, dir, tmin, limit) {
                        if best.is_none_or(|(bt, _)| t < bt) {
                            best = Some((t, fi));
                            limit = t;
                        }
                    }
                }
            } else {
                stack.push(node.a);
                stack.push(node.b);
            }
        }
        best
    }
}
