use super::mesh::intersect_triangle;
use super::{Ray, SurfaceHit, TriangleMesh};
use crate::{Error, Result, Vec3};

const LEAF_SIZE: usize = 4;

#[derive(Debug, Clone)]
struct Node {
    lo: Vec3,
    hi: Vec3,
    /// Leaf: first slot in `order`. Interior: index of the right child (left is `self + 1`).
    offset: u32,
    /// Number of triangles; zero for interior nodes.
    count: u32,
}

/// Bounding-volume hierarchy over a mesh. Owns the mesh and is immutable after build.
#[derive(Debug, Clone)]
pub struct Accel {
    mesh: TriangleMesh,
    nodes: Vec<Node>,
    order: Vec<u32>,
    diagonal: f64,
}

impl Accel {
    pub fn build(mesh: TriangleMesh) -> Result<Self> {
        if mesh.triangle_count() == 0 {
            return Err(Error::InvalidMesh("cannot build an acceleration structure over an empty mesh".into()));
        }
        let (lo, hi) = mesh.bounds();
        let diagonal = (hi - lo).norm();
        let pad = 1e-9 * diagonal.max(1e-6);
        let prims: Vec<(Vec3, Vec3, Vec3)> = (0..mesh.triangle_count())
            .map(|t| {
                let [a, b, c] = mesh.corners(t);
                let lo = a.inf(&b).inf(&c) - Vec3::repeat(pad);
                let hi = a.sup(&b).sup(&c) + Vec3::repeat(pad);
                (lo, hi, (a + b + c) / 3.0)
            })
            .collect();
        let mut order: Vec<u32> = (0..mesh.triangle_count() as u32).collect();
        let mut nodes = Vec::with_capacity(2 * order.len() / LEAF_SIZE + 1);
        build_node(&prims, &mut order, 0, &mut nodes);
        Ok(Self {
            mesh,
            nodes,
            order,
            diagonal,
        })
    }

    pub fn mesh(&self) -> &TriangleMesh {
        &self.mesh
    }

    /// Length of the scene bounding-box diagonal.
    pub fn diagonal(&self) -> f64 {
        self.diagonal
    }

    /// Offset used to push secondary-ray origins off surfaces.
    pub fn epsilon(&self) -> f64 {
        1e-4 * self.diagonal
    }

    pub fn node_count(&self) -> usize {
        self.nodes.len()
    }

    /// Nearest hit with `t` in `(t_min, t_max)`. Equal-`t` hits resolve to the smallest
    /// triangle id.
    pub fn intersect(&self, ray: &Ray) -> Option<SurfaceHit> {
        let inv = ray.dir.map(|d| 1.0 / d);
        let mut best: Option<(f64, usize, f64, f64)> = None;
        let mut stack = [0u32; 64];
        let mut sp = 1;
        while sp > 0 {
            sp -= 1;
            let node = &self.nodes[stack[sp] as usize];
            let limit = best.map_or(ray.t_max, |b| b.0);
            if !slab_hit(node, ray, &inv, limit) {
                continue;
            }
            if node.count > 0 {
                let start = node.offset as usize;
                for &tri in &self.order[start..start + node.count as usize] {
                    let tri = tri as usize;
                    if let Some((t, u, v)) = intersect_triangle(&self.mesh, tri, ray) {
                        let better = match best {
                            None => true,
                            Some((bt, bid, _, _)) => t < bt || (t == bt && tri < bid),
                        };
                        if better {
                            best = Some((t, tri, u, v));
                        }
                    }
                }
            } else {
                let idx = stack[sp] as usize;
                stack[sp] = node.offset;
                stack[sp + 1] = idx as u32 + 1;
                sp += 2;
            }
        }
        best.map(|(t, tri, u, v)| self.mesh.surface_hit(tri, ray, t, u, v))
    }

    /// True if anything blocks `ray` within its parameter range.
    pub fn any_hit(&self, ray: &Ray) -> bool {
        let inv = ray.dir.map(|d| 1.0 / d);
        let mut stack = [0u32; 64];
        let mut sp = 1;
        while sp > 0 {
            sp -= 1;
            let node = &self.nodes[stack[sp] as usize];
            if !slab_hit(node, ray, &inv, ray.t_max) {
                continue;
            }
            if node.count > 0 {
                let start = node.offset as usize;
                if self.order[start..start + node.count as usize]
                    .iter()
                    .any(|&tri| intersect_triangle(&self.mesh, tri as usize, ray).is_some())
                {
                    return true;
                }
            } else {
                let idx = stack[sp] as usize;
                stack[sp] = node.offset;
                stack[sp + 1] = idx as u32 + 1;
                sp += 2;
            }
        }
        false
    }

    /// Complement of the visibility term: whether a ray leaving `p` along `dir`
    /// hits anything. The origin is nudged along `dir` by [`Accel::epsilon`].
    pub fn occluded(&self, p: &Vec3, dir: &Vec3) -> bool {
        self.any_hit(&Ray::unbounded(p + self.epsilon() * dir, *dir))
    }

    /// Shadow test from a surface hit, offsetting the origin along the geometric
    /// normal to the side `dir` leaves from.
    pub fn occluded_from(&self, hit: &SurfaceHit, dir: &Vec3) -> bool {
        self.any_hit(&self.spawn_ray(hit, dir, f64::INFINITY))
    }

    /// Ray leaving a surface hit along `dir`, valid up to `t_max`.
    pub fn spawn_ray(&self, hit: &SurfaceHit, dir: &Vec3, t_max: f64) -> Ray {
        let side = if dir.dot(&hit.geometric_normal) >= 0.0 { 1.0 } else { -1.0 };
        let origin = hit.point + side * self.epsilon() * hit.geometric_normal;
        Ray::new(origin, *dir, 0.0, t_max)
    }
}

fn build_node(prims: &[(Vec3, Vec3, Vec3)], order: &mut [u32], start: usize, nodes: &mut Vec<Node>) {
    let mut lo = Vec3::repeat(f64::INFINITY);
    let mut hi = Vec3::repeat(f64::NEG_INFINITY);
    let mut clo = Vec3::repeat(f64::INFINITY);
    let mut chi = Vec3::repeat(f64::NEG_INFINITY);
    for &i in order.iter() {
        let (plo, phi, c) = &prims[i as usize];
        lo = lo.inf(plo);
        hi = hi.sup(phi);
        clo = clo.inf(c);
        chi = chi.sup(c);
    }
    let me = nodes.len();
    nodes.push(Node {
        lo,
        hi,
        offset: start as u32,
        count: order.len() as u32,
    });
    let extent = chi - clo;
    if order.len() <= LEAF_SIZE || extent.max() <= 0.0 {
        return;
    }
    let axis = extent.imax();
    let mid = order.len() / 2;
    order.select_nth_unstable_by(mid, |&a, &b| {
        let ca = prims[a as usize].2[axis];
        let cb = prims[b as usize].2[axis];
        ca.total_cmp(&cb).then(a.cmp(&b))
    });
    let (left, right) = order.split_at_mut(mid);
    build_node(prims, left, start, nodes);
    let right_index = nodes.len() as u32;
    build_node(prims, right, start + mid, nodes);
    nodes[me].offset = right_index;
    nodes[me].count = 0;
}

fn slab_hit(node: &Node, ray: &Ray, inv: &Vec3, t_limit: f64) -> bool {
    let mut t0 = ray.t_min;
    let mut t1 = t_limit;
    for a in 0..3 {
        let o = ray.origin[a];
        if ray.dir[a] == 0.0 {
            if o < node.lo[a] || o > node.hi[a] {
                return false;
            }
            continue;
        }
        let near = (node.lo[a] - o) * inv[a];
        let far = (node.hi[a] - o) * inv[a];
        let (near, far) = if near <= far { (near, far) } else { (far, near) };
        t0 = t0.max(near);
        t1 = t1.min(far * (1.0 + 4.0 * f64::EPSILON));
        if t0 > t1 {
            return false;
        }
    }
    true
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::synthetic;

    #[test]
    fn empty_mesh_is_rejected() {
        let m = TriangleMesh::new(vec![], None, vec![], vec![]).unwrap();
        assert!(matches!(Accel::build(m), Err(Error::InvalidMesh(_))));
    }

    #[test]
    fn single_triangle_is_one_leaf() {
        let m = TriangleMesh::new(
            vec![Vec3::zeros(), Vec3::x(), Vec3::y()],
            None,
            vec![[1.0; 3]; 3],
            vec![[0, 1, 2]],
        )
        .unwrap();
        let accel = Accel::build(m).unwrap();
        assert_eq!(accel.node_count(), 1);
        let ray = Ray::unbounded(Vec3::new(0.25, 0.25, 2.0), -Vec3::z());
        let hit = accel.intersect(&ray).unwrap();
        assert_eq!(hit.triangle, 0);
        assert!((hit.t - 2.0).abs() < 1e-15);
    }

    #[test]
    fn floor_hit_from_above() {
        let accel = Accel::build(synthetic::floor(1.0, [0.5; 3])).unwrap();
        let ray = Ray::unbounded(Vec3::new(0.1, 0.2, 1.0), -Vec3::z());
        let hit = accel.intersect(&ray).unwrap();
        assert!((hit.t - 1.0).abs() < 1e-15);
        assert!((hit.normal - Vec3::z()).norm() < 1e-12);
        assert!(hit.front_facing);
    }

    #[test]
    fn shared_edge_resolves_to_smallest_id() {
        // The unit floor's diagonal runs from (-0.5,-0.5) to (0.5,0.5).
        let accel = Accel::build(synthetic::floor(1.0, [0.5; 3])).unwrap();
        let ray = Ray::unbounded(Vec3::new(0.125, 0.125, 1.0), -Vec3::z());
        let hit = accel.intersect(&ray).unwrap();
        assert_eq!(hit.triangle, 0);
    }

    #[test]
    fn ray_parallel_to_floor_misses() {
        let accel = Accel::build(synthetic::floor(1.0, [0.5; 3])).unwrap();
        let ray = Ray::unbounded(Vec3::new(-2.0, 0.0, 0.5), Vec3::x());
        assert!(accel.intersect(&ray).is_none());
        let grazing = Ray::unbounded(Vec3::new(-2.0, 0.1, 0.0), Vec3::x());
        assert!(accel.intersect(&grazing).is_none());
    }

    #[test]
    fn open_floor_sees_sky_and_closed_box_does_not() {
        let floor = Accel::build(synthetic::floor(2.0, [0.5; 3])).unwrap();
        assert!(!floor.occluded(&Vec3::zeros(), &Vec3::z()));
        let closed = Accel::build(synthetic::closed_box(1.0, [0.5; 3])).unwrap();
        assert!(closed.occluded(&Vec3::new(0.0, 0.0, -0.5), &Vec3::z()));
    }
}
