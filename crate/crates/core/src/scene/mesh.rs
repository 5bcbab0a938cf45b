use super::{Ray, SurfaceHit};
use crate::{Error, Result, Rgb, Vec3};

/// Indexed triangle mesh with per-vertex normals and albedos.
#[derive(Debug, Clone, PartialEq)]
pub struct TriangleMesh {
    positions: Vec<Vec3>,
    normals: Vec<Vec3>,
    albedos: Vec<Rgb>,
    triangles: Vec<[u32; 3]>,
}

impl TriangleMesh {
    /// Validates and assembles a mesh. Normals are re-normalized; when `normals` is
    /// `None` they are computed as area-weighted vertex normals.
    pub fn new(
        positions: Vec<Vec3>,
        normals: Option<Vec<Vec3>>,
        albedos: Vec<Rgb>,
        triangles: Vec<[u32; 3]>,
    ) -> Result<Self> {
        let n = positions.len();
        if albedos.len() != n {
            return Err(Error::InvalidMesh(format!(
                "{} albedos for {n} vertices",
                albedos.len()
            )));
        }
        if let Some(t) = triangles.iter().find(|t| t.iter().any(|&i| i as usize >= n)) {
            return Err(Error::InvalidMesh(format!(
                "triangle {t:?} indexes past {n} vertices"
            )));
        }
        if positions.iter().any(|p| !p.iter().all(|v| v.is_finite())) {
            return Err(Error::InvalidMesh("non-finite vertex position".into()));
        }
        if let Some(a) = albedos
            .iter()
            .find(|a| a.iter().any(|c| !(0.0..=1.0).contains(c)))
        {
            return Err(Error::InvalidMesh(format!(
                "albedo {a:?} outside [0, 1]"
            )));
        }
        let normals = match normals {
            Some(normals) => {
                if normals.len() != n {
                    return Err(Error::InvalidMesh(format!(
                        "{} normals for {n} vertices",
                        normals.len()
                    )));
                }
                normals
            }
            None => area_weighted_normals(&positions, &triangles),
        };
        let normals = normals
            .into_iter()
            .enumerate()
            .map(|(i, v)| {
                let len = v.norm();
                if (len - 1.0).abs() <= 1e-12 {
                    // Already unit: keep the bits so save/load round trips are exact.
                    Ok(v)
                } else if len > 0.0 && len.is_finite() {
                    Ok(v / len)
                } else {
                    Err(Error::InvalidMesh(format!("vertex {i} has a degenerate normal")))
                }
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(Self {
            positions,
            normals,
            albedos,
            triangles,
        })
    }

    pub fn positions(&self) -> &[Vec3] {
        &self.positions
    }

    pub fn normals(&self) -> &[Vec3] {
        &self.normals
    }

    pub fn albedos(&self) -> &[Rgb] {
        &self.albedos
    }

    pub fn triangles(&self) -> &[[u32; 3]] {
        &self.triangles
    }

    pub fn vertex_count(&self) -> usize {
        self.positions.len()
    }

    pub fn triangle_count(&self) -> usize {
        self.triangles.len()
    }

    pub fn corners(&self, tri: usize) -> [Vec3; 3] {
        let [a, b, c] = self.triangles[tri];
        [
            self.positions[a as usize],
            self.positions[b as usize],
            self.positions[c as usize],
        ]
    }

    /// Axis-aligned bounds `(min, max)` of all vertices.
    pub fn bounds(&self) -> (Vec3, Vec3) {
        let mut lo = Vec3::repeat(f64::INFINITY);
        let mut hi = Vec3::repeat(f64::NEG_INFINITY);
        for p in &self.positions {
            lo = lo.inf(p);
            hi = hi.sup(p);
        }
        (lo, hi)
    }

    /// Appends another mesh, offsetting its indices.
    pub fn merge(&mut self, other: &TriangleMesh) {
        let base = self.positions.len() as u32;
        self.positions.extend_from_slice(&other.positions);
        self.normals.extend_from_slice(&other.normals);
        self.albedos.extend_from_slice(&other.albedos);
        self.triangles
            .extend(other.triangles.iter().map(|t| t.map(|i| i + base)));
    }

    /// Builds the surface record for a ray hit at barycentrics `(u, v)`.
    pub(crate) fn surface_hit(&self, tri: usize, ray: &Ray, t: f64, u: f64, v: f64) -> SurfaceHit {
        let [a, b, c] = self.triangles[tri].map(|i| i as usize);
        let w = 1.0 - u - v;
        let n = w * self.normals[a] + u * self.normals[b] + v * self.normals[c];
        let [p0, p1, p2] = self.corners(tri);
        let face = (p1 - p0).cross(&(p2 - p0));
        // Degenerate interpolation (opposed vertex normals) falls back to the face normal.
        let normal = if n.norm() > 1e-12 {
            n.normalize()
        } else {
            face.normalize()
        };
        let mut geometric_normal = face.normalize();
        if geometric_normal.dot(&normal) < 0.0 {
            geometric_normal = -geometric_normal;
        }
        let mut albedo = [0.0; 3];
        for (ch, out) in albedo.iter_mut().enumerate() {
            *out = w * self.albedos[a][ch] + u * self.albedos[b][ch] + v * self.albedos[c][ch];
        }
        SurfaceHit {
            point: ray.at(t),
            normal,
            geometric_normal,
            albedo,
            triangle: tri,
            t,
            front_facing: ray.dir.dot(&geometric_normal) < 0.0,
        }
    }
}

/// Two-sided Möller–Trumbore test. Returns `(t, u, v)` with `t` strictly inside
/// `(ray.t_min, ray.t_max)`.
pub fn intersect_triangle(mesh: &TriangleMesh, tri: usize, ray: &Ray) -> Option<(f64, f64, f64)> {
    let [p0, p1, p2] = mesh.corners(tri);
    let e1 = p1 - p0;
    let e2 = p2 - p0;
    let pvec = ray.dir.cross(&e2);
    let det = e1.dot(&pvec);
    if det == 0.0 || !det.is_finite() {
        return None;
    }
    let inv_det = 1.0 / det;
    let tvec = ray.origin - p0;
    let u = tvec.dot(&pvec) * inv_det;
    if !(0.0..=1.0).contains(&u) {
        return None;
    }
    let qvec = tvec.cross(&e1);
    let v = ray.dir.dot(&qvec) * inv_det;
    if v < 0.0 || u + v > 1.0 {
        return None;
    }
    let t = e2.dot(&qvec) * inv_det;
    (t > ray.t_min && t < ray.t_max).then_some((t, u, v))
}

fn area_weighted_normals(positions: &[Vec3], triangles: &[[u32; 3]]) -> Vec<Vec3> {
    let mut normals = vec![Vec3::zeros(); positions.len()];
    for t in triangles {
        let [a, b, c] = t.map(|i| i as usize);
        // Cross product magnitude is twice the area, so this is area weighting.
        let face = (positions[b] - positions[a]).cross(&(positions[c] - positions[a]));
        for i in [a, b, c] {
            normals[i] += face;
        }
    }
    normals
}
