//! PLY and OBJ mesh loading; binary PLY saving.

use std::io::BufReader;
use std::path::Path;

use ply_rs::parser::Parser;
use ply_rs::ply::{DefaultElement, Property};

use crate::scene::TriangleMesh;
use crate::{Error, Result, Vec3};

pub fn load_mesh(path: &Path) -> Result<TriangleMesh> {
    match extension(path).as_deref() {
        Some("ply") => load_ply(path),
        Some("obj") => load_obj(path),
        _ => Err(Error::Config(format!(
            "{}: unsupported mesh format (expected .ply or .obj)",
            path.display()
        ))),
    }
}

pub(crate) fn extension(path: &Path) -> Option<String> {
    path.extension().map(|e| e.to_string_lossy().to_ascii_lowercase())
}

fn invalid(path: &Path, msg: impl std::fmt::Display) -> Error {
    Error::InvalidMesh(format!("{}: {msg}", path.display()))
}

fn as_f64(p: &Property) -> Option<f64> {
    Some(match *p {
        Property::Char(v) => v as f64,
        Property::UChar(v) => v as f64,
        Property::Short(v) => v as f64,
        Property::UShort(v) => v as f64,
        Property::Int(v) => v as f64,
        Property::UInt(v) => v as f64,
        Property::Float(v) => v as f64,
        Property::Double(v) => v,
        _ => return None,
    })
}

/// Color channel as reflectance: integer sources are divided by their type's maximum.
fn as_albedo(p: &Property) -> Option<f64> {
    Some(match *p {
        Property::UChar(v) => v as f64 / 255.0,
        Property::UShort(v) => v as f64 / 65535.0,
        Property::Float(v) => v as f64,
        Property::Double(v) => v,
        _ => return None,
    })
}

fn as_indices(p: &Property) -> Option<Vec<u32>> {
    fn conv<T: Copy + TryInto<u32>>(v: &[T]) -> Option<Vec<u32>> {
        v.iter().map(|&x| x.try_into().ok()).collect()
    }
    match p {
        Property::ListChar(v) => conv(v),
        Property::ListUChar(v) => conv(v),
        Property::ListShort(v) => conv(v),
        Property::ListUShort(v) => conv(v),
        Property::ListInt(v) => conv(v),
        Property::ListUInt(v) => Some(v.clone()),
        _ => None,
    }
}

fn fan(poly: &[u32], out: &mut Vec<[u32; 3]>) {
    for k in 1..poly.len().saturating_sub(1) {
        out.push([poly[0], poly[k], poly[k + 1]]);
    }
}

fn load_ply(path: &Path) -> Result<TriangleMesh> {
    let file = std::fs::File::open(path).map_err(|e| Error::io(path, e))?;
    let ply = Parser::<DefaultElement>::new()
        .read_ply(&mut BufReader::new(file))
        .map_err(|e| invalid(path, format!("PLY parse error: {e}")))?;
    let vertices = ply
        .payload
        .get("vertex")
        .ok_or_else(|| invalid(path, "no vertex element"))?;
    let scalar = |v: &DefaultElement, names: &[&str], conv: fn(&Property) -> Option<f64>| {
        names.iter().find_map(|n| v.get(*n)).and_then(conv)
    };
    let mut positions = Vec::with_capacity(vertices.len());
    let mut normals = Vec::with_capacity(vertices.len());
    let mut albedos = Vec::with_capacity(vertices.len());
    for (i, v) in vertices.iter().enumerate() {
        let coord = |n: &str| scalar(v, &[n], as_f64);
        match (coord("x"), coord("y"), coord("z")) {
            (Some(x), Some(y), Some(z)) => positions.push(Vec3::new(x, y, z)),
            _ => return Err(invalid(path, format!("vertex {i} lacks x/y/z positions"))),
        }
        if let (Some(x), Some(y), Some(z)) = (coord("nx"), coord("ny"), coord("nz")) {
            normals.push(Vec3::new(x, y, z));
        }
        let channel = |a: &str, b: &str| scalar(v, &[a, b], as_albedo);
        match (
            channel("red", "diffuse_red"),
            channel("green", "diffuse_green"),
            channel("blue", "diffuse_blue"),
        ) {
            (Some(r), Some(g), Some(b)) => albedos.push([r, g, b]),
            _ => return Err(invalid(path, format!("vertex {i} lacks red/green/blue albedo"))),
        }
    }
    let normals = match normals.len() {
        0 => None,
        n if n == positions.len() => Some(normals),
        _ => return Err(invalid(path, "normals present on only some vertices")),
    };
    let mut triangles = Vec::new();
    if let Some(faces) = ply.payload.get("face") {
        for (i, f) in faces.iter().enumerate() {
            let idx = ["vertex_indices", "vertex_index"]
                .iter()
                .find_map(|n| f.get(*n))
                .and_then(as_indices)
                .ok_or_else(|| invalid(path, format!("face {i} has no vertex index list")))?;
            fan(&idx, &mut triangles);
        }
    }
    TriangleMesh::new(positions, normals, albedos, triangles)
}

fn load_obj(path: &Path) -> Result<TriangleMesh> {
    let opts = tobj::LoadOptions {
        single_index: true,
        triangulate: true,
        ..Default::default()
    };
    let (models, _) = tobj::load_obj(path, &opts).map_err(|e| invalid(path, format!("OBJ parse error: {e}")))?;
    let mut positions = Vec::new();
    let mut normals = Vec::new();
    let mut albedos = Vec::new();
    let mut triangles = Vec::new();
    let mut all_normals = true;
    for model in &models {
        let m = &model.mesh;
        let n = m.positions.len() / 3;
        if n == 0 {
            continue;
        }
        if m.vertex_color.len() != 3 * n {
            return Err(invalid(path, format!("object {:?} lacks per-vertex RGB", model.name)));
        }
        let base = positions.len() as u32;
        positions.extend(m.positions.chunks_exact(3).map(|p| Vec3::new(p[0], p[1], p[2])));
        albedos.extend(m.vertex_color.chunks_exact(3).map(|c| [c[0], c[1], c[2]]));
        if m.normals.len() == 3 * n {
            normals.extend(m.normals.chunks_exact(3).map(|p| Vec3::new(p[0], p[1], p[2])));
        } else {
            all_normals = false;
        }
        triangles.extend(m.indices.chunks_exact(3).map(|t| [t[0] + base, t[1] + base, t[2] + base]));
    }
    if positions.is_empty() {
        return Err(invalid(path, "no vertex positions"));
    }
    TriangleMesh::new(positions, all_normals.then_some(normals), albedos, triangles)
}

/// Writes binary little-endian PLY with double-precision positions, normals and albedos,
/// so a reload reproduces the mesh bit for bit.
pub fn save_mesh(path: &Path, mesh: &TriangleMesh) -> Result<()> {
    // Hand-written: ply-rs 0.1.3 emits the element count as every list length in binary mode.
    let mut out = format!(
        "ply\nformat binary_little_endian 1.0\nelement vertex {}\n\
         property double x\nproperty double y\nproperty double z\n\
         property double nx\nproperty double ny\nproperty double nz\n\
         property double red\nproperty double green\nproperty double blue\n\
         element face {}\nproperty list uchar uint vertex_indices\nend_header\n",
        mesh.vertex_count(),
        mesh.triangle_count()
    )
    .into_bytes();
    for i in 0..mesh.vertex_count() {
        let (p, n, a) = (mesh.positions()[i], mesh.normals()[i], mesh.albedos()[i]);
        for v in [p.x, p.y, p.z, n.x, n.y, n.z, a[0], a[1], a[2]] {
            out.extend_from_slice(&v.to_le_bytes());
        }
    }
    for t in mesh.triangles() {
        out.push(3);
        for &i in t {
            out.extend_from_slice(&i.to_le_bytes());
        }
    }
    std::fs::write(path, out).map_err(|e| Error::io(path, e))
}
