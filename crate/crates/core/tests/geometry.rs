use envest_core::scene::{intersect_triangle, Accel, Ray, TriangleMesh};
use envest_core::{synthetic, Vec3};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn random_unit(rng: &mut ChaCha8Rng) -> Vec3 {
    loop {
        let v = Vec3::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0));
        let n = v.norm();
        if n > 1e-3 && n <= 1.0 {
            return v / n;
        }
    }
}

/// 10k small triangles scattered in a unit cube.
fn triangle_soup(rng: &mut ChaCha8Rng, count: usize) -> TriangleMesh {
    let mut positions = Vec::with_capacity(3 * count);
    for _ in 0..count {
        let c = Vec3::new(rng.random(), rng.random(), rng.random());
        for _ in 0..3 {
            positions.push(c + 0.04 * random_unit(rng));
        }
    }
    let triangles = (0..count as u32).map(|i| [3 * i, 3 * i + 1, 3 * i + 2]).collect();
    let albedos = vec![[0.5; 3]; positions.len()];
    TriangleMesh::new(positions, None, albedos, triangles).unwrap()
}

fn brute_force(mesh: &TriangleMesh, ray: &Ray) -> Option<(f64, usize)> {
    let mut best: Option<(f64, usize)> = None;
    for tri in 0..mesh.triangle_count() {
        if let Some((t, _, _)) = intersect_triangle(mesh, tri, ray) {
            if best.is_none_or(|(bt, _)| t < bt) {
                best = Some((t, tri));
            }
        }
    }
    best
}

#[test]
fn bvh_matches_brute_force_on_random_soup() {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let mesh = triangle_soup(&mut rng, 10_000);
    let accel = Accel::build(mesh.clone()).unwrap();
    let mut hits = 0;
    for _ in 0..1000 {
        let origin = Vec3::new(0.5, 0.5, 0.5) + 1.2 * random_unit(&mut rng);
        let target = Vec3::new(rng.random(), rng.random(), rng.random());
        let ray = Ray::unbounded(origin, (target - origin).normalize());
        let expect = brute_force(&mesh, &ray);
        let got = accel.intersect(&ray).map(|h| (h.t, h.triangle));
        assert_eq!(got, expect, "ray {ray:?}");
        assert_eq!(accel.any_hit(&ray), expect.is_some());
        if let Some((t, _)) = expect {
            hits += 1;
            // Shortened rays stop just before the first hit.
            let short = Ray::new(ray.origin, ray.dir, 0.0, t * (1.0 - 1e-9));
            assert!(!accel.any_hit(&short));
        }
    }
    assert!(hits > 500, "only {hits} rays hit; test is not exercising the tree");
}

#[test]
fn occlusion_matches_brute_force() {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let mesh = triangle_soup(&mut rng, 2_000);
    let accel = Accel::build(mesh.clone()).unwrap();
    for _ in 0..1000 {
        let p = Vec3::new(rng.random(), rng.random(), rng.random());
        let dir = random_unit(&mut rng);
        let eps = accel.epsilon();
        let expect = brute_force(&mesh, &Ray::unbounded(p + eps * dir, dir)).is_some();
        assert_eq!(accel.occluded(&p, &dir), expect);
    }
}

#[test]
fn box_scene_blocks_shadow_rays_under_blocks() {
    let accel = Accel::build(synthetic::box_scene()).unwrap();
    // Floor point under the red block sees nothing straight up; an open corner does.
    assert!(accel.occluded(&Vec3::new(-0.6, 0.3, 0.0), &Vec3::z()));
    assert!(!accel.occluded(&Vec3::new(1.5, 1.5, 0.0), &Vec3::z()));
}
