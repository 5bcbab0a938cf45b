use envest_core::env::{discretize_sphere, LightSampleDistribution};
use envest_core::Vec3;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn linear_scan(dirs: &[Vec3], d: &Vec3) -> usize {
    let mut best = 0;
    for (j, v) in dirs.iter().enumerate() {
        if v.dot(d) > dirs[best].dot(d) {
            best = j;
        }
    }
    best
}

fn uniform_sphere(rng: &mut ChaCha8Rng) -> Vec3 {
    let z: f64 = rng.random_range(-1.0..1.0);
    let phi: f64 = rng.random_range(0.0..std::f64::consts::TAU);
    let r = (1.0 - z * z).sqrt();
    Vec3::new(r * phi.cos(), r * phi.sin(), z)
}

#[test]
fn nearest_direction_matches_linear_scan() {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    for rings in [2, 3, 5, 9, 14, 21] {
        let env = discretize_sphere(rings).unwrap();
        for _ in 0..10_000 {
            let d = uniform_sphere(&mut rng);
            let fast = env.nearest_direction(&d);
            let slow = linear_scan(env.directions(), &d);
            // Exact dot-product ties may resolve either way; the winners must tie.
            assert!(
                fast == slow || env.directions()[fast].dot(&d) == env.directions()[slow].dot(&d),
                "R={rings} d={d:?}: {fast} vs {slow}"
            );
        }
        for (j, d) in env.directions().iter().enumerate() {
            assert_eq!(env.nearest_direction(d), j);
        }
    }
}

#[test]
fn tile_samples_stay_near_their_light() {
    let env = discretize_sphere(9).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let dtheta = std::f64::consts::PI / 8.0;
    for j in 0..env.len() {
        for _ in 0..200 {
            let d = env.sample_cell(j, rng.random(), rng.random());
            assert!((d.norm() - 1.0).abs() < 1e-12);
            // A tile spans half a ring spacing in θ and at most half an azimuth sector.
            assert!(d.dot(&env.directions()[j]).clamp(-1.0, 1.0).acos() <= 1.2 * dtheta);
        }
    }
}

#[test]
fn selection_frequencies_within_three_sigma() {
    let weights: Vec<f64> = (0..10).map(|i| (i + 1) as f64).collect();
    let dist = LightSampleDistribution::from_weights(&weights).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(17);
    let n = 1_000_000;
    let mut counts = [0usize; 10];
    for _ in 0..n {
        counts[dist.sample(rng.random()).0] += 1;
    }
    for (j, &c) in counts.iter().enumerate() {
        let q = dist.probability(j);
        let sigma = (n as f64 * q * (1.0 - q)).sqrt();
        assert!((c as f64 - n as f64 * q).abs() <= 3.0 * sigma, "light {j}: {c} vs {}", n as f64 * q);
    }
}

#[test]
fn importance_weighted_sum_is_unbiased() {
    let mut env = discretize_sphere(9).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(23);
    let radiance = (0..env.len()).map(|j| [j as f64 % 7.0, 0.5, 0.0]).collect();
    env.set_radiance(radiance).unwrap();
    let dist = LightSampleDistribution::from_env(&env, 0.1).unwrap();
    let v: Vec<f64> = (0..env.len()).map(|j| ((j * 37) % 11) as f64 + 0.25).collect();
    let truth: f64 = v.iter().sum();
    let n = 1_000_000;
    let (mut sum, mut sum_sq) = (0.0, 0.0);
    for _ in 0..n {
        let (j, q) = dist.sample(rng.random());
        let x = v[j] / q;
        sum += x;
        sum_sq += x * x;
    }
    let mean = sum / n as f64;
    let sigma = ((sum_sq / n as f64 - mean * mean) / n as f64).sqrt();
    assert!((mean - truth).abs() <= 3.0 * sigma, "{mean} vs {truth} (σ {sigma})");
}

#[test]
fn mixture_formula() {
    let mut env = discretize_sphere(3).unwrap();
    assert_eq!(env.len(), 6);
    let mut flat = vec![0.0; 18];
    flat[3 * 4..3 * 4 + 3].copy_from_slice(&[1.0, 2.0, 3.0]);
    env.set_radiance_flat(&flat).unwrap();
    let dist = LightSampleDistribution::from_env(&env, 0.1).unwrap();
    assert!((dist.probability(4) - (0.9 + 0.1 / 6.0)).abs() < 1e-15);
    assert!((dist.probability(0) - 0.1 / 6.0).abs() < 1e-15);
}
