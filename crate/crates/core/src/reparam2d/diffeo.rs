//! Random smooth diffeomorphisms of the disk and composition `u ∘ Φ^{-1}`.

use std::f64::consts::{PI, TAU};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::{BoundaryPolicy, DiskDiffeo};
use crate::error::Result;
use crate::mesh::{PointLocator, SurfaceSample, TriMesh};

const MODES: usize = 3;
const MAX_ATTEMPTS: usize = 30;
/// Radial resolution of the slope estimate.
const LIP_RINGS: usize = 48;

/// Random coefficients of `Φ(x) = R(s α(x)) x + s (1 - |x|^2) v(x)`.
struct Perturbation {
    /// Rotation amplitudes of the modes `r^{3k} sin(3kθ)`.
    b: Vec<f64>,
    /// Sine and cosine amplitudes of both components per wavenumber.
    field: Vec<[f64; 4]>,
    rotate: bool,
}

impl Perturbation {
    fn map(&self, [x, y]: [f64; 2], s: f64) -> [f64; 2] {
        let r2 = x * x + y * y;
        let r = r2.sqrt();
        let th = y.atan2(x);
        let alpha = if self.rotate {
            s * self
                .b
                .iter()
                .enumerate()
                .map(|(k, bk)| {
                    let m = 3.0 * (k + 1) as f64;
                    bk * r.powf(m) * (m * th).sin()
                })
                .sum::<f64>()
        } else {
            0.0
        };
        let (ca, sa) = (alpha.cos(), alpha.sin());
        let mut v = [0.0; 2];
        for (n, c) in self.field.iter().enumerate() {
            let (kx, ky) = ((n % MODES + 1) as f64, (n / MODES) as f64);
            let phase = PI * (kx * x + ky * y);
            v[0] += c[0] * phase.sin() + c[1] * phase.cos();
            v[1] += c[2] * phase.sin() + c[3] * phase.cos();
        }
        let damp = s * (1.0 - r2);
        [ca * x - sa * y + damp * v[0], sa * x + ca * y + damp * v[1]]
    }

    /// Largest operator norm of the derivative of `(Φ_s - id) / s` as
    /// `s -> 0`, sampled on a polar grid by central differences.
    fn lipschitz(&self) -> f64 {
        let (s, h) = (1e-4, 1e-6);
        let p = |x: [f64; 2]| {
            let q = self.map(x, s);
            [(q[0] - x[0]) / s, (q[1] - x[1]) / s]
        };
        let mut worst: f64 = 0.0;
        for i in 0..=LIP_RINGS {
            let r = i as f64 / LIP_RINGS as f64 * (1.0 - h);
            for j in 0..4 * LIP_RINGS {
                let th = TAU * j as f64 / (4 * LIP_RINGS) as f64;
                let x = [r * th.cos(), r * th.sin()];
                let (px, mx) = (p([x[0] + h, x[1]]), p([x[0] - h, x[1]]));
                let (py, my) = (p([x[0], x[1] + h]), p([x[0], x[1] - h]));
                let j = nalgebra::Matrix2::new(
                    (px[0] - mx[0]) / (2.0 * h),
                    (py[0] - my[0]) / (2.0 * h),
                    (px[1] - mx[1]) / (2.0 * h),
                    (py[1] - my[1]) / (2.0 * h),
                );
                worst = worst.max(j.norm().max(j.singular_values().max()));
            }
        }
        worst
    }
}

/// Smooth random map `Φ(x) = R(α(x)) x + (1 - |x|^2) v(x)`.
///
/// `α = Σ_k b_k r^{3k} sin(3kθ)` rotates the boundary while fixing the
/// angles `0, 2π/3, 4π/3` (zero for the fixed-boundary policy), and `v` is
/// a low-frequency trigonometric field vanishing on the circle. Both are
/// scaled so that `magnitude` is the largest slope of `Φ - id` on a fine
/// sample grid, so magnitudes below 1 give maps close to a contraction
/// perturbation of the identity. The magnitude halves until every triangle
/// keeps a positive Jacobian.
pub fn random_diffeo(mesh: &TriMesh, policy: BoundaryPolicy, magnitude: f64, seed: u64) -> DiskDiffeo {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let pert = Perturbation {
        b: (0..MODES).map(|_| rng.gen_range(-1.0..1.0)).collect(),
        field: (0..4 * MODES)
            .map(|_| std::array::from_fn(|_| rng.gen_range(-1.0..1.0)))
            .collect(),
        rotate: !matches!(policy, BoundaryPolicy::FixedBoundary),
    };
    if magnitude == 0.0 {
        return DiskDiffeo::identity(mesh, policy);
    }
    let mut scale = magnitude / pert.lipschitz();
    for _ in 0..MAX_ATTEMPTS {
        let positions: Vec<[f64; 2]> = mesh
            .vertices
            .iter()
            .map(|&x| {
                let mut p = pert.map(x, scale);
                if x[0] * x[0] + x[1] * x[1] >= 1.0 - 1e-12 {
                    // boundary vertices stay exactly on the circle
                    let n = p[0].hypot(p[1]);
                    p = [p[0] / n, p[1] / n];
                }
                p
            })
            .collect();
        let mut phi = DiskDiffeo { positions, policy };
        for &k in policy.marked() {
            let v = mesh.boundary_loop[k];
            phi.positions[v] = mesh.vertices[v];
        }
        if phi.validate(mesh).is_ok() {
            return phi;
        }
        scale *= 0.5;
    }
    DiskDiffeo::identity(mesh, policy)
}

/// Vertex values of `u ∘ Φ^{-1}` on the reference mesh, by locating each
/// reference vertex in the image triangulation and interpolating `u`
/// linearly within the corresponding reference triangle.
pub fn resample(s: &SurfaceSample, phi: &DiskDiffeo) -> Result<SurfaceSample> {
    let mesh = &s.mesh;
    let loc = PointLocator::new(&phi.positions, &mesh.triangles);
    let values = mesh
        .vertices
        .iter()
        .map(|&p| {
            let (t, b) = loc.locate(p);
            let tri = mesh.triangles[t];
            std::array::from_fn(|i| (0..3).map(|k| b[k] * s.values[tri[k]][i]).sum())
        })
        .collect();
    SurfaceSample::from_values(mesh.clone(), values)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mesh::{area_functional, build_disk_mesh, sample_surface, SurfaceId};

    #[test]
    fn zero_magnitude_is_identity() {
        let m = build_disk_mesh(3);
        let phi = random_diffeo(&m, BoundaryPolicy::three_point(&m), 0.0, 1);
        assert!(phi.max_displacement(&m) < 1e-15);
    }

    #[test]
    fn valid_at_level_four() {
        let m = build_disk_mesh(4);
        for seed in 0..5 {
            let phi = random_diffeo(&m, BoundaryPolicy::three_point(&m), 0.05, seed);
            assert!(phi.min_det(&m) > 0.0);
            phi.validate(&m).unwrap();
            assert!(phi.max_displacement(&m) > 1e-4);
        }
    }

    #[test]
    fn area_survives_resampling() {
        let m = build_disk_mesh(4);
        let s = sample_surface(&m, |x| SurfaceId::GraphSin(0.3).eval(x)).unwrap();
        let a = area_functional(&s);
        let phi = random_diffeo(&m, BoundaryPolicy::three_point(&m), 0.05, 3);
        let r = resample(&s, &phi).unwrap();
        assert!((area_functional(&r) - a).abs() < 3e-2 * a);
    }
}
