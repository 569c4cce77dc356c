//! Descent on the reparameterized energy over discrete diffeomorphisms.

use serde::Serialize;

use super::energy::energy_and_gradient;
use super::{angles_monotone, BoundaryPolicy, DiskDiffeo};
use crate::error::Result;
use crate::mesh::SurfaceSample;
use crate::numeric::lbfgs::Lbfgs;
use crate::numeric::sparse::dot;

#[derive(Debug, Clone, PartialEq)]
pub struct DescentOptions {
    /// Stored curvature pairs of the quasi-Newton direction.
    pub memory: usize,
    /// Sufficient-decrease constant of the line search.
    pub armijo: f64,
    /// Steps whose largest coordinate change is below this count as stalled.
    pub min_step: f64,
    /// Stop when the gradient norm drops below this times `1 + E`.
    pub gradient_tol: f64,
}

impl Default for DescentOptions {
    fn default() -> Self {
        Self {
            memory: 10,
            armijo: 1e-4,
            min_step: 1e-14,
            gradient_tol: 1e-10,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum DescentStatus {
    Converged,
    MaxIterations,
    Stalled,
}

#[derive(Debug, Clone, PartialEq)]
pub struct DescentResult {
    pub phi: DiskDiffeo,
    /// Energy before the first step and after every accepted step.
    pub history: Vec<f64>,
    pub status: DescentStatus,
}

/// Maps between the flat unknown vector and vertex positions: interior
/// vertices contribute `(x, y)`, movable boundary vertices their angle.
struct Layout {
    interior: Vec<usize>,
    /// `(vertex, loop index)` of boundary vertices whose angle is free.
    sliding: Vec<(usize, usize)>,
    /// Boundary vertices moving freely in the plane.
    planar_boundary: Vec<usize>,
}

impl Layout {
    fn new(s: &SurfaceSample, policy: BoundaryPolicy) -> Self {
        let mesh = &s.mesh;
        let interior = mesh.interior_vertices();
        let (sliding, planar_boundary) = match policy {
            BoundaryPolicy::ThreePoint { marked } => (
                mesh.boundary_loop
                    .iter()
                    .enumerate()
                    .filter(|(k, _)| !marked.contains(k))
                    .map(|(k, &v)| (v, k))
                    .collect(),
                Vec::new(),
            ),
            BoundaryPolicy::FixedBoundary => (Vec::new(), Vec::new()),
            BoundaryPolicy::Free => (Vec::new(), mesh.boundary_loop.clone()),
        };
        Self {
            interior,
            sliding,
            planar_boundary,
        }
    }

    fn len(&self) -> usize {
        2 * self.interior.len() + self.sliding.len() + 2 * self.planar_boundary.len()
    }

    fn pack(&self, pos: &[[f64; 2]], theta: &[f64]) -> Vec<f64> {
        let mut v = Vec::with_capacity(self.len());
        for &i in self.interior.iter().chain(&self.planar_boundary) {
            v.extend_from_slice(&pos[i]);
        }
        v.extend(self.sliding.iter().map(|&(_, k)| theta[k]));
        v
    }

    fn unpack(&self, v: &[f64], pos: &mut [[f64; 2]], theta: &mut [f64]) {
        let planar = self.interior.len() + self.planar_boundary.len();
        for (n, &i) in self.interior.iter().chain(&self.planar_boundary).enumerate() {
            pos[i] = [v[2 * n], v[2 * n + 1]];
        }
        for (n, &(vert, k)) in self.sliding.iter().enumerate() {
            let a = v[2 * planar + n];
            theta[k] = a;
            pos[vert] = [a.cos(), a.sin()];
        }
    }

    fn gradient(&self, g: &[[f64; 2]], theta: &[f64]) -> Vec<f64> {
        let mut out = Vec::with_capacity(self.len());
        for &i in self.interior.iter().chain(&self.planar_boundary) {
            out.extend_from_slice(&g[i]);
        }
        for &(vert, k) in &self.sliding {
            out.push(-theta[k].sin() * g[vert][0] + theta[k].cos() * g[vert][1]);
        }
        out
    }
}

/// L-BFGS descent with Armijo backtracking on `energy_of_reparam`.
///
/// Unknowns are the interior vertex positions plus the boundary angles that
/// the policy lets move. Trial points that fold a triangle or break the
/// boundary ordering are rejected, so every iterate is a valid
/// diffeomorphism and the history never increases.
pub fn inner_variation_descent(
    s: &SurfaceSample,
    phi0: &DiskDiffeo,
    iters: usize,
    opts: &DescentOptions,
) -> Result<DescentResult> {
    let mesh = &s.mesh;
    phi0.validate(mesh)?;
    let einv = mesh.edge_inverses();
    let layout = Layout::new(s, phi0.policy);
    let check_boundary = matches!(phi0.policy, BoundaryPolicy::ThreePoint { .. });

    let mut pos = phi0.positions.clone();
    let mut theta = phi0.boundary_angles(mesh);
    let mut x = layout.pack(&pos, &theta);
    let (mut e, g) = energy_and_gradient(s, &einv, &pos).expect("validated diffeomorphism");
    let mut grad = layout.gradient(&g, &theta);
    let mut history = vec![e];
    let mut lb = Lbfgs::new(opts.memory);
    let mut status = DescentStatus::MaxIterations;
    let mut trial_pos = pos.clone();
    let mut trial_theta = theta.clone();

    for _ in 0..iters {
        let gnorm = dot(&grad, &grad).sqrt();
        if gnorm < opts.gradient_tol * (1.0 + e.abs()) {
            status = DescentStatus::Converged;
            break;
        }
        let mut d = lb.direction(&grad);
        let mut slope = dot(&grad, &d);
        if !(slope < 0.0) {
            lb.reset();
            d = grad.iter().map(|v| -v).collect();
            slope = -gnorm * gnorm;
        }
        let dmax = d.iter().fold(0.0f64, |m, v| m.max(v.abs()));
        // first steps of a fresh memory are kept small relative to the mesh
        let mut alpha = if lb.is_empty() { (0.01 / dmax).min(1.0) } else { 1.0 };
        let mut accepted = None;
        while alpha * dmax >= opts.min_step {
            let xt: Vec<f64> = x.iter().zip(&d).map(|(a, b)| a + alpha * b).collect();
            layout.unpack(&xt, &mut trial_pos, &mut trial_theta);
            let ok_boundary = !check_boundary || angles_monotone(&trial_theta);
            if ok_boundary {
                if let Some((et, gt)) = energy_and_gradient(s, &einv, &trial_pos) {
                    if et <= e + opts.armijo * alpha * slope {
                        accepted = Some((xt, et, gt));
                        break;
                    }
                }
            }
            alpha *= 0.5;
        }
        let Some((xt, et, gt)) = accepted else {
            status = DescentStatus::Stalled;
            break;
        };
        let gnew = layout.gradient(&gt, &trial_theta);
        lb.push(
            xt.iter().zip(&x).map(|(a, b)| a - b).collect(),
            gnew.iter().zip(&grad).map(|(a, b)| a - b).collect(),
        );
        x = xt;
        pos.clone_from(&trial_pos);
        theta.clone_from(&trial_theta);
        e = et;
        grad = gnew;
        history.push(e);
    }

    let phi = DiskDiffeo {
        positions: pos,
        policy: phi0.policy,
    };
    Ok(DescentResult { phi, history, status })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mesh::{area_functional, build_disk_mesh, sample_surface, SurfaceId};
    use crate::reparam2d::conformality_defect;

    #[test]
    fn flat_identity_is_stationary() {
        let m = build_disk_mesh(3);
        let s = sample_surface(&m, |x| SurfaceId::Flat.eval(x)).unwrap();
        let id = DiskDiffeo::identity(&m, BoundaryPolicy::three_point(&m));
        let r = inner_variation_descent(&s, &id, 50, &DescentOptions::default()).unwrap();
        let h0 = r.history[0];
        assert!(r.history.iter().all(|h| (h - h0).abs() < 1e-10));
    }

    #[test]
    fn stretch_descends_towards_area() {
        let m = build_disk_mesh(3);
        let s = sample_surface(&m, |x| SurfaceId::Stretch(2.0, 1.0).eval(x)).unwrap();
        let id = DiskDiffeo::identity(&m, BoundaryPolicy::three_point(&m));
        let r = inner_variation_descent(&s, &id, 400, &DescentOptions::default()).unwrap();
        assert!(r.history.windows(2).all(|w| w[1] <= w[0]));
        let area = area_functional(&s);
        let last = *r.history.last().unwrap();
        assert!(last >= area - 1e-9);
        assert!((last - area) / area < 0.05, "{last} vs {area}");
        r.phi.validate(&m).unwrap();
        assert!(conformality_defect(&s, &r.phi) < conformality_defect(&s, &id));
    }
}
