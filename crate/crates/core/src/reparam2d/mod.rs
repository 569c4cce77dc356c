//! Reparameterizations of the disk that straighten a surface's metric.
//!
//! A discrete diffeomorphism `Φ` is a per-vertex map of the disk mesh; the
//! energy of `u ∘ Φ^{-1}` is evaluated on the reference mesh through
//! `∫ det(∇Φ) W(∇u ∇Φ^{-1})`. Two independent routes drive it towards the
//! area: a linear Beltrami solve and direct descent on the energy.

mod beltrami;
mod descent;
mod diffeo;
mod energy;
mod lbs;

use nalgebra::DMatrix;
use serde::Serialize;

use crate::densities::MatrixX;
use crate::error::{HullError, Result};
use crate::mesh::TriMesh;

pub use beltrami::{beltrami_coefficient, beltrami_residual, coefficient_matrix, BeltramiField};
pub use descent::{inner_variation_descent, DescentOptions, DescentResult, DescentStatus};
pub use diffeo::{random_diffeo, resample};
pub use energy::{conformality_defect, conformality_defects, energy_of_reparam};
pub use lbs::linear_beltrami_solve;

/// Counterclockwise quarter turn `[[0, 1], [-1, 0]]`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct RotationQ;

impl RotationQ {
    pub fn matrix(&self) -> DMatrix<f64> {
        DMatrix::from_row_slice(2, 2, &[0.0, 1.0, -1.0, 0.0])
    }

    pub fn apply(&self, v: [f64; 2]) -> [f64; 2] {
        [v[1], -v[0]]
    }
}

/// How boundary vertices may move.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum BoundaryPolicy {
    /// Boundary slides along the circle; three boundary-loop positions stay
    /// fixed.
    ThreePoint { marked: [usize; 3] },
    /// Boundary held at the identity.
    FixedBoundary,
    /// Boundary unconstrained (not kept on the circle).
    Free,
}

impl BoundaryPolicy {
    /// Marked points at angles `0, 2π/3, 4π/3`.
    pub fn three_point(mesh: &TriMesh) -> Self {
        let nb = mesh.boundary_loop.len();
        BoundaryPolicy::ThreePoint {
            marked: [0, nb / 3, 2 * nb / 3],
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            BoundaryPolicy::ThreePoint { .. } => "three_point",
            BoundaryPolicy::FixedBoundary => "fixed_boundary",
            BoundaryPolicy::Free => "free",
        }
    }

    /// Boundary-loop positions that may not move.
    pub(crate) fn marked(&self) -> &[usize] {
        match self {
            BoundaryPolicy::ThreePoint { marked } => marked,
            _ => &[],
        }
    }
}

/// Per-vertex image points of an orientation-preserving self-map of the
/// disk.
#[derive(Debug, Clone, PartialEq)]
pub struct DiskDiffeo {
    pub positions: Vec<[f64; 2]>,
    pub policy: BoundaryPolicy,
}

impl DiskDiffeo {
    pub fn identity(mesh: &TriMesh, policy: BoundaryPolicy) -> Self {
        Self {
            positions: mesh.vertices.clone(),
            policy,
        }
    }

    /// Row-major `[a, b, c, d]` of `∇Φ` on every triangle.
    pub fn jacobians(&self, mesh: &TriMesh) -> Vec<[f64; 4]> {
        jacobians_of(&self.positions, mesh, &mesh.edge_inverses())
    }

    pub fn jacobian(&self, mesh: &TriMesh, t: usize) -> MatrixX {
        let j = jacobian_of(mesh.triangles[t].map(|i| self.positions[i]), &mesh.edge_inverse(t));
        MatrixX::new(DMatrix::from_row_slice(2, 2, &j))
    }

    pub fn min_det(&self, mesh: &TriMesh) -> f64 {
        self.jacobians(mesh)
            .iter()
            .map(|j| j[0] * j[3] - j[1] * j[2])
            .fold(f64::INFINITY, f64::min)
    }

    /// Unwrapped polar angles of the boundary-loop images, starting in
    /// `(-π, π]`.
    pub fn boundary_angles(&self, mesh: &TriMesh) -> Vec<f64> {
        let mut out = Vec::with_capacity(mesh.boundary_loop.len());
        let mut prev: Option<f64> = None;
        for &v in &mesh.boundary_loop {
            let [x, y] = self.positions[v];
            let mut a = y.atan2(x);
            if let Some(p) = prev {
                while a < p - std::f64::consts::PI {
                    a += std::f64::consts::TAU;
                }
                while a > p + std::f64::consts::PI {
                    a -= std::f64::consts::TAU;
                }
            }
            prev = Some(a);
            out.push(a);
        }
        out
    }

    /// Largest vertex displacement from the identity.
    pub fn max_displacement(&self, mesh: &TriMesh) -> f64 {
        self.positions
            .iter()
            .zip(&mesh.vertices)
            .map(|(p, q)| ((p[0] - q[0]).powi(2) + (p[1] - q[1]).powi(2)).sqrt())
            .fold(0.0, f64::max)
    }

    /// Checks positive Jacobians and, unless the policy is free, circle
    /// placement, monotone boundary angles and fixed marked points.
    pub fn validate(&self, mesh: &TriMesh) -> Result<()> {
        if self.positions.len() != mesh.num_vertices() {
            return Err(HullError::DimensionMismatch {
                expected: format!("{} positions", mesh.num_vertices()),
                got: self.positions.len().to_string(),
            });
        }
        for (t, j) in self.jacobians(mesh).iter().enumerate() {
            let d = j[0] * j[3] - j[1] * j[2];
            if !(d > 0.0) {
                return Err(HullError::Fold { triangle: t, det: d });
            }
        }
        if self.policy == BoundaryPolicy::Free {
            return Ok(());
        }
        for &v in &mesh.boundary_loop {
            let [x, y] = self.positions[v];
            if ((x * x + y * y).sqrt() - 1.0).abs() > 1e-10 {
                return Err(HullError::Input(format!("boundary vertex {v} left the unit circle")));
            }
        }
        if !angles_monotone(&self.boundary_angles(mesh)) {
            return Err(HullError::Input("boundary angles are not monotone".into()));
        }
        for &k in self.policy.marked() {
            let v = mesh.boundary_loop[k];
            let (p, q) = (self.positions[v], mesh.vertices[v]);
            if (p[0] - q[0]).abs() > 1e-12 || (p[1] - q[1]).abs() > 1e-12 {
                return Err(HullError::Input(format!("marked boundary vertex {v} moved")));
            }
        }
        Ok(())
    }
}

/// Strictly increasing and spanning less than one full turn.
pub(crate) fn angles_monotone(theta: &[f64]) -> bool {
    theta.windows(2).all(|w| w[1] > w[0])
        && theta
            .last()
            .zip(theta.first())
            .is_some_and(|(l, f)| l - f < std::f64::consts::TAU)
}

pub(crate) fn jacobians_of(pos: &[[f64; 2]], mesh: &TriMesh, einv: &[[f64; 4]]) -> Vec<[f64; 4]> {
    mesh.triangles
        .iter()
        .zip(einv)
        .map(|(t, e)| jacobian_of(t.map(|i| pos[i]), e))
        .collect()
}

/// `[Φ1 - Φ0, Φ2 - Φ0] E^{-1}` row-major.
pub(crate) fn jacobian_of(p: [[f64; 2]; 3], e: &[f64; 4]) -> [f64; 4] {
    let m = [
        p[1][0] - p[0][0],
        p[2][0] - p[0][0],
        p[1][1] - p[0][1],
        p[2][1] - p[0][1],
    ];
    [
        m[0] * e[0] + m[1] * e[2],
        m[0] * e[1] + m[1] * e[3],
        m[2] * e[0] + m[3] * e[2],
        m[2] * e[1] + m[3] * e[3],
    ]
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mesh::build_disk_mesh;

    #[test]
    fn rotation_q() {
        let q = RotationQ.matrix();
        assert_eq!(q.transpose(), -q.clone());
        assert_eq!(&q * &q, -DMatrix::identity(2, 2));
        assert_eq!(RotationQ.apply([1.0, 0.0]), [0.0, -1.0]);
    }

    #[test]
    fn identity_is_valid() {
        let m = build_disk_mesh(3);
        let phi = DiskDiffeo::identity(&m, BoundaryPolicy::three_point(&m));
        phi.validate(&m).unwrap();
        let j = phi.jacobian(&m, 5);
        assert!((j.matrix() - DMatrix::identity(2, 2)).abs().max() < 1e-12);
        assert_eq!(phi.max_displacement(&m), 0.0);
        let BoundaryPolicy::ThreePoint { marked } = phi.policy else {
            unreachable!()
        };
        let a = marked.map(|k| m.boundary_angle[k]);
        assert!((a[1] - std::f64::consts::TAU / 3.0).abs() < 1e-12);
        assert!((a[2] - 2.0 * std::f64::consts::TAU / 3.0).abs() < 1e-12);
    }

    #[test]
    fn fold_detected() {
        let m = build_disk_mesh(2);
        let mut phi = DiskDiffeo::identity(&m, BoundaryPolicy::FixedBoundary);
        phi.positions[0] = [0.9, 0.0];
        assert!(matches!(phi.validate(&m), Err(HullError::Fold { .. })));
    }
}
