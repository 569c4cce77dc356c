//! Beltrami coefficients of surface metrics and the matching elliptic
//! coefficient matrices.

use num_complex::Complex64;

use super::{jacobian_of, DiskDiffeo};
use crate::error::{HullError, Result};
use crate::mesh::SurfaceSample;

/// One complex dilatation per triangle.
#[derive(Debug, Clone, PartialEq)]
pub struct BeltramiField(pub Vec<Complex64>);

impl BeltramiField {
    pub fn constant(mu: Complex64, triangles: usize) -> Self {
        Self(vec![mu; triangles])
    }

    pub fn max_abs(&self) -> f64 {
        self.0.iter().map(|m| m.norm()).fold(0.0, f64::max)
    }
}

/// `μ = (E - H + 2iF) / (E + H + 2 sqrt(EH - F^2))` per triangle, with
/// `E = |u_1|^2`, `F = u_1·u_2`, `H = |u_2|^2`.
pub fn beltrami_coefficient(s: &SurfaceSample) -> Result<BeltramiField> {
    let mut out = Vec::with_capacity(s.num_triangles());
    for t in 0..s.num_triangles() {
        let [e, f, h] = s.metric(t);
        let det = e * h - f * f;
        if !(det > 1e-14 * (e + h) * (e + h)) {
            return Err(HullError::Regularity(format!(
                "triangle {t} has a degenerate metric (det {det:.3e})"
            )));
        }
        out.push(Complex64::new(e - h, 2.0 * f) / (e + h + 2.0 * det.sqrt()));
    }
    Ok(BeltramiField(out))
}

/// `A_μ = [[|1-μ|^2, -2 Im μ], [-2 Im μ, |1+μ|^2]] / (1 - |μ|^2)`, row-major
/// `[a11, a12, a22]`. Symmetric with unit determinant; the components of a
/// solution of `∂̄Φ = μ ∂Φ` are `A_μ`-harmonic.
pub fn coefficient_matrix(mu: Complex64) -> [f64; 3] {
    let s = 1.0 - mu.norm_sqr();
    [
        (Complex64::new(1.0, 0.0) - mu).norm_sqr() / s,
        -2.0 * mu.im / s,
        (Complex64::new(1.0, 0.0) + mu).norm_sqr() / s,
    ]
}

/// Relative area-weighted `L^2` norm of `∂̄Φ - μ ∂Φ`, normalized by that of
/// `∂Φ`.
pub fn beltrami_residual(s: &SurfaceSample, mu: &BeltramiField, phi: &DiskDiffeo) -> f64 {
    let mesh = &s.mesh;
    let (mut num, mut den) = (0.0, 0.0);
    for (t, tri) in mesh.triangles.iter().enumerate() {
        let [a, b, c, d] = jacobian_of(tri.map(|i| phi.positions[i]), &mesh.edge_inverse(t));
        // Φ_x = a + ic, Φ_y = b + id
        let px = Complex64::new(a, c);
        let py = Complex64::new(b, d);
        let i = Complex64::i();
        let dz = 0.5 * (px - i * py);
        let dzb = 0.5 * (px + i * py);
        let area = s.triangle_areas()[t];
        num += area * (dzb - mu.0[t] * dz).norm_sqr();
        den += area * dz.norm_sqr();
    }
    (num / den).sqrt()
}
