//! The Dirichlet energy of `u ∘ Φ^{-1}` pulled back to the reference disk.

use super::{jacobian_of, DiskDiffeo};
use crate::error::{HullError, Result};
use crate::mesh::SurfaceSample;

/// `|F adj(X)^T|^2 / (2 det X)` for `X = [[a, b], [c, d]]` and the metric
/// `[E, F, H]`, with its derivative in `(a, b, c, d)`.
#[inline]
pub(crate) fn triangle_energy(x: &[f64; 4], g: &[f64; 3]) -> Option<(f64, [f64; 4])> {
    let [a, b, c, d] = *x;
    let [p, s, r] = *g;
    let det = a * d - b * c;
    if !(det > 0.0) {
        return None;
    }
    let n = p * (b * b + d * d) + r * (a * a + c * c) - 2.0 * s * (a * b + c * d);
    let dn = [
        2.0 * (r * a - s * b),
        2.0 * (p * b - s * a),
        2.0 * (r * c - s * d),
        2.0 * (p * d - s * c),
    ];
    let dd = [d, -c, -b, a];
    let e = n / (2.0 * det);
    let grad = std::array::from_fn(|k| dn[k] / (2.0 * det) - e * dd[k] / det);
    Some((e, grad))
}

/// Energy and its gradient in the vertex positions; `None` on a fold.
pub(crate) fn energy_and_gradient(
    s: &SurfaceSample,
    einv: &[[f64; 4]],
    pos: &[[f64; 2]],
) -> Option<(f64, Vec<[f64; 2]>)> {
    let mesh = &s.mesh;
    let mut total = 0.0;
    let mut grad = vec![[0.0; 2]; pos.len()];
    for (t, tri) in mesh.triangles.iter().enumerate() {
        let e = &einv[t];
        let x = jacobian_of(tri.map(|i| pos[i]), e);
        let (val, dx) = triangle_energy(&x, &s.metric(t))?;
        let area = s.triangle_areas()[t];
        total += area * val;
        // dE/dM = dE/dX E^{-T}, where M = [Φ1 - Φ0, Φ2 - Φ0]
        let dm = [
            dx[0] * e[0] + dx[1] * e[1],
            dx[0] * e[2] + dx[1] * e[3],
            dx[2] * e[0] + dx[3] * e[1],
            dx[2] * e[2] + dx[3] * e[3],
        ];
        let g1 = [area * dm[0], area * dm[2]];
        let g2 = [area * dm[1], area * dm[3]];
        for k in 0..2 {
            grad[tri[1]][k] += g1[k];
            grad[tri[2]][k] += g2[k];
            grad[tri[0]][k] -= g1[k] + g2[k];
        }
    }
    Some((total, grad))
}

/// `Σ_T area(T) |∇u adj(∇Φ)^T|^2 / (2 det ∇Φ)`, the Dirichlet energy of the
/// reparameterized surface.
pub fn energy_of_reparam(s: &SurfaceSample, phi: &DiskDiffeo) -> Result<f64> {
    let mesh = &s.mesh;
    let mut total = 0.0;
    for (t, tri) in mesh.triangles.iter().enumerate() {
        let x = jacobian_of(tri.map(|i| phi.positions[i]), &mesh.edge_inverse(t));
        match triangle_energy(&x, &s.metric(t)) {
            Some((e, _)) => total += s.triangle_areas()[t] * e,
            None => {
                return Err(HullError::Fold {
                    triangle: t,
                    det: x[0] * x[3] - x[1] * x[2],
                })
            }
        }
    }
    Ok(total)
}

/// Per-triangle `|M / tr M - I/2|` with `M = adj ∇Φ G adj ∇Φ^T`.
pub fn conformality_defects(s: &SurfaceSample, phi: &DiskDiffeo) -> Vec<f64> {
    let mesh = &s.mesh;
    mesh.triangles
        .iter()
        .enumerate()
        .map(|(t, tri)| {
            let [a, b, c, d] = jacobian_of(tri.map(|i| phi.positions[i]), &mesh.edge_inverse(t));
            let [e, f, h] = s.metric(t);
            // C = cof X = [[d, -c], [-b, a]]
            let (c11, c12, c21, c22) = (d, -c, -b, a);
            let cg = [
                c11 * e + c12 * f,
                c11 * f + c12 * h,
                c21 * e + c22 * f,
                c21 * f + c22 * h,
            ];
            let m11 = cg[0] * c11 + cg[1] * c12;
            let m12 = cg[0] * c21 + cg[1] * c22;
            let m22 = cg[2] * c21 + cg[3] * c22;
            let tr = m11 + m22;
            let (x11, x12, x22) = (m11 / tr - 0.5, m12 / tr, m22 / tr - 0.5);
            (x11 * x11 + 2.0 * x12 * x12 + x22 * x22).sqrt()
        })
        .collect()
}

/// Area-weighted mean of [`conformality_defects`].
pub fn conformality_defect(s: &SurfaceSample, phi: &DiskDiffeo) -> f64 {
    let areas = s.triangle_areas();
    let acc: f64 = conformality_defects(s, phi).iter().zip(areas).map(|(d, w)| d * w).sum();
    acc / areas.iter().sum::<f64>()
}
