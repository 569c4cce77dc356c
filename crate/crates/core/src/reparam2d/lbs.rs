//! Linear Beltrami solve: both components of `Φ` are `A_μ`-harmonic, and the
//! boundary slides along the circle to minimize the `A_μ` conformal energy.

use nalgebra::{DMatrix, DVector};
use rayon::prelude::*;

use super::beltrami::{coefficient_matrix, BeltramiField};
use super::{angles_monotone, BoundaryPolicy, DiskDiffeo};
use crate::error::{HullError, Result};
use crate::mesh::TriMesh;
use crate::numeric::sparse::{conjugate_gradient, CsrMatrix, SparseCholesky, TripletBuilder};

const CG_TOL: f64 = 1e-10;
const MAX_OUTER: usize = 100;
const ANGLE_TOL: f64 = 1e-8;
/// Right-hand sides per sparse solve when forming the Schur complement.
const SCHUR_BLOCK: usize = 32;

/// P1 stiffness matrix of `div(A_μ ∇·)`.
fn stiffness(mesh: &TriMesh, mu: &BeltramiField) -> Result<CsrMatrix> {
    let mut kb = TripletBuilder::new(mesh.num_vertices());
    for (t, tri) in mesh.triangles.iter().enumerate() {
        let m = mu.0[t];
        if !(m.norm() <= 1.0 - 1e-6) {
            return Err(HullError::Domain(format!(
                "|μ| = {} on triangle {t} is too close to 1",
                m.norm()
            )));
        }
        let [a11, a12, a22] = coefficient_matrix(m);
        let e = mesh.edge_inverse(t);
        let g1 = [e[0], e[1]];
        let g2 = [e[2], e[3]];
        let g0 = [-g1[0] - g2[0], -g1[1] - g2[1]];
        let grads = [g0, g1, g2];
        let area = mesh.area(t);
        for i in 0..3 {
            let ag = [
                a11 * grads[i][0] + a12 * grads[i][1],
                a12 * grads[i][0] + a22 * grads[i][1],
            ];
            for j in 0..3 {
                kb.add(tri[i], tri[j], area * (ag[0] * grads[j][0] + ag[1] * grads[j][1]));
            }
        }
    }
    Ok(kb.build())
}

struct Split {
    interior: Vec<usize>,
    boundary: Vec<usize>,
    k_ii: SparseCholesky,
    /// Column `j`: entries `K(I_i, B_j)`.
    k_ib: Vec<Vec<f64>>,
}

fn split(mesh: &TriMesh, k: &CsrMatrix) -> Result<Split> {
    let interior = mesh.interior_vertices();
    let boundary = mesh.boundary_loop.clone();
    let mut bpos = vec![usize::MAX; mesh.num_vertices()];
    for (j, &v) in boundary.iter().enumerate() {
        bpos[v] = j;
    }
    let mut k_ib = vec![vec![0.0; interior.len()]; boundary.len()];
    for (i, &v) in interior.iter().enumerate() {
        for (c, val) in k.row(v) {
            if bpos[c] != usize::MAX {
                k_ib[bpos[c]][i] = val;
            }
        }
    }
    Ok(Split {
        k_ii: SparseCholesky::new(&k.submatrix(&interior))?,
        interior,
        boundary,
        k_ib,
    })
}

fn solve(a: &CsrMatrix, b: &[f64]) -> Result<Vec<f64>> {
    let mut x = vec![0.0; b.len()];
    let rep = conjugate_gradient(a, b, &mut x, CG_TOL, 20 * b.len().max(50));
    if !rep.converged {
        return Err(HullError::NoConvergence {
            iterations: rep.iterations,
            residual: rep.relative_residual,
            history: vec![rep.relative_residual],
        });
    }
    Ok(x)
}

/// Solves for the diffeomorphism whose components are `A_μ`-harmonic.
///
/// * `three_point`: interior unknowns are eliminated through the Schur
///   complement `S`, then the free boundary angles minimize
///   `½ Σ_c P_c^T S P_c` minus the area of the boundary polygon by damped
///   Newton iterations that keep the angles
///   monotone; the marked points stay fixed.
/// * `fixed_boundary`: `A_μ`-harmonic extension of the identity boundary.
/// * `free`: minimizes the `A_μ`-Dirichlet energy minus the signed image
///   area with two opposite boundary vertices pinned; for constant `μ` the
///   solution is the affine map `z + μ z̄` up to similarity.
pub fn linear_beltrami_solve(mesh: &TriMesh, mu: &BeltramiField, policy: BoundaryPolicy) -> Result<DiskDiffeo> {
    if mu.0.len() != mesh.num_triangles() {
        return Err(HullError::DimensionMismatch {
            expected: format!("{} coefficients", mesh.num_triangles()),
            got: mu.0.len().to_string(),
        });
    }
    let k = stiffness(mesh, mu)?;
    let phi = match policy {
        BoundaryPolicy::ThreePoint { marked } => three_point(mesh, mu, marked)?,
        BoundaryPolicy::FixedBoundary => fixed_boundary(mesh, &k)?,
        BoundaryPolicy::Free => free_boundary(mesh, &k)?,
    };
    phi.validate(mesh)?;
    Ok(phi)
}

fn harmonic_extension(sp: &Split, xb: &[f64]) -> Result<Vec<f64>> {
    let mut rhs = vec![0.0; sp.interior.len()];
    for (j, col) in sp.k_ib.iter().enumerate() {
        for (r, c) in rhs.iter_mut().zip(col) {
            *r -= c * xb[j];
        }
    }
    Ok(sp.k_ii.solve(&rhs))
}

fn assemble(mesh: &TriMesh, sp: &Split, xb: &[f64], yb: &[f64], policy: BoundaryPolicy) -> Result<DiskDiffeo> {
    let xi = harmonic_extension(sp, xb)?;
    let yi = harmonic_extension(sp, yb)?;
    let mut positions = vec![[0.0; 2]; mesh.num_vertices()];
    for (j, &v) in sp.boundary.iter().enumerate() {
        positions[v] = [xb[j], yb[j]];
    }
    for (i, &v) in sp.interior.iter().enumerate() {
        positions[v] = [xi[i], yi[i]];
    }
    Ok(DiskDiffeo { positions, policy })
}

fn fixed_boundary(mesh: &TriMesh, k: &CsrMatrix) -> Result<DiskDiffeo> {
    let sp = split(mesh, k)?;
    let xb: Vec<f64> = sp.boundary.iter().map(|&v| mesh.vertices[v][0]).collect();
    let yb: Vec<f64> = sp.boundary.iter().map(|&v| mesh.vertices[v][1]).collect();
    assemble(mesh, &sp, &xb, &yb, BoundaryPolicy::FixedBoundary)
}

/// Largest `|μ|` increment between continuation stages.
const STAGE_STEP: f64 = 0.1;

/// Continuation in `t μ`: strongly anisotropic coefficients are reached
/// through a chain of warm-started angle solves, which keeps the boundary
/// out of basins where vertices pile up on a marked point.
fn three_point(mesh: &TriMesh, mu: &BeltramiField, marked: [usize; 3]) -> Result<DiskDiffeo> {
    let stages = ((mu.max_abs() / STAGE_STEP).ceil() as usize).max(1);
    let mut theta = mesh.boundary_angle.clone();
    let mut last = None;
    for stage in 1..=stages {
        let t = stage as f64 / stages as f64;
        let scaled = BeltramiField(mu.0.iter().map(|m| m * t).collect());
        let k = stiffness(mesh, &scaled)?;
        let sp = split(mesh, &k)?;
        theta = relax_angles(&k, &sp, marked, theta)?;
        last = Some(sp);
    }
    let sp = last.expect("at least one stage");
    let xb: Vec<f64> = theta.iter().map(|a| a.cos()).collect();
    let yb: Vec<f64> = theta.iter().map(|a| a.sin()).collect();
    let mut phi = assemble(mesh, &sp, &xb, &yb, BoundaryPolicy::ThreePoint { marked })?;
    // marked points are exact
    for &m in &marked {
        let v = sp.boundary[m];
        phi.positions[v] = mesh.vertices[v];
    }
    Ok(phi)
}

fn relax_angles(k: &CsrMatrix, sp: &Split, marked: [usize; 3], mut theta: Vec<f64>) -> Result<Vec<f64>> {
    let nb = sp.boundary.len();
    // Schur complement S = K_BB - K_BI K_II^{-1} K_IB
    let w: Vec<Vec<f64>> = sp
        .k_ib
        .par_chunks(SCHUR_BLOCK)
        .flat_map_iter(|block| sp.k_ii.solve_columns(block))
        .collect();
    // each boundary vertex couples to a handful of interior vertices
    let coupling: Vec<Vec<(usize, f64)>> = sp
        .k_ib
        .iter()
        .map(|col| col.iter().copied().enumerate().filter(|&(_, v)| v != 0.0).collect())
        .collect();
    let s = DMatrix::from_fn(nb, nb, |i, j| {
        let kbb = k.get(sp.boundary[i], sp.boundary[j]);
        kbb - coupling[i].iter().map(|&(r, a)| a * w[j][r]).sum::<f64>()
    });
    let s = (&s + s.transpose()) * 0.5;

    let free: Vec<usize> = (0..nb).filter(|j| !marked.contains(j)).collect();
    // the chord polygon loses area when its spacing is uneven, so the plain
    // Dirichlet energy rewards collapsing vertices; subtracting the image
    // area leaves a nonnegative energy that vanishes only for conformal maps
    let gap = |th: &[f64], j: usize| -> f64 {
        if j + 1 < nb {
            th[j + 1] - th[j]
        } else {
            th[0] + 2.0 * std::f64::consts::PI - th[j]
        }
    };
    let energy = |th: &[f64]| -> f64 {
        let x = DVector::from_iterator(nb, th.iter().map(|a| a.cos()));
        let y = DVector::from_iterator(nb, th.iter().map(|a| a.sin()));
        let area: f64 = (0..nb).map(|j| 0.5 * gap(th, j).sin()).sum();
        0.5 * (x.dot(&(&s * &x)) + y.dot(&(&s * &y))) - area
    };
    let mut f = energy(&theta);
    let mut lambda = 1e-3 * s.diagonal().abs().mean();
    let mut history = Vec::new();
    let mut converged = false;
    for _ in 0..MAX_OUTER {
        let x = DVector::from_iterator(nb, theta.iter().map(|a| a.cos()));
        let y = DVector::from_iterator(nb, theta.iter().map(|a| a.sin()));
        let sx = &s * &x;
        let sy = &s * &y;
        let prev = |i: usize| (i + nb - 1) % nb;
        let g: Vec<f64> = free
            .iter()
            .map(|&i| {
                let da = 0.5 * (gap(&theta, prev(i)).cos() - gap(&theta, i).cos());
                -theta[i].sin() * sx[i] + theta[i].cos() * sy[i] - da
            })
            .collect();
        let gmax = g.iter().fold(0.0f64, |m, v| m.max(v.abs()));
        history.push(gmax);
        if gmax < ANGLE_TOL {
            converged = true;
            break;
        }
        let nf = free.len();
        let h = DMatrix::from_fn(nf, nf, |a, b| {
            let (i, j) = (free[a], free[b]);
            let mut v = s[(i, j)] * (theta[i] - theta[j]).cos();
            if a == b {
                v -= x[i] * sx[i] + y[i] * sy[i];
                v += 0.5 * (gap(&theta, prev(i)).sin() + gap(&theta, i).sin());
            } else if j == (i + 1) % nb {
                v -= 0.5 * gap(&theta, i).sin();
            } else if i == (j + 1) % nb {
                v -= 0.5 * gap(&theta, j).sin();
            }
            v
        });
        let mut accepted = false;
        for _ in 0..40 {
            let damped = &h + DMatrix::identity(nf, nf) * lambda;
            let step = damped
                .clone()
                .cholesky()
                .map(|c| c.solve(&DVector::from_vec(g.clone())))
                .or_else(|| damped.lu().solve(&DVector::from_vec(g.clone())));
            if let Some(step) = step {
                // no angle moves further than half of its smaller neighbouring gap
                let mut scale = 1.0f64;
                for (a, &i) in free.iter().enumerate() {
                    let room = 0.5 * gap(&theta, prev(i)).min(gap(&theta, i));
                    if step[a].abs() > room {
                        scale = scale.min(room / step[a].abs());
                    }
                }
                let mut trial = theta.clone();
                for (a, &i) in free.iter().enumerate() {
                    trial[i] -= scale * step[a];
                }
                let ft = energy(&trial);
                if angles_monotone(&trial) && ft <= f {
                    theta = trial;
                    f = ft;
                    lambda = (lambda / 3.0).max(1e-14);
                    accepted = true;
                    break;
                }
            }
            lambda *= 10.0;
        }
        if !accepted {
            break;
        }
    }
    if !converged {
        return Err(HullError::NoConvergence {
            iterations: history.len(),
            residual: history.last().copied().unwrap_or(f64::NAN),
            history,
        });
    }
    Ok(theta)
}

fn free_boundary(mesh: &TriMesh, k: &CsrMatrix) -> Result<DiskDiffeo> {
    let n = mesh.num_vertices();
    let nb = mesh.boundary_loop.len();
    // unknowns (x_0..x_{n-1}, y_0..y_{n-1}); energy ½ v^T (K ⊕ K - B) v where
    // ½ v^T B v is the signed area of the boundary polygon
    let mut tb = TripletBuilder::new(2 * n);
    for i in 0..n {
        for (j, v) in k.row(i) {
            tb.add(i, j, v);
            tb.add(n + i, n + j, v);
        }
    }
    for e in 0..nb {
        let (a, b) = (mesh.boundary_loop[e], mesh.boundary_loop[(e + 1) % nb]);
        // area term ½ (x_a y_b - x_b y_a)
        tb.add(a, n + b, -0.5);
        tb.add(n + b, a, -0.5);
        tb.add(b, n + a, 0.5);
        tb.add(n + a, b, 0.5);
    }
    let full = tb.build();
    let pins = [mesh.boundary_loop[0], mesh.boundary_loop[nb / 2]];
    let mut fixed = vec![None; 2 * n];
    for &p in &pins {
        fixed[p] = Some(mesh.vertices[p][0]);
        fixed[n + p] = Some(mesh.vertices[p][1]);
    }
    let keep: Vec<usize> = (0..2 * n).filter(|&i| fixed[i].is_none()).collect();
    let mut rhs = vec![0.0; keep.len()];
    for (r, &i) in keep.iter().enumerate() {
        for (j, v) in full.row(i) {
            if let Some(val) = fixed[j] {
                rhs[r] -= v * val;
            }
        }
    }
    let sol = solve(&full.submatrix(&keep), &rhs)?;
    let mut all = vec![0.0; 2 * n];
    for (i, f) in fixed.iter().enumerate() {
        if let Some(v) = f {
            all[i] = *v;
        }
    }
    for (r, &i) in keep.iter().enumerate() {
        all[i] = sol[r];
    }
    Ok(DiskDiffeo {
        positions: (0..n).map(|v| [all[v], all[n + v]]).collect(),
        policy: BoundaryPolicy::Free,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mesh::area_functional;
    use crate::mesh::{build_disk_mesh, sample_surface, SurfaceId};
    use crate::reparam2d::{beltrami_coefficient, beltrami_residual, conformality_defect, energy_of_reparam};
    use num_complex::Complex64;

    #[test]
    fn zero_mu_is_identity() {
        let m = build_disk_mesh(3);
        let mu = BeltramiField::constant(Complex64::new(0.0, 0.0), m.num_triangles());
        let phi = linear_beltrami_solve(&m, &mu, BoundaryPolicy::three_point(&m)).unwrap();
        assert!(phi.max_displacement(&m) < 1e-8);
    }

    #[test]
    fn fixed_boundary_identity_for_zero_mu() {
        let m = build_disk_mesh(3);
        let mu = BeltramiField::constant(Complex64::new(0.0, 0.0), m.num_triangles());
        let phi = linear_beltrami_solve(&m, &mu, BoundaryPolicy::FixedBoundary).unwrap();
        assert!(phi.max_displacement(&m) < 1e-8);
    }

    #[test]
    fn free_policy_recovers_affine_solution() {
        let m = build_disk_mesh(3);
        let s = sample_surface(&m, |x| SurfaceId::Stretch(2.0, 1.0).eval(x)).unwrap();
        let mu = beltrami_coefficient(&s).unwrap();
        let phi = linear_beltrami_solve(&m, &mu, BoundaryPolicy::Free).unwrap();
        assert!(beltrami_residual(&s, &mu, &phi) < 1e-6);
        assert!(conformality_defect(&s, &phi) < 1e-6);
    }

    #[test]
    fn three_point_straightens_stretch() {
        let mut defects = Vec::new();
        for level in [3, 4] {
            let m = build_disk_mesh(level);
            let s = sample_surface(&m, |x| SurfaceId::Stretch(2.0, 1.0).eval(x)).unwrap();
            let mu = beltrami_coefficient(&s).unwrap();
            let phi = linear_beltrami_solve(&m, &mu, BoundaryPolicy::three_point(&m)).unwrap();
            for &k in &[0, m.boundary_loop.len() / 3, 2 * m.boundary_loop.len() / 3] {
                let v = m.boundary_loop[k];
                assert_eq!(phi.positions[v], m.vertices[v]);
            }
            let e = energy_of_reparam(&s, &phi).unwrap();
            let a = area_functional(&s);
            assert!(e >= a && (e - a) / a < 0.02, "level {level}: {e} vs {a}");
            defects.push(conformality_defect(&s, &phi));
        }
        // first order in the mesh size
        assert!(defects[1] < 0.6 * defects[0], "{defects:?}");
        assert!(defects[1] < 0.1 * 0.3 * 2f64.sqrt() * 2.0);
    }

    #[test]
    fn near_unit_mu_rejected() {
        let m = build_disk_mesh(1);
        let mu = BeltramiField::constant(Complex64::new(0.9999999, 0.0), m.num_triangles());
        assert!(matches!(
            linear_beltrami_solve(&m, &mu, BoundaryPolicy::FixedBoundary),
            Err(HullError::Domain(_))
        ));
    }
}
