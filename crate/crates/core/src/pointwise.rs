//! The pointwise invariant integrand `W_i(F) = inf_{det X > 0} det(X) W(F X^{-1})`.

use nalgebra::DMatrix;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::densities::{wbar, Density, MatRef, MatrixF, MatrixX};
use crate::error::{HullError, Result};
use crate::numeric::nelder_mead::{minimize, NelderMeadOptions};

pub use crate::densities::GramMatrix;

/// Perturbation radii cycled through by successive starts.
const START_RADII: [f64; 3] = [0.1, 0.5, 1.0];
/// Bound on the log-scale coordinate for non-homogeneous densities.
const LOG_SCALE_BOUND: f64 = 20.0;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PointwiseHullResult {
    /// Best value found; meaningless when `unbounded_below` is set.
    pub value: f64,
    /// Row-major entries of the best `X`.
    #[serde(serialize_with = "serialize_x")]
    pub argmin_x: MatrixX,
    pub n_starts: usize,
    /// Max minus min over the converged starts.
    pub spread: f64,
    pub unbounded_below: bool,
}

fn serialize_x<S: serde::Serializer>(x: &MatrixX, s: S) -> std::result::Result<S::Ok, S::Error> {
    let m = x.matrix();
    let rows: Vec<Vec<f64>> = (0..m.nrows()).map(|i| m.row(i).iter().copied().collect()).collect();
    rows.serialize(s)
}

fn check_regular(f: &MatrixF) -> Result<()> {
    let n = f.cols();
    if !(1..=3).contains(&n) {
        return Err(HullError::DimensionMismatch {
            expected: "N in {1, 2, 3}".into(),
            got: format!("N = {n}"),
        });
    }
    let rank = f.rank();
    if rank < n || f.rows() < n {
        return Err(HullError::Rank { rank, cols: n });
    }
    Ok(())
}

fn normalize_det(x: &mut [f64], n: usize) {
    let m = DMatrix::from_column_slice(n, n, x);
    let d = crate::densities::det(&m);
    if d > 0.0 {
        let s = d.powf(-1.0 / n as f64);
        x.iter_mut().for_each(|v| *v *= s);
    }
}

/// Multi-start Nelder–Mead over `X` with `det X > 0`.
///
/// Degree-`N` homogeneous densities are searched on the slice `det X = 1`;
/// others get an extra log-scale coordinate in `[-20, 20]`. Starts run in
/// parallel and are reduced in start order, so the result depends only on
/// `seed`.
pub fn pointwise_hull(w: &dyn Density, f: &MatrixF, starts: usize, seed: u64) -> Result<PointwiseHullResult> {
    check_regular(f)?;
    let n = f.cols();
    let nn = n * n;
    let starts = starts.max(1);
    let homogeneous = w.homogeneity(n).is_some_and(|d| (d - n as f64).abs() < 1e-12);
    let dim = if homogeneous { nn } else { nn + 1 };

    let objective = |p: &[f64]| -> f64 {
        let mut m = DMatrix::from_column_slice(n, n, &p[..nn]);
        if !homogeneous {
            m *= p[nn].exp();
        }
        wbar(w, &MatrixX::new(m), f)
            .map(|v| v.to_f64())
            .unwrap_or(f64::INFINITY)
    };
    let project = |p: &mut [f64]| {
        normalize_det(&mut p[..nn], n);
        if !homogeneous {
            p[nn] = p[nn].clamp(-LOG_SCALE_BOUND, LOG_SCALE_BOUND);
        }
    };
    let opts = NelderMeadOptions::default();

    let runs: Vec<(Vec<f64>, f64, bool)> = (0..starts)
        .into_par_iter()
        .map(|i| {
            let mut x0 = vec![0.0; dim];
            for k in 0..n {
                x0[k * n + k] = 1.0;
            }
            if i > 0 {
                let mut rng = ChaCha8Rng::seed_from_u64(seed.wrapping_add(i as u64));
                let r = START_RADII[(i - 1) % START_RADII.len()];
                for v in x0[..nn].iter_mut() {
                    *v += rng.gen_range(-r..r);
                }
                if !homogeneous {
                    x0[nn] = rng.gen_range(-r..r);
                }
            }
            let res = minimize(objective, project, &x0, &opts);
            (res.x, res.value, res.converged)
        })
        .collect();

    let mut best = 0;
    for (i, r) in runs.iter().enumerate() {
        if r.1 < runs[best].1 {
            best = i;
        }
    }
    let finite: Vec<f64> = runs.iter().filter(|r| r.2 && r.1.is_finite()).map(|r| r.1).collect();
    let spread = if finite.is_empty() {
        f64::INFINITY
    } else {
        finite.iter().copied().fold(f64::NEG_INFINITY, f64::max) - finite.iter().copied().fold(f64::INFINITY, f64::min)
    };
    let (p, value, _) = &runs[best];
    let mut xm = DMatrix::from_column_slice(n, n, &p[..nn]);
    let mut unbounded = !value.is_finite();
    if !homogeneous {
        unbounded |= p[nn].abs() > LOG_SCALE_BOUND - 0.5;
        xm *= p[nn].exp();
    }
    let sv = xm.clone().svd(false, false).singular_values;
    let smax = sv.iter().copied().fold(0.0, f64::max);
    let smin = sv.iter().copied().fold(f64::INFINITY, f64::min);
    unbounded |= !(smin > 0.0) || smax / smin > 1e8;
    Ok(PointwiseHullResult {
        value: *value,
        argmin_x: MatrixX::new(xm),
        n_starts: starts,
        spread,
        unbounded_below: unbounded,
    })
}

/// `sqrt(det(F^T F))`, zero for rank-deficient `F`.
pub fn volume_density(f: &MatrixF) -> f64 {
    f.gram().det().max(0.0).sqrt()
}

/// The minimizer of `det(X) W^N(F X^{-1})` with `det X = 1`: its adjugate
/// is the multiple of `(F^T F)^{-1/2}` with unit determinant.
pub fn optimal_x_closed_form(f: &MatrixF) -> Result<MatrixX> {
    check_regular(f)?;
    let n = f.cols();
    if n < 2 {
        return Err(HullError::DimensionMismatch {
            expected: "N in {2, 3}".into(),
            got: format!("N = {n}"),
        });
    }
    let y = f.gram().inverse_sqrt()?;
    let k = crate::densities::det(&y).powf(-1.0 / n as f64);
    let adj = y * k;
    let x = if n == 2 {
        // the cofactor map is an involution on 2x2 matrices
        crate::densities::cofactor(&adj)
    } else {
        // adj X = det(X) X^{-T} with det X = 1
        adj.clone()
            .try_inverse()
            .ok_or(HullError::Conditioning(f64::INFINITY))?
            .transpose()
    };
    Ok(MatrixX::new(x))
}

/// Relative Frobenius norm of
/// `det(X)^2 |A|^N C - N |A|^{N-2} C C G C^T`, with `C = adj X`,
/// `A = F X^{-1}` and `G = F^T F`; it vanishes at critical points of
/// `X -> det(X) W^N(F X^{-1})`.
pub fn criticality_residual(f: &MatrixF, x: &MatrixX) -> f64 {
    let n = x.dim() as i32;
    let d = x.det();
    if !(d > 0.0) {
        return f64::INFINITY;
    }
    let c = x.adj();
    let a = &f.0 * c.transpose() / d;
    let a2 = a.norm_squared();
    let an = a2.powf(n as f64 / 2.0);
    let g = &f.gram().0;
    let t1 = c * (d * d * an);
    let t2 = c * c * g * c.transpose() * (n as f64 * a2.powf((n - 2) as f64 / 2.0));
    (&t1 - t2).norm() / t1.norm()
}

/// `W(F)` for convenience in reports.
pub fn density_at(w: &dyn Density, f: &MatrixF) -> f64 {
    w.eval(MatRef::new(f.0.as_slice(), f.rows(), f.cols()))
}
