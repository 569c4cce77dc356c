//! Algebraic kernels built on a density: sections, the `g`-function, the
//! change-of-variables integrand `W̄`, and the radial convexity probe.

use serde::{Deserialize, Serialize};

use super::catalogue::Density;
use super::matrix::{MatRef, MatrixF, MatrixX};
use crate::error::{HullError, Result};

/// Vectors shorter than this (relative to the caller's scale) are treated
/// as degenerate.
pub const EPS_REG: f64 = 1e-8;

/// A real value that may be `+∞`, kept as an explicit tag.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum Extended {
    Finite(f64),
    PlusInfinity,
}

impl Extended {
    pub fn is_finite(&self) -> bool {
        matches!(self, Extended::Finite(_))
    }

    pub fn finite(&self) -> Option<f64> {
        match *self {
            Extended::Finite(v) => Some(v),
            Extended::PlusInfinity => None,
        }
    }

    /// Collapses to `f64`, mapping the infinite tag to `f64::INFINITY`.
    pub fn to_f64(&self) -> f64 {
        self.finite().unwrap_or(f64::INFINITY)
    }
}

fn scaled_eval(w: &dyn Density, x: &[f64], r: f64) -> f64 {
    let mut stack = [0.0; 16];
    let mut heap;
    let buf: &mut [f64] = if x.len() <= 16 {
        &mut stack[..x.len()]
    } else {
        heap = vec![0.0; x.len()];
        &mut heap
    };
    for (b, v) in buf.iter_mut().zip(x) {
        *b = v / r;
    }
    w.eval(MatRef::vector(buf))
}

/// `r W(x / r)`.
pub fn section(w: &dyn Density, x: &[f64], r: f64) -> Result<f64> {
    if !(r > 0.0) || !r.is_finite() {
        return Err(HullError::Domain(format!("section needs r > 0, got {r}")));
    }
    Ok(r * scaled_eval(w, x, r))
}

/// `W(x/r) - (1/r) ∇W(x/r)·x`, the derivative of the section in `r`.
pub fn g_function(w: &dyn Density, r: f64, x: &[f64]) -> Result<f64> {
    if !(r > 0.0) || !r.is_finite() {
        return Err(HullError::Domain(format!("g needs r > 0, got {r}")));
    }
    let nx = x.iter().map(|v| v * v).sum::<f64>().sqrt();
    if nx < EPS_REG {
        return Err(HullError::Regularity(format!("|x| = {nx:e} below {EPS_REG:e}")));
    }
    Ok(g_unchecked(w, r, x))
}

/// [`g_function`] without argument checks, for hot loops whose inputs were
/// validated upstream.
pub(crate) fn g_unchecked(w: &dyn Density, r: f64, x: &[f64]) -> f64 {
    let mut stack = [0.0; 16];
    let mut heap;
    let y: &mut [f64] = if x.len() <= 16 {
        &mut stack[..x.len()]
    } else {
        heap = vec![0.0; x.len()];
        &mut heap
    };
    for (b, v) in y.iter_mut().zip(x) {
        *b = v / r;
    }
    let yv = MatRef::vector(y);
    let xv = MatRef::vector(x);
    w.eval(yv) - w.directional(yv, xv) / r
}

/// `det(X) W(F X^{-1})`, evaluated as `det(X) W(F adj(X)^T / det X)`;
/// `+∞` when `det X <= 0`.
pub fn wbar(w: &dyn Density, x: &MatrixX, f: &MatrixF) -> Result<Extended> {
    if x.dim() != f.cols() {
        return Err(HullError::DimensionMismatch {
            expected: format!("{}x{}", f.cols(), f.cols()),
            got: format!("{}x{}", x.dim(), x.dim()),
        });
    }
    let d = x.det();
    if !(d > 0.0) {
        return Ok(Extended::PlusInfinity);
    }
    let a = &f.0 * x.adj().transpose() / d;
    let v = d * w.eval(MatRef::new(a.as_slice(), a.nrows(), a.ncols()));
    Ok(if v.is_finite() {
        Extended::Finite(v)
    } else {
        Extended::PlusInfinity
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ConvexityReport {
    pub is_strictly_convex: bool,
    pub min_second_difference: f64,
}

/// Second divided differences of `r -> section(W, x, r)` on a strictly
/// increasing positive grid.
pub fn radial_convexity_probe(w: &dyn Density, x: &[f64], grid: &[f64]) -> Result<ConvexityReport> {
    if grid.len() < 3 {
        return Err(HullError::Input("convexity probe needs at least 3 grid points".into()));
    }
    if grid[0] <= 0.0 || grid.windows(2).any(|p| p[1] <= p[0]) {
        return Err(HullError::Input("grid must be positive and strictly increasing".into()));
    }
    let vals: Vec<f64> = grid.iter().map(|&r| r * scaled_eval(w, x, r)).collect();
    let mut min_dd = f64::INFINITY;
    let mut strict = true;
    for k in 1..grid.len() - 1 {
        let (r0, r1, r2) = (grid[k - 1], grid[k], grid[k + 1]);
        let (f0, f1, f2) = (vals[k - 1], vals[k], vals[k + 1]);
        let d01 = (f1 - f0) / (r1 - r0);
        let d12 = (f2 - f1) / (r2 - r1);
        let dd = 2.0 * (d12 - d01) / (r2 - r0);
        // roundoff floor of the divided difference
        let h = (r1 - r0).min(r2 - r1);
        let tol = 1e-8 * (f0.abs() + f1.abs() + f2.abs()) / (h * h);
        if !(dd > tol) {
            strict = false;
        }
        min_dd = min_dd.min(dd);
    }
    Ok(ConvexityReport {
        is_strictly_convex: strict,
        min_second_difference: min_dd,
    })
}

/// Logarithmic probe grid `|x| * 10^[-2, 2]` with 41 points.
pub fn default_probe_grid(x: &[f64]) -> Vec<f64> {
    let nx = x.iter().map(|v| v * v).sum::<f64>().sqrt().max(EPS_REG);
    (0..41).map(|k| nx * 10f64.powf(-2.0 + 0.1 * k as f64)).collect()
}

/// `|F X|^2 / (2t)`, jointly convex in `(t, X)` for `t > 0`.
pub fn perspective_quadratic(f: &MatrixF, t: f64, x: &nalgebra::DMatrix<f64>) -> f64 {
    if !(t > 0.0) {
        return f64::INFINITY;
    }
    (&f.0 * x).norm_squared() / (2.0 * t)
}

/// Checks `W(sF) = s^d W(F)` for the declared degree `d`; returns the worst
/// relative error over `scales`.
pub fn homogeneity_error(w: &dyn Density, f: &MatrixF, scales: &[f64]) -> Option<f64> {
    let d = w.homogeneity(f.cols())?;
    let base = w.eval(f.view());
    let mut worst: f64 = 0.0;
    for &s in scales {
        let sf = MatrixF(&f.0 * s);
        let v = w.eval(sf.view());
        let expect = s.powf(d) * base;
        worst = worst.max((v - expect).abs() / expect.abs().max(f64::MIN_POSITIVE));
    }
    Some(worst)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::densities::catalogue::Builtin;
    use nalgebra::DMatrix;

    const E1: [f64; 3] = [1.0, 0.0, 0.0];

    #[test]
    fn section_examples() {
        let q = Builtin::Quadratic;
        assert_eq!(section(&q, &E1, 1.0).unwrap(), 0.5);
        assert_eq!(section(&q, &E1, 2.0).unwrap(), 0.25);
        let x = [0.3, -2.0, 1.1];
        let n = Builtin::Norm;
        let len = section(&n, &x, 1.0).unwrap();
        for r in [0.01, 0.7, 3.0, 1e3] {
            assert!((section(&n, &x, r).unwrap() - len).abs() < 1e-13);
        }
        assert!(matches!(section(&q, &E1, 0.0), Err(HullError::Domain(_))));
        assert!(matches!(section(&q, &E1, -1.0), Err(HullError::Domain(_))));
    }

    #[test]
    fn g_examples() {
        assert!((g_function(&Builtin::Quadratic, 1.0, &E1).unwrap() + 0.5).abs() < 1e-15);
        // symbolic: g = -(2/3)|x|^3 / r^3
        assert!((g_function(&Builtin::PPower(3.0), 1.0, &E1).unwrap() + 2.0 / 3.0).abs() < 1e-14);
        let x = [0.4, 1.3, -0.2];
        for r in [0.1, 1.0, 5.0] {
            assert!(g_function(&Builtin::Norm, r, &x).unwrap().abs() < 1e-14);
        }
        assert!(matches!(
            g_function(&Builtin::Quadratic, 1.0, &[0.0, 0.0, 0.0]),
            Err(HullError::Regularity(_))
        ));
    }

    #[test]
    fn wbar_examples() {
        let f = MatrixF::parse("1,0;0,1;0,0").unwrap();
        let q = Builtin::Quadratic;
        assert_eq!(wbar(&q, &MatrixX::identity(2), &f).unwrap(), Extended::Finite(1.0));
        let x = MatrixX::new(DMatrix::from_row_slice(2, 2, &[2.0, 0.0, 0.0, 0.5]));
        let v = wbar(&q, &x, &f).unwrap().to_f64();
        assert!((v - 2.125).abs() < 1e-14);
        let x3 = x.scaled(3.0);
        let v3 = wbar(&Builtin::Wn, &x3, &f).unwrap().to_f64();
        let v1 = wbar(&Builtin::Wn, &x, &f).unwrap().to_f64();
        assert!((v3 - v1).abs() < 1e-13);
        let neg = MatrixX::new(DMatrix::from_row_slice(2, 2, &[-1.0, 0.0, 0.0, 1.0]));
        assert_eq!(wbar(&q, &neg, &f).unwrap(), Extended::PlusInfinity);
    }

    #[test]
    fn probe_examples() {
        let grid = default_probe_grid(&E1);
        assert!(
            radial_convexity_probe(&Builtin::Quadratic, &E1, &grid)
                .unwrap()
                .is_strictly_convex
        );
        assert!(
            !radial_convexity_probe(&Builtin::Norm, &E1, &grid)
                .unwrap()
                .is_strictly_convex
        );
        let half = Builtin::PPower(0.5);
        let rep = radial_convexity_probe(&half, &E1, &grid).unwrap();
        assert!(!rep.is_strictly_convex && rep.min_second_difference < 0.0);
    }
}
