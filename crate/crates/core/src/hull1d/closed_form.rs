//! Inversion of the `g`-function and the normalization condition for `c`.

use std::cell::RefCell;

use crate::densities::{default_probe_grid, g_function, g_unchecked, radial_convexity_probe, Density};
use crate::error::{HullError, Result};
use crate::numeric::roots::{bracketed_root, expand_positive_bracket, expand_real_bracket};

use super::curve::SampledCurve;

const MAX_DOUBLINGS: usize = 200;

/// Solves `g(r, x) = c` for `r > 0`, assuming `W` is radially strictly convex
/// at `x` (checked by a probe).
pub fn invert_g(w: &dyn Density, c: f64, x: &[f64]) -> Result<f64> {
    g_function(w, 1.0, x)?;
    let rep = radial_convexity_probe(w, x, &default_probe_grid(x))?;
    if !rep.is_strictly_convex {
        return Err(HullError::Convexity(format!(
            "section not strictly convex (min second difference {:.3e})",
            rep.min_second_difference
        )));
    }
    let (lo, hi) = expand_positive_bracket(|r| g_unchecked(w, r, x) - c, 1.0, MAX_DOUBLINGS)?;
    Ok(root_in(w, c, x, lo, hi))
}

fn root_in(w: &dyn Density, c: f64, x: &[f64], lo: f64, hi: f64) -> f64 {
    let tol = 1e-10 * (1.0 + c.abs());
    bracketed_root(|r| g_unchecked(w, r, x) - c, lo, hi, tol, 400).0
}

/// `f(c, x)` without the convexity probe. Returns `+∞` when `c` lies above
/// the range of `g(·, x)` and `0` when below, so the normalization map stays
/// monotone outside the feasible range.
pub(crate) fn invert_g_unchecked(w: &dyn Density, c: f64, x: &[f64], r0: f64) -> f64 {
    let h = |r: f64| g_unchecked(w, r, x) - c;
    match expand_positive_bracket(h, r0, MAX_DOUBLINGS) {
        Ok((lo, hi)) => root_in(w, c, x, lo, hi),
        Err(_) => {
            if h(r0) < 0.0 {
                f64::INFINITY
            } else {
                0.0
            }
        }
    }
}

/// Slopes `f(c, u'_k)` for every cell, warm-started from `guess`.
pub(crate) fn slopes_for(w: &dyn Density, c: f64, u: &SampledCurve, guess: &mut [f64]) -> Vec<f64> {
    u.derivatives()
        .iter()
        .zip(guess.iter_mut())
        .map(|(x, r0)| {
            let start = if r0.is_finite() && *r0 > 0.0 { *r0 } else { 1.0 };
            let r = invert_g_unchecked(w, c, x, start);
            if r.is_finite() && r > 0.0 {
                *r0 = r;
            }
            r
        })
        .collect()
}

/// The constant `c` with `∫ f(c, u') dt = 1`.
pub fn solve_c(w: &dyn Density, u: &SampledCurve) -> Result<f64> {
    u.check_regular()?;
    let dt = u.dt();
    let g1: Vec<f64> = u
        .derivatives()
        .iter()
        .map(|x| g_function(w, 1.0, x))
        .collect::<Result<_>>()?;
    let c0 = g1.iter().sum::<f64>() / g1.len() as f64;
    let warm = RefCell::new(vec![1.0; u.cells()]);
    let resid = |c: f64| -> f64 {
        let mut guess = warm.borrow_mut();
        slopes_for(w, c, u, &mut guess).iter().sum::<f64>() * dt - 1.0
    };
    let step = 0.1 * c0.abs().max(1e-12);
    let (lo, hi) = expand_real_bracket(resid, c0, step, MAX_DOUBLINGS)
        .map_err(|e| HullError::InfeasibleNormalization(e.to_string()))?;
    let (c, r) = bracketed_root(resid, lo, hi, 1e-10, 400);
    if !(r.abs() < 1e-9) {
        return Err(HullError::InfeasibleNormalization(format!(
            "normalization residual {r:.3e} at c = {c:.6e}"
        )));
    }
    Ok(c)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::densities::Builtin;
    use crate::hull1d::curve::SmoothCurve;

    const E1: [f64; 3] = [1.0, 0.0, 0.0];

    #[test]
    fn invert_examples() {
        let q = Builtin::Quadratic;
        assert!((invert_g(&q, -0.5, &E1).unwrap() - 1.0).abs() < 1e-9);
        assert!((invert_g(&q, -2.0, &[2.0, 0.0, 0.0]).unwrap() - 1.0).abs() < 1e-9);
        let cube = Builtin::PPower(3.0);
        assert!((invert_g(&cube, -2.0 / 3.0, &E1).unwrap() - 1.0).abs() < 1e-9);
        let r = invert_g(&q, -0.37, &[0.2, 0.7, -0.1]).unwrap();
        assert!((g_function(&q, r, &[0.2, 0.7, -0.1]).unwrap() + 0.37).abs() < 1e-10 * 1.37);
    }

    #[test]
    fn invert_errors() {
        assert!(matches!(
            invert_g(&Builtin::Quadratic, 0.5, &E1),
            Err(HullError::NoRoot(_))
        ));
        assert!(matches!(
            invert_g(&Builtin::PPower(0.5), 0.1, &E1),
            Err(HullError::Convexity(_))
        ));
    }

    #[test]
    fn solve_c_examples() {
        let q = Builtin::Quadratic;
        let line2 = SmoothCurve::line(&[2.0, 0.0, 0.0]).sample(64).unwrap();
        assert!((solve_c(&q, &line2).unwrap() + 2.0).abs() < 1e-8);
        let line1 = SmoothCurve::line(&[1.0, 0.0, 0.0]).sample(64).unwrap();
        assert!((solve_c(&q, &line1).unwrap() + 0.5).abs() < 1e-9);
        let par = SmoothCurve::parabola();
        let c = solve_c(&q, &par.sample(2048).unwrap()).unwrap();
        let l = par.length();
        assert!((c + 0.5 * l * l).abs() < 1e-6);
    }
}
