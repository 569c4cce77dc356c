//! Bracketed root finding for monotone scalar maps.

use crate::error::{HullError, Result};

/// Expands a bracket geometrically in `log r` from `r0` until `f` changes
/// sign, for a strictly increasing `f` on `(0, inf)`.
///
/// Returns `(lo, hi)` with `f(lo) <= 0 <= f(hi)`.
pub fn expand_positive_bracket<F>(f: F, r0: f64, max_doublings: usize) -> Result<(f64, f64)>
where
    F: Fn(f64) -> f64,
{
    let mut lo = r0;
    let mut hi = r0;
    let mut flo = f(lo);
    let mut fhi = flo;
    for _ in 0..max_doublings {
        if flo <= 0.0 && fhi >= 0.0 {
            return Ok((lo, hi));
        }
        if flo > 0.0 {
            hi = lo;
            fhi = flo;
            lo *= 0.5;
            flo = f(lo);
        } else {
            lo = hi;
            flo = fhi;
            hi *= 2.0;
            fhi = f(hi);
        }
        if !flo.is_finite() && !fhi.is_finite() {
            break;
        }
    }
    if flo <= 0.0 && fhi >= 0.0 {
        return Ok((lo, hi));
    }
    Err(HullError::NoRoot(format!(
        "no sign change after {max_doublings} doublings (f({lo:.3e}) = {flo:.3e}, f({hi:.3e}) = {fhi:.3e})"
    )))
}

/// Same as [`expand_positive_bracket`] on the whole real line, stepping
/// additively with doubling step.
pub fn expand_real_bracket<F>(f: F, x0: f64, step0: f64, max_doublings: usize) -> Result<(f64, f64)>
where
    F: Fn(f64) -> f64,
{
    let mut lo = x0;
    let mut hi = x0;
    let mut flo = f(lo);
    let mut fhi = flo;
    let mut step = step0.abs().max(f64::MIN_POSITIVE);
    for _ in 0..max_doublings {
        if flo <= 0.0 && fhi >= 0.0 {
            return Ok((lo, hi));
        }
        if flo > 0.0 {
            hi = lo;
            fhi = flo;
            lo -= step;
            flo = f(lo);
        } else {
            lo = hi;
            flo = fhi;
            hi += step;
            fhi = f(hi);
        }
        step *= 2.0;
    }
    if flo <= 0.0 && fhi >= 0.0 {
        return Ok((lo, hi));
    }
    Err(HullError::NoRoot(format!(
        "no sign change after {max_doublings} doublings"
    )))
}

/// Root of an increasing `f` inside `[lo, hi]` with `f(lo) <= 0 <= f(hi)`.
///
/// Illinois-modified regula falsi; every third step is a plain bisection
/// so the bracket always shrinks at least geometrically. Stops when
/// `|f| <= ftol` or the bracket collapses to machine precision.
pub fn bracketed_root<F>(f: F, mut lo: f64, mut hi: f64, ftol: f64, max_iter: usize) -> (f64, f64)
where
    F: Fn(f64) -> f64,
{
    let mut flo = f(lo);
    let mut fhi = f(hi);
    if flo.abs() <= ftol {
        return (lo, flo);
    }
    if fhi.abs() <= ftol {
        return (hi, fhi);
    }
    let mut side = 0i8;
    let mut best = if flo.abs() < fhi.abs() { (lo, flo) } else { (hi, fhi) };
    for it in 0..max_iter {
        let x = if it % 3 == 2 || !flo.is_finite() || !fhi.is_finite() {
            0.5 * (lo + hi)
        } else {
            let x = (lo * fhi - hi * flo) / (fhi - flo);
            if x > lo && x < hi {
                x
            } else {
                0.5 * (lo + hi)
            }
        };
        let fx = f(x);
        if fx.abs() < best.1.abs() {
            best = (x, fx);
        }
        if fx.abs() <= ftol {
            return (x, fx);
        }
        if fx < 0.0 {
            lo = x;
            flo = fx;
            if side == -1 {
                fhi *= 0.5;
            }
            side = -1;
        } else {
            hi = x;
            fhi = fx;
            if side == 1 {
                flo *= 0.5;
            }
            side = 1;
        }
        if hi - lo <= 4.0 * f64::EPSILON * lo.abs().max(hi.abs()).max(f64::MIN_POSITIVE) {
            break;
        }
    }
    best
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn finds_sqrt_two() {
        let f = |x: f64| x * x - 2.0;
        let (lo, hi) = expand_positive_bracket(f, 1.0, 200).unwrap();
        let (x, fx) = bracketed_root(f, lo, hi, 1e-14, 200);
        assert!((x - 2f64.sqrt()).abs() < 1e-12, "{x} {fx}");
    }

    #[test]
    fn positive_bracket_expands_down() {
        let f = |r: f64| r - 1e-9;
        let (lo, hi) = expand_positive_bracket(f, 1.0, 200).unwrap();
        assert!(lo <= 1e-9 && hi >= 1e-9);
    }

    #[test]
    fn no_root_reported() {
        let f = |r: f64| -1.0 / (r * r) - 1.0;
        assert!(matches!(
            expand_positive_bracket(f, 1.0, 200),
            Err(HullError::NoRoot(_))
        ));
    }

    #[test]
    fn real_bracket_negative_side() {
        let f = |c: f64| c + 1234.5;
        let (lo, hi) = expand_real_bracket(f, 0.0, 1.0, 200).unwrap();
        let (x, _) = bracketed_root(f, lo, hi, 1e-12, 300);
        assert!((x + 1234.5).abs() < 1e-9);
    }
}
