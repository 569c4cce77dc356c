//! Energies along the reparameterization sequence `ψ_j(t) = t^{j+1}`.

use crate::densities::{Density, MatRef};
use crate::numeric::quadrature::GaussLegendre;

use super::curve::SampledCurve;

/// Dyadic subintervals used on the first cell, where the integrand is
/// singular for sub-linear densities.
const GRADING_LEVELS: usize = 60;

/// `I(u ∘ ψ)` for `ψ(t) = t^{j+1}`, with `j` real and positive.
///
/// Substituting `s = ψ(t)` gives `∫_0^1 W(q(s) u'(s)) / q(s) ds` with
/// `q(s) = ψ'(ψ^{-1}(s)) = (j+1) s^{j/(j+1)}`. Each cell uses 8-point
/// Gauss–Legendre with `u'` constant on the cell; the first cell is
/// split geometrically towards `s = 0`.
pub fn probe_value(w: &dyn Density, u: &SampledCurve, j: f64) -> f64 {
    let gl = GaussLegendre::new(8);
    let dt = u.dt();
    let a = j + 1.0;
    let expo = j / (j + 1.0);
    let mut buf = vec![0.0; u.dim()];
    let mut integrand = |s: f64, x: &[f64]| -> f64 {
        let q = a * s.powf(expo);
        for (b, v) in buf.iter_mut().zip(x) {
            *b = q * v;
        }
        w.eval(MatRef::vector(&buf)) / q
    };
    let mut total = 0.0;
    for (k, x) in u.derivatives().iter().enumerate() {
        let lo = k as f64 * dt;
        let hi = lo + dt;
        if k == 0 {
            let mut right = hi;
            for _ in 0..GRADING_LEVELS {
                let left = 0.5 * right;
                total += gl.integrate(left, right, |s| integrand(s, x));
                right = left;
            }
            total += gl.integrate(0.0, right, |s| integrand(s, x));
        } else {
            total += gl.integrate(lo, hi, |s| integrand(s, x));
        }
    }
    total
}

/// `I(u ∘ ψ_j)` for `j = 1..=j_max`.
pub fn triviality_probe(w: &dyn Density, u: &SampledCurve, j_max: usize) -> Vec<f64> {
    (1..=j_max).map(|j| probe_value(w, u, j as f64)).collect()
}

/// Smallest probe value over `j = 1..=j_max` and the far sequence
/// `j = 2^k`, `k <= 30`.
pub(crate) fn probe_minimum(w: &dyn Density, u: &SampledCurve, probe: &[f64]) -> f64 {
    let far = (1..=30).map(|k| probe_value(w, u, 2f64.powi(k)));
    probe.iter().copied().chain(far).fold(f64::INFINITY, f64::min)
}
