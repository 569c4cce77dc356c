//! Direct minimization over discrete reparameterizations.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::densities::{g_unchecked, section, Density};
use crate::error::Result;

use super::curve::SampledCurve;
use super::Reparam1D;

/// Largest change of any log-slope in one step.
const MAX_LOG_STEP: f64 = 1.0;
/// Log-slopes are kept within this distance of the largest one.
const LOG_FLOOR: f64 = 300.0;

fn objective(w: &dyn Density, xs: &[Vec<f64>], s: &[f64], dt: f64) -> f64 {
    xs.iter()
        .zip(s)
        .map(|(x, &r)| section(w, x, r).unwrap_or(f64::INFINITY))
        .sum::<f64>()
        * dt
}

fn slopes_from_logs(z: &mut [f64], dt: f64) -> Vec<f64> {
    let zmax = z.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    for v in z.iter_mut() {
        *v = v.max(zmax - LOG_FLOOR);
    }
    let total: f64 = z.iter().map(|v| (v - zmax).exp()).sum::<f64>() * dt;
    let shift = zmax + total.ln();
    for v in z.iter_mut() {
        *v -= shift;
    }
    z.iter().map(|v| v.exp()).collect()
}

/// Minimizes `Σ s_k W(u'_k / s_k) Δt` over positive slopes with
/// `Σ s_k Δt = 1`.
///
/// Descent runs in log-slope coordinates along `-(g_k - ḡ)` (`ḡ` the
/// `s Δt`-weighted mean of `g(s_k, u'_k)`), clipped per coordinate, with
/// Armijo backtracking and renormalization after every step. The start is a
/// seeded random perturbation of constant speed, which breaks the symmetry
/// of already uniform curves.
pub fn direct_minimize_reparam(w: &dyn Density, u: &SampledCurve, iters: usize, seed: u64) -> Result<(f64, Reparam1D)> {
    u.check_regular()?;
    let n = u.cells();
    let dt = u.dt();
    let xs = u.derivatives();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut z: Vec<f64> = (0..n).map(|_| 0.1 * rng.gen_range(-1.0..1.0)).collect();
    let mut s = slopes_from_logs(&mut z, dt);
    let mut val = objective(w, xs, &s, dt);
    let mut alpha = f64::NAN;
    let mut trial_z = vec![0.0; n];
    for _ in 0..iters {
        let g: Vec<f64> = xs.iter().zip(&s).map(|(x, &r)| g_unchecked(w, r, x)).collect();
        let gbar: f64 = g.iter().zip(&s).map(|(gk, sk)| gk * sk).sum::<f64>() * dt;
        let spread = g.iter().map(|gk| (gk - gbar).abs()).fold(0.0, f64::max);
        if !(spread > 1e-15 * (1.0 + gbar.abs())) {
            break;
        }
        if !alpha.is_finite() {
            alpha = 0.5 / spread;
        }
        let mut accepted = false;
        for _ in 0..80 {
            let mut slope = 0.0;
            for k in 0..n {
                let dz = (-alpha * (g[k] - gbar)).clamp(-MAX_LOG_STEP, MAX_LOG_STEP);
                slope += s[k] * dt * (g[k] - gbar) * dz;
                trial_z[k] = z[k] + dz;
            }
            let mut tz = trial_z.clone();
            let ts = slopes_from_logs(&mut tz, dt);
            let tv = objective(w, xs, &ts, dt);
            if tv <= val + 1e-4 * slope && tv.is_finite() {
                z = tz;
                s = ts;
                val = tv;
                accepted = true;
                alpha *= 2.0;
                break;
            }
            alpha *= 0.5;
        }
        if !accepted {
            break;
        }
    }
    Ok((val, Reparam1D::from_slopes(s, dt)))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::densities::Builtin;
    use crate::hull1d::curve::SmoothCurve;

    #[test]
    fn constant_speed_line_is_optimal() {
        let u = SmoothCurve::line(&[1.0, 1.0, 0.0]).sample(64).unwrap();
        let (v, phi) = direct_minimize_reparam(&Builtin::Quadratic, &u, 500, 3).unwrap();
        assert!((v - 1.0).abs() < 1e-9);
        assert!(phi.slopes().iter().all(|s| (s - 1.0).abs() < 1e-4));
    }

    #[test]
    fn parabola_matches_closed_form() {
        let par = SmoothCurve::parabola();
        let l = par.length();
        let u = par.sample(256).unwrap();
        let (v, _) = direct_minimize_reparam(&Builtin::Quadratic, &u, 2000, 1).unwrap();
        assert!((v - 0.5 * l * l).abs() < 1e-3, "{v}");
    }

    #[test]
    fn sub_linear_power_drifts_to_zero() {
        let u = SmoothCurve::line(&[1.0, 0.0, 0.0]).sample(256).unwrap();
        let w = Builtin::Power(0.5);
        let (v100, _) = direct_minimize_reparam(&w, &u, 20, 5).unwrap();
        let (v1000, _) = direct_minimize_reparam(&w, &u, 1000, 5).unwrap();
        assert!(v1000 < v100 && v1000 < 0.2, "{v100} {v1000}");
    }
}
