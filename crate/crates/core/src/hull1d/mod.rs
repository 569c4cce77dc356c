//! The invariant hull of `∫_0^1 W(u'(t)) dt` over reparameterizations of
//! `[0, 1]`.
//!
//! For radially strictly convex `W` the optimal slope is `φ' = f(c, u')`,
//! where `f(c, ·)` inverts `g(·, x) = d/dr [r W(x/r)]` and `c` is fixed by
//! `∫ f(c, u') dt = 1`. Degree-one densities are already invariant, and
//! densities with concave sections have a trivial hull.

mod closed_form;
mod curve;
mod direct;
mod probe;

use serde::Serialize;

use crate::densities::{default_probe_grid, g_function, radial_convexity_probe, section, Density, MatRef};
use crate::error::Result;

pub use closed_form::{invert_g, solve_c};
pub use curve::{evaluate_functional_1d, SampledCurve, SmoothCurve};
pub use direct::direct_minimize_reparam;
pub use probe::{probe_value, triviality_probe};

/// Default seed for the randomized parts of the 1D engine.
pub const DEFAULT_SEED: u64 = 0x5eed;

/// Discrete reparameterization: positive cell slopes `s_k` with
/// `Σ s_k Δt = 1`, and the cumulative values `φ_k`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Reparam1D {
    slopes: Vec<f64>,
    values: Vec<f64>,
}

impl Reparam1D {
    /// Builds from slopes, rescaling the cumulative values so `φ(1) = 1`.
    pub fn from_slopes(slopes: Vec<f64>, dt: f64) -> Self {
        let mut values = Vec::with_capacity(slopes.len() + 1);
        values.push(0.0);
        let mut acc = 0.0;
        for s in &slopes {
            acc += s * dt;
            values.push(acc);
        }
        let total = acc;
        for v in values.iter_mut() {
            *v /= total;
        }
        Self { slopes, values }
    }

    pub fn slopes(&self) -> &[f64] {
        &self.slopes
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    /// `|Σ s_k Δt - 1|`.
    pub fn normalization_residual(&self) -> f64 {
        let dt = 1.0 / self.slopes.len() as f64;
        (self.slopes.iter().sum::<f64>() * dt - 1.0).abs()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum HullStatus {
    ClosedForm,
    DegreeOneInvariant,
    TrivialZero,
    OracleOnly,
}

impl HullStatus {
    pub fn as_str(&self) -> &'static str {
        match self {
            HullStatus::ClosedForm => "closed_form",
            HullStatus::DegreeOneInvariant => "degree_one_invariant",
            HullStatus::TrivialZero => "trivial_zero",
            HullStatus::OracleOnly => "oracle_only",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct HullResult1D {
    /// `I_i(u)`.
    pub value: f64,
    /// `I(u)`.
    pub functional: f64,
    /// The constant of the normalization condition (closed form only).
    pub c: Option<f64>,
    pub slopes: Reparam1D,
    pub status: HullStatus,
    /// Standard deviation of `g(s_k, u'_k)` over cells.
    pub first_integral_stdev: Option<f64>,
    /// `I(u ∘ ψ_j)` for `j = 1..` when the closed form is unavailable.
    pub probe: Option<Vec<f64>>,
    /// Direct-minimizer value when it was run.
    pub direct_value: Option<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Hull1dOptions {
    /// Iterations of the direct minimizer on non-convex densities.
    pub direct_iters: usize,
    pub seed: u64,
    pub probe_j_max: usize,
}

impl Default for Hull1dOptions {
    fn default() -> Self {
        Self {
            direct_iters: 2000,
            seed: DEFAULT_SEED,
            probe_j_max: 50,
        }
    }
}

/// [`invariant_hull_1d_with`] using default options.
pub fn invariant_hull_1d(w: &dyn Density, u: &SampledCurve) -> Result<HullResult1D> {
    invariant_hull_1d_with(w, u, &Hull1dOptions::default())
}

pub fn invariant_hull_1d_with(w: &dyn Density, u: &SampledCurve, opts: &Hull1dOptions) -> Result<HullResult1D> {
    let functional = evaluate_functional_1d(w, u)?;
    let dt = u.dt();
    let xs = u.derivatives();

    let degree_one = xs.iter().try_fold(true, |acc, x| -> Result<bool> {
        let g = g_function(w, 1.0, x)?;
        Ok(acc && g.abs() < 1e-10 * (1.0 + w.eval(MatRef::vector(x)).abs()))
    })?;
    if degree_one {
        return Ok(HullResult1D {
            value: functional,
            functional,
            c: None,
            slopes: Reparam1D::from_slopes(vec![1.0; u.cells()], dt),
            status: HullStatus::DegreeOneInvariant,
            first_integral_stdev: Some(0.0),
            probe: None,
            direct_value: None,
        });
    }

    let mut convex = true;
    for x in xs {
        if !radial_convexity_probe(w, x, &default_probe_grid(x))?.is_strictly_convex {
            convex = false;
            break;
        }
    }

    if !convex {
        let (direct, phi) = direct_minimize_reparam(w, u, opts.direct_iters, opts.seed)?;
        let probe = triviality_probe(w, u, opts.probe_j_max);
        let pmin = probe::probe_minimum(w, u, &probe);
        let trivial = pmin < 1e-3 * functional.abs();
        let value = direct.min(pmin).min(functional);
        return Ok(HullResult1D {
            value,
            functional,
            c: None,
            first_integral_stdev: Some(first_integral_stdev(w, u, phi.slopes())),
            slopes: phi,
            status: if trivial {
                HullStatus::TrivialZero
            } else {
                HullStatus::OracleOnly
            },
            probe: Some(probe),
            direct_value: Some(direct),
        });
    }

    let c = solve_c(w, u)?;
    let mut guess = vec![1.0; u.cells()];
    let slopes = closed_form::slopes_for(w, c, u, &mut guess);
    let value = xs
        .iter()
        .zip(&slopes)
        .map(|(x, &s)| section(w, x, s))
        .sum::<Result<f64>>()?
        * dt;
    Ok(HullResult1D {
        value,
        functional,
        c: Some(c),
        first_integral_stdev: Some(first_integral_stdev(w, u, &slopes)),
        slopes: Reparam1D::from_slopes(slopes, dt),
        status: HullStatus::ClosedForm,
        probe: None,
        direct_value: None,
    })
}

/// Standard deviation over cells of `g(s_k, u'_k)`; zero at a critical point.
pub fn first_integral_stdev(w: &dyn Density, u: &SampledCurve, slopes: &[f64]) -> f64 {
    let g: Vec<f64> = u
        .derivatives()
        .iter()
        .zip(slopes)
        .map(|(x, &s)| crate::densities::g_unchecked(w, s, x))
        .collect();
    let mean = g.iter().sum::<f64>() / g.len() as f64;
    (g.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / g.len() as f64).sqrt()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::densities::Builtin;

    #[test]
    fn parabola_quadratic() {
        let par = SmoothCurve::parabola();
        let l = par.length();
        assert!((l - 1.478943).abs() < 1e-6);
        let r = invariant_hull_1d(&Builtin::Quadratic, &par.sample(1024).unwrap()).unwrap();
        assert_eq!(r.status, HullStatus::ClosedForm);
        assert!((r.value - 0.5 * l * l).abs() < 1e-6);
        assert!((r.value - 1.09364).abs() < 1e-5);
        assert!(r.value <= r.functional);
        assert!(r.first_integral_stdev.unwrap() < 1e-6);
    }

    #[test]
    fn norm_is_invariant() {
        let u = SmoothCurve::helix().sample(200).unwrap();
        let r = invariant_hull_1d(&Builtin::Norm, &u).unwrap();
        assert_eq!(r.status, HullStatus::DegreeOneInvariant);
        assert_eq!(r.value, r.functional);
    }

    #[test]
    fn cubic_on_diagonal_line() {
        let u = SmoothCurve::line(&[1.0, 1.0, 0.0]).sample(128).unwrap();
        let r = invariant_hull_1d(&Builtin::PPower(3.0), &u).unwrap();
        assert!((r.value - 2f64.sqrt().powi(3) / 3.0).abs() < 1e-9);
        assert!((r.value - 0.942809).abs() < 1e-6);
    }

    #[test]
    fn half_power_is_trivial() {
        let u = SmoothCurve::line(&[1.0, 0.0, 0.0]).sample(128).unwrap();
        let opts = Hull1dOptions {
            direct_iters: 200,
            ..Default::default()
        };
        let r = invariant_hull_1d_with(&Builtin::PPower(0.5), &u, &opts).unwrap();
        assert_eq!(r.status, HullStatus::TrivialZero);
        assert!(r.value < r.functional);
    }
}
