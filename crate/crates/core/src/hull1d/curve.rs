//! Discretized curves `u: [0,1] -> R^m` and smooth analytic curve sources.

use std::path::Path;
use std::sync::Arc;

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::densities::{Density, MatRef, EPS_REG};
use crate::error::{HullError, Result};
use crate::numeric::quadrature::GaussLegendre;

type VecFn = dyn Fn(f64) -> Vec<f64> + Send + Sync;

/// A smooth curve given by its values and exact derivative.
#[derive(Clone)]
pub struct SmoothCurve {
    name: String,
    dim: usize,
    u: Arc<VecFn>,
    du: Arc<VecFn>,
}

impl std::fmt::Debug for SmoothCurve {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("SmoothCurve")
            .field("name", &self.name)
            .field("dim", &self.dim)
            .finish()
    }
}

impl SmoothCurve {
    pub fn new<U, D>(name: impl Into<String>, dim: usize, u: U, du: D) -> Self
    where
        U: Fn(f64) -> Vec<f64> + Send + Sync + 'static,
        D: Fn(f64) -> Vec<f64> + Send + Sync + 'static,
    {
        Self {
            name: name.into(),
            dim,
            u: Arc::new(u),
            du: Arc::new(du),
        }
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn value(&self, t: f64) -> Vec<f64> {
        (self.u)(t)
    }

    pub fn derivative(&self, t: f64) -> Vec<f64> {
        (self.du)(t)
    }

    /// `t * (a, b, c, ...)`.
    pub fn line(dir: &[f64]) -> Self {
        let d1 = dir.to_vec();
        let d2 = dir.to_vec();
        let name = format!(
            "line:{}",
            dir.iter().map(|v| v.to_string()).collect::<Vec<_>>().join(",")
        );
        Self::new(
            name,
            dir.len(),
            move |t| d1.iter().map(|v| v * t).collect(),
            move |_| d2.clone(),
        )
    }

    /// `(t^2, t, 0)`.
    pub fn parabola() -> Self {
        Self::new("parabola", 3, |t| vec![t * t, t, 0.0], |t| vec![2.0 * t, 1.0, 0.0])
    }

    /// `(cos 2πt, sin 2πt, t)`.
    pub fn helix() -> Self {
        use std::f64::consts::TAU;
        Self::new(
            "helix",
            3,
            |t| vec![(TAU * t).cos(), (TAU * t).sin(), t],
            |t| vec![-TAU * (TAU * t).sin(), TAU * (TAU * t).cos(), 1.0],
        )
    }

    /// Parses `"line:a,b,c"`, `"parabola"` or `"helix"`.
    pub fn builtin(id: &str) -> Result<Self> {
        match id.split_once(':') {
            Some(("line", rest)) => {
                let dir: Vec<f64> = rest
                    .split(',')
                    .map(|t| {
                        t.trim()
                            .parse::<f64>()
                            .map_err(|_| HullError::Usage(format!("bad line component '{t}'")))
                    })
                    .collect::<Result<_>>()?;
                if dir.iter().any(|v| !v.is_finite()) {
                    return Err(HullError::Usage("line direction must be finite".into()));
                }
                Ok(Self::line(&dir))
            }
            None if id == "parabola" => Ok(Self::parabola()),
            None if id == "helix" => Ok(Self::helix()),
            _ => Err(HullError::Usage(format!("unknown curve '{id}'"))),
        }
    }

    /// Random regular curve in `R^3`:
    /// `u'(t) = v + Σ_k b_k cos(kπt)` with `|v| = 1`, `Σ|b_k| <= 0.8`, scaled
    /// by a random length factor. Speed stays in `[0.2, 1.8]` times the scale.
    pub fn random(seed: u64) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let v = unit3(&mut rng);
        let modes = 4;
        let mut b = Vec::with_capacity(modes);
        let mut budget = 0.8;
        for _ in 0..modes {
            let w = budget * rng.gen_range(0.2..0.6);
            budget -= w;
            let d = unit3(&mut rng);
            b.push([d[0] * w, d[1] * w, d[2] * w]);
        }
        let scale = rng.gen_range(0.5..3.0);
        let b1 = b.clone();
        let u = move |t: f64| {
            let mut p: Vec<f64> = v.iter().map(|c| c * t).collect();
            for (k, bk) in b1.iter().enumerate() {
                let w = (k + 1) as f64 * std::f64::consts::PI;
                let s = (w * t).sin() / w;
                for i in 0..3 {
                    p[i] += bk[i] * s;
                }
            }
            p.iter().map(|c| c * scale).collect()
        };
        let du = move |t: f64| {
            let mut p = v.to_vec();
            for (k, bk) in b.iter().enumerate() {
                let c = ((k + 1) as f64 * std::f64::consts::PI * t).cos();
                for i in 0..3 {
                    p[i] += bk[i] * c;
                }
            }
            p.iter().map(|c| c * scale).collect()
        };
        Self::new(format!("random:{seed}"), 3, u, du)
    }

    /// `u ∘ φ^{-1}` for an increasing diffeomorphism `φ` of `[0,1]` given with
    /// its derivative.
    pub fn reparameterized<P, DP>(&self, phi: P, dphi: DP) -> Self
    where
        P: Fn(f64) -> f64 + Send + Sync + Clone + 'static,
        DP: Fn(f64) -> f64 + Send + Sync + Clone + 'static,
    {
        let inv = {
            let phi = phi.clone();
            let dphi = dphi.clone();
            move |s: f64| invert_monotone(&phi, &dphi, s)
        };
        let inv2 = inv.clone();
        let base_u = self.u.clone();
        let base_du = self.du.clone();
        Self::new(
            format!("{}∘φ⁻¹", self.name),
            self.dim,
            move |s| base_u(inv(s)),
            move |s| {
                let t = inv2(s);
                let d = dphi(t);
                base_du(t).into_iter().map(|v| v / d).collect()
            },
        )
    }

    /// `∫_0^1 |u'|` by composite Gauss–Legendre (64 panels of 16 nodes).
    pub fn length(&self) -> f64 {
        let gl = GaussLegendre::new(16);
        gl.composite(0.0, 1.0, 64, |t| norm(&self.derivative(t)))
    }

    /// Samples on `n` uniform cells with exact midpoint derivatives.
    pub fn sample(&self, n: usize) -> Result<SampledCurve> {
        if n == 0 {
            return Err(HullError::Input("need at least one cell".into()));
        }
        let h = 1.0 / n as f64;
        let u = (0..=n).map(|k| self.value(k as f64 * h)).collect();
        let du = (0..n).map(|k| self.derivative((k as f64 + 0.5) * h)).collect();
        SampledCurve::new(self.dim, u, du)
    }
}

fn unit3(rng: &mut ChaCha8Rng) -> [f64; 3] {
    loop {
        let v = [
            rng.gen_range(-1.0..1.0),
            rng.gen_range(-1.0..1.0),
            rng.gen_range(-1.0f64..1.0),
        ];
        let n = norm(&v);
        if n > 0.1 && n <= 1.0 {
            return [v[0] / n, v[1] / n, v[2] / n];
        }
    }
}

fn invert_monotone<P: Fn(f64) -> f64, DP: Fn(f64) -> f64>(phi: &P, dphi: &DP, s: f64) -> f64 {
    let (mut lo, mut hi) = (0.0, 1.0);
    let mut t = s;
    for _ in 0..100 {
        let r = phi(t) - s;
        if r.abs() < 1e-15 {
            break;
        }
        if r > 0.0 {
            hi = t;
        } else {
            lo = t;
        }
        let nt = t - r / dphi(t);
        t = if nt > lo && nt < hi { nt } else { 0.5 * (lo + hi) };
    }
    t
}

pub(crate) fn norm(v: &[f64]) -> f64 {
    v.iter().map(|x| x * x).sum::<f64>().sqrt()
}

/// Curve values on a uniform grid `t_k = k/n` with derivative samples at
/// cell midpoints.
#[derive(Debug, Clone, PartialEq)]
pub struct SampledCurve {
    m: usize,
    u: Vec<Vec<f64>>,
    du: Vec<Vec<f64>>,
}

impl SampledCurve {
    pub fn new(m: usize, u: Vec<Vec<f64>>, du: Vec<Vec<f64>>) -> Result<Self> {
        if du.is_empty() || u.len() != du.len() + 1 {
            return Err(HullError::Input(format!(
                "{} grid values for {} cells",
                u.len(),
                du.len()
            )));
        }
        if u.iter().chain(&du).any(|p| p.len() != m) {
            return Err(HullError::DimensionMismatch {
                expected: format!("points in R^{m}"),
                got: "mixed dimensions".into(),
            });
        }
        if u.iter().chain(&du).flatten().any(|v| !v.is_finite()) {
            return Err(HullError::Input("non-finite curve sample".into()));
        }
        Ok(Self { m, u, du })
    }

    /// Derivatives from cell differences of the grid values.
    pub fn from_points(u: Vec<Vec<f64>>) -> Result<Self> {
        if u.len() < 2 {
            return Err(HullError::Input("need at least two grid points".into()));
        }
        let m = u[0].len();
        let n = (u.len() - 1) as f64;
        let du = u
            .windows(2)
            .map(|w| w[1].iter().zip(&w[0]).map(|(a, b)| (a - b) * n).collect())
            .collect();
        Self::new(m, u, du)
    }

    /// Reads CSV with header `t,x1,...,xm`; `t` must be the uniform grid on
    /// `[0, 1]`.
    pub fn from_csv(path: &Path) -> Result<Self> {
        let mut rdr = csv::Reader::from_path(path).map_err(|e| HullError::Io(e.to_string()))?;
        let headers = rdr.headers().map_err(|e| HullError::Input(e.to_string()))?.clone();
        if headers.len() < 2 || headers.get(0).map(str::trim) != Some("t") {
            return Err(HullError::Input("CSV header must be t,x1,...,xm".into()));
        }
        let mut ts = Vec::new();
        let mut pts = Vec::new();
        for rec in rdr.records() {
            let rec = rec.map_err(|e| HullError::Input(e.to_string()))?;
            let row: Vec<f64> = rec
                .iter()
                .map(|f| {
                    f.trim()
                        .parse::<f64>()
                        .map_err(|_| HullError::Input(format!("bad number '{f}'")))
                })
                .collect::<Result<_>>()?;
            if row.len() != headers.len() {
                return Err(HullError::Input("ragged CSV row".into()));
            }
            ts.push(row[0]);
            pts.push(row[1..].to_vec());
        }
        let n = ts.len().saturating_sub(1);
        if n == 0 {
            return Err(HullError::Input("curve needs at least two rows".into()));
        }
        for (k, t) in ts.iter().enumerate() {
            if (t - k as f64 / n as f64).abs() > 1e-9 {
                return Err(HullError::Input(format!(
                    "grid not uniform on [0,1] at row {k} (t = {t})"
                )));
            }
        }
        Self::from_points(pts)
    }

    pub fn write_csv(&self, path: &Path) -> Result<()> {
        let mut w = csv::Writer::from_path(path).map_err(|e| HullError::Io(e.to_string()))?;
        let mut header = vec!["t".to_string()];
        header.extend((1..=self.m).map(|i| format!("x{i}")));
        w.write_record(&header).map_err(|e| HullError::Io(e.to_string()))?;
        let n = self.cells();
        for (k, p) in self.u.iter().enumerate() {
            let mut row = vec![format!("{:.17e}", k as f64 / n as f64)];
            row.extend(p.iter().map(|v| format!("{v:.17e}")));
            w.write_record(&row).map_err(|e| HullError::Io(e.to_string()))?;
        }
        w.flush()?;
        Ok(())
    }

    pub fn dim(&self) -> usize {
        self.m
    }

    /// Number of cells `n`.
    pub fn cells(&self) -> usize {
        self.du.len()
    }

    pub fn dt(&self) -> f64 {
        1.0 / self.cells() as f64
    }

    pub fn values(&self) -> &[Vec<f64>] {
        &self.u
    }

    pub fn derivatives(&self) -> &[Vec<f64>] {
        &self.du
    }

    /// Largest speed, the scale against which regularity is judged.
    pub fn scale(&self) -> f64 {
        self.du.iter().map(|d| norm(d)).fold(0.0, f64::max)
    }

    pub fn min_speed(&self) -> f64 {
        self.du.iter().map(|d| norm(d)).fold(f64::INFINITY, f64::min)
    }

    pub fn is_regular(&self) -> bool {
        self.min_speed() >= EPS_REG * self.scale().max(1.0)
    }

    pub fn check_regular(&self) -> Result<()> {
        if self.is_regular() {
            Ok(())
        } else {
            Err(HullError::Regularity(format!(
                "minimum speed {:.3e} below {:.1e} x scale",
                self.min_speed(),
                EPS_REG
            )))
        }
    }
}

/// Midpoint rule for `∫_0^1 W(u'(t)) dt`.
pub fn evaluate_functional_1d(w: &dyn Density, u: &SampledCurve) -> Result<f64> {
    u.check_regular()?;
    Ok(u.du.iter().map(|d| w.eval(MatRef::vector(d))).sum::<f64>() * u.dt())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::densities::Builtin;

    #[test]
    fn functional_examples() {
        let q = Builtin::Quadratic;
        let line = SmoothCurve::line(&[1.0, 1.0, 0.0]).sample(1024).unwrap();
        assert!((evaluate_functional_1d(&q, &line).unwrap() - 1.0).abs() < 1e-9);
        let par = SmoothCurve::parabola().sample(1024).unwrap();
        assert!((evaluate_functional_1d(&q, &par).unwrap() - 7.0 / 6.0).abs() < 1e-6);
        let l345 = SmoothCurve::builtin("line:3,4,0").unwrap().sample(64).unwrap();
        assert!((evaluate_functional_1d(&Builtin::Norm, &l345).unwrap() - 5.0).abs() < 1e-9);
    }

    #[test]
    fn degenerate_curve_rejected() {
        let c = SampledCurve::from_points(vec![vec![0.0, 0.0], vec![0.0, 0.0], vec![1.0, 0.0]]).unwrap();
        assert!(matches!(
            evaluate_functional_1d(&Builtin::Quadratic, &c),
            Err(HullError::Regularity(_))
        ));
    }

    #[test]
    fn parabola_length() {
        let l = SmoothCurve::parabola().length();
        let exact = 5f64.sqrt() / 2.0 + 2f64.asinh() / 4.0;
        assert!((l - exact).abs() < 1e-13);
    }

    #[test]
    fn random_curves_are_regular() {
        for seed in 0..20 {
            let c = SmoothCurve::random(seed).sample(256).unwrap();
            assert!(c.min_speed() > 0.19 * c.scale() / 1.8);
        }
    }

    #[test]
    fn reparameterization_keeps_length() {
        let base = SmoothCurve::helix();
        let a = 0.2;
        let phi = move |t: f64| t + a * (std::f64::consts::PI * t).sin() / std::f64::consts::PI;
        let dphi = move |t: f64| 1.0 + a * (std::f64::consts::PI * t).cos();
        let re = base.reparameterized(phi, dphi);
        assert!((re.length() - base.length()).abs() < 1e-10);
        let p = re.value(phi(0.3));
        let q = base.value(0.3);
        assert!(p.iter().zip(&q).all(|(x, y)| (x - y).abs() < 1e-12));
    }

    #[test]
    fn csv_roundtrip() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("c.csv");
        let c = SmoothCurve::parabola().sample(16).unwrap();
        c.write_csv(&path).unwrap();
        let back = SampledCurve::from_csv(&path).unwrap();
        assert_eq!(back.cells(), 16);
        for (a, b) in back.values().iter().zip(c.values()) {
            assert!(a.iter().zip(b).all(|(x, y)| (x - y).abs() < 1e-15));
        }
    }
}
