//! The density abstraction and the built-in catalogue.

use std::fmt;
use std::sync::Arc;

use nalgebra::DMatrix;

use super::matrix::{det, MatRef, MatrixF};
use crate::error::{HullError, Result};

/// An integrand `W` on `m x N` matrices (or `m`-vectors when `N = 1`).
pub trait Density: Send + Sync + fmt::Debug {
    /// Stable identifier, parseable by [`parse_density`] for built-ins.
    fn id(&self) -> String;

    fn eval(&self, f: MatRef<'_>) -> f64;

    /// Gradient written column-major into `out`. Defaults to central
    /// differences.
    fn grad(&self, f: MatRef<'_>, out: &mut [f64]) {
        fd_grad(self, f, out);
    }

    fn has_analytic_grad(&self) -> bool {
        false
    }

    /// Declared degree of positive homogeneity for inputs with `cols` columns.
    fn homogeneity(&self, _cols: usize) -> Option<f64> {
        None
    }

    /// Required `(m, N)`, or `None` when the density accepts any shape.
    fn dims(&self) -> Option<(usize, usize)> {
        None
    }

    /// `grad W(F) : D`.
    fn directional(&self, f: MatRef<'_>, d: MatRef<'_>) -> f64 {
        let mut g = vec![0.0; f.data().len()];
        self.grad(f, &mut g);
        g.iter().zip(d.data()).map(|(a, b)| a * b).sum()
    }
}

/// Central-difference gradient with step `1e-6 * max(1, |F|)`.
pub fn fd_grad<D: Density + ?Sized>(w: &D, f: MatRef<'_>, out: &mut [f64]) {
    let h = 1e-6 * f.frob().max(1.0);
    let mut buf = f.data().to_vec();
    for k in 0..buf.len() {
        let orig = buf[k];
        buf[k] = orig + h;
        let fp = w.eval(MatRef::new(&buf, f.rows(), f.cols()));
        buf[k] = orig - h;
        let fm = w.eval(MatRef::new(&buf, f.rows(), f.cols()));
        buf[k] = orig;
        out[k] = (fp - fm) / (2.0 * h);
    }
}

/// Built-in densities.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Builtin {
    /// `|F|`, degree one.
    Norm,
    /// `|F|^2 / 2`.
    Quadratic,
    /// `|F|^p / p`.
    PPower(f64),
    /// `|F|^p` without the `1/p` factor.
    Power(f64),
    /// `|F|^N / N^{N/2}` with `N` the number of columns.
    Wn,
    /// `sqrt(det(F^T F))`.
    Volume,
    /// Product of column norms `|F_1| ... |F_N|`.
    Product,
}

impl Builtin {
    fn power_params(&self, cols: usize) -> Option<(f64, f64)> {
        match *self {
            Builtin::Norm => Some((1.0, 1.0)),
            Builtin::Quadratic => Some((2.0, 0.5)),
            Builtin::PPower(p) => Some((p, 1.0 / p)),
            Builtin::Power(p) => Some((p, 1.0)),
            Builtin::Wn => {
                let n = cols as f64;
                Some((n, n.powf(-n / 2.0)))
            }
            // on vectors both reduce to the norm
            Builtin::Volume | Builtin::Product if cols == 1 => Some((1.0, 1.0)),
            _ => None,
        }
    }
}

impl Density for Builtin {
    fn id(&self) -> String {
        match self {
            Builtin::Norm => "norm".into(),
            Builtin::Quadratic => "quadratic".into(),
            Builtin::PPower(p) => format!("ppower:{p}"),
            Builtin::Power(p) => format!("power:{p}"),
            Builtin::Wn => "wn".into(),
            Builtin::Volume => "volume".into(),
            Builtin::Product => "product".into(),
        }
    }

    fn eval(&self, f: MatRef<'_>) -> f64 {
        if let Some((p, c)) = self.power_params(f.cols()) {
            return match p {
                2.0 => c * f.frob_sq(),
                1.0 => c * f.frob(),
                _ => c * f.frob_sq().powf(0.5 * p),
            };
        }
        match self {
            Builtin::Volume => gram_det(f).max(0.0).sqrt(),
            Builtin::Product => (0..f.cols()).map(|k| norm(f.col(k))).product(),
            _ => unreachable!(),
        }
    }

    fn grad(&self, f: MatRef<'_>, out: &mut [f64]) {
        if let Some((p, c)) = self.power_params(f.cols()) {
            let s = c * p * f.frob_sq().powf(0.5 * p - 1.0);
            for (o, v) in out.iter_mut().zip(f.data()) {
                *o = s * v;
            }
            return;
        }
        match self {
            Builtin::Volume => {
                let g = f.gram();
                let d = det(&g);
                if d <= 0.0 {
                    out.iter_mut().for_each(|o| *o = 0.0);
                    return;
                }
                let ginv = g.try_inverse().unwrap_or_else(|| DMatrix::zeros(f.cols(), f.cols()));
                let fm = DMatrix::from_column_slice(f.rows(), f.cols(), f.data());
                let grad = fm * ginv * d.sqrt();
                out.copy_from_slice(grad.as_slice());
            }
            Builtin::Product => {
                let norms: Vec<f64> = (0..f.cols()).map(|k| norm(f.col(k))).collect();
                for k in 0..f.cols() {
                    let others: f64 = norms
                        .iter()
                        .enumerate()
                        .filter(|&(l, _)| l != k)
                        .map(|(_, v)| v)
                        .product();
                    let s = others / norms[k];
                    for (i, v) in f.col(k).iter().enumerate() {
                        out[k * f.rows() + i] = s * v;
                    }
                }
            }
            _ => unreachable!(),
        }
    }

    fn has_analytic_grad(&self) -> bool {
        true
    }

    fn homogeneity(&self, cols: usize) -> Option<f64> {
        match self {
            Builtin::Volume | Builtin::Product => Some(cols as f64),
            _ => self.power_params(cols).map(|(p, _)| p),
        }
    }

    fn directional(&self, f: MatRef<'_>, d: MatRef<'_>) -> f64 {
        if let Some((p, c)) = self.power_params(f.cols()) {
            let fd = f.dot(&d);
            return match p {
                2.0 => 2.0 * c * fd,
                1.0 => c * fd / f.frob(),
                _ => c * p * f.frob_sq().powf(0.5 * p - 1.0) * fd,
            };
        }
        let mut g = vec![0.0; f.data().len()];
        self.grad(f, &mut g);
        g.iter().zip(d.data()).map(|(a, b)| a * b).sum()
    }
}

fn norm(v: &[f64]) -> f64 {
    v.iter().map(|x| x * x).sum::<f64>().sqrt()
}

fn gram_det(f: MatRef<'_>) -> f64 {
    det(&f.gram())
}

type DensityFn = dyn Fn(MatRef<'_>) -> f64 + Send + Sync;

/// A user-supplied density; its gradient uses the finite-difference fallback.
#[derive(Clone)]
pub struct FnDensity {
    name: String,
    f: Arc<DensityFn>,
    degree: Option<f64>,
    dims: Option<(usize, usize)>,
}

impl FnDensity {
    pub fn new<F>(name: impl Into<String>, f: F) -> Self
    where
        F: Fn(MatRef<'_>) -> f64 + Send + Sync + 'static,
    {
        Self {
            name: name.into(),
            f: Arc::new(f),
            degree: None,
            dims: None,
        }
    }

    pub fn with_degree(mut self, d: f64) -> Self {
        self.degree = Some(d);
        self
    }

    pub fn with_dims(mut self, m: usize, n: usize) -> Self {
        self.dims = Some((m, n));
        self
    }
}

impl fmt::Debug for FnDensity {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("FnDensity").field("name", &self.name).finish()
    }
}

impl Density for FnDensity {
    fn id(&self) -> String {
        self.name.clone()
    }

    fn eval(&self, f: MatRef<'_>) -> f64 {
        (self.f)(f)
    }

    fn homogeneity(&self, _cols: usize) -> Option<f64> {
        self.degree
    }

    fn dims(&self) -> Option<(usize, usize)> {
        self.dims
    }
}

/// Parses `"norm"`, `"quadratic"`, `"ppower:<p>"`, `"power:<p>"`, `"wn"`,
/// `"volume"` or `"product"`.
pub fn parse_density(id: &str) -> Result<Builtin> {
    let (name, param) = match id.split_once(':') {
        Some((n, p)) => (n.trim(), Some(p.trim())),
        None => (id.trim(), None),
    };
    let exponent = |p: Option<&str>| -> Result<f64> {
        let p = p.ok_or_else(|| HullError::Usage(format!("density '{name}' needs an exponent")))?;
        let v: f64 = p.parse().map_err(|_| HullError::Usage(format!("bad exponent '{p}'")))?;
        if !(v > 0.0 && v.is_finite()) {
            return Err(HullError::Usage(format!("exponent must be positive, got {v}")));
        }
        Ok(v)
    };
    let no_param = |d: Builtin| -> Result<Builtin> {
        match param {
            None => Ok(d),
            Some(p) => Err(HullError::Usage(format!(
                "density '{name}' takes no parameter (got '{p}')"
            ))),
        }
    };
    match name {
        "norm" => no_param(Builtin::Norm),
        "quadratic" => no_param(Builtin::Quadratic),
        "ppower" => Ok(Builtin::PPower(exponent(param)?)),
        "power" => Ok(Builtin::Power(exponent(param)?)),
        "wn" => no_param(Builtin::Wn),
        "volume" => no_param(Builtin::Volume),
        "product" => no_param(Builtin::Product),
        other => Err(HullError::Usage(format!("unknown density '{other}'"))),
    }
}

/// `W(F)`, checking shape against the density's declared dims.
pub fn eval_density(w: &dyn Density, f: &MatrixF) -> Result<f64> {
    if let Some((m, n)) = w.dims() {
        if (m, n) != (f.rows(), f.cols()) {
            return Err(HullError::DimensionMismatch {
                expected: format!("{m}x{n}"),
                got: format!("{}x{}", f.rows(), f.cols()),
            });
        }
    }
    Ok(w.eval(f.view()))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn f_rows(rows: &[[f64; 2]]) -> MatrixF {
        MatrixF::from_rows(&rows.iter().map(|r| r.to_vec()).collect::<Vec<_>>()).unwrap()
    }

    #[test]
    fn eval_examples() {
        let f = f_rows(&[[1.0, 0.0], [0.0, 1.0], [0.0, 0.0]]);
        assert_eq!(eval_density(&Builtin::Quadratic, &f).unwrap(), 1.0);
        assert!((eval_density(&Builtin::Wn, &f).unwrap() - 1.0).abs() < 1e-15);
        let f2 = f_rows(&[[2.0, 0.0], [0.0, 1.0], [0.0, 0.0]]);
        assert!((eval_density(&Builtin::Volume, &f2).unwrap() - 2.0).abs() < 1e-14);
    }

    #[test]
    fn volume_matches_svd() {
        let f = f_rows(&[[1.0, 0.3], [-0.4, 2.0], [0.7, 0.1]]);
        let sv = f.0.clone().svd(false, false).singular_values;
        let prod: f64 = sv.iter().product();
        assert!((Builtin::Volume.eval(f.view()) - prod).abs() < 1e-12);
    }

    #[test]
    fn dims_mismatch_is_usage_error() {
        let w = FnDensity::new("fixed", |f| f.frob()).with_dims(3, 2);
        let f = MatrixF::from_rows(&[vec![1.0], vec![2.0]]).unwrap();
        assert!(matches!(eval_density(&w, &f), Err(HullError::DimensionMismatch { .. })));
    }

    #[test]
    fn parse_ids() {
        assert_eq!(parse_density("ppower:0.5").unwrap(), Builtin::PPower(0.5));
        assert_eq!(parse_density("wn").unwrap(), Builtin::Wn);
        assert!(parse_density("ppower").is_err());
        assert!(parse_density("ppower:-1").is_err());
        assert!(parse_density("norm:3").is_err());
        assert!(parse_density("banana").is_err());
        for d in [
            Builtin::Norm,
            Builtin::Quadratic,
            Builtin::PPower(3.0),
            Builtin::Power(0.5),
            Builtin::Wn,
            Builtin::Volume,
            Builtin::Product,
        ] {
            assert_eq!(parse_density(&d.id()).unwrap(), d);
        }
    }

    #[test]
    fn fd_fallback_matches_analytic() {
        let custom = FnDensity::new("half-sq", |f| 0.5 * f.frob_sq());
        let data = [0.3, -1.2, 0.5, 2.0, 0.1, -0.7];
        let f = MatRef::new(&data, 3, 2);
        let mut g = [0.0; 6];
        custom.grad(f, &mut g);
        for (a, b) in g.iter().zip(&data) {
            assert!((a - b).abs() < 1e-8);
        }
    }
}
