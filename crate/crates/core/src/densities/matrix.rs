//! Matrix types for gradients (`m x N`), inner deformations (`N x N`) and
//! metric tensors.

use crate::error::{HullError, Result};
use nalgebra::DMatrix;

/// Borrowed column-major view of an `rows x cols` matrix.
#[derive(Debug, Clone, Copy)]
pub struct MatRef<'a> {
    data: &'a [f64],
    rows: usize,
    cols: usize,
}

impl<'a> MatRef<'a> {
    pub fn new(data: &'a [f64], rows: usize, cols: usize) -> Self {
        assert_eq!(data.len(), rows * cols, "view length mismatch");
        Self { data, rows, cols }
    }

    /// An `m`-vector viewed as an `m x 1` matrix.
    pub fn vector(data: &'a [f64]) -> Self {
        Self::new(data, data.len(), 1)
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn data(&self) -> &'a [f64] {
        self.data
    }

    pub fn col(&self, k: usize) -> &'a [f64] {
        &self.data[k * self.rows..(k + 1) * self.rows]
    }

    pub fn frob_sq(&self) -> f64 {
        self.data.iter().map(|v| v * v).sum()
    }

    pub fn frob(&self) -> f64 {
        self.frob_sq().sqrt()
    }

    pub fn dot(&self, other: &MatRef<'_>) -> f64 {
        self.data.iter().zip(other.data).map(|(a, b)| a * b).sum()
    }

    /// `F^T F` as an `N x N` matrix.
    pub fn gram(&self) -> DMatrix<f64> {
        let n = self.cols;
        DMatrix::from_fn(n, n, |i, j| {
            self.col(i).iter().zip(self.col(j)).map(|(a, b)| a * b).sum()
        })
    }

    pub fn to_owned(&self) -> MatrixF {
        MatrixF(DMatrix::from_column_slice(self.rows, self.cols, self.data))
    }
}

/// A gradient-like `m x N` matrix; columns are partial derivatives.
#[derive(Debug, Clone, PartialEq)]
pub struct MatrixF(pub DMatrix<f64>);

impl MatrixF {
    /// Builds from row slices, e.g. `[[1,0],[0,1],[0,0]]`.
    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self> {
        let m = rows.len();
        if m == 0 {
            return Err(HullError::Input("empty matrix".into()));
        }
        let n = rows[0].len();
        if n == 0 || rows.iter().any(|r| r.len() != n) {
            return Err(HullError::Input("ragged matrix rows".into()));
        }
        if rows.iter().flatten().any(|v| !v.is_finite()) {
            return Err(HullError::Input("non-finite matrix entry".into()));
        }
        Ok(Self(DMatrix::from_fn(m, n, |i, j| rows[i][j])))
    }

    pub fn from_columns(cols: &[&[f64]]) -> Self {
        let n = cols.len();
        let m = cols[0].len();
        Self(DMatrix::from_fn(m, n, |i, j| cols[j][i]))
    }

    /// Parses the `"a,b;c,d;e,f"` literal (rows separated by semicolons).
    pub fn parse(literal: &str) -> Result<Self> {
        let rows: Vec<Vec<f64>> = literal
            .split(';')
            .map(|row| {
                row.split(',')
                    .map(|t| {
                        t.trim()
                            .parse::<f64>()
                            .map_err(|_| HullError::Usage(format!("bad matrix entry '{t}'")))
                    })
                    .collect::<Result<Vec<f64>>>()
            })
            .collect::<Result<_>>()?;
        Self::from_rows(&rows).map_err(|e| HullError::Usage(e.to_string()))
    }

    pub fn rows(&self) -> usize {
        self.0.nrows()
    }

    pub fn cols(&self) -> usize {
        self.0.ncols()
    }

    pub fn view(&self) -> MatRef<'_> {
        MatRef::new(self.0.as_slice(), self.rows(), self.cols())
    }

    pub fn column(&self, k: usize) -> &[f64] {
        &self.0.as_slice()[k * self.rows()..(k + 1) * self.rows()]
    }

    pub fn gram(&self) -> GramMatrix {
        GramMatrix(self.view().gram())
    }

    /// Numerical rank from singular values (relative threshold 1e-12).
    pub fn rank(&self) -> usize {
        let sv = self.0.clone().svd(false, false).singular_values;
        let smax = sv.iter().copied().fold(0.0, f64::max);
        if smax == 0.0 {
            return 0;
        }
        sv.iter().filter(|&&s| s > 1e-12 * smax).count()
    }

    pub fn is_regular(&self) -> bool {
        self.cols() <= self.rows() && self.rank() == self.cols()
    }

    pub fn to_rows(&self) -> Vec<Vec<f64>> {
        (0..self.rows())
            .map(|i| (0..self.cols()).map(|j| self.0[(i, j)]).collect())
            .collect()
    }
}

/// Symmetric `N x N` metric `F^T F`.
#[derive(Debug, Clone, PartialEq)]
pub struct GramMatrix(pub DMatrix<f64>);

impl GramMatrix {
    pub fn det(&self) -> f64 {
        det(&self.0)
    }

    pub fn is_positive_definite(&self) -> bool {
        self.0.clone().cholesky().is_some()
            && self.det() > 1e-14 * self.0.trace().powi(self.0.nrows() as i32).max(f64::MIN_POSITIVE)
    }

    /// Symmetric inverse square root from the eigendecomposition.
    pub fn inverse_sqrt(&self) -> Result<DMatrix<f64>> {
        let eig = self.0.clone().symmetric_eigen();
        let lmax = eig.eigenvalues.iter().copied().fold(f64::MIN, f64::max);
        let lmin = eig.eigenvalues.iter().copied().fold(f64::MAX, f64::min);
        if lmin <= 0.0 || lmax / lmin > 1e12 {
            return Err(HullError::Conditioning(if lmin <= 0.0 {
                f64::INFINITY
            } else {
                lmax / lmin
            }));
        }
        let d = DMatrix::from_diagonal(&eig.eigenvalues.map(|l| 1.0 / l.sqrt()));
        Ok(&eig.eigenvectors * d * eig.eigenvectors.transpose())
    }
}

/// Square inner-deformation matrix with cached determinant and cofactor
/// matrix (`adj X * X^T = det X * I`, so that `X^{-1} = adj(X)^T / det X`).
#[derive(Debug, Clone, PartialEq)]
pub struct MatrixX {
    m: DMatrix<f64>,
    det: f64,
    adj: DMatrix<f64>,
}

impl MatrixX {
    pub fn new(m: DMatrix<f64>) -> Self {
        assert!(m.is_square(), "MatrixX must be square");
        let det = det(&m);
        let adj = cofactor(&m);
        Self { m, det, adj }
    }

    pub fn identity(n: usize) -> Self {
        Self::new(DMatrix::identity(n, n))
    }

    pub fn from_rows(rows: &[Vec<f64>]) -> Self {
        let n = rows.len();
        Self::new(DMatrix::from_fn(n, n, |i, j| rows[i][j]))
    }

    pub fn dim(&self) -> usize {
        self.m.nrows()
    }

    pub fn matrix(&self) -> &DMatrix<f64> {
        &self.m
    }

    pub fn det(&self) -> f64 {
        self.det
    }

    pub fn adj(&self) -> &DMatrix<f64> {
        &self.adj
    }

    pub fn is_positive(&self) -> bool {
        self.det > 0.0
    }

    /// `X^{-1}` via the adjugate; `None` when singular.
    pub fn inverse(&self) -> Option<DMatrix<f64>> {
        (self.det != 0.0).then(|| self.adj.transpose() / self.det)
    }

    pub fn scaled(&self, s: f64) -> Self {
        Self::new(&self.m * s)
    }
}

pub fn det(m: &DMatrix<f64>) -> f64 {
    match m.nrows() {
        0 => 1.0,
        1 => m[(0, 0)],
        2 => m[(0, 0)] * m[(1, 1)] - m[(0, 1)] * m[(1, 0)],
        3 => {
            m[(0, 0)] * (m[(1, 1)] * m[(2, 2)] - m[(1, 2)] * m[(2, 1)])
                - m[(0, 1)] * (m[(1, 0)] * m[(2, 2)] - m[(1, 2)] * m[(2, 0)])
                + m[(0, 2)] * (m[(1, 0)] * m[(2, 1)] - m[(1, 1)] * m[(2, 0)])
        }
        _ => m.clone().determinant(),
    }
}

/// Cofactor matrix `C_ij = (-1)^{i+j} M_ij`.
pub fn cofactor(m: &DMatrix<f64>) -> DMatrix<f64> {
    let n = m.nrows();
    match n {
        1 => DMatrix::from_element(1, 1, 1.0),
        2 => DMatrix::from_row_slice(2, 2, &[m[(1, 1)], -m[(1, 0)], -m[(0, 1)], m[(0, 0)]]),
        _ => DMatrix::from_fn(n, n, |i, j| {
            let minor = m.clone().remove_row(i).remove_column(j);
            let sign = if (i + j) % 2 == 0 { 1.0 } else { -1.0 };
            sign * det(&minor)
        }),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn cofactor_identity_small() {
        let x = DMatrix::from_row_slice(3, 3, &[2.0, 1.0, 0.5, -1.0, 3.0, 0.2, 0.3, 0.7, 1.5]);
        let xm = MatrixX::new(x.clone());
        let lhs = xm.adj() * x.transpose();
        let rhs = DMatrix::identity(3, 3) * xm.det();
        assert!((lhs - rhs).abs().max() < 1e-12);
        let inv = xm.inverse().unwrap();
        assert!((inv * &x - DMatrix::identity(3, 3)).abs().max() < 1e-12);
    }

    #[test]
    fn parse_literal() {
        let f = MatrixF::parse("1,0;0,1;0,0").unwrap();
        assert_eq!((f.rows(), f.cols()), (3, 2));
        assert_eq!(f.column(1), &[0.0, 1.0, 0.0]);
        assert!(MatrixF::parse("1,0;0").is_err());
        assert!(MatrixF::parse("1,x").is_err());
    }

    #[test]
    fn rank_of_parallel_columns() {
        let f = MatrixF::from_rows(&[vec![1.0, 2.0], vec![1.0, 2.0], vec![0.0, 0.0]]).unwrap();
        assert_eq!(f.rank(), 1);
        assert!(!f.is_regular());
    }

    #[test]
    fn inverse_sqrt_of_diag() {
        let g = GramMatrix(DMatrix::from_row_slice(2, 2, &[4.0, 0.0, 0.0, 1.0]));
        let y = g.inverse_sqrt().unwrap();
        assert!((y[(0, 0)] - 0.5).abs() < 1e-14 && (y[(1, 1)] - 1.0).abs() < 1e-14);
        let bad = GramMatrix(DMatrix::from_row_slice(2, 2, &[1.0, 0.0, 0.0, 1e-13]));
        assert!(matches!(bad.inverse_sqrt(), Err(HullError::Conditioning(_))));
    }
}
