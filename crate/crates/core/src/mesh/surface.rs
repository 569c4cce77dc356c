//! Piecewise-linear surfaces over the disk mesh and their energies.

use std::f64::consts::PI;

use rayon::prelude::*;
use serde::Serialize;

use super::TriMesh;
use crate::densities::{GramMatrix, MatrixF};
use crate::error::{HullError, Result};

/// Built-in embeddings `Ω -> R^3`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum SurfaceId {
    /// `(x1, x2, 0)`.
    Flat,
    /// `(a x1, b x2, 0)`.
    Stretch(f64, f64),
    /// `(x1, x2, A sin(πx1) sin(πx2))`.
    GraphSin(f64),
}

impl SurfaceId {
    pub fn parse(id: &str) -> Result<Self> {
        let bad = || HullError::Usage(format!("unknown surface '{id}'"));
        let num = |t: &str| {
            t.trim()
                .parse::<f64>()
                .map_err(|_| HullError::Usage(format!("bad number '{t}' in '{id}'")))
        };
        if id == "flat" {
            return Ok(SurfaceId::Flat);
        }
        if let Some(rest) = id.strip_prefix("stretch:") {
            let (a, b) = rest.split_once(',').ok_or_else(bad)?;
            return Ok(SurfaceId::Stretch(num(a)?, num(b)?));
        }
        if let Some(rest) = id.strip_prefix("graph:sin:") {
            return Ok(SurfaceId::GraphSin(num(rest)?));
        }
        Err(bad())
    }

    pub fn id(&self) -> String {
        match self {
            SurfaceId::Flat => "flat".into(),
            SurfaceId::Stretch(a, b) => format!("stretch:{a},{b}"),
            SurfaceId::GraphSin(a) => format!("graph:sin:{a}"),
        }
    }

    pub fn eval(&self, x: [f64; 2]) -> [f64; 3] {
        match *self {
            SurfaceId::Flat => [x[0], x[1], 0.0],
            SurfaceId::Stretch(a, b) => [a * x[0], b * x[1], 0.0],
            SurfaceId::GraphSin(amp) => [x[0], x[1], amp * (PI * x[0]).sin() * (PI * x[1]).sin()],
        }
    }
}

/// Vertex values of `u` on a mesh with per-triangle gradients (column-major
/// `3 x 2`) and metrics `[E, F, H]` of `∇u^T ∇u`.
#[derive(Debug, Clone, PartialEq)]
pub struct SurfaceSample {
    pub mesh: TriMesh,
    pub values: Vec<[f64; 3]>,
    grads: Vec<[f64; 6]>,
    grams: Vec<[f64; 3]>,
    areas: Vec<f64>,
}

pub(crate) fn triangle_gradient(vals: [[f64; 3]; 3], einv: &[f64; 4]) -> [f64; 6] {
    // [u1 - u0, u2 - u0] * E^{-1}
    let d1: [f64; 3] = std::array::from_fn(|i| vals[1][i] - vals[0][i]);
    let d2: [f64; 3] = std::array::from_fn(|i| vals[2][i] - vals[0][i]);
    let [a, b, c, d] = *einv;
    let mut g = [0.0; 6];
    for i in 0..3 {
        g[i] = d1[i] * a + d2[i] * c;
        g[3 + i] = d1[i] * b + d2[i] * d;
    }
    g
}

impl SurfaceSample {
    /// Builds from per-vertex values.
    pub fn from_values(mesh: TriMesh, values: Vec<[f64; 3]>) -> Result<Self> {
        if values.len() != mesh.num_vertices() {
            return Err(HullError::DimensionMismatch {
                expected: format!("{} vertex values", mesh.num_vertices()),
                got: values.len().to_string(),
            });
        }
        if values.iter().flatten().any(|v| !v.is_finite()) {
            return Err(HullError::Input("non-finite surface value".into()));
        }
        let einv = mesh.edge_inverses();
        let grads: Vec<[f64; 6]> = mesh
            .triangles
            .par_iter()
            .zip(einv.par_iter())
            .map(|(t, e)| triangle_gradient(t.map(|i| values[i]), e))
            .collect();
        let grams = grads
            .iter()
            .map(|g| {
                let e = g[0] * g[0] + g[1] * g[1] + g[2] * g[2];
                let f = g[0] * g[3] + g[1] * g[4] + g[2] * g[5];
                let h = g[3] * g[3] + g[4] * g[4] + g[5] * g[5];
                [e, f, h]
            })
            .collect();
        let areas = mesh.areas();
        Ok(Self {
            mesh,
            values,
            grads,
            grams,
            areas,
        })
    }

    pub fn num_triangles(&self) -> usize {
        self.grads.len()
    }

    pub fn gradient(&self, t: usize) -> MatrixF {
        let g = &self.grads[t];
        MatrixF::from_columns(&[&g[0..3], &g[3..6]])
    }

    #[cfg(test)]
    pub(crate) fn raw_gradient(&self, t: usize) -> &[f64; 6] {
        &self.grads[t]
    }

    pub fn gram(&self, t: usize) -> GramMatrix {
        let [e, f, h] = self.grams[t];
        GramMatrix(nalgebra::DMatrix::from_row_slice(2, 2, &[e, f, f, h]))
    }

    /// `[E, F, H]` with `E = |u_1|^2`, `F = u_1·u_2`, `H = |u_2|^2`.
    pub fn metric(&self, t: usize) -> [f64; 3] {
        self.grams[t]
    }

    pub fn triangle_areas(&self) -> &[f64] {
        &self.areas
    }

    /// Every metric positive definite.
    pub fn is_regular(&self) -> bool {
        self.grams
            .iter()
            .all(|&[e, f, h]| e > 0.0 && e * h - f * f > 1e-14 * (e + h) * (e + h))
    }

    pub fn scaled(&self, s: f64) -> Result<Self> {
        Self::from_values(
            self.mesh.clone(),
            self.values.iter().map(|v| v.map(|c| c * s)).collect(),
        )
    }
}

/// Evaluates `u` at the mesh vertices.
pub fn sample_surface<U: Fn([f64; 2]) -> [f64; 3]>(mesh: &TriMesh, u: U) -> Result<SurfaceSample> {
    let values = mesh.vertices.iter().map(|&x| u(x)).collect();
    SurfaceSample::from_values(mesh.clone(), values)
}

fn fixed_order_sum(v: Vec<f64>) -> f64 {
    v.into_iter().sum()
}

/// `Σ_T area(T) |∇u_T|^2 / 2`.
pub fn dirichlet_energy(s: &SurfaceSample) -> f64 {
    fixed_order_sum(
        s.grams
            .par_iter()
            .zip(s.areas.par_iter())
            .map(|(g, a)| a * 0.5 * (g[0] + g[2]))
            .collect(),
    )
}

/// `Σ_T area(T) sqrt(det ∇u_T^T ∇u_T)`.
pub fn area_functional(s: &SurfaceSample) -> f64 {
    fixed_order_sum(
        s.grams
            .par_iter()
            .zip(s.areas.par_iter())
            .map(|(g, a)| a * (g[0] * g[2] - g[1] * g[1]).max(0.0).sqrt())
            .collect(),
    )
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EnergyReport {
    pub dirichlet: f64,
    pub area: f64,
    pub gap: f64,
    pub history: Vec<f64>,
}

impl EnergyReport {
    pub fn of(s: &SurfaceSample) -> Self {
        let dirichlet = dirichlet_energy(s);
        let area = area_functional(s);
        Self {
            dirichlet,
            area,
            gap: dirichlet - area,
            history: Vec::new(),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mesh::build_disk_mesh;

    #[test]
    fn flat_and_stretch() {
        let m = build_disk_mesh(4);
        let flat = sample_surface(&m, |x| SurfaceId::Flat.eval(x)).unwrap();
        for t in 0..flat.num_triangles() {
            let g = flat.raw_gradient(t);
            assert!((g[0] - 1.0).abs() < 1e-12 && (g[4] - 1.0).abs() < 1e-12);
            assert!(g[1].abs() + g[2].abs() + g[3].abs() + g[5].abs() < 1e-12);
        }
        assert!((dirichlet_energy(&flat) - PI).abs() < 0.02 * PI);
        assert!((area_functional(&flat) - PI).abs() < 0.02 * PI);
        let st = sample_surface(&m, |x| SurfaceId::Stretch(2.0, 1.0).eval(x)).unwrap();
        let [e, f, h] = st.metric(17);
        assert!((e - 4.0).abs() < 1e-12 && f.abs() < 1e-12 && (h - 1.0).abs() < 1e-12);
        assert!((dirichlet_energy(&st) - 2.5 * PI).abs() < 0.02 * 2.5 * PI);
        assert!((area_functional(&st) - 2.0 * PI).abs() < 0.02 * 2.0 * PI);
        let s3 = st.scaled(3.0).unwrap();
        assert!((dirichlet_energy(&s3) - 9.0 * dirichlet_energy(&st)).abs() < 1e-10);
    }

    #[test]
    fn rank_one_surface_has_no_area() {
        let m = build_disk_mesh(3);
        let s = sample_surface(&m, |x| [x[0], 2.0 * x[0], 0.0]).unwrap();
        assert!(area_functional(&s).abs() < 1e-12);
        assert!(!s.is_regular());
    }

    #[test]
    fn gradient_reproduces_vertices() {
        let m = build_disk_mesh(2);
        let s = sample_surface(&m, |x| SurfaceId::GraphSin(0.3).eval(x)).unwrap();
        for (t, tri) in m.triangles.iter().enumerate() {
            let g = s.raw_gradient(t);
            let p0 = m.vertices[tri[0]];
            for &v in tri {
                let dx = [m.vertices[v][0] - p0[0], m.vertices[v][1] - p0[1]];
                for i in 0..3 {
                    let pred = s.values[tri[0]][i] + g[i] * dx[0] + g[3 + i] * dx[1];
                    assert!((pred - s.values[v][i]).abs() < 1e-12);
                }
            }
        }
    }

    #[test]
    fn parse_ids() {
        assert_eq!(SurfaceId::parse("flat").unwrap(), SurfaceId::Flat);
        assert_eq!(SurfaceId::parse("stretch:2,1").unwrap(), SurfaceId::Stretch(2.0, 1.0));
        assert_eq!(SurfaceId::parse("graph:sin:0.3").unwrap(), SurfaceId::GraphSin(0.3));
        assert!(SurfaceId::parse("torus").is_err());
        assert!(SurfaceId::parse("stretch:2").is_err());
    }
}
