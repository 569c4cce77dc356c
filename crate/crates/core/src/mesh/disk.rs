//! Concentric-ring triangulation of the unit disk.

use std::collections::HashSet;
use std::f64::consts::TAU;

use crate::error::{HullError, Result};

/// A triangulated disk with counterclockwise triangles and an ordered
/// boundary loop on the unit circle.
#[derive(Debug, Clone, PartialEq)]
pub struct TriMesh {
    pub vertices: Vec<[f64; 2]>,
    pub triangles: Vec<[usize; 3]>,
    pub boundary_loop: Vec<usize>,
    /// Polar angle of each boundary-loop vertex, increasing in `[0, 2π)`.
    pub boundary_angle: Vec<f64>,
}

fn ring_start(k: usize) -> usize {
    if k == 0 {
        0
    } else {
        1 + 3 * k * (k - 1)
    }
}

/// Builds the disk mesh with `K = 2^levels` rings. Ring `k` carries `6k`
/// equally spaced vertices at radius `k/K`; neighbouring rings are joined by
/// merging their vertices in angular order. Level 0 is the hexagon fan.
pub fn build_disk_mesh(levels: u32) -> TriMesh {
    let rings = 1usize << levels;
    let mut vertices = vec![[0.0, 0.0]];
    for k in 1..=rings {
        let r = k as f64 / rings as f64;
        for j in 0..6 * k {
            let a = TAU * j as f64 / (6 * k) as f64;
            vertices.push([r * a.cos(), r * a.sin()]);
        }
    }
    let mut triangles = Vec::with_capacity(6 * rings * rings);
    for j in 0..6 {
        triangles.push([0, 1 + j, 1 + (j + 1) % 6]);
    }
    for k in 2..=rings {
        let (ni, no) = (6 * (k - 1), 6 * k);
        let (si, so) = (ring_start(k - 1), ring_start(k));
        let inner = |i: usize| si + i % ni;
        let outer = |j: usize| so + j % no;
        let (mut i, mut j) = (0usize, 0usize);
        while i < ni || j < no {
            // angles of the next vertex on each ring, in units of a full turn
            let next_i = (i + 1) as f64 / ni as f64;
            let next_j = (j + 1) as f64 / no as f64;
            if j < no && (i == ni || next_j <= next_i) {
                triangles.push([inner(i), outer(j), outer(j + 1)]);
                j += 1;
            } else {
                triangles.push([inner(i), outer(j), inner(i + 1)]);
                i += 1;
            }
        }
    }
    let nb = 6 * rings;
    let boundary_loop: Vec<usize> = (0..nb).map(|j| ring_start(rings) + j).collect();
    let boundary_angle = (0..nb).map(|j| TAU * j as f64 / nb as f64).collect();
    TriMesh {
        vertices,
        triangles,
        boundary_loop,
        boundary_angle,
    }
}

impl TriMesh {
    pub fn num_vertices(&self) -> usize {
        self.vertices.len()
    }

    pub fn num_triangles(&self) -> usize {
        self.triangles.len()
    }

    /// Twice the signed area of triangle `t` under the vertex positions `pos`.
    pub fn signed_area2(pos: &[[f64; 2]], tri: [usize; 3]) -> f64 {
        let [a, b, c] = tri.map(|i| pos[i]);
        (b[0] - a[0]) * (c[1] - a[1]) - (b[1] - a[1]) * (c[0] - a[0])
    }

    pub fn area(&self, t: usize) -> f64 {
        0.5 * Self::signed_area2(&self.vertices, self.triangles[t])
    }

    pub fn areas(&self) -> Vec<f64> {
        (0..self.triangles.len()).map(|t| self.area(t)).collect()
    }

    pub fn total_area(&self) -> f64 {
        self.areas().iter().sum()
    }

    pub fn is_boundary(&self) -> Vec<bool> {
        let mut b = vec![false; self.vertices.len()];
        for &v in &self.boundary_loop {
            b[v] = true;
        }
        b
    }

    /// Indices of non-boundary vertices in increasing order.
    pub fn interior_vertices(&self) -> Vec<usize> {
        let b = self.is_boundary();
        (0..self.vertices.len()).filter(|&v| !b[v]).collect()
    }

    pub fn euler_characteristic(&self) -> i64 {
        let mut edges = HashSet::new();
        for t in &self.triangles {
            for k in 0..3 {
                let (a, b) = (t[k], t[(k + 1) % 3]);
                edges.insert((a.min(b), a.max(b)));
            }
        }
        self.vertices.len() as i64 - edges.len() as i64 + self.triangles.len() as i64
    }

    /// Checks orientation, boundary placement and disk topology.
    pub fn validate(&self) -> Result<()> {
        for (t, tri) in self.triangles.iter().enumerate() {
            let a = Self::signed_area2(&self.vertices, *tri);
            if !(a > 0.0) {
                return Err(HullError::Fold { triangle: t, det: a });
            }
        }
        for &v in &self.boundary_loop {
            let [x, y] = self.vertices[v];
            if ((x * x + y * y).sqrt() - 1.0).abs() > 1e-12 {
                return Err(HullError::Input(format!("boundary vertex {v} is off the unit circle")));
            }
        }
        if self.euler_characteristic() != 1 {
            return Err(HullError::Input(format!(
                "Euler characteristic {} is not 1",
                self.euler_characteristic()
            )));
        }
        Ok(())
    }

    /// Inverse of the edge matrix `[p1 - p0, p2 - p0]` of triangle `t`,
    /// row-major `[[a, b], [c, d]]`.
    pub(crate) fn edge_inverse(&self, t: usize) -> [f64; 4] {
        let [p0, p1, p2] = self.triangles[t].map(|i| self.vertices[i]);
        let (a, b) = (p1[0] - p0[0], p2[0] - p0[0]);
        let (c, d) = (p1[1] - p0[1], p2[1] - p0[1]);
        let det = a * d - b * c;
        [d / det, -b / det, -c / det, a / det]
    }

    pub(crate) fn edge_inverses(&self) -> Vec<[f64; 4]> {
        (0..self.triangles.len()).map(|t| self.edge_inverse(t)).collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn level_zero_hexagon() {
        let m = build_disk_mesh(0);
        assert_eq!(m.num_vertices(), 7);
        assert_eq!(m.num_triangles(), 6);
        m.validate().unwrap();
    }

    #[test]
    fn levels_valid() {
        for l in 0..=5 {
            let m = build_disk_mesh(l);
            m.validate().unwrap();
            let k = 1usize << l;
            assert_eq!(m.num_triangles(), 6 * k * k);
            assert_eq!(m.boundary_loop.len(), 6 * k);
        }
        let m3 = build_disk_mesh(3);
        assert!(m3.areas().iter().copied().fold(f64::INFINITY, f64::min) > 0.0);
    }

    #[test]
    fn area_converges_to_pi() {
        let m = build_disk_mesh(4);
        let nb = m.boundary_loop.len() as f64;
        let polygon = 0.5 * nb * (TAU / nb).sin();
        assert!((m.total_area() - polygon).abs() < 1e-12);
        assert!((m.total_area() - std::f64::consts::PI).abs() < 0.02 * std::f64::consts::PI);
    }
}
