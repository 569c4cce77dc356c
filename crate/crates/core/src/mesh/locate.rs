//! Barycentric point location in a triangulation with arbitrary vertex
//! positions.

/// Uniform-grid bucket index over triangle bounding boxes.
#[derive(Debug, Clone)]
pub struct PointLocator<'a> {
    pos: &'a [[f64; 2]],
    tris: &'a [[usize; 3]],
    lo: [f64; 2],
    cell: [f64; 2],
    res: usize,
    buckets: Vec<Vec<usize>>,
}

impl<'a> PointLocator<'a> {
    pub fn new(pos: &'a [[f64; 2]], tris: &'a [[usize; 3]]) -> Self {
        let mut lo = [f64::INFINITY; 2];
        let mut hi = [f64::NEG_INFINITY; 2];
        for p in pos {
            for k in 0..2 {
                lo[k] = lo[k].min(p[k]);
                hi[k] = hi[k].max(p[k]);
            }
        }
        let res = ((tris.len() as f64).sqrt().ceil() as usize).max(1);
        let cell = [
            ((hi[0] - lo[0]) / res as f64).max(1e-300),
            ((hi[1] - lo[1]) / res as f64).max(1e-300),
        ];
        let mut loc = Self {
            pos,
            tris,
            lo,
            cell,
            res,
            buckets: vec![Vec::new(); res * res],
        };
        for (t, tri) in tris.iter().enumerate() {
            let ps = tri.map(|i| pos[i]);
            let (i0, j0) = loc.cell_of([
                ps[0][0].min(ps[1][0]).min(ps[2][0]),
                ps[0][1].min(ps[1][1]).min(ps[2][1]),
            ]);
            let (i1, j1) = loc.cell_of([
                ps[0][0].max(ps[1][0]).max(ps[2][0]),
                ps[0][1].max(ps[1][1]).max(ps[2][1]),
            ]);
            for i in i0..=i1 {
                for j in j0..=j1 {
                    loc.buckets[j * res + i].push(t);
                }
            }
        }
        loc
    }

    fn cell_of(&self, p: [f64; 2]) -> (usize, usize) {
        let f = |k: usize| (((p[k] - self.lo[k]) / self.cell[k]).floor().max(0.0) as usize).min(self.res - 1);
        (f(0), f(1))
    }

    fn barycentric(&self, t: usize, p: [f64; 2]) -> [f64; 3] {
        let [a, b, c] = self.tris[t].map(|i| self.pos[i]);
        let det = (b[0] - a[0]) * (c[1] - a[1]) - (b[1] - a[1]) * (c[0] - a[0]);
        let l1 = ((p[0] - a[0]) * (c[1] - a[1]) - (p[1] - a[1]) * (c[0] - a[0])) / det;
        let l2 = ((b[0] - a[0]) * (p[1] - a[1]) - (b[1] - a[1]) * (p[0] - a[0])) / det;
        [1.0 - l1 - l2, l1, l2]
    }

    /// Containing triangle and barycentric coordinates. Points outside the
    /// triangulation snap to the least-violating triangle, with coordinates
    /// clamped to be non-negative and renormalized.
    pub fn locate(&self, p: [f64; 2]) -> (usize, [f64; 3]) {
        let (i, j) = self.cell_of(p);
        let mut best = (usize::MAX, f64::NEG_INFINITY, [0.0; 3]);
        for &t in &self.buckets[j * self.res + i] {
            let b = self.barycentric(t, p);
            let worst = b.iter().copied().fold(f64::INFINITY, f64::min);
            if worst >= -1e-12 {
                return (t, b);
            }
            if worst > best.1 {
                best = (t, worst, b);
            }
        }
        for t in 0..self.tris.len() {
            let b = self.barycentric(t, p);
            let worst = b.iter().copied().fold(f64::INFINITY, f64::min);
            if worst > best.1 {
                best = (t, worst, b);
            }
        }
        let clamped = best.2.map(|v| v.max(0.0));
        let s: f64 = clamped.iter().sum();
        (best.0, clamped.map(|v| v / s))
    }
}
