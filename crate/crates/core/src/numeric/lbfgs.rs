//! Limited-memory BFGS direction via the two-loop recursion.

use std::collections::VecDeque;

use super::sparse::dot;

#[derive(Debug, Clone)]
pub struct Lbfgs {
    memory: usize,
    pairs: VecDeque<(Vec<f64>, Vec<f64>, f64)>,
}

impl Lbfgs {
    pub fn new(memory: usize) -> Self {
        Self {
            memory,
            pairs: VecDeque::with_capacity(memory),
        }
    }

    pub fn is_empty(&self) -> bool {
        self.pairs.is_empty()
    }

    pub fn reset(&mut self) {
        self.pairs.clear();
    }

    /// Records a step `s = x_new - x_old` and gradient change `y`. Pairs with
    /// non-positive curvature are skipped.
    pub fn push(&mut self, s: Vec<f64>, y: Vec<f64>) {
        let sy = dot(&s, &y);
        if sy <= 1e-300 || !sy.is_finite() {
            return;
        }
        if self.pairs.len() == self.memory {
            self.pairs.pop_front();
        }
        self.pairs.push_back((s, y, 1.0 / sy));
    }

    /// Returns the quasi-Newton descent direction `-H g`.
    pub fn direction(&self, g: &[f64]) -> Vec<f64> {
        let mut q = g.to_vec();
        let mut alphas = Vec::with_capacity(self.pairs.len());
        for (s, y, rho) in self.pairs.iter().rev() {
            let a = rho * dot(s, &q);
            for (qi, yi) in q.iter_mut().zip(y) {
                *qi -= a * yi;
            }
            alphas.push(a);
        }
        if let Some((s, y, _)) = self.pairs.back() {
            let gamma = dot(s, y) / dot(y, y);
            q.iter_mut().for_each(|v| *v *= gamma);
        }
        for ((s, y, rho), a) in self.pairs.iter().zip(alphas.iter().rev()) {
            let b = rho * dot(y, &q);
            for (qi, si) in q.iter_mut().zip(s) {
                *qi += (a - b) * si;
            }
        }
        q.iter_mut().for_each(|v| *v = -*v);
        q
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn quadratic_converges_quickly() {
        // f = 0.5 x^T D x with D = diag(1..10)
        let n = 10;
        let grad = |x: &[f64]| -> Vec<f64> { x.iter().enumerate().map(|(i, v)| (i + 1) as f64 * v).collect() };
        let mut x = vec![1.0; n];
        let mut g = grad(&x);
        let mut lb = Lbfgs::new(8);
        for _ in 0..40 {
            let d = lb.direction(&g);
            // exact line search on a quadratic
            let gd = dot(&g, &d);
            let dad: f64 = d.iter().enumerate().map(|(i, v)| (i + 1) as f64 * v * v).sum();
            let t = -gd / dad;
            let xn: Vec<f64> = x.iter().zip(&d).map(|(a, b)| a + t * b).collect();
            let gn = grad(&xn);
            lb.push(
                xn.iter().zip(&x).map(|(a, b)| a - b).collect(),
                gn.iter().zip(&g).map(|(a, b)| a - b).collect(),
            );
            x = xn;
            g = gn;
        }
        assert!(x.iter().all(|v| v.abs() < 1e-8), "{x:?}");
    }
}
