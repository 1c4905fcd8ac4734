//! Smooth benchmark oracles: smoothed piecewise-linear (SPL), the diagonal
//! ill-conditioned quadratic (QUAD) and dense random quadratics.

use super::matrix::{largest_singular_value, Dense};
use super::rng::BenchRng;
use super::special::{logsumexp, softmax};
use crate::linalg::{dot, norm2, scale};
use crate::oracle::SmoothOracle;

/// `s·E((Ax − b)/s) + (μ/2)‖x‖²` with `A` centered so that `x* = 0`.
#[derive(Debug, Clone)]
pub struct Spl {
    pub a: Dense,
    pub b: Vec<f64>,
    pub s: f64,
    pub mu: f64,
    /// Lipschitz constant of the unregularized part, `(1/s)·max column norm`.
    pub l_unreg: f64,
}

impl Spl {
    /// Draws `Â`, `b` (row-major, uniform on `[-1, 1]`) and then `x_0`
    /// (uniform, normalized) from one stream.
    pub fn generate(m: usize, n: usize, s: f64, mu_ratio: f64, seed: u64) -> (Self, Vec<f64>) {
        let mut rng = BenchRng::new(seed);
        let a_hat = rng.fill_symmetric(m * n);
        let b = rng.fill_symmetric(m);
        let x0 = rng.fill_symmetric(n);
        let x0 = scale(&x0, 1.0 / norm2(&x0));
        let a_hat = Dense::new(m, n, a_hat);
        let sigma0 = softmax(&b.iter().map(|v| -v / s).collect::<Vec<_>>());
        let shift = a_hat.mul_t(&sigma0);
        let mut data = a_hat.data;
        for row in data.chunks_mut(n) {
            for (v, c) in row.iter_mut().zip(&shift) {
                *v -= c;
            }
        }
        let a = Dense::new(m, n, data);
        let l_unreg = a.column_norms().into_iter().fold(0.0, f64::max) / s;
        (Self { a, b, s, mu: mu_ratio * l_unreg, l_unreg }, x0)
    }

    fn scaled_residual(&self, x: &[f64]) -> Vec<f64> {
        self.a.mul(x).iter().zip(&self.b).map(|(ax, b)| (ax - b) / self.s).collect()
    }
}

impl SmoothOracle for Spl {
    fn dim(&self) -> usize {
        self.a.cols
    }
    fn value(&self, x: &[f64]) -> f64 {
        self.s * logsumexp(&self.scaled_residual(x)) + 0.5 * self.mu * dot(x, x)
    }
    fn gradient(&self, x: &[f64]) -> Vec<f64> {
        self.value_and_gradient(x).1
    }
    fn value_and_gradient(&self, x: &[f64]) -> (f64, Vec<f64>) {
        let z = self.scaled_residual(x);
        let f = self.s * logsumexp(&z) + 0.5 * self.mu * dot(x, x);
        let mut g = self.a.mul_t(&softmax(&z));
        crate::linalg::axpy(self.mu, x, &mut g);
        (f, g)
    }
    fn lipschitz(&self) -> f64 {
        self.l_unreg + self.mu
    }
    fn strong_convexity(&self) -> f64 {
        self.mu
    }
}

/// `½⟨x, diag(σ)x⟩ + (μ/2)‖x‖²`, `σ_i = i/n`. The spectrum's own strong
/// convexity `1/n` is not reported.
#[derive(Debug, Clone)]
pub struct Quad {
    pub sigma: Vec<f64>,
    pub mu: f64,
}

impl Quad {
    pub fn generate(n: usize, mu_ratio: f64) -> (Self, Vec<f64>) {
        let sigma: Vec<f64> = (1..=n).map(|i| i as f64 / n as f64).collect();
        let x0 = sigma.iter().map(|s| 1.0 / s).collect();
        // L_f of the unregularized part is max σ_i = 1.
        (Self { sigma, mu: mu_ratio }, x0)
    }
}

impl SmoothOracle for Quad {
    fn dim(&self) -> usize {
        self.sigma.len()
    }
    fn value(&self, x: &[f64]) -> f64 {
        x.iter().zip(&self.sigma).map(|(v, s)| 0.5 * (s + self.mu) * v * v).sum()
    }
    fn gradient(&self, x: &[f64]) -> Vec<f64> {
        x.iter().zip(&self.sigma).map(|(v, s)| (s + self.mu) * v).collect()
    }
    fn lipschitz(&self) -> f64 {
        1.0 + self.mu
    }
    fn strong_convexity(&self) -> f64 {
        self.mu
    }
}

/// `½⟨x, Qx⟩ − ⟨c, x⟩ + (μ/2)‖x‖²` with `Q = GᵀG/n`, `G` standard normal.
#[derive(Debug, Clone)]
pub struct DenseQuadratic {
    pub q: Dense,
    pub c: Vec<f64>,
    pub mu: f64,
    pub l_unreg: f64,
}

impl DenseQuadratic {
    pub fn generate(n: usize, mu: f64, seed: u64) -> Self {
        let mut rng = BenchRng::new(seed);
        let g = Dense::new(n, n, rng.fill_normal(n * n, 1.0));
        let c = rng.fill_normal(n, 1.0);
        let mut q = vec![0.0; n * n];
        for i in 0..n {
            for j in 0..n {
                q[i * n + j] = (0..n).map(|k| g.data[k * n + i] * g.data[k * n + j]).sum::<f64>() / n as f64;
            }
        }
        let q = Dense::new(n, n, q);
        // Q is symmetric, so the top singular value of Q is its top eigenvalue.
        let sigma = largest_singular_value(n, |x| q.mul(x), |x| q.mul(x), 1e-13, 100_000);
        Self { q, c, mu, l_unreg: sigma * (1.0 + 1e-6) }
    }
}

impl SmoothOracle for DenseQuadratic {
    fn dim(&self) -> usize {
        self.c.len()
    }
    fn value(&self, x: &[f64]) -> f64 {
        0.5 * dot(x, &self.q.mul(x)) - dot(&self.c, x) + 0.5 * self.mu * dot(x, x)
    }
    fn gradient(&self, x: &[f64]) -> Vec<f64> {
        let mut g = self.q.mul(x);
        for ((gi, ci), xi) in g.iter_mut().zip(&self.c).zip(x) {
            *gi += self.mu * xi - ci;
        }
        g
    }
    fn lipschitz(&self) -> f64 {
        self.l_unreg + self.mu
    }
    fn strong_convexity(&self) -> f64 {
        self.mu
    }
}
