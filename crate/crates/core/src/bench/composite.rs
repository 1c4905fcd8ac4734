//! Composite benchmark oracles: dense elastic net (EN) and sparse elastic-net
//! regularized logistic regression (ENLR). Both put all known strong
//! convexity in `Ψ(x) = λ‖x‖₁ + (μ/2)‖x‖²`.

use super::matrix::{largest_singular_value, Csr, Dense};
use super::rng::BenchRng;
use super::special::{logistic, shrink, softplus};
use crate::linalg::{dot, sub};
use crate::metric::Metric;
use crate::oracle::CompositeOracle;

/// Power iteration stopping tolerance; the reported constant is then
/// inflated by `(1 + 1e-6)` in `σ_max`.
const POWER_TOL: f64 = 1e-10;
const POWER_MAX_ITER: usize = 50_000;
const SIGMA_MARGIN: f64 = 1.0 + 1e-6;

/// `prox_{τΨ}` in a diagonal metric `d`:
/// `argmin_z τλ‖z‖₁ + (τμ/2)‖z‖² + ½‖z − x‖²_d = shrink(d∘x, τλ)/(d + τμ)`.
pub fn elastic_net_prox(x: &[f64], tau: f64, lambda: f64, mu: f64, metric: &Metric) -> Vec<f64> {
    match metric {
        Metric::Identity => x.iter().map(|v| shrink(*v, tau * lambda) / (1.0 + tau * mu)).collect(),
        Metric::Diagonal(d) => {
            x.iter().zip(d).map(|(v, di)| shrink(di * v, tau * lambda) / (di + tau * mu)).collect()
        }
    }
}

fn elastic_net_value(x: &[f64], lambda: f64, mu: f64) -> f64 {
    x.iter().map(|v| lambda * v.abs() + 0.5 * mu * v * v).sum()
}

/// `Ψ(x1) − Ψ(x2)` without forming either value.
fn elastic_net_difference(x1: &[f64], x2: &[f64], lambda: f64, mu: f64) -> f64 {
    x1.iter().zip(x2).map(|(a, b)| lambda * (a.abs() - b.abs()) + 0.5 * mu * (a - b) * (a + b)).sum()
}

/// `½‖Ax − b‖² + λ‖x‖₁ + (μ/2)‖x‖²`
#[derive(Debug, Clone)]
pub struct ElasticNet {
    pub a: Dense,
    pub b: Vec<f64>,
    pub lambda: f64,
    pub mu: f64,
    pub lf: f64,
}

impl ElasticNet {
    /// Draws `A` (standard normal, row-major), `b` (scale `b_scale`) and `x_0`
    /// (standard normal) from one stream.
    pub fn generate(m: usize, n: usize, lambda: f64, mu_ratio: f64, b_scale: f64, seed: u64) -> (Self, Vec<f64>) {
        let mut rng = BenchRng::new(seed);
        let a = Dense::new(m, n, rng.fill_normal(m * n, 1.0));
        let b = rng.fill_normal(m, b_scale);
        let x0 = rng.fill_normal(n, 1.0);
        let sigma = largest_singular_value(n, |x| a.mul(x), |y| a.mul_t(y), POWER_TOL, POWER_MAX_ITER);
        let lf = (sigma * SIGMA_MARGIN).powi(2);
        (Self { a, b, lambda, mu: mu_ratio * lf, lf }, x0)
    }

    fn residual(&self, x: &[f64]) -> Vec<f64> {
        sub(&self.a.mul(x), &self.b)
    }
}

impl CompositeOracle for ElasticNet {
    fn dim(&self) -> usize {
        self.a.cols
    }
    fn smooth_value(&self, x: &[f64]) -> f64 {
        let r = self.residual(x);
        0.5 * dot(&r, &r)
    }
    fn smooth_gradient(&self, x: &[f64]) -> Vec<f64> {
        self.a.mul_t(&self.residual(x))
    }
    fn smooth_value_and_gradient(&self, x: &[f64]) -> (f64, Vec<f64>) {
        let r = self.residual(x);
        (0.5 * dot(&r, &r), self.a.mul_t(&r))
    }
    fn regularizer(&self, x: &[f64]) -> f64 {
        elastic_net_value(x, self.lambda, self.mu)
    }
    fn prox(&self, x: &[f64], tau: f64, metric: &Metric) -> Vec<f64> {
        elastic_net_prox(x, tau, self.lambda, self.mu, metric)
    }
    fn mu_f(&self) -> f64 {
        0.0
    }
    fn mu_psi(&self) -> f64 {
        self.mu
    }
    fn lipschitz_hint(&self) -> Option<f64> {
        Some(self.lf)
    }
    /// `½⟨A(x1 − x2), r1 + r2⟩ + Ψ(x1) − Ψ(x2)` with residuals `r = Ax − b`.
    fn objective_difference(&self, x1: &[f64], x2: &[f64]) -> f64 {
        let d = self.a.mul(&sub(x1, x2));
        let s: Vec<f64> = self.residual(x1).iter().zip(self.residual(x2)).map(|(a, b)| a + b).collect();
        0.5 * dot(&d, &s) + elastic_net_difference(x1, x2, self.lambda, self.mu)
    }
}

/// `Σ log(1 + e^{(Ax)_i}) − ⟨b, Ax⟩ + λ‖x‖₁ + (μ/2)‖x‖²` with sparse `A` and
/// binary labels `b`.
#[derive(Debug, Clone)]
pub struct LogisticElasticNet {
    pub a: Csr,
    pub b: Vec<f64>,
    pub lambda: f64,
    pub mu: f64,
    pub lf: f64,
}

impl LogisticElasticNet {
    /// Stream order: the sparsity pattern and values row by row (a uniform
    /// draw per entry, followed by a normal draw for kept entries), then
    /// `x_0` (normal, scale `x0_scale`), then one uniform per label. Label
    /// `i` is one with probability `min(1, e^{−(Ax_0)_i})`.
    pub fn generate(
        m: usize,
        n: usize,
        density: f64,
        lambda: f64,
        mu_ratio: f64,
        x0_scale: f64,
        seed: u64,
    ) -> (Self, Vec<f64>) {
        let mut rng = BenchRng::new(seed);
        let mut indptr = Vec::with_capacity(m + 1);
        let mut indices = Vec::new();
        let mut values = Vec::new();
        indptr.push(0);
        for _ in 0..m {
            for j in 0..n {
                if rng.uniform() < density {
                    indices.push(j);
                    values.push(rng.normal());
                }
            }
            indptr.push(indices.len());
        }
        let a = Csr { rows: m, cols: n, indptr, indices, values };
        let x0 = rng.fill_normal(n, x0_scale);
        let z0 = a.mul(&x0);
        let b = z0
            .iter()
            .map(|z| {
                let p = (-z).exp().clamp(0.0, 1.0);
                if rng.uniform() < p {
                    1.0
                } else {
                    0.0
                }
            })
            .collect();
        let sigma = largest_singular_value(n, |x| a.mul(x), |y| a.mul_t(y), POWER_TOL, POWER_MAX_ITER);
        let lf = 0.25 * (sigma * SIGMA_MARGIN).powi(2);
        (Self { a, b, lambda, mu: mu_ratio * lf, lf }, x0)
    }
}

impl CompositeOracle for LogisticElasticNet {
    fn dim(&self) -> usize {
        self.a.cols
    }
    fn smooth_value(&self, x: &[f64]) -> f64 {
        let z = self.a.mul(x);
        z.iter().zip(&self.b).map(|(z, b)| softplus(*z) - b * z).sum()
    }
    fn smooth_gradient(&self, x: &[f64]) -> Vec<f64> {
        self.smooth_value_and_gradient(x).1
    }
    fn smooth_value_and_gradient(&self, x: &[f64]) -> (f64, Vec<f64>) {
        let z = self.a.mul(x);
        let f = z.iter().zip(&self.b).map(|(z, b)| softplus(*z) - b * z).sum();
        let r: Vec<f64> = z.iter().zip(&self.b).map(|(z, b)| logistic(*z) - b).collect();
        (f, self.a.mul_t(&r))
    }
    fn regularizer(&self, x: &[f64]) -> f64 {
        elastic_net_value(x, self.lambda, self.mu)
    }
    fn prox(&self, x: &[f64], tau: f64, metric: &Metric) -> Vec<f64> {
        elastic_net_prox(x, tau, self.lambda, self.mu, metric)
    }
    fn mu_f(&self) -> f64 {
        0.0
    }
    fn mu_psi(&self) -> f64 {
        self.mu
    }
    fn lipschitz_hint(&self) -> Option<f64> {
        Some(self.lf)
    }
    fn objective_difference(&self, x1: &[f64], x2: &[f64]) -> f64 {
        let z1 = self.a.mul(x1);
        let z2 = self.a.mul(x2);
        let smooth: f64 = z1
            .iter()
            .zip(&z2)
            .zip(&self.b)
            .map(|((a, c), b)| (softplus(*a) - softplus(*c)) - b * (a - c))
            .sum();
        smooth + elastic_net_difference(x1, x2, self.lambda, self.mu)
    }
}
