//! Normalized estimate function: coefficients of the inner problem as
//! functions of the candidate guarantee `A`, the normalized gap `φ(A)` and
//! its derivative at fixed weights.

use super::bundle::{Bundle, RecenteredBound};
use crate::error::{Error, Result};
use crate::metric::Metric;

/// Quantities fixed by the starting point of the run.
#[derive(Debug, Clone, PartialEq)]
pub struct NefContext {
    pub a1: f64,
    pub gamma1: f64,
    pub mu: f64,
    pub r: f64,
    pub v1: Vec<f64>,
    pub f_y1: f64,
    pub rb1: RecenteredBound,
}

impl NefContext {
    /// `γ(A) = γ₁ + 2μr(A − A₁)`
    pub fn gamma_of(&self, a: f64) -> f64 {
        self.gamma1 + 2.0 * self.mu * self.r * (a - self.a1)
    }

    /// `ν(A) = ĝ_k − (A₁/A) ĝ₁`
    pub fn nu(&self, rb_k: &RecenteredBound, a: f64) -> Vec<f64> {
        let t = self.a1 / a;
        rb_k.g_hat.iter().zip(&self.rb1.g_hat).map(|(gk, g1)| gk - t * g1).collect()
    }
}

/// Everything needed to evaluate the NEF coefficients at any `A` in `O(m)`.
#[derive(Debug, Clone, PartialEq)]
pub struct NefData {
    pub a1: f64,
    pub gamma1: f64,
    pub mu: f64,
    pub r: f64,
    /// `H + G v₁`
    pub hv: Vec<f64>,
    /// `G B⁻¹ ĝ_k`
    pub gbk: Vec<f64>,
    /// `G B⁻¹ ĝ₁`
    pub gb1: Vec<f64>,
    pub h_hat_k: f64,
    /// `f(y₁) − ĥ₁`
    pub f1_minus_h1: f64,
    pub gk_v1: f64,
    pub g1_v1: f64,
    pub nk2: f64,
    pub n12: f64,
    pub n1k: f64,
    /// `f(y_k)` at the current oracle point.
    pub f_yk: f64,
    pub q: Vec<Vec<f64>>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct NefCoefficients {
    pub a: f64,
    pub p: f64,
    pub s: Vec<f64>,
    pub r: f64,
}

impl NefData {
    pub fn new(ctx: &NefContext, bundle: &Bundle, rb_k: &RecenteredBound, f_yk: f64, metric: &Metric) -> Self {
        let dot = |a: &[f64], b: &[f64]| -> f64 { a.iter().zip(b).map(|(x, y)| x * y).sum() };
        let hv = bundle.h().iter().zip(bundle.g()).map(|(h, g)| h + dot(g, &ctx.v1)).collect();
        let gbk = bundle.g().iter().map(|g| metric.dual_inner(g, &rb_k.g_hat)).collect();
        let gb1 = bundle.g().iter().map(|g| metric.dual_inner(g, &ctx.rb1.g_hat)).collect();
        Self {
            a1: ctx.a1,
            gamma1: ctx.gamma1,
            mu: ctx.mu,
            r: ctx.r,
            hv,
            gbk,
            gb1,
            h_hat_k: rb_k.h_hat,
            f1_minus_h1: ctx.f_y1 - ctx.rb1.h_hat,
            gk_v1: dot(&rb_k.g_hat, &ctx.v1),
            g1_v1: dot(&ctx.rb1.g_hat, &ctx.v1),
            nk2: metric.dual_norm_sq(&rb_k.g_hat),
            n12: metric.dual_norm_sq(&ctx.rb1.g_hat),
            n1k: metric.dual_inner(&ctx.rb1.g_hat, &rb_k.g_hat),
            f_yk,
            q: bundle.q().to_vec(),
        }
    }

    pub fn m(&self) -> usize {
        self.hv.len()
    }

    fn gamma_of(&self, a: f64) -> f64 {
        self.gamma1 + 2.0 * self.mu * self.r * (a - self.a1)
    }

    fn check(&self, a: f64) -> Result<()> {
        if !(a.is_finite() && a >= self.a1 && a > 0.0) {
            return Err(Error::Domain(format!("NEF needs A >= A1 = {} and A > 0, got {a}", self.a1)));
        }
        Ok(())
    }

    pub fn coefficients(&self, a: f64) -> Result<NefCoefficients> {
        self.check(a)?;
        let a1 = self.a1;
        let g = self.gamma_of(a);
        let d = a - a1;
        let t = a1 / a;
        let p = d * d / (a * g);
        let s = self
            .hv
            .iter()
            .zip(self.gbk.iter().zip(&self.gb1))
            .map(|(hv, (bk, b1))| d / a * hv - d / g * (bk - t * b1))
            .collect();
        let nu_v1 = self.gk_v1 - t * self.g1_v1;
        let nu_sq = self.nk2 - 2.0 * t * self.n1k + t * t * self.n12;
        let r = self.h_hat_k + t * self.f1_minus_h1 + nu_v1 - a / (2.0 * g) * nu_sq;
        Ok(NefCoefficients { a, p, s, r })
    }

    /// `(P'(A), S'(A), R'(A))`
    pub fn coefficient_derivatives(&self, a: f64) -> Result<(f64, Vec<f64>, f64)> {
        self.check(a)?;
        let (a1, g1, mur) = (self.a1, self.gamma1, self.mu * self.r);
        let g = self.gamma_of(a);
        let g_2a = self.gamma_of(2.0 * a);
        let g_0 = self.gamma_of(0.0);
        let d = a - a1;
        let a2 = a * a;
        let gg = g * g;
        let dp = d * (a * g1 + a1 * g) / (a2 * gg);
        let c1 = (a1 * g_2a / a2 - 2.0 * mur) * a1;
        let ds = self
            .hv
            .iter()
            .zip(self.gbk.iter().zip(&self.gb1))
            .map(|(hv, (bk, b1))| a1 / a2 * hv - (g1 * bk - c1 * b1) / gg)
            .collect();
        let dr = -a1 / a2 * (self.f1_minus_h1 - self.g1_v1)
            - (g_0 * self.nk2 - a1 * a1 * g_2a / a2 * self.n12 + 4.0 * mur * a1 * self.n1k) / (2.0 * gg);
        Ok((dp, ds, dr))
    }

    fn quad(&self, lambda: &[f64]) -> f64 {
        self.q
            .iter()
            .zip(lambda)
            .map(|(row, li)| li * row.iter().zip(lambda).map(|(q, lj)| q * lj).sum::<f64>())
            .sum()
    }

    /// `φ(A) = −(P/2)λᵀQλ + ⟨S, λ⟩ + R − f(y_k)` at fixed `λ`.
    pub fn phi(&self, a: f64, lambda: &[f64]) -> Result<f64> {
        let c = self.coefficients(a)?;
        Ok(self.phi_with(&c, lambda))
    }

    pub fn phi_with(&self, c: &NefCoefficients, lambda: &[f64]) -> f64 {
        let lin: f64 = c.s.iter().zip(lambda).map(|(a, b)| a * b).sum();
        -0.5 * c.p * self.quad(lambda) + lin + c.r - self.f_yk
    }

    /// `(φ(A), φ'(A))` with `λ` held fixed.
    pub fn gap_and_derivative(&self, a: f64, lambda: &[f64]) -> Result<(f64, f64)> {
        let phi = self.phi(a, lambda)?;
        let (dp, ds, dr) = self.coefficient_derivatives(a)?;
        let lin: f64 = ds.iter().zip(lambda).map(|(a, b)| a * b).sum();
        Ok((phi, -0.5 * dp * self.quad(lambda) + lin + dr))
    }
}

/// Minimizer `v(A, λ) = v₁ − (A/γ(A)) B⁻¹ ρ(A, λ)` of the NEF over `x`.
pub fn nef_minimizer(
    ctx: &NefContext,
    bundle: &Bundle,
    rb_k: &RecenteredBound,
    a: f64,
    lambda: &[f64],
    metric: &Metric,
) -> Vec<f64> {
    let (_, g_tilde) = bundle.aggregate(lambda);
    let rho = rho(ctx, rb_k, a, &g_tilde);
    let step = metric.apply_inv(&rho);
    let t = a / ctx.gamma_of(a);
    ctx.v1.iter().zip(&step).map(|(v, s)| v - t * s).collect()
}

/// `ρ = (1 − A₁/A) g̃ + ĝ_k − (A₁/A) ĝ₁`
pub fn rho(ctx: &NefContext, rb_k: &RecenteredBound, a: f64, g_tilde: &[f64]) -> Vec<f64> {
    let t = ctx.a1 / a;
    g_tilde
        .iter()
        .zip(rb_k.g_hat.iter().zip(&ctx.rb1.g_hat))
        .map(|(gt, (gk, g1))| (1.0 - t) * gt + gk - t * g1)
        .collect()
}

/// Direct evaluation of the NEF `ω_k(x, g, A, λ)`.
#[allow(clippy::too_many_arguments)]
pub fn nef_value(
    ctx: &NefContext,
    bundle: &Bundle,
    rb_k: &RecenteredBound,
    lipschitz: f64,
    a: f64,
    lambda: &[f64],
    x: &[f64],
    g: &[f64],
    metric: &Metric,
) -> f64 {
    let dot = |u: &[f64], w: &[f64]| -> f64 { u.iter().zip(w).map(|(p, q)| p * q).sum() };
    let (h_tilde, g_tilde) = bundle.aggregate(lambda);
    let a1 = ctx.a1;
    (a - a1) / a * (h_tilde + dot(&g_tilde, x) + metric.dual_norm_sq(g) / (2.0 * lipschitz))
        + rb_k.h_hat
        + dot(&rb_k.g_hat, x)
        + a1 / a * (ctx.f_y1 - ctx.rb1.h_hat - dot(&ctx.rb1.g_hat, x))
        + ctx.gamma_of(a) / (2.0 * a) * metric.dist_sq(x, &ctx.v1)
}
