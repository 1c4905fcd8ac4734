//! Generalized optimized gradient method for smooth, possibly strongly convex
//! objectives. OGM, ITEM and the triple momentum method are presets.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::all_finite;
use crate::metric::Metric;
use crate::oracle::{gradient_step, OraclePoint, SmoothConstants, SmoothOracle};
use crate::trace::{KnownOptimum, Progress, RunRecord, StoppingRule, TraceRow};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum OgmMode {
    #[default]
    Custom,
    Ogm,
    Item,
    Tmm,
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum V1Choice {
    #[default]
    X1,
    X0,
    Explicit(Vec<f64>),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OgmConfig {
    #[serde(default)]
    pub a1: f64,
    #[serde(default = "one")]
    pub gamma1: f64,
    #[serde(default)]
    pub mode: OgmMode,
    #[serde(default)]
    pub v1: V1Choice,
}

fn one() -> f64 {
    1.0
}

impl Default for OgmConfig {
    fn default() -> Self {
        Self { a1: 0.0, gamma1: 1.0, mode: OgmMode::Custom, v1: V1Choice::X1 }
    }
}

impl OgmConfig {
    pub fn item() -> Self {
        Self { mode: OgmMode::Item, ..Self::default() }
    }

    pub fn ogm() -> Self {
        Self { mode: OgmMode::Ogm, ..Self::default() }
    }

    /// Triple momentum method started with guarantee `a1 > 0`.
    pub fn tmm(a1: f64) -> Self {
        Self { a1, mode: OgmMode::Tmm, ..Self::default() }
    }

    /// Applies the preset restrictions and returns the effective `(A_1, γ_1)`.
    pub fn resolve(&self, c: &SmoothConstants) -> Result<(f64, f64)> {
        let (a1, gamma1) = match self.mode {
            OgmMode::Custom => (self.a1, self.gamma1),
            OgmMode::Item => (0.0, 1.0),
            OgmMode::Ogm => {
                if c.mu != 0.0 {
                    return Err(Error::InvalidParameter(format!("the OGM preset needs mu = 0, got {}", c.mu)));
                }
                (0.0, self.gamma1)
            }
            OgmMode::Tmm => {
                if c.mu <= 0.0 {
                    return Err(Error::InvalidParameter("the TMM preset needs mu > 0".into()));
                }
                if !(self.a1 > 0.0) {
                    return Err(Error::InvalidParameter(format!("the TMM preset needs A1 > 0, got {}", self.a1)));
                }
                (self.a1, 2.0 * c.mu * c.r() * self.a1)
            }
        };
        if !(a1.is_finite() && a1 >= 0.0) {
            return Err(Error::InvalidParameter(format!("A1 must be nonnegative, got {a1}")));
        }
        if !(gamma1.is_finite() && gamma1 > 0.0) {
            return Err(Error::InvalidParameter(format!("gamma1 must be positive, got {gamma1}")));
        }
        Ok((a1, gamma1))
    }
}

/// Scalars produced by one weight update.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WeightUpdate {
    pub a: f64,
    pub a_next: f64,
    pub gamma_next: f64,
    pub a_bar: f64,
    pub gamma_bar: f64,
}

/// Largest weight keeping the estimate sequence valid, and the derived scalars.
pub fn weight_update(a_k: f64, gamma_k: f64, lipschitz: f64, mu: f64) -> Result<WeightUpdate> {
    if !(lipschitz > mu) {
        return Err(Error::Domain(format!("need L_f > mu, got L_f = {lipschitz}, mu = {mu}")));
    }
    if !(gamma_k > 0.0 && a_k >= 0.0) {
        return Err(Error::Domain(format!("need gamma > 0 and A >= 0, got gamma = {gamma_k}, A = {a_k}")));
    }
    let q = mu / lipschitz;
    let r = 1.0 / (1.0 - q);
    let a = (gamma_k + mu * a_k + (gamma_k * (gamma_k + 2.0 * lipschitz * a_k)).sqrt()) / (lipschitz - mu);
    let a_next = a_k + a;
    let gamma_next = gamma_k + 2.0 * mu * r * a;
    let a_bar = r * (a + q * a_next);
    let gamma_bar = gamma_next - mu * a_bar;
    Ok(WeightUpdate { a, a_next, gamma_next, a_bar, gamma_bar })
}

/// Oracle point `(rAγ̄ x + āγ v) / (rAγ̄ + āγ)`.
pub fn oracle_point(
    a_k: f64,
    gamma_k: f64,
    a_bar: f64,
    gamma_bar: f64,
    x_k: &[f64],
    v_k: &[f64],
    r: f64,
) -> Vec<f64> {
    let wx = r * a_k * gamma_bar;
    let wv = a_bar * gamma_k;
    let den = wx + wv;
    assert!(den > 0.0 && den.is_finite(), "degenerate oracle-point weights {wx}, {wv}");
    x_k.iter().zip(v_k).map(|(x, v)| (wx * x + wv * v) / den).collect()
}

/// The residual `rA(x_k − y) + (āγ/γ̄)(v_k − y)` that the oracle point zeroes.
pub fn oracle_point_residual(
    a_k: f64,
    gamma_k: f64,
    a_bar: f64,
    gamma_bar: f64,
    x_k: &[f64],
    v_k: &[f64],
    y: &[f64],
    r: f64,
) -> Vec<f64> {
    let s = a_bar * gamma_k / gamma_bar;
    x_k.iter().zip(v_k).zip(y).map(|((x, v), yi)| r * a_k * (x - yi) + s * (v - yi)).collect()
}

/// `v' = (γ̄ v − ā(B⁻¹g' − μ y')) / γ'`
#[allow(clippy::too_many_arguments)]
pub fn optimum_update(
    gamma_next: f64,
    gamma_bar: f64,
    a_bar: f64,
    v_k: &[f64],
    y_next: &[f64],
    g_next: &[f64],
    mu: f64,
    metric: &Metric,
) -> Vec<f64> {
    let step = metric.apply_inv(g_next);
    v_k.iter()
        .zip(y_next)
        .zip(&step)
        .map(|((v, y), s)| (gamma_bar * v - a_bar * (s - mu * y)) / gamma_next)
        .collect()
}

/// Unsimplified form `(γ/γ̄)v + (1 − γ/γ̄)y' − (ā/γ')B⁻¹g'` of [`optimum_update`].
#[allow(clippy::too_many_arguments)]
pub fn optimum_update_unsimplified(
    gamma_k: f64,
    gamma_next: f64,
    gamma_bar: f64,
    a_bar: f64,
    v_k: &[f64],
    y_next: &[f64],
    g_next: &[f64],
    metric: &Metric,
) -> Vec<f64> {
    let t = gamma_k / gamma_bar;
    let step = metric.apply_inv(g_next);
    v_k.iter()
        .zip(y_next)
        .zip(&step)
        .map(|((v, y), s)| t * v + (1.0 - t) * y - a_bar / gamma_next * s)
        .collect()
}

/// Worst-case factor multiplying `2𝒟₁/γ₁` at iteration `k ≥ 2`: a bound on
/// `f(x_k) − f*` when `μ = 0`, on `‖v_k − x*‖²` when `μ > 0`.
pub fn rate_certificate(c: &SmoothConstants, a1: f64, gamma1: f64, k: usize) -> Result<f64> {
    if k < 2 {
        return Err(Error::Domain(format!("rate certificates start at k = 2, got {k}")));
    }
    if c.mu == 0.0 {
        return Ok(c.lipschitz / (k * k) as f64);
    }
    if gamma1 < 2.0 * c.mu * c.r() * a1 {
        return Err(Error::Domain(format!(
            "strongly convex certificate needs gamma1 >= 2 mu r A1 = {}, got {gamma1}",
            2.0 * c.mu * c.r() * a1
        )));
    }
    let q = c.q();
    Ok((1.0 - q.sqrt()).powi(2 * k as i32 - 4) * (1.0 - q) * (1.0 - q) / (4.0 * q))
}

/// Potential `𝒟 = A(f(y) − f* − ŵ(x*)) + (γ/2)‖v − x*‖²`.
pub fn potential(
    c: &SmoothConstants,
    metric: &Metric,
    a: f64,
    gamma: f64,
    point: &OraclePoint,
    v: &[f64],
    known: &KnownOptimum,
) -> f64 {
    let w_hat = point.w_hat(c, metric, &known.x);
    a * (point.f_y - known.f - w_hat) + 0.5 * gamma * metric.dist_sq(v, &known.x)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PotentialRecord {
    pub k: usize,
    pub d: f64,
    pub gap_increment: Option<f64>,
    pub potential_rhs: Option<f64>,
}

/// Recomputes the potentials `𝒟_k` from trace columns.
pub fn potential_diagnostics(rows: &[TraceRow], c: &SmoothConstants, f_star: f64) -> Result<Vec<PotentialRecord>> {
    rows.iter()
        .map(|row| {
            let (Some(dist), Some(xdist), Some(gn), Some(f_y)) = (row.dist_sq, row.x_dist_sq, row.grad_norm_sq, row.f_y)
            else {
                return Err(Error::MissingOptimum("potential diagnostics"));
            };
            let w_hat = 0.5 * c.mu * c.r() * xdist + gn / (2.0 * c.lipschitz);
            Ok(PotentialRecord {
                k: row.k,
                d: row.a * (f_y - f_star - w_hat) + 0.5 * row.gamma * dist,
                gap_increment: row.gap_increment,
                potential_rhs: row.potential_rhs,
            })
        })
        .collect()
}

/// Solver state at iteration `k`.
#[derive(Debug, Clone, PartialEq)]
pub struct OgmState {
    pub k: usize,
    pub a: f64,
    pub gamma: f64,
    pub point: OraclePoint,
    pub v: Vec<f64>,
}

/// Everything computed by one step, for diagnostics.
#[derive(Debug, Clone, PartialEq)]
pub struct OgmStep {
    pub weights: WeightUpdate,
    /// `Γ_{k+1} − Γ_k`
    pub gap_increment: f64,
    /// Lower bound on `𝒟_k − 𝒟_{k+1}`.
    pub potential_rhs: f64,
}

/// Stepwise driver; [`ogm_run`] wraps it with tracing and stopping rules.
pub struct Ogm<'a, O: SmoothOracle + ?Sized> {
    oracle: &'a O,
    metric: &'a Metric,
    pub constants: SmoothConstants,
    pub a1: f64,
    pub gamma1: f64,
    state: OgmState,
    pub oracle_calls: u64,
}

impl<'a, O: SmoothOracle + ?Sized> Ogm<'a, O> {
    /// Runs the initial gradient step `y₁ = x₀`, `x₁ = T(y₁)`.
    pub fn new(oracle: &'a O, metric: &'a Metric, config: &OgmConfig, x0: &[f64]) -> Result<Self> {
        let constants = SmoothConstants::of(oracle)?;
        let (a1, gamma1) = config.resolve(&constants)?;
        let n = oracle.dim();
        if x0.len() != n {
            return Err(Error::DimensionMismatch { expected: n, got: x0.len() });
        }
        metric.check_dim(n)?;
        let point = OraclePoint::evaluate(oracle, metric, x0.to_vec(), 1)?;
        let v = match &config.v1 {
            V1Choice::X1 => point.x.clone(),
            V1Choice::X0 => x0.to_vec(),
            V1Choice::Explicit(v) => {
                if v.len() != n {
                    return Err(Error::DimensionMismatch { expected: n, got: v.len() });
                }
                v.clone()
            }
        };
        let state = OgmState { k: 1, a: a1, gamma: gamma1, point, v };
        Ok(Self { oracle, metric, constants, a1, gamma1, state, oracle_calls: 1 })
    }

    pub fn state(&self) -> &OgmState {
        &self.state
    }

    pub fn step(&mut self) -> Result<OgmStep> {
        let c = self.constants;
        let (mu, r, l) = (c.mu, c.r(), c.lipschitz);
        let s = &self.state;
        let w = weight_update(s.a, s.gamma, l, mu)?;
        let y = oracle_point(s.a, s.gamma, w.a_bar, w.gamma_bar, &s.point.x, &s.v, r);
        let next = OraclePoint::evaluate(self.oracle, self.metric, y, s.k + 1)?;
        self.oracle_calls += 1;
        let v = optimum_update(w.gamma_next, w.gamma_bar, w.a_bar, &s.v, &next.y, &next.g, mu, self.metric);
        if !all_finite(&v) {
            return Err(Error::NonFinite { what: "estimate optimum", iteration: s.k + 1 });
        }

        let m = self.metric;
        let yp = &next.y;
        let gn_next = m.dual_norm_sq(&next.g);
        let gn_prev = m.dual_norm_sq(&s.point.g);
        let gap_increment = 0.5 * s.gamma * m.dist_sq(&s.v, yp) - 0.5 * w.gamma_next * m.dist_sq(&v, yp)
            + 0.5 * mu * r * (w.a_next + w.a) * m.dist_sq(yp, &next.x)
            - 0.5 * mu * r * s.a * m.dist_sq(yp, &s.point.x)
            + (w.a_next + w.a) / (2.0 * l) * gn_next
            - s.a / (2.0 * l) * gn_prev
            + s.a * (s.point.f_y - next.f_y);

        let resid = oracle_point_residual(s.a, s.gamma, w.a_bar, w.gamma_bar, &s.point.x, &s.v, yp, r);
        let v_minus_y: Vec<f64> = s.v.iter().zip(yp).map(|(a, b)| a - b).collect();
        let coef = r * w.a_next / l - w.a_bar * w.a_bar / (2.0 * w.gamma_next);
        let first = coef
            * (gn_next - mu * mu * s.gamma * w.gamma_next / (w.gamma_bar * w.gamma_bar) * m.norm_sq(&v_minus_y));
        let bv = m.apply(&v_minus_y);
        let by = m.apply(&resid);
        let lin: f64 = (0..yp.len())
            .map(|i| {
                let t = w.gamma_bar / w.gamma_next * next.g[i]
                    + mu * (s.gamma / w.gamma_bar * bv[i] - mu / (2.0 * w.gamma_next) * by[i]);
                t * resid[i]
            })
            .sum();

        self.state = OgmState { k: s.k + 1, a: w.a_next, gamma: w.gamma_next, point: next, v };
        Ok(OgmStep { weights: w, gap_increment, potential_rhs: first + lin })
    }
}

/// Runs the generalized optimized gradient method.
pub fn ogm_run<O: SmoothOracle + ?Sized>(
    oracle: &O,
    metric: &Metric,
    config: &OgmConfig,
    x0: &[f64],
    stop: &StoppingRule,
    known: Option<&KnownOptimum>,
) -> Result<RunRecord> {
    stop.validate(known)?;
    let mut solver = Ogm::new(oracle, metric, config, x0)?;
    let mut progress = Progress::new(*stop, known, x0, metric);
    let mut rows = vec![smooth_row(oracle, metric, solver.state(), &progress, solver.oracle_calls)];
    let mut done = progress.update(1, rows[0].dist_sq, rows[0].grad_norm_sq.unwrap_or(f64::INFINITY));
    let mut iterations = 0;
    while !done && iterations < stop.max_iter {
        let step = solver.step()?;
        iterations += 1;
        let mut row = smooth_row(oracle, metric, solver.state(), &progress, solver.oracle_calls);
        row.weight = Some(step.weights.a);
        row.a_bar = Some(step.weights.a_bar);
        row.gamma_bar = Some(step.weights.gamma_bar);
        row.gap_increment = Some(step.gap_increment);
        row.potential_rhs = Some(step.potential_rhs);
        done = progress.update(row.k, row.dist_sq, row.grad_norm_sq.unwrap_or(f64::INFINITY));
        rows.push(row);
    }
    let mut record = RunRecord {
        solver: format!("{:?}", config.mode).to_lowercase(),
        rows,
        iterations,
        iterations_to_threshold: progress.hit,
        x: solver.state().point.x.clone(),
        v: solver.state().v.clone(),
        meta: Default::default(),
    };
    let k = solver.state().k;
    if k >= 2 {
        if let Ok(v) = rate_certificate(&solver.constants, solver.a1, solver.gamma1, k) {
            record.meta.insert("rate_certificate".into(), v);
        }
        if solver.a1 == 0.0 {
            if let Ok(v) = rate_certificate(&solver.constants, solver.a1, solver.gamma1, k + 1) {
                record.meta.insert("rate_certificate_shifted".into(), v);
            }
        }
    }
    record.meta.insert("A1".into(), solver.a1);
    record.meta.insert("gamma1".into(), solver.gamma1);
    Ok(record)
}

pub(crate) fn smooth_row<O: SmoothOracle + ?Sized>(
    oracle: &O,
    metric: &Metric,
    s: &OgmState,
    progress: &Progress<'_>,
    oracle_calls: u64,
) -> TraceRow {
    TraceRow {
        k: s.k,
        a: s.a,
        gamma: s.gamma,
        dist_sq: progress.dist_sq(&s.v, metric),
        x_dist_sq: progress.x_star().map(|xs| metric.dist_sq(&s.point.x, xs)),
        f_val: oracle.value(&s.point.x),
        f_y: Some(s.point.f_y),
        grad_norm_sq: Some(metric.dual_norm_sq(&s.point.g)),
        oracle_calls,
        ..Default::default()
    }
}

/// Triple momentum closed-form step from `(y_k, g_k, v_k)`; returns `y_{k+1}`.
pub fn tmm_oracle_point(q: f64, lipschitz: f64, metric: &Metric, y_k: &[f64], g_k: &[f64], v_k: &[f64]) -> Vec<f64> {
    let sq = q.sqrt();
    let x = gradient_step(lipschitz, metric, y_k, g_k);
    x.iter().zip(v_k).map(|(xi, vi)| (1.0 - sq) / (1.0 + sq) * xi + 2.0 * sq / (1.0 + sq) * vi).collect()
}

/// Triple momentum closed-form `v_{k+1}` from `(v_k, y_{k+1}, g_{k+1})`.
pub fn tmm_optimum(q: f64, mu: f64, metric: &Metric, v_k: &[f64], y_next: &[f64], g_next: &[f64]) -> Vec<f64> {
    let sq = q.sqrt();
    let step = metric.apply_inv(g_next);
    v_k.iter()
        .zip(y_next)
        .zip(&step)
        .map(|((v, y), s)| (1.0 - sq) * v + sq * (y - s / mu))
        .collect()
}
