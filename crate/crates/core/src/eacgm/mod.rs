//! Enhanced accelerated composite gradient method: proximal gradient steps
//! with a fully adaptive line search and a dampened strong convexity bound.
//! Dampening `α = 0` gives the classic accelerated composite gradient method.

pub mod dampening;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::all_finite;
use crate::metric::Metric;
use crate::oracle::{composite_gradient_mapping, descent_rule_holds, prox_grad_step_with_gradient, CompositeOracle};
use crate::trace::{KnownOptimum, Progress, RunRecord, StoppingRule, TraceRow};

pub use dampening::{
    alpha_max, dampening_table, delta, rate_certificate, rate_ratio, worst_case_lipschitz, DampeningTable,
    REFERENCE_QL, REFERENCE_RATIOS, WORST_CASE_ALPHA, WORST_CASE_Q,
};

/// The line search gives up once the estimate exceeds this multiple of `L_0`.
pub const LINE_SEARCH_LIMIT: f64 = 1e15;

/// How the (constant) dampening parameter is chosen.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
#[serde(tag = "policy", rename_all = "snake_case")]
pub enum AlphaPolicy {
    Constant {
        alpha: f64,
    },
    /// `α = 0.7542`, safe for every local condition number.
    #[default]
    WorstCase,
    /// `α_max(q_l)` with `q_l = μ/(L_l + μ_Ψ)` when `q_l ≤ 1/3`; the worst-case
    /// value otherwise.
    FromLl,
}

impl AlphaPolicy {
    pub fn resolve(&self, l_l: f64, mu_f: f64, mu_psi: f64) -> Result<f64> {
        match *self {
            AlphaPolicy::Constant { alpha } => {
                if !(0.0..=1.0).contains(&alpha) {
                    return Err(Error::InvalidParameter(format!("alpha must lie in [0, 1], got {alpha}")));
                }
                Ok(alpha)
            }
            AlphaPolicy::WorstCase => Ok(WORST_CASE_ALPHA),
            AlphaPolicy::FromLl => {
                let mu = mu_f + mu_psi;
                let denom = l_l + mu_psi;
                if mu == 0.0 {
                    return Ok(1.0);
                }
                if denom <= 0.0 {
                    return Ok(WORST_CASE_ALPHA);
                }
                let q_l = mu / denom;
                if q_l <= 1.0 / 3.0 {
                    alpha_max(q_l)
                } else {
                    Ok(WORST_CASE_ALPHA)
                }
            }
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EacgmConfig {
    #[serde(default)]
    pub alpha_policy: AlphaPolicy,
    /// Initial Lipschitz estimate; `None` takes the oracle's hint.
    #[serde(default)]
    pub l0: Option<f64>,
    /// Lower bound on the Lipschitz estimate.
    #[serde(default)]
    pub l_l: f64,
    #[serde(default = "default_r_u")]
    pub r_u: f64,
    #[serde(default = "default_r_d")]
    pub r_d: f64,
    #[serde(default)]
    pub a0: f64,
    #[serde(default = "one")]
    pub gamma0: f64,
}

fn default_r_u() -> f64 {
    2.0
}

fn default_r_d() -> f64 {
    0.9
}

fn one() -> f64 {
    1.0
}

impl Default for EacgmConfig {
    fn default() -> Self {
        Self {
            alpha_policy: AlphaPolicy::default(),
            l0: None,
            l_l: 0.0,
            r_u: default_r_u(),
            r_d: default_r_d(),
            a0: 0.0,
            gamma0: 1.0,
        }
    }
}

impl EacgmConfig {
    pub fn with_alpha(alpha: f64) -> Self {
        Self { alpha_policy: AlphaPolicy::Constant { alpha }, ..Self::default() }
    }

    /// Checks every parameter that does not depend on the oracle.
    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(Error::InvalidParameter(m));
        if let AlphaPolicy::Constant { alpha } = self.alpha_policy {
            if !(0.0..=1.0).contains(&alpha) {
                return bad(format!("alpha must lie in [0, 1], got {alpha}"));
            }
        }
        if let Some(l0) = self.l0 {
            if !(l0.is_finite() && l0 > 0.0) {
                return bad(format!("L0 must be positive, got {l0}"));
            }
        }
        if !(self.l_l.is_finite() && self.l_l >= 0.0) {
            return bad(format!("L_l must be nonnegative, got {}", self.l_l));
        }
        if !(self.r_u.is_finite() && self.r_u > 1.0) {
            return bad(format!("r_u must exceed 1, got {}", self.r_u));
        }
        if !(self.r_d > 0.0 && self.r_d <= 1.0) {
            return bad(format!("r_d must lie in (0, 1], got {}", self.r_d));
        }
        if !(self.a0.is_finite() && self.a0 >= 0.0) {
            return bad(format!("A0 must be nonnegative, got {}", self.a0));
        }
        if !(self.gamma0.is_finite() && self.gamma0 > 0.0) {
            return bad(format!("gamma0 must be positive, got {}", self.gamma0));
        }
        Ok(())
    }
}

/// Roots of the two quadratics bracketing the admissible weight.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WeightQuadratics {
    /// Upper root as printed in the derivation, with `μβA/(1 + q)` in the
    /// constant term; `None` when that quadratic has no real root.
    pub a1_printed: Option<f64>,
    /// Upper root of the equality form of the weight condition, i.e. the
    /// weight the method actually takes.
    pub a1_line: f64,
    /// Smallest weight keeping `γ̄² ≥ γ_kγ_{k+1}`; zero when the constraint is inactive.
    pub a2: f64,
    pub beta: f64,
    pub beta_bar: f64,
}

impl WeightQuadratics {
    /// The sufficient condition `a2 ≤ a1` for the weight actually taken.
    pub fn admissible(&self) -> bool {
        self.a2 <= self.a1_line
    }
}

fn check_lbar(l_bar: f64, mu: f64) -> Result<()> {
    if !(l_bar > mu) {
        return Err(Error::Domain(format!("need L_bar > mu, got L_bar = {l_bar}, mu = {mu}")));
    }
    Ok(())
}

/// Step weight `a_{k+1}` making `(1 + qα')A'γ' = L̄ā²` hold with equality.
#[allow(clippy::too_many_arguments)]
pub fn eacgm_step_weight(
    a: f64,
    gamma: f64,
    gamma_tilde: f64,
    alpha: f64,
    alpha_next: f64,
    q_next: f64,
    l_bar_next: f64,
    mu: f64,
) -> Result<f64> {
    check_lbar(l_bar_next, mu)?;
    let beta_bar = alpha_next / (1.0 + q_next * alpha_next) - alpha;
    let disc = gamma_tilde * gamma_tilde + 4.0 * (l_bar_next - mu) * a * (gamma + mu * beta_bar * a);
    if !(disc >= 0.0) {
        return Err(Error::Domain(format!("negative discriminant {disc} in the weight update")));
    }
    let w = (gamma_tilde + disc.sqrt()) / (2.0 * (l_bar_next - mu));
    if !(w > 0.0 && w.is_finite()) {
        return Err(Error::Domain(format!("weight update produced {w}")));
    }
    Ok(w)
}

/// Largest root of `c2 t² + c1 t + c0`, if real.
fn upper_root(c2: f64, c1: f64, c0: f64) -> Option<f64> {
    if c2 == 0.0 {
        return if c1 != 0.0 { Some(-c0 / c1) } else { None };
    }
    let disc = c1 * c1 - 4.0 * c2 * c0;
    if disc < 0.0 {
        return None;
    }
    let s = disc.sqrt();
    // Cancellation-free pair of roots.
    let t = -0.5 * (c1 + c1.signum() * s);
    let (r1, r2) = if t != 0.0 { (t / c2, c0 / t) } else { (0.0, 0.0) };
    Some(r1.max(r2))
}

#[allow(clippy::too_many_arguments)]
pub fn weight_quadratics(
    a: f64,
    gamma: f64,
    alpha: f64,
    alpha_next: f64,
    q_next: f64,
    l_bar_next: f64,
    mu: f64,
) -> Result<WeightQuadratics> {
    check_lbar(l_bar_next, mu)?;
    let beta = alpha_next - alpha - q_next * alpha * alpha_next;
    let beta_bar = alpha_next / (1.0 + q_next * alpha_next) - alpha;
    let gamma_tilde = gamma + mu * (1.0 - alpha) * a;
    let a1_line = eacgm_step_weight(a, gamma, gamma_tilde, alpha, alpha_next, q_next, l_bar_next, mu)?;
    let a1_printed =
        upper_root(l_bar_next - mu, -gamma_tilde, -a * (gamma + mu * beta * a / (1.0 + q_next))).filter(|v| *v > 0.0);
    let a2 = if mu == 0.0 {
        0.0
    } else {
        let c2 = mu * (1.0 + beta).powi(2);
        let c1 = (1.0 - alpha_next + 2.0 * beta) * gamma + 2.0 * mu * beta * (1.0 + beta) * a;
        let c0 = a * ((alpha - alpha_next + 2.0 * beta) * gamma + mu * beta * beta * a);
        upper_root(c2, c1, c0).filter(|v| *v > 0.0).unwrap_or(0.0)
    };
    Ok(WeightQuadratics { a1_printed, a1_line, a2, beta, beta_bar })
}

/// State at the start of an iteration.
#[derive(Debug, Clone, PartialEq)]
pub struct EacgmState {
    pub k: usize,
    pub a: f64,
    pub gamma: f64,
    pub x: Vec<f64>,
    pub v: Vec<f64>,
    /// `F(x_k)`.
    pub f_x: f64,
    /// Accepted Lipschitz estimate `L_k` (`L_0` before the first step).
    pub lipschitz: f64,
    pub alpha: f64,
}

/// Scalars of an accepted line-search trial.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StepScalars {
    pub a: f64,
    pub a_next: f64,
    pub a_bar: f64,
    pub gamma_next: f64,
    pub gamma_bar: f64,
    pub gamma_tilde: f64,
    pub beta_bar: f64,
    pub q: f64,
    pub l_bar: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct LineSearchOutcome {
    pub lipschitz: f64,
    pub y: Vec<f64>,
    pub x: Vec<f64>,
    /// Composite gradient mapping at the accepted trial.
    pub g: Vec<f64>,
    /// `f(x_{k+1})` and `F(x_{k+1})`.
    pub f_x: f64,
    pub big_f_x: f64,
    pub scalars: StepScalars,
    pub quadratics: WeightQuadratics,
    pub backtracks: u64,
    pub oracle_calls: u64,
}

/// Scalar recursions of one trial with estimate `L`.
fn trial_scalars(s: &EacgmState, alpha_next: f64, lipschitz: f64, mu: f64, mu_psi: f64) -> Result<StepScalars> {
    let l_bar = lipschitz + mu_psi;
    let q = mu / l_bar;
    let gamma_tilde = s.gamma + mu * (1.0 - s.alpha) * s.a;
    let beta_bar = alpha_next / (1.0 + q * alpha_next) - s.alpha;
    let a = eacgm_step_weight(s.a, s.gamma, gamma_tilde, s.alpha, alpha_next, q, l_bar, mu)?;
    let a_next = s.a + a;
    let a_bar = a + q * alpha_next * a_next;
    let gamma_next = s.gamma + mu * (a + alpha_next * a_next - s.alpha * s.a);
    let gamma_bar = gamma_next - mu * s.alpha * a_bar;
    Ok(StepScalars { a, a_next, a_bar, gamma_next, gamma_bar, gamma_tilde, beta_bar, q, l_bar })
}

/// Auxiliary point `(A γ̄ x + ā γ v)/(A γ̄ + ā γ)`.
pub fn auxiliary_point(a: f64, gamma: f64, a_bar: f64, gamma_bar: f64, x: &[f64], v: &[f64]) -> Vec<f64> {
    let wx = a * gamma_bar;
    let wv = a_bar * gamma;
    let s = wx + wv;
    x.iter().zip(v).map(|(xi, vi)| (wx * xi + wv * vi) / s).collect()
}

/// `A(x − y) + (āγ/γ̄)(v − y)` divided by `A + āγ/γ̄`; zero by construction
/// of the auxiliary point. The normalization keeps the residual on the scale
/// of the iterates as `A` grows.
pub fn auxiliary_residual(a: f64, gamma: f64, a_bar: f64, gamma_bar: f64, x: &[f64], v: &[f64], y: &[f64]) -> Vec<f64> {
    let c = a_bar * gamma / gamma_bar;
    let s = a + c;
    x.iter().zip(v).zip(y).map(|((xi, vi), yi)| (a * (xi - yi) + c * (vi - yi)) / s).collect()
}

/// Runs the backtracking loop for one iteration. The starting estimate is
/// `max(L_l, r_d L_k)`; each rejected trial multiplies it by `r_u`.
pub fn line_search_step<O: CompositeOracle + ?Sized>(
    oracle: &O,
    metric: &Metric,
    config: &EacgmConfig,
    l0: f64,
    state: &EacgmState,
    alpha_next: f64,
) -> Result<LineSearchOutcome> {
    let (mu_f, mu_psi) = (oracle.mu_f(), oracle.mu_psi());
    let mu = mu_f + mu_psi;
    let iteration = state.k + 1;
    let mut lipschitz = config.l_l.max(config.r_d * state.lipschitz);
    let mut backtracks = 0;
    let mut oracle_calls = 0;
    loop {
        if lipschitz > LINE_SEARCH_LIMIT * l0 || !lipschitz.is_finite() {
            return Err(Error::LineSearchDiverged { iteration, lipschitz });
        }
        // Estimates at or below μ_f can never pass the descent test on a
        // strongly convex f, and the weight update is undefined there.
        if lipschitz + mu_psi <= mu {
            lipschitz *= config.r_u;
            backtracks += 1;
            continue;
        }
        let sc = trial_scalars(state, alpha_next, lipschitz, mu, mu_psi)?;
        let y = auxiliary_point(state.a, state.gamma, sc.a_bar, sc.gamma_bar, &state.x, &state.v);
        let (f_y, g_y) = oracle.smooth_value_and_gradient(&y);
        oracle_calls += 1;
        if !f_y.is_finite() || !all_finite(&g_y) {
            return Err(Error::NonFinite { what: "smooth oracle output", iteration });
        }
        let x = prox_grad_step_with_gradient(oracle, metric, &y, &g_y, lipschitz)
            .map_err(|e| match e {
                Error::NonFinite { what, .. } => Error::NonFinite { what, iteration },
                other => other,
            })?;
        let f_x = oracle.smooth_value(&x);
        oracle_calls += 1;
        if !f_x.is_finite() {
            return Err(Error::NonFinite { what: "smooth objective at the prox point", iteration });
        }
        if descent_rule_holds(f_x, f_y, &g_y, &x, &y, lipschitz, metric) {
            let g = composite_gradient_mapping(&y, &x, sc.l_bar, metric);
            let quadratics = weight_quadratics(state.a, state.gamma, state.alpha, alpha_next, sc.q, sc.l_bar, mu)?;
            let big_f_x = f_x + oracle.regularizer(&x);
            return Ok(LineSearchOutcome {
                lipschitz,
                y,
                x,
                g,
                f_x,
                big_f_x,
                scalars: sc,
                quadratics,
                backtracks,
                oracle_calls,
            });
        }
        lipschitz *= config.r_u;
        backtracks += 1;
    }
}

/// `v_{k+1} = (γ/γ̄)v + (1 − γ/γ̄)y − (ā/γ')B⁻¹g`
pub fn optimum_update(
    gamma: f64,
    gamma_bar: f64,
    gamma_next: f64,
    a_bar: f64,
    v: &[f64],
    y: &[f64],
    g: &[f64],
    metric: &Metric,
) -> Vec<f64> {
    let t = gamma / gamma_bar;
    let step = metric.apply_inv(g);
    v.iter()
        .zip(y)
        .zip(&step)
        .map(|((vi, yi), si)| t * vi + (1.0 - t) * yi - a_bar / gamma_next * si)
        .collect()
}

/// Increase of the estimate sequence gap over one accepted step:
/// `γ/2‖v − y'‖² − γ'/2‖v' − y'‖² − μαA/2‖x − y'‖² + ā/(2L̄)‖g'‖² + A(F(x) − F(x'))`.
#[allow(clippy::too_many_arguments)]
pub fn gap_increment(
    metric: &Metric,
    state: &EacgmState,
    mu: f64,
    y: &[f64],
    v_next: &[f64],
    g: &[f64],
    sc: &StepScalars,
    objective_drop: f64,
) -> f64 {
    let drop = if state.a == 0.0 { 0.0 } else { state.a * objective_drop };
    0.5 * state.gamma * metric.dist_sq(&state.v, y) - 0.5 * sc.gamma_next * metric.dist_sq(v_next, y)
        - 0.5 * mu * state.alpha * state.a * metric.dist_sq(&state.x, y)
        + sc.a_bar / (2.0 * sc.l_bar) * metric.dual_norm_sq(g)
        + drop
}

#[derive(Debug, Clone, PartialEq)]
pub struct EacgmStep {
    pub scalars: StepScalars,
    pub quadratics: WeightQuadratics,
    pub lipschitz: f64,
    pub backtracks: u64,
    pub gap_increment: f64,
    pub grad_norm_sq: f64,
    /// Norm of the normalized auxiliary-point residual, which should vanish.
    pub residual_norm: f64,
}

/// Stepping interface. [`Eacgm::step`] uses the configured constant
/// dampening; [`Eacgm::step_with_alpha`] lets callers pick `α_{k+1}` per
/// iteration.
pub struct Eacgm<'a, O: CompositeOracle + ?Sized> {
    oracle: &'a O,
    metric: &'a Metric,
    config: EacgmConfig,
    state: EacgmState,
    pub l0: f64,
    pub alpha: f64,
    pub mu: f64,
    pub oracle_calls: u64,
}

impl<'a, O: CompositeOracle + ?Sized> Eacgm<'a, O> {
    pub fn new(oracle: &'a O, metric: &'a Metric, config: &EacgmConfig, x0: &[f64]) -> Result<Self> {
        config.validate()?;
        metric.check_dim(oracle.dim())?;
        if x0.len() != oracle.dim() {
            return Err(Error::DimensionMismatch { expected: oracle.dim(), got: x0.len() });
        }
        let (mu_f, mu_psi) = (oracle.mu_f(), oracle.mu_psi());
        if !(mu_f >= 0.0 && mu_psi >= 0.0) {
            return Err(Error::InvalidParameter("strong convexity parameters must be nonnegative".into()));
        }
        let l0 = config.l0.or_else(|| oracle.lipschitz_hint()).ok_or_else(|| {
            Error::InvalidParameter("L0 is not set and the oracle provides no Lipschitz hint".into())
        })?;
        if !(l0.is_finite() && l0 > 0.0) {
            return Err(Error::InvalidParameter(format!("L0 must be positive, got {l0}")));
        }
        let alpha = config.alpha_policy.resolve(config.l_l, mu_f, mu_psi)?;
        let f_x = oracle.objective(x0);
        if !f_x.is_finite() {
            return Err(Error::NonFinite { what: "objective at the starting point", iteration: 0 });
        }
        let state = EacgmState {
            k: 0,
            a: config.a0,
            gamma: config.gamma0,
            x: x0.to_vec(),
            v: x0.to_vec(),
            f_x,
            lipschitz: l0,
            alpha,
        };
        Ok(Self { oracle, metric, config: *config, state, l0, alpha, mu: mu_f + mu_psi, oracle_calls: 0 })
    }

    pub fn state(&self) -> &EacgmState {
        &self.state
    }

    pub fn config(&self) -> &EacgmConfig {
        &self.config
    }

    pub fn step(&mut self) -> Result<EacgmStep> {
        self.step_with_alpha(self.alpha)
    }

    pub fn step_with_alpha(&mut self, alpha_next: f64) -> Result<EacgmStep> {
        if !(0.0..=1.0).contains(&alpha_next) {
            return Err(Error::InvalidParameter(format!("alpha must lie in [0, 1], got {alpha_next}")));
        }
        let s = &self.state;
        let out = line_search_step(self.oracle, self.metric, &self.config, self.l0, s, alpha_next)?;
        self.oracle_calls += out.oracle_calls;
        let sc = out.scalars;
        let v_next = optimum_update(s.gamma, sc.gamma_bar, sc.gamma_next, sc.a_bar, &s.v, &out.y, &out.g, self.metric);
        if !all_finite(&v_next) {
            return Err(Error::NonFinite { what: "estimate function optimum", iteration: s.k + 1 });
        }
        let drop = if s.a == 0.0 { 0.0 } else { self.oracle.objective_difference(&s.x, &out.x) };
        let gap = gap_increment(self.metric, s, self.mu, &out.y, &v_next, &out.g, &sc, drop);
        let residual = auxiliary_residual(s.a, s.gamma, sc.a_bar, sc.gamma_bar, &s.x, &s.v, &out.y);
        let step = EacgmStep {
            scalars: sc,
            quadratics: out.quadratics,
            lipschitz: out.lipschitz,
            backtracks: out.backtracks,
            gap_increment: gap,
            grad_norm_sq: self.metric.dual_norm_sq(&out.g),
            residual_norm: self.metric.norm_sq(&residual).sqrt(),
        };
        self.state = EacgmState {
            k: s.k + 1,
            a: sc.a_next,
            gamma: sc.gamma_next,
            x: out.x,
            v: v_next,
            f_x: out.big_f_x,
            lipschitz: out.lipschitz,
            alpha: alpha_next,
        };
        Ok(step)
    }
}

/// `A_0(F(x_0) − F* − μα_0/2‖x_0 − x*‖²) + γ_0/2‖x_0 − x*‖²`
pub fn initial_distance_term(a0: f64, gamma0: f64, alpha0: f64, mu: f64, f_x0_minus_fstar: f64, dist0_sq: f64) -> f64 {
    let head = if a0 == 0.0 { 0.0 } else { a0 * (f_x0_minus_fstar - 0.5 * mu * alpha0 * dist0_sq) };
    head + 0.5 * gamma0 * dist0_sq
}

pub fn eacgm_run<O: CompositeOracle + ?Sized>(
    oracle: &O,
    metric: &Metric,
    config: &EacgmConfig,
    x0: &[f64],
    stop: &StoppingRule,
    known: Option<&KnownOptimum>,
) -> Result<RunRecord> {
    stop.validate(known)?;
    let mut solver = Eacgm::new(oracle, metric, config, x0)?;
    let mut progress = Progress::new(*stop, known, x0, metric);
    let row_of = |s: &EacgmState, progress: &Progress<'_>, calls: u64| TraceRow {
        k: s.k,
        a: s.a,
        gamma: s.gamma,
        lipschitz: Some(s.lipschitz),
        alpha: Some(s.alpha),
        dist_sq: progress.dist_sq(&s.v, metric),
        x_dist_sq: progress.x_star().map(|xs| metric.dist_sq(&s.x, xs)),
        f_val: s.f_x,
        oracle_calls: calls,
        ..Default::default()
    };
    let mut rows = vec![row_of(solver.state(), &progress, 0)];
    let mut done = progress.update(0, rows[0].dist_sq, f64::INFINITY);
    let mut iterations = 0;
    while !done && iterations < stop.max_iter {
        let step = solver.step()?;
        iterations += 1;
        let mut row = row_of(solver.state(), &progress, solver.oracle_calls);
        row.gap_increment = Some(step.gap_increment);
        row.grad_norm_sq = Some(step.grad_norm_sq);
        row.weight = Some(step.scalars.a);
        row.a_bar = Some(step.scalars.a_bar);
        row.gamma_bar = Some(step.scalars.gamma_bar);
        row.backtracks = Some(step.backtracks);
        row.q = Some(step.scalars.q);
        row.l_bar = Some(step.scalars.l_bar);
        row.a1_printed = step.quadratics.a1_printed;
        row.a1_line = Some(step.quadratics.a1_line);
        row.a2 = Some(step.quadratics.a2);
        done = progress.update(row.k, row.dist_sq, step.grad_norm_sq);
        rows.push(row);
    }
    let s = solver.state();
    let mut record = RunRecord {
        solver: "eacgm".into(),
        rows,
        iterations,
        iterations_to_threshold: progress.hit,
        x: s.x.clone(),
        v: s.v.clone(),
        meta: Default::default(),
    };
    record.meta.insert("alpha".into(), solver.alpha);
    record.meta.insert("L0".into(), solver.l0);
    record.meta.insert("mu".into(), solver.mu);
    if let (Some(xs), Some(fs)) = (progress.x_star(), progress.f_star()) {
        let d0 = metric.dist_sq(x0, xs);
        let f0 = oracle.objective(x0) - fs;
        let big_d0 = initial_distance_term(config.a0, config.gamma0, solver.alpha, solver.mu, f0, d0);
        record.meta.insert("D0".into(), big_d0);
    }
    if let Some(lf) = oracle.lipschitz_hint() {
        if solver.mu > 0.0 && config.a0 == 0.0 && s.k >= 1 {
            let l_u = worst_case_lipschitz(solver.l0, config.r_d, config.r_u, lf);
            if let Ok(c) = rate_certificate(l_u, oracle.mu_f(), oracle.mu_psi(), solver.alpha, s.k) {
                record.meta.insert("rate_certificate".into(), c);
            }
        }
    }
    Ok(record)
}

#[cfg(test)]
mod tests;
