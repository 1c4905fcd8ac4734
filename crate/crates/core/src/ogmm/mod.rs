//! Optimized gradient method with memory: the generalized OGM whose estimate
//! function keeps a bundle of past bounds, and whose convergence guarantee is
//! raised every iteration by a few Newton steps on the normalized gap.

pub mod bundle;
pub mod nef;
pub mod newton;
pub mod simplex;

use serde::{Deserialize, Serialize};

pub use bundle::{recenter, Bundle, RecenteredBound};
pub use nef::{NefCoefficients, NefContext, NefData};
pub use newton::{newton_adjust, NewtonParams, NewtonResult};
pub use simplex::{project_simplex, qp_objective, simplex_qp_solve, QpSolution};

use crate::error::{Error, Result};
use crate::linalg::all_finite;
use crate::metric::Metric;
use crate::ogm::{oracle_point, rate_certificate, smooth_row, weight_update, OgmConfig, OgmState, V1Choice};
use crate::oracle::{OraclePoint, SmoothConstants, SmoothOracle};
use crate::trace::{KnownOptimum, Progress, RunRecord, StoppingRule};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MemoryConfig {
    #[serde(default = "default_m")]
    pub m_max: usize,
    #[serde(default = "default_n")]
    pub newton_iters: usize,
    #[serde(default = "default_t")]
    pub inner_iters: u64,
    #[serde(default = "default_tol")]
    pub inner_tol: f64,
}

fn default_m() -> usize {
    8
}
fn default_n() -> usize {
    2
}
fn default_t() -> u64 {
    100
}
fn default_tol() -> f64 {
    1e-12
}

impl Default for MemoryConfig {
    fn default() -> Self {
        Self { m_max: default_m(), newton_iters: default_n(), inner_iters: default_t(), inner_tol: default_tol() }
    }
}

impl MemoryConfig {
    fn validate(&self) -> Result<()> {
        if self.m_max == 0 {
            return Err(Error::InvalidParameter("bundle size must be at least 1".into()));
        }
        if !(self.inner_tol >= 0.0) {
            return Err(Error::InvalidParameter(format!("inner_tol must be nonnegative, got {}", self.inner_tol)));
        }
        Ok(())
    }
}

/// Per-step diagnostics.
#[derive(Debug, Clone, PartialEq)]
pub struct OgmmStep {
    pub weight: f64,
    /// `A_k + a_{k+1}` before the Newton adjustment.
    pub a_before: f64,
    pub newton: NewtonResult,
}

/// Stepwise driver; [`ogmm_run`] wraps it with tracing.
pub struct Ogmm<'a, O: SmoothOracle + ?Sized> {
    oracle: &'a O,
    metric: &'a Metric,
    pub constants: SmoothConstants,
    pub memory: MemoryConfig,
    ctx: NefContext,
    state: OgmState,
    bundle: Bundle,
    lambda: Vec<f64>,
    last: Option<(NefData, RecenteredBound)>,
    pub oracle_calls: u64,
}

impl<'a, O: SmoothOracle + ?Sized> Ogmm<'a, O> {
    pub fn new(oracle: &'a O, metric: &'a Metric, config: &OgmConfig, memory: MemoryConfig, x0: &[f64]) -> Result<Self> {
        memory.validate()?;
        let constants = SmoothConstants::of(oracle)?;
        let (a1, gamma1) = config.resolve(&constants)?;
        let n = oracle.dim();
        if x0.len() != n {
            return Err(Error::DimensionMismatch { expected: n, got: x0.len() });
        }
        metric.check_dim(n)?;
        let point = OraclePoint::evaluate(oracle, metric, x0.to_vec(), 1)?;
        let v1 = match &config.v1 {
            V1Choice::X1 => point.x.clone(),
            V1Choice::X0 => x0.to_vec(),
            V1Choice::Explicit(v) => {
                if v.len() != n {
                    return Err(Error::DimensionMismatch { expected: n, got: v.len() });
                }
                v.clone()
            }
        };
        let (mu, r, l) = (constants.mu, constants.r(), constants.lipschitz);
        let rb1 = recenter(point.f_y, &point.y, &point.g, &point.x, &v1, mu, r, l, metric);
        let ctx = NefContext { a1, gamma1, mu, r, v1: v1.clone(), f_y1: point.f_y, rb1 };
        let state = OgmState { k: 1, a: a1, gamma: gamma1, point, v: v1 };
        Ok(Self {
            oracle,
            metric,
            constants,
            memory,
            ctx,
            state,
            bundle: Bundle::new(memory.m_max),
            lambda: Vec::new(),
            last: None,
            oracle_calls: 1,
        })
    }

    pub fn state(&self) -> &OgmState {
        &self.state
    }

    pub fn context(&self) -> &NefContext {
        &self.ctx
    }

    pub fn bundle(&self) -> &Bundle {
        &self.bundle
    }

    /// Weights accepted in the last step.
    pub fn lambda(&self) -> &[f64] {
        &self.lambda
    }

    /// NEF data and newest re-centered bound of the last step.
    pub fn last_nef(&self) -> Option<&(NefData, RecenteredBound)> {
        self.last.as_ref()
    }

    pub fn step(&mut self) -> Result<OgmmStep> {
        let (mu, r, l) = (self.constants.mu, self.constants.r(), self.constants.lipschitz);
        let metric = self.metric;
        let s = &self.state;
        let k = s.k;
        let w = weight_update(s.a, s.gamma, l, mu)?;
        let y = oracle_point(s.a, s.gamma, w.a_bar, w.gamma_bar, &s.point.x, &s.v, r);
        let next = OraclePoint::evaluate(self.oracle, metric, y, k + 1)?;
        self.oracle_calls += 1;
        let rb = recenter(next.f_y, &next.y, &next.g, &next.x, &self.ctx.v1, mu, r, l, metric);

        let a_before = w.a_next;
        let lambda0 = if k == 1 {
            self.bundle.init(rb.h_bar, rb.g_bar.clone(), metric);
            vec![1.0]
        } else {
            let agg = self.bundle.aggregate(&self.lambda);
            self.bundle.push(agg, (rb.h_bar, rb.g_bar.clone()), metric);
            let den = s.a + w.a - self.ctx.a1;
            let mut l0 = vec![0.0; self.bundle.len()];
            l0[0] = (s.a - self.ctx.a1) / den;
            l0[1] = w.a / den;
            l0
        };

        let data = NefData::new(&self.ctx, &self.bundle, &rb, next.f_y, metric);
        let params = NewtonParams {
            max_newton: self.memory.newton_iters,
            inner_iters: self.memory.inner_iters,
            inner_tol: self.memory.inner_tol,
        };
        let newton = newton_adjust(&data, &lambda0, a_before, &params)?;
        let a_new = newton.a;
        let gamma_new = self.ctx.gamma_of(a_new);
        let v = nef::nef_minimizer(&self.ctx, &self.bundle, &rb, a_new, &newton.lambda, metric);
        if !all_finite(&v) {
            return Err(Error::NonFinite { what: "estimate optimum", iteration: k + 1 });
        }
        self.lambda.clone_from(&newton.lambda);
        self.last = Some((data, rb));
        self.state = OgmState { k: k + 1, a: a_new, gamma: gamma_new, point: next, v };
        Ok(OgmmStep { weight: w.a, a_before, newton })
    }
}

/// Runs the optimized gradient method with memory.
pub fn ogmm_run<O: SmoothOracle + ?Sized>(
    oracle: &O,
    metric: &Metric,
    config: &OgmConfig,
    memory: &MemoryConfig,
    x0: &[f64],
    stop: &StoppingRule,
    known: Option<&KnownOptimum>,
) -> Result<RunRecord> {
    stop.validate(known)?;
    let mut solver = Ogmm::new(oracle, metric, config, *memory, x0)?;
    let mut progress = Progress::new(*stop, known, x0, metric);
    let mut rows = vec![smooth_row(oracle, metric, solver.state(), &progress, solver.oracle_calls)];
    let mut done = progress.update(1, rows[0].dist_sq, rows[0].grad_norm_sq.unwrap_or(f64::INFINITY));
    let mut iterations = 0;
    let mut inner_total = 0;
    while !done && iterations < stop.max_iter {
        let step = solver.step()?;
        iterations += 1;
        inner_total += step.newton.inner_iters;
        let mut row = smooth_row(oracle, metric, solver.state(), &progress, solver.oracle_calls);
        row.weight = Some(step.weight);
        row.a_before = Some(step.a_before);
        row.newton_iters = Some(step.newton.newton_iters);
        row.phi = Some(step.newton.phi);
        row.inner_iters = inner_total;
        done = progress.update(row.k, row.dist_sq, row.grad_norm_sq.unwrap_or(f64::INFINITY));
        rows.push(row);
    }
    let mut record = RunRecord {
        solver: "ogmm".into(),
        rows,
        iterations,
        iterations_to_threshold: progress.hit,
        x: solver.state().point.x.clone(),
        v: solver.state().v.clone(),
        meta: Default::default(),
    };
    let k = solver.state().k;
    let (a1, g1) = (solver.ctx.a1, solver.ctx.gamma1);
    if k >= 2 {
        if let Ok(v) = rate_certificate(&solver.constants, a1, g1, k) {
            record.meta.insert("rate_certificate".into(), v);
        }
    }
    record.meta.insert("A1".into(), a1);
    record.meta.insert("gamma1".into(), g1);
    Ok(record)
}
