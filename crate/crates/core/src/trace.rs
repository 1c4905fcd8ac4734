//! Per-iteration run traces, stopping rules and CSV round-tripping.

use std::collections::BTreeMap;
use std::io::{Read, Write};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Reference solution used for iterate-error metrics and certificates.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct KnownOptimum {
    pub x: Vec<f64>,
    pub f: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct StoppingRule {
    pub max_iter: usize,
    /// Stop once `‖v_k − x*‖ / ‖x_0 − x*‖ < eps_rel`; needs a known optimum.
    #[serde(default)]
    pub eps_rel: Option<f64>,
    /// Stop once the dual norm of the last gradient (or gradient mapping) drops below this.
    #[serde(default)]
    pub grad_tol: Option<f64>,
}

impl StoppingRule {
    pub fn iterations(max_iter: usize) -> Self {
        Self { max_iter, eps_rel: None, grad_tol: None }
    }

    pub fn validate(&self, known: Option<&KnownOptimum>) -> Result<()> {
        if let Some(eps) = self.eps_rel {
            if !(eps > 0.0 && eps < 1.0) {
                return Err(Error::InvalidParameter(format!("eps_rel must lie in (0, 1), got {eps}")));
            }
            if known.is_none() {
                return Err(Error::MissingOptimum("the relative iterate-error stopping rule"));
            }
        }
        if let Some(t) = self.grad_tol {
            if !(t > 0.0) {
                return Err(Error::InvalidParameter(format!("grad_tol must be positive, got {t}")));
            }
        }
        Ok(())
    }
}

/// Tracks the relative iterate error against a known optimum.
#[derive(Debug, Clone)]
pub(crate) struct Progress<'a> {
    known: Option<&'a KnownOptimum>,
    initial_dist_sq: f64,
    rule: StoppingRule,
    pub(crate) hit: Option<usize>,
}

impl<'a> Progress<'a> {
    pub(crate) fn new(rule: StoppingRule, known: Option<&'a KnownOptimum>, x0: &[f64], metric: &crate::Metric) -> Self {
        let initial_dist_sq = known.map_or(f64::NAN, |k| metric.dist_sq(x0, &k.x));
        Self { known, initial_dist_sq, rule, hit: None }
    }

    pub(crate) fn dist_sq(&self, v: &[f64], metric: &crate::Metric) -> Option<f64> {
        self.known.map(|k| metric.dist_sq(v, &k.x))
    }

    pub(crate) fn x_star(&self) -> Option<&'a [f64]> {
        self.known.map(|k| k.x.as_slice())
    }

    pub(crate) fn f_star(&self) -> Option<f64> {
        self.known.map(|k| k.f)
    }

    /// Records iteration `k`; returns true when the run should stop.
    pub(crate) fn update(&mut self, k: usize, dist_sq: Option<f64>, grad_dual_norm_sq: f64) -> bool {
        if let (Some(eps), Some(d)) = (self.rule.eps_rel, dist_sq) {
            let reached = if self.initial_dist_sq > 0.0 { d < eps * eps * self.initial_dist_sq } else { d == 0.0 };
            if reached {
                self.hit.get_or_insert(k);
                return true;
            }
        }
        if let Some(t) = self.rule.grad_tol {
            if grad_dual_norm_sq < t * t {
                return true;
            }
        }
        false
    }
}

/// One trace row. The first ten columns are the stable schema; the rest are
/// solver-specific diagnostics and stay empty where they do not apply.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct TraceRow {
    pub k: usize,
    pub a: f64,
    pub gamma: f64,
    pub lipschitz: Option<f64>,
    pub alpha: Option<f64>,
    /// `‖v_k − x*‖²` in the metric.
    pub dist_sq: Option<f64>,
    /// `f(x_k)` (smooth) or `F(x_k)` (composite).
    pub f_val: f64,
    pub gap_increment: Option<f64>,
    pub oracle_calls: u64,
    pub inner_iters: u64,
    pub f_y: Option<f64>,
    pub grad_norm_sq: Option<f64>,
    /// `‖x_k − x*‖²` in the metric.
    pub x_dist_sq: Option<f64>,
    pub weight: Option<f64>,
    pub a_bar: Option<f64>,
    pub gamma_bar: Option<f64>,
    pub a_before: Option<f64>,
    pub newton_iters: Option<u64>,
    pub phi: Option<f64>,
    pub backtracks: Option<u64>,
    pub q: Option<f64>,
    pub l_bar: Option<f64>,
    pub a1_printed: Option<f64>,
    pub a1_line: Option<f64>,
    pub a2: Option<f64>,
    /// Right-hand side of the per-step potential decrease bound (smooth solvers).
    pub potential_rhs: Option<f64>,
}

pub const COLUMNS: [&str; 26] = [
    "k",
    "A",
    "gamma",
    "L",
    "alpha",
    "dist_sq",
    "f_val",
    "gap_increment",
    "oracle_calls",
    "inner_iters",
    "f_y",
    "grad_norm_sq",
    "x_dist_sq",
    "a",
    "a_bar",
    "gamma_bar",
    "A_before",
    "newton_iters",
    "phi",
    "backtracks",
    "q",
    "L_bar",
    "a1_printed",
    "a1_line",
    "a2",
    "potential_rhs",
];

fn fmt_f(v: f64) -> String {
    format!("{v:.16e}")
}

fn fmt_of(v: Option<f64>) -> String {
    v.map(fmt_f).unwrap_or_default()
}

fn fmt_ou(v: Option<u64>) -> String {
    v.map(|x| x.to_string()).unwrap_or_default()
}

impl TraceRow {
    fn to_record(&self) -> Vec<String> {
        vec![
            self.k.to_string(),
            fmt_f(self.a),
            fmt_f(self.gamma),
            fmt_of(self.lipschitz),
            fmt_of(self.alpha),
            fmt_of(self.dist_sq),
            fmt_f(self.f_val),
            fmt_of(self.gap_increment),
            self.oracle_calls.to_string(),
            self.inner_iters.to_string(),
            fmt_of(self.f_y),
            fmt_of(self.grad_norm_sq),
            fmt_of(self.x_dist_sq),
            fmt_of(self.weight),
            fmt_of(self.a_bar),
            fmt_of(self.gamma_bar),
            fmt_of(self.a_before),
            fmt_ou(self.newton_iters),
            fmt_of(self.phi),
            fmt_ou(self.backtracks),
            fmt_of(self.q),
            fmt_of(self.l_bar),
            fmt_of(self.a1_printed),
            fmt_of(self.a1_line),
            fmt_of(self.a2),
            fmt_of(self.potential_rhs),
        ]
    }

    fn from_record(rec: &csv::StringRecord, line: usize) -> Result<Self> {
        if rec.len() != COLUMNS.len() {
            return Err(Error::Trace(format!("line {line}: expected {} fields, got {}", COLUMNS.len(), rec.len())));
        }
        let field = |i: usize| rec.get(i).unwrap_or("").trim();
        let opt_f = |i: usize| -> Result<Option<f64>> {
            let s = field(i);
            if s.is_empty() {
                return Ok(None);
            }
            s.parse::<f64>()
                .map(Some)
                .map_err(|_| Error::Trace(format!("line {line}, column {}: bad number {s:?}", COLUMNS[i])))
        };
        let opt_u = |i: usize| -> Result<Option<u64>> {
            let s = field(i);
            if s.is_empty() {
                return Ok(None);
            }
            s.parse::<u64>()
                .map(Some)
                .map_err(|_| Error::Trace(format!("line {line}, column {}: bad integer {s:?}", COLUMNS[i])))
        };
        let req_f = |i: usize| -> Result<f64> {
            opt_f(i)?.ok_or_else(|| Error::Trace(format!("line {line}: column {} is required", COLUMNS[i])))
        };
        let req_u = |i: usize| -> Result<u64> {
            opt_u(i)?.ok_or_else(|| Error::Trace(format!("line {line}: column {} is required", COLUMNS[i])))
        };
        Ok(Self {
            k: req_u(0)? as usize,
            a: req_f(1)?,
            gamma: req_f(2)?,
            lipschitz: opt_f(3)?,
            alpha: opt_f(4)?,
            dist_sq: opt_f(5)?,
            f_val: req_f(6)?,
            gap_increment: opt_f(7)?,
            oracle_calls: req_u(8)?,
            inner_iters: req_u(9)?,
            f_y: opt_f(10)?,
            grad_norm_sq: opt_f(11)?,
            x_dist_sq: opt_f(12)?,
            weight: opt_f(13)?,
            a_bar: opt_f(14)?,
            gamma_bar: opt_f(15)?,
            a_before: opt_f(16)?,
            newton_iters: opt_u(17)?,
            phi: opt_f(18)?,
            backtracks: opt_u(19)?,
            q: opt_f(20)?,
            l_bar: opt_f(21)?,
            a1_printed: opt_f(22)?,
            a1_line: opt_f(23)?,
            a2: opt_f(24)?,
            potential_rhs: opt_f(25)?,
        })
    }
}

/// Result of a solver run.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct RunRecord {
    pub solver: String,
    pub rows: Vec<TraceRow>,
    /// Number of iterations executed after the initial row.
    pub iterations: usize,
    /// First iteration at which the relative iterate-error rule was met.
    pub iterations_to_threshold: Option<usize>,
    pub x: Vec<f64>,
    pub v: Vec<f64>,
    /// Scalar metadata such as rate certificates.
    pub meta: BTreeMap<String, f64>,
}

impl RunRecord {
    pub fn last(&self) -> &TraceRow {
        self.rows.last().expect("a run record always holds the initial row")
    }

    pub fn write_csv<W: Write>(&self, w: W) -> Result<()> {
        write_trace_csv(&self.rows, w)
    }
}

pub fn write_trace_csv<W: Write>(rows: &[TraceRow], w: W) -> Result<()> {
    let mut wr = csv::Writer::from_writer(w);
    wr.write_record(COLUMNS)?;
    for row in rows {
        wr.write_record(row.to_record())?;
    }
    wr.flush().map_err(|e| Error::Io { path: "<trace writer>".into(), source: e })?;
    Ok(())
}

pub fn read_trace_csv<R: Read>(r: R) -> Result<Vec<TraceRow>> {
    let mut rd = csv::Reader::from_reader(r);
    let headers = rd.headers()?.clone();
    if headers.iter().collect::<Vec<_>>() != COLUMNS {
        return Err(Error::Trace(format!("unexpected header {:?}", headers.iter().collect::<Vec<_>>())));
    }
    let mut rows = Vec::new();
    for (i, rec) in rd.records().enumerate() {
        rows.push(TraceRow::from_record(&rec?, i + 2)?);
    }
    Ok(rows)
}
