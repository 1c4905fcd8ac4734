//! Invariant checks recomputed from trace rows and problem constants. Each
//! check reports its largest violation and the iteration where it occurred.

use serde::Serialize;

use crate::error::Result;
use crate::ogm::potential_diagnostics;
use crate::oracle::SmoothConstants;
use crate::trace::TraceRow;

/// Problem constants the checks need besides the trace itself.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum TraceConstants {
    /// Smooth solvers: global `L_f` and `μ`.
    Smooth(SmoothConstants),
    /// Composite solvers: total strong convexity `μ = μ_f + μ_Ψ`.
    Composite { mu: f64 },
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Tolerances {
    /// Gap increments must exceed `−gap·(1 + |f|)`.
    pub gap: f64,
    /// Relative slack for identities that hold by construction.
    pub identity: f64,
    /// Relative slack for the distance and potential bounds.
    pub bound: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Self { gap: 1e-9, identity: 1e-10, bound: 1e-9 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CheckResult {
    pub name: &'static str,
    /// `None` when the check could not run; `skipped` then says why.
    pub passed: Option<bool>,
    pub rows_checked: usize,
    /// Largest violation, in the units of the check (zero when satisfied).
    pub max_violation: f64,
    /// Iteration `k` of the worst row.
    pub worst_k: Option<usize>,
    pub failures: usize,
    pub skipped: Option<String>,
}

impl CheckResult {
    fn skipped(name: &'static str, why: &str) -> Self {
        Self {
            name,
            passed: None,
            rows_checked: 0,
            max_violation: 0.0,
            worst_k: None,
            failures: 0,
            skipped: Some(why.to_string()),
        }
    }
}

/// Accumulates `violation > 0` observations for one check.
struct Tally {
    name: &'static str,
    rows: usize,
    worst: f64,
    worst_k: Option<usize>,
    failures: usize,
}

impl Tally {
    fn new(name: &'static str) -> Self {
        Self { name, rows: 0, worst: 0.0, worst_k: None, failures: 0 }
    }

    /// `violation` is the amount by which the row breaks the invariant
    /// beyond its tolerance; NaN counts as a failure.
    fn observe(&mut self, k: usize, violation: f64) {
        self.rows += 1;
        let v = if violation.is_nan() { f64::INFINITY } else { violation };
        if v > 0.0 {
            self.failures += 1;
        }
        if self.worst_k.is_none() || v > self.worst {
            self.worst = v.max(0.0);
            if v > 0.0 || self.worst_k.is_none() {
                self.worst_k = Some(k);
            }
        }
    }

    fn finish(self, empty_reason: &str) -> CheckResult {
        if self.rows == 0 {
            return CheckResult::skipped(self.name, empty_reason);
        }
        CheckResult {
            name: self.name,
            passed: Some(self.failures == 0),
            rows_checked: self.rows,
            max_violation: self.worst,
            worst_k: if self.failures > 0 { self.worst_k } else { None },
            failures: self.failures,
            skipped: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CertificateReport {
    pub checks: Vec<CheckResult>,
}

impl CertificateReport {
    /// True when every check that ran passed.
    pub fn all_passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed != Some(false))
    }

    pub fn get(&self, name: &str) -> Option<&CheckResult> {
        self.checks.iter().find(|c| c.name == name)
    }
}

impl std::fmt::Display for CertificateReport {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        for c in &self.checks {
            match (c.passed, &c.skipped) {
                (Some(ok), _) => {
                    write!(f, "{:<28} {}  rows={} max_violation={:.3e}", c.name, if ok { "PASS" } else { "FAIL" }, c.rows_checked, c.max_violation)?;
                    if let Some(k) = c.worst_k {
                        write!(f, " worst_k={k} failures={}", c.failures)?;
                    }
                    writeln!(f)?;
                }
                (None, why) => writeln!(f, "{:<28} SKIP  {}", c.name, why.as_deref().unwrap_or(""))?,
            }
        }
        Ok(())
    }
}

/// Runs every check that applies to the trace. `f_star` enables the checks
/// that need the optimal value (and rows must then carry distances to `x*`).
pub fn certify(
    rows: &[TraceRow],
    constants: &TraceConstants,
    f_star: Option<f64>,
    tol: &Tolerances,
) -> Result<CertificateReport> {
    let mut checks = vec![weights_accumulate(rows, tol), gap_increments(rows, tol)];
    match constants {
        TraceConstants::Smooth(c) => {
            checks.push(nef_gap(rows, tol));
            match f_star {
                Some(fs) => checks.extend(smooth_potentials(rows, c, fs, tol)?),
                None => {
                    for name in ["potential_nonincreasing", "iterate_bound"] {
                        checks.push(CheckResult::skipped(name, "needs a known optimum"));
                    }
                }
            }
        }
        TraceConstants::Composite { mu } => {
            checks.push(curvature_recursion(rows, *mu, tol));
            checks.push(weight_condition(rows, tol));
            checks.push(curvature_gap(rows, tol));
            checks.push(match f_star {
                Some(fs) => composite_iterate_bound(rows, *mu, fs, tol),
                None => CheckResult::skipped("iterate_bound", "needs a known optimum"),
            });
        }
    }
    Ok(CertificateReport { checks })
}

/// `A_k = A_{k−1} + a_k` wherever the step weight is recorded.
fn weights_accumulate(rows: &[TraceRow], tol: &Tolerances) -> CheckResult {
    let mut t = Tally::new("weights_accumulate");
    for w in rows.windows(2) {
        let (prev, row) = (&w[0], &w[1]);
        if let Some(a) = row.weight {
            // Memory variants raise A after the step; the pre-adjustment value is recorded.
            let base = row.a_before.unwrap_or(row.a);
            let expected = prev.a + a;
            t.observe(row.k, (base - expected).abs() - tol.identity * expected.abs().max(1e-300));
        }
    }
    t.finish("no step weights recorded")
}

fn gap_increments(rows: &[TraceRow], tol: &Tolerances) -> CheckResult {
    let mut t = Tally::new("gap_increment_nonnegative");
    for w in rows.windows(2) {
        if let Some(g) = w[1].gap_increment {
            t.observe(w[1].k, -g - tol.gap * (1.0 + w[0].f_val.abs()));
        }
    }
    t.finish("no gap increments recorded")
}

fn nef_gap(rows: &[TraceRow], tol: &Tolerances) -> CheckResult {
    let mut t = Tally::new("nef_gap_nonnegative");
    for row in rows {
        if let Some(phi) = row.phi {
            t.observe(row.k, -phi - tol.gap);
        }
    }
    t.finish("trace has no memory-adjustment gaps")
}

fn smooth_potentials(rows: &[TraceRow], c: &SmoothConstants, f_star: f64, tol: &Tolerances) -> Result<Vec<CheckResult>> {
    let pots = match potential_diagnostics(rows, c, f_star) {
        Ok(p) => p,
        Err(_) => {
            return Ok(vec![
                CheckResult::skipped("potential_nonincreasing", "rows lack distances to the optimum"),
                CheckResult::skipped("iterate_bound", "rows lack distances to the optimum"),
            ])
        }
    };
    let mut pot = Tally::new("potential_nonincreasing");
    let mut bound = Tally::new("iterate_bound");
    if let Some(first) = pots.first() {
        let d1 = first.d;
        for (p, row) in pots.iter().zip(rows) {
            pot.observe(p.k, p.d - d1 - tol.bound * d1.abs().max(1e-300));
            let limit = 2.0 * d1 / row.gamma;
            if let Some(dist) = row.dist_sq {
                bound.observe(row.k, dist - limit - tol.bound * limit.abs());
            }
        }
    }
    Ok(vec![pot.finish("empty trace"), bound.finish("rows lack distances to the optimum")])
}

/// `γ_k = γ_{k−1} + μ(a_k + α_kA_k − α_{k−1}A_{k−1})`
fn curvature_recursion(rows: &[TraceRow], mu: f64, tol: &Tolerances) -> CheckResult {
    let mut t = Tally::new("curvature_recursion");
    for w in rows.windows(2) {
        let (prev, row) = (&w[0], &w[1]);
        if let (Some(a), Some(al), Some(al_prev)) = (row.weight, row.alpha, prev.alpha) {
            let expected = prev.gamma + mu * (a + al * row.a - al_prev * prev.a);
            t.observe(row.k, (row.gamma - expected).abs() - tol.identity * expected.abs());
        }
    }
    t.finish("rows lack step weights or dampening")
}

/// `(1 + qα_k)A_kγ_k = L̄_kā_k²`
fn weight_condition(rows: &[TraceRow], tol: &Tolerances) -> CheckResult {
    let mut t = Tally::new("weight_condition_equality");
    for row in rows {
        if let (Some(q), Some(al), Some(lb), Some(ab)) = (row.q, row.alpha, row.l_bar, row.a_bar) {
            let lhs = (1.0 + q * al) * row.a * row.gamma;
            let rhs = lb * ab * ab;
            t.observe(row.k, (lhs - rhs).abs() - tol.identity * rhs.abs());
        }
    }
    t.finish("rows lack the weight-condition scalars")
}

/// `γ̄_k² ≥ γ_{k−1}γ_k`
fn curvature_gap(rows: &[TraceRow], tol: &Tolerances) -> CheckResult {
    let mut t = Tally::new("curvature_gap");
    for w in rows.windows(2) {
        if let Some(gb) = w[1].gamma_bar {
            let g0 = w[0].gamma;
            t.observe(w[1].k, g0 * w[1].gamma - gb * gb - tol.identity * g0 * g0);
        }
    }
    t.finish("rows lack gamma_bar")
}

/// `‖v_k − x*‖² ≤ 2𝒟_0/γ_k`, `𝒟_0 = A_0(F(x_0) − F* − μα_0/2‖x_0 − x*‖²) + γ_0/2‖x_0 − x*‖²`.
fn composite_iterate_bound(rows: &[TraceRow], mu: f64, f_star: f64, tol: &Tolerances) -> CheckResult {
    let mut t = Tally::new("iterate_bound");
    let Some(first) = rows.first() else {
        return t.finish("empty trace");
    };
    let Some(d0_sq) = first.dist_sq else {
        return CheckResult::skipped("iterate_bound", "rows lack distances to the optimum");
    };
    let alpha0 = first.alpha.unwrap_or(0.0);
    let big_d0 = crate::eacgm::initial_distance_term(first.a, first.gamma, alpha0, mu, first.f_val - f_star, d0_sq);
    for row in rows {
        if let Some(dist) = row.dist_sq {
            let limit = 2.0 * big_d0 / row.gamma;
            t.observe(row.k, dist - limit - tol.bound * limit.abs());
        }
    }
    t.finish("rows lack distances to the optimum")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::metric::Metric;
    use crate::trace::StoppingRule;

    fn row(k: usize, a: f64, gamma: f64) -> TraceRow {
        TraceRow { k, a, gamma, ..Default::default() }
    }

    #[test]
    fn tally_locates_the_worst_row() {
        let mut t = Tally::new("x");
        t.observe(1, -1.0);
        t.observe(2, 0.5);
        t.observe(3, 2.0);
        t.observe(4, -3.0);
        let r = t.finish("");
        assert_eq!(r.passed, Some(false));
        assert_eq!(r.worst_k, Some(3));
        assert_eq!(r.failures, 2);
        assert_eq!(r.max_violation, 2.0);
    }

    #[test]
    fn accumulation_and_skips() {
        let mut rows = vec![row(0, 0.0, 1.0), row(1, 0.5, 1.0), row(2, 1.5, 1.0)];
        rows[1].weight = Some(0.5);
        rows[2].weight = Some(1.0);
        let rep = certify(&rows, &TraceConstants::Composite { mu: 0.0 }, None, &Tolerances::default()).unwrap();
        assert_eq!(rep.get("weights_accumulate").unwrap().passed, Some(true));
        assert!(rep.get("iterate_bound").unwrap().skipped.is_some());
        assert!(rep.all_passed());
        rows[2].a = 1.6;
        let rep = certify(&rows, &TraceConstants::Composite { mu: 0.0 }, None, &Tolerances::default()).unwrap();
        let c = rep.get("weights_accumulate").unwrap();
        assert_eq!((c.passed, c.worst_k), (Some(false), Some(2)));
        assert!(!rep.all_passed());
        assert!(rep.to_string().contains("FAIL"));
    }

    fn quad_problem(kind: crate::bench::ProblemKind) -> crate::bench::Problem {
        crate::bench::ProblemSpec::desk(kind, 3).build().unwrap()
    }

    #[test]
    fn ogm_and_ogmm_traces_certify() {
        use crate::bench::ProblemKind;
        use crate::ogm::{ogm_run, OgmConfig};
        use crate::ogmm::{ogmm_run, MemoryConfig};
        let p = quad_problem(ProblemKind::Quad);
        let o = p.smooth().unwrap();
        let known = p.known.as_ref().unwrap();
        let c = SmoothConstants::of(o).unwrap();
        let stop = StoppingRule::iterations(150);
        let m = Metric::Identity;
        for cfg in [OgmConfig::item(), OgmConfig::tmm(1.0)] {
            let rec = ogm_run(o, &m, &cfg, &p.x0, &stop, Some(known)).unwrap();
            let rep = certify(&rec.rows, &TraceConstants::Smooth(c), Some(known.f), &Tolerances::default()).unwrap();
            assert!(rep.all_passed(), "{rep}");
            assert_eq!(rep.get("iterate_bound").unwrap().passed, Some(true));
        }
        let rec = ogmm_run(o, &m, &OgmConfig::item(), &MemoryConfig::default(), &p.x0, &stop, Some(known)).unwrap();
        let rep = certify(&rec.rows, &TraceConstants::Smooth(c), Some(known.f), &Tolerances::default()).unwrap();
        assert_eq!(rep.get("nef_gap_nonnegative").unwrap().passed, Some(true));
        assert!(rep.all_passed(), "{rep}");
    }

    #[test]
    fn eacgm_trace_certifies_and_perturbation_is_located() {
        use crate::bench::{reference_optimum, ProblemKind};
        use crate::eacgm::{eacgm_run, EacgmConfig};
        let p = quad_problem(ProblemKind::En);
        let o = p.composite().unwrap();
        let known = reference_optimum(o, &p.x0, 1e-12, 20_000).unwrap();
        let mu = o.mu_f() + o.mu_psi();
        let rec = eacgm_run(o, &Metric::Identity, &EacgmConfig::default(), &p.x0, &StoppingRule::iterations(200), Some(&known))
            .unwrap();
        let consts = TraceConstants::Composite { mu };
        let rep = certify(&rec.rows, &consts, Some(known.f), &Tolerances::default()).unwrap();
        assert!(rep.all_passed(), "{rep}");
        for name in ["weight_condition_equality", "curvature_recursion", "curvature_gap", "iterate_bound"] {
            assert_eq!(rep.get(name).unwrap().passed, Some(true), "{name}");
        }
        let mut rows = rec.rows.clone();
        rows[37].a *= 1.0 + 1e-6;
        let rep = certify(&rows, &consts, Some(known.f), &Tolerances::default()).unwrap();
        let c = rep.get("weights_accumulate").unwrap();
        assert_eq!(c.passed, Some(false));
        assert_eq!(c.worst_k, Some(rows[37].k));
    }
}
