use super::*;
use crate::linalg::norm2;
use proptest::prelude::*;

/// `½Σ d_i (x_i − c_i)² + λ‖x‖₁ + (μ_Ψ/2)‖x‖²`, minimizer known in closed form.
struct SeparableElasticNet {
    d: Vec<f64>,
    c: Vec<f64>,
    lambda: f64,
    mu_psi: f64,
}

impl SeparableElasticNet {
    fn new(n: usize, lambda: f64, mu_psi: f64) -> Self {
        let d = (1..=n).map(|i| 0.05 + i as f64 / n as f64).collect();
        let c = (0..n).map(|i| ((i * 7 + 3) % 11) as f64 - 5.0).collect();
        Self { d, c, lambda, mu_psi }
    }

    fn optimum(&self) -> KnownOptimum {
        let x: Vec<f64> = self
            .d
            .iter()
            .zip(&self.c)
            .map(|(d, c)| {
                let z = d * c;
                z.signum() * (z.abs() - self.lambda).max(0.0) / (d + self.mu_psi)
            })
            .collect();
        let f = self.objective(&x);
        KnownOptimum { x, f }
    }
}

impl CompositeOracle for SeparableElasticNet {
    fn dim(&self) -> usize {
        self.d.len()
    }
    fn smooth_value(&self, x: &[f64]) -> f64 {
        x.iter().zip(&self.d).zip(&self.c).map(|((x, d), c)| 0.5 * d * (x - c) * (x - c)).sum()
    }
    fn smooth_gradient(&self, x: &[f64]) -> Vec<f64> {
        x.iter().zip(&self.d).zip(&self.c).map(|((x, d), c)| d * (x - c)).collect()
    }
    fn regularizer(&self, x: &[f64]) -> f64 {
        x.iter().map(|v| self.lambda * v.abs() + 0.5 * self.mu_psi * v * v).sum()
    }
    fn prox(&self, x: &[f64], tau: f64, metric: &Metric) -> Vec<f64> {
        let w = match metric {
            Metric::Identity => vec![1.0; x.len()],
            Metric::Diagonal(d) => d.clone(),
        };
        x.iter()
            .zip(&w)
            .map(|(x, w)| {
                let z = w * x;
                z.signum() * (z.abs() - tau * self.lambda).max(0.0) / (w + tau * self.mu_psi)
            })
            .collect()
    }
    fn mu_f(&self) -> f64 {
        0.0
    }
    fn mu_psi(&self) -> f64 {
        self.mu_psi
    }
    fn lipschitz_hint(&self) -> Option<f64> {
        Some(self.d.iter().cloned().fold(0.0, f64::max))
    }
    fn objective_difference(&self, x1: &[f64], x2: &[f64]) -> f64 {
        x1.iter()
            .zip(x2)
            .zip(self.d.iter().zip(&self.c))
            .map(|((a, b), (d, c))| {
                (a - b) * (0.5 * d * (a + b - 2.0 * c) + 0.5 * self.mu_psi * (a + b)) + self.lambda * (a.abs() - b.abs())
            })
            .sum()
    }
}

/// Smooth part never satisfies the descent rule.
struct Hostile;

impl CompositeOracle for Hostile {
    fn dim(&self) -> usize {
        2
    }
    fn smooth_value(&self, x: &[f64]) -> f64 {
        if x.iter().all(|v| *v == 0.0) {
            1.0
        } else {
            2.0
        }
    }
    fn smooth_gradient(&self, _x: &[f64]) -> Vec<f64> {
        vec![1.0, 1.0]
    }
    fn regularizer(&self, _x: &[f64]) -> f64 {
        0.0
    }
    fn prox(&self, x: &[f64], _tau: f64, _metric: &Metric) -> Vec<f64> {
        x.to_vec()
    }
    fn mu_f(&self) -> f64 {
        0.0
    }
    fn mu_psi(&self) -> f64 {
        0.0
    }
}

fn x0(n: usize) -> Vec<f64> {
    (0..n).map(|i| (i as f64 * 0.37).sin() * 3.0).collect()
}

#[test]
fn step_weight_examples() {
    let l = 4.0;
    let w = eacgm_step_weight(0.0, 1.0, 1.0, 0.0, 0.0, 0.0, l, 0.0).unwrap();
    assert!((w - 1.0 / l).abs() < 1e-15);
    let w = eacgm_step_weight(3.0, 1.0, 1.0, 0.0, 0.0, 0.0, 1.0, 0.0).unwrap();
    assert!((w - (1.0 + 13f64.sqrt()) / 2.0).abs() < 1e-14);
    assert!(eacgm_step_weight(1.0, 1.0, 1.0, 0.0, 0.0, 0.5, 1.0, 1.0).is_err());
}

#[test]
fn quadratics_without_strong_convexity() {
    let (a, gamma, lbar) = (2.5, 1.0, 3.0);
    let w = weight_quadratics(a, gamma, 0.4, 0.9, 0.0, lbar, 0.0).unwrap();
    // L a² = γ₀(A + a)
    assert!((lbar * w.a1_line.powi(2) - gamma * (a + w.a1_line)).abs() < 1e-12);
    assert_eq!(w.a2, 0.0);
}

#[test]
fn undampened_quadratics_agree() {
    let (a, gamma, mu, lbar) = (1.7, 0.3, 0.05, 2.0);
    let q = mu / lbar;
    let w = weight_quadratics(a, gamma, 0.0, 0.0, q, lbar, mu).unwrap();
    let p = w.a1_printed.unwrap();
    assert!((p - w.a1_line).abs() < 1e-12 * p);
    let t = w.a1_line;
    let resid = (lbar - mu) * t * t - (gamma + mu * a) * t - a * gamma;
    assert!(resid.abs() < 1e-12 * (lbar * t * t));
    assert!(w.admissible());
}

proptest! {
    #[test]
    fn step_weight_meets_the_weight_condition_with_equality(
        a in 0.0..50.0f64,
        gamma_per_a in 0.0..5.0f64,
        alpha in 0.0..=1.0f64,
        alpha_next in 0.0..=1.0f64,
        l in 1.0..100.0f64,
        mu_ratio in 1e-6..0.9f64,
        psi_share in 0.0..=1.0f64,
    ) {
        let mu = mu_ratio * l;
        let mu_psi = psi_share * mu;
        let lbar = l + mu_psi;
        let q = mu / lbar;
        // States reachable by the method keep γ ≥ μαA.
        let gamma = 1e-3 + mu * alpha * a + gamma_per_a * a;
        let gt = gamma + mu * (1.0 - alpha) * a;
        let w = eacgm_step_weight(a, gamma, gt, alpha, alpha_next, q, lbar, mu).unwrap();
        let an = a + w;
        let abar = w + q * alpha_next * an;
        let gn = gamma + mu * (w + alpha_next * an - alpha * a);
        let lhs = (1.0 + q * alpha_next) * an * gn;
        let rhs = lbar * abar * abar;
        prop_assert!((lhs - rhs).abs() <= 1e-10 * rhs);
    }

    #[test]
    fn admissible_weights_under_the_safe_dampening(
        ql_exp in -6.0..(1.0f64 / 3.0).log10(),
        q_frac in 0.0..=1.0f64,
        a in 0.0..1e3f64,
        extra in 0.0..10.0f64,
        l in 0.5..10.0f64,
    ) {
        let q_l = 10f64.powf(ql_exp);
        let alpha = alpha_max(q_l).unwrap();
        let q = q_frac * q_l;
        let lbar = l;
        let mu = q * lbar;
        let gamma = mu * (1.0 + alpha) * a + extra;
        prop_assume!(gamma > 0.0);
        let w = weight_quadratics(a, gamma, alpha, alpha, q, lbar, mu).unwrap();
        prop_assert!(w.a2 <= w.a1_line, "a2 = {}, a1 = {}", w.a2, w.a1_line);
    }
}

#[test]
fn exact_estimate_passes_first_trial() {
    let p = SeparableElasticNet::new(12, 0.3, 0.01);
    let m = Metric::Identity;
    let lf = p.lipschitz_hint().unwrap();
    let cfg = EacgmConfig { r_d: 1.0, l0: Some(lf), ..EacgmConfig::with_alpha(0.5) };
    let mut s = Eacgm::new(&p, &m, &cfg, &x0(12)).unwrap();
    for _ in 0..20 {
        let st = s.step().unwrap();
        assert_eq!(st.backtracks, 0);
        assert_eq!(st.lipschitz, lf);
    }
}

#[test]
fn underestimate_recovers_geometrically() {
    let p = SeparableElasticNet::new(12, 0.3, 0.01);
    let m = Metric::Identity;
    let lf = p.lipschitz_hint().unwrap();
    let cfg = EacgmConfig { r_d: 1.0, r_u: 2.0, l0: Some(lf / 8.0), ..EacgmConfig::with_alpha(0.5) };
    let mut s = Eacgm::new(&p, &m, &cfg, &x0(12)).unwrap();
    let st = s.step().unwrap();
    assert!(st.backtracks <= 3);
    assert!(st.lipschitz <= lf);
}

#[test]
fn hostile_oracle_aborts_the_line_search() {
    let m = Metric::Identity;
    let cfg = EacgmConfig { l0: Some(1.0), ..EacgmConfig::with_alpha(0.0) };
    let mut s = Eacgm::new(&Hostile, &m, &cfg, &[0.0, 0.0]).unwrap();
    assert!(matches!(s.step(), Err(Error::LineSearchDiverged { .. })));
}

#[test]
fn config_validation() {
    let p = SeparableElasticNet::new(3, 0.1, 0.0);
    let m = Metric::Identity;
    for cfg in [
        EacgmConfig { r_u: 1.0, ..Default::default() },
        EacgmConfig { r_d: 0.0, ..Default::default() },
        EacgmConfig { gamma0: 0.0, ..Default::default() },
        EacgmConfig { l0: Some(-1.0), ..Default::default() },
        EacgmConfig::with_alpha(1.5),
    ] {
        assert!(Eacgm::new(&p, &m, &cfg, &[0.0; 3]).is_err());
    }
    assert!(Eacgm::new(&Hostile, &m, &EacgmConfig::default(), &[0.0; 2]).is_err());
}

#[test]
fn alpha_policies() {
    assert_eq!(AlphaPolicy::WorstCase.resolve(0.0, 0.0, 1.0).unwrap(), WORST_CASE_ALPHA);
    assert_eq!(AlphaPolicy::Constant { alpha: 0.3 }.resolve(0.0, 0.0, 1.0).unwrap(), 0.3);
    let q_l = 1.0 / 1001.0;
    let a = AlphaPolicy::FromLl.resolve(0.1, 0.0, 1e-4).unwrap();
    assert!((a - alpha_max(1e-4 / (0.1 + 1e-4)).unwrap()).abs() < 1e-15);
    assert!((a - 0.9780).abs() < 5e-4, "{a} vs q_l = {q_l}");
    assert_eq!(AlphaPolicy::FromLl.resolve(0.0, 0.0, 1e-4).unwrap(), WORST_CASE_ALPHA);
}

/// Accelerated composite gradient method written from its own recursions:
/// `L̄a² = (A + a)(γ + μa)`, `γ' = γ + μa`, `y = (Aγ'x + aγv)/(Aγ' + aγ)`,
/// `γ'v' = γv + μa y − a B⁻¹g`.
fn acgm_reference<O: CompositeOracle>(
    p: &O,
    m: &Metric,
    x0: &[f64],
    l0: f64,
    r_u: f64,
    r_d: f64,
    iters: usize,
) -> Vec<(f64, f64, f64, Vec<f64>, Vec<f64>)> {
    let mu = p.mu_f() + p.mu_psi();
    let (mut a, mut gamma, mut l) = (0.0, 1.0, l0);
    let (mut x, mut v) = (x0.to_vec(), x0.to_vec());
    let mut out = vec![];
    for _ in 0..iters {
        l *= r_d;
        loop {
            let lbar = l + p.mu_psi();
            // (L̄ − μ)t² − (γ + μA)t − Aγ = 0
            let b = gamma + mu * a;
            let t = (b + (b * b + 4.0 * (lbar - mu) * a * gamma).sqrt()) / (2.0 * (lbar - mu));
            let gn = gamma + mu * t;
            let y: Vec<f64> =
                x.iter().zip(&v).map(|(xi, vi)| (a * gn * xi + t * gamma * vi) / (a * gn + t * gamma)).collect();
            let (fy, gy) = p.smooth_value_and_gradient(&y);
            let z: Vec<f64> = y.iter().zip(m.apply_inv(&gy)).map(|(yi, si)| yi - si / l).collect();
            let xn = p.prox(&z, 1.0 / l, m);
            let d: Vec<f64> = xn.iter().zip(&y).map(|(a, b)| a - b).collect();
            let fx = p.smooth_value(&xn);
            let model = fy + crate::linalg::dot(&gy, &d) + 0.5 * l * m.norm_sq(&d);
            if fx <= model + 8.0 * f64::EPSILON * (fx.abs() + fy.abs()) {
                let g = m.apply(&d).iter().map(|v| -lbar * v).collect::<Vec<_>>();
                let ginv = m.apply_inv(&g);
                v = v
                    .iter()
                    .zip(&y)
                    .zip(&ginv)
                    .map(|((vi, yi), gi)| (gamma * vi + mu * t * yi - t * gi) / gn)
                    .collect();
                a += t;
                gamma = gn;
                x = xn;
                break;
            }
            l *= r_u;
        }
        out.push((a, gamma, l, x.clone(), v.clone()));
    }
    out
}

#[test]
fn undampened_run_is_the_accelerated_composite_method() {
    let p = SeparableElasticNet::new(30, 0.5, 0.002);
    for m in [Metric::Identity, Metric::diagonal((0..30).map(|i| 1.0 + 0.1 * i as f64).collect()).unwrap()] {
        let lf = 3.0;
        let cfg = EacgmConfig { l0: Some(lf), ..EacgmConfig::with_alpha(0.0) };
        let mut s = Eacgm::new(&p, &m, &cfg, &x0(30)).unwrap();
        let reference = acgm_reference(&p, &m, &x0(30), lf, cfg.r_u, cfg.r_d, 100);
        for (k, (a, gamma, l, x, v)) in reference.iter().enumerate() {
            let gamma_prev = s.state().gamma;
            let step = s.step().unwrap();
            let st = s.state();
            let expected = gamma_prev + 0.002 * step.scalars.a;
            assert!((st.gamma - expected).abs() <= 1e-12 * expected);
            assert!((st.a - a).abs() <= 1e-10 * a, "A at {k}");
            assert!((st.gamma - gamma).abs() <= 1e-10 * gamma, "gamma at {k}");
            assert_eq!(st.lipschitz, *l);
            let scale = 1.0 + norm2(x);
            assert!(crate::linalg::dist_sq(&st.x, x).sqrt() <= 1e-10 * scale, "x at {k}");
            assert!(crate::linalg::dist_sq(&st.v, v).sqrt() <= 1e-10 * (1.0 + norm2(v)), "v at {k}");
        }
    }
}

fn run(p: &SeparableElasticNet, m: &Metric, alpha: f64, iters: usize) -> RunRecord {
    let cfg = EacgmConfig { l0: Some(p.lipschitz_hint().unwrap()), ..EacgmConfig::with_alpha(alpha) };
    let known = p.optimum();
    let stop = StoppingRule { max_iter: iters, eps_rel: Some(1e-7), grad_tol: None };
    eacgm_run(p, m, &cfg, &x0(p.dim()), &stop, Some(&known)).unwrap()
}

#[test]
fn trace_layout() {
    let p = SeparableElasticNet::new(10, 0.2, 0.01);
    let rec = run(&p, &Metric::Identity, WORST_CASE_ALPHA, 25);
    assert_eq!(rec.rows.len(), rec.iterations + 1);
    assert_eq!(rec.rows[0].k, 0);
    assert!(rec.rows[0].gap_increment.is_none());
    assert!(rec.rows.windows(2).all(|w| w[1].k == w[0].k + 1));
    assert!(rec.rows[1..].iter().all(|r| r.backtracks.is_some() && r.a2.is_some() && r.a1_line.is_some()));
    assert!(rec.meta.contains_key("D0") && rec.meta.contains_key("rate_certificate"));
}

#[test]
fn gap_increments_stay_nonnegative_for_safe_dampening() {
    let p = SeparableElasticNet::new(40, 0.4, 0.01);
    let q_l = 0.01 / (0.1 * p.lipschitz_hint().unwrap() + 0.01);
    for alpha in [0.0, WORST_CASE_ALPHA, alpha_max(q_l).unwrap()] {
        for m in [Metric::Identity, Metric::diagonal((0..40).map(|i| 0.5 + 0.05 * i as f64).collect()).unwrap()] {
            let rec = run(&p, &m, alpha, 300);
            for w in rec.rows.windows(2) {
                let g = w[1].gap_increment.unwrap();
                assert!(g >= -1e-9 * (1.0 + w[0].f_val.abs()), "alpha {alpha}, k {}: {g}", w[1].k);
            }
        }
    }
}

#[test]
fn iterate_bound_holds_along_the_run() {
    let p = SeparableElasticNet::new(40, 0.4, 0.01);
    for alpha in [0.0, 0.5, WORST_CASE_ALPHA] {
        let rec = run(&p, &Metric::Identity, alpha, 400);
        let d0 = rec.meta["D0"];
        for r in &rec.rows {
            let bound = 2.0 * d0 / r.gamma;
            assert!(r.dist_sq.unwrap() <= bound * (1.0 + 1e-9), "k {}", r.k);
        }
    }
}

#[test]
fn step_invariants() {
    let p = SeparableElasticNet::new(25, 0.3, 0.05);
    let m = Metric::Identity;
    let mu = 0.05;
    for alpha in [0.0, 0.5, WORST_CASE_ALPHA] {
        let cfg = EacgmConfig { l0: Some(0.5), ..EacgmConfig::with_alpha(alpha) };
        let mut s = Eacgm::new(&p, &m, &cfg, &x0(25)).unwrap();
        for _ in 0..200 {
            let prev = s.state().clone();
            let st = s.step().unwrap();
            let sc = st.scalars;
            let cur = s.state();
            // curvature recursion
            let g = prev.gamma + mu * (sc.a + alpha * cur.a - prev.alpha * prev.a);
            assert!((cur.gamma - g).abs() <= 1e-12 * g);
            // weight condition with equality
            let lhs = (1.0 + sc.q * alpha) * cur.a * cur.gamma;
            let rhs = sc.l_bar * sc.a_bar * sc.a_bar;
            assert!((lhs - rhs).abs() <= 1e-10 * rhs);
            // curvature gap
            assert!(sc.gamma_bar.powi(2) - prev.gamma * cur.gamma >= -1e-10 * prev.gamma.powi(2));
            // auxiliary point residual
            assert!(st.residual_norm <= 1e-10 * (norm2(&prev.x) + norm2(&prev.v)));
            // guarantee growth
            if prev.a > 0.0 {
                let factor = 1.0 - sc.q.sqrt() * rate_ratio(sc.q, alpha).unwrap();
                assert!(cur.a >= prev.a / factor * (1.0 - 1e-10));
            }
        }
    }
}

#[test]
fn worst_case_certificate_dominates_the_iterate_error() {
    let p = SeparableElasticNet::new(20, 0.2, 0.05);
    let rec = run(&p, &Metric::Identity, WORST_CASE_ALPHA, 150);
    let lf = p.lipschitz_hint().unwrap();
    let l_u = worst_case_lipschitz(lf, 0.9, 2.0, lf);
    let d0 = rec.rows[0].dist_sq.unwrap();
    for r in &rec.rows[1..] {
        let c = rate_certificate(l_u, 0.0, 0.05, WORST_CASE_ALPHA, r.k).unwrap();
        assert!(r.dist_sq.unwrap() <= c * d0 * (1.0 + 1e-9));
    }
}

