//! Problem oracles, gradient and proximal-gradient steps, and the global lower
//! bounds that drive the estimate functions.

use crate::error::{Error, Result};
use crate::linalg::{all_finite, dot};
use crate::metric::Metric;

/// A smooth convex objective with `L_f`-Lipschitz gradient and known strong
/// convexity parameter `mu < L_f`.
pub trait SmoothOracle: Sync {
    fn dim(&self) -> usize;
    fn value(&self, x: &[f64]) -> f64;
    fn gradient(&self, x: &[f64]) -> Vec<f64>;
    fn value_and_gradient(&self, x: &[f64]) -> (f64, Vec<f64>) {
        (self.value(x), self.gradient(x))
    }
    fn lipschitz(&self) -> f64;
    fn strong_convexity(&self) -> f64;
}

/// `F = f + Ψ` with smooth `f` and proximable, possibly extended-valued `Ψ`.
pub trait CompositeOracle: Sync {
    fn dim(&self) -> usize;
    fn smooth_value(&self, x: &[f64]) -> f64;
    fn smooth_gradient(&self, x: &[f64]) -> Vec<f64>;
    fn smooth_value_and_gradient(&self, x: &[f64]) -> (f64, Vec<f64>) {
        (self.smooth_value(x), self.smooth_gradient(x))
    }
    /// `Ψ(x)`; `f64::INFINITY` outside the domain.
    fn regularizer(&self, x: &[f64]) -> f64;
    /// `argmin_z τΨ(z) + ½‖z − x‖²` in the given metric.
    fn prox(&self, x: &[f64], tau: f64, metric: &Metric) -> Vec<f64>;
    /// Strong convexity of `f`.
    fn mu_f(&self) -> f64;
    /// Strong convexity of `Ψ`.
    fn mu_psi(&self) -> f64;
    fn lipschitz_hint(&self) -> Option<f64> {
        None
    }

    fn objective(&self, x: &[f64]) -> f64 {
        self.smooth_value(x) + self.regularizer(x)
    }

    /// `F(x1) − F(x2)`. Implementations may override this with a form that
    /// avoids cancellation when the two points are close.
    fn objective_difference(&self, x1: &[f64], x2: &[f64]) -> f64 {
        self.objective(x1) - self.objective(x2)
    }
}

/// Problem constants of a smooth oracle along with the derived ratios
/// `q = μ/L_f` and `r = 1/(1 − q)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SmoothConstants {
    pub lipschitz: f64,
    pub mu: f64,
}

impl SmoothConstants {
    pub fn new(lipschitz: f64, mu: f64) -> Result<Self> {
        if !(lipschitz.is_finite() && lipschitz > 0.0) {
            return Err(Error::Domain(format!("L_f must be positive, got {lipschitz}")));
        }
        if !(mu.is_finite() && mu >= 0.0 && mu < lipschitz) {
            return Err(Error::Domain(format!("need 0 <= mu < L_f, got mu = {mu}, L_f = {lipschitz}")));
        }
        Ok(Self { lipschitz, mu })
    }

    pub fn of<O: SmoothOracle + ?Sized>(oracle: &O) -> Result<Self> {
        Self::new(oracle.lipschitz(), oracle.strong_convexity())
    }

    pub fn q(&self) -> f64 {
        self.mu / self.lipschitz
    }

    pub fn r(&self) -> f64 {
        1.0 / (1.0 - self.q())
    }
}

/// `y − (1/L) B⁻¹g`
pub fn gradient_step(lipschitz: f64, metric: &Metric, y: &[f64], g: &[f64]) -> Vec<f64> {
    let step = metric.apply_inv(g);
    y.iter().zip(&step).map(|(yi, si)| yi - si / lipschitz).collect()
}

/// `prox_{Ψ/L}(y − (1/L) B⁻¹ g)` where `g = f'(y)` is supplied by the caller.
pub fn prox_grad_step_with_gradient<O: CompositeOracle + ?Sized>(
    oracle: &O,
    metric: &Metric,
    y: &[f64],
    g: &[f64],
    lipschitz: f64,
) -> Result<Vec<f64>> {
    if !(lipschitz.is_finite() && lipschitz > 0.0) {
        return Err(Error::Domain(format!("prox-grad step needs L > 0, got {lipschitz}")));
    }
    let forward = gradient_step(lipschitz, metric, y, g);
    let x = oracle.prox(&forward, 1.0 / lipschitz, metric);
    if !all_finite(&x) || !oracle.regularizer(&x).is_finite() {
        return Err(Error::NonFinite { what: "proximal point", iteration: 0 });
    }
    Ok(x)
}

/// Proximal gradient step `T_L(y)`.
pub fn prox_grad_step<O: CompositeOracle + ?Sized>(
    oracle: &O,
    metric: &Metric,
    y: &[f64],
    lipschitz: f64,
) -> Result<Vec<f64>> {
    let g = oracle.smooth_gradient(y);
    prox_grad_step_with_gradient(oracle, metric, y, &g, lipschitz)
}

/// Composite gradient mapping `L̄ B(y − x)`.
pub fn composite_gradient_mapping(y: &[f64], x: &[f64], l_bar: f64, metric: &Metric) -> Vec<f64> {
    let d: Vec<f64> = y.iter().zip(x).map(|(a, b)| a - b).collect();
    metric.apply(&d).into_iter().map(|v| l_bar * v).collect()
}

/// One smooth oracle call `(f(y), f'(y))` together with the gradient step
/// `x = T_{L_f}(y)`. These are the ingredients of the bounds `w_k` and `ŵ_k`.
#[derive(Debug, Clone, PartialEq)]
pub struct OraclePoint {
    pub y: Vec<f64>,
    pub f_y: f64,
    pub g: Vec<f64>,
    pub x: Vec<f64>,
}

impl OraclePoint {
    pub fn evaluate<O: SmoothOracle + ?Sized>(
        oracle: &O,
        metric: &Metric,
        y: Vec<f64>,
        iteration: usize,
    ) -> Result<Self> {
        let (f_y, g) = oracle.value_and_gradient(&y);
        if !f_y.is_finite() {
            return Err(Error::NonFinite { what: "function value", iteration });
        }
        if !all_finite(&g) {
            return Err(Error::NonFinite { what: "gradient", iteration });
        }
        let x = gradient_step(oracle.lipschitz(), metric, &y, &g);
        Ok(Self { y, f_y, g, x })
    }

    /// Primal-dual bound centered at this point,
    /// `w(x, g) = f(y) + ‖g_y‖²/(2L) + ⟨g_y, x − y⟩ + (μr/2)‖x − x_y‖² + ‖g‖²/(2L)`.
    pub fn w_bound(&self, c: &SmoothConstants, metric: &Metric, x: &[f64], g: &[f64]) -> f64 {
        let l = c.lipschitz;
        let shift: f64 = self.g.iter().zip(x.iter().zip(&self.y)).map(|(gi, (a, b))| gi * (a - b)).sum();
        self.f_y
            + metric.dual_norm_sq(&self.g) / (2.0 * l)
            + shift
            + 0.5 * c.mu * c.r() * metric.dist_sq(x, &self.x)
            + metric.dual_norm_sq(g) / (2.0 * l)
    }

    /// Auxiliary bound `ŵ(x) = (μr/2)‖x − x_y‖² + ‖g_y‖²/(2L)`.
    pub fn w_hat(&self, c: &SmoothConstants, metric: &Metric, x: &[f64]) -> f64 {
        eval_w_hat(c.mu, c.r(), c.lipschitz, metric, &self.x, &self.g, x)
    }
}

/// `ŵ_k(x) = (μr/2)‖x − x_k‖² + ‖g_k‖_*²/(2L_f)`.
pub fn eval_w_hat(
    mu: f64,
    r: f64,
    lipschitz: f64,
    metric: &Metric,
    x_k: &[f64],
    g_k: &[f64],
    x: &[f64],
) -> f64 {
    0.5 * mu * r * metric.dist_sq(x, x_k) + metric.dual_norm_sq(g_k) / (2.0 * lipschitz)
}

/// Right-hand side of the refactored two-point lower bound on `f(z1)`:
/// `f(z2) + ⟨f'(z2), T(z1) − z2⟩ + (μr/2)‖T(z1) − T(z2)‖² + ‖f'(z1)‖²/(2L) + ‖f'(z2)‖²/(2L)`.
pub fn refactored_lower_bound<O: SmoothOracle + ?Sized>(
    oracle: &O,
    metric: &Metric,
    z1: &[f64],
    z2: &[f64],
) -> f64 {
    let c = SmoothConstants { lipschitz: oracle.lipschitz(), mu: oracle.strong_convexity() };
    let (f2, g2) = oracle.value_and_gradient(z2);
    let g1 = oracle.gradient(z1);
    let t1 = gradient_step(c.lipschitz, metric, z1, &g1);
    let t2 = gradient_step(c.lipschitz, metric, z2, &g2);
    let lin: f64 = g2.iter().zip(t1.iter().zip(z2)).map(|(g, (a, b))| g * (a - b)).sum();
    f2 + lin
        + 0.5 * c.mu * c.r() * metric.dist_sq(&t1, &t2)
        + (metric.dual_norm_sq(&g1) + metric.dual_norm_sq(&g2)) / (2.0 * c.lipschitz)
}

/// Right-hand side of the composite lower bound built from a prox-grad step
/// with estimate `L` that satisfied the descent rule:
/// `F(x_k) + ‖g_k‖²/(2L̄) + ⟨g_k, x − y_k⟩ + (μ/2)‖x − y_k‖²`, `g_k = L̄B(y_k − x_k)`.
pub fn composite_lower_bound(
    f_xk: f64,
    g_k: &[f64],
    l_bar: f64,
    mu: f64,
    y_k: &[f64],
    metric: &Metric,
    x: &[f64],
) -> f64 {
    let lin: f64 = g_k.iter().zip(x.iter().zip(y_k)).map(|(g, (a, b))| g * (a - b)).sum();
    f_xk + metric.dual_norm_sq(g_k) / (2.0 * l_bar) + lin + 0.5 * mu * metric.dist_sq(x, y_k)
}

/// The descent rule `f(x) ≤ f(y) + ⟨f'(y), x − y⟩ + (L/2)‖x − y‖²`, with a
/// round-off allowance proportional to the magnitudes of the function values.
pub fn descent_rule_holds(
    f_x: f64,
    f_y: f64,
    g_y: &[f64],
    x: &[f64],
    y: &[f64],
    lipschitz: f64,
    metric: &Metric,
) -> bool {
    let d: Vec<f64> = x.iter().zip(y).map(|(a, b)| a - b).collect();
    let model = f_y + dot(g_y, &d) + 0.5 * lipschitz * metric.norm_sq(&d);
    f_x <= model + 8.0 * f64::EPSILON * (f_x.abs() + f_y.abs())
}

/// Smooth oracle assembled from closures, mostly useful in tests and examples.
pub struct FnSmoothOracle<F, G> {
    pub dim: usize,
    pub f: F,
    pub grad: G,
    pub lipschitz: f64,
    pub mu: f64,
}

impl<F, G> SmoothOracle for FnSmoothOracle<F, G>
where
    F: Fn(&[f64]) -> f64 + Sync,
    G: Fn(&[f64]) -> Vec<f64> + Sync,
{
    fn dim(&self) -> usize {
        self.dim
    }
    fn value(&self, x: &[f64]) -> f64 {
        (self.f)(x)
    }
    fn gradient(&self, x: &[f64]) -> Vec<f64> {
        (self.grad)(x)
    }
    fn lipschitz(&self) -> f64 {
        self.lipschitz
    }
    fn strong_convexity(&self) -> f64 {
        self.mu
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    struct Box01 {
        lip: f64,
    }

    // f(x) = ½‖x‖² with Ψ = indicator of the nonnegative orthant.
    impl CompositeOracle for Box01 {
        fn dim(&self) -> usize {
            2
        }
        fn smooth_value(&self, x: &[f64]) -> f64 {
            0.5 * dot(x, x)
        }
        fn smooth_gradient(&self, x: &[f64]) -> Vec<f64> {
            x.to_vec()
        }
        fn regularizer(&self, x: &[f64]) -> f64 {
            if x.iter().all(|v| *v >= 0.0) {
                0.0
            } else {
                f64::INFINITY
            }
        }
        fn prox(&self, x: &[f64], _tau: f64, _metric: &Metric) -> Vec<f64> {
            x.iter().map(|v| v.max(0.0)).collect()
        }
        fn mu_f(&self) -> f64 {
            1.0
        }
        fn mu_psi(&self) -> f64 {
            0.0
        }
        fn lipschitz_hint(&self) -> Option<f64> {
            Some(self.lip)
        }
    }

    #[test]
    fn gradient_step_examples() {
        assert_eq!(gradient_step(3.0, &Metric::Identity, &[0.0; 4], &[0.0; 4]), vec![0.0; 4]);
        assert_eq!(gradient_step(2.0, &Metric::Identity, &[1.0, 1.0], &[2.0, 0.0]), vec![0.0, 1.0]);
        let m = Metric::diagonal(vec![2.0, 4.0]).unwrap();
        assert_eq!(gradient_step(1.0, &m, &[1.0, 1.0], &[2.0, 4.0]), vec![0.0, 0.0]);
    }

    #[test]
    fn gradient_step_on_unit_quadratic_reaches_minimizer() {
        let oracle = FnSmoothOracle {
            dim: 3,
            f: |x: &[f64]| 0.5 * dot(x, x),
            grad: |x: &[f64]| x.to_vec(),
            lipschitz: 1.0,
            mu: 0.0,
        };
        let y = vec![0.3, -1.7, 2.2];
        let p = OraclePoint::evaluate(&oracle, &Metric::Identity, y, 0).unwrap();
        assert!(p.x.iter().all(|v| v.abs() < 1e-15));
        assert_eq!(oracle.value(&p.x), 0.0);
    }

    #[test]
    fn projection_prox_step() {
        let o = Box01 { lip: 1.0 };
        // y − g/L = (−1, 2) with y = (−0.5, 1), g = y, L = 2 → y − y/2.
        // Use a direct forward point instead: L = 1, y = (−1, 2), g = (0, 0).
        let x = prox_grad_step_with_gradient(&o, &Metric::Identity, &[-1.0, 2.0], &[0.0, 0.0], 1.0).unwrap();
        assert_eq!(x, vec![0.0, 2.0]);
        assert!(prox_grad_step(&o, &Metric::Identity, &[1.0, 1.0], 0.0).is_err());
    }

    #[test]
    fn composite_gradient_mapping_examples() {
        let y = [0.4, -1.0];
        assert_eq!(composite_gradient_mapping(&y, &y, 5.0, &Metric::Identity), vec![0.0, 0.0]);
        let x = [y[0] - 1.0, y[1] + 1.0];
        let g = composite_gradient_mapping(&y, &x, 3.0, &Metric::Identity);
        assert!((g[0] - 3.0).abs() < 1e-14 && (g[1] + 3.0).abs() < 1e-14);
    }

    #[test]
    fn w_bound_substitution_examples() {
        let oracle = FnSmoothOracle {
            dim: 2,
            f: |x: &[f64]| x[0] * x[0] + 0.25 * x[1] * x[1],
            grad: |x: &[f64]| vec![2.0 * x[0], 0.5 * x[1]],
            lipschitz: 2.0,
            mu: 0.0,
        };
        let c = SmoothConstants::of(&oracle).unwrap();
        let p = OraclePoint::evaluate(&oracle, &Metric::Identity, vec![1.0, -2.0], 0).unwrap();
        let gn = dot(&p.g, &p.g);
        // μ = 0, g = 0, x = x_k collapses to f(y) − ‖g‖²/(2L).
        let w = p.w_bound(&c, &Metric::Identity, &p.x, &[0.0, 0.0]);
        assert!((w - (p.f_y - gn / (2.0 * c.lipschitz))).abs() < 1e-14);
        // w(T(y_k), g_k) ≤ f(y_k).
        assert!(p.w_bound(&c, &Metric::Identity, &p.x, &p.g) <= p.f_y + 1e-14);
        // ŵ with μ = 0 is constant; at x = x_k it is ‖g‖²/(2L).
        assert!((p.w_hat(&c, &Metric::Identity, &[9.0, 9.0]) - gn / 4.0).abs() < 1e-14);
        assert!((p.w_hat(&c, &Metric::Identity, &p.x) - gn / 4.0).abs() < 1e-14);
    }

    #[test]
    fn smooth_constants_validation() {
        assert!(SmoothConstants::new(1.0, 1.0).is_err());
        assert!(SmoothConstants::new(0.0, 0.0).is_err());
        assert!(SmoothConstants::new(1.0, -0.1).is_err());
        let c = SmoothConstants::new(4.0, 1.0).unwrap();
        assert_eq!(c.q(), 0.25);
        assert!((c.r() - 4.0 / 3.0).abs() < 1e-15);
    }

    #[test]
    fn descent_rule_on_exact_constant() {
        let m = Metric::Identity;
        // f = x², L = 2: equality in the model.
        let y = [1.5];
        let x = [0.25];
        assert!(descent_rule_holds(x[0] * x[0], y[0] * y[0], &[2.0 * y[0]], &x, &y, 2.0, &m));
        assert!(!descent_rule_holds(x[0] * x[0], y[0] * y[0], &[2.0 * y[0]], &x, &y, 1.0, &m));
    }
}
