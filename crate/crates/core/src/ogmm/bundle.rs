//! Re-centered bounds and the bundle (memory model) of affine pieces.

use crate::metric::Metric;

/// A primal-dual bound re-centered around the fixed point `v₁`:
/// `w(x, g) = h̄ + ⟨ḡ, x⟩ + (μr/2)‖x − v₁‖² + ‖g‖²/(2L)`, together with the
/// auxiliary bound `ŵ(x) = ĥ + ⟨ĝ, x⟩ + (μr/2)‖x − v₁‖²`.
#[derive(Debug, Clone, PartialEq)]
pub struct RecenteredBound {
    pub h_bar: f64,
    pub g_bar: Vec<f64>,
    pub h_hat: f64,
    pub g_hat: Vec<f64>,
}

/// Re-centers the bound built at `y` (`g = f'(y)`, `x = T(y)`) around `v1`.
#[allow(clippy::too_many_arguments)]
pub fn recenter(
    f_y: f64,
    y: &[f64],
    g: &[f64],
    x: &[f64],
    v1: &[f64],
    mu: f64,
    r: f64,
    lipschitz: f64,
    metric: &Metric,
) -> RecenteredBound {
    let mur = mu * r;
    let h_hat = 0.5 * mur * (metric.norm_sq(x) - metric.norm_sq(v1)) + metric.dual_norm_sq(g) / (2.0 * lipschitz);
    let diff: Vec<f64> = v1.iter().zip(x).map(|(a, b)| a - b).collect();
    let g_hat: Vec<f64> = metric.apply(&diff).into_iter().map(|t| mur * t).collect();
    let gy: f64 = g.iter().zip(y).map(|(a, b)| a * b).sum();
    let h_bar = h_hat + f_y - gy;
    let g_bar = g_hat.iter().zip(g).map(|(a, b)| a + b).collect();
    RecenteredBound { h_bar, g_bar, h_hat, g_hat }
}

impl RecenteredBound {
    /// Evaluates the re-centered form of the primal-dual bound.
    pub fn eval_w(&self, mu: f64, r: f64, lipschitz: f64, v1: &[f64], metric: &Metric, x: &[f64], g: &[f64]) -> f64 {
        let lin: f64 = self.g_bar.iter().zip(x).map(|(a, b)| a * b).sum();
        self.h_bar + lin + 0.5 * mu * r * metric.dist_sq(x, v1) + metric.dual_norm_sq(g) / (2.0 * lipschitz)
    }

    /// Evaluates the re-centered auxiliary bound.
    pub fn eval_w_hat(&self, mu: f64, r: f64, v1: &[f64], metric: &Metric, x: &[f64]) -> f64 {
        let lin: f64 = self.g_hat.iter().zip(x).map(|(a, b)| a * b).sum();
        self.h_hat + lin + 0.5 * mu * r * metric.dist_sq(x, v1)
    }
}

/// Number of updates between full Gram recomputations.
pub const GRAM_REFRESH: u64 = 64;

/// Memory model `(H, G)` with Gram matrix `Q = G B⁻¹ Gᵀ`.
///
/// Entries are kept in logical order. Once the model has been aggregated,
/// entry 0 is the compacted piece `(h̃, g̃)` and entry 1 the newest bound;
/// the remaining entries are older raw bounds, newest first. The oldest raw
/// entry is dropped when the capacity is reached.
#[derive(Debug, Clone, PartialEq)]
pub struct Bundle {
    capacity: usize,
    h: Vec<f64>,
    g: Vec<Vec<f64>>,
    q: Vec<Vec<f64>>,
    has_aggregate: bool,
    updates: u64,
}

impl Bundle {
    /// `m_max` below 2 is raised to 2: the aggregate and the newest bound
    /// always have to fit.
    pub fn new(m_max: usize) -> Self {
        Self { capacity: m_max.max(2), h: Vec::new(), g: Vec::new(), q: Vec::new(), has_aggregate: false, updates: 0 }
    }

    pub fn capacity(&self) -> usize {
        self.capacity
    }

    pub fn len(&self) -> usize {
        self.h.len()
    }

    pub fn is_empty(&self) -> bool {
        self.h.is_empty()
    }

    pub fn h(&self) -> &[f64] {
        &self.h
    }

    pub fn g(&self) -> &[Vec<f64>] {
        &self.g
    }

    pub fn q(&self) -> &[Vec<f64>] {
        &self.q
    }

    /// Starts the model with a single bound.
    pub fn init(&mut self, h_bar: f64, g_bar: Vec<f64>, metric: &Metric) {
        let q = metric.dual_norm_sq(&g_bar);
        self.h = vec![h_bar];
        self.g = vec![g_bar];
        self.q = vec![vec![q]];
        self.has_aggregate = false;
        self.updates = 0;
    }

    /// `(⟨H, λ⟩, Gλ)`
    pub fn aggregate(&self, lambda: &[f64]) -> (f64, Vec<f64>) {
        assert_eq!(lambda.len(), self.len());
        let h = self.h.iter().zip(lambda).map(|(a, b)| a * b).sum();
        let n = self.g.first().map_or(0, |g| g.len());
        let mut g = vec![0.0; n];
        for (gi, li) in self.g.iter().zip(lambda) {
            if *li != 0.0 {
                crate::linalg::axpy(*li, gi, &mut g);
            }
        }
        (h, g)
    }

    /// Replaces the model with `[aggregate, newest, older raw entries…]`.
    pub fn push(&mut self, aggregate: (f64, Vec<f64>), newest: (f64, Vec<f64>), metric: &Metric) {
        let raw_start = usize::from(self.has_aggregate);
        let keep = (self.len() - raw_start).min(self.capacity - 2);
        let old_idx: Vec<usize> = (raw_start..raw_start + keep).collect();

        let mut h = Vec::with_capacity(2 + keep);
        let mut g = Vec::with_capacity(2 + keep);
        h.push(aggregate.0);
        g.push(aggregate.1);
        h.push(newest.0);
        g.push(newest.1);
        let mut old_g = std::mem::take(&mut self.g);
        for &i in &old_idx {
            h.push(self.h[i]);
            g.push(std::mem::take(&mut old_g[i]));
        }
        let m = h.len();
        let mut q = vec![vec![0.0; m]; m];
        for (a, &ia) in old_idx.iter().enumerate() {
            for (b, &ib) in old_idx.iter().enumerate() {
                q[a + 2][b + 2] = self.q[ia][ib];
            }
        }
        for i in 0..2 {
            for j in 0..m {
                let v = metric.dual_inner(&g[i], &g[j]);
                q[i][j] = v;
                q[j][i] = v;
            }
        }
        self.h = h;
        self.g = g;
        self.q = q;
        self.has_aggregate = true;
        self.updates += 1;
        if self.updates % GRAM_REFRESH == 0 {
            self.recompute_gram(metric);
        }
    }

    pub fn recompute_gram(&mut self, metric: &Metric) {
        self.q = full_gram(&self.g, metric);
    }

    /// Largest entrywise difference between the stored and a fresh Gram matrix.
    pub fn gram_drift(&self, metric: &Metric) -> f64 {
        let fresh = full_gram(&self.g, metric);
        fresh
            .iter()
            .zip(&self.q)
            .flat_map(|(a, b)| a.iter().zip(b).map(|(x, y)| (x - y).abs()))
            .fold(0.0, f64::max)
    }
}

fn full_gram(g: &[Vec<f64>], metric: &Metric) -> Vec<Vec<f64>> {
    let m = g.len();
    let mut q = vec![vec![0.0; m]; m];
    for i in 0..m {
        for j in i..m {
            let v = metric.dual_inner(&g[i], &g[j]);
            q[i][j] = v;
            q[j][i] = v;
        }
    }
    q
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::oracle::{OraclePoint, SmoothConstants};
    use proptest::prelude::*;

    #[test]
    fn recenter_without_strong_convexity() {
        let m = Metric::Identity;
        let y = [1.0, 2.0];
        let g = [0.5, -1.0];
        let x = [0.5, 3.0];
        let rb = recenter(3.0, &y, &g, &x, &[7.0, 7.0], 0.0, 1.0, 2.0, &m);
        assert_eq!(rb.g_bar, g.to_vec());
        assert_eq!(rb.g_hat, vec![0.0, 0.0]);
        assert_eq!(rb.h_hat, 1.25 / 4.0);
        assert_eq!(rb.h_bar, 3.0 - (0.5 - 2.0) + 1.25 / 4.0);
        let p = [0.3, -0.2];
        let rb = recenter(4.0, &p, &[0.0, 0.0], &p, &p, 0.0, 1.0, 1.0, &m);
        assert_eq!((rb.h_bar, rb.g_bar.clone()), (4.0, vec![0.0, 0.0]));
    }

    proptest! {
        #[test]
        fn recentered_bound_matches_direct_form(
            y in prop::collection::vec(-3.0f64..3.0, 4),
            v1 in prop::collection::vec(-3.0f64..3.0, 4),
            xs in prop::collection::vec(-3.0f64..3.0, 4),
            gs in prop::collection::vec(-3.0f64..3.0, 4),
            d in prop::collection::vec(0.5f64..2.0, 4),
        ) {
            let metric = Metric::diagonal(d.clone()).unwrap();
            let oracle = crate::oracle::FnSmoothOracle {
                dim: 4,
                f: move |x: &[f64]| 0.5 * x.iter().enumerate().map(|(i, v)| (i + 1) as f64 * v * v).sum::<f64>(),
                grad: |x: &[f64]| x.iter().enumerate().map(|(i, v)| (i + 1) as f64 * v).collect(),
                lipschitz: 10.0,
                mu: 0.2,
            };
            let c = SmoothConstants::new(10.0, 0.2).unwrap();
            let p = OraclePoint::evaluate(&oracle, &metric, y, 0).unwrap();
            let rb = recenter(p.f_y, &p.y, &p.g, &p.x, &v1, c.mu, c.r(), c.lipschitz, &metric);
            let a = rb.eval_w(c.mu, c.r(), c.lipschitz, &v1, &metric, &xs, &gs);
            let b = p.w_bound(&c, &metric, &xs, &gs);
            prop_assert!((a - b).abs() < 1e-10 * (1.0 + b.abs()));
            let a = rb.eval_w_hat(c.mu, c.r(), &v1, &metric, &xs);
            let b = p.w_hat(&c, &metric, &xs);
            prop_assert!((a - b).abs() < 1e-10 * (1.0 + b.abs()));
        }

        #[test]
        fn incremental_gram_matches_recompute(
            seeds in prop::collection::vec(prop::collection::vec(-2.0f64..2.0, 5), 3..40),
            m_max in 1usize..10,
        ) {
            let metric = Metric::diagonal(vec![1.0, 2.0, 0.5, 3.0, 1.5]).unwrap();
            let mut b = Bundle::new(m_max);
            b.init(0.0, seeds[0].clone(), &metric);
            for (i, s) in seeds.iter().enumerate().skip(1) {
                let lambda = vec![1.0 / b.len() as f64; b.len()];
                let agg = b.aggregate(&lambda);
                b.push(agg, (i as f64, s.clone()), &metric);
                prop_assert!(b.len() <= b.capacity());
                prop_assert!(b.gram_drift(&metric) <= 1e-10);
                prop_assert_eq!(&b.g()[1], s);
            }
        }
    }

    #[test]
    fn replacement_drops_the_oldest_raw_entry() {
        let metric = Metric::Identity;
        let mut b = Bundle::new(3);
        b.init(1.0, vec![1.0], &metric);
        let lam = [1.0];
        let agg = b.aggregate(&lam);
        b.push(agg, (2.0, vec![2.0]), &metric);
        // The raw first bound is still held next to its aggregate.
        assert_eq!(b.h(), &[1.0, 2.0, 1.0]);
        let agg = b.aggregate(&[0.5, 0.5, 0.0]);
        b.push(agg, (3.0, vec![3.0]), &metric);
        assert_eq!(b.h(), &[1.5, 3.0, 2.0]);
        let agg = b.aggregate(&[0.0, 1.0, 0.0]);
        b.push(agg, (4.0, vec![4.0]), &metric);
        assert_eq!(b.h(), &[3.0, 4.0, 3.0]);
    }
}
