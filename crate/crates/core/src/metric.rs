//! The positive-definite form `B` that defines the primal norm
//! `‖x‖ = sqrt(⟨Bx, x⟩)` and the dual norm `‖g‖_* = sqrt(⟨g, B⁻¹g⟩)`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Identity or diagonal metric. Dense SPD forms are not supported.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, Default)]
pub enum Metric {
    #[default]
    Identity,
    Diagonal(Vec<f64>),
}

impl Metric {
    pub fn diagonal(d: Vec<f64>) -> Result<Self> {
        if d.is_empty() {
            return Err(Error::InvalidParameter("diagonal metric must be non-empty".into()));
        }
        if let Some((i, v)) = d.iter().enumerate().find(|(_, v)| !(v.is_finite() && **v > 0.0)) {
            return Err(Error::InvalidParameter(format!(
                "diagonal metric entry {i} must be finite and positive, got {v}"
            )));
        }
        Ok(Metric::Diagonal(d))
    }

    /// Checks that the metric can act on vectors of length `n`.
    pub fn check_dim(&self, n: usize) -> Result<()> {
        match self {
            Metric::Identity => Ok(()),
            Metric::Diagonal(d) if d.len() == n => Ok(()),
            Metric::Diagonal(d) => Err(Error::DimensionMismatch { expected: n, got: d.len() }),
        }
    }

    /// `Bx`
    pub fn apply(&self, x: &[f64]) -> Vec<f64> {
        match self {
            Metric::Identity => x.to_vec(),
            Metric::Diagonal(d) => x.iter().zip(d).map(|(xi, di)| xi * di).collect(),
        }
    }

    /// `B⁻¹g`
    pub fn apply_inv(&self, g: &[f64]) -> Vec<f64> {
        match self {
            Metric::Identity => g.to_vec(),
            Metric::Diagonal(d) => g.iter().zip(d).map(|(gi, di)| gi / di).collect(),
        }
    }

    /// `⟨Bx, z⟩`
    pub fn inner(&self, x: &[f64], z: &[f64]) -> f64 {
        match self {
            Metric::Identity => x.iter().zip(z).map(|(a, b)| a * b).sum(),
            Metric::Diagonal(d) => x.iter().zip(z).zip(d).map(|((a, b), w)| a * b * w).sum(),
        }
    }

    /// `⟨g, B⁻¹h⟩`
    pub fn dual_inner(&self, g: &[f64], h: &[f64]) -> f64 {
        match self {
            Metric::Identity => g.iter().zip(h).map(|(a, b)| a * b).sum(),
            Metric::Diagonal(d) => g.iter().zip(h).zip(d).map(|((a, b), w)| a * b / w).sum(),
        }
    }

    /// `‖x‖²`
    pub fn norm_sq(&self, x: &[f64]) -> f64 {
        self.inner(x, x)
    }

    /// `‖g‖_*²`
    pub fn dual_norm_sq(&self, g: &[f64]) -> f64 {
        self.dual_inner(g, g)
    }

    /// `‖x - z‖²`
    pub fn dist_sq(&self, x: &[f64], z: &[f64]) -> f64 {
        match self {
            Metric::Identity => x.iter().zip(z).map(|(a, b)| (a - b) * (a - b)).sum(),
            Metric::Diagonal(d) => {
                x.iter().zip(z).zip(d).map(|((a, b), w)| (a - b) * (a - b) * w).sum()
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn rejects_nonpositive_entries() {
        assert!(Metric::diagonal(vec![1.0, 0.0]).is_err());
        assert!(Metric::diagonal(vec![1.0, -2.0]).is_err());
        assert!(Metric::diagonal(vec![]).is_err());
        assert!(Metric::diagonal(vec![0.5, 3.0]).is_ok());
    }

    #[test]
    fn dimension_check() {
        let m = Metric::diagonal(vec![1.0, 2.0]).unwrap();
        assert!(m.check_dim(2).is_ok());
        assert!(m.check_dim(3).is_err());
        assert!(Metric::Identity.check_dim(17).is_ok());
    }

    proptest! {
        // ‖B⁻¹g‖ = ‖g‖_* and ⟨g, B⁻¹g⟩ = ‖B⁻¹g‖_B².
        #[test]
        fn primal_dual_norm_consistency(
            d in prop::collection::vec(1e-3f64..1e3, 1..12),
            seed in prop::collection::vec(-10.0f64..10.0, 12),
        ) {
            let g: Vec<f64> = seed[..d.len()].to_vec();
            let m = Metric::diagonal(d).unwrap();
            let binv_g = m.apply_inv(&g);
            let lhs = m.dual_norm_sq(&g);
            let rhs = m.norm_sq(&binv_g);
            prop_assert!((lhs - rhs).abs() <= 1e-12 * (1.0 + lhs.abs()));
            let back = m.apply(&binv_g);
            for (a, b) in back.iter().zip(&g) {
                prop_assert!((a - b).abs() <= 1e-12 * (1.0 + b.abs()));
            }
        }
    }
}
