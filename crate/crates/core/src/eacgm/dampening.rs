//! Dampening parameter machinery: the sufficiency function `δ(q, α)`, its
//! root `α_max(q)`, the rate ratio `r(q, α)` and the worst-case certificate.

use crate::error::{Error, Result};

/// Dampening that keeps `δ(q, α) ≥ 0` for every `q ∈ [0, 1]` (rounded down).
pub const WORST_CASE_ALPHA: f64 = 0.7542;
/// Inverse condition number at which `α_max` attains its minimum (rounded).
pub const WORST_CASE_Q: f64 = 0.4733;
/// Bisection steps used by [`alpha_max`]; the final bracket is below 1e-24 wide.
pub const ALPHA_MAX_BISECTIONS: usize = 80;

fn check_unit(name: &str, v: f64) -> Result<()> {
    if !(0.0..=1.0).contains(&v) {
        return Err(Error::Domain(format!("{name} must lie in [0, 1], got {v}")));
    }
    Ok(())
}

/// `δ(q, α) = (1 − α)√((1 + α)(1 + qα)) − √q·α(1 − qα²)`
pub fn delta(q: f64, alpha: f64) -> Result<f64> {
    check_unit("q", q)?;
    check_unit("alpha", alpha)?;
    Ok(delta_unchecked(q, alpha))
}

fn delta_unchecked(q: f64, alpha: f64) -> f64 {
    (1.0 - alpha) * ((1.0 + alpha) * (1.0 + q * alpha)).sqrt() - q.sqrt() * alpha * (1.0 - q * alpha * alpha)
}

/// Largest `α ∈ [0, 1]` with `δ(q, α) ≥ 0`, found by bisection. The returned
/// value is the lower end of the final bracket, so `δ(q, α_max) ≥ 0` holds.
pub fn alpha_max(q: f64) -> Result<f64> {
    alpha_max_with(q, ALPHA_MAX_BISECTIONS)
}

pub fn alpha_max_with(q: f64, bisections: usize) -> Result<f64> {
    check_unit("q", q)?;
    if delta_unchecked(q, 1.0) >= 0.0 {
        return Ok(1.0);
    }
    let (mut lo, mut hi) = (0.0_f64, 1.0_f64);
    for _ in 0..bisections {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if delta_unchecked(q, mid) >= 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(lo)
}

/// `r(q, α) = √((1 + α)(1 + qα)) − √q·α`; one iteration shrinks the
/// certificate by `1 − √q·r(q, α)`.
pub fn rate_ratio(q: f64, alpha: f64) -> Result<f64> {
    check_unit("q", q)?;
    check_unit("alpha", alpha)?;
    Ok(((1.0 + alpha) * (1.0 + q * alpha)).sqrt() - q.sqrt() * alpha)
}

/// `L_u = max(r_d L_0, r_u L_f)`, the largest estimate the line search can produce.
pub fn worst_case_lipschitz(l0: f64, r_d: f64, r_u: f64, lf: f64) -> f64 {
    (r_d * l0).max(r_u * lf)
}

/// Factor multiplying `‖x_0 − x*‖²` in the iterate bound after `k ≥ 1`
/// iterations with constant dampening `α` and `A_0 = 0`:
/// `((L_u − μ_f)/(μ(1 + α)))·(1 − r(q_u, α)√q_u)^{k−1}`, `q_u = μ/(L_u + μ_Ψ)`.
pub fn rate_certificate(l_u: f64, mu_f: f64, mu_psi: f64, alpha: f64, k: usize) -> Result<f64> {
    let mu = mu_f + mu_psi;
    if !(mu > 0.0) {
        return Err(Error::Domain("the iterate certificate needs mu > 0".into()));
    }
    if k < 1 {
        return Err(Error::Domain("the iterate certificate starts at k = 1".into()));
    }
    if !(l_u > mu_f) {
        return Err(Error::Domain(format!("need L_u > mu_f, got L_u = {l_u}, mu_f = {mu_f}")));
    }
    let q_u = mu / (l_u + mu_psi);
    let shrink = 1.0 - rate_ratio(q_u, alpha)? * q_u.sqrt();
    Ok((l_u - mu_f) / (mu * (1.0 + alpha)) * shrink.powi((k - 1) as i32))
}

/// Columns `q_l` of the reference dampening table.
pub const REFERENCE_QL: [f64; 10] = [1e-7, 1e-6, 1e-5, 1e-4, 1e-3, 1e-2, 1e-1, 1.0 / 3.0, WORST_CASE_Q, 1.0];
/// Rows `q_u / q_l` of the reference dampening table.
pub const REFERENCE_RATIOS: [f64; 6] = [1.0, 1e-1, 1e-2, 1e-3, 1e-4, 1e-5];

/// `α_max(q_l)`, `r(q_l, 1)` and the grid `r(q_u, α_max(q_l))` with
/// `q_u = ratio·q_l`. `grid[i][j]` belongs to `ratios[i]` and `q_l[j]`.
#[derive(Debug, Clone, PartialEq)]
pub struct DampeningTable {
    pub q_l: Vec<f64>,
    pub ratios: Vec<f64>,
    pub alpha_max: Vec<f64>,
    pub ideal_ratio: Vec<f64>,
    pub grid: Vec<Vec<f64>>,
}

pub fn dampening_table(q_l: &[f64], ratios: &[f64]) -> Result<DampeningTable> {
    let alpha: Vec<f64> = q_l.iter().map(|&q| alpha_max(q)).collect::<Result<_>>()?;
    let ideal_ratio: Vec<f64> = q_l.iter().map(|&q| rate_ratio(q, 1.0)).collect::<Result<_>>()?;
    let grid = ratios
        .iter()
        .map(|&ratio| {
            q_l.iter()
                .zip(&alpha)
                .map(|(&q, &a)| rate_ratio(ratio * q, a))
                .collect::<Result<Vec<f64>>>()
        })
        .collect::<Result<_>>()?;
    Ok(DampeningTable { q_l: q_l.to_vec(), ratios: ratios.to_vec(), alpha_max: alpha, ideal_ratio, grid })
}
