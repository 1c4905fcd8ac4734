//! Newton adjustment of the convergence guarantee.

use super::nef::NefData;
use super::simplex::simplex_qp_solve;
use crate::error::Result;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NewtonParams {
    pub max_newton: usize,
    pub inner_iters: u64,
    pub inner_tol: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct NewtonResult {
    pub lambda: Vec<f64>,
    pub a: f64,
    /// Newton iterations that produced a gap evaluation.
    pub newton_iters: u64,
    pub inner_iters: u64,
    /// `φ` at the returned pair.
    pub phi: f64,
}

/// Inner solve used by [`newton_adjust`]: returns `λ` and the iteration count.
pub trait InnerSolver {
    fn solve(&mut self, p: f64, q: &[Vec<f64>], s: &[f64], lambda0: &[f64]) -> (Vec<f64>, u64);
}

/// Projected fast gradient on the simplex.
pub struct SimplexFastGradient {
    pub max_iter: u64,
    pub tol: f64,
}

impl InnerSolver for SimplexFastGradient {
    fn solve(&mut self, p: f64, q: &[Vec<f64>], s: &[f64], lambda0: &[f64]) -> (Vec<f64>, u64) {
        let sol = simplex_qp_solve(p, q, s, lambda0, self.max_iter, self.tol);
        (sol.lambda, sol.iterations)
    }
}

/// Raises `A` toward the root of the normalized gap while keeping it
/// nonnegative. Stops after `max_newton` steps, on a negative gap (reverting
/// to the last valid pair) or on a nonnegative derivative.
pub fn newton_adjust(data: &NefData, lambda0: &[f64], a0: f64, params: &NewtonParams) -> Result<NewtonResult> {
    let mut inner = SimplexFastGradient { max_iter: params.inner_iters, tol: params.inner_tol };
    newton_adjust_with(data, lambda0, a0, params.max_newton, &mut inner)
}

pub fn newton_adjust_with<I: InnerSolver>(
    data: &NefData,
    lambda0: &[f64],
    a0: f64,
    max_newton: usize,
    inner: &mut I,
) -> Result<NewtonResult> {
    let mut lambda_valid = lambda0.to_vec();
    let mut a_valid = a0;
    let mut phi_valid = None;
    let mut a = a0;
    let mut newton_iters = 0;
    let mut inner_iters = 0;
    for _ in 0..max_newton {
        let c = data.coefficients(a)?;
        let (lambda, it) = inner.solve(c.p, &data.q, &c.s, lambda0);
        inner_iters += it;
        newton_iters += 1;
        let (phi, dphi) = data.gap_and_derivative(a, &lambda)?;
        if phi < 0.0 {
            break;
        }
        lambda_valid = lambda;
        a_valid = a;
        phi_valid = Some(phi);
        if dphi >= 0.0 {
            break;
        }
        let next = a - phi / dphi;
        if !next.is_finite() {
            break;
        }
        a = next;
    }
    let phi = match phi_valid {
        Some(p) => p,
        None => data.phi(a_valid, &lambda_valid)?,
    };
    Ok(NewtonResult { lambda: lambda_valid, a: a_valid, newton_iters, inner_iters, phi })
}
