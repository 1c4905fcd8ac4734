//! Simplex-constrained concave quadratic maximization,
//! `max_{λ ∈ Δ} −(P/2)λᵀQλ + ⟨S, λ⟩`, by projected accelerated gradient.

/// Euclidean projection onto the probability simplex (sort-based).
pub fn project_simplex(v: &[f64]) -> Vec<f64> {
    let mut u = v.to_vec();
    u.sort_by(|a, b| b.total_cmp(a));
    let mut cumsum = 0.0;
    let mut theta = 0.0;
    for (i, ui) in u.iter().enumerate() {
        cumsum += ui;
        let t = (cumsum - 1.0) / (i + 1) as f64;
        if ui - t > 0.0 {
            theta = t;
        }
    }
    let mut out: Vec<f64> = v.iter().map(|x| (x - theta).max(0.0)).collect();
    let s: f64 = out.iter().sum();
    if s > 0.0 {
        out.iter_mut().for_each(|x| *x /= s);
    }
    out
}

fn mat_vec(q: &[Vec<f64>], x: &[f64]) -> Vec<f64> {
    q.iter().map(|row| row.iter().zip(x).map(|(a, b)| a * b).sum()).collect()
}

/// Inner objective `−(P/2)λᵀQλ + ⟨S, λ⟩`.
pub fn qp_objective(p: f64, q: &[Vec<f64>], s: &[f64], lambda: &[f64]) -> f64 {
    let ql = mat_vec(q, lambda);
    let quad: f64 = ql.iter().zip(lambda).map(|(a, b)| a * b).sum();
    let lin: f64 = s.iter().zip(lambda).map(|(a, b)| a * b).sum();
    -0.5 * p * quad + lin
}

#[derive(Debug, Clone, PartialEq)]
pub struct QpSolution {
    pub lambda: Vec<f64>,
    pub objective: f64,
    pub iterations: u64,
}

/// Maximizes the inner objective over the simplex starting from `lambda0`.
///
/// Stops after `max_iter` iterations or once the Frank-Wolfe duality gap is
/// at most `tol`. The best iterate is returned, so the objective never falls
/// below its value at `lambda0`.
pub fn simplex_qp_solve(p: f64, q: &[Vec<f64>], s: &[f64], lambda0: &[f64], max_iter: u64, tol: f64) -> QpSolution {
    let m = s.len();
    assert_eq!(lambda0.len(), m);
    if m == 1 {
        return QpSolution { lambda: vec![1.0], objective: qp_objective(p, q, s, &[1.0]), iterations: 0 };
    }
    if p <= 0.0 {
        // Linear objective: lowest-index maximizing vertex.
        let mut best = 0;
        for i in 1..m {
            if s[i] > s[best] {
                best = i;
            }
        }
        let mut lambda = vec![0.0; m];
        lambda[best] = 1.0;
        let objective = s[best];
        return QpSolution { lambda, objective, iterations: 0 };
    }

    // Curvature bound of the minimization form f(λ) = (P/2)λᵀQλ − ⟨S, λ⟩.
    let gersh = q.iter().map(|row| row.iter().map(|x| x.abs()).sum::<f64>()).fold(0.0, f64::max);
    let trace: f64 = (0..m).map(|i| q[i][i]).sum();
    let lq = p * gersh.min(trace);
    let start = project_simplex(lambda0);
    let mut best = start.clone();
    let mut best_obj = qp_objective(p, q, s, &start);
    if !(lq > 0.0 && lq.is_finite()) {
        return QpSolution { lambda: best, objective: best_obj, iterations: 0 };
    }
    let step = 1.0 / lq;

    let mut x = start.clone();
    let mut z = start;
    let mut t = 1.0f64;
    let mut prev_obj = best_obj;
    let mut iterations = 0;
    while iterations < max_iter {
        // Frank-Wolfe gap at the current iterate.
        let grad_x: Vec<f64> = mat_vec(q, &x).iter().zip(s).map(|(qx, si)| p * qx - si).collect();
        let gx: f64 = grad_x.iter().zip(&x).map(|(a, b)| a * b).sum();
        let gmin = grad_x.iter().cloned().fold(f64::INFINITY, f64::min);
        if gx - gmin <= tol {
            break;
        }
        iterations += 1;
        let grad_z: Vec<f64> = mat_vec(q, &z).iter().zip(s).map(|(qz, si)| p * qz - si).collect();
        let trial: Vec<f64> = z.iter().zip(&grad_z).map(|(zi, gi)| zi - step * gi).collect();
        let x_new = project_simplex(&trial);
        let obj = qp_objective(p, q, s, &x_new);
        if obj > best_obj {
            best_obj = obj;
            best.clone_from(&x_new);
        }
        if obj < prev_obj {
            // Gradient restart: drop momentum when the objective decreases.
            t = 1.0;
            z.clone_from(&x_new);
        } else {
            let t_new = 0.5 * (1.0 + (1.0 + 4.0 * t * t).sqrt());
            let beta = (t - 1.0) / t_new;
            z = x_new.iter().zip(&x).map(|(a, b)| a + beta * (a - b)).collect();
            t = t_new;
        }
        prev_obj = obj;
        x = x_new;
    }
    QpSolution { lambda: best, objective: best_obj, iterations }
}
