//! Entropy-regularized transport relative to the product coupling, solved by
//! alternating marginal scaling in the log domain.

use alloc::vec;
use alloc::vec::Vec;

use super::{check_marginals, check_shape, CostMatrix, Coupling, Direction};
use crate::matrix::Matrix;
use crate::{Error, Result};

/// Stop once the L1 marginal errors fall below this.
pub const ENTROPIC_TOLERANCE: f64 = 1e-9;

pub const ENTROPIC_MAX_ITERATIONS: usize = 10_000;

const WARM_START_FACTOR: f64 = 2.0;
const WARM_START_TOLERANCE: f64 = 1e-6;
const WARM_START_ITERATIONS: usize = 1_000;

#[derive(Clone, Debug, PartialEq)]
pub struct EntropicResult {
    pub plan: Coupling,
    /// `<C, P> + eps KL` when minimizing, `<C, P> - eps KL` when maximizing.
    pub value_regularized: f64,
    /// `<C, P>`.
    pub value_plain: f64,
    /// `KL(P || a b^T)`.
    pub kl_to_product: f64,
    pub converged: bool,
    pub iterations: usize,
    /// Sum of the row and column L1 marginal errors of the returned plan.
    pub marginal_error: f64,
}

/// Solve `min_P <C, P> + eps KL(P || a b^T)` (or the maximization with the
/// penalty subtracted).
///
/// The plan has the form `P_ij = a_i b_j exp((f_i + g_j - s C_ij) / eps)` with
/// `s = +1` for minimization and `-1` for maximization. When the iteration
/// limit is hit the last iterate is still returned, flagged `converged =
/// false`.
pub fn solve_entropic(
    a: &[f64],
    b: &[f64],
    cost: &CostMatrix,
    eps: f64,
    direction: Direction,
) -> Result<EntropicResult> {
    if !(eps > 0.0 && eps.is_finite()) {
        return Err(Error::InvalidEpsilon(eps));
    }
    check_marginals(a, b)?;
    check_shape(cost, a.len(), b.len())?;
    let (n, m) = (a.len(), b.len());
    let sign = direction.sign();

    let rows: Vec<usize> = (0..n).filter(|&i| a[i] > 0.0).collect();
    let cols: Vec<usize> = (0..m).filter(|&j| b[j] > 0.0).collect();
    let log_a: Vec<f64> = rows.iter().map(|&i| libm::log(a[i])).collect();
    let log_b: Vec<f64> = cols.iter().map(|&j| libm::log(b[j])).collect();
    let (rn, cm) = (rows.len(), cols.len());
    // Signed cost on the restricted support.
    let sc = Matrix::from_fn(rn, cm, |r, s| sign * cost.get(rows[r], cols[s]));
    let scale = sc.max_abs();

    // Potentials in cost units: P_ij = a_i b_j exp((F_i + G_j - sC_ij) / eps).
    let mut f = vec![0.0; rn];
    let mut g = vec![0.0; cm];
    let mut iterations = 0;
    // Warm start through a geometric eps schedule when eps is small relative
    // to the costs; each stage starts from the previous potentials.
    let mut stage_eps = eps;
    let mut stages = Vec::new();
    while stage_eps < scale {
        stage_eps *= WARM_START_FACTOR;
        stages.push(stage_eps);
    }
    for &e in stages.iter().rev() {
        iterations += sinkhorn(&sc, &log_a, &log_b, e, &mut f, &mut g, WARM_START_TOLERANCE, WARM_START_ITERATIONS).1;
    }
    let (converged, final_iters) = sinkhorn(
        &sc,
        &log_a,
        &log_b,
        eps,
        &mut f,
        &mut g,
        ENTROPIC_TOLERANCE,
        ENTROPIC_MAX_ITERATIONS,
    );
    iterations += final_iters;
    let k = sc.map(|v| v / eps);
    for v in f.iter_mut().chain(g.iter_mut()) {
        *v /= eps;
    }

    let mut plan = Matrix::zeros(n, m);
    let mut kl = 0.0;
    for r in 0..rn {
        for s in 0..cm {
            let log_ratio = f[r] + g[s] - k[(r, s)];
            let p = a[rows[r]] * b[cols[s]] * libm::exp(log_ratio);
            plan[(rows[r], cols[s])] = p;
            if p > 0.0 {
                kl += p * log_ratio;
            }
        }
    }
    let kl = kl.max(0.0);
    let value_plain = plan.inner(cost.matrix());
    let marginal_error = l1_gap(&plan.row_sums(), a) + l1_gap(&plan.col_sums(), b);
    let value_regularized = match direction {
        Direction::Minimize => value_plain + eps * kl,
        Direction::Maximize => value_plain - eps * kl,
    };
    Ok(EntropicResult {
        plan: Coupling::from_parts(plan, a.to_vec(), b.to_vec()),
        value_regularized,
        value_plain,
        kl_to_product: kl,
        converged,
        iterations,
        marginal_error,
    })
}

/// Alternating row and column log-domain updates at one `eps`, with potentials
/// in cost units. Returns whether the L1 marginal error reached `tol`, and the
/// iteration count.
#[allow(clippy::too_many_arguments)]
fn sinkhorn(
    sc: &Matrix,
    log_a: &[f64],
    log_b: &[f64],
    eps: f64,
    f: &mut [f64],
    g: &mut [f64],
    tol: f64,
    max_iterations: usize,
) -> (bool, usize) {
    let (rn, cm) = (log_a.len(), log_b.len());
    let mut scratch = vec![0.0; rn.max(cm)];
    let mut iterations = 0;
    while iterations < max_iterations {
        let mut row_err = 0.0;
        for r in 0..rn {
            let row = sc.row(r);
            for s in 0..cm {
                scratch[s] = log_b[s] + (g[s] - row[s]) / eps;
            }
            let lse = log_sum_exp(&scratch[..cm]);
            row_err += libm::exp(log_a[r]) * (libm::exp(f[r] / eps + lse) - 1.0).abs();
            f[r] = -eps * lse;
        }
        // Columns are exact after the previous column pass, so the row error
        // measured with the old f is the full marginal error.
        if iterations > 0 && row_err <= tol {
            return (true, iterations);
        }
        iterations += 1;
        for s in 0..cm {
            for r in 0..rn {
                scratch[r] = log_a[r] + (f[r] - sc[(r, s)]) / eps;
            }
            g[s] = -eps * log_sum_exp(&scratch[..rn]);
        }
    }
    (false, iterations)
}

fn log_sum_exp(xs: &[f64]) -> f64 {
    let max = xs.iter().fold(f64::NEG_INFINITY, |m, &v| m.max(v));
    if !max.is_finite() {
        return max;
    }
    max + libm::log(xs.iter().map(|&v| libm::exp(v - max)).sum::<f64>())
}

fn l1_gap(x: &[f64], y: &[f64]) -> f64 {
    x.iter().zip(y).map(|(p, q)| (p - q).abs()).sum()
}
