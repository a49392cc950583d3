//! Discrete optimal transport with arbitrary cost matrices.
//!
//! Convention: rows of every plan belong to the first measure (`mu`, weights
//! `a`), columns to the second (`nu`, weights `b`), so `plan * 1 = a` and
//! `plan^T * 1 = b`.

mod entropic;
mod exact;

use alloc::vec::Vec;

pub use self::entropic::{solve_entropic, EntropicResult, ENTROPIC_MAX_ITERATIONS, ENTROPIC_TOLERANCE};
pub use self::exact::solve_exact;

use crate::matrix::Matrix;
use crate::measures::DiscreteMeasure;
use crate::vecops::{dist, dist_sq};
use crate::{Error, Result};

/// Per-entry tolerance on coupling marginals.
pub const MARGINAL_TOLERANCE: f64 = 1e-9;

/// Most negative plan entry accepted as zero.
pub const NEGATIVE_MASS_TOLERANCE: f64 = 1e-12;

/// Largest allowed gap between total row and column mass.
pub const FEASIBILITY_TOLERANCE: f64 = 1e-8;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Direction {
    Minimize,
    Maximize,
}

impl Direction {
    fn sign(self) -> f64 {
        match self {
            Direction::Minimize => 1.0,
            Direction::Maximize => -1.0,
        }
    }
}

/// `n x m` matrix of finite pairing costs.
#[derive(Clone, Debug, PartialEq)]
pub struct CostMatrix(Matrix);

impl CostMatrix {
    pub fn new(m: Matrix) -> Result<Self> {
        if m.as_slice().iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFinite("cost matrix"));
        }
        Ok(Self(m))
    }

    pub fn from_fn(rows: usize, cols: usize, f: impl FnMut(usize, usize) -> f64) -> Result<Self> {
        Self::new(Matrix::from_fn(rows, cols, f))
    }

    /// `C_ij = ||x_i - y_j||^p`.
    pub fn power_distance(mu: &DiscreteMeasure, nu: &DiscreteMeasure, p: u32) -> Result<Self> {
        check_same_dim(mu, nu)?;
        Self::from_fn(mu.len(), nu.len(), |i, j| match p {
            1 => dist(mu.point(i), nu.point(j)),
            2 => dist_sq(mu.point(i), nu.point(j)),
            _ => libm::pow(dist(mu.point(i), nu.point(j)), p as f64),
        })
    }

    pub fn rows(&self) -> usize {
        self.0.rows()
    }

    pub fn cols(&self) -> usize {
        self.0.cols()
    }

    pub fn matrix(&self) -> &Matrix {
        &self.0
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.0[(i, j)]
    }

    pub fn negated(&self) -> CostMatrix {
        CostMatrix(self.0.map(|v| -v))
    }
}

/// A transport plan together with the marginals it couples.
#[derive(Clone, Debug, PartialEq)]
pub struct Coupling {
    plan: Matrix,
    row_marginal: Vec<f64>,
    col_marginal: Vec<f64>,
}

impl Coupling {
    /// Validates nonnegativity and both marginals (per entry, within
    /// [`MARGINAL_TOLERANCE`]).
    pub fn new(plan: Matrix, a: Vec<f64>, b: Vec<f64>) -> Result<Self> {
        let err = marginal_violation(&plan, &a, &b)?;
        if err > MARGINAL_TOLERANCE {
            return Err(Error::MarginalMismatch { max_error: err });
        }
        Ok(Self {
            plan,
            row_marginal: a,
            col_marginal: b,
        })
    }

    /// Independent coupling `a b^T`.
    pub fn product(a: &[f64], b: &[f64]) -> Self {
        let plan = Matrix::from_fn(a.len(), b.len(), |i, j| a[i] * b[j]);
        Self {
            plan,
            row_marginal: a.to_vec(),
            col_marginal: b.to_vec(),
        }
    }

    /// Diagonal coupling of a measure with itself.
    pub fn identity(a: &[f64]) -> Self {
        let plan = Matrix::from_fn(a.len(), a.len(), |i, j| if i == j { a[i] } else { 0.0 });
        Self {
            plan,
            row_marginal: a.to_vec(),
            col_marginal: a.to_vec(),
        }
    }

    pub(crate) fn from_parts(plan: Matrix, a: Vec<f64>, b: Vec<f64>) -> Self {
        Self {
            plan,
            row_marginal: a,
            col_marginal: b,
        }
    }

    pub fn plan(&self) -> &Matrix {
        &self.plan
    }

    pub fn into_plan(self) -> Matrix {
        self.plan
    }

    pub fn rows(&self) -> usize {
        self.plan.rows()
    }

    pub fn cols(&self) -> usize {
        self.plan.cols()
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.plan[(i, j)]
    }

    pub fn row_marginal(&self) -> &[f64] {
        &self.row_marginal
    }

    pub fn col_marginal(&self) -> &[f64] {
        &self.col_marginal
    }

    /// Largest deviation between the plan's sums and its declared marginals.
    pub fn marginal_error(&self) -> f64 {
        marginal_violation(&self.plan, &self.row_marginal, &self.col_marginal).unwrap_or(f64::INFINITY)
    }

    /// Nonzero entries `(i, j, mass)` with mass above `threshold`.
    pub fn entries(&self, threshold: f64) -> impl Iterator<Item = (usize, usize, f64)> + '_ {
        let m = self.plan.cols();
        self.plan
            .as_slice()
            .iter()
            .enumerate()
            .filter(move |(_, &v)| v > threshold)
            .map(move |(idx, &v)| (idx / m, idx % m, v))
    }

    /// `sum_ij C_ij plan_ij`.
    pub fn cost(&self, c: &CostMatrix) -> Result<f64> {
        check_shape(c, self.rows(), self.cols())?;
        Ok(self.plan.inner(c.matrix()))
    }

    /// `KL(plan || a b^T)`.
    pub fn kl_to_product(&self) -> f64 {
        let mut total = 0.0;
        for (i, j, p) in self.entries(0.0) {
            let q = self.row_marginal[i] * self.col_marginal[j];
            if q <= 0.0 {
                return f64::INFINITY;
            }
            total += p * libm::log(p / q);
        }
        total
    }
}

/// Maximum violation of nonnegativity or of either marginal, per entry.
pub fn marginal_violation(plan: &Matrix, a: &[f64], b: &[f64]) -> Result<f64> {
    if plan.rows() != a.len() || plan.cols() != b.len() {
        return Err(Error::ShapeMismatch {
            rows: plan.rows(),
            cols: plan.cols(),
            expected_rows: a.len(),
            expected_cols: b.len(),
        });
    }
    let mut err = 0.0f64;
    for &v in plan.as_slice() {
        if !v.is_finite() {
            return Ok(f64::INFINITY);
        }
        if v < -NEGATIVE_MASS_TOLERANCE {
            err = err.max(-v);
        }
    }
    for (s, t) in plan.row_sums().iter().zip(a) {
        err = err.max((s - t).abs());
    }
    for (s, t) in plan.col_sums().iter().zip(b) {
        err = err.max((s - t).abs());
    }
    Ok(err)
}

/// Optimal value, plan, and dual potentials of a transportation LP.
///
/// For minimization the potentials satisfy `f_i + g_j <= C_ij` with equality
/// on the support of the plan; for maximization the inequality flips.
#[derive(Clone, Debug, PartialEq)]
pub struct TransportResult {
    pub value: f64,
    pub plan: Coupling,
    pub dual_row: Vec<f64>,
    pub dual_col: Vec<f64>,
}

impl TransportResult {
    /// `sum_i f_i a_i + sum_j g_j b_j`.
    pub fn dual_value(&self) -> f64 {
        let f: f64 = self.dual_row.iter().zip(self.plan.row_marginal()).map(|(f, a)| f * a).sum();
        let g: f64 = self.dual_col.iter().zip(self.plan.col_marginal()).map(|(g, b)| g * b).sum();
        f + g
    }
}

/// `W_p(mu, nu)` for `p` in {1, 2} via the exact solver.
pub fn w_p(mu: &DiscreteMeasure, nu: &DiscreteMeasure, p: u32) -> Result<f64> {
    let (value, _) = w_p_with_plan(mu, nu, p)?;
    Ok(value)
}

/// `W_p` together with an optimal plan.
pub fn w_p_with_plan(mu: &DiscreteMeasure, nu: &DiscreteMeasure, p: u32) -> Result<(f64, Coupling)> {
    if p == 0 {
        return Err(Error::InvalidParameter("Wasserstein order must be positive"));
    }
    let c = CostMatrix::power_distance(mu, nu, p)?;
    let res = solve_exact(mu.weights(), nu.weights(), &c, Direction::Minimize)?;
    let v = res.value.max(0.0);
    let value = match p {
        1 => v,
        2 => libm::sqrt(v),
        _ => libm::pow(v, 1.0 / p as f64),
    };
    Ok((value, res.plan))
}

pub(crate) fn check_same_dim(mu: &DiscreteMeasure, nu: &DiscreteMeasure) -> Result<()> {
    if mu.dim() != nu.dim() {
        return Err(Error::DimensionMismatch {
            expected: mu.dim(),
            found: nu.dim(),
        });
    }
    Ok(())
}

pub(crate) fn check_shape(c: &CostMatrix, rows: usize, cols: usize) -> Result<()> {
    if c.rows() != rows || c.cols() != cols {
        return Err(Error::ShapeMismatch {
            rows: c.rows(),
            cols: c.cols(),
            expected_rows: rows,
            expected_cols: cols,
        });
    }
    Ok(())
}

/// Validates a pair of marginals for a transportation problem.
pub(crate) fn check_marginals(a: &[f64], b: &[f64]) -> Result<()> {
    if a.is_empty() || b.is_empty() {
        return Err(Error::Empty("marginal"));
    }
    for w in a.iter().chain(b) {
        if !w.is_finite() {
            return Err(Error::NonFinite("marginal"));
        }
        if *w < 0.0 {
            return Err(Error::InvalidWeights("negative marginal entry"));
        }
    }
    let (sa, sb): (f64, f64) = (a.iter().sum(), b.iter().sum());
    if (sa - sb).abs() > FEASIBILITY_TOLERANCE || sa <= 0.0 {
        return Err(Error::Infeasible {
            row_total: sa,
            col_total: sb,
        });
    }
    Ok(())
}
