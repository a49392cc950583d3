//! Newsvendor with three customer types.
//!
//! Each type's cost vector is the expected underage/overage cost of every
//! order on the grid. With the order chosen from the simplex of order
//! probabilities, the oracle picks the critical-fractile order.

use alloc::vec::Vec;

use crate::dfdist::{self, OptimisticMethod};
use crate::matrix::Matrix;
use crate::measures::{check_probability_vector, kl_divergence, tv_distance, DiscreteMeasure};
use crate::polytope::{CostVector, FeasibleRegion};
use crate::transport::w_p;
use crate::{Error, Result};

pub const DEFAULT_UNDERAGE: f64 = 3.0;
pub const DEFAULT_OVERAGE: f64 = 2.0;

/// Demand pmfs over `{5, ..., 15}` whose 0.6-quantiles are 9, 10 and 11.
pub const DEFAULT_PMFS: [[f64; 11]; 3] = [
    [0.05, 0.10, 0.15, 0.15, 0.20, 0.12, 0.08, 0.06, 0.05, 0.03, 0.01],
    [0.02, 0.04, 0.07, 0.10, 0.14, 0.26, 0.14, 0.10, 0.07, 0.04, 0.02],
    [0.04, 0.10, 0.14, 0.10, 0.05, 0.04, 0.16, 0.12, 0.11, 0.08, 0.06],
];

/// Mixture weights of the reference table, compared against the uniform mix.
pub const TABLE_LAMBDAS: [[f64; 3]; 4] = [
    [1.0 / 4.0, 1.0 / 4.0, 1.0 / 2.0],
    [1.0 / 5.0, 1.0 / 5.0, 3.0 / 5.0],
    [1.0 / 6.0, 1.0 / 6.0, 2.0 / 3.0],
    [1.0 / 10.0, 1.0 / 10.0, 8.0 / 10.0],
];

pub const UNIFORM_LAMBDA: [f64; 3] = [1.0 / 3.0; 3];

#[derive(Clone, Debug, PartialEq)]
pub struct NewsvendorInstance {
    demand: Vec<f64>,
    orders: Vec<f64>,
    pmfs: Vec<Vec<f64>>,
    underage: f64,
    overage: f64,
    cost: Matrix,
}

impl NewsvendorInstance {
    pub fn new(demand: Vec<f64>, orders: Vec<f64>, pmfs: Vec<Vec<f64>>, underage: f64, overage: f64) -> Result<Self> {
        if demand.is_empty() {
            return Err(Error::Empty("demand support"));
        }
        if orders.is_empty() {
            return Err(Error::Empty("order grid"));
        }
        if pmfs.is_empty() {
            return Err(Error::Empty("demand pmfs"));
        }
        if demand.iter().chain(&orders).any(|v| !v.is_finite()) {
            return Err(Error::NonFinite("newsvendor grid"));
        }
        if !(underage > 0.0 && overage > 0.0 && underage.is_finite() && overage.is_finite()) {
            return Err(Error::InvalidParameter("underage and overage costs must be positive"));
        }
        for p in &pmfs {
            if p.len() != demand.len() {
                return Err(Error::LengthMismatch {
                    left: p.len(),
                    right: demand.len(),
                });
            }
            check_probability_vector(p)?;
        }
        let cost = Matrix::from_fn(demand.len(), orders.len(), |i, j| {
            let (d, q) = (demand[i], orders[j]);
            underage * (d - q).max(0.0) + overage * (q - d).max(0.0)
        });
        Ok(Self {
            demand,
            orders,
            pmfs,
            underage,
            overage,
            cost,
        })
    }

    /// `b = 3`, `h = 2`, demand and orders on `{5, ..., 15}`.
    pub fn default_instance() -> Self {
        let grid: Vec<f64> = (5..=15).map(f64::from).collect();
        let pmfs = DEFAULT_PMFS.iter().map(|p| p.to_vec()).collect();
        Self::new(grid.clone(), grid, pmfs, DEFAULT_UNDERAGE, DEFAULT_OVERAGE).expect("bundled instance is valid")
    }

    pub fn demand(&self) -> &[f64] {
        &self.demand
    }

    pub fn orders(&self) -> &[f64] {
        &self.orders
    }

    pub fn pmfs(&self) -> &[Vec<f64>] {
        &self.pmfs
    }

    pub fn underage(&self) -> f64 {
        self.underage
    }

    pub fn overage(&self) -> f64 {
        self.overage
    }

    /// `alpha = b / (b + h)`.
    pub fn fractile(&self) -> f64 {
        self.underage / (self.underage + self.overage)
    }

    /// `C_ij = b (d_i - q_j)^+ + h (q_j - d_i)^+`.
    pub fn cost_matrix(&self) -> &Matrix {
        &self.cost
    }

    /// Simplex over order probabilities; extreme point `j` orders `q_j`.
    pub fn region(&self) -> FeasibleRegion {
        FeasibleRegion::simplex(self.orders.len()).expect("order grid is nonempty")
    }

    /// `c^(k)_j = sum_i p^(k)_i C_ij` for every type.
    pub fn type_costs(&self) -> Vec<CostVector> {
        self.pmfs
            .iter()
            .map(|p| {
                let v = (0..self.orders.len())
                    .map(|j| p.iter().enumerate().map(|(i, pi)| pi * self.cost[(i, j)]).sum())
                    .collect::<Vec<f64>>();
                CostVector(v)
            })
            .collect()
    }

    /// Order chosen by the oracle for each type.
    pub fn optimal_orders(&self) -> Vec<f64> {
        let region = self.region();
        self.type_costs()
            .iter()
            .map(|c| {
                let k = region.region_index(c).expect("cost vector matches the grid");
                self.orders[k]
            })
            .collect()
    }

    /// Smallest demand value whose CDF under type `k` reaches the fractile.
    pub fn fractile_quantile(&self, k: usize) -> f64 {
        let alpha = self.fractile();
        let mut cdf = 0.0;
        for (d, p) in self.demand.iter().zip(&self.pmfs[k]) {
            cdf += p;
            if cdf >= alpha - 1e-12 {
                return *d;
            }
        }
        self.demand[self.demand.len() - 1]
    }

    /// `mu_lambda = sum_k lambda_k delta_{c^(k)}`.
    pub fn mixture(&self, lambda: &[f64]) -> Result<DiscreteMeasure> {
        if lambda.len() != self.pmfs.len() {
            return Err(Error::LengthMismatch {
                left: lambda.len(),
                right: self.pmfs.len(),
            });
        }
        let points = self.type_costs().into_iter().map(|c| c.0).collect();
        DiscreteMeasure::new(points, lambda.to_vec())
    }
}

/// One row of the mixture-distance table.
#[derive(Clone, Debug, PartialEq)]
pub struct MixtureRow {
    pub lambda: Vec<f64>,
    pub w_dfo: f64,
    pub regret: f64,
    pub w_dfr: f64,
    pub tv: f64,
    pub kl: f64,
    pub w1: f64,
    pub w2: f64,
}

/// Distances between `mu_lambda` and `mu_lambda0` for every `lambda`. TV and
/// KL act on the weights; W1 and W2 on the type indices `{1, 2, 3}`.
pub fn mixture_table(instance: &NewsvendorInstance, lambdas: &[Vec<f64>], lambda0: &[f64]) -> Result<Vec<MixtureRow>> {
    let region = instance.region();
    let base = instance.mixture(lambda0)?;
    let types: Vec<Vec<f64>> = (1..=lambda0.len()).map(|k| alloc::vec![k as f64]).collect();
    let base_types = DiscreteMeasure::new(types.clone(), lambda0.to_vec())?;
    lambdas
        .iter()
        .map(|lambda| {
            let mu = instance.mixture(lambda)?;
            let mu_types = DiscreteMeasure::new(types.clone(), lambda.clone())?;
            Ok(MixtureRow {
                lambda: lambda.clone(),
                w_dfo: dfdist::optimistic(&region, &mu, &base, OptimisticMethod::Direct)?.value,
                regret: dfdist::regret(&region, &mu, &base)?,
                w_dfr: dfdist::robust(&region, &mu, &base)?.value,
                tv: tv_distance(lambda, lambda0)?,
                kl: kl_divergence(lambda, lambda0)?,
                w1: w_p(&mu_types, &base_types, 1)?,
                w2: w_p(&mu_types, &base_types, 2)?,
            })
        })
        .collect()
}

/// Table rows for [`TABLE_LAMBDAS`] against the uniform mixture.
pub fn default_table(instance: &NewsvendorInstance) -> Result<Vec<MixtureRow>> {
    let lambdas: Vec<Vec<f64>> = TABLE_LAMBDAS.iter().map(|l| l.to_vec()).collect();
    mixture_table(instance, &lambdas, &UNIFORM_LAMBDA)
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec;

    #[test]
    fn default_types_order_at_their_fractiles() {
        let inst = NewsvendorInstance::default_instance();
        assert_eq!(inst.fractile(), 0.6);
        assert_eq!(inst.optimal_orders(), vec![9.0, 10.0, 11.0]);
        for k in 0..3 {
            assert_eq!(inst.fractile_quantile(k), [9.0, 10.0, 11.0][k]);
        }
    }

    #[test]
    fn cost_vectors_match_double_sum() {
        let inst = NewsvendorInstance::default_instance();
        let costs = inst.type_costs();
        for (k, c) in costs.iter().enumerate() {
            for (j, q) in inst.orders().iter().enumerate() {
                let mut expected = 0.0;
                for (d, p) in inst.demand().iter().zip(&inst.pmfs()[k]) {
                    let short = if d > q { d - q } else { 0.0 };
                    let over = if q > d { q - d } else { 0.0 };
                    expected += p * (3.0 * short + 2.0 * over);
                }
                assert!((c[j] - expected).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn degenerate_demand_orders_exactly() {
        let grid: Vec<f64> = (5..=15).map(f64::from).collect();
        let mut pmf = vec![0.0; 11];
        pmf[4] = 1.0;
        let inst = NewsvendorInstance::new(grid.clone(), grid, vec![pmf], 3.0, 2.0).unwrap();
        let c = &inst.type_costs()[0];
        assert_eq!(inst.optimal_orders(), vec![9.0]);
        assert_eq!(c[4], 0.0);
    }

    #[test]
    fn cost_matrix_is_v_shaped() {
        let inst = NewsvendorInstance::default_instance();
        let c = inst.cost_matrix();
        for i in 0..c.rows() {
            let argmin = (0..c.cols()).min_by(|&a, &b| c[(i, a)].total_cmp(&c[(i, b)])).unwrap();
            assert_eq!(inst.orders()[argmin], inst.demand()[i]);
            for j in 1..c.cols() {
                let step = c[(i, j)] - c[(i, j - 1)];
                let expected = if j <= argmin { -3.0 } else { 2.0 };
                assert!((step - expected).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn bad_instances_rejected() {
        let grid = vec![1.0, 2.0];
        assert!(NewsvendorInstance::new(grid.clone(), grid.clone(), vec![vec![0.5, 0.6]], 3.0, 2.0).is_err());
        assert!(NewsvendorInstance::new(grid.clone(), grid.clone(), vec![vec![0.5, 0.5]], 0.0, 2.0).is_err());
        assert!(NewsvendorInstance::new(grid.clone(), grid, vec![vec![1.0]], 3.0, 2.0).is_err());
    }
}
