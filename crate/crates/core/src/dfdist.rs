//! Decision-focused distances between measures of cost vectors.
//!
//! The transport cost between a predicted cost `x` and a realized cost `y` is
//! the SPO loss `y^T w*(x) - y^T w*(y)`. Optimistic and robust distances take
//! the best and worst coupling, the regret takes the product coupling, and
//! the entropic variants penalize `KL(gamma || mu x nu)`.
//!
//! The optimistic distance can also be computed in the reduced space: with
//! `alpha = (-w*)_# mu`,
//!
//! ```text
//! W_DFO(mu, nu) = 1/2 [ W_2^2(alpha, nu) - ||alpha||^2 - ||nu||^2 - 2 E_nu[z(Y)] ]
//! ```
//!
//! which is an `|S| x m` problem instead of `n x m`. Optimal reduced plans are
//! lifted back by splitting each region's mass proportionally to `mu`.

use alloc::vec::Vec;

use crate::matrix::Matrix;
use crate::measures::{pushforward, DiscreteMeasure};
use crate::polytope::FeasibleRegion;
use crate::transport::{
    check_same_dim, marginal_violation, solve_entropic, solve_exact, CostMatrix, Coupling, Direction,
    MARGINAL_TOLERANCE,
};
use crate::vecops::{dist_sq, dot, norm_sq};
use crate::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Mode {
    Optimistic,
    Robust,
}

/// How a [`DfResult`] was produced.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum DfMethod {
    DirectLp,
    Reduction,
    Entropic,
    Product,
}

impl DfMethod {
    pub fn as_str(self) -> &'static str {
        match self {
            DfMethod::DirectLp => "direct_lp",
            DfMethod::Reduction => "reduction",
            DfMethod::Entropic => "entropic",
            DfMethod::Product => "product",
        }
    }
}

/// Solver route for the optimistic distance.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum OptimisticMethod {
    /// `n x m` transportation LP on the SPO cost.
    Direct,
    /// Quadratic OT between `(-w*)_# mu` and `nu`, then lift.
    Reduction,
}

impl OptimisticMethod {
    /// Reduction whenever the reduced problem has fewer rows.
    pub fn auto(region: &FeasibleRegion, mu: &DiscreteMeasure) -> Self {
        if mu.len() > region.len() {
            OptimisticMethod::Reduction
        } else {
            OptimisticMethod::Direct
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Symmetrization {
    /// `W(mu, nu) + W(nu, mu)`.
    Additive,
    /// `W(mu, m)/2 + W(nu, m)/2` with `m = (mu + nu)/2`.
    JensenShannon,
}

/// Dual pair: `f` over extreme points, `g` over atoms of `nu`.
#[derive(Clone, Debug, PartialEq)]
pub struct DualPotentials {
    pub f: Vec<f64>,
    pub g: Vec<f64>,
}

/// Solver status carried by entropic results.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct EntropicStatus {
    pub epsilon: f64,
    pub converged: bool,
    pub iterations: usize,
    pub marginal_error: f64,
    pub kl_to_product: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct DfResult {
    /// Reported distance. For entropic results this is the regularized
    /// objective.
    pub value: f64,
    /// `sum_ij l_SPO(x_i, y_j) gamma_ij` under `coupling`.
    pub value_plain: f64,
    /// Coupling over the original `mu x nu` supports.
    pub coupling: Coupling,
    /// Reduced plan over `(-w*)_# mu x nu` when the reduction was used.
    pub reduced_coupling: Option<Coupling>,
    pub dual: Option<DualPotentials>,
    pub method: DfMethod,
    pub entropic: Option<EntropicStatus>,
}

/// Per-`nu` constants of the reduction: `||nu||^2` and `E_nu[z(Y)]`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct TargetSummary {
    pub second_moment: f64,
    pub mean_value: f64,
}

impl TargetSummary {
    pub fn new(region: &FeasibleRegion, nu: &DiscreteMeasure) -> Result<Self> {
        let mut mean_value = 0.0;
        for (y, b) in nu.iter() {
            mean_value += b * region.value(y)?;
        }
        Ok(Self {
            second_moment: nu.second_moment(),
            mean_value,
        })
    }
}

/// `C_ij = l_SPO(x_i, y_j)`.
pub fn spo_cost_matrix(region: &FeasibleRegion, mu: &DiscreteMeasure, nu: &DiscreteMeasure) -> Result<CostMatrix> {
    check_inputs(region, mu, nu)?;
    let regions: Vec<usize> = mu
        .points()
        .iter()
        .map(|x| region.region_index(x))
        .collect::<Result<_>>()?;
    // objectives[j][k] = y_j^T w_k
    let objectives: Vec<Vec<f64>> = nu.points().iter().map(|y| region.objectives(y)).collect::<Result<_>>()?;
    let values: Vec<f64> = nu
        .points()
        .iter()
        .zip(&objectives)
        .map(|(y, obj)| region.region_index(y).map(|k| obj[k]))
        .collect::<Result<_>>()?;
    CostMatrix::from_fn(mu.len(), nu.len(), |i, j| (objectives[j][regions[i]] - values[j]).max(0.0))
}

/// `sum_ij l_SPO(x_i, y_j) gamma_ij` for a coupling of `mu` and `nu`.
pub fn df_divergence(
    region: &FeasibleRegion,
    mu: &DiscreteMeasure,
    nu: &DiscreteMeasure,
    gamma: &Coupling,
) -> Result<f64> {
    check_inputs(region, mu, nu)?;
    let err = marginal_violation(gamma.plan(), mu.weights(), nu.weights())?;
    if err > MARGINAL_TOLERANCE {
        return Err(Error::MarginalMismatch { max_error: err });
    }
    let c = spo_cost_matrix(region, mu, nu)?;
    gamma.cost(&c)
}

/// Infimum of the expected SPO loss over couplings.
pub fn optimistic(
    region: &FeasibleRegion,
    mu: &DiscreteMeasure,
    nu: &DiscreteMeasure,
    method: OptimisticMethod,
) -> Result<DfResult> {
    match method {
        OptimisticMethod::Direct => extremal_direct(region, mu, nu, Direction::Minimize),
        OptimisticMethod::Reduction => {
            let summary = TargetSummary::new(region, nu)?;
            optimistic_reduction(region, mu, nu, &summary)
        }
    }
}

/// Supremum of the expected SPO loss over couplings.
pub fn robust(region: &FeasibleRegion, mu: &DiscreteMeasure, nu: &DiscreteMeasure) -> Result<DfResult> {
    extremal_direct(region, mu, nu, Direction::Maximize)
}

/// Optimistic (default route) or robust distance.
pub fn distance(region: &FeasibleRegion, mu: &DiscreteMeasure, nu: &DiscreteMeasure, mode: Mode) -> Result<DfResult> {
    match mode {
        Mode::Optimistic => optimistic(region, mu, nu, OptimisticMethod::auto(region, mu)),
        Mode::Robust => robust(region, mu, nu),
    }
}

fn extremal_direct(
    region: &FeasibleRegion,
    mu: &DiscreteMeasure,
    nu: &DiscreteMeasure,
    direction: Direction,
) -> Result<DfResult> {
    let c = spo_cost_matrix(region, mu, nu)?;
    let res = solve_exact(mu.weights(), nu.weights(), &c, direction)?;
    let value = res.value.max(0.0);
    Ok(DfResult {
        value,
        value_plain: value,
        coupling: res.plan,
        reduced_coupling: None,
        dual: None,
        method: DfMethod::DirectLp,
        entropic: None,
    })
}

/// Reduction route with precomputed `nu` constants.
pub fn optimistic_reduction(
    region: &FeasibleRegion,
    mu: &DiscreteMeasure,
    nu: &DiscreteMeasure,
    summary: &TargetSummary,
) -> Result<DfResult> {
    check_inputs(region, mu, nu)?;
    let alpha = pushforward(region, mu, true)?;
    let quad = CostMatrix::from_fn(region.len(), nu.len(), |k, j| dist_sq(&alpha.atoms()[k], nu.point(j)))?;
    let res = solve_exact(alpha.masses(), nu.weights(), &quad, Direction::Minimize)?;
    let value = 0.5 * (res.value - alpha.second_moment() - summary.second_moment - 2.0 * summary.mean_value);

    // Quadratic duals (phi, psi) map to SPO duals over reduced costs
    // c_k(y) = y^T w_k - z(y) = 1/2 ||w_k + y||^2 - 1/2 ||w_k||^2 - 1/2 ||y||^2 - z(y).
    let f = res
        .dual_row
        .iter()
        .zip(region.extreme_points())
        .map(|(phi, w)| 0.5 * phi - 0.5 * norm_sq(w))
        .collect();
    let mut g = Vec::with_capacity(nu.len());
    for (psi, y) in res.dual_col.iter().zip(nu.points()) {
        g.push(0.5 * psi - 0.5 * norm_sq(y) - region.value(y)?);
    }

    let coupling = lift_coupling(region, mu, &res.plan)?;
    let c = spo_cost_matrix(region, mu, nu)?;
    let value_plain = coupling.cost(&c)?;
    Ok(DfResult {
        value: value.max(0.0),
        value_plain,
        coupling,
        reduced_coupling: Some(res.plan),
        dual: Some(DualPotentials { f, g }),
        method: DfMethod::Reduction,
        entropic: None,
    })
}

/// Expected SPO loss under the product coupling.
pub fn regret(region: &FeasibleRegion, mu: &DiscreteMeasure, nu: &DiscreteMeasure) -> Result<f64> {
    let c = spo_cost_matrix(region, mu, nu)?;
    let mut total = 0.0;
    for (i, a) in mu.weights().iter().enumerate() {
        for (j, b) in nu.weights().iter().enumerate() {
            total += a * b * c.get(i, j);
        }
    }
    Ok(total)
}

/// Regret packaged as a [`DfResult`] with the product coupling.
pub fn independent(region: &FeasibleRegion, mu: &DiscreteMeasure, nu: &DiscreteMeasure) -> Result<DfResult> {
    let value = regret(region, mu, nu)?;
    Ok(DfResult {
        value,
        value_plain: value,
        coupling: Coupling::product(mu.weights(), nu.weights()),
        reduced_coupling: None,
        dual: None,
        method: DfMethod::Product,
        entropic: None,
    })
}

/// Symmetrized optimistic or robust distance.
pub fn symmetric(
    region: &FeasibleRegion,
    mu: &DiscreteMeasure,
    nu: &DiscreteMeasure,
    kind: Symmetrization,
    mode: Mode,
) -> Result<f64> {
    check_inputs(region, mu, nu)?;
    let d = |p: &DiscreteMeasure, q: &DiscreteMeasure| distance(region, p, q, mode).map(|r| r.value);
    match kind {
        Symmetrization::Additive => Ok(d(mu, nu)? + d(nu, mu)?),
        Symmetrization::JensenShannon => {
            let mid = mu.midpoint_mixture(nu)?;
            Ok(0.5 * d(mu, &mid)? + 0.5 * d(nu, &mid)?)
        }
    }
}

/// Entropy-regularized optimistic (`+ eps KL`) or robust (`- eps KL`)
/// divergence. `value` is the regularized objective, `value_plain` the
/// transport term.
pub fn entropic_df(
    region: &FeasibleRegion,
    mu: &DiscreteMeasure,
    nu: &DiscreteMeasure,
    eps: f64,
    mode: Mode,
) -> Result<DfResult> {
    let c = spo_cost_matrix(region, mu, nu)?;
    let direction = match mode {
        Mode::Optimistic => Direction::Minimize,
        Mode::Robust => Direction::Maximize,
    };
    let res = solve_entropic(mu.weights(), nu.weights(), &c, eps, direction)?;
    Ok(DfResult {
        value: res.value_regularized,
        value_plain: res.value_plain,
        coupling: res.plan,
        reduced_coupling: None,
        dual: None,
        method: DfMethod::Entropic,
        entropic: Some(EntropicStatus {
            epsilon: eps,
            converged: res.converged,
            iterations: res.iterations,
            marginal_error: res.marginal_error,
            kl_to_product: res.kl_to_product,
        }),
    })
}

/// Lift a plan between `(-w*)_# mu` (rows indexed by extreme point) and any
/// column measure to a plan between `mu` and that measure:
/// `gamma_ij = reduced(k(i), j) a_i / mu(D_k(i))`.
pub fn lift_coupling(region: &FeasibleRegion, mu: &DiscreteMeasure, reduced: &Coupling) -> Result<Coupling> {
    let pf = pushforward(region, mu, true)?;
    if reduced.rows() != region.len() {
        return Err(Error::ShapeMismatch {
            rows: reduced.rows(),
            cols: reduced.cols(),
            expected_rows: region.len(),
            expected_cols: reduced.cols(),
        });
    }
    let row_sums = reduced.plan().row_sums();
    let err = row_sums
        .iter()
        .zip(pf.masses())
        .fold(0.0f64, |e, (s, m)| e.max((s - m).abs()));
    if err > MARGINAL_TOLERANCE {
        return Err(Error::MarginalMismatch { max_error: err });
    }
    let m = reduced.cols();
    let mut plan = Matrix::zeros(mu.len(), m);
    for (i, (&k, a)) in pf.region_map().iter().zip(mu.weights()).enumerate() {
        let mass = pf.masses()[k];
        if mass <= 0.0 {
            continue;
        }
        let share = a / mass;
        for j in 0..m {
            plan[(i, j)] = reduced.get(k, j) * share;
        }
    }
    Ok(Coupling::from_parts(plan, mu.weights().to_vec(), reduced.col_marginal().to_vec()))
}

/// Dual objective `sum_k f_k mu(D_k) + sum_j b_j g_f(y_j)` with the envelope
/// `g_f(y) = min_k (y^T w_k - z(y) - f_k)`. A lower bound on the optimistic
/// distance for every `f`.
pub fn dual_certificate(region: &FeasibleRegion, mu: &DiscreteMeasure, nu: &DiscreteMeasure, f: &[f64]) -> Result<f64> {
    check_inputs(region, mu, nu)?;
    if f.len() != region.len() {
        return Err(Error::LengthMismatch {
            left: f.len(),
            right: region.len(),
        });
    }
    if f.iter().any(|v| !v.is_finite()) {
        return Err(Error::NonFinite("dual potentials"));
    }
    let pf = pushforward(region, mu, false)?;
    let mut total: f64 = f.iter().zip(pf.masses()).map(|(fk, m)| fk * m).sum();
    for (y, b) in nu.iter() {
        let z = region.value(y)?;
        let envelope = region
            .extreme_points()
            .iter()
            .zip(f)
            .map(|(w, fk)| dot(y, w) - z - fk)
            .fold(f64::INFINITY, f64::min);
        total += b * envelope;
    }
    Ok(total)
}

fn check_inputs(region: &FeasibleRegion, mu: &DiscreteMeasure, nu: &DiscreteMeasure) -> Result<()> {
    check_same_dim(mu, nu)?;
    if mu.dim() != region.dim() {
        return Err(Error::DimensionMismatch {
            expected: region.dim(),
            found: mu.dim(),
        });
    }
    Ok(())
}

/// `mu` with every atom rescaled by a positive factor (same weights).
pub fn rescaled(mu: &DiscreteMeasure, factors: &[f64]) -> Result<DiscreteMeasure> {
    if factors.len() != mu.len() {
        return Err(Error::LengthMismatch {
            left: factors.len(),
            right: mu.len(),
        });
    }
    let points = mu
        .points()
        .iter()
        .zip(factors)
        .map(|(p, c)| p.iter().map(|v| c * v).collect())
        .collect();
    DiscreteMeasure::new(points, mu.weights().to_vec())
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec;

    fn triangle() -> FeasibleRegion {
        FeasibleRegion::new(vec![vec![0.0, 0.0], vec![1.0, 0.0], vec![0.0, 1.0]]).unwrap()
    }

    fn pair() -> (DiscreteMeasure, DiscreteMeasure) {
        let mu = DiscreteMeasure::new(
            vec![vec![-1.0, 1.0], vec![1.0, -1.0], vec![1.0, 1.0]],
            vec![0.5, 0.3, 0.2],
        )
        .unwrap();
        let nu = DiscreteMeasure::new(
            vec![vec![1.0, -2.0], vec![-0.5, 0.5], vec![2.0, 3.0], vec![-1.0, -3.0]],
            vec![0.4, 0.1, 0.25, 0.25],
        )
        .unwrap();
        (mu, nu)
    }

    #[test]
    fn identical_measures_are_at_zero() {
        let (mu, _) = pair();
        let s = triangle();
        let id = Coupling::identity(mu.weights());
        assert_eq!(df_divergence(&s, &mu, &mu, &id).unwrap(), 0.0);
        for method in [OptimisticMethod::Direct, OptimisticMethod::Reduction] {
            assert!(optimistic(&s, &mu, &mu, method).unwrap().value.abs() < 1e-12);
        }
    }

    #[test]
    fn singletons() {
        let s = triangle();
        let x = DiscreteMeasure::dirac(vec![-1.0, 1.0]).unwrap();
        let y = DiscreteMeasure::dirac(vec![1.0, -1.0]).unwrap();
        let loss = s.spo_loss(&[-1.0, 1.0], &[1.0, -1.0]).unwrap();
        assert_eq!(regret(&s, &x, &y).unwrap(), loss);
        assert!((optimistic(&s, &x, &y, OptimisticMethod::Direct).unwrap().value - loss).abs() < 1e-12);
        assert!((optimistic(&s, &x, &y, OptimisticMethod::Reduction).unwrap().value - loss).abs() < 1e-12);
        assert!((robust(&s, &x, &y).unwrap().value - loss).abs() < 1e-12);
        let gamma = Coupling::product(&[1.0], &[1.0]);
        assert_eq!(df_divergence(&s, &x, &y, &gamma).unwrap(), loss);
    }

    #[test]
    fn regret_two_atom_hand_instance() {
        let s = triangle();
        let mu = DiscreteMeasure::new(vec![vec![-1.0, 1.0], vec![1.0, -1.0]], vec![0.25, 0.75]).unwrap();
        let nu = DiscreteMeasure::new(vec![vec![1.0, -1.0], vec![-2.0, 0.0]], vec![0.5, 0.5]).unwrap();
        // w*(x1) = (1,0), w*(x2) = (0,1); z(y1) = -1, z(y2) = -2.
        // l(x1,y1) = 1 - (-1) = 2, l(x1,y2) = -2 - (-2) = 0,
        // l(x2,y1) = -1 - (-1) = 0, l(x2,y2) = 0 - (-2) = 2.
        let expected = 0.25 * 0.5 * 2.0 + 0.75 * 0.5 * 2.0;
        assert!((regret(&s, &mu, &nu).unwrap() - expected).abs() < 1e-15);
    }

    #[test]
    fn product_coupling_divergence_is_regret() {
        let s = triangle();
        let (mu, nu) = pair();
        let gamma = Coupling::product(mu.weights(), nu.weights());
        assert!((df_divergence(&s, &mu, &nu, &gamma).unwrap() - regret(&s, &mu, &nu).unwrap()).abs() < 1e-14);
    }

    #[test]
    fn chain_and_methods_agree() {
        let s = triangle();
        let (mu, nu) = pair();
        let direct = optimistic(&s, &mu, &nu, OptimisticMethod::Direct).unwrap();
        let reduced = optimistic(&s, &mu, &nu, OptimisticMethod::Reduction).unwrap();
        assert!((direct.value - reduced.value).abs() < 1e-9);
        assert!((reduced.value_plain - reduced.value).abs() < 1e-9);
        let r = regret(&s, &mu, &nu).unwrap();
        let rob = robust(&s, &mu, &nu).unwrap().value;
        assert!(direct.value <= r + 1e-12 && r <= rob + 1e-12);
    }

    #[test]
    fn dual_certificate_examples() {
        let s = triangle();
        let (mu, nu) = pair();
        let res = optimistic(&s, &mu, &nu, OptimisticMethod::Reduction).unwrap();
        let f = &res.dual.as_ref().unwrap().f;
        let cert = dual_certificate(&s, &mu, &nu, f).unwrap();
        assert!((cert - res.value).abs() < 1e-9);
        let shifted: Vec<f64> = f.iter().map(|v| v + 3.25).collect();
        assert!((dual_certificate(&s, &mu, &nu, &shifted).unwrap() - cert).abs() < 1e-12);
        let lower = dual_certificate(&s, &mu, &nu, &[0.0; 3]).unwrap();
        assert!(lower <= res.value + 1e-12);
        assert!(dual_certificate(&s, &mu, &nu, &[0.0; 2]).is_err());
    }

    #[test]
    fn lift_of_single_region_is_rank_one() {
        let s = triangle();
        let mu = DiscreteMeasure::new(vec![vec![-1.0, 0.5], vec![-3.0, 2.0]], vec![0.4, 0.6]).unwrap();
        let (_, nu) = pair();
        let res = optimistic(&s, &mu, &nu, OptimisticMethod::Reduction).unwrap();
        let reduced = res.reduced_coupling.unwrap();
        for i in 0..2 {
            for j in 0..nu.len() {
                let expected = mu.weight(i) * reduced.get(1, j);
                assert!((res.coupling.get(i, j) - expected).abs() < 1e-15);
            }
        }
    }

    #[test]
    fn lift_rejects_mismatched_rows() {
        let s = triangle();
        let (mu, nu) = pair();
        let bad = Coupling::product(&[1.0, 0.0, 0.0], nu.weights());
        assert!(matches!(lift_coupling(&s, &mu, &bad), Err(Error::MarginalMismatch { .. })));
    }

    #[test]
    fn symmetric_variants_vanish_on_identical_measures() {
        let s = triangle();
        let (mu, nu) = pair();
        for kind in [Symmetrization::Additive, Symmetrization::JensenShannon] {
            for mode in [Mode::Optimistic, Mode::Robust] {
                if mode == Mode::Optimistic {
                    assert!(symmetric(&s, &mu, &mu, kind, mode).unwrap().abs() < 1e-12);
                }
                let ab = symmetric(&s, &mu, &nu, kind, mode).unwrap();
                let ba = symmetric(&s, &nu, &mu, kind, mode).unwrap();
                assert!((ab - ba).abs() < 1e-12);
            }
        }
        let add = symmetric(&s, &mu, &nu, Symmetrization::Additive, Mode::Optimistic).unwrap();
        assert!(add >= optimistic(&s, &mu, &nu, OptimisticMethod::Direct).unwrap().value - 1e-12);
    }

    #[test]
    fn robust_identical_single_region() {
        let s = triangle();
        let mu = DiscreteMeasure::from_samples(vec![vec![-1.0, 0.5], vec![-3.0, 2.0]]).unwrap();
        assert!(robust(&s, &mu, &mu).unwrap().value.abs() < 1e-15);
        assert!(symmetric(&s, &mu, &mu, Symmetrization::JensenShannon, Mode::Robust).unwrap().abs() < 1e-15);
    }

    #[test]
    fn entropic_large_epsilon_matches_regret() {
        let s = triangle();
        let (mu, nu) = pair();
        let r = regret(&s, &mu, &nu).unwrap();
        for mode in [Mode::Optimistic, Mode::Robust] {
            let res = entropic_df(&s, &mu, &nu, 1e3, mode).unwrap();
            assert!((res.value - r).abs() < 1e-2);
            assert!(res.entropic.unwrap().converged);
        }
    }

    #[test]
    fn df_divergence_rejects_foreign_coupling() {
        let s = triangle();
        let (mu, nu) = pair();
        let gamma = Coupling::product(&[1.0 / 3.0; 3], nu.weights());
        assert!(matches!(df_divergence(&s, &mu, &nu, &gamma), Err(Error::MarginalMismatch { .. })));
    }
}
