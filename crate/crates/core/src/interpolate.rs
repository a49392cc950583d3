//! Coupling-induced interpolation.
//!
//! Any coupling `gamma` of `mu` and `nu` induces the path
//! `mu_t = (pi_t)_# gamma` with `pi_t(x, y) = (1 - t) x + t y`. The optimistic
//! DF coupling gives the decision-focused interpolant; the reduced-space
//! construction instead runs a quadratic McCann geodesic between
//! `alpha = (-w*)_# mu` and `nu` and lifts each time slice back to `mu`.

use alloc::vec::Vec;

use crate::dfdist::{self, lift_coupling, OptimisticMethod};
use crate::matrix::Matrix;
use crate::measures::{merge_atoms, pushforward, DiscreteMeasure};
use crate::polytope::FeasibleRegion;
use crate::transport::{check_same_dim, solve_exact, CostMatrix, Coupling, Direction};
use crate::vecops::{dist_sq, lerp};
use crate::{Error, Result};

/// Atoms closer than this are merged in interpolant slices.
pub const MERGE_TOLERANCE: f64 = 1e-12;

/// Plan entries at or below this are treated as empty.
pub const MASS_THRESHOLD: f64 = 1e-15;

/// Slack allowed in the one-sided bound.
pub const BOUND_TOLERANCE: f64 = 1e-7;

fn check_time(t: f64) -> Result<()> {
    if !(0.0..=1.0).contains(&t) {
        return Err(Error::TimeOutOfRange(t));
    }
    Ok(())
}

fn check_coupling(gamma: &Coupling, mu: &DiscreteMeasure, nu: &DiscreteMeasure) -> Result<()> {
    check_same_dim(mu, nu)?;
    if gamma.rows() != mu.len() || gamma.cols() != nu.len() {
        return Err(Error::ShapeMismatch {
            rows: gamma.rows(),
            cols: gamma.cols(),
            expected_rows: mu.len(),
            expected_cols: nu.len(),
        });
    }
    Ok(())
}

/// `(pi_t)_# gamma` with coincident atoms merged.
pub fn interpolant(gamma: &Coupling, mu: &DiscreteMeasure, nu: &DiscreteMeasure, t: f64) -> Result<DiscreteMeasure> {
    check_time(t)?;
    check_coupling(gamma, mu, nu)?;
    let mut points = Vec::new();
    let mut weights = Vec::new();
    for (i, j, mass) in gamma.entries(MASS_THRESHOLD) {
        points.push(lerp(mu.point(i), nu.point(j), t));
        weights.push(mass);
    }
    if points.is_empty() {
        return Err(Error::Empty("coupling support"));
    }
    let (points, weights) = merge_atoms(&points, &weights, MERGE_TOLERANCE);
    DiscreteMeasure::new(points, weights)
}

/// Interpolant slices of one coupling on a time grid.
#[derive(Clone, Debug, PartialEq)]
pub struct InterpolantPath {
    pub coupling: Coupling,
    pub times: Vec<f64>,
    pub measures: Vec<DiscreteMeasure>,
}

impl InterpolantPath {
    pub fn new(coupling: Coupling, mu: &DiscreteMeasure, nu: &DiscreteMeasure, times: &[f64]) -> Result<Self> {
        let measures = times
            .iter()
            .map(|&t| interpolant(&coupling, mu, nu, t))
            .collect::<Result<_>>()?;
        Ok(Self {
            coupling,
            times: times.to_vec(),
            measures,
        })
    }
}

/// Quantile coupling of two measures on the real line. Coincides with the
/// quadratic OT plan.
pub fn monotone_coupling_1d(mu: &DiscreteMeasure, nu: &DiscreteMeasure) -> Result<Coupling> {
    check_same_dim(mu, nu)?;
    if mu.dim() != 1 {
        return Err(Error::DimensionMismatch {
            expected: 1,
            found: mu.dim(),
        });
    }
    let sorted = |m: &DiscreteMeasure| {
        let mut idx: Vec<usize> = (0..m.len()).collect();
        idx.sort_by(|&i, &j| m.point(i)[0].total_cmp(&m.point(j)[0]).then(i.cmp(&j)));
        idx
    };
    let (ri, ci) = (sorted(mu), sorted(nu));
    let mut plan = Matrix::zeros(mu.len(), nu.len());
    let (mut p, mut q) = (0, 0);
    let mut left_a = mu.weight(ri[0]);
    let mut left_b = nu.weight(ci[0]);
    loop {
        let mass = left_a.min(left_b);
        plan[(ri[p], ci[q])] += mass;
        left_a -= mass;
        left_b -= mass;
        // Advance the exhausted side; the last row and column absorb rounding.
        if left_a <= left_b && p + 1 < ri.len() {
            p += 1;
            left_a = mu.weight(ri[p]);
        } else if q + 1 < ci.len() {
            q += 1;
            left_b = nu.weight(ci[q]);
        } else if p + 1 < ri.len() {
            p += 1;
            left_a = mu.weight(ri[p]);
        } else {
            break;
        }
    }
    Ok(Coupling::from_parts(plan, mu.weights().to_vec(), nu.weights().to_vec()))
}

/// Coupling used to form a decision-focused average.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum AverageMode {
    Optimistic,
    Robust,
    Independent,
    W2,
}

impl AverageMode {
    pub const ALL: [AverageMode; 4] = [
        AverageMode::Optimistic,
        AverageMode::Robust,
        AverageMode::Independent,
        AverageMode::W2,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            AverageMode::Optimistic => "optimistic",
            AverageMode::Robust => "robust",
            AverageMode::Independent => "independent",
            AverageMode::W2 => "w2",
        }
    }
}

/// The coupling behind [`df_average`].
pub fn average_coupling(
    region: &FeasibleRegion,
    mu: &DiscreteMeasure,
    nu: &DiscreteMeasure,
    mode: AverageMode,
) -> Result<Coupling> {
    match mode {
        AverageMode::Optimistic => Ok(dfdist::optimistic(region, mu, nu, OptimisticMethod::Direct)?.coupling),
        AverageMode::Robust => Ok(dfdist::robust(region, mu, nu)?.coupling),
        AverageMode::Independent => {
            check_same_dim(mu, nu)?;
            Ok(Coupling::product(mu.weights(), nu.weights()))
        }
        AverageMode::W2 => {
            let c = CostMatrix::power_distance(mu, nu, 2)?;
            Ok(solve_exact(mu.weights(), nu.weights(), &c, Direction::Minimize)?.plan)
        }
    }
}

/// Interpolant at `t = 1/2` under the requested coupling.
pub fn df_average(
    region: &FeasibleRegion,
    mu: &DiscreteMeasure,
    nu: &DiscreteMeasure,
    mode: AverageMode,
) -> Result<DiscreteMeasure> {
    let gamma = average_coupling(region, mu, nu, mode)?;
    interpolant(&gamma, mu, nu, 0.5)
}

/// One point of the check `W_DFO(mu, nu_t) <= t W_DFO(mu, nu)`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct BoundCheck {
    pub t: f64,
    pub lhs: f64,
    pub rhs: f64,
    pub pass: bool,
}

/// Evaluates the one-sided bound along the optimistic interpolant, every
/// slice by the direct LP.
pub fn one_sided_bound_check(
    region: &FeasibleRegion,
    mu: &DiscreteMeasure,
    nu: &DiscreteMeasure,
    t_grid: &[f64],
) -> Result<Vec<BoundCheck>> {
    for &t in t_grid {
        check_time(t)?;
    }
    let full = dfdist::optimistic(region, mu, nu, OptimisticMethod::Direct)?;
    let mut out = Vec::with_capacity(t_grid.len());
    for &t in t_grid {
        let nu_t = interpolant(&full.coupling, mu, nu, t)?;
        let lhs = dfdist::optimistic(region, mu, &nu_t, OptimisticMethod::Direct)?.value;
        let rhs = t * full.value;
        out.push(BoundCheck {
            t,
            lhs,
            rhs,
            pass: lhs <= rhs + BOUND_TOLERANCE,
        });
    }
    Ok(out)
}

/// Quadratic OT between `alpha = (-w*)_# mu` and `nu`, the base of the
/// reduced-space geodesic.
#[derive(Clone, Debug, PartialEq)]
pub struct ReducedGeodesic {
    region: FeasibleRegion,
    mu: DiscreteMeasure,
    alpha: DiscreteMeasure,
    nu: DiscreteMeasure,
    eta: Coupling,
    w2_sq: f64,
}

/// One time slice of a [`ReducedGeodesic`].
#[derive(Clone, Debug, PartialEq)]
pub struct ReducedSlice {
    pub t: f64,
    /// `(pi_t)_# eta*`, one atom per positive entry of `eta*`.
    pub nu_t: DiscreteMeasure,
    /// `(k, j)` entry of `eta*` behind each atom of `nu_t`.
    pub origins: Vec<(usize, usize)>,
    /// `(pi_0, pi_t)_# eta*` over `alpha x nu_t`.
    pub eta_t: Coupling,
    /// Lift of `eta_t` to `mu x nu_t`.
    pub lifted: Coupling,
}

impl ReducedGeodesic {
    pub fn new(region: &FeasibleRegion, mu: &DiscreteMeasure, nu: &DiscreteMeasure) -> Result<Self> {
        check_same_dim(mu, nu)?;
        let alpha = pushforward(region, mu, true)?.to_measure();
        let c = CostMatrix::from_fn(alpha.len(), nu.len(), |k, j| dist_sq(alpha.point(k), nu.point(j)))?;
        let res = solve_exact(alpha.weights(), nu.weights(), &c, Direction::Minimize)?;
        Ok(Self {
            region: region.clone(),
            mu: mu.clone(),
            alpha,
            nu: nu.clone(),
            eta: res.plan,
            w2_sq: res.value,
        })
    }

    /// `alpha`, with zero-mass atoms for empty regions.
    pub fn alpha(&self) -> &DiscreteMeasure {
        &self.alpha
    }

    pub fn eta(&self) -> &Coupling {
        &self.eta
    }

    /// `W_2^2(alpha, nu)`.
    pub fn w2_sq(&self) -> f64 {
        self.w2_sq
    }

    pub fn at(&self, t: f64) -> Result<ReducedSlice> {
        check_time(t)?;
        let mut points = Vec::new();
        let mut weights = Vec::new();
        let mut origins = Vec::new();
        for (k, j, mass) in self.eta.entries(MASS_THRESHOLD) {
            points.push(lerp(self.alpha.point(k), self.nu.point(j), t));
            weights.push(mass);
            origins.push((k, j));
        }
        let nu_t = DiscreteMeasure::new(points, weights.clone())?;
        let mut plan = Matrix::zeros(self.alpha.len(), weights.len());
        for (col, (&(k, _), &w)) in origins.iter().zip(&weights).enumerate() {
            plan[(k, col)] = w;
        }
        let eta_t = Coupling::from_parts(plan, self.alpha.weights().to_vec(), weights);
        let lifted = lift_coupling(&self.region, &self.mu, &eta_t)?;
        Ok(ReducedSlice {
            t,
            nu_t,
            origins,
            eta_t,
            lifted,
        })
    }
}

/// Reduced-space McCann slice at time `t`.
pub fn reduced_mccann(region: &FeasibleRegion, mu: &DiscreteMeasure, nu: &DiscreteMeasure, t: f64) -> Result<ReducedSlice> {
    check_time(t)?;
    ReducedGeodesic::new(region, mu, nu)?.at(t)
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
            vec![vec![-1.0, 1.0], vec![1.0, -1.0], vec![1.0, 1.0], vec![-2.0, -0.5]],
            vec![0.4, 0.3, 0.2, 0.1],
        )
        .unwrap();
        let nu = DiscreteMeasure::new(
            vec![vec![1.0, -2.0], vec![-0.5, 0.5], vec![2.0, 3.0]],
            vec![0.5, 0.25, 0.25],
        )
        .unwrap();
        (mu, nu)
    }

    #[test]
    fn endpoints_recover_marginals() {
        let (mu, nu) = pair();
        let gamma = Coupling::product(mu.weights(), nu.weights());
        let start = interpolant(&gamma, &mu, &nu, 0.0).unwrap();
        let end = interpolant(&gamma, &mu, &nu, 1.0).unwrap();
        assert_eq!(start.len(), mu.len());
        assert_eq!(end.len(), nu.len());
        for (p, w) in start.iter() {
            let i = mu.points().iter().position(|q| q.as_slice() == p).unwrap();
            assert!((w - mu.weight(i)).abs() < 1e-15);
        }
        for (p, w) in end.iter() {
            let j = nu.points().iter().position(|q| q.as_slice() == p).unwrap();
            assert!((w - nu.weight(j)).abs() < 1e-15);
        }
    }

    #[test]
    fn time_out_of_range() {
        let (mu, nu) = pair();
        let gamma = Coupling::product(mu.weights(), nu.weights());
        assert_eq!(interpolant(&gamma, &mu, &nu, 1.5).unwrap_err(), Error::TimeOutOfRange(1.5));
        assert!(interpolant(&gamma, &mu, &nu, -0.1).is_err());
        assert!(reduced_mccann(&triangle(), &mu, &nu, 2.0).is_err());
    }

    #[test]
    fn independent_average_of_singletons_is_midpoint() {
        let x = DiscreteMeasure::dirac(vec![-1.0, 3.0]).unwrap();
        let y = DiscreteMeasure::dirac(vec![2.0, 1.0]).unwrap();
        let avg = df_average(&triangle(), &x, &y, AverageMode::Independent).unwrap();
        assert_eq!(avg.points(), &[vec![0.5, 2.0]]);
        assert_eq!(avg.weights(), &[1.0]);
    }

    #[test]
    fn optimistic_average_of_identical_measures() {
        let (mu, _) = pair();
        let avg = df_average(&triangle(), &mu, &mu, AverageMode::Optimistic).unwrap();
        // The optimal plan may move mass within a region, but the average
        // must stay a zero-cost coupling's midpoint.
        assert!((avg.weights().iter().sum::<f64>() - 1.0).abs() < 1e-12);
        let w2 = df_average(&triangle(), &mu, &mu, AverageMode::W2).unwrap();
        assert_eq!(w2.len(), mu.len());
    }

    #[test]
    fn monotone_coupling_matches_exact_solver() {
        let mu = DiscreteMeasure::new(vec![vec![0.3], vec![-1.0], vec![2.0]], vec![0.2, 0.5, 0.3]).unwrap();
        let nu = DiscreteMeasure::new(vec![vec![1.0], vec![0.0], vec![-3.0], vec![0.5]], vec![0.1, 0.4, 0.25, 0.25])
            .unwrap();
        let mono = monotone_coupling_1d(&mu, &nu).unwrap();
        let c = CostMatrix::power_distance(&mu, &nu, 2).unwrap();
        let exact = solve_exact(mu.weights(), nu.weights(), &c, Direction::Minimize).unwrap();
        assert!((mono.cost(&c).unwrap() - exact.value).abs() < 1e-12);
        assert!(mono.marginal_error() < 1e-15);
    }

    #[test]
    fn one_sided_bound_endpoints() {
        let (mu, nu) = pair();
        let s = triangle();
        let checks = one_sided_bound_check(&s, &mu, &nu, &[0.0, 0.5, 1.0]).unwrap();
        assert!(checks[0].lhs.abs() < 1e-12 && checks[0].rhs == 0.0);
        assert!((checks[2].lhs - checks[2].rhs).abs() < 1e-9);
        assert!(checks.iter().all(|c| c.pass));
    }

    #[test]
    fn reduced_slices_are_consistent() {
        let (mu, nu) = pair();
        let s = triangle();
        let geo = ReducedGeodesic::new(&s, &mu, &nu).unwrap();
        let slice = geo.at(0.5).unwrap();
        let agg_err = {
            let mut agg = Matrix::zeros(s.len(), slice.nu_t.len());
            let map = pushforward(&s, &mu, true).unwrap();
            for (i, &k) in map.region_map().iter().enumerate() {
                for j in 0..slice.nu_t.len() {
                    agg[(k, j)] += slice.lifted.get(i, j);
                }
            }
            let mut e = 0.0f64;
            for k in 0..s.len() {
                for j in 0..slice.nu_t.len() {
                    e = e.max((agg[(k, j)] - slice.eta_t.get(k, j)).abs());
                }
            }
            e
        };
        assert!(agg_err < 1e-10);
        // Displacement identity.
        let mut disp = 0.0;
        for (col, &(k, _)) in slice.origins.iter().enumerate() {
            disp += slice.nu_t.weight(col) * dist_sq(slice.nu_t.point(col), geo.alpha().point(k));
        }
        assert!((disp - 0.25 * geo.w2_sq()).abs() < 1e-9);
    }
}
