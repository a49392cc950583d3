//! Property checks on one instance `(region, mu, nu)`.
//!
//! Each check recomputes both sides of an identity or inequality that must
//! hold for every instance and reports the worst violation.

use dfot_core::dfdist::{self, Mode, OptimisticMethod, Symmetrization};
use dfot_core::interpolate::{one_sided_bound_check, ReducedGeodesic};
use dfot_core::measures::{pushforward, tv_distance};
use dfot_core::transport::{marginal_violation, solve_exact, w_p, MARGINAL_TOLERANCE};
use dfot_core::vecops::{dist_sq, norm};
use dfot_core::{CostMatrix, Direction, DiscreteMeasure, FeasibleRegion, Matrix};

use crate::AppError;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, clap::ValueEnum)]
pub enum CheckKind {
    Chain,
    Reduction,
    Lift,
    Duality,
    Rescaling,
    Bounds,
    Entropic,
    Interpolation,
    Mccann,
    Marginals,
}

impl CheckKind {
    pub const ALL: [CheckKind; 10] = [
        CheckKind::Chain,
        CheckKind::Reduction,
        CheckKind::Lift,
        CheckKind::Duality,
        CheckKind::Rescaling,
        CheckKind::Bounds,
        CheckKind::Entropic,
        CheckKind::Interpolation,
        CheckKind::Mccann,
        CheckKind::Marginals,
    ];

    pub fn name(self) -> &'static str {
        match self {
            CheckKind::Chain => "chain",
            CheckKind::Reduction => "reduction",
            CheckKind::Lift => "lift",
            CheckKind::Duality => "duality",
            CheckKind::Rescaling => "rescaling",
            CheckKind::Bounds => "bounds",
            CheckKind::Entropic => "entropic",
            CheckKind::Interpolation => "interpolation",
            CheckKind::Mccann => "mccann",
            CheckKind::Marginals => "marginals",
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct CheckOutcome {
    pub kind: CheckKind,
    /// `None` when the check does not apply (e.g. no plan given).
    pub passed: Option<bool>,
    pub detail: String,
}

impl CheckOutcome {
    fn new(kind: CheckKind, passed: bool, detail: String) -> Self {
        Self {
            kind,
            passed: Some(passed),
            detail,
        }
    }

    pub fn line(&self) -> String {
        let status = match self.passed {
            Some(true) => "PASS",
            Some(false) => "FAIL",
            None => "SKIP",
        };
        format!("{status} {}: {}", self.kind.name(), self.detail)
    }
}

pub struct Instance<'a> {
    pub region: &'a FeasibleRegion,
    pub mu: &'a DiscreteMeasure,
    pub nu: &'a DiscreteMeasure,
    /// Candidate coupling of `mu` and `nu` for the marginal check.
    pub plan: Option<&'a Matrix>,
}

pub fn run(inst: &Instance<'_>, kinds: &[CheckKind]) -> Result<Vec<CheckOutcome>, AppError> {
    kinds.iter().map(|&k| run_one(inst, k)).collect()
}

const TIMES: [f64; 5] = [0.0, 0.25, 0.5, 0.75, 1.0];

fn run_one(inst: &Instance<'_>, kind: CheckKind) -> Result<CheckOutcome, AppError> {
    let Instance { region, mu, nu, plan } = *inst;
    let outcome = match kind {
        CheckKind::Chain => {
            let o = dfdist::optimistic(region, mu, nu, OptimisticMethod::Direct)?.value;
            let r = dfdist::regret(region, mu, nu)?;
            let w = dfdist::robust(region, mu, nu)?.value;
            CheckOutcome::new(
                kind,
                0.0 <= o && o <= r + 1e-9 && r <= w + 1e-9,
                format!("optimistic {o} <= regret {r} <= robust {w}"),
            )
        }
        CheckKind::Reduction => {
            let d = dfdist::optimistic(region, mu, nu, OptimisticMethod::Direct)?.value;
            let r = dfdist::optimistic(region, mu, nu, OptimisticMethod::Reduction)?.value;
            let gap = (d - r).abs();
            CheckOutcome::new(kind, gap <= 1e-6, format!("|direct - reduction| = {gap:e}"))
        }
        CheckKind::Lift => {
            let d = dfdist::optimistic(region, mu, nu, OptimisticMethod::Direct)?.value;
            let r = dfdist::optimistic(region, mu, nu, OptimisticMethod::Reduction)?;
            let err = marginal_violation(r.coupling.plan(), mu.weights(), nu.weights())?;
            let attained = dfdist::df_divergence(region, mu, nu, &r.coupling)?;
            let gap = (attained - d).abs();
            CheckOutcome::new(
                kind,
                err <= MARGINAL_TOLERANCE && gap <= 1e-8,
                format!("marginal error {err:e}, value gap {gap:e}"),
            )
        }
        CheckKind::Duality => {
            let r = dfdist::optimistic(region, mu, nu, OptimisticMethod::Reduction)?;
            let f = &r.dual.as_ref().expect("reduction carries duals").f;
            let cert = dfdist::dual_certificate(region, mu, nu, f)?;
            let shifted: Vec<f64> = f.iter().map(|v| v + 1.0).collect();
            let shift = (dfdist::dual_certificate(region, mu, nu, &shifted)? - cert).abs();
            let gap = (r.value - cert).abs();
            CheckOutcome::new(
                kind,
                gap <= 1e-6 && shift <= 1e-12,
                format!("primal-dual gap {gap:e}, shift change {shift:e}"),
            )
        }
        CheckKind::Rescaling => {
            let factors: Vec<f64> = (0..mu.len()).map(|i| 0.25 + (i % 7) as f64 * 0.9).collect();
            let scaled = dfdist::rescaled(mu, &factors)?;
            let v = dfdist::optimistic(region, &scaled, mu, OptimisticMethod::Direct)?.value;
            CheckOutcome::new(kind, v <= 1e-9, format!("W_DFO(rescaled mu, mu) = {v:e}"))
        }
        CheckKind::Bounds => {
            let dw = region.diameter();
            let sym = dfdist::symmetric(region, mu, nu, Symmetrization::Additive, Mode::Optimistic)?;
            let w1 = w_p(mu, nu, 1)?;
            let o = dfdist::optimistic(region, mu, nu, OptimisticMethod::Reduction)?.value;
            let pm = pushforward(region, mu, false)?;
            let pn = pushforward(region, nu, false)?;
            let w2 = w_p(&pm.to_measure(), &pn.to_measure(), 2)?;
            let v = nu.second_moment().sqrt();
            let rob = dfdist::robust(region, mu, nu)?.value;
            let en: f64 = nu.iter().map(|(y, b)| b * norm(y)).sum();
            let tv = tv_distance(pm.masses(), pn.masses())?;
            let ok = sym <= dw * w1 + 1e-8 && o <= v * w2 + 1e-8 && rob <= dw * en + 1e-8 && w2 <= dw * tv.sqrt() + 1e-9;
            CheckOutcome::new(
                kind,
                ok,
                format!(
                    "sym {sym} <= {}, optimistic {o} <= {}, robust {rob} <= {}",
                    dw * w1,
                    v * w2,
                    dw * en
                ),
            )
        }
        CheckKind::Entropic => {
            let o = dfdist::optimistic(region, mu, nu, OptimisticMethod::Direct)?.value;
            let w = dfdist::robust(region, mu, nu)?.value;
            let r = dfdist::regret(region, mu, nu)?;
            let mut ok = true;
            let (mut po, mut pr) = (f64::NEG_INFINITY, f64::INFINITY);
            let mut unconverged = 0;
            for eps in [0.05, 0.1, 0.2, 0.5, 1.0, 2.0, 5.0, 10.0] {
                let eo = dfdist::entropic_df(region, mu, nu, eps, Mode::Optimistic)?;
                let er = dfdist::entropic_df(region, mu, nu, eps, Mode::Robust)?;
                if !(eo.entropic.is_some_and(|s| s.converged) && er.entropic.is_some_and(|s| s.converged)) {
                    unconverged += 1;
                    continue;
                }
                ok &= eo.value >= po - 1e-6 && er.value <= pr + 1e-6;
                ok &= o <= eo.value + 1e-6 && eo.value <= r + 1e-6 && r <= er.value + 1e-6 && er.value <= w + 1e-6;
                po = eo.value;
                pr = er.value;
            }
            CheckOutcome::new(
                kind,
                ok,
                format!("monotone and sandwiched on converged grid points ({unconverged} skipped)"),
            )
        }
        CheckKind::Interpolation => {
            let grid: Vec<f64> = (1..=9).map(|k| k as f64 / 10.0).collect();
            let checks = one_sided_bound_check(region, mu, nu, &grid)?;
            let worst = checks.iter().map(|c| c.lhs - c.rhs).fold(f64::NEG_INFINITY, f64::max);
            CheckOutcome::new(
                kind,
                checks.iter().all(|c| c.pass),
                format!("max W_DFO(mu, nu_t) - t W_DFO(mu, nu) = {worst:e}"),
            )
        }
        CheckKind::Mccann => mccann(region, mu, nu)?,
        CheckKind::Marginals => match plan {
            None => CheckOutcome {
                kind,
                passed: None,
                detail: "no plan given".into(),
            },
            Some(p) => {
                let err = marginal_violation(p, mu.weights(), nu.weights())?;
                CheckOutcome::new(kind, err <= MARGINAL_TOLERANCE, format!("max marginal error {err:e}"))
            }
        },
    };
    Ok(outcome)
}

fn mccann(region: &FeasibleRegion, mu: &DiscreteMeasure, nu: &DiscreteMeasure) -> Result<CheckOutcome, AppError> {
    let geo = ReducedGeodesic::new(region, mu, nu)?;
    let w = geo.w2_sq().sqrt();
    let slices = TIMES.iter().map(|&t| geo.at(t)).collect::<Result<Vec<_>, _>>()?;
    let mut speed = 0.0f64;
    for a in &slices {
        for b in &slices {
            let d = w_p(&a.nu_t, &b.nu_t, 2)?;
            speed = speed.max((d - (a.t - b.t).abs() * w).abs());
        }
    }
    let mut displacement = 0.0f64;
    let mut optimality = 0.0f64;
    for s in &slices {
        let disp: f64 = s
            .origins
            .iter()
            .enumerate()
            .map(|(col, &(k, _))| s.nu_t.weight(col) * dist_sq(s.nu_t.point(col), geo.alpha().point(k)))
            .sum();
        displacement = displacement.max((disp - s.t * s.t * geo.w2_sq()).abs());
        let alpha = geo.alpha();
        let c = CostMatrix::from_fn(alpha.len(), s.nu_t.len(), |k, j| dist_sq(alpha.point(k), s.nu_t.point(j)))?;
        let eta = solve_exact(alpha.weights(), s.nu_t.weights(), &c, Direction::Minimize)?;
        let lifted = dfdist::lift_coupling(region, mu, &eta.plan)?;
        let attained = dfdist::df_divergence(region, mu, &s.nu_t, &lifted)?;
        let best = dfdist::optimistic(region, mu, &s.nu_t, OptimisticMethod::Direct)?.value;
        optimality = optimality.max((attained - best).abs());
    }
    Ok(CheckOutcome::new(
        CheckKind::Mccann,
        speed <= 1e-6 && displacement <= 1e-6 && optimality <= 1e-6,
        format!("constant speed {speed:e}, displacement {displacement:e}, lift optimality {optimality:e}"),
    ))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures;
    use crate::io::{parse_measure, parse_polytope};

    #[test]
    fn bundled_fixtures_pass_every_check() {
        let region = parse_polytope(fixtures::POLYTOPE).unwrap();
        let mu = parse_measure(fixtures::MU).unwrap();
        let nu = parse_measure(fixtures::NU).unwrap();
        let inst = Instance {
            region: &region,
            mu: &mu,
            nu: &nu,
            plan: None,
        };
        for outcome in run(&inst, &CheckKind::ALL).unwrap() {
            assert_ne!(outcome.passed, Some(false), "{}", outcome.line());
        }
    }

    #[test]
    fn broken_plan_fails_marginals() {
        let region = parse_polytope(fixtures::POLYTOPE).unwrap();
        let mu = parse_measure(fixtures::MU).unwrap();
        let nu = parse_measure(fixtures::NU).unwrap();
        let plan = Matrix::from_fn(mu.len(), nu.len(), |_, _| 1.0 / (mu.len() * nu.len()) as f64);
        let inst = Instance {
            region: &region,
            mu: &mu,
            nu: &nu,
            plan: Some(&plan),
        };
        let out = run(&inst, &[CheckKind::Marginals]).unwrap();
        assert_eq!(out[0].passed, Some(false));
    }
}
