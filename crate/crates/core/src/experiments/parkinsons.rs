//! Care-plan selection on longitudinal telemonitoring records.
//!
//! Records are grouped into day windows, each patient contributing the
//! record closest to the window center. Cost vectors are the negated min-max
//! normalized `(motor_UPDRS, total_UPDRS, age, PPE)`, so every coordinate
//! lies in `[-1, 0]`. The day-100 window is predicted from day 50 and a
//! coupling between days 50 and 150, then scored per patient by SPO loss.

use alloc::vec::Vec;

use crate::dfdist::{self, Mode, OptimisticMethod};
use crate::interpolate::{average_coupling, AverageMode};
use crate::measures::DiscreteMeasure;
use crate::polytope::FeasibleRegion;
use crate::stats::{mean, median};
use crate::transport::{solve_exact, w_p, CostMatrix, Coupling, Direction};
use crate::{Error, Result};

/// Extreme points of the care-plan region, hours per week on
/// (exercise, nursing, rest, speech).
pub const CARE_PLANS: [[f64; 4]; 5] = [
    [3.0, 3.0, 3.0, 1.0],
    [6.0, 2.0, 2.0, 0.0],
    [2.0, 6.0, 2.0, 0.0],
    [2.0, 2.0, 6.0, 0.0],
    [3.0, 3.0, 2.0, 2.0],
];

pub const WINDOW_CENTERS: [i64; 3] = [50, 100, 150];
pub const HALF_WIDTH: i64 = 5;
pub const EPSILON_GRID: [f64; 6] = [0.1, 0.2, 0.5, 1.0, 2.0, 5.0];

pub fn care_plan_region() -> FeasibleRegion {
    FeasibleRegion::new(CARE_PLANS.iter().map(|p| p.to_vec()).collect()).expect("care plans are distinct")
}

/// The fields of one telemonitoring row that the pipeline uses.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Record {
    pub subject: u32,
    pub age: f64,
    pub test_time: f64,
    pub motor_updrs: f64,
    pub total_updrs: f64,
    pub ppe: f64,
}

impl Record {
    /// `(motor_UPDRS, total_UPDRS, age, PPE)`.
    pub fn features(&self) -> [f64; 4] {
        [self.motor_updrs, self.total_updrs, self.age, self.ppe]
    }

    pub fn severity(&self) -> [f64; 2] {
        [self.motor_updrs, self.total_updrs]
    }
}

/// Per-feature range over the full record set.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct FeatureRanges {
    pub min: [f64; 4],
    pub max: [f64; 4],
}

impl FeatureRanges {
    pub fn from_records(records: &[Record]) -> Result<Self> {
        if records.is_empty() {
            return Err(Error::Empty("records"));
        }
        let mut min = [f64::INFINITY; 4];
        let mut max = [f64::NEG_INFINITY; 4];
        for r in records {
            for (k, v) in r.features().iter().enumerate() {
                if !v.is_finite() {
                    return Err(Error::NonFinite("record feature"));
                }
                min[k] = min[k].min(*v);
                max[k] = max[k].max(*v);
            }
        }
        Ok(Self { min, max })
    }

    /// `-(f - min) / (max - min)` per coordinate; constant features map to 0.
    pub fn cost_vector(&self, r: &Record) -> Vec<f64> {
        r.features()
            .iter()
            .enumerate()
            .map(|(k, v)| {
                let span = self.max[k] - self.min[k];
                if span > 0.0 {
                    -(v - self.min[k]) / span
                } else {
                    0.0
                }
            })
            .collect()
    }
}

/// One record per patient with rounded time in `[center - hw, center + hw]`.
#[derive(Clone, Debug, PartialEq)]
pub struct CohortWindow {
    pub center: i64,
    pub half_width: i64,
    /// Selected records, sorted by subject.
    pub records: Vec<Record>,
    pub cost_vectors: Vec<Vec<f64>>,
}

impl CohortWindow {
    pub fn build(records: &[Record], center: i64, half_width: i64, ranges: &FeatureRanges) -> Result<Self> {
        let mut chosen: Vec<Record> = Vec::new();
        for r in records {
            let day = libm::round(r.test_time) as i64;
            if day < center - half_width || day > center + half_width {
                continue;
            }
            let gap = libm::fabs(r.test_time - center as f64);
            match chosen.iter_mut().find(|c| c.subject == r.subject) {
                Some(c) => {
                    if gap < libm::fabs(c.test_time - center as f64) {
                        *c = *r;
                    }
                }
                None => chosen.push(*r),
            }
        }
        if chosen.is_empty() {
            return Err(Error::EmptyWindow(center));
        }
        chosen.sort_by_key(|r| r.subject);
        let cost_vectors = chosen.iter().map(|r| ranges.cost_vector(r)).collect();
        Ok(Self {
            center,
            half_width,
            records: chosen,
            cost_vectors,
        })
    }

    pub fn len(&self) -> usize {
        self.records.len()
    }

    pub fn is_empty(&self) -> bool {
        self.records.is_empty()
    }

    pub fn subjects(&self) -> Vec<u32> {
        self.records.iter().map(|r| r.subject).collect()
    }

    pub fn position(&self, subject: u32) -> Option<usize> {
        self.records.iter().position(|r| r.subject == subject)
    }

    /// Empirical measure of the cost vectors.
    pub fn cost_measure(&self) -> Result<DiscreteMeasure> {
        DiscreteMeasure::from_samples(self.cost_vectors.clone())
    }

    /// Empirical measure of `(motor_UPDRS, total_UPDRS)`.
    pub fn severity_measure(&self) -> Result<DiscreteMeasure> {
        DiscreteMeasure::from_samples(self.records.iter().map(|r| r.severity().to_vec()).collect())
    }
}

/// Day 50 versus day 150.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct DistanceReport {
    pub w1_severity: f64,
    pub w2_severity: f64,
    pub w_dfo: f64,
    pub regret: f64,
    pub w_dfr: f64,
}

/// Couplings scored in the tracked evaluation.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum TrackedCoupling {
    Optimistic,
    W2,
    Independent,
    Robust,
    W2Severity,
}

impl TrackedCoupling {
    pub const ALL: [TrackedCoupling; 5] = [
        TrackedCoupling::Optimistic,
        TrackedCoupling::W2,
        TrackedCoupling::Independent,
        TrackedCoupling::Robust,
        TrackedCoupling::W2Severity,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            TrackedCoupling::Optimistic => "optimistic",
            TrackedCoupling::W2 => "w2",
            TrackedCoupling::Independent => "independent",
            TrackedCoupling::Robust => "robust",
            TrackedCoupling::W2Severity => "w2_severity",
        }
    }
}

/// Per-patient SPO losses of the day-100 prediction.
#[derive(Clone, Debug, PartialEq)]
pub struct TrackedLosses {
    pub subjects: Vec<u32>,
    pub optimistic: Vec<f64>,
    pub robust: Vec<f64>,
    pub independent: Vec<f64>,
    pub w2: Vec<f64>,
    pub w2_severity: Vec<f64>,
}

impl TrackedLosses {
    pub fn losses(&self, kind: TrackedCoupling) -> &[f64] {
        match kind {
            TrackedCoupling::Optimistic => &self.optimistic,
            TrackedCoupling::W2 => &self.w2,
            TrackedCoupling::Independent => &self.independent,
            TrackedCoupling::Robust => &self.robust,
            TrackedCoupling::W2Severity => &self.w2_severity,
        }
    }

    pub fn mean(&self, kind: TrackedCoupling) -> f64 {
        mean(self.losses(kind))
    }
}

/// Tracked losses under entropic couplings at one `eps`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct EpsilonRow {
    pub epsilon: f64,
    pub e_dfo_tracked: f64,
    pub e_dfr_tracked: f64,
    pub e_dfo_value: f64,
    pub e_dfr_value: f64,
    pub converged: bool,
}

#[derive(Clone, Debug, PartialEq)]
pub struct ParkinsonsReport {
    pub windows: Vec<CohortWindow>,
    pub distances: DistanceReport,
    pub tracked: TrackedLosses,
    /// SPO loss of day 50 against the same patient's day 150, per patient
    /// present in both windows.
    pub true_transition: Vec<f64>,
    pub epsilon_rows: Vec<EpsilonRow>,
}

impl ParkinsonsReport {
    pub fn true_transition_mean(&self) -> f64 {
        mean(&self.true_transition)
    }

    pub fn true_transition_median(&self) -> f64 {
        median(&self.true_transition).unwrap_or(f64::NAN)
    }
}

/// `Y_hat(i) = Y_50(i)/2 + E_gamma[Y_150 | X_50 = Y_50(i)]/2`.
pub fn tracked_prediction(gamma: &Coupling, from: &DiscreteMeasure, to: &DiscreteMeasure, i: usize) -> Vec<f64> {
    let row_mass: f64 = (0..gamma.cols()).map(|j| gamma.get(i, j)).sum();
    let mut cond = alloc::vec![0.0; to.dim()];
    if row_mass > 0.0 {
        for j in 0..gamma.cols() {
            let w = gamma.get(i, j) / row_mass;
            for (c, y) in cond.iter_mut().zip(to.point(j)) {
                *c += w * y;
            }
        }
    }
    from.point(i).iter().zip(&cond).map(|(x, c)| 0.5 * x + 0.5 * c).collect()
}

/// Mean SPO loss over patients present in day 50 and day 100.
fn tracked_losses_for(
    region: &FeasibleRegion,
    gamma: &Coupling,
    w50: &CohortWindow,
    w100: &CohortWindow,
    mu: &DiscreteMeasure,
    nu: &DiscreteMeasure,
) -> Result<Vec<f64>> {
    let mut out = Vec::new();
    for (i, r) in w50.records.iter().enumerate() {
        if let Some(k) = w100.position(r.subject) {
            let pred = tracked_prediction(gamma, mu, nu, i);
            out.push(region.spo_loss(&pred, &w100.cost_vectors[k])?);
        }
    }
    Ok(out)
}

/// Runs the full pipeline on the raw records.
pub fn run_pipeline(records: &[Record], eps_grid: &[f64]) -> Result<ParkinsonsReport> {
    let ranges = FeatureRanges::from_records(records)?;
    let windows = WINDOW_CENTERS
        .iter()
        .map(|&c| CohortWindow::build(records, c, HALF_WIDTH, &ranges))
        .collect::<Result<Vec<_>>>()?;
    let (w50, w100, w150) = (&windows[0], &windows[1], &windows[2]);
    let region = care_plan_region();
    let mu = w50.cost_measure()?;
    let nu = w150.cost_measure()?;
    let sev_mu = w50.severity_measure()?;
    let sev_nu = w150.severity_measure()?;

    let opt = dfdist::optimistic(&region, &mu, &nu, OptimisticMethod::Direct)?;
    let rob = dfdist::robust(&region, &mu, &nu)?;
    let distances = DistanceReport {
        w1_severity: w_p(&sev_mu, &sev_nu, 1)?,
        w2_severity: w_p(&sev_mu, &sev_nu, 2)?,
        w_dfo: opt.value,
        regret: dfdist::regret(&region, &mu, &nu)?,
        w_dfr: rob.value,
    };

    let sev_plan = {
        let c = CostMatrix::power_distance(&sev_mu, &sev_nu, 2)?;
        solve_exact(sev_mu.weights(), sev_nu.weights(), &c, Direction::Minimize)?.plan
    };
    let score = |gamma: &Coupling| tracked_losses_for(&region, gamma, w50, w100, &mu, &nu);
    let tracked = TrackedLosses {
        subjects: w50
            .subjects()
            .into_iter()
            .filter(|s| w100.position(*s).is_some())
            .collect(),
        optimistic: score(&opt.coupling)?,
        robust: score(&rob.coupling)?,
        independent: score(&average_coupling(&region, &mu, &nu, AverageMode::Independent)?)?,
        w2: score(&average_coupling(&region, &mu, &nu, AverageMode::W2)?)?,
        w2_severity: score(&sev_plan)?,
    };

    let mut true_transition = Vec::new();
    for (i, r) in w50.records.iter().enumerate() {
        if let Some(k) = w150.position(r.subject) {
            true_transition.push(region.spo_loss(&w50.cost_vectors[i], &w150.cost_vectors[k])?);
        }
    }

    let epsilon_rows = eps_grid
        .iter()
        .map(|&eps| {
            let o = dfdist::entropic_df(&region, &mu, &nu, eps, Mode::Optimistic)?;
            let r = dfdist::entropic_df(&region, &mu, &nu, eps, Mode::Robust)?;
            let converged = o.entropic.is_some_and(|s| s.converged) && r.entropic.is_some_and(|s| s.converged);
            Ok(EpsilonRow {
                epsilon: eps,
                e_dfo_tracked: mean(&score(&o.coupling)?),
                e_dfr_tracked: mean(&score(&r.coupling)?),
                e_dfo_value: o.value,
                e_dfr_value: r.value,
                converged,
            })
        })
        .collect::<Result<Vec<_>>>()?;

    Ok(ParkinsonsReport {
        windows,
        distances,
        tracked,
        true_transition,
        epsilon_rows,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec;

    fn rec(subject: u32, t: f64, motor: f64) -> Record {
        Record {
            subject,
            age: 60.0 + subject as f64,
            test_time: t,
            motor_updrs: motor,
            total_updrs: motor * 1.3,
            ppe: 0.1 * subject as f64,
        }
    }

    #[test]
    fn window_keeps_closest_record_per_subject() {
        let records = vec![
            rec(1, 44.4, 10.0),
            rec(1, 47.0, 11.0),
            rec(1, 50.6, 12.0),
            rec(2, 55.4, 20.0),
            rec(2, 55.6, 21.0),
            rec(3, 44.6, 30.0),
        ];
        let ranges = FeatureRanges::from_records(&records).unwrap();
        let w = CohortWindow::build(&records, 50, 5, &ranges).unwrap();
        assert_eq!(w.subjects(), vec![1, 2, 3]);
        assert_eq!(w.records[0].test_time, 50.6);
        assert_eq!(w.records[1].test_time, 55.4);
        assert_eq!(w.records[2].test_time, 44.6);
        for c in &w.cost_vectors {
            assert!(c.iter().all(|v| (-1.0..=0.0).contains(v)));
        }
        assert_eq!(CohortWindow::build(&records, 200, 5, &ranges).unwrap_err(), Error::EmptyWindow(200));
    }

    #[test]
    fn normalization_uses_full_range() {
        let records = vec![rec(1, 50.0, 10.0), rec(2, 150.0, 30.0), rec(3, 300.0, 20.0)];
        let ranges = FeatureRanges::from_records(&records).unwrap();
        let c = ranges.cost_vector(&records[2]);
        assert!((c[0] + 0.5).abs() < 1e-15);
        assert_eq!(ranges.cost_vector(&records[0])[0], 0.0);
        assert_eq!(ranges.cost_vector(&records[1])[0], -1.0);
    }

    #[test]
    fn prediction_under_identity_is_the_point() {
        let mu = DiscreteMeasure::from_samples(vec![vec![-0.2, -0.4], vec![-0.6, -0.1]]).unwrap();
        let gamma = Coupling::identity(mu.weights());
        assert_eq!(tracked_prediction(&gamma, &mu, &mu, 1), vec![-0.6, -0.1]);
        let prod = Coupling::product(mu.weights(), mu.weights());
        let p = tracked_prediction(&prod, &mu, &mu, 0);
        assert!((p[0] + 0.3).abs() < 1e-15 && (p[1] + 0.325).abs() < 1e-15);
    }

    #[test]
    fn care_plan_region_shape() {
        let r = care_plan_region();
        assert_eq!((r.len(), r.dim()), (5, 4));
        for w in r.extreme_points() {
            assert_eq!(w.iter().sum::<f64>(), 10.0);
        }
    }
}
