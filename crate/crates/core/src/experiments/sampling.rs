//! Two-sample estimation error of the DF distances.
//!
//! Every trial draws `n` atoms without replacement from each reference
//! measure, recomputes the distances on the renormalized subsamples and
//! records the absolute error against the full-reference values. Each
//! `(n, trial)` pair owns an independent ChaCha stream, so trials can run in
//! any order or in parallel with identical results.

use alloc::vec::Vec;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::dfdist::{self, OptimisticMethod, TargetSummary};
use crate::measures::DiscreteMeasure;
use crate::polytope::FeasibleRegion;
use crate::stats::{mean, quantile};
use crate::{Error, Result};

pub const DEFAULT_SEED: u64 = 42;

/// Distances on the full references.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ReferenceValues {
    pub optimistic: f64,
    pub robust: Option<f64>,
}

/// Absolute errors of one trial.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct TrialErrors {
    pub optimistic: f64,
    pub robust: Option<f64>,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ErrorSummary {
    pub mean: f64,
    pub q10: f64,
    pub q90: f64,
}

impl ErrorSummary {
    pub fn from_errors(errors: &[f64]) -> Result<Self> {
        Ok(Self {
            mean: mean(errors),
            q10: quantile(errors, 0.1)?,
            q90: quantile(errors, 0.9)?,
        })
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct SweepRow {
    pub n: usize,
    pub optimistic: ErrorSummary,
    pub robust: Option<ErrorSummary>,
}

/// Generator for trial `trial` at grid position `n_index`.
pub fn trial_rng(seed: u64, n_index: usize, trial: usize) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(((n_index as u64) << 32) | trial as u64);
    rng
}

/// First `n` entries of a partial Fisher-Yates shuffle of `0..len`.
pub fn subsample_indices<R: Rng + ?Sized>(rng: &mut R, len: usize, n: usize) -> Result<Vec<usize>> {
    if n > len {
        return Err(Error::SampleTooLarge {
            requested: n,
            available: len,
        });
    }
    let mut idx: Vec<usize> = (0..len).collect();
    for i in 0..n {
        let j = rng.random_range(i..len);
        idx.swap(i, j);
    }
    idx.truncate(n);
    Ok(idx)
}

/// Synthetic two-sample setting: a random polytope in `R^3` with six extreme
/// points and two uniform clouds of `size` atoms, the second shifted.
pub fn synthetic_references(seed: u64, size: usize) -> Result<(FeasibleRegion, DiscreteMeasure, DiscreteMeasure)> {
    if size == 0 {
        return Err(Error::Empty("reference size"));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut point = |lo: f64, hi: f64| -> Vec<f64> { (0..3).map(|_| rng.random_range(lo..hi)).collect() };
    let extreme_points = (0..6).map(|_| point(-1.0, 1.0)).collect();
    let mu_rows = (0..size).map(|_| point(-1.0, 1.0)).collect();
    let nu_rows = (0..size).map(|_| point(-0.6, 1.4)).collect();
    Ok((
        FeasibleRegion::new(extreme_points)?,
        DiscreteMeasure::from_samples(mu_rows)?,
        DiscreteMeasure::from_samples(nu_rows)?,
    ))
}

/// Optimistic (by reduction) and optionally robust distance between the
/// references.
pub fn reference_values(
    region: &FeasibleRegion,
    mu: &DiscreteMeasure,
    nu: &DiscreteMeasure,
    with_robust: bool,
) -> Result<ReferenceValues> {
    let optimistic = dfdist::optimistic(region, mu, nu, OptimisticMethod::Reduction)?.value;
    let robust = if with_robust {
        Some(dfdist::robust(region, mu, nu)?.value)
    } else {
        None
    };
    Ok(ReferenceValues { optimistic, robust })
}

/// One subsampling trial.
#[allow(clippy::too_many_arguments)]
pub fn run_trial(
    region: &FeasibleRegion,
    mu: &DiscreteMeasure,
    nu: &DiscreteMeasure,
    reference: &ReferenceValues,
    n: usize,
    seed: u64,
    n_index: usize,
    trial: usize,
) -> Result<TrialErrors> {
    let mut rng = trial_rng(seed, n_index, trial);
    let mu_n = mu.subset(&subsample_indices(&mut rng, mu.len(), n)?)?;
    let nu_n = nu.subset(&subsample_indices(&mut rng, nu.len(), n)?)?;
    let summary = TargetSummary::new(region, &nu_n)?;
    let optimistic = dfdist::optimistic_reduction(region, &mu_n, &nu_n, &summary)?.value;
    let robust = match reference.robust {
        Some(r) => Some((dfdist::robust(region, &mu_n, &nu_n)?.value - r).abs()),
        None => None,
    };
    Ok(TrialErrors {
        optimistic: (optimistic - reference.optimistic).abs(),
        robust,
    })
}

/// Aggregates the trials of one grid point.
pub fn summarize(n: usize, trials: &[TrialErrors]) -> Result<SweepRow> {
    let opt: Vec<f64> = trials.iter().map(|t| t.optimistic).collect();
    let rob: Option<Vec<f64>> = trials.iter().map(|t| t.robust).collect();
    Ok(SweepRow {
        n,
        optimistic: ErrorSummary::from_errors(&opt)?,
        robust: match rob {
            Some(r) if !r.is_empty() => Some(ErrorSummary::from_errors(&r)?),
            _ => None,
        },
    })
}

/// Sequential sweep over `n_grid`.
pub fn sample_error_sweep(
    region: &FeasibleRegion,
    mu: &DiscreteMeasure,
    nu: &DiscreteMeasure,
    n_grid: &[usize],
    trials: usize,
    seed: u64,
    with_robust: bool,
) -> Result<Vec<SweepRow>> {
    if trials == 0 {
        return Err(Error::InvalidParameter("trial count must be positive"));
    }
    let max_n = mu.len().min(nu.len());
    if let Some(&n) = n_grid.iter().find(|&&n| n > max_n || n == 0) {
        return Err(Error::SampleTooLarge {
            requested: n,
            available: max_n,
        });
    }
    let reference = reference_values(region, mu, nu, with_robust)?;
    n_grid
        .iter()
        .enumerate()
        .map(|(ni, &n)| {
            let errors = (0..trials)
                .map(|t| run_trial(region, mu, nu, &reference, n, seed, ni, t))
                .collect::<Result<Vec<_>>>()?;
            summarize(n, &errors)
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec;

    fn setup() -> (FeasibleRegion, DiscreteMeasure, DiscreteMeasure) {
        let region = FeasibleRegion::new(vec![vec![0.0, 0.0], vec![1.0, 0.0], vec![0.0, 1.0]]).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let mut draw = |shift: f64| {
            let rows = (0..12)
                .map(|_| vec![rng.random_range(-1.0..1.0) + shift, rng.random_range(-1.0..1.0)])
                .collect();
            DiscreteMeasure::from_samples(rows).unwrap()
        };
        let mu = draw(0.0);
        let nu = draw(0.3);
        (region, mu, nu)
    }

    #[test]
    fn subsample_is_a_partial_permutation() {
        let mut rng = trial_rng(1, 0, 0);
        let mut idx = subsample_indices(&mut rng, 10, 6).unwrap();
        idx.sort_unstable();
        idx.dedup();
        assert_eq!(idx.len(), 6);
        assert!(idx.iter().all(|&i| i < 10));
        assert!(subsample_indices(&mut rng, 3, 4).is_err());
    }

    #[test]
    fn full_size_has_zero_error() {
        let (region, mu, nu) = setup();
        let rows = sample_error_sweep(&region, &mu, &nu, &[12], 3, 5, true).unwrap();
        assert!(rows[0].optimistic.mean < 1e-9);
        assert!(rows[0].robust.unwrap().mean < 1e-9);
    }

    #[test]
    fn sweep_is_reproducible() {
        let (region, mu, nu) = setup();
        let a = sample_error_sweep(&region, &mu, &nu, &[3, 6], 4, 11, false).unwrap();
        let b = sample_error_sweep(&region, &mu, &nu, &[3, 6], 4, 11, false).unwrap();
        assert_eq!(a, b);
        assert!(sample_error_sweep(&region, &mu, &nu, &[13], 1, 0, false).is_err());
    }
}
