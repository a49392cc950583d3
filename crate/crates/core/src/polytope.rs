//! Feasible region, linear optimization oracle and SPO loss.
//!
//! The region is stored by its extreme points only. Every quantity here
//! (oracle, value function, SPO loss, region index) depends on the polytope
//! solely through that finite list.

use alloc::vec::Vec;
use core::ops::Deref;

use crate::vecops::{dot, max_pairwise_distance};
use crate::{Error, Result};

/// Absolute tolerance used when breaking ties between minimizing extreme points.
pub const TIE_TOLERANCE: f64 = 1e-9;

/// Two extreme points closer than this are rejected as duplicates.
pub const DISTINCT_TOLERANCE: f64 = 1e-12;

/// A realization of the random cost vector.
#[derive(Clone, Debug, PartialEq)]
pub struct CostVector(pub Vec<f64>);

impl Deref for CostVector {
    type Target = [f64];

    fn deref(&self) -> &[f64] {
        &self.0
    }
}

impl From<Vec<f64>> for CostVector {
    fn from(v: Vec<f64>) -> Self {
        Self(v)
    }
}

impl AsRef<[f64]> for CostVector {
    fn as_ref(&self) -> &[f64] {
        &self.0
    }
}

/// Compact polyhedron given by its extreme points.
#[derive(Clone, Debug, PartialEq)]
pub struct FeasibleRegion {
    extreme_points: Vec<Vec<f64>>,
    dim: usize,
    diameter: f64,
}

impl FeasibleRegion {
    pub fn new(extreme_points: Vec<Vec<f64>>) -> Result<Self> {
        let dim = match extreme_points.first() {
            Some(p) => p.len(),
            None => return Err(Error::Empty("extreme point list")),
        };
        if dim == 0 {
            return Err(Error::Empty("extreme point coordinates"));
        }
        for p in &extreme_points {
            if p.len() != dim {
                return Err(Error::DimensionMismatch {
                    expected: dim,
                    found: p.len(),
                });
            }
            if p.iter().any(|v| !v.is_finite()) {
                return Err(Error::NonFinite("extreme point"));
            }
        }
        for i in 0..extreme_points.len() {
            for j in i + 1..extreme_points.len() {
                if crate::vecops::dist(&extreme_points[i], &extreme_points[j]) <= DISTINCT_TOLERANCE {
                    return Err(Error::DuplicateExtremePoint(i, j));
                }
            }
        }
        let diameter = max_pairwise_distance(&extreme_points);
        Ok(Self {
            extreme_points,
            dim,
            diameter,
        })
    }

    /// Probability simplex `conv{e_1, ..., e_n}`.
    pub fn simplex(n: usize) -> Result<Self> {
        let points = (0..n)
            .map(|k| (0..n).map(|j| if j == k { 1.0 } else { 0.0 }).collect())
            .collect();
        Self::new(points)
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    /// Number of extreme points.
    pub fn len(&self) -> usize {
        self.extreme_points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.extreme_points.is_empty()
    }

    pub fn extreme_points(&self) -> &[Vec<f64>] {
        &self.extreme_points
    }

    pub fn extreme_point(&self, k: usize) -> &[f64] {
        &self.extreme_points[k]
    }

    /// Largest Euclidean distance between two extreme points.
    pub fn diameter(&self) -> f64 {
        self.diameter
    }

    pub fn check_dim(&self, x: &[f64]) -> Result<()> {
        if x.len() != self.dim {
            return Err(Error::DimensionMismatch {
                expected: self.dim,
                found: x.len(),
            });
        }
        Ok(())
    }

    /// `w_k^T x` for every extreme point.
    pub fn objectives(&self, x: &[f64]) -> Result<Vec<f64>> {
        self.check_dim(x)?;
        Ok(self.extreme_points.iter().map(|w| dot(w, x)).collect())
    }

    /// Minimizer of `w^T x` over the extreme points.
    ///
    /// Among extreme points whose objective is within [`TIE_TOLERANCE`] of the
    /// minimum, the lowest index wins.
    pub fn oracle(&self, x: &[f64]) -> Result<(usize, &[f64])> {
        let k = self.region_index(x)?;
        Ok((k, &self.extreme_points[k]))
    }

    /// Index of the oracle decision, i.e. the decision region containing `x`.
    pub fn region_index(&self, x: &[f64]) -> Result<usize> {
        self.check_dim(x)?;
        Ok(argmin_with_ties(self.extreme_points.iter().map(|w| dot(w, x))))
    }

    /// `z(x) = x^T w*(x)`.
    pub fn value(&self, x: &[f64]) -> Result<f64> {
        let (_, w) = self.oracle(x)?;
        Ok(dot(w, x))
    }

    /// `y^T w*(x) - y^T w*(y)`, clamped at zero.
    pub fn spo_loss(&self, x: &[f64], y: &[f64]) -> Result<f64> {
        let (_, wx) = self.oracle(x)?;
        let zy = self.value(y)?;
        Ok((dot(y, wx) - zy).max(0.0))
    }
}

pub(crate) fn argmin_with_ties(values: impl Iterator<Item = f64> + Clone) -> usize {
    let min = values.clone().fold(f64::INFINITY, f64::min);
    values
        .enumerate()
        .find(|(_, v)| *v <= min + TIE_TOLERANCE)
        .map_or(0, |(k, _)| k)
}
