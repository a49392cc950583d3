//! Discrete probability measures and oracle push-forwards.

use alloc::vec;
use alloc::vec::Vec;

use crate::polytope::FeasibleRegion;
use crate::vecops::{dist, max_pairwise_distance, norm_sq};
use crate::{Error, Result};

/// Allowed deviation of the total weight from one.
pub const WEIGHT_SUM_TOLERANCE: f64 = 1e-9;

/// Weighted point cloud `sum_i a_i delta_{x_i}` in `R^d`.
///
/// Duplicate points are kept as separate atoms.
#[derive(Clone, Debug, PartialEq)]
pub struct DiscreteMeasure {
    points: Vec<Vec<f64>>,
    weights: Vec<f64>,
    dim: usize,
}

impl DiscreteMeasure {
    pub fn new(points: Vec<Vec<f64>>, weights: Vec<f64>) -> Result<Self> {
        let dim = match points.first() {
            Some(p) => p.len(),
            None => return Err(Error::Empty("measure support")),
        };
        if points.len() != weights.len() {
            return Err(Error::LengthMismatch {
                left: points.len(),
                right: weights.len(),
            });
        }
        for p in &points {
            if p.len() != dim {
                return Err(Error::DimensionMismatch {
                    expected: dim,
                    found: p.len(),
                });
            }
            if p.iter().any(|v| !v.is_finite()) {
                return Err(Error::NonFinite("measure support"));
            }
        }
        check_probability_vector(&weights)?;
        Ok(Self {
            points,
            weights,
            dim,
        })
    }

    /// Empirical measure with weight `1/n` on every row.
    pub fn from_samples(rows: Vec<Vec<f64>>) -> Result<Self> {
        if rows.is_empty() {
            return Err(Error::Empty("sample rows"));
        }
        let w = 1.0 / rows.len() as f64;
        let weights = vec![w; rows.len()];
        Self::new(rows, weights)
    }

    pub fn dirac(point: Vec<f64>) -> Result<Self> {
        Self::new(vec![point], vec![1.0])
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn points(&self) -> &[Vec<f64>] {
        &self.points
    }

    pub fn point(&self, i: usize) -> &[f64] {
        &self.points[i]
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn weight(&self, i: usize) -> f64 {
        self.weights[i]
    }

    pub fn iter(&self) -> impl Iterator<Item = (&[f64], f64)> + '_ {
        self.points
            .iter()
            .map(Vec::as_slice)
            .zip(self.weights.iter().copied())
    }

    pub fn into_parts(self) -> (Vec<Vec<f64>>, Vec<f64>) {
        (self.points, self.weights)
    }

    /// `sum_j b_j ||y_j||^2`.
    pub fn second_moment(&self) -> f64 {
        self.iter().map(|(p, w)| w * norm_sq(p)).sum()
    }

    /// `sum_j b_j ||y_j||`.
    pub fn first_moment_norm(&self) -> f64 {
        self.iter().map(|(p, w)| w * libm::sqrt(norm_sq(p))).sum()
    }

    /// Largest distance between two support points.
    pub fn support_diameter(&self) -> f64 {
        max_pairwise_distance(&self.points)
    }

    pub fn mean(&self) -> Vec<f64> {
        let mut m = vec![0.0; self.dim];
        for (p, w) in self.iter() {
            for (acc, v) in m.iter_mut().zip(p) {
                *acc += w * v;
            }
        }
        m
    }

    /// `(self + other) / 2` with concatenated supports and halved weights.
    pub fn midpoint_mixture(&self, other: &DiscreteMeasure) -> Result<DiscreteMeasure> {
        if self.dim != other.dim {
            return Err(Error::DimensionMismatch {
                expected: self.dim,
                found: other.dim,
            });
        }
        let points = self.points.iter().chain(&other.points).cloned().collect();
        let weights = self
            .weights
            .iter()
            .chain(&other.weights)
            .map(|w| 0.5 * w)
            .collect();
        DiscreteMeasure::new(points, weights)
    }

    /// Same law with atoms closer than `tol` merged (weights summed, first
    /// position kept) and zero-weight atoms dropped.
    pub fn merged(&self, tol: f64) -> DiscreteMeasure {
        let (points, weights) = merge_atoms(&self.points, &self.weights, tol);
        DiscreteMeasure {
            points,
            weights,
            dim: self.dim,
        }
    }

    /// Restriction to the given atom indices, renormalized.
    pub fn subset(&self, indices: &[usize]) -> Result<DiscreteMeasure> {
        let points: Vec<Vec<f64>> = indices.iter().map(|&i| self.points[i].clone()).collect();
        let total: f64 = indices.iter().map(|&i| self.weights[i]).sum();
        if total <= 0.0 {
            return Err(Error::InvalidWeights("subset carries no mass"));
        }
        let weights = indices.iter().map(|&i| self.weights[i] / total).collect();
        DiscreteMeasure::new(points, weights)
    }

    pub(crate) fn from_parts_unchecked(points: Vec<Vec<f64>>, weights: Vec<f64>, dim: usize) -> Self {
        Self {
            points,
            weights,
            dim,
        }
    }
}

pub(crate) fn check_probability_vector(w: &[f64]) -> Result<()> {
    if w.is_empty() {
        return Err(Error::Empty("weights"));
    }
    if w.iter().any(|v| !v.is_finite()) {
        return Err(Error::NonFinite("weights"));
    }
    if w.iter().any(|&v| v < 0.0) {
        return Err(Error::InvalidWeights("negative weight"));
    }
    let total: f64 = w.iter().sum();
    if (total - 1.0).abs() > WEIGHT_SUM_TOLERANCE {
        return Err(Error::InvalidWeights("weights do not sum to one"));
    }
    Ok(())
}

/// Merge atoms whose positions are within `tol` of each other.
///
/// Atoms are bucketed by their first coordinate so the scan only compares
/// candidates inside a `tol`-wide band. Output order follows the first
/// occurrence of each merged group.
pub(crate) fn merge_atoms(points: &[Vec<f64>], weights: &[f64], tol: f64) -> (Vec<Vec<f64>>, Vec<f64>) {
    let n = points.len();
    let mut order: Vec<usize> = (0..n).filter(|&i| weights[i] > 0.0).collect();
    order.sort_by(|&i, &j| {
        let (a, b) = (points[i][0], points[j][0]);
        a.partial_cmp(&b).unwrap_or(core::cmp::Ordering::Equal).then(i.cmp(&j))
    });
    // representative[i] = index of the atom that absorbs atom i.
    let mut representative: Vec<usize> = (0..n).collect();
    for (pos, &i) in order.iter().enumerate() {
        if representative[i] != i {
            continue;
        }
        for &j in &order[pos + 1..] {
            if points[j][0] - points[i][0] >= tol {
                break;
            }
            if representative[j] == j && dist(&points[i], &points[j]) < tol {
                representative[j] = i;
            }
        }
    }
    // Lowest original index in each group becomes the emitted position.
    let mut leader: Vec<usize> = (0..n).collect();
    for (i, &r) in representative.iter().enumerate() {
        if i < leader[r] {
            leader[r] = i;
        }
    }
    let mut slot = vec![usize::MAX; n];
    let mut out_points = Vec::new();
    let mut out_weights: Vec<f64> = Vec::new();
    for i in 0..n {
        if weights[i] <= 0.0 {
            continue;
        }
        let r = representative[i];
        if slot[r] == usize::MAX {
            slot[r] = out_points.len();
            out_points.push(points[leader[r]].clone());
            out_weights.push(0.0);
        }
        out_weights[slot[r]] += weights[i];
    }
    (out_points, out_weights)
}

/// Oracle push-forward `w*_# mu` (or `(-w*)_# mu` when negated), one atom per
/// extreme point.
#[derive(Clone, Debug, PartialEq)]
pub struct PushforwardMeasure {
    atoms: Vec<Vec<f64>>,
    masses: Vec<f64>,
    region_map: Vec<usize>,
    negated: bool,
}

impl PushforwardMeasure {
    /// Atom `k` is `w_k` (or `-w_k`).
    pub fn atoms(&self) -> &[Vec<f64>] {
        &self.atoms
    }

    /// `mu(D_k)` for every region, zeros included.
    pub fn masses(&self) -> &[f64] {
        &self.masses
    }

    /// Region index of every atom of the source measure.
    pub fn region_map(&self) -> &[usize] {
        &self.region_map
    }

    pub fn is_negated(&self) -> bool {
        self.negated
    }

    /// `||w*_# mu||^2 = sum_k mu(D_k) ||w_k||^2`.
    pub fn second_moment(&self) -> f64 {
        self.atoms
            .iter()
            .zip(&self.masses)
            .map(|(a, m)| m * norm_sq(a))
            .sum()
    }

    /// The push-forward as a measure on `R^d`, zero-mass atoms retained.
    pub fn to_measure(&self) -> DiscreteMeasure {
        let dim = self.atoms.first().map_or(0, Vec::len);
        DiscreteMeasure::from_parts_unchecked(self.atoms.clone(), self.masses.clone(), dim)
    }
}

pub fn pushforward(region: &FeasibleRegion, m: &DiscreteMeasure, negate: bool) -> Result<PushforwardMeasure> {
    let mut masses = vec![0.0; region.len()];
    let mut region_map = Vec::with_capacity(m.len());
    for (x, w) in m.iter() {
        let k = region.region_index(x)?;
        masses[k] += w;
        region_map.push(k);
    }
    let sign = if negate { -1.0 } else { 1.0 };
    let atoms = region
        .extreme_points()
        .iter()
        .map(|w| w.iter().map(|v| sign * v).collect())
        .collect();
    Ok(PushforwardMeasure {
        atoms,
        masses,
        region_map,
        negated: negate,
    })
}

/// `1/2 sum_i |p_i - q_i|` on a shared index set.
pub fn tv_distance(p: &[f64], q: &[f64]) -> Result<f64> {
    same_length(p, q)?;
    Ok(0.5 * p.iter().zip(q).map(|(a, b)| (a - b).abs()).sum::<f64>())
}

/// `sum_i p_i log(p_i / q_i)`; `+inf` when `p` is not absolutely continuous
/// with respect to `q`.
pub fn kl_divergence(p: &[f64], q: &[f64]) -> Result<f64> {
    same_length(p, q)?;
    let mut total = 0.0;
    for (&a, &b) in p.iter().zip(q) {
        if a <= 0.0 {
            continue;
        }
        if b <= 0.0 {
            return Ok(f64::INFINITY);
        }
        total += a * libm::log(a / b);
    }
    Ok(total)
}

fn same_length(p: &[f64], q: &[f64]) -> Result<()> {
    if p.len() != q.len() {
        return Err(Error::LengthMismatch {
            left: p.len(),
            right: q.len(),
        });
    }
    Ok(())
}
