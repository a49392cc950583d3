#![allow(dead_code)]

use dfot_core::{DiscreteMeasure, FeasibleRegion};
use rand::Rng;

pub struct Instance {
    pub region: FeasibleRegion,
    pub mu: DiscreteMeasure,
    pub nu: DiscreteMeasure,
}

pub fn random_point<R: Rng>(rng: &mut R, d: usize, shift: f64) -> Vec<f64> {
    (0..d).map(|_| rng.random_range(-1.0..1.0) + shift).collect()
}

pub fn random_weights<R: Rng>(rng: &mut R, n: usize) -> Vec<f64> {
    let raw: Vec<f64> = (0..n).map(|_| rng.random_range(0.05..1.0)).collect();
    let total: f64 = raw.iter().sum();
    raw.into_iter().map(|w| w / total).collect()
}

pub fn random_region<R: Rng>(rng: &mut R, d: usize, k: usize) -> FeasibleRegion {
    FeasibleRegion::new((0..k).map(|_| random_point(rng, d, 0.0)).collect()).unwrap()
}

pub fn random_measure<R: Rng>(rng: &mut R, d: usize, n: usize, shift: f64) -> DiscreteMeasure {
    let points = (0..n).map(|_| random_point(rng, d, shift)).collect();
    DiscreteMeasure::new(points, random_weights(rng, n)).unwrap()
}

/// d in {2,3,4}, 3..=8 extreme points, supports up to `max_support`.
pub fn random_instance<R: Rng>(rng: &mut R, max_support: usize) -> Instance {
    let d = rng.random_range(2..=4);
    let k = rng.random_range(3..=8);
    let n = rng.random_range(1..=max_support);
    let m = rng.random_range(1..=max_support);
    let shift = rng.random_range(-0.5..0.5);
    Instance {
        region: random_region(rng, d, k),
        mu: random_measure(rng, d, n, 0.0),
        nu: random_measure(rng, d, m, shift),
    }
}
