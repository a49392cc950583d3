//! Small dense-vector helpers shared by the solvers.

pub fn dot(x: &[f64], y: &[f64]) -> f64 {
    debug_assert_eq!(x.len(), y.len());
    x.iter().zip(y).map(|(a, b)| a * b).sum()
}

pub fn norm_sq(x: &[f64]) -> f64 {
    dot(x, x)
}

pub fn norm(x: &[f64]) -> f64 {
    libm::sqrt(norm_sq(x))
}

pub fn dist_sq(x: &[f64], y: &[f64]) -> f64 {
    debug_assert_eq!(x.len(), y.len());
    x.iter().zip(y).map(|(a, b)| (a - b) * (a - b)).sum()
}

pub fn dist(x: &[f64], y: &[f64]) -> f64 {
    libm::sqrt(dist_sq(x, y))
}

/// `(1 - t) x + t y`.
pub fn lerp(x: &[f64], y: &[f64], t: f64) -> alloc::vec::Vec<f64> {
    x.iter().zip(y).map(|(a, b)| (1.0 - t) * a + t * b).collect()
}

/// Largest pairwise Euclidean distance, 0 for fewer than two points.
pub fn max_pairwise_distance<P: AsRef<[f64]>>(points: &[P]) -> f64 {
    let mut best = 0.0f64;
    for (i, p) in points.iter().enumerate() {
        for q in &points[i + 1..] {
            best = best.max(dist_sq(p.as_ref(), q.as_ref()));
        }
    }
    libm::sqrt(best)
}
