//! Small analytic benchmark problems.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::problem::{Evaluation, MooProblem};

/// `min (x², (x − 1)²)` on `[0, 1]`; every feasible point is Pareto-optimal.
#[derive(Debug, Clone, Copy, Default)]
pub struct BiParabola;

impl MooProblem for BiParabola {
    fn dimension(&self) -> usize {
        1
    }
    fn n_objectives(&self) -> usize {
        2
    }
    fn lower_bounds(&self) -> &[f64] {
        &[0.0]
    }
    fn upper_bounds(&self) -> &[f64] {
        &[1.0]
    }
    fn evaluate(&self, x: &[f64]) -> Evaluation {
        Evaluation::unconstrained(vec![x[0] * x[0], (x[0] - 1.0).powi(2)])
    }
}

/// Squared distances from a point of the probability simplex to its three
/// vertices. The decision is the first two barycentric coordinates.
#[derive(Debug, Clone, Copy, Default)]
pub struct SimplexDistance;

impl SimplexDistance {
    pub fn point(x: &[f64]) -> [f64; 3] {
        [x[0], x[1], 1.0 - x[0] - x[1]]
    }
}

impl MooProblem for SimplexDistance {
    fn dimension(&self) -> usize {
        2
    }
    fn n_objectives(&self) -> usize {
        3
    }
    fn lower_bounds(&self) -> &[f64] {
        &[0.0, 0.0]
    }
    fn upper_bounds(&self) -> &[f64] {
        &[1.0, 1.0]
    }
    fn default_start(&self) -> Vec<f64> {
        vec![1.0 / 3.0, 1.0 / 3.0]
    }
    fn evaluate(&self, x: &[f64]) -> Evaluation {
        let p = Self::point(x);
        let f = (0..3)
            .map(|j| {
                p.iter()
                    .enumerate()
                    .map(|(k, v)| (v - if k == j { 1.0 } else { 0.0 }).powi(2))
                    .sum()
            })
            .collect();
        Evaluation {
            objectives: f,
            equality: Vec::new(),
            inequality: vec![x[0] + x[1] - 1.0],
            penalty: 0.0,
        }
    }
}

/// Three convex anisotropic quadratics on `[0, 1]²` with seeded centres and
/// curvatures.
#[derive(Debug, Clone)]
pub struct QuadraticToy {
    centres: [[f64; 2]; 3],
    curvature: [[f64; 2]; 3],
}

impl QuadraticToy {
    pub fn new(seed: u64) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut centres = [[0.0; 2]; 3];
        let mut curvature = [[0.0; 2]; 3];
        for j in 0..3 {
            for k in 0..2 {
                centres[j][k] = rng.random_range(0.1..0.9);
                curvature[j][k] = rng.random_range(0.5..2.0);
            }
        }
        QuadraticToy { centres, curvature }
    }

    pub fn centres(&self) -> &[[f64; 2]; 3] {
        &self.centres
    }
}

impl MooProblem for QuadraticToy {
    fn dimension(&self) -> usize {
        2
    }
    fn n_objectives(&self) -> usize {
        3
    }
    fn lower_bounds(&self) -> &[f64] {
        &[0.0, 0.0]
    }
    fn upper_bounds(&self) -> &[f64] {
        &[1.0, 1.0]
    }
    fn evaluate(&self, x: &[f64]) -> Evaluation {
        let f = (0..3)
            .map(|j| (0..2).map(|k| self.curvature[j][k] * (x[k] - self.centres[j][k]).powi(2)).sum())
            .collect();
        Evaluation::unconstrained(f)
    }
}
