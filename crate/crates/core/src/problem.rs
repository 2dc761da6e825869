//! Multi-objective problem abstraction, objective normalization and the
//! anchor (individual minimum) solves.

use log::debug;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::solver::{solve_scalar, Bounds, ScalarEval, SolverConfig};

/// Objectives, constraints and the TRR-style penalty evaluated together at
/// one decision vector.
#[derive(Debug, Clone, PartialEq)]
pub struct Evaluation {
    pub objectives: Vec<f64>,
    /// `h(x) = 0`.
    pub equality: Vec<f64>,
    /// `g(x) <= 0`.
    pub inequality: Vec<f64>,
    /// Extra term added to every scalar subproblem objective.
    pub penalty: f64,
}

impl Evaluation {
    pub fn unconstrained(objectives: Vec<f64>) -> Self {
        Evaluation {
            objectives,
            equality: Vec::new(),
            inequality: Vec::new(),
            penalty: 0.0,
        }
    }

    /// Largest absolute constraint violation.
    pub fn max_violation(&self) -> f64 {
        let eq = self.equality.iter().fold(0.0f64, |m, h| m.max(h.abs()));
        self.inequality.iter().fold(eq, |m, g| m.max(*g))
    }

    pub fn is_feasible(&self, eps_con: f64) -> bool {
        self.max_violation() <= eps_con
    }

    /// Scalar subproblem value `value + penalty` carrying this evaluation's
    /// constraints at tolerance `eps_con`.
    pub fn scalar(&self, value: f64, eps_con: f64) -> ScalarEval {
        ScalarEval::new(value + self.penalty)
            .equalities(&self.equality, eps_con)
            .inequalities(&self.inequality, eps_con)
    }
}

/// A box-constrained multi-objective minimization problem with two or three
/// objectives.
pub trait MooProblem: Sync {
    fn dimension(&self) -> usize;
    fn n_objectives(&self) -> usize;
    fn lower_bounds(&self) -> &[f64];
    fn upper_bounds(&self) -> &[f64];
    fn evaluate(&self, x: &[f64]) -> Evaluation;

    fn bounds(&self) -> Bounds<'_> {
        Bounds {
            lower: self.lower_bounds(),
            upper: self.upper_bounds(),
        }
    }

    /// Starting point for the anchor solves; the box centre by default.
    fn default_start(&self) -> Vec<f64> {
        self.lower_bounds()
            .iter()
            .zip(self.upper_bounds())
            .map(|(lo, hi)| 0.5 * (lo + hi))
            .collect()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct NormalizationBounds {
    f_min: Vec<f64>,
    f_max: Vec<f64>,
}

impl NormalizationBounds {
    pub fn new(f_min: Vec<f64>, f_max: Vec<f64>) -> Result<Self> {
        if f_min.len() != f_max.len() {
            return Err(Error::Config("normalization bounds of different lengths".into()));
        }
        for (j, (lo, hi)) in f_min.iter().zip(&f_max).enumerate() {
            if !(hi > lo) || !lo.is_finite() || !hi.is_finite() {
                return Err(Error::DegenerateBounds {
                    objective: j,
                    min: *lo,
                    max: *hi,
                });
            }
        }
        Ok(NormalizationBounds { f_min, f_max })
    }

    pub fn f_min(&self) -> &[f64] {
        &self.f_min
    }

    pub fn f_max(&self) -> &[f64] {
        &self.f_max
    }

    pub fn len(&self) -> usize {
        self.f_min.len()
    }

    pub fn is_empty(&self) -> bool {
        self.f_min.is_empty()
    }

    pub fn normalize(&self, values: &[f64]) -> Vec<f64> {
        values
            .iter()
            .zip(self.f_min.iter().zip(&self.f_max))
            .map(|(f, (lo, hi))| (f - lo) / (hi - lo))
            .collect()
    }

    pub fn denormalize(&self, s: &[f64]) -> Vec<f64> {
        s.iter()
            .zip(self.f_min.iter().zip(&self.f_max))
            .map(|(s, (lo, hi))| lo + s * (hi - lo))
            .collect()
    }
}

/// `s_j = (f_j − f_min_j)/(f_max_j − f_min_j)`, not clamped.
pub fn normalize_objectives(values: &[f64], bounds: &NormalizationBounds) -> Result<Vec<f64>> {
    if values.len() != bounds.len() {
        return Err(Error::Config(format!(
            "objective vector has {} entries, bounds have {}",
            values.len(),
            bounds.len()
        )));
    }
    Ok(bounds.normalize(values))
}

#[derive(Debug, Clone, PartialEq)]
pub struct Anchor {
    pub decision: Vec<f64>,
    pub objectives: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Anchors {
    pub points: Vec<Anchor>,
    pub bounds: NormalizationBounds,
}

impl Anchors {
    /// Normalized objective vectors of the anchors, one per row.
    pub fn normalized(&self) -> Vec<Vec<f64>> {
        self.points.iter().map(|a| self.bounds.normalize(&a.objectives)).collect()
    }

    /// Anchors whose own objective exceeds the best value seen in `objectives`
    /// by more than a relative `tol`.
    pub fn violations<'a>(&self, objectives: impl IntoIterator<Item = &'a [f64]>, tol: f64) -> usize {
        let m = self.points.len();
        let mut best: Vec<f64> = (0..m).map(|j| self.points[j].objectives[j]).collect();
        for f in objectives {
            for j in 0..m {
                best[j] = best[j].min(f[j]);
            }
        }
        (0..m)
            .filter(|&j| {
                let own = self.points[j].objectives[j];
                let scale = self.bounds.f_max()[j] - self.bounds.f_min()[j];
                own - best[j] > tol * scale
            })
            .count()
    }
}

/// Lexicographic individual minima. Phase one minimizes `f_j`; phase two
/// minimizes the scaled sum of the others while holding `f_j` at its
/// minimum, which removes weakly dominated anchors. Bounds take `f_min` from
/// the anchors' own objectives and `f_max` as the largest anchor value.
pub fn anchor_solutions(problem: &dyn MooProblem, cfg: &SolverConfig) -> Result<Anchors> {
    let m = problem.n_objectives();
    let start = problem.default_start();
    let f0 = problem.evaluate(&start).objectives;
    let scale: Vec<f64> = f0.iter().map(|v| v.abs().max(1.0)).collect();

    let points = (0..m)
        .into_par_iter()
        .map(|j| solve_anchor(problem, j, &start, &scale, cfg))
        .collect::<Result<Vec<_>>>()?;

    let f_min: Vec<f64> = (0..m).map(|j| points[j].objectives[j]).collect();
    let f_max: Vec<f64> = (0..m)
        .map(|j| points.iter().map(|p| p.objectives[j]).fold(f64::NEG_INFINITY, f64::max))
        .collect();
    let bounds = NormalizationBounds::new(f_min, f_max)?;
    Ok(Anchors { points, bounds })
}

fn solve_anchor(
    problem: &dyn MooProblem,
    j: usize,
    start: &[f64],
    scale: &[f64],
    cfg: &SolverConfig,
) -> Result<Anchor> {
    let eps = cfg.eps_con;
    let phase1 = solve_scalar(
        |x| {
            let e = problem.evaluate(x);
            e.scalar(e.objectives[j] / scale[j], eps)
        },
        problem.bounds(),
        &[start.to_vec()],
        cfg,
        0xA000 + j as u64,
    );
    if !phase1.converged {
        return Err(Error::AnchorNotConverged(j));
    }
    let best = problem.evaluate(&phase1.solution).objectives[j];
    let phase2 = solve_scalar(
        |x| {
            let e = problem.evaluate(x);
            let others: f64 = (0..e.objectives.len())
                .filter(|&k| k != j)
                .map(|k| e.objectives[k] / scale[k])
                .sum();
            e.scalar(others, eps)
                .inequalities(&[(e.objectives[j] - best) / scale[j]], eps)
        },
        problem.bounds(),
        &[phase1.solution.clone()],
        cfg,
        0xB000 + j as u64,
    );
    let decision = if phase2.converged {
        phase2.solution
    } else {
        debug!("anchor {j}: secondary solve did not converge, keeping the primary minimizer");
        phase1.solution
    };
    let objectives = problem.evaluate(&decision).objectives;
    Ok(Anchor { decision, objectives })
}

#[cfg(test)]
mod tests {
    use super::*;

    struct Separable;

    impl MooProblem for Separable {
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
            let d = |a: f64, b: f64| (x[0] - a).powi(2) + (x[1] - b).powi(2);
            Evaluation::unconstrained(vec![d(0.2, 0.2), d(0.8, 0.3), d(0.5, 0.9)])
        }
    }

    #[test]
    fn normalization_examples() {
        let b = NormalizationBounds::new(vec![1.0, -2.0, 0.0], vec![3.0, 2.0, 10.0]).unwrap();
        assert_eq!(normalize_objectives(&[1.0, -2.0, 0.0], &b).unwrap(), vec![0.0, 0.0, 0.0]);
        assert_eq!(normalize_objectives(&[3.0, 2.0, 10.0], &b).unwrap(), vec![1.0, 1.0, 1.0]);
        assert_eq!(normalize_objectives(&[2.0, 0.0, 5.0], &b).unwrap(), vec![0.5, 0.5, 0.5]);
        // not clamped
        assert_eq!(normalize_objectives(&[5.0, 2.0, 0.0], &b).unwrap()[0], 2.0);
    }

    #[test]
    fn degenerate_bounds_rejected() {
        assert!(matches!(
            NormalizationBounds::new(vec![0.0, 1.0], vec![1.0, 1.0]),
            Err(Error::DegenerateBounds { objective: 1, .. })
        ));
    }

    #[test]
    fn separable_anchors_hit_analytic_minima() {
        let a = anchor_solutions(&Separable, &SolverConfig::default()).unwrap();
        let want = [[0.2, 0.2], [0.8, 0.3], [0.5, 0.9]];
        for (p, w) in a.points.iter().zip(want) {
            assert!((p.decision[0] - w[0]).abs() < 1e-4, "{:?}", p.decision);
            assert!((p.decision[1] - w[1]).abs() < 1e-4, "{:?}", p.decision);
        }
        for (j, s) in a.normalized().iter().enumerate() {
            assert!(s[j].abs() < 1e-12);
        }
    }

    #[test]
    fn violations_counted_post_hoc() {
        let a = anchor_solutions(&Separable, &SolverConfig::default()).unwrap();
        let own: Vec<Vec<f64>> = a.points.iter().map(|p| p.objectives.clone()).collect();
        assert_eq!(a.violations(own.iter().map(|v| v.as_slice()), 1e-6), 0);
        let better = [vec![-1.0, 10.0, 10.0]];
        assert_eq!(a.violations(better.iter().map(|v| v.as_slice()), 1e-6), 1);
    }

    #[test]
    fn evaluation_violation() {
        let e = Evaluation {
            objectives: vec![0.0],
            equality: vec![-0.3],
            inequality: vec![0.1, -5.0],
            penalty: 0.0,
        };
        assert_eq!(e.max_violation(), 0.3);
        assert!(!e.is_feasible(1e-6));
    }

    mod props {
        use super::*;
        use proptest::prelude::*;

        proptest! {
            #[test]
            fn normalized_argmin_equals_raw_argmin(
                values in prop::collection::vec(-1e3f64..1e3, 2..30),
                lo in -10.0f64..0.0,
                width in 0.1f64..100.0,
            ) {
                let b = NormalizationBounds::new(vec![lo], vec![lo + width]).unwrap();
                let argmin = |v: &[f64]| v.iter().enumerate()
                    .fold((0, f64::INFINITY), |acc, (i, &x)| if x < acc.1 { (i, x) } else { acc }).0;
                let s: Vec<f64> = values.iter().map(|v| b.normalize(&[*v])[0]).collect();
                prop_assert_eq!(argmin(&values), argmin(&s));
            }

            #[test]
            fn normalize_roundtrip(f in prop::collection::vec(-50.0f64..50.0, 3)) {
                let b = NormalizationBounds::new(vec![-1.0, 0.0, 2.0], vec![1.0, 4.0, 3.0]).unwrap();
                let back = b.denormalize(&b.normalize(&f));
                for (x, y) in f.iter().zip(back) {
                    prop_assert!((x - y).abs() < 1e-9);
                }
            }
        }
    }
}
