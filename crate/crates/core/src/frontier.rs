//! Pareto points, dominance filtering and frontier quality measures.

use crate::problem::NormalizationBounds;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Source {
    Nbi,
    AwsLifted,
}

impl Source {
    pub fn as_str(self) -> &'static str {
        match self {
            Source::Nbi => "nbi",
            Source::AwsLifted => "aws",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ParetoPoint {
    pub decision: Vec<f64>,
    pub objectives: Vec<f64>,
    pub normalized: Vec<f64>,
    pub source: Source,
}

#[derive(Debug, Clone, PartialEq)]
pub struct FrontierSet {
    pub points: Vec<ParetoPoint>,
    pub bounds: NormalizationBounds,
    /// Sample covariance of the normalized objectives.
    pub covariance: Vec<Vec<f64>>,
    /// Minimum pairwise normalized distance.
    pub d_set: f64,
}

impl FrontierSet {
    pub fn new(points: Vec<ParetoPoint>, bounds: NormalizationBounds) -> Self {
        let normalized: Vec<&[f64]> = points.iter().map(|p| p.normalized.as_slice()).collect();
        let covariance = sample_covariance(&normalized);
        let d_set = min_pairwise_distance(&normalized);
        FrontierSet {
            points,
            bounds,
            covariance,
            d_set,
        }
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn normalized(&self) -> Vec<&[f64]> {
        self.points.iter().map(|p| p.normalized.as_slice()).collect()
    }

    pub fn objectives(&self) -> Vec<&[f64]> {
        self.points.iter().map(|p| p.objectives.as_slice()).collect()
    }
}

/// `a` dominates `b` under minimization.
pub fn dominates(a: &[f64], b: &[f64]) -> bool {
    let mut strict = false;
    for (x, y) in a.iter().zip(b) {
        if x > y {
            return false;
        }
        if x < y {
            strict = true;
        }
    }
    strict
}

/// Indices of the non-dominated members, in input order.
pub fn non_dominated_indices(points: &[&[f64]]) -> Vec<usize> {
    (0..points.len())
        .filter(|&i| !points.iter().any(|q| dominates(q, points[i])))
        .collect()
}

pub fn is_mutually_non_dominated(points: &[&[f64]]) -> bool {
    non_dominated_indices(points).len() == points.len()
}

pub fn distance(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).powi(2)).sum::<f64>().sqrt()
}

pub fn min_pairwise_distance(points: &[&[f64]]) -> f64 {
    let mut best = f64::INFINITY;
    for i in 0..points.len() {
        for j in i + 1..points.len() {
            best = best.min(distance(points[i], points[j]));
        }
    }
    best
}

/// Coefficient of variation (population std over mean) of each point's
/// nearest-neighbour distance. `None` for fewer than two points or a zero mean.
pub fn spacing_cv(points: &[&[f64]]) -> Option<f64> {
    let n = points.len();
    if n < 2 {
        return None;
    }
    let nn: Vec<f64> = (0..n)
        .map(|i| {
            (0..n)
                .filter(|&j| j != i)
                .map(|j| distance(points[i], points[j]))
                .fold(f64::INFINITY, f64::min)
        })
        .collect();
    let mean = nn.iter().sum::<f64>() / n as f64;
    if mean <= 0.0 {
        return None;
    }
    let var = nn.iter().map(|d| (d - mean).powi(2)).sum::<f64>() / n as f64;
    Some(var.sqrt() / mean)
}

/// `max_{a ∈ from} min_{b ∈ to} |a − b|`.
pub fn directed_hausdorff(from: &[&[f64]], to: &[&[f64]]) -> f64 {
    from.iter()
        .map(|a| to.iter().map(|b| distance(a, b)).fold(f64::INFINITY, f64::min))
        .fold(0.0, f64::max)
}

pub fn hausdorff(a: &[&[f64]], b: &[&[f64]]) -> f64 {
    directed_hausdorff(a, b).max(directed_hausdorff(b, a))
}

/// Unbiased sample covariance; zeros for fewer than two rows.
pub fn sample_covariance(rows: &[&[f64]]) -> Vec<Vec<f64>> {
    let m = rows.first().map_or(0, |r| r.len());
    let n = rows.len();
    let mut cov = vec![vec![0.0; m]; m];
    if n < 2 {
        return cov;
    }
    let mean: Vec<f64> = (0..m).map(|k| rows.iter().map(|r| r[k]).sum::<f64>() / n as f64).collect();
    for a in 0..m {
        for b in a..m {
            let s: f64 = rows.iter().map(|r| (r[a] - mean[a]) * (r[b] - mean[b])).sum();
            cov[a][b] = s / (n - 1) as f64;
            cov[b][a] = cov[a][b];
        }
    }
    cov
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn dominance_basics() {
        assert!(dominates(&[0.0, 1.0], &[0.0, 2.0]));
        assert!(!dominates(&[0.0, 1.0], &[0.0, 1.0]));
        assert!(!dominates(&[0.0, 3.0], &[1.0, 2.0]));
    }

    #[test]
    fn filter_keeps_the_front() {
        let pts: Vec<Vec<f64>> = vec![vec![0.0, 1.0], vec![0.5, 0.5], vec![0.6, 0.6], vec![1.0, 0.0]];
        let refs: Vec<&[f64]> = pts.iter().map(|p| p.as_slice()).collect();
        assert_eq!(non_dominated_indices(&refs), vec![0, 1, 3]);
    }

    #[test]
    fn evenly_spaced_has_zero_cv() {
        let pts: Vec<Vec<f64>> = (0..5).map(|i| vec![i as f64, 0.0]).collect();
        let refs: Vec<&[f64]> = pts.iter().map(|p| p.as_slice()).collect();
        assert_eq!(spacing_cv(&refs), Some(0.0));
    }

    #[test]
    fn cv_by_hand() {
        // gaps 1 and 3: nearest distances 1, 1, 3 → mean 5/3
        let pts: Vec<Vec<f64>> = [0.0, 1.0, 4.0].iter().map(|&x| vec![x]).collect();
        let refs: Vec<&[f64]> = pts.iter().map(|p| p.as_slice()).collect();
        let mean = 5.0 / 3.0;
        let var = (2.0 * (1.0 - mean) * (1.0f64 - mean) + (3.0 - mean) * (3.0f64 - mean)) / 3.0;
        assert!((spacing_cv(&refs).unwrap() - var.sqrt() / mean).abs() < 1e-12);
    }

    #[test]
    fn hausdorff_by_hand() {
        let a: Vec<Vec<f64>> = vec![vec![0.0, 0.0], vec![1.0, 0.0]];
        let b: Vec<Vec<f64>> = vec![vec![0.0, 0.0]];
        let ra: Vec<&[f64]> = a.iter().map(|p| p.as_slice()).collect();
        let rb: Vec<&[f64]> = b.iter().map(|p| p.as_slice()).collect();
        assert_eq!(directed_hausdorff(&rb, &ra), 0.0);
        assert_eq!(directed_hausdorff(&ra, &rb), 1.0);
        assert_eq!(hausdorff(&ra, &rb), 1.0);
    }

    proptest! {
        #[test]
        fn filtered_set_is_mutually_non_dominated(
            pts in prop::collection::vec(prop::collection::vec(0.0f64..1.0, 3), 1..40)
        ) {
            let refs: Vec<&[f64]> = pts.iter().map(|p| p.as_slice()).collect();
            let keep = non_dominated_indices(&refs);
            prop_assert!(!keep.is_empty());
            let kept: Vec<&[f64]> = keep.iter().map(|&i| refs[i]).collect();
            prop_assert!(is_mutually_non_dominated(&kept));
            // every dropped point is dominated by a kept one
            for i in 0..refs.len() {
                if !keep.contains(&i) {
                    prop_assert!(kept.iter().any(|k| dominates(k, refs[i])));
                }
            }
        }

        #[test]
        fn covariance_is_symmetric_psd(
            pts in prop::collection::vec(prop::collection::vec(-1.0f64..1.0, 3), 2..30),
            probe in prop::collection::vec(-1.0f64..1.0, 3),
        ) {
            let refs: Vec<&[f64]> = pts.iter().map(|p| p.as_slice()).collect();
            let c = sample_covariance(&refs);
            for a in 0..3 {
                for b in 0..3 {
                    prop_assert_eq!(c[a][b], c[b][a]);
                }
            }
            let q: f64 = (0..3).map(|a| (0..3).map(|b| probe[a] * c[a][b] * probe[b]).sum::<f64>()).sum();
            prop_assert!(q >= -1e-12);
        }
    }
}
