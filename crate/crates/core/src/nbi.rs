//! Normal-boundary intersection frontier generation and the Euclidean
//! double-base-point compromise used by the plain NBI baseline.

use log::warn;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::compromise::{evaluation_matrix, ideal_points, pick_compromise};
use crate::error::{Error, Result};
use crate::frontier::{distance, non_dominated_indices, FrontierSet, ParetoPoint, Source};
use crate::problem::{Anchors, MooProblem};
use crate::solver::{solve_scalar, SolverConfig};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct NbiConfig {
    /// Grid divisions per simplex axis.
    pub divisions: usize,
    /// Tolerance on the distance of a solution from its quasi-normal ray.
    pub ray_tol: f64,
    /// Solutions closer than this (normalized) to an earlier point are merged.
    pub merge_tol: f64,
}

impl Default for NbiConfig {
    fn default() -> Self {
        NbiConfig {
            divisions: 10,
            ray_tol: 1e-4,
            merge_tol: 1e-3,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct NbiOutput {
    pub frontier: FrontierSet,
    /// Grid subproblems attempted.
    pub solves: usize,
    /// Grid subproblems that did not converge.
    pub skipped: usize,
}

/// All barycentric weights with denominator `divisions` over `m` anchors, in
/// lexicographic order of the integer numerators.
pub fn simplex_weights(m: usize, divisions: usize) -> Vec<Vec<f64>> {
    fn rec(m: usize, left: usize, prefix: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if prefix.len() == m - 1 {
            prefix.push(left);
            out.push(prefix.clone());
            prefix.pop();
            return;
        }
        for k in 0..=left {
            prefix.push(k);
            rec(m, left - k, prefix, out);
            prefix.pop();
        }
    }
    let mut out = Vec::new();
    rec(m, divisions, &mut Vec::new(), &mut out);
    out.into_iter()
        .map(|ks| ks.into_iter().map(|k| k as f64 / divisions as f64).collect())
        .collect()
}

/// Quasi-normal `−Φ̂e/‖Φ̂e‖`, where the columns of Φ̂ are the normalized
/// anchors (`phi[j]` is anchor `j`).
pub fn quasi_normal(phi: &[Vec<f64>]) -> Result<Vec<f64>> {
    let m = phi.len();
    let sum: Vec<f64> = (0..m).map(|k| phi.iter().map(|a| a[k]).sum()).collect();
    let norm = sum.iter().map(|v| v * v).sum::<f64>().sqrt();
    if norm == 0.0 {
        return Err(Error::Singular("anchors coincide with the utopia point"));
    }
    Ok(sum.iter().map(|v| -v / norm).collect())
}

/// Travel `t` along `n̂` from `Φ̂w` to `s` and the residual perpendicular to
/// the ray.
pub fn ray_decomposition(s: &[f64], base: &[f64], normal: &[f64]) -> (f64, Vec<f64>) {
    let t: f64 = s.iter().zip(base).zip(normal).map(|((s, b), n)| (s - b) * n).sum();
    let r = s
        .iter()
        .zip(base)
        .zip(normal)
        .map(|((s, b), n)| s - b - t * n)
        .collect();
    (t, r)
}

pub fn nbi_frontier(
    problem: &dyn MooProblem,
    anchors: &Anchors,
    cfg: &NbiConfig,
    solver: &SolverConfig,
) -> Result<NbiOutput> {
    if cfg.divisions < 2 {
        return Err(Error::Config(format!("NBI divisions must be >= 2, got {}", cfg.divisions)));
    }
    let m = problem.n_objectives();
    let bounds = &anchors.bounds;
    let phi = anchors.normalized();
    let normal = quasi_normal(&phi)?;
    let weights = simplex_weights(m, cfg.divisions);
    let eps = solver.eps_con;

    let solved: Vec<Option<ParetoPoint>> = weights
        .par_iter()
        .enumerate()
        .map(|(idx, w)| {
            let base: Vec<f64> = (0..m).map(|k| (0..m).map(|j| phi[j][k] * w[j]).sum()).collect();
            let mut start = vec![0.0; problem.dimension()];
            for (j, a) in anchors.points.iter().enumerate() {
                for (s, x) in start.iter_mut().zip(&a.decision) {
                    *s += w[j] * x;
                }
            }
            problem.bounds().clamp(&mut start);
            let report = solve_scalar(
                |x| {
                    let e = problem.evaluate(x);
                    let s = bounds.normalize(&e.objectives);
                    let (t, r) = ray_decomposition(&s, &base, &normal);
                    e.scalar(-t, eps).equalities(&r, cfg.ray_tol)
                },
                problem.bounds(),
                &[start],
                solver,
                0x1000 + idx as u64,
            );
            if !report.converged {
                warn!("NBI subproblem {idx} (w = {w:?}) did not converge; skipped");
                return None;
            }
            let e = problem.evaluate(&report.solution);
            if !e.is_feasible(eps) {
                warn!("NBI subproblem {idx} violates the problem constraints; skipped");
                return None;
            }
            Some(ParetoPoint {
                normalized: bounds.normalize(&e.objectives),
                objectives: e.objectives,
                decision: report.solution,
                source: Source::Nbi,
            })
        })
        .collect();
    let skipped = solved.iter().filter(|p| p.is_none()).count();

    let anchor_points = anchors.points.iter().map(|a| ParetoPoint {
        decision: a.decision.clone(),
        objectives: a.objectives.clone(),
        normalized: bounds.normalize(&a.objectives),
        source: Source::Nbi,
    });
    let mut merged: Vec<ParetoPoint> = Vec::new();
    for p in anchor_points.chain(solved.into_iter().flatten()) {
        if merged.iter().all(|q| distance(&q.normalized, &p.normalized) > cfg.merge_tol) {
            merged.push(p);
        }
    }
    let refs: Vec<&[f64]> = merged.iter().map(|p| p.objectives.as_slice()).collect();
    let keep = non_dominated_indices(&refs);
    let points: Vec<ParetoPoint> = keep.into_iter().map(|i| merged[i].clone()).collect();
    if points.len() < 3 {
        return Err(Error::FrontierTooSmall(points.len()));
    }
    Ok(NbiOutput {
        frontier: FrontierSet::new(points, bounds.clone()),
        solves: weights.len(),
        skipped,
    })
}

/// Compromise by Euclidean distance to the two ideal points. Returns the
/// chosen index and the closeness of every point.
pub fn euclidean_compromise(frontier: &[&[f64]], weights: &[f64]) -> Result<(usize, Vec<f64>)> {
    let u = evaluation_matrix(frontier)?;
    let ideal = ideal_points(&u)?;
    let th = u
        .iter()
        .map(|row| {
            let mut dp = 0.0;
            let mut dn = 0.0;
            for j in 0..row.len() {
                let a = weights[j] * (row[j] - ideal.positive[j]);
                dp += a * a;
                let b = weights[j] * (row[j] - ideal.negative[j]);
                dn += b * b;
            }
            let (dp, dn) = (dp.max(0.0).sqrt(), dn.max(0.0).sqrt());
            if dp + dn == 0.0 {
                return Err(Error::DegenerateCloseness);
            }
            Ok(dp / (dp + dn))
        })
        .collect::<Result<Vec<f64>>>()?;
    let chosen = pick_compromise(&th).expect("non-empty");
    Ok((chosen, th))
}
