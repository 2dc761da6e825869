//! Adaptive weighted-sum densification of sparse frontier stretches on the
//! coordinate planes, and lifting of the corrected points back to the full
//! objective space.

use std::collections::HashSet;

use log::{debug, warn};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::frontier::{distance, dominates, FrontierSet, ParetoPoint, Source};
use crate::problem::{MooProblem, NormalizationBounds};
use crate::solver::{solve_scalar, SolverConfig};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct AwsConfig {
    /// Lower bound applied to `d_set` before deriving `δ_q = 2·d_set`.
    pub d_set_floor: f64,
    /// Largest refinement count per segment (weight step 0.01).
    pub omega_cap: usize,
    /// Lifted points closer than this (normalized) to a frontier point are duplicates.
    pub duplicate_tol: f64,
    /// Detection/refinement passes over the growing frontier.
    pub max_rounds: usize,
}

impl Default for AwsConfig {
    fn default() -> Self {
        AwsConfig {
            d_set_floor: 0.05,
            omega_cap: 100,
            duplicate_tol: 1e-9,
            max_rounds: 3,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Plane {
    Xoy,
    Yoz,
    Zox,
}

impl Plane {
    pub const ALL: [Plane; 3] = [Plane::Xoy, Plane::Yoz, Plane::Zox];

    /// Objective indices `(a, b)` spanning the plane.
    pub fn axes(self) -> (usize, usize) {
        match self {
            Plane::Xoy => (0, 1),
            Plane::Yoz => (1, 2),
            Plane::Zox => (2, 0),
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Plane::Xoy => "xoy",
            Plane::Yoz => "yoz",
            Plane::Zox => "zox",
        }
    }

    /// Planes used for a problem with `m` objectives.
    pub fn for_objectives(m: usize) -> &'static [Plane] {
        if m == 2 {
            &Plane::ALL[..1]
        } else {
            &Plane::ALL
        }
    }
}

/// Sparse stretch between two neighbouring points of a plane projection.
#[derive(Debug, Clone, PartialEq)]
pub struct SparseSegment {
    pub plane: Plane,
    /// Endpoint with the smaller `F_a`.
    pub first: [f64; 2],
    pub second: [f64; 2],
    /// Frontier indices of the endpoints.
    pub first_idx: usize,
    pub second_idx: usize,
    pub length: f64,
    pub omega: usize,
}

pub fn delta_q(d_set: f64) -> f64 {
    2.0 * d_set
}

/// Isotropic split `δ_m = δ_n = δ_q/√2`.
pub fn delta_split(delta_q: f64) -> (f64, f64) {
    let d = delta_q / std::f64::consts::SQRT_2;
    (d, d)
}

/// `ceil(d/δ_q) − 1`, clamped to `[1, cap]`.
pub fn refinement_count(length: f64, delta_q: f64, cap: usize) -> usize {
    let w = (length / delta_q).ceil() as usize;
    w.saturating_sub(1).clamp(1, cap.max(1))
}

/// Non-dominated subset of the plane projection sorted by `F_a`, as
/// `(frontier index, point)`.
pub fn plane_front(points: &[&[f64]], plane: Plane) -> Vec<(usize, [f64; 2])> {
    let (a, b) = plane.axes();
    let proj: Vec<[f64; 2]> = points.iter().map(|p| [p[a], p[b]]).collect();
    let mut front: Vec<(usize, [f64; 2])> = Vec::new();
    for (i, p) in proj.iter().enumerate() {
        if proj.iter().any(|q| dominates(q, p)) {
            continue;
        }
        if front.iter().any(|(_, q)| q == p) {
            continue;
        }
        front.push((i, *p));
    }
    front.sort_by(|x, y| x.1[0].total_cmp(&y.1[0]).then(x.1[1].total_cmp(&y.1[1])).then(x.0.cmp(&y.0)));
    front
}

/// Neighbouring pairs of the plane front farther apart than `δ_q = 2·d_set`.
pub fn sparse_segments(points: &[&[f64]], plane: Plane, d_set: f64, omega_cap: usize) -> Result<Vec<SparseSegment>> {
    let front = plane_front(points, plane);
    if front.len() < 2 {
        return Err(Error::TooFewPoints {
            need: 2,
            got: front.len(),
        });
    }
    let dq = delta_q(d_set);
    Ok(front
        .windows(2)
        .filter_map(|w| {
            let (i, p) = w[0];
            let (j, q) = w[1];
            let length = distance(&p, &q);
            (length > dq).then(|| SparseSegment {
                plane,
                first: p,
                second: q,
                first_idx: i,
                second_idx: j,
                length,
                omega: refinement_count(length, dq, omega_cap),
            })
        })
        .collect())
}

#[derive(Debug, Clone, PartialEq)]
pub struct CorrectedPoint {
    pub lambda: f64,
    pub decision: Vec<f64>,
    /// Normalized `(F_a, F_b)` at the decision.
    pub plane_point: [f64; 2],
}

/// Weighted-sum solves `min λ·F̄_a + (1 − λ)·F̄_b` for `λ ∈ {0, 1/ω, …, 1}`
/// restricted to the gap by `F̄_a ≤ second_a − δ_m`, `F̄_b ≤ first_b − δ_n`.
/// Subproblems that do not converge are dropped.
#[allow(clippy::too_many_arguments)]
pub fn aws_refine(
    problem: &dyn MooProblem,
    segment: &SparseSegment,
    endpoints: (&[f64], &[f64]),
    bounds: &NormalizationBounds,
    delta_q: f64,
    solver: &SolverConfig,
    stream: u64,
) -> Vec<(f64, Option<CorrectedPoint>)> {
    let (a, b) = segment.plane.axes();
    let (dm, dn) = delta_split(delta_q);
    let cap_a = segment.second[0] - dm;
    let cap_b = segment.first[1] - dn;
    let eps = solver.eps_con;
    let starts = [endpoints.0.to_vec(), endpoints.1.to_vec()];
    (0..=segment.omega)
        .into_par_iter()
        .map(|k| {
            let lambda = k as f64 / segment.omega as f64;
            let report = solve_scalar(
                |x| {
                    let e = problem.evaluate(x);
                    let s = bounds.normalize(&e.objectives);
                    e.scalar(lambda * s[a] + (1.0 - lambda) * s[b], eps)
                        .inequalities(&[s[a] - cap_a, s[b] - cap_b], eps)
                },
                problem.bounds(),
                &starts,
                solver,
                stream.wrapping_mul(1024).wrapping_add(k as u64),
            );
            if !report.converged {
                return (lambda, None);
            }
            let s = bounds.normalize(&problem.evaluate(&report.solution).objectives);
            let point = CorrectedPoint {
                lambda,
                plane_point: [s[a], s[b]],
                decision: report.solution,
            };
            (lambda, Some(point))
        })
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum LiftRejection {
    /// Index of the first violated constraint (equalities first).
    Constraint(usize),
    Duplicate,
    Dominated,
    /// Accepting would remove existing frontier points.
    DominatesExisting,
}

impl LiftRejection {
    pub fn as_str(self) -> &'static str {
        match self {
            LiftRejection::Constraint(_) => "constraint",
            LiftRejection::Duplicate => "duplicate",
            LiftRejection::Dominated => "dominated",
            LiftRejection::DominatesExisting => "dominates_existing",
        }
    }
}

pub type LiftOutcome = std::result::Result<ParetoPoint, (LiftRejection, Vec<f64>)>;

/// Evaluates every objective at the corrected decision and accepts it iff
/// the problem constraints hold within `eps_con`, it is not a duplicate and
/// it is mutually non-dominated with `existing`.
pub fn lift_to_three(
    problem: &dyn MooProblem,
    decision: &[f64],
    existing: &[ParetoPoint],
    bounds: &NormalizationBounds,
    eps_con: f64,
    duplicate_tol: f64,
) -> LiftOutcome {
    let e = problem.evaluate(decision);
    let violated = e
        .equality
        .iter()
        .map(|h| h.abs())
        .chain(e.inequality.iter().copied())
        .position(|v| !(v <= eps_con));
    if let Some(i) = violated {
        return Err((LiftRejection::Constraint(i), e.objectives));
    }
    let s = bounds.normalize(&e.objectives);
    if existing.iter().any(|p| distance(&p.normalized, &s) <= duplicate_tol) {
        return Err((LiftRejection::Duplicate, e.objectives));
    }
    if existing.iter().any(|p| dominates(&p.objectives, &e.objectives)) {
        return Err((LiftRejection::Dominated, e.objectives));
    }
    if existing.iter().any(|p| dominates(&e.objectives, &p.objectives)) {
        return Err((LiftRejection::DominatesExisting, e.objectives));
    }
    Ok(ParetoPoint {
        decision: decision.to_vec(),
        objectives: e.objectives,
        normalized: s,
        source: Source::AwsLifted,
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct AwsReportRow {
    pub plane: Plane,
    /// Segment number within the plane, counted over all rounds.
    pub segment: usize,
    pub lambda: f64,
    pub accepted: bool,
    /// `None` when the subproblem did not converge.
    pub rejection: Option<LiftRejection>,
    pub objectives: Option<Vec<f64>>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct AwsOutput {
    pub frontier: FrontierSet,
    pub report: Vec<AwsReportRow>,
    pub delta_q: f64,
    /// Largest refinement count per plane, 1 for planes without segments.
    pub plane_omegas: Vec<(Plane, usize)>,
    pub segments: usize,
    pub infeasible_subproblems: usize,
    pub rejected_lifts: usize,
    /// Gaps wider than `δ_q` left after the last round, as `(plane, first, second)`
    /// frontier indices.
    pub residual_gaps: Vec<(Plane, usize, usize)>,
    /// Segments none of whose subproblems converged.
    pub exhausted_segments: HashSet<(Plane, usize, usize)>,
}

/// Like [`sparse_segments`], but a plane whose projection collapses to a
/// single non-dominated point simply has nothing to refine.
fn plane_segments(points: &[&[f64]], plane: Plane, d_set: f64, omega_cap: usize) -> Result<Vec<SparseSegment>> {
    match sparse_segments(points, plane, d_set, omega_cap) {
        Err(Error::TooFewPoints { got, .. }) => {
            debug!("plane {} projects to {got} non-dominated point(s)", plane.name());
            Ok(Vec::new())
        }
        other => other,
    }
}

/// Runs detection and refinement on every plane, repeating on the grown
/// frontier until no new sparse segment appears or `max_rounds` is reached.
/// `δ_q` is fixed from the input frontier. Existing points are never removed.
pub fn aws_stage(
    problem: &dyn MooProblem,
    frontier: &FrontierSet,
    cfg: &AwsConfig,
    solver: &SolverConfig,
) -> Result<AwsOutput> {
    let bounds = &frontier.bounds;
    let planes = Plane::for_objectives(problem.n_objectives());
    let dq = delta_q(frontier.d_set.max(cfg.d_set_floor));
    let mut points = frontier.points.clone();
    let mut report = Vec::new();
    let mut attempted: HashSet<(Plane, usize, usize)> = HashSet::new();
    let mut seg_count = vec![0usize; planes.len()];
    let mut plane_omega = vec![1usize; planes.len()];
    let (mut infeasible, mut rejected) = (0, 0);
    let mut exhausted = HashSet::new();

    for round in 0..cfg.max_rounds.max(1) {
        let mut work = Vec::new();
        for (pi, &plane) in planes.iter().enumerate() {
            let norm: Vec<&[f64]> = points.iter().map(|p| p.normalized.as_slice()).collect();
            for seg in plane_segments(&norm, plane, dq / 2.0, cfg.omega_cap)? {
                if attempted.insert((plane, seg.first_idx, seg.second_idx)) {
                    if round == 0 {
                        plane_omega[pi] = plane_omega[pi].max(seg.omega);
                    }
                    work.push((pi, seg_count[pi], seg));
                    seg_count[pi] += 1;
                }
            }
        }
        if work.is_empty() {
            break;
        }
        debug!("AWS round {round}: {} sparse segments", work.len());
        let solved: Vec<_> = work
            .par_iter()
            .map(|(pi, si, seg)| {
                let stream = 0x2000 + ((*pi as u64) << 40) + *si as u64;
                let ends = (
                    points[seg.first_idx].decision.as_slice(),
                    points[seg.second_idx].decision.as_slice(),
                );
                aws_refine(problem, seg, ends, bounds, dq, solver, stream)
            })
            .collect();
        for ((pi, si, seg), results) in work.iter().zip(solved) {
            if results.iter().all(|(_, c)| c.is_none()) {
                exhausted.insert((planes[*pi], seg.first_idx, seg.second_idx));
            }
            for (lambda, corrected) in results {
                let mut row = AwsReportRow {
                    plane: planes[*pi],
                    segment: *si,
                    lambda,
                    accepted: false,
                    rejection: None,
                    objectives: None,
                };
                match corrected {
                    None => infeasible += 1,
                    Some(c) => match lift_to_three(problem, &c.decision, &points, bounds, solver.eps_con, cfg.duplicate_tol) {
                        Ok(p) => {
                            row.accepted = true;
                            row.objectives = Some(p.objectives.clone());
                            points.push(p);
                        }
                        Err((why, f)) => {
                            rejected += 1;
                            row.rejection = Some(why);
                            row.objectives = Some(f);
                        }
                    },
                }
                report.push(row);
            }
        }
    }
    if infeasible > 0 {
        warn!("AWS: {infeasible} weighted-sum subproblems did not converge");
    }

    let norm: Vec<&[f64]> = points.iter().map(|p| p.normalized.as_slice()).collect();
    let mut residual = Vec::new();
    for &plane in planes {
        for seg in plane_segments(&norm, plane, dq / 2.0, cfg.omega_cap)? {
            residual.push((plane, seg.first_idx, seg.second_idx));
        }
    }
    Ok(AwsOutput {
        frontier: FrontierSet::new(points, bounds.clone()),
        report,
        delta_q: dq,
        plane_omegas: planes.iter().copied().zip(plane_omega).collect(),
        segments: seg_count.iter().sum(),
        infeasible_subproblems: infeasible,
        rejected_lifts: rejected,
        residual_gaps: residual,
        exhausted_segments: exhausted,
    })
}

/// Largest refinement count per plane from segment detection alone, as used
/// by pipelines that skip the refinement itself.
pub fn plane_omegas(frontier: &FrontierSet, m: usize, cfg: &AwsConfig) -> Result<Vec<(Plane, usize)>> {
    let d = frontier.d_set.max(cfg.d_set_floor);
    let norm = frontier.normalized();
    Plane::for_objectives(m)
        .iter()
        .map(|&plane| {
            let segs = plane_segments(&norm, plane, d, cfg.omega_cap)?;
            Ok((plane, segs.iter().map(|s| s.omega).max().unwrap_or(1)))
        })
        .collect()
}
