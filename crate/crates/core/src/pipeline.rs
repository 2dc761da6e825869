//! End-to-end runs of INBI and the two baselines.
//!
//! * INBI: NBI → AWS → AUAM → Mahalanobis compromise.
//! * ALG1: NBI → AUAM → Mahalanobis compromise.
//! * ALG2: NBI → Euclidean compromise over the whole frontier.

use std::fmt;
use std::str::FromStr;
use std::time::{Duration, Instant};

use serde::{Deserialize, Serialize};

use crate::auam::{auam_select, AuamConfig, AuamOutput};
use crate::aws::{aws_stage, plane_omegas, AwsConfig, AwsOutput};
use crate::compromise::{mahalanobis_compromise, CompromiseConfig};
use crate::error::{Error, Result};
use crate::frontier::{spacing_cv, FrontierSet, ParetoPoint};
use crate::nbi::{euclidean_compromise, nbi_frontier, NbiConfig, NbiOutput};
use crate::problem::{anchor_solutions, Anchors, MooProblem};
use crate::solver::SolverConfig;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum AlgorithmId {
    Inbi,
    Alg1,
    Alg2,
}

impl AlgorithmId {
    pub const ALL: [AlgorithmId; 3] = [AlgorithmId::Inbi, AlgorithmId::Alg1, AlgorithmId::Alg2];

    pub fn name(self) -> &'static str {
        match self {
            AlgorithmId::Inbi => "inbi",
            AlgorithmId::Alg1 => "alg1",
            AlgorithmId::Alg2 => "alg2",
        }
    }
}

impl fmt::Display for AlgorithmId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for AlgorithmId {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "inbi" => Ok(AlgorithmId::Inbi),
            "alg1" => Ok(AlgorithmId::Alg1),
            "alg2" => Ok(AlgorithmId::Alg2),
            other => Err(Error::Config(format!("unknown algorithm {other:?}"))),
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct PipelineConfig {
    pub solver: SolverConfig,
    pub nbi: NbiConfig,
    pub aws: AwsConfig,
    pub auam: AuamConfig,
    pub compromise: CompromiseConfig,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunMetrics {
    pub nbi_points: usize,
    pub frontier_points: usize,
    pub selected_points: usize,
    /// Nearest-neighbour spacing CV of the raw NBI frontier (normalized).
    pub nbi_cv: Option<f64>,
    /// Nearest-neighbour spacing CV of the selected set (normalized).
    pub selected_cv: Option<f64>,
    pub skipped_subproblems: usize,
    pub rejected_lifts: usize,
    pub infeasible_aws_subproblems: usize,
    /// Anchors beaten on their own objective by some frontier point.
    pub anchor_violations: usize,
    pub runtime: Duration,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunResult {
    pub algorithm: AlgorithmId,
    pub anchors: Anchors,
    pub nbi: FrontierSet,
    /// Final frontier (NBI plus lifted points for INBI).
    pub frontier: FrontierSet,
    pub aws: Option<AwsOutput>,
    /// `None` for ALG2, or when the anchor plane was degenerate and the
    /// whole frontier went to the compromise stage.
    pub auam: Option<AuamOutput>,
    /// Indices into `frontier`.
    pub selected: Vec<usize>,
    /// Closeness of each selected point, aligned with `selected`.
    pub th: Vec<f64>,
    /// Index into `frontier`.
    pub compromise: usize,
    pub metrics: RunMetrics,
}

impl RunResult {
    pub fn compromise_point(&self) -> &ParetoPoint {
        &self.frontier.points[self.compromise]
    }

    pub fn selected_points(&self) -> impl Iterator<Item = &ParetoPoint> {
        self.selected.iter().map(|&i| &self.frontier.points[i])
    }

    /// Equality of everything except wall-clock runtime.
    pub fn same_outcome(&self, other: &RunResult) -> bool {
        let mut a = self.clone();
        a.metrics.runtime = other.metrics.runtime;
        &a == other
    }
}

/// Stage outputs shared between the three algorithms.
#[derive(Debug, Clone, PartialEq)]
pub struct Generated {
    pub anchors: Anchors,
    pub nbi: NbiOutput,
    pub aws: Option<AwsOutput>,
    pub nbi_time: Duration,
    pub aws_time: Duration,
}

/// Anchors, NBI and optionally AWS.
pub fn generate(problem: &dyn MooProblem, cfg: &PipelineConfig, with_aws: bool) -> Result<Generated> {
    let t0 = Instant::now();
    let anchors = anchor_solutions(problem, &cfg.solver).map_err(|e| e.in_stage("anchors"))?;
    let nbi = nbi_frontier(problem, &anchors, &cfg.nbi, &cfg.solver).map_err(|e| e.in_stage("nbi"))?;
    let nbi_time = t0.elapsed();
    let t1 = Instant::now();
    let aws = if with_aws {
        Some(aws_stage(problem, &nbi.frontier, &cfg.aws, &cfg.solver).map_err(|e| e.in_stage("aws"))?)
    } else {
        None
    };
    Ok(Generated {
        anchors,
        nbi,
        aws,
        nbi_time,
        aws_time: t1.elapsed(),
    })
}

fn as_triple(v: &[f64]) -> Result<[f64; 3]> {
    v.try_into()
        .map_err(|_| Error::Config(format!("AUAM needs three objectives, got {}", v.len())))
}

/// Selection and compromise for one algorithm on already generated stages.
pub fn finish(generated: &Generated, algorithm: AlgorithmId, cfg: &PipelineConfig) -> Result<RunResult> {
    let t0 = Instant::now();
    let m = generated.anchors.points.len();
    let nbi = &generated.nbi.frontier;
    let (frontier, aws, mut runtime) = match algorithm {
        AlgorithmId::Inbi => {
            let aws = generated
                .aws
                .clone()
                .ok_or_else(|| Error::Config("INBI needs the AWS stage".into()))?;
            (aws.frontier.clone(), Some(aws), generated.nbi_time + generated.aws_time)
        }
        _ => (nbi.clone(), None, generated.nbi_time),
    };

    let (selected, auam, th, compromise) = match algorithm {
        AlgorithmId::Alg2 => {
            let (chosen, th) = euclidean_compromise(&frontier.objectives(), &cfg.compromise.weights)
                .map_err(|e| e.in_stage("compromise"))?;
            ((0..frontier.len()).collect::<Vec<_>>(), None, th, chosen)
        }
        AlgorithmId::Inbi | AlgorithmId::Alg1 => {
            let omegas: Vec<usize> = match &aws {
                Some(a) => a.plane_omegas.iter().map(|p| p.1).collect(),
                None => plane_omegas(nbi, m, &cfg.aws)
                    .map_err(|e| e.in_stage("auam"))?
                    .into_iter()
                    .map(|p| p.1)
                    .collect(),
            };
            let anchors_n = generated.anchors.normalized();
            let anchors3 = [as_triple(&anchors_n[0])?, as_triple(&anchors_n[1])?, as_triple(&anchors_n[2])?];
            let cands = frontier
                .points
                .iter()
                .map(|p| as_triple(&p.normalized))
                .collect::<Result<Vec<_>>>()?;
            let out = match auam_select(&cands, &anchors3, &omegas, &cfg.auam) {
                Ok(out) => Some(out),
                Err(e @ (Error::Singular(_) | Error::EmptySelection { .. })) => {
                    log::warn!("auam: {e}; keeping the whole frontier");
                    None
                }
                Err(e) => return Err(e.in_stage("auam")),
            };
            let selected = match &out {
                Some(o) => o.selection.indices.clone(),
                None => (0..frontier.len()).collect(),
            };
            let (th, chosen) = if selected.len() == 1 {
                (vec![0.0], 0)
            } else {
                let objs: Vec<&[f64]> = selected.iter().map(|&i| frontier.points[i].objectives.as_slice()).collect();
                let r = mahalanobis_compromise(&objs, &cfg.compromise).map_err(|e| e.in_stage("compromise"))?;
                (r.th, r.chosen)
            };
            let compromise = selected[chosen];
            (selected, out, th, compromise)
        }
    };
    runtime += t0.elapsed();

    let sel_norm: Vec<&[f64]> = selected.iter().map(|&i| frontier.points[i].normalized.as_slice()).collect();
    let metrics = RunMetrics {
        nbi_points: nbi.len(),
        frontier_points: frontier.len(),
        selected_points: selected.len(),
        nbi_cv: spacing_cv(&nbi.normalized()),
        selected_cv: spacing_cv(&sel_norm),
        skipped_subproblems: generated.nbi.skipped,
        rejected_lifts: aws.as_ref().map_or(0, |a| a.rejected_lifts),
        infeasible_aws_subproblems: aws.as_ref().map_or(0, |a| a.infeasible_subproblems),
        anchor_violations: generated.anchors.violations(frontier.objectives(), 1e-6),
        runtime,
    };
    Ok(RunResult {
        algorithm,
        anchors: generated.anchors.clone(),
        nbi: nbi.clone(),
        frontier,
        aws,
        auam,
        selected,
        th,
        compromise,
        metrics,
    })
}

pub fn run(problem: &dyn MooProblem, algorithm: AlgorithmId, cfg: &PipelineConfig) -> Result<RunResult> {
    let generated = generate(problem, cfg, algorithm == AlgorithmId::Inbi)?;
    finish(&generated, algorithm, cfg)
}

/// INBI, ALG1 and ALG2 on one problem, sharing the anchor and NBI stages.
pub fn run_all(problem: &dyn MooProblem, cfg: &PipelineConfig) -> Result<Vec<RunResult>> {
    let generated = generate(problem, cfg, true)?;
    AlgorithmId::ALL.iter().map(|&a| finish(&generated, a, cfg)).collect()
}
