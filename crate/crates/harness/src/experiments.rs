//! Case runs, the three-algorithm comparison, the TRR deviation experiment
//! and the building-count sweep.

use std::fmt::Write as _;

use inbi_core::building::BuildingProblem;
use inbi_core::frontier::dominates;
use inbi_core::model::{BuildingScenario, DispatchDecision, SLOT_HOURS};
use inbi_core::trr::{trr_series, TrrSeries};
use inbi_core::pipeline::{finish, generate, run, run_all, AlgorithmId, PipelineConfig, RunResult};
use log::info;
use serde::Serialize;

use crate::cases::{builtin_cases, CaseConfig, Consideration};
use crate::config::HarnessConfig;
use crate::error::{HarnessError, Result};
use crate::synth::{synthesize_scenario, SynthesisSpec};

/// One (case, algorithm) line of the comparison table.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CaseRow {
    pub case: String,
    pub consideration: &'static str,
    pub algorithm: &'static str,
    pub w1: f64,
    pub w2: f64,
    pub w3: f64,
    /// Monthly equipment cost, ¥.
    pub equipment_cost: f64,
    /// Monthly grid supply cost, ¥.
    pub supply_cost: f64,
    /// Occupant comfort, %.
    pub comfort_pct: f64,
    pub frontier_points: usize,
    pub selected_points: usize,
}

pub fn case_problem(cfg: &HarnessConfig, consideration: Consideration) -> Result<BuildingProblem> {
    let base = synthesize_scenario(&cfg.synthesis)?;
    let scenario = consideration.apply(&base, &cfg.weather);
    let trr = if consideration.uses_trr() {
        cfg.trr.validate()?;
        Some(cfg.trr.clone())
    } else {
        None
    };
    Ok(BuildingProblem::new(scenario, trr))
}

pub fn case_pipeline(cfg: &HarnessConfig, case: &CaseConfig) -> PipelineConfig {
    let mut p = cfg.pipeline.clone();
    p.compromise.weights = case.weights.to_vec();
    p
}

/// Fails unless the run's compromise is non-dominated within its frontier.
pub fn check_compromise(run: &RunResult) -> Result<()> {
    let c = &run.compromise_point().objectives;
    match run.frontier.points.iter().position(|p| dominates(&p.objectives, c)) {
        Some(i) => Err(HarnessError::Check(format!(
            "{} compromise is dominated by frontier point {i}",
            run.algorithm
        ))),
        None => Ok(()),
    }
}

pub fn case_row(case: &CaseConfig, run: &RunResult) -> Result<CaseRow> {
    check_compromise(run)?;
    let o = &run.compromise_point().objectives;
    Ok(CaseRow {
        case: case.id.to_string(),
        consideration: case.consideration.name(),
        algorithm: run.algorithm.name(),
        w1: case.weights[0],
        w2: case.weights[1],
        w3: case.weights[2],
        equipment_cost: o[0],
        supply_cost: o[1],
        comfort_pct: (1.0 - o[2]) * 100.0,
        frontier_points: run.frontier.len(),
        selected_points: run.selected.len(),
    })
}

pub fn run_case(cfg: &HarnessConfig, case: &CaseConfig, algorithm: AlgorithmId) -> Result<(CaseRow, RunResult)> {
    let problem = case_problem(cfg, case.consideration)?;
    let result = run(&problem, algorithm, &case_pipeline(cfg, case))?;
    Ok((case_row(case, &result)?, result))
}

/// Every built-in case under every algorithm, rows in case then algorithm
/// order. Cases sharing a consideration share one frontier generation.
pub fn compare_all(cfg: &HarnessConfig) -> Result<Vec<CaseRow>> {
    let cases = builtin_cases();
    let mut rows: Vec<(usize, CaseRow)> = Vec::with_capacity(cases.len() * 3);
    for consideration in Consideration::ALL {
        let group: Vec<&CaseConfig> = cases.iter().filter(|c| c.consideration == consideration).collect();
        if group.is_empty() {
            continue;
        }
        info!("generating frontier for {consideration}");
        let problem = case_problem(cfg, consideration)?;
        let generated = generate(&problem, &cfg.pipeline, true)?;
        for case in group {
            let pipeline = case_pipeline(cfg, case);
            for (k, alg) in AlgorithmId::ALL.into_iter().enumerate() {
                let result = finish(&generated, alg, &pipeline)?;
                rows.push((case.id.index() * 3 + k, case_row(case, &result)?));
            }
        }
    }
    rows.sort_by_key(|r| r.0);
    Ok(rows.into_iter().map(|r| r.1).collect())
}

/// Fixed-width text table of case rows.
pub fn format_case_table(rows: &[CaseRow]) -> String {
    let mut out = String::new();
    let _ = writeln!(
        out,
        "{:<9} {:<19} {:<5} {:>16} {:>14} {:>14} {:>10}",
        "case", "consideration", "alg", "weights", "equipment ¥", "supply ¥", "comfort %"
    );
    for r in rows {
        let _ = writeln!(
            out,
            "{:<9} {:<19} {:<5} {:>16} {:>14.0} {:>14.0} {:>10.2}",
            r.case,
            r.consideration,
            r.algorithm,
            format!("[{},{},{}]", r.w1, r.w2, r.w3),
            r.equipment_cost,
            r.supply_cost,
            r.comfort_pct
        );
    }
    out
}

/// Renewable energy each building absorbs over the day, MWh.
pub fn building_supply(scenario: &BuildingScenario, decision: &DispatchDecision) -> Vec<f64> {
    let mut supply = vec![0.0; scenario.n_buildings()];
    scenario.for_each_flow(decision, |b, _, f| supply[b] += (f.pv_used + f.wind_used) * SLOT_HOURS);
    supply
}

/// Relative deviation of each building's supply from the mean, `|s − s̄|/s̄`.
/// All zeros when nothing is supplied.
pub fn allocation_deviation(supply: &[f64]) -> Vec<f64> {
    let mean = supply.iter().sum::<f64>() / supply.len().max(1) as f64;
    if mean == 0.0 {
        return vec![0.0; supply.len()];
    }
    supply.iter().map(|s| (s - mean).abs() / mean).collect()
}

pub fn mean(v: &[f64]) -> f64 {
    v.iter().sum::<f64>() / v.len().max(1) as f64
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DeviationRow {
    pub seed: u64,
    pub building: usize,
    pub supply_off: f64,
    pub supply_on: f64,
    pub deviation_off: f64,
    pub deviation_on: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SeedDeviation {
    pub seed: u64,
    pub mean_off: f64,
    pub mean_on: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct TrrExperiment {
    pub rows: Vec<DeviationRow>,
    pub seeds: Vec<SeedDeviation>,
    /// α and β of the first seed's TRR-on compromise.
    pub series: (TrrSeries, TrrSeries),
}

impl TrrExperiment {
    pub fn mean_off(&self) -> f64 {
        mean(&self.seeds.iter().map(|s| s.mean_off).collect::<Vec<_>>())
    }

    pub fn mean_on(&self) -> f64 {
        mean(&self.seeds.iter().map(|s| s.mean_on).collect::<Vec<_>>())
    }

    /// Relative reduction of the average deviation, %.
    pub fn reduction_pct(&self) -> f64 {
        let off = self.mean_off();
        if off == 0.0 {
            0.0
        } else {
            (off - self.mean_on()) / off * 100.0
        }
    }

    pub fn strictly_better_everywhere(&self) -> bool {
        !self.seeds.is_empty() && self.seeds.iter().all(|s| s.mean_on < s.mean_off)
    }
}

fn compromise_supply(problem: &BuildingProblem, run: &RunResult) -> Vec<f64> {
    let d = problem.decode(&run.compromise_point().decision);
    building_supply(problem.scenario(), &d)
}

/// INBI with the TRR penalty off and on, on the symmetric scenario of each
/// configured seed.
pub fn trr_deviation_experiment(cfg: &HarnessConfig) -> Result<TrrExperiment> {
    cfg.trr.validate()?;
    if cfg.experiments.trr_seeds.is_empty() {
        return Err(HarnessError::Usage("the TRR experiment needs at least one seed".into()));
    }
    let mut rows = Vec::new();
    let mut seeds = Vec::new();
    let mut series = None;
    for &seed in &cfg.experiments.trr_seeds {
        let spec = SynthesisSpec {
            seed,
            symmetric: true,
            ..cfg.synthesis.clone()
        };
        let scenario = synthesize_scenario(&spec)?;
        let off = BuildingProblem::new(scenario.clone(), None);
        let on = BuildingProblem::new(scenario, Some(cfg.trr.clone()));
        let run_off = run(&off, AlgorithmId::Inbi, &cfg.pipeline)?;
        let run_on = run(&on, AlgorithmId::Inbi, &cfg.pipeline)?;
        check_compromise(&run_off)?;
        check_compromise(&run_on)?;
        if series.is_none() {
            let d = on.decode(&run_on.compromise_point().decision);
            series = Some(trr_series(on.scenario(), &d, &cfg.trr)?);
        }
        let s_off = compromise_supply(&off, &run_off);
        let s_on = compromise_supply(&on, &run_on);
        let d_off = allocation_deviation(&s_off);
        let d_on = allocation_deviation(&s_on);
        info!("seed {seed}: deviation {:.4} off, {:.4} on", mean(&d_off), mean(&d_on));
        for b in 0..s_off.len() {
            rows.push(DeviationRow {
                seed,
                building: b,
                supply_off: s_off[b],
                supply_on: s_on[b],
                deviation_off: d_off[b],
                deviation_on: d_on[b],
            });
        }
        seeds.push(SeedDeviation {
            seed,
            mean_off: mean(&d_off),
            mean_on: mean(&d_on),
        });
    }
    Ok(TrrExperiment {
        rows,
        seeds,
        series: series.expect("at least one seed"),
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SmoothingRow {
    pub n_buildings: usize,
    pub algorithm: &'static str,
    pub equipment_cost: f64,
    pub baseline_cost: f64,
    /// `(baseline − cost)/baseline · 100`, baseline being ALG2.
    pub optimization_degree: f64,
}

pub fn optimization_degree(cost: f64, baseline: f64) -> f64 {
    if baseline == 0.0 {
        0.0
    } else {
        (baseline - cost) / baseline * 100.0
    }
}

pub fn building_counts(from: usize, to: usize, step: usize) -> Result<Vec<usize>> {
    if step == 0 || from < 2 || to < from {
        return Err(HarnessError::Usage(format!("bad building range {from}..={to} step {step}")));
    }
    Ok((from..=to).step_by(step).collect())
}

/// INBI and ALG1 equipment cost against ALG2 for each building count.
pub fn smoothing_experiment(cfg: &HarnessConfig, counts: &[usize]) -> Result<Vec<SmoothingRow>> {
    let mut rows = Vec::with_capacity(counts.len() * 2);
    for &n in counts {
        let spec = cfg.synthesis.with_buildings(n);
        let problem = BuildingProblem::new(synthesize_scenario(&spec)?, None);
        let runs = run_all(&problem, &cfg.pipeline)?;
        let cost = |alg: AlgorithmId| -> Result<f64> {
            let r = runs.iter().find(|r| r.algorithm == alg).expect("all algorithms run");
            check_compromise(r)?;
            Ok(r.compromise_point().objectives[0])
        };
        let baseline = cost(AlgorithmId::Alg2)?;
        for alg in [AlgorithmId::Inbi, AlgorithmId::Alg1] {
            let c = cost(alg)?;
            rows.push(SmoothingRow {
                n_buildings: n,
                algorithm: alg.name(),
                equipment_cost: c,
                baseline_cost: baseline,
                optimization_degree: optimization_degree(c, baseline),
            });
        }
        info!("{n} buildings done");
    }
    Ok(rows)
}
