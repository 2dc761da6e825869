//! Acceptance suite. Prints one PASS/FAIL line per criterion and exits
//! non-zero if any fails.

use std::process::ExitCode;
use std::time::{Duration, Instant};

use inbi_core::auam::project_along_axis;
use inbi_core::building::BuildingProblem;
use inbi_core::compromise::{closeness, estimate_covariance, evaluation_matrix, pick_compromise};
use inbi_core::frontier::{hausdorff, is_mutually_non_dominated, non_dominated_indices, Source};
use inbi_core::model::{comfort, equipment_cost_terms, tariff_rate, CostFactors, TimeSlot};
use inbi_core::nbi::{euclidean_compromise, nbi_frontier, simplex_weights, NbiConfig};
use inbi_core::problem::anchor_solutions;
use inbi_core::solver::SolverConfig;
use inbi_core::toy::{QuadraticToy, SimplexDistance};
use inbi_core::trr::{trr_ratio, TrrInputs, TrrKind, TrrParams};
use inbi_core::{run, run_all, AlgorithmId, MooProblem, PipelineConfig, RunResult};
use inbi_harness::cases::{builtin_cases, Consideration};
use inbi_harness::config::HarnessConfig;
use inbi_harness::experiments::{compare_all, trr_deviation_experiment};
use inbi_harness::synth::{synthesize_scenario, SynthesisSpec};
use nalgebra::DMatrix;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

type Outcome = Result<String, String>;

fn ensure(ok: bool, msg: impl Into<String>) -> Result<(), String> {
    if ok {
        Ok(())
    } else {
        Err(msg.into())
    }
}

fn close(a: f64, b: f64, tol: f64) -> bool {
    (a - b).abs() <= tol
}

fn formula_exactness() -> Outcome {
    let start = Instant::now();
    for (t, want) in [(26.0, 1.0), (24.0, 0.5), (30.0, 0.0)] {
        let got = comfort(t).map_err(|e| e.to_string())?;
        ensure(close(got, want, 1e-12), format!("comfort({t}) = {got}"))?;
    }
    for slot in TimeSlot::all() {
        let minutes = slot.clock_minutes();
        let want = if !(6 * 60..23 * 60).contains(&minutes) { 0.3 } else { 0.7 };
        ensure(tariff_rate(slot) == want, format!("tariff at minute {minutes}"))?;
    }
    for (clock, want) in [(5 * 60 + 45, 0.3), (6 * 60, 0.7), (22 * 60 + 45, 0.7), (23 * 60, 0.3), (0, 0.3)] {
        let slot = TimeSlot::from_clock(clock).map_err(|e| e.to_string())?;
        ensure(tariff_rate(slot) == want, format!("tariff boundary at minute {clock}"))?;
    }
    let cost = equipment_cost_terms(&[1.0], 1.0, 1.0, &CostFactors::default()).map_err(|e| e.to_string())?;
    ensure(close(cost, 7166.0, 1e-12), format!("equipment cost {cost}"))?;
    let elapsed = start.elapsed();
    ensure(elapsed < Duration::from_secs(1), format!("took {elapsed:?}"))?;
    Ok(format!("equipment cost {cost} ¥ in {elapsed:.1?}"))
}

fn simplex_objectives(p: &[f64]) -> Vec<f64> {
    (0..3)
        .map(|j| (0..3).map(|k| (p[k] - if k == j { 1.0 } else { 0.0 }).powi(2)).sum())
        .collect()
}

fn inverse3(m: &DMatrix<f64>) -> [[f64; 3]; 3] {
    let c = |r0: usize, r1: usize, c0: usize, c1: usize| m[(r0, c0)] * m[(r1, c1)] - m[(r0, c1)] * m[(r1, c0)];
    let cof = [
        [c(1, 2, 1, 2), -c(1, 2, 0, 2), c(1, 2, 0, 1)],
        [-c(0, 2, 1, 2), c(0, 2, 0, 2), -c(0, 2, 0, 1)],
        [c(0, 1, 1, 2), -c(0, 1, 0, 2), c(0, 1, 0, 1)],
    ];
    let det: f64 = (0..3).map(|k| m[(0, k)] * cof[0][k]).sum();
    std::array::from_fn(|i| std::array::from_fn(|j| cof[j][i] / det))
}

fn quad(v: &[f64; 3], inv: &[[f64; 3]; 3]) -> f64 {
    let mut q = 0.0;
    for i in 0..3 {
        for j in 0..3 {
            q += v[i] * inv[i][j] * v[j];
        }
    }
    q.max(0.0).sqrt()
}

fn oracle_equivalence() -> Outcome {
    let start = Instant::now();
    let solver = SolverConfig::default();
    let anchors = anchor_solutions(&SimplexDistance, &solver).map_err(|e| e.to_string())?;
    let nbi = NbiConfig {
        divisions: 120,
        ..Default::default()
    };
    let out = nbi_frontier(&SimplexDistance, &anchors, &nbi, &solver).map_err(|e| e.to_string())?;
    let grid: Vec<Vec<f64>> = simplex_weights(3, 200).iter().map(|w| simplex_objectives(w)).collect();
    let refs: Vec<&[f64]> = grid.iter().map(|g| g.as_slice()).collect();
    let oracle: Vec<Vec<f64>> = non_dominated_indices(&refs)
        .into_iter()
        .map(|i| out.frontier.bounds.normalize(&grid[i]))
        .collect();
    let oracle: Vec<&[f64]> = oracle.iter().map(|g| g.as_slice()).collect();
    let h = hausdorff(&out.frontier.normalized(), &oracle);
    ensure(h <= 1e-2, format!("hausdorff {h:.2e} > 1e-2"))?;

    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let mut worst_th: f64 = 0.0;
    for _ in 0..20 {
        let raw: Vec<Vec<f64>> = (0..10).map(|_| (0..3).map(|_| rng.random_range(0.0..50.0)).collect()).collect();
        let w: [f64; 3] = std::array::from_fn(|_| rng.random_range(0.1..1.0));
        let refs: Vec<&[f64]> = raw.iter().map(|r| r.as_slice()).collect();
        let u = evaluation_matrix(&refs).map_err(|e| e.to_string())?;
        let sigma = estimate_covariance(&u, 1e-8, 1e8).map_err(|e| e.to_string())?;
        let th = closeness(&u, &w, &sigma).map_err(|e| e.to_string())?;
        let inv = inverse3(&sigma);
        for (row, got) in u.iter().zip(&th) {
            let lo: [f64; 3] = std::array::from_fn(|j| u.iter().map(|r| r[j]).fold(f64::INFINITY, f64::min));
            let hi: [f64; 3] = std::array::from_fn(|j| u.iter().map(|r| r[j]).fold(f64::NEG_INFINITY, f64::max));
            let dp = quad(&std::array::from_fn(|j| w[j] * (row[j] - lo[j])), &inv);
            let dn = quad(&std::array::from_fn(|j| w[j] * (row[j] - hi[j])), &inv);
            worst_th = worst_th.max((got - dp / (dp + dn)).abs());
        }
    }
    ensure(worst_th <= 1e-10, format!("closeness off by {worst_th:.2e}"))?;

    let params = TrrParams::default();
    let mut worst_trr: f64 = 0.0;
    for _ in 0..200 {
        let x = TrrInputs {
            pv_usage: rng.random_range(0.01..0.5),
            wind_usage: rng.random_range(0.01..0.5),
            pv_total: rng.random_range(0.5..1.0),
            wind_total: rng.random_range(0.5..1.0),
            pv_square_sum: rng.random_range(5.0..50.0),
            wind_square_sum: rng.random_range(5.0..50.0),
        };
        let a = trr_ratio(TrrKind::Pv, &x, &params).map_err(|e| e.to_string())?;
        let want_a = params.rho_b * (x.pv_usage + params.gamma_l * (x.wind_total - x.wind_usage)) / x.pv_total
            * -(x.pv_total * x.pv_usage / x.pv_square_sum).ln();
        let b = trr_ratio(TrrKind::Wind, &x, &params).map_err(|e| e.to_string())?;
        let want_b = params.rho_b * (x.wind_usage + params.gamma_l * (x.pv_total - x.pv_usage)) / x.wind_total
            * -(x.wind_total * x.wind_usage / x.wind_square_sum).ln();
        worst_trr = worst_trr.max((a - want_a).abs()).max((b - want_b).abs());
    }
    ensure(worst_trr <= 1e-12, format!("TRR ratio off by {worst_trr:.2e}"))?;
    let elapsed = start.elapsed();
    ensure(elapsed < Duration::from_secs(60), format!("took {elapsed:?}"))?;
    Ok(format!(
        "hausdorff {h:.2e} ({} NBI points vs {} grid points), closeness err {worst_th:.1e}, TRR err {worst_trr:.1e}, {elapsed:.1?}",
        out.frontier.len(),
        oracle.len()
    ))
}

fn small_building_problem(trr: Option<TrrParams>) -> Result<BuildingProblem, String> {
    let spec = SynthesisSpec {
        n_buildings: 4,
        n_special: 2,
        ..SynthesisSpec::default()
    };
    let scenario = synthesize_scenario(&spec).map_err(|e| e.to_string())?;
    Ok(BuildingProblem::new(scenario, trr))
}

fn identity_reductions() -> Outcome {
    let toy = QuadraticToy::new(2);
    let r = run(&toy, AlgorithmId::Alg2, &PipelineConfig::default()).map_err(|e| e.to_string())?;
    let objs = r.frontier.objectives();
    let w = [1.0; 3];
    let (chosen, th_e) = euclidean_compromise(&objs, &w).map_err(|e| e.to_string())?;
    let u = evaluation_matrix(&objs).map_err(|e| e.to_string())?;
    let th_m = closeness(&u, &w, &DMatrix::identity(3, 3)).map_err(|e| e.to_string())?;
    let bitwise = th_e.iter().zip(&th_m).all(|(a, b)| a.to_bits() == b.to_bits());
    ensure(bitwise, "Mahalanobis with identity differs from Euclidean")?;
    ensure(pick_compromise(&th_m) == Some(chosen), "different compromise")?;

    let mut cfg = HarnessConfig::light();
    cfg.pipeline.nbi.divisions = 3;
    let off = small_building_problem(None)?;
    let zero = small_building_problem(Some(TrrParams {
        lambda: 0.0,
        ..Default::default()
    }))?;
    let a = run(&off, AlgorithmId::Inbi, &cfg.pipeline).map_err(|e| e.to_string())?;
    let b = run(&zero, AlgorithmId::Inbi, &cfg.pipeline).map_err(|e| e.to_string())?;
    ensure(a.same_outcome(&b), "lambda = 0 run differs from TRR off")?;
    Ok(format!(
        "{} closeness values bit-identical; lambda = 0 reproduces a {}-point INBI run",
        th_m.len(),
        a.frontier.len()
    ))
}

fn check_structure(problem: &dyn MooProblem, r: &RunResult, eps_con: f64) -> Result<(), String> {
    let tag = r.algorithm;
    ensure(is_mutually_non_dominated(&r.frontier.objectives()), format!("{tag}: dominated frontier point"))?;
    ensure(r.selected.contains(&r.compromise), format!("{tag}: compromise not selected"))?;
    ensure(r.selected.iter().all(|&i| i < r.frontier.len()), format!("{tag}: selection outside frontier"))?;
    for p in r.frontier.points.iter().filter(|p| p.source == Source::AwsLifted) {
        ensure(problem.evaluate(&p.decision).is_feasible(eps_con), format!("{tag}: infeasible lifted point"))?;
    }
    if let Some(auam) = &r.auam {
        for row in &auam.selection.trace {
            let Some(i) = row.matched else { continue };
            let s = &r.frontier.points[i].normalized;
            let (proj, _) = project_along_axis(&[s[0], s[1], s[2]], &auam.surface, &auam.family.direction)
                .map_err(|e| e.to_string())?;
            let inside = (0..3).all(|k| (proj[k] - row.sbar[k]).abs() <= auam.family.tolerance[k]);
            ensure(inside, format!("{tag}: selection outside its box"))?;
        }
    }
    Ok(())
}

fn toy_runs() -> Result<Vec<Vec<RunResult>>, String> {
    let cfg = PipelineConfig::default();
    (0..20)
        .map(|seed| run_all(&QuadraticToy::new(seed), &cfg).map_err(|e| format!("seed {seed}: {e}")))
        .collect()
}

fn by(runs: &[RunResult], a: AlgorithmId) -> &RunResult {
    runs.iter().find(|r| r.algorithm == a).expect("all algorithms run")
}

fn structural_invariants(toy: &[Vec<RunResult>]) -> Outcome {
    let eps = PipelineConfig::default().solver.eps_con;
    let mut grew = 0;
    for (seed, runs) in toy.iter().enumerate() {
        let problem = QuadraticToy::new(seed as u64);
        let (inbi, nbi) = (by(runs, AlgorithmId::Inbi), by(runs, AlgorithmId::Alg2));
        ensure(inbi.frontier.len() >= nbi.frontier.len(), format!("seed {seed}: AWS shrank the frontier"))?;
        if inbi.frontier.len() > nbi.frontier.len() {
            grew += 1;
        }
        for r in runs {
            check_structure(&problem, r, eps).map_err(|e| format!("seed {seed}: {e}"))?;
        }
    }
    let mut cfg = HarnessConfig::light();
    cfg.pipeline.nbi.divisions = 3;
    let building = small_building_problem(None)?;
    let r = run(&building, AlgorithmId::Inbi, &cfg.pipeline).map_err(|e| e.to_string())?;
    check_structure(&building, &r, cfg.pipeline.solver.eps_con).map_err(|e| format!("building: {e}"))?;
    Ok(format!("20 toy seeds x 3 algorithms plus one building run; AWS added points on {grew}/20 seeds"))
}

fn median(mut v: Vec<f64>) -> f64 {
    v.sort_by(f64::total_cmp);
    let n = v.len();
    if n % 2 == 1 {
        v[n / 2]
    } else {
        0.5 * (v[n / 2 - 1] + v[n / 2])
    }
}

fn summary(v: &[f64]) -> String {
    let mut s = v.to_vec();
    s.sort_by(f64::total_cmp);
    format!("min {:.3} median {:.3} max {:.3}", s[0], median(s.clone()), s[s.len() - 1])
}

fn uniformity(toy: &[Vec<RunResult>]) -> Outcome {
    let mut raw = Vec::new();
    let mut selected = Vec::new();
    for runs in toy {
        let inbi = by(runs, AlgorithmId::Inbi);
        raw.push(inbi.metrics.nbi_cv.ok_or("raw NBI spacing undefined")?);
        selected.push(inbi.metrics.selected_cv.ok_or("selected spacing undefined")?);
    }
    let detail = format!("selected CV [{}], raw NBI CV [{}]", summary(&selected), summary(&raw));
    ensure(median(selected.clone()) <= median(raw.clone()), detail.clone())?;
    Ok(detail)
}

fn trr_direction() -> Outcome {
    let cfg = HarnessConfig::light();
    let exp = trr_deviation_experiment(&cfg).map_err(|e| e.to_string())?;
    let per_seed: Vec<String> = exp
        .seeds
        .iter()
        .map(|s| format!("{}: {:.3}->{:.3}", s.seed, s.mean_off, s.mean_on))
        .collect();
    let detail = format!(
        "{} seeds, mean deviation {:.4} -> {:.4} ({:.1}% reduction; reference figure 60%) [{}]",
        exp.seeds.len(),
        exp.mean_off(),
        exp.mean_on(),
        exp.reduction_pct(),
        per_seed.join(", ")
    );
    ensure(exp.seeds.len() >= 5, format!("only {} seeds", exp.seeds.len()))?;
    ensure(exp.strictly_better_everywhere() && exp.mean_on() < exp.mean_off(), detail.clone())?;
    Ok(detail)
}

fn case_matrix() -> Outcome {
    use Consideration::*;
    let even = [1.0; 3];
    let table: [(Consideration, [f64; 3]); 13] = [
        (None, even),
        (LowLight, even),
        (LowWind, even),
        (CombinedEffect, even),
        (LowLight, [0.4, 0.3, 0.3]),
        (LowWind, [0.3, 0.4, 0.3]),
        (CombinedEffect, [0.3, 0.3, 0.4]),
        (LowLight, [0.5, 0.25, 0.25]),
        (LowWind, [0.25, 0.5, 0.25]),
        (CombinedEffect, [0.25, 0.25, 0.5]),
        (LowLightAndWind, even),
        (LowLightAndWind, [0.4, 0.3, 0.3]),
        (LowLightAndWind, [0.5, 0.25, 0.25]),
    ];
    let cases = builtin_cases();
    ensure(cases.len() == 13, "expected 13 cases")?;
    for (i, (c, (consideration, weights))) in cases.iter().zip(table).enumerate() {
        ensure(c.consideration == consideration && c.weights == weights, format!("row {i} differs"))?;
    }
    let cfg = HarnessConfig::light();
    let first = compare_all(&cfg).map_err(|e| e.to_string())?;
    ensure(first.len() == 13 * 3, format!("{} rows", first.len()))?;
    for c in &cases {
        for a in AlgorithmId::ALL {
            let present = first.iter().any(|r| r.case == c.id.to_string() && r.algorithm == a.name());
            ensure(present, format!("missing case {} {a}", c.id))?;
        }
    }
    let metrics_finite = first
        .iter()
        .all(|r| r.equipment_cost.is_finite() && r.supply_cost.is_finite() && r.comfort_pct.is_finite());
    ensure(metrics_finite, "non-finite metric")?;
    let second = compare_all(&cfg).map_err(|e| e.to_string())?;
    ensure(first == second, "re-run differs")?;
    Ok("13 cases match the reference table; 39 complete rows, identical on re-run".into())
}

fn scale_invariance() -> Outcome {
    let params = TrrParams::default();
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    let mut worst: f64 = 0.0;
    for _ in 0..200 {
        let x = TrrInputs {
            pv_usage: rng.random_range(0.01..0.5),
            wind_usage: rng.random_range(0.01..0.5),
            pv_total: rng.random_range(0.5..1.0),
            wind_total: rng.random_range(0.5..1.0),
            pv_square_sum: rng.random_range(5.0..50.0),
            wind_square_sum: rng.random_range(5.0..50.0),
        };
        let k = rng.random_range(0.01..100.0);
        for kind in [TrrKind::Pv, TrrKind::Wind] {
            let a = trr_ratio(kind, &x, &params).map_err(|e| e.to_string())?;
            let b = trr_ratio(kind, &x.scaled(k), &params).map_err(|e| e.to_string())?;
            worst = worst.max((a - b).abs() / a.abs().max(1.0));
        }
    }
    ensure(worst <= 1e-9, format!("TRR ratio moved by {worst:.2e}"))?;

    let mut flips = 0;
    for _ in 0..200 {
        let rows: Vec<Vec<f64>> = (0..8).map(|_| (0..3).map(|_| rng.random_range(0.0..10.0)).collect()).collect();
        let refs: Vec<&[f64]> = rows.iter().map(|r| r.as_slice()).collect();
        let u = evaluation_matrix(&refs).map_err(|e| e.to_string())?;
        let sigma = estimate_covariance(&u, 1e-8, 1e8).map_err(|e| e.to_string())?;
        let w: Vec<f64> = (0..3).map(|_| rng.random_range(0.1..2.0)).collect();
        let k = rng.random_range(0.01..100.0);
        let ws: Vec<f64> = w.iter().map(|v| v * k).collect();
        let a = pick_compromise(&closeness(&u, &w, &sigma).map_err(|e| e.to_string())?);
        let b = pick_compromise(&closeness(&u, &ws, &sigma).map_err(|e| e.to_string())?);
        if a != b {
            flips += 1;
        }
    }
    ensure(flips == 0, format!("{flips}/200 choices changed under weight scaling"))?;
    Ok(format!("TRR ratio drift {worst:.1e} over 400 scalings; 200 compromise choices unchanged"))
}

fn main() -> ExitCode {
    let _ = env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("error")).try_init();
    let toy = toy_runs();
    let toy_criterion = |f: fn(&[Vec<RunResult>]) -> Outcome| match &toy {
        Ok(runs) => f(runs),
        Err(e) => Err(e.clone()),
    };
    let criteria: Vec<(&str, Box<dyn FnOnce() -> Outcome + '_>)> = vec![
        ("formula exactness", Box::new(formula_exactness)),
        ("oracle equivalence", Box::new(oracle_equivalence)),
        ("identity reductions", Box::new(identity_reductions)),
        ("structural invariants", Box::new(move || toy_criterion(structural_invariants))),
        ("uniformity direction", Box::new(move || toy_criterion(uniformity))),
        ("TRR direction", Box::new(trr_direction)),
        ("case matrix fidelity", Box::new(case_matrix)),
        ("scale invariance", Box::new(scale_invariance)),
    ];
    let mut failed = 0;
    for (i, (name, check)) in criteria.into_iter().enumerate() {
        let start = Instant::now();
        let outcome = check();
        let elapsed = start.elapsed();
        match outcome {
            Ok(detail) => println!("PASS {} {name}: {detail} [{elapsed:.1?}]", i + 1),
            Err(why) => {
                failed += 1;
                println!("FAIL {} {name}: {why} [{elapsed:.1?}]", i + 1);
            }
        }
    }
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
