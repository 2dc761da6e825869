//! Derivative-free scalar minimization over a box.
//!
//! Compass search with a shrinking mesh, constraints folded in through an
//! exterior quadratic penalty whose weight grows between stages, and seeded
//! multistarts reduced by a deterministic tie-break.

use std::cmp::Ordering;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SolverConfig {
    /// Stop once the poll step (relative to the box width) falls below this.
    pub mesh_tol: f64,
    /// Evaluation budget per start, summed over penalty stages.
    pub max_evals: usize,
    /// Total number of starts including the caller-supplied ones.
    pub multistarts: usize,
    /// First poll step, relative to the box width.
    pub initial_step: f64,
    pub penalty_start: f64,
    pub penalty_growth: f64,
    pub penalty_max: f64,
    /// Constraint tolerance ε_con.
    pub eps_con: f64,
    pub seed: u64,
    /// A stage also ends, counted as converged, when the merit improves by
    /// less than `stall_tol·max(1, |merit|)` over `stall_window` evaluations.
    /// Zero disables the test.
    pub stall_tol: f64,
    pub stall_window: usize,
}

impl Default for SolverConfig {
    fn default() -> Self {
        SolverConfig {
            mesh_tol: 1e-6,
            max_evals: 5000,
            multistarts: 3,
            initial_step: 0.25,
            penalty_start: 10.0,
            penalty_growth: 10.0,
            penalty_max: 1e8,
            eps_con: 1e-6,
            seed: 0,
            stall_tol: 0.0,
            stall_window: 2000,
        }
    }
}

/// Objective value and constraint status at one point.
///
/// Violations are accumulated twice: squared into the penalty term and,
/// divided by each group's tolerance, into `violation_ratio`. A point is
/// feasible when that ratio is at most 1.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ScalarEval {
    pub value: f64,
    pub penalty_sq: f64,
    pub violation_ratio: f64,
}

impl ScalarEval {
    pub fn new(value: f64) -> Self {
        ScalarEval {
            value,
            penalty_sq: 0.0,
            violation_ratio: 0.0,
        }
    }

    /// Equality constraints `h(x) = 0`.
    pub fn equalities(mut self, h: &[f64], tol: f64) -> Self {
        for &v in h {
            self.penalty_sq += v * v;
            self.violation_ratio = self.violation_ratio.max(v.abs() / tol);
        }
        self
    }

    /// Inequality constraints `g(x) <= 0`.
    pub fn inequalities(mut self, g: &[f64], tol: f64) -> Self {
        for &v in g {
            if v > 0.0 {
                self.penalty_sq += v * v;
                self.violation_ratio = self.violation_ratio.max(v / tol);
            }
        }
        self
    }

    pub fn is_feasible(&self) -> bool {
        self.violation_ratio <= 1.0
    }

    fn merit(&self, mu: f64) -> f64 {
        if self.penalty_sq == 0.0 {
            self.value
        } else {
            self.value + mu * self.penalty_sq
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ScalarSolveReport {
    pub solution: Vec<f64>,
    pub value: f64,
    pub converged: bool,
    /// Objective evaluations over all starts.
    pub iterations: usize,
    /// Worst constraint violation relative to its tolerance.
    pub violation_ratio: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Bounds<'a> {
    pub lower: &'a [f64],
    pub upper: &'a [f64],
}

impl Bounds<'_> {
    pub fn clamp(&self, x: &mut [f64]) {
        for ((v, lo), hi) in x.iter_mut().zip(self.lower).zip(self.upper) {
            *v = v.clamp(*lo, *hi);
        }
    }

    pub fn contains(&self, x: &[f64]) -> bool {
        x.iter()
            .zip(self.lower.iter().zip(self.upper))
            .all(|(v, (lo, hi))| *v >= *lo && *v <= *hi)
    }
}

/// Mixes a base seed with a stream id (splitmix64 finalizer).
pub fn derive_seed(seed: u64, stream: u64) -> u64 {
    let mut z = seed ^ stream.wrapping_mul(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Minimizes `f` over the box from the given starts, topped up with seeded
/// random starts to `cfg.multistarts`. `stream` distinguishes the random
/// starts of independent subproblems.
pub fn solve_scalar<F>(
    f: F,
    bounds: Bounds<'_>,
    starts: &[Vec<f64>],
    cfg: &SolverConfig,
    stream: u64,
) -> ScalarSolveReport
where
    F: Fn(&[f64]) -> ScalarEval,
{
    let dim = bounds.lower.len();
    let mut all_starts: Vec<Vec<f64>> = starts.to_vec();
    let mut rng = ChaCha8Rng::seed_from_u64(derive_seed(cfg.seed, stream));
    while all_starts.len() < cfg.multistarts.max(1) {
        all_starts.push(
            (0..dim)
                .map(|i| {
                    let (lo, hi) = (bounds.lower[i], bounds.upper[i]);
                    if hi > lo {
                        rng.random_range(lo..=hi)
                    } else {
                        lo
                    }
                })
                .collect(),
        );
    }

    let mut total_evals = 0;
    let mut best: Option<Candidate> = None;
    for start in &all_starts {
        let cand = pattern_search(&f, bounds, start, cfg);
        total_evals += cand.evals;
        best = Some(match best {
            None => cand,
            Some(b) => {
                if cand.better_than(&b) {
                    cand
                } else {
                    b
                }
            }
        });
    }
    let best = best.expect("at least one start");
    ScalarSolveReport {
        converged: best.settled && best.eval.is_feasible(),
        value: best.eval.value,
        violation_ratio: best.eval.violation_ratio,
        solution: best.x,
        iterations: total_evals,
    }
}

struct Candidate {
    x: Vec<f64>,
    eval: ScalarEval,
    settled: bool,
    evals: usize,
}

impl Candidate {
    /// Feasible before infeasible, then smaller value, then lexicographically
    /// smaller decision vector.
    fn better_than(&self, other: &Candidate) -> bool {
        let (a, b) = (&self.eval, &other.eval);
        match (a.is_feasible(), b.is_feasible()) {
            (true, false) => return true,
            (false, true) => return false,
            (false, false) => {
                if a.violation_ratio != b.violation_ratio {
                    return a.violation_ratio < b.violation_ratio;
                }
            }
            (true, true) => {}
        }
        match a.value.partial_cmp(&b.value) {
            Some(Ordering::Less) => true,
            Some(Ordering::Greater) => false,
            _ => lex_less(&self.x, &other.x),
        }
    }
}

fn lex_less(a: &[f64], b: &[f64]) -> bool {
    for (x, y) in a.iter().zip(b) {
        match x.partial_cmp(y) {
            Some(Ordering::Less) => return true,
            Some(Ordering::Greater) => return false,
            _ => {}
        }
    }
    false
}

fn pattern_search<F>(f: &F, bounds: Bounds<'_>, start: &[f64], cfg: &SolverConfig) -> Candidate
where
    F: Fn(&[f64]) -> ScalarEval,
{
    let dim = start.len();
    let width: Vec<f64> = (0..dim).map(|i| bounds.upper[i] - bounds.lower[i]).collect();
    let mut x = start.to_vec();
    bounds.clamp(&mut x);
    let mut fx = f(&x);
    let mut evals = 1;
    let mut mu = cfg.penalty_start;
    let mut settled;
    let mut stage = 0;

    loop {
        let mut step = if stage == 0 {
            cfg.initial_step
        } else {
            (cfg.initial_step / 4f64.powi(stage)).max(64.0 * cfg.mesh_tol)
        };
        let mut merit = fx.merit(mu);
        let mut first = 0;
        settled = false;
        let mut trial = x.clone();
        let mut checkpoint = (evals, merit);
        while evals < cfg.max_evals {
            if cfg.stall_tol > 0.0 && evals - checkpoint.0 >= cfg.stall_window {
                if checkpoint.1 - merit < cfg.stall_tol * merit.abs().max(1.0) {
                    settled = true;
                    break;
                }
                checkpoint = (evals, merit);
            }
            let mut moved = false;
            for k in 0..2 * dim {
                let dir = (first + k) % (2 * dim);
                let i = dir / 2;
                let sign = if dir % 2 == 0 { 1.0 } else { -1.0 };
                let v = (x[i] + sign * step * width[i]).clamp(bounds.lower[i], bounds.upper[i]);
                if v == x[i] {
                    continue;
                }
                trial[i] = v;
                let ft = f(&trial);
                evals += 1;
                let mt = ft.merit(mu);
                if mt < merit {
                    x[i] = v;
                    fx = ft;
                    merit = mt;
                    first = dir;
                    moved = true;
                    break;
                }
                trial[i] = x[i];
                if evals >= cfg.max_evals {
                    break;
                }
            }
            if !moved {
                step *= 0.5;
                if step < cfg.mesh_tol {
                    settled = true;
                    break;
                }
            }
        }
        if fx.penalty_sq == 0.0 || fx.is_feasible() || mu >= cfg.penalty_max || evals >= cfg.max_evals {
            break;
        }
        mu *= cfg.penalty_growth;
        stage += 1;
    }
    Candidate {
        x,
        eval: fx,
        settled,
        evals,
    }
}
