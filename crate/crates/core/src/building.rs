//! The building dispatch scenario as a [`MooProblem`].

use crate::model::{BuildingScenario, DispatchDecision, COMFORT_SETPOINT, SETPOINT_MAX, SETPOINT_MIN};
use crate::problem::{Evaluation, MooProblem};
use crate::trr::{trr_penalty, TrrParams};

/// Decision vector: `n` raw PV weights and `n` raw wind weights in `[0, 1]`,
/// the two class setpoints and the shift fraction. Renewable lower bounds
/// are the inequality constraints; balance holds by construction.
#[derive(Debug, Clone)]
pub struct BuildingProblem {
    scenario: BuildingScenario,
    trr: Option<TrrParams>,
    lower: Vec<f64>,
    upper: Vec<f64>,
}

impl BuildingProblem {
    pub fn new(scenario: BuildingScenario, trr: Option<TrrParams>) -> Self {
        let n = scenario.n_buildings();
        let mut lower = vec![0.0; 2 * n];
        let mut upper = vec![1.0; 2 * n];
        lower.extend([SETPOINT_MIN, SETPOINT_MIN, 0.0]);
        upper.extend([SETPOINT_MAX, SETPOINT_MAX, 1.0]);
        BuildingProblem {
            scenario,
            trr,
            lower,
            upper,
        }
    }

    pub fn scenario(&self) -> &BuildingScenario {
        &self.scenario
    }

    pub fn trr(&self) -> Option<&TrrParams> {
        self.trr.as_ref()
    }

    pub fn decode(&self, x: &[f64]) -> DispatchDecision {
        DispatchDecision::from_vector(x, self.scenario.n_buildings()).expect("dimension checked by the solver")
    }
}

impl MooProblem for BuildingProblem {
    fn dimension(&self) -> usize {
        self.lower.len()
    }

    fn n_objectives(&self) -> usize {
        3
    }

    fn lower_bounds(&self) -> &[f64] {
        &self.lower
    }

    fn upper_bounds(&self) -> &[f64] {
        &self.upper
    }

    fn default_start(&self) -> Vec<f64> {
        let n = self.scenario.n_buildings();
        let mut x = vec![0.5; 2 * n];
        x.extend([COMFORT_SETPOINT, COMFORT_SETPOINT, 0.0]);
        x
    }

    fn evaluate(&self, x: &[f64]) -> Evaluation {
        let d = self.decode(x);
        let totals = self.scenario.slot_totals(&d);
        let objectives = self.scenario.objectives_unchecked(&d, &totals).to_array().to_vec();
        let inequality = self.scenario.bound_violations(&totals);
        let penalty = match &self.trr {
            Some(p) => trr_penalty(&self.scenario, &d, p, p.lambda).unwrap_or(f64::INFINITY),
            None => 0.0,
        };
        Evaluation {
            objectives,
            equality: Vec::new(),
            inequality,
            penalty,
        }
    }
}
