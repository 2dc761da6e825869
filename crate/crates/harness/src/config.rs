//! TOML configuration covering every tolerance and default of a run.

use std::path::Path;

use inbi_core::trr::TrrParams;
use inbi_core::PipelineConfig;
use serde::{Deserialize, Serialize};

use crate::error::{HarnessError, Result};
use crate::synth::SynthesisSpec;

/// Renewable scaling for the weather considerations.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct WeatherFactors {
    pub low_light: f64,
    pub low_wind: f64,
}

impl Default for WeatherFactors {
    fn default() -> Self {
        WeatherFactors {
            low_light: 0.4,
            low_wind: 0.4,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct ExperimentConfig {
    /// Seeds of the TRR deviation experiment.
    pub trr_seeds: Vec<u64>,
    pub smoothing_from: usize,
    pub smoothing_to: usize,
    pub smoothing_step: usize,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        ExperimentConfig {
            trr_seeds: vec![1, 2, 3, 4, 5],
            smoothing_from: 10,
            smoothing_to: 80,
            smoothing_step: 10,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct HarnessConfig {
    pub pipeline: PipelineConfig,
    pub synthesis: SynthesisSpec,
    pub trr: TrrParams,
    pub weather: WeatherFactors,
    pub experiments: ExperimentConfig,
}

/// TRR weight sized against normalized objectives.
pub const BUILDING_TRR_LAMBDA: f64 = 1e-4;

impl Default for HarnessConfig {
    fn default() -> Self {
        HarnessConfig {
            pipeline: building_pipeline(),
            synthesis: SynthesisSpec::default(),
            trr: TrrParams {
                lambda: BUILDING_TRR_LAMBDA,
                ..TrrParams::default()
            },
            weather: WeatherFactors::default(),
            experiments: ExperimentConfig::default(),
        }
    }
}

/// Solver settings that suit the building problem: the cost objectives are
/// in the tens of millions of yuan and the search space has 2n + 3
/// dimensions, so the penalty starts high and slow crawls along ridges are
/// cut short.
pub fn building_pipeline() -> PipelineConfig {
    let mut cfg = PipelineConfig::default();
    cfg.nbi.divisions = 6;
    cfg.solver.max_evals = 10_000;
    cfg.solver.penalty_start = 1e4;
    cfg.solver.stall_tol = 3e-3;
    cfg.solver.stall_window = 1000;
    cfg
}

impl HarnessConfig {
    /// Parses `text` as overrides on top of [`HarnessConfig::default`], so a
    /// partial table keeps the harness defaults of its missing keys.
    pub fn from_toml(text: &str) -> Result<Self> {
        let overrides: toml::Table = toml::from_str(text)?;
        let mut base = toml::Table::try_from(HarnessConfig::default())?;
        merge(&mut base, overrides);
        let cfg: HarnessConfig = toml::Value::Table(base).try_into()?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| HarnessError::io(path, e))?;
        Self::from_toml(&text)
    }

    pub fn to_toml(&self) -> Result<String> {
        Ok(toml::to_string_pretty(self)?)
    }

    /// Coarser grid and a single AWS round, for quick runs.
    pub fn light() -> Self {
        let mut cfg = HarnessConfig::default();
        cfg.pipeline.nbi.divisions = 4;
        cfg.pipeline.aws.max_rounds = 1;
        cfg
    }

    pub fn validate(&self) -> Result<()> {
        self.synthesis.validate()?;
        self.trr.validate()?;
        for (name, f) in [("low_light", self.weather.low_light), ("low_wind", self.weather.low_wind)] {
            if !(f > 0.0 && f <= 1.0) {
                return Err(HarnessError::Usage(format!("weather factor {name} must lie in (0, 1], got {f}")));
            }
        }
        let e = &self.experiments;
        if e.smoothing_step == 0 || e.smoothing_from < 2 || e.smoothing_to < e.smoothing_from {
            return Err(HarnessError::Usage(format!(
                "bad smoothing range {}..={} step {}",
                e.smoothing_from, e.smoothing_to, e.smoothing_step
            )));
        }
        if self.pipeline.nbi.divisions == 0 {
            return Err(HarnessError::Usage("nbi divisions must be positive".into()));
        }
        Ok(())
    }
}

fn merge(base: &mut toml::Table, overrides: toml::Table) {
    for (key, value) in overrides {
        match (base.get_mut(&key), value) {
            (Some(toml::Value::Table(b)), toml::Value::Table(o)) => merge(b, o),
            (_, v) => {
                base.insert(key, v);
            }
        }
    }
}
