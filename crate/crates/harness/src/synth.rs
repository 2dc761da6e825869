//! Seeded synthetic building-cluster scenarios.

use std::f64::consts::PI;

use inbi_core::model::{
    BuildingClass, BuildingLoad, BuildingScenario, CostFactors, ModelSettings, RenewableProfile, SLOTS_PER_DAY,
    SLOT_HOURS,
};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};

use crate::error::{HarnessError, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SynthesisSpec {
    pub seed: u64,
    pub n_buildings: usize,
    /// Buildings with renewable equipment; listed after the ordinary ones.
    pub n_special: usize,
    /// Give every building the same load profile.
    pub symmetric: bool,
    /// Mean daily load of an ordinary building, MW.
    pub ordinary_load: f64,
    pub special_load: f64,
    /// Relative spread of per-building load levels.
    pub load_spread: f64,
    pub morning_peak_hour: f64,
    pub evening_peak_hour: f64,
    /// Share of the base load that is critical; the rest is schedulable.
    pub critical_share: f64,
    /// AC load per building per °C above the AC threshold, MW.
    pub ac_per_degree: f64,
    pub ac_threshold: f64,
    pub temp_mean: f64,
    pub temp_amplitude: f64,
    pub temp_peak_hour: f64,
    pub sunrise_hour: f64,
    pub sunset_hour: f64,
    /// PV peak relative to the cluster's mean load.
    pub pv_peak_share: f64,
    /// Mean wind output relative to the cluster's mean load.
    pub wind_share: f64,
    pub wind_noise: f64,
    /// AR(1) coefficient of the wind noise.
    pub wind_ar: f64,
    /// Available renewables are capped at this multiple of the cluster load
    /// in every slot; must-take output stays below the load.
    pub renewable_cap: f64,
    pub must_take: f64,
    pub cost: CostFactors,
    pub settings: ModelSettings,
}

impl Default for SynthesisSpec {
    fn default() -> Self {
        SynthesisSpec {
            seed: 42,
            n_buildings: 20,
            n_special: 10,
            symmetric: false,
            ordinary_load: 1.0,
            special_load: 1.2,
            load_spread: 0.15,
            morning_peak_hour: 9.0,
            evening_peak_hour: 19.0,
            critical_share: 0.6,
            ac_per_degree: 0.04,
            ac_threshold: 20.0,
            temp_mean: 28.0,
            temp_amplitude: 5.0,
            temp_peak_hour: 15.0,
            sunrise_hour: 5.5,
            sunset_hour: 19.0,
            pv_peak_share: 1.0,
            wind_share: 0.3,
            wind_noise: 0.15,
            wind_ar: 0.8,
            renewable_cap: 1.5,
            must_take: 0.3,
            cost: CostFactors::default(),
            settings: ModelSettings::default(),
        }
    }
}

impl SynthesisSpec {
    pub fn validate(&self) -> Result<()> {
        if self.n_buildings < 2 {
            return Err(HarnessError::Usage(format!(
                "need at least 2 buildings, got {}",
                self.n_buildings
            )));
        }
        if self.n_special > self.n_buildings {
            return Err(HarnessError::Usage(format!(
                "{} special buildings out of {}",
                self.n_special, self.n_buildings
            )));
        }
        if !(self.sunset_hour > self.sunrise_hour) || self.sunrise_hour < 0.0 || self.sunset_hour > 24.0 {
            return Err(HarnessError::Usage("daylight window must lie within the day".into()));
        }
        if !(0.0..=1.0).contains(&self.must_take) || !(0.0..=1.0).contains(&self.critical_share) {
            return Err(HarnessError::Usage("shares must lie in [0, 1]".into()));
        }
        if !(self.renewable_cap > 0.0 && self.renewable_cap * self.must_take < 1.0) {
            return Err(HarnessError::Usage(
                "must-take share of the renewable cap must stay below the load".into(),
            ));
        }
        Ok(())
    }

    /// Buildings scaled to `n`, keeping the special share.
    pub fn with_buildings(&self, n: usize) -> Self {
        let special = (n as f64 * self.n_special as f64 / self.n_buildings.max(1) as f64).round() as usize;
        SynthesisSpec {
            n_buildings: n,
            n_special: special.min(n),
            ..self.clone()
        }
    }
}

fn hour(t: usize) -> f64 {
    t as f64 * SLOT_HOURS
}

fn bump(h: f64, centre: f64, width: f64) -> f64 {
    // wrapped so the profile is periodic over the day
    let d = (h - centre + 12.0).rem_euclid(24.0) - 12.0;
    (-0.5 * (d / width).powi(2)).exp()
}

/// Bell-shaped PV envelope `peak·sin(π(h − sunrise)/(sunset − sunrise))`
/// over daylight, zero at night.
pub fn pv_envelope(h: f64, peak: f64, sunrise: f64, sunset: f64) -> f64 {
    if h <= sunrise || h >= sunset {
        0.0
    } else {
        peak * (PI * (h - sunrise) / (sunset - sunrise)).sin()
    }
}

/// Closed-form daily energy of [`pv_envelope`], MWh.
pub fn pv_envelope_energy(peak: f64, sunrise: f64, sunset: f64) -> f64 {
    peak * 2.0 * (sunset - sunrise) / PI
}

pub fn temperature_profile(spec: &SynthesisSpec) -> Vec<f64> {
    (0..SLOTS_PER_DAY)
        .map(|t| spec.temp_mean + spec.temp_amplitude * (2.0 * PI * (hour(t) - spec.temp_peak_hour) / 24.0).cos())
        .collect()
}

/// Double-peaked diurnal shape with mean close to 1.
pub fn load_shape(spec: &SynthesisSpec) -> Vec<f64> {
    let raw: Vec<f64> = (0..SLOTS_PER_DAY)
        .map(|t| {
            let h = hour(t);
            0.55 + 0.5 * bump(h, spec.morning_peak_hour, 2.0) + 0.7 * bump(h, spec.evening_peak_hour, 2.5)
        })
        .collect();
    let mean = raw.iter().sum::<f64>() / raw.len() as f64;
    raw.into_iter().map(|v| v / mean).collect()
}

pub fn synthesize_scenario(spec: &SynthesisSpec) -> Result<BuildingScenario> {
    spec.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let shape = load_shape(spec);
    let temperature = temperature_profile(spec);
    let n_ordinary = spec.n_buildings - spec.n_special;

    let mut buildings = Vec::with_capacity(spec.n_buildings);
    for b in 0..spec.n_buildings {
        let class = if b < n_ordinary {
            BuildingClass::Ordinary
        } else {
            BuildingClass::Special
        };
        let (level, ac) = if spec.symmetric {
            (spec.ordinary_load, spec.ac_per_degree)
        } else {
            let base = match class {
                BuildingClass::Ordinary => spec.ordinary_load,
                BuildingClass::Special => spec.special_load,
            };
            let k = 1.0 + spec.load_spread * rng.random_range(-1.0..1.0);
            (base * k, spec.ac_per_degree * k)
        };
        let critical = shape.iter().map(|s| level * s * spec.critical_share).collect();
        let schedulable = shape.iter().map(|s| level * s * (1.0 - spec.critical_share)).collect();
        let switchable = temperature
            .iter()
            .map(|t| ac * (t - spec.ac_threshold).max(0.0))
            .collect();
        buildings.push(BuildingLoad {
            class,
            critical,
            schedulable,
            switchable,
        });
    }

    let load: Vec<f64> = (0..SLOTS_PER_DAY)
        .map(|t| {
            buildings
                .iter()
                .map(|b| b.critical[t] + b.schedulable[t] + b.switchable[t])
                .sum()
        })
        .collect();
    let mean_load = load.iter().sum::<f64>() / SLOTS_PER_DAY as f64;

    let peak = spec.pv_peak_share * mean_load;
    let mut pv: Vec<f64> = (0..SLOTS_PER_DAY)
        .map(|t| pv_envelope(hour(t), peak, spec.sunrise_hour, spec.sunset_hour))
        .collect();
    let normal = Normal::new(0.0, spec.wind_noise).expect("finite noise level");
    let mut noise = 0.0;
    let base = spec.wind_share * mean_load;
    let mut wind: Vec<f64> = (0..SLOTS_PER_DAY)
        .map(|t| {
            noise = spec.wind_ar * noise + normal.sample(&mut rng);
            let diurnal = 1.0 + 0.3 * (2.0 * PI * (hour(t) - 3.0) / 24.0).cos();
            (base * (diurnal + noise)).max(0.0)
        })
        .collect();
    for t in 0..SLOTS_PER_DAY {
        let cap = spec.renewable_cap * load[t];
        let total = pv[t] + wind[t];
        if total > cap {
            let k = cap / total;
            pv[t] *= k;
            wind[t] *= k;
        }
    }

    Ok(BuildingScenario::new(
        buildings,
        RenewableProfile::with_must_take(wind, spec.must_take),
        RenewableProfile::with_must_take(pv, spec.must_take),
        temperature,
        spec.cost,
        spec.settings,
    )?)
}
