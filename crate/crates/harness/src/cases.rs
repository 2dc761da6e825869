//! The built-in case matrix: weather considerations and compromise weights.

use std::fmt;
use std::str::FromStr;

use inbi_core::model::BuildingScenario;
use serde::{Deserialize, Serialize};

use crate::config::WeatherFactors;
use crate::error::{HarnessError, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Consideration {
    None,
    LowLight,
    LowWind,
    /// Coordinated renewable sharing between buildings; turns the TRR penalty on.
    CombinedEffect,
    LowLightAndWind,
}

impl Consideration {
    pub const ALL: [Consideration; 5] = [
        Consideration::None,
        Consideration::LowLight,
        Consideration::LowWind,
        Consideration::CombinedEffect,
        Consideration::LowLightAndWind,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Consideration::None => "none",
            Consideration::LowLight => "low_light",
            Consideration::LowWind => "low_wind",
            Consideration::CombinedEffect => "combined_effect",
            Consideration::LowLightAndWind => "low_light_and_wind",
        }
    }

    pub fn uses_trr(self) -> bool {
        self == Consideration::CombinedEffect
    }

    /// `(pv, wind)` availability factors.
    pub fn factors(self, weather: &WeatherFactors) -> (f64, f64) {
        match self {
            Consideration::None | Consideration::CombinedEffect => (1.0, 1.0),
            Consideration::LowLight => (weather.low_light, 1.0),
            Consideration::LowWind => (1.0, weather.low_wind),
            Consideration::LowLightAndWind => (weather.low_light, weather.low_wind),
        }
    }

    pub fn apply(self, scenario: &BuildingScenario, weather: &WeatherFactors) -> BuildingScenario {
        let (pv, wind) = self.factors(weather);
        if pv == 1.0 && wind == 1.0 {
            scenario.clone()
        } else {
            scenario.with_weather(pv, wind)
        }
    }
}

impl fmt::Display for Consideration {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum CaseId {
    Standard,
    Numbered(u8),
}

impl CaseId {
    pub fn new(n: u8) -> Result<Self> {
        match n {
            0 => Ok(CaseId::Standard),
            1..=12 => Ok(CaseId::Numbered(n)),
            _ => Err(HarnessError::Usage(format!("no case {n}; cases are standard and 1 to 12"))),
        }
    }

    /// Row position in the case table, standard first.
    pub fn index(self) -> usize {
        match self {
            CaseId::Standard => 0,
            CaseId::Numbered(n) => n as usize,
        }
    }
}

impl fmt::Display for CaseId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CaseId::Standard => f.write_str("standard"),
            CaseId::Numbered(n) => write!(f, "{n}"),
        }
    }
}

impl FromStr for CaseId {
    type Err = HarnessError;

    fn from_str(s: &str) -> Result<Self> {
        if s.eq_ignore_ascii_case("standard") {
            return Ok(CaseId::Standard);
        }
        let n: u8 = s
            .parse()
            .map_err(|_| HarnessError::Usage(format!("bad case id {s:?}")))?;
        if n == 0 {
            return Err(HarnessError::Usage("case 0 does not exist; use \"standard\"".into()));
        }
        CaseId::new(n)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CaseConfig {
    pub id: CaseId,
    pub consideration: Consideration,
    /// Compromise weights on equipment cost, supply cost and comfort.
    pub weights: [f64; 3],
}

const EVEN: [f64; 3] = [1.0, 1.0, 1.0];

/// The 13 built-in cases, standard first.
pub fn builtin_cases() -> Vec<CaseConfig> {
    use Consideration::*;
    let rows: [(Consideration, [f64; 3]); 13] = [
        (None, EVEN),
        (LowLight, EVEN),
        (LowWind, EVEN),
        (CombinedEffect, EVEN),
        (LowLight, [0.4, 0.3, 0.3]),
        (LowWind, [0.3, 0.4, 0.3]),
        (CombinedEffect, [0.3, 0.3, 0.4]),
        (LowLight, [0.5, 0.25, 0.25]),
        (LowWind, [0.25, 0.5, 0.25]),
        (CombinedEffect, [0.25, 0.25, 0.5]),
        (LowLightAndWind, EVEN),
        (LowLightAndWind, [0.4, 0.3, 0.3]),
        (LowLightAndWind, [0.5, 0.25, 0.25]),
    ];
    rows.iter()
        .enumerate()
        .map(|(i, &(consideration, weights))| CaseConfig {
            id: CaseId::new(i as u8).expect("13 rows"),
            consideration,
            weights,
        })
        .collect()
}

pub fn case(id: CaseId) -> CaseConfig {
    builtin_cases()[id.index()]
}
