//! Smart-building benchmark: tariff, comfort, equipment and supply cost,
//! power balance and the three-objective evaluation over 15-minute slots.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub const SLOTS_PER_DAY: usize = 96;
pub const SLOT_MINUTES: u32 = 15;
pub const SLOT_HOURS: f64 = 0.25;

pub const VALLEY_RATE: f64 = 0.3;
pub const PEAK_RATE: f64 = 0.7;
const VALLEY_START_MIN: u32 = 23 * 60;
const VALLEY_END_MIN: u32 = 6 * 60;

pub const COMFORT_SETPOINT: f64 = 26.0;
pub const SETPOINT_MIN: f64 = 22.0;
pub const SETPOINT_MAX: f64 = 30.0;

/// A 15-minute slot of the day.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct TimeSlot(usize);

impl TimeSlot {
    pub fn new(index: usize) -> Result<Self> {
        if index >= SLOTS_PER_DAY {
            return Err(Error::Domain {
                what: "slot index",
                value: index as f64,
                lo: 0.0,
                hi: (SLOTS_PER_DAY - 1) as f64,
            });
        }
        Ok(TimeSlot(index))
    }

    /// Slot starting at `minutes` past midnight; must fall on a slot boundary.
    pub fn from_clock(minutes: u32) -> Result<Self> {
        if minutes % SLOT_MINUTES != 0 {
            return Err(Error::Domain {
                what: "slot clock (must be a multiple of 15 minutes)",
                value: minutes as f64,
                lo: 0.0,
                hi: 1425.0,
            });
        }
        Self::new((minutes / SLOT_MINUTES) as usize)
    }

    pub fn index(self) -> usize {
        self.0
    }

    pub fn clock_minutes(self) -> u32 {
        self.0 as u32 * SLOT_MINUTES
    }

    pub fn all() -> impl Iterator<Item = TimeSlot> {
        (0..SLOTS_PER_DAY).map(TimeSlot)
    }

    /// Valley window is [23:00, 06:00).
    pub fn is_valley(self) -> bool {
        let m = self.clock_minutes();
        m >= VALLEY_START_MIN || m < VALLEY_END_MIN
    }
}

/// Grid tariff in ¥/kWh.
pub fn tariff_rate(slot: TimeSlot) -> f64 {
    if slot.is_valley() {
        VALLEY_RATE
    } else {
        PEAK_RATE
    }
}

/// Occupant comfort S_D as a fraction in [0, 1].
pub fn comfort(t_in: f64) -> Result<f64> {
    if !(SETPOINT_MIN..=SETPOINT_MAX).contains(&t_in) {
        return Err(Error::Domain {
            what: "indoor temperature",
            value: t_in,
            lo: SETPOINT_MIN,
            hi: SETPOINT_MAX,
        });
    }
    Ok(1.0 - (t_in - COMFORT_SETPOINT).abs() * 0.25)
}

/// Trapezoidal integral of a 96-slot power series (MW) over one day, in MWh.
///
/// The day is treated as periodic, so the interval from the last slot back to
/// midnight is included and a constant series integrates exactly.
pub fn integrate_power(series: &[f64]) -> Result<f64> {
    check_len(series)?;
    let n = series.len();
    Ok((0..n)
        .map(|t| 0.5 * (series[t] + series[(t + 1) % n]) * SLOT_HOURS)
        .sum())
}

fn check_len(series: &[f64]) -> Result<()> {
    if series.len() != SLOTS_PER_DAY {
        return Err(Error::SeriesLength {
            expected: SLOTS_PER_DAY,
            got: series.len(),
        });
    }
    Ok(())
}

/// Equipment and supply cost coefficients.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CostFactors {
    /// Wind operating cost, ¥/MW.
    pub w1: f64,
    /// Wind maintenance cost, ¥/kW.
    pub w2: f64,
    /// PV generation and maintenance cost, ¥/MW.
    pub l: f64,
}

impl Default for CostFactors {
    fn default() -> Self {
        CostFactors {
            w1: 2070.0,
            w2: 0.096,
            l: 5000.0,
        }
    }
}

/// `w1·ΣP_0 + w2·P_wm + l·P_c` with `w2` converted to ¥/MW.
pub fn equipment_cost_terms(
    wind_samples: &[f64],
    monthly_mean_wind: f64,
    max_pv: f64,
    factors: &CostFactors,
) -> Result<f64> {
    if wind_samples.iter().any(|&p| p < 0.0) {
        return Err(Error::NegativePower("wind samples"));
    }
    if monthly_mean_wind < 0.0 {
        return Err(Error::NegativePower("monthly mean wind"));
    }
    if max_pv < 0.0 {
        return Err(Error::NegativePower("maximum PV output"));
    }
    let p0: f64 = wind_samples.iter().sum();
    Ok(factors.w1 * p0 + factors.w2 * 1000.0 * monthly_mean_wind + factors.l * max_pv)
}

/// Grid purchase cost of one day (¥) for a 96-slot exchange series in MW.
/// Exports (negative exchange) are not credited.
pub fn daily_supply_cost(grid_exchange: &[f64]) -> Result<f64> {
    check_len(grid_exchange)?;
    Ok(TimeSlot::all()
        .map(|s| grid_exchange[s.index()].max(0.0) * SLOT_HOURS * tariff_rate(s) * 1000.0)
        .sum())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BuildingClass {
    Ordinary,
    Special,
}

impl BuildingClass {
    pub fn index(self) -> usize {
        match self {
            BuildingClass::Ordinary => 0,
            BuildingClass::Special => 1,
        }
    }
}

/// Per-building 96-slot load series, MW.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BuildingLoad {
    pub class: BuildingClass,
    pub critical: Vec<f64>,
    pub schedulable: Vec<f64>,
    /// Air-conditioning load at the 26 °C reference setpoint.
    pub switchable: Vec<f64>,
}

/// Available renewable output with its dispatch bounds, MW per slot.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RenewableProfile {
    pub lower: Vec<f64>,
    pub upper: Vec<f64>,
}

impl RenewableProfile {
    /// Output that may be curtailed down to `must_take` of what is available.
    pub fn with_must_take(available: Vec<f64>, must_take: f64) -> Self {
        RenewableProfile {
            lower: available.iter().map(|p| p * must_take).collect(),
            upper: available,
        }
    }

    pub fn scaled(&self, factor: f64) -> Self {
        RenewableProfile {
            lower: self.lower.iter().map(|p| p * factor).collect(),
            upper: self.upper.iter().map(|p| p * factor).collect(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct ModelSettings {
    /// Power balance slack ε_bal, MW.
    pub eps_bal: f64,
    /// Days the representative day is repeated over to form a month.
    pub month_days: f64,
    /// Relative change of AC load per °C below the 26 °C reference.
    pub ac_sensitivity: f64,
}

impl Default for ModelSettings {
    fn default() -> Self {
        ModelSettings {
            eps_bal: 1e-6,
            month_days: 31.0,
            ac_sensitivity: 0.08,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct BuildingScenario {
    buildings: Vec<BuildingLoad>,
    wind: RenewableProfile,
    pv: RenewableProfile,
    temperature: Vec<f64>,
    cost: CostFactors,
    /// Total power of special buildings (P_1), MW. Metadata only.
    pub p1_total: f64,
    /// Total power of ordinary buildings (P_2), MW. Metadata only.
    pub p2_total: f64,
    settings: ModelSettings,
    peak_schedulable: Vec<f64>,
}

impl BuildingScenario {
    pub fn new(
        buildings: Vec<BuildingLoad>,
        wind: RenewableProfile,
        pv: RenewableProfile,
        temperature: Vec<f64>,
        cost: CostFactors,
        settings: ModelSettings,
    ) -> Result<Self> {
        if buildings.is_empty() {
            return Err(Error::InvalidScenario("no buildings".into()));
        }
        for (i, b) in buildings.iter().enumerate() {
            for (name, s) in [
                ("critical", &b.critical),
                ("schedulable", &b.schedulable),
                ("switchable", &b.switchable),
            ] {
                check_len(s)?;
                if s.iter().any(|&p| !(p >= 0.0) || !p.is_finite()) {
                    return Err(Error::InvalidScenario(format!(
                        "building {i}: {name} load must be finite and non-negative"
                    )));
                }
            }
        }
        for (name, prof) in [("wind", &wind), ("pv", &pv)] {
            check_len(&prof.lower)?;
            check_len(&prof.upper)?;
            for (lo, hi) in prof.lower.iter().zip(&prof.upper) {
                if !(*lo >= 0.0) || !(hi >= lo) || !hi.is_finite() {
                    return Err(Error::InvalidScenario(format!(
                        "{name} bounds must satisfy 0 <= lower <= upper"
                    )));
                }
            }
        }
        check_len(&temperature)?;
        let sum_class = |class| {
            buildings
                .iter()
                .filter(|b| b.class == class)
                .map(|b| mean(&b.critical) + mean(&b.schedulable) + mean(&b.switchable))
                .sum::<f64>()
        };
        let p1_total = sum_class(BuildingClass::Special);
        let p2_total = sum_class(BuildingClass::Ordinary);
        let mut scenario = BuildingScenario {
            buildings,
            wind,
            pv,
            temperature,
            cost,
            p1_total,
            p2_total,
            settings,
            peak_schedulable: Vec::new(),
        };
        scenario.refresh_derived();
        Ok(scenario)
    }

    fn refresh_derived(&mut self) {
        self.peak_schedulable = self
            .buildings
            .iter()
            .map(|b| {
                TimeSlot::all()
                    .filter(|s| !s.is_valley())
                    .map(|s| b.schedulable[s.index()])
                    .sum()
            })
            .collect();
    }

    pub fn buildings(&self) -> &[BuildingLoad] {
        &self.buildings
    }

    pub fn n_buildings(&self) -> usize {
        self.buildings.len()
    }

    pub fn n_ordinary(&self) -> usize {
        self.count(BuildingClass::Ordinary)
    }

    pub fn n_special(&self) -> usize {
        self.count(BuildingClass::Special)
    }

    fn count(&self, class: BuildingClass) -> usize {
        self.buildings.iter().filter(|b| b.class == class).count()
    }

    pub fn wind(&self) -> &RenewableProfile {
        &self.wind
    }

    pub fn pv(&self) -> &RenewableProfile {
        &self.pv
    }

    pub fn temperature(&self) -> &[f64] {
        &self.temperature
    }

    pub fn cost_factors(&self) -> &CostFactors {
        &self.cost
    }

    pub fn settings(&self) -> &ModelSettings {
        &self.settings
    }

    /// Scenario with renewable availability scaled (weather considerations).
    pub fn with_weather(&self, pv_factor: f64, wind_factor: f64) -> Self {
        let mut s = self.clone();
        s.pv = self.pv.scaled(pv_factor);
        s.wind = self.wind.scaled(wind_factor);
        s
    }

    /// Dimension of the flattened decision vector.
    pub fn decision_dimension(&self) -> usize {
        2 * self.n_buildings() + 3
    }

    /// Walks every (building, slot) flow of a dispatch.
    pub fn for_each_flow(&self, d: &DispatchDecision, mut sink: impl FnMut(usize, usize, &Flow)) {
        let n_valley = TimeSlot::all().filter(|s| s.is_valley()).count() as f64;
        let ac_scale = [
            self.ac_factor(d.setpoints[0]),
            self.ac_factor(d.setpoints[1]),
        ];
        for (b, load) in self.buildings.iter().enumerate() {
            let moved = d.shift_fraction * self.peak_schedulable[b];
            let valley_add = moved / n_valley;
            let ac = ac_scale[load.class.index()];
            for slot in TimeSlot::all() {
                let t = slot.index();
                let schedulable = if slot.is_valley() {
                    load.schedulable[t] + valley_add
                } else {
                    load.schedulable[t] * (1.0 - d.shift_fraction)
                };
                let switchable = load.switchable[t] * ac;
                let critical = load.critical[t];
                let demand = critical + schedulable + switchable;
                let pv = d.pv_alloc[b] * self.pv.upper[t];
                let wind = d.wind_alloc[b] * self.wind.upper[t];
                let offered = pv + wind;
                let (pv_used, wind_used) = if offered > demand && offered > 0.0 {
                    let k = demand / offered;
                    (pv * k, wind * k)
                } else {
                    (pv, wind)
                };
                let flow = Flow {
                    critical,
                    schedulable,
                    switchable,
                    pv_used,
                    wind_used,
                    grid: demand - pv_used - wind_used,
                };
                sink(b, t, &flow);
            }
        }
    }

    fn ac_factor(&self, setpoint: f64) -> f64 {
        (1.0 + self.settings.ac_sensitivity * (COMFORT_SETPOINT - setpoint)).max(0.0)
    }

    /// Per-slot totals over all buildings.
    pub fn slot_totals(&self, d: &DispatchDecision) -> SlotTotals {
        let mut tot = SlotTotals::zeros();
        self.for_each_flow(d, |_, t, f| {
            tot.grid[t] += f.grid;
            tot.pv_used[t] += f.pv_used;
            tot.wind_used[t] += f.wind_used;
            tot.load[t] += f.critical + f.schedulable + f.switchable;
        });
        tot
    }

    /// Power balance residual `P_Jh + P_Fl + P_Gf − (ΣP_Kd + P_Gj + ΣP_Kq)` at a slot.
    pub fn balance_residual(&self, d: &DispatchDecision, slot: TimeSlot) -> f64 {
        let mut r = 0.0;
        self.for_each_flow(d, |_, t, f| {
            if t == slot.index() {
                r += f.grid + f.wind_used + f.pv_used
                    - (f.schedulable + f.critical + f.switchable);
            }
        });
        r
    }

    /// Renewable dispatch bound violations `lower − used` (positive = violated),
    /// wind slots first, then PV.
    pub fn bound_violations(&self, totals: &SlotTotals) -> Vec<f64> {
        let mut out = Vec::with_capacity(2 * SLOTS_PER_DAY);
        for t in 0..SLOTS_PER_DAY {
            out.push(self.wind.lower[t] - totals.wind_used[t]);
        }
        for t in 0..SLOTS_PER_DAY {
            out.push(self.pv.lower[t] - totals.pv_used[t]);
        }
        out
    }

    /// Objectives without the feasibility check; used inside solvers that
    /// carry the constraints separately.
    pub fn objectives_unchecked(&self, d: &DispatchDecision, totals: &SlotTotals) -> ObjectiveVector {
        let days = self.settings.month_days;
        let f1 = self.equipment_from_totals(totals);
        let daily: f64 = TimeSlot::all()
            .map(|s| totals.grid[s.index()].max(0.0) * SLOT_HOURS * tariff_rate(s) * 1000.0)
            .sum();
        let f2 = daily * days;
        let n = self.n_buildings() as f64;
        let sd: f64 = self
            .buildings
            .iter()
            .map(|b| comfort_clamped(d.setpoints[b.class.index()]))
            .sum::<f64>()
            / n;
        ObjectiveVector {
            f1,
            f2,
            f3: 1.0 - sd,
        }
    }

    fn equipment_from_totals(&self, totals: &SlotTotals) -> f64 {
        let days = self.settings.month_days;
        let wind_sum: f64 = totals.wind_used.iter().sum::<f64>() * days;
        let wind_mean = totals.wind_used.iter().sum::<f64>() / SLOTS_PER_DAY as f64;
        let pv_max = totals.pv_used.iter().copied().fold(0.0, f64::max);
        let c = &self.cost;
        c.w1 * wind_sum + c.w2 * 1000.0 * wind_mean + c.l * pv_max
    }

    fn check_feasible(&self, totals: &SlotTotals) -> Result<()> {
        for t in 0..SLOTS_PER_DAY {
            let residual = totals.grid[t] + totals.wind_used[t] + totals.pv_used[t] - totals.load[t];
            if residual.abs() > self.settings.eps_bal {
                return Err(Error::Balance { slot: t, residual });
            }
        }
        let worst = self
            .bound_violations(totals)
            .into_iter()
            .fold(f64::NEG_INFINITY, f64::max);
        if worst > self.settings.eps_bal {
            return Err(Error::InvalidDecision(format!(
                "renewable dispatch below its lower bound by {worst} MW"
            )));
        }
        Ok(())
    }

    /// Monthly equipment cost of the renewable dispatch (¥).
    pub fn equipment_cost(&self, d: &DispatchDecision) -> Result<f64> {
        d.validate(self.n_buildings())?;
        let totals = self.slot_totals(d);
        let days = self.settings.month_days;
        let wind_month: Vec<f64> = totals.wind_used.iter().map(|p| p * days).collect();
        let wind_mean = totals.wind_used.iter().sum::<f64>() / SLOTS_PER_DAY as f64;
        let pv_max = totals.pv_used.iter().copied().fold(0.0, f64::max);
        equipment_cost_terms(&wind_month, wind_mean, pv_max, &self.cost)
    }

    /// Monthly grid purchase cost (¥).
    pub fn supply_cost(&self, d: &DispatchDecision) -> Result<f64> {
        d.validate(self.n_buildings())?;
        let totals = self.slot_totals(d);
        self.check_feasible(&totals)?;
        Ok(daily_supply_cost(&totals.grid)? * self.settings.month_days)
    }

    /// Checked three-objective evaluation.
    pub fn evaluate_objectives(&self, d: &DispatchDecision) -> Result<ObjectiveVector> {
        d.validate(self.n_buildings())?;
        let totals = self.slot_totals(d);
        self.check_feasible(&totals)?;
        Ok(self.objectives_unchecked(d, &totals))
    }
}

fn comfort_clamped(t: f64) -> f64 {
    1.0 - (t.clamp(SETPOINT_MIN, SETPOINT_MAX) - COMFORT_SETPOINT).abs() * 0.25
}

fn mean(s: &[f64]) -> f64 {
    s.iter().sum::<f64>() / s.len() as f64
}

/// Power flows of one building in one slot, MW.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Flow {
    pub critical: f64,
    pub schedulable: f64,
    pub switchable: f64,
    pub pv_used: f64,
    pub wind_used: f64,
    /// Grid exchange P_Jh (import positive).
    pub grid: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SlotTotals {
    pub grid: Vec<f64>,
    pub pv_used: Vec<f64>,
    pub wind_used: Vec<f64>,
    pub load: Vec<f64>,
}

impl SlotTotals {
    fn zeros() -> Self {
        SlotTotals {
            grid: vec![0.0; SLOTS_PER_DAY],
            pv_used: vec![0.0; SLOTS_PER_DAY],
            wind_used: vec![0.0; SLOTS_PER_DAY],
            load: vec![0.0; SLOTS_PER_DAY],
        }
    }
}

/// Allocation of the pooled renewables, class setpoints and load shift.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DispatchDecision {
    pub pv_alloc: Vec<f64>,
    pub wind_alloc: Vec<f64>,
    /// Indoor setpoints (°C) indexed by [`BuildingClass::index`].
    pub setpoints: [f64; 2],
    /// Share of peak-window schedulable load moved to the valley window.
    pub shift_fraction: f64,
}

impl DispatchDecision {
    pub fn uniform(n_buildings: usize) -> Self {
        let share = 1.0 / n_buildings as f64;
        DispatchDecision {
            pv_alloc: vec![share; n_buildings],
            wind_alloc: vec![share; n_buildings],
            setpoints: [COMFORT_SETPOINT; 2],
            shift_fraction: 0.0,
        }
    }

    pub fn validate(&self, n_buildings: usize) -> Result<()> {
        for (name, alloc) in [("pv", &self.pv_alloc), ("wind", &self.wind_alloc)] {
            if alloc.len() != n_buildings {
                return Err(Error::InvalidDecision(format!(
                    "{name} allocation has {} entries for {n_buildings} buildings",
                    alloc.len()
                )));
            }
            if alloc.iter().any(|&a| !(a >= 0.0)) {
                return Err(Error::InvalidDecision(format!("{name} allocation has a negative share")));
            }
            let sum: f64 = alloc.iter().sum();
            if (sum - 1.0).abs() > 1e-9 {
                return Err(Error::InvalidDecision(format!(
                    "{name} allocation sums to {sum}, expected 1"
                )));
            }
        }
        for &t in &self.setpoints {
            if !(SETPOINT_MIN..=SETPOINT_MAX).contains(&t) {
                return Err(Error::Domain {
                    what: "setpoint",
                    value: t,
                    lo: SETPOINT_MIN,
                    hi: SETPOINT_MAX,
                });
            }
        }
        if !(0.0..=1.0).contains(&self.shift_fraction) {
            return Err(Error::Domain {
                what: "shift fraction",
                value: self.shift_fraction,
                lo: 0.0,
                hi: 1.0,
            });
        }
        Ok(())
    }

    /// Decodes a flat solver vector: `n` raw PV weights, `n` raw wind weights,
    /// the two setpoints, the shift fraction. Raw weights are normalized to
    /// shares; an all-zero block decodes to the uniform split.
    pub fn from_vector(x: &[f64], n_buildings: usize) -> Result<Self> {
        if x.len() != 2 * n_buildings + 3 {
            return Err(Error::InvalidDecision(format!(
                "decision vector has {} entries, expected {}",
                x.len(),
                2 * n_buildings + 3
            )));
        }
        let shares = |w: &[f64]| -> Vec<f64> {
            let w: Vec<f64> = w.iter().map(|v| v.max(0.0)).collect();
            let s: f64 = w.iter().sum();
            if s > 0.0 {
                w.iter().map(|v| v / s).collect()
            } else {
                vec![1.0 / w.len() as f64; w.len()]
            }
        };
        let n = n_buildings;
        Ok(DispatchDecision {
            pv_alloc: shares(&x[..n]),
            wind_alloc: shares(&x[n..2 * n]),
            setpoints: [
                x[2 * n].clamp(SETPOINT_MIN, SETPOINT_MAX),
                x[2 * n + 1].clamp(SETPOINT_MIN, SETPOINT_MAX),
            ],
            shift_fraction: x[2 * n + 2].clamp(0.0, 1.0),
        })
    }

    pub fn to_vector(&self) -> Vec<f64> {
        let mut x = Vec::with_capacity(2 * self.pv_alloc.len() + 3);
        x.extend_from_slice(&self.pv_alloc);
        x.extend_from_slice(&self.wind_alloc);
        x.extend_from_slice(&self.setpoints);
        x.push(self.shift_fraction);
        x
    }
}

/// Equipment cost (¥), supply cost (¥) and comfort loss `1 − S_D`; all minimized.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ObjectiveVector {
    pub f1: f64,
    pub f2: f64,
    pub f3: f64,
}

impl ObjectiveVector {
    pub fn to_array(self) -> [f64; 3] {
        [self.f1, self.f2, self.f3]
    }

    pub fn comfort(self) -> f64 {
        1.0 - self.f3
    }
}

impl From<[f64; 3]> for ObjectiveVector {
    fn from(v: [f64; 3]) -> Self {
        ObjectiveVector {
            f1: v[0],
            f2: v[1],
            f3: v[2],
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn slot_at(h: u32, m: u32) -> TimeSlot {
        TimeSlot::from_clock(h * 60 + m).unwrap()
    }

    #[test]
    fn tariff_boundaries() {
        assert_eq!(tariff_rate(slot_at(3, 0)), 0.3);
        assert_eq!(tariff_rate(slot_at(12, 0)), 0.7);
        assert_eq!(tariff_rate(slot_at(23, 0)), 0.3);
        assert_eq!(tariff_rate(slot_at(22, 45)), 0.7);
        assert_eq!(tariff_rate(slot_at(6, 0)), 0.7);
        assert_eq!(tariff_rate(slot_at(5, 45)), 0.3);
        assert!(TimeSlot::all().all(|s| [0.3, 0.7].contains(&tariff_rate(s))));
        assert_eq!(TimeSlot::all().filter(|s| s.is_valley()).count(), 28);
    }

    #[test]
    fn slot_clock_roundtrip() {
        for s in TimeSlot::all() {
            assert_eq!(s.clock_minutes() / 15, s.index() as u32);
        }
        assert!(TimeSlot::new(96).is_err());
        assert!(TimeSlot::from_clock(7).is_err());
    }

    #[test]
    fn comfort_values() {
        assert_eq!(comfort(26.0).unwrap(), 1.0);
        assert_eq!(comfort(24.0).unwrap(), 0.5);
        assert_eq!(comfort(30.0).unwrap(), 0.0);
        assert!(matches!(comfort(21.9), Err(Error::Domain { .. })));
        assert!(comfort(30.1).is_err());
    }

    proptest! {
        #[test]
        fn comfort_symmetric(d in 0.0f64..=4.0) {
            prop_assert_eq!(comfort(26.0 + d).unwrap(), comfort(26.0 - d).unwrap());
        }

        #[test]
        fn integral_is_linear(a in prop::collection::vec(0.0f64..10.0, 96),
                              b in prop::collection::vec(0.0f64..10.0, 96)) {
            let sum: Vec<f64> = a.iter().zip(&b).map(|(x, y)| x + y).collect();
            let lhs = integrate_power(&sum).unwrap();
            let rhs = integrate_power(&a).unwrap() + integrate_power(&b).unwrap();
            prop_assert!((lhs - rhs).abs() <= 1e-9);
        }

        #[test]
        fn equipment_cost_linear_and_monotone(p0 in 0.0f64..5.0, wm in 0.0f64..5.0,
                                              pc in 0.0f64..5.0, bump in 0.0f64..1.0) {
            let f = CostFactors::default();
            let base = equipment_cost_terms(&[p0], wm, pc, &f).unwrap();
            let doubled = equipment_cost_terms(&[2.0 * p0], 2.0 * wm, 2.0 * pc, &f).unwrap();
            prop_assert!((doubled - 2.0 * base).abs() <= 1e-9 * base.max(1.0));
            prop_assert!(equipment_cost_terms(&[p0 + bump], wm, pc, &f).unwrap() >= base);
            prop_assert!(equipment_cost_terms(&[p0], wm + bump, pc, &f).unwrap() >= base);
            prop_assert!(equipment_cost_terms(&[p0], wm, pc + bump, &f).unwrap() >= base);
        }

        #[test]
        fn supply_cost_monotone_in_draw(draw in prop::collection::vec(0.0f64..3.0, 96),
                                        slot in 0usize..96, bump in 0.0f64..2.0) {
            let base = daily_supply_cost(&draw).unwrap();
            let mut more = draw.clone();
            more[slot] += bump;
            prop_assert!(daily_supply_cost(&more).unwrap() >= base);
        }
    }

    #[test]
    fn equipment_cost_reference_factors() {
        let f = CostFactors::default();
        let cost = equipment_cost_terms(&[1.0], 1.0, 1.0, &f).unwrap();
        assert!((cost - 7166.0).abs() <= 1e-12);
        assert_eq!(equipment_cost_terms(&[0.0; 96], 0.0, 0.0, &f).unwrap(), 0.0);
        assert!(matches!(
            equipment_cost_terms(&[-1.0], 0.0, 0.0, &f),
            Err(Error::NegativePower(_))
        ));
    }

    #[test]
    fn supply_cost_valley_hour() {
        assert_eq!(daily_supply_cost(&[0.0; 96]).unwrap(), 0.0);
        let mut draw = vec![0.0; 96];
        // 02:00-03:00
        for t in 8..12 {
            draw[t] = 1.0;
        }
        assert!((daily_supply_cost(&draw).unwrap() - 300.0).abs() < 1e-9);
        // same block at noon costs more
        let mut noon = vec![0.0; 96];
        for t in 48..52 {
            noon[t] = 1.0;
        }
        assert!(daily_supply_cost(&noon).unwrap() > daily_supply_cost(&draw).unwrap());
        assert!(daily_supply_cost(&[1.0; 95]).is_err());
    }

    #[test]
    fn integrate_constant_and_ramp() {
        assert_eq!(integrate_power(&[4.0; 96]).unwrap(), 96.0);
        assert_eq!(integrate_power(&[0.0; 96]).unwrap(), 0.0);
        assert!(integrate_power(&[0.0; 10]).is_err());

        // triangle 0 -> 1 -> 0 peaking at slot 48
        let ramp: Vec<f64> = (0..96).map(|t| 1.0 - (t as f64 - 48.0).abs() / 48.0).collect();
        // fine-grid Riemann sum of the piecewise-linear periodic interpolant
        let sub = 10_000;
        let mut riemann = 0.0;
        for t in 0..96 {
            let (a, b) = (ramp[t], ramp[(t + 1) % 96]);
            for k in 0..sub {
                let u = (k as f64 + 0.5) / sub as f64;
                riemann += (a + (b - a) * u) * SLOT_HOURS / sub as f64;
            }
        }
        assert!((integrate_power(&ramp).unwrap() - riemann).abs() < 1e-9);
    }

    fn flat_building(class: BuildingClass, critical: f64, sched: f64, switch: f64) -> BuildingLoad {
        BuildingLoad {
            class,
            critical: vec![critical; 96],
            schedulable: vec![sched; 96],
            switchable: vec![switch; 96],
        }
    }

    fn two_building_scenario() -> BuildingScenario {
        let pv: Vec<f64> = (0..96)
            .map(|t| if (24..72).contains(&t) { 0.4 } else { 0.0 })
            .collect();
        BuildingScenario::new(
            vec![
                flat_building(BuildingClass::Ordinary, 0.5, 0.2, 0.3),
                flat_building(BuildingClass::Special, 0.8, 0.1, 0.4),
            ],
            RenewableProfile::with_must_take(vec![0.3; 96], 0.0),
            RenewableProfile::with_must_take(pv, 0.0),
            vec![30.0; 96],
            CostFactors::default(),
            ModelSettings::default(),
        )
        .unwrap()
    }

    #[test]
    fn balance_is_zero_by_construction() {
        let sc = two_building_scenario();
        let d = DispatchDecision {
            pv_alloc: vec![0.9, 0.1],
            wind_alloc: vec![0.2, 0.8],
            setpoints: [27.0, 25.0],
            shift_fraction: 0.4,
        };
        for s in TimeSlot::all() {
            assert!(sc.balance_residual(&d, s).abs() < 1e-12);
        }
    }

    #[test]
    fn balance_residual_matches_resummation() {
        let sc = two_building_scenario();
        let d = DispatchDecision {
            pv_alloc: vec![0.35, 0.65],
            wind_alloc: vec![0.5, 0.5],
            setpoints: [28.0, 26.0],
            shift_fraction: 0.7,
        };
        let slot = TimeSlot::new(40).unwrap();
        let mut flows = Vec::new();
        sc.for_each_flow(&d, |_, t, f| {
            if t == 40 {
                flows.push(*f);
            }
        });
        let supply: f64 = flows.iter().map(|f| f.grid + f.wind_used + f.pv_used).sum();
        let demand: f64 = flows.iter().map(|f| f.schedulable).sum::<f64>()
            + flows.iter().map(|f| f.critical).sum::<f64>()
            + flows.iter().map(|f| f.switchable).sum::<f64>();
        assert!((sc.balance_residual(&d, slot) - (supply - demand)).abs() < 1e-12);
    }

    #[test]
    fn excess_generation_shows_in_residual() {
        let f = Flow {
            critical: 1.0,
            schedulable: 0.0,
            switchable: 0.0,
            pv_used: 1.0,
            wind_used: 1.0,
            grid: 0.0,
        };
        let residual = f.grid + f.wind_used + f.pv_used - (f.schedulable + f.critical + f.switchable);
        assert_eq!(residual, 1.0);
    }

    /// Straight-line recomputation of the two-building instance.
    #[test]
    fn objectives_match_spreadsheet_oracle() {
        let sc = two_building_scenario();
        let d = DispatchDecision {
            pv_alloc: vec![0.75, 0.25],
            wind_alloc: vec![0.4, 0.6],
            setpoints: [28.0, 24.0],
            shift_fraction: 0.5,
        };
        let got = sc.evaluate_objectives(&d).unwrap();

        let crit = [0.5, 0.8];
        let sched = [0.2, 0.1];
        let switch = [0.3, 0.4];
        let ac = [1.0 + 0.08 * (26.0 - 28.0), 1.0 + 0.08 * (26.0 - 24.0)];
        let mut wind_used = vec![0.0; 96];
        let mut pv_used = vec![0.0; 96];
        let mut grid = vec![0.0; 96];
        for b in 0..2 {
            let moved = 0.5 * sched[b] * 68.0;
            for t in 0..96 {
                let valley = t >= 92 || t < 24;
                let s = if valley { sched[b] + moved / 28.0 } else { sched[b] * 0.5 };
                let demand = crit[b] + s + switch[b] * ac[b];
                let pv_avail = if (24..72).contains(&t) { 0.4 } else { 0.0 };
                let p = d.pv_alloc[b] * pv_avail;
                let w = d.wind_alloc[b] * 0.3;
                let (pu, wu) = if p + w > demand {
                    (p * demand / (p + w), w * demand / (p + w))
                } else {
                    (p, w)
                };
                pv_used[t] += pu;
                wind_used[t] += wu;
                grid[t] += demand - pu - wu;
            }
        }
        let f1 = 2070.0 * 31.0 * wind_used.iter().sum::<f64>()
            + 96.0 * wind_used.iter().sum::<f64>() / 96.0
            + 5000.0 * pv_used.iter().cloned().fold(0.0, f64::max);
        let mut daily = 0.0;
        for t in 0..96 {
            let rate = if t >= 92 || t < 24 { 0.3 } else { 0.7 };
            daily += grid[t] * 0.25 * rate * 1000.0;
        }
        let f2 = daily * 31.0;
        let f3 = 1.0 - (0.5 + 0.5) / 2.0;
        assert!((got.f1 - f1).abs() <= 1e-9 * f1);
        assert!((got.f2 - f2).abs() <= 1e-9 * f2);
        assert!((got.f3 - f3).abs() <= 1e-12);

        assert_eq!(sc.evaluate_objectives(&d).unwrap(), got);
        assert!((sc.equipment_cost(&d).unwrap() - got.f1).abs() <= 1e-9 * f1);
        assert!((sc.supply_cost(&d).unwrap() - got.f2).abs() <= 1e-9 * f2);
    }

    #[test]
    fn setpoint_26_has_no_comfort_loss() {
        let sc = two_building_scenario();
        let d = DispatchDecision::uniform(2);
        assert_eq!(sc.evaluate_objectives(&d).unwrap().f3, 0.0);
    }

    #[test]
    fn shifting_to_valley_never_costs_more() {
        let sc = two_building_scenario();
        let mut d = DispatchDecision::uniform(2);
        let before = sc.supply_cost(&d).unwrap();
        d.shift_fraction = 1.0;
        assert!(sc.supply_cost(&d).unwrap() <= before);
    }

    #[test]
    fn invalid_decisions_rejected() {
        let sc = two_building_scenario();
        let mut d = DispatchDecision::uniform(2);
        d.pv_alloc = vec![0.7, 0.7];
        assert!(sc.evaluate_objectives(&d).is_err());
        let mut d = DispatchDecision::uniform(2);
        d.setpoints[0] = 31.0;
        assert!(sc.evaluate_objectives(&d).is_err());
        assert!(DispatchDecision::from_vector(&[0.0; 6], 2).is_err());
    }

    #[test]
    fn lower_bound_violation_is_flagged() {
        let pv = vec![0.0; 96];
        let sc = BuildingScenario::new(
            vec![
                flat_building(BuildingClass::Ordinary, 0.1, 0.0, 0.0),
                flat_building(BuildingClass::Special, 0.1, 0.0, 0.0),
            ],
            RenewableProfile::with_must_take(vec![1.0; 96], 0.5),
            RenewableProfile::with_must_take(pv, 0.0),
            vec![30.0; 96],
            CostFactors::default(),
            ModelSettings::default(),
        )
        .unwrap();
        // all wind to one building: 0.1 MW absorbed < 0.5 MW must-take
        let mut d = DispatchDecision::uniform(2);
        d.wind_alloc = vec![1.0, 0.0];
        assert!(matches!(sc.evaluate_objectives(&d), Err(Error::InvalidDecision(_))));
    }

    #[test]
    fn decision_vector_roundtrip() {
        let d = DispatchDecision {
            pv_alloc: vec![0.25, 0.75],
            wind_alloc: vec![0.5, 0.5],
            setpoints: [27.0, 29.0],
            shift_fraction: 0.3,
        };
        let back = DispatchDecision::from_vector(&d.to_vector(), 2).unwrap();
        assert_eq!(back, d);
        let zeros = DispatchDecision::from_vector(&[0.0, 0.0, 0.0, 0.0, 26.0, 26.0, 0.0], 2).unwrap();
        assert_eq!(zeros.pv_alloc, vec![0.5, 0.5]);
    }

    #[test]
    fn scenario_rejects_bad_profiles() {
        let bad = BuildingScenario::new(
            vec![flat_building(BuildingClass::Ordinary, -1.0, 0.0, 0.0)],
            RenewableProfile::with_must_take(vec![0.0; 96], 0.0),
            RenewableProfile::with_must_take(vec![0.0; 96], 0.0),
            vec![30.0; 96],
            CostFactors::default(),
            ModelSettings::default(),
        );
        assert!(bad.is_err());
        let short = BuildingScenario::new(
            vec![flat_building(BuildingClass::Ordinary, 1.0, 0.0, 0.0)],
            RenewableProfile::with_must_take(vec![0.0; 95], 0.0),
            RenewableProfile::with_must_take(vec![0.0; 96], 0.0),
            vec![30.0; 96],
            CostFactors::default(),
            ModelSettings::default(),
        );
        assert!(matches!(short, Err(Error::SeriesLength { .. })));
    }
}
