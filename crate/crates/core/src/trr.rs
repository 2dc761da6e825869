//! Transfer-retention ratio (TRR) of each building's PV and wind share, its
//! pairwise dispersion and the dispersion penalty added to scalar subproblems.
//!
//! The penalty compares buildings slot by slot: at every slot the α (and β)
//! values of all buildings form one observation vector and the coupling
//! matrix is `n_buildings × n_buildings`. [`trr_dispersion`] itself is
//! agnostic to what an observation is, so a single building's 96-slot
//! series can be passed with a 96 × 96 matrix instead.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{BuildingScenario, DispatchDecision, SLOTS_PER_DAY};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum TrrKind {
    /// α, the photovoltaic ratio.
    Pv,
    /// β, the wind ratio.
    Wind,
}

/// Symmetric non-negative coupling matrix with zero diagonal.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Coupling(Vec<Vec<f64>>);

impl Coupling {
    pub fn new(rows: Vec<Vec<f64>>) -> Result<Self> {
        let n = rows.len();
        for (i, row) in rows.iter().enumerate() {
            if row.len() != n {
                return Err(Error::Config(format!("coupling row {i} has {} entries, expected {n}", row.len())));
            }
            if row[i] != 0.0 {
                return Err(Error::Config(format!("coupling diagonal entry {i} is non-zero")));
            }
            for (j, &k) in row.iter().enumerate() {
                if !(k >= 0.0) || k != rows[j][i] {
                    return Err(Error::Config(format!(
                        "coupling must be symmetric and non-negative (entry {i},{j})"
                    )));
                }
            }
        }
        Ok(Coupling(rows))
    }

    /// Ones off the diagonal.
    pub fn all_ones(n: usize) -> Self {
        Coupling(
            (0..n)
                .map(|i| (0..n).map(|j| if i == j { 0.0 } else { 1.0 }).collect())
                .collect(),
        )
    }

    pub fn zeros(n: usize) -> Self {
        Coupling(vec![vec![0.0; n]; n])
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.0[i][j]
    }

    /// Same matrix with rows and columns reordered by `perm`.
    pub fn permuted(&self, perm: &[usize]) -> Self {
        Coupling(
            perm.iter()
                .map(|&i| perm.iter().map(|&j| self.0[i][j]).collect())
                .collect(),
        )
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct TrrParams {
    /// Coordination parameter ρ_b.
    pub rho_b: f64,
    /// Combined-effect coefficient γ_l.
    pub gamma_l: f64,
    /// K_α; all-ones off the diagonal when absent.
    pub k_alpha: Option<Coupling>,
    /// K_β; all-ones off the diagonal when absent.
    pub k_beta: Option<Coupling>,
    /// Generation floor, MW.
    pub epsilon_gen: f64,
    /// Penalty weight λ_trr.
    pub lambda: f64,
}

impl Default for TrrParams {
    fn default() -> Self {
        TrrParams {
            rho_b: 1.0,
            gamma_l: 0.1,
            k_alpha: None,
            k_beta: None,
            epsilon_gen: 1e-6,
            lambda: 1.0,
        }
    }
}

impl TrrParams {
    pub fn validate(&self) -> Result<()> {
        if !(self.rho_b > 0.0) {
            return Err(Error::Config(format!("rho_b must be positive, got {}", self.rho_b)));
        }
        if !(self.gamma_l >= 0.0) {
            return Err(Error::Config(format!("gamma_l must be non-negative, got {}", self.gamma_l)));
        }
        if !(self.epsilon_gen > 0.0) {
            return Err(Error::Config("epsilon_gen must be positive".into()));
        }
        if !(self.lambda >= 0.0) {
            return Err(Error::Config("lambda_trr must be non-negative".into()));
        }
        for k in [&self.k_alpha, &self.k_beta].into_iter().flatten() {
            Coupling::new(k.0.clone())?;
        }
        Ok(())
    }

    fn coupling(&self, kind: TrrKind, n: usize) -> Result<Coupling> {
        let k = match kind {
            TrrKind::Pv => &self.k_alpha,
            TrrKind::Wind => &self.k_beta,
        };
        match k {
            Some(k) if k.len() == n => Ok(k.clone()),
            Some(k) => Err(Error::Config(format!(
                "coupling matrix is {0}x{0} but there are {n} buildings",
                k.len()
            ))),
            None => Ok(Coupling::all_ones(n)),
        }
    }
}

/// One building's usage and the pooled totals at one observation, MW.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TrrInputs {
    pub pv_usage: f64,
    pub wind_usage: f64,
    pub pv_total: f64,
    pub wind_total: f64,
    /// Σ of squared PV totals over the day.
    pub pv_square_sum: f64,
    /// Σ of squared wind totals over the day.
    pub wind_square_sum: f64,
}

impl TrrInputs {
    pub fn scaled(&self, k: f64) -> Self {
        TrrInputs {
            pv_usage: self.pv_usage * k,
            wind_usage: self.wind_usage * k,
            pv_total: self.pv_total * k,
            wind_total: self.wind_total * k,
            pv_square_sum: self.pv_square_sum * k * k,
            wind_square_sum: self.wind_square_sum * k * k,
        }
    }
}

/// α (PV) or β (wind) for one building at one observation.
pub fn trr_ratio(kind: TrrKind, x: &TrrInputs, params: &TrrParams) -> Result<f64> {
    let (usage, total, square_sum, other_usage, other_total) = match kind {
        TrrKind::Pv => (x.pv_usage, x.pv_total, x.pv_square_sum, x.wind_usage, x.wind_total),
        TrrKind::Wind => (x.wind_usage, x.wind_total, x.wind_square_sum, x.pv_usage, x.pv_total),
    };
    if !(total >= params.epsilon_gen) {
        return Err(Error::GenerationFloor {
            total,
            floor: params.epsilon_gen,
        });
    }
    if !(usage > 0.0) {
        return Err(Error::Domain {
            what: "renewable usage",
            value: usage,
            lo: 0.0,
            hi: total,
        });
    }
    let share = total * usage / square_sum;
    if !(share > 0.0 && share <= 1.0) {
        return Err(Error::Domain {
            what: "TRR log argument",
            value: share,
            lo: 0.0,
            hi: 1.0,
        });
    }
    let coupled = usage + params.gamma_l * (other_total - other_usage);
    Ok(params.rho_b * coupled / total * -share.ln())
}

/// `Σ_{i<j} K[i][j]·|v_i − v_j|` over present observations.
pub fn trr_dispersion(values: &[Option<f64>], k: &Coupling) -> Result<f64> {
    if k.len() != values.len() {
        return Err(Error::Config(format!(
            "coupling matrix is {0}x{0} for {1} observations",
            k.len(),
            values.len()
        )));
    }
    let present = values.iter().filter(|v| v.is_some()).count();
    if present < 2 {
        return Err(Error::UndefinedDispersion(present));
    }
    let mut total = 0.0;
    for i in 0..values.len() {
        let Some(vi) = values[i] else { continue };
        for j in i + 1..values.len() {
            if let Some(vj) = values[j] {
                total += k.get(i, j) * (vi - vj).abs();
            }
        }
    }
    Ok(total)
}

/// [`trr_dispersion`] with every coupling equal to one, in `O(n log n)`:
/// over sorted present values `v_(0) ≤ … ≤ v_(m−1)` the pairwise sum is
/// `Σ_k v_(k)·(2k − m + 1)`.
pub fn uniform_dispersion(values: &[Option<f64>]) -> Result<f64> {
    let mut present: Vec<f64> = values.iter().flatten().copied().collect();
    let m = present.len();
    if m < 2 {
        return Err(Error::UndefinedDispersion(m));
    }
    present.sort_by(f64::total_cmp);
    Ok(present
        .iter()
        .enumerate()
        .map(|(k, v)| v * (2.0 * k as f64 - m as f64 + 1.0))
        .sum())
}

/// Per-building, per-slot α or β values; `None` where generation is below
/// the floor.
#[derive(Debug, Clone, PartialEq)]
pub struct TrrSeries {
    pub kind: TrrKind,
    /// `values[building][slot]`.
    pub values: Vec<Vec<Option<f64>>>,
}

impl TrrSeries {
    /// Observation vector across buildings at one slot.
    pub fn at_slot(&self, slot: usize) -> Vec<Option<f64>> {
        self.values.iter().map(|b| b[slot]).collect()
    }
}

/// α and β series of a dispatch. Usage is the renewable each building
/// actually absorbs, floored at `epsilon_gen` so a building with no share
/// gets a large but finite ratio.
pub fn trr_series(
    scenario: &BuildingScenario,
    decision: &DispatchDecision,
    params: &TrrParams,
) -> Result<(TrrSeries, TrrSeries)> {
    let n = scenario.n_buildings();
    let mut pv_used = vec![vec![0.0; SLOTS_PER_DAY]; n];
    let mut wind_used = vec![vec![0.0; SLOTS_PER_DAY]; n];
    scenario.for_each_flow(decision, |b, t, f| {
        pv_used[b][t] = f.pv_used;
        wind_used[b][t] = f.wind_used;
    });
    let pv_total = &scenario.pv().upper;
    let wind_total = &scenario.wind().upper;
    let pv_square_sum: f64 = pv_total.iter().map(|p| p * p).sum();
    let wind_square_sum: f64 = wind_total.iter().map(|p| p * p).sum();
    let floor = params.epsilon_gen;

    let mut alpha = vec![vec![None; SLOTS_PER_DAY]; n];
    let mut beta = vec![vec![None; SLOTS_PER_DAY]; n];
    for b in 0..n {
        for t in 0..SLOTS_PER_DAY {
            let x = TrrInputs {
                pv_usage: pv_used[b][t].max(floor),
                wind_usage: wind_used[b][t].max(floor),
                pv_total: pv_total[t],
                wind_total: wind_total[t],
                pv_square_sum,
                wind_square_sum,
            };
            if pv_total[t] >= floor {
                alpha[b][t] = Some(trr_ratio(TrrKind::Pv, &x, params)?);
            }
            if wind_total[t] >= floor {
                beta[b][t] = Some(trr_ratio(TrrKind::Wind, &x, params)?);
            }
        }
    }
    Ok((
        TrrSeries {
            kind: TrrKind::Pv,
            values: alpha,
        },
        TrrSeries {
            kind: TrrKind::Wind,
            values: beta,
        },
    ))
}

/// Sum over slots of the across-building dispersion; slots with fewer than
/// two present buildings contribute nothing.
pub fn series_dispersion(series: &TrrSeries, k: &Coupling) -> Result<f64> {
    sum_over_slots(series, |v| trr_dispersion(v, k))
}

fn sum_over_slots(series: &TrrSeries, dispersion: impl Fn(&[Option<f64>]) -> Result<f64>) -> Result<f64> {
    let mut total = 0.0;
    for t in 0..SLOTS_PER_DAY {
        match dispersion(&series.at_slot(t)) {
            Ok(d) => total += d,
            Err(Error::UndefinedDispersion(_)) => {}
            Err(e) => return Err(e),
        }
    }
    Ok(total)
}

/// `λ_trr · (dispersion_α + dispersion_β)`.
pub fn trr_penalty(
    scenario: &BuildingScenario,
    decision: &DispatchDecision,
    params: &TrrParams,
    lambda: f64,
) -> Result<f64> {
    if lambda == 0.0 {
        return Ok(0.0);
    }
    let n = scenario.n_buildings();
    let (alpha, beta) = trr_series(scenario, decision, params)?;
    let dispersion = |series: &TrrSeries, k: &Option<Coupling>, kind| match k {
        None => sum_over_slots(series, uniform_dispersion),
        Some(_) => series_dispersion(series, &params.coupling(kind, n)?),
    };
    let d_alpha = dispersion(&alpha, &params.k_alpha, TrrKind::Pv)?;
    let d_beta = dispersion(&beta, &params.k_beta, TrrKind::Wind)?;
    Ok(lambda * (d_alpha + d_beta))
}
