//! Scenario files and CSV reports.

use std::fs;
use std::path::{Path, PathBuf};

use inbi_core::auam::AuamOutput;
use inbi_core::aws::AwsOutput;
use inbi_core::model::{
    BuildingClass, BuildingLoad, BuildingScenario, CostFactors, ModelSettings, RenewableProfile, SLOTS_PER_DAY,
};
use inbi_core::pipeline::RunResult;
use inbi_core::trr::TrrSeries;
use inbi_core::FrontierSet;
use serde::{Deserialize, Serialize};

use crate::error::{HarnessError, Result};

pub const MANIFEST_NAME: &str = "scenario.toml";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ManifestEntry {
    pub file: String,
    pub class: BuildingClass,
}

/// Scenario manifest. Pooled wind and PV are written split evenly over the
/// special buildings and summed back on load.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScenarioManifest {
    pub n_ordinary: usize,
    pub n_special: usize,
    pub must_take: f64,
    pub cost: CostFactors,
    #[serde(default)]
    pub settings: ModelSettings,
    pub buildings: Vec<ManifestEntry>,
}

#[derive(Debug, Serialize, Deserialize)]
struct SlotRow {
    slot: usize,
    load_critical: f64,
    load_sched: f64,
    load_switch: f64,
    wind: f64,
    pv: f64,
    temperature: f64,
}

fn create_dir(dir: &Path) -> Result<()> {
    fs::create_dir_all(dir).map_err(|e| HarnessError::io(dir, e))
}

fn csv_writer(path: &Path) -> Result<csv::Writer<fs::File>> {
    if let Some(parent) = path.parent().filter(|p| !p.as_os_str().is_empty()) {
        create_dir(parent)?;
    }
    let file = fs::File::create(path).map_err(|e| HarnessError::io(path, e))?;
    Ok(csv::Writer::from_writer(file))
}

fn finish(mut w: csv::Writer<fs::File>, path: &Path) -> Result<()> {
    w.flush().map_err(|e| HarnessError::io(path, e))
}

/// Writes one CSV per building plus the manifest; returns the manifest path.
pub fn write_scenario(dir: &Path, scenario: &BuildingScenario, must_take: f64) -> Result<PathBuf> {
    create_dir(dir)?;
    let n_special = scenario.n_special();
    let mut entries = Vec::with_capacity(scenario.n_buildings());
    for (b, load) in scenario.buildings().iter().enumerate() {
        let file = format!("building_{b:02}.csv");
        let path = dir.join(&file);
        let mut w = csv_writer(&path)?;
        let share = if load.class == BuildingClass::Special {
            1.0 / n_special as f64
        } else {
            0.0
        };
        for t in 0..SLOTS_PER_DAY {
            w.serialize(SlotRow {
                slot: t,
                load_critical: load.critical[t],
                load_sched: load.schedulable[t],
                load_switch: load.switchable[t],
                wind: scenario.wind().upper[t] * share,
                pv: scenario.pv().upper[t] * share,
                temperature: scenario.temperature()[t],
            })?;
        }
        finish(w, &path)?;
        entries.push(ManifestEntry { file, class: load.class });
    }
    let manifest = ScenarioManifest {
        n_ordinary: scenario.n_ordinary(),
        n_special,
        must_take,
        cost: *scenario.cost_factors(),
        settings: *scenario.settings(),
        buildings: entries,
    };
    let path = dir.join(MANIFEST_NAME);
    let text = toml::to_string_pretty(&manifest)?;
    fs::write(&path, text).map_err(|e| HarnessError::io(&path, e))?;
    Ok(path)
}

pub fn read_scenario(manifest_path: &Path) -> Result<BuildingScenario> {
    let text = fs::read_to_string(manifest_path).map_err(|e| HarnessError::io(manifest_path, e))?;
    let manifest: ScenarioManifest = toml::from_str(&text)?;
    let count = |c| manifest.buildings.iter().filter(|e| e.class == c).count();
    if count(BuildingClass::Ordinary) != manifest.n_ordinary || count(BuildingClass::Special) != manifest.n_special {
        return Err(HarnessError::Usage(format!(
            "{}: roster split does not match the building list",
            manifest_path.display()
        )));
    }
    let dir = manifest_path.parent().unwrap_or(Path::new("."));
    let mut wind = vec![0.0; SLOTS_PER_DAY];
    let mut pv = vec![0.0; SLOTS_PER_DAY];
    let mut temperature = Vec::new();
    let mut buildings = Vec::with_capacity(manifest.buildings.len());
    for entry in &manifest.buildings {
        let path = dir.join(&entry.file);
        let mut r = csv::Reader::from_path(&path)?;
        let rows: Vec<SlotRow> = r.deserialize().collect::<std::result::Result<_, _>>()?;
        if rows.len() != SLOTS_PER_DAY || rows.iter().enumerate().any(|(t, row)| row.slot != t) {
            return Err(HarnessError::Usage(format!(
                "{}: expected slots 0..{SLOTS_PER_DAY} in order",
                path.display()
            )));
        }
        for (t, row) in rows.iter().enumerate() {
            wind[t] += row.wind;
            pv[t] += row.pv;
        }
        if temperature.is_empty() {
            temperature = rows.iter().map(|r| r.temperature).collect();
        }
        buildings.push(BuildingLoad {
            class: entry.class,
            critical: rows.iter().map(|r| r.load_critical).collect(),
            schedulable: rows.iter().map(|r| r.load_sched).collect(),
            switchable: rows.iter().map(|r| r.load_switch).collect(),
        });
    }
    Ok(BuildingScenario::new(
        buildings,
        RenewableProfile::with_must_take(wind, manifest.must_take),
        RenewableProfile::with_must_take(pv, manifest.must_take),
        temperature,
        manifest.cost,
        manifest.settings,
    )?)
}

#[derive(Serialize)]
struct FrontierRow<'a> {
    idx: usize,
    f1: f64,
    f2: f64,
    f3: f64,
    s1: f64,
    s2: f64,
    s3: f64,
    source: &'a str,
}

pub fn write_frontier(path: &Path, frontier: &FrontierSet) -> Result<()> {
    let mut w = csv_writer(path)?;
    for (idx, p) in frontier.points.iter().enumerate() {
        let f = |k: usize| p.objectives.get(k).copied().unwrap_or(f64::NAN);
        let s = |k: usize| p.normalized.get(k).copied().unwrap_or(f64::NAN);
        w.serialize(FrontierRow {
            idx,
            f1: f(0),
            f2: f(1),
            f3: f(2),
            s1: s(0),
            s2: s(1),
            s3: s(2),
            source: p.source.as_str(),
        })?;
    }
    finish(w, path)
}

#[derive(Serialize)]
struct AwsRow<'a> {
    plane: &'a str,
    segment: usize,
    lambda: f64,
    accepted: bool,
    f1: Option<f64>,
    f2: Option<f64>,
    f3: Option<f64>,
}

pub fn write_aws_report(path: &Path, aws: &AwsOutput) -> Result<()> {
    let mut w = csv_writer(path)?;
    for row in &aws.report {
        let f = |k: usize| row.objectives.as_ref().and_then(|o| o.get(k).copied());
        w.serialize(AwsRow {
            plane: row.plane.name(),
            segment: row.segment,
            lambda: row.lambda,
            accepted: row.accepted,
            f1: f(0),
            f2: f(1),
            f3: f(2),
        })?;
    }
    finish(w, path)
}

#[derive(Serialize)]
struct TraceCsvRow {
    theta: usize,
    sbar_x: f64,
    sbar_y: f64,
    sbar_z: f64,
    matched_idx: Option<usize>,
    distance: Option<f64>,
}

pub fn write_auam_trace(path: &Path, auam: &AuamOutput) -> Result<()> {
    let mut w = csv_writer(path)?;
    for row in &auam.selection.trace {
        w.serialize(TraceCsvRow {
            theta: row.theta,
            sbar_x: row.sbar[0],
            sbar_y: row.sbar[1],
            sbar_z: row.sbar[2],
            matched_idx: row.matched,
            distance: row.distance,
        })?;
    }
    finish(w, path)
}

#[derive(Serialize)]
struct CompromiseRow {
    idx: usize,
    f1: f64,
    f2: f64,
    comfort: f64,
    #[serde(rename = "Th")]
    th: f64,
    chosen: bool,
}

/// One row per selected point; `idx` indexes the run's frontier.
pub fn write_compromise(path: &Path, run: &RunResult) -> Result<()> {
    let mut w = csv_writer(path)?;
    for (&idx, &th) in run.selected.iter().zip(&run.th) {
        let o = &run.frontier.points[idx].objectives;
        w.serialize(CompromiseRow {
            idx,
            f1: o[0],
            f2: o[1],
            comfort: 1.0 - o.get(2).copied().unwrap_or(0.0),
            th,
            chosen: idx == run.compromise,
        })?;
    }
    finish(w, path)
}

#[derive(Serialize)]
struct TrrRow {
    building: usize,
    slot: usize,
    alpha: Option<f64>,
    beta: Option<f64>,
}

pub fn write_trr_series(path: &Path, alpha: &TrrSeries, beta: &TrrSeries) -> Result<()> {
    let mut w = csv_writer(path)?;
    for (b, (a_row, b_row)) in alpha.values.iter().zip(&beta.values).enumerate() {
        for (slot, (a, bt)) in a_row.iter().zip(b_row).enumerate() {
            w.serialize(TrrRow {
                building: b,
                slot,
                alpha: *a,
                beta: *bt,
            })?;
        }
    }
    finish(w, path)
}

/// Any serializable rows to CSV, headers from the field names.
pub fn write_rows<T: Serialize>(path: &Path, rows: &[T]) -> Result<()> {
    let mut w = csv_writer(path)?;
    for r in rows {
        w.serialize(r)?;
    }
    finish(w, path)
}

pub fn write_text(path: &Path, text: &str) -> Result<()> {
    if let Some(parent) = path.parent().filter(|p| !p.as_os_str().is_empty()) {
        create_dir(parent)?;
    }
    fs::write(path, text).map_err(|e| HarnessError::io(path, e))
}
