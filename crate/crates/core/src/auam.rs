//! Adjust-uniform-axes (AUAM) selection: a uniform lattice on the plane
//! through the normalized anchors, and for each lattice point the frontier
//! point whose projection along a positive axis lands nearest to it.

use nalgebra::{Matrix2, Matrix3, SymmetricEigen, Vector3};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::frontier::distance;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct AuamConfig {
    /// Axis direction; normalized internally and required strictly positive.
    pub direction: [f64; 3],
    /// Target number of uniform points per candidate.
    pub uniform_factor: f64,
    pub max_uniform: usize,
}

impl Default for AuamConfig {
    fn default() -> Self {
        AuamConfig {
            direction: [1.0, 1.0, 1.0],
            uniform_factor: 2.0,
            max_uniform: 300,
        }
    }
}

/// Plane `A·x + B·y + C·z = 1` through the normalized anchors, with the
/// expanded bound box `[−ω_min, 1 + ω_min]³`.
#[derive(Debug, Clone, PartialEq)]
pub struct InsinuationSurface {
    pub coefficients: [f64; 3],
    pub anchors: [[f64; 3]; 3],
    pub expansion: f64,
}

impl InsinuationSurface {
    pub fn lower(&self) -> f64 {
        -self.expansion
    }

    pub fn upper(&self) -> f64 {
        1.0 + self.expansion
    }

    pub fn residual(&self, p: &[f64; 3]) -> f64 {
        dot(&self.coefficients, p) - 1.0
    }

    pub fn in_box(&self, p: &[f64; 3]) -> bool {
        const SLACK: f64 = 1e-12;
        p.iter().all(|v| *v >= self.lower() - SLACK && *v <= self.upper() + SLACK)
    }
}

fn dot(a: &[f64; 3], b: &[f64; 3]) -> f64 {
    a[0] * b[0] + a[1] * b[1] + a[2] * b[2]
}

pub fn fit_surface(anchors: &[[f64; 3]; 3], expansion: f64) -> Result<InsinuationSurface> {
    let [sa, sb, sc] = anchors;
    let e1: [f64; 3] = std::array::from_fn(|k| sb[k] - sa[k]);
    let e2: [f64; 3] = std::array::from_fn(|k| sc[k] - sa[k]);
    let cross = [
        e1[1] * e2[2] - e1[2] * e2[1],
        e1[2] * e2[0] - e1[0] * e2[2],
        e1[0] * e2[1] - e1[1] * e2[0],
    ];
    if dot(&cross, &cross).sqrt() < 1e-9 {
        return Err(Error::Singular("anchors are collinear or coincide"));
    }
    let m = Matrix3::from_fn(|r, c| anchors[r][c]);
    let coeffs = m
        .lu()
        .solve(&Vector3::new(1.0, 1.0, 1.0))
        .ok_or(Error::Singular("anchor plane"))?;
    let coefficients = [coeffs[0], coeffs[1], coeffs[2]];
    if coefficients.iter().any(|c| !c.is_finite()) {
        return Err(Error::Singular("anchor plane"));
    }
    if coefficients[2].abs() < 1e-12 {
        return Err(Error::Singular("anchor plane parallel to the third axis"));
    }
    let surface = InsinuationSurface {
        coefficients,
        anchors: *anchors,
        expansion,
    };
    if anchors.iter().any(|a| surface.residual(a).abs() > 1e-9) {
        return Err(Error::Singular("anchor plane"));
    }
    Ok(surface)
}

/// `ω_min = min_plane 1/ω_plane`.
pub fn expansion_from_omegas(omegas: &[usize]) -> f64 {
    omegas.iter().map(|&w| 1.0 / w.max(1) as f64).fold(f64::INFINITY, f64::min)
}

/// Lattice `S_A + (i/g)(S_B − S_A) + (j/g)(S_C − S_A)` over all integers
/// `i, j` whose point lies in the expanded box, `j` outer and `i` inner.
pub fn uniform_points(surface: &InsinuationSurface, grid: usize) -> Vec<[f64; 3]> {
    let g = grid.max(1) as f64;
    let [sa, sb, sc] = surface.anchors;
    let e1: [f64; 3] = std::array::from_fn(|k| sb[k] - sa[k]);
    let e2: [f64; 3] = std::array::from_fn(|k| sc[k] - sa[k]);
    let gram = Matrix2::new(dot(&e1, &e1), dot(&e1, &e2), dot(&e1, &e2), dot(&e2, &e2));
    let sigma_min = SymmetricEigen::new(gram).eigenvalues.min().max(0.0).sqrt();
    if sigma_min < 1e-12 {
        return Vec::new();
    }
    let reach = 3f64.sqrt() * (surface.upper() - surface.lower());
    let r = (g * reach / sigma_min).ceil() as i64 + 1;
    let mut out = Vec::new();
    for j in -r..=r {
        for i in -r..=r {
            let (a, b) = (i as f64 / g, j as f64 / g);
            let p: [f64; 3] = std::array::from_fn(|k| sa[k] + a * e1[k] + b * e2[k]);
            if surface.in_box(&p) {
                out.push(p);
            }
        }
    }
    out
}

/// Lattice resolution whose point count is closest to
/// `uniform_factor × n_candidates`, never above `max_uniform` unless even
/// the coarsest grid exceeds it.
pub fn grid_for(surface: &InsinuationSurface, n_candidates: usize, cfg: &AuamConfig) -> usize {
    let target = ((cfg.uniform_factor * n_candidates as f64).round() as usize).min(cfg.max_uniform);
    let mut best = (2, usize::MAX);
    for g in 2..=200 {
        let count = uniform_points(surface, g).len();
        if count > cfg.max_uniform && g > 2 {
            break;
        }
        let miss = count.abs_diff(target);
        if miss < best.1 {
            best = (g, miss);
        }
        if count >= target {
            break;
        }
    }
    best.0
}

#[derive(Debug, Clone, PartialEq)]
pub struct AxisFamily {
    pub direction: [f64; 3],
    /// Box half-widths `Δd`.
    pub tolerance: [f64; 3],
    pub omega_bar: f64,
}

/// `Δd1 = Δd2 = (1 + 2ω_min)/ω̄`,
/// `Δd3 = max((1 + 2ω_min)·|A|/(ω̄·|C|), (1 + 2ω_min)·|B|/(ω̄·|C|))`, with `ω̄`
/// the mean of the per-plane refinement counts. Magnitudes are used so that
/// planes with a negative coefficient still get a positive tolerance.
pub fn axis_family(surface: &InsinuationSurface, plane_omegas: &[usize], direction: [f64; 3]) -> Result<AxisFamily> {
    if plane_omegas.is_empty() {
        return Err(Error::Config("no plane refinement counts".into()));
    }
    if direction.iter().any(|v| !(*v > 0.0)) {
        return Err(Error::Config("axis direction must be strictly positive".into()));
    }
    let norm = dot(&direction, &direction).sqrt();
    let direction = direction.map(|v| v / norm);
    let omega_bar = plane_omegas.iter().map(|&w| w as f64).sum::<f64>() / plane_omegas.len() as f64;
    let span = 1.0 + 2.0 * surface.expansion;
    let [a, b, c] = surface.coefficients;
    let d12 = span / omega_bar;
    let d3 = (span * a.abs() / (omega_bar * c.abs())).max(span * b.abs() / (omega_bar * c.abs()));
    if !(d3 > 0.0) {
        return Err(Error::Singular("zero third tolerance"));
    }
    Ok(AxisFamily {
        direction,
        tolerance: [d12, d12, d3],
        omega_bar,
    })
}

/// Candidate moved along `e` onto the surface, and the travel `u`.
pub fn project_along_axis(p: &[f64; 3], surface: &InsinuationSurface, e: &[f64; 3]) -> Result<([f64; 3], f64)> {
    let ne = dot(&surface.coefficients, e);
    if ne.abs() < 1e-12 {
        return Err(Error::Singular("axis parallel to the surface"));
    }
    let u = (1.0 - dot(&surface.coefficients, p)) / ne;
    Ok((std::array::from_fn(|k| p[k] + u * e[k]), u))
}

#[derive(Debug, Clone, PartialEq)]
pub struct TraceRow {
    pub theta: usize,
    pub sbar: [f64; 3],
    pub matched: Option<usize>,
    pub distance: Option<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Selection {
    /// Sorted, deduplicated candidate indices.
    pub indices: Vec<usize>,
    pub trace: Vec<TraceRow>,
}

fn within(a: &[f64; 3], b: &[f64; 3], tol: &[f64; 3]) -> bool {
    (0..3).all(|k| (a[k] - b[k]).abs() <= tol[k])
}

/// For every uniform point, the candidate whose projection is nearest among
/// those inside the `Δd` box. Ties go to the larger travel `u`, then the
/// lower index.
pub fn axis_select(
    candidates: &[[f64; 3]],
    family: &AxisFamily,
    surface: &InsinuationSurface,
    uniform: &[[f64; 3]],
) -> Result<Selection> {
    if candidates.is_empty() {
        return Err(Error::TooFewPoints { need: 1, got: 0 });
    }
    let projected = candidates
        .iter()
        .map(|c| project_along_axis(c, surface, &family.direction))
        .collect::<Result<Vec<_>>>()?;
    let mut trace = Vec::with_capacity(uniform.len());
    let mut chosen = Vec::new();
    for (theta, sbar) in uniform.iter().enumerate() {
        let mut best: Option<(usize, f64, f64)> = None;
        for (i, (proj, u)) in projected.iter().enumerate() {
            if !within(sbar, proj, &family.tolerance) {
                continue;
            }
            let d = distance(sbar, proj);
            let better = match best {
                None => true,
                Some((_, bd, bu)) => d < bd - 1e-12 || ((d - bd).abs() <= 1e-12 && *u > bu),
            };
            if better {
                best = Some((i, d, *u));
            }
        }
        if let Some((i, _, _)) = best {
            chosen.push(i);
        }
        trace.push(TraceRow {
            theta,
            sbar: *sbar,
            matched: best.map(|b| b.0),
            distance: best.map(|b| b.1),
        });
    }
    chosen.sort_unstable();
    chosen.dedup();
    if chosen.is_empty() {
        return Err(Error::EmptySelection {
            candidates: candidates.len(),
            uniform_points: uniform.len(),
        });
    }
    Ok(Selection { indices: chosen, trace })
}

#[derive(Debug, Clone, PartialEq)]
pub struct AuamOutput {
    pub surface: InsinuationSurface,
    pub family: AxisFamily,
    pub grid: usize,
    pub uniform: Vec<[f64; 3]>,
    pub selection: Selection,
}

/// Full AUAM step over normalized candidates given the normalized anchors
/// and the per-plane refinement counts.
pub fn auam_select(
    candidates: &[[f64; 3]],
    anchors: &[[f64; 3]; 3],
    plane_omegas: &[usize],
    cfg: &AuamConfig,
) -> Result<AuamOutput> {
    let surface = fit_surface(anchors, expansion_from_omegas(plane_omegas))?;
    let family = axis_family(&surface, plane_omegas, cfg.direction)?;
    let grid = grid_for(&surface, candidates.len(), cfg);
    let uniform = uniform_points(&surface, grid);
    let selection = axis_select(candidates, &family, &surface, &uniform)?;
    Ok(AuamOutput {
        surface,
        family,
        grid,
        uniform,
        selection,
    })
}
