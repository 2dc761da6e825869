//! Double-base-point compromise selection with a Mahalanobis distance.

use nalgebra::{DMatrix, SymmetricEigen};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct CompromiseConfig {
    /// Preference weights ω, one per objective.
    pub weights: Vec<f64>,
    pub lambda_reg: f64,
    /// Shrink the covariance toward the identity above this condition number.
    pub cond_max: f64,
}

impl Default for CompromiseConfig {
    fn default() -> Self {
        CompromiseConfig {
            weights: vec![1.0, 1.0, 1.0],
            lambda_reg: 1e-8,
            cond_max: 1e8,
        }
    }
}

impl CompromiseConfig {
    pub fn validate(&self, m: usize) -> Result<()> {
        if self.weights.len() != m {
            return Err(Error::Config(format!("{} weights for {m} objectives", self.weights.len())));
        }
        if self.weights.iter().any(|w| !(*w >= 0.0) || !w.is_finite()) || self.weights.iter().all(|w| *w == 0.0) {
            return Err(Error::Config("weights must be non-negative and not all zero".into()));
        }
        if !(self.lambda_reg >= 0.0) || !(self.cond_max > 1.0) {
            return Err(Error::Config("lambda_reg must be >= 0 and cond_max > 1".into()));
        }
        Ok(())
    }
}

/// Objective values normalized column-wise over the set itself. A flat
/// column maps to zeros.
pub fn evaluation_matrix(objectives: &[&[f64]]) -> Result<Vec<Vec<f64>>> {
    let Some(first) = objectives.first() else {
        return Err(Error::TooFewPoints { need: 1, got: 0 });
    };
    let m = first.len();
    let mut lo = vec![f64::INFINITY; m];
    let mut hi = vec![f64::NEG_INFINITY; m];
    for row in objectives {
        for j in 0..m {
            lo[j] = lo[j].min(row[j]);
            hi[j] = hi[j].max(row[j]);
        }
    }
    Ok(objectives
        .iter()
        .map(|row| {
            (0..m)
                .map(|j| if hi[j] > lo[j] { (row[j] - lo[j]) / (hi[j] - lo[j]) } else { 0.0 })
                .collect()
        })
        .collect())
}

#[derive(Debug, Clone, PartialEq)]
pub struct IdealPoints {
    /// Column minima.
    pub positive: Vec<f64>,
    /// Column maxima.
    pub negative: Vec<f64>,
}

pub fn ideal_points(u: &[Vec<f64>]) -> Result<IdealPoints> {
    if u.len() < 2 {
        return Err(Error::TooFewPoints { need: 2, got: u.len() });
    }
    let m = u[0].len();
    let mut positive = vec![f64::INFINITY; m];
    let mut negative = vec![f64::NEG_INFINITY; m];
    for row in u {
        for j in 0..m {
            positive[j] = positive[j].min(row[j]);
            negative[j] = negative[j].max(row[j]);
        }
    }
    Ok(IdealPoints { positive, negative })
}

/// Sample covariance of the columns of `u` plus `lambda_reg·I`, shrunk
/// toward the identity until its condition number is at most `cond_max`.
pub fn estimate_covariance(u: &[Vec<f64>], lambda_reg: f64, cond_max: f64) -> Result<DMatrix<f64>> {
    let n = u.len();
    if n < 2 {
        return Err(Error::TooFewPoints { need: 2, got: n });
    }
    let m = u[0].len();
    let mean: Vec<f64> = (0..m).map(|j| u.iter().map(|r| r[j]).sum::<f64>() / n as f64).collect();
    let mut sigma = DMatrix::from_fn(m, m, |a, b| {
        u.iter().map(|r| (r[a] - mean[a]) * (r[b] - mean[b])).sum::<f64>() / (n - 1) as f64
    });
    for j in 0..m {
        sigma[(j, j)] += lambda_reg;
    }
    let eig = SymmetricEigen::new(sigma.clone()).eigenvalues;
    let lmax = eig.max();
    let lmin = eig.min().max(0.0);
    if lmax <= 0.0 {
        return Ok(DMatrix::identity(m, m));
    }
    if lmin <= 0.0 || lmax / lmin > cond_max {
        // ((1−a)·lmax + a) / ((1−a)·lmin + a) = cond_max
        let gap = lmax - cond_max * lmin;
        let a = gap / (gap + cond_max - 1.0);
        sigma = sigma * (1.0 - a) + DMatrix::identity(m, m) * a;
    }
    Ok(sigma)
}

fn quadratic_form(v: &[f64], inv: &DMatrix<f64>) -> f64 {
    let m = v.len();
    let mut q = 0.0;
    for i in 0..m {
        let mut row = 0.0;
        for j in 0..m {
            row += inv[(i, j)] * v[j];
        }
        q += v[i] * row;
    }
    q
}

/// Relative closeness `Th_i = d⁺/(d⁺ + d⁻)` with `d` the weighted
/// Mahalanobis distance to each ideal point.
pub fn closeness(u: &[Vec<f64>], weights: &[f64], sigma: &DMatrix<f64>) -> Result<Vec<f64>> {
    let ideal = ideal_points(u)?;
    let inv = sigma
        .clone()
        .try_inverse()
        .ok_or(Error::Singular("regularized covariance"))?;
    let m = weights.len();
    let mut v = vec![0.0; m];
    u.iter()
        .map(|row| {
            for j in 0..m {
                v[j] = weights[j] * (row[j] - ideal.positive[j]);
            }
            let dp = quadratic_form(&v, &inv).max(0.0).sqrt();
            for j in 0..m {
                v[j] = weights[j] * (row[j] - ideal.negative[j]);
            }
            let dn = quadratic_form(&v, &inv).max(0.0).sqrt();
            if dp + dn == 0.0 {
                return Err(Error::DegenerateCloseness);
            }
            Ok(dp / (dp + dn))
        })
        .collect()
}

/// Argmin with ties to the lowest index.
pub fn pick_compromise(th: &[f64]) -> Option<usize> {
    let mut best: Option<usize> = None;
    for (i, &t) in th.iter().enumerate() {
        if best.is_none_or(|b| t < th[b]) {
            best = Some(i);
        }
    }
    best
}

#[derive(Debug, Clone, PartialEq)]
pub struct CompromiseResult {
    /// Index into the input set.
    pub chosen: usize,
    pub th: Vec<f64>,
    pub covariance: Vec<Vec<f64>>,
}

/// Full selection over a set of raw objective vectors.
pub fn mahalanobis_compromise(objectives: &[&[f64]], cfg: &CompromiseConfig) -> Result<CompromiseResult> {
    if let Some(first) = objectives.first() {
        cfg.validate(first.len())?;
    }
    let u = evaluation_matrix(objectives)?;
    let sigma = estimate_covariance(&u, cfg.lambda_reg, cfg.cond_max)?;
    let th = closeness(&u, &cfg.weights, &sigma)?;
    let chosen = pick_compromise(&th).expect("non-empty");
    let m = sigma.nrows();
    Ok(CompromiseResult {
        chosen,
        th,
        covariance: (0..m).map(|a| (0..m).map(|b| sigma[(a, b)]).collect()).collect(),
    })
}
