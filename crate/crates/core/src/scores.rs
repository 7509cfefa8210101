//! Score functions ξ, stabilization radii, and the geometric statistic
//! μ_n^ξ(f) = Σ_{x∈𝒫_n} ξ(x, 𝒫_n) f(x·n^{−1/d}).

use crate::pointproc::{sample_poisson, PointConfig};
use crate::special::unit_ball_volume;
use rand::Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum ScoreError {
    #[error("point is not part of the configuration")]
    PointNotInConfig,
    #[error("score model requires marks")]
    MissingMarks,
    #[error("duplicate marks (degenerate input)")]
    DuplicateMarks,
    #[error("invalid parameter: {0}")]
    Parameter(String),
}

/// Midpoint-quadrature resolution: cells per radius per axis.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct QuadratureParams {
    pub cells_per_r: usize,
}

impl Default for QuadratureParams {
    fn default() -> Self {
        Self { cells_per_r: 64 }
    }
}

/// Score models with their declared stabilization/growth metadata
/// (b, β, γ1, γ2); both shipped scores are bounded, so all four are 0.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "kind")]
pub enum ScoreModel {
    /// ξ^{(k)}(x, 𝒳) = ∫_{B_r(x)} 1{𝒳(B_r(y)) ≥ k}/𝒳(B_r(y)) dy.
    KCoverage {
        k: usize,
        r: f64,
        quad: QuadratureParams,
    },
    /// Random sequential absorption: ξ(x̆, 𝒫̆) = 1 iff x is accepted.
    Rsa { r: f64 },
    /// ξ ≡ 1 (linear count statistic); the baseline with stabilization
    /// radius 0.
    Count,
}

/// Declared growth parameters (stabilization b, moment growth β, power
/// growth γ1, γ2).
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct GrowthParams {
    pub b: f64,
    pub beta: f64,
    pub gamma1: f64,
    pub gamma2: f64,
}

/// Stabilization radius bound: deterministic for k-coverage, empirical
/// (probe-based) for RSA.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum StabilizationBound {
    Deterministic(f64),
    Empirical,
}

impl ScoreModel {
    pub fn validate(&self) -> Result<(), ScoreError> {
        match self {
            ScoreModel::KCoverage { k, r, quad } => {
                if *k < 1 || !(*r > 0.0) || quad.cells_per_r == 0 {
                    return Err(ScoreError::Parameter(
                        "k_coverage needs k >= 1, r > 0, cells_per_r >= 1".into(),
                    ));
                }
            }
            ScoreModel::Rsa { r } => {
                if !(*r > 0.0) {
                    return Err(ScoreError::Parameter("rsa needs r > 0".into()));
                }
            }
            ScoreModel::Count => {}
        }
        Ok(())
    }

    /// Uniform score bound: r^d·ϑ_d for k-coverage, 1 for RSA.
    pub fn score_bound(&self, d: usize) -> f64 {
        match self {
            ScoreModel::KCoverage { r, .. } => r.powi(d as i32) * unit_ball_volume(d),
            ScoreModel::Rsa { .. } | ScoreModel::Count => 1.0,
        }
    }

    pub fn growth_params(&self) -> GrowthParams {
        GrowthParams {
            b: 0.0,
            beta: 0.0,
            gamma1: 0.0,
            gamma2: 0.0,
        }
    }
}

/// 2r for k-coverage; RSA has no deterministic bound (use
/// [`rsa_stabilization_probe`]).
pub fn stabilization_radius_bound(model: &ScoreModel) -> StabilizationBound {
    match model {
        ScoreModel::KCoverage { r, .. } => StabilizationBound::Deterministic(2.0 * r),
        ScoreModel::Rsa { .. } => StabilizationBound::Empirical,
        ScoreModel::Count => StabilizationBound::Deterministic(0.0),
    }
}

/// Bounded test functions on the rescaled window W_1.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "kind")]
pub enum TestFunction {
    Constant { c: f64 },
    /// Indicator of the axis-aligned box [lo, hi] in W_1 coordinates.
    Indicator { lo: Vec<f64>, hi: Vec<f64> },
    /// height·exp(1 − 1/(1 − s²)) with s = ‖x − center‖/width inside the
    /// support, 0 outside.
    Bump {
        center: Vec<f64>,
        width: f64,
        height: f64,
    },
}

impl TestFunction {
    pub fn eval(&self, x: &[f64]) -> f64 {
        match self {
            TestFunction::Constant { c } => *c,
            TestFunction::Indicator { lo, hi } => {
                let inside = x
                    .iter()
                    .zip(lo.iter().zip(hi))
                    .all(|(&v, (&l, &h))| (l..=h).contains(&v));
                if inside {
                    1.0
                } else {
                    0.0
                }
            }
            TestFunction::Bump {
                center,
                width,
                height,
            } => {
                let s2: f64 = x
                    .iter()
                    .zip(center)
                    .map(|(a, b)| (a - b) * (a - b))
                    .sum::<f64>()
                    / (width * width);
                if s2 < 1.0 {
                    height * (1.0 - 1.0 / (1.0 - s2)).exp()
                } else {
                    0.0
                }
            }
        }
    }

    pub fn sup_norm(&self) -> f64 {
        match self {
            TestFunction::Constant { c } => c.abs(),
            TestFunction::Indicator { .. } => 1.0,
            TestFunction::Bump { height, .. } => height.abs(),
        }
    }
}

/// ξ^{(k)}(x, config) by midpoint quadrature over B_r(x); `x` must be one
/// of the configuration points.
pub fn score_k_coverage(
    x: &[f64],
    config: &PointConfig,
    k: usize,
    r: f64,
    quad: QuadratureParams,
) -> Result<f64, ScoreError> {
    if !config.points().iter().any(|p| p.as_slice() == x) {
        return Err(ScoreError::PointNotInConfig);
    }
    ScoreModel::KCoverage { k, r, quad }.validate()?;
    // Only points within 2r of x can cover any y ∈ B_r(x).
    let near: Vec<&Vec<f64>> = config
        .points()
        .iter()
        .filter(|p| dist_sq(p, x) <= 4.0 * r * r)
        .collect();
    Ok(k_coverage_quad(x, &near, k, r, quad))
}

fn k_coverage_quad(x: &[f64], near: &[&Vec<f64>], k: usize, r: f64, quad: QuadratureParams) -> f64 {
    let d = x.len();
    let cells = 2 * quad.cells_per_r;
    let delta = 2.0 * r / cells as f64;
    let cell_volume = delta.powi(d as i32);
    let ncells = (cells as u64).pow(d as u32);
    let r2 = r * r;
    let mut total = 0.0;
    let mut y = vec![0.0; d];
    for cell in 0..ncells {
        let mut c = cell;
        for (axis, v) in y.iter_mut().enumerate() {
            *v = x[axis] - r + ((c % cells as u64) as f64 + 0.5) * delta;
            c /= cells as u64;
        }
        if dist_sq(&y, x) >= r2 {
            continue;
        }
        let count = near.iter().filter(|p| dist_sq(p, &y) < r2).count();
        if count >= k {
            total += cell_volume / count as f64;
        }
    }
    total
}

/// μ_n^{ξ^{(k)}}(f) = Σ_x ξ^{(k)}(x)·f(x·n^{−1/d}).
pub fn statistic_k_coverage(
    config: &PointConfig,
    k: usize,
    r: f64,
    f: &TestFunction,
    quad: QuadratureParams,
) -> Result<f64, ScoreError> {
    ScoreModel::KCoverage { k, r, quad }.validate()?;
    let side = config.window().side();
    let pts = config.points();
    let mut total = 0.0;
    for x in pts {
        let near: Vec<&Vec<f64>> = pts
            .iter()
            .filter(|p| dist_sq(p, x) <= 4.0 * r * r)
            .collect();
        let xi = k_coverage_quad(x, &near, k, r, quad);
        let rescaled: Vec<f64> = x.iter().map(|&v| v / side).collect();
        total += xi * f.eval(&rescaled);
    }
    Ok(total)
}

/// RSA acceptance vector (indexed like the config points): points are
/// processed in increasing mark order; a point is accepted iff it is at
/// distance ≥ 2r from every previously accepted point.
pub fn score_rsa(config: &PointConfig, r: f64) -> Result<Vec<bool>, ScoreError> {
    ScoreModel::Rsa { r }.validate()?;
    let marks = config.marks().ok_or(ScoreError::MissingMarks)?;
    let mut order: Vec<usize> = (0..marks.len()).collect();
    order.sort_by(|&a, &b| marks[a].partial_cmp(&marks[b]).unwrap());
    if order.windows(2).any(|w| marks[w[0]] == marks[w[1]]) {
        return Err(ScoreError::DuplicateMarks);
    }
    let pts = config.points();
    let mut accepted = vec![false; pts.len()];
    let mut kept: Vec<usize> = Vec::new();
    for &i in &order {
        if kept
            .iter()
            .all(|&j| dist_sq(&pts[i], &pts[j]) >= 4.0 * r * r)
        {
            accepted[i] = true;
            kept.push(i);
        }
    }
    Ok(accepted)
}

/// Empirical RSA stabilization probe for the point at `index`: for each
/// radius s (ascending), the points outside B_s(x) are replaced `trials`
/// times by fresh marked Poisson(intensity) configurations; reports the
/// smallest tested s at which the acceptance indicator of x never changes.
pub fn rsa_stabilization_probe(
    config: &PointConfig,
    r: f64,
    index: usize,
    radii: &[f64],
    intensity: f64,
    trials: usize,
    seed: u64,
) -> Result<Option<f64>, ScoreError> {
    if index >= config.len() {
        return Err(ScoreError::PointNotInConfig);
    }
    if radii.is_empty() || radii.windows(2).any(|w| w[0] >= w[1]) {
        return Err(ScoreError::Parameter(
            "probe radii must be non-empty and strictly increasing".into(),
        ));
    }
    let marks = config.marks().ok_or(ScoreError::MissingMarks)?;
    let baseline = score_rsa(config, r)?[index];
    let window = config.window();
    let x = &config.points()[index];
    'radii: for (ri, &s) in radii.iter().enumerate() {
        for trial in 0..trials {
            let mut rng = crate::seed::rng(seed, &[0x5AB, ri as u64, trial as u64]);
            let mut pts: Vec<Vec<f64>> = Vec::new();
            let mut mk: Vec<f64> = Vec::new();
            for (p, &m) in config.points().iter().zip(marks) {
                if dist_sq(p, x) <= s * s {
                    pts.push(p.clone());
                    mk.push(m);
                }
            }
            let keep = pts.len();
            let fresh = sample_poisson(window, intensity, rng.gen::<u64>())
                .map_err(|e| ScoreError::Parameter(e.to_string()))?;
            for p in fresh.points() {
                if dist_sq(p, x) > s * s {
                    pts.push(p.clone());
                    mk.push(rng.gen::<f64>());
                }
            }
            let perturbed = PointConfig::new(window, pts, Some(mk))
                .map_err(|e| ScoreError::Parameter(e.to_string()))?;
            let accepted = score_rsa(&perturbed, r)?;
            // x keeps its position among the first `keep` retained points.
            let x_pos = (0..keep)
                .find(|&i| perturbed.points()[i].as_slice() == x.as_slice())
                .expect("probed point retained");
            if accepted[x_pos] != baseline {
                continue 'radii;
            }
        }
        return Ok(Some(s));
    }
    Ok(None)
}

/// ξ(x_i, config) for every configuration point.
pub fn score_vector(config: &PointConfig, model: &ScoreModel) -> Result<Vec<f64>, ScoreError> {
    model.validate()?;
    match model {
        ScoreModel::KCoverage { k, r, quad } => Ok(config
            .points()
            .iter()
            .map(|x| {
                let near: Vec<&Vec<f64>> = config
                    .points()
                    .iter()
                    .filter(|p| dist_sq(p, x) <= 4.0 * r * r)
                    .collect();
                k_coverage_quad(x, &near, *k, *r, *quad)
            })
            .collect()),
        ScoreModel::Rsa { r } => Ok(score_rsa(config, *r)?
            .into_iter()
            .map(|a| if a { 1.0 } else { 0.0 })
            .collect()),
        ScoreModel::Count => Ok(vec![1.0; config.len()]),
    }
}

/// Dispatches μ_n^ξ(f) to the model's score routine.
pub fn evaluate_statistic(
    config: &PointConfig,
    model: &ScoreModel,
    f: &TestFunction,
) -> Result<f64, ScoreError> {
    model.validate()?;
    match model {
        ScoreModel::KCoverage { k, r, quad } => statistic_k_coverage(config, *k, *r, f, *quad),
        ScoreModel::Rsa { r } => {
            let accepted = score_rsa(config, *r)?;
            let side = config.window().side();
            Ok(config
                .points()
                .iter()
                .zip(&accepted)
                .filter(|(_, &a)| a)
                .map(|(x, _)| {
                    let rescaled: Vec<f64> = x.iter().map(|&v| v / side).collect();
                    f.eval(&rescaled)
                })
                .sum())
        }
        ScoreModel::Count => {
            let side = config.window().side();
            Ok(config
                .points()
                .iter()
                .map(|x| {
                    let rescaled: Vec<f64> = x.iter().map(|&v| v / side).collect();
                    f.eval(&rescaled)
                })
                .sum())
        }
    }
}

fn dist_sq(x: &[f64], y: &[f64]) -> f64 {
    x.iter().zip(y).map(|(a, b)| (a - b) * (a - b)).sum()
}
