//! Empirical moments, cumulants, and desk-scale verification of the limit
//! theorems (CLT/Berry-Esseen, variance asymptotics, cumulant growth,
//! concentration, SLLN) and the two-point cluster decay.

use crate::combinatorics::{moments_to_cumulants, full_mask, MomentTable};
use crate::pointproc::PointConfig;
use crate::scores::{score_vector, ScoreModel};
use crate::special::normal_cdf;
use crate::special::unit_ball_volume;
use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum EstatError {
    #[error("need at least {0} replicates, got {1}")]
    TooFewReplicates(usize, usize),
    #[error("need at least {0} window volumes, got {1}")]
    TooFewLevels(usize, usize),
    #[error("degenerate variance: σ²(ξ)∫f² > 0 assumption violated")]
    DegenerateVariance,
    #[error("invalid parameter: {0}")]
    Parameter(String),
}

/// Replicate statistic values for one fixed (process, score, f, n).
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SampleSet {
    /// Window volume n.
    pub n: f64,
    pub values: Vec<f64>,
}

impl SampleSet {
    pub fn new(n: f64, values: Vec<f64>) -> Result<Self, EstatError> {
        if !(n > 0.0) {
            return Err(EstatError::Parameter("n must be > 0".into()));
        }
        Ok(Self { n, values })
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn mean(&self) -> f64 {
        self.values.iter().sum::<f64>() / self.values.len() as f64
    }

    /// Unbiased sample variance.
    pub fn variance(&self) -> f64 {
        let m = self.mean();
        self.values.iter().map(|v| (v - m) * (v - m)).sum::<f64>()
            / (self.values.len() - 1) as f64
    }
}

/// Process (a, â) and score (b, β, γ1, γ2) parameters feeding the γ
/// exponent; â = ∞ is the Poisson sentinel (d/â = 0).
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct GammaParams {
    pub a: f64,
    pub a_hat: f64,
    pub b: f64,
    pub beta: f64,
    pub gamma1: f64,
    pub gamma2: f64,
    pub d: usize,
}

/// The two-branch γ and the Berry-Esseen exponent 1/(2+4γ):
/// γ = 1 + max{γ2, β} + d/((1−a)â) + bd²/((1−a)â) when (1−a)â/d ≤ 1,
/// γ = 1 + max{γ2, β} + d/â + a + bd when (1−a)â/d ≥ 1;
/// the branches agree at (1−a)â = d.
pub fn gamma_exponent(p: &GammaParams) -> Result<(f64, f64), EstatError> {
    if !(0.0..1.0).contains(&p.a) {
        return Err(EstatError::Parameter("a must lie in [0,1)".into()));
    }
    if !(p.a_hat > 0.0) || p.b < 0.0 || p.beta < 0.0 || p.gamma1 < 0.0 || p.gamma2 < 0.0 {
        return Err(EstatError::Parameter(
            "â > 0 and b, β, γ1, γ2 >= 0 required".into(),
        ));
    }
    let d = p.d as f64;
    let base = 1.0 + p.gamma2.max(p.beta);
    let gamma = if (1.0 - p.a) * p.a_hat <= d {
        // d/((1−a)â) is finite here even for the ∞ sentinel (ratio > 1).
        base + d / ((1.0 - p.a) * p.a_hat) + p.b * d * d / ((1.0 - p.a) * p.a_hat)
    } else {
        let d_over = if p.a_hat.is_infinite() { 0.0 } else { d / p.a_hat };
        base + d_over + p.a + p.b * d
    };
    Ok((gamma, 1.0 / (2.0 + 4.0 * gamma)))
}

#[derive(Clone, Copy, Debug)]
pub struct CumulantEstimate {
    pub k: usize,
    pub value: f64,
    /// Jackknife standard error.
    pub stderr: f64,
}

#[derive(Clone, Debug)]
pub struct CumulantReport {
    pub n: f64,
    /// Orders 1..=kmax.
    pub cumulants: Vec<CumulantEstimate>,
}

/// Empirical cumulants: unbiased k-statistics for k ≤ 4, plug-in from
/// central moments (biased O(1/reps)) for k = 5, 6; jackknife standard
/// errors throughout.
pub fn sample_cumulants(s: &SampleSet, kmax: usize) -> Result<CumulantReport, EstatError> {
    if !(1..=6).contains(&kmax) {
        return Err(EstatError::Parameter("kmax must lie in 1..=6".into()));
    }
    let reps = s.values.len();
    if reps < 10 * kmax {
        return Err(EstatError::TooFewReplicates(10 * kmax, reps));
    }
    // Power sums S_r = Σ x^r, r = 1..=kmax.
    let mut power = vec![0.0f64; kmax + 1];
    for &x in &s.values {
        let mut xr = 1.0;
        for pr in power.iter_mut().skip(1) {
            xr *= x;
            *pr += xr;
        }
    }
    let full = cumulants_from_power_sums(reps, &power, kmax);
    // Jackknife over leave-one-out power sums.
    let mut sums = vec![0.0f64; kmax + 1];
    let mut sq = vec![0.0f64; kmax + 1];
    let mut loo_power = vec![0.0f64; kmax + 1];
    for &x in &s.values {
        let mut xr = 1.0;
        for r in 1..=kmax {
            xr *= x;
            loo_power[r] = power[r] - xr;
        }
        let loo = cumulants_from_power_sums(reps - 1, &loo_power, kmax);
        for k in 1..=kmax {
            sums[k] += loo[k];
            sq[k] += loo[k] * loo[k];
        }
    }
    let cumulants = (1..=kmax)
        .map(|k| {
            let mean = sums[k] / reps as f64;
            let var = (sq[k] / reps as f64 - mean * mean).max(0.0);
            CumulantEstimate {
                k,
                value: full[k],
                stderr: ((reps - 1) as f64 * var).sqrt(),
            }
        })
        .collect();
    Ok(CumulantReport { n: s.n, cumulants })
}

/// κ̂_1..κ̂_kmax from power sums over `m` samples: exact k-statistics for
/// k ≤ 4, plug-in central-moment cumulants beyond.
fn cumulants_from_power_sums(m: usize, power: &[f64], kmax: usize) -> Vec<f64> {
    let n = m as f64;
    let s1 = power.get(1).copied().unwrap_or(0.0);
    let mut out = vec![0.0; kmax + 1];
    out[1] = s1 / n;
    if kmax >= 2 {
        let s2 = power[2];
        out[2] = (n * s2 - s1 * s1) / (n * (n - 1.0));
        if kmax >= 3 {
            let s3 = power[3];
            out[3] = (2.0 * s1.powi(3) - 3.0 * n * s1 * s2 + n * n * s3)
                / (n * (n - 1.0) * (n - 2.0));
        }
        if kmax >= 4 {
            let (s2, s3, s4) = (power[2], power[3], power[4]);
            out[4] = (-6.0 * s1.powi(4) + 12.0 * n * s1 * s1 * s2
                - 3.0 * n * (n - 1.0) * s2 * s2
                - 4.0 * n * (n + 1.0) * s1 * s3
                + n * n * (n + 1.0) * s4)
                / (n * (n - 1.0) * (n - 2.0) * (n - 3.0));
        }
    }
    if kmax >= 5 {
        // Central moments from raw power sums.
        let mean = s1 / n;
        let raw: Vec<f64> = (0..=kmax).map(|r| power[r.max(0)] / n).collect();
        let mut central = vec![0.0; kmax + 1];
        central[0] = 1.0;
        for r in 1..=kmax {
            let mut acc = 0.0;
            let mut binom = 1.0f64;
            for j in 0..=r {
                // C(r, j)·(−mean)^{r−j}·E[X^j]
                let raw_j = if j == 0 { 1.0 } else { raw[j] };
                acc += binom * (-mean).powi((r - j) as i32) * raw_j;
                binom = binom * (r - j) as f64 / (j + 1) as f64;
            }
            central[r] = acc;
        }
        for k in 5..=kmax {
            let table = MomentTable::new(k, |mask| central[mask.count_ones() as usize])
                .expect("k <= 6 table");
            let kappa = moments_to_cumulants(&table);
            out[k] = kappa.get(full_mask(k)).unwrap();
        }
    }
    out
}

#[derive(Clone, Copy, Debug)]
pub struct CltRow {
    pub n: f64,
    pub replicates: usize,
    pub ks: f64,
    /// KS sampling-noise floor ≈ 1/√replicates.
    pub floor: f64,
    pub pass: bool,
}

#[derive(Clone, Debug)]
pub struct CltReport {
    pub rows: Vec<CltRow>,
    pub pass: bool,
}

/// Standardizes each SampleSet by its own mean and (unbiased) standard
/// deviation and measures the Kolmogorov-Smirnov distance to the standard
/// Gaussian; a row passes when KS does not increase over the previous n by
/// more than twice the noise floor.
pub fn clt_check(samples: &[SampleSet]) -> Result<CltReport, EstatError> {
    if samples.len() < 2 {
        return Err(EstatError::TooFewLevels(2, samples.len()));
    }
    let mut sorted: Vec<&SampleSet> = samples.iter().collect();
    sorted.sort_by(|a, b| a.n.partial_cmp(&b.n).unwrap());
    let mut rows: Vec<CltRow> = Vec::new();
    for s in sorted {
        if s.len() < 200 {
            return Err(EstatError::TooFewReplicates(200, s.len()));
        }
        let sd = s.variance().sqrt();
        if !(sd > 0.0) {
            return Err(EstatError::DegenerateVariance);
        }
        let mean = s.mean();
        let mut z: Vec<f64> = s.values.iter().map(|v| (v - mean) / sd).collect();
        z.sort_by(|a, b| a.partial_cmp(b).unwrap());
        let ks = ks_distance_normal(&z);
        let floor = 1.0 / (s.len() as f64).sqrt();
        let pass = match rows.last() {
            Some(prev) => ks <= prev.ks + 2.0 * floor,
            None => true,
        };
        rows.push(CltRow {
            n: s.n,
            replicates: s.len(),
            ks,
            floor,
            pass,
        });
    }
    let pass = rows.iter().all(|r| r.pass);
    Ok(CltReport { rows, pass })
}

/// KS distance of a sorted sample to the standard normal CDF.
pub fn ks_distance_normal(sorted: &[f64]) -> f64 {
    let n = sorted.len() as f64;
    let mut d = 0.0f64;
    for (i, &x) in sorted.iter().enumerate() {
        let cdf = normal_cdf(x);
        d = d.max((cdf - i as f64 / n).abs());
        d = d.max(((i + 1) as f64 / n - cdf).abs());
    }
    d
}

#[derive(Clone, Copy, Debug)]
pub struct VarianceRow {
    pub n: f64,
    pub var_over_n: f64,
    /// Jackknife stderr of Var/n.
    pub var_stderr: f64,
    pub mean_over_n: f64,
    pub mean_stderr: f64,
    pub pass: bool,
}

#[derive(Clone, Debug)]
pub struct VarianceReport {
    pub rows: Vec<VarianceRow>,
    pub pass: bool,
}

/// Var/n and Mean/n per window volume; passes when the last two Var/n
/// values agree within 10% plus 3 combined standard errors.
pub fn variance_asymptotic_check(samples: &[SampleSet]) -> Result<VarianceReport, EstatError> {
    if samples.len() < 3 {
        return Err(EstatError::TooFewLevels(3, samples.len()));
    }
    let mut sorted: Vec<&SampleSet> = samples.iter().collect();
    sorted.sort_by(|a, b| a.n.partial_cmp(&b.n).unwrap());
    let mut rows: Vec<VarianceRow> = Vec::new();
    for s in sorted {
        if s.len() < 2 {
            return Err(EstatError::TooFewReplicates(2, s.len()));
        }
        let var = s.variance();
        if !(var > 0.0) {
            return Err(EstatError::DegenerateVariance);
        }
        let reps = s.len() as f64;
        // Jackknife the variance estimator.
        let mean = s.mean();
        let mut loo_sum = 0.0;
        let mut loo_sq = 0.0;
        let total_sq: f64 = s.values.iter().map(|v| (v - mean) * (v - mean)).sum();
        for &x in &s.values {
            let loo_mean = (mean * reps - x) / (reps - 1.0);
            // Σ over remaining of (v − loo_mean)²: shift-of-mean identity.
            let loo_ss = total_sq - (x - mean) * (x - mean)
                - (reps - 1.0) * (loo_mean - mean) * (loo_mean - mean);
            let loo_var = loo_ss / (reps - 2.0);
            loo_sum += loo_var;
            loo_sq += loo_var * loo_var;
        }
        let loo_mean_var = loo_sum / reps;
        let jk = ((reps - 1.0) * (loo_sq / reps - loo_mean_var * loo_mean_var).max(0.0)).sqrt();
        rows.push(VarianceRow {
            n: s.n,
            var_over_n: var / s.n,
            var_stderr: jk / s.n,
            mean_over_n: mean / s.n,
            mean_stderr: (var / reps).sqrt() / s.n,
            pass: true,
        });
    }
    let last = rows[rows.len() - 1];
    let prev = rows[rows.len() - 2];
    let tol = 0.10 * last.var_over_n.abs().max(prev.var_over_n.abs())
        + 3.0 * (last.var_stderr + prev.var_stderr);
    let ok = (last.var_over_n - prev.var_over_n).abs() <= tol;
    let idx = rows.len() - 1;
    rows[idx].pass = ok;
    Ok(VarianceReport { rows, pass: ok })
}

#[derive(Clone, Copy, Debug)]
pub struct CumulantGrowthRow {
    pub k: usize,
    pub n: f64,
    pub ratio: f64,
    pub stderr: f64,
}

#[derive(Clone, Debug)]
pub struct CumulantGrowthReport {
    pub rows: Vec<CumulantGrowthRow>,
    /// Per order k: max/min of |κ̂^{(k)}/n| ≤ 3 after 3-stderr inflation.
    pub pass: bool,
}

/// κ̂^{(k)}/n per (k, n): the cumulant bound is linear in n at fixed k, so
/// the ratios must stay bounded across the n-grid.
pub fn cumulant_growth_check(
    samples: &[SampleSet],
    kmax: usize,
) -> Result<CumulantGrowthReport, EstatError> {
    if !(1..=4).contains(&kmax) {
        return Err(EstatError::Parameter(
            "cumulant growth check supports kmax in 1..=4".into(),
        ));
    }
    if samples.len() < 2 {
        return Err(EstatError::TooFewLevels(2, samples.len()));
    }
    let mut sorted: Vec<&SampleSet> = samples.iter().collect();
    sorted.sort_by(|a, b| a.n.partial_cmp(&b.n).unwrap());
    let reports: Vec<CumulantReport> = sorted
        .iter()
        .map(|s| sample_cumulants(s, kmax))
        .collect::<Result<_, _>>()?;
    let mut rows = Vec::new();
    let mut pass = true;
    for k in 1..=kmax {
        let mut lo = f64::INFINITY;
        let mut hi = 0.0f64;
        for rep in &reports {
            let est = rep.cumulants[k - 1];
            let ratio = est.value / rep.n;
            let stderr = est.stderr / rep.n;
            rows.push(CumulantGrowthRow {
                k,
                n: rep.n,
                ratio,
                stderr,
            });
            hi = hi.max((ratio.abs() - 3.0 * stderr).max(0.0));
            lo = lo.min(ratio.abs() + 3.0 * stderr);
        }
        if hi > 3.0 * lo {
            pass = false;
        }
    }
    Ok(CumulantGrowthReport { rows, pass })
}

#[derive(Clone, Copy, Debug)]
pub struct ConcentrationRow {
    pub n: f64,
    pub s: f64,
    pub frequency: f64,
    /// Bound at the calibrated C.
    pub bound: f64,
}

#[derive(Clone, Debug)]
pub struct ConcentrationReport {
    pub gamma: f64,
    /// Largest C ≥ 1 keeping every cell below the bound (capped at 1e6);
    /// < 1 means the check failed even at the loosest admissible constant.
    pub c: f64,
    pub rows: Vec<ConcentrationRow>,
    pub pass: bool,
}

/// Empirical tail frequencies P̂(|μ − mean| ≥ s·σ̂) against the bound
/// 2·exp(−¼·min{s²/2^{1+γ}, C(ns²)^{1/(2+4γ)}}); C is calibrated from the
/// data (largest admissible value) and reported, not assumed.
pub fn concentration_check(
    samples: &[SampleSet],
    params: &GammaParams,
    s_grid: &[f64],
) -> Result<ConcentrationReport, EstatError> {
    if samples.is_empty() {
        return Err(EstatError::TooFewLevels(1, 0));
    }
    if s_grid.iter().any(|&s| s < 0.0) {
        return Err(EstatError::Parameter("s grid must be non-negative".into()));
    }
    let (gamma, exponent) = gamma_exponent(params)?;
    const C_CAP: f64 = 1e6;
    let mut c = C_CAP;
    let mut cells: Vec<(f64, f64, f64)> = Vec::new();
    for set in samples {
        if set.len() < 500 {
            return Err(EstatError::TooFewReplicates(500, set.len()));
        }
        let sd = set.variance().sqrt();
        if !(sd > 0.0) {
            return Err(EstatError::DegenerateVariance);
        }
        let mean = set.mean();
        let devs: Vec<f64> = set.values.iter().map(|v| (v - mean).abs() / sd).collect();
        for &s in s_grid {
            let freq =
                devs.iter().filter(|&&d| d >= s).count() as f64 / set.len() as f64;
            cells.push((set.n, s, freq));
            if freq > 0.0 && s > 0.0 {
                let budget = 4.0 * (2.0 / freq).ln();
                let gauss_term = s * s / 2.0f64.powf(1.0 + gamma);
                if gauss_term > budget {
                    // The C-term must carry the bound alone.
                    let b = (set.n * s * s).powf(exponent);
                    c = c.min(budget / b);
                }
            }
        }
    }
    let pass = c >= 1.0;
    let rows = cells
        .into_iter()
        .map(|(n, s, frequency)| {
            let gauss_term = s * s / 2.0f64.powf(1.0 + gamma);
            let c_term = c * (n * s * s).powf(exponent);
            ConcentrationRow {
                n,
                s,
                frequency,
                bound: 2.0 * (-0.25 * gauss_term.min(c_term)).exp(),
            }
        })
        .collect();
    Ok(ConcentrationReport {
        gamma,
        c,
        rows,
        pass,
    })
}

#[derive(Clone, Copy, Debug)]
pub struct SllnRow {
    pub n: f64,
    /// |μ_n − mean_n| / n^{(1+ε)/2}.
    pub deviation: f64,
}

#[derive(Clone, Debug)]
pub struct SllnReport {
    pub rows: Vec<SllnRow>,
    pub pass: bool,
}

/// Marcinkiewicz-Zygmund decay proxy: the first replicate of each set is
/// the "single run", its deviation from the remaining replicates' mean is
/// normalized by n^{(1+ε)/2}; passes when the last value is below the
/// first and the maximum sits in the first half.
pub fn slln_check(samples: &[SampleSet], epsilon: f64) -> Result<SllnReport, EstatError> {
    if samples.len() < 5 {
        return Err(EstatError::TooFewLevels(5, samples.len()));
    }
    if !(epsilon > 0.0) {
        return Err(EstatError::Parameter("epsilon must be > 0".into()));
    }
    let mut sorted: Vec<&SampleSet> = samples.iter().collect();
    sorted.sort_by(|a, b| a.n.partial_cmp(&b.n).unwrap());
    let mut rows = Vec::new();
    for s in sorted {
        if s.len() < 2 {
            return Err(EstatError::TooFewReplicates(2, s.len()));
        }
        let single = s.values[0];
        let rest = &s.values[1..];
        let mean = rest.iter().sum::<f64>() / rest.len() as f64;
        rows.push(SllnRow {
            n: s.n,
            deviation: (single - mean).abs() / s.n.powf((1.0 + epsilon) / 2.0),
        });
    }
    let max_at = rows
        .iter()
        .enumerate()
        .max_by(|a, b| a.1.deviation.partial_cmp(&b.1.deviation).unwrap())
        .map(|(i, _)| i)
        .unwrap();
    let pass = rows.last().unwrap().deviation < rows[0].deviation + f64::EPSILON
        && max_at < rows.len().div_ceil(2);
    Ok(SllnReport { rows, pass })
}

#[derive(Clone, Copy, Debug)]
pub struct ClusterDecayRow {
    pub r: f64,
    /// |m̂_{1,1}(r) − m̂_1²|.
    pub gap: f64,
    pub stderr: f64,
    pub pairs: usize,
}

#[derive(Clone, Debug)]
pub struct ClusterDecayReport {
    pub m1: f64,
    pub rows: Vec<ClusterDecayRow>,
    /// Gap at the largest retained bin within 3 stderr of 0.
    pub pass: bool,
}

/// Two-point clustering of the ξ-weighted measure: m̂_{1,1}(r) from
/// score-weighted ordered pairs per distance bin (minus sampling, as in
/// the correlation estimator) against m̂_1²; the gap at the largest bin
/// must vanish within noise. Bins with fewer than 10 pairs are dropped.
pub fn cluster_decay_check(
    configs: &[PointConfig],
    model: &ScoreModel,
    bins: &[f64],
) -> Result<ClusterDecayReport, EstatError> {
    if configs.len() < 30 {
        return Err(EstatError::TooFewReplicates(30, configs.len()));
    }
    if bins.len() < 2 || bins[0] <= 0.0 || bins.windows(2).any(|w| w[0] >= w[1]) {
        return Err(EstatError::Parameter(
            "need strictly increasing bin edges with positive origin (diagonal excluded)".into(),
        ));
    }
    let window = configs[0].window();
    if configs.iter().any(|c| c.window() != window) {
        return Err(EstatError::Parameter("replicates must share one window".into()));
    }
    let d = window.d();
    let hi_max = *bins.last().unwrap();
    let eroded_side = window.side() - 2.0 * hi_max;
    if eroded_side <= 0.0 {
        return Err(EstatError::Parameter(
            "largest bin leaves no eroded window".into(),
        ));
    }
    let eroded_half = eroded_side / 2.0;
    let eroded_volume = eroded_side.powi(d as i32);
    let ball = unit_ball_volume(d);
    let nbins = bins.len() - 1;
    let shell: Vec<f64> = (0..nbins)
        .map(|b| ball * (bins[b + 1].powi(d as i32) - bins[b].powi(d as i32)))
        .collect();

    let reps = configs.len();
    let mut m1_samples = Vec::with_capacity(reps);
    let mut m11: Vec<Vec<f64>> = vec![vec![0.0; reps]; nbins];
    let mut pair_totals = vec![0usize; nbins];
    for (rep, cfg) in configs.iter().enumerate() {
        let scores =
            score_vector(cfg, model).map_err(|e| EstatError::Parameter(e.to_string()))?;
        m1_samples.push(scores.iter().sum::<f64>() / window.volume());
        let pts = cfg.points();
        for (i, x) in pts.iter().enumerate() {
            if x.iter().any(|&c| c.abs() > eroded_half) {
                continue;
            }
            for (j, y) in pts.iter().enumerate() {
                if i == j {
                    continue;
                }
                let s = x
                    .iter()
                    .zip(y)
                    .map(|(a, b)| (a - b) * (a - b))
                    .sum::<f64>()
                    .sqrt();
                if s < bins[0] || s >= hi_max {
                    continue;
                }
                let b = bins.partition_point(|&e| e <= s) - 1;
                m11[b][rep] += scores[i] * scores[j];
                pair_totals[b] += 1;
            }
        }
    }
    let m1 = m1_samples.iter().sum::<f64>() / reps as f64;
    let m1_var = m1_samples.iter().map(|v| (v - m1) * (v - m1)).sum::<f64>()
        / (reps - 1) as f64;
    let m1_stderr = (m1_var / reps as f64).sqrt();
    let mut rows = Vec::new();
    for b in 0..nbins {
        if pair_totals[b] < 10 {
            log::warn!(
                "cluster decay bin [{:.3}, {:.3}) dropped: only {} pairs",
                bins[b],
                bins[b + 1],
                pair_totals[b]
            );
            continue;
        }
        let norm = eroded_volume * shell[b];
        let vals: Vec<f64> = m11[b].iter().map(|v| v / norm).collect();
        let mean = vals.iter().sum::<f64>() / reps as f64;
        let var = vals.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>()
            / (reps - 1) as f64;
        let stderr_m11 = (var / reps as f64).sqrt();
        let stderr = (stderr_m11 * stderr_m11
            + (2.0 * m1 * m1_stderr) * (2.0 * m1 * m1_stderr))
            .sqrt();
        rows.push(ClusterDecayRow {
            r: 0.5 * (bins[b] + bins[b + 1]),
            gap: (mean - m1 * m1).abs(),
            stderr,
            pairs: pair_totals[b],
        });
    }
    if rows.is_empty() {
        return Err(EstatError::Parameter("all bins dropped".into()));
    }
    let last = rows.last().unwrap();
    let pass = last.gap <= 3.0 * last.stderr;
    Ok(ClusterDecayReport { m1, rows, pass })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::pointproc::{sample_poisson, Window};
    use crate::scores::QuadratureParams;
    use rand::Rng;
    use rand_distr::{Distribution, Normal, Poisson};

    fn rng(seed: u64) -> impl Rng {
        crate::seed::rng(seed, &[0xE57])
    }

    #[test]
    fn gamma_exponent_examples() {
        // Poisson (â = ∞ sentinel) with a bounded score.
        let poisson = GammaParams {
            a: 0.0,
            a_hat: f64::INFINITY,
            b: 0.0,
            beta: 0.0,
            gamma1: 0.0,
            gamma2: 0.0,
            d: 2,
        };
        assert_eq!(gamma_exponent(&poisson).unwrap(), (1.0, 1.0 / 6.0));
        // Gibbs: a=0, â=1, d=2 → first branch, γ=3.
        let gibbs = GammaParams {
            a_hat: 1.0,
            ..poisson
        };
        assert_eq!(gamma_exponent(&gibbs).unwrap(), (3.0, 1.0 / 14.0));
        // Ginibre: a=0, â=2, d=2 → boundary, γ=2.
        let ginibre = GammaParams {
            a_hat: 2.0,
            ..poisson
        };
        assert_eq!(gamma_exponent(&ginibre).unwrap(), (2.0, 1.0 / 10.0));
        assert!(gamma_exponent(&GammaParams { a: 1.0, ..poisson }).is_err());
    }

    #[test]
    fn gamma_branches_agree_at_boundary() {
        let mut r = rng(1);
        for _ in 0..50 {
            let a: f64 = r.gen_range(0.0..0.9);
            let d = r.gen_range(1..=4usize);
            let b = r.gen_range(0.0..2.0);
            let beta = r.gen_range(0.0..2.0);
            let gamma2 = r.gen_range(0.0..2.0);
            // Pin â to the branch boundary (1−a)â = d.
            let a_hat = d as f64 / (1.0 - a);
            let base = GammaParams {
                a,
                a_hat,
                b,
                beta,
                gamma1: 0.0,
                gamma2,
                d,
            };
            let first = 1.0 + gamma2.max(beta) + d as f64 / ((1.0 - a) * a_hat)
                + b * (d * d) as f64 / ((1.0 - a) * a_hat);
            let second = 1.0 + gamma2.max(beta) + d as f64 / a_hat + a + b * d as f64;
            assert!((first - second).abs() < 1e-12);
            let (g, _) = gamma_exponent(&base).unwrap();
            assert!((g - first).abs() < 1e-12);
        }
    }

    #[test]
    fn cumulants_of_constant_and_identities() {
        let s = SampleSet::new(10.0, vec![2.5; 80]).unwrap();
        let rep = sample_cumulants(&s, 4).unwrap();
        assert_eq!(rep.cumulants[0].value, 2.5);
        for c in &rep.cumulants[1..] {
            assert!(c.value.abs() < 1e-12);
        }
        // Mean/variance identities and shift/scale equivariance.
        let mut r = rng(3);
        let values: Vec<f64> = (0..200).map(|_| r.gen_range(-1.0..4.0)).collect();
        let base = SampleSet::new(1.0, values.clone()).unwrap();
        let rep = sample_cumulants(&base, 4).unwrap();
        assert!((rep.cumulants[0].value - base.mean()).abs() < 1e-12);
        assert!((rep.cumulants[1].value - base.variance()).abs() < 1e-10);
        let shifted =
            SampleSet::new(1.0, values.iter().map(|v| v + 7.0).collect()).unwrap();
        let rep_s = sample_cumulants(&shifted, 4).unwrap();
        assert!((rep_s.cumulants[0].value - rep.cumulants[0].value - 7.0).abs() < 1e-9);
        for k in 1..4 {
            assert!(
                (rep_s.cumulants[k].value - rep.cumulants[k].value).abs()
                    < 1e-7 * rep.cumulants[k].value.abs().max(1.0)
            );
        }
        let scaled = SampleSet::new(1.0, values.iter().map(|v| 3.0 * v).collect()).unwrap();
        let rep_c = sample_cumulants(&scaled, 4).unwrap();
        for k in 0..4 {
            let expect = rep.cumulants[k].value * 3.0f64.powi(k as i32 + 1);
            assert!((rep_c.cumulants[k].value - expect).abs() < 1e-7 * expect.abs().max(1.0));
        }
    }

    #[test]
    fn cumulants_of_gaussian_and_poisson() {
        let mut r = rng(4);
        let normal = Normal::new(0.0, 1.0).unwrap();
        let values: Vec<f64> = (0..10_000).map(|_| normal.sample(&mut r)).collect();
        let s = SampleSet::new(1.0, values).unwrap();
        let rep = sample_cumulants(&s, 6).unwrap();
        assert!((rep.cumulants[1].value - 1.0).abs() < 0.05);
        for k in [3usize, 4, 5, 6] {
            let c = rep.cumulants[k - 1];
            assert!(
                c.value.abs() <= 3.0 * c.stderr + 0.02,
                "k={k}: {} ± {}",
                c.value,
                c.stderr
            );
        }

        let lambda = 4.0;
        let pois = Poisson::new(lambda).unwrap();
        let values: Vec<f64> = (0..20_000).map(|_| pois.sample(&mut r)).collect();
        let s = SampleSet::new(1.0, values).unwrap();
        let rep = sample_cumulants(&s, 4).unwrap();
        for c in &rep.cumulants {
            assert!(
                (c.value - lambda).abs() <= 4.0 * c.stderr + 0.05,
                "k={}: {} ± {}",
                c.k,
                c.value,
                c.stderr
            );
        }
    }

    #[test]
    fn cumulant_replicate_guard() {
        let s = SampleSet::new(1.0, vec![0.0; 30]).unwrap();
        assert!(matches!(
            sample_cumulants(&s, 4),
            Err(EstatError::TooFewReplicates(40, 30))
        ));
    }

    fn iid_sum_sets(ns: &[usize], reps: usize, seed: u64) -> Vec<SampleSet> {
        // Statistic = sum of n i.i.d. Exp(1)-like variables (classical CLT).
        let mut r = rng(seed);
        ns.iter()
            .map(|&n| {
                let values: Vec<f64> = (0..reps)
                    .map(|_| {
                        (0..n)
                            .map(|_| -r.gen::<f64>().max(1e-12).ln())
                            .sum::<f64>()
                    })
                    .collect();
                SampleSet::new(n as f64, values).unwrap()
            })
            .collect()
    }

    #[test]
    fn clt_check_on_iid_sums() {
        let sets = iid_sum_sets(&[2, 64, 1024], 400, 11);
        let report = clt_check(&sets).unwrap();
        assert!(report.pass, "{:?}", report.rows);
        assert!(report.rows.last().unwrap().ks < report.rows[0].ks);
        // Constant samples → degenerate variance.
        let con = vec![
            SampleSet::new(1.0, vec![1.0; 250]).unwrap(),
            SampleSet::new(2.0, vec![1.0; 250]).unwrap(),
        ];
        assert!(matches!(
            clt_check(&con),
            Err(EstatError::DegenerateVariance)
        ));
    }

    #[test]
    fn standardization_is_exact() {
        let sets = iid_sum_sets(&[8, 16], 250, 13);
        for s in &sets {
            let mean = s.mean();
            let sd = s.variance().sqrt();
            let z: Vec<f64> = s.values.iter().map(|v| (v - mean) / sd).collect();
            let zm = z.iter().sum::<f64>() / z.len() as f64;
            let zv = z.iter().map(|v| (v - zm) * (v - zm)).sum::<f64>()
                / (z.len() - 1) as f64;
            assert!(zm.abs() < 1e-12 && (zv - 1.0).abs() < 1e-12);
        }
    }

    fn poisson_count_sets(ns: &[f64], reps: usize, seed: u64) -> Vec<SampleSet> {
        let mut r = rng(seed);
        ns.iter()
            .map(|&n| {
                let pois = Poisson::new(n).unwrap();
                let values: Vec<f64> = (0..reps).map(|_| pois.sample(&mut r)).collect();
                SampleSet::new(n, values).unwrap()
            })
            .collect()
    }

    #[test]
    fn variance_check_poisson_counts() {
        // Count statistic of Poisson intensity 1: Var/n = Mean/n = 1.
        let sets = poisson_count_sets(&[50.0, 100.0, 200.0], 600, 21);
        let report = variance_asymptotic_check(&sets).unwrap();
        assert!(report.pass);
        for row in &report.rows {
            assert!((row.var_over_n - 1.0).abs() < 4.0 * row.var_stderr + 0.02);
            assert!((row.mean_over_n - 1.0).abs() < 4.0 * row.mean_stderr + 1e-9);
        }
        assert!(variance_asymptotic_check(&sets[..2]).is_err());
    }

    #[test]
    fn cumulant_growth_poisson_counts() {
        let sets = poisson_count_sets(&[50.0, 100.0, 200.0], 4000, 22);
        let report = cumulant_growth_check(&sets, 3).unwrap();
        assert!(report.pass);
        // All Poisson cumulants equal the intensity: ratios near 1.
        for row in report.rows.iter().filter(|r| r.k <= 2) {
            assert!((row.ratio - 1.0).abs() < 0.2, "{row:?}");
        }
        assert!(cumulant_growth_check(&sets, 5).is_err());
    }

    #[test]
    fn concentration_gaussian() {
        let mut r = rng(31);
        let normal = Normal::new(0.0, 1.0).unwrap();
        let values: Vec<f64> = (0..4000).map(|_| normal.sample(&mut r)).collect();
        let sets = vec![SampleSet::new(100.0, values).unwrap()];
        let params = GammaParams {
            a: 0.0,
            a_hat: f64::INFINITY,
            b: 0.0,
            beta: 0.0,
            gamma1: 0.0,
            gamma2: 0.0,
            d: 2,
        };
        let report = concentration_check(&sets, &params, &[0.0, 1.0, 2.0, 20.0]).unwrap();
        assert!(report.pass, "C={}", report.c);
        assert!(report.c >= 1.0);
        let by_s = |s: f64| {
            report
                .rows
                .iter()
                .find(|row| row.s == s)
                .copied()
                .unwrap()
        };
        assert_eq!(by_s(0.0).frequency, 1.0);
        assert_eq!(by_s(0.0).bound, 2.0);
        assert!((by_s(2.0).frequency - 0.0455).abs() < 0.02);
        assert_eq!(by_s(20.0).frequency, 0.0);
        for row in &report.rows {
            assert!(row.frequency <= row.bound + 1e-12, "{row:?}");
        }
    }

    #[test]
    fn slln_decay() {
        let sets = poisson_count_sets(&[20.0, 80.0, 320.0, 1280.0, 5120.0], 40, 41);
        // ε = 1: ordinary LLN scaling |X−mean|/n, decaying whp.
        let report = slln_check(&sets, 1.0).unwrap();
        assert_eq!(report.rows.len(), 5);
        assert!(report.pass, "{:?}", report.rows);
        // Constant statistic → all zeros, passes vacuously.
        let con: Vec<SampleSet> = [1.0, 2.0, 4.0, 8.0, 16.0]
            .iter()
            .map(|&n| SampleSet::new(n, vec![5.0; 10]).unwrap())
            .collect();
        let rep = slln_check(&con, 0.5).unwrap();
        assert!(rep.rows.iter().all(|r| r.deviation == 0.0));
        assert!(slln_check(&sets[..3], 1.0).is_err());
    }

    #[test]
    fn cluster_decay_poisson_coverage() {
        let w = Window::new(2, 64.0).unwrap();
        let configs: Vec<PointConfig> = (0..60)
            .map(|i| sample_poisson(w, 1.0, 500 + i as u64).unwrap())
            .collect();
        let model = ScoreModel::KCoverage {
            k: 1,
            r: 0.4,
            quad: QuadratureParams { cells_per_r: 12 },
        };
        // Largest bin far beyond the stabilization radius 2r = 0.8.
        let report = cluster_decay_check(&configs, &model, &[0.3, 1.0, 2.0, 2.8]).unwrap();
        assert!(report.pass, "{:?}", report.rows);
        assert!(report.m1 > 0.0);
        // Diagonal excluded by contract.
        assert!(cluster_decay_check(&configs, &model, &[0.0, 1.0]).is_err());
    }
}
