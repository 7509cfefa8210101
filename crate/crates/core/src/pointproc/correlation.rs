use super::{PointConfig, PointProcessError};
use crate::special::unit_ball_volume;

/// Per-bin pair-correlation estimate; the bin is [lo, hi).
#[derive(Clone, Debug)]
pub struct BinEstimate {
    pub center: f64,
    pub lo: f64,
    pub hi: f64,
    /// ρ̂^{(2)} averaged over replicates.
    pub rho2: f64,
    pub rho2_stderr: f64,
    /// ĝ = ρ̂^{(2)} / ρ̂^{(1)}².
    pub g: f64,
    pub g_stderr: f64,
    /// Total ordered pair count across replicates.
    pub pairs: usize,
}

#[derive(Clone, Debug)]
pub struct CorrelationEstimate {
    pub rho1: f64,
    pub rho1_stderr: f64,
    pub bins: Vec<BinEstimate>,
}

/// Empirical correlation functions across replicate configs: ρ̂^{(1)} as
/// count/volume; for p = 2, distinct-ordered-pair counts per distance bin
/// with minus-sampling edge correction (reference points at least the
/// largest bin edge away from the boundary), normalized by eroded window
/// volume × shell volume. `bins` are the bin edges. Standard errors are
/// across replicates.
pub fn estimate_correlation(
    configs: &[PointConfig],
    p: usize,
    bins: &[f64],
) -> Result<CorrelationEstimate, PointProcessError> {
    if configs.len() < 30 {
        return Err(PointProcessError::TooFewReplicates(30, configs.len()));
    }
    if !(p == 1 || p == 2) {
        return Err(PointProcessError::Parameter("p must be 1 or 2".into()));
    }
    let window = configs[0].window();
    if configs.iter().any(|c| c.window() != window) {
        return Err(PointProcessError::Parameter(
            "replicates must share one window".into(),
        ));
    }
    let volume = window.volume();
    let rho1_samples: Vec<f64> = configs.iter().map(|c| c.len() as f64 / volume).collect();
    let (rho1, rho1_stderr) = mean_stderr(&rho1_samples);

    let mut out = CorrelationEstimate {
        rho1,
        rho1_stderr,
        bins: Vec::new(),
    };
    if p == 1 {
        return Ok(out);
    }
    if bins.len() < 2 || bins[0] < 0.0 || bins.windows(2).any(|w| w[0] >= w[1]) {
        return Err(PointProcessError::Parameter(
            "p=2 needs at least two strictly increasing non-negative bin edges".into(),
        ));
    }
    let d = window.d();
    let hi_max = *bins.last().unwrap();
    let eroded_side = window.side() - 2.0 * hi_max;
    if eroded_side <= 0.0 {
        return Err(PointProcessError::Parameter(
            "largest bin edge leaves no eroded window for minus-sampling".into(),
        ));
    }
    let eroded_half = eroded_side / 2.0;
    let eroded_volume = eroded_side.powi(d as i32);
    let ball = unit_ball_volume(d);
    let nbins = bins.len() - 1;
    let shell: Vec<f64> = (0..nbins)
        .map(|b| ball * (bins[b + 1].powi(d as i32) - bins[b].powi(d as i32)))
        .collect();

    // Per-replicate ρ̂^{(2)} per bin.
    let mut per_rep: Vec<Vec<f64>> = vec![vec![0.0; configs.len()]; nbins];
    let mut pair_totals = vec![0usize; nbins];
    for (rep, cfg) in configs.iter().enumerate() {
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
                per_rep[b][rep] += 1.0;
                pair_totals[b] += 1;
            }
        }
    }
    for b in 0..nbins {
        for v in per_rep[b].iter_mut() {
            *v /= eroded_volume * shell[b];
        }
        let (rho2, rho2_stderr) = mean_stderr(&per_rep[b]);
        let g = if rho1 > 0.0 { rho2 / (rho1 * rho1) } else { 0.0 };
        // Relative errors of numerator and ρ̂^{(1)}² combined in quadrature.
        let g_stderr = if rho1 > 0.0 && rho2 > 0.0 {
            g * ((rho2_stderr / rho2).powi(2) + (2.0 * rho1_stderr / rho1).powi(2)).sqrt()
        } else {
            rho2_stderr / (rho1 * rho1).max(f64::MIN_POSITIVE)
        };
        out.bins.push(BinEstimate {
            center: 0.5 * (bins[b] + bins[b + 1]),
            lo: bins[b],
            hi: bins[b + 1],
            rho2,
            rho2_stderr,
            g,
            g_stderr,
            pairs: pair_totals[b],
        });
    }
    Ok(out)
}

fn mean_stderr(samples: &[f64]) -> (f64, f64) {
    let n = samples.len() as f64;
    let mean = samples.iter().sum::<f64>() / n;
    if samples.len() < 2 {
        return (mean, 0.0);
    }
    let var = samples.iter().map(|s| (s - mean) * (s - mean)).sum::<f64>() / (n - 1.0);
    (mean, (var / n).sqrt())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::pointproc::{sample_poisson, Window};

    #[test]
    fn poisson_is_flat_at_intensity_squared() {
        let w = Window::new(2, 100.0).unwrap();
        let configs: Vec<PointConfig> = (0..300)
            .map(|i| sample_poisson(w, 1.0, i as u64).unwrap())
            .collect();
        let est = estimate_correlation(&configs, 2, &[0.25, 0.5, 0.75, 1.0, 1.5]).unwrap();
        assert!((est.rho1 - 1.0).abs() < 4.0 * est.rho1_stderr + 1e-9);
        for bin in &est.bins {
            assert!(
                (bin.g - 1.0).abs() < 4.0 * bin.g_stderr,
                "bin {:.2}: g={} stderr={}",
                bin.center,
                bin.g,
                bin.g_stderr
            );
        }
    }

    #[test]
    fn two_point_config_fills_one_bin() {
        let w = Window::new(2, 16.0).unwrap();
        let cfg = PointConfig::new(
            w,
            vec![vec![-0.25, 0.0], vec![0.25, 0.0]],
            None,
        )
        .unwrap();
        let configs: Vec<PointConfig> = (0..30).map(|_| cfg.clone()).collect();
        let est = estimate_correlation(&configs, 2, &[0.4, 0.6, 0.8]).unwrap();
        assert_eq!(est.bins[0].pairs, 2 * 30);
        assert!(est.bins[0].rho2 > 0.0);
        assert_eq!(est.bins[1].pairs, 0);
        assert_eq!(est.bins[1].rho2, 0.0);
        // ρ̂^{(1)} = 2/16 exactly, zero spread.
        assert!((est.rho1 - 0.125).abs() < 1e-12);
        assert_eq!(est.rho1_stderr, 0.0);
    }

    #[test]
    fn p1_skips_bins() {
        let w = Window::new(1, 10.0).unwrap();
        let configs: Vec<PointConfig> = (0..40)
            .map(|i| sample_poisson(w, 2.0, i as u64).unwrap())
            .collect();
        let est = estimate_correlation(&configs, 1, &[]).unwrap();
        assert!(est.bins.is_empty());
        assert!(est.rho1 > 0.0);
    }

    #[test]
    fn guards() {
        let w = Window::new(2, 16.0).unwrap();
        let cfg = PointConfig::new(w, vec![vec![0.0, 0.0]], None).unwrap();
        let few: Vec<PointConfig> = (0..10).map(|_| cfg.clone()).collect();
        assert!(matches!(
            estimate_correlation(&few, 2, &[0.0, 1.0]),
            Err(PointProcessError::TooFewReplicates(30, 10))
        ));
        let many: Vec<PointConfig> = (0..30).map(|_| cfg.clone()).collect();
        assert!(estimate_correlation(&many, 3, &[0.0, 1.0]).is_err());
        // Largest edge ≥ half the side leaves no eroded window.
        assert!(estimate_correlation(&many, 2, &[0.0, 2.0]).is_err());
        assert!(estimate_correlation(&many, 2, &[1.0, 0.5]).is_err());
    }
}
