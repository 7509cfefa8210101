use super::{PointConfig, PointProcessError, Window, POINT_BUDGET};
use rand::Rng;
use rand_distr::{Distribution, Poisson};

/// Homogeneous Poisson process on the window: Poisson(intensity·n) count,
/// i.i.d. uniform positions. Deterministic given `seed`.
pub fn sample_poisson(
    window: Window,
    intensity: f64,
    seed: u64,
) -> Result<PointConfig, PointProcessError> {
    if !(intensity >= 0.0) || !intensity.is_finite() {
        return Err(PointProcessError::Parameter(
            "intensity must be finite and >= 0".into(),
        ));
    }
    let mean = intensity * window.volume();
    if mean > POINT_BUDGET as f64 {
        return Err(PointProcessError::Budget(mean, POINT_BUDGET));
    }
    let mut rng = crate::seed::rng(seed, &[0x701]);
    let count = if mean > 0.0 {
        Poisson::new(mean)
            .map_err(|e| PointProcessError::Parameter(e.to_string()))?
            .sample(&mut rng) as usize
    } else {
        0
    };
    let d = window.d();
    let h = window.half();
    let points: Vec<Vec<f64>> = (0..count)
        .map(|_| (0..d).map(|_| rng.gen_range(-h..h)).collect())
        .collect();
    PointConfig::new(window, points, None)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn determinism_and_window() {
        let w = Window::new(3, 27.0).unwrap();
        let a = sample_poisson(w, 2.0, 42).unwrap();
        assert_eq!(a, sample_poisson(w, 2.0, 42).unwrap());
        assert_ne!(a, sample_poisson(w, 2.0, 43).unwrap());
        for x in a.points() {
            assert!(w.contains(x));
        }
    }

    #[test]
    fn mean_and_variance_match_poisson() {
        let w = Window::new(2, 100.0).unwrap();
        let reps = 500usize;
        let counts: Vec<f64> = (0..reps)
            .map(|i| sample_poisson(w, 1.0, i as u64).unwrap().len() as f64)
            .collect();
        let mean = counts.iter().sum::<f64>() / reps as f64;
        let var = counts.iter().map(|c| (c - mean) * (c - mean)).sum::<f64>()
            / (reps - 1) as f64;
        // Mean within 5 stderr of 100; variance ≈ mean for Poisson.
        assert!((mean - 100.0).abs() < 5.0 * (100.0f64 / reps as f64).sqrt());
        assert!((var / 100.0 - 1.0).abs() < 0.3, "var={var}");
    }

    #[test]
    fn low_intensity_mostly_empty() {
        let w = Window::new(1, 10.0).unwrap();
        let empties = (0..200)
            .filter(|&i| sample_poisson(w, 0.001, i).unwrap().is_empty())
            .count();
        assert!(empties > 190);
    }

    #[test]
    fn guards() {
        let w = Window::new(1, 1.0).unwrap();
        assert!(sample_poisson(w, -1.0, 0).is_err());
        let big = Window::new(1, 1e9).unwrap();
        assert!(matches!(
            sample_poisson(big, 1.0, 0),
            Err(PointProcessError::Budget(_, _))
        ));
    }
}
