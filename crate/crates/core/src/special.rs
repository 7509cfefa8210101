//! Small special-function helpers backed by the C math library.

use std::f64::consts::PI;

extern "C" {
    fn erf(x: f64) -> f64;
    fn tgamma(x: f64) -> f64;
}

/// Standard normal CDF.
pub fn normal_cdf(x: f64) -> f64 {
    0.5 * (1.0 + unsafe { erf(x / std::f64::consts::SQRT_2) })
}

/// Gamma function.
pub fn gamma(x: f64) -> f64 {
    unsafe { tgamma(x) }
}

/// Volume of the unit ball in `d` dimensions (ϑ_d).
pub fn unit_ball_volume(d: usize) -> f64 {
    PI.powf(d as f64 / 2.0) / gamma(d as f64 / 2.0 + 1.0)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn ball_volumes() {
        assert!((unit_ball_volume(1) - 2.0).abs() < 1e-12);
        assert!((unit_ball_volume(2) - PI).abs() < 1e-12);
        assert!((unit_ball_volume(3) - 4.0 * PI / 3.0).abs() < 1e-12);
    }

    #[test]
    fn normal_cdf_values() {
        assert!((normal_cdf(0.0) - 0.5).abs() < 1e-15);
        // Φ(1.96) from standard tables.
        assert!((normal_cdf(1.96) - 0.975_002_1).abs() < 1e-6);
        assert!((normal_cdf(-1.0) + normal_cdf(1.0) - 1.0).abs() < 1e-15);
    }
}
