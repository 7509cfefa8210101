use super::PointProcessError;
use serde::{Deserialize, Serialize};

/// The cubic observation window W_n = [−n^{1/d}/2, n^{1/d}/2]^d.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Window {
    d: usize,
    volume: f64,
}

impl Window {
    pub fn new(d: usize, volume: f64) -> Result<Self, PointProcessError> {
        if d == 0 || !(volume > 0.0) || !volume.is_finite() {
            return Err(PointProcessError::Parameter(
                "window needs d >= 1 and finite volume > 0".into(),
            ));
        }
        Ok(Self { d, volume })
    }

    pub fn d(&self) -> usize {
        self.d
    }

    /// The volume parameter n.
    pub fn volume(&self) -> f64 {
        self.volume
    }

    pub fn side(&self) -> f64 {
        self.volume.powf(1.0 / self.d as f64)
    }

    pub fn half(&self) -> f64 {
        self.side() / 2.0
    }

    pub fn contains(&self, x: &[f64]) -> bool {
        let h = self.half();
        x.len() == self.d && x.iter().all(|&c| (-h..=h).contains(&c))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn geometry() {
        let w = Window::new(2, 16.0).unwrap();
        assert_eq!(w.side(), 4.0);
        assert!(w.contains(&[2.0, -2.0]));
        assert!(!w.contains(&[2.1, 0.0]));
        assert!(!w.contains(&[0.0]));
        assert!(Window::new(0, 1.0).is_err());
        assert!(Window::new(2, 0.0).is_err());
    }
}
