use super::{PointProcessError, Window};
use serde::{Deserialize, Serialize};

/// A finite simple point configuration in a window, with optional uniform
/// marks in [0,1].
#[derive(Clone, Debug, PartialEq)]
pub struct PointConfig {
    window: Window,
    points: Vec<Vec<f64>>,
    marks: Option<Vec<f64>>,
}

impl PointConfig {
    pub fn new(
        window: Window,
        points: Vec<Vec<f64>>,
        marks: Option<Vec<f64>>,
    ) -> Result<Self, PointProcessError> {
        for x in &points {
            if !window.contains(x) {
                return Err(PointProcessError::InvalidConfig(format!(
                    "point {x:?} outside window"
                )));
            }
        }
        // Simple-process invariant: no duplicate points (sort-based check).
        let mut order: Vec<usize> = (0..points.len()).collect();
        order.sort_unstable_by(|&a, &b| points[a].partial_cmp(&points[b]).unwrap());
        for w in order.windows(2) {
            if points[w[0]] == points[w[1]] {
                return Err(PointProcessError::InvalidConfig(
                    "duplicate points".into(),
                ));
            }
        }
        if let Some(m) = &marks {
            if m.len() != points.len() || m.iter().any(|&t| !(0.0..=1.0).contains(&t)) {
                return Err(PointProcessError::InvalidConfig(
                    "marks must match points and lie in [0,1]".into(),
                ));
            }
        }
        Ok(Self {
            window,
            points,
            marks,
        })
    }

    pub fn window(&self) -> Window {
        self.window
    }

    pub fn points(&self) -> &[Vec<f64>] {
        &self.points
    }

    pub fn marks(&self) -> Option<&[f64]> {
        self.marks.as_deref()
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub(super) fn with_marks(&self, marks: Vec<f64>) -> Result<Self, PointProcessError> {
        Self::new(self.window, self.points.clone(), Some(marks))
    }

    /// Serializes to the interchange JSON schema
    /// `{d, n, points, marks|null, seed, spec_digest}`.
    pub fn to_json(&self, seed: u64, spec_digest: &str) -> serde_json::Value {
        serde_json::json!(StoredConfig {
            d: self.window.d(),
            n: self.window.volume(),
            points: self.points.clone(),
            marks: self.marks.clone(),
            seed,
            spec_digest: spec_digest.to_string(),
        })
    }

    /// Parses the interchange schema back; returns the config plus its seed
    /// and digest stamp.
    pub fn from_json(value: &serde_json::Value) -> Result<(Self, u64, String), PointProcessError> {
        let stored: StoredConfig = serde_json::from_value(value.clone())
            .map_err(|e| PointProcessError::InvalidConfig(e.to_string()))?;
        let window = Window::new(stored.d, stored.n)?;
        let cfg = Self::new(window, stored.points, stored.marks)?;
        Ok((cfg, stored.seed, stored.spec_digest))
    }
}

#[derive(Serialize, Deserialize)]
struct StoredConfig {
    d: usize,
    n: f64,
    points: Vec<Vec<f64>>,
    marks: Option<Vec<f64>>,
    seed: u64,
    spec_digest: String,
}
