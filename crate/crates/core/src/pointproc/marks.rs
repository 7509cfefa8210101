use super::{PointConfig, PointProcessError};
use rand::Rng;

/// Attaches i.i.d. uniform [0,1] marks (time stamps), independent of the
/// positions. Deterministic given `seed`.
pub fn attach_marks(config: &PointConfig, seed: u64) -> Result<PointConfig, PointProcessError> {
    if config.marks().is_some() {
        return Err(PointProcessError::AlreadyMarked);
    }
    let mut rng = crate::seed::rng(seed, &[0x3A2]);
    let marks: Vec<f64> = (0..config.len()).map(|_| rng.gen::<f64>()).collect();
    config.with_marks(marks)
}
