//! Core library for `geocume`: samplers for point processes with fast decay
//! of correlations, stabilizing score functionals, the set-partition /
//! cumulant algebra, and the empirical checks built on top of them.

pub mod combinatorics;
pub mod estat;
pub mod matrixkit;
pub mod pointproc;
pub mod scores;
pub mod seed;
pub mod sigeom;
pub mod special;

pub(crate) mod linalg;
