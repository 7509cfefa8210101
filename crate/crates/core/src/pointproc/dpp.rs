use super::{KernelSpec, PointConfig, PointProcessError, Window, POINT_BUDGET};
use crate::linalg::eigh_in_place;
use num_complex::Complex64;
use rand::Rng;
use serde::{Deserialize, Serialize};

/// Discretization knobs for the spectral DPP sampler.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct GridParams {
    /// Target resolution (cells per unit length per axis).
    pub cells_per_unit: f64,
    /// Hard cap on the total cell count (eigenproblem size).
    pub max_cells: usize,
    /// Optional tile edge length. When set, the window is split into
    /// `round(side/tile_side)^d` congruent tiles sampled independently from
    /// one shared eigendecomposition. The per-tile law is exact for the
    /// shipped kernels (all stationary in law under translation), but
    /// cross-tile correlations are dropped; use tiles a few correlation
    /// lengths wide. This keeps large windows at full resolution without
    /// blowing up the eigenproblem.
    pub tile_side: Option<f64>,
}

impl Default for GridParams {
    fn default() -> Self {
        Self {
            cells_per_unit: 20.0,
            max_cells: 4096,
            tile_side: None,
        }
    }
}

/// Spectral sampler for a determinantal process on a window: the kernel is
/// discretized on a regular grid, eigendecomposed once, and each draw runs
/// Bernoulli(λ_i) eigenfunction selection followed by sequential
/// projection-kernel sampling; sampled cells are jittered uniformly.
///
/// The eigendecomposition is the expensive part; keep the sampler around
/// and call [`DppSampler::sample`] per replicate.
pub struct DppSampler {
    window: Window,
    tiles_per_axis: usize,
    block_side: f64,
    cells_per_axis: usize,
    ncells: usize,
    eigvals: Vec<f64>,
    /// Column-major eigenvectors (one per column), length ncells².
    eigvecs: Vec<Complex64>,
}

impl DppSampler {
    pub fn new(
        window: Window,
        kernel: &KernelSpec,
        grid: GridParams,
    ) -> Result<Self, PointProcessError> {
        Self::with_scale(window, kernel, grid, 1.0)
    }

    /// As [`DppSampler::new`] but with the kernel multiplied by `scale`
    /// (used for the α-DPP decomposition kernel 𝒦/m).
    pub fn with_scale(
        window: Window,
        kernel: &KernelSpec,
        grid: GridParams,
        scale: f64,
    ) -> Result<Self, PointProcessError> {
        let d = window.d();
        if let Some(need) = kernel.dim_constraint() {
            if d != need {
                return Err(PointProcessError::Dimension(d, need));
            }
        }
        if grid.max_cells == 0 || grid.cells_per_unit <= 0.0 {
            return Err(PointProcessError::Parameter("invalid grid parameters".into()));
        }
        let side = window.side();
        let tiles_per_axis = match grid.tile_side {
            Some(ts) if ts > 0.0 => ((side / ts).round() as usize).max(1),
            Some(_) => {
                return Err(PointProcessError::Parameter("tile_side must be > 0".into()))
            }
            None => 1,
        };
        let block_side = side / tiles_per_axis as f64;
        let axis_cap = (grid.max_cells as f64).powf(1.0 / d as f64).floor() as usize;
        let cells_per_axis = ((block_side * grid.cells_per_unit).ceil() as usize)
            .max(1)
            .min(axis_cap.max(1));
        let ncells = cells_per_axis.pow(d as u32);
        let delta = block_side / cells_per_axis as f64;
        let cell_volume = delta.powi(d as i32);

        // Discretized kernel matrix M_ij = Δ·𝒦(x_i, x_j) on one tile
        // (centered at the origin; the tile law is translation invariant),
        // column-major.
        let centers: Vec<Vec<f64>> = (0..ncells)
            .map(|c| cell_center(d, block_side, cells_per_axis, c))
            .collect();
        let mut m = vec![Complex64::new(0.0, 0.0); ncells * ncells];
        for j in 0..ncells {
            for i in 0..ncells {
                m[j * ncells + i] = kernel.eval(&centers[i], &centers[j]) * cell_volume * scale;
            }
        }
        let eigvals = eigh_in_place(ncells, &mut m, true)
            .map_err(|info| PointProcessError::Kernel(format!("eigensolve failed: info={info}")))?;
        let max_eig = eigvals.iter().cloned().fold(0.0f64, f64::max);
        let min_eig = eigvals.iter().cloned().fold(f64::INFINITY, f64::min);
        if min_eig < -1e-8 * max_eig.max(1.0) {
            return Err(PointProcessError::KernelNotPsd(min_eig));
        }
        if max_eig > 1.0 + 0.05 {
            return Err(PointProcessError::Kernel(format!(
                "discretized kernel has eigenvalue {max_eig:.4} > 1; not a valid DPP"
            )));
        }
        let eigvals = eigvals.iter().map(|&l| l.clamp(0.0, 1.0)).collect();
        Ok(Self {
            window,
            tiles_per_axis,
            block_side,
            cells_per_axis,
            ncells,
            eigvals,
            eigvecs: m,
        })
    }

    /// Expected number of points over the whole window.
    pub fn expected_count(&self) -> f64 {
        let ntiles = self.tiles_per_axis.pow(self.window.d() as u32);
        ntiles as f64 * self.eigvals.iter().sum::<f64>()
    }

    /// Eigenproblem size (cells per tile).
    pub fn ncells(&self) -> usize {
        self.ncells
    }

    pub fn tiles_per_axis(&self) -> usize {
        self.tiles_per_axis
    }

    /// One draw. Deterministic given `seed`.
    pub fn sample(&self, seed: u64) -> PointConfig {
        let d = self.window.d();
        let t = self.tiles_per_axis;
        let ntiles = t.pow(d as u32);
        let half = self.window.half();
        let mut points = Vec::new();
        for tile in 0..ntiles {
            let mut idx = tile;
            let offset: Vec<f64> = (0..d)
                .map(|_| {
                    let i = idx % t;
                    idx /= t;
                    -half + (i as f64 + 0.5) * self.block_side
                })
                .collect();
            let mut rng = crate::seed::rng(seed, &[0xD99, tile as u64]);
            self.sample_tile(&offset, &mut rng, &mut points);
        }
        PointConfig::new(self.window, points, None).expect("sampled points are valid")
    }

    fn sample_tile(&self, offset: &[f64], rng: &mut impl Rng, out: &mut Vec<Vec<f64>>) {
        let n = self.ncells;
        // One uniform per eigenvalue; the kept set and its complement are
        // coupled so the cheaper projection (smaller rank) can be sampled.
        let selected: Vec<bool> = self
            .eigvals
            .iter()
            .map(|&l| rng.gen::<f64>() < l)
            .collect();
        let expected: f64 = self.eigvals.iter().sum();
        let direct = expected <= n as f64 / 2.0;
        let rank_indices: Vec<usize> = (0..n)
            .filter(|&i| selected[i] == direct)
            .collect();
        let chosen = self.sample_projection(&rank_indices, rng);
        let occupied: Vec<usize> = if direct {
            let mut v = chosen;
            v.sort_unstable();
            v
        } else {
            // Complement duality: the unoccupied cells of DPP(K) form a
            // DPP(I−K); we sampled those, so occupy the rest.
            let mut is_hole = vec![false; n];
            for c in chosen {
                is_hole[c] = true;
            }
            (0..n).filter(|&c| !is_hole[c]).collect()
        };
        let delta = self.block_side / self.cells_per_axis as f64;
        let d = self.window.d();
        for &c in &occupied {
            let center = cell_center(d, self.block_side, self.cells_per_axis, c);
            out.push(
                (0..d)
                    .map(|k| offset[k] + center[k] + rng.gen_range(-0.5..0.5) * delta)
                    .collect(),
            );
        }
    }

    /// Sequential sampling from the projection kernel spanned by the given
    /// eigenvector columns; returns the chosen cell indices.
    fn sample_projection(&self, cols: &[usize], rng: &mut impl Rng) -> Vec<usize> {
        let n = self.ncells;
        let k = cols.len();
        if k == 0 {
            return Vec::new();
        }
        // Residual diagonal of the projection kernel.
        let mut diag: Vec<f64> = (0..n)
            .map(|j| {
                cols.iter()
                    .map(|&c| self.eigvecs[c * n + j].norm_sqr())
                    .sum()
            })
            .collect();
        let mut basis: Vec<Vec<Complex64>> = Vec::with_capacity(k);
        let mut chosen = Vec::with_capacity(k);
        for _ in 0..k {
            let total: f64 = diag.iter().sum();
            let mut target = rng.gen::<f64>() * total;
            let mut cell = n - 1;
            for (j, &w) in diag.iter().enumerate() {
                target -= w;
                if target <= 0.0 {
                    cell = j;
                    break;
                }
            }
            // g = P e_cell orthogonalized against the chosen directions.
            let mut g: Vec<Complex64> = (0..n)
                .map(|i| {
                    cols.iter()
                        .map(|&c| self.eigvecs[c * n + i] * self.eigvecs[c * n + cell].conj())
                        .sum()
                })
                .collect();
            for prev in &basis {
                let coeff = prev[cell].conj();
                for i in 0..n {
                    g[i] -= coeff * prev[i];
                }
            }
            let norm = g[cell].re.max(1e-300).sqrt();
            for v in g.iter_mut() {
                *v /= norm;
            }
            for i in 0..n {
                diag[i] = (diag[i] - g[i].norm_sqr()).max(0.0);
            }
            diag[cell] = 0.0;
            chosen.push(cell);
            basis.push(g);
        }
        chosen
    }
}

/// Cell center in tile-local coordinates (tile centered at the origin).
fn cell_center(d: usize, block_side: f64, cells_per_axis: usize, cell: usize) -> Vec<f64> {
    let delta = block_side / cells_per_axis as f64;
    let half = block_side / 2.0;
    let mut c = cell;
    (0..d)
        .map(|_| {
            let idx = c % cells_per_axis;
            c /= cells_per_axis;
            -half + (idx as f64 + 0.5) * delta
        })
        .collect()
}

/// Convenience one-shot draw (builds the sampler, samples once).
pub fn sample_dpp(
    window: Window,
    kernel: &KernelSpec,
    grid: GridParams,
    seed: u64,
) -> Result<PointConfig, PointProcessError> {
    let sampler = DppSampler::new(window, kernel, grid)?;
    if sampler.expected_count() > POINT_BUDGET as f64 {
        return Err(PointProcessError::Budget(
            sampler.expected_count(),
            POINT_BUDGET,
        ));
    }
    Ok(sampler.sample(seed))
}

/// α-determinantal sampler for α = −1/m: the superposition of m
/// independent DPP draws with kernel 𝒦/m. Component i draws from the seed
/// stream `child(seed, [i])`; m = 1 delegates to `sample_dpp` seed-for-seed.
pub fn sample_alpha_dpp(
    window: Window,
    kernel: &KernelSpec,
    m: usize,
    grid: GridParams,
    seed: u64,
) -> Result<PointConfig, PointProcessError> {
    if m == 0 {
        return Err(PointProcessError::Parameter("m >= 1 required".into()));
    }
    if m == 1 {
        return sample_dpp(window, kernel, grid, seed);
    }
    let sampler = DppSampler::with_scale(window, kernel, grid, 1.0 / m as f64)?;
    let mut points = Vec::new();
    for i in 0..m {
        let component = sampler.sample(crate::seed::child_seed(seed, &[i as u64]));
        points.extend_from_slice(component.points());
    }
    PointConfig::new(window, points, None)
}
