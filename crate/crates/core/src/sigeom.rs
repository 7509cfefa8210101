//! Sphere-of-influence (sig) norm geometry: the norm itself, its
//! graph-connectivity characterization, the sublevel volume bound, and the
//! coarea-formula identities used by the integral decay bounds.

use crate::special::unit_ball_volume;
use rand::Rng;
use thiserror::Error;

/// Subset-enumeration guard; beyond this the bisection path is used.
pub const MAX_SUBSET_ENUM: usize = 16;

#[derive(Debug, Error)]
pub enum SigeomError {
    #[error("configuration must contain at least one point besides the origin")]
    Empty,
    #[error("dimension mismatch in configuration")]
    DimensionMismatch,
    #[error("unsupported selector for this check")]
    UnsupportedSelector,
    #[error("power-mode exponent l={l} too small for d(p-1)={dp}; integral diverges")]
    Divergent { l: usize, dp: usize },
    #[error("guard exceeded: {0}")]
    Guard(String),
}

/// `p-1` points in ℝ^d; the implicit 0-th point is the origin.
#[derive(Clone, Debug)]
pub struct SigConfig {
    d: usize,
    x: Vec<Vec<f64>>,
}

impl SigConfig {
    pub fn new(d: usize, x: Vec<Vec<f64>>) -> Result<Self, SigeomError> {
        if x.is_empty() {
            return Err(SigeomError::Empty);
        }
        if x.iter().any(|v| v.len() != d) {
            return Err(SigeomError::DimensionMismatch);
        }
        Ok(Self { d, x })
    }

    pub fn d(&self) -> usize {
        self.d
    }

    pub fn points(&self) -> &[Vec<f64>] {
        &self.x
    }

    /// Number of points including the origin.
    pub fn p(&self) -> usize {
        self.x.len() + 1
    }

    /// Pairwise distance matrix over {origin, x_1, ..., x_{p-1}}.
    fn distances(&self) -> Vec<Vec<f64>> {
        let q = self.x.len() + 1;
        let coord = |i: usize, k: usize| if i == 0 { 0.0 } else { self.x[i - 1][k] };
        let mut dist = vec![vec![0.0; q]; q];
        for i in 0..q {
            for j in i + 1..q {
                let d2: f64 = (0..self.d)
                    .map(|k| (coord(i, k) - coord(j, k)).powi(2))
                    .sum();
                dist[i][j] = d2.sqrt();
                dist[j][i] = dist[i][j];
            }
        }
        dist
    }
}

struct UnionFind {
    parent: Vec<usize>,
    size: Vec<usize>,
}

impl UnionFind {
    fn new(len: usize) -> Self {
        Self {
            parent: (0..len).collect(),
            size: vec![1; len],
        }
    }

    fn find(&mut self, mut id: usize) -> usize {
        while self.parent[id] != id {
            self.parent[id] = self.parent[self.parent[id]];
            id = self.parent[id];
        }
        id
    }

    fn union(&mut self, a: usize, b: usize) {
        let ra = self.find(a);
        let rb = self.find(b);
        if ra == rb {
            return;
        }
        if self.size[ra] >= self.size[rb] {
            self.parent[rb] = ra;
            self.size[ra] += self.size[rb];
        } else {
            self.parent[ra] = rb;
            self.size[rb] += self.size[ra];
        }
    }
}

/// Whether the sphere-of-influence graph of {0, x_1..x_{p-1}} at radius `r`
/// (edges at pairwise distance ≤ r) is connected.
pub fn sig_connected(cfg: &SigConfig, r: f64) -> bool {
    let dist = cfg.distances();
    let q = dist.len();
    let mut uf = UnionFind::new(q);
    for i in 0..q {
        for j in i + 1..q {
            if dist[i][j] <= r {
                uf.union(i, j);
            }
        }
    }
    let root = uf.find(0);
    (1..q).all(|i| uf.find(i) == root)
}

/// The sig-norm: max over I ⊆ {1..p-1}, I^c ≠ ∅, of
/// dist((0, x_I), x_{I^c}); equals the smallest r at which SIG_r is
/// connected. Subset enumeration for p-1 ≤ 16, threshold search over the
/// sorted pairwise distances beyond that.
pub fn sig_norm(cfg: &SigConfig) -> f64 {
    let m = cfg.x.len();
    let dist = cfg.distances();
    if m <= MAX_SUBSET_ENUM {
        let mut best = 0.0f64;
        // I as a bitmask over x_1..x_m; I = full set excluded (empty I^c).
        for i_mask in 0..(1u32 << m) - 1 {
            let mut gap = f64::INFINITY;
            for i in 0..=m {
                // left side: origin (i = 0) plus I
                if i > 0 && i_mask & (1 << (i - 1)) == 0 {
                    continue;
                }
                for j in 1..=m {
                    if i_mask & (1 << (j - 1)) != 0 {
                        continue;
                    }
                    gap = gap.min(dist[i][j]);
                }
            }
            best = best.max(gap);
        }
        best
    } else {
        // The threshold is one of the pairwise distances; binary-search it.
        let mut values: Vec<f64> = Vec::new();
        for i in 0..dist.len() {
            for j in i + 1..dist.len() {
                values.push(dist[i][j]);
            }
        }
        values.sort_unstable_by(|a, b| a.partial_cmp(b).unwrap());
        let mut lo = 0usize; // connected at values[hi], unknown below
        let mut hi = values.len() - 1;
        debug_assert!(sig_connected(cfg, values[hi]));
        while lo < hi {
            let mid = (lo + hi) / 2;
            if sig_connected(cfg, values[mid]) {
                hi = mid;
            } else {
                lo = mid + 1;
            }
        }
        values[hi]
    }
}

/// Monte Carlo estimate of Vol(‖·‖_sig ≤ 1) on (ℝ^d)^{p-1}.
#[derive(Clone, Copy, Debug)]
pub struct VolumeEstimate {
    pub estimate: f64,
    pub stderr: f64,
    /// ϑ_d^{p-1} p^{p-2}, the sharper count from the proof.
    pub bound_sharp: f64,
    /// (e ϑ_d)^{p-1} p!, the stated lemma bound.
    pub bound_stated: f64,
}

/// Samples the bounding box [−(p−1), p−1]^{d(p−1)} (a connected SIG_1 chain
/// from the origin has diameter ≤ p−1) and counts sublevel membership.
pub fn sig_volume_mc(d: usize, p: usize, samples: usize, seed: u64) -> VolumeEstimate {
    assert!(p >= 2 && samples > 0);
    let m = p - 1;
    let side = 2.0 * m as f64;
    let box_volume = side.powi((d * m) as i32);
    let mut rng = crate::seed::rng(seed, &[0x51670]);
    let mut hits = 0usize;
    for _ in 0..samples {
        let x: Vec<Vec<f64>> = (0..m)
            .map(|_| (0..d).map(|_| rng.gen_range(-(m as f64)..m as f64)).collect())
            .collect();
        let cfg = SigConfig { d, x };
        if sig_connected(&cfg, 1.0) {
            hits += 1;
        }
    }
    let frac = hits as f64 / samples as f64;
    let theta = unit_ball_volume(d);
    VolumeEstimate {
        estimate: box_volume * frac,
        stderr: box_volume * (frac * (1.0 - frac) / samples as f64).sqrt(),
        bound_sharp: theta.powi(m as i32) * (p as f64).powi(p as i32 - 2),
        bound_stated: (std::f64::consts::E * theta).powi(m as i32) * factorial(p),
    }
}

fn factorial(n: usize) -> f64 {
    (1..=n).map(|i| i as f64).product()
}

/// Homogeneous norm selector for the coarea identity.
#[derive(Clone, Debug)]
pub enum NormKind {
    Euclidean { d: usize },
    MaxNorm { d: usize },
    Sig { d: usize, p: usize },
}

impl NormKind {
    fn dim(&self) -> usize {
        match self {
            NormKind::Euclidean { d } | NormKind::MaxNorm { d } => *d,
            NormKind::Sig { d, p } => d * (p - 1),
        }
    }
}

/// Radial profile selector; `PolyInd` is 1{s ≤ 1} · Σ_k c_k s^k.
#[derive(Clone, Debug)]
pub enum ProfileKind {
    ExpNeg,
    ExpNegSq,
    PolyInd(Vec<f64>),
}

impl ProfileKind {
    fn eval(&self, s: f64) -> f64 {
        match self {
            ProfileKind::ExpNeg => (-s).exp(),
            ProfileKind::ExpNegSq => (-s * s).exp(),
            ProfileKind::PolyInd(coeffs) => {
                if s <= 1.0 {
                    coeffs
                        .iter()
                        .enumerate()
                        .map(|(k, &c)| c * s.powi(k as i32))
                        .sum()
                } else {
                    0.0
                }
            }
        }
    }

    /// Truncation radius with negligible documented tail for the norms in
    /// use (all dominate a multiple of the max-norm on the bounding box).
    fn cutoff(&self) -> f64 {
        match self {
            ProfileKind::ExpNeg => 40.0,
            ProfileKind::ExpNegSq => 8.0,
            ProfileKind::PolyInd(_) => 1.0,
        }
    }
}

/// Coarea identity audit: lhs = ∫_{ℝ^D} f(u(x)) dx (tensor midpoint
/// quadrature for the closed-form norms, Monte Carlo for sig), rhs =
/// D · Vol_D(u ≤ 1) · ∫_0^∞ s^{D−1} f(s) ds by 1-d quadrature.
pub fn coarea_identity_check(
    u: &NormKind,
    f: &ProfileKind,
    seed: u64,
) -> Result<(f64, f64, bool), SigeomError> {
    let dim = u.dim();
    let (lhs, mc_stderr) = match u {
        NormKind::Euclidean { d } | NormKind::MaxNorm { d } => {
            if *d > 3 {
                return Err(SigeomError::UnsupportedSelector);
            }
            let euclid = matches!(u, NormKind::Euclidean { .. });
            let radius = f.cutoff();
            let cells_per_axis = if *d <= 2 { 2000 } else { 240 };
            let h = 2.0 * radius / cells_per_axis as f64;
            let mut sum = 0.0;
            let mut idx = vec![0usize; *d];
            loop {
                let x: Vec<f64> = idx
                    .iter()
                    .map(|&i| -radius + (i as f64 + 0.5) * h)
                    .collect();
                let norm = if euclid {
                    x.iter().map(|v| v * v).sum::<f64>().sqrt()
                } else {
                    x.iter().fold(0.0f64, |m, v| m.max(v.abs()))
                };
                sum += f.eval(norm);
                // odometer increment
                let mut k = 0;
                loop {
                    idx[k] += 1;
                    if idx[k] < cells_per_axis {
                        break;
                    }
                    idx[k] = 0;
                    k += 1;
                    if k == *d {
                        break;
                    }
                }
                if k == *d {
                    break;
                }
            }
            (sum * h.powi(*d as i32), 0.0)
        }
        NormKind::Sig { d, p } => {
            if d * (p - 1) > 8 {
                return Err(SigeomError::Guard("sig coarea limited to d(p-1) <= 8".into()));
            }
            // MC over the support box; u(x) ≥ max_j ‖x_j‖_∞ / (p−1), so
            // f's cutoff bounds the support at (p−1)·cutoff per coordinate.
            let m = p - 1;
            let half = m as f64 * f.cutoff();
            let vol_box = (2.0 * half).powi((d * m) as i32);
            let samples = 400_000usize;
            let mut rng = crate::seed::rng(seed, &[0xC0A7EA]);
            let mut sum = 0.0;
            let mut sq = 0.0;
            for _ in 0..samples {
                let x: Vec<Vec<f64>> = (0..m)
                    .map(|_| (0..*d).map(|_| rng.gen_range(-half..half)).collect())
                    .collect();
                let v = f.eval(sig_norm(&SigConfig { d: *d, x }));
                sum += v;
                sq += v * v;
            }
            let mean = sum / samples as f64;
            let var = (sq / samples as f64 - mean * mean).max(0.0);
            (
                vol_box * mean,
                vol_box * (var / samples as f64).sqrt(),
            )
        }
    };

    let (vol, vol_stderr) = match u {
        NormKind::Euclidean { d } => (unit_ball_volume(*d), 0.0),
        NormKind::MaxNorm { d } => (2f64.powi(*d as i32), 0.0),
        NormKind::Sig { d, p } => {
            let est = sig_volume_mc(*d, *p, 400_000, seed ^ 0x5eed);
            (est.estimate, est.stderr)
        }
    };
    let radial = radial_integral(dim, |s| f.eval(s), f.cutoff());
    let rhs = dim as f64 * vol * radial;
    let tol = 1e-3 * rhs.abs().max(1.0)
        + 3.0 * (mc_stderr + dim as f64 * vol_stderr * radial);
    Ok((lhs, rhs, (lhs - rhs).abs() <= tol))
}

/// Simpson quadrature of ∫_0^upper s^{dim-1} f(s) ds.
fn radial_integral(dim: usize, f: impl Fn(f64) -> f64, upper: f64) -> f64 {
    let n = 40_000usize; // even
    let h = upper / n as f64;
    let g = |s: f64| s.powi(dim as i32 - 1) * f(s);
    let mut sum = g(0.0) + g(upper);
    for i in 1..n {
        let w = if i % 2 == 1 { 4.0 } else { 2.0 };
        sum += w * g(i as f64 * h);
    }
    sum * h / 3.0
}

/// Decay mode for [`integral_decay_bounds_check`].
#[derive(Clone, Copy, Debug)]
pub enum DecayMode {
    Power { l: usize },
    Exp { c: f64, a_hat: f64 },
}

/// Checks the tree-distance integral corollary:
/// ∫ (max{‖x‖_sig, 1})^{-l} dx ≤ C^p p! and
/// ∫ e^{-c max{‖x‖_sig, 1}^â} dx ≤ C^p p!^{1+d/â}.
///
/// The integral value uses the coarea reduction exactly: D · V · (F(1)/D +
/// ∫_1^∞ s^{D−1} F(s) ds) with V the MC sublevel volume; the bound's C is
/// the smallest C ≥ 1 closing the proof's chain through the stated volume
/// bound (e ϑ_d)^{p−1} p! and the 1-d integral estimates.
pub fn integral_decay_bounds_check(
    d: usize,
    p: usize,
    mode: DecayMode,
    samples: usize,
    seed: u64,
) -> Result<(f64, f64, bool), SigeomError> {
    let dp = d * (p - 1);
    if dp > 6 {
        return Err(SigeomError::Guard("d(p-1) <= 6 required".into()));
    }
    if let DecayMode::Power { l } = mode {
        if l <= dp + 1 {
            return Err(SigeomError::Divergent { l, dp });
        }
    }
    let big_d = dp as f64;
    let vol = sig_volume_mc(d, p, samples, seed);
    // 1-d pieces: ∫_0^1 s^{D-1} F(1) ds = F(1)/D, plus the exact tail.
    let (f_at_1, tail) = match mode {
        DecayMode::Power { l } => (1.0, 1.0 / (l as f64 - big_d)),
        DecayMode::Exp { c, a_hat } => {
            let s_max = (50.0f64 / c).powf(1.0 / a_hat).max(2.0);
            let n = 40_000usize;
            let h = (s_max - 1.0) / n as f64;
            let g = |s: f64| s.powf(big_d - 1.0) * (-c * s.powf(a_hat)).exp();
            let mut sum = g(1.0) + g(s_max);
            for i in 1..n {
                sum += if i % 2 == 1 { 4.0 } else { 2.0 } * g(1.0 + i as f64 * h);
            }
            ((-c).exp(), sum * h / 3.0)
        }
    };
    let one_d = f_at_1 / big_d + tail;
    let value = big_d * vol.estimate * one_d;
    let value_stderr = big_d * vol.stderr * one_d;

    let chain = big_d * vol.bound_stated * one_d;
    let fact_p = factorial(p);
    let (target, exponent_note) = match mode {
        DecayMode::Power { .. } => (fact_p, 1.0),
        DecayMode::Exp { a_hat, .. } => (fact_p.powf(1.0 + d as f64 / a_hat), 1.0 + d as f64 / a_hat),
    };
    let _ = exponent_note;
    let c_const = (chain / target).powf(1.0 / p as f64).max(1.0);
    let bound = c_const.powi(p as i32) * target;
    Ok((value, bound, value <= bound + 3.0 * value_stderr))
}
