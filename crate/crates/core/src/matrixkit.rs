//! Exact α-determinants, a pivoted determinant oracle, Schatten-1 norms,
//! and the determinant-continuity / DPP block-factorization audits.

use crate::linalg::eigh_in_place;
use crate::pointproc::KernelSpec;
use num_complex::Complex64;
use thiserror::Error;

/// Guard for the n! permutation sum.
pub const MAX_ALPHA_DET: usize = 10;

#[derive(Debug, Error)]
pub enum MatrixError {
    #[error("dimension {0} exceeds the permutation-sum guard {1}")]
    SizeGuard(usize, usize),
    #[error("dimension mismatch: {0} vs {1}")]
    DimensionMismatch(usize, usize),
    #[error("matrix entries must be finite")]
    NonFinite,
    #[error("degenerate configuration: duplicate points")]
    DuplicatePoints,
    #[error("index subset must be a nonempty proper subset of the points")]
    BadSubset,
}

/// Dense square complex matrix, row-major.
#[derive(Clone, Debug, PartialEq)]
pub struct SquareMatrix {
    n: usize,
    data: Vec<Complex64>,
}

impl SquareMatrix {
    pub fn new(n: usize, data: Vec<Complex64>) -> Result<Self, MatrixError> {
        if data.len() != n * n {
            return Err(MatrixError::DimensionMismatch(data.len(), n * n));
        }
        if data.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
            return Err(MatrixError::NonFinite);
        }
        Ok(Self { n, data })
    }

    pub fn from_rows(rows: &[Vec<Complex64>]) -> Result<Self, MatrixError> {
        let n = rows.len();
        let mut data = Vec::with_capacity(n * n);
        for row in rows {
            if row.len() != n {
                return Err(MatrixError::DimensionMismatch(row.len(), n));
            }
            data.extend_from_slice(row);
        }
        Self::new(n, data)
    }

    pub fn from_real_rows(rows: &[Vec<f64>]) -> Result<Self, MatrixError> {
        let rows: Vec<Vec<Complex64>> = rows
            .iter()
            .map(|r| r.iter().map(|&x| Complex64::new(x, 0.0)).collect())
            .collect();
        Self::from_rows(&rows)
    }

    pub fn identity(n: usize) -> Self {
        let mut data = vec![Complex64::new(0.0, 0.0); n * n];
        for i in 0..n {
            data[i * n + i] = Complex64::new(1.0, 0.0);
        }
        Self { n, data }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn get(&self, i: usize, j: usize) -> Complex64 {
        self.data[i * self.n + j]
    }

    pub fn set(&mut self, i: usize, j: usize, v: Complex64) {
        self.data[i * self.n + j] = v;
    }

    /// A - B, same dimension required.
    pub fn sub(&self, other: &Self) -> Result<Self, MatrixError> {
        if self.n != other.n {
            return Err(MatrixError::DimensionMismatch(self.n, other.n));
        }
        let data = self
            .data
            .iter()
            .zip(&other.data)
            .map(|(a, b)| a - b)
            .collect();
        Ok(Self { n: self.n, data })
    }
}

fn alpha_pow(alpha: f64, e: usize) -> f64 {
    if e == 0 {
        1.0 // α^0 = 1 including the α = 0 limit (identity-permutation term)
    } else {
        alpha.powi(e as i32)
    }
}

fn cycle_count(perm: &[usize]) -> usize {
    let mut seen = vec![false; perm.len()];
    let mut cycles = 0;
    for start in 0..perm.len() {
        if seen[start] {
            continue;
        }
        cycles += 1;
        let mut i = start;
        while !seen[i] {
            seen[i] = true;
            i = perm[i];
        }
    }
    cycles
}

/// α-determinant det_α(A) = Σ_{τ∈𝒮_n} α^{n−ν(τ)} Π_i a_{i,τ(i)}, with ν(τ)
/// the number of cycles. α = −1 is the determinant, α = 1 the permanent,
/// α = 0 the diagonal product (Poisson limit).
pub fn det_alpha(a: &SquareMatrix, alpha: f64) -> Result<Complex64, MatrixError> {
    let n = a.n;
    if n > MAX_ALPHA_DET {
        return Err(MatrixError::SizeGuard(n, MAX_ALPHA_DET));
    }
    let mut perm: Vec<usize> = (0..n).collect();
    let mut sum = Complex64::new(0.0, 0.0);
    // Heap's algorithm, iterative form; cycles recounted per permutation
    // (O(n), negligible against the O(n) entry product).
    let mut c = vec![0usize; n];
    let mut visit = |perm: &[usize]| {
        let mut prod = Complex64::new(1.0, 0.0);
        for (i, &j) in perm.iter().enumerate() {
            prod *= a.get(i, j);
        }
        sum += prod * alpha_pow(alpha, n - cycle_count(perm));
    };
    visit(&perm);
    let mut i = 1;
    while i < n {
        if c[i] < i {
            if i % 2 == 0 {
                perm.swap(0, i);
            } else {
                perm.swap(c[i], i);
            }
            visit(&perm);
            c[i] += 1;
            i = 1;
        } else {
            c[i] = 0;
            i += 1;
        }
    }
    Ok(sum)
}

/// Determinant via partially pivoted LU; returns 0 for singular input.
pub fn det_lu(a: &SquareMatrix) -> Complex64 {
    let n = a.n;
    let mut m = a.data.clone();
    let mut det = Complex64::new(1.0, 0.0);
    for col in 0..n {
        let mut pivot = col;
        let mut best = m[col * n + col].norm_sqr();
        for row in col + 1..n {
            let mag = m[row * n + col].norm_sqr();
            if mag > best {
                best = mag;
                pivot = row;
            }
        }
        if best == 0.0 {
            return Complex64::new(0.0, 0.0);
        }
        if pivot != col {
            for j in 0..n {
                m.swap(col * n + j, pivot * n + j);
            }
            det = -det;
        }
        let diag = m[col * n + col];
        det *= diag;
        for row in col + 1..n {
            let factor = m[row * n + col] / diag;
            for j in col..n {
                let sub = factor * m[col * n + j];
                m[row * n + j] -= sub;
            }
        }
    }
    det
}

/// Schatten 1-norm: sum of singular values, computed from the Hermitian
/// eigendecomposition of A*A with a relative cutoff for numerical noise.
pub fn schatten1(a: &SquareMatrix) -> f64 {
    let n = a.n;
    if n == 0 {
        return 0.0;
    }
    // B = A^H A, column-major for LAPACK (B is Hermitian, so row/column
    // major only conjugates it, leaving the spectrum unchanged).
    let mut b = vec![Complex64::new(0.0, 0.0); n * n];
    for j in 0..n {
        for i in 0..n {
            let mut acc = Complex64::new(0.0, 0.0);
            for k in 0..n {
                acc += a.get(k, i).conj() * a.get(k, j);
            }
            b[j * n + i] = acc;
        }
    }
    let eig = eigh_in_place(n, &mut b, false).expect("eigensolve failed");
    let sigma_max = eig.iter().fold(0.0f64, |m, &l| m.max(l.max(0.0))).sqrt();
    let cutoff = 1e-12 * sigma_max;
    eig.iter()
        .map(|&l| l.max(0.0).sqrt())
        .filter(|&s| s > cutoff)
        .sum()
}

/// Determinant-continuity audit:
/// |det A − det B| ≤ ‖A−B‖_{S1} · e^{‖A‖_{S1} + ‖B‖_{S1}}.
pub fn det_continuity_check(
    a: &SquareMatrix,
    b: &SquareMatrix,
) -> Result<(f64, f64, bool), MatrixError> {
    let gap = (det_lu(a) - det_lu(b)).norm();
    let bound = schatten1(&a.sub(b)?) * (schatten1(a) + schatten1(b)).exp();
    Ok((gap, bound, gap <= bound * (1.0 + 1e-12)))
}

/// Correlation-function factorization gap for a determinantal process:
/// lhs = |ρ^{(p)}(x) − ρ^{(|I|)}(x_I) ρ^{(|I^c|)}(x_{I^c})|,
/// rhs = p² Φ(dist(x_I, x_{I^c})) e^{p‖𝒦‖_∞}.
pub fn dpp_block_factorization_gap(
    points: &[Vec<f64>],
    kernel: &KernelSpec,
    i_mask: u32,
) -> Result<(f64, f64), MatrixError> {
    let p = points.len();
    if !(2..=8).contains(&p) {
        return Err(MatrixError::SizeGuard(p, 8));
    }
    if i_mask == 0 || i_mask >= (1u32 << p) - 1 {
        return Err(MatrixError::BadSubset);
    }
    for i in 0..p {
        for j in i + 1..p {
            if points[i] == points[j] {
                return Err(MatrixError::DuplicatePoints);
            }
        }
    }
    let gram = |idx: &[usize]| -> SquareMatrix {
        let k = idx.len();
        let mut m = SquareMatrix::identity(k);
        for (a, &ia) in idx.iter().enumerate() {
            for (b, &ib) in idx.iter().enumerate() {
                m.set(a, b, kernel.eval(&points[ia], &points[ib]));
            }
        }
        m
    };
    let all: Vec<usize> = (0..p).collect();
    let left: Vec<usize> = (0..p).filter(|&i| i_mask & (1 << i) != 0).collect();
    let right: Vec<usize> = (0..p).filter(|&i| i_mask & (1 << i) == 0).collect();
    let rho_all = det_lu(&gram(&all)).re;
    let rho_left = det_lu(&gram(&left)).re;
    let rho_right = det_lu(&gram(&right)).re;
    let lhs = (rho_all - rho_left * rho_right).abs();
    let mut dist = f64::INFINITY;
    for &i in &left {
        for &j in &right {
            let d2: f64 = points[i]
                .iter()
                .zip(&points[j])
                .map(|(a, b)| (a - b) * (a - b))
                .sum();
            dist = dist.min(d2.sqrt());
        }
    }
    let rhs = (p * p) as f64 * kernel.phi(dist) * ((p as f64) * kernel.sup_norm()).exp();
    Ok((lhs, rhs))
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::Rng;

    fn random_matrix(n: usize, rng: &mut impl Rng) -> SquareMatrix {
        SquareMatrix::new(
            n,
            (0..n * n)
                .map(|_| Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)))
                .collect(),
        )
        .unwrap()
    }

    #[test]
    fn det_alpha_closed_forms() {
        let id2 = SquareMatrix::identity(2);
        assert_eq!(det_alpha(&id2, -1.0).unwrap(), Complex64::new(1.0, 0.0));

        let ones = SquareMatrix::from_real_rows(&[vec![1.0, 1.0], vec![1.0, 1.0]]).unwrap();
        assert_eq!(det_alpha(&ones, 1.0).unwrap().re, 2.0); // permanent

        // det_α([[x,y],[z,w]]) = xw + α yz.
        let (x, y, z, w) = (1.3, -0.4, 2.2, 0.9);
        let a = SquareMatrix::from_real_rows(&[vec![x, y], vec![z, w]]).unwrap();
        for &alpha in &[-1.0, -0.5, 0.0, 0.7, 1.0] {
            let got = det_alpha(&a, alpha).unwrap().re;
            assert!((got - (x * w + alpha * y * z)).abs() < 1e-14, "alpha={alpha}");
        }
    }

    #[test]
    fn det_alpha_zero_is_diagonal_product() {
        let mut rng = crate::seed::rng(3, &[0]);
        let a = random_matrix(5, &mut rng);
        let diag: Complex64 = (0..5).map(|i| a.get(i, i)).product();
        let got = det_alpha(&a, 0.0).unwrap();
        assert!((got - diag).norm() < 1e-12);
    }

    #[test]
    fn det_alpha_guard() {
        assert!(det_alpha(&SquareMatrix::identity(11), -1.0).is_err());
    }

    #[test]
    fn det_lu_oracle_agreement() {
        let mut rng = crate::seed::rng(5, &[0]);
        assert_eq!(det_lu(&SquareMatrix::identity(5)), Complex64::new(1.0, 0.0));
        let diag = SquareMatrix::from_real_rows(&[vec![2.0, 0.0], vec![0.0, 3.0]]).unwrap();
        assert_eq!(det_lu(&diag).re, 6.0);
        for n in 1..=8 {
            for _ in 0..40 {
                let a = random_matrix(n, &mut rng);
                let exact = det_alpha(&a, -1.0).unwrap();
                let fast = det_lu(&a);
                assert!(
                    (exact - fast).norm() <= 1e-9 * exact.norm().max(1.0),
                    "n={n}: {exact} vs {fast}"
                );
            }
        }
    }

    #[test]
    fn det_lu_singular() {
        let a = SquareMatrix::from_real_rows(&[vec![1.0, 2.0], vec![2.0, 4.0]]).unwrap();
        assert_eq!(det_lu(&a), Complex64::new(0.0, 0.0));
    }

    #[test]
    fn row_scaling_multilinearity() {
        let mut rng = crate::seed::rng(9, &[0]);
        for &alpha in &[-1.0, -0.25, 1.0] {
            let a = random_matrix(4, &mut rng);
            let base = det_alpha(&a, alpha).unwrap();
            let c = 1.7;
            let mut scaled = a.clone();
            for j in 0..4 {
                scaled.set(2, j, a.get(2, j) * c);
            }
            let got = det_alpha(&scaled, alpha).unwrap();
            assert!((got - base * c).norm() < 1e-10 * base.norm().max(1.0));
        }
    }

    #[test]
    fn schatten_values() {
        assert!((schatten1(&SquareMatrix::identity(3)) - 3.0).abs() < 1e-10);
        let diag = SquareMatrix::from_real_rows(&[vec![-2.0, 0.0], vec![0.0, 1.0]]).unwrap();
        assert!((schatten1(&diag) - 3.0).abs() < 1e-10);
    }

    #[test]
    fn schatten_psd_equals_trace_and_triangle() {
        let mut rng = crate::seed::rng(13, &[0]);
        for n in 2..=6 {
            let b = random_matrix(n, &mut rng);
            // PSD Gram B^H B.
            let mut g = SquareMatrix::identity(n);
            for i in 0..n {
                for j in 0..n {
                    let mut acc = Complex64::new(0.0, 0.0);
                    for k in 0..n {
                        acc += b.get(k, i).conj() * b.get(k, j);
                    }
                    g.set(i, j, acc);
                }
            }
            let trace: f64 = (0..n).map(|i| g.get(i, i).re).sum();
            assert!((schatten1(&g) - trace).abs() < 1e-8 * trace.max(1.0));

            let x = random_matrix(n, &mut rng);
            let y = random_matrix(n, &mut rng);
            let mut sum = x.clone();
            for i in 0..n {
                for j in 0..n {
                    sum.set(i, j, x.get(i, j) + y.get(i, j));
                }
            }
            assert!(schatten1(&sum) <= schatten1(&x) + schatten1(&y) + 1e-9);
        }
    }

    #[test]
    fn continuity_check_cases() {
        let a = SquareMatrix::identity(2);
        let (gap, bound, ok) = det_continuity_check(&a, &a).unwrap();
        assert_eq!(gap, 0.0);
        assert!(ok && bound >= 0.0);

        let zero = SquareMatrix::new(2, vec![Complex64::new(0.0, 0.0); 4]).unwrap();
        let (gap, bound, ok) = det_continuity_check(&a, &zero).unwrap();
        assert!((gap - 1.0).abs() < 1e-12);
        assert!((bound - 2.0 * (2.0f64).exp()).abs() < 1e-9);
        assert!(ok);

        let mut rng = crate::seed::rng(17, &[0]);
        for _ in 0..100 {
            let n = rng.gen_range(1..=6);
            let a = random_matrix(n, &mut rng);
            let b = random_matrix(n, &mut rng);
            let (_, _, ok) = det_continuity_check(&a, &b).unwrap();
            assert!(ok);
        }
    }

    #[test]
    fn block_gap_ginibre_pair() {
        let kernel = KernelSpec::ginibre();
        for &r in &[0.5, 1.0, 2.0] {
            let points = vec![vec![0.0, 0.0], vec![r, 0.0]];
            let (lhs, rhs) = dpp_block_factorization_gap(&points, &kernel, 0b01).unwrap();
            // ρ^{(2)} = (1 − e^{−r²})/π², ρ^{(1)}ρ^{(1)} = 1/π²
            // → lhs = e^{−r²}/π².
            let pi2 = std::f64::consts::PI * std::f64::consts::PI;
            assert!((lhs - (-r * r).exp() / pi2).abs() < 1e-12, "r={r}");
            assert!(lhs <= rhs);
        }
    }

    #[test]
    fn block_gap_separated_clusters() {
        let kernel = KernelSpec::ginibre();
        let points = vec![
            vec![0.0, 0.0],
            vec![0.7, 0.3],
            vec![12.0, 0.0],
            vec![12.5, -0.4],
        ];
        let (lhs, _) = dpp_block_factorization_gap(&points, &kernel, 0b0011).unwrap();
        // Analytically ~e^{−144}; numerically limited by f64 cancellation
        // in the determinants (entries ~1/π², eps-level noise ~1e-18).
        assert!(lhs <= 1e-16, "lhs={lhs}");
    }

    #[test]
    fn block_gap_errors() {
        let kernel = KernelSpec::ginibre();
        let dup = vec![vec![0.0, 0.0], vec![0.0, 0.0]];
        assert!(matches!(
            dpp_block_factorization_gap(&dup, &kernel, 0b01),
            Err(MatrixError::DuplicatePoints)
        ));
        let pts = vec![vec![0.0, 0.0], vec![1.0, 0.0]];
        assert!(dpp_block_factorization_gap(&pts, &kernel, 0b11).is_err());
    }

    #[test]
    fn alpha_repulsion_two_point() {
        // ρ_α^{(2)}(x1,x2) ≤ ρ^{(1)}(x1)ρ^{(1)}(x2) for α < 0.
        let kernel = KernelSpec::ginibre();
        for m in 1..=4u32 {
            let alpha = -1.0 / m as f64;
            for &r in &[0.3, 0.8, 1.5] {
                let pts = [vec![0.0, 0.0], vec![r, 0.0]];
                let g = SquareMatrix::from_rows(&[
                    vec![kernel.eval(&pts[0], &pts[0]), kernel.eval(&pts[0], &pts[1])],
                    vec![kernel.eval(&pts[1], &pts[0]), kernel.eval(&pts[1], &pts[1])],
                ])
                .unwrap();
                let rho2 = det_alpha(&g, alpha).unwrap().re;
                let rho1 = kernel.eval(&pts[0], &pts[0]).re;
                assert!(rho2 <= rho1 * rho1 + 1e-12);
            }
        }
    }
}
