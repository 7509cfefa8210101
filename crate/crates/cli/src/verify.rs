use anyhow::{bail, Result};
use geocume_core::combinatorics::{
    clustering_decomposition, evaluate_terms, full_mask, moments_to_cumulants,
    partition_sum_bound_check, touchard, touchard_series_bound_check, MomentTable,
};
use geocume_core::matrixkit::{
    det_alpha, det_continuity_check, det_lu, dpp_block_factorization_gap, SquareMatrix,
};
use geocume_core::pointproc::KernelSpec;
use geocume_core::sigeom::{
    coarea_identity_check, sig_connected, sig_norm, NormKind, ProfileKind, SigConfig,
};
use num_complex::Complex64;
use rand::Rng;

const VERIFY_SEED: u64 = 0x6E0C;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Suite {
    Combinatorics,
    Matrix,
    Sigeom,
    All,
}

impl std::str::FromStr for Suite {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, String> {
        Ok(match s {
            "combinatorics" => Suite::Combinatorics,
            "matrix" => Suite::Matrix,
            "sigeom" => Suite::Sigeom,
            "all" => Suite::All,
            other => {
                return Err(format!(
                    "unknown suite `{other}` (combinatorics|matrix|sigeom|all)"
                ))
            }
        })
    }
}

/// Runs the deterministic lemma-identity suites; hermetic (fixed seeds, no
/// cache or network). Err carries the serialized failing case.
pub fn cmd_verify(suite: Suite) -> Result<Vec<(String, usize)>> {
    let mut done = Vec::new();
    if matches!(suite, Suite::Combinatorics | Suite::All) {
        done.push(("combinatorics".to_string(), verify_combinatorics()?));
    }
    if matches!(suite, Suite::Matrix | Suite::All) {
        done.push(("matrix".to_string(), verify_matrix()?));
    }
    if matches!(suite, Suite::Sigeom | Suite::All) {
        done.push(("sigeom".to_string(), verify_sigeom()?));
    }
    Ok(done)
}

fn random_moment_table(p: usize, rng: &mut impl Rng) -> MomentTable {
    MomentTable::new(p, |_| rng.gen_range(0.5..1.5)).unwrap()
}

fn verify_combinatorics() -> Result<usize> {
    let mut rng = geocume_core::seed::rng(VERIFY_SEED, &[0xC0]);
    let mut checks = 0usize;
    // Clustering identity: decomposition sum == partition-formula cumulant
    // for every admissible I (1 ∈ I) and random tables.
    for p in 2..=6usize {
        let full = full_mask(p);
        for _ in 0..25 {
            let m = random_moment_table(p, &mut rng);
            let kappa = moments_to_cumulants(&m).get(full)?;
            for i_mask in (1..full).filter(|m| m & 1 == 1) {
                let terms = clustering_decomposition(p, i_mask)?;
                let got = evaluate_terms(&terms, &m);
                if (got - kappa).abs() > 1e-10 * kappa.abs().max(1.0) {
                    bail!(
                        "clustering identity failed: {}",
                        serde_json::json!({"p": p, "i_mask": i_mask, "got": got, "kappa": kappa})
                    );
                }
                checks += 1;
            }
        }
    }
    // Touchard closed forms: T_ν(1) = Bell(ν).
    for nu in 1..=8usize {
        let bell = geocume_core::combinatorics::bell(nu)? as f64;
        let t = touchard(nu, 1.0)?;
        if (t - bell).abs() > 1e-9 * bell {
            bail!("touchard({nu},1) = {t} != bell = {bell}");
        }
        checks += 1;
    }
    // Bound audits over the stated grids.
    for p in 1..=8usize {
        for &c in &[0.0, 0.5, 1.0, 1.5] {
            let (lhs, rhs, ok) = partition_sum_bound_check(p, c)?;
            if !ok {
                bail!(
                    "partition sum bound failed: {}",
                    serde_json::json!({"p": p, "c": c, "lhs": lhs, "rhs": rhs})
                );
            }
            checks += 1;
        }
    }
    for &a in &[0.0, 0.25, 0.5, 0.75] {
        for nu in 1..=4usize {
            for &s in &[0.1, 0.5, 1.0, 2.0] {
                let (lhs, rhs, ok) = touchard_series_bound_check(a, nu, s)?;
                if !ok {
                    bail!(
                        "touchard series bound failed: {}",
                        serde_json::json!({"a": a, "nu": nu, "s": s, "lhs": lhs, "rhs": rhs})
                    );
                }
                checks += 1;
            }
        }
    }
    Ok(checks)
}

fn random_matrix(n: usize, rng: &mut impl Rng) -> SquareMatrix {
    SquareMatrix::new(
        n,
        (0..n * n)
            .map(|_| Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)))
            .collect(),
    )
    .unwrap()
}

fn verify_matrix() -> Result<usize> {
    let mut rng = geocume_core::seed::rng(VERIFY_SEED, &[0xA1]);
    let mut checks = 0usize;
    // det_alpha(·, −1) against LU.
    for _ in 0..300 {
        let n = rng.gen_range(1..=8usize);
        let a = random_matrix(n, &mut rng);
        let lhs = det_alpha(&a, -1.0)?;
        let rhs = det_lu(&a);
        if (lhs - rhs).norm() > 1e-9 * rhs.norm().max(1.0) {
            bail!(
                "det_alpha(-1) vs det_lu failed: {}",
                serde_json::json!({"n": n, "lhs": [lhs.re, lhs.im], "rhs": [rhs.re, rhs.im]})
            );
        }
        checks += 1;
    }
    // 2×2 closed form det_α = xw + αyz.
    for &alpha in &[-1.0, 0.0, 0.5, 1.0, 2.0] {
        let a = random_matrix(2, &mut rng);
        let got = det_alpha(&a, alpha)?;
        let want = a.get(0, 0) * a.get(1, 1) + alpha * a.get(0, 1) * a.get(1, 0);
        if (got - want).norm() > 1e-12 * want.norm().max(1.0) {
            bail!("det_alpha 2x2 closed form failed at alpha={alpha}");
        }
        checks += 1;
    }
    // Continuity and block-factorization audits.
    let kernel = KernelSpec::ginibre();
    for _ in 0..200 {
        let n = rng.gen_range(1..=6usize);
        let a = random_matrix(n, &mut rng);
        let b = random_matrix(n, &mut rng);
        let (gap, bound, ok) = det_continuity_check(&a, &b)?;
        if !ok {
            bail!(
                "determinant continuity failed: {}",
                serde_json::json!({"n": n, "gap": gap, "bound": bound})
            );
        }
        checks += 1;
    }
    for _ in 0..200 {
        let p = rng.gen_range(2..=6usize);
        let points: Vec<Vec<f64>> = (0..p)
            .map(|_| vec![rng.gen_range(-4.0..4.0), rng.gen_range(-4.0..4.0)])
            .collect();
        let full = (1u32 << p) - 1;
        let i_mask = rng.gen_range(1..full);
        let (lhs, rhs) = dpp_block_factorization_gap(&points, &kernel, i_mask)?;
        if lhs > rhs * (1.0 + 1e-12) {
            bail!(
                "block factorization bound failed: {}",
                serde_json::json!({"points": points, "i_mask": i_mask, "lhs": lhs, "rhs": rhs})
            );
        }
        checks += 1;
    }
    Ok(checks)
}

fn verify_sigeom() -> Result<usize> {
    let mut rng = geocume_core::seed::rng(VERIFY_SEED, &[0x51]);
    let mut checks = 0usize;
    // sig-norm ⇔ connectivity, homogeneity, permutation invariance.
    for _ in 0..2000 {
        let d = rng.gen_range(1..=3usize);
        let p = rng.gen_range(2..=6usize);
        let x: Vec<Vec<f64>> = (0..p - 1)
            .map(|_| (0..d).map(|_| rng.gen_range(-2.0..2.0)).collect())
            .collect();
        let cfg = SigConfig::new(d, x.clone())?;
        let r = sig_norm(&cfg);
        if !sig_connected(&cfg, r * (1.0 + 1e-9)) || sig_connected(&cfg, r * (1.0 - 1e-9)) {
            bail!(
                "sig-norm/connectivity equivalence failed: {}",
                serde_json::json!({"d": d, "x": x, "r": r})
            );
        }
        let lam = rng.gen_range(0.5..2.0);
        let scaled = SigConfig::new(
            d,
            x.iter()
                .map(|v| v.iter().map(|c| c * lam).collect())
                .collect(),
        )?;
        if (sig_norm(&scaled) - lam * r).abs() > 1e-12 * r.max(1.0) {
            bail!("sig-norm homogeneity failed: {}", serde_json::json!({"d": d, "x": x}));
        }
        let mut perm = x.clone();
        perm.reverse();
        let permuted = SigConfig::new(d, perm)?;
        if (sig_norm(&permuted) - r).abs() > 1e-12 {
            bail!("sig-norm permutation invariance failed");
        }
        checks += 1;
    }
    // Coarea identities.
    for (u, f) in [
        (NormKind::Euclidean { d: 2 }, ProfileKind::ExpNeg),
        (NormKind::Euclidean { d: 2 }, ProfileKind::ExpNegSq),
        (NormKind::MaxNorm { d: 1 }, ProfileKind::PolyInd(vec![1.0])),
    ] {
        let (lhs, rhs, ok) = coarea_identity_check(&u, &f, 1)?;
        if !ok {
            bail!(
                "coarea identity failed: {}",
                serde_json::json!({"lhs": lhs, "rhs": rhs})
            );
        }
        checks += 1;
    }
    Ok(checks)
}
