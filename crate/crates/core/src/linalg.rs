//! Thin wrapper over LAPACK's Hermitian eigensolver (`zheevd`).
//!
//! Matrices are stored column-major, matching LAPACK's convention; all
//! callers in this crate build Hermitian matrices directly in that layout.

use num_complex::Complex64;
use std::os::raw::c_char;

extern "C" {
    fn zheevd_(
        jobz: *const c_char,
        uplo: *const c_char,
        n: *const i32,
        a: *mut Complex64,
        lda: *const i32,
        w: *mut f64,
        work: *mut Complex64,
        lwork: *const i32,
        rwork: *mut f64,
        lrwork: *const i32,
        iwork: *mut i32,
        liwork: *const i32,
        info: *mut i32,
    );
}

/// Eigendecomposition of a Hermitian `n x n` matrix given column-major in
/// `a`. Returns eigenvalues in ascending order; when `vectors` is true, `a`
/// is overwritten with the orthonormal eigenvectors (one per column).
pub fn eigh_in_place(n: usize, a: &mut [Complex64], vectors: bool) -> Result<Vec<f64>, i32> {
    assert_eq!(a.len(), n * n, "matrix buffer size mismatch");
    if n == 0 {
        return Ok(Vec::new());
    }
    let jobz = if vectors { b'V' } else { b'N' } as c_char;
    let uplo = b'L' as c_char;
    let ni = n as i32;
    let mut w = vec![0.0f64; n];
    let mut info: i32 = 0;

    // Workspace query.
    let mut work_query = [Complex64::new(0.0, 0.0)];
    let mut rwork_query = [0.0f64];
    let mut iwork_query = [0i32];
    let query = -1i32;
    unsafe {
        zheevd_(
            &jobz,
            &uplo,
            &ni,
            a.as_mut_ptr(),
            &ni,
            w.as_mut_ptr(),
            work_query.as_mut_ptr(),
            &query,
            rwork_query.as_mut_ptr(),
            &query,
            iwork_query.as_mut_ptr(),
            &query,
            &mut info,
        );
    }
    if info != 0 {
        return Err(info);
    }
    let lwork = work_query[0].re as i32;
    let lrwork = rwork_query[0] as i32;
    let liwork = iwork_query[0];
    let mut work = vec![Complex64::new(0.0, 0.0); lwork as usize];
    let mut rwork = vec![0.0f64; lrwork as usize];
    let mut iwork = vec![0i32; liwork as usize];
    unsafe {
        zheevd_(
            &jobz,
            &uplo,
            &ni,
            a.as_mut_ptr(),
            &ni,
            w.as_mut_ptr(),
            work.as_mut_ptr(),
            &lwork,
            rwork.as_mut_ptr(),
            &lrwork,
            iwork.as_mut_ptr(),
            &liwork,
            &mut info,
        );
    }
    if info != 0 {
        return Err(info);
    }
    Ok(w)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn two_by_two_pauli_x() {
        // [[0,1],[1,0]] has eigenvalues -1, 1.
        let mut a = vec![
            Complex64::new(0.0, 0.0),
            Complex64::new(1.0, 0.0),
            Complex64::new(1.0, 0.0),
            Complex64::new(0.0, 0.0),
        ];
        let w = eigh_in_place(2, &mut a, true).unwrap();
        assert!((w[0] + 1.0).abs() < 1e-12);
        assert!((w[1] - 1.0).abs() < 1e-12);
        // Eigenvector columns are normalized.
        let n0 = a[0].norm_sqr() + a[1].norm_sqr();
        assert!((n0 - 1.0).abs() < 1e-12);
    }

    #[test]
    fn complex_hermitian() {
        // [[2, i],[-i, 2]] has eigenvalues 1 and 3.
        let mut a = vec![
            Complex64::new(2.0, 0.0),
            Complex64::new(0.0, -1.0),
            Complex64::new(0.0, 1.0),
            Complex64::new(2.0, 0.0),
        ];
        let w = eigh_in_place(2, &mut a, false).unwrap();
        assert!((w[0] - 1.0).abs() < 1e-12);
        assert!((w[1] - 3.0).abs() < 1e-12);
    }
}
