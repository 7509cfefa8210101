fn main() {
    // Hermitian eigensolves go straight to the system LAPACK (OpenBLAS).
    println!("cargo:rustc-link-lib=dylib=openblas");
}
