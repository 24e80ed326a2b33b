//! Pfaffians of complex antisymmetric matrices.
//!
//! Small matrices (dimension up to [`COFACTOR_MAX_DIM`]) use the recursive
//! expansion along the first row. Larger ones go through a Parlett-Reid
//! skew-symmetric `LTL^T` reduction with partial pivoting. Both follow the
//! convention `Pf(J) = 1` for `J = diag([[0, 1], [-1, 0]], ...)`.

use nalgebra::DMatrix;
use num_complex::Complex64;

use crate::error::{Error, Result};

pub const COFACTOR_MAX_DIM: usize = 8;

/// Default relative antisymmetry tolerance accepted by [`pfaffian`].
pub const ANTISYMMETRY_TOL: f64 = 1e-9;

pub fn pfaffian(a: &DMatrix<Complex64>) -> Result<Complex64> {
    pfaffian_with_tol(a, ANTISYMMETRY_TOL)
}

pub fn pfaffian_with_tol(a: &DMatrix<Complex64>, tol: f64) -> Result<Complex64> {
    check_antisymmetric(a, tol)?;
    if a.nrows() <= COFACTOR_MAX_DIM {
        Ok(pfaffian_cofactor(a))
    } else {
        Ok(pfaffian_parlett_reid(a.clone()))
    }
}

fn check_antisymmetric(a: &DMatrix<Complex64>, tol: f64) -> Result<()> {
    let n = a.nrows();
    if n != a.ncols() {
        return Err(Error::Shape(format!("pfaffian of non-square {}x{}", n, a.ncols())));
    }
    if n % 2 == 1 {
        return Err(Error::OddDimension(n));
    }
    let residual = (a + a.transpose()).norm();
    if residual > tol * a.norm() {
        return Err(Error::NotAntisymmetric { residual });
    }
    Ok(())
}

/// Expansion along the first row: `Pf(A) = sum_j (-1)^(j+1) a_0j Pf(A without rows/cols 0, j)`.
pub fn pfaffian_cofactor(a: &DMatrix<Complex64>) -> Complex64 {
    let idx: Vec<usize> = (0..a.nrows()).collect();
    cofactor_rec(a, &idx)
}

fn cofactor_rec(a: &DMatrix<Complex64>, idx: &[usize]) -> Complex64 {
    match idx.len() {
        0 => Complex64::new(1.0, 0.0),
        2 => a[(idx[0], idx[1])],
        _ => {
            let first = idx[0];
            let mut total = Complex64::new(0.0, 0.0);
            let mut rest = Vec::with_capacity(idx.len() - 2);
            for (pos, &j) in idx.iter().enumerate().skip(1) {
                let entry = a[(first, j)];
                if entry == Complex64::new(0.0, 0.0) {
                    continue;
                }
                rest.clear();
                rest.extend(idx[1..].iter().copied().filter(|&k| k != j));
                let sign = if pos % 2 == 1 { 1.0 } else { -1.0 };
                total += entry * sign * cofactor_rec(a, &rest);
            }
            total
        }
    }
}

/// Parlett-Reid reduction to skew-tridiagonal form; the Pfaffian is the
/// signed product of the superdiagonal pivots at even positions.
pub fn pfaffian_parlett_reid(mut a: DMatrix<Complex64>) -> Complex64 {
    let n = a.nrows();
    let zero = Complex64::new(0.0, 0.0);
    let mut pf = Complex64::new(1.0, 0.0);
    let mut k = 0;
    while k + 1 < n {
        // pivot: largest entry below the diagonal in column k
        let (mut kp, mut best) = (k + 1, a[(k + 1, k)].norm());
        for i in k + 2..n {
            let v = a[(i, k)].norm();
            if v > best {
                best = v;
                kp = i;
            }
        }
        if kp != k + 1 {
            a.swap_rows(k + 1, kp);
            a.swap_columns(k + 1, kp);
            pf = -pf;
        }
        if a[(k + 1, k)] == zero {
            return zero;
        }
        pf *= a[(k, k + 1)];
        if k + 2 < n {
            let pivot = a[(k, k + 1)];
            let tau: Vec<Complex64> = (k + 2..n).map(|j| a[(k, j)] / pivot).collect();
            let col: Vec<Complex64> = (k + 2..n).map(|i| a[(i, k + 1)]).collect();
            for (ii, i) in (k + 2..n).enumerate() {
                for (jj, j) in (k + 2..n).enumerate() {
                    a[(i, j)] += tau[ii] * col[jj] - col[ii] * tau[jj];
                }
            }
        }
        k += 2;
    }
    pf
}

/// The standard symplectic form `J` of size `2n`.
pub fn symplectic_j(n_blocks: usize) -> DMatrix<Complex64> {
    let m = 2 * n_blocks;
    let mut j = DMatrix::zeros(m, m);
    for b in 0..n_blocks {
        j[(2 * b, 2 * b + 1)] = Complex64::new(1.0, 0.0);
        j[(2 * b + 1, 2 * b)] = Complex64::new(-1.0, 0.0);
    }
    j
}
