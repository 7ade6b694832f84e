//! Dense eigendecomposition of general complex matrices.
//!
//! The matrix is reduced to complex Schur form `A = Q T Q†` and right
//! eigenvectors of the triangular factor are obtained by back substitution,
//! as in LAPACK's `ztrevc`. Exactly degenerate eigenvalues with a vanishing
//! coupling in `T` get independent eigenvectors instead of the near-parallel
//! pair plain back substitution would produce.

use nalgebra::DMatrix;
use num_complex::Complex64 as C64;

use crate::error::{Error, Result};

pub(crate) struct Eigen {
    pub values: Vec<C64>,
    /// Unit-norm right eigenvectors, one per column.
    pub vectors: DMatrix<C64>,
}

pub(crate) fn eig(a: &DMatrix<C64>) -> Result<Eigen> {
    let n = a.nrows();
    if n != a.ncols() {
        return Err(Error::invalid(format!("matrix is {}×{}, expected square", n, a.ncols())));
    }
    if a.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
        return Err(Error::Numeric("matrix has non-finite entries".into()));
    }
    if n == 0 {
        return Ok(Eigen { values: vec![], vectors: DMatrix::zeros(0, 0) });
    }
    let max_iter = 200 * n.max(10);
    let (q, t) = a
        .clone()
        .try_schur(f64::EPSILON, max_iter)
        .ok_or_else(|| {
            Error::Numeric(format!(
                "Schur iteration did not converge after {max_iter} sweeps (n = {n}, ‖A‖_F = {:.3e})",
                a.norm()
            ))
        })?
        .unpack();

    let scale = t.norm().max(f64::MIN_POSITIVE);
    let smin = f64::EPSILON * scale;
    let cluster = 64.0 * f64::EPSILON * scale;

    let mut y = DMatrix::<C64>::zeros(n, n);
    for k in 0..n {
        let lk = t[(k, k)];
        y[(k, k)] = C64::from(1.0);
        for i in (0..k).rev() {
            let mut s = C64::from(0.0);
            for j in i + 1..=k {
                s += t[(i, j)] * y[(j, k)];
            }
            let mut denom = t[(i, i)] - lk;
            if denom.norm() < cluster {
                let col: f64 = (i + 1..=k).map(|j| y[(j, k)].norm()).fold(0.0, f64::max);
                if s.norm() <= cluster * col.max(1.0) {
                    // degenerate and uncoupled: stay orthogonal to the partner direction
                    continue;
                }
                if denom.norm() < smin {
                    denom = C64::from(smin);
                }
            }
            y[(i, k)] = -s / denom;
        }
    }

    let mut vectors = q * y;
    for mut col in vectors.column_iter_mut() {
        let norm = col.norm();
        if !(norm.is_finite() && norm > 0.0) {
            return Err(Error::Numeric("eigenvector back substitution overflowed".into()));
        }
        col /= C64::from(norm);
    }
    Ok(Eigen { values: t.diagonal().iter().copied().collect(), vectors })
}

/// 2-norm condition number of a square matrix.
pub(crate) fn condition_number(m: &DMatrix<C64>) -> f64 {
    let sv = m.clone().singular_values();
    let max = sv.iter().copied().fold(0.0, f64::max);
    let min = sv.iter().copied().fold(f64::INFINITY, f64::min);
    if min == 0.0 {
        f64::INFINITY
    } else {
        max / min
    }
}
