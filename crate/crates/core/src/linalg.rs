//! Dense linear-algebra helpers shared by the estimator modules.
//!
//! The iterates of the denoiser carry their sparsity as exact zero rows, so
//! the helpers here are written to keep those rows exactly zero and to skip
//! them in products.

use nalgebra::DMatrix;

use crate::error::{Error, Result};

/// Relative cutoff on `|R_jj|` below which a QR factor is considered singular.
pub const QR_RANK_TOL: f64 = 1e-12;

/// Indices of rows that contain at least one nonzero entry.
pub fn nonzero_rows(a: &DMatrix<f64>) -> Vec<usize> {
    (0..a.nrows())
        .filter(|&i| a.row(i).iter().any(|&v| v != 0.0))
        .collect()
}

/// Copies the listed rows of `a` into a compact matrix.
pub fn gather_rows(a: &DMatrix<f64>, rows: &[usize]) -> DMatrix<f64> {
    DMatrix::from_fn(rows.len(), a.ncols(), |i, j| a[(rows[i], j)])
}

/// Copies the listed columns of `a` into a compact matrix.
pub fn gather_cols(a: &DMatrix<f64>, cols: &[usize]) -> DMatrix<f64> {
    let mut out = DMatrix::zeros(a.nrows(), cols.len());
    for (dst, &src) in cols.iter().enumerate() {
        out.column_mut(dst).copy_from(&a.column(src));
    }
    out
}

/// Writes `compact` back into an `nrows`-row matrix at the listed rows; all
/// other rows are exactly zero.
pub fn scatter_rows(compact: &DMatrix<f64>, rows: &[usize], nrows: usize) -> DMatrix<f64> {
    let mut out = DMatrix::zeros(nrows, compact.ncols());
    for (src, &dst) in rows.iter().enumerate() {
        out.row_mut(dst).copy_from(&compact.row(src));
    }
    out
}

/// `x * w`, touching only the columns of `x` that meet nonzero rows of `w`.
pub fn mul_sparse_rows(x: &DMatrix<f64>, w: &DMatrix<f64>) -> DMatrix<f64> {
    let support = nonzero_rows(w);
    if support.len() == w.nrows() {
        return x * w;
    }
    gather_cols(x, &support) * gather_rows(w, &support)
}

/// `x' * w`, touching only the rows of `x` that meet nonzero rows of `w`.
pub fn tr_mul_sparse_rows(x: &DMatrix<f64>, w: &DMatrix<f64>) -> DMatrix<f64> {
    let support = nonzero_rows(w);
    if support.len() == w.nrows() {
        return x.tr_mul(w);
    }
    gather_rows(x, &support).tr_mul(&gather_rows(w, &support))
}

/// Orthonormal basis `Q` with `Q R = a`, `R` upper triangular with positive
/// diagonal.
///
/// Only the nonzero rows of `a` enter the Householder factorization, so rows
/// that are zero in `a` are exactly zero in `Q`. Fails with
/// [`Error::RankCollapse`] when fewer than `a.ncols()` diagonal entries of
/// `R` exceed `QR_RANK_TOL` times the largest one.
pub fn orthonormalize(a: &DMatrix<f64>) -> Result<DMatrix<f64>> {
    let r = a.ncols();
    let support = nonzero_rows(a);
    if support.len() < r {
        return Err(Error::RankCollapse {
            expected: r,
            found: support.len(),
        });
    }
    if r == 0 {
        return Ok(DMatrix::zeros(a.nrows(), 0));
    }
    let compact = gather_rows(a, &support);
    let qr = compact.qr();
    let rfac = qr.r();
    let diag: Vec<f64> = (0..r).map(|j| rfac[(j, j)]).collect();
    let largest = diag.iter().fold(0.0_f64, |acc, d| acc.max(d.abs()));
    let found = diag
        .iter()
        .filter(|d| largest > 0.0 && d.abs() > QR_RANK_TOL * largest)
        .count();
    if found < r {
        return Err(Error::RankCollapse { expected: r, found });
    }
    let mut q = qr.q();
    for (j, d) in diag.iter().enumerate() {
        if *d < 0.0 {
            q.column_mut(j).neg_mut();
        }
    }
    Ok(scatter_rows(&q, &support, a.nrows()))
}

/// `max |W'W - I|` over all entries.
pub fn orthonormality_error(w: &DMatrix<f64>) -> f64 {
    let gram = w.tr_mul(w);
    let mut worst = 0.0_f64;
    for i in 0..gram.nrows() {
        for j in 0..gram.ncols() {
            let target = if i == j { 1.0 } else { 0.0 };
            worst = worst.max((gram[(i, j)] - target).abs());
        }
    }
    worst
}

/// Squared Frobenius distance `||A A' - B B'||_F^2` between the projections
/// onto two orthonormal bases of equal width.
///
/// Evaluated as `2 ||B - A (A'B)||_F^2`, which avoids forming the projections
/// and keeps full relative accuracy when the subspaces nearly coincide.
pub fn projection_distance_sq(a: &DMatrix<f64>, b: &DMatrix<f64>) -> f64 {
    let residual = b - a * a.tr_mul(b);
    2.0 * residual.norm_squared()
}

/// Flips column signs so that each column of `left` has its largest-magnitude
/// entry positive (lowest index wins ties); `right` columns follow so that
/// `left * diag * right'` is unchanged.
pub fn canonicalize_signs(left: &mut DMatrix<f64>, right: &mut DMatrix<f64>) {
    for j in 0..left.ncols() {
        let mut pivot = 0.0_f64;
        let mut best = -1.0_f64;
        for v in left.column(j).iter() {
            if v.abs() > best {
                best = v.abs();
                pivot = *v;
            }
        }
        if pivot < 0.0 {
            left.column_mut(j).neg_mut();
            right.column_mut(j).neg_mut();
        }
    }
}
