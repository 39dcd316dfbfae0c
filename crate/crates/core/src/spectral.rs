//! Schatten norms and losses, truncated SVD, canonical-angle distances and
//! the rate constants used to rescale reported losses.

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{canonicalize_signs, orthonormality_error};

/// Orthonormality tolerance for inputs of [`sin_theta`].
pub const SIN_THETA_ORTHO_TOL: f64 = 1e-8;

/// Singular values in nonincreasing order.
pub fn singular_values(a: &DMatrix<f64>) -> DVector<f64> {
    if a.is_empty() {
        return DVector::zeros(0);
    }
    let mut s: Vec<f64> = a.clone().singular_values().iter().copied().collect();
    s.sort_unstable_by(|x, y| y.total_cmp(x));
    DVector::from_vec(s)
}

/// Number of singular values above `rel_tol * sigma_1`.
pub fn numerical_rank(a: &DMatrix<f64>, rel_tol: f64) -> usize {
    rank_of_spectrum(singular_values(a).as_slice(), rel_tol)
}

fn rank_of_spectrum(s: &[f64], rel_tol: f64) -> usize {
    match s.first() {
        Some(&top) if top > 0.0 => s.iter().filter(|&&v| v > rel_tol * top).count(),
        _ => 0,
    }
}

fn schatten_of_spectrum(s: &[f64], q: f64) -> f64 {
    if q.is_infinite() {
        return s.iter().fold(0.0_f64, |acc, v| acc.max(*v));
    }
    if q == 1.0 {
        return s.iter().sum();
    }
    if q == 2.0 {
        return s.iter().map(|v| v * v).sum::<f64>().sqrt();
    }
    // scale by the largest value so high powers do not overflow
    let top = s.iter().fold(0.0_f64, |acc, v| acc.max(*v));
    if top == 0.0 {
        return 0.0;
    }
    top * s.iter().map(|v| (v / top).powf(q)).sum::<f64>().powf(1.0 / q)
}

fn check_order(q: f64) -> Result<()> {
    if q >= 1.0 {
        Ok(())
    } else {
        Err(Error::InvalidArgument(format!("Schatten order must be >= 1, got {q}")))
    }
}

/// `(sum_i sigma_i^q)^(1/q)`; `q = f64::INFINITY` gives the operator norm.
pub fn schatten_norm(a: &DMatrix<f64>, q: f64) -> Result<f64> {
    check_order(q)?;
    Ok(schatten_of_spectrum(singular_values(a).as_slice(), q))
}

/// Schatten norm of the low-rank product `a b'` computed from the thin
/// factors: with `a = Q_a R_a` and `b = Q_b R_b`, the singular values of
/// `a b'` are those of the small core `R_a R_b'`.
pub fn schatten_norm_factored(a: &DMatrix<f64>, b: &DMatrix<f64>, q: f64) -> Result<f64> {
    check_order(q)?;
    if a.ncols() != b.ncols() {
        return Err(Error::DimensionMismatch {
            expected: (a.nrows(), a.ncols()),
            found: (b.nrows(), b.ncols()),
        });
    }
    let ra = a.clone().qr().r();
    let rb = b.clone().qr().r();
    let core = ra * rb.transpose();
    Ok(schatten_of_spectrum(singular_values(&core).as_slice(), q))
}

fn check_loss_order(q: f64) -> Result<()> {
    if (1.0..=2.0).contains(&q) {
        Ok(())
    } else {
        Err(Error::InvalidArgument(format!("loss order must lie in [1, 2], got {q}")))
    }
}

/// Squared Schatten-q loss `||estimate - truth||_{S_q}^2`, `q` in `[1, 2]`.
pub fn loss_lq(truth: &DMatrix<f64>, estimate: &DMatrix<f64>, q: f64) -> Result<f64> {
    check_loss_order(q)?;
    if truth.shape() != estimate.shape() {
        return Err(Error::DimensionMismatch {
            expected: truth.shape(),
            found: estimate.shape(),
        });
    }
    Ok(schatten_norm(&(estimate - truth), q)?.powi(2))
}

/// Squared Schatten-q loss between two matrices given in factored form
/// `truth = t_left t_right'` and `estimate = e_left e_right'`.
pub fn loss_lq_factored(
    truth: (&DMatrix<f64>, &DMatrix<f64>),
    estimate: (&DMatrix<f64>, &DMatrix<f64>),
    q: f64,
) -> Result<f64> {
    check_loss_order(q)?;
    let (tl, tr) = truth;
    let (el, er) = estimate;
    if tl.nrows() != el.nrows() || tr.nrows() != er.nrows() {
        return Err(Error::DimensionMismatch {
            expected: (tl.nrows(), tr.nrows()),
            found: (el.nrows(), er.nrows()),
        });
    }
    // estimate - truth = [e_left, -t_left] [e_right, t_right]'
    let left = concat_cols(el, &(-tl));
    let right = concat_cols(er, tr);
    Ok(schatten_norm_factored(&left, &right, q)?.powi(2))
}

fn concat_cols(a: &DMatrix<f64>, b: &DMatrix<f64>) -> DMatrix<f64> {
    let mut out = DMatrix::zeros(a.nrows(), a.ncols() + b.ncols());
    out.columns_mut(0, a.ncols()).copy_from(a);
    out.columns_mut(a.ncols(), b.ncols()).copy_from(b);
    out
}

/// Leading singular triples of a matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct TruncatedSvd {
    pub left: DMatrix<f64>,
    pub values: DVector<f64>,
    pub right: DMatrix<f64>,
}

impl TruncatedSvd {
    pub fn reconstruct(&self) -> DMatrix<f64> {
        let mut scaled = self.left.clone();
        for (j, d) in self.values.iter().enumerate() {
            scaled.column_mut(j).scale_mut(*d);
        }
        scaled * self.right.transpose()
    }
}

/// The `r` leading singular triples, values nonincreasing. Each left vector
/// has its largest-magnitude entry positive.
pub fn truncated_svd(a: &DMatrix<f64>, r: usize) -> Result<TruncatedSvd> {
    let available = a.nrows().min(a.ncols());
    if r > available {
        return Err(Error::RankTooLarge {
            requested: r,
            available,
        });
    }
    let (m, n) = a.shape();
    if r == 0 {
        return Ok(TruncatedSvd {
            left: DMatrix::zeros(m, 0),
            values: DVector::zeros(0),
            right: DMatrix::zeros(n, 0),
        });
    }
    let svd = a.clone().svd(true, true);
    let u = svd.u.expect("left vectors requested");
    let v_t = svd.v_t.expect("right vectors requested");
    let mut order: Vec<usize> = (0..svd.singular_values.len()).collect();
    order.sort_by(|&i, &j| svd.singular_values[j].total_cmp(&svd.singular_values[i]).then(i.cmp(&j)));
    let mut left = DMatrix::zeros(m, r);
    let mut right = DMatrix::zeros(n, r);
    let mut values = DVector::zeros(r);
    for (dst, &src) in order.iter().take(r).enumerate() {
        left.column_mut(dst).copy_from(&u.column(src));
        right.column_mut(dst).copy_from(&v_t.row(src).transpose());
        values[dst] = svd.singular_values[src];
    }
    canonicalize_signs(&mut left, &mut right);
    Ok(TruncatedSvd { left, values, right })
}

/// Canonical-angle distances between two `r`-dimensional subspaces.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SubspaceDistance {
    /// `||sin Theta||_F = ||W1 W1' - W2 W2'||_F / sqrt(2)`.
    pub frobenius_sin_theta: f64,
    /// `||sin Theta||_op = ||W1 W1' - W2 W2'||_op`.
    pub operator_sin_theta: f64,
}

/// Sines of the canonical angles between the column spaces of two
/// orthonormal `p x r` matrices.
///
/// The sines are the singular values of `(I - W1 W1') W2`, which gives the
/// same numbers as the projection-difference definition without forming
/// `p x p` matrices. Arguments are put in a fixed order first so the result
/// is bitwise symmetric.
pub fn sin_theta(w1: &DMatrix<f64>, w2: &DMatrix<f64>) -> Result<SubspaceDistance> {
    if w1.shape() != w2.shape() {
        return Err(Error::DimensionMismatch {
            expected: w1.shape(),
            found: w2.shape(),
        });
    }
    for w in [w1, w2] {
        let err = orthonormality_error(w);
        if !(err <= SIN_THETA_ORTHO_TOL) {
            return Err(Error::NotOrthonormal(err));
        }
    }
    let (a, b) = if lexicographic_le(w1, w2) { (w1, w2) } else { (w2, w1) };
    let residual = b - a * a.tr_mul(b);
    let s = singular_values(&residual);
    let frob = s.iter().map(|v| v * v).sum::<f64>().sqrt();
    let op = s.iter().fold(0.0_f64, |acc, v| acc.max(*v));
    Ok(SubspaceDistance {
        frobenius_sin_theta: frob.min((w1.ncols() as f64).sqrt()),
        operator_sin_theta: op.min(1.0),
    })
}

fn lexicographic_le(a: &DMatrix<f64>, b: &DMatrix<f64>) -> bool {
    for (x, y) in a.iter().zip(b.iter()) {
        match x.total_cmp(y) {
            std::cmp::Ordering::Less => return true,
            std::cmp::Ordering::Greater => return false,
            std::cmp::Ordering::Equal => {}
        }
    }
    true
}

fn check_dims(m: usize, n: usize, k: usize, l: usize, r: usize) -> Result<()> {
    if r >= 1 && m >= k && k >= r && n >= l && l >= r {
        Ok(())
    } else {
        Err(Error::InvalidArgument(format!(
            "need m >= k >= r >= 1 and n >= l >= r, got m={m} n={n} k={k} l={l} r={r}"
        )))
    }
}

/// Minimax rate `r^(2/q) (k + l) + r^(2/q - 1) (k log(e m / k) + l log(e n / l))`.
pub fn rate_psi_q(m: usize, n: usize, k: usize, l: usize, r: usize, q: f64) -> Result<f64> {
    check_dims(m, n, k, l, r)?;
    check_loss_order(q)?;
    let (mf, nf, kf, lf, rf) = (m as f64, n as f64, k as f64, l as f64, r as f64);
    let oracle = rf.powf(2.0 / q) * (kf + lf);
    let combinatorial = rf.powf(2.0 / q - 1.0) * (kf * (1.0 + (mf / kf).ln()) + lf * (1.0 + (nf / lf).ln()));
    Ok(oracle + combinatorial)
}

/// Rescaling constant for reported losses, `r^(2/q - 1) (r + log m) (k + l)`.
pub fn table2_rescale(q: f64, m: usize, k: usize, l: usize, r: usize) -> f64 {
    table2_rescale_with_log(q, (m as f64).ln(), k, l, r)
}

/// [`table2_rescale`] with `log m` supplied directly.
pub fn table2_rescale_with_log(q: f64, log_m: f64, k: usize, l: usize, r: usize) -> f64 {
    let rf = r as f64;
    rf.powf(2.0 / q - 1.0) * (rf + log_m) * (k + l) as f64
}
