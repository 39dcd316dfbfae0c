//! Starting point for the iteration: robust noise estimation, row/column
//! screening, rank selection, the spectral start on the screened matrix and
//! the iteration budgets.

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{gather_cols, gather_rows, scatter_rows};
use crate::model::ObservedMatrix;
use crate::spectral::{singular_values, truncated_svd};

/// Consistency constant turning a MAD into a Gaussian standard deviation.
pub const MAD_SCALE: f64 = 1.4826;

/// Singular values at or below this fraction of the largest count as zero
/// when checking the rank of the screened matrix.
pub const INIT_RANK_TOL: f64 = 1e-12;

/// Tuning of the initialization stage.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct InitConfig {
    /// Screening multiplier.
    pub alpha: f64,
    /// Threshold multiplier, shared with the iteration stage.
    pub beta: f64,
    /// Fixed rank; `None` uses the data-driven choice.
    pub rank: Option<usize>,
}

impl Default for InitConfig {
    fn default() -> Self {
        Self {
            alpha: 4.0,
            beta: 4.0,
            rank: None,
        }
    }
}

impl InitConfig {
    /// Any positive `alpha`, `beta` is accepted; values below 4 fall outside
    /// the range covered by the error bounds and log a warning.
    pub fn validate(&self) -> Result<()> {
        for (name, v) in [("alpha", self.alpha), ("beta", self.beta)] {
            if !(v > 0.0) || !v.is_finite() {
                return Err(Error::InvalidArgument(format!("{name} must be positive, got {v}")));
            }
            if v < 4.0 {
                log::warn!("{name} = {v} is below 4; error guarantees assume {name} >= 4");
            }
        }
        if self.rank == Some(0) {
            return Err(Error::InvalidArgument("explicit rank must be positive".into()));
        }
        Ok(())
    }
}

/// Result of [`estimate_sigma`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NoiseEstimate {
    pub sigma: f64,
    /// Set when the estimate is zero, e.g. for a constant matrix.
    pub degenerate: bool,
}

fn median_in_place(values: &mut [f64]) -> f64 {
    let n = values.len();
    let mid = n / 2;
    let (lower, upper_mid, _) = values.select_nth_unstable_by(mid, |a, b| a.total_cmp(b));
    let upper = *upper_mid;
    if n % 2 == 1 {
        upper
    } else {
        let below = lower.iter().fold(f64::NEG_INFINITY, |acc, v| acc.max(*v));
        0.5 * (below + upper)
    }
}

/// `1.4826 * MAD` over all entries of `x`.
pub fn estimate_sigma(x: &ObservedMatrix) -> Result<NoiseEstimate> {
    let len = x.nrows() * x.ncols();
    if len < 2 {
        return Err(Error::InvalidArgument("need at least two entries to estimate noise".into()));
    }
    let mut values: Vec<f64> = x.matrix().iter().copied().collect();
    let center = median_in_place(&mut values);
    for v in values.iter_mut() {
        *v = (*v - center).abs();
    }
    let sigma = MAD_SCALE * median_in_place(&mut values);
    Ok(NoiseEstimate {
        sigma,
        degenerate: sigma == 0.0,
    })
}

/// Rows and columns retained by screening, as sorted index lists.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct ScreeningSets {
    pub rows: Vec<usize>,
    pub cols: Vec<usize>,
}

/// Squared-norm cutoff `sigma^2 (len + alpha sqrt(len log len))` for a row or
/// column of length `len`.
pub fn screening_cutoff(len: usize, sigma: f64, alpha: f64) -> f64 {
    let p = len as f64;
    sigma * sigma * (p + alpha * (p * p.ln()).sqrt())
}

/// Rows whose squared norm reaches `sigma^2 (n + alpha sqrt(n log n))` and
/// columns whose squared norm reaches `sigma^2 (m + alpha sqrt(m log m))`.
pub fn select_screening_sets(x: &ObservedMatrix, sigma: f64, alpha: f64) -> Result<ScreeningSets> {
    if !(sigma > 0.0) {
        return Err(Error::InvalidArgument(format!("sigma must be positive, got {sigma}")));
    }
    let (m, n) = x.shape();
    let a = x.matrix();
    let row_cut = screening_cutoff(n, sigma, alpha);
    let col_cut = screening_cutoff(m, sigma, alpha);
    let mut row_sq = vec![0.0_f64; m];
    let mut cols = Vec::new();
    for j in 0..n {
        let col = a.column(j);
        let mut sq = 0.0;
        for (i, v) in col.iter().enumerate() {
            let v2 = v * v;
            row_sq[i] += v2;
            sq += v2;
        }
        if sq >= col_cut {
            cols.push(j);
        }
    }
    let rows = (0..m).filter(|&i| row_sq[i] >= row_cut).collect();
    Ok(ScreeningSets { rows, cols })
}

/// Copy of `x` with every entry outside `rows x cols` set to zero.
pub fn build_screened_matrix(x: &ObservedMatrix, sets: &ScreeningSets) -> DMatrix<f64> {
    let (m, n) = x.shape();
    let mut out = DMatrix::zeros(m, n);
    for &j in &sets.cols {
        for &i in &sets.rows {
            out[(i, j)] = x.matrix()[(i, j)];
        }
    }
    out
}

fn screened_block(x: &ObservedMatrix, sets: &ScreeningSets) -> DMatrix<f64> {
    gather_rows(&gather_cols(x.matrix(), &sets.cols), &sets.rows)
}

/// Noise-level multiple `delta` that the singular values of a
/// `rows x cols` screened block must reach to count towards the rank, for
/// an `m x n` data matrix. `None` when either count is zero.
pub fn rank_cutoff(rows: usize, cols: usize, m: usize, n: usize) -> Option<f64> {
    if rows == 0 || cols == 0 {
        return None;
    }
    let (i, j) = (rows as f64, cols as f64);
    let (mf, nf) = (m as f64, n as f64);
    let e = std::f64::consts::E;
    let inner = 2.0 * i * (e * mf / i).ln() + 2.0 * j * (e * nf / j).ln() + 8.0 * mf.ln();
    Some(i.sqrt() + j.sqrt() + inner.sqrt())
}

fn count_above(values: &DVector<f64>, cutoff: f64) -> usize {
    // values are sorted, so the largest qualifying index is the count
    values.iter().take_while(|&&s| s >= cutoff).count()
}

/// Largest `s` with `sigma_s(X[rows, cols]) >= sigma * delta`, or 0.
pub fn select_rank(x: &ObservedMatrix, sets: &ScreeningSets, sigma: f64) -> Result<usize> {
    if !(sigma > 0.0) {
        return Err(Error::InvalidArgument(format!("sigma must be positive, got {sigma}")));
    }
    let (m, n) = x.shape();
    let Some(delta) = rank_cutoff(sets.rows.len(), sets.cols.len(), m, n) else {
        return Ok(0);
    };
    let values = singular_values(&screened_block(x, sets));
    Ok(count_above(&values, sigma * delta))
}

/// Output of [`initialize`].
#[derive(Debug, Clone, PartialEq)]
pub struct InitResult {
    pub sets: ScreeningSets,
    /// Rank used for the start (the explicit rank, or `r_hat`).
    pub rank: usize,
    /// Left start, `m x rank`, zero outside `sets.rows`.
    pub u0: DMatrix<f64>,
    /// Right start, `n x rank`, zero outside `sets.cols`.
    pub v0: DMatrix<f64>,
    /// `rank`-th singular value of the screened matrix (0 when `rank = 0`).
    pub d_r0: f64,
    /// Noise level the screening and rank rules were evaluated with.
    pub sigma: f64,
    pub r_hat: usize,
    /// Singular values of the screened block, nonincreasing.
    pub screened_spectrum: DVector<f64>,
}

/// Screening followed by the leading singular vectors of the screened
/// matrix.
///
/// With `config.rank = None` the data-driven rank is used; a result of rank
/// zero carries empty `u0`/`v0` and means no signal was detected.
pub fn initialize(x: &ObservedMatrix, sigma: f64, config: &InitConfig) -> Result<InitResult> {
    config.validate()?;
    let (m, n) = x.shape();
    let sets = select_screening_sets(x, sigma, config.alpha)?;
    let block = screened_block(x, &sets);
    let spectrum = singular_values(&block);
    let r_hat = match rank_cutoff(sets.rows.len(), sets.cols.len(), m, n) {
        Some(delta) => count_above(&spectrum, sigma * delta),
        None => 0,
    };
    let rank = config.rank.unwrap_or(r_hat);
    if rank == 0 {
        return Ok(InitResult {
            sets,
            rank,
            u0: DMatrix::zeros(m, 0),
            v0: DMatrix::zeros(n, 0),
            d_r0: 0.0,
            sigma,
            r_hat,
            screened_spectrum: spectrum,
        });
    }
    if sets.rows.is_empty() || sets.cols.is_empty() {
        return Err(Error::EmptyScreen {
            rows: sets.rows.len(),
            cols: sets.cols.len(),
        });
    }
    let top = spectrum.get(0).copied().unwrap_or(0.0);
    let numerical = spectrum.iter().filter(|&&s| top > 0.0 && s > INIT_RANK_TOL * top).count();
    if numerical < rank {
        return Err(Error::InitRankDeficient {
            requested: rank,
            found: numerical,
        });
    }
    let svd = truncated_svd(&block, rank)?;
    let u0 = scatter_rows(&svd.left, &sets.rows, m);
    let v0 = scatter_rows(&svd.right, &sets.cols, n);
    Ok(InitResult {
        d_r0: svd.values[rank - 1],
        sets,
        rank,
        u0,
        v0,
        sigma,
        r_hat,
        screened_spectrum: spectrum,
    })
}

/// A step count derived from a signal-to-threshold ratio.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct IterationBudget {
    pub steps: usize,
    /// Set when the signal does not exceed the threshold and the formula is
    /// vacuous; `steps` is then 1.
    pub low_signal: bool,
}

fn budget(constant: f64, m: usize, signal_sq: f64, threshold_sq: f64) -> IterationBudget {
    if !(signal_sq > threshold_sq) || !(threshold_sq > 0.0) {
        return IterationBudget {
            steps: 1,
            low_signal: true,
        };
    }
    let raw = constant / 2.0 * ((m as f64).log2() + (signal_sq / threshold_sq).ln());
    IterationBudget {
        steps: (raw.ceil() as usize).max(1),
        low_signal: false,
    }
}

/// Data-driven budget `ceil(1.1/2 (log2 m + log(d_r0^2 / gamma^2)))`.
///
/// `gamma` is the working threshold on the scale of the data (noise level
/// times the unit-noise level).
pub fn compute_t_hat(d_r0: f64, gamma: f64, m: usize) -> IterationBudget {
    budget(1.1, m, d_r0 * d_r0, gamma * gamma)
}

/// Budget `ceil(1.01/2 (log2 m + log(d_r^2 / max(k gamma_u^2, l gamma_v^2))))`
/// from the true smallest singular value; a diagnostic that needs ground
/// truth.
pub fn compute_t_oracle(d_r: f64, k: usize, l: usize, gamma_u: f64, gamma_v: f64, m: usize) -> IterationBudget {
    let denom = (k as f64 * gamma_u * gamma_u).max(l as f64 * gamma_v * gamma_v);
    budget(1.01, m, d_r * d_r, denom)
}
