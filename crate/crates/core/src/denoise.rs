//! Two-way iterative thresholding.
//!
//! Each step multiplies the data by the current right basis, shrinks the rows
//! of the product, re-orthonormalizes, and repeats on the other side:
//!
//! ```text
//! U_mul = X V_prev      U_thr = eta_rows(U_mul, sigma gamma_u)      U = qr(U_thr)
//! V_mul = X' U          V_thr = eta_rows(V_mul, sigma gamma_v)      V = qr(V_thr)
//! ```
//!
//! The estimate is `U U' X V V'` at the final iterate. Rows killed by the
//! thresholding stay exactly zero through the orthonormalization, so the
//! supports of the iterates are read off their zero rows.

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{
    gather_cols, gather_rows, mul_sparse_rows, nonzero_rows, orthonormality_error, orthonormalize,
    projection_distance_sq, tr_mul_sparse_rows,
};
use crate::model::{DenoiseConfig, ObservedMatrix, StoppingPolicy};
use crate::spectral::loss_lq_factored;
use crate::threshold::threshold_rows;

/// Orthonormality tolerance for user-supplied starting bases.
pub const START_ORTHO_TOL: f64 = 1e-8;

/// Unit-noise threshold level `gamma` with
/// `gamma^2 = 1.01 (r + 2 sqrt(r beta log m) + 2 beta log m)`.
pub fn compute_gamma(r: usize, beta: f64, m: usize) -> f64 {
    let rf = r as f64;
    let log_m = (m as f64).ln();
    (1.01 * (rf + 2.0 * (rf * beta * log_m).sqrt() + 2.0 * beta * log_m)).sqrt()
}

/// Current pair of bases. `u` is absent before the first step when no left
/// start was supplied.
#[derive(Debug, Clone, PartialEq)]
pub struct Iterate {
    pub step: usize,
    pub u: Option<DMatrix<f64>>,
    pub v: DMatrix<f64>,
}

impl Iterate {
    pub fn start(u0: Option<DMatrix<f64>>, v0: DMatrix<f64>) -> Self {
        Self { step: 0, u: u0, v: v0 }
    }
}

/// Diagnostics of one step.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct IterationRecord {
    pub step: usize,
    /// `||U_t U_t' - U_{t-1} U_{t-1}'||_F^2`; absent on a first step without
    /// a left start.
    pub u_subspace_delta: Option<f64>,
    pub v_subspace_delta: f64,
    pub u_rows_kept: usize,
    pub v_rows_kept: usize,
    pub u_orthonormality_error: f64,
    pub v_orthonormality_error: f64,
    /// Every row zeroed by thresholding is still zero after QR.
    pub supports_preserved: bool,
}

impl IterationRecord {
    /// Larger of the two subspace changes, when both are defined.
    pub fn max_delta(&self) -> Option<f64> {
        self.u_subspace_delta.map(|du| du.max(self.v_subspace_delta))
    }
}

fn half_step(product: DMatrix<f64>, threshold: f64, config: &DenoiseConfig) -> Result<(DMatrix<f64>, usize, bool)> {
    let thresholded = threshold_rows(&product, threshold, config.threshold_rule);
    let kept = nonzero_rows(&thresholded);
    let basis = orthonormalize(&thresholded)?;
    let preserved = nonzero_rows(&basis).iter().all(|i| kept.binary_search(i).is_ok());
    Ok((basis, kept.len(), preserved))
}

/// One left-then-right update.
pub fn denoise_step(x: &ObservedMatrix, prev: &Iterate, config: &DenoiseConfig) -> Result<(Iterate, IterationRecord)> {
    let a = x.matrix();
    let (u, u_rows_kept, u_ok) = half_step(mul_sparse_rows(a, &prev.v), config.left_threshold(), config)?;
    let (v, v_rows_kept, v_ok) = half_step(tr_mul_sparse_rows(a, &u), config.right_threshold(), config)?;
    let record = IterationRecord {
        step: prev.step + 1,
        u_subspace_delta: prev.u.as_ref().map(|u_prev| projection_distance_sq(u_prev, &u)),
        v_subspace_delta: projection_distance_sq(&prev.v, &v),
        u_rows_kept,
        v_rows_kept,
        u_orthonormality_error: orthonormality_error(&u),
        v_orthonormality_error: orthonormality_error(&v),
        supports_preserved: u_ok && v_ok,
    };
    let next = Iterate {
        step: prev.step + 1,
        u: Some(u),
        v,
    };
    Ok((next, record))
}

/// Why the loop ended.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum StopReason {
    FixedSteps,
    Tolerance,
    /// `max_iterations` was reached before the policy fired.
    MaxIterations,
}

/// Output of [`denoise`].
#[derive(Debug, Clone, PartialEq)]
pub struct DenoiseResult {
    /// `U U' X V V'`.
    pub estimate: DMatrix<f64>,
    pub u_hat: DMatrix<f64>,
    pub v_hat: DMatrix<f64>,
    /// `U' X V`, so that `estimate = u_hat * core * v_hat'`.
    pub core: DMatrix<f64>,
    pub iterations_run: usize,
    pub trace: Vec<IterationRecord>,
    pub row_support: Vec<usize>,
    pub col_support: Vec<usize>,
    pub stop_reason: StopReason,
}

impl DenoiseResult {
    /// False when the iteration cap ended a run that was waiting on the
    /// tolerance rule.
    pub fn converged(&self) -> bool {
        self.stop_reason != StopReason::MaxIterations
    }

    /// `(u_hat * core, v_hat)`: a thin factorization of the estimate.
    pub fn estimate_factors(&self) -> (DMatrix<f64>, DMatrix<f64>) {
        (&self.u_hat * &self.core, self.v_hat.clone())
    }

    /// Squared Schatten-q loss against a matrix given as `left * right'`,
    /// computed without forming dense differences.
    pub fn loss_against(&self, left: &DMatrix<f64>, right: &DMatrix<f64>, q: f64) -> Result<f64> {
        let (el, er) = self.estimate_factors();
        loss_lq_factored((left, right), (&el, &er), q)
    }

    pub fn rank(&self) -> usize {
        self.u_hat.ncols()
    }
}

/// Runs the iteration from the right start `v0`.
pub fn denoise(x: &ObservedMatrix, config: &DenoiseConfig, v0: &DMatrix<f64>) -> Result<DenoiseResult> {
    denoise_from(x, config, None, v0)
}

/// Runs the iteration from `v0`, with an optional left start `u0` against
/// which the first step's left change is measured.
pub fn denoise_from(
    x: &ObservedMatrix,
    config: &DenoiseConfig,
    u0: Option<&DMatrix<f64>>,
    v0: &DMatrix<f64>,
) -> Result<DenoiseResult> {
    config.validate()?;
    let (m, n) = x.shape();
    let r = config.rank;
    if r > m.min(n) {
        return Err(Error::RankTooLarge {
            requested: r,
            available: m.min(n),
        });
    }
    check_start(v0, (n, r))?;
    if let Some(u0) = u0 {
        check_start(u0, (m, r))?;
    }
    let (fixed, eps) = match config.stopping {
        StoppingPolicy::FixedSteps(s) => (Some(s), None),
        StoppingPolicy::Tolerance(e) => (None, Some(e)),
        StoppingPolicy::Combined { steps, eps } => (Some(steps), Some(eps)),
    };

    let mut state = Iterate::start(u0.cloned(), v0.clone());
    let mut trace = Vec::new();
    let stop_reason = loop {
        let (next, record) = denoise_step(x, &state, config)?;
        state = next;
        trace.push(record);
        let t = record.step;
        if let (Some(e), Some(delta)) = (eps, record.max_delta()) {
            if delta <= e {
                break StopReason::Tolerance;
            }
        }
        if fixed.is_some_and(|s| t >= s) {
            break StopReason::FixedSteps;
        }
        if t >= config.max_iterations {
            break StopReason::MaxIterations;
        }
    };
    if stop_reason == StopReason::MaxIterations {
        log::warn!("iteration cap of {} steps reached before convergence", config.max_iterations);
    }

    let u_hat = state.u.expect("at least one step was taken");
    let v_hat = state.v;
    let row_support = nonzero_rows(&u_hat);
    let col_support = nonzero_rows(&v_hat);
    let block = gather_rows(&gather_cols(x.matrix(), &col_support), &row_support);
    let core = gather_rows(&u_hat, &row_support).tr_mul(&(block * gather_rows(&v_hat, &col_support)));
    let estimate = (&u_hat * &core) * v_hat.transpose();
    Ok(DenoiseResult {
        estimate,
        u_hat,
        v_hat,
        core,
        iterations_run: trace.len(),
        trace,
        row_support,
        col_support,
        stop_reason,
    })
}

fn check_start(w: &DMatrix<f64>, shape: (usize, usize)) -> Result<()> {
    if w.shape() != shape {
        return Err(Error::DimensionMismatch {
            expected: shape,
            found: w.shape(),
        });
    }
    let err = orthonormality_error(w);
    if !(err <= START_ORTHO_TOL) {
        return Err(Error::NotOrthonormal(err));
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::threshold::ThresholdRule;

    fn config(rank: usize, gamma: f64, stopping: StoppingPolicy) -> DenoiseConfig {
        DenoiseConfig {
            rank,
            sigma: 1.0,
            gamma_u: gamma,
            gamma_v: gamma,
            threshold_rule: ThresholdRule::Hard,
            stopping,
            max_iterations: 1000,
        }
    }

    fn e1(n: usize) -> DMatrix<f64> {
        let mut v = DMatrix::zeros(n, 1);
        v[(0, 0)] = 1.0;
        v
    }

    #[test]
    fn gamma_values() {
        let g = compute_gamma(10, 3.0, 2000);
        assert!((g * g - 86.66).abs() < 0.005, "{}", g * g);
        let b = 2.5;
        let l3 = 3.0_f64.ln();
        let want = 1.01 * (1.0 + 2.0 * (b * l3).sqrt() + 2.0 * b * l3);
        assert!((compute_gamma(1, b, 3).powi(2) - want).abs() < 1e-12);
        assert!(compute_gamma(11, 3.0, 2000) > g);
    }

    #[test]
    fn diagonal_fixed_point() {
        let mut a = DMatrix::zeros(4, 4);
        a[(0, 0)] = 10.0;
        let x = ObservedMatrix::new(a).unwrap();
        let cfg = config(1, 0.5, StoppingPolicy::Tolerance(1e-12));
        let (next, rec) = denoise_step(&x, &Iterate::start(Some(e1(4)), e1(4)), &cfg).unwrap();
        assert_eq!(next.u.as_ref().unwrap(), &e1(4));
        assert_eq!(next.v, e1(4));
        assert_eq!(rec.u_subspace_delta, Some(0.0));
        assert_eq!(rec.v_subspace_delta, 0.0);
        let res = denoise(&x, &cfg, &e1(4)).unwrap();
        assert_eq!(res.stop_reason, StopReason::Tolerance);
        assert_eq!(res.iterations_run, 2);
        assert!((res.estimate[(0, 0)] - 10.0).abs() < 1e-14);
    }

    #[test]
    fn huge_threshold_collapses() {
        let x = ObservedMatrix::new(DMatrix::from_fn(5, 4, |i, j| (i + j) as f64)).unwrap();
        let cfg = config(1, 1e6, StoppingPolicy::FixedSteps(3));
        let v0 = e1(4);
        assert!(matches!(denoise(&x, &cfg, &v0), Err(Error::RankCollapse { .. })));
    }

    #[test]
    fn fixed_steps_runs_exactly() {
        let x = ObservedMatrix::new(DMatrix::from_fn(6, 5, |i, j| ((i * 7 + j * 3) % 5) as f64)).unwrap();
        let res = denoise(&x, &config(2, 0.0, StoppingPolicy::FixedSteps(4)), &DMatrix::identity(5, 2)).unwrap();
        assert_eq!(res.iterations_run, 4);
        assert_eq!(res.stop_reason, StopReason::FixedSteps);
        assert!(res.trace[0].u_subspace_delta.is_none());
    }

    #[test]
    fn cap_binds_under_tolerance() {
        let x = ObservedMatrix::new(DMatrix::from_fn(6, 5, |i, j| ((i * 7 + j * 3) % 5) as f64 + 0.1 * i as f64)).unwrap();
        let mut cfg = config(2, 0.0, StoppingPolicy::Tolerance(1e-300));
        cfg.max_iterations = 3;
        let res = denoise(&x, &cfg, &DMatrix::identity(5, 2)).unwrap();
        assert_eq!(res.iterations_run, 3);
        assert!(!res.converged());
    }

    #[test]
    fn bad_start_rejected() {
        let x = ObservedMatrix::new(DMatrix::from_element(4, 3, 1.0)).unwrap();
        let cfg = config(1, 0.0, StoppingPolicy::FixedSteps(1));
        let not_unit = DMatrix::from_element(3, 1, 1.0);
        assert!(matches!(denoise(&x, &cfg, &not_unit), Err(Error::NotOrthonormal(_))));
        assert!(matches!(denoise(&x, &cfg, &e1(4)), Err(Error::DimensionMismatch { .. })));
    }
}
