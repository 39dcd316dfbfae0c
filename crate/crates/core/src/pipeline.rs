//! End-to-end estimator on observed data: noise level, screening, rank,
//! start, threshold level, iteration budget and the iteration itself.
//!
//! Inputs with more columns than rows are transposed on the way in and the
//! outputs transposed back, so the formulas below always see `m >= n`.

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::denoise::{compute_gamma, denoise_from, DenoiseResult};
use crate::error::{Error, Result};
use crate::init::{compute_t_hat, estimate_sigma, initialize, InitConfig, InitResult, IterationBudget, NoiseEstimate};
use crate::model::{DenoiseConfig, ObservedMatrix, StoppingPolicy};
use crate::threshold::ThresholdRule;

/// How the pipeline ends the iteration.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum StoppingMode {
    /// Successive projections within `eps`.
    Tolerance,
    /// The data-driven step budget.
    Budget,
    /// Whichever of the two fires first.
    Combined,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PipelineConfig {
    /// Fixed rank, or `None` for the data-driven choice.
    pub rank: Option<usize>,
    /// Known noise level, or `None` to estimate it from the data.
    pub sigma: Option<f64>,
    pub alpha: f64,
    pub beta: f64,
    pub threshold_rule: ThresholdRule,
    pub stopping: StoppingMode,
    pub eps: f64,
    pub max_iterations: usize,
}

impl Default for PipelineConfig {
    fn default() -> Self {
        Self {
            rank: None,
            sigma: None,
            alpha: 4.0,
            beta: 4.0,
            threshold_rule: ThresholdRule::Hard,
            stopping: StoppingMode::Combined,
            eps: DenoiseConfig::DEFAULT_EPS,
            max_iterations: DenoiseConfig::DEFAULT_MAX_ITERATIONS,
        }
    }
}

impl PipelineConfig {
    /// Settings of the published simulations: `beta = 3`, hard
    /// thresholding, tolerance stopping at `1e-10`.
    pub fn simulation() -> Self {
        Self {
            beta: 3.0,
            stopping: StoppingMode::Tolerance,
            ..Self::default()
        }
    }

    fn init_config(&self) -> InitConfig {
        InitConfig {
            alpha: self.alpha,
            beta: self.beta,
            rank: self.rank,
        }
    }
}

/// Everything the pipeline computed, in the caller's orientation.
#[derive(Debug, Clone)]
pub struct PipelineOutput {
    /// MAD estimate, when the noise level was not supplied.
    pub noise_estimate: Option<NoiseEstimate>,
    /// Noise level actually used.
    pub sigma: f64,
    pub init: InitResult,
    /// Unit-noise threshold level.
    pub gamma: f64,
    pub t_hat: IterationBudget,
    pub denoise_config: Option<DenoiseConfig>,
    /// `None` when the selected rank is zero.
    pub result: Option<DenoiseResult>,
    pub estimate: DMatrix<f64>,
    /// The engine ran on the transpose. Iteration traces stay in the
    /// engine's orientation: their `u` side is the caller's column side.
    pub transposed: bool,
}

impl PipelineOutput {
    pub fn rank(&self) -> usize {
        self.init.rank
    }
}

/// Runs the whole estimator on `x`.
pub fn run_pipeline(x: &ObservedMatrix, config: &PipelineConfig) -> Result<PipelineOutput> {
    let transposed = x.nrows() < x.ncols();
    if transposed {
        let out = run_tall(&x.transpose(), config)?;
        return Ok(transpose_output(out));
    }
    run_tall(x, config)
}

fn run_tall(x: &ObservedMatrix, config: &PipelineConfig) -> Result<PipelineOutput> {
    let (m, n) = x.shape();
    let (sigma, noise_estimate) = match config.sigma {
        Some(s) if s > 0.0 && s.is_finite() => (s, None),
        Some(s) => return Err(Error::InvalidArgument(format!("sigma must be positive, got {s}"))),
        None => {
            let est = estimate_sigma(x)?;
            if est.degenerate {
                return Err(Error::DegenerateNoise);
            }
            (est.sigma, Some(est))
        }
    };
    let init = initialize(x, sigma, &config.init_config())?;
    let rank = init.rank;
    if rank == 0 {
        return Ok(PipelineOutput {
            noise_estimate,
            sigma,
            init,
            gamma: 0.0,
            t_hat: IterationBudget { steps: 0, low_signal: true },
            denoise_config: None,
            result: None,
            estimate: DMatrix::zeros(m, n),
            transposed: false,
        });
    }
    let gamma = compute_gamma(rank, config.beta, m);
    let t_hat = compute_t_hat(init.d_r0, sigma * gamma, m);
    if t_hat.low_signal {
        log::warn!("screened signal {} does not exceed the threshold {}", init.d_r0, sigma * gamma);
    }
    let stopping = match config.stopping {
        StoppingMode::Tolerance => StoppingPolicy::Tolerance(config.eps),
        StoppingMode::Budget => StoppingPolicy::FixedSteps(t_hat.steps),
        StoppingMode::Combined => StoppingPolicy::Combined {
            steps: t_hat.steps,
            eps: config.eps,
        },
    };
    let dc = DenoiseConfig {
        rank,
        sigma,
        gamma_u: gamma,
        gamma_v: gamma,
        threshold_rule: config.threshold_rule,
        stopping,
        max_iterations: config.max_iterations,
    };
    let result = denoise_from(x, &dc, Some(&init.u0), &init.v0)?;
    Ok(PipelineOutput {
        noise_estimate,
        sigma,
        gamma,
        t_hat,
        denoise_config: Some(dc),
        estimate: result.estimate.clone(),
        result: Some(result),
        init,
        transposed: false,
    })
}

fn transpose_output(mut out: PipelineOutput) -> PipelineOutput {
    let init = &mut out.init;
    std::mem::swap(&mut init.sets.rows, &mut init.sets.cols);
    std::mem::swap(&mut init.u0, &mut init.v0);
    if let Some(res) = out.result.as_mut() {
        std::mem::swap(&mut res.u_hat, &mut res.v_hat);
        std::mem::swap(&mut res.row_support, &mut res.col_support);
        res.core = res.core.transpose();
        res.estimate = res.estimate.transpose();
    }
    out.estimate = out.estimate.transpose();
    out.transposed = true;
    out
}
