//! Denoising of matrices that are simultaneously sparse and low rank.
//!
//! The observed matrix is `X = M + Z` with white Gaussian noise `Z` and a
//! signal `M` of rank `r` whose nonzero entries sit on a `k x l` block. The
//! estimator alternates multiplication by `X` and `X'` with row-wise
//! thresholding and QR orthonormalization, starting from the leading singular
//! vectors of a screened copy of `X`, and returns `U U' X V V'`.
//!
//! The modules map onto the stages of the estimator:
//!
//! - [`model`]: data, ground-truth factors, configuration records.
//! - [`threshold`]: shrinkage rules and the row-wise thresholding step.
//! - [`spectral`]: Schatten norms and losses, truncated SVD, subspace
//!   distances, rate constants.
//! - [`init`]: noise estimation, screening, rank selection, the spectral
//!   start and iteration budgets.
//! - [`denoise`]: the iteration itself.
//! - [`pipeline`]: all of the above on an observed matrix.
//! - [`experiments`]: synthetic instances and the Monte-Carlo harness.
//!
//! ```
//! use twoway_denoise::experiments::{generate_instance, GeneratorSpec};
//! use twoway_denoise::pipeline::{run_pipeline, PipelineConfig};
//!
//! let spec = GeneratorSpec::desk().with_seed(1);
//! let (truth, x) = generate_instance(&spec).unwrap();
//! let out = run_pipeline(&x, &PipelineConfig::simulation()).unwrap();
//! assert_eq!(out.rank(), truth.rank());
//! ```

pub mod denoise;
pub mod error;
pub mod experiments;
pub mod init;
pub mod io;
pub mod linalg;
pub mod model;
pub mod pipeline;
pub mod rng;
pub mod spectral;
pub mod threshold;

pub use denoise::{compute_gamma, denoise, denoise_from, denoise_step, DenoiseResult, IterationRecord, StopReason};
pub use error::{Error, Result};
pub use init::{estimate_sigma, initialize, select_rank, select_screening_sets, InitConfig, InitResult};
pub use model::{add_noise, compose_signal, DenoiseConfig, ObservedMatrix, ParamSpaceSpec, SignalFactors, StoppingPolicy};
pub use pipeline::{run_pipeline, PipelineConfig, PipelineOutput, StoppingMode};
pub use spectral::{loss_lq, schatten_norm, sin_theta, truncated_svd, SubspaceDistance};
pub use threshold::{threshold_rows, threshold_scalar, ThresholdRule};
