//! Synthetic instances and the Monte-Carlo harness.
//!
//! An instance draws sparse orthonormal factors by orthonormalizing a
//! Gaussian matrix whose `i`-th support row has standard deviation `i^2`,
//! composes the signal from the requested singular values and adds white
//! noise. Every replication redraws factors and noise from its own seed.

use std::path::Path;

use nalgebra::{DMatrix, DVector};
use rand::seq::index::sample;
use rand::RngCore;
use rand_distr::{Distribution, Normal};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::denoise::denoise_from;
use crate::error::{Error, Result};
use crate::init::compute_t_oracle;
use crate::linalg::{orthonormalize, scatter_rows};
use crate::model::{add_noise, compose_signal, ObservedMatrix, SignalFactors};
use crate::pipeline::{run_pipeline, PipelineConfig, PipelineOutput};
use crate::rng;
use crate::spectral::{numerical_rank, sin_theta, table2_rescale};

/// Relative cutoff used when counting the rank of an estimate.
pub const ESTIMATE_RANK_TOL: f64 = 1e-9;

/// Design of a synthetic instance.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GeneratorSpec {
    pub m: usize,
    pub n: usize,
    pub k: usize,
    pub l: usize,
    pub r: usize,
    pub singular_values: Vec<f64>,
    pub sigma: f64,
    #[serde(default)]
    pub permute_supports: bool,
    #[serde(default)]
    pub seed: u64,
}

/// Singular values `a * (200, 190, ..., 110)`.
pub fn table1_singular_values(a: f64) -> Vec<f64> {
    (0..10).map(|i| a * (200.0 - 10.0 * i as f64)).collect()
}

impl GeneratorSpec {
    /// 2000 x 1000, rank 10 on a 50 x 50 block, singular values scaled by `a`.
    pub fn table1(a: f64) -> Self {
        Self::table2(50, 50).with_singular_values(table1_singular_values(a))
    }

    /// 2000 x 1000, rank 10 on a `k x l` block.
    pub fn table2(k: usize, l: usize) -> Self {
        Self {
            m: 2000,
            n: 1000,
            k,
            l,
            r: 10,
            singular_values: table1_singular_values(1.0),
            sigma: 1.0,
            permute_supports: false,
            seed: 0,
        }
    }

    /// Reduced design for quick runs: 400 x 200, rank 5 on a 20 x 20 block,
    /// singular values `(80, 75, 70, 65, 60)`.
    pub fn desk() -> Self {
        Self {
            m: 400,
            n: 200,
            k: 20,
            l: 20,
            r: 5,
            singular_values: vec![80.0, 75.0, 70.0, 65.0, 60.0],
            sigma: 1.0,
            permute_supports: false,
            seed: 0,
        }
    }

    pub fn with_singular_values(mut self, values: Vec<f64>) -> Self {
        self.singular_values = values;
        self
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if self.r == 0 || !(self.m >= self.k && self.k >= self.r && self.n >= self.l && self.l >= self.r) {
            return Err(Error::InvalidArgument(format!(
                "need m >= k >= r >= 1 and n >= l >= r, got m={} n={} k={} l={} r={}",
                self.m, self.n, self.k, self.l, self.r
            )));
        }
        if self.singular_values.len() != self.r {
            return Err(Error::InvalidArgument(format!(
                "expected {} singular values, got {}",
                self.r,
                self.singular_values.len()
            )));
        }
        if self.singular_values.iter().any(|d| !(*d > 0.0)) || self.singular_values.windows(2).any(|w| w[0] < w[1]) {
            return Err(Error::InvalidArgument("singular values must be positive and nonincreasing".into()));
        }
        if !(self.sigma >= 0.0) || !self.sigma.is_finite() {
            return Err(Error::InvalidArgument(format!("invalid sigma {}", self.sigma)));
        }
        Ok(())
    }
}

fn sparse_factor(rng: &mut rng::Stream, rows: usize, support: usize, r: usize, permute: bool) -> Result<DMatrix<f64>> {
    let positions: Vec<usize> = if permute {
        sample(rng, rows, support).into_vec()
    } else {
        (0..support).collect()
    };
    let mut seed = DMatrix::zeros(support, r);
    for i in 0..support {
        let scale = ((i + 1) as f64).powi(2);
        let dist = Normal::new(0.0, scale).expect("positive scale");
        for j in 0..r {
            seed[(i, j)] = dist.sample(rng);
        }
    }
    // keep the placed rows in index order for the compact factorization
    let mut order: Vec<usize> = (0..support).collect();
    order.sort_by_key(|&i| positions[i]);
    let sorted_rows: Vec<usize> = order.iter().map(|&i| positions[i]).collect();
    let compact = DMatrix::from_fn(support, r, |i, j| seed[(order[i], j)]);
    orthonormalize(&scatter_rows(&compact, &sorted_rows, rows))
}

/// Draws factors and data for `spec`. Deterministic given `spec.seed`.
pub fn generate_instance(spec: &GeneratorSpec) -> Result<(SignalFactors, ObservedMatrix)> {
    spec.validate()?;
    let mut rng = rng::stream(spec.seed);
    let left = sparse_factor(&mut rng, spec.m, spec.k, spec.r, spec.permute_supports)?;
    let right = sparse_factor(&mut rng, spec.n, spec.l, spec.r, spec.permute_supports)?;
    let noise_seed = rng.next_u64();
    let factors = SignalFactors::from_factors(left, DVector::from_vec(spec.singular_values.clone()), right)?;
    let x = add_noise(&compose_signal(&factors), spec.sigma, noise_seed)?;
    Ok((factors, x))
}

/// Settings for one replication.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ReplicationSettings {
    pub pipeline: PipelineConfig,
    /// Also record structural checks, including a rerun on scaled data.
    pub check_invariants: bool,
    pub equivariance_scale: f64,
}

impl Default for ReplicationSettings {
    /// The published simulation settings.
    fn default() -> Self {
        Self {
            pipeline: PipelineConfig::simulation(),
            check_invariants: false,
            equivariance_scale: 7.0,
        }
    }
}

/// Structural checks of one run.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct InvariantReport {
    /// Largest `max |W'W - I|` over all iterates.
    pub max_orthonormality_error: f64,
    /// Zero rows after thresholding stayed zero after QR at every step.
    pub supports_preserved: bool,
    pub estimate_rank: usize,
    /// `||M(cX, c sigma) - c M(X, sigma)||_F / ||c M(X, sigma)||_F`.
    pub equivariance_rel_error: f64,
    /// The scaled rerun kept the same step count and supports.
    pub equivariance_same_path: bool,
}

/// Outcome of one replication.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReplicationRecord {
    pub seed: u64,
    pub l1: f64,
    pub l2: f64,
    pub r_hat: usize,
    pub rank: usize,
    pub iterations: usize,
    pub converged: bool,
    pub t_hat: usize,
    /// Budget from the true smallest singular value.
    pub t_oracle: usize,
    pub sigma_hat: f64,
    /// Frobenius sin-theta between the right start and the truth, when the
    /// selected rank matches.
    pub start_sin_theta: Option<f64>,
    pub invariants: Option<InvariantReport>,
}

/// Generates, denoises and scores one instance. Only the observed matrix
/// feeds the estimator; the truth is used for scoring.
pub fn run_replication(spec: &GeneratorSpec, settings: &ReplicationSettings, seed: u64) -> Result<ReplicationRecord> {
    let spec = spec.clone().with_seed(seed);
    let (factors, x) = generate_instance(&spec)?;
    let out = run_pipeline(&x, &settings.pipeline)?;
    let truth_left = factors.scaled_left();
    let (l1, l2) = match &out.result {
        Some(res) => (
            res.loss_against(&truth_left, factors.right(), 1.0)?,
            res.loss_against(&truth_left, factors.right(), 2.0)?,
        ),
        None => {
            let d = factors.singular_values();
            (d.sum().powi(2), d.norm_squared())
        }
    };
    let m_big = spec.m.max(spec.n);
    let working_gamma = out.sigma * out.gamma;
    let d_r = factors.singular_values()[spec.r - 1];
    let t_oracle = compute_t_oracle(d_r, spec.k, spec.l, working_gamma, working_gamma, m_big).steps;
    let start_sin_theta = if out.rank() == spec.r && !out.transposed {
        Some(sin_theta(&out.init.v0, factors.right())?.frobenius_sin_theta)
    } else {
        None
    };
    let invariants = if settings.check_invariants {
        Some(check_invariants(&x, &out, settings.equivariance_scale)?)
    } else {
        None
    };
    let (iterations, converged) = out
        .result
        .as_ref()
        .map_or((0, true), |r| (r.iterations_run, r.converged()));
    Ok(ReplicationRecord {
        seed,
        l1,
        l2,
        r_hat: out.init.r_hat,
        rank: out.rank(),
        iterations,
        converged,
        t_hat: out.t_hat.steps,
        t_oracle,
        sigma_hat: out.sigma,
        start_sin_theta,
        invariants,
    })
}

fn check_invariants(x: &ObservedMatrix, out: &PipelineOutput, scale: f64) -> Result<InvariantReport> {
    let (Some(res), Some(config)) = (&out.result, &out.denoise_config) else {
        return Ok(InvariantReport {
            max_orthonormality_error: 0.0,
            supports_preserved: true,
            estimate_rank: 0,
            equivariance_rel_error: 0.0,
            equivariance_same_path: true,
        });
    };
    let max_orthonormality_error = res
        .trace
        .iter()
        .map(|t| t.u_orthonormality_error.max(t.v_orthonormality_error))
        .fold(0.0_f64, f64::max);
    let supports_preserved = res.trace.iter().all(|t| t.supports_preserved);
    // M = U C V' with orthonormal U, V has the singular values of C
    let estimate_rank = numerical_rank(&res.core, ESTIMATE_RANK_TOL);

    let (tall_x, u0, v0) = if out.transposed {
        (x.transpose(), &out.init.v0, &out.init.u0)
    } else {
        (x.clone(), &out.init.u0, &out.init.v0)
    };
    let scaled_config = crate::model::DenoiseConfig {
        sigma: config.sigma * scale,
        ..*config
    };
    let rerun = denoise_from(&tall_x.scaled(scale)?, &scaled_config, Some(u0), v0)?;
    let reference = if out.transposed { res.estimate.transpose() } else { res.estimate.clone() } * scale;
    let equivariance_rel_error = (&rerun.estimate - &reference).norm() / reference.norm();
    let (rows, cols) = if out.transposed {
        (&res.col_support, &res.row_support)
    } else {
        (&res.row_support, &res.col_support)
    };
    let equivariance_same_path =
        rerun.iterations_run == res.iterations_run && &rerun.row_support == rows && &rerun.col_support == cols;
    Ok(InvariantReport {
        max_orthonormality_error,
        supports_preserved,
        estimate_rank,
        equivariance_rel_error,
        equivariance_same_path,
    })
}

/// A replication that returned an error.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FailedReplication {
    pub index: usize,
    pub seed: u64,
    pub error: String,
}

/// Aggregate over replications.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentReport {
    pub label: String,
    pub spec: GeneratorSpec,
    pub base_seed: u64,
    pub reps: usize,
    /// Each replication draws fresh factors as well as fresh noise.
    pub redraw_factors_per_replication: bool,
    pub per_rep: Vec<ReplicationRecord>,
    pub failures: Vec<FailedReplication>,
    pub mean_l1: f64,
    pub mean_l2: f64,
    /// Sample standard deviation over replications divided by `sqrt(count)`.
    pub se_l1: f64,
    pub se_l2: f64,
    /// `mean_l2 / table2_rescale(2, ...)`.
    pub rescaled_l2: f64,
    /// `mean_l1 / table2_rescale(1, ...)`.
    pub rescaled_l1: f64,
    /// Fraction of all replications whose selected rank equals `spec.r`.
    pub rank_recovery_rate: f64,
}

/// Mean and standard error of the mean.
pub fn mean_and_se(values: &[f64]) -> (f64, f64) {
    let n = values.len();
    if n == 0 {
        return (f64::NAN, f64::NAN);
    }
    let mean = values.iter().sum::<f64>() / n as f64;
    if n == 1 {
        return (mean, 0.0);
    }
    let var = values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1) as f64;
    (mean, (var / n as f64).sqrt())
}

/// Runs `reps` replications on seeds derived from `base_seed`, in parallel.
/// The report is identical to a serial run.
pub fn run_experiment(
    label: &str,
    spec: &GeneratorSpec,
    reps: usize,
    base_seed: u64,
    settings: &ReplicationSettings,
) -> Result<ExperimentReport> {
    if reps < 2 {
        return Err(Error::InvalidArgument(format!("need at least 2 replications, got {reps}")));
    }
    spec.validate()?;
    let outcomes: Vec<(usize, u64, Result<ReplicationRecord>)> = (0..reps)
        .into_par_iter()
        .map(|i| {
            let seed = rng::child_seed(base_seed, i as u64);
            (i, seed, run_replication(spec, settings, seed))
        })
        .collect();
    Ok(aggregate(label, spec, base_seed, reps, outcomes))
}

fn aggregate(
    label: &str,
    spec: &GeneratorSpec,
    base_seed: u64,
    reps: usize,
    outcomes: Vec<(usize, u64, Result<ReplicationRecord>)>,
) -> ExperimentReport {
    let mut per_rep = Vec::new();
    let mut failures = Vec::new();
    for (index, seed, outcome) in outcomes {
        match outcome {
            Ok(rec) => per_rep.push(rec),
            Err(e) => {
                log::warn!("replication {index} (seed {seed}) failed: {e}");
                failures.push(FailedReplication {
                    index,
                    seed,
                    error: e.to_string(),
                });
            }
        }
    }
    let l1: Vec<f64> = per_rep.iter().map(|r| r.l1).collect();
    let l2: Vec<f64> = per_rep.iter().map(|r| r.l2).collect();
    let (mean_l1, se_l1) = mean_and_se(&l1);
    let (mean_l2, se_l2) = mean_and_se(&l2);
    let m_big = spec.m.max(spec.n);
    let recovered = per_rep.iter().filter(|r| r.r_hat == spec.r).count();
    ExperimentReport {
        label: label.to_string(),
        spec: spec.clone(),
        base_seed,
        reps,
        redraw_factors_per_replication: true,
        per_rep,
        failures,
        mean_l1,
        mean_l2,
        se_l1,
        se_l2,
        rescaled_l2: mean_l2 / table2_rescale(2.0, m_big, spec.k, spec.l, spec.r),
        rescaled_l1: mean_l1 / table2_rescale(1.0, m_big, spec.k, spec.l, spec.r),
        rank_recovery_rate: recovered as f64 / reps as f64,
    }
}

/// Problem size for the benchmark tables.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Scale {
    Full,
    Desk,
}

impl std::str::FromStr for Scale {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "full" => Ok(Scale::Full),
            "desk" => Ok(Scale::Desk),
            other => Err(Error::Parse(format!("unknown scale {other:?}"))),
        }
    }
}

/// Signal-strength sweep: one scenario per `a` in `{0.5, 1, 5, 10, 20}`.
pub fn table1_scenarios(scale: Scale) -> Vec<(String, GeneratorSpec)> {
    [0.5, 1.0, 5.0, 10.0, 20.0]
        .into_iter()
        .map(|a| {
            let spec = match scale {
                Scale::Full => GeneratorSpec::table1(a),
                Scale::Desk => {
                    let desk = GeneratorSpec::desk();
                    let values = desk.singular_values.iter().map(|d| a * d).collect();
                    desk.with_singular_values(values)
                }
            };
            (format!("a={a}"), spec)
        })
        .collect()
}

/// Sparsity sweep over `(k, l)` in `{(50,50), (50,200), (100,200), (100,50)}`;
/// the desk scale uses `{(20,20), (20,80), (40,80), (40,20)}`.
pub fn table2_scenarios(scale: Scale) -> Vec<(String, GeneratorSpec)> {
    let full = [(50, 50), (50, 200), (100, 200), (100, 50)];
    full.into_iter()
        .map(|(k, l)| {
            let spec = match scale {
                Scale::Full => GeneratorSpec::table2(k, l),
                Scale::Desk => GeneratorSpec {
                    k: k * 2 / 5,
                    l: l * 2 / 5,
                    ..GeneratorSpec::desk()
                },
            };
            (format!("(k,l)=({},{})", spec.k, spec.l), spec)
        })
        .collect()
}

/// Writes the full reports as pretty JSON.
pub fn write_reports_json(reports: &[ExperimentReport], path: &Path) -> Result<()> {
    let file = std::fs::File::create(path)?;
    serde_json::to_writer_pretty(std::io::BufWriter::new(file), reports)?;
    Ok(())
}

/// Writes one aggregate row per report.
pub fn write_summary_csv(reports: &[ExperimentReport], path: &Path) -> Result<()> {
    let mut w = csv::Writer::from_path(path)?;
    w.write_record([
        "label", "m", "n", "k", "l", "r", "reps", "failures", "mean_l2", "se_l2", "rescaled_l2", "mean_l1", "se_l1",
        "rescaled_l1", "rank_recovery_rate",
    ])?;
    for rep in reports {
        let s = &rep.spec;
        w.write_record([
            rep.label.clone(),
            s.m.to_string(),
            s.n.to_string(),
            s.k.to_string(),
            s.l.to_string(),
            s.r.to_string(),
            rep.reps.to_string(),
            rep.failures.len().to_string(),
            format!("{:.2}", rep.mean_l2),
            format!("{:.2}", rep.se_l2),
            format!("{:.4}", rep.rescaled_l2),
            format!("{:.2}", rep.mean_l1),
            format!("{:.2}", rep.se_l1),
            format!("{:.4}", rep.rescaled_l1),
            format!("{:.4}", rep.rank_recovery_rate),
        ])?;
    }
    w.flush()?;
    Ok(())
}
