//! Domain types: observed data, ground-truth factors, parameter-space
//! descriptors and the denoiser configuration.

use nalgebra::{DMatrix, DVector};
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{nonzero_rows, orthonormality_error};
use crate::rng;
use crate::threshold::ThresholdRule;

/// Tolerance for the orthonormality of ground-truth factors.
pub const FACTOR_ORTHO_TOL: f64 = 1e-10;

/// The observed `m x n` data matrix `X = M + Z`. All entries are finite.
#[derive(Debug, Clone, PartialEq)]
pub struct ObservedMatrix {
    entries: DMatrix<f64>,
}

impl ObservedMatrix {
    pub fn new(entries: DMatrix<f64>) -> Result<Self> {
        if entries.nrows() == 0 || entries.ncols() == 0 {
            return Err(Error::InvalidArgument(format!(
                "observed matrix must be non-empty, got {}x{}",
                entries.nrows(),
                entries.ncols()
            )));
        }
        for j in 0..entries.ncols() {
            for i in 0..entries.nrows() {
                if !entries[(i, j)].is_finite() {
                    return Err(Error::NonFinite { row: i, col: j });
                }
            }
        }
        Ok(Self { entries })
    }

    pub fn nrows(&self) -> usize {
        self.entries.nrows()
    }

    pub fn ncols(&self) -> usize {
        self.entries.ncols()
    }

    pub fn shape(&self) -> (usize, usize) {
        self.entries.shape()
    }

    pub fn matrix(&self) -> &DMatrix<f64> {
        &self.entries
    }

    pub fn into_matrix(self) -> DMatrix<f64> {
        self.entries
    }

    pub fn transpose(&self) -> Self {
        Self {
            entries: self.entries.transpose(),
        }
    }

    /// `c * X`, used for scaling checks.
    pub fn scaled(&self, c: f64) -> Result<Self> {
        Self::new(&self.entries * c)
    }
}

/// Ground-truth factorization `M = U diag(d) V'` with row supports.
#[derive(Debug, Clone, PartialEq)]
pub struct SignalFactors {
    left: DMatrix<f64>,
    singular_values: DVector<f64>,
    right: DMatrix<f64>,
    row_support: Vec<usize>,
    col_support: Vec<usize>,
}

impl SignalFactors {
    /// Validates orthonormality, ordering of the singular values and that the
    /// factors vanish outside the given supports.
    pub fn new(
        left: DMatrix<f64>,
        singular_values: DVector<f64>,
        right: DMatrix<f64>,
        mut row_support: Vec<usize>,
        mut col_support: Vec<usize>,
    ) -> Result<Self> {
        let r = singular_values.len();
        if r == 0 {
            return Err(Error::InvalidArgument("rank must be positive".into()));
        }
        if left.ncols() != r || right.ncols() != r {
            return Err(Error::DimensionMismatch {
                expected: (left.nrows(), r),
                found: (left.nrows(), left.ncols().min(right.ncols())),
            });
        }
        for (which, w) in [("left", &left), ("right", &right)] {
            let err = orthonormality_error(w);
            if !(err <= FACTOR_ORTHO_TOL) {
                log::debug!("{which} factor deviates from orthonormality by {err:e}");
                return Err(Error::NotOrthonormal(err));
            }
        }
        if singular_values.iter().any(|d| !(*d > 0.0)) {
            return Err(Error::InvalidArgument("singular values must be positive".into()));
        }
        if singular_values.as_slice().windows(2).any(|w| w[0] < w[1]) {
            return Err(Error::InvalidArgument("singular values must be nonincreasing".into()));
        }
        row_support.sort_unstable();
        row_support.dedup();
        col_support.sort_unstable();
        col_support.dedup();
        check_support("row", &left, &row_support)?;
        check_support("column", &right, &col_support)?;
        Ok(Self {
            left,
            singular_values,
            right,
            row_support,
            col_support,
        })
    }

    /// Like [`SignalFactors::new`] with supports read off the nonzero rows.
    pub fn from_factors(
        left: DMatrix<f64>,
        singular_values: DVector<f64>,
        right: DMatrix<f64>,
    ) -> Result<Self> {
        let rows = nonzero_rows(&left);
        let cols = nonzero_rows(&right);
        Self::new(left, singular_values, right, rows, cols)
    }

    /// Checks membership in the parameter space described by `space`.
    pub fn check_membership(&self, space: &ParamSpaceSpec) -> Result<()> {
        space.validate()?;
        if self.left.nrows() != space.m || self.right.nrows() != space.n || self.rank() != space.r {
            return Err(Error::DimensionMismatch {
                expected: (space.m, space.n),
                found: (self.left.nrows(), self.right.nrows()),
            });
        }
        if self.row_support.len() > space.k || self.col_support.len() > space.l {
            return Err(Error::InvalidArgument(format!(
                "supports {}x{} exceed the {}x{} block",
                self.row_support.len(),
                self.col_support.len(),
                space.k,
                space.l
            )));
        }
        let d_max = self.singular_values[0];
        let d_min = self.singular_values[self.rank() - 1];
        if d_min < space.d || d_max > space.kappa * space.d {
            return Err(Error::InvalidArgument(format!(
                "singular values [{d_min}, {d_max}] outside [{}, {}]",
                space.d,
                space.kappa * space.d
            )));
        }
        Ok(())
    }

    pub fn rank(&self) -> usize {
        self.singular_values.len()
    }

    pub fn left(&self) -> &DMatrix<f64> {
        &self.left
    }

    pub fn right(&self) -> &DMatrix<f64> {
        &self.right
    }

    pub fn singular_values(&self) -> &DVector<f64> {
        &self.singular_values
    }

    pub fn row_support(&self) -> &[usize] {
        &self.row_support
    }

    pub fn col_support(&self) -> &[usize] {
        &self.col_support
    }

    /// `U diag(d)`, the left factor of the rank-r product.
    pub fn scaled_left(&self) -> DMatrix<f64> {
        let mut out = self.left.clone();
        for (j, d) in self.singular_values.iter().enumerate() {
            out.column_mut(j).scale_mut(*d);
        }
        out
    }
}

fn check_support(what: &str, w: &DMatrix<f64>, support: &[usize]) -> Result<()> {
    if let Some(&last) = support.last() {
        if last >= w.nrows() {
            return Err(Error::InvalidArgument(format!(
                "{what} support index {last} out of range {}",
                w.nrows()
            )));
        }
    }
    let outside = nonzero_rows(w)
        .into_iter()
        .find(|i| support.binary_search(i).is_err());
    match outside {
        Some(i) => Err(Error::InvalidArgument(format!(
            "{what} {i} is nonzero but not in the declared support"
        ))),
        None => Ok(()),
    }
}

/// Descriptor of the parameter space: `m x n` matrices of rank `r` supported
/// on a `k x l` block with singular values in `[d, kappa d]`, observed with
/// noise level `sigma`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ParamSpaceSpec {
    pub m: usize,
    pub n: usize,
    pub k: usize,
    pub l: usize,
    pub r: usize,
    pub d: f64,
    pub kappa: f64,
    pub sigma: f64,
}

impl ParamSpaceSpec {
    pub fn validate(&self) -> Result<()> {
        if self.r == 0 {
            return Err(Error::InvalidArgument("r must be positive".into()));
        }
        if !(self.m >= self.k && self.k >= self.r && self.n >= self.l && self.l >= self.r) {
            return Err(Error::InvalidArgument(format!(
                "need m >= k >= r and n >= l >= r, got m={} k={} n={} l={} r={}",
                self.m, self.k, self.n, self.l, self.r
            )));
        }
        if !(self.kappa > 1.0) {
            return Err(Error::InvalidArgument("kappa must exceed 1".into()));
        }
        if !(self.d > 0.0) || !(self.sigma > 0.0) {
            return Err(Error::InvalidArgument("d and sigma must be positive".into()));
        }
        Ok(())
    }
}

/// When to leave the iteration loop.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum StoppingPolicy {
    /// Run exactly this many steps.
    FixedSteps(usize),
    /// Stop once the larger of the two projection changes is at most `eps`.
    Tolerance(f64),
    /// Stop at whichever of the two rules fires first.
    Combined { steps: usize, eps: f64 },
}

impl StoppingPolicy {
    pub fn validate(&self) -> Result<()> {
        let (steps, eps) = match *self {
            StoppingPolicy::FixedSteps(s) => (Some(s), None),
            StoppingPolicy::Tolerance(e) => (None, Some(e)),
            StoppingPolicy::Combined { steps, eps } => (Some(steps), Some(eps)),
        };
        if steps == Some(0) {
            return Err(Error::InvalidArgument("step count must be positive".into()));
        }
        if let Some(e) = eps {
            if !(e > 0.0) {
                return Err(Error::InvalidArgument(format!("tolerance must be positive, got {e}")));
            }
        }
        Ok(())
    }
}

/// Inputs of the iterative thresholding engine.
///
/// `gamma_u` and `gamma_v` are threshold levels for unit noise; the engine
/// thresholds row norms at `sigma * gamma`. A level of zero disables
/// thresholding on that side and turns the engine into plain two-way power
/// iteration.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DenoiseConfig {
    pub rank: usize,
    pub sigma: f64,
    pub gamma_u: f64,
    pub gamma_v: f64,
    pub threshold_rule: ThresholdRule,
    pub stopping: StoppingPolicy,
    pub max_iterations: usize,
}

impl DenoiseConfig {
    pub const DEFAULT_EPS: f64 = 1e-10;
    pub const DEFAULT_MAX_ITERATIONS: usize = 1000;

    pub fn validate(&self) -> Result<()> {
        if self.rank == 0 {
            return Err(Error::InvalidArgument("rank must be positive".into()));
        }
        if !(self.sigma >= 0.0) || !self.sigma.is_finite() {
            return Err(Error::InvalidArgument(format!("invalid sigma {}", self.sigma)));
        }
        for g in [self.gamma_u, self.gamma_v] {
            if !(g >= 0.0) || !g.is_finite() {
                return Err(Error::InvalidArgument(format!("invalid threshold level {g}")));
            }
        }
        if self.max_iterations == 0 {
            return Err(Error::InvalidArgument("max_iterations must be at least 1".into()));
        }
        self.threshold_rule.validate()?;
        self.stopping.validate()
    }

    /// Working threshold applied to rows of `X V`.
    pub fn left_threshold(&self) -> f64 {
        self.sigma * self.gamma_u
    }

    /// Working threshold applied to rows of `X' U`.
    pub fn right_threshold(&self) -> f64 {
        self.sigma * self.gamma_v
    }
}

/// `U diag(d) V'`.
pub fn compose_signal(factors: &SignalFactors) -> DMatrix<f64> {
    factors.scaled_left() * factors.right().transpose()
}

/// `signal + sigma * G` with `G` standard normal, drawn from the stream keyed
/// by `seed` in column-major order.
pub fn add_noise(signal: &DMatrix<f64>, sigma: f64, seed: u64) -> Result<ObservedMatrix> {
    if !(sigma >= 0.0) || !sigma.is_finite() {
        return Err(Error::InvalidArgument(format!("invalid sigma {sigma}")));
    }
    let mut out = signal.clone();
    if sigma > 0.0 {
        let mut rng = rng::stream(seed);
        for v in out.iter_mut() {
            let g: f64 = StandardNormal.sample(&mut rng);
            *v += sigma * g;
        }
    }
    ObservedMatrix::new(out)
}
