//! Scalar thresholding rules `eta(x, t)` and the row-wise matrix step.
//!
//! Every rule satisfies, for `x >= 0` and `t > 0`,
//!
//! ```text
//! |eta(x, t) - x| <= t        and        eta(x, t) = 0 for x in [0, t]
//! ```
//!
//! and the implementation enforces both exactly in floating point.

use std::fmt;
use std::str::FromStr;

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub const DEFAULT_SCAD_A: f64 = 3.7;
pub const DEFAULT_MCP_B: f64 = 3.0;

/// Shrinkage rule applied to row norms.
#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum ThresholdRule {
    /// `x 1{x > t}`.
    #[default]
    Hard,
    /// `max(x - t, 0)`.
    Soft,
    /// Smoothly clipped absolute deviation, `a > 2`.
    Scad { a: f64 },
    /// Minimax concave penalty (firm thresholding), `b > 1`.
    Mcp { b: f64 },
}

impl ThresholdRule {
    pub fn scad(a: f64) -> Result<Self> {
        let rule = ThresholdRule::Scad { a };
        rule.validate()?;
        Ok(rule)
    }

    pub fn mcp(b: f64) -> Result<Self> {
        let rule = ThresholdRule::Mcp { b };
        rule.validate()?;
        Ok(rule)
    }

    pub fn validate(&self) -> Result<()> {
        match *self {
            ThresholdRule::Scad { a } if !(a > 2.0) || !a.is_finite() => Err(Error::InvalidArgument(
                format!("SCAD parameter must exceed 2, got {a}"),
            )),
            ThresholdRule::Mcp { b } if !(b > 1.0) || !b.is_finite() => Err(Error::InvalidArgument(
                format!("MCP parameter must exceed 1, got {b}"),
            )),
            _ => Ok(()),
        }
    }

    /// `eta(x, t)`. A threshold `t <= 0` returns `x` unchanged.
    pub fn apply(&self, x: f64, t: f64) -> f64 {
        if t <= 0.0 {
            return x;
        }
        if x <= t {
            return 0.0;
        }
        let raw = match *self {
            ThresholdRule::Hard => x,
            ThresholdRule::Soft => x - t,
            ThresholdRule::Scad { a } => {
                if x <= 2.0 * t {
                    x - t
                } else if x <= a * t {
                    ((a - 1.0) * x - a * t) / (a - 2.0)
                } else {
                    x
                }
            }
            ThresholdRule::Mcp { b } => {
                if x <= b * t {
                    (x - t) * b / (b - 1.0)
                } else {
                    x
                }
            }
        };
        clamp_to_band(x, t, raw)
    }
}

// Rounding can push x - eta a few ulps past t; step eta toward x until the
// contract holds as evaluated in f64.
fn clamp_to_band(x: f64, t: f64, mut eta: f64) -> f64 {
    eta = eta.max(0.0);
    while x - eta > t {
        eta = eta.next_up();
    }
    while eta - x > t {
        eta = eta.next_down();
    }
    eta
}

impl fmt::Display for ThresholdRule {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ThresholdRule::Hard => write!(f, "hard"),
            ThresholdRule::Soft => write!(f, "soft"),
            ThresholdRule::Scad { a } => write!(f, "scad(a={a})"),
            ThresholdRule::Mcp { b } => write!(f, "mcp(b={b})"),
        }
    }
}

impl FromStr for ThresholdRule {
    type Err = Error;

    /// Parses `hard`, `soft`, `scad` or `mcp` with default parameters.
    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "hard" => Ok(ThresholdRule::Hard),
            "soft" => Ok(ThresholdRule::Soft),
            "scad" => Ok(ThresholdRule::Scad { a: DEFAULT_SCAD_A }),
            "mcp" => Ok(ThresholdRule::Mcp { b: DEFAULT_MCP_B }),
            other => Err(Error::Parse(format!("unknown threshold rule {other:?}"))),
        }
    }
}

/// `eta(x, t)` for `x >= 0`, `t > 0`.
pub fn threshold_scalar(rule: ThresholdRule, x: f64, t: f64) -> f64 {
    rule.apply(x, t)
}

/// Rescales each row to Euclidean length `eta(||row||, gamma)`, keeping its
/// direction. Rows whose norm is at most `gamma` become exactly zero.
pub fn threshold_rows(matrix: &DMatrix<f64>, gamma: f64, rule: ThresholdRule) -> DMatrix<f64> {
    let mut out = matrix.clone();
    for i in 0..out.nrows() {
        let norm = out.row(i).norm();
        if norm == 0.0 {
            continue;
        }
        let eta = rule.apply(norm, gamma);
        if eta == 0.0 {
            out.row_mut(i).fill(0.0);
        } else if eta != norm {
            out.row_mut(i).scale_mut(eta / norm);
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn named_examples() {
        assert_eq!(threshold_scalar(ThresholdRule::Hard, 2.0, 3.0), 0.0);
        assert_eq!(threshold_scalar(ThresholdRule::Hard, 5.0, 3.0), 5.0);
        assert_eq!(threshold_scalar(ThresholdRule::Soft, 5.0, 3.0), 2.0);
        for rule in [ThresholdRule::Hard, ThresholdRule::Soft, ThresholdRule::Scad { a: 3.7 }, ThresholdRule::Mcp { b: 3.0 }] {
            assert_eq!(rule.apply(3.0, 3.0), 0.0, "{rule}: tie at x = t must vanish");
        }
    }

    // Direct piecewise evaluation of the SCAD rule, written independently
    // of `apply`.
    fn scad_oracle(x: f64, t: f64, a: f64) -> f64 {
        let z = x.abs();
        let v = if z <= 2.0 * t {
            (z - t).max(0.0)
        } else if z <= a * t {
            ((a - 1.0) * z - a * t) / (a - 2.0)
        } else {
            z
        };
        v * x.signum()
    }

    #[test]
    fn scad_matches_piecewise_oracle() {
        let rule = ThresholdRule::scad(3.7).unwrap();
        // x = 5 lies in the soft region (5 <= 2t = 6).
        assert_eq!(scad_oracle(5.0, 3.0, 3.7), 2.0);
        assert!((rule.apply(5.0, 3.0) - 2.0).abs() < 1e-15);
        for &(x, t) in &[(7.0, 3.0), (10.0, 3.0), (11.1, 3.0), (12.0, 3.0), (0.5, 0.1)] {
            assert!((rule.apply(x, t) - scad_oracle(x, t, 3.7)).abs() < 1e-12, "x={x} t={t}");
        }
        // middle region is continuous at both knots
        assert!((rule.apply(6.0 + 1e-9, 3.0) - 3.0).abs() < 1e-8);
        assert!((rule.apply(11.1 - 1e-9, 3.0) - 11.1).abs() < 1e-8);
    }

    #[test]
    fn mcp_piecewise() {
        let rule = ThresholdRule::mcp(3.0).unwrap();
        assert!((rule.apply(6.0, 3.0) - 4.5).abs() < 1e-15);
        assert_eq!(rule.apply(9.5, 3.0), 9.5);
    }

    #[test]
    fn invalid_parameters_rejected() {
        assert!(ThresholdRule::scad(2.0).is_err());
        assert!(ThresholdRule::mcp(1.0).is_err());
        assert!(ThresholdRule::mcp(f64::NAN).is_err());
        assert!("bogus".parse::<ThresholdRule>().is_err());
        assert_eq!("SCAD".parse::<ThresholdRule>().unwrap(), ThresholdRule::Scad { a: 3.7 });
    }

    #[test]
    fn row_examples() {
        let m = DMatrix::from_row_slice(3, 2, &[0.0, 0.0, 3.0, 4.0, 3.0, 4.0]);
        let hard = threshold_rows(&m, 6.0, ThresholdRule::Hard);
        assert!(hard.iter().all(|&v| v == 0.0));
        let soft = threshold_rows(&m, 3.0, ThresholdRule::Soft);
        assert_eq!(soft.row(0).iter().copied().collect::<Vec<_>>(), vec![0.0, 0.0]);
        assert!((soft[(1, 0)] - 1.2).abs() < 1e-15 && (soft[(1, 1)] - 1.6).abs() < 1e-15);
        // zero threshold is the identity
        assert_eq!(threshold_rows(&m, 0.0, ThresholdRule::Hard), m);
    }

    #[test]
    fn serde_tagging() {
        let json = serde_json::to_string(&ThresholdRule::Scad { a: 3.7 }).unwrap();
        assert_eq!(json, r#"{"kind":"scad","a":3.7}"#);
        let back: ThresholdRule = serde_json::from_str(&json).unwrap();
        assert_eq!(back, ThresholdRule::Scad { a: 3.7 });
    }
}
