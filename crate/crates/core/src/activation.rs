//! Invertible activations.
//!
//! The only member today is the modified softplus `f(x) = ln(shift + e^x)`
//! with inverse `f^{-1}(y) = ln(e^y - shift)`, defined for `y > ln(shift)`.
//! Both directions are evaluated in forms that avoid overflow for large
//! arguments and cancellation near the lower asymptote.

use crate::linalg::Matrix;
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ActivationError {
    #[error(
        "inverse activation domain violated: value {value} at ({row}, {col}) is not above the floor {floor}"
    )]
    DomainViolation {
        /// Smallest offending value.
        value: f64,
        row: usize,
        col: usize,
        floor: f64,
    },
    #[error("non-finite activation input {0}")]
    NonFinite(f64),
    #[error("invalid activation parameters: {0}")]
    InvalidParameters(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum ActivationKind {
    ModifiedSoftplus,
}

impl ActivationKind {
    pub fn as_str(self) -> &'static str {
        match self {
            ActivationKind::ModifiedSoftplus => "modified_softplus",
        }
    }
}

impl std::str::FromStr for ActivationKind {
    type Err = ActivationError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "modified_softplus" => Ok(ActivationKind::ModifiedSoftplus),
            other => Err(ActivationError::InvalidParameters(format!(
                "unknown activation `{other}`"
            ))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Activation {
    pub kind: ActivationKind,
    /// The additive constant inside the log, in `(0, 1)`.
    pub shift: f64,
    /// Margin above `ln(shift)` that clipped inverses are raised to.
    pub clip_epsilon: f64,
}

impl Default for Activation {
    fn default() -> Self {
        Self {
            kind: ActivationKind::ModifiedSoftplus,
            shift: 0.8,
            clip_epsilon: 1e-6,
        }
    }
}

impl Activation {
    pub fn modified_softplus(shift: f64, clip_epsilon: f64) -> Result<Self, ActivationError> {
        let a = Self {
            kind: ActivationKind::ModifiedSoftplus,
            shift,
            clip_epsilon,
        };
        a.validate()?;
        Ok(a)
    }

    pub fn validate(&self) -> Result<(), ActivationError> {
        if !(self.shift > 0.0 && self.shift < 1.0) {
            return Err(ActivationError::InvalidParameters(format!(
                "shift must lie in (0, 1), got {}",
                self.shift
            )));
        }
        if !(self.clip_epsilon.is_finite() && self.clip_epsilon > 0.0) {
            return Err(ActivationError::InvalidParameters(format!(
                "clip_epsilon must be positive, got {}",
                self.clip_epsilon
            )));
        }
        Ok(())
    }

    /// Lower asymptote `ln(shift)` of the activation's range.
    pub fn floor(&self) -> f64 {
        self.shift.ln()
    }

    /// `ln(shift + e^x)`.
    pub fn act(&self, x: f64) -> f64 {
        match self.kind {
            ActivationKind::ModifiedSoftplus => {
                if x > 0.0 {
                    x + (self.shift * (-x).exp()).ln_1p()
                } else {
                    self.floor() + (x.exp() / self.shift).ln_1p()
                }
            }
        }
    }

    /// `ln(e^y - shift)`; fails unless `y > ln(shift)`.
    pub fn act_inv(&self, y: f64) -> Result<f64, ActivationError> {
        if !y.is_finite() {
            return Err(ActivationError::NonFinite(y));
        }
        if y <= self.floor() {
            return Err(ActivationError::DomainViolation {
                value: y,
                row: 0,
                col: 0,
                floor: self.floor(),
            });
        }
        Ok(self.inv_unchecked(y))
    }

    /// Inverse with clipping; the flag reports whether `y` was raised.
    pub fn act_inv_clipped(&self, y: f64) -> (f64, bool) {
        let lowest = self.floor() + self.clip_epsilon;
        if y <= lowest {
            (self.inv_unchecked(lowest), true)
        } else {
            (self.inv_unchecked(y), false)
        }
    }

    fn inv_unchecked(&self, y: f64) -> f64 {
        match self.kind {
            ActivationKind::ModifiedSoftplus => {
                if y > 0.0 {
                    y + (-self.shift * (-y).exp()).ln_1p()
                } else {
                    // e^y - shift = shift * (e^{y - ln shift} - 1)
                    self.floor() + (y - self.floor()).exp_m1().ln()
                }
            }
        }
    }

    pub fn act_matrix(&self, x: &Matrix) -> Matrix {
        x.map(|v| self.act(v))
    }

    /// Elementwise inverse. With `clip = false` the first (row-major) smallest
    /// violating entry is reported. Returns the number of clipped entries.
    pub fn act_inv_matrix(
        &self,
        y: &Matrix,
        clip: bool,
    ) -> Result<(Matrix, usize), ActivationError> {
        if let Some(&bad) = y.iter().find(|v| !v.is_finite()) {
            return Err(ActivationError::NonFinite(bad));
        }
        if clip {
            let mut clipped = 0;
            let out = y.map(|v| {
                let (r, c) = self.act_inv_clipped(v);
                clipped += c as usize;
                r
            });
            return Ok((out, clipped));
        }
        let floor = self.floor();
        let mut worst: Option<(f64, usize, usize)> = None;
        for row in 0..y.nrows() {
            for col in 0..y.ncols() {
                let v = y[(row, col)];
                if v <= floor && worst.is_none_or(|(w, _, _)| v < w) {
                    worst = Some((v, row, col));
                }
            }
        }
        if let Some((value, row, col)) = worst {
            return Err(ActivationError::DomainViolation {
                value,
                row,
                col,
                floor,
            });
        }
        Ok((y.map(|v| self.inv_unchecked(v)), 0))
    }
}
