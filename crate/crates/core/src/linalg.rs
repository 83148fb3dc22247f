//! Dense linear-algebra kernel: Moore-Penrose pseudo-inverse and the
//! minimum-norm least-squares solver built on it.
//!
//! Two routes to the pseudo-inverse are available:
//!
//! - [`PinvMode::SvdTruncation`] (default): thin SVD, singular values at or
//!   below `rcond * sigma_max` are treated as zero. Robust for the
//!   rank-deficient hidden-layer matrices that show up during training.
//! - [`PinvMode::RidgeLimit`]: the regularised closed form,
//!   `A^T (A A^T + lambda I)^{-1}` for wide (or square) `A` and
//!   `(A^T A + lambda I)^{-1} A^T` for tall `A`. As `lambda -> 0` this
//!   converges to the SVD answer for full-rank inputs.
//!
//! Every solver rejects non-finite input eagerly.

use nalgebra::DMatrix;
use thiserror::Error;

/// Dense row/column matrix of `f64`, the carrier for data, targets, activations and weights.
pub type Matrix = DMatrix<f64>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum LinalgError {
    #[error("non-finite value in {what} at ({row}, {col})")]
    NonFiniteInput {
        what: &'static str,
        row: usize,
        col: usize,
    },
    #[error("degenerate shape {rows}x{cols}: matrices must have at least one row and one column")]
    DegenerateShape { rows: usize, cols: usize },
    #[error("shape mismatch in {op}: {left:?} vs {right:?}")]
    ShapeMismatch {
        op: &'static str,
        left: (usize, usize),
        right: (usize, usize),
    },
    #[error("invalid pseudo-inverse configuration: {0}")]
    InvalidConfig(String),
    #[error("regularised Gram matrix is not positive definite (lambda = {lambda})")]
    SingularSystem { lambda: f64 },
    #[error("singular value decomposition did not converge")]
    SvdFailed,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum PinvMode {
    SvdTruncation,
    RidgeLimit,
}

impl PinvMode {
    pub fn as_str(self) -> &'static str {
        match self {
            PinvMode::SvdTruncation => "svd_truncation",
            PinvMode::RidgeLimit => "ridge_limit",
        }
    }
}

impl std::str::FromStr for PinvMode {
    type Err = LinalgError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "svd_truncation" | "svd" => Ok(PinvMode::SvdTruncation),
            "ridge_limit" | "ridge" => Ok(PinvMode::RidgeLimit),
            other => Err(LinalgError::InvalidConfig(format!(
                "unknown pseudo-inverse mode `{other}`"
            ))),
        }
    }
}

/// How [`pinv`] computes the pseudo-inverse.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PinvConfig {
    pub mode: PinvMode,
    /// Relative singular-value cutoff. `None` selects `f64::EPSILON * max(rows, cols)`
    /// for each matrix.
    pub rcond: Option<f64>,
    /// Ridge parameter, only read in [`PinvMode::RidgeLimit`].
    pub lambda: f64,
}

impl Default for PinvConfig {
    fn default() -> Self {
        Self {
            mode: PinvMode::SvdTruncation,
            rcond: None,
            lambda: 1e-8,
        }
    }
}

impl PinvConfig {
    pub fn ridge(lambda: f64) -> Self {
        Self {
            mode: PinvMode::RidgeLimit,
            lambda,
            ..Self::default()
        }
    }

    pub fn validate(&self) -> Result<(), LinalgError> {
        if let Some(rcond) = self.rcond {
            if !(rcond.is_finite() && rcond > 0.0) {
                return Err(LinalgError::InvalidConfig(format!(
                    "rcond must be positive and finite, got {rcond}"
                )));
            }
        }
        if !(self.lambda.is_finite() && self.lambda >= 0.0) {
            return Err(LinalgError::InvalidConfig(format!(
                "lambda must be non-negative and finite, got {}",
                self.lambda
            )));
        }
        Ok(())
    }

    /// Cutoff actually applied to a `rows x cols` matrix.
    pub fn effective_rcond(&self, rows: usize, cols: usize) -> f64 {
        self.rcond
            .unwrap_or(f64::EPSILON * rows.max(cols) as f64)
    }
}

pub(crate) fn check_shape(a: &Matrix) -> Result<(), LinalgError> {
    if a.nrows() == 0 || a.ncols() == 0 {
        return Err(LinalgError::DegenerateShape {
            rows: a.nrows(),
            cols: a.ncols(),
        });
    }
    Ok(())
}

/// Returns an error locating the first NaN/Inf entry, scanning row by row.
pub fn ensure_finite(a: &Matrix, what: &'static str) -> Result<(), LinalgError> {
    for row in 0..a.nrows() {
        for col in 0..a.ncols() {
            if !a[(row, col)].is_finite() {
                return Err(LinalgError::NonFiniteInput { what, row, col });
            }
        }
    }
    Ok(())
}

/// Moore-Penrose pseudo-inverse, returned with shape `cols x rows`.
pub fn pinv(a: &Matrix, cfg: &PinvConfig) -> Result<Matrix, LinalgError> {
    cfg.validate()?;
    check_shape(a)?;
    ensure_finite(a, "pinv input")?;
    match cfg.mode {
        PinvMode::SvdTruncation => pinv_svd(a, cfg.effective_rcond(a.nrows(), a.ncols())),
        PinvMode::RidgeLimit => pinv_ridge(a, cfg.lambda),
    }
}

fn pinv_svd(a: &Matrix, rcond: f64) -> Result<Matrix, LinalgError> {
    let (m, n) = a.shape();
    let fa = faer::Mat::<f64>::from_fn(m, n, |i, j| a[(i, j)]);
    let svd = fa.thin_svd().map_err(|_| LinalgError::SvdFailed)?;
    let s = svd.S().column_vector();
    let k = m.min(n);
    let s_max = if k > 0 { s[0] } else { 0.0 };
    let cutoff = rcond * s_max;
    // singular values come sorted in non-increasing order
    let rank = (0..k).take_while(|&i| s[i] > cutoff && s[i] > 0.0).count();
    if rank == 0 {
        return Ok(Matrix::zeros(n, m));
    }
    let u = svd.U();
    let v = svd.V();
    let v_scaled = Matrix::from_fn(n, rank, |i, j| v[(i, j)] / s[j]);
    let u_rank = Matrix::from_fn(m, rank, |i, j| u[(i, j)]);
    Ok(v_scaled * u_rank.transpose())
}

fn pinv_ridge(a: &Matrix, lambda: f64) -> Result<Matrix, LinalgError> {
    let (m, n) = a.shape();
    let at = a.transpose();
    if m <= n {
        // A^T (A A^T + lambda I)^{-1} = ((A A^T + lambda I)^{-1} A)^T
        let gram = a * &at + Matrix::identity(m, m) * lambda;
        let chol = checked_cholesky(gram, lambda)?;
        Ok(chol.solve(a).transpose())
    } else {
        let gram = &at * a + Matrix::identity(n, n) * lambda;
        let chol = checked_cholesky(gram, lambda)?;
        Ok(chol.solve(&at))
    }
}

// Rejects factors whose smallest pivot is lost in rounding.
fn checked_cholesky(
    gram: Matrix,
    lambda: f64,
) -> Result<nalgebra::Cholesky<f64, nalgebra::Dyn>, LinalgError> {
    let k = gram.nrows();
    let max_diag = gram.diagonal().amax();
    let chol = gram.cholesky().ok_or(LinalgError::SingularSystem { lambda })?;
    let l = chol.l_dirty();
    let min_pivot = (0..k).map(|i| l[(i, i)] * l[(i, i)]).fold(f64::INFINITY, f64::min);
    if !(min_pivot > f64::EPSILON * k as f64 * max_diag) {
        return Err(LinalgError::SingularSystem { lambda });
    }
    Ok(chol)
}

/// Minimum-norm least-squares solution `X^+ Y` of `X W = Y`.
pub fn solve_min_norm(x: &Matrix, y: &Matrix, cfg: &PinvConfig) -> Result<Matrix, LinalgError> {
    if x.nrows() != y.nrows() {
        return Err(LinalgError::ShapeMismatch {
            op: "solve_min_norm",
            left: x.shape(),
            right: y.shape(),
        });
    }
    check_shape(y)?;
    ensure_finite(y, "solve_min_norm targets")?;
    Ok(pinv(x, cfg)? * y)
}

/// Sum of squared errors `trace((XW - Y)^T (XW - Y))`.
pub fn sse(x: &Matrix, w: &Matrix, y: &Matrix) -> Result<f64, LinalgError> {
    if x.ncols() != w.nrows() {
        return Err(LinalgError::ShapeMismatch {
            op: "sse (X * W)",
            left: x.shape(),
            right: w.shape(),
        });
    }
    if x.nrows() != y.nrows() || w.ncols() != y.ncols() {
        return Err(LinalgError::ShapeMismatch {
            op: "sse (XW - Y)",
            left: (x.nrows(), w.ncols()),
            right: y.shape(),
        });
    }
    let residual = x * w - y;
    Ok(residual.iter().map(|r| r * r).sum())
}
