use super::EvalError;
use crate::linalg::Matrix;

/// Predicted class per row: argmax with ties to the lowest index, or a 0.5
/// threshold when there is a single output column.
pub fn predicted_classes(y_hat: &Matrix) -> Vec<usize> {
    (0..y_hat.nrows())
        .map(|i| {
            if y_hat.ncols() == 1 {
                usize::from(y_hat[(i, 0)] >= 0.5)
            } else {
                let row = y_hat.row(i);
                let mut best = 0;
                for j in 1..row.len() {
                    if row[j] > row[best] {
                        best = j;
                    }
                }
                best
            }
        })
        .collect()
}

/// Percentage of rows whose predicted class matches `labels`.
pub fn accuracy(y_hat: &Matrix, labels: &[usize]) -> Result<f64, EvalError> {
    if y_hat.nrows() != labels.len() || labels.is_empty() {
        return Err(EvalError::Shape(format!(
            "{} predictions for {} labels",
            y_hat.nrows(),
            labels.len()
        )));
    }
    let correct = predicted_classes(y_hat)
        .iter()
        .zip(labels)
        .filter(|(p, l)| p == l)
        .count();
    Ok(100.0 * correct as f64 / labels.len() as f64)
}

/// Mean squared elementwise residual.
pub fn mse(y_hat: &Matrix, y: &Matrix) -> Result<f64, EvalError> {
    if y_hat.shape() != y.shape() || y.is_empty() {
        return Err(EvalError::Shape(format!(
            "prediction {:?} vs target {:?}",
            y_hat.shape(),
            y.shape()
        )));
    }
    Ok((y_hat - y).iter().map(|r| r * r).sum::<f64>() / y.len() as f64)
}
