//! Fully connected feedforward network with ones-column bias augmentation
//! at every layer:
//!
//! ```text
//! A_0 = X_aug
//! A_k = [1, f_k(A_{k-1} W_k)]     k = 1 .. n-1
//! Y   = f_n(A_{n-1} W_n)
//! ```
//!
//! `W_1` is `(d+1) x h_1` and `W_k` is `(h_{k-1}+1) x h_k`. The first row of
//! each weight matrix multiplies the ones column, i.e. it is the bias row.

mod model_file;

pub use model_file::{read_model, write_model, ModelFileError, MODEL_MAGIC, MODEL_VERSION};

use crate::activation::Activation;
use crate::linalg::{self, LinalgError, Matrix};
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum NetworkError {
    #[error("invalid network spec: {0}")]
    InvalidSpec(String),
    #[error("layer {layer} weights have shape {actual:?}, expected {expected:?}")]
    WeightShape {
        layer: usize,
        expected: (usize, usize),
        actual: (usize, usize),
    },
    #[error("input batch has {actual} columns, expected {expected}")]
    InputShape { expected: usize, actual: usize },
    #[error("non-finite value produced at layer {layer}")]
    NonFiniteIntermediate { layer: usize },
    #[error("input first column is already all ones; use `augment_forced` to add another")]
    AlreadyAugmented,
    #[error(transparent)]
    Linalg(#[from] LinalgError),
}

/// Layer widths, input dimension and per-layer activations.
#[derive(Debug, Clone, PartialEq)]
pub struct NetworkSpec {
    input_dim: usize,
    widths: Vec<usize>,
    activations: Vec<Activation>,
}

impl NetworkSpec {
    /// Spec with the default modified softplus shared across all layers.
    pub fn new(input_dim: usize, widths: Vec<usize>) -> Result<Self, NetworkError> {
        let activations = vec![Activation::default(); widths.len()];
        Self::with_activations(input_dim, widths, activations)
    }

    pub fn with_activations(
        input_dim: usize,
        widths: Vec<usize>,
        activations: Vec<Activation>,
    ) -> Result<Self, NetworkError> {
        if input_dim == 0 {
            return Err(NetworkError::InvalidSpec("input dimension must be >= 1".into()));
        }
        if widths.len() < 2 {
            return Err(NetworkError::InvalidSpec(format!(
                "need at least 2 layers, got {}",
                widths.len()
            )));
        }
        if let Some(k) = widths.iter().position(|&h| h == 0) {
            return Err(NetworkError::InvalidSpec(format!(
                "layer {} has zero width",
                k + 1
            )));
        }
        if activations.len() != widths.len() {
            return Err(NetworkError::InvalidSpec(format!(
                "{} activations given for {} layers",
                activations.len(),
                widths.len()
            )));
        }
        for a in &activations {
            a.validate()
                .map_err(|e| NetworkError::InvalidSpec(e.to_string()))?;
        }
        Ok(Self {
            input_dim,
            widths,
            activations,
        })
    }

    pub fn input_dim(&self) -> usize {
        self.input_dim
    }

    pub fn widths(&self) -> &[usize] {
        &self.widths
    }

    pub fn activations(&self) -> &[Activation] {
        &self.activations
    }

    /// Activation of layer `k`, 1-based.
    pub fn activation(&self, k: usize) -> &Activation {
        &self.activations[k - 1]
    }

    pub fn depth(&self) -> usize {
        self.widths.len()
    }

    pub fn output_dim(&self) -> usize {
        *self.widths.last().expect("spec has at least two layers")
    }

    /// Shape of `W_k`, 1-based: `(fan_in + 1) x h_k`.
    pub fn layer_shape(&self, k: usize) -> (usize, usize) {
        let fan_in = if k == 1 {
            self.input_dim
        } else {
            self.widths[k - 2]
        };
        (fan_in + 1, self.widths[k - 1])
    }

    pub fn layer_shapes(&self) -> Vec<(usize, usize)> {
        (1..=self.depth()).map(|k| self.layer_shape(k)).collect()
    }

    /// Whether the matrix nearest the output, `A_{n-1}` of size
    /// `m x (h_{n-1}+1)`, has at least as many columns as rows.
    pub fn is_underdetermined(&self, samples: usize) -> bool {
        self.widths[self.depth() - 2] + 1 >= samples
    }
}

/// Trained (or initialised) weights `[W_1, ..., W_n]`.
#[derive(Debug, Clone, PartialEq)]
pub struct WeightStack {
    layers: Vec<Matrix>,
}

impl WeightStack {
    pub fn new(spec: &NetworkSpec, layers: Vec<Matrix>) -> Result<Self, NetworkError> {
        if layers.len() != spec.depth() {
            return Err(NetworkError::InvalidSpec(format!(
                "{} weight matrices for a {}-layer spec",
                layers.len(),
                spec.depth()
            )));
        }
        for (i, w) in layers.iter().enumerate() {
            let expected = spec.layer_shape(i + 1);
            if w.shape() != expected {
                return Err(NetworkError::WeightShape {
                    layer: i + 1,
                    expected,
                    actual: w.shape(),
                });
            }
            linalg::ensure_finite(w, "weights")?;
        }
        Ok(Self { layers })
    }

    pub fn layers(&self) -> &[Matrix] {
        &self.layers
    }

    pub fn into_layers(self) -> Vec<Matrix> {
        self.layers
    }

    /// `W_k`, 1-based.
    pub fn layer(&self, k: usize) -> &Matrix {
        &self.layers[k - 1]
    }

    /// Bias row `w_k^T` (first row of `W_k`) as a `1 x h_k` matrix.
    pub fn bias_row(&self, k: usize) -> Matrix {
        self.layers[k - 1].rows(0, 1).into_owned()
    }

    /// Weights without the bias row, `(rows - 1) x h_k`.
    pub fn sans_bias(&self, k: usize) -> Matrix {
        let w = &self.layers[k - 1];
        w.rows(1, w.nrows() - 1).into_owned()
    }

    pub fn depth(&self) -> usize {
        self.layers.len()
    }
}

/// Input batch with a leading column of ones.
#[derive(Debug, Clone, PartialEq)]
pub struct AugmentedBatch(Matrix);

impl AugmentedBatch {
    pub fn matrix(&self) -> &Matrix {
        &self.0
    }

    pub fn into_matrix(self) -> Matrix {
        self.0
    }

    pub fn rows(&self) -> usize {
        self.0.nrows()
    }

    /// Feature count, excluding the ones column.
    pub fn features(&self) -> usize {
        self.0.ncols() - 1
    }
}

/// Prepends a ones column. Refuses input whose first column is already all
/// ones, which almost always means the batch was augmented before.
pub fn augment(x_raw: &Matrix) -> Result<AugmentedBatch, NetworkError> {
    linalg::check_shape(x_raw)?;
    if x_raw.column(0).iter().all(|&v| v == 1.0) {
        return Err(NetworkError::AlreadyAugmented);
    }
    augment_forced(x_raw)
}

/// Prepends a ones column unconditionally.
pub fn augment_forced(x_raw: &Matrix) -> Result<AugmentedBatch, NetworkError> {
    linalg::check_shape(x_raw)?;
    linalg::ensure_finite(x_raw, "network input")?;
    Ok(AugmentedBatch(prepend_ones(x_raw)))
}

pub(crate) fn prepend_ones(m: &Matrix) -> Matrix {
    let (rows, cols) = m.shape();
    Matrix::from_fn(rows, cols + 1, |i, j| if j == 0 { 1.0 } else { m[(i, j - 1)] })
}

fn check_layer_finite(m: &Matrix, layer: usize) -> Result<(), NetworkError> {
    if m.iter().all(|v| v.is_finite()) {
        Ok(())
    } else {
        Err(NetworkError::NonFiniteIntermediate { layer })
    }
}

fn check_compatible(
    spec: &NetworkSpec,
    w: &WeightStack,
    x: &AugmentedBatch,
) -> Result<(), NetworkError> {
    if x.features() != spec.input_dim() {
        return Err(NetworkError::InputShape {
            expected: spec.input_dim(),
            actual: x.features(),
        });
    }
    if w.depth() != spec.depth() {
        return Err(NetworkError::InvalidSpec(format!(
            "{} weight matrices for a {}-layer spec",
            w.depth(),
            spec.depth()
        )));
    }
    for k in 1..=spec.depth() {
        if w.layer(k).shape() != spec.layer_shape(k) {
            return Err(NetworkError::WeightShape {
                layer: k,
                expected: spec.layer_shape(k),
                actual: w.layer(k).shape(),
            });
        }
    }
    Ok(())
}

/// One hidden step: `[1, f_k(input W_k)]`.
pub(crate) fn hidden_step(
    spec: &NetworkSpec,
    w: &Matrix,
    input: &Matrix,
    k: usize,
) -> Result<Matrix, NetworkError> {
    let pre = input * w;
    let out = prepend_ones(&spec.activation(k).act_matrix(&pre));
    check_layer_finite(&out, k)?;
    Ok(out)
}

/// Augmented hidden outputs `[A_1, ..., A_{n-1}]`.
pub fn hidden_activations(
    spec: &NetworkSpec,
    w: &WeightStack,
    x: &AugmentedBatch,
) -> Result<Vec<Matrix>, NetworkError> {
    check_compatible(spec, w, x)?;
    let mut out: Vec<Matrix> = Vec::with_capacity(spec.depth() - 1);
    for k in 1..spec.depth() {
        let input = out.last().unwrap_or(x.matrix());
        let a = hidden_step(spec, w.layer(k), input, k)?;
        out.push(a);
    }
    Ok(out)
}

/// Network output, `m x q`.
pub fn forward(
    spec: &NetworkSpec,
    w: &WeightStack,
    x: &AugmentedBatch,
) -> Result<Matrix, NetworkError> {
    let hidden = hidden_activations(spec, w, x)?;
    let n = spec.depth();
    let last = hidden.last().expect("depth >= 2");
    let y = spec.activation(n).act_matrix(&(last * w.layer(n)));
    check_layer_finite(&y, n)?;
    Ok(y)
}

/// A spec together with its weights; the unit that is trained and persisted.
#[derive(Debug, Clone, PartialEq)]
pub struct Model {
    pub spec: NetworkSpec,
    pub weights: WeightStack,
}

impl Model {
    /// Forward pass on raw (un-augmented) features.
    pub fn predict(&self, x_raw: &Matrix) -> Result<Matrix, NetworkError> {
        forward(&self.spec, &self.weights, &augment_forced(x_raw)?)
    }
}
