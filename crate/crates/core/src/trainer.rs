//! Single-pass KAR training.
//!
//! 1. Draw every `W_k` at random. Only the bias rows `w_k` and sans-bias
//!    blocks `Ŵ_k` of layers `2..n` are used; `W_1` exists so the stack is
//!    complete and is overwritten.
//! 2. Peel the targets backwards:
//!    `G_n = Y`, `G_{k-1} = [f_k^{-1}(G_k) - 1 w_k^T] pinv(Ŵ_k)` for `k = n..2`.
//! 3. Back-substitute forwards:
//!    `W_1 = pinv(X) f_1^{-1}(G_1)`, then `A_{k-1} = [1, f_{k-1}(A_{k-2} W_{k-1})]`
//!    and `W_k = pinv(A_{k-1}) f_k^{-1}(G_k)` up to `W_n`.
//!
//! That is `n - 1` pseudo-inverses for the peel and `n` for the
//! substitution: `2n - 1` in total, with no iteration and no derivatives.

use crate::activation::ActivationError;
use crate::linalg::{self, LinalgError, Matrix, PinvConfig};
use crate::network::{self, AugmentedBatch, NetworkError, NetworkSpec, WeightStack};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal, Uniform};
use std::fmt::Write as _;
use std::time::{Duration, Instant};
use thiserror::Error;

/// Fraction of clipped inverse-activation entries above which a run is flagged.
pub const CLIP_WARNING_FRACTION: f64 = 0.05;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum TrainError {
    #[error("layer {layer}: {source}")]
    Domain {
        layer: usize,
        #[source]
        source: ActivationError,
    },
    #[error("targets have shape {actual:?}, expected {expected:?}")]
    TargetShape {
        expected: (usize, usize),
        actual: (usize, usize),
    },
    #[error("invalid training configuration: {0}")]
    InvalidConfig(String),
    #[error(transparent)]
    Network(#[from] NetworkError),
    #[error(transparent)]
    Linalg(#[from] LinalgError),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum InitScheme {
    /// Zero-mean normal, standard deviation `init_scale` (default `1/sqrt(fan_in)`).
    NormalScaled,
    /// Uniform on `[-init_scale, init_scale]` (default scale 1).
    UniformPm1,
}

impl InitScheme {
    pub fn as_str(self) -> &'static str {
        match self {
            InitScheme::NormalScaled => "normal_scaled",
            InitScheme::UniformPm1 => "uniform_pm1",
        }
    }
}

impl std::str::FromStr for InitScheme {
    type Err = TrainError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "normal_scaled" | "normal" => Ok(InitScheme::NormalScaled),
            "uniform_pm1" | "uniform" => Ok(InitScheme::UniformPm1),
            other => Err(TrainError::InvalidConfig(format!(
                "unknown init scheme `{other}`"
            ))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TrainConfig {
    pub seed: u64,
    pub init: InitScheme,
    /// `None` picks the scheme's default scale.
    pub init_scale: Option<f64>,
    pub pinv: PinvConfig,
    /// Clip inverse-activation inputs into the activation's range instead of failing.
    pub inverse_clip: bool,
}

impl Default for TrainConfig {
    fn default() -> Self {
        Self {
            seed: 0,
            init: InitScheme::NormalScaled,
            init_scale: None,
            pinv: PinvConfig::default(),
            inverse_clip: true,
        }
    }
}

impl TrainConfig {
    pub fn with_seed(seed: u64) -> Self {
        Self {
            seed,
            ..Self::default()
        }
    }

    fn validate(&self) -> Result<(), TrainError> {
        if let Some(s) = self.init_scale {
            if !(s.is_finite() && s > 0.0) {
                return Err(TrainError::InvalidConfig(format!(
                    "init_scale must be positive, got {s}"
                )));
            }
        }
        self.pinv.validate()?;
        Ok(())
    }

    /// Scale used for a block with `fan_in` input rows (bias row included).
    pub fn scale_for(&self, fan_in: usize) -> f64 {
        match (self.init, self.init_scale) {
            (_, Some(s)) => s,
            (InitScheme::NormalScaled, None) => 1.0 / (fan_in as f64).sqrt(),
            (InitScheme::UniformPm1, None) => 1.0,
        }
    }
}

/// The generator behind every random draw: ChaCha8 seeded with `seed_from_u64`.
pub fn rng_from_seed(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Draws a `rows x cols` block with the configured distribution, row-major.
pub fn draw_block<R: Rng>(rng: &mut R, rows: usize, cols: usize, cfg: &TrainConfig) -> Matrix {
    let scale = cfg.scale_for(rows);
    let mut data = Vec::with_capacity(rows * cols);
    match cfg.init {
        InitScheme::NormalScaled => {
            let dist = Normal::new(0.0, scale).expect("scale validated positive");
            data.extend((0..rows * cols).map(|_| dist.sample(rng)));
        }
        InitScheme::UniformPm1 => {
            let dist = Uniform::new_inclusive(-scale, scale).expect("scale validated positive");
            data.extend((0..rows * cols).map(|_| dist.sample(rng)));
        }
    }
    Matrix::from_row_slice(rows, cols, &data)
}

/// Random weight stack; layers are drawn in order `W_1 .. W_n`.
pub fn init_weights(spec: &NetworkSpec, cfg: &TrainConfig) -> Result<WeightStack, TrainError> {
    cfg.validate()?;
    let mut rng = rng_from_seed(cfg.seed);
    let layers = spec
        .layer_shapes()
        .into_iter()
        .map(|(r, c)| draw_block(&mut rng, r, c, cfg))
        .collect();
    Ok(WeightStack::new(spec, layers)?)
}

/// Per-layer targets produced by the backward peel.
#[derive(Debug, Clone, PartialEq)]
pub struct PeeledTargets {
    /// `[G_1, ..., G_n]`, post-activation targets; `G_n = Y`.
    pub targets: Vec<Matrix>,
    /// `[f_1^{-1}(G_1), ..., f_n^{-1}(G_n)]`, the pre-activation targets.
    pub preactivations: Vec<Matrix>,
    /// Inverse-activation entries that were clipped into range.
    pub clip_events: usize,
    pub pinv_calls: usize,
}

fn inverse_at(
    spec: &NetworkSpec,
    k: usize,
    g: &Matrix,
    clip: bool,
) -> Result<(Matrix, usize), TrainError> {
    spec.activation(k)
        .act_inv_matrix(g, clip)
        .map_err(|source| TrainError::Domain { layer: k, source })
}

/// Backward peel using the random bias rows and sans-bias blocks of `W_2 .. W_n`.
pub fn peel_targets(
    y: &Matrix,
    w: &WeightStack,
    spec: &NetworkSpec,
    cfg: &TrainConfig,
) -> Result<PeeledTargets, TrainError> {
    let n = spec.depth();
    let expected = (y.nrows(), spec.output_dim());
    if y.ncols() != spec.output_dim() || y.nrows() == 0 {
        return Err(TrainError::TargetShape {
            expected,
            actual: y.shape(),
        });
    }
    linalg::ensure_finite(y, "targets")?;

    let mut targets = vec![Matrix::zeros(0, 0); n];
    let mut preacts = vec![Matrix::zeros(0, 0); n];
    let mut clip_events = 0;
    let mut pinv_calls = 0;

    targets[n - 1] = y.clone();
    for k in (2..=n).rev() {
        let (z, clips) = inverse_at(spec, k, &targets[k - 1], cfg.inverse_clip)?;
        clip_events += clips;
        let shifted = &z - Matrix::from_fn(z.nrows(), z.ncols(), |_, j| w.layer(k)[(0, j)]);
        let block_pinv = linalg::pinv(&w.sans_bias(k), &cfg.pinv)?;
        pinv_calls += 1;
        targets[k - 2] = shifted * block_pinv;
        preacts[k - 1] = z;
    }
    let (z1, clips) = inverse_at(spec, 1, &targets[0], cfg.inverse_clip)?;
    clip_events += clips;
    preacts[0] = z1;

    Ok(PeeledTargets {
        targets,
        preactivations: preacts,
        clip_events,
        pinv_calls,
    })
}

/// Output of the forward back-substitution sweep.
#[derive(Debug, Clone, PartialEq)]
pub struct BackSubstitution {
    pub weights: WeightStack,
    /// `||A_{k-1} W_k - f_k^{-1}(G_k)||_F` for `k = 1..n`, with `A_0 = X`.
    pub layer_residuals: Vec<f64>,
    pub pinv_calls: usize,
}

pub fn back_substitute(
    x: &AugmentedBatch,
    peeled: &PeeledTargets,
    spec: &NetworkSpec,
    cfg: &TrainConfig,
) -> Result<BackSubstitution, TrainError> {
    let n = spec.depth();
    if peeled.preactivations.len() != n {
        return Err(TrainError::InvalidConfig(format!(
            "{} peeled layers for a {n}-layer spec",
            peeled.preactivations.len()
        )));
    }
    let mut layers = Vec::with_capacity(n);
    let mut residuals = Vec::with_capacity(n);
    let mut pinv_calls = 0;
    let mut input = x.matrix().clone();
    for k in 1..=n {
        let z = &peeled.preactivations[k - 1];
        if z.nrows() != input.nrows() || z.ncols() != spec.widths()[k - 1] {
            return Err(TrainError::TargetShape {
                expected: (input.nrows(), spec.widths()[k - 1]),
                actual: z.shape(),
            });
        }
        let wk = linalg::pinv(&input, &cfg.pinv)? * z;
        pinv_calls += 1;
        linalg::ensure_finite(&wk, "solved weights")?;
        let fitted = &input * &wk;
        residuals.push((fitted - z).norm());
        if k < n {
            input = network::hidden_step(spec, &wk, &input, k)?;
        }
        layers.push(wk);
    }
    Ok(BackSubstitution {
        weights: WeightStack::new(spec, layers)?,
        layer_residuals: residuals,
        pinv_calls,
    })
}

/// Record of a single training run.
#[derive(Debug, Clone, PartialEq)]
pub struct TrainReport {
    pub seed: u64,
    pub init: InitScheme,
    pub init_scale: Option<f64>,
    pub pinv: PinvConfig,
    pub inverse_clip: bool,
    pub samples: usize,
    pub input_dim: usize,
    pub widths: Vec<usize>,
    pub pinv_calls: usize,
    pub clip_events: usize,
    /// Entries passed through an inverse activation.
    pub inverted_entries: usize,
    pub layer_residuals: Vec<f64>,
    pub wall_time: Duration,
}

impl TrainReport {
    pub fn clip_fraction(&self) -> f64 {
        if self.inverted_entries == 0 {
            0.0
        } else {
            self.clip_events as f64 / self.inverted_entries as f64
        }
    }

    pub fn clip_warning(&self) -> bool {
        self.clip_fraction() > CLIP_WARNING_FRACTION
    }

    /// `key = value` lines; schema in `docs/formats.md`. Wall time is left out
    /// so the record is reproducible.
    pub fn to_record(&self) -> String {
        let mut s = String::new();
        let widths: Vec<String> = self.widths.iter().map(|h| h.to_string()).collect();
        let residuals: Vec<String> = self.layer_residuals.iter().map(|r| format!("{r:e}")).collect();
        let _ = writeln!(s, "record = train_report");
        let _ = writeln!(s, "seed = {}", self.seed);
        let _ = writeln!(s, "init = {}", self.init.as_str());
        match self.init_scale {
            Some(v) => {
                let _ = writeln!(s, "init_scale = {v:e}");
            }
            None => {
                let _ = writeln!(s, "init_scale = default");
            }
        }
        let _ = writeln!(s, "bias_rows_from_init = true");
        let _ = writeln!(s, "pinv_mode = {}", self.pinv.mode.as_str());
        match self.pinv.rcond {
            Some(r) => {
                let _ = writeln!(s, "pinv_rcond = {r:e}");
            }
            None => {
                let _ = writeln!(s, "pinv_rcond = default");
            }
        }
        let _ = writeln!(s, "pinv_lambda = {:e}", self.pinv.lambda);
        let _ = writeln!(s, "inverse_clip = {}", self.inverse_clip);
        let _ = writeln!(s, "samples = {}", self.samples);
        let _ = writeln!(s, "input_dim = {}", self.input_dim);
        let _ = writeln!(s, "widths = {}", widths.join(","));
        let _ = writeln!(s, "pinv_calls = {}", self.pinv_calls);
        let _ = writeln!(s, "clip_events = {}", self.clip_events);
        let _ = writeln!(s, "inverted_entries = {}", self.inverted_entries);
        let _ = writeln!(s, "clip_warning = {}", self.clip_warning());
        let _ = writeln!(s, "layer_residuals = {}", residuals.join(","));
        s
    }
}

/// `augment -> init_weights -> peel_targets -> back_substitute`.
pub fn train(
    x_raw: &Matrix,
    y: &Matrix,
    spec: &NetworkSpec,
    cfg: &TrainConfig,
) -> Result<(WeightStack, TrainReport), TrainError> {
    let start = Instant::now();
    if x_raw.nrows() != y.nrows() {
        return Err(TrainError::TargetShape {
            expected: (x_raw.nrows(), spec.output_dim()),
            actual: y.shape(),
        });
    }
    let x = network::augment_forced(x_raw)?;
    if x.features() != spec.input_dim() {
        return Err(NetworkError::InputShape {
            expected: spec.input_dim(),
            actual: x.features(),
        }
        .into());
    }
    let init = init_weights(spec, cfg)?;
    let peeled = peel_targets(y, &init, spec, cfg)?;
    let solved = back_substitute(&x, &peeled, spec, cfg)?;
    let inverted_entries = peeled.preactivations.iter().map(|z| z.len()).sum();
    let report = TrainReport {
        seed: cfg.seed,
        init: cfg.init,
        init_scale: cfg.init_scale,
        pinv: cfg.pinv,
        inverse_clip: cfg.inverse_clip,
        samples: x_raw.nrows(),
        input_dim: spec.input_dim(),
        widths: spec.widths().to_vec(),
        pinv_calls: peeled.pinv_calls + solved.pinv_calls,
        clip_events: peeled.clip_events,
        inverted_entries,
        layer_residuals: solved.layer_residuals,
        wall_time: start.elapsed(),
    };
    Ok((solved.weights, report))
}
