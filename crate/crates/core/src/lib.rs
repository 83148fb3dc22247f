//! Gradient-free training of deep feedforward networks by solving each
//! layer's linear system with a pseudo-inverse.
//!
//! A network `Y = f_n([1, f_{n-1}(... [1, f_1(X W_1)] ...)] W_n)` is trained in a
//! single pass: random sans-bias weights for layers `2..n` are used to peel the
//! targets back to the first layer, and the weights are then solved layer by
//! layer with minimum-norm least squares. See [`trainer`] for the procedure.
//!
//! ```
//! use karspace::{data, network::NetworkSpec, trainer};
//!
//! let xor = data::gen_xor();
//! let spec = NetworkSpec::new(2, vec![4, 1]).unwrap();
//! let (weights, report) = trainer::train(&xor.x, &xor.y, &spec, &trainer::TrainConfig::with_seed(1)).unwrap();
//! assert_eq!(report.pinv_calls, 3);
//! assert_eq!(weights.depth(), 2);
//! ```

pub mod activation;
pub mod cli;
pub mod data;
pub mod eval;
pub mod linalg;
pub mod network;
pub mod trainer;

pub use activation::Activation;
pub use linalg::{Matrix, PinvConfig, PinvMode};
pub use network::{Model, NetworkSpec, WeightStack};
pub use trainer::{train, TrainConfig, TrainReport};
