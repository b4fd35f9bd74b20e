//! Three-layer perceptron, backpropagation and RPROP training.

mod activation;
mod backprop;
mod format;
mod mlp;
mod rprop;
mod train;

pub use activation::ActivationKind;
pub use backprop::{gradient, loss_and_gradient, mse, Batch};
pub use format::{load_mlp, mlp_from_str, mlp_to_string, save_mlp, MLP_HEADER};
pub use mlp::{argmax, Gradient, Mlp, Params};
pub use rprop::{RpropConfig, RpropState};
pub use train::{train, EpochRecord, TrainedModel};
