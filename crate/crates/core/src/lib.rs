//! Two-stage one-against-all classification with class-score fusion.
//!
//! A first MLP is trained on raw feature vectors. Its output activations are then
//! appended to each feature vector and a second MLP is trained on the widened
//! input. The crate provides the networks and RPROP trainer ([`nn`]), the data
//! model and split protocol ([`dataset`]), the two-stage pipeline ([`fusion`]), a
//! synthetic corpus generator ([`synth`]) and evaluation with leave-one-person-out
//! reports ([`eval`]).

pub mod dataset;
pub mod error;
pub mod eval;
pub mod fusion;
pub mod nn;
pub mod synth;
pub mod textfmt;

pub use dataset::{Dataset, Sample, SplitPlan};
pub use error::{Error, Result};
pub use fusion::{FusionConfig, FusionModel};
pub use nn::{ActivationKind, Mlp, RpropConfig, TrainedModel};

/// SplitMix64 finalizer; used wherever a seed is derived from another seed.
pub fn mix_seed(base: u64, salt: u64) -> u64 {
    let mut z = base ^ salt.wrapping_add(1).wrapping_mul(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}
