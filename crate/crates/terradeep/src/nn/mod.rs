//! Declarative feed-forward networks: layer specs, batched forward/backward
//! passes, cross-entropy, adadelta/sgd, the training loop, and a
//! finite-difference gradient audit.

mod gradcheck;
mod loss;
mod network;
mod optim;
mod spec;
mod train;

pub use gradcheck::{
    gradient_check, verification_suite, CheckOutcome, LINEAR_TOLERANCE, NONLINEAR_TOLERANCE,
};
pub use loss::{cross_entropy, one_hot};
pub use network::{ForwardPass, Mode, NetworkState};
pub use optim::OptimizerSpec;
pub use spec::{Activation, LayerSpec, NetworkSpec};
pub use train::{train, TrainConfig, TrainedModel};
