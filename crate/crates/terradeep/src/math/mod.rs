//! Numeric primitives: tensors, deterministic RNG, dense linear algebra,
//! convolution/pooling kernels, and activation functions.

pub mod activations;
pub mod conv;
pub mod linalg;
pub mod pool;
pub mod rng;
pub mod tensor;

pub use activations::{relu, sigmoid, softmax};
pub use conv::{conv1d, conv2d};
pub use linalg::{dot, matmul, squared_distance};
pub use pool::{maxpool1d, maxpool2d};
pub use rng::SeededRng;
pub use tensor::{identity, Tensor};
