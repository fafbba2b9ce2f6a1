//! Terrain-interaction learning toolkit: deterministic numeric kernels,
//! signal and image feature extraction, small neural networks and kernel
//! machines, synthetic data generation, and evaluation protocols.

pub mod data;
pub mod error;
pub mod eval;
pub mod image;
pub mod math;
pub mod nn;
pub mod serialize;
pub mod signal;
pub mod svm;
pub mod zoo;

pub use error::{Error, Result};
