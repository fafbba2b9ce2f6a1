//! Non-linear support-vector machines: RBF kernel, a deterministic
//! sequential-minimal-optimization solver with a KKT audit, one-vs-one
//! multiclass voting, and train-split feature standardization.

mod multiclass;
mod smo;
mod standardize;

pub use multiclass::{one_vs_one_train, MulticlassSvm, PairwiseMachine};
pub use smo::{
    rbf_kernel, smo_solve, smo_train, svm_decision, svm_predict_binary, BinarySvmModel,
    DualSolution, KktReport,
};
pub use standardize::Standardizer;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Hyperparameters for one binary SVM.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SvmConfig {
    /// Box constraint on the dual variables.
    pub c: f64,
    /// RBF width; `exp(-gamma * ||x - z||^2)`.
    pub gamma: f64,
    /// KKT tolerance for both the solver's stopping rule and the audit.
    pub tol: f64,
    /// Hard cap on full optimization sweeps before giving up.
    pub max_passes: usize,
}

impl SvmConfig {
    /// Defaults for a given feature dimension: C=1, gamma=1/d, tol=1e-3,
    /// up to 200 sweeps.
    pub fn for_features(dims: usize) -> Self {
        SvmConfig {
            c: 1.0,
            gamma: 1.0 / dims.max(1) as f64,
            tol: 1e-3,
            max_passes: 200,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let ok = self.c > 0.0
            && self.c.is_finite()
            && self.gamma > 0.0
            && self.gamma.is_finite()
            && self.tol > 0.0
            && self.tol.is_finite()
            && self.max_passes >= 1;
        if ok {
            Ok(())
        } else {
            Err(Error::Parameter(format!("illegal svm config {self:?}")))
        }
    }
}
