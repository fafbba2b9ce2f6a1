use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Update rule applied after each mini-batch.
///
/// Adadelta keeps running averages of squared gradients and squared updates
/// per parameter and needs no tuned learning rate; plain SGD is the
/// comparison baseline.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum OptimizerSpec {
    Adadelta { rho: f64, epsilon: f64, lr: f64 },
    Sgd { eta: f64 },
}

impl OptimizerSpec {
    pub fn adadelta() -> Self {
        OptimizerSpec::Adadelta {
            rho: 0.95,
            epsilon: 1e-6,
            lr: 1.0,
        }
    }

    pub fn sgd(eta: f64) -> Self {
        OptimizerSpec::Sgd { eta }
    }

    pub fn validate(&self) -> Result<()> {
        let ok = match self {
            OptimizerSpec::Adadelta { rho, epsilon, lr } => {
                (0.0..1.0).contains(rho) && *epsilon > 0.0 && lr.is_finite() && *lr > 0.0
            }
            OptimizerSpec::Sgd { eta } => eta.is_finite() && *eta >= 0.0,
        };
        if ok {
            Ok(())
        } else {
            Err(Error::Parameter(format!("illegal optimizer {self:?}")))
        }
    }
}

impl Default for OptimizerSpec {
    fn default() -> Self {
        OptimizerSpec::adadelta()
    }
}

/// One adadelta element update. Returns the new weight and mutates the two
/// accumulators in place:
/// `E[g^2] <- rho E[g^2] + (1-rho) g^2`,
/// `d = -sqrt(E[d^2]+eps)/sqrt(E[g^2]+eps) * g`,
/// `E[d^2] <- rho E[d^2] + (1-rho) d^2`,
/// `w <- w + lr * d`.
#[inline]
pub(crate) fn adadelta_element(
    w: f64,
    g: f64,
    grad_sq: &mut f64,
    delta_sq: &mut f64,
    rho: f64,
    epsilon: f64,
    lr: f64,
) -> f64 {
    *grad_sq = rho * *grad_sq + (1.0 - rho) * g * g;
    let delta = -((*delta_sq + epsilon).sqrt() / (*grad_sq + epsilon).sqrt()) * g;
    *delta_sq = rho * *delta_sq + (1.0 - rho) * delta * delta;
    w + lr * delta
}
