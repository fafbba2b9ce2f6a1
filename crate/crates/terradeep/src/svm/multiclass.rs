use crate::data::LabeledDataset;
use crate::error::{Error, Result};
use crate::math::Tensor;
use crate::svm::{smo_train, svm_decision, BinarySvmModel, SvmConfig};

/// One binary machine inside a one-vs-one ensemble, together with the pair
/// of class indices it separates. `first` is the positive side.
#[derive(Debug, Clone, PartialEq)]
pub struct PairwiseMachine {
    pub first: usize,
    pub second: usize,
    pub model: BinarySvmModel,
}

/// One-vs-one multiclass ensemble: k(k-1)/2 binary machines vote, ties
/// break on summed decision values, then on the lower class index.
#[derive(Debug, Clone, PartialEq)]
pub struct MulticlassSvm {
    machines: Vec<PairwiseMachine>,
    class_names: Vec<String>,
}

pub fn one_vs_one_train(data: &LabeledDataset, cfg: &SvmConfig) -> Result<MulticlassSvm> {
    let k = data.class_count();
    if k < 2 {
        return Err(Error::Dataset("multiclass svm needs at least 2 classes".into()));
    }
    if data.sample_shape().len() != 1 {
        return Err(Error::Shape(format!(
            "svm samples must be flat vectors, got shape {:?}",
            data.sample_shape()
        )));
    }
    let d = data.sample_shape()[0];
    let mut counts = vec![0usize; k];
    for &label in data.labels() {
        counts[label] += 1;
    }
    if let Some(missing) = counts.iter().position(|&c| c == 0) {
        return Err(Error::Dataset(format!(
            "class {:?} has no training samples",
            data.class_names()[missing]
        )));
    }

    let mut machines = Vec::with_capacity(k * (k - 1) / 2);
    for a in 0..k {
        for b in a + 1..k {
            // Rows keep their original dataset order so a k=2 ensemble
            // reproduces the plain binary machine bit for bit.
            let mut values = Vec::new();
            let mut labels = Vec::new();
            for (idx, &label) in data.labels().iter().enumerate() {
                if label == a || label == b {
                    values.extend_from_slice(data.sample(idx));
                    labels.push(if label == a { 1.0 } else { -1.0 });
                }
            }
            let features = Tensor::new(vec![labels.len(), d], values)?;
            let model = smo_train(&features, &labels, cfg)?;
            machines.push(PairwiseMachine {
                first: a,
                second: b,
                model,
            });
        }
    }
    Ok(MulticlassSvm {
        machines,
        class_names: data.class_names().to_vec(),
    })
}

impl MulticlassSvm {
    pub(crate) fn from_machines(
        machines: Vec<PairwiseMachine>,
        class_names: Vec<String>,
    ) -> Result<Self> {
        let k = class_names.len();
        if machines.len() != k * (k - 1) / 2 {
            return Err(Error::State(format!(
                "{} pairwise machines cannot cover {k} classes",
                machines.len()
            )));
        }
        for m in &machines {
            if m.first >= m.second || m.second >= k {
                return Err(Error::State(format!(
                    "pairwise machine for ({}, {}) is out of range for {k} classes",
                    m.first, m.second
                )));
            }
        }
        Ok(MulticlassSvm {
            machines,
            class_names,
        })
    }

    pub fn class_names(&self) -> &[String] {
        &self.class_names
    }

    pub fn machines(&self) -> &[PairwiseMachine] {
        &self.machines
    }

    pub fn converged(&self) -> bool {
        self.machines.iter().all(|m| m.model.converged())
    }

    pub fn predict_one(&self, x: &[f64]) -> Result<usize> {
        let k = self.class_names.len();
        let mut votes = vec![0usize; k];
        let mut scores = vec![0.0f64; k];
        for m in &self.machines {
            let f = svm_decision(&m.model, x)?;
            if f >= 0.0 {
                votes[m.first] += 1;
            } else {
                votes[m.second] += 1;
            }
            scores[m.first] += f;
            scores[m.second] -= f;
        }
        let mut winner = 0;
        for c in 1..k {
            if votes[c] > votes[winner]
                || (votes[c] == votes[winner] && scores[c] > scores[winner])
            {
                winner = c;
            }
        }
        Ok(winner)
    }

    /// Predict every row of an `[n, d]` matrix.
    pub fn predict(&self, inputs: &Tensor) -> Result<Vec<usize>> {
        if inputs.rank() != 2 {
            return Err(Error::Shape(format!(
                "svm prediction input must be [n, d], got {:?}",
                inputs.shape()
            )));
        }
        let d = inputs.dim(1);
        inputs
            .values()
            .chunks_exact(d)
            .map(|row| self.predict_one(row))
            .collect()
    }

    /// Scale every decision function by a positive factor; predictions are
    /// invariant to this, which the tests rely on.
    #[cfg(test)]
    #[cfg(test)]
    pub(crate) fn scaled(&self, factor: f64) -> Self {
        MulticlassSvm {
            machines: self
                .machines
                .iter()
                .map(|m| PairwiseMachine {
                    first: m.first,
                    second: m.second,
                    model: m.model.scaled(factor),
                })
                .collect(),
            class_names: self.class_names.clone(),
        }
    }
}
