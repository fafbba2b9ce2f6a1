//! Dataset ingestion (sensor CSV, PGM image corpora), synthetic stand-in
//! generators, and split planning for the evaluation protocol.

mod pgm;
mod sensor_csv;
mod split;
mod synth_slip;
mod synth_terrain;

pub use pgm::{load_image_dir, read_pgm, write_pgm};
pub use sensor_csv::{load_sensor_csv, write_sensor_csv, SensorLog};
pub use split::{holdout_split, SplitPlan, SplitRun};
pub use synth_slip::synth_slip;
pub use synth_terrain::{
    synth_terrain, TerrainClass, ALL_TERRAIN_CLASSES, DEFAULT_TERRAIN_CLASSES,
};

use crate::error::{Error, Result};
use crate::math::Tensor;

/// How a task's inputs are presented to a learner: the sensor/pixel values
/// themselves, or the hand-engineered representation (windowed statistics
/// for signals, gradient histograms for images).
#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum InputMode {
    Raw,
    Filtered,
}

impl InputMode {
    pub fn as_str(&self) -> &'static str {
        match self {
            InputMode::Raw => "raw",
            InputMode::Filtered => "filtered",
        }
    }

    pub fn parse(s: &str) -> Result<Self> {
        match s {
            "raw" => Ok(InputMode::Raw),
            "filtered" => Ok(InputMode::Filtered),
            other => Err(Error::Parameter(format!(
                "unknown input mode '{other}' (expected raw or filtered)"
            ))),
        }
    }
}

/// Feature matrix plus integer labels and the class-name table the labels
/// index into. Features are `[n, d]` for flat vectors or `[n, c, ...]` for
/// structured inputs (signal windows, images).
#[derive(Debug, Clone, PartialEq)]
pub struct LabeledDataset {
    features: Tensor,
    labels: Vec<usize>,
    class_names: Vec<String>,
}

impl LabeledDataset {
    pub fn new(features: Tensor, labels: Vec<usize>, class_names: Vec<String>) -> Result<Self> {
        if class_names.is_empty() {
            return Err(Error::Dataset("empty class-name table".into()));
        }
        let n = features.dim(0);
        if n == 0 || labels.is_empty() {
            return Err(Error::Dataset("dataset has no samples".into()));
        }
        if labels.len() != n {
            return Err(Error::Dataset(format!(
                "{} labels for {n} feature rows",
                labels.len()
            )));
        }
        if let Some(&bad) = labels.iter().find(|&&l| l >= class_names.len()) {
            return Err(Error::Label {
                label: bad,
                classes: class_names.len(),
            });
        }
        Ok(LabeledDataset {
            features,
            labels,
            class_names,
        })
    }

    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    pub fn features(&self) -> &Tensor {
        &self.features
    }

    pub fn labels(&self) -> &[usize] {
        &self.labels
    }

    pub fn class_names(&self) -> &[String] {
        &self.class_names
    }

    pub fn class_count(&self) -> usize {
        self.class_names.len()
    }

    /// Shape of a single sample (the feature shape with the batch axis
    /// removed).
    pub fn sample_shape(&self) -> &[usize] {
        &self.features.shape()[1..]
    }

    pub fn sample(&self, i: usize) -> &[f64] {
        self.features.index_axis0(i).0
    }

    /// New dataset holding the given rows, in order. Class table is kept
    /// whole so label indices stay valid even if a class is absent from the
    /// subset.
    pub fn subset(&self, indices: &[usize]) -> Result<Self> {
        if indices.is_empty() {
            return Err(Error::Dataset("empty subset".into()));
        }
        let sample_len: usize = self.sample_shape().iter().product();
        let mut values = Vec::with_capacity(indices.len() * sample_len);
        let mut labels = Vec::with_capacity(indices.len());
        for &i in indices {
            values.extend_from_slice(self.sample(i));
            labels.push(self.labels[i]);
        }
        let mut shape = vec![indices.len()];
        shape.extend_from_slice(self.sample_shape());
        LabeledDataset::new(Tensor::new(shape, values)?, labels, self.class_names.clone())
    }
}
