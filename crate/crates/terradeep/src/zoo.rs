//! The learner catalog: every named configuration lives here as one pinned
//! table entry, built behind a common trait so callers select learners by
//! name at runtime and never match on concrete types.

use serde::Serialize;

use crate::data::{InputMode, LabeledDataset};
use crate::error::{Error, Result};
use crate::math::Tensor;
use crate::nn::{
    train, Activation, LayerSpec, NetworkSpec, OptimizerSpec, TrainConfig, TrainedModel,
};
use crate::svm::{one_vs_one_train, MulticlassSvm, Standardizer, SvmConfig};

/// Which sensing problem an entry addresses.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Task {
    Slip,
    Image,
}

impl Task {
    pub fn as_str(&self) -> &'static str {
        match self {
            Task::Slip => "slip",
            Task::Image => "image",
        }
    }
}

/// How a learner wants its samples laid out. The data-preparation layer
/// reads this to decide between per-frame vectors, channel-major signal
/// windows, and single-channel image planes.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum InputLayout {
    /// Rank-1 feature rows; images are flattened, telemetry is per-frame.
    Vector,
    /// Channel-major `[channels, length]` slices of the telemetry stream.
    SignalWindow { length: usize, stride: usize },
    /// `[1, h, w]` intensity planes.
    ImagePlane,
}

/// Telemetry window geometry for the 1-D convolutional entry.
pub const SLIP_WINDOW_LENGTH: usize = 64;
pub const SLIP_WINDOW_STRIDE: usize = 8;

/// Default batching shared by every network entry.
pub const DEFAULT_BATCH_SIZE: usize = 100;
pub const DEFAULT_EPOCHS: usize = 35;

/// One catalog row in exportable form: the pinned facts of a configuration.
#[derive(Debug, Clone, Serialize)]
pub struct ZooEntry {
    pub name: String,
    pub task: Task,
    pub input_mode: InputMode,
    pub learner: LearnerConfig,
}

#[derive(Debug, Clone, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum LearnerConfig {
    Network {
        spec: NetworkSpec,
        optimizer: OptimizerSpec,
        batch_size: usize,
        epochs: usize,
    },
    Svm {
        config: SvmConfig,
    },
}

/// Run-time knobs that override an entry's pinned training defaults.
#[derive(Debug, Clone, Copy, Default)]
pub struct TrainOverrides {
    pub epochs: Option<usize>,
    pub batch_size: Option<usize>,
    pub seed: u64,
}

/// A catalog configuration that can be fitted to a dataset. Entries adapt
/// their input shape and class count to the data they are given, so the same
/// named learner serves the pinned canonical geometry and any synthetic
/// stand-in.
pub trait Learner: Send + Sync {
    fn name(&self) -> &'static str;
    fn task(&self) -> Task;
    /// The presentation the entry is normally run with; a run-time flag may
    /// select the other one.
    fn default_mode(&self) -> InputMode;
    fn layout(&self) -> InputLayout;
    fn summary(&self) -> String;
    /// Exportable description of the pinned configuration.
    fn describe(&self) -> ZooEntry;
    fn fit(&self, data: &LabeledDataset, overrides: &TrainOverrides) -> Result<Box<dyn FittedModel>>;
}

/// A trained model behind a uniform prediction interface.
pub trait FittedModel {
    /// Predicted class index per input row.
    fn predict(&self, inputs: &Tensor) -> Result<Vec<usize>>;
    fn class_names(&self) -> &[String];
    /// Per-epoch training accuracy; empty for learners without epochs.
    fn epoch_curve(&self) -> &[f64];
    /// Serialize into the TDML container.
    fn tdml_bytes(&self) -> Result<Vec<u8>>;
}

impl FittedModel for TrainedModel {
    fn predict(&self, inputs: &Tensor) -> Result<Vec<usize>> {
        Ok(TrainedModel::predict(self, inputs)?.0)
    }

    fn class_names(&self) -> &[String] {
        TrainedModel::class_names(self)
    }

    fn epoch_curve(&self) -> &[f64] {
        TrainedModel::epoch_curve(self)
    }

    fn tdml_bytes(&self) -> Result<Vec<u8>> {
        crate::serialize::network_to_bytes(self)
    }
}

/// RBF ensemble plus the feature standardization fitted on its training
/// split; incoming rows are standardized with the stored statistics, so
/// evaluation data never influences them.
pub struct SvmFitted {
    pub(crate) standardizer: Standardizer,
    pub(crate) svm: MulticlassSvm,
}

impl SvmFitted {
    pub(crate) fn from_parts(standardizer: Standardizer, svm: MulticlassSvm) -> Self {
        SvmFitted { standardizer, svm }
    }

    pub fn converged(&self) -> bool {
        self.svm.converged()
    }

    pub fn machines(&self) -> &MulticlassSvm {
        &self.svm
    }

    pub fn standardizer(&self) -> &Standardizer {
        &self.standardizer
    }
}

impl FittedModel for SvmFitted {
    fn predict(&self, inputs: &Tensor) -> Result<Vec<usize>> {
        let transformed = self.standardizer.transform(inputs)?;
        self.svm.predict(&transformed)
    }

    fn class_names(&self) -> &[String] {
        self.svm.class_names()
    }

    fn epoch_curve(&self) -> &[f64] {
        &[]
    }

    fn tdml_bytes(&self) -> Result<Vec<u8>> {
        crate::serialize::svm_to_bytes(self)
    }
}

struct NetworkLearner {
    name: &'static str,
    task: Task,
    default_mode: InputMode,
    layout: InputLayout,
    canonical: NetworkSpec,
    optimizer: OptimizerSpec,
    summary: &'static str,
}

impl NetworkLearner {
    /// Rebuild the canonical stack for a concrete sample shape and class
    /// count: only the input shape and the classifier width change; every
    /// architectural fact stays pinned.
    fn adapt(&self, input_shape: Vec<usize>, classes: usize) -> NetworkSpec {
        let mut layers = self.canonical.layers.clone();
        let dense_at = layers.len() - 2;
        if let LayerSpec::Dense { units } = &mut layers[dense_at] {
            *units = classes;
        }
        NetworkSpec::new(input_shape, layers)
    }
}

impl Learner for NetworkLearner {
    fn name(&self) -> &'static str {
        self.name
    }

    fn task(&self) -> Task {
        self.task
    }

    fn default_mode(&self) -> InputMode {
        self.default_mode
    }

    fn layout(&self) -> InputLayout {
        self.layout
    }

    fn summary(&self) -> String {
        self.summary.to_string()
    }

    fn describe(&self) -> ZooEntry {
        ZooEntry {
            name: self.name.to_string(),
            task: self.task,
            input_mode: self.default_mode,
            learner: LearnerConfig::Network {
                spec: self.canonical.clone(),
                optimizer: self.optimizer,
                batch_size: DEFAULT_BATCH_SIZE,
                epochs: DEFAULT_EPOCHS,
            },
        }
    }

    fn fit(&self, data: &LabeledDataset, ov: &TrainOverrides) -> Result<Box<dyn FittedModel>> {
        let spec = self.adapt(data.sample_shape().to_vec(), data.class_count());
        let cfg = TrainConfig {
            batch_size: ov.batch_size.unwrap_or(DEFAULT_BATCH_SIZE),
            epochs: ov.epochs.unwrap_or(DEFAULT_EPOCHS),
            optimizer: self.optimizer,
            seed: ov.seed,
        };
        Ok(Box::new(train(&spec, data, &cfg)?))
    }
}

struct SvmLearner;

impl Learner for SvmLearner {
    fn name(&self) -> &'static str {
        "slip-svm"
    }

    fn task(&self) -> Task {
        Task::Slip
    }

    fn default_mode(&self) -> InputMode {
        InputMode::Filtered
    }

    fn layout(&self) -> InputLayout {
        InputLayout::Vector
    }

    fn summary(&self) -> String {
        "RBF SVM, one-vs-one voting over standardized 4-channel features".to_string()
    }

    fn describe(&self) -> ZooEntry {
        ZooEntry {
            name: "slip-svm".to_string(),
            task: Task::Slip,
            input_mode: InputMode::Filtered,
            learner: LearnerConfig::Svm {
                config: SvmConfig::for_features(4),
            },
        }
    }

    fn fit(&self, data: &LabeledDataset, _ov: &TrainOverrides) -> Result<Box<dyn FittedModel>> {
        if data.sample_shape().len() != 1 {
            return Err(Error::Shape(format!(
                "svm needs flat feature rows, got sample shape {:?}",
                data.sample_shape()
            )));
        }
        let standardizer = Standardizer::fit(data.features())?;
        let standardized = LabeledDataset::new(
            standardizer.transform(data.features())?,
            data.labels().to_vec(),
            data.class_names().to_vec(),
        )?;
        let cfg = SvmConfig::for_features(data.sample_shape()[0]);
        let svm = one_vs_one_train(&standardized, &cfg)?;
        Ok(Box::new(SvmFitted { standardizer, svm }))
    }
}

fn relu() -> LayerSpec {
    LayerSpec::Activation {
        function: Activation::Relu,
    }
}

fn sigmoid() -> LayerSpec {
    LayerSpec::Activation {
        function: Activation::Sigmoid,
    }
}

fn softmax() -> LayerSpec {
    LayerSpec::Activation {
        function: Activation::Softmax,
    }
}

fn dense(units: usize) -> LayerSpec {
    LayerSpec::Dense { units }
}

fn conv1d(filters: usize) -> LayerSpec {
    LayerSpec::Conv1d { filters, width: 3 }
}

fn conv2d(filters: usize) -> LayerSpec {
    LayerSpec::Conv2d {
        filters,
        kh: 3,
        kw: 3,
    }
}

/// Sigmoid-hidden dense stacks shared by the perceptron and deep-net rows.
fn dense_stack(hidden: &[usize], classes: usize) -> Vec<LayerSpec> {
    let mut layers = Vec::new();
    for &units in hidden {
        layers.push(dense(units));
        layers.push(sigmoid());
    }
    layers.push(dense(classes));
    layers.push(softmax());
    layers
}

fn network(
    name: &'static str,
    task: Task,
    default_mode: InputMode,
    layout: InputLayout,
    canonical: NetworkSpec,
    optimizer: OptimizerSpec,
    summary: &'static str,
) -> Box<dyn Learner> {
    Box::new(NetworkLearner {
        name,
        task,
        default_mode,
        layout,
        canonical,
        optimizer,
        summary,
    })
}

/// Every named configuration, in catalog order.
pub fn catalog() -> Vec<Box<dyn Learner>> {
    let slip_cnn_layers = vec![
        conv1d(128),
        relu(),
        conv1d(64),
        relu(),
        conv1d(32),
        relu(),
        LayerSpec::Maxpool1d,
        LayerSpec::Dropout { rate: 0.1 },
        LayerSpec::Flatten,
        dense(100),
        relu(),
        dense(3),
        softmax(),
    ];
    let image_cnn1_layers = vec![
        conv2d(32),
        relu(),
        conv2d(32),
        relu(),
        conv2d(64),
        relu(),
        conv2d(64),
        relu(),
        LayerSpec::Maxpool2d,
        LayerSpec::Dropout { rate: 0.25 },
        LayerSpec::Flatten,
        dense(100),
        relu(),
        dense(11),
        softmax(),
    ];
    let image_cnn2_layers = vec![
        conv2d(32),
        relu(),
        conv2d(32),
        relu(),
        LayerSpec::Maxpool2d,
        conv2d(64),
        relu(),
        conv2d(64),
        relu(),
        LayerSpec::Maxpool2d,
        LayerSpec::Dropout { rate: 0.35 },
        LayerSpec::Flatten,
        dense(100),
        relu(),
        dense(11),
        softmax(),
    ];

    vec![
        Box::new(SvmLearner),
        network(
            "slip-mlp",
            Task::Slip,
            InputMode::Filtered,
            InputLayout::Vector,
            NetworkSpec::new(vec![4], dense_stack(&[30], 3)),
            OptimizerSpec::sgd(0.01),
            "perceptron, one hidden layer of 30, sgd eta 0.01",
        ),
        network(
            "slip-dnn",
            Task::Slip,
            InputMode::Filtered,
            InputLayout::Vector,
            NetworkSpec::new(vec![4], dense_stack(&[100], 3)),
            OptimizerSpec::adadelta(),
            "dense 100 (sigmoid) classifier, adadelta",
        ),
        network(
            "slip-cnn",
            Task::Slip,
            InputMode::Raw,
            InputLayout::SignalWindow {
                length: SLIP_WINDOW_LENGTH,
                stride: SLIP_WINDOW_STRIDE,
            },
            NetworkSpec::new(vec![4, SLIP_WINDOW_LENGTH], slip_cnn_layers),
            OptimizerSpec::adadelta(),
            "1-D convnet, filters 128/64/32 (width 3), dropout 0.1",
        ),
        network(
            "image-dnn",
            Task::Image,
            InputMode::Raw,
            InputLayout::Vector,
            NetworkSpec::new(vec![16384], dense_stack(&[100], 11)),
            OptimizerSpec::adadelta(),
            "dense 100 (sigmoid) classifier on flattened pixels, adadelta",
        ),
        network(
            "image-mlp1",
            Task::Image,
            InputMode::Filtered,
            InputLayout::Vector,
            NetworkSpec::new(vec![16384], dense_stack(&[30], 11)),
            OptimizerSpec::sgd(0.01),
            "perceptron, one hidden layer of 30, sgd eta 0.01",
        ),
        network(
            "image-mlp2",
            Task::Image,
            InputMode::Filtered,
            InputLayout::Vector,
            NetworkSpec::new(vec![16384], dense_stack(&[15, 15], 11)),
            OptimizerSpec::sgd(0.01),
            "perceptron, two hidden layers of 15, sgd eta 0.01",
        ),
        network(
            "image-cnn1",
            Task::Image,
            InputMode::Raw,
            InputLayout::ImagePlane,
            NetworkSpec::new(vec![1, 128, 128], image_cnn1_layers),
            OptimizerSpec::adadelta(),
            "2-D convnet, filters 32/32/64/64 (3x3) then one pool, dropout 0.25",
        ),
        network(
            "image-cnn2",
            Task::Image,
            InputMode::Raw,
            InputLayout::ImagePlane,
            NetworkSpec::new(vec![1, 128, 128], image_cnn2_layers),
            OptimizerSpec::adadelta(),
            "2-D convnet, filters 32/32/64/64 (3x3), pool after each bank, dropout 0.35",
        ),
    ]
}

/// Look a configuration up by name; unknown names list the valid ones.
pub fn build(name: &str) -> Result<Box<dyn Learner>> {
    catalog()
        .into_iter()
        .find(|l| l.name() == name)
        .ok_or_else(|| Error::Catalog {
            name: name.to_string(),
            valid: catalog()
                .iter()
                .map(|l| l.name())
                .collect::<Vec<_>>()
                .join(", "),
        })
}

/// Names and one-line summaries, in catalog order.
pub fn list_catalog() -> Vec<(String, String)> {
    catalog()
        .iter()
        .map(|l| (l.name().to_string(), l.summary()))
        .collect()
}

/// Full catalog as a JSON map (name -> pinned configuration) for audit.
pub fn catalog_json() -> Result<serde_json::Value> {
    let mut map = serde_json::Map::new();
    for learner in catalog() {
        map.insert(
            learner.name().to_string(),
            serde_json::to_value(learner.describe())?,
        );
    }
    Ok(serde_json::Value::Object(map))
}
