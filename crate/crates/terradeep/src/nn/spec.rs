use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Elementwise or row-wise nonlinearity used by [`LayerSpec::Activation`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Activation {
    Relu,
    Sigmoid,
    Softmax,
}

/// One layer of a feed-forward network.
///
/// Convolutions are valid-mode with unit stride; pooling is 2 (or 2x2) with
/// stride 2; dropout uses inverted scaling at train time.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum LayerSpec {
    Dense { units: usize },
    Conv1d { filters: usize, width: usize },
    Conv2d { filters: usize, kh: usize, kw: usize },
    Maxpool1d,
    Maxpool2d,
    Dropout { rate: f64 },
    Flatten,
    Activation { function: Activation },
}

/// A full network: the per-sample input shape plus an ordered layer stack.
///
/// A spec is only usable once [`NetworkSpec::validate`] has confirmed the
/// shapes chain legally and the stack ends in a softmax row.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NetworkSpec {
    pub input_shape: Vec<usize>,
    pub layers: Vec<LayerSpec>,
}

impl NetworkSpec {
    pub fn new(input_shape: Vec<usize>, layers: Vec<LayerSpec>) -> Self {
        NetworkSpec {
            input_shape,
            layers,
        }
    }

    /// Walk the shape chain from the input through every layer, returning
    /// each layer's output shape. Fails if any layer is illegal for its
    /// input, if a hyperparameter is out of range, or if the stack does not
    /// end with a softmax over a rank-1 row.
    pub fn validate(&self) -> Result<Vec<Vec<usize>>> {
        if self.input_shape.is_empty() || self.input_shape.contains(&0) {
            return Err(Error::Shape(format!(
                "illegal network input shape {:?}",
                self.input_shape
            )));
        }
        let mut shape = self.input_shape.clone();
        let mut chain = Vec::with_capacity(self.layers.len());
        for (i, layer) in self.layers.iter().enumerate() {
            let last = i + 1 == self.layers.len();
            match layer {
                LayerSpec::Dense { units } => {
                    if *units == 0 {
                        return Err(Error::Parameter(format!("dense layer {i} has 0 units")));
                    }
                    if shape.len() != 1 {
                        return Err(Error::Shape(format!(
                            "dense layer {i} needs a flat input, got {shape:?}"
                        )));
                    }
                    shape = vec![*units];
                }
                LayerSpec::Conv1d { filters, width } => {
                    if *filters == 0 || *width == 0 {
                        return Err(Error::Parameter(format!(
                            "conv1d layer {i} needs filters >= 1 and width >= 1"
                        )));
                    }
                    if shape.len() != 2 {
                        return Err(Error::Shape(format!(
                            "conv1d layer {i} needs [channels, length] input, got {shape:?}"
                        )));
                    }
                    if *width > shape[1] {
                        return Err(Error::Shape(format!(
                            "conv1d layer {i} width {width} exceeds signal length {}",
                            shape[1]
                        )));
                    }
                    shape = vec![*filters, shape[1] - width + 1];
                }
                LayerSpec::Conv2d { filters, kh, kw } => {
                    if *filters == 0 || *kh == 0 || *kw == 0 {
                        return Err(Error::Parameter(format!(
                            "conv2d layer {i} needs filters and kernel dims >= 1"
                        )));
                    }
                    if shape.len() != 3 {
                        return Err(Error::Shape(format!(
                            "conv2d layer {i} needs [channels, height, width] input, got {shape:?}"
                        )));
                    }
                    if *kh > shape[1] || *kw > shape[2] {
                        return Err(Error::Shape(format!(
                            "conv2d layer {i} kernel {kh}x{kw} exceeds image {}x{}",
                            shape[1], shape[2]
                        )));
                    }
                    shape = vec![*filters, shape[1] - kh + 1, shape[2] - kw + 1];
                }
                LayerSpec::Maxpool1d => {
                    if shape.len() != 2 || shape[1] < 2 {
                        return Err(Error::Shape(format!(
                            "maxpool1d layer {i} needs [channels, length >= 2], got {shape:?}"
                        )));
                    }
                    shape = vec![shape[0], shape[1] / 2];
                }
                LayerSpec::Maxpool2d => {
                    if shape.len() != 3 || shape[1] < 2 || shape[2] < 2 {
                        return Err(Error::Shape(format!(
                            "maxpool2d layer {i} needs [channels, h >= 2, w >= 2], got {shape:?}"
                        )));
                    }
                    shape = vec![shape[0], shape[1] / 2, shape[2] / 2];
                }
                LayerSpec::Dropout { rate } => {
                    if !rate.is_finite() || !(0.0..1.0).contains(rate) {
                        return Err(Error::Parameter(format!(
                            "dropout layer {i} rate {rate} outside [0, 1)"
                        )));
                    }
                }
                LayerSpec::Flatten => {
                    shape = vec![shape.iter().product()];
                }
                LayerSpec::Activation { function } => {
                    if *function == Activation::Softmax {
                        if !last {
                            return Err(Error::Parameter(format!(
                                "softmax at layer {i} must be the final layer"
                            )));
                        }
                        if shape.len() != 1 {
                            return Err(Error::Shape(format!(
                                "softmax output must be a flat row, got {shape:?}"
                            )));
                        }
                    }
                }
            }
            chain.push(shape.clone());
        }
        match self.layers.last() {
            Some(LayerSpec::Activation {
                function: Activation::Softmax,
            }) => Ok(chain),
            _ => Err(Error::Parameter(
                "network must end with a softmax activation".into(),
            )),
        }
    }

    /// Number of output classes; only meaningful for a validated spec.
    pub fn class_count(&self) -> Result<usize> {
        let chain = self.validate()?;
        Ok(chain.last().expect("validated spec has layers")[0])
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn softmax() -> LayerSpec {
        LayerSpec::Activation {
            function: Activation::Softmax,
        }
    }

    #[test]
    fn shape_chain_through_conv_stack() {
        let spec = NetworkSpec::new(
            vec![1, 28, 28],
            vec![
                LayerSpec::Conv2d {
                    filters: 4,
                    kh: 3,
                    kw: 3,
                },
                LayerSpec::Activation {
                    function: Activation::Relu,
                },
                LayerSpec::Maxpool2d,
                LayerSpec::Dropout { rate: 0.25 },
                LayerSpec::Flatten,
                LayerSpec::Dense { units: 10 },
                softmax(),
            ],
        );
        let chain = spec.validate().unwrap();
        assert_eq!(chain[0], vec![4, 26, 26]);
        assert_eq!(chain[2], vec![4, 13, 13]);
        assert_eq!(chain[4], vec![4 * 13 * 13]);
        assert_eq!(chain[6], vec![10]);
        assert_eq!(spec.class_count().unwrap(), 10);
    }

    #[test]
    fn dense_demands_flat_input() {
        let spec = NetworkSpec::new(vec![1, 8, 8], vec![LayerSpec::Dense { units: 3 }, softmax()]);
        assert!(matches!(spec.validate(), Err(Error::Shape(_))));
    }

    #[test]
    fn softmax_must_terminate_the_stack() {
        let no_tail = NetworkSpec::new(vec![4], vec![LayerSpec::Dense { units: 3 }]);
        assert!(no_tail.validate().is_err());
        let mid = NetworkSpec::new(
            vec![4],
            vec![softmax(), LayerSpec::Dense { units: 3 }, softmax()],
        );
        assert!(mid.validate().is_err());
    }

    #[test]
    fn hyperparameters_are_range_checked() {
        let zero_units = NetworkSpec::new(vec![4], vec![LayerSpec::Dense { units: 0 }, softmax()]);
        assert!(matches!(zero_units.validate(), Err(Error::Parameter(_))));
        let full_drop = NetworkSpec::new(
            vec![4],
            vec![
                LayerSpec::Dropout { rate: 1.0 },
                LayerSpec::Dense { units: 2 },
                softmax(),
            ],
        );
        assert!(matches!(full_drop.validate(), Err(Error::Parameter(_))));
    }

    #[test]
    fn oversized_kernel_rejected() {
        let spec = NetworkSpec::new(
            vec![2, 4],
            vec![
                LayerSpec::Conv1d {
                    filters: 1,
                    width: 5,
                },
                LayerSpec::Flatten,
                softmax(),
            ],
        );
        assert!(spec.validate().is_err());
    }

    #[test]
    fn json_round_trip_covers_every_layer_kind() {
        let spec = NetworkSpec::new(
            vec![1, 16, 16],
            vec![
                LayerSpec::Conv2d {
                    filters: 2,
                    kh: 3,
                    kw: 3,
                },
                LayerSpec::Activation {
                    function: Activation::Relu,
                },
                LayerSpec::Maxpool2d,
                LayerSpec::Dropout { rate: 0.1 },
                LayerSpec::Flatten,
                LayerSpec::Dense { units: 5 },
                LayerSpec::Activation {
                    function: Activation::Sigmoid,
                },
                LayerSpec::Dense { units: 3 },
                softmax(),
            ],
        );
        let json = serde_json::to_string(&spec).unwrap();
        assert!(json.contains("\"kind\":\"conv2d\""));
        let back: NetworkSpec = serde_json::from_str(&json).unwrap();
        assert_eq!(back, spec);
    }

    #[test]
    fn conv1d_chain_for_signal_windows() {
        let spec = NetworkSpec::new(
            vec![4, 64],
            vec![
                LayerSpec::Conv1d {
                    filters: 16,
                    width: 3,
                },
                LayerSpec::Maxpool1d,
                LayerSpec::Flatten,
                LayerSpec::Dense { units: 3 },
                softmax(),
            ],
        );
        let chain = spec.validate().unwrap();
        assert_eq!(chain[0], vec![16, 62]);
        assert_eq!(chain[1], vec![16, 31]);
        assert_eq!(chain[2], vec![496]);
    }
}
