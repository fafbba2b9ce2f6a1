use crate::error::Result;
use crate::math::rng::streams;
use crate::math::{SeededRng, Tensor};
use crate::nn::loss::{cross_entropy, one_hot};
use crate::nn::network::{Mode, NetworkState};
use crate::nn::spec::{Activation, LayerSpec, NetworkSpec};

/// How many parameters the check perturbs at most; a deterministic random
/// subset keeps large layers tractable without biasing toward any one layer.
const MAX_PROBES: usize = 256;

/// Compare analytic gradients against central finite differences on one
/// batch, returning the worst relative error over a seeded parameter subset:
/// `|analytic - numeric| / max(|analytic|, |numeric|, 1e-8)`.
///
/// Dropout layers are removed first (they do not change shapes), so the
/// check exercises the deterministic part of the architecture.
pub fn gradient_check(
    spec: &NetworkSpec,
    batch: &Tensor,
    labels: &[usize],
    step: f64,
    seed: u64,
) -> Result<f64> {
    let stripped = NetworkSpec::new(
        spec.input_shape.clone(),
        spec.layers
            .iter()
            .filter(|l| !matches!(l, LayerSpec::Dropout { .. }))
            .cloned()
            .collect(),
    );
    let mut state = NetworkState::init(&stripped, seed)?;
    let targets = one_hot(labels, state.class_count())?;
    let pass = state.forward(batch, Mode::Eval, None)?;
    let analytic = state.backward(&pass, &targets)?;

    let sizes: Vec<usize> = state.params().iter().map(|p| p.len()).collect();
    let total: usize = sizes.iter().sum();
    let mut order = SeededRng::new(seed, streams::CHECK).permutation(total);
    order.truncate(MAX_PROBES);

    let mut worst = 0.0f64;
    for flat in order {
        let (pi, j) = locate(&sizes, flat);
        let original = state.params()[pi].values()[j];
        state.params_mut()[pi].values_mut()[j] = original + step;
        let plus = loss_of(&state, batch, &targets)?;
        state.params_mut()[pi].values_mut()[j] = original - step;
        let minus = loss_of(&state, batch, &targets)?;
        state.params_mut()[pi].values_mut()[j] = original;
        let numeric = (plus - minus) / (2.0 * step);
        let a = analytic[pi].values()[j];
        let rel = (a - numeric).abs() / a.abs().max(numeric.abs()).max(1e-8);
        worst = worst.max(rel);
    }
    Ok(worst)
}

/// Tolerance for architectures whose parameter paths pass only through
/// linear maps and the softmax head: central differences resolve those to
/// near roundoff.
pub const LINEAR_TOLERANCE: f64 = 1e-6;
/// Tolerance for anything with nonlinear hidden activations.
pub const NONLINEAR_TOLERANCE: f64 = 1e-4;

/// One verification-suite row: what was checked, the worst relative error
/// observed, and the tolerance it must stay under.
#[derive(Debug, Clone)]
pub struct CheckOutcome {
    pub name: String,
    pub error: f64,
    pub tolerance: f64,
}

impl CheckOutcome {
    pub fn passes(&self) -> bool {
        self.error < self.tolerance
    }
}

/// Audit every layer kind through small primitive stacks, then every catalog
/// architecture, against central finite differences on a fixed 4-sample
/// batch. Convolutional image planes are shrunk (the layer sequence and
/// filter counts are untouched) so numeric differentiation stays affordable;
/// dropout is stripped by [`gradient_check`] itself.
pub fn verification_suite(seed: u64) -> Result<Vec<CheckOutcome>> {
    let act = |function| LayerSpec::Activation { function };
    let dense = |units| LayerSpec::Dense { units };
    let primitives: Vec<(&str, NetworkSpec, f64)> = vec![
        (
            "dense-linear",
            NetworkSpec::new(vec![6], vec![dense(3), act(Activation::Softmax)]),
            LINEAR_TOLERANCE,
        ),
        (
            "flatten-linear",
            NetworkSpec::new(
                vec![2, 3, 4],
                vec![LayerSpec::Flatten, dense(3), act(Activation::Softmax)],
            ),
            LINEAR_TOLERANCE,
        ),
        (
            "dense-sigmoid",
            NetworkSpec::new(
                vec![5],
                vec![
                    dense(7),
                    act(Activation::Sigmoid),
                    dense(3),
                    act(Activation::Softmax),
                ],
            ),
            NONLINEAR_TOLERANCE,
        ),
        (
            "dense-relu",
            NetworkSpec::new(
                vec![5],
                vec![
                    dense(7),
                    act(Activation::Relu),
                    dense(3),
                    act(Activation::Softmax),
                ],
            ),
            NONLINEAR_TOLERANCE,
        ),
        (
            "conv1d-pool",
            NetworkSpec::new(
                vec![3, 16],
                vec![
                    LayerSpec::Conv1d {
                        filters: 4,
                        width: 3,
                    },
                    act(Activation::Sigmoid),
                    LayerSpec::Maxpool1d,
                    LayerSpec::Flatten,
                    dense(3),
                    act(Activation::Softmax),
                ],
            ),
            NONLINEAR_TOLERANCE,
        ),
        (
            "conv2d-pool",
            NetworkSpec::new(
                vec![2, 10, 10],
                vec![
                    LayerSpec::Conv2d {
                        filters: 3,
                        kh: 3,
                        kw: 3,
                    },
                    act(Activation::Relu),
                    LayerSpec::Maxpool2d,
                    LayerSpec::Dropout { rate: 0.25 },
                    LayerSpec::Flatten,
                    dense(3),
                    act(Activation::Softmax),
                ],
            ),
            NONLINEAR_TOLERANCE,
        ),
    ];

    let mut outcomes = Vec::new();
    let mut salt = 0u64;
    let mut check =
        |name: String, spec: &NetworkSpec, tolerance: f64, out: &mut Vec<CheckOutcome>| {
            salt += 2;
            let batch = check_batch(spec.input_shape.clone(), seed + salt);
            let classes = spec_classes(spec);
            let labels: Vec<usize> = (0..4).map(|i| i % classes).collect();
            let error = gradient_check(spec, &batch, &labels, 1e-5, seed + salt + 1)?;
            out.push(CheckOutcome {
                name,
                error,
                tolerance,
            });
            Ok::<(), crate::error::Error>(())
        };

    for (name, spec, tolerance) in &primitives {
        check(name.to_string(), spec, *tolerance, &mut outcomes)?;
    }
    for entry in crate::zoo::catalog() {
        let described = entry.describe();
        if let crate::zoo::LearnerConfig::Network { spec, .. } = described.learner {
            let reduced = reduce_planes(&spec);
            check(
                format!("zoo:{}", described.name),
                &reduced,
                NONLINEAR_TOLERANCE,
                &mut outcomes,
            )?;
        }
    }
    Ok(outcomes)
}

/// Shrink 2-D input planes to 20x20 so finite differences over deep
/// convolution stacks stay cheap; vector and signal inputs are already small.
fn reduce_planes(spec: &NetworkSpec) -> NetworkSpec {
    let mut input = spec.input_shape.clone();
    if input.len() == 3 {
        input[1] = input[1].min(20);
        input[2] = input[2].min(20);
    }
    NetworkSpec::new(input, spec.layers.clone())
}

/// Units of the final dense layer: the class count the labels must cover.
fn spec_classes(spec: &NetworkSpec) -> usize {
    spec.layers
        .iter()
        .rev()
        .find_map(|l| match l {
            LayerSpec::Dense { units } => Some(*units),
            _ => None,
        })
        .unwrap_or(2)
}

fn check_batch(sample_shape: Vec<usize>, seed: u64) -> Tensor {
    let mut shape = vec![4];
    shape.extend_from_slice(&sample_shape);
    let n = shape.iter().product();
    let mut rng = SeededRng::new(seed, streams::DATA);
    Tensor::new(shape, (0..n).map(|_| rng.normal()).collect())
        .expect("batch shape is positive by construction")
}

fn locate(sizes: &[usize], mut flat: usize) -> (usize, usize) {
    for (pi, &len) in sizes.iter().enumerate() {
        if flat < len {
            return (pi, flat);
        }
        flat -= len;
    }
    unreachable!("flat parameter index within total");
}

fn loss_of(state: &NetworkState, batch: &Tensor, targets: &Tensor) -> Result<f64> {
    let pass = state.forward(batch, Mode::Eval, None)?;
    cross_entropy(pass.output(), targets)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::nn::spec::Activation;
    use proptest::prelude::*;

    fn softmax_layer() -> LayerSpec {
        LayerSpec::Activation {
            function: Activation::Softmax,
        }
    }

    fn act(function: Activation) -> LayerSpec {
        LayerSpec::Activation { function }
    }

    fn random_batch(shape: Vec<usize>, seed: u64) -> Tensor {
        let mut rng = SeededRng::new(seed, streams::DATA);
        let n = shape.iter().product();
        Tensor::new(shape, (0..n).map(|_| rng.normal()).collect()).unwrap()
    }

    #[test]
    fn verification_suite_covers_all_architectures_and_passes() {
        let outcomes = verification_suite(90).unwrap();
        // Six primitive stacks plus the eight network catalog entries.
        assert_eq!(outcomes.len(), 14);
        let zoo_rows = outcomes
            .iter()
            .filter(|o| o.name.starts_with("zoo:"))
            .count();
        assert_eq!(zoo_rows, 8);
        for o in &outcomes {
            assert!(
                o.passes(),
                "{} at {:.3e} exceeds {:.0e}",
                o.name,
                o.error,
                o.tolerance
            );
        }
    }

    #[test]
    fn linear_network_is_exact_to_within_roundoff() {
        let spec = NetworkSpec::new(
            vec![5],
            vec![LayerSpec::Dense { units: 3 }, softmax_layer()],
        );
        let batch = random_batch(vec![6, 5], 1);
        let err = gradient_check(&spec, &batch, &[0, 1, 2, 0, 1, 2], 1e-5, 2).unwrap();
        assert!(err < 1e-7, "relative error {err}");
    }

    #[test]
    fn relu_network_checks_away_from_kinks() {
        let spec = NetworkSpec::new(
            vec![4],
            vec![
                LayerSpec::Dense { units: 8 },
                act(Activation::Relu),
                LayerSpec::Dense { units: 3 },
                softmax_layer(),
            ],
        );
        let batch = random_batch(vec![5, 4], 3);
        // Guard the precondition: no relu input may sit within 1e-3 of its
        // kink, where the two-sided difference quotient is meaningless.
        let state = NetworkState::init(&spec, 4).unwrap();
        let pass = state.forward(&batch, Mode::Eval, None).unwrap();
        assert!(pass.activations()[1]
            .values()
            .iter()
            .all(|v| v.abs() > 1e-3));
        let err = gradient_check(&spec, &batch, &[0, 1, 2, 0, 1], 1e-5, 4).unwrap();
        assert!(err < 1e-5, "relative error {err}");
    }

    #[test]
    fn convolution_pooling_stack_checks_on_a_fixed_seed() {
        let spec = NetworkSpec::new(
            vec![2, 8, 8],
            vec![
                LayerSpec::Conv2d {
                    filters: 3,
                    kh: 3,
                    kw: 3,
                },
                act(Activation::Relu),
                LayerSpec::Maxpool2d,
                LayerSpec::Dropout { rate: 0.25 },
                LayerSpec::Flatten,
                LayerSpec::Dense { units: 4 },
                act(Activation::Sigmoid),
                LayerSpec::Dense { units: 3 },
                softmax_layer(),
            ],
        );
        let batch = random_batch(vec![4, 2, 8, 8], 7);
        let err = gradient_check(&spec, &batch, &[0, 1, 2, 1], 1e-5, 8).unwrap();
        assert!(err < 1e-4, "relative error {err}");
    }

    #[test]
    fn signal_convolution_stack_checks() {
        let spec = NetworkSpec::new(
            vec![3, 16],
            vec![
                LayerSpec::Conv1d {
                    filters: 4,
                    width: 3,
                },
                act(Activation::Sigmoid),
                LayerSpec::Maxpool1d,
                LayerSpec::Flatten,
                LayerSpec::Dense { units: 2 },
                softmax_layer(),
            ],
        );
        let batch = random_batch(vec![3, 3, 16], 11);
        let err = gradient_check(&spec, &batch, &[0, 1, 0], 1e-5, 12).unwrap();
        assert!(err < 1e-4, "relative error {err}");
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(10))]

        // Every layer kind, random small dimensions, smooth activations:
        // analytic gradients must match finite differences within 1e-4.
        #[test]
        fn random_image_stacks_pass_finite_difference_audit(
            c in 1usize..3,
            filters in 1usize..4,
            hw in 6usize..10,
            units in 2usize..6,
            pool in proptest::bool::ANY,
            seed in 0u64..1000,
        ) {
            let mut layers = vec![
                LayerSpec::Conv2d { filters, kh: 3, kw: 3 },
                act(Activation::Sigmoid),
            ];
            if pool {
                layers.push(LayerSpec::Maxpool2d);
            }
            layers.push(LayerSpec::Flatten);
            layers.push(LayerSpec::Dense { units });
            layers.push(act(Activation::Sigmoid));
            layers.push(LayerSpec::Dense { units: 2 });
            layers.push(softmax_layer());
            let spec = NetworkSpec::new(vec![c, hw, hw], layers);
            let batch = random_batch(vec![3, c, hw, hw], seed);
            let err = gradient_check(&spec, &batch, &[0, 1, 1], 1e-5, seed + 1).unwrap();
            prop_assert!(err < 1e-4, "relative error {}", err);
        }

        #[test]
        fn random_dense_stacks_pass_finite_difference_audit(
            d in 2usize..8,
            hidden in 2usize..10,
            classes in 2usize..5,
            seed in 0u64..1000,
        ) {
            let spec = NetworkSpec::new(vec![d], vec![
                LayerSpec::Dense { units: hidden },
                act(Activation::Sigmoid),
                LayerSpec::Dense { units: classes },
                softmax_layer(),
            ]);
            let batch = random_batch(vec![4, d], seed);
            let labels: Vec<usize> = (0..4).map(|i| i % classes).collect();
            let err = gradient_check(&spec, &batch, &labels, 1e-5, seed + 1).unwrap();
            prop_assert!(err < 1e-4, "relative error {}", err);
        }
    }
}
