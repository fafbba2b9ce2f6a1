//! Experiment protocol: metrics, repeated-holdout evaluation, input
//! preparation for each learner layout, and report formats.

use serde::Serialize;

use crate::data::{holdout_split, InputMode, LabeledDataset, SplitPlan};
use crate::error::{Error, Result};
use crate::image::{hog_dataset, HogConfig};
use crate::signal::{assemble_slip_dataset, assemble_slip_windows, SensorFrame};
use crate::zoo::{InputLayout, Learner, TrainOverrides};

/// Fraction of predictions that match the reference labels.
pub fn accuracy(predicted: &[usize], actual: &[usize]) -> Result<f64> {
    if predicted.len() != actual.len() {
        return Err(Error::Shape(format!(
            "{} predictions against {} labels",
            predicted.len(),
            actual.len()
        )));
    }
    if predicted.is_empty() {
        return Err(Error::Dataset("no samples to score".into()));
    }
    let matches = predicted
        .iter()
        .zip(actual)
        .filter(|(p, a)| p == a)
        .count();
    Ok(matches as f64 / predicted.len() as f64)
}

/// Confusion matrix with one row per actual class and one column per
/// predicted class, so `m[a][p]` counts samples of class `a` predicted as
/// `p`. Any label outside `0..classes` is rejected.
pub fn confusion(
    predicted: &[usize],
    actual: &[usize],
    classes: usize,
) -> Result<Vec<Vec<usize>>> {
    if predicted.len() != actual.len() {
        return Err(Error::Shape(format!(
            "{} predictions against {} labels",
            predicted.len(),
            actual.len()
        )));
    }
    let mut m = vec![vec![0usize; classes]; classes];
    for (&p, &a) in predicted.iter().zip(actual) {
        for label in [p, a] {
            if label >= classes {
                return Err(Error::Label { label, classes });
            }
        }
        m[a][p] += 1;
    }
    Ok(m)
}

/// First epoch index `e` where every accuracy in `curve[e..e + window)`
/// stays within `band` of the others (max minus min), or `None` if the
/// curve never settles. Comparison is plain: no epsilon is added to `band`.
pub fn epoch_stability(curve: &[f64], window: usize, band: f64) -> Result<Option<usize>> {
    if window == 0 {
        return Err(Error::Parameter("stability window must be >= 1".into()));
    }
    // Also rejects NaN, which satisfies neither comparison.
    if band < 0.0 || !band.is_finite() {
        return Err(Error::Parameter(format!(
            "stability band {band} must be finite and >= 0"
        )));
    }
    if curve.len() < window {
        return Err(Error::Parameter(format!(
            "curve of {} epochs cannot hold a window of {window}",
            curve.len()
        )));
    }
    for e in 0..=curve.len() - window {
        let slice = &curve[e..e + window];
        let max = slice.iter().fold(f64::NEG_INFINITY, |m, &x| m.max(x));
        let min = slice.iter().fold(f64::INFINITY, |m, &x| m.min(x));
        if max - min <= band {
            return Ok(Some(e));
        }
    }
    Ok(None)
}

/// One train/test split: its geometry, the trained model's test metrics,
/// and (for network learners) the per-epoch training accuracy curve.
#[derive(Debug, Clone, Serialize)]
pub struct RunRecord {
    pub ratio: f64,
    pub seed: u64,
    pub train_count: usize,
    pub test_count: usize,
    pub accuracy: f64,
    pub confusion: Vec<Vec<usize>>,
    pub epoch_curve: Vec<f64>,
}

/// Mean test accuracy across the runs sharing one train ratio.
#[derive(Debug, Clone, Serialize)]
pub struct RatioMean {
    pub ratio: f64,
    pub accuracy_mean: f64,
}

/// Full result of a repeated-holdout experiment.
///
/// `wall_time_seconds` is always written as `0.0` so that rerunning the same
/// experiment produces byte-identical artifacts; real timings are a console
/// concern, not part of the result.
#[derive(Debug, Clone, Serialize)]
pub struct EvalReport {
    pub learner: String,
    pub task: String,
    pub input_mode: InputMode,
    pub class_names: Vec<String>,
    pub runs: Vec<RunRecord>,
    pub accuracy_mean: f64,
    pub accuracy_std: f64,
    pub per_ratio_means: Vec<RatioMean>,
    pub wall_time_seconds: f64,
    pub config: serde_json::Value,
}

impl EvalReport {
    pub fn to_json_pretty(&self) -> Result<String> {
        let mut s = serde_json::to_string_pretty(self)?;
        s.push('\n');
        Ok(s)
    }

    /// One CSV row per run: geometry and headline accuracy.
    pub fn runs_csv(&self) -> String {
        let mut out = String::from("run,ratio,seed,train_count,test_count,accuracy\n");
        for (i, r) in self.runs.iter().enumerate() {
            out.push_str(&format!(
                "{},{},{},{},{},{}\n",
                i + 1,
                r.ratio,
                r.seed,
                r.train_count,
                r.test_count,
                r.accuracy
            ));
        }
        out
    }

    /// Confusion matrix of one run as CSV, rows = actual class, columns =
    /// predicted class, both labeled with class names.
    pub fn confusion_csv(&self, run: usize) -> Result<String> {
        let record = self.run(run)?;
        let mut out = String::from("actual");
        for name in &self.class_names {
            out.push(',');
            out.push_str(name);
        }
        out.push('\n');
        for (name, row) in self.class_names.iter().zip(&record.confusion) {
            out.push_str(name);
            for &count in row {
                out.push_str(&format!(",{count}"));
            }
            out.push('\n');
        }
        Ok(out)
    }

    /// Epoch curve of one run as CSV (`epoch,accuracy`, epochs 1-based).
    pub fn curve_csv(&self, run: usize) -> Result<String> {
        let record = self.run(run)?;
        let mut out = String::from("epoch,accuracy\n");
        for (e, acc) in record.epoch_curve.iter().enumerate() {
            out.push_str(&format!("{},{}\n", e + 1, acc));
        }
        Ok(out)
    }

    fn run(&self, run: usize) -> Result<&RunRecord> {
        self.runs.get(run).ok_or_else(|| {
            Error::Parameter(format!(
                "run {run} out of range for {} runs",
                self.runs.len()
            ))
        })
    }
}

/// Prefix an error with the 1-based run number without changing its class,
/// so exit codes still reflect the underlying failure.
fn annotate_run(run: usize, err: Error) -> Error {
    err.with_context(&format!("run {run}: "))
}

/// Run the full split plan against one learner: split, fit on the training
/// side, score the held-out side, and aggregate. Each run's fit is seeded by
/// that run's split seed, so the whole report is a pure function of
/// `(learner, data, plan, overrides)`.
pub fn run_experiment(
    learner: &dyn Learner,
    mode: InputMode,
    data: &LabeledDataset,
    plan: &SplitPlan,
    overrides: &TrainOverrides,
) -> Result<EvalReport> {
    let mut runs = Vec::with_capacity(plan.len());
    for (i, run) in plan.runs.iter().enumerate() {
        let at = |e| annotate_run(i + 1, e);
        let (train_idx, test_idx) =
            holdout_split(data.len(), run.ratio, run.seed).map_err(at)?;
        let train = data.subset(&train_idx).map_err(at)?;
        let test = data.subset(&test_idx).map_err(at)?;
        let fit = TrainOverrides {
            epochs: overrides.epochs,
            batch_size: overrides.batch_size,
            seed: run.seed,
        };
        let model = learner.fit(&train, &fit).map_err(at)?;
        let predicted = model.predict(test.features()).map_err(at)?;
        let acc = accuracy(&predicted, test.labels()).map_err(at)?;
        let conf = confusion(&predicted, test.labels(), data.class_count()).map_err(at)?;
        runs.push(RunRecord {
            ratio: run.ratio,
            seed: run.seed,
            train_count: train.len(),
            test_count: test.len(),
            accuracy: acc,
            confusion: conf,
            epoch_curve: model.epoch_curve().to_vec(),
        });
    }

    let accs: Vec<f64> = runs.iter().map(|r| r.accuracy).collect();
    let mean = accs.iter().sum::<f64>() / accs.len() as f64;
    let variance = accs.iter().map(|a| (a - mean).powi(2)).sum::<f64>() / accs.len() as f64;

    // Group by ratio in order of first appearance; ratios come straight from
    // the plan, so bit-equality is the right grouping key.
    let mut groups: Vec<(u64, f64, usize)> = Vec::new();
    for r in &runs {
        let bits = r.ratio.to_bits();
        match groups.iter_mut().find(|(b, _, _)| *b == bits) {
            Some((_, sum, count)) => {
                *sum += r.accuracy;
                *count += 1;
            }
            None => groups.push((bits, r.accuracy, 1)),
        }
    }
    let per_ratio_means = groups
        .into_iter()
        .map(|(bits, sum, count)| RatioMean {
            ratio: f64::from_bits(bits),
            accuracy_mean: sum / count as f64,
        })
        .collect();

    Ok(EvalReport {
        learner: learner.name().to_string(),
        task: learner.task().as_str().to_string(),
        input_mode: mode,
        class_names: data.class_names().to_vec(),
        runs,
        accuracy_mean: mean,
        accuracy_std: variance.sqrt(),
        per_ratio_means,
        wall_time_seconds: 0.0,
        config: serde_json::json!({
            "plan": plan,
            "epochs": overrides.epochs,
            "batch_size": overrides.batch_size,
        }),
    })
}

/// Report for scoring an already-trained model on one dataset: a single
/// "run" whose test side is the whole dataset and whose split geometry is
/// zeroed out.
pub fn scoring_report(
    learner: &str,
    task: &str,
    mode: InputMode,
    data: &LabeledDataset,
    model: &dyn crate::zoo::FittedModel,
) -> Result<EvalReport> {
    let predicted = model.predict(data.features())?;
    let acc = accuracy(&predicted, data.labels())?;
    let conf = confusion(&predicted, data.labels(), data.class_count())?;
    Ok(EvalReport {
        learner: learner.to_string(),
        task: task.to_string(),
        input_mode: mode,
        class_names: data.class_names().to_vec(),
        runs: vec![RunRecord {
            ratio: 0.0,
            seed: 0,
            train_count: 0,
            test_count: data.len(),
            accuracy: acc,
            confusion: conf,
            epoch_curve: model.epoch_curve().to_vec(),
        }],
        accuracy_mean: acc,
        accuracy_std: 0.0,
        per_ratio_means: vec![RatioMean {
            ratio: 0.0,
            accuracy_mean: acc,
        }],
        wall_time_seconds: 0.0,
        config: serde_json::Value::Null,
    })
}

/// Turn a telemetry log into the dataset a slip learner consumes: per-frame
/// feature vectors, or channel-major signal windows for the convolutional
/// learner.
pub fn prepare_slip_input(
    frames: &[SensorFrame],
    layout: &InputLayout,
    mode: InputMode,
    n_w: usize,
) -> Result<LabeledDataset> {
    match layout {
        InputLayout::Vector => assemble_slip_dataset(frames, mode, n_w),
        InputLayout::SignalWindow { length, stride } => {
            assemble_slip_windows(frames, mode, n_w, *length, *stride)
        }
        InputLayout::ImagePlane => Err(Error::Parameter(
            "image-plane learners do not consume telemetry".into(),
        )),
    }
}

/// Turn an image dataset (`[n, 1, h, w]`) into what an image learner
/// consumes: flattened pixel vectors, gradient-histogram descriptors, or the
/// planes themselves.
pub fn prepare_image_input(
    images: &LabeledDataset,
    layout: &InputLayout,
    mode: InputMode,
    hog: &HogConfig,
) -> Result<LabeledDataset> {
    match (layout, mode) {
        (InputLayout::Vector, InputMode::Raw) => flatten_samples(images),
        (InputLayout::Vector, InputMode::Filtered) => hog_dataset(images, hog),
        (InputLayout::ImagePlane, InputMode::Raw) => Ok(images.clone()),
        (InputLayout::ImagePlane, InputMode::Filtered) => Err(Error::Parameter(
            "descriptor features are vectors; plane learners take raw images".into(),
        )),
        (InputLayout::SignalWindow { .. }, _) => Err(Error::Parameter(
            "signal-window learners do not consume images".into(),
        )),
    }
}

/// Collapse each sample to a single feature vector, keeping labels.
fn flatten_samples(data: &LabeledDataset) -> Result<LabeledDataset> {
    let per: usize = data.sample_shape().iter().product();
    let flat = data
        .features()
        .clone()
        .reshape(vec![data.len(), per])?;
    LabeledDataset::new(flat, data.labels().to_vec(), data.class_names().to_vec())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::math::Tensor;
    use crate::zoo;
    use proptest::prelude::*;

    #[test]
    fn accuracy_counts_matches() {
        assert_eq!(accuracy(&[0, 1, 2, 1], &[0, 1, 1, 1]).unwrap(), 0.75);
        assert_eq!(accuracy(&[2, 2], &[2, 2]).unwrap(), 1.0);
        assert_eq!(accuracy(&[0], &[1]).unwrap(), 0.0);
    }

    #[test]
    fn accuracy_rejects_bad_inputs() {
        assert!(matches!(accuracy(&[0, 1], &[0]), Err(Error::Shape(_))));
        assert!(matches!(accuracy(&[], &[]), Err(Error::Dataset(_))));
    }

    #[test]
    fn confusion_rows_are_actual_columns_predicted() {
        // One class-0 sample predicted as 1 lands in row 0, column 1.
        let m = confusion(&[1], &[0], 2).unwrap();
        assert_eq!(m, vec![vec![0, 1], vec![0, 0]]);

        let m = confusion(&[0, 1, 1, 2, 0], &[0, 1, 2, 2, 1], 3).unwrap();
        let row_sums: Vec<usize> = m.iter().map(|r| r.iter().sum()).collect();
        assert_eq!(row_sums, vec![1, 2, 2]); // per-class actual counts
        assert_eq!(m[2][1], 1);
        assert_eq!(m[1][0], 1);
    }

    #[test]
    fn confusion_rejects_out_of_range_labels() {
        assert!(matches!(
            confusion(&[3], &[0], 3),
            Err(Error::Label { label: 3, classes: 3 })
        ));
        assert!(matches!(
            confusion(&[0], &[5], 3),
            Err(Error::Label { label: 5, classes: 3 })
        ));
    }

    #[test]
    fn stability_of_a_settling_curve() {
        let curve = [0.3, 0.6, 0.85, 0.88, 0.89, 0.89, 0.90, 0.89, 0.90, 0.90];
        // At epoch 3 the window still spans 0.88..0.90 which exceeds the band
        // in f64; epoch 4 is the first window that fits.
        assert_eq!(epoch_stability(&curve, 5, 0.02).unwrap(), Some(4));
    }

    #[test]
    fn stability_edge_cases() {
        assert_eq!(epoch_stability(&[0.5; 6], 5, 0.0).unwrap(), Some(0));
        let ramp: Vec<f64> = (0..10).map(|i| i as f64 * 0.1).collect();
        assert_eq!(epoch_stability(&ramp, 3, 0.1).unwrap(), None);
        // A curve exactly window-long is a single candidate window.
        assert_eq!(epoch_stability(&[0.2, 0.9], 2, 0.5).unwrap(), None);
        assert_eq!(epoch_stability(&[0.2, 0.9], 2, 0.7).unwrap(), Some(0));
    }

    #[test]
    fn stability_rejects_bad_parameters() {
        assert!(matches!(
            epoch_stability(&[0.5], 0, 0.1),
            Err(Error::Parameter(_))
        ));
        assert!(matches!(
            epoch_stability(&[0.5, 0.5], 3, 0.1),
            Err(Error::Parameter(_))
        ));
        assert!(matches!(
            epoch_stability(&[0.5, 0.5], 1, -0.1),
            Err(Error::Parameter(_))
        ));
    }

    /// Three well-separated 2-D blobs, `per` samples each.
    fn blobs(per: usize) -> LabeledDataset {
        let centers = [(0.0, 0.0), (8.0, 0.0), (0.0, 8.0)];
        let mut values = Vec::new();
        let mut labels = Vec::new();
        for (c, &(cx, cy)) in centers.iter().enumerate() {
            for i in 0..per {
                let jx = (i % 5) as f64 * 0.1;
                let jy = (i % 3) as f64 * 0.1;
                values.extend_from_slice(&[cx + jx, cy + jy]);
                labels.push(c);
            }
        }
        LabeledDataset::new(
            Tensor::new(vec![3 * per, 2], values).unwrap(),
            labels,
            vec!["a".into(), "b".into(), "c".into()],
        )
        .unwrap()
    }

    #[test]
    fn experiment_report_is_consistent_and_deterministic() {
        let data = blobs(20);
        let learner = zoo::build("slip-svm").unwrap();
        let plan = SplitPlan::standard(7).truncated(5).unwrap();
        let overrides = TrainOverrides::default();
        let report =
            run_experiment(learner.as_ref(), InputMode::Raw, &data, &plan, &overrides).unwrap();

        assert_eq!(report.runs.len(), 5);
        assert_eq!(report.learner, "slip-svm");
        assert_eq!(report.task, "slip");
        for r in &report.runs {
            // Confusion entries account for every test sample.
            let total: usize = r.confusion.iter().flatten().sum();
            assert_eq!(total, r.test_count);
            assert_eq!(r.train_count + r.test_count, data.len());
            // Trace over total is the recorded accuracy.
            let trace: usize = (0..3).map(|k| r.confusion[k][k]).sum();
            assert!((trace as f64 / total as f64 - r.accuracy).abs() < 1e-12);
        }
        let mean = report.runs.iter().map(|r| r.accuracy).sum::<f64>() / 5.0;
        assert!((report.accuracy_mean - mean).abs() < 1e-12);
        let var = report
            .runs
            .iter()
            .map(|r| (r.accuracy - mean).powi(2))
            .sum::<f64>()
            / 5.0;
        assert!((report.accuracy_std - var.sqrt()).abs() < 1e-12);
        // Plan ratios 0.7 (runs 1-4) and 0.6 (run 5), in that order.
        assert_eq!(report.per_ratio_means.len(), 2);
        assert_eq!(report.per_ratio_means[0].ratio, 0.7);
        assert_eq!(report.per_ratio_means[1].ratio, 0.6);
        let first_four = report.runs[..4].iter().map(|r| r.accuracy).sum::<f64>() / 4.0;
        assert!((report.per_ratio_means[0].accuracy_mean - first_four).abs() < 1e-12);
        assert_eq!(report.wall_time_seconds, 0.0);

        let again =
            run_experiment(learner.as_ref(), InputMode::Raw, &data, &plan, &overrides).unwrap();
        assert_eq!(
            report.to_json_pretty().unwrap(),
            again.to_json_pretty().unwrap()
        );
    }

    #[test]
    fn experiment_failures_carry_the_run_number() {
        let data = blobs(20);
        let learner = zoo::build("slip-svm").unwrap();
        // Second run's ratio rounds the training side down to zero samples.
        let plan = SplitPlan::new(vec![
            crate::data::SplitRun { ratio: 0.5, seed: 1 },
            crate::data::SplitRun {
                ratio: 0.001,
                seed: 2,
            },
        ])
        .unwrap();
        let err = run_experiment(
            learner.as_ref(),
            InputMode::Raw,
            &data,
            &plan,
            &TrainOverrides::default(),
        )
        .unwrap_err();
        let Error::Parameter(msg) = err else {
            panic!("expected a parameter error, got {err:?}");
        };
        assert!(msg.starts_with("run 2: "), "message was: {msg}");
    }

    #[test]
    fn csv_exports_have_expected_shape() {
        let data = blobs(10);
        let learner = zoo::build("slip-mlp").unwrap();
        let plan = SplitPlan::single(0.7, 3).unwrap();
        let overrides = TrainOverrides {
            epochs: Some(3),
            batch_size: Some(10),
            seed: 0,
        };
        let report =
            run_experiment(learner.as_ref(), InputMode::Raw, &data, &plan, &overrides).unwrap();

        let runs = report.runs_csv();
        let lines: Vec<&str> = runs.trim_end().lines().collect();
        assert_eq!(lines[0], "run,ratio,seed,train_count,test_count,accuracy");
        assert_eq!(lines.len(), 2);
        assert!(lines[1].starts_with("1,0.7,3,21,9,"));

        let conf = report.confusion_csv(0).unwrap();
        let lines: Vec<&str> = conf.trim_end().lines().collect();
        assert_eq!(lines[0], "actual,a,b,c");
        assert_eq!(lines.len(), 4);
        assert!(lines[1].starts_with("a,"));

        let curve = report.curve_csv(0).unwrap();
        let lines: Vec<&str> = curve.trim_end().lines().collect();
        assert_eq!(lines[0], "epoch,accuracy");
        assert_eq!(lines.len(), 4); // three epochs
        assert!(lines[1].starts_with("1,"));
        assert!(report.curve_csv(1).is_err());
    }

    #[test]
    fn image_preparation_per_layout() {
        // Four 8x8 single-channel images with distinct constant levels.
        let mut values = Vec::new();
        for i in 0..4 {
            values.extend(std::iter::repeat_n(i as f64 * 0.25, 64));
        }
        let images = LabeledDataset::new(
            Tensor::new(vec![4, 1, 8, 8], values).unwrap(),
            vec![0, 1, 0, 1],
            vec!["x".into(), "y".into()],
        )
        .unwrap();
        let hog = HogConfig::default();

        let flat =
            prepare_image_input(&images, &InputLayout::Vector, InputMode::Raw, &hog).unwrap();
        assert_eq!(flat.features().shape(), &[4, 64]);
        assert_eq!(flat.sample(2), &[0.5; 64]);
        assert_eq!(flat.labels(), images.labels());

        let plane =
            prepare_image_input(&images, &InputLayout::ImagePlane, InputMode::Raw, &hog).unwrap();
        assert_eq!(plane.features().shape(), &[4, 1, 8, 8]);

        assert!(prepare_image_input(&images, &InputLayout::ImagePlane, InputMode::Filtered, &hog)
            .is_err());
        assert!(prepare_image_input(
            &images,
            &InputLayout::SignalWindow {
                length: 8,
                stride: 8
            },
            InputMode::Raw,
            &hog
        )
        .is_err());
    }

    #[test]
    fn slip_preparation_per_layout() {
        let frames: Vec<SensorFrame> = (0..80)
            .map(|i| SensorFrame {
                t: i as f64 * 0.01,
                torque: 2.0,
                acc_x: (i as f64).sin(),
                pitch: 0.0,
                acc_z: 0.0,
                slip: 15.0,
            })
            .collect();
        let vectors =
            prepare_slip_input(&frames, &InputLayout::Vector, InputMode::Filtered, 10).unwrap();
        assert_eq!(vectors.features().shape(), &[80, 4]);
        let windows = prepare_slip_input(
            &frames,
            &InputLayout::SignalWindow {
                length: 64,
                stride: 8,
            },
            InputMode::Raw,
            10,
        )
        .unwrap();
        assert_eq!(windows.features().shape(), &[3, 4, 64]);
        assert!(
            prepare_slip_input(&frames, &InputLayout::ImagePlane, InputMode::Raw, 10).is_err()
        );
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(64))]

        /// Confusion invariants hold for arbitrary label vectors: entries sum
        /// to the sample count, row sums match per-class actual counts, and
        /// the normalized trace equals the accuracy.
        #[test]
        fn confusion_invariants(
            pairs in proptest::collection::vec((0usize..5, 0usize..5), 1..60)
        ) {
            let predicted: Vec<usize> = pairs.iter().map(|&(p, _)| p).collect();
            let actual: Vec<usize> = pairs.iter().map(|&(_, a)| a).collect();
            let m = confusion(&predicted, &actual, 5).unwrap();
            let total: usize = m.iter().flatten().sum();
            prop_assert_eq!(total, pairs.len());
            for (class, row) in m.iter().enumerate() {
                let expected = actual.iter().filter(|&&a| a == class).count();
                prop_assert_eq!(row.iter().sum::<usize>(), expected);
            }
            let trace: usize = (0..5).map(|k| m[k][k]).sum();
            let acc = accuracy(&predicted, &actual).unwrap();
            prop_assert!((trace as f64 / total as f64 - acc).abs() < 1e-12);
        }

        /// Relabeling classes consistently permutes the confusion matrix and
        /// leaves accuracy unchanged.
        #[test]
        fn relabeling_permutes_confusion(
            pairs in proptest::collection::vec((0usize..4, 0usize..4), 1..40),
            swap in (0usize..4, 0usize..4)
        ) {
            let map = |l: usize| {
                if l == swap.0 { swap.1 } else if l == swap.1 { swap.0 } else { l }
            };
            let predicted: Vec<usize> = pairs.iter().map(|&(p, _)| p).collect();
            let actual: Vec<usize> = pairs.iter().map(|&(_, a)| a).collect();
            let m = confusion(&predicted, &actual, 4).unwrap();
            let predicted2: Vec<usize> = predicted.iter().map(|&p| map(p)).collect();
            let actual2: Vec<usize> = actual.iter().map(|&a| map(a)).collect();
            let m2 = confusion(&predicted2, &actual2, 4).unwrap();
            for a in 0..4 {
                for p in 0..4 {
                    prop_assert_eq!(m[a][p], m2[map(a)][map(p)]);
                }
            }
            prop_assert_eq!(
                accuracy(&predicted, &actual).unwrap(),
                accuracy(&predicted2, &actual2).unwrap()
            );
        }
    }
}
