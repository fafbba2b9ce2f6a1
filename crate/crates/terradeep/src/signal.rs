//! Telemetry-to-feature transforms for the wheel-slip task: the
//! absolute-torque feature, sliding variances of the IMU channels, and the
//! three-way slip discretization.

use crate::data::{InputMode, LabeledDataset};
use crate::error::{Error, Result};
use crate::math::Tensor;

/// One telemetry sample from the single-wheel testbed: wheel torque, three
/// inertial channels, and ground-truth slip in percent.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SensorFrame {
    pub t: f64,
    pub torque: f64,
    pub acc_x: f64,
    pub pitch: f64,
    pub acc_z: f64,
    pub slip: f64,
}

/// Slip regime, ordered by severity.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub enum SlipClass {
    Low = 0,
    Moderate = 1,
    High = 2,
}

pub const SLIP_CLASS_NAMES: [&str; 3] = ["low", "moderate", "high"];

impl SlipClass {
    pub fn index(self) -> usize {
        self as usize
    }

    pub fn name(self) -> &'static str {
        SLIP_CLASS_NAMES[self.index()]
    }
}

/// Map slip percentage onto its class: `s <= 30` is low, `30 < s <= 60`
/// moderate, `s > 60` high. Values outside `[0, 100]` are physically
/// impossible readings and reported as outliers for the caller to drop.
pub fn discretize_slip(s: f64) -> Result<SlipClass> {
    if !(0.0..=100.0).contains(&s) {
        return Err(Error::Outlier {
            value: s,
            lo: 0.0,
            hi: 100.0,
        });
    }
    Ok(if s <= 30.0 {
        SlipClass::Low
    } else if s <= 60.0 {
        SlipClass::Moderate
    } else {
        SlipClass::High
    })
}

/// Absolute wheel torque.
pub fn torque_feature(torque: f64) -> f64 {
    torque.abs()
}

/// Population variance over a causal window ending at each index.
///
/// Output has the input's length; positions before the window fills use the
/// shorter prefix (warm-up). Each window is computed with a two-pass
/// mean-then-deviation sum, which keeps the result shift-invariant instead
/// of cancelling catastrophically the way a running sum-of-squares would.
pub fn sliding_variance(series: &[f64], n_w: usize) -> Result<Vec<f64>> {
    if n_w == 0 {
        return Err(Error::Parameter("variance window must be >= 1".into()));
    }
    if series.is_empty() {
        return Err(Error::Parameter("variance of an empty series".into()));
    }
    let mut out = Vec::with_capacity(series.len());
    for i in 0..series.len() {
        let w = n_w.min(i + 1);
        let window = &series[i + 1 - w..=i];
        let mean = window.iter().sum::<f64>() / w as f64;
        let ss = window.iter().map(|x| (x - mean) * (x - mean)).sum::<f64>();
        out.push(ss / w as f64);
    }
    Ok(out)
}

/// Row-major `[n, 4]` channel values for a frame sequence: the four raw
/// channels, or the absolute-torque / sliding-variance quadruple.
fn channel_rows(frames: &[SensorFrame], mode: InputMode, n_w: usize) -> Result<Vec<f64>> {
    let n = frames.len();
    let mut values = Vec::with_capacity(n * 4);
    match mode {
        InputMode::Raw => {
            for f in frames {
                values.extend_from_slice(&[f.torque, f.acc_x, f.pitch, f.acc_z]);
            }
        }
        InputMode::Filtered => {
            if n_w == 0 {
                return Err(Error::Parameter("variance window must be >= 1".into()));
            }
            let acc_x: Vec<f64> = frames.iter().map(|f| f.acc_x).collect();
            let pitch: Vec<f64> = frames.iter().map(|f| f.pitch).collect();
            let acc_z: Vec<f64> = frames.iter().map(|f| f.acc_z).collect();
            let q2 = sliding_variance(&acc_x, n_w)?;
            let q3 = sliding_variance(&pitch, n_w)?;
            let q4 = sliding_variance(&acc_z, n_w)?;
            for i in 0..n {
                values.extend_from_slice(&[
                    torque_feature(frames[i].torque),
                    q2[i],
                    q3[i],
                    q4[i],
                ]);
            }
        }
    }
    Ok(values)
}

/// Build the slip-classification dataset from a telemetry log.
///
/// Raw mode presents each frame's `[torque, acc_x, pitch, acc_z]` directly;
/// filtered mode replaces them with `[|torque|, var(acc_x), var(pitch),
/// var(acc_z)]` using causal windows of `n_w` samples. Labels come from
/// per-frame slip discretization; the class table is always the full
/// low/moderate/high triple.
pub fn assemble_slip_dataset(
    frames: &[SensorFrame],
    mode: InputMode,
    n_w: usize,
) -> Result<LabeledDataset> {
    if frames.is_empty() {
        return Err(Error::Dataset("no frames to assemble".into()));
    }
    let labels = frames
        .iter()
        .map(|f| discretize_slip(f.slip).map(SlipClass::index))
        .collect::<Result<Vec<_>>>()?;
    let values = channel_rows(frames, mode, n_w)?;
    LabeledDataset::new(
        Tensor::new(vec![frames.len(), 4], values)?,
        labels,
        SLIP_CLASS_NAMES.iter().map(|s| s.to_string()).collect(),
    )
}

/// Slice the telemetry stream into channel-major `[4, length]` windows for
/// the 1-D convolutional learner: window `w` covers frames
/// `[w*stride, w*stride + length)` and is labeled by its final frame, the
/// moment a causal classifier would be asked about. Channels follow the same
/// raw/filtered convention as [`assemble_slip_dataset`].
pub fn assemble_slip_windows(
    frames: &[SensorFrame],
    mode: InputMode,
    n_w: usize,
    length: usize,
    stride: usize,
) -> Result<LabeledDataset> {
    if length == 0 || stride == 0 {
        return Err(Error::Parameter(
            "window length and stride must be >= 1".into(),
        ));
    }
    if frames.len() < length {
        return Err(Error::Dataset(format!(
            "{} frames cannot fill one window of {length}",
            frames.len()
        )));
    }
    let rows = channel_rows(frames, mode, n_w)?;
    let starts: Vec<usize> = (0..=frames.len() - length).step_by(stride).collect();
    let mut values = Vec::with_capacity(starts.len() * 4 * length);
    let mut labels = Vec::with_capacity(starts.len());
    for &start in &starts {
        for c in 0..4 {
            for t in 0..length {
                values.push(rows[(start + t) * 4 + c]);
            }
        }
        labels.push(discretize_slip(frames[start + length - 1].slip)?.index());
    }
    LabeledDataset::new(
        Tensor::new(vec![starts.len(), 4, length], values)?,
        labels,
        SLIP_CLASS_NAMES.iter().map(|s| s.to_string()).collect(),
    )
}

#[cfg(test)]
mod tests {
    use super::*;

    fn frame(slip: f64) -> SensorFrame {
        SensorFrame {
            t: 0.0,
            torque: 1.0,
            acc_x: 0.0,
            pitch: 0.0,
            acc_z: 0.0,
            slip,
        }
    }

    #[test]
    fn discretize_boundaries_belong_to_lower_class() {
        assert_eq!(discretize_slip(30.0).unwrap(), SlipClass::Low);
        assert_eq!(discretize_slip(30.0001).unwrap(), SlipClass::Moderate);
        assert_eq!(discretize_slip(60.0).unwrap(), SlipClass::Moderate);
        assert_eq!(discretize_slip(60.0001).unwrap(), SlipClass::High);
        assert_eq!(discretize_slip(0.0).unwrap(), SlipClass::Low);
        assert_eq!(discretize_slip(100.0).unwrap(), SlipClass::High);
    }

    #[test]
    fn discretize_rejects_outliers() {
        assert!(matches!(
            discretize_slip(101.0),
            Err(Error::Outlier { .. })
        ));
        assert!(discretize_slip(-0.5).is_err());
    }

    #[test]
    fn torque_feature_is_absolute_value() {
        assert_eq!(torque_feature(0.0), 0.0);
        assert_eq!(torque_feature(-3.2), 3.2);
        assert_eq!(torque_feature(7.5), 7.5);
    }

    #[test]
    fn sliding_variance_known_windows() {
        // Full window over [1,2,3]: mean 2, deviations 1+0+1 over 3.
        let v = sliding_variance(&[1., 2., 3.], 3).unwrap();
        assert!((v[2] - 2.0 / 3.0).abs() < 1e-15);
        // Pairwise windows over a step: [0], [0,0], [0,3], [3,3].
        let v = sliding_variance(&[0., 0., 3., 3.], 2).unwrap();
        assert_eq!(v, vec![0.0, 0.0, 2.25, 0.0]);
    }

    #[test]
    fn sliding_variance_constant_is_zero() {
        let v = sliding_variance(&[4.2; 10], 3).unwrap();
        assert!(v.iter().all(|&x| x == 0.0));
    }

    #[test]
    fn sliding_variance_rejects_zero_window() {
        assert!(sliding_variance(&[1.0], 0).is_err());
    }

    #[test]
    fn sliding_variance_shift_invariant_at_huge_offset() {
        let base = [0.25, -1.5, 3.0, 0.75, -2.0, 1.0];
        let shifted: Vec<f64> = base.iter().map(|x| x + 1e9).collect();
        let a = sliding_variance(&base, 4).unwrap();
        let b = sliding_variance(&shifted, 4).unwrap();
        for (x, y) in a.iter().zip(&b) {
            assert!((x - y).abs() <= 1e-9 * x.abs().max(1.0));
        }
    }

    #[test]
    fn raw_dataset_copies_channels_per_frame() {
        let frames = vec![
            SensorFrame {
                t: 0.0,
                torque: -2.0,
                acc_x: 0.1,
                pitch: 0.2,
                acc_z: 0.3,
                slip: 10.0,
            };
            10
        ];
        let d = assemble_slip_dataset(&frames, InputMode::Raw, 50).unwrap();
        assert_eq!(d.features().shape(), &[10, 4]);
        assert_eq!(d.sample(0), &[-2.0, 0.1, 0.2, 0.3]);
        assert!(d.labels().iter().all(|&l| l == SlipClass::Low.index()));
    }

    #[test]
    fn filtered_dataset_on_constant_channels_has_zero_variances() {
        let frames: Vec<SensorFrame> = (0..20).map(|_| frame(45.0)).collect();
        let d = assemble_slip_dataset(&frames, InputMode::Filtered, 5).unwrap();
        for i in 0..d.len() {
            let row = d.sample(i);
            assert_eq!(row[0], 1.0); // |torque|
            assert_eq!(&row[1..], &[0.0, 0.0, 0.0]);
        }
        assert!(d.labels().iter().all(|&l| l == SlipClass::Moderate.index()));
    }

    #[test]
    fn class_table_is_always_complete() {
        let d = assemble_slip_dataset(&[frame(80.0)], InputMode::Raw, 1).unwrap();
        assert_eq!(d.class_names(), &["low", "moderate", "high"]);
    }

    /// Frames whose channels encode their own index, so window contents are
    /// checkable by arithmetic.
    fn indexed_frames(n: usize) -> Vec<SensorFrame> {
        (0..n)
            .map(|i| SensorFrame {
                t: i as f64,
                torque: i as f64,
                acc_x: 1000.0 + i as f64,
                pitch: 2000.0 + i as f64,
                acc_z: 3000.0 + i as f64,
                slip: 10.0,
            })
            .collect()
    }

    #[test]
    fn windows_are_channel_major_slices_of_the_stream() {
        let frames = indexed_frames(30);
        let d = assemble_slip_windows(&frames, InputMode::Raw, 50, 8, 4).unwrap();
        // Starts 0, 4, 8, 12, 16, 20, 22: (30 - 8) / 4 + 1 = 6 full windows.
        assert_eq!(d.features().shape(), &[6, 4, 8]);
        for w in 0..6 {
            let window = d.sample(w);
            for c in 0..4 {
                for t in 0..8 {
                    let expected = c as f64 * 1000.0 + (w * 4 + t) as f64;
                    assert_eq!(window[c * 8 + t], expected);
                }
            }
        }
    }

    #[test]
    fn window_label_comes_from_the_final_frame() {
        // Slip jumps across the moderate boundary mid-stream: each window is
        // judged by where it ends, not where it starts.
        let mut frames = indexed_frames(12);
        for (i, f) in frames.iter_mut().enumerate() {
            f.slip = if i < 9 { 10.0 } else { 70.0 };
        }
        let d = assemble_slip_windows(&frames, InputMode::Raw, 50, 6, 3).unwrap();
        // Windows end at frames 5, 8, 11.
        assert_eq!(
            d.labels(),
            &[
                SlipClass::Low.index(),
                SlipClass::Low.index(),
                SlipClass::High.index()
            ]
        );
    }

    #[test]
    fn window_channels_match_the_per_frame_dataset() {
        let frames: Vec<SensorFrame> = (0..40)
            .map(|i| SensorFrame {
                t: i as f64,
                torque: -(i as f64),
                acc_x: (i as f64).sin(),
                pitch: (i as f64 * 0.7).cos(),
                acc_z: (i % 5) as f64,
                slip: 45.0,
            })
            .collect();
        let per_frame = assemble_slip_dataset(&frames, InputMode::Filtered, 7).unwrap();
        let windows = assemble_slip_windows(&frames, InputMode::Filtered, 7, 10, 10).unwrap();
        assert_eq!(windows.features().shape(), &[4, 4, 10]);
        for w in 0..4 {
            let window = windows.sample(w);
            for t in 0..10 {
                let row = per_frame.sample(w * 10 + t);
                for c in 0..4 {
                    assert_eq!(window[c * 10 + t], row[c]);
                }
            }
        }
    }

    #[test]
    fn windows_reject_degenerate_geometry() {
        let frames = indexed_frames(10);
        assert!(matches!(
            assemble_slip_windows(&frames, InputMode::Raw, 1, 0, 4),
            Err(Error::Parameter(_))
        ));
        assert!(matches!(
            assemble_slip_windows(&frames, InputMode::Raw, 1, 4, 0),
            Err(Error::Parameter(_))
        ));
        assert!(matches!(
            assemble_slip_windows(&frames, InputMode::Raw, 1, 11, 4),
            Err(Error::Dataset(_))
        ));
    }
}
