use crate::error::{Error, Result};
use crate::math::rng::{streams, SeededRng};
use crate::signal::SensorFrame;

/// Telemetry sample rate of the synthetic testbed log.
pub const SAMPLE_RATE_HZ: f64 = 100.0;

// Per-regime generator constants (low, moderate, high). Torque mean and IMU
// noise variance both rise monotonically with slip severity. The torque
// noise is deliberately large relative to the mean gaps and the IMU variance
// steps are deliberately modest: a single frame is ambiguous, while window
// statistics over tens of frames separate the regimes cleanly. That contrast
// is the dataset's point — learners fed per-frame raw values must work much
// harder than learners fed windowed statistics.
const SLIP_RANGES: [(f64, f64); 3] = [(5.0, 25.0), (35.0, 55.0), (65.0, 95.0)];
const TORQUE_MEANS: [f64; 3] = [2.0, 5.0, 9.0];
const TORQUE_NOISE_STD: f64 = 3.5;
// Standard deviations giving noise variances of 0.5, 1.0, and 2.0.
const IMU_STDS: [f64; 3] = [std::f64::consts::FRAC_1_SQRT_2, 1.0, std::f64::consts::SQRT_2];

/// Synthesize a single-wheel drive log visiting the three slip regimes in
/// one contiguous segment each (low, then moderate, then high), with
/// `n_per_class` frames per regime at 100 Hz.
///
/// Ground-truth slip is uniform inside each regime's band, so discretization
/// reproduces the regime exactly and classes stay perfectly balanced. Every
/// channel draws from its own seeded stream.
pub fn synth_slip(n_per_class: usize, n_w: usize, seed: u64) -> Result<Vec<SensorFrame>> {
    if n_w == 0 {
        return Err(Error::Parameter("variance window must be >= 1".into()));
    }
    if n_per_class < n_w {
        return Err(Error::Parameter(format!(
            "n_per_class {n_per_class} smaller than the variance window {n_w}"
        )));
    }
    // Channel sub-streams hang off the data stream id.
    let channel_stream = |k: u64| (streams::DATA << 32) | k;
    let mut slip_rng = SeededRng::new(seed, channel_stream(0));
    let mut torque_rng = SeededRng::new(seed, channel_stream(1));
    let mut acc_x_rng = SeededRng::new(seed, channel_stream(2));
    let mut pitch_rng = SeededRng::new(seed, channel_stream(3));
    let mut acc_z_rng = SeededRng::new(seed, channel_stream(4));

    let mut frames = Vec::with_capacity(3 * n_per_class);
    for regime in 0..3 {
        let (lo, hi) = SLIP_RANGES[regime];
        let imu_std = IMU_STDS[regime];
        for _ in 0..n_per_class {
            let t = frames.len() as f64 / SAMPLE_RATE_HZ;
            frames.push(SensorFrame {
                t,
                torque: TORQUE_MEANS[regime]
                    + TORQUE_NOISE_STD * torque_rng.normal(),
                acc_x: imu_std * acc_x_rng.normal(),
                pitch: imu_std * pitch_rng.normal(),
                acc_z: imu_std * acc_z_rng.normal(),
                slip: slip_rng.uniform_range(lo, hi),
            });
        }
    }
    Ok(frames)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::data::InputMode;
    use crate::signal::{assemble_slip_dataset, discretize_slip};

    #[test]
    fn produces_balanced_classes() {
        let frames = synth_slip(200, 50, 7).unwrap();
        assert_eq!(frames.len(), 600);
        let mut counts = [0usize; 3];
        for f in &frames {
            counts[discretize_slip(f.slip).unwrap().index()] += 1;
        }
        assert_eq!(counts, [200, 200, 200]);
    }

    #[test]
    fn deterministic_per_seed() {
        let a = synth_slip(100, 50, 7).unwrap();
        let b = synth_slip(100, 50, 7).unwrap();
        assert_eq!(a, b);
        let c = synth_slip(100, 50, 8).unwrap();
        assert_ne!(a, c);
    }

    #[test]
    fn time_advances_at_the_sample_rate() {
        let frames = synth_slip(60, 10, 3).unwrap();
        for (i, f) in frames.iter().enumerate() {
            assert!((f.t - i as f64 * 0.01).abs() < 1e-12);
        }
    }

    #[test]
    fn rejects_too_small_segments() {
        assert!(synth_slip(10, 50, 0).is_err());
        assert!(synth_slip(10, 0, 0).is_err());
    }

    #[test]
    fn windowed_imu_variances_order_by_regime() {
        let n = 500;
        let frames = synth_slip(n, 50, 7).unwrap();
        let ds = assemble_slip_dataset(&frames, InputMode::Filtered, 50).unwrap();
        // Mean of each variance feature per class, skipping the first class
        // segment's warm-up.
        let mut sums = [[0.0f64; 3]; 3];
        let mut counts = [0usize; 3];
        for i in 0..ds.len() {
            let label = ds.labels()[i];
            counts[label] += 1;
            for (s, v) in sums[label].iter_mut().zip(&ds.sample(i)[1..]) {
                *s += v;
            }
        }
        let class_means: Vec<Vec<f64>> = sums
            .iter()
            .zip(&counts)
            .map(|(s, &c)| s.iter().map(|v| v / c as f64).collect())
            .collect();
        for q in 0..3 {
            let means: Vec<f64> = class_means.iter().map(|row| row[q]).collect();
            assert!(
                means[0] < means[1] && means[1] < means[2],
                "feature q{} class means not ordered: {means:?}",
                q + 2
            );
        }
    }

    #[test]
    fn torque_means_rise_with_regime() {
        let n = 2000;
        let frames = synth_slip(n, 50, 11).unwrap();
        let mean = |r: usize| -> f64 {
            frames[r * n..(r + 1) * n].iter().map(|f| f.torque).sum::<f64>() / n as f64
        };
        let (m0, m1, m2) = (mean(0), mean(1), mean(2));
        assert!(m0 < m1 && m1 < m2, "{m0} {m1} {m2}");
        assert!((m0 - 2.0).abs() < 0.3 && (m1 - 5.0).abs() < 0.3 && (m2 - 9.0).abs() < 0.3);
    }
}
