use crate::error::{Error, Result};
use crate::math::Tensor;

/// Floor applied to predicted probabilities inside the log, so a confident
/// wrong answer costs a large but finite amount.
pub(crate) const PROB_FLOOR: f64 = 1e-12;

/// One-hot encode integer labels into an `[n, classes]` tensor.
pub fn one_hot(labels: &[usize], classes: usize) -> Result<Tensor> {
    if classes == 0 || labels.is_empty() {
        return Err(Error::Shape(
            "one_hot needs at least one label and one class".into(),
        ));
    }
    let mut t = Tensor::zeros(vec![labels.len(), classes]);
    for (row, &label) in labels.iter().enumerate() {
        if label >= classes {
            return Err(Error::Label { label, classes });
        }
        t.values_mut()[row * classes + label] = 1.0;
    }
    Ok(t)
}

/// Mean negative log-likelihood of one-hot targets under predicted
/// probability rows: `-(1/n) * sum(log(max(p_true, 1e-12)))`.
///
/// Each probability row must already sum to 1 within 1e-6 (a softmax output);
/// anything else indicates the caller fed raw scores, which is rejected.
pub fn cross_entropy(probs: &Tensor, targets: &Tensor) -> Result<f64> {
    if probs.rank() != 2 || probs.shape() != targets.shape() {
        return Err(Error::shape_mismatch(
            "cross_entropy",
            probs.shape(),
            targets.shape(),
        ));
    }
    let (n, k) = (probs.dim(0), probs.dim(1));
    let mut total = 0.0;
    for row in 0..n {
        let p = &probs.values()[row * k..(row + 1) * k];
        let y = &targets.values()[row * k..(row + 1) * k];
        let sum: f64 = p.iter().sum();
        let deviation = (sum - 1.0).abs();
        if deviation > 1e-6 || deviation.is_nan() {
            return Err(Error::Invariant(format!(
                "cross_entropy row {row} sums to {sum}, not a probability row"
            )));
        }
        let p_true: f64 = p.iter().zip(y).map(|(a, b)| a * b).sum();
        total -= p_true.max(PROB_FLOOR).ln();
    }
    Ok(total / n as f64)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn perfect_prediction_costs_nothing() {
        let p = Tensor::from_rows(&[vec![1.0, 0.0], vec![0.0, 1.0]]).unwrap();
        let loss = cross_entropy(&p, &p.clone()).unwrap();
        assert_eq!(loss, 0.0);
    }

    #[test]
    fn uniform_prediction_over_three_classes_costs_ln_three() {
        let third = 1.0 / 3.0;
        let p = Tensor::from_rows(&[vec![third; 3]]).unwrap();
        let y = one_hot(&[1], 3).unwrap();
        let loss = cross_entropy(&p, &y).unwrap();
        assert!((loss - 3.0f64.ln()).abs() < 1e-12);
    }

    #[test]
    fn zero_probability_is_clipped_finite() {
        let p = Tensor::from_rows(&[vec![0.0, 1.0]]).unwrap();
        let y = one_hot(&[0], 2).unwrap();
        let loss = cross_entropy(&p, &y).unwrap();
        assert!((loss - (-PROB_FLOOR.ln())).abs() < 1e-9);
        assert!(loss.is_finite());
        assert!((loss - 27.631).abs() < 1e-2);
    }

    #[test]
    fn non_probability_rows_are_rejected() {
        let p = Tensor::from_rows(&[vec![0.9, 0.9]]).unwrap();
        let y = one_hot(&[0], 2).unwrap();
        assert!(matches!(cross_entropy(&p, &y), Err(Error::Invariant(_))));
    }

    #[test]
    fn shape_mismatch_is_rejected() {
        let p = Tensor::from_rows(&[vec![0.5, 0.5]]).unwrap();
        let y = one_hot(&[0], 3).unwrap();
        assert!(cross_entropy(&p, &y).is_err());
    }

    #[test]
    fn one_hot_rejects_out_of_range_labels() {
        assert!(one_hot(&[3], 3).is_err());
        let t = one_hot(&[2, 0], 3).unwrap();
        assert_eq!(t.values(), &[0., 0., 1., 1., 0., 0.]);
    }
}
