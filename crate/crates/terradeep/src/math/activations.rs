use super::tensor::Tensor;

/// Element-wise `max(0, x)`.
pub fn relu(x: &Tensor) -> Tensor {
    x.map(|v| if v > 0.0 { v } else { 0.0 })
}

/// Element-wise logistic function, computed in the branch that keeps the
/// exponent non-positive so large inputs cannot overflow.
pub fn sigmoid(x: &Tensor) -> Tensor {
    x.map(sigmoid_scalar)
}

#[inline]
pub(crate) fn sigmoid_scalar(v: f64) -> f64 {
    if v >= 0.0 {
        1.0 / (1.0 + (-v).exp())
    } else {
        let e = v.exp();
        e / (1.0 + e)
    }
}

/// Softmax along the last axis: each row of a rank-2 tensor (or the whole of
/// a rank-1 tensor) is shifted by its maximum before exponentiation and then
/// normalised to sum to one.
pub fn softmax(x: &Tensor) -> Tensor {
    let mut out = x.clone();
    let cols = *x.shape().last().expect("softmax needs at least rank 1");
    for row in out.values_mut().chunks_exact_mut(cols) {
        softmax_row(row);
    }
    out
}

#[inline]
pub(crate) fn softmax_row(row: &mut [f64]) {
    let max = row.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let mut sum = 0.0;
    for v in row.iter_mut() {
        *v = (*v - max).exp();
        sum += *v;
    }
    for v in row.iter_mut() {
        *v /= sum;
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn relu_clamps_negatives() {
        let t = Tensor::vector(vec![-2., -0.0, 0.5, 3.]);
        assert_eq!(relu(&t).values(), &[0., 0., 0.5, 3.]);
    }

    #[test]
    fn sigmoid_known_points() {
        let t = Tensor::vector(vec![0.0, f64::ln(3.0), -f64::ln(3.0)]);
        let s = sigmoid(&t);
        // sigmoid(ln 3) = 3/4 exactly in real arithmetic.
        assert!((s.values()[0] - 0.5).abs() < 1e-15);
        assert!((s.values()[1] - 0.75).abs() < 1e-15);
        assert!((s.values()[2] - 0.25).abs() < 1e-15);
    }

    #[test]
    fn sigmoid_saturates_without_overflow() {
        let s = sigmoid(&Tensor::vector(vec![800.0, -800.0]));
        assert_eq!(s.values()[0], 1.0);
        assert_eq!(s.values()[1], 0.0);
    }

    #[test]
    fn softmax_of_log_odds_recovers_probabilities() {
        // exp undoes ln, so [ln 1, ln 2, ln 7] normalises to [.1, .2, .7].
        let t = Tensor::vector(vec![1f64.ln(), 2f64.ln(), 7f64.ln()]);
        let s = softmax(&t);
        for (got, want) in s.values().iter().zip(&[0.1, 0.2, 0.7]) {
            assert!((got - want).abs() < 1e-14);
        }
    }

    #[test]
    fn softmax_rows_sum_to_one_even_for_huge_logits() {
        let t = Tensor::from_rows(&[vec![1000., 1001., 1002.], vec![-1000., 0., 1000.]]).unwrap();
        let s = softmax(&t);
        for r in 0..2 {
            let sum: f64 = s.row(r).iter().sum();
            assert!((sum - 1.0).abs() < 1e-12);
            assert!(s.row(r).iter().all(|v| v.is_finite()));
        }
    }

    #[test]
    fn softmax_is_shift_invariant() {
        let a = softmax(&Tensor::vector(vec![0.3, -1.2, 2.0]));
        let b = softmax(&Tensor::vector(vec![100.3, 98.8, 102.0]));
        for (x, y) in a.values().iter().zip(b.values()) {
            assert!((x - y).abs() < 1e-12);
        }
    }
}
