use crate::error::{Error, Result};
use crate::math::Tensor;

/// Per-feature affine map to zero mean and unit variance, fitted on training
/// rows only so evaluation data never leaks into the statistics. Constant
/// features keep their mean shift but skip the scale (divisor 1).
#[derive(Debug, Clone, PartialEq)]
pub struct Standardizer {
    means: Vec<f64>,
    scales: Vec<f64>,
}

impl Standardizer {
    pub fn fit(features: &Tensor) -> Result<Self> {
        if features.rank() != 2 {
            return Err(Error::Shape(format!(
                "standardizer expects [n, d], got {:?}",
                features.shape()
            )));
        }
        let n = features.dim(0);
        let d = features.dim(1);
        if n == 0 {
            return Err(Error::Dataset("cannot standardize zero rows".into()));
        }
        let mut means = vec![0.0; d];
        for row in features.values().chunks_exact(d) {
            for (m, v) in means.iter_mut().zip(row) {
                *m += v;
            }
        }
        for m in &mut means {
            *m /= n as f64;
        }
        let mut scales = vec![0.0; d];
        for row in features.values().chunks_exact(d) {
            for ((s, v), m) in scales.iter_mut().zip(row).zip(&means) {
                let centered = v - m;
                *s += centered * centered;
            }
        }
        for s in &mut scales {
            let std = (*s / n as f64).sqrt();
            *s = if std > 0.0 { std } else { 1.0 };
        }
        Ok(Standardizer { means, scales })
    }

    pub(crate) fn from_parts(means: Vec<f64>, scales: Vec<f64>) -> Result<Self> {
        if means.len() != scales.len() || means.is_empty() {
            return Err(Error::State(format!(
                "standardizer with {} means and {} scales",
                means.len(),
                scales.len()
            )));
        }
        if scales.iter().any(|&s| s <= 0.0 || !s.is_finite()) {
            return Err(Error::State("standardizer scales must be positive".into()));
        }
        Ok(Standardizer { means, scales })
    }

    pub fn dims(&self) -> usize {
        self.means.len()
    }

    pub fn means(&self) -> &[f64] {
        &self.means
    }

    pub fn scales(&self) -> &[f64] {
        &self.scales
    }

    pub fn transform(&self, features: &Tensor) -> Result<Tensor> {
        if features.rank() != 2 || features.dim(1) != self.means.len() {
            return Err(Error::Shape(format!(
                "standardizer fitted on {} features, got shape {:?}",
                self.means.len(),
                features.shape()
            )));
        }
        let d = self.means.len();
        let values = features
            .values()
            .chunks_exact(d)
            .flat_map(|row| {
                row.iter()
                    .zip(&self.means)
                    .zip(&self.scales)
                    .map(|((v, m), s)| (v - m) / s)
            })
            .collect();
        Tensor::new(features.shape().to_vec(), values)
    }

    pub fn transform_row(&self, row: &[f64]) -> Result<Vec<f64>> {
        if row.len() != self.means.len() {
            return Err(Error::Shape(format!(
                "standardizer fitted on {} features, got row of {}",
                self.means.len(),
                row.len()
            )));
        }
        Ok(row
            .iter()
            .zip(&self.means)
            .zip(&self.scales)
            .map(|((v, m), s)| (v - m) / s)
            .collect())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn fitted_statistics_are_population_moments() {
        let x = Tensor::from_rows(&[vec![1.0, 10.0], vec![3.0, 10.0], vec![5.0, 10.0]]).unwrap();
        let s = Standardizer::fit(&x).unwrap();
        assert_eq!(s.means(), &[3.0, 10.0]);
        // Population std of {1,3,5} is sqrt(8/3); the constant column
        // falls back to scale 1.
        assert!((s.scales()[0] - (8.0f64 / 3.0).sqrt()).abs() < 1e-12);
        assert_eq!(s.scales()[1], 1.0);
    }

    #[test]
    fn transformed_training_data_has_zero_mean_unit_variance() {
        let x = Tensor::from_rows(&[
            vec![2.0, -1.0],
            vec![4.0, 5.0],
            vec![9.0, 0.5],
            vec![-3.0, 2.0],
        ])
        .unwrap();
        let s = Standardizer::fit(&x).unwrap();
        let t = s.transform(&x).unwrap();
        for col in 0..2 {
            let vals: Vec<f64> = (0..4).map(|r| t.values()[r * 2 + col]).collect();
            let mean: f64 = vals.iter().sum::<f64>() / 4.0;
            let var: f64 = vals.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / 4.0;
            assert!(mean.abs() < 1e-12);
            assert!((var - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn rows_and_matrices_transform_identically() {
        let x = Tensor::from_rows(&[vec![1.0, 2.0], vec![5.0, -2.0], vec![0.0, 7.0]]).unwrap();
        let s = Standardizer::fit(&x).unwrap();
        let t = s.transform(&x).unwrap();
        for i in 0..3 {
            let row = s.transform_row(&x.values()[i * 2..(i + 1) * 2]).unwrap();
            assert_eq!(row, &t.values()[i * 2..(i + 1) * 2]);
        }
    }

    #[test]
    fn dimension_mismatch_is_rejected() {
        let x = Tensor::from_rows(&[vec![1.0, 2.0], vec![3.0, 4.0]]).unwrap();
        let s = Standardizer::fit(&x).unwrap();
        let wrong = Tensor::from_rows(&[vec![1.0, 2.0, 3.0]]).unwrap();
        assert!(s.transform(&wrong).is_err());
        assert!(s.transform_row(&[1.0]).is_err());
    }

    #[test]
    fn from_parts_round_trips_and_validates() {
        let rebuilt = Standardizer::from_parts(vec![1.0, 2.0], vec![0.5, 2.0]).unwrap();
        assert_eq!(rebuilt.transform_row(&[1.0, 2.0]).unwrap(), vec![0.0, 0.0]);
        assert!(Standardizer::from_parts(vec![1.0], vec![0.0]).is_err());
        assert!(Standardizer::from_parts(vec![1.0], vec![1.0, 2.0]).is_err());
    }
}
