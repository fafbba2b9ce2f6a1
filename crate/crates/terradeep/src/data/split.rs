use crate::error::{Error, Result};
use crate::math::rng::{streams, SeededRng};
use serde::{Deserialize, Serialize};

/// Seeded random partition of `0..n`: first `floor(ratio * n)` of a uniform
/// permutation train, the rest test.
pub fn holdout_split(n: usize, train_ratio: f64, seed: u64) -> Result<(Vec<usize>, Vec<usize>)> {
    if n < 2 {
        return Err(Error::Parameter(format!("cannot split {n} samples")));
    }
    if !(train_ratio > 0.0 && train_ratio < 1.0) {
        return Err(Error::Parameter(format!(
            "train ratio {train_ratio} outside (0, 1)"
        )));
    }
    let train_n = (train_ratio * n as f64).floor() as usize;
    if train_n == 0 || train_n == n {
        return Err(Error::Parameter(format!(
            "split of {n} at ratio {train_ratio} leaves one side empty"
        )));
    }
    let mut rng = SeededRng::new(seed, streams::DATA);
    let order = rng.permutation(n);
    let (train, test) = order.split_at(train_n);
    Ok((train.to_vec(), test.to_vec()))
}

/// The hold-out evaluation schedule: an ordered list of (train ratio, seed)
/// runs. The standard plan is ten runs cycling 70/30, 60/40, and 50/50
/// (four, three, and three runs respectively) with seeds `base + run index`
/// counted from one.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SplitPlan {
    pub runs: Vec<SplitRun>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SplitRun {
    pub ratio: f64,
    pub seed: u64,
}

impl SplitPlan {
    pub fn new(runs: Vec<SplitRun>) -> Result<Self> {
        if runs.is_empty() {
            return Err(Error::Parameter("empty split plan".into()));
        }
        for r in &runs {
            if !(r.ratio > 0.0 && r.ratio < 1.0) {
                return Err(Error::Parameter(format!(
                    "split ratio {} outside (0, 1)",
                    r.ratio
                )));
            }
        }
        Ok(SplitPlan { runs })
    }

    pub fn standard(base_seed: u64) -> Self {
        let mut runs = Vec::with_capacity(10);
        for i in 1..=10u64 {
            let ratio = match i {
                1..=4 => 0.7,
                5..=7 => 0.6,
                _ => 0.5,
            };
            runs.push(SplitRun {
                ratio,
                seed: base_seed + i,
            });
        }
        SplitPlan { runs }
    }

    /// Single-run plan, used where one split suffices.
    pub fn single(ratio: f64, seed: u64) -> Result<Self> {
        SplitPlan::new(vec![SplitRun { ratio, seed }])
    }

    /// The first `n` runs of this plan.
    pub fn truncated(&self, n: usize) -> Result<Self> {
        SplitPlan::new(self.runs.iter().copied().take(n).collect())
    }

    pub fn len(&self) -> usize {
        self.runs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.runs.is_empty()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn split_is_disjoint_and_exhaustive() {
        let (train, test) = holdout_split(10, 0.7, 42).unwrap();
        assert_eq!(train.len(), 7);
        assert_eq!(test.len(), 3);
        let mut all: Vec<usize> = train.iter().chain(&test).copied().collect();
        all.sort_unstable();
        assert_eq!(all, (0..10).collect::<Vec<_>>());
    }

    #[test]
    fn split_floor_behaviour() {
        let (train, test) = holdout_split(7, 0.5, 1).unwrap();
        assert_eq!(train.len(), 3); // floor(3.5)
        assert_eq!(test.len(), 4);
    }

    #[test]
    fn same_seed_same_partition() {
        assert_eq!(
            holdout_split(50, 0.6, 9).unwrap(),
            holdout_split(50, 0.6, 9).unwrap()
        );
        assert_ne!(
            holdout_split(50, 0.6, 9).unwrap(),
            holdout_split(50, 0.6, 10).unwrap()
        );
    }

    #[test]
    fn degenerate_splits_are_rejected() {
        assert!(holdout_split(1, 0.5, 0).is_err());
        assert!(holdout_split(10, 0.0, 0).is_err());
        assert!(holdout_split(10, 1.0, 0).is_err());
        assert!(holdout_split(3, 0.1, 0).is_err()); // floor -> 0 train
    }

    #[test]
    fn standard_plan_cycles_ratios() {
        let plan = SplitPlan::standard(100);
        assert_eq!(plan.len(), 10);
        let ratios: Vec<f64> = plan.runs.iter().map(|r| r.ratio).collect();
        assert_eq!(
            ratios,
            vec![0.7, 0.7, 0.7, 0.7, 0.6, 0.6, 0.6, 0.5, 0.5, 0.5]
        );
        assert_eq!(plan.runs[0].seed, 101);
        assert_eq!(plan.runs[9].seed, 110);
    }

    #[test]
    fn plan_rejects_bad_ratio() {
        assert!(SplitPlan::new(vec![SplitRun { ratio: 1.5, seed: 0 }]).is_err());
        assert!(SplitPlan::new(vec![]).is_err());
    }
}
