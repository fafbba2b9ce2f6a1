use crate::error::{Error, Result};
use crate::math::{squared_distance, Tensor};
use crate::svm::SvmConfig;

/// Alphas within this distance of a box edge count as sitting on it when
/// classifying points for the KKT conditions.
const ALPHA_EDGE: f64 = 1e-8;

/// Minimum dual step worth applying; smaller proposals are numerical noise
/// and would let the solver spin without measurable progress.
const MIN_STEP: f64 = 1e-12;

/// `exp(-gamma * ||x - z||^2)`.
pub fn rbf_kernel(x: &[f64], z: &[f64], gamma: f64) -> Result<f64> {
    if x.len() != z.len() {
        return Err(Error::Shape(format!(
            "kernel arguments have lengths {} and {}",
            x.len(),
            z.len()
        )));
    }
    Ok((-gamma * squared_distance(x, z)).exp())
}

/// Full dual solution of one binary problem: one alpha per training sample
/// plus the bias, with a flag recording whether the solver reached a clean
/// sweep before the pass limit.
#[derive(Debug, Clone, PartialEq)]
pub struct DualSolution {
    pub alphas: Vec<f64>,
    pub bias: f64,
    pub converged: bool,
    pub sweeps: usize,
}

/// Outcome of re-checking the KKT conditions of a dual solution against its
/// training set.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct KktReport {
    /// Worst excess beyond the toleranced condition for any sample; a value
    /// <= 0 means every condition holds within tol.
    pub max_violation: f64,
    /// |sum alpha_i y_i|, which the updates keep at zero up to roundoff.
    pub balance: f64,
}

impl KktReport {
    pub fn passes(&self, tol: f64) -> bool {
        self.max_violation <= 0.0 && self.balance <= tol
    }
}

fn check_binary_inputs(features: &Tensor, labels: &[f64]) -> Result<()> {
    if features.rank() != 2 {
        return Err(Error::Shape(format!(
            "svm features must be [n, d], got {:?}",
            features.shape()
        )));
    }
    if features.dim(0) != labels.len() {
        return Err(Error::Dataset(format!(
            "{} labels for {} feature rows",
            labels.len(),
            features.dim(0)
        )));
    }
    if labels.iter().any(|&y| y != 1.0 && y != -1.0) {
        return Err(Error::Dataset("binary svm labels must be -1 or +1".into()));
    }
    let pos = labels.iter().filter(|&&y| y > 0.0).count();
    if pos == 0 || pos == labels.len() {
        return Err(Error::Dataset(
            "binary svm needs both classes present".into(),
        ));
    }
    Ok(())
}

struct SmoState<'a> {
    n: usize,
    c: f64,
    kernel: Vec<f64>,
    labels: &'a [f64],
    alphas: Vec<f64>,
    bias: f64,
    /// Cached prediction errors E_k = f(x_k) - y_k, updated incrementally
    /// after each pair step and rebuilt from scratch at every sweep start so
    /// drift never outlives a sweep.
    errors: Vec<f64>,
}

impl SmoState<'_> {
    fn refresh_errors(&mut self) {
        for k in 0..self.n {
            let mut f = self.bias;
            for ((&a, &y), row) in self
                .alphas
                .iter()
                .zip(self.labels)
                .zip(self.kernel.chunks_exact(self.n))
            {
                if a != 0.0 {
                    f += a * y * row[k];
                }
            }
            self.errors[k] = f - self.labels[k];
        }
    }

    /// KKT check against the cached errors, classifying alphas within
    /// ALPHA_EDGE of a box edge as sitting on it — the same rule the audit
    /// applies, so the solver never chases noise-level alphas it cannot fix.
    fn violates(&self, i: usize, tol: f64) -> bool {
        let r = self.labels[i] * self.errors[i];
        (r < -tol && self.alphas[i] < self.c - ALPHA_EDGE)
            || (r > tol && self.alphas[i] > ALPHA_EDGE)
    }

    /// Joint step on the pair (i, j). Returns false when the pair cannot
    /// move: degenerate box, non-negative curvature, or a step below noise.
    fn try_pair(&mut self, i: usize, j: usize) -> bool {
        let n = self.n;
        let (yi, yj) = (self.labels[i], self.labels[j]);
        let (ei, ej) = (self.errors[i], self.errors[j]);
        let (ai_old, aj_old) = (self.alphas[i], self.alphas[j]);
        let (lo, hi) = if yi != yj {
            (
                (aj_old - ai_old).max(0.0),
                (self.c + aj_old - ai_old).min(self.c),
            )
        } else {
            (
                (ai_old + aj_old - self.c).max(0.0),
                (ai_old + aj_old).min(self.c),
            )
        };
        if lo >= hi {
            return false;
        }
        let eta = 2.0 * self.kernel[i * n + j] - self.kernel[i * n + i] - self.kernel[j * n + j];
        if eta >= 0.0 {
            return false;
        }
        let aj_new = (aj_old - yj * (ei - ej) / eta).clamp(lo, hi);
        if (aj_new - aj_old).abs() < MIN_STEP {
            return false;
        }
        // In exact arithmetic the paired update stays inside the box; the
        // clamp only strips roundoff so the 0 <= alpha <= C invariant holds
        // bit-for-bit.
        let ai_new = (ai_old + yi * yj * (aj_old - aj_new)).clamp(0.0, self.c);
        let di = yi * (ai_new - ai_old);
        let dj = yj * (aj_new - aj_old);
        let b1 = self.bias - ei - di * self.kernel[i * n + i] - dj * self.kernel[i * n + j];
        let b2 = self.bias - ej - di * self.kernel[i * n + j] - dj * self.kernel[j * n + j];
        let new_bias = if ai_new > 0.0 && ai_new < self.c {
            b1
        } else if aj_new > 0.0 && aj_new < self.c {
            b2
        } else {
            0.5 * (b1 + b2)
        };
        let db = new_bias - self.bias;
        for (k, e) in self.errors.iter_mut().enumerate() {
            *e += di * self.kernel[i * n + k] + dj * self.kernel[j * n + k] + db;
        }
        self.alphas[i] = ai_new;
        self.alphas[j] = aj_new;
        self.bias = new_bias;
        true
    }
}

/// Sequential minimal optimization with a deterministic working set: sweep
/// samples in order, take each KKT violator as the first index, and pair it
/// with the sample whose cached error differs most (lowest index on ties).
/// When that pair cannot move, the remaining partners are tried in index
/// order so a violator is never silently dropped. A sweep that finds no
/// violator means the KKT conditions hold within `tol` and the solver stops;
/// exhausting `max_passes` sweeps — or stalling with violators that no
/// partner can fix — returns `converged = false`.
pub fn smo_solve(features: &Tensor, labels: &[f64], cfg: &SvmConfig) -> Result<DualSolution> {
    cfg.validate()?;
    check_binary_inputs(features, labels)?;
    let n = labels.len();
    let d = features.dim(1);

    // Dense kernel matrix; the training sets this solver faces are small
    // enough that n^2 memory is the right trade for O(1) lookups.
    let mut kernel = vec![0.0; n * n];
    for i in 0..n {
        let xi = &features.values()[i * d..(i + 1) * d];
        kernel[i * n + i] = 1.0;
        for j in i + 1..n {
            let xj = &features.values()[j * d..(j + 1) * d];
            let k = (-cfg.gamma * squared_distance(xi, xj)).exp();
            kernel[i * n + j] = k;
            kernel[j * n + i] = k;
        }
    }

    let mut state = SmoState {
        n,
        c: cfg.c,
        kernel,
        labels,
        alphas: vec![0.0; n],
        bias: 0.0,
        errors: vec![0.0; n],
    };
    let mut converged = false;
    let mut sweeps = 0;

    while sweeps < cfg.max_passes {
        sweeps += 1;
        state.refresh_errors();
        let mut violators = 0usize;
        let mut changed = 0usize;
        for i in 0..n {
            if !state.violates(i, cfg.tol) {
                continue;
            }
            violators += 1;
            // Second index: largest |E_i - E_j|, lowest index on ties.
            let ei = state.errors[i];
            let mut heuristic = usize::MAX;
            let mut best = -1.0;
            for (cand, &e) in state.errors.iter().enumerate() {
                if cand == i {
                    continue;
                }
                let gap = (ei - e).abs();
                if gap > best {
                    best = gap;
                    heuristic = cand;
                }
            }
            if heuristic == usize::MAX {
                continue;
            }
            if state.try_pair(i, heuristic) {
                changed += 1;
                continue;
            }
            for j in 0..n {
                if j != i && j != heuristic && state.try_pair(i, j) {
                    changed += 1;
                    break;
                }
            }
        }
        if violators == 0 {
            converged = true;
            break;
        }
        if changed == 0 {
            // Stuck: the state is a fixed point of the sweep, so further
            // passes cannot help.
            break;
        }
    }

    Ok(DualSolution {
        alphas: state.alphas,
        bias: state.bias,
        converged,
        sweeps,
    })
}

impl DualSolution {
    /// Re-evaluate the KKT conditions against the training data:
    /// `alpha = 0  => y f(x) >= 1 - tol`,
    /// `0 < alpha < C => |y f(x) - 1| <= tol`,
    /// `alpha = C  => y f(x) <= 1 + tol`,
    /// plus the balance constraint `sum alpha_i y_i = 0`.
    pub fn kkt_report(&self, features: &Tensor, labels: &[f64], cfg: &SvmConfig) -> KktReport {
        let n = labels.len();
        let d = features.dim(1);
        let mut max_violation = f64::NEG_INFINITY;
        for i in 0..n {
            let xi = &features.values()[i * d..(i + 1) * d];
            let mut f = self.bias;
            for ((&a, &y), xj) in self
                .alphas
                .iter()
                .zip(labels)
                .zip(features.values().chunks_exact(d))
            {
                if a != 0.0 {
                    f += a * y * (-cfg.gamma * squared_distance(xi, xj)).exp();
                }
            }
            let margin = labels[i] * f;
            let a = self.alphas[i];
            let violation = if a <= ALPHA_EDGE {
                (1.0 - cfg.tol) - margin
            } else if a >= cfg.c - ALPHA_EDGE {
                margin - (1.0 + cfg.tol)
            } else {
                (margin - 1.0).abs() - cfg.tol
            };
            max_violation = max_violation.max(violation);
        }
        let balance: f64 = self
            .alphas
            .iter()
            .zip(labels)
            .map(|(a, y)| a * y)
            .sum::<f64>()
            .abs();
        KktReport {
            max_violation,
            balance,
        }
    }
}

/// A trained binary machine reduced to its support vectors.
#[derive(Debug, Clone, PartialEq)]
pub struct BinarySvmModel {
    /// Support-vector coordinates, row-major `[len / dims, dims]`.
    support: Vec<f64>,
    /// One `alpha_i * y_i` per support vector.
    coef: Vec<f64>,
    dims: usize,
    bias: f64,
    gamma: f64,
    converged: bool,
}

impl BinarySvmModel {
    pub(crate) fn from_solution(
        features: &Tensor,
        labels: &[f64],
        solution: &DualSolution,
        gamma: f64,
    ) -> Self {
        let d = features.dim(1);
        let mut support = Vec::new();
        let mut coef = Vec::new();
        for (i, &a) in solution.alphas.iter().enumerate() {
            // Alphas within ALPHA_EDGE of zero count as zero, matching the
            // KKT classification, so noise-level rows never become support
            // vectors.
            if a > ALPHA_EDGE {
                support.extend_from_slice(&features.values()[i * d..(i + 1) * d]);
                coef.push(a * labels[i]);
            }
        }
        BinarySvmModel {
            support,
            coef,
            dims: d,
            bias: solution.bias,
            gamma,
            converged: solution.converged,
        }
    }

    pub(crate) fn from_raw(
        support: Vec<f64>,
        coef: Vec<f64>,
        dims: usize,
        bias: f64,
        gamma: f64,
        converged: bool,
    ) -> Result<Self> {
        if dims == 0 || support.len() != coef.len() * dims {
            return Err(Error::Shape(format!(
                "support matrix of {} values does not hold {} rows of {dims}",
                support.len(),
                coef.len()
            )));
        }
        Ok(BinarySvmModel {
            support,
            coef,
            dims,
            bias,
            gamma,
            converged,
        })
    }

    pub fn support_count(&self) -> usize {
        self.coef.len()
    }

    pub fn dims(&self) -> usize {
        self.dims
    }

    pub fn bias(&self) -> f64 {
        self.bias
    }

    pub fn gamma(&self) -> f64 {
        self.gamma
    }

    /// False when the solver hit its sweep cap before a clean pass; the
    /// model still predicts, but its KKT guarantees are void.
    pub fn converged(&self) -> bool {
        self.converged
    }

    pub(crate) fn support_values(&self) -> &[f64] {
        &self.support
    }

    pub(crate) fn coefficients(&self) -> &[f64] {
        &self.coef
    }

    #[cfg(test)]
    pub(crate) fn scaled(&self, factor: f64) -> Self {
        BinarySvmModel {
            support: self.support.clone(),
            coef: self.coef.iter().map(|c| c * factor).collect(),
            dims: self.dims,
            bias: self.bias * factor,
            gamma: self.gamma,
            converged: self.converged,
        }
    }
}

/// `f(x) = sum_i coef_i K(sv_i, x) + b`.
pub fn svm_decision(model: &BinarySvmModel, x: &[f64]) -> Result<f64> {
    if x.len() != model.dims {
        return Err(Error::Shape(format!(
            "svm input has {} features, model expects {}",
            x.len(),
            model.dims
        )));
    }
    let mut f = model.bias;
    for (row, c) in model.support.chunks_exact(model.dims).zip(&model.coef) {
        f += c * (-model.gamma * squared_distance(row, x)).exp();
    }
    Ok(f)
}

/// Signed prediction; the boundary itself maps to `+1`.
pub fn svm_predict_binary(model: &BinarySvmModel, x: &[f64]) -> Result<i8> {
    Ok(if svm_decision(model, x)? >= 0.0 { 1 } else { -1 })
}

/// Solve the dual and compress the result into a predictor.
pub fn smo_train(features: &Tensor, labels: &[f64], cfg: &SvmConfig) -> Result<BinarySvmModel> {
    let solution = smo_solve(features, labels, cfg)?;
    Ok(BinarySvmModel::from_solution(
        features, labels, &solution, cfg.gamma,
    ))
}
