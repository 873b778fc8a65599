//! Gaussian-process regression with a unit RBF kernel.
//!
//! Inputs are gene vectors normalized to [0, 1] per dimension. The model
//! keeps the lower-triangular Cholesky factor of `K + sigma^2 I` and the
//! solved weight vector, so prediction is two triangular solves. Leave-one-
//! out MSE uses the closed form `residual_i = alpha_i / [K^-1]_ii`, which is
//! algebraically identical to refitting without point i.

use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;
use core::fmt;

#[derive(Debug, Clone, PartialEq)]
pub enum GpError {
    DimensionMismatch { expected: usize, got: usize },
    /// Kernel matrix could not be factorized even after jitter escalation,
    /// or duplicate inputs were supplied with zero noise.
    SingularKernel,
    EmptyTrainingSet,
    InvalidHyperparam(String),
}

impl fmt::Display for GpError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            GpError::DimensionMismatch { expected, got } => {
                write!(f, "dimension mismatch: expected {expected}, got {got}")
            }
            GpError::SingularKernel => write!(f, "kernel matrix is singular"),
            GpError::EmptyTrainingSet => write!(f, "at least one observation required"),
            GpError::InvalidHyperparam(m) => write!(f, "invalid hyperparameter: {m}"),
        }
    }
}

/// RBF kernel `exp(-gamma * ||x - y||^2)`.
pub fn kernel(x: &[f64], y: &[f64], gamma: f64) -> Result<f64, GpError> {
    if x.len() != y.len() {
        return Err(GpError::DimensionMismatch {
            expected: x.len(),
            got: y.len(),
        });
    }
    Ok(libm::exp(-gamma * sqdist(x, y)))
}

fn sqdist(x: &[f64], y: &[f64]) -> f64 {
    x.iter()
        .zip(y)
        .map(|(a, b)| {
            let d = a - b;
            d * d
        })
        .sum()
}

/// Predictive mean and variance at one point.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Prediction {
    pub mean: f64,
    pub variance: f64,
}

impl Prediction {
    pub fn std_dev(&self) -> f64 {
        libm::sqrt(self.variance)
    }
}

/// A fitted Gaussian-process surrogate. Immutable after `fit`; concurrent
/// `predict` calls are safe.
#[derive(Debug, Clone)]
pub struct GpModel {
    inputs: Vec<Vec<f64>>,
    targets: Vec<f64>,
    gamma: f64,
    noise_var: f64,
    /// Lower-triangular factor of K + (noise_var + jitter) I, row-major.
    chol: Vec<f64>,
    alpha: Vec<f64>,
    pub jitter: f64,
    /// Prior mean added back to predictions; 0 unless fit with centering.
    mean_offset: f64,
}

const JITTER_START: f64 = 1e-10;
const JITTER_MAX: f64 = 1e-4;

impl GpModel {
    pub fn inputs(&self) -> &[Vec<f64>] {
        &self.inputs
    }
    pub fn targets(&self) -> &[f64] {
        &self.targets
    }
    pub fn gamma(&self) -> f64 {
        self.gamma
    }
    pub fn noise_var(&self) -> f64 {
        self.noise_var
    }
    pub fn len(&self) -> usize {
        self.targets.len()
    }
    pub fn is_empty(&self) -> bool {
        self.targets.is_empty()
    }
    pub fn dims(&self) -> usize {
        self.inputs[0].len()
    }
    pub fn mean_offset(&self) -> f64 {
        self.mean_offset
    }

    /// Rebind the prior-mean offset (used when reloading a serialized
    /// centered model: refit on the stored residual targets, then restore
    /// the offset).
    pub fn with_mean_offset(mut self, offset: f64) -> Self {
        self.mean_offset = offset;
        self
    }

    /// Fit with target mean-centering: the empirical target mean becomes the
    /// prior mean and the GP models the residuals. `targets()` then returns
    /// residuals; predictions include the offset.
    pub fn fit_centered(
        inputs: Vec<Vec<f64>>,
        targets: Vec<f64>,
        gamma: f64,
        noise_var: f64,
    ) -> Result<GpModel, GpError> {
        if targets.is_empty() {
            return Err(GpError::EmptyTrainingSet);
        }
        let offset = targets.iter().sum::<f64>() / targets.len() as f64;
        let residuals = targets.iter().map(|t| t - offset).collect();
        Ok(Self::fit(inputs, residuals, gamma, noise_var)?.with_mean_offset(offset))
    }

    /// Fit on normalized inputs. Deterministic; escalates diagonal jitter
    /// from 1e-10 by factors of 10 up to 1e-4 if factorization fails.
    pub fn fit(
        inputs: Vec<Vec<f64>>,
        targets: Vec<f64>,
        gamma: f64,
        noise_var: f64,
    ) -> Result<GpModel, GpError> {
        if inputs.is_empty() || inputs.len() != targets.len() {
            return Err(GpError::EmptyTrainingSet);
        }
        if !(gamma > 0.0) {
            return Err(GpError::InvalidHyperparam(String::from("gamma must be > 0")));
        }
        if !(noise_var >= 0.0) {
            return Err(GpError::InvalidHyperparam(String::from(
                "noise_var must be >= 0",
            )));
        }
        let dims = inputs[0].len();
        if inputs.iter().any(|x| x.len() != dims) {
            return Err(GpError::DimensionMismatch {
                expected: dims,
                got: inputs.iter().map(|x| x.len()).find(|&l| l != dims).unwrap(),
            });
        }
        let n = inputs.len();
        // Exact duplicates with zero noise make the system rank deficient;
        // jitter would mask that numerically rather than fix it.
        if noise_var == 0.0 {
            for i in 0..n {
                for j in (i + 1)..n {
                    if inputs[i] == inputs[j] {
                        return Err(GpError::SingularKernel);
                    }
                }
            }
        }
        let mut base = vec![0.0f64; n * n];
        for i in 0..n {
            for j in 0..=i {
                let k = libm::exp(-gamma * sqdist(&inputs[i], &inputs[j]));
                base[i * n + j] = k;
                base[j * n + i] = k;
            }
        }
        let mut jitter = 0.0f64;
        loop {
            let mut m = base.clone();
            for i in 0..n {
                m[i * n + i] += noise_var + jitter;
            }
            if cholesky_in_place(&mut m, n) {
                let alpha = chol_solve(&m, n, &targets);
                return Ok(GpModel {
                    inputs,
                    targets,
                    gamma,
                    noise_var,
                    chol: m,
                    alpha,
                    jitter,
                    mean_offset: 0.0,
                });
            }
            jitter = if jitter == 0.0 {
                JITTER_START
            } else {
                jitter * 10.0
            };
            if jitter > JITTER_MAX {
                return Err(GpError::SingularKernel);
            }
        }
    }

    /// Predictive mean and (latent) variance at `x`. Variance is clamped
    /// non-negative and never exceeds the unit prior variance.
    pub fn predict(&self, x: &[f64]) -> Result<Prediction, GpError> {
        let dims = self.dims();
        if x.len() != dims {
            return Err(GpError::DimensionMismatch {
                expected: dims,
                got: x.len(),
            });
        }
        let n = self.len();
        let mut k = Vec::with_capacity(n);
        for xi in &self.inputs {
            k.push(libm::exp(-self.gamma * sqdist(xi, x)));
        }
        let mean: f64 =
            self.mean_offset + k.iter().zip(&self.alpha).map(|(a, b)| a * b).sum::<f64>();
        // variance = k(x,x) - v.v  where  L v = k
        let v = forward_solve(&self.chol, n, &k);
        let variance = (1.0 - v.iter().map(|a| a * a).sum::<f64>()).max(0.0);
        Ok(Prediction { mean, variance })
    }

    /// Diagonal of (K + sigma^2 I)^-1, via the stored factor.
    fn inverse_diagonal(&self) -> Vec<f64> {
        let n = self.len();
        let mut diag = vec![0.0f64; n];
        // Column j of L^-1 by forward substitution on e_j; then
        // [K^-1]_ii = sum_j (L^-1)_ji^2 accumulated column-wise.
        let mut col = vec![0.0f64; n];
        for j in 0..n {
            for x in col.iter_mut() {
                *x = 0.0;
            }
            for i in j..n {
                let mut s = if i == j { 1.0 } else { 0.0 };
                for k in j..i {
                    s -= self.chol[i * n + k] * col[k];
                }
                col[i] = s / self.chol[i * n + i];
            }
            for i in j..n {
                diag[j] += col[i] * col[i];
            }
        }
        diag
    }

    /// Leave-one-out residuals via the closed form; avoids n refits.
    pub fn loo_residuals(&self) -> Vec<f64> {
        let diag = self.inverse_diagonal();
        self.alpha
            .iter()
            .zip(&diag)
            .map(|(a, d)| a / d)
            .collect()
    }
}

/// Leave-one-out mean squared error of a GP with the given hyperparameters.
/// Equals the mean squared residual of n hold-one-out refits.
pub fn loo_mse(
    inputs: &[Vec<f64>],
    targets: &[f64],
    gamma: f64,
    noise_var: f64,
) -> Result<f64, GpError> {
    if inputs.len() < 2 {
        return Err(GpError::EmptyTrainingSet);
    }
    let model = GpModel::fit(inputs.to_vec(), targets.to_vec(), gamma, noise_var)?;
    let res = model.loo_residuals();
    Ok(res.iter().map(|r| r * r).sum::<f64>() / res.len() as f64)
}

/// The gamma grid used by [`tune_hyperparams`]: 13 log-spaced points in
/// [1e-3, 1e3].
pub fn gamma_grid() -> Vec<f64> {
    (0..13)
        .map(|i| libm::pow(10.0, -3.0 + 0.5 * i as f64))
        .collect()
}

/// The noise-variance grid used by [`tune_hyperparams`].
pub const NOISE_GRID: [f64; 4] = [1e-6, 1e-4, 1e-2, 1e-1];

/// Grid search minimizing LOO MSE. Ties break toward smaller gamma, then
/// smaller noise variance. Grid cells whose factorization fails are skipped;
/// errors only if every cell fails.
pub fn tune_hyperparams(inputs: &[Vec<f64>], targets: &[f64]) -> Result<(f64, f64), GpError> {
    if inputs.len() < 4 {
        return Err(GpError::EmptyTrainingSet);
    }
    let mut best: Option<(f64, f64, f64)> = None;
    for &gamma in &gamma_grid() {
        for &noise in &NOISE_GRID {
            let mse = match loo_mse(inputs, targets, gamma, noise) {
                Ok(m) => m,
                Err(_) => continue,
            };
            let better = match best {
                None => true,
                Some((_, _, b)) => mse < b,
            };
            if better {
                best = Some((gamma, noise, mse));
            }
        }
    }
    best.map(|(g, n, _)| (g, n)).ok_or(GpError::SingularKernel)
}

/// In-place Cholesky of a row-major symmetric matrix; lower triangle holds L
/// on success. Returns false on a non-positive pivot.
fn cholesky_in_place(m: &mut [f64], n: usize) -> bool {
    for i in 0..n {
        for j in 0..=i {
            let mut s = m[i * n + j];
            for k in 0..j {
                s -= m[i * n + k] * m[j * n + k];
            }
            if i == j {
                if s <= 0.0 || !s.is_finite() {
                    return false;
                }
                m[i * n + i] = libm::sqrt(s);
            } else {
                m[i * n + j] = s / m[j * n + j];
            }
        }
        for j in (i + 1)..n {
            m[i * n + j] = 0.0;
        }
    }
    true
}

fn forward_solve(l: &[f64], n: usize, b: &[f64]) -> Vec<f64> {
    let mut x = vec![0.0f64; n];
    for i in 0..n {
        let mut s = b[i];
        for k in 0..i {
            s -= l[i * n + k] * x[k];
        }
        x[i] = s / l[i * n + i];
    }
    x
}

fn backward_solve(l: &[f64], n: usize, b: &[f64]) -> Vec<f64> {
    // Solves L^T x = b.
    let mut x = vec![0.0f64; n];
    for i in (0..n).rev() {
        let mut s = b[i];
        for k in (i + 1)..n {
            s -= l[k * n + i] * x[k];
        }
        x[i] = s / l[i * n + i];
    }
    x
}

fn chol_solve(l: &[f64], n: usize, b: &[f64]) -> Vec<f64> {
    let y = forward_solve(l, n, b);
    backward_solve(l, n, &y)
}
