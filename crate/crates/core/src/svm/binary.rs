//! Two-class soft-margin SVM trained on the dual by SMO.
//!
//! The dual is
//!
//! ```text
//! max  W(a) = sum_i a_i - 1/2 sum_ij a_i a_j y_i y_j K(x_i, x_j)
//! s.t. 0 <= a_i <= C,  sum_i a_i y_i = 0
//! ```
//!
//! Each SMO step picks the maximal violating pair (the index in the "up" set
//! with the largest `-y G` and the index in the "low" set with the smallest)
//! and solves the two-variable subproblem in closed form.

use serde::{Deserialize, Serialize};

use super::kernel::{Kernel, KernelSpec};
use crate::error::{Error, Result};

/// Curvature floor for non-positive-definite pairs.
const TAU: f64 = 1e-12;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct TrainConfig {
    pub c: f64,
    pub kernel: KernelSpec,
    /// KKT tolerance.
    pub tolerance: f64,
    /// Iteration budget, in units of the training set size.
    pub max_passes: usize,
}

impl Default for TrainConfig {
    fn default() -> Self {
        TrainConfig {
            c: 10.0,
            kernel: KernelSpec::default(),
            tolerance: 1e-3,
            max_passes: 1000,
        }
    }
}

impl TrainConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.c > 0.0 && self.c.is_finite()) {
            return Err(Error::InvalidParam(format!("C must be > 0, got {}", self.c)));
        }
        if !(self.tolerance > 0.0) {
            return Err(Error::InvalidParam(format!(
                "tolerance must be > 0, got {}",
                self.tolerance
            )));
        }
        if self.max_passes == 0 {
            return Err(Error::InvalidParam("max_passes must be positive".into()));
        }
        if let KernelSpec::Rbf { gamma: Some(g) } = self.kernel {
            Kernel::Rbf { gamma: g }.validate()?;
        }
        Ok(())
    }
}

/// Full dual solution over every training point.
#[derive(Clone, Debug, PartialEq)]
pub struct DualSolution {
    pub alpha: Vec<f64>,
    pub bias: f64,
    pub iterations: usize,
    pub converged: bool,
}

/// `W(a)` evaluated from scratch.
pub fn dual_objective<X: AsRef<[f64]>>(xs: &[X], ys: &[i8], alpha: &[f64], kernel: &Kernel) -> f64 {
    let n = xs.len();
    let mut quad = 0.0;
    for i in 0..n {
        if alpha[i] == 0.0 {
            continue;
        }
        for j in 0..n {
            if alpha[j] == 0.0 {
                continue;
            }
            quad += alpha[i] * alpha[j] * (ys[i] * ys[j]) as f64 * kernel.eval(xs[i].as_ref(), xs[j].as_ref());
        }
    }
    alpha.iter().sum::<f64>() - 0.5 * quad
}

/// Largest KKT violation of a dual solution, recomputing every margin from the kernel.
pub fn kkt_violation<X: AsRef<[f64]>>(xs: &[X], ys: &[i8], alpha: &[f64], bias: f64, kernel: &Kernel, c: f64) -> f64 {
    let n = xs.len();
    let mut worst: f64 = 0.0;
    for i in 0..n {
        let f: f64 = (0..n)
            .filter(|&j| alpha[j] != 0.0)
            .map(|j| alpha[j] * ys[j] as f64 * kernel.eval(xs[j].as_ref(), xs[i].as_ref()))
            .sum::<f64>()
            + bias;
        let m = ys[i] as f64 * f - 1.0;
        let v = if alpha[i] <= 0.0 {
            (-m).max(0.0)
        } else if alpha[i] >= c {
            m.max(0.0)
        } else {
            m.abs()
        };
        worst = worst.max(v);
    }
    worst
}

fn validate_data<X: AsRef<[f64]>>(xs: &[X], ys: &[i8]) -> Result<()> {
    if xs.len() != ys.len() {
        return Err(Error::Input(format!("{} samples but {} labels", xs.len(), ys.len())));
    }
    let dims = xs.first().map(|x| x.as_ref().len()).unwrap_or(0);
    for (i, x) in xs.iter().enumerate() {
        let x = x.as_ref();
        if x.len() != dims {
            return Err(Error::Input(format!(
                "sample {i} has {} dims, expected {dims}",
                x.len()
            )));
        }
        if x.iter().any(|v| !v.is_finite()) {
            return Err(Error::Input(format!("sample {i} has a non-finite value")));
        }
    }
    if let Some(bad) = ys.iter().find(|&&y| y != 1 && y != -1) {
        return Err(Error::Input(format!("labels must be +1 or -1, got {bad}")));
    }
    if !ys.contains(&1) || !ys.contains(&-1) {
        return Err(Error::Training("need at least one sample of each label".into()));
    }
    Ok(())
}

/// Solves the dual with SMO. Stops when the maximal violating pair's gap drops
/// below half of `tolerance` (so recomputed KKT residuals stay under `tolerance`)
/// or after `max_passes * n` pair updates.
pub fn solve_dual<X: AsRef<[f64]>>(
    xs: &[X],
    ys: &[i8],
    kernel: &Kernel,
    c: f64,
    tolerance: f64,
    max_passes: usize,
) -> Result<DualSolution> {
    validate_data(xs, ys)?;
    kernel.validate()?;
    let n = xs.len();
    let y: Vec<f64> = ys.iter().map(|&v| v as f64).collect();
    let k = kernel.gram(xs);
    let eps = 0.5 * tolerance;
    let budget = max_passes.saturating_mul(n.max(10));

    let mut alpha = vec![0.0; n];
    let mut grad = vec![-1.0; n];
    let in_up = |a: f64, y: f64| (y > 0.0 && a < c) || (y < 0.0 && a > 0.0);
    let in_low = |a: f64, y: f64| (y > 0.0 && a > 0.0) || (y < 0.0 && a < c);

    let mut iterations = 0;
    let mut converged = false;
    let (mut up_max, mut low_min);
    loop {
        up_max = f64::NEG_INFINITY;
        low_min = f64::INFINITY;
        let (mut i, mut j) = (usize::MAX, usize::MAX);
        for t in 0..n {
            let v = -y[t] * grad[t];
            if in_up(alpha[t], y[t]) && v > up_max {
                up_max = v;
                i = t;
            }
            if in_low(alpha[t], y[t]) && v < low_min {
                low_min = v;
                j = t;
            }
        }
        if up_max - low_min < eps {
            converged = true;
            break;
        }
        if iterations >= budget {
            break;
        }
        iterations += 1;

        let eta = (k[i * n + i] + k[j * n + j] - 2.0 * k[i * n + j]).max(TAU);
        let room_i = if y[i] > 0.0 { c - alpha[i] } else { alpha[i] };
        let room_j = if y[j] > 0.0 { alpha[j] } else { c - alpha[j] };
        let t = ((up_max - low_min) / eta).min(room_i).min(room_j);

        let (old_i, old_j) = (alpha[i], alpha[j]);
        alpha[i] = if t == room_i {
            if y[i] > 0.0 {
                c
            } else {
                0.0
            }
        } else {
            old_i + y[i] * t
        };
        alpha[j] = if t == room_j {
            if y[j] > 0.0 {
                0.0
            } else {
                c
            }
        } else {
            old_j - y[j] * t
        };
        let (di, dj) = (alpha[i] - old_i, alpha[j] - old_j);
        for s in 0..n {
            grad[s] += y[s] * (y[i] * k[s * n + i] * di + y[j] * k[s * n + j] * dj);
        }
    }

    let free: Vec<f64> = (0..n)
        .filter(|&t| alpha[t] > 0.0 && alpha[t] < c)
        .map(|t| -y[t] * grad[t])
        .collect();
    let bias = if free.is_empty() {
        (up_max + low_min) / 2.0
    } else {
        free.iter().sum::<f64>() / free.len() as f64
    };

    Ok(DualSolution {
        alpha,
        bias,
        iterations,
        converged,
    })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TrainMeta {
    pub iterations: usize,
    pub converged: bool,
    pub max_kkt_violation: f64,
    pub objective: f64,
    pub c: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub warning: Option<String>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BinaryModel {
    pub label_pos: u32,
    pub label_neg: u32,
    pub kernel: Kernel,
    pub bias: f64,
    /// `alpha_i * y_i` for each support vector.
    pub dual_coefs: Vec<f64>,
    pub support_vectors: Vec<Vec<f64>>,
    pub meta: TrainMeta,
}

impl BinaryModel {
    /// Raw margin `sum_i coef_i K(s_i, x) + b`.
    pub fn decide(&self, x: &[f64]) -> f64 {
        self.support_vectors
            .iter()
            .zip(&self.dual_coefs)
            .map(|(sv, coef)| coef * self.kernel.eval(sv, x))
            .sum::<f64>()
            + self.bias
    }

    /// Positive label on `f(x) >= 0`.
    pub fn classify(&self, x: &[f64]) -> u32 {
        if self.decide(x) >= 0.0 {
            self.label_pos
        } else {
            self.label_neg
        }
    }
}

/// Trains on `ys` in {-1, +1}. The model's positive label is 1 and negative label 0.
pub fn train_binary<X: AsRef<[f64]>>(xs: &[X], ys: &[i8], cfg: &TrainConfig) -> Result<BinaryModel> {
    cfg.validate()?;
    let kernel = cfg.kernel.resolve(xs);
    train_with_kernel(xs, ys, &kernel, cfg, 1, 0)
}

pub(crate) fn train_with_kernel<X: AsRef<[f64]>>(
    xs: &[X],
    ys: &[i8],
    kernel: &Kernel,
    cfg: &TrainConfig,
    label_pos: u32,
    label_neg: u32,
) -> Result<BinaryModel> {
    let sol = solve_dual(xs, ys, kernel, cfg.c, cfg.tolerance, cfg.max_passes)?;
    let max_kkt_violation = kkt_violation(xs, ys, &sol.alpha, sol.bias, kernel, cfg.c);
    let objective = dual_objective(xs, ys, &sol.alpha, kernel);
    let (support_vectors, dual_coefs) = sol
        .alpha
        .iter()
        .enumerate()
        .filter(|(_, &a)| a > 0.0)
        .map(|(i, &a)| (xs[i].as_ref().to_vec(), a * ys[i] as f64))
        .unzip();
    let warning = (!sol.converged).then(|| {
        format!(
            "SMO stopped after {} updates without reaching tolerance {}",
            sol.iterations, cfg.tolerance
        )
    });
    Ok(BinaryModel {
        label_pos,
        label_neg,
        kernel: *kernel,
        bias: sol.bias,
        dual_coefs,
        support_vectors,
        meta: TrainMeta {
            iterations: sol.iterations,
            converged: sol.converged,
            max_kkt_violation,
            objective,
            c: cfg.c,
            warning,
        },
    })
}
