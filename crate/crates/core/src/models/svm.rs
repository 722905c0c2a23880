//! Soft-margin support vector classifier trained by sequential minimal
//! optimisation over a precomputed kernel matrix.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::kernel::{eval_unchecked, Gamma, KernelKind};
use super::{both_classes, check_training, Matrix, ModelError};

/// Relative size below which an update of a multiplier is ignored.
const STEP_EPS: f64 = 1e-3;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SvmParams {
    pub kernel: KernelKind,
    pub gamma: Gamma,
    /// Box constraint on the multipliers.
    pub c: f64,
    /// KKT slack.
    pub tolerance: f64,
    /// Consecutive passes without updates required to stop.
    pub max_passes: usize,
    /// Hard cap on passes over the training set.
    pub max_iterations: usize,
    pub seed: u64,
}

impl Default for SvmParams {
    fn default() -> Self {
        Self {
            kernel: KernelKind::Rbf,
            gamma: Gamma::Auto,
            c: 1.0,
            tolerance: 1e-3,
            max_passes: 10,
            max_iterations: 1000,
            seed: 0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SvmModel {
    kernel: KernelKind,
    gamma: f64,
    support_vectors: Vec<Vec<f64>>,
    /// `alpha_i * y_i` with `y_i` in {-1, +1}, aligned with `support_vectors`.
    coefficients: Vec<f64>,
    bias: f64,
    alphas: Vec<f64>,
    passes: usize,
    converged: bool,
}

impl SvmModel {
    pub fn decision(&self, row: &[f64]) -> f64 {
        self.support_vectors
            .iter()
            .zip(&self.coefficients)
            .map(|(sv, c)| c * eval_unchecked(self.kernel, self.gamma, sv, row))
            .sum::<f64>()
            + self.bias
    }

    /// Class 1 iff the decision value is strictly positive.
    pub fn predict_row(&self, row: &[f64]) -> u8 {
        u8::from(self.decision(row) > 0.0)
    }

    /// The resolved RBF width (unused by the linear kernel).
    pub fn gamma(&self) -> f64 {
        self.gamma
    }

    pub fn bias(&self) -> f64 {
        self.bias
    }

    /// Dual multipliers, one per training row.
    pub fn alphas(&self) -> &[f64] {
        &self.alphas
    }

    pub fn n_support(&self) -> usize {
        self.support_vectors.len()
    }

    pub fn passes(&self) -> usize {
        self.passes
    }

    pub fn converged(&self) -> bool {
        self.converged
    }
}

struct Smo<'a> {
    k: Vec<f64>,
    n: usize,
    y: Vec<f64>,
    alpha: Vec<f64>,
    err: Vec<f64>,
    b: f64,
    p: &'a SvmParams,
}

impl Smo<'_> {
    fn kern(&self, i: usize, j: usize) -> f64 {
        self.k[i * self.n + j]
    }

    fn take_step(&mut self, i: usize, j: usize) -> bool {
        if i == j {
            return false;
        }
        let c = self.p.c;
        let (ai, aj, yi, yj) = (self.alpha[i], self.alpha[j], self.y[i], self.y[j]);
        let (ei, ej) = (self.err[i], self.err[j]);
        let (lo, hi) = if yi != yj {
            ((aj - ai).max(0.0), (c + aj - ai).min(c))
        } else {
            ((ai + aj - c).max(0.0), (ai + aj).min(c))
        };
        if lo >= hi {
            return false;
        }
        let (kii, kjj, kij) = (self.kern(i, i), self.kern(j, j), self.kern(i, j));
        let eta = kii + kjj - 2.0 * kij;
        if eta <= 0.0 {
            return false;
        }
        let aj_new = (aj + yj * (ei - ej) / eta).clamp(lo, hi);
        if (aj_new - aj).abs() < STEP_EPS * (aj_new + aj + STEP_EPS) {
            return false;
        }
        // rounding can carry the paired update a hair outside the box
        let ai_new = (ai + yi * yj * (aj - aj_new)).clamp(0.0, c);
        let (dai, daj) = (ai_new - ai, aj_new - aj);
        let b1 = self.b - ei - yi * dai * kii - yj * daj * kij;
        let b2 = self.b - ej - yi * dai * kij - yj * daj * kjj;
        let b_new = if ai_new > 0.0 && ai_new < c {
            b1
        } else if aj_new > 0.0 && aj_new < c {
            b2
        } else {
            (b1 + b2) / 2.0
        };
        let db = b_new - self.b;
        for t in 0..self.n {
            self.err[t] += yi * dai * self.kern(i, t) + yj * daj * self.kern(j, t) + db;
        }
        self.alpha[i] = ai_new;
        self.alpha[j] = aj_new;
        self.b = b_new;
        true
    }

    fn examine(&mut self, i: usize, rng: &mut ChaCha8Rng) -> bool {
        let r = self.err[i] * self.y[i];
        let violates =
            (r < -self.p.tolerance && self.alpha[i] < self.p.c) || (r > self.p.tolerance && self.alpha[i] > 0.0);
        if !violates {
            return false;
        }
        // second-choice heuristic: largest |E_i - E_j|, lowest index on ties
        let ei = self.err[i];
        let mut best = None;
        for j in (0..self.n).filter(|&j| j != i) {
            let gap = (ei - self.err[j]).abs();
            if best.is_none_or(|(g, _)| gap > g) {
                best = Some((gap, j));
            }
        }
        if let Some((_, j)) = best {
            if self.take_step(i, j) {
                return true;
            }
        }
        let n = self.n;
        let offset = rng.random_range(0..n);
        (0..n).map(|s| (s + offset) % n).any(|j| self.take_step(i, j))
    }
}

fn check_svm_params(p: &SvmParams) -> Result<(), ModelError> {
    let bad = |m: &str| Err(ModelError::InvalidParams(m.into()));
    if !(p.c > 0.0 && p.c.is_finite()) {
        return bad("C must be finite and positive");
    }
    if !(p.tolerance >= 0.0 && p.tolerance.is_finite()) {
        return bad("tolerance must be finite and non-negative");
    }
    if p.max_passes == 0 || p.max_iterations == 0 {
        return bad("max_passes and max_iterations must be at least 1");
    }
    Ok(())
}

pub fn fit_svm(x: &Matrix, y: &[u8], p: &SvmParams) -> Result<SvmModel, ModelError> {
    check_training(x, y)?;
    check_svm_params(p)?;
    if !both_classes(y) {
        return Err(ModelError::SingleClassTraining);
    }
    let gamma = p.gamma.resolve(x.n_cols())?;
    let n = x.n_rows();
    let mut k = vec![0.0; n * n];
    for i in 0..n {
        for j in i..n {
            let v = eval_unchecked(p.kernel, gamma, x.row(i), x.row(j));
            k[i * n + j] = v;
            k[j * n + i] = v;
        }
    }
    let ys: Vec<f64> = y.iter().map(|&l| if l == 1 { 1.0 } else { -1.0 }).collect();
    let err = ys.iter().map(|v| -v).collect();
    let mut smo = Smo { k, n, y: ys, alpha: vec![0.0; n], err, b: 0.0, p };
    let mut rng = ChaCha8Rng::seed_from_u64(p.seed);
    let (mut passes, mut quiet) = (0, 0);
    while quiet < p.max_passes && passes < p.max_iterations {
        let mut changed = false;
        for i in 0..n {
            changed |= smo.examine(i, &mut rng);
        }
        passes += 1;
        quiet = if changed { 0 } else { quiet + 1 };
    }
    let converged = quiet >= p.max_passes;
    if !converged {
        log::warn!("SMO stopped after {passes} passes without converging");
    }
    let (support_vectors, coefficients) =
        (0..n).filter(|&i| smo.alpha[i] > 0.0).map(|i| (x.row(i).to_vec(), smo.alpha[i] * smo.y[i])).unzip();
    Ok(SvmModel {
        kernel: p.kernel,
        gamma,
        support_vectors,
        coefficients,
        bias: smo.b,
        alphas: smo.alpha,
        passes,
        converged,
    })
}
