use serde::{Deserialize, Serialize};

use super::ModelError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum KernelKind {
    /// `exp(-gamma * |a - b|^2)`
    Rbf,
    /// `a . b`
    Linear,
}

/// RBF width; `Auto` resolves to `1 / n_features` at fit time.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum Gamma {
    Value(f64),
    Auto,
}

impl Gamma {
    pub fn resolve(self, n_features: usize) -> Result<f64, ModelError> {
        match self {
            Gamma::Auto if n_features == 0 => {
                Err(ModelError::InvalidParams("gamma auto needs at least one feature".into()))
            }
            Gamma::Auto => Ok(1.0 / n_features as f64),
            Gamma::Value(g) if g > 0.0 && g.is_finite() => Ok(g),
            Gamma::Value(g) => Err(ModelError::InvalidParams(format!("gamma {g} must be finite and positive"))),
        }
    }
}

pub(crate) fn eval_unchecked(kind: KernelKind, gamma: f64, a: &[f64], b: &[f64]) -> f64 {
    match kind {
        KernelKind::Linear => a.iter().zip(b).map(|(x, y)| x * y).sum(),
        KernelKind::Rbf => {
            let d2: f64 = a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum();
            (-gamma * d2).exp()
        }
    }
}

pub fn kernel_eval(kind: KernelKind, gamma: f64, a: &[f64], b: &[f64]) -> Result<f64, ModelError> {
    if a.len() != b.len() {
        return Err(ModelError::DimensionMismatch { expected: a.len(), found: b.len() });
    }
    Ok(eval_unchecked(kind, gamma, a, b))
}
