//! Second-order gradient boosting on logistic loss.
//!
//! Scores live on the log-odds scale, starting from `ln(pos / neg)`. Each
//! round fits a regression tree to the per-row gradient `p - y` and Hessian
//! `p (1 - p)`, choosing splits by the regularised gain
//! `G_L^2/(H_L+lambda) + G_R^2/(H_R+lambda) - G^2/(H+lambda)` and setting
//! leaf values to `-G/(H+lambda)` scaled by the learning rate.

use serde::{Deserialize, Serialize};

use super::tree::{find_leaf, midpoint, Node};
use super::{both_classes, check_training, Matrix, ModelError};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum EvalMetric {
    Auc,
    Logloss,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BoostParams {
    pub n_estimators: usize,
    pub learning_rate: f64,
    pub max_depth: usize,
    /// L2 penalty on leaf values (lambda).
    pub leaf_regularization: f64,
    /// Smallest Hessian sum allowed in a child.
    pub min_child_weight: f64,
    pub eval_metric: EvalMetric,
    pub seed: u64,
}

impl Default for BoostParams {
    fn default() -> Self {
        Self {
            n_estimators: 100,
            learning_rate: 0.3,
            max_depth: 6,
            leaf_regularization: 1.0,
            min_child_weight: 1.0,
            eval_metric: EvalMetric::Logloss,
            seed: 0,
        }
    }
}

/// Training metrics after a round; entry 0 describes the prior alone.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RoundMetrics {
    pub logloss: f64,
    /// Value of the configured `eval_metric`.
    pub metric: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BoostedTrees {
    base_score: f64,
    trees: Vec<Vec<Node<f64>>>,
    history: Vec<RoundMetrics>,
}

impl BoostedTrees {
    pub fn base_score(&self) -> f64 {
        self.base_score
    }

    pub fn n_trees(&self) -> usize {
        self.trees.len()
    }

    pub fn history(&self) -> &[RoundMetrics] {
        &self.history
    }

    pub fn decision(&self, row: &[f64]) -> f64 {
        self.base_score + self.trees.iter().map(|t| *find_leaf(t, row)).sum::<f64>()
    }

    /// Class 1 iff the log-odds are strictly positive.
    pub fn predict_row(&self, row: &[f64]) -> u8 {
        u8::from(self.decision(row) > 0.0)
    }
}

fn sigmoid(z: f64) -> f64 {
    1.0 / (1.0 + (-z).exp())
}

/// Mean logistic loss of log-odds `scores`.
pub(crate) fn logloss(scores: &[f64], y: &[u8]) -> f64 {
    let total: f64 = scores
        .iter()
        .zip(y)
        .map(|(&s, &l)| {
            // log(1 + e^{-m}) with m the signed margin, computed stably
            let m = if l == 1 { s } else { -s };
            if m > 0.0 {
                (-m).exp().ln_1p()
            } else {
                -m + m.exp().ln_1p()
            }
        })
        .sum();
    total / y.len() as f64
}

/// Area under the ROC curve with tied scores counted as half.
pub(crate) fn auc(scores: &[f64], y: &[u8]) -> f64 {
    let mut order: Vec<usize> = (0..scores.len()).collect();
    order.sort_by(|&a, &b| scores[a].total_cmp(&scores[b]));
    let n_pos = y.iter().filter(|&&l| l == 1).count();
    let n_neg = y.len() - n_pos;
    if n_pos == 0 || n_neg == 0 {
        return 0.5;
    }
    // mid-ranks over tie groups
    let mut rank_sum = 0.0;
    let mut i = 0;
    while i < order.len() {
        let mut j = i;
        while j + 1 < order.len() && scores[order[j + 1]] == scores[order[i]] {
            j += 1;
        }
        let mid = (i + j) as f64 / 2.0 + 1.0;
        rank_sum += mid * order[i..=j].iter().filter(|&&k| y[k] == 1).count() as f64;
        i = j + 1;
    }
    (rank_sum - (n_pos * (n_pos + 1)) as f64 / 2.0) / (n_pos * n_neg) as f64
}

struct RegressionBuilder<'a> {
    x: &'a Matrix,
    grad: &'a [f64],
    hess: &'a [f64],
    p: &'a BoostParams,
    nodes: Vec<Node<f64>>,
}

impl RegressionBuilder<'_> {
    fn leaf_value(&self, g: f64, h: f64) -> f64 {
        -g / (h + self.p.leaf_regularization) * self.p.learning_rate
    }

    fn grow(&mut self, samples: Vec<usize>, depth: usize) -> usize {
        let g: f64 = samples.iter().map(|&i| self.grad[i]).sum();
        let h: f64 = samples.iter().map(|&i| self.hess[i]).sum();
        let id = self.nodes.len();
        self.nodes.push(Node::Leaf(self.leaf_value(g, h)));
        if depth >= self.p.max_depth || samples.len() < 2 {
            return id;
        }
        let Some((feature, threshold)) = self.best_split(&samples, g, h) else {
            return id;
        };
        let (left, right): (Vec<usize>, Vec<usize>) =
            samples.into_iter().partition(|&i| self.x.get(i, feature) <= threshold);
        let left = self.grow(left, depth + 1);
        let right = self.grow(right, depth + 1);
        self.nodes[id] = Node::Split { feature, threshold, left, right };
        id
    }

    fn best_split(&self, samples: &[usize], g: f64, h: f64) -> Option<(usize, f64)> {
        let lambda = self.p.leaf_regularization;
        let parent = g * g / (h + lambda);
        let mut best: Option<(f64, usize, f64)> = None;
        let mut order: Vec<usize> = samples.to_vec();
        for f in 0..self.x.n_cols() {
            order.sort_by(|&a, &b| self.x.get(a, f).total_cmp(&self.x.get(b, f)));
            let (mut gl, mut hl) = (0.0, 0.0);
            for k in 0..order.len() - 1 {
                gl += self.grad[order[k]];
                hl += self.hess[order[k]];
                let (lo, hi) = (self.x.get(order[k], f), self.x.get(order[k + 1], f));
                if lo >= hi {
                    continue;
                }
                let (gr, hr) = (g - gl, h - hl);
                if hl < self.p.min_child_weight || hr < self.p.min_child_weight {
                    continue;
                }
                let gain = gl * gl / (hl + lambda) + gr * gr / (hr + lambda) - parent;
                if gain > 0.0 && best.is_none_or(|(b, _, _)| gain > b) {
                    best = Some((gain, f, midpoint(lo, hi)));
                }
            }
        }
        best.map(|(_, f, t)| (f, t))
    }
}

fn check_boost_params(p: &BoostParams) -> Result<(), ModelError> {
    let bad = |m: &str| Err(ModelError::InvalidParams(m.into()));
    if p.n_estimators == 0 {
        return bad("n_estimators must be at least 1");
    }
    if !(0.0..=1.0).contains(&p.learning_rate) {
        return bad("learning_rate must lie in [0, 1]");
    }
    if p.max_depth == 0 {
        return bad("max_depth must be at least 1");
    }
    if !(p.leaf_regularization >= 0.0 && p.leaf_regularization.is_finite()) {
        return bad("leaf_regularization must be finite and non-negative");
    }
    if !(p.min_child_weight >= 0.0 && p.min_child_weight.is_finite()) {
        return bad("min_child_weight must be finite and non-negative");
    }
    Ok(())
}

pub fn fit_boost(x: &Matrix, y: &[u8], p: &BoostParams) -> Result<BoostedTrees, ModelError> {
    check_training(x, y)?;
    check_boost_params(p)?;
    if !both_classes(y) {
        return Err(ModelError::SingleClassTraining);
    }
    let n_pos = y.iter().filter(|&&l| l == 1).count() as f64;
    let base_score = (n_pos / (y.len() as f64 - n_pos)).ln();
    let mut scores = vec![base_score; y.len()];
    let record = |scores: &[f64]| RoundMetrics {
        logloss: logloss(scores, y),
        metric: match p.eval_metric {
            EvalMetric::Logloss => logloss(scores, y),
            EvalMetric::Auc => auc(scores, y),
        },
    };
    let mut history = vec![record(&scores)];
    let mut trees = Vec::with_capacity(p.n_estimators);
    let mut grad = vec![0.0; y.len()];
    let mut hess = vec![0.0; y.len()];
    for _ in 0..p.n_estimators {
        for i in 0..y.len() {
            let prob = sigmoid(scores[i]);
            grad[i] = prob - f64::from(y[i]);
            hess[i] = prob * (1.0 - prob);
        }
        let mut builder = RegressionBuilder { x, grad: &grad, hess: &hess, p, nodes: Vec::new() };
        builder.grow((0..y.len()).collect(), 0);
        let tree = builder.nodes;
        for (i, s) in scores.iter_mut().enumerate() {
            *s += *find_leaf(&tree, x.row(i));
        }
        trees.push(tree);
        history.push(record(&scores));
    }
    Ok(BoostedTrees { base_score, trees, history })
}
