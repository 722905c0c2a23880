use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::tree::{check_tree_params, DecisionTree, FeatureDraw, GiniBuilder};
use super::{check_training, Matrix, ModelError};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ForestParams {
    pub n_trees: usize,
    pub max_depth: usize,
    pub min_samples_split: usize,
    /// Candidate features per split; `None` means `ceil(sqrt(d))`.
    pub features_per_split: Option<usize>,
    /// Draw a bootstrap sample per tree. Turning this off makes a one-tree
    /// forest with all features per split identical to [`super::fit_tree`].
    pub bootstrap: bool,
    pub seed: u64,
}

impl Default for ForestParams {
    fn default() -> Self {
        Self { n_trees: 100, max_depth: 12, min_samples_split: 2, features_per_split: None, bootstrap: true, seed: 0 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RandomForest {
    trees: Vec<DecisionTree>,
}

impl RandomForest {
    pub fn trees(&self) -> &[DecisionTree] {
        &self.trees
    }

    /// Number of trees voting for class 1.
    pub fn votes(&self, row: &[f64]) -> usize {
        self.trees.iter().filter(|t| t.predict_row(row) == 1).count()
    }

    /// Majority vote; a tie goes to class 0.
    pub fn predict_row(&self, row: &[f64]) -> u8 {
        u8::from(2 * self.votes(row) > self.trees.len())
    }

    /// Builds a forest from already-grown trees.
    pub fn from_trees(trees: Vec<DecisionTree>) -> Self {
        Self { trees }
    }
}

fn default_features_per_split(d: usize) -> usize {
    (d as f64).sqrt().ceil() as usize
}

pub fn fit_forest(x: &Matrix, y: &[u8], p: &ForestParams) -> Result<RandomForest, ModelError> {
    check_training(x, y)?;
    check_tree_params(p.max_depth, p.min_samples_split)?;
    if p.n_trees == 0 {
        return Err(ModelError::InvalidParams("n_trees must be at least 1".into()));
    }
    let d = x.n_cols();
    let per_split = p.features_per_split.unwrap_or_else(|| default_features_per_split(d));
    if per_split == 0 || per_split > d {
        return Err(ModelError::InvalidParams(format!("features_per_split {per_split} not in 1..={d}")));
    }
    let n = x.n_rows();
    let trees = (0..p.n_trees)
        .map(|t| {
            let mut rng = ChaCha8Rng::seed_from_u64(p.seed);
            rng.set_stream(t as u64);
            let samples: Vec<usize> =
                if p.bootstrap { (0..n).map(|_| rng.random_range(0..n)).collect() } else { (0..n).collect() };
            let draw = FeatureDraw::Random { per_split, rng: &mut rng };
            GiniBuilder::new(x, y, p.max_depth, p.min_samples_split, draw).build(samples)
        })
        .collect();
    Ok(RandomForest { trees })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::models::{fit_tree, TreeParams};

    fn blobs(n: usize) -> (Matrix, Vec<u8>) {
        let mut rows = Vec::new();
        let mut y = Vec::new();
        for i in 0..n {
            let jitter = (i * 37 % 11) as f64 * 0.05;
            rows.push([jitter, 1.0 + jitter, (i % 3) as f64]);
            y.push(0);
            rows.push([2.0 + jitter, 3.0 - jitter, (i % 3) as f64]);
            y.push(1);
        }
        (Matrix::from_rows(&rows).unwrap(), y)
    }

    #[test]
    fn separable_blobs_are_fit_exactly() {
        let (x, y) = blobs(30);
        let f = fit_forest(&x, &y, &ForestParams { seed: 4, ..Default::default() }).unwrap();
        assert_eq!(f.trees().len(), 100);
        for (row, &label) in x.rows().zip(&y) {
            // oracle: recount votes tree by tree
            let ones = f.trees().iter().filter(|t| t.predict_row(row) == 1).count();
            assert_eq!(u8::from(ones * 2 > 100), label);
            assert_eq!(f.predict_row(row), label);
        }
    }

    #[test]
    fn one_tree_without_bootstrap_is_the_plain_tree() {
        let (x, y) = blobs(12);
        let fp = ForestParams {
            n_trees: 1,
            max_depth: 4,
            features_per_split: Some(3),
            bootstrap: false,
            ..Default::default()
        };
        let f = fit_forest(&x, &y, &fp).unwrap();
        let t = fit_tree(&x, &y, &TreeParams { max_depth: 4, min_samples_split: 2, seed: 0 }).unwrap();
        assert_eq!(f.trees()[0], t);
    }

    #[test]
    fn even_vote_tie_goes_to_class_zero() {
        let ones = fit_tree(&Matrix::from_rows(&[[0.0]]).unwrap(), &[1], &TreeParams::default()).unwrap();
        let zeros = fit_tree(&Matrix::from_rows(&[[0.0]]).unwrap(), &[0], &TreeParams::default()).unwrap();
        let f = RandomForest::from_trees(vec![ones.clone(), zeros.clone(), ones, zeros]);
        assert_eq!(f.votes(&[0.0]), 2);
        assert_eq!(f.predict_row(&[0.0]), 0);
    }

    #[test]
    fn same_seed_same_forest() {
        let (x, y) = blobs(10);
        let p = ForestParams { n_trees: 7, seed: 11, ..Default::default() };
        assert_eq!(fit_forest(&x, &y, &p).unwrap(), fit_forest(&x, &y, &p).unwrap());
    }

    #[test]
    fn invalid_feature_count() {
        let (x, y) = blobs(4);
        let p = ForestParams { features_per_split: Some(4), ..Default::default() };
        assert!(matches!(fit_forest(&x, &y, &p), Err(ModelError::InvalidParams(_))));
        assert_eq!(default_features_per_split(4), 2);
        assert_eq!(default_features_per_split(17), 5);
    }
}
