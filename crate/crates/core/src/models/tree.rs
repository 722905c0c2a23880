use rand::seq::index::sample;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::{check_training, Matrix, ModelError};

/// Arena node. Rows with `x[feature] <= threshold` go left.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum Node<L> {
    Leaf(L),
    Split { feature: usize, threshold: f64, left: usize, right: usize },
}

pub(crate) fn find_leaf<'n, L>(nodes: &'n [Node<L>], row: &[f64]) -> &'n L {
    let mut at = 0;
    loop {
        match &nodes[at] {
            Node::Leaf(leaf) => return leaf,
            Node::Split { feature, threshold, left, right } => {
                at = if row[*feature] <= *threshold { *left } else { *right };
            }
        }
    }
}

/// Midpoint of two adjacent distinct sorted values that still separates them.
pub(crate) fn midpoint(lo: f64, hi: f64) -> f64 {
    let m = lo + (hi - lo) * 0.5;
    if m >= hi || m < lo {
        lo
    } else {
        m
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TreeParams {
    pub max_depth: usize,
    pub min_samples_split: usize,
    pub seed: u64,
}

impl Default for TreeParams {
    fn default() -> Self {
        Self { max_depth: 12, min_samples_split: 2, seed: 0 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct ClassLeaf {
    pub class: u8,
    pub counts: [usize; 2],
}

impl ClassLeaf {
    fn from_counts(counts: [usize; 2]) -> Self {
        // ties go to class 0
        Self { class: u8::from(counts[1] > counts[0]), counts }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DecisionTree {
    nodes: Vec<Node<ClassLeaf>>,
    n_features: usize,
}

impl DecisionTree {
    pub fn predict_row(&self, row: &[f64]) -> u8 {
        find_leaf(&self.nodes, row).class
    }

    pub fn nodes(&self) -> &[Node<ClassLeaf>] {
        &self.nodes
    }

    /// `(feature, threshold)` of the root split, if the tree split at all.
    pub fn root_split(&self) -> Option<(usize, f64)> {
        match self.nodes[0] {
            Node::Split { feature, threshold, .. } => Some((feature, threshold)),
            Node::Leaf(_) => None,
        }
    }

    pub fn depth(&self) -> usize {
        fn walk(nodes: &[Node<ClassLeaf>], at: usize) -> usize {
            match nodes[at] {
                Node::Leaf(_) => 0,
                Node::Split { left, right, .. } => 1 + walk(nodes, left).max(walk(nodes, right)),
            }
        }
        walk(&self.nodes, 0)
    }

    pub fn n_leaves(&self) -> usize {
        self.nodes.iter().filter(|n| matches!(n, Node::Leaf(_))).count()
    }
}

/// Weighted Gini comparison without rounding. Minimising the weighted child
/// impurity is the same as maximising `sum_l c^2 / n_l + sum_r c^2 / n_r`,
/// kept here as an exact fraction.
#[derive(Clone, Copy)]
struct Purity {
    num: u128,
    den: u128,
}

impl Purity {
    fn new(left: [usize; 2], right: [usize; 2]) -> Self {
        let sq = |c: [usize; 2]| (c[0] * c[0] + c[1] * c[1]) as u128;
        let n_l = (left[0] + left[1]) as u128;
        let n_r = (right[0] + right[1]) as u128;
        Self { num: sq(left) * n_r + sq(right) * n_l, den: n_l * n_r }
    }

    fn beats(self, other: Purity) -> bool {
        self.num * other.den > other.num * self.den
    }
}

pub(crate) enum FeatureDraw<'r> {
    All,
    Random { per_split: usize, rng: &'r mut ChaCha8Rng },
}

pub(crate) struct GiniBuilder<'a, 'r> {
    x: &'a Matrix,
    y: &'a [u8],
    max_depth: usize,
    min_samples_split: usize,
    draw: FeatureDraw<'r>,
    nodes: Vec<Node<ClassLeaf>>,
}

impl<'a, 'r> GiniBuilder<'a, 'r> {
    pub(crate) fn new(
        x: &'a Matrix,
        y: &'a [u8],
        max_depth: usize,
        min_samples_split: usize,
        draw: FeatureDraw<'r>,
    ) -> Self {
        Self { x, y, max_depth, min_samples_split, draw, nodes: Vec::new() }
    }

    /// Grows a tree over `samples`, which may repeat rows (bootstrap draws).
    pub(crate) fn build(mut self, samples: Vec<usize>) -> DecisionTree {
        self.grow(samples, 0);
        DecisionTree { nodes: self.nodes, n_features: self.x.n_cols() }
    }

    fn candidates(&mut self) -> Vec<usize> {
        let d = self.x.n_cols();
        match &mut self.draw {
            FeatureDraw::All => (0..d).collect(),
            FeatureDraw::Random { per_split, rng } => {
                let mut picked = sample(*rng, d, (*per_split).min(d)).into_vec();
                picked.sort_unstable();
                picked
            }
        }
    }

    fn grow(&mut self, samples: Vec<usize>, depth: usize) -> usize {
        let mut counts = [0usize; 2];
        for &i in &samples {
            counts[usize::from(self.y[i])] += 1;
        }
        let id = self.nodes.len();
        self.nodes.push(Node::Leaf(ClassLeaf::from_counts(counts)));

        let pure = counts[0] == 0 || counts[1] == 0;
        if pure || depth >= self.max_depth || samples.len() < self.min_samples_split {
            return id;
        }
        let candidates = self.candidates();
        let Some((feature, threshold)) = self.best_split(&samples, &candidates, counts) else {
            return id;
        };
        let (left, right): (Vec<usize>, Vec<usize>) =
            samples.into_iter().partition(|&i| self.x.get(i, feature) <= threshold);
        let left = self.grow(left, depth + 1);
        let right = self.grow(right, depth + 1);
        self.nodes[id] = Node::Split { feature, threshold, left, right };
        id
    }

    fn best_split(&self, samples: &[usize], candidates: &[usize], totals: [usize; 2]) -> Option<(usize, f64)> {
        let mut best: Option<(Purity, usize, f64)> = None;
        let mut pairs: Vec<(f64, u8)> = Vec::with_capacity(samples.len());
        for &f in candidates {
            pairs.clear();
            pairs.extend(samples.iter().map(|&i| (self.x.get(i, f), self.y[i])));
            pairs.sort_by(|a, b| a.0.total_cmp(&b.0));
            let mut left = [0usize; 2];
            for k in 0..pairs.len() - 1 {
                left[usize::from(pairs[k].1)] += 1;
                let (lo, hi) = (pairs[k].0, pairs[k + 1].0);
                if lo >= hi {
                    continue;
                }
                let right = [totals[0] - left[0], totals[1] - left[1]];
                let score = Purity::new(left, right);
                if best.as_ref().is_none_or(|(b, _, _)| score.beats(*b)) {
                    best = Some((score, f, midpoint(lo, hi)));
                }
            }
        }
        best.map(|(_, f, t)| (f, t))
    }
}

pub(crate) fn check_tree_params(max_depth: usize, min_samples_split: usize) -> Result<(), ModelError> {
    if max_depth == 0 {
        return Err(ModelError::InvalidParams("max_depth must be at least 1".into()));
    }
    if min_samples_split == 0 {
        return Err(ModelError::InvalidParams("min_samples_split must be at least 1".into()));
    }
    Ok(())
}

/// Greedy Gini tree over all features.
pub fn fit_tree(x: &Matrix, y: &[u8], p: &TreeParams) -> Result<DecisionTree, ModelError> {
    check_training(x, y)?;
    check_tree_params(p.max_depth, p.min_samples_split)?;
    let builder = GiniBuilder::new(x, y, p.max_depth, p.min_samples_split, FeatureDraw::All);
    Ok(builder.build((0..x.n_rows()).collect()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn accuracy(t: &DecisionTree, x: &Matrix, y: &[u8]) -> f64 {
        x.rows().zip(y).filter(|(r, &l)| t.predict_row(r) == l).count() as f64 / y.len() as f64
    }

    /// Independent oracle: enumerate every (feature, midpoint) split, score by
    /// weighted Gini in floating point, keep the first minimum within 1e-12.
    fn oracle_split(x: &Matrix, y: &[u8]) -> Option<(usize, f64)> {
        let gini = |ys: &[u8]| {
            if ys.is_empty() {
                return 0.0;
            }
            let p1 = ys.iter().filter(|&&v| v == 1).count() as f64 / ys.len() as f64;
            1.0 - p1 * p1 - (1.0 - p1) * (1.0 - p1)
        };
        let n = y.len() as f64;
        let mut best: Option<(f64, usize, f64)> = None;
        for f in 0..x.n_cols() {
            let mut vals: Vec<f64> = (0..x.n_rows()).map(|i| x.get(i, f)).collect();
            vals.sort_by(f64::total_cmp);
            vals.dedup();
            for w in vals.windows(2) {
                let t = (w[0] + w[1]) / 2.0;
                let (l, r): (Vec<u8>, Vec<u8>) = {
                    let l = (0..x.n_rows()).filter(|&i| x.get(i, f) <= t).map(|i| y[i]).collect();
                    let r = (0..x.n_rows()).filter(|&i| x.get(i, f) > t).map(|i| y[i]).collect();
                    (l, r)
                };
                let score = (l.len() as f64 * gini(&l) + r.len() as f64 * gini(&r)) / n;
                if best.is_none_or(|(b, _, _)| score < b - 1e-12) {
                    best = Some((score, f, t));
                }
            }
        }
        best.map(|(_, f, t)| (f, t))
    }

    #[test]
    fn one_dimensional_threshold() {
        let xs = [-2.0, -1.5, -0.5, -0.25, 0.25, 0.75, 1.0, 2.0];
        let x = Matrix::from_rows(&xs.iter().map(|&v| [v]).collect::<Vec<_>>()).unwrap();
        let y: Vec<u8> = xs.iter().map(|&v| u8::from(v > 0.0)).collect();
        let t = fit_tree(&x, &y, &TreeParams { max_depth: 1, ..Default::default() }).unwrap();
        assert_eq!(t.root_split(), Some((0, 0.0)));
        assert_eq!(t.root_split(), oracle_split(&x, &y));
        assert_eq!(accuracy(&t, &x, &y), 1.0);
    }

    #[test]
    fn single_class_gives_single_leaf() {
        let x = Matrix::from_rows(&[[1.0], [2.0], [3.0]]).unwrap();
        let t = fit_tree(&x, &[1, 1, 1], &TreeParams::default()).unwrap();
        assert_eq!(t.nodes().len(), 1);
        assert_eq!(t.predict_row(&[100.0]), 1);
    }

    #[test]
    fn xor_needs_two_levels() {
        let x = Matrix::from_rows(&[[0.0, 0.0], [0.0, 1.0], [1.0, 0.0], [1.0, 1.0]]).unwrap();
        let y = [0, 1, 1, 0];
        let stump = fit_tree(&x, &y, &TreeParams { max_depth: 1, ..Default::default() }).unwrap();
        assert!(accuracy(&stump, &x, &y) <= 0.75);
        let deep = fit_tree(&x, &y, &TreeParams { max_depth: 2, ..Default::default() }).unwrap();
        assert_eq!(accuracy(&deep, &x, &y), 1.0);
    }

    #[test]
    fn pure_leaves_reproduce_training_labels() {
        let x = Matrix::from_rows(&[[0.1, 5.0], [0.2, 3.0], [0.9, 4.0], [0.5, 1.0], [0.7, 2.0]]).unwrap();
        let y = [0, 1, 0, 1, 1];
        let t = fit_tree(&x, &y, &TreeParams { max_depth: 10, ..Default::default() }).unwrap();
        assert_eq!(x.rows().map(|r| t.predict_row(r)).collect::<Vec<_>>(), y);
    }

    #[test]
    fn min_samples_split_and_depth_limit() {
        let x = Matrix::from_rows(&(0..16).map(|i| [i as f64]).collect::<Vec<_>>()).unwrap();
        let y: Vec<u8> = (0..16).map(|i| (i % 2) as u8).collect();
        let t = fit_tree(&x, &y, &TreeParams { max_depth: 3, ..Default::default() }).unwrap();
        assert!(t.depth() <= 3);
        let leaf = fit_tree(&x, &y, &TreeParams { min_samples_split: 17, ..Default::default() }).unwrap();
        assert_eq!(leaf.n_leaves(), 1);
        assert_eq!(leaf.predict_row(&[3.0]), 0);
        assert!(fit_tree(&x, &y, &TreeParams { max_depth: 0, ..Default::default() }).is_err());
    }

    #[test]
    fn midpoint_separates_adjacent_floats() {
        let a = 1.0f64;
        let b = f64::from_bits(a.to_bits() + 1);
        let m = midpoint(a, b);
        assert!(a <= m && m < b);
    }

    proptest! {
        #[test]
        fn root_split_matches_exhaustive_oracle(
            rows in prop::collection::vec((prop::collection::vec(0u8..6, 3), 0u8..2), 2..=20),
            d in 1usize..=3,
        ) {
            let data: Vec<Vec<f64>> = rows.iter().map(|(r, _)| r[..d].iter().map(|&v| f64::from(v) * 0.5).collect()).collect();
            let y: Vec<u8> = rows.iter().map(|(_, l)| *l).collect();
            prop_assume!(y.contains(&0) && y.contains(&1));
            let x = Matrix::from_rows(&data).unwrap();
            let t = fit_tree(&x, &y, &TreeParams { max_depth: 1, ..Default::default() }).unwrap();
            prop_assert_eq!(t.root_split(), oracle_split(&x, &y));
        }
    }
}
