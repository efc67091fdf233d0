use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::tree::{Tree, TreeParams};
use crate::matrix::Matrix;
use crate::rng::derived_stream;

/// Bagged CART trees with per-node random feature subsets.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Forest {
    pub trees: Vec<Tree>,
    pub n_classes: usize,
    pub n_features: usize,
}

/// `nodesize` is the minimum leaf size; tree `t` draws from the stream
/// derived from `(seed, t)`, so forests do not depend on thread scheduling.
pub fn train(x: &Matrix, y: &[usize], n_classes: usize, ntree: usize, nodesize: usize, seed: u64) -> Forest {
    let n = x.rows();
    let p = x.cols();
    let mtry = ((p as f64).sqrt().floor() as usize).clamp(1, p.max(1));
    let nodesize = nodesize.max(1);
    let params = TreeParams {
        cp: 0.0,
        min_split: 2 * nodesize,
        min_bucket: nodesize,
        max_depth: usize::MAX,
        mtry: Some(mtry),
    };
    let trees = (0..ntree.max(1))
        .into_par_iter()
        .map(|t| {
            let mut rng = derived_stream("forest-tree", &[seed, t as u64]);
            let idx: Vec<usize> = (0..n).map(|_| rng.random_range(0..n)).collect();
            Tree::grow(x, y, idx, n_classes, params, None, Some(&mut rng))
        })
        .collect();
    Forest {
        trees,
        n_classes,
        n_features: p,
    }
}

impl Forest {
    /// Mean of the trees' leaf class distributions.
    pub fn scores(&self, x: &[f64]) -> Vec<f64> {
        let mut s = vec![0.0; self.n_classes];
        for t in &self.trees {
            for (acc, v) in s.iter_mut().zip(&t.leaf(x).probs) {
                *acc += v;
            }
        }
        let k = self.trees.len() as f64;
        s.iter_mut().for_each(|v| *v /= k);
        s
    }

    /// Mean decrease in Gini impurity per feature, averaged over trees.
    pub fn gini_importance(&self) -> Vec<f64> {
        let mut imp = vec![0.0; self.n_features];
        for t in &self.trees {
            for (acc, v) in imp.iter_mut().zip(&t.importance) {
                *acc += v;
            }
        }
        let k = self.trees.len() as f64;
        imp.iter_mut().for_each(|v| *v /= k);
        imp
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn data() -> (Matrix, Vec<usize>) {
        let rows: Vec<Vec<f64>> = (0..40)
            .map(|i| vec![i as f64, ((i * 7) % 11) as f64, ((i * 3) % 5) as f64])
            .collect();
        let y = (0..40).map(|i| usize::from(i >= 20)).collect();
        (Matrix::from_rows(&rows), y)
    }

    #[test]
    fn fixed_seed_gives_identical_forest() {
        let (x, y) = data();
        assert_eq!(train(&x, &y, 2, 25, 1, 9), train(&x, &y, 2, 25, 1, 9));
        assert_ne!(train(&x, &y, 2, 25, 1, 9), train(&x, &y, 2, 25, 1, 10));
    }

    #[test]
    fn single_tree_forest_predicts_like_its_tree() {
        let (x, y) = data();
        let f = train(&x, &y, 2, 1, 1, 3);
        for i in 0..x.rows() {
            assert_eq!(f.scores(x.row(i)), f.trees[0].scores(x.row(i)));
        }
    }

    #[test]
    fn separating_feature_dominates_importance() {
        let (x, y) = data();
        let imp = train(&x, &y, 2, 200, 1, 1).gini_importance();
        assert!(imp[0] > imp[1] && imp[0] > imp[2]);
        assert!(imp.iter().all(|v| v.is_finite() && *v >= 0.0));
    }

    #[test]
    fn duplicate_columns_share_importance() {
        // columns 0 and 3 are the same separating feature
        let rows: Vec<Vec<f64>> = (0..40)
            .map(|i| vec![i as f64, ((i * 7) % 11) as f64, ((i * 3) % 5) as f64, i as f64])
            .collect();
        let y: Vec<usize> = (0..40).map(|i| usize::from(i >= 20)).collect();
        let imp = train(&Matrix::from_rows(&rows), &y, 2, 300, 1, 4).gini_importance();
        let ratio = imp[0] / imp[3];
        assert!((0.6..1.67).contains(&ratio), "{imp:?}");
    }
}
