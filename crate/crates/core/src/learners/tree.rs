//! CART classification trees with Gini splitting. Decision stumps are depth-1
//! trees, optionally restricted to a single column.

use rand::seq::index::sample;
use serde::{Deserialize, Serialize};

use crate::matrix::Matrix;
use crate::rng::Stream;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TreeParams {
    /// Minimum relative impurity decrease (w.r.t. the root) for a split.
    pub cp: f64,
    pub min_split: usize,
    pub min_bucket: usize,
    pub max_depth: usize,
    /// Number of candidate features per node; `None` = all.
    pub mtry: Option<usize>,
}

impl Default for TreeParams {
    fn default() -> Self {
        TreeParams {
            cp: 0.01,
            min_split: 20,
            min_bucket: 7,
            max_depth: 30,
            mtry: None,
        }
    }
}

impl TreeParams {
    pub fn stump() -> Self {
        TreeParams {
            cp: 0.0,
            min_split: 2,
            min_bucket: 1,
            max_depth: 1,
            mtry: None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Split {
    pub feature: usize,
    pub threshold: f64,
    pub left: usize,
    pub right: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Node {
    pub depth: usize,
    pub n: usize,
    pub gini: f64,
    pub probs: Vec<f64>,
    pub split: Option<Split>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Tree {
    pub nodes: Vec<Node>,
    pub n_classes: usize,
    pub n_features: usize,
    /// Total weighted Gini decrease per feature.
    pub importance: Vec<f64>,
}

pub fn gini(counts: &[usize], n: usize) -> f64 {
    if n == 0 {
        return 0.0;
    }
    let nf = n as f64;
    1.0 - counts.iter().map(|&c| (c as f64 / nf).powi(2)).sum::<f64>()
}

/// Best binary split of `idx` on `feature`: (gain, threshold).
/// Gain is `n*gini(node) - n_l*gini(left) - n_r*gini(right)`.
pub fn best_split_on(
    x: &Matrix,
    y: &[usize],
    idx: &[usize],
    feature: usize,
    n_classes: usize,
    min_bucket: usize,
) -> Option<(f64, f64)> {
    let n = idx.len();
    if n < 2 {
        return None;
    }
    let mut order: Vec<(f64, usize)> = idx.iter().map(|&i| (x.get(i, feature), y[i])).collect();
    order.sort_by(|a, b| a.0.total_cmp(&b.0));
    let mut total = vec![0usize; n_classes];
    for &(_, c) in &order {
        total[c] += 1;
    }
    let parent = n as f64 * gini(&total, n);
    let mut left = vec![0usize; n_classes];
    let mut best: Option<(f64, f64)> = None;
    let min_bucket = min_bucket.max(1);
    for k in 0..n - 1 {
        left[order[k].1] += 1;
        if order[k].0 == order[k + 1].0 {
            continue;
        }
        let nl = k + 1;
        let nr = n - nl;
        if nl < min_bucket || nr < min_bucket {
            continue;
        }
        let right: Vec<usize> = total.iter().zip(&left).map(|(t, l)| t - l).collect();
        let child = nl as f64 * gini(&left, nl) + nr as f64 * gini(&right, nr);
        let gain = parent - child;
        if best.is_none_or(|(g, _)| gain > g + 1e-12) {
            best = Some((gain, 0.5 * (order[k].0 + order[k + 1].0)));
        }
    }
    best
}

struct Builder<'a> {
    x: &'a Matrix,
    y: &'a [usize],
    n_classes: usize,
    params: TreeParams,
    features: Vec<usize>,
    root_risk: f64,
    nodes: Vec<Node>,
    importance: Vec<f64>,
}

impl Builder<'_> {
    fn build(&mut self, idx: Vec<usize>, depth: usize, rng: &mut Option<&mut Stream>) -> usize {
        let n = idx.len();
        let mut counts = vec![0usize; self.n_classes];
        for &i in &idx {
            counts[self.y[i]] += 1;
        }
        let g = gini(&counts, n);
        let id = self.nodes.len();
        self.nodes.push(Node {
            depth,
            n,
            gini: g,
            probs: counts.iter().map(|&c| c as f64 / n.max(1) as f64).collect(),
            split: None,
        });
        if n < self.params.min_split || depth >= self.params.max_depth || g <= 0.0 {
            return id;
        }
        let candidates: Vec<usize> = match (self.params.mtry, rng.as_deref_mut()) {
            // kept in draw order, so equal gains go to the first feature drawn
            (Some(m), Some(r)) if m < self.features.len() => sample(r, self.features.len(), m)
                .into_iter()
                .map(|k| self.features[k])
                .collect(),
            _ => self.features.clone(),
        };
        let mut best: Option<(f64, usize, f64)> = None;
        for &f in &candidates {
            if let Some((gain, thr)) = best_split_on(self.x, self.y, &idx, f, self.n_classes, self.params.min_bucket) {
                if best.is_none_or(|(bg, _, _)| gain > bg + 1e-12) {
                    best = Some((gain, f, thr));
                }
            }
        }
        let Some((gain, feature, threshold)) = best else {
            return id;
        };
        if gain <= 1e-12 || gain < self.params.cp * self.root_risk {
            return id;
        }
        let (l, r): (Vec<usize>, Vec<usize>) = idx.iter().partition(|&&i| self.x.get(i, feature) <= threshold);
        self.importance[feature] += gain;
        let left = self.build(l, depth + 1, rng);
        let right = self.build(r, depth + 1, rng);
        self.nodes[id].split = Some(Split {
            feature,
            threshold,
            left,
            right,
        });
        id
    }
}

impl Tree {
    /// Grows a tree on the rows `idx` (repeats allowed, e.g. bootstrap samples).
    pub fn grow(
        x: &Matrix,
        y: &[usize],
        idx: Vec<usize>,
        n_classes: usize,
        params: TreeParams,
        features: Option<Vec<usize>>,
        mut rng: Option<&mut Stream>,
    ) -> Tree {
        let mut counts = vec![0usize; n_classes];
        for &i in &idx {
            counts[y[i]] += 1;
        }
        let root_risk = idx.len() as f64 * gini(&counts, idx.len());
        let mut b = Builder {
            x,
            y,
            n_classes,
            params,
            features: features.unwrap_or_else(|| (0..x.cols()).collect()),
            root_risk,
            nodes: Vec::new(),
            importance: vec![0.0; x.cols()],
        };
        b.build(idx, 0, &mut rng);
        Tree {
            nodes: b.nodes,
            n_classes,
            n_features: x.cols(),
            importance: b.importance,
        }
    }

    pub fn fit(x: &Matrix, y: &[usize], n_classes: usize, params: TreeParams) -> Tree {
        Tree::grow(x, y, (0..x.rows()).collect(), n_classes, params, None, None)
    }

    /// Depth-1 tree, optionally restricted to `column`.
    pub fn stump(x: &Matrix, y: &[usize], n_classes: usize, column: Option<usize>) -> Tree {
        Tree::grow(
            x,
            y,
            (0..x.rows()).collect(),
            n_classes,
            TreeParams::stump(),
            column.map(|c| vec![c]),
            None,
        )
    }

    pub fn leaf(&self, x: &[f64]) -> &Node {
        let mut node = &self.nodes[0];
        while let Some(s) = node.split {
            node = if x[s.feature] <= s.threshold {
                &self.nodes[s.left]
            } else {
                &self.nodes[s.right]
            };
        }
        node
    }

    pub fn scores(&self, x: &[f64]) -> Vec<f64> {
        self.leaf(x).probs.clone()
    }

    pub fn n_leaves(&self) -> usize {
        self.nodes.iter().filter(|n| n.split.is_none()).count()
    }

    pub fn max_depth(&self) -> usize {
        self.nodes.iter().map(|n| n.depth).max().unwrap_or(0)
    }

    /// Number of internal nodes splitting on each feature.
    pub fn feature_usage(&self) -> Vec<usize> {
        let mut u = vec![0; self.n_features];
        for n in &self.nodes {
            if let Some(s) = n.split {
                u[s.feature] += 1;
            }
        }
        u
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::stream;
    use rand::Rng;

    fn noisy(n: usize, seed: u64) -> (Matrix, Vec<usize>) {
        let mut rng = stream(seed);
        let mut rows = Vec::new();
        let mut y = Vec::new();
        for _ in 0..n {
            let r: Vec<f64> = (0..4).map(|_| rng.random_range(-1.0..1.0)).collect();
            y.push(usize::from(r[0] + 0.5 * r[1] * r[2] + rng.random_range(-0.3..0.3) > 0.0));
            rows.push(r);
        }
        (Matrix::from_rows(&rows), y)
    }

    #[test]
    fn stump_picks_separating_column() {
        let x = Matrix::from_rows(&[
            vec![0.3, 0.0],
            vec![0.1, 1.0],
            vec![0.2, 0.0],
            vec![0.4, 1.0],
            vec![0.5, 1.0],
        ]);
        let y = vec![0, 1, 0, 1, 1];
        let t = Tree::stump(&x, &y, 2, None);
        assert_eq!(t.nodes[0].split.unwrap().feature, 1);
        for i in 0..5 {
            assert_eq!(t.scores(x.row(i))[y[i]], 1.0);
        }
    }

    #[test]
    fn splits_decrease_impurity_and_respect_limits() {
        let (x, y) = noisy(300, 4);
        let params = TreeParams {
            cp: 0.0,
            min_split: 10,
            min_bucket: 5,
            max_depth: 6,
            mtry: None,
        };
        let t = Tree::fit(&x, &y, 2, params);
        for node in &t.nodes {
            assert!(node.depth <= 6);
            if let Some(s) = node.split {
                let (l, r) = (&t.nodes[s.left], &t.nodes[s.right]);
                let child = l.n as f64 * l.gini + r.n as f64 * r.gini;
                assert!(child < node.n as f64 * node.gini);
            } else {
                assert!(node.n >= 5);
            }
        }
        assert!(t.importance.iter().all(|&v| v >= 0.0));
    }

    #[test]
    fn pure_node_is_single_leaf() {
        let x = Matrix::from_rows(&[vec![1.0], vec![2.0], vec![3.0]]);
        let t = Tree::fit(&x, &[0, 0, 0], 1, TreeParams::default());
        assert_eq!(t.nodes.len(), 1);
    }

    #[test]
    fn ties_break_on_lowest_column() {
        // columns 0 and 1 are identical
        let x = Matrix::from_rows(&[vec![0.0, 0.0], vec![1.0, 1.0], vec![0.0, 0.0], vec![1.0, 1.0]]);
        let t = Tree::stump(&x, &[0, 1, 0, 1], 2, None);
        assert_eq!(t.nodes[0].split.unwrap().feature, 0);
    }
}
