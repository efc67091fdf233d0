use crate::data::Dataset;
use crate::learners::tree::{Tree, TreeParams};
use crate::metafeatures::summary;

/// Statistics of one CART tree grown with default parameters on all rows.
/// `lev` summarizes leaf depths, `bran` the number of nodes on each level
/// and `att` the number of splits on each encoded column.
pub fn extract_model_based(d: &Dataset) -> Vec<f64> {
    let tree = Tree::fit(&d.x, &d.y, d.n_classes.max(1), TreeParams::default());
    let nodes = tree.nodes.len() as f64;
    let leaves = tree.n_leaves() as f64;
    let n = d.n_instances() as f64;
    let p = d.n_features().max(1) as f64;
    let leaf_depths: Vec<f64> = tree
        .nodes
        .iter()
        .filter(|node| node.split.is_none())
        .map(|node| node.depth as f64)
        .collect();
    let mut per_level = vec![0.0; tree.max_depth() + 1];
    for node in &tree.nodes {
        per_level[node.depth] += 1.0;
    }
    let usage: Vec<f64> = tree.feature_usage().into_iter().map(|u| u as f64).collect();
    let mut out = vec![nodes, leaves, nodes / p, nodes / n, leaves / n];
    out.extend(summary(&leaf_depths));
    out.extend(summary(&per_level));
    out.extend(summary(&usage));
    out
}
