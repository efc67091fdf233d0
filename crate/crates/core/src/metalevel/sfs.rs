use crate::error::{Error, Result};
use crate::eval::{auc, cross_validate, stratified_kfold, FoldAssignment, Metric};
use crate::labeling::MetaClass;
use crate::learners::LearnerSpec;
use crate::matrix::Matrix;

#[derive(Debug, Clone, PartialEq)]
pub struct SfsResult {
    /// Column indices in the order they were added.
    pub selected: Vec<usize>,
    /// Inner AUC after each addition.
    pub scores: Vec<f64>,
}

/// Stratified inner folds, `k` capped by the smallest class.
pub(crate) fn inner_folds(y: &[usize], k: usize, seed: u64) -> Result<FoldAssignment> {
    let counts = crate::data::class_counts(y, 2);
    let (class, &count) = counts
        .iter()
        .enumerate()
        .min_by_key(|(c, n)| (**n, *c))
        .expect("two classes");
    let k = k.min(count);
    if k < 2 {
        return Err(Error::ClassTooSmall { class, count, k: 2 });
    }
    stratified_kfold(y, k, seed)
}

/// Pooled out-of-fold AUC with Defaults as the positive class.
pub(crate) fn pooled_auc(spec: &LearnerSpec, x: &Matrix, y: &[usize], folds: &FoldAssignment, seed: u64) -> Result<f64> {
    let positive = MetaClass::Defaults.index();
    let cv = cross_validate(spec, x, y, 2, folds, Metric::Auc { positive }, seed)?;
    let truth: Vec<bool> = y.iter().map(|&c| c == positive).collect();
    let scores: Vec<f64> = cv.predictions.iter().map(|p| 1.0 - p.scores[MetaClass::Tuning.index()]).collect();
    auc(&truth, &scores)
}

/// Greedy forward selection from the empty set. The best candidate is
/// always added on the first step; afterwards only if it raises the inner
/// AUC by at least `min_improvement`.
pub fn sfs_select(
    x: &Matrix,
    y: &[usize],
    spec: &LearnerSpec,
    inner_k: usize,
    min_improvement: f64,
    seed: u64,
) -> Result<SfsResult> {
    let p = x.cols();
    if p < 2 {
        return Err(Error::InvalidArgument(format!("feature selection needs at least 2 features, found {p}")));
    }
    let folds = inner_folds(y, inner_k, seed)?;
    let mut selected: Vec<usize> = Vec::new();
    let mut scores: Vec<f64> = Vec::new();
    while selected.len() < p {
        let mut best: Option<(usize, f64)> = None;
        for f in (0..p).filter(|f| !selected.contains(f)) {
            let mut cols = selected.clone();
            cols.push(f);
            let s = pooled_auc(spec, &x.select_cols(&cols), y, &folds, seed)?;
            if best.is_none_or(|(_, b)| s > b) {
                best = Some((f, s));
            }
        }
        let (f, s) = best.expect("at least one candidate");
        if let Some(&current) = scores.last() {
            if s - current < min_improvement {
                break;
            }
        }
        selected.push(f);
        scores.push(s);
    }
    Ok(SfsResult { selected, scores })
}
