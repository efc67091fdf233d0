use rand::Rng;

use crate::data::Dataset;
use crate::error::Result;
use crate::eval::{stratified_kfold, FoldAssignment};
use crate::learners::tree::{best_split_on, Tree};
use crate::learners::{self, knn, LearnerKind, LearnerSpec, Prediction};
use crate::matrix::Matrix;
use crate::metafeatures::{summary, INTERNAL_SEED};
use crate::rng::derived_stream;

/// Cross-validated accuracies of the landmarkers on one shared fold
/// assignment.
#[derive(Debug, Clone, PartialEq)]
pub struct LandmarkScores {
    pub nb: f64,
    pub nn: f64,
    /// Stump restricted to each encoded column.
    pub stump_per_column: Vec<f64>,
    pub st_min_gain: f64,
    pub st_rand: f64,
    /// Only filled when relative landmarking is requested.
    pub svm: f64,
    pub stump: f64,
    pub linear: f64,
}

/// Stratified folds with at most 10 parts; `None` when some class has a
/// single member, in which case accuracy is measured on the training data.
fn folds(y: &[usize], n_classes: usize) -> Result<Option<FoldAssignment>> {
    let smallest = crate::data::class_counts(y, n_classes).into_iter().filter(|&c| c > 0).min().unwrap_or(0);
    let k = smallest.min(10);
    if k < 2 {
        return Ok(None);
    }
    stratified_kfold(y, k, INTERNAL_SEED).map(Some)
}

/// Pooled out-of-fold accuracy of `fit_predict(train_x, train_y, test_x)`.
fn cv_accuracy<F>(d: &Dataset, folds: &Option<FoldAssignment>, fit_predict: F) -> Result<f64>
where
    F: Fn(&Matrix, &[usize], &Matrix) -> Result<Vec<usize>>,
{
    let n = d.n_instances();
    let mut correct = 0usize;
    match folds {
        Some(f) => {
            for fold in 0..f.k {
                let tr = f.train_indices(fold);
                let te = f.test_indices(fold);
                let ytr: Vec<usize> = tr.iter().map(|&i| d.y[i]).collect();
                let pred = fit_predict(&d.x.select_rows(&tr), &ytr, &d.x.select_rows(&te))?;
                correct += te.iter().zip(&pred).filter(|(&i, &p)| d.y[i] == p).count();
            }
        }
        None => {
            let pred = fit_predict(&d.x, &d.y, &d.x)?;
            correct += d.y.iter().zip(&pred).filter(|(a, b)| a == b).count();
        }
    }
    Ok(correct as f64 / n as f64)
}

fn classes(p: Vec<Prediction>) -> Vec<usize> {
    p.into_iter().map(|p| p.class).collect()
}

fn spec_accuracy(d: &Dataset, folds: &Option<FoldAssignment>, kind: LearnerKind) -> Result<f64> {
    let spec = LearnerSpec::new(kind);
    cv_accuracy(d, folds, |x, y, q| {
        let m = learners::train(&spec, x, y, d.n_classes, INTERNAL_SEED)?;
        Ok(classes(m.predict(q)?))
    })
}

fn stump_accuracy(d: &Dataset, folds: &Option<FoldAssignment>, column: Option<usize>) -> Result<f64> {
    cv_accuracy(d, folds, |x, y, q| {
        let t = Tree::stump(x, y, d.n_classes, column);
        Ok(q.iter_rows().map(|r| Prediction::from_scores(t.scores(r)).class).collect())
    })
}

fn entropy(counts: &[usize]) -> f64 {
    let n: usize = counts.iter().sum();
    if n == 0 {
        return 0.0;
    }
    counts
        .iter()
        .filter(|&&c| c > 0)
        .map(|&c| {
            let p = c as f64 / n as f64;
            -p * p.log2()
        })
        .sum()
}

/// Information gain ratio of the best single split on `column`.
fn gain_ratio(d: &Dataset, column: usize) -> f64 {
    let idx: Vec<usize> = (0..d.n_instances()).collect();
    let Some((_, thr)) = best_split_on(&d.x, &d.y, &idx, column, d.n_classes, 1) else {
        return 0.0;
    };
    let mut left = vec![0usize; d.n_classes];
    let mut right = vec![0usize; d.n_classes];
    for i in idx {
        if d.x.get(i, column) <= thr {
            left[d.y[i]] += 1;
        } else {
            right[d.y[i]] += 1;
        }
    }
    let (nl, nr) = (left.iter().sum::<usize>(), right.iter().sum::<usize>());
    let n = (nl + nr) as f64;
    let total: Vec<usize> = left.iter().zip(&right).map(|(a, b)| a + b).collect();
    let gain = entropy(&total) - nl as f64 / n * entropy(&left) - nr as f64 / n * entropy(&right);
    let split_info = entropy(&[nl, nr]);
    if split_info > 0.0 {
        gain / split_info
    } else {
        0.0
    }
}

pub fn landmark_scores(d: &Dataset, include_rl: bool) -> Result<LandmarkScores> {
    let f = folds(&d.y, d.n_classes)?;
    let p = d.n_features();
    let nb = spec_accuracy(d, &f, LearnerKind::NaiveBayes)?;
    let nn = cv_accuracy(d, &f, |x, y, q| {
        let m = knn::train(x, y, d.n_classes, 1)?;
        Ok(q.iter_rows().map(|r| Prediction::from_scores(m.scores(r)).class).collect())
    })?;
    let stump_per_column = (0..p).map(|j| stump_accuracy(d, &f, Some(j))).collect::<Result<Vec<_>>>()?;
    let ratios: Vec<f64> = (0..p).map(|j| gain_ratio(d, j)).collect();
    let min_col = (0..p).min_by(|&a, &b| ratios[a].total_cmp(&ratios[b]).then(a.cmp(&b))).unwrap_or(0);
    let rand_col = derived_stream("landmark-random-attribute", &[INTERNAL_SEED]).random_range(0..p.max(1));
    let (svm, stump, linear) = if include_rl {
        (
            spec_accuracy(d, &f, LearnerKind::SvmRbf)?,
            stump_accuracy(d, &f, None)?,
            spec_accuracy(d, &f, LearnerKind::Linear)?,
        )
    } else {
        (0.0, 0.0, 0.0)
    };
    Ok(LandmarkScores {
        nb,
        nn,
        st_min_gain: stump_per_column.get(min_col).copied().unwrap_or(0.0),
        st_rand: stump_per_column.get(rand_col).copied().unwrap_or(0.0),
        stump_per_column,
        svm,
        stump,
        linear,
    })
}

pub fn extract_landmarking(s: &LandmarkScores) -> Vec<f64> {
    let st = summary(&s.stump_per_column);
    vec![s.nb, st[0], st[1], st[2], st[3], s.st_min_gain, s.st_rand, s.nn]
}

pub fn extract_relative_landmarking(s: &LandmarkScores) -> Vec<f64> {
    vec![
        s.svm - s.linear,
        s.svm - s.nb,
        s.svm - s.stump,
        s.svm - s.nn,
        s.nn - s.linear,
        s.nn - s.stump,
        s.nn - s.nb,
        s.nb - s.stump,
        s.nb - s.linear,
        s.stump - s.linear,
    ]
}
