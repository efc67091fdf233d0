//! Resampling (stratified k-fold) and the two performance measures used
//! throughout: balanced per-class accuracy and ROC AUC.

use std::fmt;
use std::str::FromStr;

use rand::seq::SliceRandom;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::learners::{self, LearnerSpec, Prediction};
use crate::matrix::Matrix;
use crate::rng::{derive_seed, derived_stream};
use crate::tuning::space::HpSetting;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FoldAssignment {
    pub k: usize,
    pub fold_of: Vec<usize>,
    pub seed: u64,
}

impl FoldAssignment {
    pub fn test_indices(&self, fold: usize) -> Vec<usize> {
        (0..self.fold_of.len()).filter(|&i| self.fold_of[i] == fold).collect()
    }

    pub fn train_indices(&self, fold: usize) -> Vec<usize> {
        (0..self.fold_of.len()).filter(|&i| self.fold_of[i] != fold).collect()
    }
}

/// Stratified k-fold: each class is shuffled with a seeded stream and dealt
/// round-robin, continuing the deal position from the previous class.
pub fn stratified_kfold(y: &[usize], k: usize, seed: u64) -> Result<FoldAssignment> {
    if k < 2 {
        return Err(Error::InvalidArgument(format!("k-fold needs k >= 2, got {k}")));
    }
    let n_classes = y.iter().max().map(|m| m + 1).unwrap_or(0);
    let mut members: Vec<Vec<usize>> = vec![Vec::new(); n_classes];
    for (i, &c) in y.iter().enumerate() {
        members[c].push(i);
    }
    for (c, m) in members.iter().enumerate() {
        if !m.is_empty() && m.len() < k {
            return Err(Error::ClassTooSmall {
                class: c,
                count: m.len(),
                k,
            });
        }
    }
    let mut rng = derived_stream("stratified-kfold", &[seed, k as u64]);
    let mut fold_of = vec![0; y.len()];
    let mut next = 0usize;
    for m in &mut members {
        m.shuffle(&mut rng);
        for &i in m.iter() {
            fold_of[i] = next;
            next = (next + 1) % k;
        }
    }
    Ok(FoldAssignment { k, fold_of, seed })
}

fn gcd(mut a: u128, mut b: u128) -> u128 {
    while b != 0 {
        (a, b) = (b, a % b);
    }
    a
}

/// Balanced per-class accuracy: mean recall over the classes present in `truth`.
///
/// The sum of recalls is accumulated as an exact fraction, so the result is the
/// correctly rounded value of the rational BAC.
pub fn bac(truth: &[usize], predicted: &[usize]) -> Result<f64> {
    if truth.len() != predicted.len() {
        return Err(Error::LengthMismatch {
            left: truth.len(),
            right: predicted.len(),
        });
    }
    if truth.is_empty() {
        return Err(Error::InvalidArgument("bac of an empty sample".into()));
    }
    let k = truth.iter().max().unwrap() + 1;
    let mut total = vec![0u128; k];
    let mut hit = vec![0u128; k];
    for (&t, &p) in truth.iter().zip(predicted) {
        total[t] += 1;
        if t == p {
            hit[t] += 1;
        }
    }
    let present: Vec<usize> = (0..k).filter(|&c| total[c] > 0).collect();
    let float = present.iter().map(|&c| hit[c] as f64 / total[c] as f64).sum::<f64>() / present.len() as f64;
    let (mut num, mut den) = (0u128, 1u128);
    for &c in &present {
        let (a, b) = (hit[c], total[c]);
        let Some(n) = num.checked_mul(b).and_then(|x| a.checked_mul(den).and_then(|y| x.checked_add(y))) else {
            return Ok(float);
        };
        let Some(d) = den.checked_mul(b) else {
            return Ok(float);
        };
        let g = gcd(n, d).max(1);
        num = n / g;
        den = d / g;
    }
    let Some(den) = den.checked_mul(present.len() as u128) else {
        return Ok(float);
    };
    let g = gcd(num, den).max(1);
    let (num, den) = (num / g, den / g);
    const EXACT: u128 = 1 << 53;
    if num < EXACT && den < EXACT {
        Ok(num as f64 / den as f64)
    } else {
        Ok(float)
    }
}

/// Plain accuracy.
pub fn accuracy(truth: &[usize], predicted: &[usize]) -> Result<f64> {
    if truth.len() != predicted.len() {
        return Err(Error::LengthMismatch {
            left: truth.len(),
            right: predicted.len(),
        });
    }
    let hits = truth.iter().zip(predicted).filter(|(a, b)| a == b).count();
    Ok(hits as f64 / truth.len().max(1) as f64)
}

/// Mann-Whitney AUC: probability that a random positive outranks a random
/// negative, ties counted half.
pub fn auc(truth: &[bool], scores: &[f64]) -> Result<f64> {
    if truth.len() != scores.len() {
        return Err(Error::LengthMismatch {
            left: truth.len(),
            right: scores.len(),
        });
    }
    let n_pos = truth.iter().filter(|&&t| t).count() as u64;
    let n_neg = truth.len() as u64 - n_pos;
    if n_pos == 0 || n_neg == 0 {
        return Err(Error::SingleClass);
    }
    let mut order: Vec<usize> = (0..truth.len()).collect();
    order.sort_by(|&a, &b| scores[a].total_cmp(&scores[b]));
    // twice the U statistic, kept integral
    let mut twice_u = 0u64;
    let mut neg_below = 0u64;
    let mut g = 0;
    while g < order.len() {
        let mut h = g;
        while h < order.len() && scores[order[h]].total_cmp(&scores[order[g]]).is_eq() {
            h += 1;
        }
        let pos = order[g..h].iter().filter(|&&i| truth[i]).count() as u64;
        let neg = (h - g) as u64 - pos;
        twice_u += pos * (2 * neg_below + neg);
        neg_below += neg;
        g = h;
    }
    Ok(twice_u as f64 / (2 * n_pos * n_neg) as f64)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Metric {
    Bac,
    Accuracy,
    /// Binary AUC with `positive` as the positive class index.
    Auc { positive: usize },
}

impl Metric {
    pub fn score(&self, truth: &[usize], preds: &[Prediction]) -> Result<f64> {
        match *self {
            Metric::Bac => bac(truth, &preds.iter().map(|p| p.class).collect::<Vec<_>>()),
            Metric::Accuracy => accuracy(truth, &preds.iter().map(|p| p.class).collect::<Vec<_>>()),
            Metric::Auc { positive } => auc(
                &truth.iter().map(|&t| t == positive).collect::<Vec<_>>(),
                &preds.iter().map(|p| p.scores[positive]).collect::<Vec<_>>(),
            ),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct CvResult {
    pub fold_scores: Vec<f64>,
    /// Out-of-fold prediction for every instance, in instance order.
    pub predictions: Vec<Prediction>,
}

impl CvResult {
    pub fn mean(&self) -> f64 {
        self.fold_scores.iter().sum::<f64>() / self.fold_scores.len().max(1) as f64
    }
}

/// Trains one model per fold on its complement and scores it on the fold.
pub fn cross_validate(
    spec: &LearnerSpec,
    x: &Matrix,
    y: &[usize],
    n_classes: usize,
    folds: &FoldAssignment,
    metric: Metric,
    seed: u64,
) -> Result<CvResult> {
    if folds.fold_of.len() != y.len() {
        return Err(Error::LengthMismatch {
            left: folds.fold_of.len(),
            right: y.len(),
        });
    }
    let mut fold_scores = Vec::with_capacity(folds.k);
    let mut predictions: Vec<Option<Prediction>> = vec![None; y.len()];
    for f in 0..folds.k {
        let test = folds.test_indices(f);
        if test.is_empty() {
            continue;
        }
        let train = folds.train_indices(f);
        let wrap = |e: Error| Error::Fold {
            fold: f,
            source: Box::new(e),
        };
        let ty: Vec<usize> = train.iter().map(|&i| y[i]).collect();
        let model = learners::train(
            spec,
            &x.select_rows(&train),
            &ty,
            n_classes,
            derive_seed("cv-fold", &[seed, f as u64]),
        )
        .map_err(wrap)?;
        let preds = model.predict(&x.select_rows(&test)).map_err(wrap)?;
        let truth: Vec<usize> = test.iter().map(|&i| y[i]).collect();
        fold_scores.push(metric.score(&truth, &preds).map_err(wrap)?);
        for (i, p) in test.into_iter().zip(preds) {
            predictions[i] = Some(p);
        }
    }
    Ok(CvResult {
        fold_scores,
        predictions: predictions.into_iter().map(|p| p.expect("every instance is in one fold")).collect(),
    })
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Strategy {
    Tuned,
    Default(String),
}

impl fmt::Display for Strategy {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Strategy::Tuned => f.write_str("tuned"),
            Strategy::Default(id) => write!(f, "default:{id}"),
        }
    }
}

impl FromStr for Strategy {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        if s == "tuned" {
            Ok(Strategy::Tuned)
        } else if let Some(id) = s.strip_prefix("default:") {
            Ok(Strategy::Default(id.to_string()))
        } else {
            Err(Error::InvalidArgument(format!("unknown strategy `{s}`")))
        }
    }
}

impl Serialize for Strategy {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for Strategy {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

/// One outer-fold evaluation of one strategy on one dataset.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvaluationRecord {
    pub dataset: String,
    pub strategy: Strategy,
    pub seed: u64,
    pub outer_fold: usize,
    pub score: f64,
    pub runtime: f64,
    pub setting: HpSetting,
}
