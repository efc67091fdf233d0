//! Meta level: meta-datasets, meta-learner evaluation under the
//! preprocessing setups, importances and recommendations.

mod importance;
mod model;
mod sfs;
mod smote;

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::str::FromStr;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::data::class_counts;
use crate::error::{Error, Result};
use crate::eval::{auc, stratified_kfold, Metric};
use crate::labeling::{MetaClass, MetaLabel};
use crate::learners::{self, declared_space, LearnerSpec, Model};
use crate::matrix::Matrix;
use crate::metafeatures::MetaFeatureVector;
use crate::rng::{derive_seed, derived_stream};
use crate::tuning::random_search;

pub use importance::{rf_importance, FeatureImportance, ImportanceReport};
pub use model::{recommend, recommend_vector, train_final, MetaModel, Recommendation, MODEL_FORMAT_VERSION};
pub use sfs::{sfs_select, SfsResult};
pub use smote::{smote, SmoteResult};

#[derive(Debug, Clone, PartialEq)]
pub struct MetaExample {
    pub dataset: String,
    pub values: Vec<f64>,
    pub label: MetaClass,
}

#[derive(Debug, Clone, PartialEq)]
pub struct MetaDataset {
    pub alpha: f64,
    pub schema: Vec<String>,
    /// Sorted by dataset name.
    pub examples: Vec<MetaExample>,
}

impl MetaDataset {
    /// Checks widths, name uniqueness and that both classes occur.
    pub fn new(alpha: f64, schema: Vec<String>, mut examples: Vec<MetaExample>) -> Result<MetaDataset> {
        examples.sort_by(|a, b| a.dataset.cmp(&b.dataset));
        for w in examples.windows(2) {
            if w[0].dataset == w[1].dataset {
                return Err(Error::InvalidArgument(format!("duplicate meta-example `{}`", w[0].dataset)));
            }
        }
        for e in &examples {
            if e.values.len() != schema.len() {
                return Err(Error::SchemaMismatch {
                    expected: schema.len(),
                    found: e.values.len(),
                });
            }
        }
        let md = MetaDataset { alpha, schema, examples };
        if md.class_counts().contains(&0) {
            return Err(Error::SingleClass);
        }
        Ok(md)
    }

    pub fn len(&self) -> usize {
        self.examples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.examples.is_empty()
    }

    pub fn x(&self) -> Matrix {
        Matrix::from_rows(&self.examples.iter().map(|e| e.values.as_slice()).collect::<Vec<_>>())
    }

    pub fn y(&self) -> Vec<usize> {
        self.examples.iter().map(|e| e.label.index()).collect()
    }

    /// Counts indexed by `MetaClass::index`.
    pub fn class_counts(&self) -> Vec<usize> {
        class_counts(&self.y(), 2)
    }

    pub fn to_csv(&self) -> String {
        let mut out = format!("dataset,{},label\n", self.schema.join(","));
        for e in &self.examples {
            out.push_str(&e.dataset);
            for v in &e.values {
                out.push_str(&format!(",{v:e}"));
            }
            out.push_str(&format!(",{}\n", e.label));
        }
        out
    }

    pub fn from_csv(text: &str, alpha: f64) -> Result<MetaDataset> {
        let parse_err = |line: usize, message: String| Error::Parse {
            path: "<meta-dataset>".into(),
            line,
            message,
        };
        let mut lines = text.lines().enumerate().filter(|(_, l)| !l.starts_with('#') && !l.trim().is_empty());
        let (_, header) = lines.next().ok_or_else(|| parse_err(1, "empty file".into()))?;
        let cols: Vec<&str> = header.split(',').collect();
        if cols.len() < 3 || cols[0] != "dataset" || cols[cols.len() - 1] != "label" {
            return Err(parse_err(1, "expected header `dataset,<features>,label`".into()));
        }
        let schema: Vec<String> = cols[1..cols.len() - 1].iter().map(|s| s.to_string()).collect();
        let mut examples = Vec::new();
        for (i, line) in lines {
            let f: Vec<&str> = line.split(',').collect();
            if f.len() != cols.len() {
                return Err(parse_err(i + 1, format!("expected {} fields, found {}", cols.len(), f.len())));
            }
            let values = f[1..f.len() - 1]
                .iter()
                .map(|v| v.parse::<f64>().map_err(|e| parse_err(i + 1, format!("`{v}`: {e}"))))
                .collect::<Result<Vec<_>>>()?;
            examples.push(MetaExample {
                dataset: f[0].to_string(),
                values,
                label: f[f.len() - 1].parse()?,
            });
        }
        MetaDataset::new(alpha, schema, examples)
    }
}

/// Joins meta-feature vectors with the labels computed at `alpha`.
pub fn assemble(vectors: &[MetaFeatureVector], labels: &[MetaLabel], alpha: f64) -> Result<MetaDataset> {
    let by_name: BTreeMap<&str, &MetaFeatureVector> = vectors.iter().map(|v| (v.dataset.as_str(), v)).collect();
    let schema = vectors.first().map(|v| v.names.clone()).unwrap_or_default();
    let mut examples = Vec::new();
    for l in labels.iter().filter(|l| (l.alpha - alpha).abs() < 1e-12) {
        let v = by_name.get(l.dataset.as_str()).ok_or_else(|| Error::MissingVector(l.dataset.clone()))?;
        if v.names != schema {
            return Err(Error::SchemaMismatch {
                expected: schema.len(),
                found: v.names.len(),
            });
        }
        examples.push(MetaExample {
            dataset: l.dataset.clone(),
            values: v.values.clone(),
            label: l.label,
        });
    }
    MetaDataset::new(alpha, schema, examples)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Setup {
    None,
    FeatSel,
    Tuned,
    Smote,
    SmoteFeatSel,
    SmoteTuned,
}

impl Setup {
    pub const ALL: [Setup; 6] = [
        Setup::None,
        Setup::FeatSel,
        Setup::Tuned,
        Setup::Smote,
        Setup::SmoteFeatSel,
        Setup::SmoteTuned,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Setup::None => "none",
            Setup::FeatSel => "featsel",
            Setup::Tuned => "tuned",
            Setup::Smote => "smote",
            Setup::SmoteFeatSel => "smote+featsel",
            Setup::SmoteTuned => "smote+tuned",
        }
    }

    pub fn smote(self) -> bool {
        matches!(self, Setup::Smote | Setup::SmoteFeatSel | Setup::SmoteTuned)
    }

    pub fn featsel(self) -> bool {
        matches!(self, Setup::FeatSel | Setup::SmoteFeatSel)
    }

    pub fn tuned(self) -> bool {
        matches!(self, Setup::Tuned | Setup::SmoteTuned)
    }
}

impl fmt::Display for Setup {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Setup {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim().to_ascii_lowercase();
        Setup::ALL
            .into_iter()
            .find(|x| x.name() == s)
            .ok_or_else(|| Error::InvalidArgument(format!("unknown setup `{s}`")))
    }
}

impl Serialize for Setup {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.serialize_str(self.name())
    }
}

impl<'de> Deserialize<'de> for Setup {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        String::deserialize(d)?.parse().map_err(serde::de::Error::custom)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MetaCvConfig {
    pub repetitions: usize,
    pub base_seed: u64,
    pub outer_k: usize,
    pub inner_k: usize,
    pub tuning_budget: usize,
    pub min_improvement: f64,
    pub smote_rate: usize,
    pub smote_k: usize,
}

impl Default for MetaCvConfig {
    fn default() -> Self {
        MetaCvConfig {
            repetitions: 30,
            base_seed: 1,
            outer_k: 10,
            inner_k: 3,
            tuning_budget: 300,
            min_improvement: 0.01,
            smote_rate: 2,
            smote_k: 5,
        }
    }
}

/// What one outer fold saw, for leak checks. Indices refer to meta-examples.
#[derive(Debug, Clone, PartialEq)]
pub struct MetaFoldTrace {
    pub repetition: usize,
    pub fold: usize,
    pub train: Vec<usize>,
    pub test: Vec<usize>,
    /// Real rows handed to SMOTE, feature selection and meta-tuning.
    pub setup_rows: Vec<usize>,
    pub smote_parents: Vec<(usize, usize)>,
    pub selected: Vec<usize>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct MetaCvResult {
    pub learner: LearnerSpec,
    pub setup: Setup,
    pub rep_aucs: Vec<f64>,
    /// Out-of-fold Tuning-class score per repetition and example.
    pub tuning_scores: Vec<Vec<f64>>,
    pub traces: Vec<MetaFoldTrace>,
}

impl MetaCvResult {
    pub fn mean_auc(&self) -> f64 {
        self.rep_aucs.iter().sum::<f64>() / self.rep_aucs.len().max(1) as f64
    }

    pub fn sd_auc(&self) -> f64 {
        let n = self.rep_aucs.len();
        if n < 2 {
            return 0.0;
        }
        let m = self.mean_auc();
        (self.rep_aucs.iter().map(|a| (a - m).powi(2)).sum::<f64>() / (n - 1) as f64).sqrt()
    }
}

pub fn check_setup(spec: &LearnerSpec, setup: Setup, n_features: usize) -> Result<()> {
    let unsupported = |reason: &str| Error::UnsupportedSetup {
        learner: spec.kind.to_string(),
        setup: setup.to_string(),
        reason: reason.into(),
    };
    if setup.tuned() && declared_space(spec.kind).is_empty() {
        return Err(unsupported("the learner has no tunable hyperparameters"));
    }
    if setup.featsel() && n_features < 2 {
        return Err(unsupported("feature selection needs at least 2 features"));
    }
    Ok(())
}

pub(crate) struct Fitted {
    pub model: Model,
    pub spec: LearnerSpec,
    pub selected: Vec<usize>,
    /// Row pairs (local to the training matrix) behind each synthetic row.
    pub parents: Vec<(usize, usize)>,
}

/// Applies `setup` to one training split and fits the final model on it.
pub(crate) fn fit_with_setup(
    x: &Matrix,
    y: &[usize],
    spec: &LearnerSpec,
    setup: Setup,
    cfg: &MetaCvConfig,
    seed: u64,
) -> Result<Fitted> {
    check_setup(spec, setup, x.cols())?;
    let (x, y, parents) = if setup.smote() {
        let s = smote(x, y, 2, cfg.smote_rate, cfg.smote_k, derive_seed("meta-smote", &[seed]))?;
        (s.x, s.y, s.parents)
    } else {
        (x.clone(), y.to_vec(), Vec::new())
    };
    let selected: Vec<usize> = if setup.featsel() {
        let mut s = sfs_select(&x, &y, spec, cfg.inner_k, cfg.min_improvement, derive_seed("meta-sfs", &[seed]))?.selected;
        s.sort_unstable();
        s
    } else {
        (0..x.cols()).collect()
    };
    let x = x.select_cols(&selected);
    let spec = if setup.tuned() {
        let folds = sfs::inner_folds(&y, cfg.inner_k, derive_seed("meta-tuning-folds", &[seed]))?;
        let result = random_search(
            &x,
            &y,
            2,
            spec.kind,
            &declared_space(spec.kind),
            cfg.tuning_budget,
            &folds,
            Metric::Auc {
                positive: MetaClass::Defaults.index(),
            },
            &mut derived_stream("meta-tuning", &[seed]),
            None,
        )?;
        LearnerSpec::with_setting(spec.kind, result.best)
    } else {
        spec.clone()
    };
    let model = learners::train(&spec, &x, &y, 2, derive_seed("meta-fit", &[seed]))?;
    Ok(Fitted {
        model,
        spec,
        selected,
        parents,
    })
}

/// Repeated stratified cross-validation of a meta-learner under `setup`.
/// Each repetition pools its out-of-fold scores into one AUC with Defaults
/// as the positive class.
pub fn run_meta_cv(md: &MetaDataset, spec: &LearnerSpec, setup: Setup, cfg: &MetaCvConfig) -> Result<MetaCvResult> {
    check_setup(spec, setup, md.schema.len())?;
    let x = md.x();
    let y = md.y();
    let smallest = *md.class_counts().iter().min().expect("two classes");
    let k = cfg.outer_k.min(smallest);
    if k < 2 {
        return Err(Error::ClassTooSmall {
            class: md.class_counts().iter().position(|&c| c == smallest).unwrap_or(0),
            count: smallest,
            k: 2,
        });
    }
    let truth: Vec<bool> = y.iter().map(|&c| c == MetaClass::Defaults.index()).collect();
    let reps: Vec<(f64, Vec<f64>, Vec<MetaFoldTrace>)> = (0..cfg.repetitions)
        .into_par_iter()
        .map(|r| {
            let rep_seed = derive_seed("meta-cv", &[cfg.base_seed, r as u64]);
            let folds = stratified_kfold(&y, k, rep_seed)?;
            let mut scores = vec![f64::NAN; y.len()];
            let mut traces = Vec::with_capacity(k);
            for f in 0..k {
                let train = folds.train_indices(f);
                let test = folds.test_indices(f);
                let ty: Vec<usize> = train.iter().map(|&i| y[i]).collect();
                let fitted = fit_with_setup(
                    &x.select_rows(&train),
                    &ty,
                    spec,
                    setup,
                    cfg,
                    derive_seed("meta-fold", &[rep_seed, f as u64]),
                )
                .map_err(|e| Error::Fold {
                    fold: f,
                    source: Box::new(e),
                })?;
                let tx = x.select_rows(&test).select_cols(&fitted.selected);
                for (&i, p) in test.iter().zip(fitted.model.predict(&tx)?) {
                    scores[i] = p.scores[MetaClass::Tuning.index()];
                }
                traces.push(MetaFoldTrace {
                    repetition: r,
                    fold: f,
                    setup_rows: if setup == Setup::None { Vec::new() } else { train.clone() },
                    smote_parents: fitted.parents.iter().map(|&(a, b)| (train[a], train[b])).collect(),
                    selected: fitted.selected,
                    train,
                    test,
                });
            }
            let ranking: Vec<f64> = scores.iter().map(|s| 1.0 - s).collect();
            Ok((auc(&truth, &ranking)?, scores, traces))
        })
        .collect::<Result<_>>()?;
    let mut result = MetaCvResult {
        learner: spec.clone(),
        setup,
        rep_aucs: Vec::new(),
        tuning_scores: Vec::new(),
        traces: Vec::new(),
    };
    for (a, s, t) in reps {
        result.rep_aucs.push(a);
        result.tuning_scores.push(s);
        result.traces.extend(t);
    }
    Ok(result)
}

/// Every way a trace could leak held-out examples into training-time work.
pub fn trace_violations(traces: &[MetaFoldTrace]) -> Vec<String> {
    let mut out = Vec::new();
    for t in traces {
        let train: BTreeSet<usize> = t.train.iter().copied().collect();
        let tag = format!("rep {} fold {}", t.repetition, t.fold);
        if t.test.iter().any(|i| train.contains(i)) {
            out.push(format!("{tag}: test example in training split"));
        }
        if t.setup_rows.iter().any(|i| !train.contains(i)) {
            out.push(format!("{tag}: setup saw a held-out example"));
        }
        if t.smote_parents.iter().any(|(a, b)| !train.contains(a) || !train.contains(b)) {
            out.push(format!("{tag}: synthetic example built from a held-out example"));
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::learners::LearnerKind;
    use crate::rng::stream;
    use rand::Rng;

    /// One feature equals the label plus uniform noise of width 0.05.
    pub(crate) fn planted(n: usize, seed: u64) -> MetaDataset {
        let mut rng = stream(seed);
        let schema = (0..5).map(|j| format!("f{j}")).collect();
        let examples = (0..n)
            .map(|i| {
                let label = MetaClass::from_index(usize::from(i % 3 != 0));
                let mut values: Vec<f64> = (0..5).map(|_| rng.random()).collect();
                values[2] = label.index() as f64 + rng.random_range(-0.05..0.05);
                MetaExample {
                    dataset: format!("d{i:03}"),
                    values,
                    label,
                }
            })
            .collect();
        MetaDataset::new(0.05, schema, examples).unwrap()
    }

    fn quick() -> MetaCvConfig {
        MetaCvConfig {
            repetitions: 3,
            tuning_budget: 4,
            ..MetaCvConfig::default()
        }
    }

    fn vector(name: &str, v: f64) -> MetaFeatureVector {
        MetaFeatureVector {
            dataset: name.into(),
            names: vec!["a".into(), "b".into()],
            values: vec![v, -v],
            extraction_time: 0.0,
        }
    }

    fn label(name: &str, label: MetaClass) -> MetaLabel {
        MetaLabel {
            dataset: name.into(),
            label,
            alpha: 0.05,
            p_value: 0.5,
            chosen_default: "reference".into(),
            paired_n: 30,
            degenerate: false,
        }
    }

    #[test]
    fn two_examples_make_a_valid_meta_dataset() {
        let md = assemble(
            &[vector("x", 1.0), vector("y", 2.0)],
            &[label("y", MetaClass::Tuning), label("x", MetaClass::Defaults)],
            0.05,
        )
        .unwrap();
        assert_eq!(md.len(), 2);
        assert_eq!(md.class_counts(), vec![1, 1]);
        assert_eq!(md.examples[0].dataset, "x");
    }

    #[test]
    fn missing_vector_names_the_dataset() {
        let e = assemble(&[vector("x", 1.0)], &[label("x", MetaClass::Tuning), label("gone", MetaClass::Defaults)], 0.05)
            .unwrap_err();
        assert!(matches!(e, Error::MissingVector(ref n) if n == "gone"));
    }

    #[test]
    fn single_class_is_rejected() {
        let e = assemble(&[vector("x", 1.0)], &[label("x", MetaClass::Tuning)], 0.05).unwrap_err();
        assert!(matches!(e, Error::SingleClass));
    }

    #[test]
    fn csv_roundtrip() {
        let md = planted(20, 3);
        assert_eq!(MetaDataset::from_csv(&md.to_csv(), md.alpha).unwrap(), md);
    }

    #[test]
    fn setup_names_roundtrip() {
        for s in Setup::ALL {
            assert_eq!(s.name().parse::<Setup>().unwrap(), s);
        }
    }

    #[test]
    fn constant_learner_scores_one_half() {
        let r = run_meta_cv(&planted(60, 1), &LearnerSpec::new(LearnerKind::Constant), Setup::None, &quick()).unwrap();
        assert!(r.rep_aucs.iter().all(|&a| a == 0.5));
    }

    #[test]
    fn planted_feature_gives_high_auc() {
        let mut spec = LearnerSpec::new(LearnerKind::RandomForest);
        spec.setting = spec.setting.with("ntree", crate::tuning::space::HpValue::Int(100));
        let r = run_meta_cv(&planted(60, 2), &spec, Setup::None, &quick()).unwrap();
        assert!(r.mean_auc() >= 0.95, "{:?}", r.rep_aucs);
    }

    #[test]
    fn repeated_runs_agree() {
        let md = planted(40, 4);
        let spec = LearnerSpec::new(LearnerKind::Knn);
        let a = run_meta_cv(&md, &spec, Setup::Smote, &quick()).unwrap();
        let b = run_meta_cv(&md, &spec, Setup::Smote, &quick()).unwrap();
        assert_eq!(a.rep_aucs, b.rep_aucs);
    }

    #[test]
    fn naive_bayes_cannot_be_tuned() {
        let e = run_meta_cv(&planted(30, 1), &LearnerSpec::new(LearnerKind::NaiveBayes), Setup::Tuned, &quick()).unwrap_err();
        assert!(matches!(e, Error::UnsupportedSetup { .. }));
    }

    #[test]
    fn setups_stay_inside_training_splits() {
        let md = planted(40, 5);
        for setup in [Setup::SmoteFeatSel, Setup::SmoteTuned] {
            let r = run_meta_cv(&md, &LearnerSpec::new(LearnerKind::Knn), setup, &quick()).unwrap();
            assert!(trace_violations(&r.traces).is_empty());
            assert!(r.traces.iter().all(|t| !t.smote_parents.is_empty()));
        }
    }

    #[test]
    fn leak_check_flags_held_out_parents() {
        let t = MetaFoldTrace {
            repetition: 0,
            fold: 0,
            train: vec![0, 1, 2],
            test: vec![3],
            setup_rows: vec![0, 1, 2],
            smote_parents: vec![(0, 3)],
            selected: vec![0],
        };
        assert_eq!(trace_violations(&[t]).len(), 1);
    }
}
