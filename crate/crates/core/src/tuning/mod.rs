//! Random-search tuning under nested cross-validation: the base level that
//! produces paired tuned/default scores per dataset.

pub mod space;

use std::collections::{BTreeMap, BTreeSet};
use std::time::Instant;

use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::data::Dataset;
use crate::error::{Error, Result};
use crate::eval::{self, stratified_kfold, EvaluationRecord, FoldAssignment, Metric, Strategy};
use crate::learners::{self, declared_space, LearnerKind, LearnerSpec};
use crate::matrix::Matrix;
use crate::rng::{derive_seed, derived_stream};
use space::{sample_setting, HpSetting, HpSpace, HpValue, ParamDefault};

/// A named default hyperparameter setting. Values may be symbolic
/// (`1/N`), resolved per dataset.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DefaultSetting {
    pub id: String,
    pub values: BTreeMap<String, ParamDefault>,
}

impl DefaultSetting {
    /// The learner's declared defaults (C = 1, gamma = 1/N for the SVM).
    pub fn reference(kind: LearnerKind, id: &str) -> DefaultSetting {
        DefaultSetting {
            id: id.to_string(),
            values: declared_space(kind)
                .params
                .into_iter()
                .map(|p| (p.name, p.default))
                .collect(),
        }
    }

    /// Second SVM default shipped for demonstration only: it is not one of
    /// the optimized defaults used in published studies.
    pub fn svm_placeholder() -> DefaultSetting {
        DefaultSetting {
            id: "placeholder".into(),
            values: BTreeMap::from([
                ("cost".to_string(), ParamDefault::Value(HpValue::Real(32.0))),
                ("gamma".to_string(), ParamDefault::Value(HpValue::Real(1.0 / 32.0))),
            ]),
        }
    }

    pub fn resolve(&self, n_features: usize) -> HpSetting {
        let mut s = HpSetting::new();
        for (k, v) in &self.values {
            let value = match v {
                ParamDefault::Value(v) => v.clone(),
                ParamDefault::InverseFeatureCount => HpValue::Real(1.0 / n_features.max(1) as f64),
            };
            s.values.insert(k.clone(), value);
        }
        s
    }

    fn same_values(&self, other: &DefaultSetting) -> bool {
        self.values.len() == other.values.len()
            && self.values.iter().all(|(k, v)| match (v, other.values.get(k)) {
                (ParamDefault::Value(a), Some(ParamDefault::Value(b))) => a.as_f64().zip(b.as_f64()).map_or(a == b, |(x, y)| x == y),
                (ParamDefault::InverseFeatureCount, Some(ParamDefault::InverseFeatureCount)) => true,
                _ => false,
            })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TuningConfig {
    pub base_learner: LearnerKind,
    pub budget: usize,
    pub outer_k: usize,
    pub inner_k: usize,
    pub seeds: Vec<u64>,
    /// Skip-and-flag limit per dataset, in seconds.
    pub walltime_per_dataset: Option<f64>,
}

impl Default for TuningConfig {
    fn default() -> Self {
        TuningConfig {
            base_learner: LearnerKind::SvmRbf,
            budget: 300,
            outer_k: 10,
            inner_k: 3,
            seeds: (1..=10).collect(),
            walltime_per_dataset: None,
        }
    }
}

impl TuningConfig {
    pub fn total_evaluations(&self) -> usize {
        self.outer_k * self.inner_k * self.budget * self.seeds.len()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SearchResult {
    pub best: HpSetting,
    pub best_score: f64,
    /// (setting, mean inner score) in evaluation order.
    pub history: Vec<(HpSetting, f64)>,
    pub failures: usize,
}

/// Evaluates exactly `budget` sampled settings by mean inner-fold score and
/// returns the first best. Failed evaluations score 0.
#[allow(clippy::too_many_arguments)]
pub fn random_search<R: Rng + ?Sized>(
    x: &Matrix,
    y: &[usize],
    n_classes: usize,
    kind: LearnerKind,
    space: &HpSpace,
    budget: usize,
    folds: &FoldAssignment,
    metric: Metric,
    rng: &mut R,
    deadline: Option<Instant>,
) -> Result<SearchResult> {
    if budget == 0 {
        return Err(Error::InvalidArgument("budget must be >= 1".into()));
    }
    if space.is_empty() {
        return Err(Error::InvalidArgument(format!("learner `{kind}` has no tunable hyperparameters")));
    }
    let mut history = Vec::with_capacity(budget);
    let mut failures = 0;
    let mut best: Option<(usize, f64)> = None;
    for b in 0..budget {
        if deadline.is_some_and(|d| Instant::now() > d) {
            return Err(Error::InvalidArgument("walltime exceeded".into()));
        }
        let setting = sample_setting(space, rng);
        let spec = LearnerSpec::with_setting(kind, setting.clone());
        let eval_seed = derive_seed("search-eval", &[b as u64]);
        let score = match eval::cross_validate(&spec, x, y, n_classes, folds, metric, eval_seed) {
            Ok(r) => r.mean(),
            Err(_) => {
                failures += 1;
                0.0
            }
        };
        if best.is_none_or(|(_, s)| score > s) {
            best = Some((b, score));
        }
        history.push((setting, score));
    }
    let (bi, best_score) = best.expect("budget >= 1");
    Ok(SearchResult {
        best: history[bi].0.clone(),
        best_score,
        history,
        failures,
    })
}

/// Index sets used in one (seed, outer fold) unit, in original row indices.
#[derive(Debug, Clone, PartialEq)]
pub struct NestedTrace {
    pub seed: u64,
    pub outer_fold: usize,
    pub outer_train: Vec<usize>,
    pub outer_test: Vec<usize>,
    /// (inner train, inner test) pairs.
    pub inner: Vec<(Vec<usize>, Vec<usize>)>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TuningOutcome {
    pub dataset: String,
    pub tuned_records: Vec<EvaluationRecord>,
    pub default_records: Vec<EvaluationRecord>,
    /// Default ids in configured order.
    pub default_ids: Vec<String>,
    pub budget: usize,
    pub seeds: Vec<u64>,
    pub outer_k: usize,
    pub inner_k: usize,
    pub total_evaluations: usize,
    pub complete: bool,
}

impl TuningOutcome {
    /// Groups records of one dataset; completeness requires every
    /// (seed, outer fold) pair to carry a tuned and every default record.
    pub fn from_records(dataset: &str, records: &[EvaluationRecord], cfg: &TuningConfig, default_ids: &[String]) -> TuningOutcome {
        let mut tuned = BTreeMap::new();
        let mut defaults = BTreeMap::new();
        for r in records.iter().filter(|r| r.dataset == dataset) {
            if !cfg.seeds.contains(&r.seed) || r.outer_fold >= cfg.outer_k {
                continue;
            }
            match &r.strategy {
                Strategy::Tuned => {
                    tuned.insert((r.seed, r.outer_fold), r.clone());
                }
                Strategy::Default(id) if default_ids.contains(id) => {
                    defaults.insert((id.clone(), r.seed, r.outer_fold), r.clone());
                }
                Strategy::Default(_) => {}
            }
        }
        let expected = cfg.seeds.len() * cfg.outer_k;
        let complete = tuned.len() == expected && defaults.len() == expected * default_ids.len();
        TuningOutcome {
            dataset: dataset.to_string(),
            tuned_records: tuned.into_values().collect(),
            default_records: defaults.into_values().collect(),
            default_ids: default_ids.to_vec(),
            budget: cfg.budget,
            seeds: cfg.seeds.clone(),
            outer_k: cfg.outer_k,
            inner_k: cfg.inner_k,
            total_evaluations: cfg.total_evaluations(),
            complete,
        }
    }

    pub fn records_for(&self, strategy: &Strategy) -> Vec<&EvaluationRecord> {
        match strategy {
            Strategy::Tuned => self.tuned_records.iter().collect(),
            Strategy::Default(id) => self
                .default_records
                .iter()
                .filter(|r| matches!(&r.strategy, Strategy::Default(d) if d == id))
                .collect(),
        }
    }
}

pub fn check_defaults(kind: LearnerKind, defaults: &[DefaultSetting]) -> Result<()> {
    let reference = DefaultSetting::reference(kind, "reference");
    if defaults.iter().any(|d| d.same_values(&reference)) {
        Ok(())
    } else {
        Err(Error::MissingReferenceDefault(
            reference
                .values
                .iter()
                .map(|(k, v)| match v {
                    ParamDefault::Value(v) => format!("{k}={v}"),
                    ParamDefault::InverseFeatureCount => format!("{k}=1/N"),
                })
                .collect::<Vec<_>>()
                .join(", "),
        ))
    }
}

/// Id of the entry equal to the learner's declared defaults.
pub fn reference_id(kind: LearnerKind, defaults: &[DefaultSetting]) -> Option<String> {
    let reference = DefaultSetting::reference(kind, "reference");
    defaults.iter().find(|d| d.same_values(&reference)).map(|d| d.id.clone())
}

fn outer_seed(dataset: &str, seed: u64) -> u64 {
    derive_seed(&format!("outer:{dataset}"), &[seed])
}

/// Runs one (seed, outer fold) unit: tune on the outer-training split,
/// refit the winner, score it and every default on the outer-test fold.
pub fn run_unit(
    d: &Dataset,
    defaults: &[DefaultSetting],
    cfg: &TuningConfig,
    seed: u64,
    outer_fold: usize,
    outer: &FoldAssignment,
    deadline: Option<Instant>,
) -> Result<(Vec<EvaluationRecord>, NestedTrace)> {
    let outer_train = outer.train_indices(outer_fold);
    let outer_test = outer.test_indices(outer_fold);
    let xtr = d.x.select_rows(&outer_train);
    let ytr: Vec<usize> = outer_train.iter().map(|&i| d.y[i]).collect();
    let xte = d.x.select_rows(&outer_test);
    let yte: Vec<usize> = outer_test.iter().map(|&i| d.y[i]).collect();
    let unit_seed = derive_seed(&format!("unit:{}", d.name), &[seed, outer_fold as u64]);
    let inner = stratified_kfold(&ytr, cfg.inner_k, unit_seed)?;
    let trace = NestedTrace {
        seed,
        outer_fold,
        outer_train: outer_train.clone(),
        outer_test: outer_test.clone(),
        inner: (0..inner.k)
            .map(|f| {
                (
                    inner.train_indices(f).into_iter().map(|i| outer_train[i]).collect(),
                    inner.test_indices(f).into_iter().map(|i| outer_train[i]).collect(),
                )
            })
            .collect(),
    };
    let mut records = Vec::with_capacity(1 + defaults.len());
    let space = declared_space(cfg.base_learner);
    let fit_and_score = |setting: &HpSetting| -> f64 {
        let spec = LearnerSpec::with_setting(cfg.base_learner, setting.clone());
        learners::train(&spec, &xtr, &ytr, d.n_classes, unit_seed)
            .and_then(|m| m.predict(&xte))
            .and_then(|p| eval::bac(&yte, &p.iter().map(|p| p.class).collect::<Vec<_>>()))
            .unwrap_or(0.0)
    };

    let start = Instant::now();
    let mut rng = derived_stream(&format!("search:{}", d.name), &[seed, outer_fold as u64]);
    let search = random_search(
        &xtr,
        &ytr,
        d.n_classes,
        cfg.base_learner,
        &space,
        cfg.budget,
        &inner,
        Metric::Bac,
        &mut rng,
        deadline,
    )?;
    let score = fit_and_score(&search.best);
    records.push(EvaluationRecord {
        dataset: d.name.clone(),
        strategy: Strategy::Tuned,
        seed,
        outer_fold,
        score,
        runtime: start.elapsed().as_secs_f64(),
        setting: search.best,
    });
    for def in defaults {
        let setting = def.resolve(d.n_features());
        let start = Instant::now();
        let score = fit_and_score(&setting);
        records.push(EvaluationRecord {
            dataset: d.name.clone(),
            strategy: Strategy::Default(def.id.clone()),
            seed,
            outer_fold,
            score,
            runtime: start.elapsed().as_secs_f64(),
            setting,
        });
    }
    Ok((records, trace))
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct RunSummary {
    pub new_units: usize,
    pub new_evaluations: usize,
    pub complete: bool,
}

/// Resumable base-level run. Units listed in `done` are skipped; each new
/// unit's records are handed to `sink` in (seed, fold) order.
pub fn run_base_level_resumable(
    d: &Dataset,
    defaults: &[DefaultSetting],
    cfg: &TuningConfig,
    done: &BTreeSet<(u64, usize)>,
    sink: &mut dyn FnMut(&[EvaluationRecord], &NestedTrace) -> Result<()>,
) -> Result<RunSummary> {
    if defaults.is_empty() {
        return Err(Error::InvalidArgument("defaults list is empty".into()));
    }
    check_defaults(cfg.base_learner, defaults)?;
    if cfg.budget == 0 || cfg.seeds.is_empty() {
        return Err(Error::InvalidArgument("budget and seeds must be nonempty".into()));
    }
    let deadline = cfg
        .walltime_per_dataset
        .map(|s| Instant::now() + std::time::Duration::from_secs_f64(s));
    let mut units = Vec::new();
    let mut outers = BTreeMap::new();
    for &seed in &cfg.seeds {
        let outer = stratified_kfold(&d.y, cfg.outer_k, outer_seed(&d.name, seed))?;
        for f in 0..cfg.outer_k {
            if !done.contains(&(seed, f)) {
                units.push((seed, f));
            }
        }
        outers.insert(seed, outer);
    }
    let results: Vec<Result<(Vec<EvaluationRecord>, NestedTrace)>> = units
        .par_iter()
        .map(|&(seed, f)| run_unit(d, defaults, cfg, seed, f, &outers[&seed], deadline))
        .collect();
    let mut summary = RunSummary {
        complete: true,
        ..RunSummary::default()
    };
    for r in results {
        match r {
            Ok((records, trace)) => {
                sink(&records, &trace)?;
                summary.new_units += 1;
                summary.new_evaluations += cfg.inner_k * cfg.budget;
            }
            Err(_) => summary.complete = false,
        }
    }
    Ok(summary)
}

/// Runs every unit and assembles the outcome in memory.
pub fn run_base_level(d: &Dataset, defaults: &[DefaultSetting], cfg: &TuningConfig) -> Result<TuningOutcome> {
    let mut records = Vec::new();
    run_base_level_resumable(d, defaults, cfg, &BTreeSet::new(), &mut |r, _| {
        records.extend_from_slice(r);
        Ok(())
    })?;
    let ids: Vec<String> = defaults.iter().map(|d| d.id.clone()).collect();
    Ok(TuningOutcome::from_records(&d.name, &records, cfg, &ids))
}
