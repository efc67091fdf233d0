//! Meta-level decisions projected back onto the recorded base-level scores
//! and runtimes.

use std::collections::BTreeMap;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::eval::{EvaluationRecord, Strategy};
use crate::labeling::MetaClass;
use crate::rng::derived_stream;
use crate::svg;
use crate::tuning::TuningOutcome;

/// Both branches of one dataset as recorded.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Branches {
    pub dataset: String,
    pub tuned_bac: f64,
    /// Total runtime of the tuned units (search plus final fit).
    pub tuned_runtime: f64,
    /// Mean BAC of the best default for this dataset.
    pub default_bac: f64,
    pub default_id: String,
    /// Runtime of evaluating every configured default.
    pub default_runtime: f64,
    /// Mean BAC and runtime of each default separately.
    pub per_default: BTreeMap<String, (f64, f64)>,
}

fn mean_and_total(records: &[&EvaluationRecord]) -> (f64, f64) {
    let n = records.len().max(1) as f64;
    (
        records.iter().map(|r| r.score).sum::<f64>() / n,
        records.iter().map(|r| r.runtime).sum(),
    )
}

impl Branches {
    pub fn from_outcome(o: &TuningOutcome) -> Result<Branches> {
        if !o.complete || o.default_ids.is_empty() {
            return Err(Error::IncompleteOutcome(o.dataset.clone()));
        }
        let (tuned_bac, tuned_runtime) = mean_and_total(&o.records_for(&Strategy::Tuned));
        let mut ids = o.default_ids.clone();
        ids.sort();
        let per_default: BTreeMap<String, (f64, f64)> = ids
            .iter()
            .map(|id| (id.clone(), mean_and_total(&o.records_for(&Strategy::Default(id.clone())))))
            .collect();
        let mut best: Option<(&String, f64)> = None;
        for (id, (bac, _)) in &per_default {
            if best.is_none_or(|(_, b)| *bac > b) {
                best = Some((id, *bac));
            }
        }
        let (default_id, default_bac) = best.expect("nonempty defaults");
        Ok(Branches {
            dataset: o.dataset.clone(),
            tuned_bac,
            tuned_runtime,
            default_bac,
            default_id: default_id.clone(),
            default_runtime: per_default.values().map(|v| v.1).sum(),
            per_default,
        })
    }

    fn pick(&self, choice: MetaClass) -> (f64, f64) {
        match choice {
            MetaClass::Tuning => (self.tuned_bac, self.tuned_runtime),
            MetaClass::Defaults => (self.default_bac, self.default_runtime),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProjectionEntry {
    pub dataset: String,
    /// `None` for policies that are not a Tuning/Defaults choice.
    pub choice: Option<MetaClass>,
    pub bac: f64,
    /// Includes `extraction_time`.
    pub runtime: f64,
    pub extraction_time: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StrategyProjection {
    pub strategy: String,
    pub mean_bac: f64,
    pub mean_runtime: f64,
    pub mean_extraction_time: f64,
    pub entries: Vec<ProjectionEntry>,
}

impl StrategyProjection {
    fn from_entries(strategy: String, entries: Vec<ProjectionEntry>) -> Self {
        let n = entries.len().max(1) as f64;
        StrategyProjection {
            strategy,
            mean_bac: entries.iter().map(|e| e.bac).sum::<f64>() / n,
            mean_runtime: entries.iter().map(|e| e.runtime).sum::<f64>() / n,
            mean_extraction_time: entries.iter().map(|e| e.extraction_time).sum::<f64>() / n,
            entries,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProjectionReport {
    pub strategies: Vec<StrategyProjection>,
}

impl ProjectionReport {
    pub fn get(&self, strategy: &str) -> Option<&StrategyProjection> {
        self.strategies.iter().find(|s| s.strategy == strategy)
    }

    pub fn summary_csv(&self) -> String {
        let mut out = String::from("strategy,mean_bac,mean_runtime,mean_extraction_time\n");
        for s in &self.strategies {
            out.push_str(&format!("{},{:.6},{:.6},{:.6}\n", s.strategy, s.mean_bac, s.mean_runtime, s.mean_extraction_time));
        }
        out
    }

    pub fn entries_csv(&self) -> String {
        let mut out = String::from("strategy,dataset,choice,bac,runtime,extraction_time\n");
        for s in &self.strategies {
            for e in &s.entries {
                let choice = e.choice.map(|c| c.to_string()).unwrap_or_else(|| "-".into());
                out.push_str(&format!(
                    "{},{},{},{:.6},{:.6},{:.6}\n",
                    s.strategy, e.dataset, choice, e.bac, e.runtime, e.extraction_time
                ));
            }
        }
        out
    }

    /// Mean runtime against mean BAC per strategy.
    pub fn svg(&self) -> String {
        let pts: Vec<(&str, f64, f64)> = self.strategies.iter().map(|s| (s.strategy.as_str(), s.mean_runtime, s.mean_bac)).collect();
        svg::scatter("Average BAC and runtime", "mean runtime (s)", "mean BAC", &pts)
    }
}

/// Baselines plus one strategy per prediction map. Baselines: `tuning`;
/// `defaults` (best default of each dataset); `defaults-global` (the one
/// default with the best mean over all datasets); `random` (seeded fair
/// coin per dataset); `oracle` (the better branch of each dataset).
/// Meta strategies are charged the meta-feature extraction time.
pub fn project(
    outcomes: &[TuningOutcome],
    predictions: &[(String, BTreeMap<String, MetaClass>)],
    extraction_time: &BTreeMap<String, f64>,
    random_seed: u64,
) -> Result<ProjectionReport> {
    let mut branches: Vec<Branches> = outcomes.iter().map(Branches::from_outcome).collect::<Result<_>>()?;
    branches.sort_by(|a, b| a.dataset.cmp(&b.dataset));
    for (name, p) in predictions {
        for d in p.keys() {
            if !branches.iter().any(|b| &b.dataset == d) {
                return Err(Error::InvalidArgument(format!("strategy `{name}` predicts `{d}`, which has no outcome")));
            }
        }
    }
    let choose = |f: &dyn Fn(&Branches) -> MetaClass, extraction: bool| -> Vec<ProjectionEntry> {
        branches
            .iter()
            .map(|b| {
                let c = f(b);
                let (bac, rt) = b.pick(c);
                let ex = if extraction {
                    extraction_time.get(&b.dataset).copied().unwrap_or(0.0)
                } else {
                    0.0
                };
                ProjectionEntry {
                    dataset: b.dataset.clone(),
                    choice: Some(c),
                    bac,
                    runtime: rt + ex,
                    extraction_time: ex,
                }
            })
            .collect()
    };
    let mut strategies = vec![
        StrategyProjection::from_entries("tuning".into(), choose(&|_| MetaClass::Tuning, false)),
        StrategyProjection::from_entries("defaults".into(), choose(&|_| MetaClass::Defaults, false)),
    ];

    // one default policy for every dataset
    let mut totals: BTreeMap<&str, f64> = BTreeMap::new();
    for b in &branches {
        for (id, (bac, _)) in &b.per_default {
            *totals.entry(id.as_str()).or_default() += bac;
        }
    }
    let mut global: Option<(&str, f64)> = None;
    for (id, t) in &totals {
        if global.is_none_or(|(_, g)| *t > g) {
            global = Some((id, *t));
        }
    }
    if let Some((gid, _)) = global {
        let entries = branches
            .iter()
            .map(|b| {
                let (bac, rt) = b.per_default.get(gid).copied().unwrap_or((b.default_bac, b.default_runtime));
                ProjectionEntry {
                    dataset: b.dataset.clone(),
                    choice: None,
                    bac,
                    runtime: rt,
                    extraction_time: 0.0,
                }
            })
            .collect();
        strategies.push(StrategyProjection::from_entries("defaults-global".into(), entries));
    }

    let mut rng = derived_stream("projection-random", &[random_seed]);
    let coins: BTreeMap<String, MetaClass> = branches
        .iter()
        .map(|b| (b.dataset.clone(), if rng.random::<bool>() { MetaClass::Tuning } else { MetaClass::Defaults }))
        .collect();
    strategies.push(StrategyProjection::from_entries("random".into(), choose(&|b| coins[&b.dataset], false)));
    strategies.push(StrategyProjection::from_entries(
        "oracle".into(),
        choose(
            &|b| {
                if b.tuned_bac > b.default_bac {
                    MetaClass::Tuning
                } else {
                    MetaClass::Defaults
                }
            },
            false,
        ),
    ));
    for (name, p) in predictions {
        let missing: Vec<&str> = branches.iter().filter(|b| !p.contains_key(&b.dataset)).map(|b| b.dataset.as_str()).collect();
        if !missing.is_empty() {
            return Err(Error::InvalidArgument(format!("strategy `{name}` has no prediction for {}", missing.join(", "))));
        }
        strategies.push(StrategyProjection::from_entries(format!("meta:{name}"), choose(&|b| p[&b.dataset], true)));
    }
    Ok(ProjectionReport { strategies })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CurveRow {
    pub dataset: String,
    pub reference: f64,
    pub multiple: f64,
    pub tuned: f64,
}

/// Per dataset: mean BAC of the reference default, of the best of all
/// defaults and of tuning; sorted by decreasing reference BAC.
pub fn defaults_comparison_curves(outcomes: &[TuningOutcome], reference_id: &str) -> Result<Vec<CurveRow>> {
    let mut rows = Vec::new();
    for o in outcomes.iter().filter(|o| o.complete) {
        let b = Branches::from_outcome(o)?;
        let reference = b
            .per_default
            .get(reference_id)
            .map(|v| v.0)
            .ok_or_else(|| Error::MissingReferenceDefault(reference_id.to_string()))?;
        rows.push(CurveRow {
            dataset: b.dataset,
            reference,
            multiple: b.default_bac,
            tuned: b.tuned_bac,
        });
    }
    rows.sort_by(|a, b| b.reference.total_cmp(&a.reference).then_with(|| a.dataset.cmp(&b.dataset)));
    Ok(rows)
}

pub fn curves_csv(rows: &[CurveRow]) -> String {
    let mut out = String::from("position,dataset,reference_defaults,multiple_defaults,tuned\n");
    for (i, r) in rows.iter().enumerate() {
        out.push_str(&format!("{},{},{:.6},{:.6},{:.6}\n", i + 1, r.dataset, r.reference, r.multiple, r.tuned));
    }
    out
}

pub fn curves_svg(rows: &[CurveRow]) -> String {
    svg::line_chart(
        "Defaults against tuning",
        "dataset (by reference-default BAC)",
        "mean BAC",
        &[
            ("reference defaults", rows.iter().map(|r| r.reference).collect()),
            ("multiple defaults", rows.iter().map(|r| r.multiple).collect()),
            ("random search", rows.iter().map(|r| r.tuned).collect()),
        ],
    )
}
