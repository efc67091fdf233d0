//! Meta-label rule: did tuning significantly beat the best default?

pub mod friedman;
pub mod wilcoxon;

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::eval::Strategy;
use crate::tuning::TuningOutcome;
pub use friedman::{critical_difference, friedman_nemenyi, FriedmanResult};
pub use wilcoxon::{wilcoxon_signed_rank, Alternative, WilcoxonResult};

pub const DEFAULT_ALPHAS: [f64; 3] = [0.10, 0.05, 0.01];

/// Meta-target. As class indices: Tuning = 0, Defaults = 1 (the positive
/// class for AUC).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum MetaClass {
    Tuning,
    Defaults,
}

impl MetaClass {
    pub fn index(self) -> usize {
        match self {
            MetaClass::Tuning => 0,
            MetaClass::Defaults => 1,
        }
    }

    pub fn from_index(i: usize) -> MetaClass {
        if i == 0 {
            MetaClass::Tuning
        } else {
            MetaClass::Defaults
        }
    }
}

impl fmt::Display for MetaClass {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            MetaClass::Tuning => "Tuning",
            MetaClass::Defaults => "Defaults",
        })
    }
}

impl FromStr for MetaClass {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "tuning" => Ok(MetaClass::Tuning),
            "defaults" => Ok(MetaClass::Defaults),
            _ => Err(Error::InvalidArgument(format!("unknown meta class `{s}`"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MetaLabel {
    pub dataset: String,
    pub label: MetaClass,
    pub alpha: f64,
    pub p_value: f64,
    pub chosen_default: String,
    pub paired_n: usize,
    pub degenerate: bool,
}

/// Paired scores keyed by (seed, outer fold).
pub type PairedScores = BTreeMap<(u64, usize), f64>;

fn scores_of(outcome: &TuningOutcome, strategy: &Strategy) -> PairedScores {
    outcome
        .records_for(strategy)
        .into_iter()
        .map(|r| ((r.seed, r.outer_fold), r.score))
        .collect()
}

/// Default with the highest mean score; ties go to the lowest id.
pub fn best_default(outcome: &TuningOutcome) -> Result<(String, PairedScores)> {
    if !outcome.complete || outcome.default_ids.is_empty() {
        return Err(Error::IncompleteOutcome(outcome.dataset.clone()));
    }
    let mut ids = outcome.default_ids.clone();
    ids.sort();
    let mut best: Option<(String, PairedScores, f64)> = None;
    for id in ids {
        let s = scores_of(outcome, &Strategy::Default(id.clone()));
        if s.is_empty() {
            return Err(Error::IncompleteOutcome(outcome.dataset.clone()));
        }
        let mean = s.values().sum::<f64>() / s.len() as f64;
        if best.as_ref().is_none_or(|(_, _, m)| mean > *m) {
            best = Some((id, s, mean));
        }
    }
    let (id, s, _) = best.expect("nonempty defaults");
    Ok((id, s))
}

/// One-sided Wilcoxon of tuned against the best default over the
/// (seed, fold) pairs. Fewer than 3 nonzero differences count as no
/// evidence for tuning.
pub fn label_meta_example(outcome: &TuningOutcome, alpha: f64) -> Result<MetaLabel> {
    let (chosen, defaults) = best_default(outcome)?;
    let tuned = scores_of(outcome, &Strategy::Tuned);
    if tuned.keys().ne(defaults.keys()) {
        return Err(Error::IncompleteOutcome(outcome.dataset.clone()));
    }
    let x: Vec<f64> = tuned.values().copied().collect();
    let y: Vec<f64> = defaults.values().copied().collect();
    let (p_value, degenerate) = match wilcoxon_signed_rank(&x, &y, Alternative::Greater) {
        Ok(r) => (r.p_value, r.degenerate),
        Err(Error::InsufficientPairs(_)) => (1.0, true),
        Err(e) => return Err(e),
    };
    Ok(MetaLabel {
        dataset: outcome.dataset.clone(),
        label: if p_value < alpha {
            MetaClass::Tuning
        } else {
            MetaClass::Defaults
        },
        alpha,
        p_value,
        chosen_default: chosen,
        paired_n: x.len(),
        degenerate,
    })
}

pub const LABELS_HEADER: &str = "dataset,alpha,label,p_value,chosen_default,paired_n,degenerate";

pub fn labels_to_csv(labels: &[MetaLabel]) -> String {
    let mut out = String::from(LABELS_HEADER);
    out.push('\n');
    for l in labels {
        out.push_str(&format!(
            "{},{},{},{:e},{},{},{}\n",
            l.dataset, l.alpha, l.label, l.p_value, l.chosen_default, l.paired_n, l.degenerate
        ));
    }
    out
}

/// Parses the CSV produced by [`labels_to_csv`]; `#` lines are skipped.
pub fn labels_from_csv(text: &str) -> Result<Vec<MetaLabel>> {
    let mut out = Vec::new();
    for (n, line) in text.lines().enumerate() {
        if line.starts_with('#') || line.trim().is_empty() || line == LABELS_HEADER {
            continue;
        }
        let f: Vec<&str> = line.split(',').collect();
        let bad = |m: &str| Error::Parse {
            path: "labels.csv".into(),
            line: n + 1,
            message: m.to_string(),
        };
        if f.len() != 7 {
            return Err(bad("expected 7 fields"));
        }
        out.push(MetaLabel {
            dataset: f[0].to_string(),
            alpha: f[1].parse().map_err(|_| bad("alpha"))?,
            label: f[2].parse()?,
            p_value: f[3].parse().map_err(|_| bad("p_value"))?,
            chosen_default: f[4].to_string(),
            paired_n: f[5].parse().map_err(|_| bad("paired_n"))?,
            degenerate: f[6].parse().map_err(|_| bad("degenerate"))?,
        });
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::eval::EvaluationRecord;
    use crate::tuning::space::HpSetting;
    use crate::tuning::TuningConfig;

    fn outcome(tuned: &[f64], defaults: &[(&str, Vec<f64>)]) -> TuningOutcome {
        let cfg = TuningConfig {
            outer_k: tuned.len(),
            seeds: vec![1],
            budget: 1,
            ..TuningConfig::default()
        };
        let rec = |strategy: Strategy, f: usize, score: f64| EvaluationRecord {
            dataset: "d".into(),
            strategy,
            seed: 1,
            outer_fold: f,
            score,
            runtime: 0.0,
            setting: HpSetting::new(),
        };
        let mut records: Vec<EvaluationRecord> = tuned.iter().enumerate().map(|(f, &s)| rec(Strategy::Tuned, f, s)).collect();
        for (id, s) in defaults {
            records.extend(s.iter().enumerate().map(|(f, &v)| rec(Strategy::Default(id.to_string()), f, v)));
        }
        let ids: Vec<String> = defaults.iter().map(|(id, _)| id.to_string()).collect();
        TuningOutcome::from_records("d", &records, &cfg, &ids)
    }

    #[test]
    fn best_default_picks_highest_mean_then_lowest_id() {
        let o = outcome(&[0.8; 4], &[("b", vec![0.70; 4]), ("a", vec![0.74; 4])]);
        assert_eq!(best_default(&o).unwrap().0, "a");
        let o = outcome(&[0.8; 4], &[("z", vec![0.7; 4]), ("m", vec![0.7; 4])]);
        assert_eq!(best_default(&o).unwrap().0, "m");
        let o = outcome(&[0.8; 4], &[("only", vec![0.1; 4])]);
        assert_eq!(best_default(&o).unwrap().0, "only");
    }

    #[test]
    fn clear_tuning_win() {
        let o = outcome(&[0.9; 30], &[("libsvm", vec![0.7; 30])]);
        let l = label_meta_example(&o, 0.05).unwrap();
        assert_eq!(l.label, MetaClass::Tuning);
        assert_eq!(l.paired_n, 30);
    }

    #[test]
    fn exact_tie_is_degenerate_defaults() {
        let o = outcome(&[0.8; 10], &[("libsvm", vec![0.8; 10])]);
        let l = label_meta_example(&o, 0.10).unwrap();
        assert_eq!(l.label, MetaClass::Defaults);
        assert!(l.degenerate);
        assert_eq!(l.p_value, 1.0);
    }

    #[test]
    fn monotone_in_alpha() {
        let tuned: Vec<f64> = (0..10).map(|i| 0.7 + 0.02 * (i % 4) as f64).collect();
        let o = outcome(&tuned, &[("libsvm", vec![0.71; 10])]);
        let labels: Vec<MetaClass> = [0.01, 0.05, 0.10].iter().map(|&a| label_meta_example(&o, a).unwrap().label).collect();
        for w in labels.windows(2) {
            assert!(!(w[0] == MetaClass::Tuning && w[1] == MetaClass::Defaults));
        }
    }

    #[test]
    fn incomplete_outcome_is_rejected() {
        let mut o = outcome(&[0.9; 5], &[("libsvm", vec![0.7; 5])]);
        o.complete = false;
        assert!(matches!(label_meta_example(&o, 0.05), Err(Error::IncompleteOutcome(_))));
    }

    #[test]
    fn csv_roundtrip() {
        let o = outcome(&[0.9; 8], &[("libsvm", vec![0.7; 8])]);
        let l = label_meta_example(&o, 0.05).unwrap();
        let back = labels_from_csv(&labels_to_csv(std::slice::from_ref(&l))).unwrap();
        assert_eq!(back, vec![l]);
    }
}
