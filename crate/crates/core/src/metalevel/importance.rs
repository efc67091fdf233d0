use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::learners::forest;
use crate::metalevel::MetaDataset;
use crate::rng::derive_seed;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FeatureImportance {
    pub name: String,
    pub mean: f64,
    pub sd: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ImportanceReport {
    /// Sorted by decreasing mean importance.
    pub ranking: Vec<FeatureImportance>,
    pub repetitions: usize,
}

impl ImportanceReport {
    pub fn rank_of(&self, name: &str) -> Option<usize> {
        self.ranking.iter().position(|f| f.name == name)
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::from("rank,feature,mean,sd\n");
        for (i, f) in self.ranking.iter().enumerate() {
            out.push_str(&format!("{},{},{:e},{:e}\n", i + 1, f.name, f.mean, f.sd));
        }
        out
    }
}

/// Gini importances of a random forest grown on the whole meta-dataset,
/// once per repetition. Columns are put in name order before training so
/// that the result does not depend on the column order of `md`.
pub fn rf_importance(md: &MetaDataset, repetitions: usize, base_seed: u64, ntree: usize) -> Result<ImportanceReport> {
    let p = md.schema.len();
    if p < 2 {
        return Err(Error::InvalidArgument(format!("importance needs at least 2 features, found {p}")));
    }
    let mut order: Vec<usize> = (0..p).collect();
    order.sort_by(|&a, &b| md.schema[a].cmp(&md.schema[b]));
    let x = md.x().select_cols(&order);
    let y = md.y();
    let reps: Vec<Vec<f64>> = (0..repetitions.max(1))
        .into_par_iter()
        .map(|r| {
            let seed = derive_seed("importance", &[base_seed, r as u64]);
            forest::train(&x, &y, 2, ntree, 1, seed).gini_importance()
        })
        .collect();
    let r = reps.len() as f64;
    let mut ranking: Vec<FeatureImportance> = order
        .iter()
        .enumerate()
        .map(|(j, &col)| {
            let mean = reps.iter().map(|v| v[j]).sum::<f64>() / r;
            let var = if reps.len() > 1 {
                reps.iter().map(|v| (v[j] - mean).powi(2)).sum::<f64>() / (r - 1.0)
            } else {
                0.0
            };
            FeatureImportance {
                name: md.schema[col].clone(),
                mean,
                sd: var.sqrt(),
            }
        })
        .collect();
    // stable: ties keep name order
    ranking.sort_by(|a, b| b.mean.total_cmp(&a.mean));
    Ok(ImportanceReport {
        ranking,
        repetitions: reps.len(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::labeling::MetaClass;
    use crate::metalevel::MetaExample;
    use crate::rng::stream;
    use rand::Rng;

    fn planted(seed: u64) -> MetaDataset {
        let mut rng = stream(seed);
        let schema: Vec<String> = ["a", "b", "copy", "constant", "d"].iter().map(|s| s.to_string()).collect();
        let examples = (0..60)
            .map(|i| {
                let label = MetaClass::from_index(i % 2);
                MetaExample {
                    dataset: format!("d{i:02}"),
                    values: vec![rng.random(), rng.random(), label.index() as f64, 3.0, rng.random()],
                    label,
                }
            })
            .collect();
        MetaDataset::new(0.05, schema, examples).unwrap()
    }

    #[test]
    fn label_copy_dominates() {
        let rep = rf_importance(&planted(1), 5, 1, 100).unwrap();
        assert_eq!(rep.ranking[0].name, "copy");
        let total: f64 = rep.ranking.iter().map(|f| f.mean).sum();
        assert!(rep.ranking[0].mean / total > 0.5);
        assert_eq!(rep.ranking[rep.ranking.len() - 1].name, "constant");
        assert_eq!(rep.ranking[rep.ranking.len() - 1].mean, 0.0);
        for f in &rep.ranking {
            assert!(f.mean >= 0.0 && f.mean.is_finite() && f.sd.is_finite());
        }
        assert!(rep.ranking.windows(2).all(|w| w[0].mean >= w[1].mean));
    }

    #[test]
    fn column_permutation_only_renames() {
        let md = planted(2);
        let perm = [3, 0, 4, 2, 1];
        let schema = perm.iter().map(|&j| md.schema[j].clone()).collect();
        let examples = md
            .examples
            .iter()
            .map(|e| MetaExample {
                values: perm.iter().map(|&j| e.values[j]).collect(),
                ..e.clone()
            })
            .collect();
        let shuffled = MetaDataset::new(md.alpha, schema, examples).unwrap();
        assert_eq!(rf_importance(&md, 3, 5, 50).unwrap(), rf_importance(&shuffled, 3, 5, 50).unwrap());
    }
}
