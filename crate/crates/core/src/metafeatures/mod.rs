//! Dataset characterization: 80 meta-features in seven categories plus ten
//! relative-landmarking differences.

mod complexity;
mod infotheo;
mod landmarking;
mod model_based;
mod network;
mod simple;
mod statistical;

use std::time::Instant;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::data::Dataset;
use crate::error::{Error, Result};

pub use complexity::extract_data_complexity;
pub use infotheo::{discretize, extract_infotheoretic};
pub use landmarking::{extract_landmarking, extract_relative_landmarking, landmark_scores, LandmarkScores};
pub use model_based::extract_model_based;
pub use network::{betweenness, build_graph, extract_complex_network, Graph};
pub use simple::extract_simple;
pub use statistical::{canonical_correlations, extract_statistical};

/// Seed for every randomized step inside extraction.
pub const INTERNAL_SEED: u64 = 1;

/// Cap applied to ratios whose denominator vanishes.
pub const RATIO_CAP: f64 = 1e6;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Category {
    Simple,
    Statistical,
    InfoTheoretic,
    ModelBased,
    Landmarking,
    DataComplexity,
    ComplexNetwork,
    RelativeLandmarking,
}

impl Category {
    pub const ALL: [Category; 8] = [
        Category::Simple,
        Category::Statistical,
        Category::InfoTheoretic,
        Category::ModelBased,
        Category::Landmarking,
        Category::DataComplexity,
        Category::ComplexNetwork,
        Category::RelativeLandmarking,
    ];

    pub fn prefix(self) -> &'static str {
        match self {
            Category::Simple => "SM",
            Category::Statistical => "ST",
            Category::InfoTheoretic => "IN",
            Category::ModelBased => "MB",
            Category::Landmarking => "LM",
            Category::DataComplexity => "DC",
            Category::ComplexNetwork => "CN",
            Category::RelativeLandmarking => "RL",
        }
    }

    /// (short name, description) in canonical order.
    pub fn entries(self) -> &'static [(&'static str, &'static str)] {
        match self {
            Category::Simple => &[
                ("classes", "Number of classes"),
                ("attributes", "Number of attributes"),
                ("numeric", "Number of numerical attributes"),
                ("nominal", "Number of nominal attributes"),
                ("samples", "Number of examples"),
                ("dimension", "samples/attributes"),
                ("numRate", "numeric/attributes"),
                ("nomRate", "nominal/attributes"),
                ("symbols_min", "Categories per nominal attribute (min)"),
                ("symbols_max", "Categories per nominal attribute (max)"),
                ("symbols_mean", "Categories per nominal attribute (mean)"),
                ("symbols_sd", "Categories per nominal attribute (sd)"),
                ("symbols_sum", "Categories per nominal attribute (sum)"),
                ("classes_min", "Relative class frequency (min)"),
                ("classes_max", "Relative class frequency (max)"),
                ("classes_mean", "Relative class frequency (mean)"),
                ("classes_sd", "Relative class frequency (sd)"),
            ],
            Category::Statistical => &[
                ("sks", "Skewness"),
                ("sksP", "Skewness for normalized dataset"),
                ("kts", "Kurtosis"),
                ("ktsP", "Kurtosis for normalized dataset"),
                ("absC", "Correlation between attributes"),
                ("canC", "Canonical correlation between matrices"),
                ("frac", "Fraction of canonical correlation"),
            ],
            Category::InfoTheoretic => &[
                ("clEnt", "Class entropy"),
                ("nClEnt", "Class entropy for normalized dataset"),
                ("atrEnt", "Mean entropy of attributes"),
                ("nAtrEnt", "Mean entropy of attributes for normalized dataset"),
                ("jEnt", "Joint entropy"),
                ("mutInf", "Mutual information"),
                ("eqAtr", "clEnt/mutInf"),
                ("noiSig", "(atrEnt - mutInf)/mutInf"),
            ],
            Category::ModelBased => &[
                ("nodes", "Number of nodes"),
                ("leaves", "Number of leaves"),
                ("nodeAtr", "Number of nodes per attribute"),
                ("nodeIns", "Number of nodes per instance"),
                ("leafCor", "leaves/samples"),
                ("lev_min", "Leaf depth (min)"),
                ("lev_max", "Leaf depth (max)"),
                ("lev_mean", "Leaf depth (mean)"),
                ("lev_sd", "Leaf depth (sd)"),
                ("bran_min", "Nodes per tree level (min)"),
                ("bran_max", "Nodes per tree level (max)"),
                ("bran_mean", "Nodes per tree level (mean)"),
                ("bran_sd", "Nodes per tree level (sd)"),
                ("att_min", "Splits per attribute (min)"),
                ("att_max", "Splits per attribute (max)"),
                ("att_mean", "Splits per attribute (mean)"),
                ("att_sd", "Splits per attribute (sd)"),
            ],
            Category::Landmarking => &[
                ("nb", "Naive Bayes accuracy"),
                ("stump_min", "Single-attribute decision stump accuracy (min)"),
                ("stump_max", "Single-attribute decision stump accuracy (max)"),
                ("stump_mean", "Single-attribute decision stump accuracy (mean)"),
                ("stump_sd", "Single-attribute decision stump accuracy (sd)"),
                ("stMinGain", "Accuracy of the stump on the minimum gain-ratio attribute"),
                ("stRand", "Accuracy of the stump on a random attribute"),
                ("nn", "1-Nearest Neighbor accuracy"),
            ],
            Category::DataComplexity => &[
                ("f1", "Maximum Fisher's discriminant ratio"),
                ("f1v", "Directional-vector maximum Fisher's discriminant ratio"),
                ("f2", "Overlap of the per-class bounding boxes"),
                ("f3", "Maximum feature efficiency"),
                ("f4", "Collective feature efficiency"),
                ("l1", "Minimized sum of the error distance of a linear classifier"),
                ("l2", "Training error of a linear classifier"),
                ("l3", "Nonlinearity of a linear classifier"),
                ("n1", "Fraction of points on the class boundary"),
                ("n2", "Ratio of average intra/inter-class NN distance"),
                ("n3", "Leave-one-out error rate of the 1-NN classifier"),
                ("n4", "Nonlinearity of the 1-NN classifier"),
                ("t1", "Fraction of maximum covering spheres"),
                ("t2", "Average number of points per dimension"),
            ],
            Category::ComplexNetwork => &[
                ("edges", "Number of edges"),
                ("degree", "Average degree of the network"),
                ("density", "Average density of the network"),
                ("maxComp", "Number of connected components"),
                ("closeness", "Closeness centrality"),
                ("betweenness", "Betweenness centrality"),
                ("clsCoef", "Clustering coefficient"),
                ("hubs", "Hub score"),
                ("avgPath", "Average path length"),
            ],
            Category::RelativeLandmarking => &[
                ("diff.svm.lm", "performance(SVM) - performance(Linear)"),
                ("diff.svm.nb", "performance(SVM) - performance(NB)"),
                ("diff.svm.stump", "performance(SVM) - performance(Decision Stump)"),
                ("diff.svm.nn", "performance(SVM) - performance(1-NN)"),
                ("diff.nn.lm", "performance(1-NN) - performance(Linear)"),
                ("diff.nn.stump", "performance(1-NN) - performance(Decision Stump)"),
                ("diff.nn.nb", "performance(1-NN) - performance(NB)"),
                ("diff.nb.stump", "performance(NB) - performance(Decision Stump)"),
                ("diff.nb.lm", "performance(NB) - performance(Linear)"),
                ("diff.stump.lm", "performance(Decision Stump) - performance(Linear)"),
            ],
        }
    }
}

fn categories(include_rl: bool) -> Vec<Category> {
    Category::ALL
        .into_iter()
        .filter(|&c| include_rl || c != Category::RelativeLandmarking)
        .collect()
}

/// Full feature names (`SM.classes`, ...) with descriptions.
pub fn schema(include_rl: bool) -> Vec<(String, &'static str)> {
    categories(include_rl)
        .into_iter()
        .flat_map(|c| c.entries().iter().map(move |(n, d)| (format!("{}.{}", c.prefix(), n), *d)))
        .collect()
}

pub fn feature_names(include_rl: bool) -> Vec<String> {
    schema(include_rl).into_iter().map(|(n, _)| n).collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MetaFeatureVector {
    pub dataset: String,
    pub names: Vec<String>,
    pub values: Vec<f64>,
    /// Wall-clock extraction time in seconds.
    pub extraction_time: f64,
}

impl MetaFeatureVector {
    pub fn get(&self, name: &str) -> Option<f64> {
        self.names.iter().position(|n| n == name).map(|i| self.values[i])
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }
}

/// Rows sorted lexicographically (then by label) so that seeded steps do not
/// depend on the file's instance order.
pub fn canonical_order(d: &Dataset) -> Dataset {
    let mut idx: Vec<usize> = (0..d.n_instances()).collect();
    idx.sort_by(|&a, &b| {
        d.x.row(a)
            .iter()
            .zip(d.x.row(b))
            .map(|(p, q)| p.total_cmp(q))
            .find(|o| o.is_ne())
            .unwrap_or(std::cmp::Ordering::Equal)
            .then(d.y[a].cmp(&d.y[b]))
    });
    d.subset(&idx)
}

fn extract_category(d: &Dataset, c: Category, lm: &LandmarkScores) -> Result<Vec<f64>> {
    Ok(match c {
        Category::Simple => extract_simple(d),
        Category::Statistical => extract_statistical(d),
        Category::InfoTheoretic => extract_infotheoretic(d),
        Category::ModelBased => extract_model_based(d),
        Category::Landmarking => extract_landmarking(lm),
        Category::DataComplexity => extract_data_complexity(d),
        Category::ComplexNetwork => extract_complex_network(d),
        Category::RelativeLandmarking => extract_relative_landmarking(lm),
    })
}

pub fn extract_all(d: &Dataset, include_rl: bool) -> Result<MetaFeatureVector> {
    let start = Instant::now();
    if d.n_instances() < 2 || d.n_features() == 0 {
        return Err(Error::InvalidArgument(format!(
            "dataset `{}` is too small to characterize",
            d.name
        )));
    }
    let d = canonical_order(d);
    let lm = landmark_scores(&d, include_rl)?;
    let cats = categories(include_rl);
    let parts: Vec<Result<Vec<f64>>> = cats.par_iter().map(|&c| extract_category(&d, c, &lm)).collect();
    let mut values = Vec::with_capacity(90);
    for (c, part) in cats.iter().zip(parts) {
        let part = part?;
        debug_assert_eq!(part.len(), c.entries().len());
        values.extend(part);
    }
    let names = feature_names(include_rl);
    if let Some(i) = values.iter().position(|v| !v.is_finite()) {
        return Err(Error::NonFiniteMetaFeature { name: names[i].clone() });
    }
    Ok(MetaFeatureVector {
        dataset: d.name.clone(),
        names,
        values,
        extraction_time: start.elapsed().as_secs_f64(),
    })
}

/// CSV with a `dataset` column followed by the schema, plus `extraction_time`.
pub fn vectors_to_csv(vectors: &[MetaFeatureVector]) -> String {
    let mut out = String::from("dataset");
    if let Some(v) = vectors.first() {
        for n in &v.names {
            out.push(',');
            out.push_str(n);
        }
    }
    out.push_str(",extraction_time\n");
    for v in vectors {
        out.push_str(&v.dataset);
        for x in &v.values {
            out.push_str(&format!(",{x:e}"));
        }
        out.push_str(&format!(",{:e}\n", v.extraction_time));
    }
    out
}

pub fn vectors_from_csv(text: &str) -> Result<Vec<MetaFeatureVector>> {
    let mut lines = text.lines().filter(|l| !l.starts_with('#') && !l.trim().is_empty());
    let header: Vec<&str> = match lines.next() {
        Some(h) => h.split(',').collect(),
        None => return Ok(Vec::new()),
    };
    if header.len() < 2 || header[0] != "dataset" || header[header.len() - 1] != "extraction_time" {
        return Err(Error::Parse {
            path: "metafeatures.csv".into(),
            line: 1,
            message: "unexpected header".into(),
        });
    }
    let names: Vec<String> = header[1..header.len() - 1].iter().map(|s| s.to_string()).collect();
    let mut out = Vec::new();
    for (n, line) in lines.enumerate() {
        let f: Vec<&str> = line.split(',').collect();
        let bad = || Error::Parse {
            path: "metafeatures.csv".into(),
            line: n + 2,
            message: "malformed row".into(),
        };
        if f.len() != header.len() {
            return Err(bad());
        }
        let nums: Vec<f64> = f[1..].iter().map(|s| s.parse::<f64>().map_err(|_| bad())).collect::<Result<_>>()?;
        out.push(MetaFeatureVector {
            dataset: f[0].to_string(),
            names: names.clone(),
            values: nums[..nums.len() - 1].to_vec(),
            extraction_time: nums[nums.len() - 1],
        });
    }
    Ok(out)
}

/// (min, max, mean, sd) with sample sd; zeros for an empty set.
pub(crate) fn summary(values: &[f64]) -> [f64; 4] {
    if values.is_empty() {
        return [0.0; 4];
    }
    let n = values.len() as f64;
    let min = values.iter().copied().fold(f64::INFINITY, f64::min);
    let max = values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let mean = values.iter().sum::<f64>() / n;
    let sd = if values.len() > 1 {
        (values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1.0)).sqrt()
    } else {
        0.0
    };
    [min, max, mean, sd]
}

pub(crate) fn capped_ratio(num: f64, den: f64) -> f64 {
    if den.abs() <= 1e-12 {
        if num.abs() <= 1e-12 {
            0.0
        } else {
            RATIO_CAP.copysign(num)
        }
    } else {
        (num / den).clamp(-RATIO_CAP, RATIO_CAP)
    }
}

pub(crate) fn mean(values: &[f64]) -> f64 {
    if values.is_empty() {
        0.0
    } else {
        values.iter().sum::<f64>() / values.len() as f64
    }
}
