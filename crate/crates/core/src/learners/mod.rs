//! Classifiers used at the base level (RBF SVM), as meta-learners and as
//! landmarkers. All of them are trained through [`train`] from a
//! [`LearnerSpec`] and queried through [`Model::predict`].

pub mod baseline;
pub mod forest;
pub mod knn;
pub mod linear;
pub mod naive_bayes;
pub mod svm;
pub mod tree;

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::matrix::Matrix;
use crate::tuning::space::{HpSetting, HpSpace, HpValue, ParamDefault, ParamKind, ParamSpec, Scale};

pub use tree::TreeParams;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum LearnerKind {
    SvmRbf,
    Cart,
    RandomForest,
    Knn,
    NaiveBayes,
    Linear,
    Stump,
    /// Class-prior scorer (ZeroR).
    Constant,
    /// Pseudo-random scorer.
    Random,
}

impl LearnerKind {
    pub const META_LEARNERS: [LearnerKind; 5] = [
        LearnerKind::SvmRbf,
        LearnerKind::Cart,
        LearnerKind::RandomForest,
        LearnerKind::Knn,
        LearnerKind::NaiveBayes,
    ];

    pub fn name(self) -> &'static str {
        match self {
            LearnerKind::SvmRbf => "svm_rbf",
            LearnerKind::Cart => "cart",
            LearnerKind::RandomForest => "random_forest",
            LearnerKind::Knn => "knn",
            LearnerKind::NaiveBayes => "naive_bayes",
            LearnerKind::Linear => "linear",
            LearnerKind::Stump => "stump",
            LearnerKind::Constant => "constant",
            LearnerKind::Random => "random",
        }
    }
}

impl fmt::Display for LearnerKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for LearnerKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Ok(match s.trim().to_ascii_lowercase().as_str() {
            "svm_rbf" | "svm" => LearnerKind::SvmRbf,
            "cart" => LearnerKind::Cart,
            "random_forest" | "rf" => LearnerKind::RandomForest,
            "knn" => LearnerKind::Knn,
            "naive_bayes" | "nb" => LearnerKind::NaiveBayes,
            "linear" => LearnerKind::Linear,
            "stump" => LearnerKind::Stump,
            "constant" | "zeror" => LearnerKind::Constant,
            "random" => LearnerKind::Random,
            other => return Err(Error::InvalidArgument(format!("unknown learner `{other}`"))),
        })
    }
}

fn real(name: &str, lo: f64, hi: f64, scale: Scale, default: ParamDefault) -> ParamSpec {
    ParamSpec {
        name: name.into(),
        kind: ParamKind::Real { lo, hi },
        scale,
        default,
    }
}

fn int(name: &str, lo: i64, hi: i64, default: i64) -> ParamSpec {
    ParamSpec {
        name: name.into(),
        kind: ParamKind::Integer { lo, hi },
        scale: Scale::Linear,
        default: ParamDefault::Value(HpValue::Int(default)),
    }
}

/// Tunable hyperparameters per learner. Learners without any return an empty space.
pub fn declared_space(kind: LearnerKind) -> HpSpace {
    let lo = 2f64.powi(-15);
    let hi = 2f64.powi(15);
    let params = match kind {
        LearnerKind::SvmRbf => vec![
            real("cost", lo, hi, Scale::Log2, ParamDefault::Value(HpValue::Real(1.0))),
            real("gamma", lo, hi, Scale::Log2, ParamDefault::InverseFeatureCount),
        ],
        LearnerKind::Cart => vec![
            real("cp", 0.0001, 0.1, Scale::Linear, ParamDefault::Value(HpValue::Real(0.01))),
            int("minsplit", 1, 50, 20),
            int("minbucket", 1, 50, 7),
            int("maxdepth", 1, 30, 30),
        ],
        LearnerKind::RandomForest => vec![int("ntree", 1, 1024, 500), int("nodesize", 1, 20, 1)],
        LearnerKind::Knn => vec![int("k", 1, 50, 7)],
        LearnerKind::NaiveBayes
        | LearnerKind::Linear
        | LearnerKind::Stump
        | LearnerKind::Constant
        | LearnerKind::Random => Vec::new(),
    };
    HpSpace { params }
}

/// A learner plus (possibly partial) hyperparameter overrides.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LearnerSpec {
    pub kind: LearnerKind,
    #[serde(default)]
    pub setting: HpSetting,
}

impl LearnerSpec {
    pub fn new(kind: LearnerKind) -> Self {
        LearnerSpec {
            kind,
            setting: HpSetting::new(),
        }
    }

    pub fn with_setting(kind: LearnerKind, setting: HpSetting) -> Self {
        LearnerSpec { kind, setting }
    }

    /// Declared defaults overlaid with the explicit setting.
    pub fn resolved(&self, n_features: usize) -> Result<HpSetting> {
        let space = declared_space(self.kind);
        space.validate(&self.setting)?;
        let mut s = space.default_setting(n_features);
        for (k, v) in &self.setting.values {
            s.values.insert(k.clone(), v.clone());
        }
        Ok(s)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Prediction {
    pub class: usize,
    pub scores: Vec<f64>,
}

impl Prediction {
    pub fn from_scores(scores: Vec<f64>) -> Prediction {
        let mut class = 0;
        for (k, &s) in scores.iter().enumerate() {
            if s > scores[class] {
                class = k;
            }
        }
        Prediction { class, scores }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Model {
    Svm(svm::SvmModel),
    Tree(tree::Tree),
    Forest(forest::Forest),
    Knn(knn::KnnModel),
    NaiveBayes(naive_bayes::NaiveBayesModel),
    Linear(linear::LinearModel),
    Constant(baseline::ConstantModel),
    Random(baseline::RandomModel),
}

fn int_param(s: &HpSetting, name: &str) -> Result<usize> {
    s.int(name)
        .filter(|v| *v >= 0)
        .map(|v| v as usize)
        .ok_or_else(|| Error::InvalidHyperparameter {
            name: name.into(),
            value: format!("{:?}", s.values.get(name)),
            reason: "expected a nonnegative integer".into(),
        })
}

fn real_param(s: &HpSetting, name: &str) -> Result<f64> {
    s.real(name).ok_or_else(|| Error::InvalidHyperparameter {
        name: name.into(),
        value: "missing".into(),
        reason: "expected a real value".into(),
    })
}

/// Trains a model. `seed` drives the stochastic learners (forest, random).
pub fn train(spec: &LearnerSpec, x: &Matrix, y: &[usize], n_classes: usize, seed: u64) -> Result<Model> {
    if x.rows() != y.len() {
        return Err(Error::LengthMismatch {
            left: x.rows(),
            right: y.len(),
        });
    }
    let s = spec.resolved(x.cols())?;
    Ok(match spec.kind {
        LearnerKind::SvmRbf => Model::Svm(svm::train(
            x,
            y,
            n_classes,
            real_param(&s, "cost")?,
            real_param(&s, "gamma")?,
            &svm::SmoConfig::default(),
        )?),
        LearnerKind::Cart => {
            let params = TreeParams {
                cp: real_param(&s, "cp")?,
                min_split: int_param(&s, "minsplit")?,
                min_bucket: int_param(&s, "minbucket")?,
                max_depth: int_param(&s, "maxdepth")?,
                mtry: None,
            };
            Model::Tree(tree::Tree::fit(x, y, n_classes, params))
        }
        LearnerKind::RandomForest => Model::Forest(forest::train(
            x,
            y,
            n_classes,
            int_param(&s, "ntree")?,
            int_param(&s, "nodesize")?,
            seed,
        )),
        LearnerKind::Knn => Model::Knn(knn::train(x, y, n_classes, int_param(&s, "k")?)?),
        LearnerKind::NaiveBayes => Model::NaiveBayes(naive_bayes::train(x, y, n_classes)),
        LearnerKind::Linear => Model::Linear(linear::train(x, y, n_classes)),
        LearnerKind::Stump => Model::Tree(tree::Tree::stump(x, y, n_classes, None)),
        LearnerKind::Constant => Model::Constant(baseline::train_constant(y, n_classes)),
        LearnerKind::Random => Model::Random(baseline::RandomModel { seed, n_classes }),
    })
}

impl Model {
    pub fn n_features(&self) -> Option<usize> {
        match self {
            Model::Svm(m) => Some(m.n_features),
            Model::Tree(t) => Some(t.n_features),
            Model::Forest(f) => Some(f.n_features),
            Model::Knn(m) => Some(m.x.cols()),
            Model::NaiveBayes(m) => m.means.first().map(|v| v.len()),
            Model::Linear(m) => m.weights.first().map(|w| w.len()),
            Model::Constant(_) | Model::Random(_) => None,
        }
    }

    pub fn scores(&self, q: &[f64]) -> Vec<f64> {
        match self {
            Model::Svm(m) => m.scores(q),
            Model::Tree(t) => t.scores(q),
            Model::Forest(f) => f.scores(q),
            Model::Knn(m) => m.scores(q),
            Model::NaiveBayes(m) => m.scores(q),
            Model::Linear(m) => m.scores(q),
            Model::Constant(m) => m.priors.clone(),
            Model::Random(m) => m.scores(q),
        }
    }

    pub fn predict(&self, x: &Matrix) -> Result<Vec<Prediction>> {
        if let Some(w) = self.n_features() {
            if x.cols() != w && x.rows() > 0 {
                return Err(Error::WidthMismatch {
                    expected: w,
                    found: x.cols(),
                });
            }
        }
        Ok(x.iter_rows().map(|r| Prediction::from_scores(self.scores(r))).collect())
    }
}
