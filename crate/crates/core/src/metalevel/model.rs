use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::data::Dataset;
use crate::error::{Error, Result};
use crate::labeling::MetaClass;
use crate::learners::{LearnerSpec, Model};
use crate::metafeatures::{extract_all, feature_names, MetaFeatureVector};
use crate::metalevel::{fit_with_setup, MetaCvConfig, MetaDataset, Setup};
use crate::rng::derive_seed;

pub const MODEL_FORMAT_VERSION: u32 = 1;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MetaModel {
    pub format_version: u32,
    pub tool_version: String,
    pub alpha: f64,
    pub schema: Vec<String>,
    pub include_rl: bool,
    /// Learner as finally fitted, with any tuned setting.
    pub learner: LearnerSpec,
    pub setup: Setup,
    /// Schema columns the model consumes.
    pub selected: Vec<usize>,
    pub threshold: f64,
    pub model: Model,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Recommendation {
    pub dataset: String,
    pub label: MetaClass,
    /// Score of the Tuning class.
    pub score: f64,
    pub threshold: f64,
    pub extraction_time: f64,
}

impl std::fmt::Display for Recommendation {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(
            f,
            "{}\t{}\tscore={:.4}\tthreshold={}\textraction={:.3}s",
            self.dataset, self.label, self.score, self.threshold, self.extraction_time
        )
    }
}

/// Fits the meta-learner on every example of `md`.
pub fn train_final(md: &MetaDataset, spec: &LearnerSpec, setup: Setup, cfg: &MetaCvConfig) -> Result<MetaModel> {
    let include_rl = if md.schema == feature_names(true) {
        true
    } else if md.schema == feature_names(false) {
        false
    } else {
        return Err(Error::InvalidArgument("meta-dataset schema is not an extractor schema".into()));
    };
    let fitted = fit_with_setup(&md.x(), &md.y(), spec, setup, cfg, derive_seed("meta-final", &[cfg.base_seed]))?;
    Ok(MetaModel {
        format_version: MODEL_FORMAT_VERSION,
        tool_version: env!("CARGO_PKG_VERSION").to_string(),
        alpha: md.alpha,
        schema: md.schema.clone(),
        include_rl,
        learner: fitted.spec,
        setup,
        selected: fitted.selected,
        threshold: 0.5,
        model: fitted.model,
    })
}

impl MetaModel {
    pub fn save(&self, path: &Path) -> Result<()> {
        let text = serde_json::to_string(self)?;
        std::fs::write(path, text).map_err(|e| Error::io(path, e))
    }

    pub fn load(path: &Path) -> Result<MetaModel> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        let body: String = text.lines().filter(|l| !l.starts_with('#')).collect::<Vec<_>>().join("\n");
        let m: MetaModel = serde_json::from_str(&body)?;
        if m.format_version != MODEL_FORMAT_VERSION {
            return Err(Error::InvalidArgument(format!(
                "model format {} is not supported (expected {MODEL_FORMAT_VERSION})",
                m.format_version
            )));
        }
        Ok(m)
    }
}

pub fn recommend_vector(model: &MetaModel, v: &MetaFeatureVector) -> Result<Recommendation> {
    if v.names != model.schema {
        return Err(Error::SchemaMismatch {
            expected: model.schema.len(),
            found: v.names.len(),
        });
    }
    let q: Vec<f64> = model.selected.iter().map(|&j| v.values[j]).collect();
    let score = model.model.scores(&q)[MetaClass::Tuning.index()];
    Ok(Recommendation {
        dataset: v.dataset.clone(),
        label: if score >= model.threshold {
            MetaClass::Tuning
        } else {
            MetaClass::Defaults
        },
        score,
        threshold: model.threshold,
        extraction_time: v.extraction_time,
    })
}

/// Extracts meta-features of `d` with the model's schema and predicts.
pub fn recommend(model: &MetaModel, d: &Dataset) -> Result<Recommendation> {
    recommend_vector(model, &extract_all(d, model.include_rl)?)
}
