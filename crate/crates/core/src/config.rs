//! Run configuration: a TOML file with one table per stage. Missing keys
//! take the defaults below; unknown keys are rejected.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};
use crate::labeling::DEFAULT_ALPHAS;
use crate::learners::{LearnerKind, LearnerSpec};
use crate::metalevel::{MetaCvConfig, Setup};
use crate::tuning::space::{HpValue, ParamDefault};
use crate::tuning::{check_defaults, DefaultSetting, TuningConfig};

pub const OUT_DIR_ENV: &str = "METATUNE_OUT";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct DataSection {
    pub dir: PathBuf,
    /// Target column (CSV header name or ARFF attribute).
    pub target: String,
    /// Keep datasets that fail the selection criteria.
    pub keep_ineligible: bool,
}

impl Default for DataSection {
    fn default() -> Self {
        DataSection {
            dir: PathBuf::from("datasets"),
            target: "class".into(),
            keep_ineligible: false,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct DefaultsSection {
    /// TOML file with `[[default]]` entries; empty means the reference
    /// default plus the shipped placeholder.
    pub file: Option<PathBuf>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct TuningSection {
    pub budget: usize,
    pub outer_k: usize,
    pub inner_k: usize,
    pub seeds: Vec<u64>,
    pub walltime_per_dataset: Option<f64>,
}

impl Default for TuningSection {
    fn default() -> Self {
        let t = TuningConfig::default();
        TuningSection {
            budget: t.budget,
            outer_k: t.outer_k,
            inner_k: t.inner_k,
            seeds: t.seeds,
            walltime_per_dataset: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct LabelingSection {
    pub alphas: Vec<f64>,
    /// Allow significance levels outside 0.10, 0.05 and 0.01.
    pub allow_any_alpha: bool,
}

impl Default for LabelingSection {
    fn default() -> Self {
        LabelingSection {
            alphas: DEFAULT_ALPHAS.to_vec(),
            allow_any_alpha: false,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct MetaSection {
    /// Label set used to assemble the meta-dataset.
    pub alpha: f64,
    pub relative_landmarking: bool,
    pub learners: Vec<String>,
    pub setups: Vec<String>,
    pub repetitions: usize,
    pub seed: u64,
    pub outer_k: usize,
    pub inner_k: usize,
    pub tuning_budget: usize,
    pub min_improvement: f64,
    pub smote_rate: usize,
    pub smote_k: usize,
    pub importance_repetitions: usize,
    pub importance_trees: usize,
    pub final_learner: String,
    pub final_setup: String,
    pub threshold: f64,
    pub projection_seed: u64,
}

impl Default for MetaSection {
    fn default() -> Self {
        let m = MetaCvConfig::default();
        MetaSection {
            alpha: 0.05,
            relative_landmarking: false,
            learners: LearnerKind::META_LEARNERS.iter().map(|k| k.to_string()).collect(),
            setups: Setup::ALL.iter().map(|s| s.to_string()).collect(),
            repetitions: m.repetitions,
            seed: m.base_seed,
            outer_k: m.outer_k,
            inner_k: m.inner_k,
            tuning_budget: m.tuning_budget,
            min_improvement: m.min_improvement,
            smote_rate: m.smote_rate,
            smote_k: m.smote_k,
            importance_repetitions: 30,
            importance_trees: 500,
            final_learner: "random_forest".into(),
            final_setup: "none".into(),
            threshold: 0.5,
            projection_seed: 1,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct OutputSection {
    pub dir: PathBuf,
}

impl Default for OutputSection {
    fn default() -> Self {
        OutputSection { dir: PathBuf::from("out") }
    }
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    pub data: DataSection,
    pub defaults: DefaultsSection,
    pub tuning: TuningSection,
    pub labeling: LabelingSection,
    pub meta: MetaSection,
    pub output: OutputSection,
    /// Directory the config file lives in; relative paths resolve against it.
    #[serde(skip)]
    pub base_dir: PathBuf,
}

fn alpha_is_standard(a: f64) -> bool {
    DEFAULT_ALPHAS.iter().any(|s| (s - a).abs() < 1e-12)
}

impl RunConfig {
    pub fn from_toml(text: &str) -> Result<RunConfig> {
        toml::from_str(text).map_err(|e| Error::Config(vec![e.to_string()]))
    }

    /// Reads and validates a config file. `METATUNE_OUT` overrides the
    /// output directory.
    pub fn load(path: &Path) -> Result<RunConfig> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        let mut cfg = RunConfig::from_toml(&text)?;
        cfg.base_dir = path.parent().map(Path::to_path_buf).unwrap_or_default();
        if let Ok(dir) = std::env::var(OUT_DIR_ENV) {
            if !dir.is_empty() {
                cfg.output.dir = PathBuf::from(dir);
            }
        }
        cfg.validate()?;
        Ok(cfg)
    }

    fn resolve(&self, p: &Path) -> PathBuf {
        if p.is_absolute() {
            p.to_path_buf()
        } else {
            self.base_dir.join(p)
        }
    }

    pub fn data_dir(&self) -> PathBuf {
        self.resolve(&self.data.dir)
    }

    pub fn out_dir(&self) -> PathBuf {
        self.resolve(&self.output.dir)
    }

    /// Every violation at once.
    pub fn violations(&self) -> Vec<String> {
        let mut v = Vec::new();
        let t = &self.tuning;
        if t.budget < 1 {
            v.push("tuning.budget must be >= 1".into());
        }
        if t.outer_k < 2 {
            v.push("tuning.outer_k must be >= 2".into());
        }
        if t.inner_k < 2 {
            v.push("tuning.inner_k must be >= 2".into());
        }
        if t.seeds.is_empty() {
            v.push("tuning.seeds must not be empty".into());
        }
        let mut seeds = t.seeds.clone();
        seeds.sort_unstable();
        seeds.dedup();
        if seeds.len() != t.seeds.len() {
            v.push("tuning.seeds must be distinct".into());
        }
        if let Some(w) = t.walltime_per_dataset {
            if !(w > 0.0) {
                v.push("tuning.walltime_per_dataset must be positive".into());
            }
        }
        let l = &self.labeling;
        if l.alphas.is_empty() {
            v.push("labeling.alphas must not be empty".into());
        }
        for &a in &l.alphas {
            if !(a > 0.0 && a < 1.0) {
                v.push(format!("labeling.alphas: {a} is not in (0, 1)"));
            } else if !l.allow_any_alpha && !alpha_is_standard(a) {
                v.push(format!("labeling.alphas: {a} is not one of 0.10, 0.05, 0.01 (set allow_any_alpha)"));
            }
        }
        let m = &self.meta;
        if !l.alphas.iter().any(|a| (a - m.alpha).abs() < 1e-12) {
            v.push(format!("meta.alpha {} is not listed in labeling.alphas", m.alpha));
        }
        for name in &m.learners {
            if let Err(e) = name.parse::<LearnerKind>() {
                v.push(format!("meta.learners: {e}"));
            }
        }
        if m.learners.is_empty() {
            v.push("meta.learners must not be empty".into());
        }
        for name in &m.setups {
            if let Err(e) = name.parse::<Setup>() {
                v.push(format!("meta.setups: {e}"));
            }
        }
        if m.setups.is_empty() {
            v.push("meta.setups must not be empty".into());
        }
        if let Err(e) = m.final_learner.parse::<LearnerKind>() {
            v.push(format!("meta.final_learner: {e}"));
        }
        if let Err(e) = m.final_setup.parse::<Setup>() {
            v.push(format!("meta.final_setup: {e}"));
        }
        for (key, value, min) in [
            ("meta.repetitions", m.repetitions, 1),
            ("meta.outer_k", m.outer_k, 2),
            ("meta.inner_k", m.inner_k, 2),
            ("meta.tuning_budget", m.tuning_budget, 1),
            ("meta.smote_rate", m.smote_rate, 1),
            ("meta.smote_k", m.smote_k, 1),
            ("meta.importance_repetitions", m.importance_repetitions, 1),
            ("meta.importance_trees", m.importance_trees, 1),
        ] {
            if value < min {
                v.push(format!("{key} must be >= {min}"));
            }
        }
        if !(0.0..=1.0).contains(&m.threshold) {
            v.push("meta.threshold must lie in [0, 1]".into());
        }
        if !(m.min_improvement >= 0.0) {
            v.push("meta.min_improvement must be >= 0".into());
        }
        if self.data.target.is_empty() {
            v.push("data.target must not be empty".into());
        }
        if let Some(f) = &self.defaults.file {
            if let Err(e) = self.default_settings() {
                v.push(format!("defaults.file {}: {e}", f.display()));
            }
        }
        v
    }

    pub fn validate(&self) -> Result<()> {
        let v = self.violations();
        if v.is_empty() {
            Ok(())
        } else {
            Err(Error::Config(v))
        }
    }

    pub fn tuning_config(&self) -> TuningConfig {
        TuningConfig {
            base_learner: LearnerKind::SvmRbf,
            budget: self.tuning.budget,
            outer_k: self.tuning.outer_k,
            inner_k: self.tuning.inner_k,
            seeds: self.tuning.seeds.clone(),
            walltime_per_dataset: self.tuning.walltime_per_dataset,
        }
    }

    pub fn meta_cv_config(&self) -> MetaCvConfig {
        let m = &self.meta;
        MetaCvConfig {
            repetitions: m.repetitions,
            base_seed: m.seed,
            outer_k: m.outer_k,
            inner_k: m.inner_k,
            tuning_budget: m.tuning_budget,
            min_improvement: m.min_improvement,
            smote_rate: m.smote_rate,
            smote_k: m.smote_k,
        }
    }

    /// Learner and setup grid in configured order.
    pub fn meta_grid(&self) -> Result<Vec<(LearnerSpec, Setup)>> {
        let mut out = Vec::new();
        for l in &self.meta.learners {
            for s in &self.meta.setups {
                out.push((LearnerSpec::new(l.parse()?), s.parse()?));
            }
        }
        Ok(out)
    }

    pub fn default_settings(&self) -> Result<Vec<DefaultSetting>> {
        let defaults = match &self.defaults.file {
            None => vec![
                DefaultSetting::reference(LearnerKind::SvmRbf, "reference"),
                DefaultSetting::svm_placeholder(),
            ],
            Some(f) => {
                let path = self.resolve(f);
                let text = std::fs::read_to_string(&path).map_err(|e| Error::io(&path, e))?;
                parse_defaults(&text)?
            }
        };
        check_defaults(LearnerKind::SvmRbf, &defaults)?;
        Ok(defaults)
    }

    /// Short hash of everything that influences results. The output
    /// directory is left out.
    pub fn hash(&self) -> String {
        let defaults = self.default_settings().ok();
        let mut c = self.clone();
        c.output = OutputSection::default();
        short_hash(&serde_json::to_string(&(c, &defaults)).expect("config serializes"))
    }

    /// Hash of the settings the base-level records depend on.
    pub fn tuning_hash(&self) -> String {
        let defaults = self.default_settings().ok();
        short_hash(&serde_json::to_string(&(&self.tuning, &self.data, &defaults)).expect("config serializes"))
    }

    /// First line of every artifact.
    pub fn stamp(&self) -> String {
        format!("metatune {} config={}", env!("CARGO_PKG_VERSION"), self.hash())
    }
}

fn short_hash(s: &str) -> String {
    Sha256::digest(s.as_bytes())[..8].iter().map(|b| format!("{b:02x}")).collect()
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct DefaultsFile {
    default: Vec<BTreeMap<String, toml::Value>>,
}

/// `[[default]]` tables: `id` plus one key per hyperparameter. Numbers are
/// literal values; the string `"1/N"` is the inverse feature count.
pub fn parse_defaults(text: &str) -> Result<Vec<DefaultSetting>> {
    let file: DefaultsFile = toml::from_str(text).map_err(|e| Error::Config(vec![e.to_string()]))?;
    let mut out = Vec::new();
    let mut problems = Vec::new();
    for (i, mut entry) in file.default.into_iter().enumerate() {
        let id = match entry.remove("id") {
            Some(toml::Value::String(s)) => s,
            _ => {
                problems.push(format!("default #{}: missing string `id`", i + 1));
                continue;
            }
        };
        let mut values = BTreeMap::new();
        for (k, v) in entry {
            let d = match v {
                toml::Value::Float(f) => ParamDefault::Value(HpValue::Real(f)),
                toml::Value::Integer(n) => ParamDefault::Value(HpValue::Int(n)),
                toml::Value::String(s) if s.replace(' ', "") == "1/N" => ParamDefault::InverseFeatureCount,
                toml::Value::String(s) => ParamDefault::Value(HpValue::Cat(s)),
                other => {
                    problems.push(format!("default `{id}`: unsupported value for {k}: {other}"));
                    continue;
                }
            };
            values.insert(k, d);
        }
        out.push(DefaultSetting { id, values });
    }
    let mut ids: Vec<&str> = out.iter().map(|d| d.id.as_str()).collect();
    ids.sort_unstable();
    if ids.windows(2).any(|w| w[0] == w[1]) {
        problems.push("default ids must be distinct".into());
    }
    if problems.is_empty() {
        Ok(out)
    } else {
        Err(Error::Config(problems))
    }
}
