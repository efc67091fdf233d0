use std::collections::BTreeMap;
use std::fmt;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum HpValue {
    Int(i64),
    Real(f64),
    Cat(String),
}

impl HpValue {
    pub fn as_f64(&self) -> Option<f64> {
        match self {
            HpValue::Int(i) => Some(*i as f64),
            HpValue::Real(r) => Some(*r),
            HpValue::Cat(_) => None,
        }
    }
}

impl fmt::Display for HpValue {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            HpValue::Int(i) => write!(f, "{i}"),
            HpValue::Real(r) => write!(f, "{r}"),
            HpValue::Cat(s) => write!(f, "{s}"),
        }
    }
}

/// Concrete hyperparameter values keyed by name.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(transparent)]
pub struct HpSetting {
    pub values: BTreeMap<String, HpValue>,
}

impl HpSetting {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn with(mut self, name: &str, value: HpValue) -> Self {
        self.values.insert(name.to_string(), value);
        self
    }

    pub fn real(&self, name: &str) -> Option<f64> {
        self.values.get(name).and_then(HpValue::as_f64)
    }

    pub fn int(&self, name: &str) -> Option<i64> {
        match self.values.get(name)? {
            HpValue::Int(i) => Some(*i),
            HpValue::Real(r) if r.fract() == 0.0 => Some(*r as i64),
            _ => None,
        }
    }
}

impl fmt::Display for HpSetting {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self.values.iter().map(|(k, v)| format!("{k}={v}")).collect();
        write!(f, "{}", parts.join(";"))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Scale {
    Linear,
    Log2,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum ParamKind {
    Real { lo: f64, hi: f64 },
    Integer { lo: i64, hi: i64 },
    Categorical { options: Vec<String> },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ParamDefault {
    Value(HpValue),
    /// 1 / number of (encoded) features of the dataset at hand.
    InverseFeatureCount,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ParamSpec {
    pub name: String,
    pub kind: ParamKind,
    pub scale: Scale,
    pub default: ParamDefault,
}

impl ParamSpec {
    pub fn contains(&self, v: &HpValue) -> bool {
        match (&self.kind, v) {
            (ParamKind::Real { lo, hi }, v) => v.as_f64().is_some_and(|x| x >= *lo && x <= *hi),
            (ParamKind::Integer { lo, hi }, HpValue::Int(i)) => i >= lo && i <= hi,
            (ParamKind::Categorical { options }, HpValue::Cat(s)) => options.contains(s),
            _ => false,
        }
    }
}

/// Hyperparameter search space.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct HpSpace {
    pub params: Vec<ParamSpec>,
}

impl HpSpace {
    pub fn is_empty(&self) -> bool {
        self.params.is_empty()
    }

    pub fn param(&self, name: &str) -> Option<&ParamSpec> {
        self.params.iter().find(|p| p.name == name)
    }

    /// Resolves declared defaults for a dataset with `n_features` columns.
    pub fn default_setting(&self, n_features: usize) -> HpSetting {
        let mut s = HpSetting::new();
        for p in &self.params {
            let v = match &p.default {
                ParamDefault::Value(v) => v.clone(),
                ParamDefault::InverseFeatureCount => HpValue::Real(1.0 / n_features.max(1) as f64),
            };
            s.values.insert(p.name.clone(), v);
        }
        s
    }

    /// Checks that every key is declared and every value is in range.
    pub fn validate(&self, setting: &HpSetting) -> Result<()> {
        for (k, v) in &setting.values {
            let spec = self.param(k).ok_or_else(|| Error::InvalidHyperparameter {
                name: k.clone(),
                value: v.to_string(),
                reason: "not part of the learner's space".into(),
            })?;
            if !spec.contains(v) {
                return Err(Error::InvalidHyperparameter {
                    name: k.clone(),
                    value: v.to_string(),
                    reason: format!("outside {:?}", spec.kind),
                });
            }
        }
        Ok(())
    }
}

/// Draws one setting: log2 reals as 2^u with u uniform on the log range,
/// linear reals uniform, integers and categoricals uniform.
pub fn sample_setting<R: Rng + ?Sized>(space: &HpSpace, rng: &mut R) -> HpSetting {
    let mut s = HpSetting::new();
    for p in &space.params {
        let v = match (&p.kind, p.scale) {
            (ParamKind::Real { lo, hi }, Scale::Log2) => {
                let u = rng.random_range(lo.log2()..=hi.log2());
                HpValue::Real(u.exp2().clamp(*lo, *hi))
            }
            (ParamKind::Real { lo, hi }, Scale::Linear) => HpValue::Real(rng.random_range(*lo..=*hi)),
            (ParamKind::Integer { lo, hi }, _) => HpValue::Int(rng.random_range(*lo..=*hi)),
            (ParamKind::Categorical { options }, _) => {
                HpValue::Cat(options[rng.random_range(0..options.len())].clone())
            }
        };
        s.values.insert(p.name.clone(), v);
    }
    s
}
