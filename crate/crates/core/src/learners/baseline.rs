//! Reference models for the meta level: majority-prior and random scorers.

use serde::{Deserialize, Serialize};

use crate::rng::derive_seed;

/// Predicts the training class priors for every instance.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConstantModel {
    pub priors: Vec<f64>,
}

pub fn train_constant(y: &[usize], n_classes: usize) -> ConstantModel {
    let mut priors = vec![0.0; n_classes];
    for &c in y {
        priors[c] += 1.0;
    }
    let n = y.len().max(1) as f64;
    priors.iter_mut().for_each(|p| *p /= n);
    ConstantModel { priors }
}

/// Scores each instance with a pseudo-random distribution keyed by
/// `(seed, instance bits)`, so repeated predictions agree.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RandomModel {
    pub seed: u64,
    pub n_classes: usize,
}

impl RandomModel {
    pub fn scores(&self, q: &[f64]) -> Vec<f64> {
        let mut parts = vec![self.seed];
        parts.extend(q.iter().map(|v| v.to_bits()));
        let mut s: Vec<f64> = (0..self.n_classes as u64)
            .map(|c| {
                let mut p = parts.clone();
                p.push(c);
                (derive_seed("random-model", &p) >> 11) as f64 / (1u64 << 53) as f64 + 1e-12
            })
            .collect();
        let z: f64 = s.iter().sum();
        s.iter_mut().for_each(|v| *v /= z);
        s
    }
}
