use serde::{Deserialize, Serialize};

use crate::matrix::Matrix;

const VARIANCE_FLOOR: f64 = 1e-9;

/// Gaussian naive Bayes.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NaiveBayesModel {
    pub priors: Vec<f64>,
    pub means: Vec<Vec<f64>>,
    pub variances: Vec<Vec<f64>>,
}

pub fn train(x: &Matrix, y: &[usize], n_classes: usize) -> NaiveBayesModel {
    let p = x.cols();
    let mut counts = vec![0usize; n_classes];
    let mut means = vec![vec![0.0; p]; n_classes];
    for (i, &c) in y.iter().enumerate() {
        counts[c] += 1;
        for (m, v) in means[c].iter_mut().zip(x.row(i)) {
            *m += v;
        }
    }
    for c in 0..n_classes {
        if counts[c] > 0 {
            means[c].iter_mut().for_each(|m| *m /= counts[c] as f64);
        }
    }
    let mut variances = vec![vec![0.0; p]; n_classes];
    for (i, &c) in y.iter().enumerate() {
        for j in 0..p {
            let d = x.get(i, j) - means[c][j];
            variances[c][j] += d * d;
        }
    }
    for c in 0..n_classes {
        for v in &mut variances[c] {
            *v = (*v / counts[c].max(1) as f64).max(VARIANCE_FLOOR);
        }
    }
    let n = y.len().max(1) as f64;
    NaiveBayesModel {
        priors: counts.iter().map(|&c| c as f64 / n).collect(),
        means,
        variances,
    }
}

impl NaiveBayesModel {
    pub fn scores(&self, q: &[f64]) -> Vec<f64> {
        let logp: Vec<f64> = (0..self.priors.len())
            .map(|c| {
                if self.priors[c] <= 0.0 {
                    return f64::NEG_INFINITY;
                }
                let mut s = self.priors[c].ln();
                for (j, &v) in q.iter().enumerate() {
                    let var = self.variances[c][j];
                    let d = v - self.means[c][j];
                    s -= 0.5 * ((2.0 * std::f64::consts::PI * var).ln() + d * d / var);
                }
                s
            })
            .collect();
        let max = logp.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        let mut e: Vec<f64> = logp.iter().map(|l| (l - max).exp()).collect();
        let z: f64 = e.iter().sum();
        e.iter_mut().for_each(|v| *v /= z);
        e
    }
}
