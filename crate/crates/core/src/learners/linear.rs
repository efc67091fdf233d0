use serde::{Deserialize, Serialize};

use crate::matrix::{dot, Matrix};

pub const EPOCHS: usize = 500;
pub const STEP: f64 = 0.1;
pub const L2: f64 = 1e-4;

/// L2-regularised logistic model, one-vs-rest for more than two classes.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LinearModel {
    pub n_classes: usize,
    /// One (weights, bias) per binary problem: a single one for two classes.
    pub weights: Vec<Vec<f64>>,
    pub biases: Vec<f64>,
}

fn sigmoid(z: f64) -> f64 {
    if z >= 0.0 {
        1.0 / (1.0 + (-z).exp())
    } else {
        let e = z.exp();
        e / (1.0 + e)
    }
}

/// Full-batch gradient descent on the logistic loss for targets in {0, 1}.
pub fn fit_logistic(x: &Matrix, t: &[f64]) -> (Vec<f64>, f64) {
    let n = x.rows();
    let p = x.cols();
    let mut w = vec![0.0; p];
    let mut b = 0.0;
    let mut grad = vec![0.0; p];
    let inv_n = 1.0 / n.max(1) as f64;
    for _ in 0..EPOCHS {
        grad.iter_mut().for_each(|g| *g = 0.0);
        let mut gb = 0.0;
        for i in 0..n {
            let r = x.row(i);
            let err = sigmoid(dot(&w, r) + b) - t[i];
            for (g, v) in grad.iter_mut().zip(r) {
                *g += err * v;
            }
            gb += err;
        }
        for (wj, gj) in w.iter_mut().zip(&grad) {
            *wj -= STEP * (gj * inv_n + L2 * *wj);
        }
        b -= STEP * gb * inv_n;
    }
    (w, b)
}

pub fn train(x: &Matrix, y: &[usize], n_classes: usize) -> LinearModel {
    let problems: Vec<usize> = if n_classes == 2 { vec![1] } else { (0..n_classes).collect() };
    let mut weights = Vec::new();
    let mut biases = Vec::new();
    for c in problems {
        let t: Vec<f64> = y.iter().map(|&l| if l == c { 1.0 } else { 0.0 }).collect();
        let (w, b) = fit_logistic(x, &t);
        weights.push(w);
        biases.push(b);
    }
    LinearModel {
        n_classes,
        weights,
        biases,
    }
}

impl LinearModel {
    pub fn decision(&self, q: &[f64], k: usize) -> f64 {
        dot(&self.weights[k], q) + self.biases[k]
    }

    pub fn scores(&self, q: &[f64]) -> Vec<f64> {
        if self.n_classes == 2 {
            let p = sigmoid(self.decision(q, 0));
            return vec![1.0 - p, p];
        }
        let mut s: Vec<f64> = (0..self.n_classes).map(|k| sigmoid(self.decision(q, k))).collect();
        let z: f64 = s.iter().sum();
        if z > 0.0 {
            s.iter_mut().for_each(|v| *v /= z);
        } else {
            s.iter_mut().for_each(|v| *v = 1.0 / self.n_classes as f64);
        }
        s
    }
}
