//! RBF-kernel support vector classifier trained with SMO.
//!
//! The binary solver minimises `0.5 a'Qa - e'a` subject to `0 <= a_i <= C` and
//! `y'a = 0`, with `Q_ij = y_i y_j K(x_i, x_j)`. The working pair is the
//! maximal KKT violating pair. Multiclass problems use one-vs-one voting.

use std::collections::VecDeque;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::matrix::{squared_distance, Matrix};

const TAU: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SmoConfig {
    /// Stopping tolerance on the maximal KKT violation `m(a) - M(a)`.
    pub tolerance: f64,
    pub max_iterations: usize,
    /// Maximum number of kernel rows held in the cache.
    pub cache_rows: usize,
    /// Record the dual objective after every pair update.
    pub record_trace: bool,
}

impl Default for SmoConfig {
    fn default() -> Self {
        SmoConfig {
            tolerance: 1e-3,
            max_iterations: 10_000_000,
            cache_rows: 4096,
            record_trace: false,
        }
    }
}

#[inline]
pub fn rbf(a: &[f64], b: &[f64], gamma: f64) -> f64 {
    (-gamma * squared_distance(a, b)).exp()
}

/// Lazily computed kernel rows with FIFO eviction.
struct KernelCache<'a> {
    x: &'a Matrix,
    gamma: f64,
    rows: Vec<Option<Box<[f64]>>>,
    order: VecDeque<usize>,
    capacity: usize,
}

impl<'a> KernelCache<'a> {
    fn new(x: &'a Matrix, gamma: f64, capacity: usize) -> Self {
        KernelCache {
            x,
            gamma,
            rows: vec![None; x.rows()],
            order: VecDeque::new(),
            capacity: capacity.max(2),
        }
    }

    /// Computes row `i` if absent, never evicting row `keep`.
    fn ensure(&mut self, i: usize, keep: usize) {
        if self.rows[i].is_some() {
            return;
        }
        while self.order.len() >= self.capacity {
            let old = self.order.pop_front().expect("nonempty");
            if old == keep {
                self.order.push_back(old);
            } else {
                self.rows[old] = None;
                break;
            }
        }
        let xi = self.x.row(i);
        let row: Box<[f64]> = (0..self.x.rows())
            .map(|t| rbf(xi, self.x.row(t), self.gamma))
            .collect();
        self.rows[i] = Some(row);
        self.order.push_back(i);
    }

    /// Returns rows `i` and `j`, computing them if needed.
    fn pair(&mut self, i: usize, j: usize) -> (&[f64], &[f64]) {
        self.ensure(i, j);
        self.ensure(j, i);
        (self.rows[i].as_deref().unwrap(), self.rows[j].as_deref().unwrap())
    }
}

/// Result of one binary SMO solve.
#[derive(Debug, Clone)]
pub struct BinarySolution {
    pub alpha: Vec<f64>,
    pub rho: f64,
    pub iterations: usize,
    /// Dual objective `e'a - 0.5 a'Qa` after each update (when recorded).
    pub trace: Vec<f64>,
    /// Final gradient of the minimisation objective.
    pub gradient: Vec<f64>,
    pub violation: f64,
}

impl BinarySolution {
    pub fn dual_objective(&self) -> f64 {
        -0.5 * self
            .alpha
            .iter()
            .zip(&self.gradient)
            .map(|(a, g)| a * (g - 1.0))
            .sum::<f64>()
    }
}

/// Solves the binary C-SVC dual. `y` holds +1/-1 labels.
pub fn solve_binary(x: &Matrix, y: &[f64], c: f64, gamma: f64, cfg: &SmoConfig) -> Result<BinarySolution> {
    let n = x.rows();
    let mut alpha = vec![0.0; n];
    let mut grad = vec![-1.0; n];
    let mut cache = KernelCache::new(x, gamma, cfg.cache_rows);
    let mut trace = Vec::new();
    let mut iterations = 0;
    let mut violation;
    loop {
        // i maximises -y G over I_up, j minimises -y G over I_low
        let mut gmax = f64::NEG_INFINITY;
        let mut gmin = f64::INFINITY;
        let mut i_sel = usize::MAX;
        let mut j_sel = usize::MAX;
        for t in 0..n {
            let v = -y[t] * grad[t];
            let up = if y[t] > 0.0 { alpha[t] < c } else { alpha[t] > 0.0 };
            let low = if y[t] > 0.0 { alpha[t] > 0.0 } else { alpha[t] < c };
            if up && v > gmax {
                gmax = v;
                i_sel = t;
            }
            if low && v < gmin {
                gmin = v;
                j_sel = t;
            }
        }
        violation = gmax - gmin;
        if i_sel == usize::MAX || j_sel == usize::MAX || violation < cfg.tolerance {
            break;
        }
        if iterations >= cfg.max_iterations {
            return Err(Error::SmoNotConverged {
                iterations,
                violation,
            });
        }
        iterations += 1;
        let (i, j) = (i_sel, j_sel);
        let (ki, kj) = cache.pair(i, j);
        let kij = ki[j];
        let (old_i, old_j) = (alpha[i], alpha[j]);
        if y[i] != y[j] {
            let quad = (ki[i] + kj[j] - 2.0 * kij).max(TAU);
            let delta = (-grad[i] - grad[j]) / quad;
            let diff = alpha[i] - alpha[j];
            alpha[i] += delta;
            alpha[j] += delta;
            if diff > 0.0 {
                if alpha[j] < 0.0 {
                    alpha[j] = 0.0;
                    alpha[i] = diff;
                }
            } else if alpha[i] < 0.0 {
                alpha[i] = 0.0;
                alpha[j] = -diff;
            }
            if diff > 0.0 {
                if alpha[i] > c {
                    alpha[i] = c;
                    alpha[j] = c - diff;
                }
            } else if alpha[j] > c {
                alpha[j] = c;
                alpha[i] = c + diff;
            }
        } else {
            let quad = (ki[i] + kj[j] - 2.0 * kij).max(TAU);
            let delta = (grad[i] - grad[j]) / quad;
            let sum = alpha[i] + alpha[j];
            alpha[i] -= delta;
            alpha[j] += delta;
            if sum > c {
                if alpha[i] > c {
                    alpha[i] = c;
                    alpha[j] = sum - c;
                }
            } else if alpha[j] < 0.0 {
                alpha[j] = 0.0;
                alpha[i] = sum;
            }
            if sum > c {
                if alpha[j] > c {
                    alpha[j] = c;
                    alpha[i] = sum - c;
                }
            } else if alpha[i] < 0.0 {
                alpha[i] = 0.0;
                alpha[j] = sum;
            }
        }
        let di = (alpha[i] - old_i) * y[i];
        let dj = (alpha[j] - old_j) * y[j];
        for t in 0..n {
            grad[t] += y[t] * (ki[t] * di + kj[t] * dj);
        }
        if cfg.record_trace {
            let obj = -0.5 * alpha.iter().zip(&grad).map(|(a, g)| a * (g - 1.0)).sum::<f64>();
            trace.push(obj);
        }
    }
    let rho = compute_rho(&alpha, &grad, y, c);
    Ok(BinarySolution {
        alpha,
        rho,
        iterations,
        trace,
        gradient: grad,
        violation,
    })
}

fn compute_rho(alpha: &[f64], grad: &[f64], y: &[f64], c: f64) -> f64 {
    let mut ub = f64::INFINITY;
    let mut lb = f64::NEG_INFINITY;
    let mut n_free = 0usize;
    let mut sum_free = 0.0;
    for t in 0..alpha.len() {
        let yg = y[t] * grad[t];
        if alpha[t] >= c {
            if y[t] < 0.0 {
                ub = ub.min(yg);
            } else {
                lb = lb.max(yg);
            }
        } else if alpha[t] <= 0.0 {
            if y[t] > 0.0 {
                ub = ub.min(yg);
            } else {
                lb = lb.max(yg);
            }
        } else {
            n_free += 1;
            sum_free += yg;
        }
    }
    if n_free > 0 {
        sum_free / n_free as f64
    } else {
        0.5 * (ub + lb)
    }
}

/// One binary sub-model: class `positive` against class `negative`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BinarySvm {
    pub positive: usize,
    pub negative: usize,
    pub support_vectors: Matrix,
    /// `alpha_i * y_i` for each support vector.
    pub coefficients: Vec<f64>,
    pub bias: f64,
    pub iterations: usize,
}

impl BinarySvm {
    pub fn decision(&self, x: &[f64], gamma: f64) -> f64 {
        let mut s = self.bias;
        for (k, coef) in self.coefficients.iter().enumerate() {
            s += coef * rbf(self.support_vectors.row(k), x, gamma);
        }
        s
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SvmModel {
    pub cost: f64,
    pub gamma: f64,
    pub n_classes: usize,
    pub n_features: usize,
    pub machines: Vec<BinarySvm>,
}

pub fn train(x: &Matrix, y: &[usize], n_classes: usize, cost: f64, gamma: f64, cfg: &SmoConfig) -> Result<SvmModel> {
    if !(cost > 0.0 && cost.is_finite()) {
        return Err(Error::InvalidHyperparameter {
            name: "cost".into(),
            value: cost.to_string(),
            reason: "must be > 0".into(),
        });
    }
    if !(gamma > 0.0 && gamma.is_finite()) {
        return Err(Error::InvalidHyperparameter {
            name: "gamma".into(),
            value: gamma.to_string(),
            reason: "must be > 0".into(),
        });
    }
    let mut machines = Vec::new();
    for a in 0..n_classes {
        for b in a + 1..n_classes {
            let idx: Vec<usize> = (0..y.len()).filter(|&i| y[i] == a || y[i] == b).collect();
            if idx.is_empty() {
                continue;
            }
            let sub = x.select_rows(&idx);
            let sy: Vec<f64> = idx.iter().map(|&i| if y[i] == a { 1.0 } else { -1.0 }).collect();
            let machine = if sy.iter().all(|&v| v > 0.0) || sy.iter().all(|&v| v < 0.0) {
                // only one of the two classes present in this training split
                BinarySvm {
                    positive: a,
                    negative: b,
                    support_vectors: Matrix::zeros(0, x.cols()),
                    coefficients: Vec::new(),
                    bias: sy[0],
                    iterations: 0,
                }
            } else {
                let sol = solve_binary(&sub, &sy, cost, gamma, cfg)?;
                let sv: Vec<usize> = (0..idx.len()).filter(|&t| sol.alpha[t] > 0.0).collect();
                BinarySvm {
                    positive: a,
                    negative: b,
                    support_vectors: sub.select_rows(&sv),
                    coefficients: sv.iter().map(|&t| sol.alpha[t] * sy[t]).collect(),
                    bias: -sol.rho,
                    iterations: sol.iterations,
                }
            };
            machines.push(machine);
        }
    }
    Ok(SvmModel {
        cost,
        gamma,
        n_classes,
        n_features: x.cols(),
        machines,
    })
}

impl SvmModel {
    /// One-vs-one vote fractions.
    pub fn scores(&self, x: &[f64]) -> Vec<f64> {
        let mut votes = vec![0.0; self.n_classes];
        for m in &self.machines {
            if m.decision(x, self.gamma) > 0.0 {
                votes[m.positive] += 1.0;
            } else {
                votes[m.negative] += 1.0;
            }
        }
        let total: f64 = votes.iter().sum();
        if total > 0.0 {
            votes.iter_mut().for_each(|v| *v /= total);
        } else {
            votes.iter_mut().for_each(|v| *v = 1.0 / self.n_classes as f64);
        }
        votes
    }

    /// Decision value of the first machine (class 0 vs class 1 for binary problems).
    pub fn decision_value(&self, x: &[f64]) -> f64 {
        self.machines.first().map(|m| m.decision(x, self.gamma)).unwrap_or(0.0)
    }
}

/// Primal objective minus dual objective for a binary solution on its training set.
pub fn duality_gap(x: &Matrix, y: &[f64], c: f64, gamma: f64, sol: &BinarySolution) -> f64 {
    let n = x.rows();
    let mut gap = 0.0;
    for i in 0..n {
        let mut f = -sol.rho;
        for j in 0..n {
            if sol.alpha[j] > 0.0 {
                f += sol.alpha[j] * y[j] * rbf(x.row(j), x.row(i), gamma);
            }
        }
        let margin = y[i] * f;
        gap += sol.alpha[i] * (margin - 1.0) + c * (1.0 - margin).max(0.0);
    }
    gap
}
