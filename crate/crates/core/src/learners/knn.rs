use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::matrix::{squared_distance, Matrix};

/// k-nearest-neighbour classifier (Euclidean, uniform votes).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct KnnModel {
    pub k: usize,
    pub x: Matrix,
    pub y: Vec<usize>,
    pub n_classes: usize,
}

pub fn train(x: &Matrix, y: &[usize], n_classes: usize, k: usize) -> Result<KnnModel> {
    if k == 0 || k > x.rows() {
        return Err(Error::NeighborsExceedTrainingSize { k, n: x.rows() });
    }
    Ok(KnnModel {
        k,
        x: x.clone(),
        y: y.to_vec(),
        n_classes,
    })
}

impl KnnModel {
    fn vote(&self, q: &[f64], exclude: Option<usize>) -> Vec<f64> {
        let mut d: Vec<(f64, usize)> = (0..self.x.rows())
            .filter(|&i| Some(i) != exclude)
            .map(|i| (squared_distance(q, self.x.row(i)), i))
            .collect();
        let k = self.k.min(d.len());
        let cmp = |a: &(f64, usize), b: &(f64, usize)| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1));
        if k < d.len() {
            d.select_nth_unstable_by(k, cmp);
        }
        let mut s = vec![0.0; self.n_classes];
        for &(_, i) in &d[..k] {
            s[self.y[i]] += 1.0;
        }
        s.iter_mut().for_each(|v| *v /= k.max(1) as f64);
        s
    }

    pub fn scores(&self, q: &[f64]) -> Vec<f64> {
        self.vote(q, None)
    }

    /// Scores for training row `i` with the row itself left out.
    pub fn scores_leave_one_out(&self, i: usize) -> Vec<f64> {
        self.vote(self.x.row(i), Some(i))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn one_nn_resubstitution_is_perfect_with_self_included() {
        let x = Matrix::from_rows(&[vec![0.0], vec![0.4], vec![1.0], vec![1.3]]);
        let y = vec![0, 1, 0, 1];
        let m = train(&x, &y, 2, 1).unwrap();
        for i in 0..4 {
            assert_eq!(m.scores(x.row(i))[y[i]], 1.0);
        }
        // leave-one-out neighbours flip every label here
        for i in 0..4 {
            assert_eq!(m.scores_leave_one_out(i)[y[i]], 0.0);
        }
    }

    #[test]
    fn k_larger_than_training_set_fails() {
        let x = Matrix::from_rows(&[vec![0.0], vec![1.0]]);
        assert!(train(&x, &[0, 1], 2, 3).is_err());
    }
}
