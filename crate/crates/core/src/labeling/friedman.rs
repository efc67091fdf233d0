//! Friedman rank test with the Nemenyi critical difference.

use serde::{Deserialize, Serialize};
use statrs::distribution::{ChiSquared, ContinuousCDF};

use crate::error::{Error, Result};
use crate::labeling::wilcoxon::average_ranks;

/// Critical values q_alpha for k = 2..=10 (studentized range / sqrt 2).
const Q_05: [f64; 9] = [1.960, 2.343, 2.569, 2.728, 2.850, 2.949, 3.031, 3.102, 3.164];
const Q_10: [f64; 9] = [1.645, 2.052, 2.291, 2.459, 2.589, 2.693, 2.780, 2.855, 2.920];

pub fn nemenyi_q(k: usize, alpha: f64) -> Result<f64> {
    if !(2..=10).contains(&k) {
        return Err(Error::InvalidArgument(format!("Nemenyi table covers 2..=10 algorithms, got {k}")));
    }
    let table = if (alpha - 0.05).abs() < 1e-12 {
        &Q_05
    } else if (alpha - 0.10).abs() < 1e-12 {
        &Q_10
    } else {
        return Err(Error::InvalidArgument(format!("Nemenyi table covers alpha 0.05 and 0.10, got {alpha}")));
    };
    Ok(table[k - 2])
}

pub fn critical_difference(k: usize, n: usize, alpha: f64) -> Result<f64> {
    Ok(nemenyi_q(k, alpha)? * (k as f64 * (k as f64 + 1.0) / (6.0 * n as f64)).sqrt())
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FriedmanResult {
    pub statistic: f64,
    pub p_value: f64,
    pub reject: bool,
    /// Mean rank per algorithm; rank 1 is the best (highest score).
    pub avg_ranks: Vec<f64>,
    pub cd: f64,
    /// Maximal sets of algorithms whose pairwise rank gaps are below CD.
    pub groups: Vec<Vec<usize>>,
}

/// `scores[a][s]`: score of algorithm `a` on setting `s`, higher is better.
pub fn friedman_nemenyi(scores: &[Vec<f64>], alpha: f64) -> Result<FriedmanResult> {
    let k = scores.len();
    if k < 3 {
        return Err(Error::InvalidArgument(format!("Friedman test needs at least 3 algorithms, got {k}")));
    }
    let n = scores[0].len();
    if n < 2 {
        return Err(Error::InvalidArgument(format!("Friedman test needs at least 2 settings, got {n}")));
    }
    if let Some(bad) = scores.iter().find(|s| s.len() != n) {
        return Err(Error::LengthMismatch {
            left: n,
            right: bad.len(),
        });
    }
    let mut avg_ranks = vec![0.0; k];
    for s in 0..n {
        let neg: Vec<f64> = scores.iter().map(|a| -a[s]).collect();
        for (a, r) in average_ranks(&neg).into_iter().enumerate() {
            avg_ranks[a] += r;
        }
    }
    avg_ranks.iter_mut().for_each(|r| *r /= n as f64);
    let (kf, nf) = (k as f64, n as f64);
    let sum_sq: f64 = avg_ranks.iter().map(|r| r * r).sum();
    let statistic = (12.0 * nf / (kf * (kf + 1.0)) * (sum_sq - kf * (kf + 1.0).powi(2) / 4.0)).max(0.0);
    let p_value = ChiSquared::new(kf - 1.0).map(|c| c.sf(statistic)).unwrap_or(1.0);
    let reject = statistic > 1e-12 && p_value < alpha;
    let cd = critical_difference(k, n, alpha)?;

    let groups = if reject {
        let mut order: Vec<usize> = (0..k).collect();
        order.sort_by(|&a, &b| avg_ranks[a].total_cmp(&avg_ranks[b]).then(a.cmp(&b)));
        let mut windows: Vec<(usize, usize)> = Vec::new();
        for i in 0..k {
            let mut j = i;
            while j + 1 < k && avg_ranks[order[j + 1]] - avg_ranks[order[i]] < cd {
                j += 1;
            }
            if windows.last().is_none_or(|&(_, e)| j > e) {
                windows.push((i, j));
            }
        }
        windows.into_iter().map(|(i, j)| order[i..=j].to_vec()).collect()
    } else {
        vec![(0..k).collect()]
    };
    Ok(FriedmanResult {
        statistic,
        p_value,
        reject,
        avg_ranks,
        cd,
        groups,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn seven_learners_nine_setups() {
        let cd = critical_difference(7, 9, 0.05).unwrap();
        assert!((cd - 3.002).abs() < 0.01);
    }

    #[test]
    fn identical_columns_do_not_reject() {
        let row = vec![0.7, 0.8, 0.6, 0.9];
        let r = friedman_nemenyi(&[row.clone(), row.clone(), row], 0.05).unwrap();
        assert!(!r.reject);
        assert_eq!(r.avg_ranks, vec![2.0; 3]);
        assert_eq!(r.groups, vec![vec![0, 1, 2]]);
    }

    #[test]
    fn dominant_algorithm_is_separated() {
        let n = 20;
        let best: Vec<f64> = (0..n).map(|s| 0.9 + s as f64 * 1e-3).collect();
        let mid: Vec<f64> = (0..n).map(|s| if s % 2 == 0 { 0.6 } else { 0.5 }).collect();
        let low: Vec<f64> = (0..n).map(|s| if s % 2 == 0 { 0.5 } else { 0.6 }).collect();
        let r = friedman_nemenyi(&[mid, best, low], 0.05).unwrap();
        assert_eq!(r.avg_ranks[1], 1.0);
        assert!(r.reject);
        // ranks 2.5, 1, 2.5 and CD = 2.343 * sqrt(12/120) = 0.741
        assert!(r.groups.iter().all(|g| !g.contains(&1) || g.len() == 1));
        assert!(r.groups.contains(&vec![0, 2]));
    }

    #[test]
    fn ranks_sum_per_setting() {
        let scores = vec![vec![0.1, 0.5, 0.3], vec![0.2, 0.5, 0.1], vec![0.3, 0.4, 0.2], vec![0.3, 0.9, 0.0]];
        let r = friedman_nemenyi(&scores, 0.10).unwrap();
        let total: f64 = r.avg_ranks.iter().sum();
        assert!((total - 4.0 * 5.0 / 2.0).abs() < 1e-12);
    }

    #[test]
    fn rejects_bad_shapes() {
        assert!(friedman_nemenyi(&[vec![1.0, 2.0], vec![1.0, 2.0]], 0.05).is_err());
        assert!(friedman_nemenyi(&[vec![1.0], vec![1.0], vec![2.0]], 0.05).is_err());
        assert!(nemenyi_q(3, 0.01).is_err());
    }
}
