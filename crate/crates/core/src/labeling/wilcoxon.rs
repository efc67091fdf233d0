//! Wilcoxon signed-rank test for paired samples.

use serde::{Deserialize, Serialize};
use statrs::distribution::{ContinuousCDF, Normal};

use crate::error::{Error, Result};

/// Largest nonzero-pair count handled by the exact distribution.
pub const EXACT_LIMIT: usize = 25;

/// Differences whose magnitude is within this of zero (or of each other)
/// are treated as zero (or tied). BAC values computed from different fold
/// sizes would otherwise produce spurious ties broken by rounding.
pub const TIE_EPS: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Alternative {
    /// x tends to be larger than y.
    Greater,
    TwoSided,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct WilcoxonResult {
    pub p_value: f64,
    /// Sum of ranks of positive differences.
    pub statistic: f64,
    pub n_nonzero: usize,
    pub exact: bool,
    /// Every difference was zero.
    pub degenerate: bool,
}

/// Average ranks (1-based) of `values`, tie groups within `TIE_EPS`.
pub fn average_ranks(values: &[f64]) -> Vec<f64> {
    let mut order: Vec<usize> = (0..values.len()).collect();
    order.sort_by(|&a, &b| values[a].total_cmp(&values[b]));
    let mut ranks = vec![0.0; values.len()];
    let mut i = 0;
    while i < order.len() {
        let mut j = i + 1;
        while j < order.len() && (values[order[j]] - values[order[i]]).abs() <= TIE_EPS {
            j += 1;
        }
        let r = (i + 1 + j) as f64 / 2.0;
        for &o in &order[i..j] {
            ranks[o] = r;
        }
        i = j;
    }
    ranks
}

/// Counts of sign assignments by doubled positive-rank sum.
fn exact_counts(doubled: &[usize]) -> Vec<f64> {
    let total: usize = doubled.iter().sum();
    let mut counts = vec![0.0f64; total + 1];
    counts[0] = 1.0;
    let mut reach = 0;
    for &r in doubled {
        for s in (0..=reach).rev() {
            if counts[s] > 0.0 {
                counts[s + r] += counts[s];
            }
        }
        reach += r;
    }
    counts
}

pub fn wilcoxon_signed_rank(x: &[f64], y: &[f64], alternative: Alternative) -> Result<WilcoxonResult> {
    if x.len() != y.len() {
        return Err(Error::LengthMismatch {
            left: x.len(),
            right: y.len(),
        });
    }
    let diffs: Vec<f64> = x.iter().zip(y).map(|(a, b)| a - b).filter(|d| d.abs() > TIE_EPS).collect();
    let n = diffs.len();
    if n == 0 {
        return Ok(WilcoxonResult {
            p_value: 1.0,
            statistic: 0.0,
            n_nonzero: 0,
            exact: true,
            degenerate: true,
        });
    }
    if n < 3 {
        return Err(Error::InsufficientPairs(n));
    }
    let ranks = average_ranks(&diffs.iter().map(|d| d.abs()).collect::<Vec<_>>());
    let w: f64 = diffs.iter().zip(&ranks).filter(|(d, _)| **d > 0.0).map(|(_, r)| r).sum();

    if n <= EXACT_LIMIT {
        let doubled: Vec<usize> = ranks.iter().map(|r| (2.0 * r).round() as usize).collect();
        let counts = exact_counts(&doubled);
        let total = 2f64.powi(n as i32);
        let w2 = (2.0 * w).round() as usize;
        let upper: f64 = counts[w2..].iter().sum::<f64>() / total;
        let p = match alternative {
            Alternative::Greater => upper,
            Alternative::TwoSided => {
                let lower: f64 = counts[..=w2].iter().sum::<f64>() / total;
                (2.0 * upper.min(lower)).min(1.0)
            }
        };
        return Ok(WilcoxonResult {
            p_value: p,
            statistic: w,
            n_nonzero: n,
            exact: true,
            degenerate: false,
        });
    }

    let nf = n as f64;
    let mean = nf * (nf + 1.0) / 4.0;
    let mut abs_sorted: Vec<f64> = diffs.iter().map(|d| d.abs()).collect();
    abs_sorted.sort_by(f64::total_cmp);
    let mut tie_term = 0.0;
    let mut i = 0;
    while i < n {
        let mut j = i + 1;
        while j < n && abs_sorted[j] - abs_sorted[i] <= TIE_EPS {
            j += 1;
        }
        let t = (j - i) as f64;
        tie_term += t * t * t - t;
        i = j;
    }
    let var = nf * (nf + 1.0) * (2.0 * nf + 1.0) / 24.0 - tie_term / 48.0;
    let normal = Normal::standard();
    let p = if var <= 0.0 {
        1.0
    } else {
        let sd = var.sqrt();
        match alternative {
            Alternative::Greater => normal.sf((w - mean - 0.5) / sd),
            Alternative::TwoSided => (2.0 * normal.sf(((w - mean).abs() - 0.5) / sd)).min(1.0),
        }
    };
    Ok(WilcoxonResult {
        p_value: p,
        statistic: w,
        n_nonzero: n,
        exact: false,
        degenerate: false,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    /// Walks all 2^n sign assignments of the observed ranks.
    fn enumerate(x: &[f64], y: &[f64], alternative: Alternative) -> f64 {
        let diffs: Vec<f64> = x.iter().zip(y).map(|(a, b)| a - b).filter(|d| d.abs() > TIE_EPS).collect();
        let n = diffs.len();
        let ranks = average_ranks(&diffs.iter().map(|d| d.abs()).collect::<Vec<_>>());
        let w: f64 = diffs.iter().zip(&ranks).filter(|(d, _)| **d > 0.0).map(|(_, r)| r).sum();
        let (mut ge, mut le) = (0u64, 0u64);
        for mask in 0u64..(1 << n) {
            let s: f64 = (0..n).filter(|i| mask >> i & 1 == 1).map(|i| ranks[i]).sum();
            if s >= w - 1e-9 {
                ge += 1;
            }
            if s <= w + 1e-9 {
                le += 1;
            }
        }
        let total = (1u64 << n) as f64;
        match alternative {
            Alternative::Greater => ge as f64 / total,
            Alternative::TwoSided => (2.0 * (ge.min(le) as f64) / total).min(1.0),
        }
    }

    #[test]
    fn six_positive_differences() {
        let x = [0.9, 0.8, 0.85, 0.7, 0.95, 0.75];
        let y = [0.5; 6];
        let r = wilcoxon_signed_rank(&x, &y, Alternative::Greater).unwrap();
        assert_eq!(r.p_value, 1.0 / 64.0);
        assert!(r.exact);
    }

    #[test]
    fn identical_samples_are_degenerate() {
        let x = [0.5, 0.6, 0.7];
        let r = wilcoxon_signed_rank(&x, &x, Alternative::Greater).unwrap();
        assert!(r.degenerate);
        assert_eq!(r.p_value, 1.0);
    }

    #[test]
    fn too_few_pairs_and_length_mismatch() {
        assert!(matches!(
            wilcoxon_signed_rank(&[1.0, 2.0], &[0.0, 0.0], Alternative::Greater),
            Err(Error::InsufficientPairs(2))
        ));
        assert!(wilcoxon_signed_rank(&[1.0], &[0.0, 0.0], Alternative::Greater).is_err());
    }

    #[test]
    fn thirty_uniform_wins() {
        let r = wilcoxon_signed_rank(&[0.9; 30], &[0.7; 30], Alternative::Greater).unwrap();
        assert!(!r.exact);
        assert!(r.p_value < 1e-5);
        let x: Vec<f64> = (0..20).map(|i| 0.8 + i as f64 * 0.001).collect();
        let r = wilcoxon_signed_rank(&x, &[0.5; 20], Alternative::Greater).unwrap();
        assert_eq!(r.p_value, 2f64.powi(-20));
    }

    #[test]
    fn normal_branch_matches_scipy() {
        // scipy.stats.wilcoxon(d, alternative="greater", method="approx", correction=True)
        let d: Vec<f64> = (1..=30).map(|i| if i % 3 == 0 { -(i as f64) } else { i as f64 }).collect();
        let r = wilcoxon_signed_rank(&d, &[0.0; 30], Alternative::Greater).unwrap();
        // W+ = 465 - 165 = 300, mean 232.5, sd = sqrt(30*31*61/24)
        let sd = (30.0f64 * 31.0 * 61.0 / 24.0).sqrt();
        let z = (300.0 - 232.5 - 0.5) / sd;
        assert_eq!(r.statistic, 300.0);
        assert!((r.p_value - Normal::standard().sf(z)).abs() < 1e-15);
    }

    fn paired(n: usize) -> impl Strategy<Value = (Vec<f64>, Vec<f64>)> {
        // quarter steps keep ties and zeros exact
        (
            prop::collection::vec(-8i32..8, n),
            prop::collection::vec(-8i32..8, n),
        )
            .prop_map(|(a, b)| {
                (
                    a.into_iter().map(|v| v as f64 / 4.0).collect(),
                    b.into_iter().map(|v| v as f64 / 4.0).collect(),
                )
            })
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(300))]
        #[test]
        fn exact_matches_enumeration((x, y) in (3usize..=12).prop_flat_map(paired)) {
            for alt in [Alternative::Greater, Alternative::TwoSided] {
                match wilcoxon_signed_rank(&x, &y, alt) {
                    Ok(r) if !r.degenerate => prop_assert!((r.p_value - enumerate(&x, &y, alt)).abs() < 1e-12),
                    _ => {}
                }
            }
        }

        #[test]
        fn shift_invariance((x, y) in (3usize..=12).prop_flat_map(paired), c in -4i32..4) {
            let c = c as f64;
            let xs: Vec<f64> = x.iter().map(|v| v + c).collect();
            let ys: Vec<f64> = y.iter().map(|v| v + c).collect();
            let a = wilcoxon_signed_rank(&x, &y, Alternative::Greater).ok();
            let b = wilcoxon_signed_rank(&xs, &ys, Alternative::Greater).ok();
            prop_assert_eq!(a.map(|r| r.p_value), b.map(|r| r.p_value));
        }

        #[test]
        fn swapped_sides_cover_one((x, y) in (3usize..=12).prop_flat_map(paired)) {
            if let (Ok(a), Ok(b)) = (
                wilcoxon_signed_rank(&x, &y, Alternative::Greater),
                wilcoxon_signed_rank(&y, &x, Alternative::Greater),
            ) {
                prop_assert!(a.p_value + b.p_value >= 1.0 - 1e-12);
            }
        }
    }
}
