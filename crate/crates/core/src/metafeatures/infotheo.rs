use std::collections::BTreeMap;

use crate::data::Dataset;
use crate::metafeatures::{capped_ratio, mean};

/// Equal-frequency bin index per value, `bins` bins over average ranks.
/// Depends on the values only through their order.
pub fn discretize(col: &[f64], bins: usize) -> Vec<usize> {
    let n = col.len();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| col[a].total_cmp(&col[b]));
    let mut out = vec![0; n];
    let mut i = 0;
    while i < n {
        let mut j = i + 1;
        while j < n && col[order[j]] == col[order[i]] {
            j += 1;
        }
        // average rank minus one half, in [0, n)
        let pos = (i + j) as f64 / 2.0;
        let bin = ((pos * bins as f64 / n as f64) as usize).min(bins - 1);
        for &o in &order[i..j] {
            out[o] = bin;
        }
        i = j;
    }
    out
}

fn entropy_of_counts<I: IntoIterator<Item = usize>>(counts: I, n: usize) -> f64 {
    let nf = n as f64;
    counts
        .into_iter()
        .filter(|&c| c > 0)
        .map(|c| {
            let p = c as f64 / nf;
            -p * p.log2()
        })
        .sum()
}

fn entropy(codes: &[usize]) -> f64 {
    let mut counts: BTreeMap<usize, usize> = BTreeMap::new();
    for &c in codes {
        *counts.entry(c).or_default() += 1;
    }
    entropy_of_counts(counts.into_values(), codes.len())
}

fn joint_entropy(a: &[usize], b: &[usize]) -> f64 {
    let mut counts: BTreeMap<(usize, usize), usize> = BTreeMap::new();
    for (&p, &q) in a.iter().zip(b) {
        *counts.entry((p, q)).or_default() += 1;
    }
    entropy_of_counts(counts.into_values(), a.len())
}

pub fn extract_infotheoretic(d: &Dataset) -> Vec<f64> {
    let n = d.n_instances();
    let bins = ((n as f64).sqrt().ceil() as usize).max(2);
    let cl_ent = entropy(&d.y);
    let n_cl_ent = if d.n_classes > 1 {
        cl_ent / (d.n_classes as f64).log2()
    } else {
        0.0
    };
    let mut atr = Vec::new();
    let mut joint = Vec::new();
    let mut mi = Vec::new();
    for j in 0..d.n_features() {
        let codes = discretize(&d.x.column(j), bins);
        let h = entropy(&codes);
        let hj = joint_entropy(&codes, &d.y);
        atr.push(h);
        joint.push(hj);
        mi.push((h + cl_ent - hj).max(0.0));
    }
    let atr_ent = mean(&atr);
    let mut_inf = mean(&mi);
    vec![
        cl_ent,
        n_cl_ent,
        atr_ent,
        atr_ent / (bins as f64).log2(),
        mean(&joint),
        mut_inf,
        capped_ratio(cl_ent, mut_inf),
        capped_ratio(atr_ent - mut_inf, mut_inf),
    ]
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::matrix::Matrix;
    use crate::rng::stream;
    use rand::Rng;

    #[test]
    fn balanced_binary_class_entropy() {
        let x = Matrix::from_vec(4, 1, vec![1.0, 2.0, 3.0, 4.0]);
        let v = extract_infotheoretic(&Dataset::from_matrix("d", x, vec![0, 1, 0, 1]));
        assert!((v[0] - 1.0).abs() < 1e-15);
        assert!((v[1] - 1.0).abs() < 1e-15);
    }

    #[test]
    fn class_copy_attribute_has_full_information() {
        let y: Vec<usize> = (0..100).map(|i| usize::from(i % 3 == 0)).collect();
        let x = Matrix::from_vec(100, 1, y.iter().map(|&c| c as f64).collect());
        let v = extract_infotheoretic(&Dataset::from_matrix("d", x, y));
        assert!((v[5] - v[0]).abs() < 1e-12);
    }

    #[test]
    fn independent_attribute_has_little_information() {
        let mut rng = stream(8);
        let n = 1000;
        let y: Vec<usize> = (0..n).map(|i| i % 2).collect();
        let x = Matrix::from_vec(n, 1, (0..n).map(|_| rng.random::<f64>()).collect());
        let v = extract_infotheoretic(&Dataset::from_matrix("d", x, y));
        assert!(v[5] <= 0.05, "mutual information {}", v[5]);
    }

    #[test]
    fn invariant_to_monotone_transforms() {
        let mut rng = stream(2);
        let n = 150;
        let rows: Vec<Vec<f64>> = (0..n).map(|_| vec![rng.random_range(-2.0..2.0), rng.random_range(0.1..3.0)]).collect();
        let y: Vec<usize> = rows.iter().map(|r| usize::from(r[0] > 0.3)).collect();
        let warped: Vec<Vec<f64>> = rows.iter().map(|r| vec![r[0].powi(3) + 5.0, r[1].ln()]).collect();
        let a = extract_infotheoretic(&Dataset::from_matrix("a", Matrix::from_rows(&rows), y.clone()));
        let b = extract_infotheoretic(&Dataset::from_matrix("b", Matrix::from_rows(&warped), y));
        assert_eq!(a, b);
    }

    #[test]
    fn zero_information_hits_the_cap() {
        let x = Matrix::from_vec(4, 1, vec![1.0, 1.0, 2.0, 2.0]);
        let v = extract_infotheoretic(&Dataset::from_matrix("d", x, vec![0, 1, 0, 1]));
        assert!(v[5].abs() < 1e-12);
        assert_eq!(v[6], crate::metafeatures::RATIO_CAP);
    }
}
