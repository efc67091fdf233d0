use nalgebra::DMatrix;

use crate::data::{ColumnKind, Dataset};
use crate::matrix::Matrix;
use crate::metafeatures::mean;

/// Population skewness and excess kurtosis; `None` for a constant column.
fn moments(col: &[f64]) -> Option<(f64, f64)> {
    let n = col.len() as f64;
    let m = col.iter().sum::<f64>() / n;
    let (mut m2, mut m3, mut m4) = (0.0, 0.0, 0.0);
    for v in col {
        let d = v - m;
        m2 += d * d;
        m3 += d * d * d;
        m4 += d * d * d * d;
    }
    let (m2, m3, m4) = (m2 / n, m3 / n, m4 / n);
    if m2 <= 1e-24 {
        return None;
    }
    Some((m3 / m2.powf(1.5), m4 / (m2 * m2) - 3.0))
}

fn min_max(col: &[f64]) -> Vec<f64> {
    let lo = col.iter().copied().fold(f64::INFINITY, f64::min);
    let hi = col.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if hi > lo {
        col.iter().map(|v| (v - lo) / (hi - lo)).collect()
    } else {
        vec![0.0; col.len()]
    }
}

fn pearson(a: &[f64], b: &[f64]) -> f64 {
    let n = a.len() as f64;
    let (ma, mb) = (a.iter().sum::<f64>() / n, b.iter().sum::<f64>() / n);
    let (mut sab, mut saa, mut sbb) = (0.0, 0.0, 0.0);
    for (x, y) in a.iter().zip(b) {
        sab += (x - ma) * (y - mb);
        saa += (x - ma) * (x - ma);
        sbb += (y - mb) * (y - mb);
    }
    if saa <= 0.0 || sbb <= 0.0 {
        0.0
    } else {
        (sab / (saa * sbb).sqrt()).clamp(-1.0, 1.0)
    }
}

/// Orthonormal basis of the column space of the centered matrix.
fn centered_basis(m: &DMatrix<f64>) -> Option<DMatrix<f64>> {
    let mut c = m.clone();
    for mut col in c.column_iter_mut() {
        let mu = col.mean();
        col.add_scalar_mut(-mu);
    }
    let svd = c.svd(true, false);
    let u = svd.u?;
    let smax = svd.singular_values.max();
    if smax <= 1e-12 {
        return None;
    }
    let keep: Vec<usize> = (0..svd.singular_values.len())
        .filter(|&i| svd.singular_values[i] > 1e-9 * smax)
        .collect();
    Some(u.select_columns(&keep))
}

/// Canonical correlations between `x` and the one-hot class matrix,
/// in descending order.
pub fn canonical_correlations(x: &Matrix, y: &[usize], n_classes: usize) -> Vec<f64> {
    let n = x.rows();
    if n_classes < 2 || n < 3 {
        return Vec::new();
    }
    let xm = DMatrix::from_row_slice(n, x.cols(), x.as_slice());
    let ym = DMatrix::from_fn(n, n_classes - 1, |i, j| if y[i] == j { 1.0 } else { 0.0 });
    let (Some(qx), Some(qy)) = (centered_basis(&xm), centered_basis(&ym)) else {
        return Vec::new();
    };
    let m = qx.transpose() * qy;
    let mut s: Vec<f64> = m.singular_values().iter().map(|v| v.clamp(0.0, 1.0)).collect();
    s.sort_by(|a, b| b.total_cmp(a));
    s
}

pub fn extract_statistical(d: &Dataset) -> Vec<f64> {
    let cols: Vec<Vec<f64>> = (0..d.n_features()).map(|j| d.x.column(j)).collect();
    let numeric: Vec<&Vec<f64>> = cols
        .iter()
        .zip(&d.columns)
        .filter(|(_, m)| m.kind == ColumnKind::Numeric)
        .map(|(c, _)| c)
        .collect();
    let plain: Vec<(f64, f64)> = numeric.iter().filter_map(|c| moments(c)).collect();
    let normalized: Vec<(f64, f64)> = cols.iter().filter_map(|c| moments(&min_max(c))).collect();

    let p = cols.len();
    let mut abs_corr = Vec::with_capacity(p * p.saturating_sub(1) / 2);
    for a in 0..p {
        for b in a + 1..p {
            abs_corr.push(pearson(&cols[a], &cols[b]).abs());
        }
    }
    let cc = canonical_correlations(&d.x, &d.y, d.n_classes);
    let can_c = cc.first().copied().unwrap_or(0.0);
    let total: f64 = cc.iter().sum();
    let frac = if total > 0.0 { can_c / total } else { 0.0 };
    vec![
        mean(&plain.iter().map(|m| m.0).collect::<Vec<_>>()),
        mean(&normalized.iter().map(|m| m.0).collect::<Vec<_>>()),
        mean(&plain.iter().map(|m| m.1).collect::<Vec<_>>()),
        mean(&normalized.iter().map(|m| m.1).collect::<Vec<_>>()),
        mean(&abs_corr),
        can_c,
        frac,
    ]
}
