//! Ho-Basu data complexity measures. Binary measures are computed for each
//! pair of classes and averaged; t1 and t2 are computed on all classes.

use nalgebra::{DMatrix, DVector};
use rand::Rng;

use crate::data::Dataset;
use crate::learners::linear::fit_logistic;
use crate::matrix::{dot, squared_distance, Matrix};
use crate::metafeatures::{capped_ratio, mean, INTERNAL_SEED, RATIO_CAP};
use crate::rng::derived_stream;

/// Two-class view: `y[i]` is 0 or 1.
struct Pair {
    x: Matrix,
    y: Vec<usize>,
}

impl Pair {
    fn n(&self) -> usize {
        self.x.rows()
    }

    fn class_rows(&self, c: usize) -> Vec<usize> {
        (0..self.n()).filter(|&i| self.y[i] == c).collect()
    }
}

fn dist(a: &[f64], b: &[f64]) -> f64 {
    squared_distance(a, b).sqrt()
}

fn mean_var(x: &Matrix, rows: &[usize], j: usize) -> (f64, f64) {
    let n = rows.len() as f64;
    let m = rows.iter().map(|&i| x.get(i, j)).sum::<f64>() / n;
    let v = rows.iter().map(|&i| (x.get(i, j) - m).powi(2)).sum::<f64>() / n;
    (m, v)
}

fn range(x: &Matrix, rows: &[usize], j: usize) -> (f64, f64) {
    rows.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &i| {
        let v = x.get(i, j);
        (lo.min(v), hi.max(v))
    })
}

fn f1(p: &Pair) -> f64 {
    let (a, b) = (p.class_rows(0), p.class_rows(1));
    (0..p.x.cols())
        .map(|j| {
            let (ma, va) = mean_var(&p.x, &a, j);
            let (mb, vb) = mean_var(&p.x, &b, j);
            capped_ratio((ma - mb).powi(2), va + vb)
        })
        .fold(0.0, f64::max)
}

fn f1v(p: &Pair) -> f64 {
    let cols = p.x.cols();
    let scatter = |rows: &[usize]| -> (DVector<f64>, DMatrix<f64>) {
        let n = rows.len() as f64;
        let mu = DVector::from_fn(cols, |j, _| rows.iter().map(|&i| p.x.get(i, j)).sum::<f64>() / n);
        let mut s = DMatrix::zeros(cols, cols);
        for &i in rows {
            let d = DVector::from_fn(cols, |j, _| p.x.get(i, j) - mu[j]);
            s += &d * d.transpose() / n;
        }
        (mu, s)
    };
    let (ma, sa) = scatter(&p.class_rows(0));
    let (mb, sb) = scatter(&p.class_rows(1));
    let w_mat = sa + sb;
    let d = ma - mb;
    let Ok(pinv) = w_mat.clone().pseudo_inverse(1e-10) else {
        return 0.0;
    };
    let w = pinv * &d;
    let num = w.dot(&d).powi(2);
    let den = (w.transpose() * &w_mat * &w)[(0, 0)];
    capped_ratio(num, den)
}

/// Per-feature overlap interval of the two classes among `rows`.
fn overlap(x: &Matrix, y: &[usize], rows: &[usize], j: usize) -> Option<(f64, f64)> {
    let a: Vec<usize> = rows.iter().copied().filter(|&i| y[i] == 0).collect();
    let b: Vec<usize> = rows.iter().copied().filter(|&i| y[i] == 1).collect();
    if a.is_empty() || b.is_empty() {
        return None;
    }
    let (la, ha) = range(x, &a, j);
    let (lb, hb) = range(x, &b, j);
    let (lo, hi) = (la.max(lb), ha.min(hb));
    (lo <= hi).then_some((lo, hi))
}

fn f2(p: &Pair) -> f64 {
    let (a, b) = (p.class_rows(0), p.class_rows(1));
    let mut prod = 1.0;
    for j in 0..p.x.cols() {
        let (la, ha) = range(&p.x, &a, j);
        let (lb, hb) = range(&p.x, &b, j);
        let span = ha.max(hb) - la.min(lb);
        let ov = (ha.min(hb) - la.max(lb)).max(0.0);
        prod *= if span > 0.0 { ov / span } else { 1.0 };
    }
    prod
}

/// Rows of `rows` lying outside the overlap interval of feature `j`.
fn discriminated(p: &Pair, rows: &[usize], j: usize) -> Vec<usize> {
    match overlap(&p.x, &p.y, rows, j) {
        None => rows.to_vec(),
        Some((lo, hi)) => rows
            .iter()
            .copied()
            .filter(|&i| {
                let v = p.x.get(i, j);
                v < lo || v > hi
            })
            .collect(),
    }
}

fn f3(p: &Pair) -> f64 {
    let all: Vec<usize> = (0..p.n()).collect();
    (0..p.x.cols())
        .map(|j| discriminated(p, &all, j).len() as f64 / p.n() as f64)
        .fold(0.0, f64::max)
}

fn f4(p: &Pair) -> f64 {
    let mut remaining: Vec<usize> = (0..p.n()).collect();
    let mut features: Vec<usize> = (0..p.x.cols()).collect();
    while !remaining.is_empty() && !features.is_empty() {
        let (pos, gone) = features
            .iter()
            .enumerate()
            .map(|(k, &j)| (k, discriminated(p, &remaining, j)))
            .max_by(|a, b| a.1.len().cmp(&b.1.len()).then(b.0.cmp(&a.0)))
            .expect("nonempty features");
        if gone.is_empty() {
            break;
        }
        remaining.retain(|i| !gone.contains(i));
        features.remove(pos);
    }
    1.0 - remaining.len() as f64 / p.n() as f64
}

/// Points interpolated between random same-class pairs, as many per class
/// as the class has members.
fn interpolate(p: &Pair, tag: u64) -> Pair {
    let mut rng = derived_stream("complexity-interpolation", &[INTERNAL_SEED, tag]);
    let mut x = Matrix::zeros(0, p.x.cols());
    let mut y = Vec::new();
    for c in 0..2 {
        let rows = p.class_rows(c);
        for _ in 0..rows.len() {
            let a = p.x.row(rows[rng.random_range(0..rows.len())]);
            let b = p.x.row(rows[rng.random_range(0..rows.len())]);
            let u: f64 = rng.random();
            let r: Vec<f64> = a.iter().zip(b).map(|(s, t)| s + u * (t - s)).collect();
            x.push_row(&r);
            y.push(c);
        }
    }
    Pair { x, y }
}

fn linear_measures(p: &Pair, test: &Pair) -> [f64; 3] {
    let t: Vec<f64> = p.y.iter().map(|&c| c as f64).collect();
    let (w, b) = fit_logistic(&p.x, &t);
    let norm = dot(&w, &w).sqrt();
    let predict = |r: &[f64]| usize::from(dot(&w, r) + b > 0.0);
    let mut dist_sum = 0.0;
    let mut errors = 0;
    for i in 0..p.n() {
        if predict(p.x.row(i)) != p.y[i] {
            errors += 1;
            if norm > 0.0 {
                dist_sum += (dot(&w, p.x.row(i)) + b).abs() / norm;
            }
        }
    }
    let test_errors = (0..test.n()).filter(|&i| predict(test.x.row(i)) != test.y[i]).count();
    [
        dist_sum / p.n() as f64,
        errors as f64 / p.n() as f64,
        test_errors as f64 / test.n().max(1) as f64,
    ]
}

/// Fraction of points incident to an MST edge joining different classes.
fn n1(p: &Pair) -> f64 {
    let n = p.n();
    if n < 2 {
        return 0.0;
    }
    let mut in_tree = vec![false; n];
    let mut best = vec![f64::INFINITY; n];
    let mut parent = vec![usize::MAX; n];
    let mut boundary = vec![false; n];
    best[0] = 0.0;
    for _ in 0..n {
        let u = (0..n)
            .filter(|&i| !in_tree[i])
            .min_by(|&a, &b| best[a].total_cmp(&best[b]).then(a.cmp(&b)))
            .expect("vertex left");
        in_tree[u] = true;
        if parent[u] != usize::MAX && p.y[parent[u]] != p.y[u] {
            boundary[u] = true;
            boundary[parent[u]] = true;
        }
        for v in 0..n {
            if !in_tree[v] {
                let d = dist(p.x.row(u), p.x.row(v));
                if d < best[v] {
                    best[v] = d;
                    parent[v] = u;
                }
            }
        }
    }
    boundary.iter().filter(|&&b| b).count() as f64 / n as f64
}

/// (nearest same-class distance, nearest other-class distance, index of nearest neighbour).
fn neighbours(x: &Matrix, y: &[usize], i: usize) -> (f64, f64, usize) {
    let (mut same, mut other, mut nn, mut nn_d) = (f64::INFINITY, f64::INFINITY, usize::MAX, f64::INFINITY);
    for j in 0..x.rows() {
        if j == i {
            continue;
        }
        let d = dist(x.row(i), x.row(j));
        if y[j] == y[i] {
            same = same.min(d);
        } else {
            other = other.min(d);
        }
        if d < nn_d {
            nn_d = d;
            nn = j;
        }
    }
    (same, other, nn)
}

fn neighbour_measures(p: &Pair, test: &Pair) -> [f64; 3] {
    let n = p.n();
    let (mut intra, mut inter, mut errors) = (0.0, 0.0, 0);
    for i in 0..n {
        let (s, o, nn) = neighbours(&p.x, &p.y, i);
        if s.is_finite() {
            intra += s;
        }
        if o.is_finite() {
            inter += o;
        }
        if nn != usize::MAX && p.y[nn] != p.y[i] {
            errors += 1;
        }
    }
    let mut test_errors = 0;
    for i in 0..test.n() {
        let q = test.x.row(i);
        let nn = (0..n)
            .min_by(|&a, &b| squared_distance(q, p.x.row(a)).total_cmp(&squared_distance(q, p.x.row(b))).then(a.cmp(&b)))
            .expect("nonempty");
        if p.y[nn] != test.y[i] {
            test_errors += 1;
        }
    }
    [
        capped_ratio(intra, inter),
        errors as f64 / n as f64,
        test_errors as f64 / test.n().max(1) as f64,
    ]
}

fn t1(x: &Matrix, y: &[usize]) -> f64 {
    let n = x.rows();
    let radius: Vec<f64> = (0..n).map(|i| neighbours(x, y, i).1).collect();
    let radius: Vec<f64> = radius.iter().map(|r| if r.is_finite() { *r } else { RATIO_CAP }).collect();
    let kept = (0..n)
        .filter(|&i| {
            !(0..n).any(|j| {
                if j == i || y[j] != y[i] {
                    return false;
                }
                let d = dist(x.row(i), x.row(j));
                let inside = d + radius[i] <= radius[j] + 1e-12;
                let same = d <= 1e-12 && (radius[i] - radius[j]).abs() <= 1e-12;
                // identical spheres: keep the lowest index
                inside && (!same || j < i)
            })
        })
        .count();
    kept as f64 / n as f64
}

pub fn extract_data_complexity(d: &Dataset) -> Vec<f64> {
    let present: Vec<usize> = (0..d.n_classes).filter(|&c| d.y.contains(&c)).collect();
    let mut rows: Vec<[f64; 12]> = Vec::new();
    for (ai, &a) in present.iter().enumerate() {
        for &b in &present[ai + 1..] {
            let idx: Vec<usize> = (0..d.n_instances()).filter(|&i| d.y[i] == a || d.y[i] == b).collect();
            let pair = Pair {
                x: d.x.select_rows(&idx),
                y: idx.iter().map(|&i| usize::from(d.y[i] == b)).collect(),
            };
            let test = interpolate(&pair, (a * d.n_classes + b) as u64);
            let [l1, l2, l3] = linear_measures(&pair, &test);
            let [n2, n3, n4] = neighbour_measures(&pair, &test);
            rows.push([f1(&pair), f1v(&pair), f2(&pair), f3(&pair), f4(&pair), l1, l2, l3, n1(&pair), n2, n3, n4]);
        }
    }
    let mut out: Vec<f64> = (0..12).map(|k| mean(&rows.iter().map(|r| r[k]).collect::<Vec<_>>())).collect();
    out.push(t1(&d.x, &d.y));
    out.push(d.n_instances() as f64 / d.n_features().max(1) as f64);
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::stream;

    fn blobs(n: usize, gap: f64, seed: u64) -> Dataset {
        let mut rng = stream(seed);
        let y: Vec<usize> = (0..n).map(|i| i % 2).collect();
        let rows: Vec<Vec<f64>> = y
            .iter()
            .map(|&c| vec![c as f64 * gap + rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)])
            .collect();
        Dataset::from_matrix("blobs", Matrix::from_rows(&rows), y)
    }

    #[test]
    fn points_per_dimension() {
        let x = Matrix::from_vec(200, 10, (0..2000).map(|v| ((v * 37) % 101) as f64).collect());
        let d = Dataset::from_matrix("d", x, (0..200).map(|i| i % 2).collect());
        assert_eq!(extract_data_complexity(&d)[13], 20.0);
    }

    #[test]
    fn separable_data_has_zero_linear_error() {
        let v = extract_data_complexity(&blobs(100, 4.0, 2));
        assert_eq!(v[6], 0.0);
        assert_eq!(v[5], 0.0);
        assert_eq!(v[3], 1.0);
        assert_eq!(v[4], 1.0);
        assert_eq!(v[2], 0.0);
    }

    #[test]
    fn n3_matches_brute_force() {
        let d = blobs(80, 0.7, 4);
        let v = extract_data_complexity(&d);
        let n = d.n_instances();
        let mut wrong = 0;
        for i in 0..n {
            let mut best = (f64::INFINITY, 0);
            for j in 0..n {
                if i != j {
                    let dd: f64 = d.x.row(i).iter().zip(d.x.row(j)).map(|(a, b)| (a - b) * (a - b)).sum();
                    if dd < best.0 {
                        best = (dd, j);
                    }
                }
            }
            wrong += usize::from(d.y[best.1] != d.y[i]);
        }
        assert_eq!(v[10], wrong as f64 / n as f64);
    }

    #[test]
    fn fisher_ratio_by_hand() {
        let x = Matrix::from_rows(&[vec![0.0], vec![2.0], vec![4.0], vec![6.0]]);
        let d = Dataset::from_matrix("d", x, vec![0, 0, 1, 1]);
        // means 1 and 5, population variances 1 and 1
        let v = extract_data_complexity(&d);
        assert_eq!(v[0], 8.0);
        assert!((v[1] - 8.0).abs() < 1e-9);
    }

    #[test]
    fn separated_spheres() {
        let x = Matrix::from_rows(&[vec![0.0], vec![0.1], vec![10.0], vec![10.1]]);
        let d = Dataset::from_matrix("d", x, vec![0, 0, 1, 1]);
        // radius of 0.0 is 10.0, which swallows the sphere around 0.1
        assert_eq!(extract_data_complexity(&d)[12], 0.5);
    }
}
