use rand::Rng;

use crate::data::class_counts;
use crate::error::{Error, Result};
use crate::matrix::{squared_distance, Matrix};
use crate::rng::stream;

#[derive(Debug, Clone, PartialEq)]
pub struct SmoteResult {
    pub x: Matrix,
    pub y: Vec<usize>,
    /// For each synthetic row (appended after the originals): the minority
    /// point it grew from and the neighbour it moved towards, as input row
    /// indices.
    pub parents: Vec<(usize, usize)>,
    pub minority: usize,
}

/// Oversamples the smallest class (lowest index on ties) until it holds
/// `rate` times its original count. Each minority point contributes
/// `rate - 1` synthetic points on segments towards one of its `k` nearest
/// minority neighbours.
pub fn smote(x: &Matrix, y: &[usize], n_classes: usize, rate: usize, k: usize, seed: u64) -> Result<SmoteResult> {
    if x.rows() != y.len() {
        return Err(Error::LengthMismatch {
            left: x.rows(),
            right: y.len(),
        });
    }
    let counts = class_counts(y, n_classes);
    let minority = (0..n_classes)
        .filter(|&c| counts[c] > 0)
        .min_by_key(|&c| (counts[c], c))
        .ok_or(Error::SingleClass)?;
    let members: Vec<usize> = (0..y.len()).filter(|&i| y[i] == minority).collect();
    if members.len() < 2 {
        return Err(Error::InvalidArgument(format!(
            "SMOTE needs at least 2 minority examples, class {minority} has {}",
            members.len()
        )));
    }
    let k = k.clamp(1, members.len() - 1);
    let mut rng = stream(seed);
    let mut out = x.clone();
    let mut out_y = y.to_vec();
    let mut parents = Vec::new();
    for &i in &members {
        let mut nn: Vec<(f64, usize)> = members
            .iter()
            .filter(|&&j| j != i)
            .map(|&j| (squared_distance(x.row(i), x.row(j)), j))
            .collect();
        nn.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)));
        nn.truncate(k);
        for _ in 1..rate.max(1) {
            let j = nn[rng.random_range(0..nn.len())].1;
            let u: f64 = rng.random();
            let row: Vec<f64> = x.row(i).iter().zip(x.row(j)).map(|(a, b)| a + u * (b - a)).collect();
            out.push_row(&row);
            out_y.push(minority);
            parents.push((i, j));
        }
    }
    Ok(SmoteResult {
        x: out,
        y: out_y,
        parents,
        minority,
    })
}
