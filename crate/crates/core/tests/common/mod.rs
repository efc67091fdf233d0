//! Planted-design corpus shared by the integration suites. Even-numbered
//! datasets are linear with 15 to 35% label noise, odd ones need a local
//! RBF fit (checkerboards, rings, three-way XOR).

#![allow(dead_code)]

use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use rand::Rng;
use rand_distr::{Distribution, StandardNormal};

use metatune::rng::derived_stream;

pub const INSTANCES: usize = 100;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Shape {
    Linear,
    Checkerboard,
    Rings,
    Xor3,
}

pub fn shape_of(k: usize) -> Shape {
    if k % 2 == 0 {
        Shape::Linear
    } else {
        [Shape::Checkerboard, Shape::Rings, Shape::Xor3][(k / 2) % 3]
    }
}

/// Rows and boolean labels of dataset `k`.
pub fn generate(k: usize, n: usize) -> (Vec<Vec<f64>>, Vec<bool>) {
    let mut rng = derived_stream("planted-corpus", &[k as u64]);
    let mut rows = Vec::with_capacity(n);
    let mut labels = Vec::with_capacity(n);
    for i in 0..n {
        let (row, label) = match shape_of(k) {
            Shape::Linear => {
                let p = 2 + (k / 2) % 3;
                let flip_rate = [0.15, 0.2, 0.25, 0.3, 0.35][(k / 2) % 5];
                let x: Vec<f64> = (0..p).map(|_| StandardNormal.sample(&mut rng)).collect();
                let s: f64 = x.iter().enumerate().map(|(j, v)| v * (1.0 + j as f64 * 0.5)).sum();
                let noise: f64 = StandardNormal.sample(&mut rng);
                let flip = rng.random::<f64>() < flip_rate;
                (x, (s + 0.3 * noise > 0.0) != flip)
            }
            Shape::Checkerboard => {
                let x: Vec<f64> = vec![rng.random_range(0.0..4.0), rng.random_range(0.0..4.0)];
                let cell = x[0].floor() as i64 + x[1].floor() as i64;
                (x, cell % 2 == 0)
            }
            Shape::Rings => {
                // alternating balance keeps both classes near half
                let band = i % 4;
                let r = band as f64 + rng.random_range(0.1..0.9);
                let t = rng.random_range(0.0..std::f64::consts::TAU);
                (vec![r * t.cos(), r * t.sin()], band % 2 == 0)
            }
            Shape::Xor3 => {
                let x: Vec<f64> = (0..3).map(|_| rng.random_range(-1.0..1.0)).collect();
                (x.clone(), x[0] * x[1] * x[2] > 0.0)
            }
        };
        rows.push(row);
        labels.push(label);
    }
    (rows, labels)
}

pub fn dataset_name(k: usize) -> String {
    format!("planted{k:02}")
}

/// Writes `count` planted datasets as CSV files with a `class` column.
pub fn write_corpus(dir: &Path, count: usize) {
    fs::create_dir_all(dir).unwrap();
    for k in 0..count {
        let (rows, labels) = generate(k, INSTANCES);
        let p = rows[0].len();
        let mut text = String::new();
        for j in 0..p {
            let _ = write!(text, "x{j},");
        }
        text.push_str("class\n");
        for (r, l) in rows.iter().zip(&labels) {
            for v in r {
                let _ = write!(text, "{v},");
            }
            text.push_str(if *l { "pos\n" } else { "neg\n" });
        }
        fs::write(dir.join(format!("{}.csv", dataset_name(k))), text).unwrap();
    }
}

/// Config text for a planted run writing into `out`.
pub fn config_text(data: &Path, out: &Path, budget: usize, seeds: &[u64], extra_meta: &str) -> String {
    let seeds: Vec<String> = seeds.iter().map(|s| s.to_string()).collect();
    format!(
        "[data]\ndir = {:?}\n\n[tuning]\nbudget = {budget}\nouter_k = 10\ninner_k = 3\nseeds = [{}]\n\n\
         [labeling]\nalphas = [0.05]\n\n[meta]\nalpha = 0.05\n{extra_meta}\n\n[output]\ndir = {:?}\n",
        data.display().to_string(),
        seeds.join(", "),
        out.display().to_string()
    )
}
