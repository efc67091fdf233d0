//! Acceptance checks, one PASS/FAIL line per criterion.

mod common;

use std::collections::{BTreeMap, BTreeSet};
use std::fs;
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::Path;
use std::time::Instant;

use nalgebra::{DMatrix, DVector};
use num_rational::Ratio;
use num_traits::ToPrimitive;
use rand::Rng;

use metatune::config::RunConfig;
use metatune::data::Dataset;
use metatune::eval::{auc, bac, stratified_kfold};
use metatune::labeling::friedman::critical_difference;
use metatune::labeling::wilcoxon::{wilcoxon_signed_rank, Alternative};
use metatune::labeling::MetaClass;
use metatune::learners::svm::{duality_gap, rbf, solve_binary, SmoConfig};
use metatune::learners::{LearnerKind, LearnerSpec};
use metatune::matrix::Matrix;
use metatune::metafeatures::extract_all;

use metatune::metalevel::{rf_importance, run_meta_cv, MetaCvConfig, MetaDataset, MetaExample, Setup};
use metatune::pipeline::Pipeline;
use metatune::rng::stream;
use metatune::tuning::{run_unit, DefaultSetting, TuningConfig};

type Outcome = Result<String, String>;

fn check(ok: bool, detail: String) -> Outcome {
    if ok {
        Ok(detail)
    } else {
        Err(detail)
    }
}

// ---------- 1: metric oracles

fn bac_oracle(truth: &[usize], pred: &[usize], k: usize) -> Ratio<i64> {
    let mut cm = vec![vec![0i64; k]; k];
    for (&t, &p) in truth.iter().zip(pred) {
        cm[t][p] += 1;
    }
    let present: Vec<usize> = (0..k).filter(|&c| cm[c].iter().sum::<i64>() > 0).collect();
    let sum = present
        .iter()
        .map(|&c| Ratio::new(cm[c][c], cm[c].iter().sum()))
        .fold(Ratio::from_integer(0), |a, b| a + b);
    sum / Ratio::from_integer(present.len() as i64)
}

fn auc_oracle(truth: &[bool], scores: &[f64]) -> Ratio<i64> {
    let (mut twice, mut pairs) = (0i64, 0i64);
    for i in 0..truth.len() {
        for j in 0..truth.len() {
            if truth[i] && !truth[j] {
                pairs += 1;
                twice += if scores[i] > scores[j] {
                    2
                } else if scores[i] == scores[j] {
                    1
                } else {
                    0
                };
            }
        }
    }
    Ratio::new(twice, 2 * pairs)
}

fn criterion_1() -> Outcome {
    let start = Instant::now();
    let mut rng = stream(101);
    let mut mismatches = 0;
    for _ in 0..1000 {
        let n = rng.random_range(2..=100);
        let k = rng.random_range(2..=5);
        let truth: Vec<usize> = (0..n).map(|_| rng.random_range(0..k)).collect();
        let pred: Vec<usize> = (0..n).map(|_| rng.random_range(0..k)).collect();
        if bac(&truth, &pred).unwrap() != bac_oracle(&truth, &pred, k).to_f64().unwrap() {
            mismatches += 1;
        }
        let mut lab: Vec<bool> = (0..n).map(|_| rng.random_bool(0.5)).collect();
        lab[0] = true;
        lab[1] = false;
        // coarse grid so that ties are common
        let scores: Vec<f64> = (0..n).map(|_| rng.random_range(0..12) as f64 / 11.0).collect();
        if auc(&lab, &scores).unwrap() != auc_oracle(&lab, &scores).to_f64().unwrap() {
            mismatches += 1;
        }
    }
    let secs = start.elapsed().as_secs_f64();
    check(mismatches == 0 && secs < 10.0, format!("{mismatches} mismatches over 1000 instances, {secs:.2}s (limit 10s)"))
}

// ---------- 2: Wilcoxon exactness

/// Upper-tail p over all sign flips; works on integer differences so
/// ranks and ties are exact.
fn wilcoxon_enumerate(diffs: &[i64]) -> f64 {
    let d: Vec<i64> = diffs.iter().copied().filter(|&v| v != 0).collect();
    let n = d.len();
    // doubled average ranks of |d|
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by_key(|&i| d[i].abs());
    let mut rank2 = vec![0i64; n];
    let mut g = 0;
    while g < n {
        let mut h = g;
        while h < n && d[order[h]].abs() == d[order[g]].abs() {
            h += 1;
        }
        for &i in &order[g..h] {
            rank2[i] = (g + 1 + h) as i64;
        }
        g = h;
    }
    let w: i64 = (0..n).filter(|&i| d[i] > 0).map(|i| rank2[i]).sum();
    let mut ge = 0u64;
    for mask in 0u64..(1 << n) {
        let s: i64 = (0..n).filter(|&i| mask >> i & 1 == 1).map(|i| rank2[i]).sum();
        if s >= w {
            ge += 1;
        }
    }
    ge as f64 / (1u64 << n) as f64
}

fn criterion_2() -> Outcome {
    let mut rng = stream(202);
    let mut worst = 0.0f64;
    let mut done = 0;
    let mut sizes = BTreeSet::new();
    while done < 500 {
        let n = 3 + done % 10;
        let a: Vec<i64> = (0..n).map(|_| rng.random_range(0..20)).collect();
        let b: Vec<i64> = (0..n).map(|_| rng.random_range(0..20)).collect();
        let diffs: Vec<i64> = a.iter().zip(&b).map(|(p, q)| p - q).collect();
        if diffs.iter().filter(|&&v| v != 0).count() < 3 {
            continue;
        }
        let x: Vec<f64> = a.iter().map(|&v| v as f64 / 20.0).collect();
        let y: Vec<f64> = b.iter().map(|&v| v as f64 / 20.0).collect();
        let r = wilcoxon_signed_rank(&x, &y, Alternative::Greater).unwrap();
        if !r.exact {
            return Err(format!("n = {n} did not take the exact branch"));
        }
        worst = worst.max((r.p_value - wilcoxon_enumerate(&diffs)).abs());
        sizes.insert(r.n_nonzero);
        done += 1;
    }
    let six = wilcoxon_signed_rank(&[0.9, 0.8, 0.85, 0.7, 0.95, 0.75], &[0.5; 6], Alternative::Greater)
        .unwrap()
        .p_value;
    check(
        worst <= 1e-12 && six == 1.0 / 64.0,
        format!(
            "max |p - enumeration| = {worst:.1e} over 500 samples with n in {:?}..={:?} (tol 1e-12), n=6 all positive p = {six}",
            sizes.first().unwrap(),
            sizes.last().unwrap()
        ),
    )
}

// ---------- 3: SMO against a dual QP oracle

struct QpSolution {
    alpha: Vec<f64>,
    /// Offset added to the kernel expansion.
    b: f64,
}

/// Projection onto the box [0, c] intersected with y'a = 0, by bisection
/// on the multiplier of the equality.
fn project(v: &[f64], y: &[f64], c: f64) -> Vec<f64> {
    let at = |lam: f64| -> Vec<f64> { v.iter().zip(y).map(|(vi, yi)| (vi - lam * yi).clamp(0.0, c)).collect() };
    let g = |a: &[f64]| -> f64 { a.iter().zip(y).map(|(ai, yi)| ai * yi).sum() };
    let bound = v.iter().fold(0.0f64, |m, x| m.max(x.abs())) + c + 1.0;
    let (mut lo, mut hi) = (-bound, bound);
    for _ in 0..64 {
        let mid = 0.5 * (lo + hi);
        if g(&at(mid)) > 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    at(0.5 * (lo + hi))
}

/// Accelerated projected gradient on the dual, then an exact solve of the
/// KKT system on the free set it identifies.
fn qp_oracle(k: &[Vec<f64>], y: &[f64], c: f64) -> QpSolution {
    let n = y.len();
    let q: Vec<Vec<f64>> = (0..n).map(|i| (0..n).map(|j| y[i] * y[j] * k[i][j]).collect()).collect();
    let lip = q.iter().map(|r| r.iter().map(|v| v.abs()).sum::<f64>()).fold(0.0, f64::max);
    let grad = |a: &[f64]| -> Vec<f64> { (0..n).map(|i| q[i].iter().zip(a).map(|(p, r)| p * r).sum::<f64>() - 1.0).collect() };
    let mut a = vec![0.0; n];
    let mut z = a.clone();
    let mut t = 1.0f64;
    for _ in 0..200_000 {
        let g = grad(&z);
        let v: Vec<f64> = z.iter().zip(&g).map(|(zi, gi)| zi - gi / lip).collect();
        let next = project(&v, y, c);
        let t_next = 0.5 * (1.0 + (1.0 + 4.0 * t * t).sqrt());
        let step = next.iter().zip(&a).map(|(p, r)| (p - r).abs()).fold(0.0, f64::max);
        z = next.iter().zip(&a).map(|(p, r)| p + (t - 1.0) / t_next * (p - r)).collect();
        a = next;
        t = t_next;
        if step < 1e-13 {
            break;
        }
    }
    let eps = 1e-7 * c;
    let free: Vec<usize> = (0..n).filter(|&i| a[i] > eps && a[i] < c - eps).collect();
    let fixed: Vec<usize> = (0..n).filter(|i| !free.contains(i)).collect();
    for &i in &fixed {
        a[i] = if a[i] >= c - eps { c } else { 0.0 };
    }
    if free.is_empty() {
        // offset is any point of the interval allowed by the bound multipliers
        let g = grad(&a);
        let (mut lo, mut hi) = (f64::NEG_INFINITY, f64::INFINITY);
        for i in 0..n {
            // a_i = 0 needs g_i + b y_i >= 0, a_i = c needs g_i + b y_i <= 0
            let at_zero = a[i] == 0.0;
            if (y[i] > 0.0) == at_zero {
                lo = lo.max(-g[i] * y[i]);
            } else {
                hi = hi.min(-g[i] * y[i]);
            }
        }
        return QpSolution { alpha: a, b: 0.5 * (lo + hi) };
    }
    let m = free.len();
    let mut lhs = DMatrix::<f64>::zeros(m + 1, m + 1);
    let mut rhs = DVector::<f64>::zeros(m + 1);
    for (r, &i) in free.iter().enumerate() {
        for (s, &j) in free.iter().enumerate() {
            lhs[(r, s)] = q[i][j];
        }
        lhs[(r, m)] = y[i];
        lhs[(m, r)] = y[i];
        rhs[r] = 1.0 - fixed.iter().map(|&j| q[i][j] * a[j]).sum::<f64>();
    }
    rhs[m] = -fixed.iter().map(|&j| y[j] * a[j]).sum::<f64>();
    let sol = lhs.lu().solve(&rhs).expect("KKT system is regular");
    for (r, &i) in free.iter().enumerate() {
        a[i] = sol[r];
    }
    QpSolution { alpha: a, b: sol[m] }
}

fn criterion_3() -> Outcome {
    let mut smo_secs = 0.0;
    let mut rng = stream(303);
    let cfg = SmoConfig {
        tolerance: 1e-8,
        record_trace: true,
        ..SmoConfig::default()
    };
    let (mut worst_dec, mut worst_gap, mut drops) = (0.0f64, 0.0f64, 0usize);
    for _ in 0..50 {
        let n = rng.random_range(8..=40);
        let p = rng.random_range(2..=4);
        let rows: Vec<Vec<f64>> = (0..n).map(|_| (0..p).map(|_| rng.random_range(-1.0..1.0)).collect()).collect();
        let mut y: Vec<f64> = rows
            .iter()
            .map(|r| if r[0] + 0.5 * r[1] + rng.random_range(-0.4..0.4) > 0.0 { 1.0 } else { -1.0 })
            .collect();
        y[0] = 1.0;
        y[1] = -1.0;
        let c = 10f64.powf(rng.random_range(-0.3..1.3));
        let gamma = rng.random_range(0.3..3.0);
        let x = Matrix::from_rows(&rows);
        let start = Instant::now();
        let sol = solve_binary(&x, &y, c, gamma, &cfg).unwrap();
        smo_secs += start.elapsed().as_secs_f64();
        let k: Vec<Vec<f64>> = rows.iter().map(|a| rows.iter().map(|b| rbf(a, b, gamma)).collect()).collect();
        let oracle = qp_oracle(&k, &y, c);
        let probes: Vec<Vec<f64>> = rows
            .iter()
            .cloned()
            .chain((0..20).map(|_| (0..p).map(|_| rng.random_range(-1.5..1.5)).collect()))
            .collect();
        for q in &probes {
            let expand = |alpha: &[f64]| -> f64 { (0..n).map(|i| alpha[i] * y[i] * rbf(&rows[i], q, gamma)).sum() };
            let smo = expand(&sol.alpha) - sol.rho;
            let ora = expand(&oracle.alpha) + oracle.b;
            worst_dec = worst_dec.max((smo - ora).abs());
        }
        worst_gap = worst_gap.max(duality_gap(&x, &y, c, gamma, &sol).abs());
        drops += sol
            .trace
            .windows(2)
            .filter(|w| w[1] < w[0] - 1e-12 * w[0].abs().max(1.0))
            .count();
    }
    check(
        worst_dec <= 1e-4 && worst_gap < 1e-3 && drops == 0 && smo_secs < 60.0,
        format!(
            "max decision diff {worst_dec:.1e} (tol 1e-4), max gap {worst_gap:.1e} (tol 1e-3), {drops} dual decreases, SMO {smo_secs:.2}s (limit 60s)"
        ),
    )
}

// ---------- 4: Nemenyi constant

fn criterion_4() -> Outcome {
    let cd = critical_difference(7, 9, 0.05).unwrap();
    check((cd - 3.002).abs() <= 0.01, format!("CD(k=7, N=9, alpha=0.05) = {cd:.4}, target 3.002 +- 0.01"))
}

// ---------- 5: schema and extraction time

fn criterion_5() -> Outcome {
    let mut rng = stream(505);
    let rows: Vec<Vec<f64>> = (0..1000).map(|_| (0..20).map(|_| rng.random_range(-1.0..1.0)).collect()).collect();
    let y: Vec<usize> = rows.iter().map(|r| usize::from(r[0] + r[1] > 0.0)).collect();
    let d = Dataset::from_matrix("wide", Matrix::from_rows(&rows), y);
    let small = Dataset::from_matrix("small", Matrix::from_rows(&rows[..60]), d.y[..60].to_vec());
    let without = extract_all(&small, false).unwrap();
    let start = Instant::now();
    let with = extract_all(&d, true).unwrap();
    let secs = start.elapsed().as_secs_f64();
    let mut counts: BTreeMap<&str, usize> = BTreeMap::new();
    for n in &with.names {
        *counts.entry(n.split('.').next().unwrap()).or_default() += 1;
    }
    let got: Vec<usize> = ["SM", "ST", "IN", "MB", "LM", "DC", "CN", "RL"]
        .iter()
        .map(|p| counts.get(p).copied().unwrap_or(0))
        .collect();
    let want = vec![17, 7, 8, 17, 8, 14, 9, 10];
    check(
        without.len() == 80 && with.len() == 90 && got == want && secs < 60.0,
        format!(
            "{} names without RL, {} with RL, category counts {got:?} (want {want:?}), 1000x20 extraction {secs:.1}s (limit 60s)",
            without.len(),
            with.len()
        ),
    )
}

// ---------- 6: leak-freedom

fn planted_meta(n: usize, seed: u64, signal: bool) -> MetaDataset {
    let mut rng = stream(seed);
    let examples = (0..n)
        .map(|i| {
            let tuning = i % 3 == 0;
            let shift = if signal && tuning { 1.5 } else { 0.0 };
            MetaExample {
                dataset: format!("d{i:03}"),
                values: (0..6).map(|j| rng.random_range(-1.0..1.0) + if j == 0 { shift } else { 0.0 }).collect(),
                label: if tuning { MetaClass::Tuning } else { MetaClass::Defaults },
            }
        })
        .collect();
    MetaDataset::new(0.05, (0..6).map(|j| format!("f{j}")).collect(), examples).unwrap()
}

fn criterion_6() -> Outcome {
    let mut violations = Vec::new();

    // nested CV on one planted dataset
    let (rows, labels) = common::generate(1, 80);
    let d = Dataset::from_matrix("leak", Matrix::from_rows(&rows), labels.iter().map(|&l| usize::from(l)).collect());
    let cfg = TuningConfig {
        budget: 2,
        outer_k: 5,
        inner_k: 3,
        seeds: vec![1, 2],
        ..TuningConfig::default()
    };
    let defaults = vec![DefaultSetting::reference(LearnerKind::SvmRbf, "ref")];
    let mut nested = 0;
    for &seed in &cfg.seeds {
        let outer = stratified_kfold(&d.y, cfg.outer_k, seed).unwrap();
        let mut tested = BTreeSet::new();
        for f in 0..cfg.outer_k {
            let (_, t) = run_unit(&d, &defaults, &cfg, seed, f, &outer, None).unwrap();
            nested += 1;
            let test: BTreeSet<usize> = t.outer_test.iter().copied().collect();
            let train: BTreeSet<usize> = t.outer_train.iter().copied().collect();
            if !test.is_disjoint(&train) {
                violations.push(format!("seed {seed} fold {f}: outer train and test overlap"));
            }
            let mut inner_tests = BTreeSet::new();
            for (itr, ite) in &t.inner {
                if itr.iter().chain(ite).any(|i| test.contains(i)) {
                    violations.push(format!("seed {seed} fold {f}: outer test row in an inner fold"));
                }
                if itr.iter().any(|i| ite.contains(i)) {
                    violations.push(format!("seed {seed} fold {f}: inner train and test overlap"));
                }
                inner_tests.extend(ite.iter().copied());
            }
            if inner_tests != train {
                violations.push(format!("seed {seed} fold {f}: inner tests do not cover the outer training split"));
            }
            tested.extend(test);
        }
        if tested.len() != d.n_instances() {
            violations.push(format!("seed {seed}: outer tests do not cover the dataset"));
        }
    }

    // meta-level CV with SMOTE, selection and tuning inside the folds
    let md = planted_meta(45, 606, true);
    let mcfg = MetaCvConfig {
        repetitions: 2,
        outer_k: 5,
        inner_k: 2,
        tuning_budget: 2,
        ..MetaCvConfig::default()
    };
    let mut meta = 0;
    for setup in [Setup::Smote, Setup::SmoteFeatSel, Setup::SmoteTuned, Setup::FeatSel] {
        let r = run_meta_cv(&md, &LearnerSpec::new(LearnerKind::Cart), setup, &mcfg).unwrap();
        let mut seen: BTreeMap<usize, Vec<usize>> = BTreeMap::new();
        for t in &r.traces {
            meta += 1;
            let train: BTreeSet<usize> = t.train.iter().copied().collect();
            let tag = format!("{setup} rep {} fold {}", t.repetition, t.fold);
            if t.test.iter().any(|i| train.contains(i)) {
                violations.push(format!("{tag}: test row in training split"));
            }
            if t.setup_rows.iter().any(|i| !train.contains(i)) {
                violations.push(format!("{tag}: setup used a held-out row"));
            }
            if t.smote_parents.iter().any(|(a, b)| !train.contains(a) || !train.contains(b)) {
                violations.push(format!("{tag}: synthetic row interpolates a held-out row"));
            }
            if setup.smote() && t.smote_parents.is_empty() {
                violations.push(format!("{tag}: no synthetic rows recorded"));
            }
            if setup.featsel() && t.selected.is_empty() {
                violations.push(format!("{tag}: empty feature selection"));
            }
            seen.entry(t.repetition).or_default().extend(t.test.iter().copied());
        }
        for (rep, mut tests) in seen {
            tests.sort();
            if tests != (0..md.len()).collect::<Vec<_>>() {
                violations.push(format!("{setup} rep {rep}: test folds do not partition the examples"));
            }
        }
    }
    check(
        violations.is_empty(),
        format!(
            "{} violations over {nested} nested units and {meta} meta folds{}",
            violations.len(),
            violations.first().map(|v| format!(" (first: {v})")).unwrap_or_default()
        ),
    )
}

// ---------- 7: constant and random anchors

fn criterion_7() -> Outcome {
    let md = planted_meta(240, 707, false);
    let cfg = MetaCvConfig {
        repetitions: 30,
        ..MetaCvConfig::default()
    };
    let c = run_meta_cv(&md, &LearnerSpec::new(LearnerKind::Constant), Setup::None, &cfg).unwrap().mean_auc();
    let r = run_meta_cv(&md, &LearnerSpec::new(LearnerKind::Random), Setup::None, &cfg).unwrap().mean_auc();
    check(
        (c - 0.5).abs() <= 0.02 && (r - 0.5).abs() <= 0.02,
        format!("constant AUC {c:.4}, random AUC {r:.4} over 30 repetitions (target 0.5 +- 0.02)"),
    )
}

// ---------- 8-11: planted corpus end to end

const CORPUS: usize = 32;

struct Run {
    pipeline: Pipeline,
    secs: f64,
}

fn full_run(root: &Path, out: &str) -> Result<Run, String> {
    let meta = "learners = [\"random_forest\"]\nsetups = [\"none\"]\nrepetitions = 30\nrelative_landmarking = true";
    let text = common::config_text(&root.join("data"), &root.join(out), 50, &[1, 2, 3], meta);
    let path = root.join(format!("{out}.toml"));
    fs::write(&path, text).unwrap();
    let cfg = RunConfig::load(&path).map_err(|e| e.to_string())?;
    let pipeline = Pipeline::new(cfg);
    let start = Instant::now();
    pipeline.run_all().map_err(|e| e.to_string())?;
    Ok(Run {
        pipeline,
        secs: start.elapsed().as_secs_f64(),
    })
}

fn csv_rows(path: &Path) -> Vec<Vec<String>> {
    fs::read_to_string(path)
        .unwrap()
        .lines()
        .filter(|l| !l.starts_with('#') && !l.trim().is_empty())
        .skip(1)
        .map(|l| l.split(',').map(str::to_string).collect())
        .collect()
}

fn criterion_8(run: &Run) -> Outcome {
    let md = run.pipeline.meta_dataset().unwrap();
    let counts = md.class_counts();
    let row = csv_rows(&run.pipeline.paths.meta_eval_summary())
        .into_iter()
        .find(|r| r[0] == "random_forest" && r[1] == "none")
        .ok_or("no random_forest/none row")?;
    let mean: f64 = row[2].parse().map_err(|_| format!("AUC is {}", row[2]))?;
    check(
        md.len() >= 30 && mean >= 0.75 && run.secs < 1800.0,
        format!(
            "{} datasets ({} Tuning / {} Defaults), RF/none AUC {mean:.4} +- {} over 30 repetitions (floor 0.75), run {:.0}s (limit 1800s)",
            md.len(),
            counts[MetaClass::Tuning.index()],
            counts[MetaClass::Defaults.index()],
            row[3],
            run.secs
        ),
    )
}

fn criterion_9(run: &Run) -> Outcome {
    let md = run.pipeline.meta_dataset().unwrap();
    let targets = ["RL.diff.svm.lm", "RL.diff.nn.lm"];
    let hits = (0..30u64)
        .filter(|&r| {
            let rep = rf_importance(&md, 1, 9000 + r, 500).unwrap();
            rep.ranking.iter().take(5).any(|f| targets.contains(&f.name.as_str()))
        })
        .count();
    check(hits * 10 >= 30 * 8, format!("RL.diff.svm.lm or RL.diff.nn.lm in the top 5 in {hits}/30 runs (need 80%)"))
}

fn criterion_10(run: &Run) -> Outcome {
    let rows = csv_rows(&run.pipeline.paths.projection_summary());
    let get = |name: &str| -> Result<(f64, f64), String> {
        let r = rows.iter().find(|r| r[0] == name).ok_or(format!("no `{name}` strategy"))?;
        Ok((r[1].parse().unwrap(), r[2].parse().unwrap()))
    };
    let oracle = get("oracle")?;
    let tuning = get("tuning")?;
    let defaults = get("defaults")?;
    let meta = get("meta:random_forest/none")?;
    let beaten: Vec<&str> = rows
        .iter()
        .filter(|r| r[0] != "oracle" && r[1].parse::<f64>().unwrap() > oracle.0)
        .map(|r| r[0].as_str())
        .collect();
    check(
        beaten.is_empty() && meta.1 <= 0.7 * tuning.1 && meta.0 >= defaults.0,
        format!(
            "oracle BAC {:.4} beaten by {beaten:?}; meta runtime {:.3}s vs 0.7 x tuning {:.3}s; meta BAC {:.4} vs defaults {:.4}",
            oracle.0,
            meta.1,
            0.7 * tuning.1,
            meta.0,
            defaults.0
        ),
    )
}

fn criterion_11(first: &Run, second: &Run) -> Outcome {
    let mut differ = Vec::new();
    for (a, b, name) in [
        (first.pipeline.paths.metadataset(), second.pipeline.paths.metadataset(), "metadataset.csv"),
        (first.pipeline.paths.labels(), second.pipeline.paths.labels(), "labels.csv"),
    ] {
        if fs::read(a).unwrap() != fs::read(b).unwrap() {
            differ.push(name);
        }
    }
    check(differ.is_empty(), format!("differing files: {differ:?}"))
}

fn run(id: usize, f: impl FnOnce() -> Outcome) -> bool {
    let outcome = catch_unwind(AssertUnwindSafe(f)).unwrap_or_else(|e| {
        let msg = e
            .downcast_ref::<String>()
            .cloned()
            .or_else(|| e.downcast_ref::<&str>().map(|s| s.to_string()))
            .unwrap_or_default();
        Err(format!("panicked: {msg}"))
    });
    match outcome {
        Ok(detail) => {
            println!("criterion {id:>2}: PASS  {detail}");
            true
        }
        Err(detail) => {
            println!("criterion {id:>2}: FAIL  {detail}");
            false
        }
    }
}

fn main() {
    let mut ok = true;
    ok &= run(1, criterion_1);
    ok &= run(2, criterion_2);
    ok &= run(3, criterion_3);
    ok &= run(4, criterion_4);
    ok &= run(5, criterion_5);
    ok &= run(6, criterion_6);
    ok &= run(7, criterion_7);

    let tmp = tempfile::tempdir().unwrap();
    common::write_corpus(&tmp.path().join("data"), CORPUS);
    let first = full_run(tmp.path(), "run1");
    let second = first.as_ref().ok().map(|_| full_run(tmp.path(), "run2"));
    match &first {
        Ok(r) => {
            ok &= run(8, || criterion_8(r));
            ok &= run(9, || criterion_9(r));
            ok &= run(10, || criterion_10(r));
        }
        Err(e) => {
            for id in 8..=10 {
                ok &= run(id, || Err(format!("pipeline failed: {e}")));
            }
        }
    }
    match (&first, &second) {
        (Ok(a), Some(Ok(b))) => ok &= run(11, || criterion_11(a, b)),
        (_, Some(Err(e))) => ok &= run(11, || Err(format!("second run failed: {e}"))),
        _ => ok &= run(11, || Err("first run failed".into())),
    }
    if !ok {
        std::process::exit(1);
    }
}
