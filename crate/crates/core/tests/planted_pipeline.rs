mod common;

use std::fs;
use std::path::Path;

use metatune::config::RunConfig;
use metatune::data::{load_dataset, preprocess, Format};
use metatune::metafeatures::extract_all;
use metatune::pipeline::Pipeline;

fn rows(path: &Path) -> Vec<Vec<String>> {
    fs::read_to_string(path)
        .unwrap()
        .lines()
        .filter(|l| !l.starts_with('#') && !l.trim().is_empty())
        .skip(1)
        .map(|l| l.split(',').map(str::to_string).collect())
        .collect()
}

fn write_one(path: &Path, k: usize) {
    let (xs, ys) = common::generate(k, common::INSTANCES);
    let p = xs[0].len();
    let mut text: Vec<String> = (0..p).map(|j| format!("x{j}")).collect();
    text.push("class".into());
    let mut out = text.join(",") + "\n";
    for (x, y) in xs.iter().zip(&ys) {
        let cells: Vec<String> = x.iter().map(|v| v.to_string()).collect();
        out += &format!("{},{}\n", cells.join(","), if *y { "pos" } else { "neg" });
    }
    fs::write(path, out).unwrap();
}

#[test]
fn small_corpus_runs_every_stage() {
    let dir = tempfile::tempdir().unwrap();
    let data = dir.path().join("data");
    common::write_corpus(&data, 8);
    let meta = "learners = [\"random_forest\"]\nsetups = [\"none\"]\nrepetitions = 3\nrelative_landmarking = true";
    let cfg_path = dir.path().join("c.toml");
    fs::write(&cfg_path, common::config_text(&data, &dir.path().join("out"), 4, &[1], meta)).unwrap();
    let p = Pipeline::new(RunConfig::load(&cfg_path).unwrap());
    p.run_all().unwrap();

    let labels = fs::read_to_string(p.paths.labels()).unwrap();
    assert!(labels.starts_with("# metatune "));
    assert_eq!(rows(&p.paths.labels()).len(), 8);
    assert_eq!(p.meta_dataset().unwrap().len(), 8);

    let again = p.tune().unwrap();
    assert_eq!(again.messages.last().unwrap(), "0 new evaluations");

    let summary = rows(&p.paths.projection_summary());
    let bac = |name: &str| -> f64 { summary.iter().find(|r| r[0] == name).unwrap()[1].parse().unwrap() };
    for base in ["tuning", "defaults", "random"] {
        assert!(bac("oracle") >= bac(base), "oracle below {base}");
    }

    let fresh = dir.path().join("fresh.csv");
    write_one(&fresh, 41);
    let r = p.recommend(&fresh).unwrap();
    assert_eq!(r.dataset, "fresh");
    assert!((0.0..=1.0).contains(&r.score));
}

#[test]
fn checkerboard_gains_more_from_neighbours_than_a_line() {
    let dir = tempfile::tempdir().unwrap();
    let diff = |k: usize| {
        let path = dir.path().join(format!("{}.csv", common::dataset_name(k)));
        write_one(&path, k);
        let raw = load_dataset(&path, Format::Csv, "class").unwrap();
        let v = extract_all(&preprocess(&raw).unwrap(), true).unwrap();
        let at = v.names.iter().position(|n| n == "RL.diff.nn.lm").unwrap();
        v.values[at]
    };
    assert_eq!(common::shape_of(0), common::Shape::Linear);
    assert_eq!(common::shape_of(1), common::Shape::Checkerboard);
    assert!(diff(1) > diff(0) + 0.1, "{} vs {}", diff(1), diff(0));
}
