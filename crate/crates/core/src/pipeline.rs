//! File-based stages. Each stage reads what earlier stages left in the
//! output directory and writes its own artifacts, every one starting with a
//! `# metatune <version> config=<hash>` line.

use std::collections::{BTreeMap, BTreeSet};
use std::fs::{self, OpenOptions};
use std::io::Write;
use std::path::{Path, PathBuf};

use rayon::prelude::*;

use crate::config::RunConfig;
use crate::data::{check_eligibility, load_dataset, preprocess, Dataset, Format};
use crate::error::{Error, Result};
use crate::eval::{EvaluationRecord, Strategy};
use crate::labeling::{friedman_nemenyi, label_meta_example, labels_from_csv, labels_to_csv, MetaClass};
use crate::learners::{LearnerKind, LearnerSpec};
use crate::metafeatures::{extract_all, vectors_from_csv, vectors_to_csv};
use crate::metalevel::{
    assemble, recommend, rf_importance, run_meta_cv, trace_violations, train_final, MetaDataset, MetaModel,
    Recommendation, Setup,
};
use crate::projection::{curves_csv, curves_svg, defaults_comparison_curves, project};
use crate::svg;
use crate::tuning::{reference_id, run_base_level_resumable, TuningOutcome};

/// Where each stage keeps its artifacts.
#[derive(Debug, Clone)]
pub struct Paths {
    pub root: PathBuf,
}

impl Paths {
    pub fn datasets(&self) -> PathBuf {
        self.root.join("datasets")
    }
    pub fn ingest(&self) -> PathBuf {
        self.root.join("ingest.csv")
    }
    pub fn records(&self) -> PathBuf {
        self.root.join("records.jsonl")
    }
    pub fn tune_status(&self) -> PathBuf {
        self.root.join("tune_status.csv")
    }
    pub fn metafeatures(&self) -> PathBuf {
        self.root.join("metafeatures.csv")
    }
    pub fn labels(&self) -> PathBuf {
        self.root.join("labels.csv")
    }
    pub fn metadataset(&self) -> PathBuf {
        self.root.join("metadataset.csv")
    }
    pub fn meta_eval(&self) -> PathBuf {
        self.root.join("meta_eval.csv")
    }
    pub fn meta_eval_summary(&self) -> PathBuf {
        self.root.join("meta_eval_summary.csv")
    }
    pub fn meta_predictions(&self) -> PathBuf {
        self.root.join("meta_predictions.csv")
    }
    pub fn importance(&self) -> PathBuf {
        self.root.join("importance.csv")
    }
    pub fn model(&self) -> PathBuf {
        self.root.join("model.json")
    }
    pub fn projection_summary(&self) -> PathBuf {
        self.root.join("projection_summary.csv")
    }
    pub fn projection_entries(&self) -> PathBuf {
        self.root.join("projection_entries.csv")
    }
    pub fn curves(&self) -> PathBuf {
        self.root.join("curves.csv")
    }
    pub fn report(&self) -> PathBuf {
        self.root.join("report")
    }
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct StageReport {
    pub messages: Vec<String>,
    /// Some dataset was skipped or flagged incomplete.
    pub partial: bool,
}

impl StageReport {
    fn merge(&mut self, other: StageReport) {
        self.messages.extend(other.messages);
        self.partial |= other.partial;
    }
}

/// Lines of a CSV artifact without stamp, header and blank lines.
fn rows(text: &str) -> impl Iterator<Item = Vec<&str>> {
    text.lines()
        .filter(|l| !l.starts_with('#') && !l.trim().is_empty())
        .skip(1)
        .map(|l| l.split(',').collect())
}

fn parse_f64(s: &str, path: &Path) -> Result<f64> {
    s.parse().map_err(|_| Error::Parse {
        path: path.to_path_buf(),
        line: 0,
        message: format!("`{s}` is not a number"),
    })
}

pub struct Pipeline {
    pub cfg: RunConfig,
    pub paths: Paths,
}

impl Pipeline {
    pub fn new(cfg: RunConfig) -> Pipeline {
        let paths = Paths { root: cfg.out_dir() };
        Pipeline { cfg, paths }
    }

    fn stamp(&self) -> String {
        self.cfg.stamp()
    }

    fn write(&self, path: &Path, body: &str) -> Result<()> {
        if let Some(dir) = path.parent() {
            fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
        }
        let text = if body.trim_start().starts_with("<svg") {
            format!("<!-- {} -->\n{body}", self.stamp())
        } else {
            format!("# {}\n{body}", self.stamp())
        };
        fs::write(path, text).map_err(|e| Error::io(path, e))
    }

    fn read(&self, path: &Path, producer: &str) -> Result<String> {
        if !path.exists() {
            return Err(Error::MissingArtifact {
                path: path.to_path_buf(),
                producer: producer.into(),
            });
        }
        fs::read_to_string(path).map_err(|e| Error::io(path, e))
    }

    /// Loads, preprocesses and screens every CSV/ARFF file of the data
    /// directory; kept datasets are cached in canonical form.
    pub fn ingest(&self) -> Result<StageReport> {
        let dir = self.cfg.data_dir();
        let mut files: Vec<PathBuf> = fs::read_dir(&dir)
            .map_err(|e| Error::io(&dir, e))?
            .filter_map(|e| e.ok().map(|e| e.path()))
            .filter(|p| Format::from_path(p).is_ok())
            .collect();
        files.sort();
        let mut report = StageReport::default();
        let mut seen = BTreeSet::new();
        let mut table = String::from("dataset,file,instances,features,classes,eligible,notes\n");
        let out = self.paths.datasets();
        if out.exists() {
            fs::remove_dir_all(&out).map_err(|e| Error::io(&out, e))?;
        }
        fs::create_dir_all(&out).map_err(|e| Error::io(&out, e))?;
        for path in files {
            let name = path.file_stem().and_then(|s| s.to_str()).unwrap_or("dataset").to_string();
            if !seen.insert(name.clone()) {
                return Err(Error::InvalidArgument(format!("two input files are named `{name}`")));
            }
            let file = path.file_name().and_then(|s| s.to_str()).unwrap_or_default().to_string();
            let loaded = Format::from_path(&path)
                .and_then(|f| load_dataset(&path, f, &self.cfg.data.target))
                .and_then(|raw| preprocess(&raw));
            let mut d = match loaded {
                Ok(d) => d,
                Err(e) => {
                    report.messages.push(format!("{name}: skipped ({e})"));
                    table.push_str(&format!("{name},{file},0,0,0,false,{}\n", csv_safe(&e.to_string())));
                    continue;
                }
            };
            d.name = name.clone();
            let elig = check_eligibility(&d);
            let notes: Vec<String> = elig
                .violated_criteria
                .iter()
                .map(|v| format!("({}) {}", v.criterion, v.message))
                .chain(elig.notes.iter().cloned())
                .collect();
            let keep = elig.eligible || self.cfg.data.keep_ineligible;
            table.push_str(&format!(
                "{name},{file},{},{},{},{},{}\n",
                d.n_instances(),
                d.n_features(),
                d.n_classes,
                keep,
                csv_safe(&notes.join("; "))
            ));
            if keep {
                let p = out.join(format!("{name}.csv"));
                d.save(&p)?;
                let body = fs::read_to_string(&p).map_err(|e| Error::io(&p, e))?;
                self.write(&p, &body)?;
            } else {
                report.messages.push(format!("{name}: ineligible ({})", notes.join("; ")));
            }
        }
        let kept = rows(&table).filter(|r| r[5] == "true").count();
        report.messages.push(format!("{kept} datasets ingested"));
        self.write(&self.paths.ingest(), &table)?;
        Ok(report)
    }

    pub fn dataset_names(&self) -> Result<Vec<String>> {
        let text = self.read(&self.paths.ingest(), "ingest")?;
        Ok(rows(&text).filter(|r| r.get(5) == Some(&"true")).map(|r| r[0].to_string()).collect())
    }

    pub fn datasets(&self) -> Result<Vec<Dataset>> {
        self.dataset_names()?
            .iter()
            .map(|n| Dataset::load(&self.paths.datasets().join(format!("{n}.csv"))))
            .collect()
    }

    fn records_header(&self) -> String {
        format!("# {} tuning={}", self.stamp(), self.cfg.tuning_hash())
    }

    pub fn records(&self) -> Result<Vec<EvaluationRecord>> {
        let path = self.paths.records();
        let text = self.read(&path, "tune")?;
        self.parse_records(&path, &text)
    }

    fn parse_records(&self, path: &Path, text: &str) -> Result<Vec<EvaluationRecord>> {
        let want = format!("tuning={}", self.cfg.tuning_hash());
        if let Some(first) = text.lines().next() {
            if !first.ends_with(&want) {
                return Err(Error::InvalidArgument(format!(
                    "{} was written with a different tuning configuration; remove it or use another output directory",
                    path.display()
                )));
            }
        }
        text.lines()
            .enumerate()
            .filter(|(_, l)| !l.starts_with('#') && !l.trim().is_empty())
            .map(|(i, l)| {
                serde_json::from_str(l).map_err(|e| Error::Parse {
                    path: path.to_path_buf(),
                    line: i + 1,
                    message: e.to_string(),
                })
            })
            .collect()
    }

    /// Base-level runs. Units already present in the record store are
    /// skipped, so a repeated run reports 0 new evaluations.
    pub fn tune(&self) -> Result<StageReport> {
        let datasets = self.datasets()?;
        let defaults = self.cfg.default_settings()?;
        let ids: Vec<String> = defaults.iter().map(|d| d.id.clone()).collect();
        let tcfg = self.cfg.tuning_config();
        let path = self.paths.records();
        let existing = if path.exists() {
            let text = fs::read_to_string(&path).map_err(|e| Error::io(&path, e))?;
            self.parse_records(&path, &text)?
        } else {
            fs::create_dir_all(&self.paths.root).map_err(|e| Error::io(&self.paths.root, e))?;
            fs::write(&path, format!("{}\n", self.records_header())).map_err(|e| Error::io(&path, e))?;
            Vec::new()
        };
        let mut file = OpenOptions::new().append(true).open(&path).map_err(|e| Error::io(&path, e))?;
        let mut report = StageReport::default();
        let mut total = 0usize;
        let mut status = String::from("dataset,complete,new_units\n");
        for d in &datasets {
            let outcome = TuningOutcome::from_records(&d.name, &existing, &tcfg, &ids);
            let done: BTreeSet<(u64, usize)> = outcome
                .tuned_records
                .iter()
                .map(|r| (r.seed, r.outer_fold))
                .filter(|key| {
                    ids.iter().all(|id| {
                        outcome
                            .default_records
                            .iter()
                            .any(|r| r.strategy == Strategy::Default(id.clone()) && (r.seed, r.outer_fold) == *key)
                    })
                })
                .collect();
            let summary = run_base_level_resumable(d, &defaults, &tcfg, &done, &mut |records, _| {
                for r in records {
                    writeln!(file, "{}", serde_json::to_string(r)?).map_err(|e| Error::io(&path, e))?;
                }
                file.flush().map_err(|e| Error::io(&path, e))
            })?;
            total += summary.new_evaluations;
            if !summary.complete {
                report.partial = true;
                report.messages.push(format!("{}: incomplete (walltime or failed units)", d.name));
            }
            report.messages.push(format!("{}: {} new evaluations", d.name, summary.new_evaluations));
            status.push_str(&format!("{},{},{}\n", d.name, summary.complete, summary.new_units));
        }
        report.messages.push(format!("{total} new evaluations"));
        self.write(&self.paths.tune_status(), &status)?;
        Ok(report)
    }

    pub fn outcomes(&self) -> Result<Vec<TuningOutcome>> {
        let records = self.records()?;
        let ids: Vec<String> = self.cfg.default_settings()?.iter().map(|d| d.id.clone()).collect();
        let tcfg = self.cfg.tuning_config();
        Ok(self
            .dataset_names()?
            .iter()
            .map(|n| TuningOutcome::from_records(n, &records, &tcfg, &ids))
            .collect())
    }

    pub fn extract(&self) -> Result<StageReport> {
        let datasets = self.datasets()?;
        let rl = self.cfg.meta.relative_landmarking;
        let vectors = datasets.par_iter().map(|d| extract_all(d, rl)).collect::<Result<Vec<_>>>()?;
        self.write(&self.paths.metafeatures(), &vectors_to_csv(&vectors))?;
        Ok(StageReport {
            messages: vec![format!("{} meta-feature vectors of length {}", vectors.len(), vectors.first().map_or(0, |v| v.len()))],
            partial: false,
        })
    }

    pub fn label(&self) -> Result<StageReport> {
        let mut report = StageReport::default();
        let mut labels = Vec::new();
        for o in self.outcomes()? {
            if !o.complete {
                report.partial = true;
                report.messages.push(format!("{}: not labeled, tuning outcome incomplete", o.dataset));
                continue;
            }
            for &alpha in &self.cfg.labeling.alphas {
                labels.push(label_meta_example(&o, alpha)?);
            }
        }
        for &alpha in &self.cfg.labeling.alphas {
            let at: Vec<_> = labels.iter().filter(|l| l.alpha == alpha).collect();
            let tuning = at.iter().filter(|l| l.label == MetaClass::Tuning).count();
            report
                .messages
                .push(format!("alpha {alpha}: {tuning} Tuning, {} Defaults", at.len() - tuning));
        }
        self.write(&self.paths.labels(), &labels_to_csv(&labels))?;
        Ok(report)
    }

    pub fn assemble(&self) -> Result<StageReport> {
        let vectors = vectors_from_csv(&self.read(&self.paths.metafeatures(), "extract")?)?;
        let labels = labels_from_csv(&self.read(&self.paths.labels(), "label")?)?;
        let md = assemble(&vectors, &labels, self.cfg.meta.alpha)?;
        let c = md.class_counts();
        self.write(&self.paths.metadataset(), &md.to_csv())?;
        Ok(StageReport {
            messages: vec![format!(
                "{} examples, {} features, {} Tuning / {} Defaults",
                md.len(),
                md.schema.len(),
                c[MetaClass::Tuning.index()],
                c[MetaClass::Defaults.index()]
            )],
            partial: false,
        })
    }

    pub fn meta_dataset(&self) -> Result<MetaDataset> {
        MetaDataset::from_csv(&self.read(&self.paths.metadataset(), "assemble")?, self.cfg.meta.alpha)
    }

    /// Evaluates the configured learner/setup grid, or only `only`. Grid
    /// cells a learner cannot run are recorded as NA; an explicitly
    /// requested unsupported cell is an error.
    pub fn meta_eval(&self, only: Option<(LearnerSpec, Setup)>) -> Result<StageReport> {
        let md = self.meta_dataset()?;
        let mcfg = self.cfg.meta_cv_config();
        let explicit = only.is_some();
        let grid = match only {
            Some(cell) => vec![cell],
            None => self.cfg.meta_grid()?,
        };
        let mut report = StageReport::default();
        let mut per_rep = String::from("learner,setup,repetition,auc\n");
        let mut summary = String::from("learner,setup,mean_auc,sd_auc\n");
        let mut preds = String::from("learner,setup,dataset,label,tuning_score,predicted\n");
        let mut violations = 0;
        for (spec, setup) in grid {
            let r = match run_meta_cv(&md, &spec, setup, &mcfg) {
                Ok(r) => r,
                Err(e @ Error::UnsupportedSetup { .. }) if !explicit => {
                    report.messages.push(format!("{}/{setup}: NA ({e})", spec.kind));
                    summary.push_str(&format!("{},{setup},NA,NA\n", spec.kind));
                    continue;
                }
                Err(e) => return Err(e),
            };
            let v = trace_violations(&r.traces);
            violations += v.len();
            if !v.is_empty() {
                return Err(Error::InvalidArgument(format!("leak check failed: {}", v.join("; "))));
            }
            for (i, a) in r.rep_aucs.iter().enumerate() {
                per_rep.push_str(&format!("{},{setup},{},{a:.6}\n", spec.kind, i + 1));
            }
            summary.push_str(&format!("{},{setup},{:.6},{:.6}\n", spec.kind, r.mean_auc(), r.sd_auc()));
            let reps = r.tuning_scores.len() as f64;
            for (i, e) in md.examples.iter().enumerate() {
                let s = r.tuning_scores.iter().map(|v| v[i]).sum::<f64>() / reps;
                let predicted = if s >= self.cfg.meta.threshold { MetaClass::Tuning } else { MetaClass::Defaults };
                preds.push_str(&format!("{},{setup},{},{},{s:.6},{predicted}\n", spec.kind, e.dataset, e.label));
            }
            report.messages.push(format!(
                "{}/{setup}: AUC {:.3} +- {:.3} over {} repetitions",
                spec.kind,
                r.mean_auc(),
                r.sd_auc(),
                r.rep_aucs.len()
            ));
        }
        report.messages.push(format!("leak check: {violations} violations"));
        self.write(&self.paths.meta_eval(), &per_rep)?;
        self.write(&self.paths.meta_eval_summary(), &summary)?;
        self.write(&self.paths.meta_predictions(), &preds)?;
        Ok(report)
    }

    pub fn importance(&self) -> Result<StageReport> {
        let md = self.meta_dataset()?;
        let m = &self.cfg.meta;
        let rep = rf_importance(&md, m.importance_repetitions, m.seed, m.importance_trees)?;
        self.write(&self.paths.importance(), &rep.to_csv())?;
        let top: Vec<&str> = rep.ranking.iter().take(5).map(|f| f.name.as_str()).collect();
        Ok(StageReport {
            messages: vec![format!("top features: {}", top.join(", "))],
            partial: false,
        })
    }

    pub fn train_final(&self) -> Result<StageReport> {
        let md = self.meta_dataset()?;
        let spec = LearnerSpec::new(self.cfg.meta.final_learner.parse::<LearnerKind>()?);
        let setup: Setup = self.cfg.meta.final_setup.parse()?;
        let mut model = train_final(&md, &spec, setup, &self.cfg.meta_cv_config())?;
        model.threshold = self.cfg.meta.threshold;
        self.write(&self.paths.model(), &serde_json::to_string(&model)?)?;
        Ok(StageReport {
            messages: vec![format!("{}/{setup} trained on {} examples", spec.kind, md.len())],
            partial: false,
        })
    }

    pub fn model(&self) -> Result<MetaModel> {
        let path = self.paths.model();
        if !path.exists() {
            return Err(Error::MissingArtifact {
                path,
                producer: "train-final".into(),
            });
        }
        MetaModel::load(&path)
    }

    pub fn recommend(&self, dataset: &Path) -> Result<Recommendation> {
        let model = self.model()?;
        let raw = load_dataset(dataset, Format::from_path(dataset)?, &self.cfg.data.target)?;
        let mut d = preprocess(&raw)?;
        d.name = dataset.file_stem().and_then(|s| s.to_str()).unwrap_or("dataset").to_string();
        recommend(&model, &d)
    }

    /// Meta predictions per learner/setup, read back from `meta-eval`.
    pub fn meta_predictions(&self) -> Result<Vec<(String, BTreeMap<String, MetaClass>)>> {
        let text = self.read(&self.paths.meta_predictions(), "meta-eval")?;
        let mut by: BTreeMap<String, BTreeMap<String, MetaClass>> = BTreeMap::new();
        for r in rows(&text) {
            if r.len() != 6 {
                continue;
            }
            by.entry(format!("{}/{}", r[0], r[1])).or_default().insert(r[2].to_string(), r[5].parse()?);
        }
        Ok(by.into_iter().collect())
    }

    pub fn project(&self) -> Result<StageReport> {
        let md = self.meta_dataset()?;
        let in_md: BTreeSet<&str> = md.examples.iter().map(|e| e.dataset.as_str()).collect();
        let outcomes: Vec<TuningOutcome> = self.outcomes()?.into_iter().filter(|o| in_md.contains(o.dataset.as_str())).collect();
        let predictions = self.meta_predictions()?;
        let mf = vectors_from_csv(&self.read(&self.paths.metafeatures(), "extract")?)?;
        let extraction: BTreeMap<String, f64> = mf.into_iter().map(|v| (v.dataset, v.extraction_time)).collect();
        let rep = project(&outcomes, &predictions, &extraction, self.cfg.meta.projection_seed)?;
        self.write(&self.paths.projection_summary(), &rep.summary_csv())?;
        self.write(&self.paths.projection_entries(), &rep.entries_csv())?;
        let defaults = self.cfg.default_settings()?;
        let reference = reference_id(LearnerKind::SvmRbf, &defaults).expect("validated config has a reference default");
        let curves = defaults_comparison_curves(&outcomes, &reference)?;
        self.write(&self.paths.curves(), &curves_csv(&curves))?;
        let mut messages: Vec<String> = rep
            .strategies
            .iter()
            .map(|s| format!("{}: BAC {:.4}, runtime {:.3}s", s.strategy, s.mean_bac, s.mean_runtime))
            .collect();
        messages.push(format!("{} datasets projected", outcomes.len()));
        Ok(StageReport { messages, partial: false })
    }

    /// Renders summary tables and charts from the artifacts of the other
    /// stages.
    pub fn report(&self) -> Result<StageReport> {
        let dir = self.paths.report();
        let mut report = StageReport::default();

        // AUC table per setup and a Friedman-Nemenyi comparison of learners
        let summary_path = self.paths.meta_eval_summary();
        let summary = self.read(&summary_path, "meta-eval")?;
        let mut table: BTreeMap<String, BTreeMap<String, String>> = BTreeMap::new();
        let mut setups: Vec<String> = Vec::new();
        for r in rows(&summary) {
            if !setups.contains(&r[1].to_string()) {
                setups.push(r[1].to_string());
            }
            table.entry(r[0].to_string()).or_default().insert(r[1].to_string(), r[2].to_string());
        }
        let mut auc_csv = format!("learner,{}\n", setups.join(","));
        for (learner, cells) in &table {
            let row: Vec<&str> = setups.iter().map(|s| cells.get(s).map_or("NA", String::as_str)).collect();
            auc_csv.push_str(&format!("{learner},{}\n", row.join(",")));
        }
        self.write(&dir.join("meta_auc.csv"), &auc_csv)?;

        let per_rep_path = self.paths.meta_eval();
        let per_rep = self.read(&per_rep_path, "meta-eval")?;
        let mut aucs: BTreeMap<(String, String), Vec<f64>> = BTreeMap::new();
        for r in rows(&per_rep) {
            aucs.entry((r[1].to_string(), r[0].to_string())).or_default().push(parse_f64(r[3], &per_rep_path)?);
        }
        let mut fr = String::from("setup,learner,avg_rank,statistic,p_value,cd\n");
        for setup in &setups {
            let learners: Vec<(&String, &Vec<f64>)> =
                aucs.iter().filter(|((s, _), _)| s == setup).map(|((_, l), v)| (l, v)).collect();
            if learners.len() < 2 {
                continue;
            }
            let scores: Vec<Vec<f64>> = learners.iter().map(|(_, v)| (*v).clone()).collect();
            match friedman_nemenyi(&scores, 0.05) {
                Ok(f) => {
                    for ((l, _), rank) in learners.iter().zip(&f.avg_ranks) {
                        fr.push_str(&format!("{setup},{l},{rank:.4},{:.4},{:.4e},{:.4}\n", f.statistic, f.p_value, f.cd));
                    }
                }
                Err(e) => report.messages.push(format!("friedman on {setup}: {e}")),
            }
        }
        self.write(&dir.join("friedman.csv"), &fr)?;

        let imp_path = self.paths.importance();
        if imp_path.exists() {
            let text = self.read(&imp_path, "importance")?;
            let bars: Vec<(String, f64)> = rows(&text)
                .take(20)
                .map(|r| Ok((r[1].to_string(), parse_f64(r[2], &imp_path)?)))
                .collect::<Result<_>>()?;
            let refs: Vec<(&str, f64)> = bars.iter().map(|(n, v)| (n.as_str(), *v)).collect();
            self.write(&dir.join("importance.svg"), &svg::bar_chart("Meta-feature importance", "mean Gini importance", &refs))?;
        }

        let proj_path = self.paths.projection_summary();
        if proj_path.exists() {
            let text = self.read(&proj_path, "project")?;
            let pts: Vec<(String, f64, f64)> = rows(&text)
                .map(|r| Ok((r[0].to_string(), parse_f64(r[2], &proj_path)?, parse_f64(r[1], &proj_path)?)))
                .collect::<Result<_>>()?;
            let refs: Vec<(&str, f64, f64)> = pts.iter().map(|(n, x, y)| (n.as_str(), *x, *y)).collect();
            self.write(&dir.join("projection.svg"), &svg::scatter("Average BAC and runtime", "mean runtime (s)", "mean BAC", &refs))?;
        }
        let curves_path = self.paths.curves();
        if curves_path.exists() {
            let text = self.read(&curves_path, "project")?;
            let curves = rows(&text)
                .map(|r| {
                    Ok(crate::projection::CurveRow {
                        dataset: r[1].to_string(),
                        reference: parse_f64(r[2], &curves_path)?,
                        multiple: parse_f64(r[3], &curves_path)?,
                        tuned: parse_f64(r[4], &curves_path)?,
                    })
                })
                .collect::<Result<Vec<_>>>()?;
            self.write(&dir.join("curves.svg"), &curves_svg(&curves))?;
        }
        report.messages.push(format!("report written to {}", dir.display()));
        Ok(report)
    }

    /// Every stage in order.
    pub fn run_all(&self) -> Result<StageReport> {
        let mut report = StageReport::default();
        report.merge(self.ingest()?);
        report.merge(self.tune()?);
        report.merge(self.extract()?);
        report.merge(self.label()?);
        report.merge(self.assemble()?);
        report.merge(self.meta_eval(None)?);
        report.merge(self.importance()?);
        report.merge(self.train_final()?);
        report.merge(self.project()?);
        report.merge(self.report()?);
        Ok(report)
    }
}

fn csv_safe(s: &str) -> String {
    s.replace([',', '\n'], ";")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::stream;
    use rand::Rng;

    fn write_corpus(dir: &Path) {
        fs::create_dir_all(dir).unwrap();
        for k in 0..6 {
            let mut rng = stream(k);
            let mut text = String::from("a,b,class\n");
            for i in 0..100 {
                let (a, b): (f64, f64) = (rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0));
                let c = if k % 2 == 0 {
                    a + b > 0.0
                } else {
                    ((a * 2.0 + 2.0).floor() + (b * 2.0 + 2.0).floor()) as i64 % 2 == 0
                };
                let c = if i % 17 == 0 { !c } else { c };
                text.push_str(&format!("{a},{b},{}\n", if c { "yes" } else { "no" }));
            }
            fs::write(dir.join(format!("set{k}.csv")), text).unwrap();
        }
        fs::write(dir.join("tiny.csv"), "a,class\n1,x\n2,y\n3,x\n4,y\n").unwrap();
    }

    fn config(root: &Path) -> RunConfig {
        let mut cfg = RunConfig::from_toml(
            "[tuning]\nbudget = 10\nouter_k = 5\ninner_k = 2\nseeds = [1, 2]\n\
             [meta]\nlearners = [\"random_forest\", \"naive_bayes\"]\nsetups = [\"none\", \"tuned\"]\nrepetitions = 2\n\
             tuning_budget = 2\nimportance_repetitions = 2\nimportance_trees = 10\nfinal_learner = \"random_forest\"\n\
             alpha = 0.10\n[labeling]\nalphas = [0.10]\n",
        )
        .unwrap();
        cfg.base_dir = root.to_path_buf();
        cfg.data.dir = "data".into();
        cfg.output.dir = "out".into();
        cfg.validate().unwrap();
        cfg
    }

    #[test]
    fn missing_upstream_names_the_producer() {
        let tmp = tempfile::tempdir().unwrap();
        let p = Pipeline::new(config(tmp.path()));
        let e = p.assemble().unwrap_err();
        assert!(e.to_string().contains("metatune extract"), "{e}");
    }

    #[test]
    fn stages_chain_and_tune_resumes() {
        let tmp = tempfile::tempdir().unwrap();
        write_corpus(&tmp.path().join("data"));
        let p = Pipeline::new(config(tmp.path()));
        let ing = p.ingest().unwrap();
        assert!(ing.messages.iter().any(|m| m.starts_with("tiny: ")));
        assert_eq!(p.dataset_names().unwrap().len(), 6);
        let first = p.tune().unwrap();
        assert!(!first.messages.last().unwrap().starts_with("0 "));
        let second = p.tune().unwrap();
        assert_eq!(second.messages.last().unwrap(), "0 new evaluations");
        p.extract().unwrap();
        let labels = p.label().unwrap();
        assert!(!labels.partial);
        p.assemble().unwrap();
        let eval = p.meta_eval(None).unwrap();
        assert!(eval.messages.iter().any(|m| m.starts_with("naive_bayes/tuned: NA")));
        let explicit = p.meta_eval(Some((LearnerSpec::new(LearnerKind::NaiveBayes), Setup::Tuned)));
        assert!(matches!(explicit, Err(Error::UnsupportedSetup { .. })));
        p.meta_eval(None).unwrap();
        p.importance().unwrap();
        p.train_final().unwrap();
        let rec = p.recommend(&tmp.path().join("data/set1.csv")).unwrap();
        assert_eq!(rec.dataset, "set1");
        p.project().unwrap();
        p.report().unwrap();
        for f in ["metadataset.csv", "labels.csv", "report/curves.svg", "report/meta_auc.csv"] {
            let text = fs::read_to_string(p.paths.root.join(f)).unwrap();
            assert!(text.contains(&p.cfg.stamp()), "{f} lacks the stamp");
        }
    }

    #[test]
    fn dataset_cache_roundtrips_with_stamp() {
        let tmp = tempfile::tempdir().unwrap();
        write_corpus(&tmp.path().join("data"));
        let p = Pipeline::new(config(tmp.path()));
        p.ingest().unwrap();
        let d = &p.datasets().unwrap()[0];
        assert_eq!(d.n_instances(), 100);
        assert_eq!(d.x.cols(), 2);
    }
}
