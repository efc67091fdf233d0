use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use metatune::config::RunConfig;
use metatune::error::Error;
use metatune::learners::{LearnerKind, LearnerSpec};
use metatune::metafeatures::schema;
use metatune::metalevel::Setup;
use metatune::pipeline::{Pipeline, StageReport};

/// Predicts whether tuning an RBF SVM will beat its default hyperparameters.
#[derive(Parser)]
#[command(name = "metatune", version)]
struct Cli {
    /// Run configuration (TOML). The output directory can be overridden with METATUNE_OUT.
    #[arg(long, short, global = true, default_value = "metatune.toml")]
    config: PathBuf,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Clone, Copy)]
struct Jobs {
    /// Worker threads (default: all cores).
    #[arg(long, short)]
    jobs: Option<usize>,
}

#[derive(Args)]
struct TuneFlags {
    #[arg(long)]
    budget: Option<usize>,
    #[arg(long)]
    outer_k: Option<usize>,
    #[arg(long)]
    inner_k: Option<usize>,
    /// Comma-separated list, e.g. 1,2,3
    #[arg(long, value_delimiter = ',')]
    seeds: Option<Vec<u64>>,
    /// TOML file with [[default]] entries.
    #[arg(long)]
    defaults_file: Option<PathBuf>,
    /// Seconds per dataset before it is skipped and flagged.
    #[arg(long)]
    walltime_per_dataset: Option<f64>,
}

#[derive(Subcommand)]
enum Command {
    /// Load, filter and preprocess the datasets directory.
    Ingest,
    /// Nested-CV random search against the defaults (resumable).
    Tune {
        #[command(flatten)]
        jobs: Jobs,
        #[command(flatten)]
        flags: TuneFlags,
    },
    /// Meta-feature vectors for every ingested dataset.
    Extract {
        #[command(flatten)]
        jobs: Jobs,
    },
    /// Wilcoxon labels per dataset and alpha.
    Label,
    /// Join meta-features and labels into the meta-dataset.
    Assemble,
    /// Repeated CV of meta-learners; without flags the configured grid.
    MetaEval {
        #[arg(long, requires = "setup")]
        learner: Option<String>,
        #[arg(long, requires = "learner")]
        setup: Option<String>,
    },
    /// Random forest Gini importance of the meta-features.
    Importance,
    /// Fit the configured final meta-model on the whole meta-dataset.
    TrainFinal,
    /// Label a new dataset with the trained meta-model.
    Recommend {
        #[arg(long)]
        dataset: PathBuf,
    },
    /// Simulated BAC/runtime of tuning, defaults, oracle and meta strategies.
    Project,
    /// CSV and SVG summaries.
    Report,
    /// Every stage in order.
    Run {
        #[command(flatten)]
        jobs: Jobs,
    },
    /// Print the meta-feature schema.
    Describe,
}

fn exit_code(e: &Error) -> u8 {
    match e {
        Error::Config(_) | Error::InvalidArgument(_) | Error::UnsupportedSetup { .. } | Error::InvalidHyperparameter { .. } => 1,
        _ => 2,
    }
}

fn set_jobs(jobs: Jobs) -> Result<(), Error> {
    if let Some(n) = jobs.jobs {
        if n == 0 {
            return Err(Error::InvalidArgument("--jobs must be at least 1".into()));
        }
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .map_err(|e| Error::InvalidArgument(e.to_string()))?;
    }
    Ok(())
}

fn absolute(p: &Path) -> PathBuf {
    std::path::absolute(p).unwrap_or_else(|_| p.to_path_buf())
}

fn apply_tune_flags(cfg: &mut RunConfig, f: &TuneFlags) -> Result<(), Error> {
    let t = &mut cfg.tuning;
    if let Some(v) = f.budget {
        t.budget = v;
    }
    if let Some(v) = f.outer_k {
        t.outer_k = v;
    }
    if let Some(v) = f.inner_k {
        t.inner_k = v;
    }
    if let Some(v) = &f.seeds {
        t.seeds = v.clone();
    }
    if let Some(v) = f.walltime_per_dataset {
        t.walltime_per_dataset = Some(v);
    }
    if let Some(v) = &f.defaults_file {
        cfg.defaults.file = Some(absolute(v));
    }
    cfg.validate()
}

fn print(report: &StageReport) {
    for m in &report.messages {
        println!("{m}");
    }
}

fn run(cli: Cli) -> Result<bool, (u8, Error)> {
    if let Command::Describe = cli.command {
        for (name, description) in schema(true) {
            println!("{name}\t{description}");
        }
        return Ok(false);
    }
    let validation = |e: Error| (1, e);
    let runtime = |e: Error| (exit_code(&e), e);
    let mut cfg = RunConfig::load(&cli.config).map_err(validation)?;
    match &cli.command {
        Command::Tune { jobs, flags } => {
            apply_tune_flags(&mut cfg, flags).map_err(validation)?;
            set_jobs(*jobs).map_err(validation)?;
        }
        Command::Extract { jobs } | Command::Run { jobs } => set_jobs(*jobs).map_err(validation)?,
        _ => {}
    }
    let p = Pipeline::new(cfg);
    let report = match cli.command {
        Command::Ingest => p.ingest(),
        Command::Tune { .. } => p.tune(),
        Command::Extract { .. } => p.extract(),
        Command::Label => p.label(),
        Command::Assemble => p.assemble(),
        Command::MetaEval { learner, setup } => {
            let only = match (learner, setup) {
                (Some(l), Some(s)) => {
                    let kind: LearnerKind = l.parse().map_err(validation)?;
                    let setup: Setup = s.parse().map_err(validation)?;
                    Some((LearnerSpec::new(kind), setup))
                }
                _ => None,
            };
            p.meta_eval(only)
        }
        Command::Importance => p.importance(),
        Command::TrainFinal => p.train_final(),
        Command::Recommend { dataset } => {
            let rec = p.recommend(&dataset).map_err(runtime)?;
            println!("{rec}");
            return Ok(false);
        }
        Command::Project => p.project(),
        Command::Report => p.report(),
        Command::Run { .. } => p.run_all(),
        Command::Describe => unreachable!("handled above"),
    }
    .map_err(runtime)?;
    print(&report);
    Ok(report.partial)
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(false) => ExitCode::SUCCESS,
        Ok(true) => {
            eprintln!("warning: some datasets were skipped or are incomplete");
            ExitCode::from(3)
        }
        Err((code, e)) => {
            eprintln!("error: {e}");
            ExitCode::from(code)
        }
    }
}
