//! Command-line driver.

use std::ffi::OsString;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use ecilmu_core::metrics::learned_samples;
use ecilmu_core::protocol::{run_protocol_with, ProtocolConfig};
use ecilmu_core::sim::{parse_workload, Preset};
use ecilmu_core::{
    evaluate, generate_synthetic, sample_exemplars, simulate, split, sweep_threshold, ClassId,
    Databases, Error, LabeledSample, Method, NearestCentroid, SeedStream, SurrogateModel,
    SyntheticSpec, UnlearnRequest, VectorRecord,
};

use crate::config::RunConfig;
use crate::error::{CliError, Result};
use crate::io::{read_embeddings, read_predictions, write_atomic, write_embeddings};
use crate::report::{write_sweep_csv, write_timeline_csv, Report};
use crate::state;

#[derive(Debug, Parser)]
#[command(
    name = "ecilmu",
    version,
    about = "Class-incremental learning and class unlearning over vector stores"
)]
pub struct Cli {
    #[command(flatten)]
    pub global: GlobalArgs,
    #[command(subcommand)]
    pub command: Command,
}

/// Overrides applied on top of `--config` and the defaults.
#[derive(Debug, Args)]
pub struct GlobalArgs {
    /// key=value configuration file
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    #[arg(long, global = true)]
    pub seed: Option<String>,
    /// Membership filter threshold s
    #[arg(long, global = true)]
    pub threshold: Option<String>,
    #[arg(long = "knn-k", global = true)]
    pub knn_k: Option<String>,
    /// uniform | proportional | inverse | nearest
    #[arg(long, global = true)]
    pub strategy: Option<String>,
    /// record-max | centroid
    #[arg(long = "filter-mode", global = true)]
    pub filter_mode: Option<String>,
    /// reciprocal | direct
    #[arg(long = "inverse-weighting", global = true)]
    pub inverse_weighting: Option<String>,
    #[arg(long = "state-dir", global = true)]
    pub state_dir: Option<String>,
    /// Any configuration key, e.g. --set cost.restore=20
    #[arg(long = "set", value_name = "KEY=VALUE", global = true)]
    pub set: Vec<String>,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Generate synthetic clustered embeddings
    Gen {
        #[arg(long, default_value_t = 10)]
        classes: u32,
        #[arg(long = "per-class", default_value_t = 100)]
        per_class: usize,
        #[arg(long, default_value_t = 64)]
        dim: usize,
        #[arg(long, default_value_t = 0.05)]
        spread: f64,
        #[arg(long)]
        out: PathBuf,
        /// Also write a stratified held-out split here
        #[arg(long = "test-out")]
        test_out: Option<PathBuf>,
        /// Held-out share per class when --test-out is given [default: 1/6]
        #[arg(long = "test-fraction", requires = "test_out")]
        test_fraction: Option<f64>,
    },
    /// Load every record of an embedding file into DB-CIL
    Import {
        #[arg(long)]
        input: PathBuf,
    },
    /// Learn new classes: insert their vectors from a file into DB-CIL
    Learn {
        #[arg(long)]
        input: PathBuf,
        #[arg(long, value_delimiter = ',', required = true)]
        classes: Vec<u32>,
    },
    /// Identify a class from exemplars and migrate it to DB-MU
    Unlearn {
        /// Sample exemplars of this class
        #[arg(
            long,
            conflicts_with = "exemplars",
            required_unless_present = "exemplars"
        )]
        class: Option<u32>,
        /// Where to sample --class exemplars from [default: DB-CIL]
        #[arg(long, requires = "class")]
        data: Option<PathBuf>,
        /// Use every vector of this file as an exemplar
        #[arg(long)]
        exemplars: Option<PathBuf>,
        #[arg(long, default_value_t = 10)]
        count: usize,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Evaluate accuracies; without --test runs the bundled synthetic protocol
    Eval {
        #[arg(long)]
        test: Option<PathBuf>,
        /// id,label CSV used as the surrogate instead of nearest-centroid
        #[arg(long)]
        predictions: Option<PathBuf>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Filter calibration table over a threshold grid
    Sweep {
        /// start:end:step, inclusive
        #[arg(long, default_value = "0.5:0.95:0.01")]
        grid: String,
        #[arg(long)]
        test: Option<PathBuf>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Pipeline makespans of all methods on a workload
    Simulate {
        /// Preset (cifar10, cifar10-cil, mu8, cil8, mix8) or a list like MU-1,CIL-2
        #[arg(long, default_value = "cifar10")]
        workload: String,
        /// Classes learned before the workload; required for task lists
        #[arg(long)]
        initial: Option<u32>,
        /// Method whose timeline is written
        #[arg(long, default_value = "ecil-mu")]
        method: String,
        #[arg(long)]
        timeline: Option<PathBuf>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Convert a key=value report to JSON
    ExportReport {
        #[arg(long)]
        input: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

/// Parses `args` (program name first) and runs the command, printing the
/// primary output to `stdout`.
pub fn run<I, T>(args: I, stdout: &mut dyn Write) -> Result<()>
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) if !e.use_stderr() => {
            write!(stdout, "{e}").map_err(|e| CliError::io(Path::new("<stdout>"), e))?;
            return Ok(());
        }
        Err(e) => {
            let text = e.to_string();
            let first = text.lines().next().unwrap_or_default();
            return Err(CliError::Usage(
                first.trim_start_matches("error: ").to_owned(),
            ));
        }
    };
    let config = resolve_config(&cli.global)?;
    let output = execute(&cli.command, &config)?;
    stdout
        .write_all(output.as_bytes())
        .map_err(|e| CliError::io(Path::new("<stdout>"), e))
}

pub fn resolve_config(global: &GlobalArgs) -> Result<RunConfig> {
    let mut config = RunConfig::default();
    if let Some(path) = &global.config {
        config.apply_file(path)?;
    }
    let flags = [
        ("seed", &global.seed),
        ("threshold", &global.threshold),
        ("knn_k", &global.knn_k),
        ("strategy", &global.strategy),
        ("filter_mode", &global.filter_mode),
        ("inverse_weighting", &global.inverse_weighting),
        ("state_dir", &global.state_dir),
    ];
    let flag_err = |reason| CliError::Config {
        origin: "command line".into(),
        line: 0,
        reason,
    };
    for (key, value) in flags {
        if let Some(v) = value {
            config.set(key, v).map_err(flag_err)?;
        }
    }
    for kv in &global.set {
        let (k, v) = kv
            .split_once('=')
            .ok_or_else(|| flag_err(format!("--set expects KEY=VALUE, got `{kv}`")))?;
        config.set(k, v).map_err(flag_err)?;
    }
    config.validate()?;
    Ok(config)
}

fn emit(report: &Report, out: Option<&Path>) -> Result<String> {
    let text = report.to_text();
    if let Some(path) = out {
        write_atomic(path, text.as_bytes())?;
    }
    Ok(text)
}

fn execute(command: &Command, config: &RunConfig) -> Result<String> {
    match command {
        Command::Gen {
            classes,
            per_class,
            dim,
            spread,
            out,
            test_out,
            test_fraction,
        } => {
            let spec = SyntheticSpec {
                n_classes: *classes,
                per_class: *per_class,
                dim: *dim,
                spread: *spread,
                seed: config.seed,
            };
            let records = generate_synthetic(&spec)?;
            let mut report = Report::new();
            match test_out {
                Some(test_path) => {
                    let (train, test) =
                        split(records, test_fraction.unwrap_or(1.0 / 6.0), config.seed)?;
                    write_embeddings(out, &train)?;
                    write_embeddings(test_path, &test)?;
                    report
                        .push("records", train.len())
                        .push("test_records", test.len());
                }
                None => {
                    write_embeddings(out, &records)?;
                    report.push("records", records.len());
                }
            }
            report
                .push("classes", classes)
                .push("dim", dim)
                .push("spread", spread)
                .push_config(config);
            emit(&report, None)
        }
        Command::Import { input } => {
            let mut db = state::load(&config.state_dir)?;
            let records = read_embeddings(input)?;
            let n = records.len();
            for r in records {
                db.insert(r).map_err(|e| CliError::file(input, e))?;
            }
            state::save(&config.state_dir, &db)?;
            let mut report = Report::new();
            report.push("imported", n);
            push_store_sizes(&mut report, &db);
            emit(report.push_config(config), None)
        }
        Command::Learn { input, classes } => learn(input, classes, config),
        Command::Unlearn {
            class,
            data,
            exemplars,
            count,
            out,
        } => unlearn_cmd(
            *class,
            data.as_deref(),
            exemplars.as_deref(),
            *count,
            out.as_deref(),
            config,
        ),
        Command::Eval {
            test,
            predictions,
            out,
        } => {
            let model: Box<dyn SurrogateModel> = match predictions {
                Some(p) => Box::new(read_predictions(p)?),
                None => Box::new(NearestCentroid),
            };
            let report = match test {
                Some(path) => eval_file(path, model.as_ref(), config)?,
                None => eval_protocol(model.as_ref(), config)?,
            };
            emit(&report, out.as_deref())
        }
        Command::Sweep { grid, test, out } => {
            let grid = parse_grid(grid)?;
            let (db, samples) = match test {
                Some(path) => (state::load(&config.state_dir)?, read_samples(path)?),
                None => {
                    let run = run_protocol_with(&protocol_config(config), &NearestCentroid)?;
                    (run.db, run.held_out)
                }
            };
            let labelled: Vec<_> = learned_samples(&samples, &db)
                .into_iter()
                .map(|s| (s.vector.clone(), db.mu().has_label(s.label)))
                .collect();
            let calibration = sweep_threshold(db.mu(), &labelled, &grid, config.filter_mode)?;
            let mut csv = Vec::new();
            write_sweep_csv(&mut csv, &calibration).map_err(|source| CliError::Csv {
                path: PathBuf::from("<sweep>"),
                source,
            })?;
            if let Some(path) = out {
                write_atomic(path, &csv)?;
            }
            Ok(String::from_utf8(csv).expect("csv output is utf-8"))
        }
        Command::Simulate {
            workload,
            initial,
            method,
            timeline,
            out,
        } => simulate_cmd(
            workload,
            *initial,
            method,
            timeline.as_deref(),
            out.as_deref(),
            config,
        ),
        Command::ExportReport { input, out } => {
            let text = fs::read_to_string(input).map_err(|e| CliError::io(input, e))?;
            let json = Report::parse_text(&text, &input.display().to_string())?.to_json();
            if let Some(path) = out {
                write_atomic(path, json.as_bytes())?;
            }
            Ok(json)
        }
    }
}

fn push_store_sizes(report: &mut Report, db: &Databases) {
    report
        .push("cil_records", db.cil().len())
        .push("cil_classes", db.cil().labels().count())
        .push("mu_records", db.mu().len())
        .push("mu_classes", db.mu().labels().count());
}

fn learn(input: &Path, classes: &[u32], config: &RunConfig) -> Result<String> {
    let mut db = state::load(&config.state_dir)?;
    let learned = db.learned_labels();
    let records = read_embeddings(input)?;
    let mut added = 0usize;
    for &c in classes {
        let label = ClassId(c);
        if learned.contains(&label) {
            return Err(CliError::Conflict(format!(
                "class {label} has already been learned"
            )));
        }
        let members: Vec<&VectorRecord> = records.iter().filter(|r| r.label == label).collect();
        if members.is_empty() {
            return Err(CliError::file(input, Error::MissingClass(label)));
        }
        for r in members {
            db.insert(r.clone()).map_err(|e| CliError::file(input, e))?;
            added += 1;
        }
    }
    state::save(&config.state_dir, &db)?;
    let mut report = Report::new();
    report.push("learned_records", added);
    push_store_sizes(&mut report, &db);
    emit(report.push_config(config), None)
}

fn unlearn_cmd(
    class: Option<u32>,
    data: Option<&Path>,
    exemplar_file: Option<&Path>,
    count: usize,
    out: Option<&Path>,
    config: &RunConfig,
) -> Result<String> {
    let mut db = state::load(&config.state_dir)?;
    let exemplars = match (class, exemplar_file) {
        (_, Some(path)) => read_embeddings(path)?
            .into_iter()
            .map(|r| r.vector)
            .collect(),
        (Some(c), None) => {
            let label = ClassId(c);
            let pool: Vec<VectorRecord> = match data {
                Some(path) => read_embeddings(path)?
                    .into_iter()
                    .filter(|r| r.label == label)
                    .collect(),
                None => db
                    .cil()
                    .records()
                    .filter(|r| r.label == label)
                    .cloned()
                    .collect(),
            };
            if pool.is_empty() {
                return Err(Error::MissingClass(label).into());
            }
            sample_exemplars(&pool, count, &mut SeedStream::new(config.seed).fork(0))
        }
        (None, None) => return Err(CliError::Usage("--class or --exemplars is required".into())),
    };
    let request = UnlearnRequest::new(exemplars, config.knn_k)?;
    let migration = ecilmu_core::unlearn(&mut db, &request)?;
    state::save(&config.state_dir, &db)?;

    let mut report = Report::new();
    if let Some(c) = class {
        report.push("requested_class", c);
    }
    report
        .push("exemplars", request.exemplars().len())
        .push_migration(&migration);
    push_store_sizes(&mut report, &db);
    emit(report.push_config(config), out)
}

fn read_samples(path: &Path) -> Result<Vec<LabeledSample>> {
    Ok(read_embeddings(path)?
        .into_iter()
        .map(|r| LabeledSample {
            id: Some(r.id),
            vector: r.vector,
            label: r.label,
        })
        .collect())
}

fn eval_file(path: &Path, model: &dyn SurrogateModel, config: &RunConfig) -> Result<Report> {
    let db = state::load(&config.state_dir)?;
    let samples = read_samples(path)?;
    let samples: Vec<LabeledSample> = learned_samples(&samples, &db)
        .into_iter()
        .cloned()
        .collect();
    if samples.is_empty() {
        return Err(Error::EmptyStore.into());
    }
    let metrics = evaluate(
        &samples,
        &db,
        &config.pipeline(),
        model,
        SeedStream::new(config.seed),
    )?;
    let mut report = Report::new();
    report
        .push_metrics("", &metrics)
        .push("test", path.display())
        .push_config(config);
    Ok(report)
}

fn protocol_config(config: &RunConfig) -> ProtocolConfig {
    let mut p = ProtocolConfig {
        knn_k: config.knn_k,
        pipeline: config.pipeline(),
        seed: config.seed,
        ..Default::default()
    };
    p.data.seed = config.seed;
    p
}

fn eval_protocol(model: &dyn SurrogateModel, config: &RunConfig) -> Result<Report> {
    let run = run_protocol_with(&protocol_config(config), model)?;
    let last = run
        .steps
        .last()
        .ok_or(Error::InvalidWorkload("workload is empty"))?;
    let mut report = Report::new();
    report
        .push_metrics("", &last.reports[&config.strategy])
        .push("acc_t", run.acc_t);
    for step in &run.steps {
        let p = format!("step.{}.", step.task_index);
        let m = &step.reports[&config.strategy];
        report
            .push(format!("{p}task"), step.kind)
            .push(format!("{p}learned_classes"), step.learned_classes)
            .push_opt(format!("{p}acc_cr"), m.acc_cr)
            .push_opt(format!("{p}acc_cf"), m.acc_cf)
            .push_opt(format!("{p}filter_recall"), step.filter.recall())
            .push_opt(format!("{p}filter_specificity"), step.filter.specificity());
    }
    report.push_config(config);
    Ok(report)
}

/// `start:end:step`, both ends inclusive. Points are computed as
/// `start + i * step` and rounded to 12 decimals so printed thresholds stay
/// clean.
pub fn parse_grid(s: &str) -> Result<Vec<f64>> {
    let bad = || {
        CliError::Usage(format!(
            "grid must be start:end:step with step > 0, got `{s}`"
        ))
    };
    let parts: Vec<f64> = s
        .split(':')
        .map(|p| p.trim().parse::<f64>())
        .collect::<Result<_, _>>()
        .map_err(|_| bad())?;
    let [start, end, step] = parts[..] else {
        return Err(bad());
    };
    if !(start.is_finite() && end.is_finite() && step.is_finite() && step > 0.0 && end >= start) {
        return Err(bad());
    }
    let n = ((end - start) / step + 1e-9).floor() as usize + 1;
    if n > 1_000_000 {
        return Err(bad());
    }
    Ok((0..n)
        .map(|i| ((start + i as f64 * step) * 1e12).round() / 1e12)
        .collect())
}

fn simulate_cmd(
    workload: &str,
    initial: Option<u32>,
    method: &str,
    timeline: Option<&Path>,
    out: Option<&Path>,
    config: &RunConfig,
) -> Result<String> {
    let (tasks, initial) = match workload.parse::<Preset>() {
        Ok(p) => (p.workload(), initial.unwrap_or(p.initial_classes())),
        Err(_) => {
            let tasks = parse_workload(workload)?;
            let initial = initial
                .ok_or_else(|| CliError::Usage("--initial is required for a task list".into()))?;
            (tasks, initial)
        }
    };
    let chosen: Method = method.parse()?;

    let mut report = Report::new();
    report
        .push("workload", workload)
        .push("initial_classes", initial);
    let baseline = simulate(&tasks, &config.cost, Method::Retrain, initial)?.makespan;
    for m in Method::ALL {
        let t = simulate(&tasks, &config.cost, m, initial)?;
        report.push(format!("makespan.{m}"), t.makespan);
        if t.makespan > 0.0 {
            report.push(format!("speedup.{m}"), baseline / t.makespan);
        } else {
            report.push(format!("speedup.{m}"), crate::report::NOT_APPLICABLE);
        }
        if m == chosen {
            if let Some(path) = timeline {
                let mut csv = Vec::new();
                write_timeline_csv(&mut csv, &t).map_err(|source| CliError::Csv {
                    path: path.to_path_buf(),
                    source,
                })?;
                write_atomic(path, &csv)?;
            }
        }
    }
    report.push("timeline_method", chosen);
    emit(report.push_config(config), out)
}
