//! End-to-end CIL/MU experiment on synthetic clusters.
//!
//! An initial batch of classes is learned, then a task sequence adds classes
//! to DB-CIL or unlearns them through exemplar identification and migration.
//! After every task the held-out samples of all learned classes are
//! evaluated under each output strategy.

use alloc::collections::BTreeMap;
use alloc::vec;
use alloc::vec::Vec;

use rand::seq::SliceRandom;

use crate::error::{Error, Result};
use crate::inference::{NearestCentroid, PipelineConfig, StrategyKind, SurrogateModel};
use crate::metrics::{evaluate, learned_samples, LabeledSample, MetricsReport};
use crate::rng::SeedStream;
use crate::sim::TaskKind;
use crate::store::Databases;
use crate::synthetic::{generate_synthetic, split, SyntheticSpec};
use crate::unlearn::{
    sample_exemplars, sweep_threshold, unlearn, CalibrationRow, MigrationReport, UnlearnRequest,
    DEFAULT_K,
};
use crate::vector::{ClassId, VectorRecord};

#[derive(Debug, Clone, PartialEq)]
pub struct ProtocolConfig {
    /// Generator settings; `per_class` covers train and test records.
    pub data: SyntheticSpec,
    /// Records per class kept for the stores; the rest are held out.
    pub train_per_class: usize,
    pub initial_classes: u32,
    pub tasks: Vec<TaskKind>,
    pub knn_k: usize,
    /// Training vectors of the target class sent with each unlearn request.
    pub exemplars: usize,
    /// Threshold, filter mode and inverse weighting; the strategy field is
    /// ignored since every strategy is evaluated.
    pub pipeline: PipelineConfig,
    pub seed: u64,
}

impl Default for ProtocolConfig {
    fn default() -> Self {
        Self {
            data: SyntheticSpec {
                n_classes: 7,
                per_class: 1500,
                dim: 64,
                spread: 0.05,
                seed: 42,
            },
            train_per_class: 500,
            initial_classes: 5,
            tasks: vec![
                TaskKind::Mu(1),
                TaskKind::Cil(1),
                TaskKind::Mu(1),
                TaskKind::Cil(1),
            ],
            knn_k: DEFAULT_K,
            exemplars: 10,
            pipeline: PipelineConfig::default(),
            seed: 42,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ProtocolStep {
    pub task_index: usize,
    pub kind: TaskKind,
    /// Classes added (CIL) or requested for removal (MU).
    pub classes: Vec<ClassId>,
    pub migrations: Vec<MigrationReport>,
    /// Surrogate accuracy on held-out retained samples before the task.
    pub acc_t_before: f64,
    /// Number of classes learned so far, unlearned ones included.
    pub learned_classes: usize,
    /// Filter outcome on the evaluated samples at the configured threshold.
    pub filter: CalibrationRow,
    pub reports: BTreeMap<StrategyKind, MetricsReport>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ProtocolRun {
    /// Surrogate accuracy after the initial training.
    pub acc_t: f64,
    pub steps: Vec<ProtocolStep>,
    pub db: Databases,
    /// Held-out samples of every generated class, learned or not.
    pub held_out: Vec<LabeledSample>,
}

fn surrogate_accuracy(
    samples: &[LabeledSample],
    db: &Databases,
    model: &dyn SurrogateModel,
) -> Result<f64> {
    let retained: Vec<_> = samples
        .iter()
        .filter(|s| db.cil().has_label(s.label))
        .collect();
    if retained.is_empty() {
        return Err(Error::EmptyStore);
    }
    let mut ok = 0usize;
    for s in &retained {
        let q = crate::inference::Query {
            id: s.id,
            vector: &s.vector,
        };
        ok += usize::from(model.classify(&q, db.cil())? == s.label);
    }
    Ok(ok as f64 / retained.len() as f64)
}

pub fn run_protocol(cfg: &ProtocolConfig) -> Result<ProtocolRun> {
    run_protocol_with(cfg, &NearestCentroid)
}

pub fn run_protocol_with(cfg: &ProtocolConfig, model: &dyn SurrogateModel) -> Result<ProtocolRun> {
    if cfg.train_per_class == 0 || cfg.train_per_class >= cfg.data.per_class {
        return Err(Error::InvalidArgument(
            "train_per_class must leave held-out records",
        ));
    }
    if cfg.initial_classes == 0 || cfg.initial_classes > cfg.data.n_classes {
        return Err(Error::InvalidArgument(
            "initial classes must be between 1 and n_classes",
        ));
    }
    if cfg.exemplars == 0 {
        return Err(Error::InvalidArgument("exemplars must be positive"));
    }

    let records = generate_synthetic(&cfg.data)?;
    let test_fraction = 1.0 - cfg.train_per_class as f64 / cfg.data.per_class as f64;
    let (train, test) = split(records, test_fraction, cfg.seed)?;
    let mut train_by_class: BTreeMap<ClassId, Vec<VectorRecord>> = BTreeMap::new();
    for r in train {
        train_by_class.entry(r.label).or_default().push(r);
    }
    let test: Vec<LabeledSample> = test
        .into_iter()
        .map(|r| LabeledSample {
            id: Some(r.id),
            vector: r.vector,
            label: r.label,
        })
        .collect();

    let seeds = SeedStream::new(cfg.seed);
    let mut db = Databases::new();
    let mut next_class = 0u32;
    let mut learn = |db: &mut Databases, n: u32| -> Result<Vec<ClassId>> {
        if next_class + n > cfg.data.n_classes {
            return Err(Error::InvalidWorkload(
                "CIL task needs more classes than generated",
            ));
        }
        let mut added = vec![];
        for _ in 0..n {
            let label = ClassId(next_class);
            for r in train_by_class.get(&label).into_iter().flatten() {
                db.insert(r.clone())?;
            }
            added.push(label);
            next_class += 1;
        }
        Ok(added)
    };

    learn(&mut db, cfg.initial_classes)?;
    let acc_t = surrogate_accuracy(&test, &db, model)?;

    let mut steps = Vec::with_capacity(cfg.tasks.len());
    for (task_index, &kind) in cfg.tasks.iter().enumerate() {
        let task_seeds = seeds.child(task_index as u64 + 1);
        let acc_t_before = surrogate_accuracy(&test, &db, model)?;
        let mut migrations = vec![];
        let classes = match kind {
            TaskKind::Cil(n) => learn(&mut db, n)?,
            TaskKind::Mu(n) => {
                let mut rng = task_seeds.fork(0);
                let mut retained: Vec<ClassId> = db.cil().labels().collect();
                if (n as usize) > retained.len() {
                    return Err(Error::InvalidWorkload(
                        "MU task removes more classes than are retained",
                    ));
                }
                retained.shuffle(&mut rng);
                let targets: Vec<ClassId> = retained.into_iter().take(n as usize).collect();
                for &target in &targets {
                    let exemplars =
                        sample_exemplars(&train_by_class[&target], cfg.exemplars, &mut rng);
                    let request = UnlearnRequest::new(exemplars, cfg.knn_k)?;
                    migrations.push(unlearn(&mut db, &request)?);
                }
                targets
            }
        };

        let eval_set: Vec<LabeledSample> =
            learned_samples(&test, &db).into_iter().cloned().collect();
        let labelled: Vec<_> = eval_set
            .iter()
            .map(|s| (s.vector.clone(), db.mu().has_label(s.label)))
            .collect();
        let filter = sweep_threshold(
            db.mu(),
            &labelled,
            &[cfg.pipeline.threshold],
            cfg.pipeline.filter_mode,
        )?
        .rows[0];

        let mut reports = BTreeMap::new();
        for (i, strategy) in StrategyKind::ALL.into_iter().enumerate() {
            let pipeline = PipelineConfig {
                strategy,
                ..cfg.pipeline
            };
            let report = evaluate(
                &eval_set,
                &db,
                &pipeline,
                model,
                task_seeds.child(i as u64 + 1),
            )?;
            reports.insert(strategy, report);
        }
        steps.push(ProtocolStep {
            task_index,
            kind,
            classes,
            migrations,
            acc_t_before,
            learned_classes: db.learned_labels().len(),
            filter,
            reports,
        });
    }
    Ok(ProtocolRun {
        acc_t,
        steps,
        db,
        held_out: test,
    })
}
