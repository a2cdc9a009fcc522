//! Discrete-event model of CIL/MU task streams under three ways of handling
//! unlearning requests.
//!
//! * [`Method::Retrain`]: every MU task retrains from scratch on all classes
//!   still retained. CIL tasks train only the new classes.
//! * [`Method::RestoreResume`]: a checkpoint is saved after the initial
//!   training and after each CIL task. An MU task restores the newest
//!   checkpoint that predates every removed class and re-runs the later CIL
//!   tasks on their remaining classes. When the removed class belongs to the
//!   initial training no checkpoint predates it and training starts over.
//! * [`Method::Ecilmu`]: CIL tasks train on the trainer lane and then embed
//!   their classes into DB-CIL on the embedder lane; the next task waits for
//!   that embedding. MU tasks only embed and migrate on the embedder lane,
//!   and the next task may start as soon as the embedding is done.
//!
//! Costs are linear in class counts. MU tasks remove the most recently
//! learned classes still retained.

use alloc::vec::Vec;
use core::fmt;
use core::str::FromStr;

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum TaskKind {
    /// Learn this many new classes.
    Cil(u32),
    /// Unlearn this many classes.
    Mu(u32),
}

impl TaskKind {
    pub fn classes(&self) -> u32 {
        match *self {
            TaskKind::Cil(n) | TaskKind::Mu(n) => n,
        }
    }
}

impl fmt::Display for TaskKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            TaskKind::Cil(n) => write!(f, "CIL-{n}"),
            TaskKind::Mu(n) => write!(f, "MU-{n}"),
        }
    }
}

impl FromStr for TaskKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        let (kind, n) = s
            .split_once('-')
            .ok_or(Error::InvalidWorkload("task must look like CIL-n or MU-n"))?;
        let n: u32 = n
            .parse()
            .map_err(|_| Error::InvalidWorkload("task class count is not an integer"))?;
        match kind.to_ascii_uppercase().as_str() {
            "CIL" => Ok(TaskKind::Cil(n)),
            "MU" => Ok(TaskKind::Mu(n)),
            _ => Err(Error::InvalidWorkload("task kind must be CIL or MU")),
        }
    }
}

/// Durations in seconds.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CostModel {
    pub train_per_class: f64,
    pub embed_per_class: f64,
    pub migrate_per_class: f64,
    pub checkpoint_save: f64,
    pub restore: f64,
}

impl Default for CostModel {
    /// Fitted to the aggregate times of a 5-class initialisation followed by
    /// MU-1, CIL-1, MU-1, CIL-1 on a single GPU.
    fn default() -> Self {
        Self {
            train_per_class: 640.0,
            embed_per_class: 32.0,
            migrate_per_class: 72.0,
            checkpoint_save: 15.0,
            restore: 16.0,
        }
    }
}

impl CostModel {
    pub fn validate(&self) -> Result<()> {
        let all = [
            self.train_per_class,
            self.embed_per_class,
            self.migrate_per_class,
            self.checkpoint_save,
            self.restore,
        ];
        if all.iter().all(|c| c.is_finite() && *c >= 0.0) {
            Ok(())
        } else {
            Err(Error::InvalidArgument(
                "costs must be finite and non-negative",
            ))
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Method {
    Retrain,
    RestoreResume,
    Ecilmu,
}

impl Method {
    pub const ALL: [Method; 3] = [Method::Retrain, Method::RestoreResume, Method::Ecilmu];

    pub fn as_str(&self) -> &'static str {
        match self {
            Method::Retrain => "retrain",
            Method::RestoreResume => "restore-resume",
            Method::Ecilmu => "ecil-mu",
        }
    }
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Method {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "retrain" => Ok(Method::Retrain),
            "restore-resume" | "restore" => Ok(Method::RestoreResume),
            "ecil-mu" | "ecilmu" => Ok(Method::Ecilmu),
            _ => Err(Error::InvalidArgument("unknown method")),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Lane {
    Trainer,
    Embedder,
}

impl Lane {
    pub fn as_str(&self) -> &'static str {
        match self {
            Lane::Trainer => "trainer",
            Lane::Embedder => "embedder",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Interval {
    pub task_index: usize,
    pub kind: TaskKind,
    pub lane: Lane,
    pub start: f64,
    pub end: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Timeline {
    pub method: Method,
    /// Ordered by task, then lane.
    pub intervals: Vec<Interval>,
    pub makespan: f64,
}

impl Timeline {
    pub fn lane(&self, lane: Lane) -> impl Iterator<Item = &Interval> + '_ {
        self.intervals.iter().filter(move |i| i.lane == lane)
    }
}

/// Which classes are learned and where they came from.
///
/// Segment 0 is the initial training; segment `k > 0` is the k-th CIL task.
/// Each entry counts the classes of that segment still retained.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SimState {
    retained_per_segment: Vec<u32>,
}

impl SimState {
    pub fn with_history(initial_classes: u32) -> Self {
        Self {
            retained_per_segment: alloc::vec![initial_classes],
        }
    }

    pub fn retained(&self) -> u32 {
        self.retained_per_segment.iter().sum()
    }

    fn learn(&mut self, n: u32) {
        self.retained_per_segment.push(n);
    }

    /// Removes the `n` newest retained classes and returns the oldest segment
    /// touched.
    fn unlearn(&mut self, mut n: u32) -> Result<usize> {
        if n > self.retained() {
            return Err(Error::InvalidWorkload(
                "MU task removes more classes than are retained",
            ));
        }
        let mut oldest = self.retained_per_segment.len() - 1;
        for (i, seg) in self.retained_per_segment.iter_mut().enumerate().rev() {
            if n == 0 {
                break;
            }
            let take = n.min(*seg);
            if take > 0 {
                *seg -= take;
                n -= take;
                oldest = i;
            }
        }
        Ok(oldest)
    }
}

/// Simulates `workload` starting from `initial_classes` learned classes.
pub fn simulate(
    workload: &[TaskKind],
    model: &CostModel,
    method: Method,
    initial_classes: u32,
) -> Result<Timeline> {
    simulate_from(
        workload,
        model,
        method,
        &SimState::with_history(initial_classes),
    )
    .map(|(t, _)| t)
}

/// Simulates `workload` from an arbitrary state, returning the state after
/// the last task.
pub fn simulate_from(
    workload: &[TaskKind],
    model: &CostModel,
    method: Method,
    state: &SimState,
) -> Result<(Timeline, SimState)> {
    if workload.is_empty() {
        return Err(Error::InvalidWorkload("workload is empty"));
    }
    if workload.iter().any(|t| t.classes() == 0) {
        return Err(Error::InvalidWorkload(
            "tasks must add or remove at least one class",
        ));
    }
    model.validate()?;

    let mut state = state.clone();
    let mut intervals = Vec::with_capacity(workload.len() * 2);
    match method {
        Method::Retrain | Method::RestoreResume => {
            let mut now = 0.0;
            for (task_index, &kind) in workload.iter().enumerate() {
                let cost = serial_cost(kind, model, method, &mut state)?;
                intervals.push(Interval {
                    task_index,
                    kind,
                    lane: Lane::Trainer,
                    start: now,
                    end: now + cost,
                });
                now += cost;
            }
        }
        Method::Ecilmu => {
            let (mut ready, mut trainer_free, mut embedder_free) = (0.0f64, 0.0f64, 0.0f64);
            for (task_index, &kind) in workload.iter().enumerate() {
                match kind {
                    TaskKind::Cil(n) => {
                        state.learn(n);
                        let n = f64::from(n);
                        let start = ready.max(trainer_free);
                        let trained = start + model.train_per_class * n;
                        let embed_start = trained.max(embedder_free);
                        let embedded = embed_start + model.embed_per_class * n;
                        intervals.push(Interval {
                            task_index,
                            kind,
                            lane: Lane::Trainer,
                            start,
                            end: trained,
                        });
                        intervals.push(Interval {
                            task_index,
                            kind,
                            lane: Lane::Embedder,
                            start: embed_start,
                            end: embedded,
                        });
                        trainer_free = trained;
                        embedder_free = embedded;
                        ready = embedded;
                    }
                    TaskKind::Mu(n) => {
                        state.unlearn(n)?;
                        let n = f64::from(n);
                        let start = ready.max(embedder_free);
                        let embedded = start + model.embed_per_class * n;
                        let migrated = embedded + model.migrate_per_class * n;
                        intervals.push(Interval {
                            task_index,
                            kind,
                            lane: Lane::Embedder,
                            start,
                            end: migrated,
                        });
                        embedder_free = migrated;
                        ready = embedded;
                    }
                }
            }
        }
    }
    let makespan = intervals.iter().map(|i| i.end).fold(0.0, f64::max);
    Ok((
        Timeline {
            method,
            intervals,
            makespan,
        },
        state,
    ))
}

fn serial_cost(
    kind: TaskKind,
    model: &CostModel,
    method: Method,
    state: &mut SimState,
) -> Result<f64> {
    let t = model.train_per_class;
    Ok(match (method, kind) {
        (Method::Retrain, TaskKind::Cil(n)) => {
            state.learn(n);
            t * f64::from(n)
        }
        (Method::Retrain, TaskKind::Mu(n)) => {
            state.unlearn(n)?;
            t * f64::from(state.retained())
        }
        (Method::RestoreResume, TaskKind::Cil(n)) => {
            state.learn(n);
            t * f64::from(n) + model.checkpoint_save
        }
        (Method::RestoreResume, TaskKind::Mu(n)) => {
            let oldest = state.unlearn(n)?;
            let segs = &state.retained_per_segment;
            let mut cost = if oldest == 0 {
                // nothing predates the initial classes: train them again
                t * f64::from(segs[0])
            } else {
                model.restore
            };
            for &remaining in &segs[oldest.max(1)..] {
                if remaining > 0 {
                    cost += t * f64::from(remaining) + model.checkpoint_save;
                }
            }
            cost
        }
        (Method::Ecilmu, _) => unreachable!("scheduled on two lanes"),
    })
}

/// `makespan(baseline) / makespan(candidate)`.
pub fn speedup(
    workload: &[TaskKind],
    model: &CostModel,
    baseline: Method,
    candidate: Method,
    initial_classes: u32,
) -> Result<f64> {
    let base = simulate(workload, model, baseline, initial_classes)?.makespan;
    let cand = simulate(workload, model, candidate, initial_classes)?.makespan;
    if cand <= 0.0 {
        return Err(Error::DegenerateModel("candidate makespan is zero"));
    }
    Ok(base / cand)
}

/// Named workloads.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Preset {
    /// 5 initial classes, then MU-1, CIL-1, MU-1, CIL-1.
    Cifar10,
    /// The CIL tasks of [`Preset::Cifar10`] alone.
    Cifar10CilOnly,
    /// 50 initial classes, then 8 x MU-1.
    Mu8,
    /// 50 initial classes, then 8 x CIL-1.
    Cil8,
    /// 50 initial classes, then 4 x (CIL-1, MU-1).
    Mix8,
}

impl Preset {
    pub const ALL: [Preset; 5] = [
        Preset::Cifar10,
        Preset::Cifar10CilOnly,
        Preset::Mu8,
        Preset::Cil8,
        Preset::Mix8,
    ];

    pub fn as_str(&self) -> &'static str {
        match self {
            Preset::Cifar10 => "cifar10",
            Preset::Cifar10CilOnly => "cifar10-cil",
            Preset::Mu8 => "mu8",
            Preset::Cil8 => "cil8",
            Preset::Mix8 => "mix8",
        }
    }

    pub fn initial_classes(&self) -> u32 {
        match self {
            Preset::Cifar10 | Preset::Cifar10CilOnly => 5,
            Preset::Mu8 | Preset::Cil8 | Preset::Mix8 => 50,
        }
    }

    pub fn workload(&self) -> Vec<TaskKind> {
        use TaskKind::{Cil, Mu};
        match self {
            Preset::Cifar10 => alloc::vec![Mu(1), Cil(1), Mu(1), Cil(1)],
            Preset::Cifar10CilOnly => alloc::vec![Cil(1), Cil(1)],
            Preset::Mu8 => alloc::vec![Mu(1); 8],
            Preset::Cil8 => alloc::vec![Cil(1); 8],
            Preset::Mix8 => [Cil(1), Mu(1)].repeat(4),
        }
    }
}

impl FromStr for Preset {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Preset::ALL
            .into_iter()
            .find(|p| p.as_str() == s)
            .ok_or(Error::InvalidWorkload("unknown workload preset"))
    }
}

/// Parses a comma-separated task list such as `MU-1,CIL-1`.
pub fn parse_workload(s: &str) -> Result<Vec<TaskKind>> {
    s.split(',')
        .filter(|t| !t.trim().is_empty())
        .map(str::parse)
        .collect()
}
