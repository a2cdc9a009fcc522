//! Inference: filter an input against DB-MU, answer retained-class inputs
//! with a surrogate classifier and apply an output strategy to flagged ones.

use alloc::collections::BTreeMap;
use alloc::vec::Vec;
use core::fmt;
use core::str::FromStr;

use rand::distr::weighted::WeightedIndex;
use rand::distr::Distribution;
use rand::Rng as _;

use crate::error::{Error, Result};
use crate::rng::Rng;
use crate::store::{Databases, VectorStore};
use crate::unlearn::{membership_filter, FilterMode, DEFAULT_THRESHOLD};
use crate::vector::{check_dim, cosine_to_slice, ClassId, Embedding, RecordId};

/// Floor applied to cosine similarities before they are used as weights.
pub const INVERSE_EPSILON: f64 = 1e-6;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Default)]
pub enum StrategyKind {
    UniformRandom,
    ProportionalToCounts,
    InverseToDistance,
    #[default]
    ShiftToNearest,
}

impl StrategyKind {
    pub const ALL: [StrategyKind; 4] = [
        StrategyKind::UniformRandom,
        StrategyKind::ProportionalToCounts,
        StrategyKind::InverseToDistance,
        StrategyKind::ShiftToNearest,
    ];

    pub fn as_str(&self) -> &'static str {
        match self {
            StrategyKind::UniformRandom => "uniform",
            StrategyKind::ProportionalToCounts => "proportional",
            StrategyKind::InverseToDistance => "inverse",
            StrategyKind::ShiftToNearest => "nearest",
        }
    }

    pub fn is_deterministic(&self) -> bool {
        matches!(self, StrategyKind::ShiftToNearest)
    }
}

impl fmt::Display for StrategyKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for StrategyKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Ok(match s {
            "uniform" => StrategyKind::UniformRandom,
            "proportional" => StrategyKind::ProportionalToCounts,
            "inverse" => StrategyKind::InverseToDistance,
            "nearest" => StrategyKind::ShiftToNearest,
            _ => return Err(Error::InvalidArgument("unknown strategy")),
        })
    }
}

/// How cosine similarity maps to a weight in [`strategy_inverse`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum InverseWeighting {
    /// `w = 1 / max(cos, eps)`: closer centroids are drawn less often.
    #[default]
    Reciprocal,
    /// `w = max(cos, eps)`: closer centroids are drawn more often.
    Direct,
}

impl InverseWeighting {
    pub fn as_str(&self) -> &'static str {
        match self {
            InverseWeighting::Reciprocal => "reciprocal",
            InverseWeighting::Direct => "direct",
        }
    }
}

impl FromStr for InverseWeighting {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "reciprocal" => Ok(InverseWeighting::Reciprocal),
            "direct" => Ok(InverseWeighting::Direct),
            _ => Err(Error::InvalidArgument("unknown inverse weighting")),
        }
    }
}

/// Uniform draw over `n_classes` labels `0..n_classes`.
pub fn strategy_uniform(n_classes: usize, rng: &mut Rng) -> Result<ClassId> {
    if n_classes == 0 {
        return Err(Error::InvalidArgument(
            "uniform strategy needs at least one class",
        ));
    }
    let n = u32::try_from(n_classes).map_err(|_| Error::InvalidArgument("too many classes"))?;
    Ok(ClassId(rng.random_range(0..n)))
}

/// Uniform draw over an explicit class universe.
pub fn choose_uniform(universe: &[ClassId], rng: &mut Rng) -> Result<ClassId> {
    let ClassId(i) = strategy_uniform(universe.len(), rng)?;
    Ok(universe[i as usize])
}

/// Draws class `i` with probability `n_i / sum(n)`.
pub fn strategy_proportional(counts: &BTreeMap<ClassId, usize>, rng: &mut Rng) -> Result<ClassId> {
    if counts.is_empty() {
        return Err(Error::InvalidArgument(
            "proportional strategy needs class counts",
        ));
    }
    if counts.values().any(|&n| n == 0) {
        return Err(Error::InvalidArgument("class counts must be positive"));
    }
    let labels: Vec<ClassId> = counts.keys().copied().collect();
    let dist = WeightedIndex::new(counts.values().map(|&n| n as u64))
        .map_err(|_| Error::InvalidArgument("invalid class counts"))?;
    Ok(labels[dist.sample(rng)])
}

/// Normalised draw probabilities used by [`strategy_inverse`], in label order.
pub fn inverse_probabilities<C: AsRef<[f64]>>(
    v_f: &Embedding,
    centroids: &BTreeMap<ClassId, C>,
    weighting: InverseWeighting,
) -> Result<Vec<(ClassId, f64)>> {
    if centroids.is_empty() {
        return Err(Error::InvalidArgument("inverse strategy needs centroids"));
    }
    let mut weights = Vec::with_capacity(centroids.len());
    for (&label, c) in centroids {
        let cos = cosine_to_slice(v_f, c.as_ref())?.max(INVERSE_EPSILON);
        let w = match weighting {
            InverseWeighting::Reciprocal => 1.0 / cos,
            InverseWeighting::Direct => cos,
        };
        weights.push((label, w));
    }
    let total: f64 = weights.iter().map(|(_, w)| w).sum();
    Ok(weights.into_iter().map(|(l, w)| (l, w / total)).collect())
}

pub fn strategy_inverse<C: AsRef<[f64]>>(
    v_f: &Embedding,
    centroids: &BTreeMap<ClassId, C>,
    weighting: InverseWeighting,
    rng: &mut Rng,
) -> Result<ClassId> {
    let probs = inverse_probabilities(v_f, centroids, weighting)?;
    let dist = WeightedIndex::new(probs.iter().map(|(_, p)| *p))
        .map_err(|_| Error::InvalidArgument("invalid centroid weights"))?;
    Ok(probs[dist.sample(rng)].0)
}

/// Label of the centroid with the highest cosine similarity; lower id on ties.
pub fn strategy_nearest<C: AsRef<[f64]>>(
    v_f: &Embedding,
    centroids: &BTreeMap<ClassId, C>,
) -> Result<ClassId> {
    let mut best: Option<(ClassId, f64)> = None;
    for (&label, c) in centroids {
        let cos = cosine_to_slice(v_f, c.as_ref())?;
        if best.is_none_or(|(_, b)| cos > b) {
            best = Some((label, cos));
        }
    }
    best.map(|(l, _)| l)
        .ok_or(Error::InvalidArgument("nearest strategy needs centroids"))
}

/// An input to the inference pipeline. The id is only needed by surrogates
/// that look up precomputed predictions.
#[derive(Debug, Clone, Copy)]
pub struct Query<'a> {
    pub id: Option<RecordId>,
    pub vector: &'a Embedding,
}

impl<'a> Query<'a> {
    pub fn new(vector: &'a Embedding) -> Self {
        Self { id: None, vector }
    }

    pub fn with_id(id: RecordId, vector: &'a Embedding) -> Self {
        Self {
            id: Some(id),
            vector,
        }
    }
}

/// Stand-in for the trained classifier. Answers are always labels resident
/// in DB-CIL.
pub trait SurrogateModel {
    fn classify(&self, query: &Query<'_>, db_cil: &VectorStore) -> Result<ClassId>;
}

/// Nearest class centroid in DB-CIL.
#[derive(Debug, Clone, Copy, Default)]
pub struct NearestCentroid;

impl SurrogateModel for NearestCentroid {
    fn classify(&self, query: &Query<'_>, db_cil: &VectorStore) -> Result<ClassId> {
        if db_cil.is_empty() {
            return Err(Error::EmptyStore);
        }
        strategy_nearest(query.vector, &db_cil.centroids())
    }
}

/// Externally computed predictions keyed by record id.
///
/// A recorded label that is no longer resident in DB-CIL is replaced by the
/// nearest retained centroid.
#[derive(Debug, Clone, Default)]
pub struct PredictionTable {
    predictions: BTreeMap<RecordId, ClassId>,
}

impl PredictionTable {
    pub fn new(predictions: BTreeMap<RecordId, ClassId>) -> Self {
        Self { predictions }
    }

    pub fn len(&self) -> usize {
        self.predictions.len()
    }

    pub fn is_empty(&self) -> bool {
        self.predictions.is_empty()
    }
}

impl FromIterator<(RecordId, ClassId)> for PredictionTable {
    fn from_iter<I: IntoIterator<Item = (RecordId, ClassId)>>(iter: I) -> Self {
        Self {
            predictions: iter.into_iter().collect(),
        }
    }
}

impl SurrogateModel for PredictionTable {
    fn classify(&self, query: &Query<'_>, db_cil: &VectorStore) -> Result<ClassId> {
        let id = query
            .id
            .ok_or(Error::InvalidArgument("prediction table needs record ids"))?;
        let label = *self
            .predictions
            .get(&id)
            .ok_or(Error::InvalidArgument("no recorded prediction for record"))?;
        if db_cil.has_label(label) {
            Ok(label)
        } else {
            NearestCentroid.classify(query, db_cil)
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PipelineConfig {
    pub threshold: f64,
    pub strategy: StrategyKind,
    pub filter_mode: FilterMode,
    pub inverse_weighting: InverseWeighting,
}

impl Default for PipelineConfig {
    fn default() -> Self {
        Self {
            threshold: DEFAULT_THRESHOLD,
            strategy: StrategyKind::default(),
            filter_mode: FilterMode::default(),
            inverse_weighting: InverseWeighting::default(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Prediction {
    pub label: ClassId,
    /// Filter verdict: the input was judged to belong to an unlearned class.
    pub flagged: bool,
    /// Present exactly when `flagged`.
    pub strategy_used: Option<StrategyKind>,
}

/// Runs one input through the filter and either the surrogate or the
/// configured output strategy.
///
/// Uniform draws cover every learned class (DB-CIL and DB-MU labels);
/// the proportional, inverse and nearest strategies draw from DB-CIL only.
pub fn predict(
    query: &Query<'_>,
    db: &Databases,
    config: &PipelineConfig,
    model: &dyn SurrogateModel,
    rng: &mut Rng,
) -> Result<Prediction> {
    if let Some(d) = db.dim() {
        check_dim(d, query.vector.dim())?;
    }
    if !membership_filter(db.mu(), query.vector, config.threshold, config.filter_mode)? {
        return Ok(Prediction {
            label: model.classify(query, db.cil())?,
            flagged: false,
            strategy_used: None,
        });
    }
    let v = query.vector;
    let label = match config.strategy {
        StrategyKind::UniformRandom => choose_uniform(&db.learned_labels(), rng)?,
        StrategyKind::ProportionalToCounts => strategy_proportional(&db.cil().class_counts(), rng)?,
        StrategyKind::InverseToDistance => {
            strategy_inverse(v, &db.cil().centroids(), config.inverse_weighting, rng)?
        }
        StrategyKind::ShiftToNearest => strategy_nearest(v, &db.cil().centroids())?,
    };
    Ok(Prediction {
        label,
        flagged: true,
        strategy_used: Some(config.strategy),
    })
}
