//! Unlearning requests, the cosine-threshold membership filter and
//! threshold calibration.

use alloc::collections::BTreeMap;
use alloc::vec::Vec;
use core::fmt;
use core::str::FromStr;

use rand::seq::IndexedRandom;

use crate::error::{Error, Result};
use crate::rng::Rng;
use crate::store::{pick_winner, Databases, VectorStore};
use crate::vector::{check_dim, cosine_to_slice, ClassId, Embedding, VectorRecord};

/// KNN fan-out used when identifying the class of an unlearning request.
pub const DEFAULT_K: usize = 100;
/// Membership filter threshold.
pub const DEFAULT_THRESHOLD: f64 = 0.77;
/// Identification needs a strict majority of exemplar votes above this
/// fraction to be considered confident.
pub const DEFAULT_MIN_VOTE_FRACTION: f64 = 0.5;

#[derive(Debug, Clone)]
pub struct UnlearnRequest {
    exemplars: Vec<Embedding>,
    k: usize,
    min_vote_fraction: f64,
}

impl UnlearnRequest {
    pub fn new(exemplars: Vec<Embedding>, k: usize) -> Result<Self> {
        let Some(first) = exemplars.first() else {
            return Err(Error::InvalidArgument(
                "unlearn request needs at least one exemplar",
            ));
        };
        if k == 0 {
            return Err(Error::InvalidArgument("k must be positive"));
        }
        let dim = first.dim();
        for e in &exemplars {
            check_dim(dim, e.dim())?;
        }
        Ok(Self {
            exemplars,
            k,
            min_vote_fraction: DEFAULT_MIN_VOTE_FRACTION,
        })
    }

    pub fn with_min_vote_fraction(mut self, fraction: f64) -> Result<Self> {
        if !(0.0..=1.0).contains(&fraction) {
            return Err(Error::InvalidArgument("vote fraction must lie in [0, 1]"));
        }
        self.min_vote_fraction = fraction;
        Ok(self)
    }

    pub fn exemplars(&self) -> &[Embedding] {
        &self.exemplars
    }

    pub fn k(&self) -> usize {
        self.k
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Identification {
    pub label: ClassId,
    /// Per-exemplar KNN verdicts.
    pub votes: BTreeMap<ClassId, usize>,
    pub unanimous: bool,
    /// Share of exemplars that voted for `label`.
    pub vote_fraction: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct MigrationReport {
    pub identified_label: ClassId,
    pub votes: BTreeMap<ClassId, usize>,
    pub moved: usize,
    pub unanimous: bool,
    pub vote_fraction: f64,
    /// Set when the winning label did not clear the request's vote fraction.
    pub low_confidence: bool,
}

/// Classifies each exemplar against DB-CIL and takes the majority verdict.
///
/// Ties between labels go to the higher total similarity of the exemplar
/// votes, then to the lower class id.
pub fn identify_class(db_cil: &VectorStore, request: &UnlearnRequest) -> Result<Identification> {
    if db_cil.is_empty() {
        return Err(Error::EmptyStore);
    }
    let mut tally: BTreeMap<ClassId, (usize, f64)> = BTreeMap::new();
    for exemplar in &request.exemplars {
        let vote = db_cil.knn_vote(exemplar, request.k)?;
        let e = tally.entry(vote.label).or_insert((0, 0.0));
        e.0 += 1;
        e.1 += vote.similarity_sum;
    }
    let votes: BTreeMap<ClassId, usize> = tally.iter().map(|(l, (n, _))| (*l, *n)).collect();
    let (label, (count, _)) = pick_winner(tally).expect("at least one exemplar");
    Ok(Identification {
        label,
        unanimous: votes.len() == 1,
        vote_fraction: count as f64 / request.exemplars.len() as f64,
        votes,
    })
}

/// Identifies the requested class in DB-CIL and migrates it to DB-MU.
///
/// A low-confidence identification still migrates; the report flags it.
pub fn unlearn(db: &mut Databases, request: &UnlearnRequest) -> Result<MigrationReport> {
    let id = identify_class(db.cil(), request)?;
    let moved = db.migrate_class(id.label)?;
    Ok(MigrationReport {
        identified_label: id.label,
        low_confidence: id.vote_fraction <= request.min_vote_fraction,
        votes: id.votes,
        moved,
        unanimous: id.unanimous,
        vote_fraction: id.vote_fraction,
    })
}

/// Draws up to `n` distinct vectors from `pool` without replacement.
pub fn sample_exemplars(pool: &[VectorRecord], n: usize, rng: &mut Rng) -> Vec<Embedding> {
    pool.choose_multiple(rng, n.min(pool.len()))
        .map(|r| r.vector.clone())
        .collect()
}

/// What an input is compared against in DB-MU.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum FilterMode {
    /// Every resident DB-MU record.
    #[default]
    RecordMax,
    /// DB-MU class centroids only.
    Centroid,
}

impl FilterMode {
    pub fn as_str(&self) -> &'static str {
        match self {
            FilterMode::RecordMax => "record-max",
            FilterMode::Centroid => "centroid",
        }
    }
}

impl fmt::Display for FilterMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for FilterMode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "record-max" => Ok(FilterMode::RecordMax),
            "centroid" => Ok(FilterMode::Centroid),
            _ => Err(Error::InvalidArgument(
                "filter mode must be record-max or centroid",
            )),
        }
    }
}

/// Highest similarity between `v_in` and DB-MU under `mode`; `None` when
/// DB-MU is empty.
pub fn unlearned_similarity(
    db_mu: &VectorStore,
    v_in: &Embedding,
    mode: FilterMode,
) -> Result<Option<f64>> {
    match mode {
        FilterMode::RecordMax => db_mu.max_similarity(v_in),
        FilterMode::Centroid => {
            db_mu.check_query(v_in)?;
            let mut best: Option<f64> = None;
            for summary in db_mu.summaries() {
                let c = cosine_to_slice(v_in, summary.centroid())?;
                best = Some(best.map_or(c, |b| b.max(c)));
            }
            Ok(best)
        }
    }
}

/// `true` when `v_in` is judged to belong to an unlearned class, i.e. its
/// similarity to DB-MU reaches `threshold`. An empty DB-MU flags nothing.
pub fn membership_filter(
    db_mu: &VectorStore,
    v_in: &Embedding,
    threshold: f64,
    mode: FilterMode,
) -> Result<bool> {
    if threshold.is_nan() {
        return Err(Error::InvalidArgument("threshold is NaN"));
    }
    Ok(unlearned_similarity(db_mu, v_in, mode)?.is_some_and(|m| m >= threshold))
}

/// Confusion counts at one threshold.
///
/// Positive means a retained-class input passing the filter unflagged.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CalibrationRow {
    pub threshold: f64,
    pub tp: usize,
    pub fp: usize,
    pub tn: usize,
    pub fn_: usize,
}

impl CalibrationRow {
    /// `TP / (TP + FN)`; `None` without retained inputs.
    pub fn recall(&self) -> Option<f64> {
        ratio(self.tp, self.tp + self.fn_)
    }

    /// `TN / (FP + TN)`; `None` without unlearned inputs.
    pub fn specificity(&self) -> Option<f64> {
        ratio(self.tn, self.fp + self.tn)
    }
}

fn ratio(num: usize, den: usize) -> Option<f64> {
    (den > 0).then(|| num as f64 / den as f64)
}

#[derive(Debug, Clone, PartialEq)]
pub struct FilterCalibration {
    pub rows: Vec<CalibrationRow>,
}

impl FilterCalibration {
    /// Threshold maximising `recall + specificity`, lowest one on ties.
    pub fn best_threshold(&self) -> Option<f64> {
        let mut best: Option<(f64, f64)> = None;
        for row in &self.rows {
            let (Some(r), Some(s)) = (row.recall(), row.specificity()) else {
                continue;
            };
            let j = r + s;
            if best.is_none_or(|(_, bj)| j > bj) {
                best = Some((row.threshold, j));
            }
        }
        best.map(|(t, _)| t)
    }

    pub fn row_at(&self, threshold: f64) -> Option<&CalibrationRow> {
        self.rows.iter().find(|r| r.threshold == threshold)
    }
}

/// Tallies filter outcomes on labelled inputs for each threshold in `grid`.
///
/// `inputs` pairs each embedding with whether its true class is unlearned.
pub fn sweep_threshold(
    db_mu: &VectorStore,
    inputs: &[(Embedding, bool)],
    grid: &[f64],
    mode: FilterMode,
) -> Result<FilterCalibration> {
    if grid.is_empty() {
        return Err(Error::InvalidArgument("threshold grid is empty"));
    }
    if inputs.is_empty() {
        return Err(Error::InvalidArgument("no labelled inputs"));
    }
    if grid.iter().any(|s| s.is_nan()) || grid.windows(2).any(|w| w[0] > w[1]) {
        return Err(Error::InvalidArgument(
            "threshold grid must be sorted ascending",
        ));
    }

    // The filter is a comparison against one similarity per input, so the
    // similarity is computed once and reused for every threshold.
    let scored = inputs
        .iter()
        .map(|(v, unlearned)| Ok((unlearned_similarity(db_mu, v, mode)?, *unlearned)))
        .collect::<Result<Vec<_>>>()?;

    let rows = grid
        .iter()
        .map(|&threshold| {
            let mut row = CalibrationRow {
                threshold,
                tp: 0,
                fp: 0,
                tn: 0,
                fn_: 0,
            };
            for &(sim, unlearned) in &scored {
                let flagged = sim.is_some_and(|m| m >= threshold);
                match (unlearned, flagged) {
                    (false, false) => row.tp += 1,
                    (false, true) => row.fn_ += 1,
                    (true, true) => row.tn += 1,
                    (true, false) => row.fp += 1,
                }
            }
            row
        })
        .collect();
    Ok(FilterCalibration { rows })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::store::StoreName;
    use crate::vector::{RecordId, VectorRecord};
    use alloc::vec;

    fn emb(v: &[f64]) -> Embedding {
        Embedding::new(v.to_vec()).unwrap()
    }

    fn rec(id: i64, label: u32, v: &[f64]) -> VectorRecord {
        VectorRecord::new(RecordId(id), ClassId(label), emb(v))
    }

    fn three_class_db() -> Databases {
        let mut db = Databases::new();
        let dirs = [[1.0, 0.0, 0.0], [0.0, 1.0, 0.0], [0.0, 0.0, 1.0]];
        let mut id = 0;
        for (label, d) in dirs.iter().enumerate() {
            for j in 0..5 {
                let mut v = *d;
                v[(label + 1) % 3] += 0.01 * j as f64;
                db.insert(rec(id, label as u32, &v)).unwrap();
                id += 1;
            }
        }
        db
    }

    #[test]
    fn identify_examples() {
        let db = three_class_db();
        let req = UnlearnRequest::new(vec![emb(&[0.0, 1.0, 0.0])], 3).unwrap();
        let id = identify_class(db.cil(), &req).unwrap();
        assert_eq!(id.label, ClassId(1));
        assert!(id.unanimous);

        let mut ex = vec![emb(&[1.0, 0.0, 0.02]); 6];
        ex.extend(vec![emb(&[0.0, 0.02, 1.0]); 4]);
        let req = UnlearnRequest::new(ex, 3).unwrap();
        let id = identify_class(db.cil(), &req).unwrap();
        assert_eq!(id.label, ClassId(0));
        assert_eq!(id.votes[&ClassId(0)], 6);
        assert_eq!(id.votes[&ClassId(2)], 4);
        assert!(!id.unanimous);
        assert!((id.vote_fraction - 0.6).abs() < 1e-12);
    }

    #[test]
    fn identify_rejects_empty_store_and_bad_requests() {
        let db = Databases::new();
        let req = UnlearnRequest::new(vec![emb(&[1.0])], 1).unwrap();
        assert_eq!(identify_class(db.cil(), &req), Err(Error::EmptyStore));
        assert!(UnlearnRequest::new(vec![], 1).is_err());
        assert!(UnlearnRequest::new(vec![emb(&[1.0])], 0).is_err());
        assert!(UnlearnRequest::new(vec![emb(&[1.0]), emb(&[1.0, 2.0])], 1).is_err());
    }

    #[test]
    fn unlearn_moves_class_and_is_not_repeatable() {
        let mut db = three_class_db();
        let req = UnlearnRequest::new(vec![emb(&[0.0, 0.0, 1.0])], 5).unwrap();
        let report = unlearn(&mut db, &req).unwrap();
        assert_eq!(report.identified_label, ClassId(2));
        assert_eq!(report.moved, 5);
        assert!(report.unanimous && !report.low_confidence);
        assert_eq!(db.cil().labels().count(), 2);
        assert_eq!(db.mu().labels().collect::<Vec<_>>(), [ClassId(2)]);

        // the exemplars now resolve to the nearest retained class, which is
        // migrated as well; a second identical request cannot hit class 2
        let again = unlearn(&mut db, &req).unwrap();
        assert_ne!(again.identified_label, ClassId(2));
    }

    #[test]
    fn unlearn_same_label_twice_fails() {
        let mut db = three_class_db();
        db.migrate_class(ClassId(0)).unwrap();
        assert_eq!(
            db.migrate_class(ClassId(0)),
            Err(Error::MissingClass(ClassId(0)))
        );
    }

    #[test]
    fn low_confidence_is_reported_not_rejected() {
        let db0 = three_class_db();
        let mut db = db0.clone();
        let ex = vec![emb(&[1.0, 0.0, 0.02]), emb(&[0.0, 1.0, 0.02])];
        let req = UnlearnRequest::new(ex, 1).unwrap();
        let report = unlearn(&mut db, &req).unwrap();
        assert!(report.low_confidence);
        assert!(!report.unanimous);
        assert_eq!(report.vote_fraction, 0.5);
    }

    #[test]
    fn filter_examples() {
        let mut mu = VectorStore::new(StoreName::Mu);
        let v = emb(&[0.3, 0.4]);
        assert!(!membership_filter(&mu, &v, 0.77, FilterMode::RecordMax).unwrap());
        assert!(!membership_filter(&mu, &v, 0.0, FilterMode::Centroid).unwrap());

        mu.insert(rec(1, 0, &[0.3, 0.4])).unwrap();
        mu.insert(rec(2, 0, &[0.4, 0.3])).unwrap();
        assert!(membership_filter(&mu, &v, 0.77, FilterMode::RecordMax).unwrap());
        assert!(membership_filter(&mu, &v, 0.77, FilterMode::Centroid).unwrap());

        let orth = emb(&[-0.4, 0.3]);
        assert!(!membership_filter(&mu, &orth, 0.77, FilterMode::RecordMax).unwrap());
        assert!(matches!(
            membership_filter(&mu, &emb(&[1.0, 0.0, 0.0]), 0.77, FilterMode::RecordMax),
            Err(Error::DimensionMismatch { .. })
        ));
    }

    #[test]
    fn sweep_extremes() {
        let mut mu = VectorStore::new(StoreName::Mu);
        mu.insert(rec(1, 0, &[1.0, 0.0])).unwrap();
        let inputs = vec![
            (emb(&[1.0, 0.1]), true),
            (emb(&[1.0, 0.2]), true),
            (emb(&[0.2, 1.0]), false),
            (emb(&[0.1, 1.0]), false),
            (emb(&[0.6, 1.0]), false),
        ];
        let cal =
            sweep_threshold(&mu, &inputs, &[0.0, 0.5, 1.0 + 1e-9], FilterMode::RecordMax).unwrap();
        let lo = cal.rows[0];
        assert_eq!((lo.tp, lo.fn_, lo.tn, lo.fp), (0, 3, 2, 0));
        assert_eq!(lo.recall(), Some(0.0));
        assert_eq!(lo.specificity(), Some(1.0));
        let hi = cal.rows[2];
        assert_eq!(hi.recall(), Some(1.0));
        assert_eq!(hi.specificity(), Some(0.0));
        let mid = cal.rows[1];
        assert_eq!((mid.tp, mid.fn_, mid.tn, mid.fp), (2, 1, 2, 0));
        assert_eq!(cal.best_threshold(), Some(0.5));

        assert!(sweep_threshold(&mu, &inputs, &[], FilterMode::RecordMax).is_err());
        assert!(sweep_threshold(&mu, &[], &[0.5], FilterMode::RecordMax).is_err());
        assert!(sweep_threshold(&mu, &inputs, &[0.6, 0.5], FilterMode::RecordMax).is_err());
    }

    #[test]
    fn undefined_rates_are_absent() {
        let row = CalibrationRow {
            threshold: 0.5,
            tp: 0,
            fp: 0,
            tn: 3,
            fn_: 0,
        };
        assert_eq!(row.recall(), None);
        assert_eq!(row.specificity(), Some(1.0));
    }
}
