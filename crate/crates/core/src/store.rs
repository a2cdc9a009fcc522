//! In-memory vector databases with exact cosine KNN search.
//!
//! Two stores make up the engine state: DB-CIL holds embeddings of the
//! classes the system currently knows, DB-MU holds embeddings of the classes
//! that have been unlearned. Unlearning a class is a migration of all its
//! records from the former to the latter.
//!
//! Every store keeps a [`ClassSummary`] per label (member count and centroid)
//! which is maintained incrementally on each insert and removal.

use alloc::collections::BTreeMap;
use alloc::vec;
use alloc::vec::Vec;
use core::cmp::Ordering;
use core::fmt;

use crate::error::{Error, Result};
use crate::vector::{check_dim, cosine_with_norms, ClassId, Embedding, RecordId, VectorRecord};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum StoreName {
    /// Retained knowledge.
    Cil,
    /// Unlearned knowledge.
    Mu,
}

impl fmt::Display for StoreName {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            StoreName::Cil => "DB-CIL",
            StoreName::Mu => "DB-MU",
        })
    }
}

/// Per-class member count and centroid.
#[derive(Debug, Clone, PartialEq)]
pub struct ClassSummary {
    pub label: ClassId,
    pub count: usize,
    sum: Vec<f64>,
    centroid: Vec<f64>,
}

impl ClassSummary {
    fn new(label: ClassId, dim: usize) -> Self {
        Self {
            label,
            count: 0,
            sum: vec![0.0; dim],
            centroid: vec![0.0; dim],
        }
    }

    pub fn centroid(&self) -> &[f64] {
        &self.centroid
    }

    fn add(&mut self, v: &[f64]) {
        self.count += 1;
        self.sum.iter_mut().zip(v).for_each(|(s, x)| *s += x);
        self.refresh();
    }

    fn sub(&mut self, v: &[f64]) {
        self.count -= 1;
        self.sum.iter_mut().zip(v).for_each(|(s, x)| *s -= x);
        self.refresh();
    }

    fn refresh(&mut self) {
        if self.count == 0 {
            self.centroid.iter_mut().for_each(|c| *c = 0.0);
            return;
        }
        let n = self.count as f64;
        self.centroid
            .iter_mut()
            .zip(&self.sum)
            .for_each(|(c, s)| *c = s / n);
    }
}

/// A KNN hit.
#[derive(Debug, Clone, Copy)]
pub struct Neighbor<'a> {
    pub record: &'a VectorRecord,
    pub similarity: f64,
}

/// Outcome of a KNN majority vote.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Vote {
    pub label: ClassId,
    /// Neighbors carrying the winning label.
    pub count: usize,
    /// Summed similarity of those neighbors.
    pub similarity_sum: f64,
    /// Neighbors actually consulted, `min(k, len)`.
    pub neighbors: usize,
}

/// Descending similarity, then ascending record id.
fn rank_order(a: &(f64, RecordId), b: &(f64, RecordId)) -> Ordering {
    b.0.partial_cmp(&a.0)
        .unwrap_or(Ordering::Equal)
        .then(a.1.cmp(&b.1))
}

#[derive(Debug, Clone, PartialEq)]
pub struct VectorStore {
    name: StoreName,
    dim: Option<usize>,
    records: BTreeMap<RecordId, VectorRecord>,
    summaries: BTreeMap<ClassId, ClassSummary>,
}

impl VectorStore {
    pub fn new(name: StoreName) -> Self {
        Self {
            name,
            dim: None,
            records: BTreeMap::new(),
            summaries: BTreeMap::new(),
        }
    }

    pub fn with_dim(name: StoreName, dim: usize) -> Result<Self> {
        if dim == 0 {
            return Err(Error::InvalidArgument("dimension must be positive"));
        }
        let mut store = Self::new(name);
        store.dim = Some(dim);
        Ok(store)
    }

    pub fn name(&self) -> StoreName {
        self.name
    }

    /// Dimension adopted by the store, `None` until the first insert.
    pub fn dim(&self) -> Option<usize> {
        self.dim
    }

    pub fn len(&self) -> usize {
        self.records.len()
    }

    pub fn is_empty(&self) -> bool {
        self.records.is_empty()
    }

    pub fn contains(&self, id: RecordId) -> bool {
        self.records.contains_key(&id)
    }

    pub fn get(&self, id: RecordId) -> Option<&VectorRecord> {
        self.records.get(&id)
    }

    /// Records in ascending id order.
    pub fn records(&self) -> impl Iterator<Item = &VectorRecord> + '_ {
        self.records.values()
    }

    pub fn labels(&self) -> impl Iterator<Item = ClassId> + '_ {
        self.summaries.keys().copied()
    }

    pub fn has_label(&self, label: ClassId) -> bool {
        self.summaries.contains_key(&label)
    }

    pub fn summaries(&self) -> impl Iterator<Item = &ClassSummary> + '_ {
        self.summaries.values()
    }

    pub fn summary(&self, label: ClassId) -> Option<&ClassSummary> {
        self.summaries.get(&label)
    }

    pub fn class_counts(&self) -> BTreeMap<ClassId, usize> {
        self.summaries
            .values()
            .map(|s| (s.label, s.count))
            .collect()
    }

    pub fn centroids(&self) -> BTreeMap<ClassId, &[f64]> {
        self.summaries
            .values()
            .map(|s| (s.label, s.centroid()))
            .collect()
    }

    pub fn check_query(&self, query: &Embedding) -> Result<()> {
        match self.dim {
            Some(d) => check_dim(d, query.dim()),
            None => Ok(()),
        }
    }

    /// Inserts a record. Only checks id uniqueness within this store; use
    /// [`Databases::insert`] to enforce uniqueness across both stores.
    pub fn insert(&mut self, record: VectorRecord) -> Result<()> {
        self.check_query(&record.vector)?;
        if self.records.contains_key(&record.id) {
            return Err(Error::DuplicateId(record.id));
        }
        self.insert_unchecked(record);
        Ok(())
    }

    fn insert_unchecked(&mut self, record: VectorRecord) {
        let dim = *self.dim.get_or_insert(record.vector.dim());
        self.summaries
            .entry(record.label)
            .or_insert_with(|| ClassSummary::new(record.label, dim))
            .add(record.vector.values());
        self.records.insert(record.id, record);
    }

    pub fn remove(&mut self, id: RecordId) -> Option<VectorRecord> {
        let record = self.records.remove(&id)?;
        let summary = self
            .summaries
            .get_mut(&record.label)
            .expect("summary for resident label");
        summary.sub(record.vector.values());
        if summary.count == 0 {
            self.summaries.remove(&record.label);
        }
        Some(record)
    }

    pub fn centroid_of(&self, label: ClassId) -> Result<&[f64]> {
        self.summaries
            .get(&label)
            .map(ClassSummary::centroid)
            .ok_or(Error::MissingClass(label))
    }

    /// Exact top-`k` by cosine similarity, descending, ties by ascending id.
    pub fn knn(&self, query: &Embedding, k: usize) -> Result<Vec<Neighbor<'_>>> {
        if k == 0 {
            return Err(Error::InvalidArgument("k must be positive"));
        }
        if self.records.is_empty() {
            return Err(Error::EmptyStore);
        }
        self.check_query(query)?;

        let mut scored: Vec<(f64, RecordId)> = self
            .records
            .values()
            .map(|r| (self.similarity_to(query, r), r.id))
            .collect();
        if k < scored.len() {
            scored.select_nth_unstable_by(k - 1, rank_order);
            scored.truncate(k);
        }
        scored.sort_unstable_by(rank_order);

        Ok(scored
            .into_iter()
            .map(|(similarity, id)| Neighbor {
                record: &self.records[&id],
                similarity,
            })
            .collect())
    }

    /// Majority vote over the `k` nearest neighbors; ties go to the higher
    /// summed similarity, then the lower class id.
    pub fn knn_vote(&self, query: &Embedding, k: usize) -> Result<Vote> {
        let neighbors = self.knn(query, k)?;
        let mut tally: BTreeMap<ClassId, (usize, f64)> = BTreeMap::new();
        for n in &neighbors {
            let e = tally.entry(n.record.label).or_insert((0, 0.0));
            e.0 += 1;
            e.1 += n.similarity;
        }
        let (label, (count, similarity_sum)) = pick_winner(tally).expect("knn returned neighbors");
        Ok(Vote {
            label,
            count,
            similarity_sum,
            neighbors: neighbors.len(),
        })
    }

    pub fn knn_classify(&self, query: &Embedding, k: usize) -> Result<ClassId> {
        self.knn_vote(query, k).map(|v| v.label)
    }

    /// Largest cosine similarity between `query` and any resident record.
    pub fn max_similarity(&self, query: &Embedding) -> Result<Option<f64>> {
        self.check_query(query)?;
        Ok(self
            .records
            .values()
            .map(|r| self.similarity_to(query, r))
            .reduce(f64::max))
    }

    #[inline]
    fn similarity_to(&self, query: &Embedding, r: &VectorRecord) -> f64 {
        cosine_with_norms(
            query.values(),
            query.norm(),
            r.vector.values(),
            r.vector.norm(),
        )
    }

    /// Centroids recomputed from the resident records, for consistency checks.
    pub fn recompute_centroids(&self) -> BTreeMap<ClassId, Vec<f64>> {
        let mut acc: BTreeMap<ClassId, (usize, Vec<f64>)> = BTreeMap::new();
        for r in self.records.values() {
            let e = acc
                .entry(r.label)
                .or_insert_with(|| (0, vec![0.0; r.vector.dim()]));
            e.0 += 1;
            e.1.iter_mut()
                .zip(r.vector.values())
                .for_each(|(s, x)| *s += x);
        }
        acc.into_iter()
            .map(|(label, (n, sum))| (label, sum.into_iter().map(|s| s / n as f64).collect()))
            .collect()
    }

    /// Largest relative deviation between cached and recomputed centroids.
    /// Counts must match exactly; a mismatch is reported as infinity.
    pub fn centroid_drift(&self) -> f64 {
        let fresh = self.recompute_centroids();
        if fresh.len() != self.summaries.len() {
            return f64::INFINITY;
        }
        let counted = self.summaries.values().map(|s| s.count).sum::<usize>();
        if counted != self.records.len() {
            return f64::INFINITY;
        }
        let mut worst = 0.0f64;
        for (label, exact) in &fresh {
            let Some(cached) = self.summaries.get(label) else {
                return f64::INFINITY;
            };
            let scale = libm::sqrt(exact.iter().map(|x| x * x).sum::<f64>()).max(f64::MIN_POSITIVE);
            let diff = libm::sqrt(
                exact
                    .iter()
                    .zip(cached.centroid())
                    .map(|(a, b)| (a - b) * (a - b))
                    .sum::<f64>(),
            );
            worst = worst.max(diff / scale);
        }
        worst
    }
}

pub(crate) fn pick_winner(
    tally: BTreeMap<ClassId, (usize, f64)>,
) -> Option<(ClassId, (usize, f64))> {
    // BTreeMap iterates in ascending label order; only a strictly better
    // candidate replaces the current one, so equal candidates keep the lower id.
    tally.into_iter().reduce(|best, cand| {
        let better = cand.1 .0 > best.1 .0 || (cand.1 .0 == best.1 .0 && cand.1 .1 > best.1 .1);
        if better {
            cand
        } else {
            best
        }
    })
}

/// Moves every record labelled `label` from `src` to `dst`, preserving ids.
///
/// All preconditions are checked before either store is touched, so the
/// transition is all-or-nothing.
pub fn migrate_class(
    src: &mut VectorStore,
    dst: &mut VectorStore,
    label: ClassId,
) -> Result<usize> {
    if !src.summaries.contains_key(&label) {
        return Err(Error::MissingClass(label));
    }
    if let (Some(s), Some(d)) = (src.dim, dst.dim) {
        check_dim(d, s)?;
    }
    let moving: Vec<RecordId> = src
        .records
        .values()
        .filter(|r| r.label == label)
        .map(|r| r.id)
        .collect();
    if let Some(&dup) = moving.iter().find(|id| dst.records.contains_key(id)) {
        return Err(Error::DuplicateId(dup));
    }

    src.summaries.remove(&label);
    for id in &moving {
        let record = src.records.remove(id).expect("listed above");
        dst.insert_unchecked(record);
    }
    Ok(moving.len())
}

/// The pair of stores that make up the engine state.
#[derive(Debug, Clone, PartialEq)]
pub struct Databases {
    cil: VectorStore,
    mu: VectorStore,
}

impl Default for Databases {
    fn default() -> Self {
        Self::new()
    }
}

impl Databases {
    pub fn new() -> Self {
        Self {
            cil: VectorStore::new(StoreName::Cil),
            mu: VectorStore::new(StoreName::Mu),
        }
    }

    /// Rebuilds a state from previously saved stores.
    pub fn from_stores(cil: VectorStore, mu: VectorStore) -> Result<Self> {
        if let (Some(a), Some(b)) = (cil.dim, mu.dim) {
            check_dim(a, b)?;
        }
        if let Some(r) = mu.records().find(|r| cil.contains(r.id)) {
            return Err(Error::DuplicateId(r.id));
        }
        Ok(Self {
            cil: VectorStore {
                name: StoreName::Cil,
                ..cil
            },
            mu: VectorStore {
                name: StoreName::Mu,
                ..mu
            },
        })
    }

    pub fn cil(&self) -> &VectorStore {
        &self.cil
    }

    pub fn mu(&self) -> &VectorStore {
        &self.mu
    }

    pub fn dim(&self) -> Option<usize> {
        self.cil.dim.or(self.mu.dim)
    }

    pub fn len(&self) -> usize {
        self.cil.len() + self.mu.len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Inserts into DB-CIL, enforcing id uniqueness and a shared dimension
    /// across both stores.
    pub fn insert(&mut self, record: VectorRecord) -> Result<()> {
        if self.mu.contains(record.id) {
            return Err(Error::DuplicateId(record.id));
        }
        if let Some(d) = self.dim() {
            check_dim(d, record.vector.dim())?;
        }
        self.cil.insert(record)
    }

    pub fn insert_unlearned(&mut self, record: VectorRecord) -> Result<()> {
        if self.cil.contains(record.id) {
            return Err(Error::DuplicateId(record.id));
        }
        if let Some(d) = self.dim() {
            check_dim(d, record.vector.dim())?;
        }
        self.mu.insert(record)
    }

    /// Moves a class from DB-CIL to DB-MU.
    pub fn migrate_class(&mut self, label: ClassId) -> Result<usize> {
        migrate_class(&mut self.cil, &mut self.mu, label)
    }

    /// Every label either store has ever held, i.e. all learned classes.
    pub fn learned_labels(&self) -> Vec<ClassId> {
        let mut labels: Vec<ClassId> = self.cil.labels().chain(self.mu.labels()).collect();
        labels.sort_unstable();
        labels.dedup();
        labels
    }

    pub fn into_stores(self) -> (VectorStore, VectorStore) {
        (self.cil, self.mu)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn rec(id: i64, label: u32, v: &[f64]) -> VectorRecord {
        VectorRecord::new(
            RecordId(id),
            ClassId(label),
            Embedding::new(v.to_vec()).unwrap(),
        )
    }

    fn emb(v: &[f64]) -> Embedding {
        Embedding::new(v.to_vec()).unwrap()
    }

    #[test]
    fn singleton_and_two_point_centroids() {
        let mut s = VectorStore::new(StoreName::Cil);
        s.insert(rec(1, 3, &[0.5, 2.0])).unwrap();
        let sum = s.summary(ClassId(3)).unwrap();
        assert_eq!(sum.count, 1);
        assert_eq!(sum.centroid(), &[0.5, 2.0]);

        let mut s = VectorStore::new(StoreName::Cil);
        s.insert(rec(1, 0, &[1.0, 0.0])).unwrap();
        s.insert(rec(2, 0, &[0.0, 1.0])).unwrap();
        assert_eq!(s.centroid_of(ClassId(0)).unwrap(), &[0.5, 0.5]);

        let mut s = VectorStore::new(StoreName::Cil);
        s.insert(rec(1, 0, &[2.0, 0.0])).unwrap();
        s.insert(rec(2, 0, &[0.0, 2.0])).unwrap();
        assert_eq!(s.centroid_of(ClassId(0)).unwrap(), &[1.0, 1.0]);
    }

    #[test]
    fn insert_errors() {
        let mut s = VectorStore::new(StoreName::Cil);
        s.insert(rec(1, 0, &[1.0, 0.0])).unwrap();
        assert_eq!(
            s.insert(rec(1, 0, &[0.0, 1.0])),
            Err(Error::DuplicateId(RecordId(1)))
        );
        assert_eq!(
            s.insert(rec(2, 0, &[1.0, 0.0, 0.0])),
            Err(Error::DimensionMismatch {
                expected: 2,
                found: 3
            })
        );
        assert_eq!(s.len(), 1);
    }

    #[test]
    fn duplicate_ids_rejected_across_stores() {
        let mut db = Databases::new();
        db.insert(rec(1, 0, &[1.0, 0.0])).unwrap();
        db.migrate_class(ClassId(0)).unwrap();
        assert_eq!(
            db.insert(rec(1, 1, &[0.0, 1.0])),
            Err(Error::DuplicateId(RecordId(1)))
        );
    }

    #[test]
    fn knn_examples() {
        let mut s = VectorStore::new(StoreName::Cil);
        assert!(matches!(
            s.knn(&emb(&[1.0, 0.0]), 1),
            Err(Error::EmptyStore)
        ));

        s.insert(rec(5, 0, &[1.0, 1.0])).unwrap();
        let hits = s.knn(&emb(&[1.0, 0.0]), 3).unwrap();
        assert_eq!(hits.len(), 1);
        assert_eq!(hits[0].record.id, RecordId(5));
        assert!((hits[0].similarity - core::f64::consts::FRAC_1_SQRT_2).abs() < 1e-12);

        s.insert(rec(9, 1, &[0.3, -2.0])).unwrap();
        let hits = s.knn(&emb(&[0.3, -2.0]), 2).unwrap();
        assert_eq!(hits[0].record.id, RecordId(9));
        assert_eq!(hits[0].similarity, 1.0);
    }

    #[test]
    fn knn_ties_break_by_id() {
        let mut s = VectorStore::new(StoreName::Cil);
        // all three at 45 degrees from the query
        s.insert(rec(30, 0, &[1.0, 1.0])).unwrap();
        s.insert(rec(10, 1, &[1.0, -1.0])).unwrap();
        s.insert(rec(20, 2, &[1.0, 1.0])).unwrap();
        let hits = s.knn(&emb(&[1.0, 0.0]), 2).unwrap();
        let ids: Vec<i64> = hits.iter().map(|h| h.record.id.0).collect();
        assert_eq!(ids, [10, 20]);
    }

    #[test]
    fn knn_classify_votes() {
        let mut s = VectorStore::new(StoreName::Cil);
        for i in 0..4 {
            s.insert(rec(i, 7, &[1.0, 0.01 * i as f64])).unwrap();
        }
        assert_eq!(s.knn_classify(&emb(&[1.0, 0.0]), 4).unwrap(), ClassId(7));

        // A gets 3 votes, B gets 2 closer ones
        let mut s = VectorStore::new(StoreName::Cil);
        s.insert(rec(1, 0, &[1.0, 0.30])).unwrap();
        s.insert(rec(2, 0, &[1.0, 0.31])).unwrap();
        s.insert(rec(3, 0, &[1.0, 0.32])).unwrap();
        s.insert(rec(4, 1, &[1.0, 0.01])).unwrap();
        s.insert(rec(5, 1, &[1.0, 0.02])).unwrap();
        assert_eq!(s.knn_classify(&emb(&[1.0, 0.0]), 5).unwrap(), ClassId(0));

        // 2-2 split: higher summed similarity wins
        let mut s = VectorStore::new(StoreName::Cil);
        s.insert(rec(1, 0, &[1.0, 0.5])).unwrap();
        s.insert(rec(2, 0, &[1.0, 0.5])).unwrap();
        s.insert(rec(3, 1, &[1.0, 0.1])).unwrap();
        s.insert(rec(4, 1, &[1.0, 0.1])).unwrap();
        assert_eq!(s.knn_classify(&emb(&[1.0, 0.0]), 4).unwrap(), ClassId(1));

        // exact tie in votes and similarity: lower class id
        let mut s = VectorStore::new(StoreName::Cil);
        s.insert(rec(1, 4, &[1.0, 1.0])).unwrap();
        s.insert(rec(2, 2, &[1.0, -1.0])).unwrap();
        assert_eq!(s.knn_classify(&emb(&[1.0, 0.0]), 2).unwrap(), ClassId(2));
    }

    #[test]
    fn migrate_examples() {
        let mut db = Databases::new();
        for i in 0..500 {
            db.insert(rec(i, 1, &[1.0, i as f64])).unwrap();
        }
        db.insert(rec(1000, 2, &[0.0, 1.0])).unwrap();
        assert_eq!(db.migrate_class(ClassId(1)).unwrap(), 500);
        assert!(db.cil().summary(ClassId(1)).is_none());
        assert_eq!(db.mu().summary(ClassId(1)).unwrap().count, 500);
        assert_eq!(
            db.cil().centroid_of(ClassId(1)),
            Err(Error::MissingClass(ClassId(1)))
        );
        assert_eq!(
            db.migrate_class(ClassId(1)),
            Err(Error::MissingClass(ClassId(1)))
        );

        let before = db.mu().len();
        assert_eq!(
            db.migrate_class(ClassId(9)),
            Err(Error::MissingClass(ClassId(9)))
        );
        assert_eq!(db.mu().len(), before);
        assert_eq!(db.len(), 501);
    }

    #[test]
    fn migrate_checks_conflicts_before_mutating() {
        let mut src = VectorStore::new(StoreName::Cil);
        let mut dst = VectorStore::new(StoreName::Mu);
        src.insert(rec(1, 0, &[1.0, 0.0])).unwrap();
        src.insert(rec(2, 0, &[1.0, 1.0])).unwrap();
        dst.insert(rec(2, 5, &[0.0, 1.0])).unwrap();
        assert_eq!(
            migrate_class(&mut src, &mut dst, ClassId(0)),
            Err(Error::DuplicateId(RecordId(2)))
        );
        assert_eq!(src.len(), 2);
        assert_eq!(dst.len(), 1);
    }

    #[test]
    fn remove_updates_summary() {
        let mut s = VectorStore::new(StoreName::Cil);
        s.insert(rec(1, 0, &[1.0, 0.0])).unwrap();
        s.insert(rec(2, 0, &[0.0, 3.0])).unwrap();
        s.remove(RecordId(2)).unwrap();
        assert_eq!(s.centroid_of(ClassId(0)).unwrap(), &[1.0, 0.0]);
        s.remove(RecordId(1)).unwrap();
        assert!(!s.has_label(ClassId(0)));
        assert!(s.remove(RecordId(1)).is_none());
    }

    #[derive(Debug, Clone)]
    enum Op {
        Insert(u32, Vec<f64>),
        Remove(usize),
        Migrate(u32),
    }

    fn op(dim: usize) -> impl Strategy<Value = Op> {
        prop_oneof![
            4 => (0u32..5, prop::collection::vec(-10.0f64..10.0, dim))
                .prop_filter("non-zero", |(_, v)| v.iter().any(|x| x.abs() > 1e-6))
                .prop_map(|(l, v)| Op::Insert(l, v)),
            1 => (0usize..1000).prop_map(Op::Remove),
            1 => (0u32..5).prop_map(Op::Migrate),
        ]
    }

    proptest! {
        #[test]
        fn summaries_stay_consistent(ops in prop::collection::vec(op(4), 1..200)) {
            let mut db = Databases::new();
            let mut next = 0i64;
            let mut inserted = 0usize;
            for o in ops {
                match o {
                    Op::Insert(l, v) => {
                        db.insert(VectorRecord::new(RecordId(next), ClassId(l), Embedding::new(v).unwrap())).unwrap();
                        next += 1;
                        inserted += 1;
                    }
                    Op::Remove(i) => {
                        let id = db.cil().records().nth(i % db.cil().len().max(1)).map(|r| r.id);
                        if let Some(id) = id {
                            db.cil.remove(id).unwrap();
                            inserted -= 1;
                        }
                    }
                    Op::Migrate(l) => {
                        let before = db.len();
                        let _ = db.migrate_class(ClassId(l));
                        prop_assert_eq!(db.len(), before);
                    }
                }
                prop_assert_eq!(db.len(), inserted);
                for store in [db.cil(), db.mu()] {
                    let total: usize = store.summaries().map(|s| s.count).sum();
                    prop_assert_eq!(total, store.len());
                    prop_assert!(store.centroid_drift() <= 1e-6);
                }
                for r in db.cil().records() {
                    prop_assert!(!db.mu().contains(r.id));
                }
            }
        }
    }
}
