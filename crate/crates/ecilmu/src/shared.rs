//! Thread-safe access to the store pair: many readers or one writer.

use std::sync::{PoisonError, RwLock, RwLockReadGuard};

use ecilmu_core::rng::Rng;
use ecilmu_core::{
    predict, unlearn, ClassId, Databases, MigrationReport, PipelineConfig, Prediction, Query,
    SurrogateModel, UnlearnRequest, VectorRecord,
};

/// Wraps [`Databases`] in a reader/writer lock.
///
/// Engine mutations validate everything before touching either store, so a
/// panic inside the lock cannot leave a half-applied change and a poisoned
/// lock is safe to reuse.
#[derive(Debug, Default)]
pub struct SharedDatabases {
    inner: RwLock<Databases>,
}

impl SharedDatabases {
    pub fn new(db: Databases) -> Self {
        Self {
            inner: RwLock::new(db),
        }
    }

    pub fn read(&self) -> RwLockReadGuard<'_, Databases> {
        self.inner.read().unwrap_or_else(PoisonError::into_inner)
    }

    fn write<R>(&self, f: impl FnOnce(&mut Databases) -> R) -> R {
        f(&mut self.inner.write().unwrap_or_else(PoisonError::into_inner))
    }

    pub fn insert(&self, record: VectorRecord) -> ecilmu_core::Result<()> {
        self.write(|db| db.insert(record))
    }

    /// Identification runs under the write lock so the class cannot change
    /// between voting and migration.
    pub fn unlearn(&self, request: &UnlearnRequest) -> ecilmu_core::Result<MigrationReport> {
        self.write(|db| unlearn(db, request))
    }

    pub fn migrate_class(&self, label: ClassId) -> ecilmu_core::Result<usize> {
        self.write(|db| db.migrate_class(label))
    }

    pub fn predict(
        &self,
        query: &Query<'_>,
        config: &PipelineConfig,
        model: &dyn SurrogateModel,
        rng: &mut Rng,
    ) -> ecilmu_core::Result<Prediction> {
        predict(query, &self.read(), config, model, rng)
    }

    pub fn into_inner(self) -> Databases {
        self.inner
            .into_inner()
            .unwrap_or_else(PoisonError::into_inner)
    }
}
