//! Seeded synthetic embedding clusters and stratified splitting.

use alloc::collections::BTreeMap;
use alloc::vec::Vec;

use rand::seq::SliceRandom;
use rand::Rng as _;
use rand_distr::StandardNormal;

use crate::error::{Error, Result};
use crate::rng::{Rng, SeedStream};
use crate::vector::{l2_norm, ClassId, Embedding, RecordId, VectorRecord};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SyntheticSpec {
    pub n_classes: u32,
    pub per_class: usize,
    pub dim: usize,
    /// Per-component standard deviation of the noise added to a centroid.
    pub spread: f64,
    pub seed: u64,
}

impl SyntheticSpec {
    pub fn validate(&self) -> Result<()> {
        if self.n_classes == 0 || self.per_class == 0 || self.dim == 0 {
            return Err(Error::InvalidArgument(
                "classes, members and dimension must be positive",
            ));
        }
        if !(self.spread > 0.0 && self.spread < 10.0) {
            return Err(Error::InvalidArgument("spread must lie in (0, 10)"));
        }
        Ok(())
    }
}

fn gaussian_unit(rng: &mut Rng, dim: usize) -> Vec<f64> {
    loop {
        let v: Vec<f64> = (0..dim).map(|_| rng.sample(StandardNormal)).collect();
        let n = l2_norm(&v);
        if n > 0.0 {
            return v.into_iter().map(|x| x / n).collect();
        }
    }
}

/// Unit-norm class directions drawn uniformly on the sphere.
pub fn synthetic_centroids(spec: &SyntheticSpec) -> Result<Vec<Vec<f64>>> {
    spec.validate()?;
    let mut rng = SeedStream::new(spec.seed).fork(0);
    Ok((0..spec.n_classes)
        .map(|_| gaussian_unit(&mut rng, spec.dim))
        .collect())
}

/// Clustered unit-norm embeddings, class-major, ids `0..n_classes * per_class`.
pub fn generate_synthetic(spec: &SyntheticSpec) -> Result<Vec<VectorRecord>> {
    let centroids = synthetic_centroids(spec)?;
    let seeds = SeedStream::new(spec.seed);
    let mut out = Vec::with_capacity(spec.n_classes as usize * spec.per_class);
    let mut id = 0i64;
    for (label, c) in centroids.iter().enumerate() {
        let mut rng = seeds.fork(1 + label as u64);
        for _ in 0..spec.per_class {
            let vector = loop {
                let noisy: Vec<f64> = c
                    .iter()
                    .map(|x| x + spec.spread * rng.sample::<f64, _>(StandardNormal))
                    .collect();
                let n = l2_norm(&noisy);
                if n > 0.0 {
                    break Embedding::new(noisy.into_iter().map(|x| x / n).collect())?;
                }
            };
            out.push(VectorRecord::new(
                RecordId(id),
                ClassId(label as u32),
                vector,
            ));
            id += 1;
        }
    }
    Ok(out)
}

/// Stratified train/test split. Each class contributes
/// `round(n * test_fraction)` test records, kept within `1..n`.
pub fn split(
    records: Vec<VectorRecord>,
    test_fraction: f64,
    seed: u64,
) -> Result<(Vec<VectorRecord>, Vec<VectorRecord>)> {
    if !(test_fraction > 0.0 && test_fraction < 1.0) {
        return Err(Error::InvalidArgument("test fraction must lie in (0, 1)"));
    }
    let mut by_class: BTreeMap<ClassId, Vec<VectorRecord>> = BTreeMap::new();
    for r in records {
        by_class.entry(r.label).or_default().push(r);
    }
    if by_class.values().any(|members| members.len() < 2) {
        return Err(Error::InvalidArgument(
            "every class needs at least two records to split",
        ));
    }

    let seeds = SeedStream::new(seed);
    let (mut train, mut test) = (Vec::new(), Vec::new());
    for (label, mut members) in by_class {
        members.sort_by_key(|r| r.id);
        members.shuffle(&mut seeds.fork(u64::from(label.0)));
        let n = members.len();
        let n_test = libm::round(n as f64 * test_fraction).clamp(1.0, (n - 1) as f64) as usize;
        let rest = members.split_off(n_test);
        test.extend(members);
        train.extend(rest);
    }
    train.sort_by_key(|r| r.id);
    test.sort_by_key(|r| r.id);
    Ok((train, test))
}
