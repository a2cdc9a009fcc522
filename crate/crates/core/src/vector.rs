//! Embedding vectors and the records stored in the vector databases.

use alloc::vec::Vec;
use core::fmt;

use crate::error::{Error, Result};

/// Class label.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct ClassId(pub u32);

impl fmt::Display for ClassId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.0.fmt(f)
    }
}

/// Record identifier, unique across both stores.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct RecordId(pub i64);

impl fmt::Display for RecordId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.0.fmt(f)
    }
}

/// A finite, non-zero feature vector with its Euclidean norm cached.
#[derive(Debug, Clone, PartialEq)]
pub struct Embedding {
    values: Vec<f64>,
    norm: f64,
}

impl Embedding {
    pub fn new(values: Vec<f64>) -> Result<Self> {
        if values.is_empty() {
            return Err(Error::InvalidArgument(
                "embedding must have at least one component",
            ));
        }
        if values.iter().any(|v| !v.is_finite()) {
            return Err(Error::DegenerateVector("non-finite component"));
        }
        let norm = l2_norm(&values);
        if norm == 0.0 || !norm.is_finite() {
            return Err(Error::DegenerateVector("zero norm"));
        }
        Ok(Self { values, norm })
    }

    /// Widens single-precision components, as read from embedding files.
    pub fn from_f32(values: &[f32]) -> Result<Self> {
        Self::new(values.iter().map(|&v| f64::from(v)).collect())
    }

    #[inline]
    pub fn dim(&self) -> usize {
        self.values.len()
    }

    #[inline]
    pub fn values(&self) -> &[f64] {
        &self.values
    }

    #[inline]
    pub fn norm(&self) -> f64 {
        self.norm
    }

    pub fn into_values(self) -> Vec<f64> {
        self.values
    }

    /// Cosine similarity with another embedding of the same dimension.
    pub fn cosine(&self, other: &Embedding) -> Result<f64> {
        check_dim(self.dim(), other.dim())?;
        Ok(cosine_with_norms(
            &self.values,
            self.norm,
            &other.values,
            other.norm,
        ))
    }
}

/// A stored embedding with its label.
#[derive(Debug, Clone, PartialEq)]
pub struct VectorRecord {
    pub id: RecordId,
    pub label: ClassId,
    pub vector: Embedding,
}

impl VectorRecord {
    pub fn new(id: RecordId, label: ClassId, vector: Embedding) -> Self {
        Self { id, label, vector }
    }
}

/// `dot(a, b) / (|a| |b|)`, clamped to `[-1, 1]`.
pub fn cosine_similarity(a: &Embedding, b: &Embedding) -> Result<f64> {
    a.cosine(b)
}

/// Cosine similarity of an embedding against a raw slice, e.g. a class centroid.
pub fn cosine_to_slice(a: &Embedding, b: &[f64]) -> Result<f64> {
    check_dim(a.dim(), b.len())?;
    let nb = l2_norm(b);
    if nb == 0.0 {
        return Err(Error::DegenerateVector("zero norm"));
    }
    Ok(cosine_with_norms(a.values(), a.norm(), b, nb))
}

#[inline]
pub(crate) fn check_dim(expected: usize, found: usize) -> Result<()> {
    if expected == found {
        Ok(())
    } else {
        Err(Error::DimensionMismatch { expected, found })
    }
}

#[inline]
pub(crate) fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

#[inline]
pub(crate) fn l2_norm(a: &[f64]) -> f64 {
    libm::sqrt(dot(a, a))
}

// Multiplication commutes exactly in IEEE-754, so the result is symmetric
// bit-for-bit when the arguments are swapped.
#[inline]
pub(crate) fn cosine_with_norms(a: &[f64], na: f64, b: &[f64], nb: f64) -> f64 {
    (dot(a, b) / (na * nb)).clamp(-1.0, 1.0)
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec;
    use proptest::prelude::*;

    fn emb(v: &[f64]) -> Embedding {
        Embedding::new(v.to_vec()).unwrap()
    }

    #[test]
    fn cosine_examples() {
        assert_eq!(
            cosine_similarity(&emb(&[1.0, 0.0]), &emb(&[1.0, 0.0])).unwrap(),
            1.0
        );
        assert_eq!(
            cosine_similarity(&emb(&[1.0, 0.0]), &emb(&[0.0, 1.0])).unwrap(),
            0.0
        );
        // 32 / (sqrt(14) * sqrt(77)) by hand
        let expected = 32.0 / (14f64.sqrt() * 77f64.sqrt());
        let got = cosine_similarity(&emb(&[1.0, 2.0, 3.0]), &emb(&[4.0, 5.0, 6.0])).unwrap();
        assert!((got - expected).abs() < 1e-12);
        assert!((got - 0.974632).abs() < 1e-6);
    }

    #[test]
    fn rejects_degenerate_inputs() {
        assert_eq!(
            Embedding::new(vec![0.0, 0.0]),
            Err(Error::DegenerateVector("zero norm"))
        );
        assert!(matches!(
            Embedding::new(vec![1.0, f64::NAN]),
            Err(Error::DegenerateVector(_))
        ));
        assert!(matches!(
            Embedding::new(vec![f64::INFINITY]),
            Err(Error::DegenerateVector(_))
        ));
        assert!(Embedding::new(vec![]).is_err());
        assert_eq!(
            cosine_similarity(&emb(&[1.0, 0.0]), &emb(&[1.0, 0.0, 0.0])),
            Err(Error::DimensionMismatch {
                expected: 2,
                found: 3
            })
        );
        assert!(matches!(
            cosine_to_slice(&emb(&[1.0, 0.0]), &[0.0, 0.0]),
            Err(Error::DegenerateVector(_))
        ));
    }

    fn nonzero_vec(dim: usize) -> impl Strategy<Value = Vec<f64>> {
        prop::collection::vec(-100.0f64..100.0, dim)
            .prop_filter("non-zero", |v| v.iter().any(|x| x.abs() > 1e-3))
    }

    proptest! {
        #[test]
        fn cosine_is_symmetric_and_bounded(
            (a, b) in (1usize..64).prop_flat_map(|d| (nonzero_vec(d), nonzero_vec(d)))
        ) {
            let (a, b) = (emb(&a), emb(&b));
            let ab = cosine_similarity(&a, &b).unwrap();
            let ba = cosine_similarity(&b, &a).unwrap();
            prop_assert_eq!(ab.to_bits(), ba.to_bits());
            prop_assert!((-1.0..=1.0).contains(&ab));
        }

        #[test]
        fn cosine_scale_invariant(a in (1usize..64).prop_flat_map(nonzero_vec), s in 1e-3f64..1e3) {
            let scaled: Vec<f64> = a.iter().map(|x| x * s).collect();
            let c = cosine_similarity(&emb(&a), &emb(&scaled)).unwrap();
            prop_assert!((c - 1.0).abs() < 1e-9);
        }
    }
}
