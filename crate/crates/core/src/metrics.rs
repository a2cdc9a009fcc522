//! Accuracy on retained and unlearned classes, plus the analytic
//! expectations for a filter with a given recall and specificity.

use alloc::collections::BTreeMap;
use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::inference::{predict, PipelineConfig, Query, SurrogateModel};
use crate::rng::SeedStream;
use crate::store::Databases;
use crate::vector::{ClassId, Embedding, RecordId};

/// An evaluation input with its ground-truth class.
#[derive(Debug, Clone, PartialEq)]
pub struct LabeledSample {
    pub id: Option<RecordId>,
    pub vector: Embedding,
    pub label: ClassId,
}

#[derive(Debug, Clone, PartialEq)]
pub struct MetricsReport {
    /// Accuracy over samples of classes resident in DB-CIL.
    pub acc_cr: Option<f64>,
    /// Accuracy over samples of classes resident in DB-MU; `None` when
    /// nothing has been unlearned.
    pub acc_cf: Option<f64>,
    pub acc_overall: f64,
    pub per_class_acc: BTreeMap<ClassId, f64>,
    /// `(true, predicted) -> count`.
    pub confusion: BTreeMap<(ClassId, ClassId), usize>,
    pub n_eval: usize,
    pub n_cr: usize,
    pub n_cf: usize,
    /// Retained-class samples the filter flagged.
    pub flagged_cr: usize,
    /// Unlearned-class samples the filter flagged.
    pub flagged_cf: usize,
}

impl MetricsReport {
    /// Filter recall observed during evaluation.
    pub fn filter_recall(&self) -> Option<f64> {
        (self.n_cr > 0).then(|| (self.n_cr - self.flagged_cr) as f64 / self.n_cr as f64)
    }

    /// Filter specificity observed during evaluation.
    pub fn filter_specificity(&self) -> Option<f64> {
        (self.n_cf > 0).then(|| self.flagged_cf as f64 / self.n_cf as f64)
    }

    pub fn class_totals(&self) -> BTreeMap<ClassId, usize> {
        let mut rows = BTreeMap::new();
        for (&(t, _), &n) in &self.confusion {
            *rows.entry(t).or_insert(0) += n;
        }
        rows
    }
}

/// Predicts every sample and aggregates accuracies.
///
/// Sample `i` draws from stream `i` of `seeds`, so results do not depend on
/// evaluation order.
pub fn evaluate(
    samples: &[LabeledSample],
    db: &Databases,
    config: &PipelineConfig,
    model: &dyn SurrogateModel,
    seeds: SeedStream,
) -> Result<MetricsReport> {
    if samples.is_empty() {
        return Err(Error::InvalidArgument("evaluation set is empty"));
    }
    let learned = db.learned_labels();
    let mut confusion: BTreeMap<(ClassId, ClassId), usize> = BTreeMap::new();
    let (mut n_cr, mut n_cf, mut ok_cr, mut ok_cf, mut flagged_cr, mut flagged_cf) =
        (0, 0, 0, 0, 0, 0);

    for (i, sample) in samples.iter().enumerate() {
        if learned.binary_search(&sample.label).is_err() {
            return Err(Error::InvalidArgument("sample label was never learned"));
        }
        let query = Query {
            id: sample.id,
            vector: &sample.vector,
        };
        let p = predict(&query, db, config, model, &mut seeds.fork(i as u64))?;
        *confusion.entry((sample.label, p.label)).or_insert(0) += 1;
        let correct = usize::from(p.label == sample.label);
        let flagged = usize::from(p.flagged);
        if db.cil().has_label(sample.label) {
            n_cr += 1;
            ok_cr += correct;
            flagged_cr += flagged;
        } else {
            n_cf += 1;
            ok_cf += correct;
            flagged_cf += flagged;
        }
    }

    let mut per_class: BTreeMap<ClassId, (usize, usize)> = BTreeMap::new();
    for (&(t, p), &n) in &confusion {
        let e = per_class.entry(t).or_insert((0, 0));
        e.1 += n;
        if t == p {
            e.0 += n;
        }
    }

    let frac = |ok: usize, n: usize| (n > 0).then(|| ok as f64 / n as f64);
    Ok(MetricsReport {
        acc_cr: frac(ok_cr, n_cr),
        acc_cf: frac(ok_cf, n_cf),
        acc_overall: (ok_cr + ok_cf) as f64 / samples.len() as f64,
        per_class_acc: per_class
            .into_iter()
            .map(|(l, (ok, n))| (l, ok as f64 / n as f64))
            .collect(),
        confusion,
        n_eval: samples.len(),
        n_cr,
        n_cf,
        flagged_cr,
        flagged_cf,
    })
}

fn unit_interval(x: f64, what: &'static str) -> Result<()> {
    if (0.0..=1.0).contains(&x) {
        Ok(())
    } else {
        Err(Error::InvalidArgument(what))
    }
}

/// Expected accuracy on retained classes: flagged retained samples are lost,
/// the rest are answered at the model's accuracy.
pub fn expected_cr_accuracy(recall: f64, acc_t: f64) -> Result<f64> {
    unit_interval(recall, "recall must lie in [0, 1]")?;
    unit_interval(acc_t, "accuracy must lie in [0, 1]")?;
    Ok(recall * acc_t)
}

/// Expected accuracy on unlearned classes under the uniform strategy:
/// samples leaking through the filter are answered at the model's accuracy,
/// flagged samples hit their class by chance `1 / n_classes`.
pub fn expected_cf_accuracy(specificity: f64, acc_t: f64, n_classes: usize) -> Result<f64> {
    unit_interval(specificity, "specificity must lie in [0, 1]")?;
    unit_interval(acc_t, "accuracy must lie in [0, 1]")?;
    if n_classes == 0 {
        return Err(Error::InvalidArgument("n_classes must be positive"));
    }
    Ok((1.0 - specificity) * acc_t + specificity / n_classes as f64)
}

/// Samples whose labels are currently learned, in input order.
pub fn learned_samples<'a>(samples: &'a [LabeledSample], db: &Databases) -> Vec<&'a LabeledSample> {
    let learned = db.learned_labels();
    samples
        .iter()
        .filter(|s| learned.binary_search(&s.label).is_ok())
        .collect()
}
