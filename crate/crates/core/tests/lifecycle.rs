use ecilmu_core::{
    evaluate, generate_synthetic, predict, sample_exemplars, split, unlearn, ClassId, Databases,
    Error, LabeledSample, NearestCentroid, PipelineConfig, Query, SeedStream, StrategyKind,
    SyntheticSpec, UnlearnRequest, VectorRecord,
};

fn world() -> (Databases, Vec<VectorRecord>, Vec<LabeledSample>) {
    let spec = SyntheticSpec {
        n_classes: 6,
        per_class: 120,
        dim: 32,
        spread: 0.05,
        seed: 42,
    };
    let (train, test) = split(generate_synthetic(&spec).unwrap(), 1.0 / 6.0, 42).unwrap();
    let mut db = Databases::new();
    for r in train.iter().filter(|r| r.label.0 < 5) {
        db.insert(r.clone()).unwrap();
    }
    let samples = test
        .into_iter()
        .filter(|r| r.label.0 < 5)
        .map(|r| LabeledSample {
            id: Some(r.id),
            vector: r.vector,
            label: r.label,
        })
        .collect();
    (db, train, samples)
}

fn request(train: &[VectorRecord], label: u32) -> UnlearnRequest {
    let pool: Vec<_> = train
        .iter()
        .filter(|r| r.label.0 == label)
        .cloned()
        .collect();
    UnlearnRequest::new(
        sample_exemplars(&pool, 10, &mut SeedStream::new(1).fork(0)),
        100,
    )
    .unwrap()
}

#[test]
fn unlearning_moves_a_class_and_is_not_repeatable() {
    let (mut db, train, _) = world();
    let report = unlearn(&mut db, &request(&train, 3)).unwrap();
    assert_eq!(report.identified_label, ClassId(3));
    assert_eq!(report.moved, 100);
    assert!(report.unanimous && !report.low_confidence);
    assert!(!db.cil().has_label(ClassId(3)));
    assert_eq!(db.mu().class_counts().get(&ClassId(3)), Some(&100));
    assert_eq!(db.learned_labels().len(), 5);

    // the exemplars now vote for whichever retained class is nearest
    let before = db.clone();
    match unlearn(&mut db, &request(&train, 3)) {
        Ok(second) => assert_ne!(second.identified_label, ClassId(3)),
        Err(e) => assert_eq!(e, Error::MissingClass(ClassId(3))),
    }
    let mut again = before.clone();
    assert_eq!(
        again.migrate_class(ClassId(3)),
        Err(Error::MissingClass(ClassId(3)))
    );
    assert_eq!(again, before);
}

#[test]
fn forgotten_inputs_are_shifted_and_retained_inputs_kept() {
    let (mut db, train, samples) = world();
    let config = PipelineConfig::default();
    let clean = evaluate(
        &samples,
        &db,
        &config,
        &NearestCentroid,
        SeedStream::new(42),
    )
    .unwrap();
    assert_eq!(clean.acc_cf, None);
    assert_eq!(clean.acc_cr, Some(1.0));

    unlearn(&mut db, &request(&train, 1)).unwrap();
    for strategy in StrategyKind::ALL {
        let cfg = PipelineConfig { strategy, ..config };
        let m = evaluate(&samples, &db, &cfg, &NearestCentroid, SeedStream::new(42)).unwrap();
        assert_eq!(m.n_cf, 20);
        assert_eq!(m.flagged_cf, 20);
        assert_eq!(m.flagged_cr, 0);
        assert_eq!(m.acc_cr, Some(1.0));
        let weighted = m.acc_cr.unwrap() * m.n_cr as f64 + m.acc_cf.unwrap() * m.n_cf as f64;
        assert!((weighted / m.n_eval as f64 - m.acc_overall).abs() < 1e-9);
        if strategy != StrategyKind::UniformRandom {
            assert_eq!(m.acc_cf, Some(0.0), "{strategy}");
        }
    }

    let forgotten = samples.iter().find(|s| s.label == ClassId(1)).unwrap();
    let q = Query::new(&forgotten.vector);
    let cfg = PipelineConfig::default();
    let p = predict(
        &q,
        &db,
        &cfg,
        &NearestCentroid,
        &mut SeedStream::new(0).root(),
    )
    .unwrap();
    assert!(p.flagged);
    assert_eq!(p.strategy_used, Some(StrategyKind::ShiftToNearest));
    assert_ne!(p.label, ClassId(1));
}

#[test]
fn evaluation_is_reproducible() {
    let (mut db, train, samples) = world();
    unlearn(&mut db, &request(&train, 0)).unwrap();
    let cfg = PipelineConfig {
        strategy: StrategyKind::InverseToDistance,
        ..Default::default()
    };
    let a = evaluate(&samples, &db, &cfg, &NearestCentroid, SeedStream::new(9)).unwrap();
    let b = evaluate(&samples, &db, &cfg, &NearestCentroid, SeedStream::new(9)).unwrap();
    assert_eq!(a, b);
}
