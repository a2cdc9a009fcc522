use ecilmu::{read_embeddings, state, write_embeddings, CliError};
use ecilmu_core::format::HEADER_LEN;
use ecilmu_core::{
    generate_synthetic, ClassId, Databases, Embedding, Error, RecordId, SyntheticSpec, VectorRecord,
};

fn records() -> Vec<VectorRecord> {
    generate_synthetic(&SyntheticSpec {
        n_classes: 3,
        per_class: 20,
        dim: 8,
        spread: 0.1,
        seed: 1,
    })
    .unwrap()
}

#[test]
fn state_round_trip() {
    let dir = tempfile::tempdir().unwrap();
    let mut db = Databases::new();
    for r in records() {
        db.insert(r).unwrap();
    }
    state::save(dir.path(), &db).unwrap();
    assert!(dir.path().join(state::CIL_FILE).exists());
    assert!(!dir.path().join(state::MU_FILE).exists());

    db.migrate_class(ClassId(1)).unwrap();
    state::save(dir.path(), &db).unwrap();
    let back = state::load(dir.path()).unwrap();
    // vectors pass through f32 on disk; these were generated in f64
    assert_eq!(back.cil().class_counts(), db.cil().class_counts());
    assert_eq!(back.mu().class_counts(), db.mu().class_counts());

    let mut all_gone = back.clone();
    for label in [ClassId(0), ClassId(2)] {
        all_gone.migrate_class(label).unwrap();
    }
    state::save(dir.path(), &all_gone).unwrap();
    assert!(!dir.path().join(state::CIL_FILE).exists());
    assert_eq!(state::load(dir.path()).unwrap().mu().len(), 60);
}

#[test]
fn empty_directory_is_empty_state() {
    let dir = tempfile::tempdir().unwrap();
    let db = state::load(&dir.path().join("nothing")).unwrap();
    assert!(db.is_empty());
}

#[test]
fn decode_errors_carry_offsets() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("r.ecmu");
    let recs = vec![
        VectorRecord::new(
            RecordId(1),
            ClassId(0),
            Embedding::from_f32(&[1.0, 2.0]).unwrap(),
        ),
        VectorRecord::new(
            RecordId(2),
            ClassId(0),
            Embedding::from_f32(&[3.0, 4.0]).unwrap(),
        ),
    ];
    write_embeddings(&path, &recs).unwrap();
    let good = std::fs::read(&path).unwrap();

    std::fs::write(&path, &good[..good.len() - 1]).unwrap();
    match read_embeddings(&path) {
        Err(CliError::File {
            source: Error::Format { offset, .. },
            ..
        }) => {
            assert_eq!(offset, (HEADER_LEN + 20) as u64)
        }
        other => panic!("{other:?}"),
    }

    let mut nan = good.clone();
    nan[HEADER_LEN + 12..HEADER_LEN + 16].copy_from_slice(&f32::INFINITY.to_le_bytes());
    std::fs::write(&path, &nan).unwrap();
    let err = read_embeddings(&path).unwrap_err();
    assert_eq!(err.category(), "data");

    let err = write_embeddings(&path, &[]).unwrap_err();
    assert_eq!(err.category(), "argument");
    // the failed write left the previous file in place
    assert_eq!(std::fs::read(&path).unwrap(), nan);
}
