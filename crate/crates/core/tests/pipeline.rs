use lanedrift::csvio::{read_drive_log, write_drive_log};
use lanedrift::evaluation::{run_mode, EvalModels, EvaluationMode};
use lanedrift::synthetic::{make_model, simulate_drive_log, SyntheticSpec};
use lanedrift::{
    calibrate, load_model, prepare_segments, save_model, CalibrationConfig, Error, ModelMetadata,
};

#[test]
fn csv_to_model_file_and_back() {
    let truth = make_model(&SyntheticSpec::default()).unwrap();
    let log = simulate_drive_log(&truth, 1200.0, 3.6, 3).unwrap();
    let mut csv = Vec::new();
    write_drive_log(&mut csv, &log).unwrap();
    let parsed = read_drive_log(csv.as_slice()).unwrap();
    assert_eq!(parsed.len(), log.len());

    let cfg = CalibrationConfig::new(truth.params);
    let segments = prepare_segments(&[("tour".into(), parsed)], &cfg).unwrap();
    let cal = calibrate(
        &segments,
        &cfg,
        ModelMetadata {
            source_tour: "tour".into(),
            calibrated_at: None,
        },
    )
    .unwrap();
    assert_eq!(cal.segment_count, 1);
    assert!((cal.usable_minutes - 20.0).abs() < 0.01);

    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("model.json");
    save_model(&cal.model, &path).unwrap();
    let back = load_model(&path).unwrap();
    assert_eq!(back, cal.model);

    let report = run_mode(EvaluationMode::Full, &segments, EvalModels::from(&back), 1).unwrap();
    assert_eq!(report.snippet_count, 120);
}

#[test]
fn negative_distance_splits_the_tour() {
    let truth = make_model(&SyntheticSpec::default()).unwrap();
    let mut log = simulate_drive_log(&truth, 600.0, 3.6, 4).unwrap();
    log[1500].dist_left = -0.2;
    let cfg = CalibrationConfig::new(truth.params);
    let segments = prepare_segments(&[("tour".into(), log)], &cfg).unwrap();
    assert_eq!(segments.len(), 2);
    assert!(calibrate(&segments, &cfg, ModelMetadata::default()).is_ok());
}

#[test]
fn empty_log_is_insufficient() {
    let log = read_drive_log("t,dist_left,dist_right,v_lon\n".as_bytes()).unwrap();
    let cfg = CalibrationConfig::default();
    let err = prepare_segments(&[("empty".into(), log)], &cfg)
        .and_then(|s| calibrate(&s, &cfg, ModelMetadata::default()).map(|_| ()))
        .unwrap_err();
    assert!(
        matches!(err, Error::InsufficientData { .. } | Error::EmptySeries(_)),
        "{err}"
    );
}
