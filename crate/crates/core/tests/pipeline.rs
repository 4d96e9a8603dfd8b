mod common;

use conceptvec::pipeline::{self, RunConfig, Stage};
use conceptvec::ErrorKind;

#[test]
fn two_runs_with_one_seed_are_byte_identical() {
    common::pipeline_determinism(3).unwrap();
}

#[test]
fn end_to_end_report_has_a_coefficient() {
    let dir = tempfile::tempdir().unwrap();
    let out = pipeline::run_pipeline(common::pipeline_config(dir.path(), 1)).unwrap();
    let report = &out.reports[0];
    assert!(report.spearman.is_some(), "{report:?}");
    // "Unknownium" and "Aspirin" never reach the vocabulary.
    assert!(report.pairs_scored < report.pairs_total);
    assert!(out.manifest.ontology_pairs > 0);
    for path in [&out.corpus, &out.pairs, &out.vectors, out.report.as_ref().unwrap()] {
        assert!(path.is_file(), "{}", path.display());
    }

    // Normalization rules apply end to end: no raw PHI, numbers or caps.
    let corpus = std::fs::read_to_string(&out.corpus).unwrap();
    assert!(!corpus.contains("hospital") && !corpus.contains("120"));
    assert!(corpus.contains("allcaps_no_acute_distress") && corpus.contains("age_"));
}

#[test]
fn config_file_paths_resolve_next_to_the_config() {
    let dir = tempfile::tempdir().unwrap();
    std::fs::copy(common::fixture("tiny.txt"), dir.path().join("tiny.txt")).unwrap();
    let config_path = dir.path().join("run.toml");
    std::fs::write(
        &config_path,
        r#"version = 1
seed = 4
output_dir = "out"
corpus = "tiny.txt"

[pairs]
min_count = 1
subsample_t = 1.0
max_window = 2

[train]
dim = 8
epochs = 2
"#,
    )
    .unwrap();
    let config = RunConfig::from_file(&config_path).unwrap();
    let out = pipeline::run_pipeline(config).unwrap();
    assert_eq!(out.vectors, dir.path().join("out").join(pipeline::VECTORS_FILE));
    assert!(out.report.is_none());
    let manifest = &out.manifest;
    assert_eq!(manifest.config.seed, 4, "root seed reaches the pair stage");
}

#[test]
fn stage_failures_are_named_and_leave_no_vectors() {
    let dir = tempfile::tempdir().unwrap();
    let broken = dir.path().join("concepts.tsv");
    std::fs::write(&broken, "word-without-concept\n").unwrap();
    let mut config = common::pipeline_config(&dir.path().join("out"), 1);
    config.concepts = Some(broken);
    let err = pipeline::run_pipeline(config).unwrap_err();
    assert_eq!(err.stage, Stage::Pairs);
    assert_eq!(err.kind(), ErrorKind::Data);
    assert!(err.to_string().starts_with("pairs stage failed"), "{err}");
    assert!(!dir.path().join("out").join(pipeline::VECTORS_FILE).exists());
    assert!(!dir.path().join("out").join(pipeline::PAIRS_FILE).exists());
}

#[test]
fn bad_settings_fail_before_any_work() {
    let dir = tempfile::tempdir().unwrap();
    let mut config = common::pipeline_config(&dir.path().join("out"), 1);
    config.train.epochs = 0;
    let err = pipeline::run_pipeline(config).unwrap_err();
    assert_eq!(err.stage, Stage::Config);
    assert_eq!(err.kind(), ErrorKind::Usage);
    assert!(!dir.path().join("out").exists());

    let mut config = common::pipeline_config(&dir.path().join("out"), 1);
    config.eval.datasets[0].layout = "nonsense".into();
    assert_eq!(pipeline::run_pipeline(config).unwrap_err().stage, Stage::Config);
}
