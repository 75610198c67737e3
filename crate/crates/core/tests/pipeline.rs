mod common;

use std::sync::Arc;

use common::{fixture, write_fixture};
use tabmatch::harness::io::{read_annotations, write_annotations};
use tabmatch::harness::{evaluate, run_pipeline, Annotator, RunConfig, TargetSet, Task};
use tabmatch::numeric::{build_numeric_profiles, PROFILE_CAP};

fn annotator(fx: &common::Fixture, cfg: RunConfig) -> Annotator {
    let profiles = build_numeric_profiles(&fx.graph, cfg.seed, PROFILE_CAP);
    Annotator::new(Arc::new(fx.graph.clone()), profiles, cfg).unwrap()
}

#[test]
fn fixture_scores_through_files() {
    let fx = fixture();
    let dir = tempfile::tempdir().unwrap();
    let files = write_fixture(dir.path(), &fx.ntriples, &fx.tables);
    let targets = TargetSet::read(
        Some(&files.targets_cea),
        Some(&files.targets_cta),
        Some(&files.targets_cpa),
    )
    .unwrap();
    let out = run_pipeline(&files.tables, &targets, &annotator(&fx, RunConfig::default())).unwrap();
    assert_eq!(out.report.errors, 0);
    let pred = dir.path().join("pred");
    std::fs::create_dir_all(&pred).unwrap();
    write_annotations(&pred, &out.annotations).unwrap();
    assert_eq!(read_annotations(&pred).unwrap(), out.annotations);

    let cea = evaluate(Task::Cea, &files.gold_cea, &pred.join("cea.csv"), None).unwrap();
    let cpa = evaluate(Task::Cpa, &files.gold_cpa, &pred.join("cpa.csv"), None).unwrap();
    let cta = evaluate(Task::Cta, &files.gold_cta, &pred.join("cta.csv"), Some(&fx.graph)).unwrap();
    println!("cea {cea:?}\ncpa {cpa:?}\ncta {cta:?}");
    assert_eq!(cea.f1, Some(1.0));
    assert_eq!(cpa.f1, Some(1.0));
    assert!(cta.ah.unwrap() >= 1.0);
}

#[test]
fn worker_count_does_not_change_output() {
    let fx = fixture();
    let dir = tempfile::tempdir().unwrap();
    let files = write_fixture(dir.path(), &fx.ntriples, &fx.tables);
    let targets = TargetSet::read(
        Some(&files.targets_cea),
        Some(&files.targets_cta),
        Some(&files.targets_cpa),
    )
    .unwrap();
    let one = run_pipeline(
        &files.tables,
        &targets,
        &annotator(
            &fx,
            RunConfig {
                workers: Some(1),
                ..RunConfig::default()
            },
        ),
    )
    .unwrap();
    let four = run_pipeline(
        &files.tables,
        &targets,
        &annotator(
            &fx,
            RunConfig {
                workers: Some(4),
                ..RunConfig::default()
            },
        ),
    )
    .unwrap();
    assert_eq!(one.annotations, four.annotations);
}

#[test]
fn missing_table_is_reported_and_skipped() {
    let fx = fixture();
    let dir = tempfile::tempdir().unwrap();
    let files = write_fixture(dir.path(), &fx.ntriples, &fx.tables);
    let mut targets = TargetSet::read(Some(&files.targets_cea), None, None).unwrap();
    let mut ghost = targets.cea[0].clone();
    ghost.table = "no_such_table".into();
    targets.cea.push(ghost);
    let out = run_pipeline(&files.tables, &targets, &annotator(&fx, RunConfig::default())).unwrap();
    assert_eq!(out.report.errors, 1);
    let failed = out.report.tables.iter().find(|t| t.table == "no_such_table").unwrap();
    assert!(failed.error.is_some());
    assert_eq!(out.annotations.len(), fx.tables.len());
}

#[test]
fn tables_without_targets_produce_nothing() {
    let fx = fixture();
    let dir = tempfile::tempdir().unwrap();
    let files = write_fixture(dir.path(), &fx.ntriples, &fx.tables);
    let out = run_pipeline(
        &files.tables,
        &TargetSet::default(),
        &annotator(&fx, RunConfig::default()),
    )
    .unwrap();
    assert!(out.annotations.is_empty());
    assert!(out.report.tables.is_empty());
}

#[test]
fn cea_only_targets_yield_only_cea_answers() {
    let fx = fixture();
    let dir = tempfile::tempdir().unwrap();
    let files = write_fixture(dir.path(), &fx.ntriples, &fx.tables);
    let targets = TargetSet::read(Some(&files.targets_cea), None, None).unwrap();
    let out = run_pipeline(&files.tables, &targets, &annotator(&fx, RunConfig::default())).unwrap();
    for set in out.annotations.values() {
        assert!(set.cta.is_empty() && set.cpa.is_empty());
        assert!(!set.cea.is_empty());
    }
}
