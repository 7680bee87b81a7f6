mod common;

use std::path::PathBuf;

use lite::harness::{load_datasets, run_plan, run_seed, Algorithm, Plan, Status};
use lite::report::rank_records;
use lite::results::{read_records, write_records};
use lite_core::{Config, Policy};

fn plan(algorithms: Vec<Algorithm>, budgets: Vec<usize>, repeats: usize) -> Plan {
    Plan {
        algorithms,
        budgets,
        repeats,
        seed: 11,
        config: Config::default(),
    }
}

#[test]
fn one_run_gives_one_record() {
    let data = vec![("cars".to_string(), common::dataset(&common::cars_csv(120, 1)))];
    let runs = run_plan(&plan(vec![Algorithm::Random], vec![20], 1), &data).unwrap();
    assert_eq!(runs.len(), 1);
    let r = &runs[0].record;
    assert_eq!(r.status, Status::Ok);
    assert_eq!(r.labels_used, 20);
    assert_eq!(r.budget, Some(20));
    assert_eq!(r.seed, run_seed(11, "cars", Algorithm::Random, Some(20), 0));
    assert!((0.0..=1.0).contains(&r.best_d2h.unwrap()));
}

#[test]
fn record_count_per_treatment() {
    let data = vec![("cars".to_string(), common::dataset(&common::cars_csv(150, 2)))];
    let algorithms = Algorithm::ALL.to_vec();
    let runs = run_plan(&plan(algorithms, vec![10, 30], 3), &data).unwrap();
    let count = |a: Algorithm, b: Option<usize>| {
        runs.iter()
            .filter(|r| r.record.algorithm == a && r.record.budget == b)
            .count()
    };
    for a in [
        Algorithm::Lite(Policy::Certain),
        Algorithm::Lite(Policy::Uncertain),
        Algorithm::Random,
    ] {
        assert_eq!(count(a, Some(10)), 3);
        assert_eq!(count(a, Some(30)), 3);
    }
    assert_eq!(count(Algorithm::Sway, None), 3);
    assert_eq!(count(Algorithm::Baseline, None), 150);
    for r in &runs {
        assert_eq!(r.record.status, Status::Ok, "{:?}", r.record);
        match r.record.algorithm {
            Algorithm::Lite(_) | Algorithm::Random => assert_eq!(Some(r.record.labels_used), r.record.budget),
            Algorithm::Sway => assert!(r.record.labels_used <= 10),
            Algorithm::Baseline => assert_eq!(r.record.labels_used, 150),
        }
    }
}

#[test]
fn baseline_is_the_d2h_of_every_row() {
    let data = common::dataset(&common::cars_csv(60, 3));
    let runs = run_plan(
        &plan(vec![Algorithm::Baseline], vec![], 1),
        &[("cars".to_string(), data.clone())],
    )
    .unwrap();
    let got: Vec<f64> = runs.iter().map(|r| r.record.best_d2h.unwrap()).collect();
    let want: Vec<f64> = data.rows().iter().map(|r| data.d2h(r).unwrap()).collect();
    assert_eq!(got, want);
}

#[test]
fn reruns_write_identical_files() {
    let data = vec![
        ("cars".to_string(), common::dataset(&common::cars_csv(100, 4))),
        ("bowl".to_string(), common::dataset(&common::bowl_csv(100, 3, 4))),
    ];
    let p = plan(Algorithm::ALL.to_vec(), vec![10, 20], 4);
    let render = || {
        let records: Vec<_> = run_plan(&p, &data).unwrap().into_iter().map(|r| r.record).collect();
        let mut buf = Vec::new();
        write_records(&mut buf, &records).unwrap();
        buf
    };
    let first = render();
    assert_eq!(first, render());
    let back = read_records(first.as_slice()).unwrap();
    let mut again = Vec::new();
    write_records(&mut again, &back).unwrap();
    assert_eq!(first, again);
}

#[test]
fn failed_runs_are_recorded_and_the_rest_continue() {
    let data = vec![("tiny".to_string(), common::dataset(&common::cars_csv(6, 5)))];
    let runs = run_plan(
        &plan(
            vec![Algorithm::Lite(Policy::Certain), Algorithm::Random],
            vec![5, 50],
            1,
        ),
        &data,
    )
    .unwrap();
    assert_eq!(runs.len(), 4);
    let statuses: Vec<bool> = runs.iter().map(|r| r.record.status == Status::Ok).collect();
    // Lite needs more rows than its seed batch; random cannot take 50 of 6.
    assert_eq!(statuses, [false, false, true, false]);
    assert!(runs
        .iter()
        .filter(|r| r.record.status != Status::Ok)
        .all(|r| r.record.best_d2h.is_none()));
}

#[test]
fn unreadable_datasets_are_reported_separately() {
    let dir = tempfile::tempdir().unwrap();
    let good = dir.path().join("good.csv");
    std::fs::write(&good, common::cars_csv(20, 6)).unwrap();
    let bad = dir.path().join("bad.csv");
    std::fs::write(&bad, "a-,B\n1,2\n").unwrap();
    let missing = PathBuf::from("/nonexistent/none.csv");
    let (ok, failed) = load_datasets(&[good, bad.clone(), missing]);
    assert_eq!(ok.len(), 1);
    assert_eq!(ok[0].0, "good");
    assert_eq!(failed.len(), 2);
    assert_eq!(failed[0].0, bad);
}

#[test]
fn acquisition_beats_the_raw_spread() {
    let data = vec![("bowl".to_string(), common::dataset(&common::bowl_csv(400, 4, 8)))];
    let runs = run_plan(
        &plan(
            vec![Algorithm::Lite(Policy::Certain), Algorithm::Baseline],
            vec![30],
            10,
        ),
        &data,
    )
    .unwrap();
    let records: Vec<_> = runs.into_iter().map(|r| r.record).collect();
    let report = &rank_records(&records)[0];
    let certain = report
        .rows
        .iter()
        .find(|r| r.algorithm == Algorithm::Lite(Policy::Certain))
        .unwrap();
    let base = report.rows.iter().find(|r| r.algorithm == Algorithm::Baseline).unwrap();
    assert!(certain.rank < base.rank);
    assert!(certain.median < base.median);
}
