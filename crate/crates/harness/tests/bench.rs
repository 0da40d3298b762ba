mod common;

use std::time::Instant;

use relog2smt::bench::{bench, bench_models, interesting, write_csv, BenchConfig, CSV_HEADER};
use relog2smt::solver::{Outcome, SolverCmd};
use relog2smt_core::Options;

const FAST: &str = "(univ A$0 A$1) (rel A 1 ((A$0) (A$1))) (rel r 1 ((A$0) (A$1))) (formula (someof r))";
const SLOW: &str = "(univ A$0 A$1) (rel A 1 ((A$0) (A$1))) (rel slowrel 1 ((A$0) (A$1))) (formula (someof slowrel))";

fn config(solver: SolverCmd, combos: Vec<Options>, timeout_ms: u64) -> BenchConfig {
    BenchConfig {
        combos,
        solver,
        timeout_ms,
        node_budget: 100_000,
        workers: 2,
    }
}

#[test]
fn timeout_stays_in_its_cell() {
    let dir = tempfile::tempdir().unwrap();
    let stub = common::script(
        dir.path(),
        "stub.sh",
        "if grep -q slowrel \"$1\"; then exec sleep 1000; fi\necho sat",
    );
    let solver = SolverCmd::parse(&format!("{} {{file}}", stub.display())).unwrap();
    let combos = interesting();
    let models = vec![("a".to_string(), FAST.to_string()), ("b".to_string(), SLOW.to_string())];
    let start = Instant::now();
    let recs = bench_models(&models, &config(solver, combos.clone(), 200));
    assert!(start.elapsed().as_secs() < 10);
    assert_eq!(recs.len(), 2 * combos.len());
    for (i, r) in recs.iter().enumerate() {
        assert_eq!(r.model_name, models[i / combos.len()].0);
        assert_eq!(r.options, combos[i % combos.len()]);
        assert_eq!(r.solver_id, "stub.sh");
        let expected = if r.model_name == "a" { Outcome::Sat } else { Outcome::Timeout };
        assert_eq!(r.result, expected, "{r:?}");
    }
}

#[test]
fn translation_errors_become_error_rows() {
    let dir = tempfile::tempdir().unwrap();
    let stub = common::script(dir.path(), "sat.sh", "echo sat");
    let solver = SolverCmd::parse(&format!("{} {{file}}", stub.display())).unwrap();
    let models = vec![
        ("bad".to_string(), "(univ A$0) (formula (someof q))".to_string()),
        ("good".to_string(), FAST.to_string()),
    ];
    let recs = bench_models(&models, &config(solver, Options::all(), 5000));
    assert_eq!(recs.len(), 24);
    assert!(recs[..12].iter().all(|r| r.result == Outcome::Error && r.peak_note.is_some()));
    assert!(recs[12..].iter().all(|r| r.result == Outcome::Sat));
}

#[test]
fn directory_csv() {
    let dir = tempfile::tempdir().unwrap();
    std::fs::write(dir.path().join("two.kkir"), SLOW).unwrap();
    std::fs::write(dir.path().join("one.kkir"), FAST).unwrap();
    std::fs::write(dir.path().join("notes.txt"), "ignored").unwrap();
    let stub = common::script(dir.path(), "sat.sh", "echo sat");
    let solver = SolverCmd::parse(&format!("{} {{file}}", stub.display())).unwrap();
    let recs = bench(dir.path(), &config(solver, interesting(), 5000)).unwrap();
    let mut buf = Vec::new();
    write_csv(&recs, &mut buf).unwrap();
    let text = String::from_utf8(buf).unwrap();
    let mut rows = csv::Reader::from_reader(text.as_bytes());
    assert_eq!(rows.headers().unwrap().iter().collect::<Vec<_>>(), CSV_HEADER);
    let rows: Vec<csv::StringRecord> = rows.records().map(Result::unwrap).collect();
    assert_eq!(rows.len(), 8);
    assert_eq!(&rows[0][0], "one");
    assert_eq!(&rows[4][0], "two");
    assert_eq!(rows[0].iter().skip(1).take(3).collect::<Vec<_>>(), ["typed", "functions", "expand"]);
    assert_eq!(&rows[3][6], "SAT");
    assert_eq!(&rows[3][8], "5000");
}
