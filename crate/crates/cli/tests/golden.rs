mod common;

use common::*;

#[test]
fn contract_matches_golden_outputs() {
    let scratch = tempfile::tempdir().unwrap();
    for case in GOLDEN_CASES {
        check_golden(case, scratch.path()).unwrap();
    }
}

#[test]
fn bench_csv_is_stable_for_fixed_seeds() {
    let scratch = tempfile::tempdir().unwrap();
    check_csv_stability(scratch.path()).unwrap();
}

#[test]
fn slope_reads_bench_output() {
    let scratch = tempfile::tempdir().unwrap();
    bench_csv(scratch.path(), "s.csv").unwrap();
    let run = ftt(&["slope", "--in", scratch.path().join("s.csv").to_str().unwrap()]);
    assert!(run.status.success(), "{}", String::from_utf8_lossy(&run.stderr));
    let text = String::from_utf8(run.stdout).unwrap();
    assert!(text.contains("mult_count_slope"), "{text}");
}
