//! Helpers shared by the CLI test targets.

#![allow(dead_code)]

use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

pub const GOLDEN_CASES: &[&str] = &["direct", "disjoint", "matmul", "mpo", "reduced", "trace"];

pub fn fixtures() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/fixtures")
}

pub fn ftt(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_ftt"))
        .args(args)
        .output()
        .expect("failed to launch ftt")
}

/// Runs `ftt contract` on one fixture directory and compares bytes.
pub fn check_golden(case: &str, scratch: &Path) -> Result<(), String> {
    let dir = fixtures().join(case);
    let spec = fs::read_to_string(dir.join("spec")).map_err(|e| e.to_string())?;
    let out = scratch.join(format!("{case}.sten"));
    let run = ftt(&[
        "contract",
        "--spec",
        spec.trim(),
        "--a",
        dir.join("a.sten").to_str().unwrap(),
        "--b",
        dir.join("b.sten").to_str().unwrap(),
        "--out",
        out.to_str().unwrap(),
    ]);
    if !run.status.success() {
        return Err(format!(
            "{case}: exit {:?}: {}",
            run.status.code(),
            String::from_utf8_lossy(&run.stderr)
        ));
    }
    let got = fs::read(&out).map_err(|e| e.to_string())?;
    let want = fs::read(dir.join("expected.sten")).map_err(|e| e.to_string())?;
    if got != want {
        return Err(format!(
            "{case}: output differs\n--- got\n{}--- want\n{}",
            String::from_utf8_lossy(&got),
            String::from_utf8_lossy(&want)
        ));
    }
    Ok(())
}

pub const BENCH_ARGS: &[&str] = &[
    "bench",
    "--experiment",
    "matmul",
    "--size",
    "32",
    "--sparsity-from",
    "0.5",
    "--sparsity-to",
    "0.05",
    "--grid-points",
    "5",
    "--seeds",
    "2",
    "--base-seed",
    "9",
    "--min-sample-ms",
    "0",
    "--oracle-check",
];

pub const CSV_HEADER: &str = "experiment,sparsity,nnz_a,nnz_b,mult_count,time_sparse_s,time_dense_s,checksum";

/// Runs the fixed-seed bench and returns its CSV text.
pub fn bench_csv(scratch: &Path, name: &str) -> Result<String, String> {
    let out = scratch.join(name);
    let mut args = BENCH_ARGS.to_vec();
    args.extend(["--out", out.to_str().unwrap()]);
    let run = ftt(&args);
    if !run.status.success() {
        return Err(format!(
            "bench exit {:?}: {}",
            run.status.code(),
            String::from_utf8_lossy(&run.stderr)
        ));
    }
    fs::read_to_string(&out).map_err(|e| e.to_string())
}

pub fn checksums(csv: &str) -> Vec<String> {
    csv.lines()
        .skip(1)
        .map(|l| l.rsplit(',').next().unwrap_or_default().to_string())
        .collect()
}

/// Two fixed-seed runs agree on schema and checksums, and the checksums
/// match the checked-in record.
pub fn check_csv_stability(scratch: &Path) -> Result<(), String> {
    let first = bench_csv(scratch, "run1.csv")?;
    let second = bench_csv(scratch, "run2.csv")?;
    for csv in [&first, &second] {
        if csv.lines().next() != Some(CSV_HEADER) {
            return Err(format!("unexpected header {:?}", csv.lines().next()));
        }
        if let Some(bad) = csv.lines().find(|l| l.split(',').count() != 8) {
            return Err(format!("row with wrong field count: {bad}"));
        }
    }
    let (c1, c2) = (checksums(&first), checksums(&second));
    if c1 != c2 {
        return Err(format!("checksums differ between runs: {c1:?} vs {c2:?}"));
    }
    let recorded = fs::read_to_string(fixtures().join("bench_matmul_checksums.txt")).map_err(|e| e.to_string())?;
    let recorded: Vec<String> = recorded.lines().map(str::to_string).collect();
    if c1 != recorded {
        return Err(format!("checksums {c1:?} differ from recorded {recorded:?}"));
    }
    Ok(())
}
