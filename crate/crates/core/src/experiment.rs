//! Sparsity sweeps: time the sparse kernel across a grid of sparsities,
//! record deterministic work counts, and fit log-log scaling slopes.

use std::fmt;
use std::io::Write;
use std::str::FromStr;
use std::time::{Duration, Instant};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::contract::{contract_dense_dense, contract_sparse_sparse_with_stats};
use crate::error::{Error, Result};
use crate::oracle::{dense_contract, label_space, within_tolerance, ORACLE_LIMIT};
use crate::plan::ContractionPlan;
use crate::randgen::{nnz_for_sparsity, random_sparse};
use crate::tensor::SparseTensor;

/// Relative tolerance for `--oracle-check`.
pub const ORACLE_RTOL: f64 = 1e-12;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Experiment {
    Matmul,
    Mpo,
    Pepo,
    Custom,
}

impl Experiment {
    pub fn name(self) -> &'static str {
        match self {
            Experiment::Matmul => "matmul",
            Experiment::Mpo => "mpo",
            Experiment::Pepo => "pepo",
            Experiment::Custom => "custom",
        }
    }
}

impl fmt::Display for Experiment {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Experiment {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "matmul" => Ok(Experiment::Matmul),
            "mpo" => Ok(Experiment::Mpo),
            "pepo" => Ok(Experiment::Pepo),
            "custom" => Ok(Experiment::Custom),
            other => Err(Error::InvalidConfig(format!("unknown experiment {other:?}"))),
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct ExperimentConfig {
    pub experiment: Experiment,
    pub subscripts: String,
    pub shape_a: Vec<usize>,
    pub shape_b: Vec<usize>,
    /// Target sparsities, descending.
    pub sparsity_grid: Vec<f64>,
    /// Repetitions per grid point; each uses fresh operands.
    pub seeds: usize,
    pub base_seed: u64,
    pub include_dense_control: bool,
    pub oracle_check: bool,
    /// Hold operand b fully populated and sweep only operand a.
    pub sweep_one_side: bool,
    /// A timed sample repeats the kernel until at least this much time passed.
    pub min_sample_time: Duration,
}

impl ExperimentConfig {
    fn with(experiment: Experiment, subscripts: &str, shape_a: Vec<usize>, shape_b: Vec<usize>) -> Self {
        Self {
            experiment,
            subscripts: subscripts.to_string(),
            shape_a,
            shape_b,
            sparsity_grid: vec![1.0, 0.1, 0.01],
            seeds: 3,
            base_seed: 0,
            include_dense_control: false,
            oracle_check: false,
            sweep_one_side: false,
            min_sample_time: Duration::from_millis(2),
        }
    }

    /// `ab,bc->ac` on two `n × n` matrices.
    pub fn matmul(n: usize) -> Self {
        Self::with(Experiment::Matmul, "ab,bc->ac", vec![n, n], vec![n, n])
    }

    /// Two 4-index MPO site tensors sharing one bond (default extent 20).
    pub fn mpo(extent: usize) -> Self {
        Self::with(Experiment::Mpo, "ABab,BCcd->ACabcd", vec![extent; 4], vec![extent; 4])
    }

    /// Two 6-index PEPO site tensors sharing one bond (default extent 8).
    pub fn pepo(extent: usize) -> Self {
        Self::with(
            Experiment::Pepo,
            "ABCDab,DEFGcd->ABCEFGabcd",
            vec![extent; 6],
            vec![extent; 6],
        )
    }

    pub fn custom(subscripts: &str, shape_a: Vec<usize>, shape_b: Vec<usize>) -> Self {
        Self::with(Experiment::Custom, subscripts, shape_a, shape_b)
    }

    pub fn validate(&self) -> Result<ContractionPlan> {
        let bad = |msg: String| Err(Error::InvalidConfig(msg));
        if self.sparsity_grid.is_empty() {
            return bad("empty sparsity grid".into());
        }
        if let Some(p) = self.sparsity_grid.iter().find(|p| !(**p > 0.0 && **p <= 1.0)) {
            return bad(format!("sparsity {p} outside (0, 1]"));
        }
        if self.seeds == 0 {
            return bad("need at least one seed".into());
        }
        let plan = ContractionPlan::new(&self.subscripts, &self.shape_a, &self.shape_b)?;
        if self.oracle_check && label_space(&plan) > ORACLE_LIMIT {
            return bad(format!(
                "oracle check needs a label space <= {ORACLE_LIMIT}, this one has {}",
                label_space(&plan)
            ));
        }
        if self.include_dense_control {
            let (mults, elems) = dense_cost(&plan);
            if mults > DENSE_MULT_LIMIT || elems > DENSE_ELEMENT_LIMIT {
                return bad(format!(
                    "dense control needs <= {DENSE_MULT_LIMIT} products and <= {DENSE_ELEMENT_LIMIT} elements \
                     per tensor, this one has {mults} and {elems}"
                ));
            }
        }
        Ok(plan)
    }

    /// The operand pair for one grid point and repetition.
    pub fn operands(&self, sparsity: f64, rep: usize) -> Result<(SparseTensor, SparseTensor)> {
        let seed = self.base_seed.wrapping_add(2 * rep as u64);
        let nnz_a = nnz_for_sparsity(&self.shape_a, sparsity)?;
        let nnz_b = nnz_for_sparsity(&self.shape_b, if self.sweep_one_side { 1.0 } else { sparsity })?;
        Ok((
            random_sparse(&self.shape_a, nnz_a, seed)?,
            random_sparse(&self.shape_b, nnz_b, seed.wrapping_add(1))?,
        ))
    }
}

/// Caps on the dense control: total products, and elements in the largest
/// operand or output.
pub const DENSE_MULT_LIMIT: u128 = 1 << 34;
pub const DENSE_ELEMENT_LIMIT: u128 = 1 << 26;

fn dense_cost(plan: &ContractionPlan) -> (u128, u128) {
    let size = |s: &[usize]| s.iter().map(|&k| k as u128).product::<u128>();
    let ie = size(&plan.external_a().extents(&plan.shape_a()));
    let je = size(&plan.external_b().extents(&plan.shape_b()));
    let ii = size(&plan.overlap_extents());
    let elems = size(&plan.shape_a()).max(size(&plan.shape_b())).max(ie * je);
    (ie * ii * je, elems)
}

/// `points` values spaced evenly in log between `from` and `to`, descending.
pub fn geometric_grid(from: f64, to: f64, points: usize) -> Result<Vec<f64>> {
    let ok = |p: f64| p > 0.0 && p <= 1.0;
    if !ok(from) || !ok(to) || points == 0 {
        return Err(Error::InvalidConfig(format!(
            "grid needs 0 < from, to <= 1 and at least one point (got {from}, {to}, {points})"
        )));
    }
    let (hi, lo) = if from >= to { (from, to) } else { (to, from) };
    if points == 1 {
        return Ok(vec![hi]);
    }
    let step = (lo.ln() - hi.ln()) / (points - 1) as f64;
    Ok((0..points)
        .map(|k| match k {
            0 => hi,
            k if k == points - 1 => lo,
            k => (hi.ln() + step * k as f64).exp(),
        })
        .collect())
}

/// One CSV row per grid point.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ResultRow {
    pub experiment: String,
    /// Realized sparsity of operand a.
    pub sparsity: f64,
    pub nnz_a: usize,
    pub nnz_b: usize,
    /// Mean multiplications per repetition, rounded.
    pub mult_count: u64,
    /// Median seconds per kernel call.
    pub time_sparse_s: f64,
    pub time_dense_s: Option<f64>,
    /// Digest of every repetition's result (indices and data bits).
    pub checksum: String,
}

fn median(mut xs: Vec<f64>) -> f64 {
    xs.sort_by(|a, b| a.total_cmp(b));
    let n = xs.len();
    if n % 2 == 1 {
        xs[n / 2]
    } else {
        0.5 * (xs[n / 2 - 1] + xs[n / 2])
    }
}

/// Seconds per call of `f`, repeating until `min` has elapsed.
fn time_call<T>(min: Duration, mut f: impl FnMut() -> Result<T>) -> Result<f64> {
    let start = Instant::now();
    let mut calls = 0u32;
    loop {
        std::hint::black_box(f()?);
        calls += 1;
        let elapsed = start.elapsed();
        if elapsed >= min {
            return Ok(elapsed.as_secs_f64() / calls as f64);
        }
    }
}

fn digest_result(hasher: &mut Sha256, t: &SparseTensor) {
    for &k in t.shape() {
        hasher.update((k as u64).to_le_bytes());
    }
    for &i in t.indices().as_flat() {
        hasher.update((i as u64).to_le_bytes());
    }
    for v in t.data() {
        hasher.update(v.to_bits().to_le_bytes());
    }
}

pub fn run_experiment(cfg: &ExperimentConfig) -> Result<Vec<ResultRow>> {
    run_experiment_with(cfg, |_| {})
}

/// Runs the sweep, handing each row to `on_row` as soon as it is complete.
pub fn run_experiment_with(cfg: &ExperimentConfig, mut on_row: impl FnMut(&ResultRow)) -> Result<Vec<ResultRow>> {
    let plan = cfg.validate()?;

    // sparsity independent, so measured once
    let time_dense = if cfg.include_dense_control {
        let (a, b) = cfg.operands(1.0, 0)?;
        let (da, db) = (a.to_dense()?, b.to_dense()?);
        contract_dense_dense(&da, &db, &plan)?;
        Some(time_call(cfg.min_sample_time, || {
            contract_dense_dense(&da, &db, &plan)
        })?)
    } else {
        None
    };

    let mut rows = Vec::with_capacity(cfg.sparsity_grid.len());
    for &target in &cfg.sparsity_grid {
        let mut hasher = Sha256::new();
        let mut times = Vec::with_capacity(cfg.seeds);
        let mut mults = 0u64;
        let mut first = None;
        for rep in 0..cfg.seeds {
            let (a, b) = cfg.operands(target, rep)?;
            let (result, stats) = contract_sparse_sparse_with_stats(&a, &b, &plan)?;
            if rep == 0 && cfg.oracle_check {
                let expected = dense_contract(&a.to_dense()?, &b.to_dense()?, &plan)?;
                let got = result.to_dense()?;
                if !within_tolerance(&got, &expected, ORACLE_RTOL)? {
                    return Err(Error::OracleMismatch {
                        sparsity: a.sparsity()?,
                        diff: crate::oracle::max_abs_diff(&got, &expected)?,
                    });
                }
            }
            // the call above doubles as warm-up
            times.push(time_call(cfg.min_sample_time, || {
                contract_sparse_sparse_with_stats(&a, &b, &plan)
            })?);
            digest_result(&mut hasher, &result);
            mults += stats.mult_count;
            first.get_or_insert((a.sparsity()?, a.nnz(), b.nnz()));
        }
        let (sparsity, nnz_a, nnz_b) = first.expect("at least one seed");
        let seeds = cfg.seeds as u64;
        let row = ResultRow {
            experiment: cfg.experiment.name().to_string(),
            sparsity,
            nnz_a,
            nnz_b,
            mult_count: (mults + seeds / 2) / seeds,
            time_sparse_s: median(times),
            time_dense_s: time_dense,
            checksum: hex::encode(&hasher.finalize()[..8]),
        };
        on_row(&row);
        rows.push(row);
    }
    Ok(rows)
}

/// Smallest positive step observed between consecutive clock reads.
pub fn timer_resolution() -> f64 {
    let mut best = f64::INFINITY;
    for _ in 0..2000 {
        let t0 = Instant::now();
        let mut t1 = Instant::now();
        while t1 == t0 {
            t1 = Instant::now();
        }
        best = best.min((t1 - t0).as_secs_f64());
    }
    best
}

/// Least-squares slope of `ln y` against `ln x`.
pub fn log_log_slope(points: &[(f64, f64)]) -> Result<f64> {
    let usable: Vec<(f64, f64)> = points
        .iter()
        .filter(|(x, y)| *x > 0.0 && *y > 0.0)
        .map(|(x, y)| (x.ln(), y.ln()))
        .collect();
    if usable.len() < 2 {
        return Err(Error::InsufficientPoints {
            needed: 2,
            got: usable.len(),
        });
    }
    let n = usable.len() as f64;
    let mx = usable.iter().map(|p| p.0).sum::<f64>() / n;
    let my = usable.iter().map(|p| p.1).sum::<f64>() / n;
    let sxy: f64 = usable.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let sxx: f64 = usable.iter().map(|p| (p.0 - mx).powi(2)).sum();
    if sxx == 0.0 {
        return Err(Error::InsufficientPoints { needed: 2, got: 1 });
    }
    Ok(sxy / sxx)
}

/// Minimum number of grid points a time slope is fitted over.
pub const MIN_SLOPE_POINTS: usize = 5;

/// Slope of log(kernel time) vs log(sparsity), ignoring points whose time
/// is within 10× of `resolution`.
pub fn fit_slope_with_resolution(rows: &[ResultRow], resolution: f64) -> Result<f64> {
    let points: Vec<(f64, f64)> = rows
        .iter()
        .filter(|r| r.sparsity > 0.0 && r.time_sparse_s > 10.0 * resolution)
        .map(|r| (r.sparsity, r.time_sparse_s))
        .collect();
    if points.len() < MIN_SLOPE_POINTS {
        return Err(Error::InsufficientPoints {
            needed: MIN_SLOPE_POINTS,
            got: points.len(),
        });
    }
    log_log_slope(&points)
}

pub fn fit_slope(rows: &[ResultRow]) -> Result<f64> {
    fit_slope_with_resolution(rows, timer_resolution())
}

/// Slope of log(multiplication count) vs log(sparsity); machine independent.
pub fn mult_count_slope(rows: &[ResultRow]) -> Result<f64> {
    let points: Vec<(f64, f64)> = rows.iter().map(|r| (r.sparsity, r.mult_count as f64)).collect();
    log_log_slope(&points)
}

/// Streams rows to CSV with the fixed column order, flushing after each row.
pub struct CsvSink<W: Write> {
    writer: csv::Writer<W>,
}

impl<W: Write> CsvSink<W> {
    pub fn new(inner: W) -> Self {
        Self {
            writer: csv::Writer::from_writer(inner),
        }
    }

    pub fn push(&mut self, row: &ResultRow) -> csv::Result<()> {
        self.writer.serialize(row)?;
        self.writer.flush()?;
        Ok(())
    }
}

pub const CSV_HEADER: &str = "experiment,sparsity,nnz_a,nnz_b,mult_count,time_sparse_s,time_dense_s,checksum";

pub fn write_csv<W: Write>(inner: W, rows: &[ResultRow]) -> csv::Result<()> {
    let mut sink = CsvSink::new(inner);
    for r in rows {
        sink.push(r)?;
    }
    if rows.is_empty() {
        let mut w = sink.writer.into_inner().map_err(|e| e.into_error())?;
        writeln!(w, "{CSV_HEADER}")?;
    }
    Ok(())
}

pub fn read_csv<R: std::io::Read>(inner: R) -> csv::Result<Vec<ResultRow>> {
    csv::Reader::from_reader(inner).deserialize().collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn synthetic(f: impl Fn(f64) -> f64) -> Vec<ResultRow> {
        geometric_grid(1.0, 1e-3, 7)
            .unwrap()
            .into_iter()
            .map(|p| ResultRow {
                experiment: "custom".into(),
                sparsity: p,
                nnz_a: 0,
                nnz_b: 0,
                mult_count: 0,
                time_sparse_s: f(p),
                time_dense_s: None,
                checksum: String::new(),
            })
            .collect()
    }

    #[test]
    fn slope_of_exact_power_laws() {
        let linear = fit_slope_with_resolution(&synthetic(|p| 0.5 * p), 1e-9).unwrap();
        assert!((linear - 1.0).abs() < 1e-9);
        let quad = fit_slope_with_resolution(&synthetic(|p| 3.0 * p * p), 1e-9).unwrap();
        assert!((quad - 2.0).abs() < 1e-9);
    }

    #[test]
    fn slope_needs_enough_points() {
        let rows = synthetic(|p| p * 1e-6);
        // only points above 10 * 1e-8 survive: p >= 0.1 -> 1.0, 0.316, 0.1
        assert!(matches!(
            fit_slope_with_resolution(&rows, 1e-8),
            Err(Error::InsufficientPoints { needed: 5, got: 3 })
        ));
    }

    #[test]
    fn grid_is_descending_geometric() {
        let g = geometric_grid(1e-3, 1.0, 4).unwrap();
        assert_eq!(g.len(), 4);
        assert_eq!((g[0], g[3]), (1.0, 1e-3));
        assert!((g[1] - 0.1).abs() < 1e-12 && (g[2] - 0.01).abs() < 1e-12);
        assert!(geometric_grid(0.0, 1.0, 3).is_err());
        assert!(geometric_grid(0.5, 2.0, 3).is_err());
    }

    #[test]
    fn matmul_counts_are_deterministic_and_monotone() {
        let mut cfg = ExperimentConfig::matmul(64);
        cfg.sparsity_grid = vec![0.5, 0.05, 0.005];
        cfg.min_sample_time = Duration::ZERO;
        let a = run_experiment(&cfg).unwrap();
        let b = run_experiment(&cfg).unwrap();
        assert_eq!(a.len(), 3);
        for (x, y) in a.iter().zip(&b) {
            assert_eq!((x.mult_count, &x.checksum), (y.mult_count, &y.checksum));
        }
        assert!(a.windows(2).all(|w| w[0].mult_count >= w[1].mult_count));
    }

    #[test]
    fn dense_matmul_does_n_cubed_products() {
        let mut cfg = ExperimentConfig::matmul(16);
        cfg.sparsity_grid = vec![1.0];
        cfg.seeds = 1;
        cfg.min_sample_time = Duration::ZERO;
        cfg.include_dense_control = true;
        let rows = run_experiment(&cfg).unwrap();
        assert_eq!(rows[0].mult_count, 16 * 16 * 16);
        assert!(rows[0].time_dense_s.is_some());
    }

    #[test]
    fn pepo_oracle_check_at_desk_scale() {
        let mut cfg = ExperimentConfig::pepo(4);
        cfg.sparsity_grid = vec![1e-4];
        cfg.seeds = 1;
        cfg.oracle_check = true;
        cfg.min_sample_time = Duration::ZERO;
        let rows = run_experiment(&cfg).unwrap();
        assert_eq!(rows.len(), 1);
        assert_eq!(rows[0].nnz_a, 1);
    }

    #[test]
    fn invalid_configs() {
        let mut cfg = ExperimentConfig::matmul(8);
        cfg.sparsity_grid = vec![1.5];
        assert!(matches!(cfg.validate(), Err(Error::InvalidConfig(_))));
        let mut cfg = ExperimentConfig::mpo(20);
        cfg.oracle_check = true;
        assert!(matches!(cfg.validate(), Err(Error::InvalidConfig(_))));
        let cfg = ExperimentConfig::custom("ab,bc->ac", vec![2, 3], vec![4, 2]);
        assert!(matches!(cfg.validate(), Err(Error::ExtentMismatch { .. })));
        assert!("tensor".parse::<Experiment>().is_err());
    }

    #[test]
    fn csv_round_trip_and_header() {
        let rows = synthetic(|p| p);
        let mut buf = Vec::new();
        write_csv(&mut buf, &rows).unwrap();
        let text = String::from_utf8(buf.clone()).unwrap();
        assert_eq!(text.lines().next().unwrap(), CSV_HEADER);
        assert_eq!(read_csv(&buf[..]).unwrap(), rows);
        let mut empty = Vec::new();
        write_csv(&mut empty, &[]).unwrap();
        assert_eq!(String::from_utf8(empty).unwrap().trim_end(), CSV_HEADER);
    }
}
