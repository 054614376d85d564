use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::PathBuf;
use std::process::ExitCode;
use std::time::Duration;

use anyhow::Context;
use clap::{Parser, Subcommand};

use ftt_core::experiment::{
    fit_slope, geometric_grid, mult_count_slope, read_csv, run_experiment_with, CsvSink, Experiment, ExperimentConfig,
    ResultRow,
};
use ftt_core::textfmt::{format_sparse, read_sparse, ReadError};
use ftt_core::{contract_sparse_sparse, ContractionPlan};

#[derive(Parser)]
#[command(name = "ftt", version, about = "Sparse tensor partial traces")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Sweep sparsity for one contraction and write a CSV of timings.
    Bench(BenchArgs),
    /// Contract two text tensors.
    Contract {
        #[arg(long)]
        spec: String,
        #[arg(long)]
        a: PathBuf,
        #[arg(long)]
        b: PathBuf,
        #[arg(long)]
        out: PathBuf,
    },
    /// Fit log-log slopes to a bench CSV.
    Slope {
        #[arg(long = "in")]
        input: PathBuf,
    },
}

#[derive(clap::Args)]
struct BenchArgs {
    /// matmul, mpo, pepo or custom
    #[arg(long)]
    experiment: String,
    #[arg(long)]
    subscripts: Option<String>,
    #[arg(long, value_delimiter = ',', num_args = 1..)]
    shape_a: Option<Vec<usize>>,
    #[arg(long, value_delimiter = ',', num_args = 1..)]
    shape_b: Option<Vec<usize>>,
    /// Matrix side for matmul, axis extent for mpo/pepo.
    #[arg(long)]
    size: Option<usize>,
    #[arg(long)]
    sparsity_from: f64,
    #[arg(long)]
    sparsity_to: f64,
    #[arg(long)]
    grid_points: usize,
    #[arg(long, default_value_t = 3)]
    seeds: usize,
    #[arg(long, default_value_t = 0)]
    base_seed: u64,
    #[arg(long)]
    dense_control: bool,
    #[arg(long)]
    oracle_check: bool,
    /// Keep operand b fully populated; only operand a is swept.
    #[arg(long)]
    sweep_one_side: bool,
    /// Minimum wall time per timed sample, in milliseconds.
    #[arg(long, default_value_t = 2)]
    min_sample_ms: u64,
    #[arg(long)]
    out: PathBuf,
}

impl BenchArgs {
    fn config(&self) -> ftt_core::Result<ExperimentConfig> {
        let experiment: Experiment = self.experiment.parse()?;
        let mut cfg = match experiment {
            Experiment::Matmul => ExperimentConfig::matmul(self.size.unwrap_or(64)),
            Experiment::Mpo => ExperimentConfig::mpo(self.size.unwrap_or(20)),
            Experiment::Pepo => ExperimentConfig::pepo(self.size.unwrap_or(8)),
            Experiment::Custom => {
                let (Some(s), Some(a), Some(b)) = (&self.subscripts, &self.shape_a, &self.shape_b) else {
                    return Err(ftt_core::Error::InvalidConfig(
                        "custom needs --subscripts, --shape-a and --shape-b".into(),
                    ));
                };
                ExperimentConfig::custom(s, a.clone(), b.clone())
            }
        };
        if experiment != Experiment::Custom {
            if let Some(s) = &self.subscripts {
                cfg.subscripts = s.clone();
            }
            if let Some(a) = &self.shape_a {
                cfg.shape_a = a.clone();
            }
            if let Some(b) = &self.shape_b {
                cfg.shape_b = b.clone();
            }
        }
        cfg.sparsity_grid = geometric_grid(self.sparsity_from, self.sparsity_to, self.grid_points)?;
        cfg.seeds = self.seeds;
        cfg.base_seed = self.base_seed;
        cfg.include_dense_control = self.dense_control;
        cfg.oracle_check = self.oracle_check;
        cfg.sweep_one_side = self.sweep_one_side;
        cfg.min_sample_time = Duration::from_millis(self.min_sample_ms);
        Ok(cfg)
    }
}

fn bench(args: &BenchArgs) -> anyhow::Result<()> {
    let cfg = args.config()?;
    cfg.validate()?;
    let file = File::create(&args.out).with_context(|| format!("creating {}", args.out.display()))?;
    let mut sink = CsvSink::new(BufWriter::new(file));
    let mut write_err = None;
    let rows = run_experiment_with(&cfg, |row| {
        eprintln!(
            "sparsity {:.3e}  nnz {}x{}  mults {}  sparse {:.3e}s{}",
            row.sparsity,
            row.nnz_a,
            row.nnz_b,
            row.mult_count,
            row.time_sparse_s,
            row.time_dense_s
                .map(|t| format!("  dense {t:.3e}s"))
                .unwrap_or_default(),
        );
        if write_err.is_none() {
            write_err = sink.push(row).err();
        }
    })?;
    if let Some(e) = write_err {
        return Err(e).context("writing CSV");
    }
    report(&rows);
    Ok(())
}

fn report(rows: &[ResultRow]) {
    if let Some(dense) = rows.first().and_then(|r| r.time_dense_s) {
        match rows.iter().find(|r| r.time_sparse_s < dense) {
            Some(r) => eprintln!("crossover: sparse faster from sparsity {:.3e}", r.sparsity),
            None => eprintln!("crossover: sparse never faster on this grid"),
        }
    }
    match mult_count_slope(rows) {
        Ok(s) => eprintln!("mult_count_slope {s:.4}"),
        Err(e) => eprintln!("mult_count_slope unavailable: {e}"),
    }
    match fit_slope(rows) {
        Ok(s) => eprintln!("time_slope {s:.4}"),
        Err(e) => eprintln!("time_slope unavailable: {e}"),
    }
}

fn load(path: &PathBuf) -> anyhow::Result<ftt_core::SparseTensor> {
    let file = File::open(path).with_context(|| format!("opening {}", path.display()))?;
    match read_sparse(std::io::BufReader::new(file)) {
        Ok(t) => Ok(t),
        Err(ReadError::Format(e)) => Err(anyhow::Error::new(e).context(format!("parsing {}", path.display()))),
        Err(ReadError::Io(e)) => Err(anyhow::Error::new(e).context(format!("reading {}", path.display()))),
    }
}

fn contract(spec: &str, a: &PathBuf, b: &PathBuf, out: &PathBuf) -> anyhow::Result<()> {
    let (a, b) = (load(a)?, load(b)?);
    let plan = ContractionPlan::new(spec, a.shape(), b.shape())?;
    let c = contract_sparse_sparse(&a, &b, &plan)?;
    let mut w = BufWriter::new(File::create(out).with_context(|| format!("creating {}", out.display()))?);
    w.write_all(format_sparse(&c).as_bytes())?;
    w.flush()?;
    Ok(())
}

fn slope(input: &PathBuf) -> anyhow::Result<()> {
    let file = File::open(input).with_context(|| format!("opening {}", input.display()))?;
    let rows = read_csv(file).context("reading CSV")?;
    let counts = mult_count_slope(&rows)?;
    println!("mult_count_slope {counts:.6}");
    let time = fit_slope(&rows)?;
    println!("time_slope {time:.6}");
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match &cli.command {
        Command::Bench(args) => bench(args),
        Command::Contract { spec, a, b, out } => contract(spec, a, b, out),
        Command::Slope { input } => slope(input),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            // validation failures (bad tensors, subscripts, configs) exit 2
            if e.chain().any(|c| c.is::<ftt_core::Error>()) {
                ExitCode::from(2)
            } else {
                ExitCode::FAILURE
            }
        }
    }
}
