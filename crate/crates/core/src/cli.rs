//! The `isoadmm` command line: `gen`, `solve` and `bench`.
//!
//! Exit codes: 0 success (a diverged run is a success unless
//! `--fail-on-diverge` is given), 1 usage, 2 input or parse failure,
//! 3 oracle capacity exceeded, 4 diverged under `--fail-on-diverge`.

use std::io::Write;
use std::path::{Path, PathBuf};
use std::time::Instant;

use clap::{Parser, Subcommand, ValueEnum};
use serde::{Deserialize, Serialize};

use crate::bench::{self, BenchPlan, BENCH_HEADER};
use crate::config::{Init, SolverConfig};
use crate::datagen::{gen_dag, gen_smooth, GenSpec, ProblemKind};
use crate::error::Error;
use crate::io::{digest, Instance, TraceWriter};
use crate::problem::max_violation_chain;
use crate::report::{lossless_f64, lossless_vec, Status};
use crate::{dag, oracle, smooth};

pub const EXIT_OK: i32 = 0;
pub const EXIT_USAGE: i32 = 1;
pub const EXIT_INPUT: i32 = 2;
pub const EXIT_CAPACITY: i32 = 3;
pub const EXIT_DIVERGED: i32 = 4;

#[derive(Debug, Parser)]
#[command(name = "isoadmm", version, about = "Multi-block ADMM for isotonic regression")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum ProblemArg {
    Smooth,
    Dag,
}

impl From<ProblemArg> for ProblemKind {
    fn from(p: ProblemArg) -> Self {
        match p {
            ProblemArg::Smooth => ProblemKind::Smooth,
            ProblemArg::Dag => ProblemKind::Dag,
        }
    }
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum InitArg {
    Zeros,
    FromObservations,
}

impl From<InitArg> for Init {
    fn from(i: InitArg) -> Self {
        match i {
            InitArg::Zeros => Init::Zeros,
            InitArg::FromObservations => Init::FromObservations,
        }
    }
}

#[derive(Debug, clap::Args)]
pub struct SolverArgs {
    #[arg(long, default_value_t = 0.1)]
    pub rho: f64,
    #[arg(long, default_value_t = 10_000)]
    pub max_iter: usize,
    /// Tolerance is tol_factor * sqrt(n).
    #[arg(long, default_value_t = 0.01)]
    pub tol_factor: f64,
    #[arg(long, default_value_t = 1e10)]
    pub divergence_bound: f64,
    #[arg(long, value_enum, default_value_t = InitArg::FromObservations)]
    pub init: InitArg,
    /// Worker threads for coordinate updates (1 = deterministic single thread).
    #[arg(long, default_value_t = 1)]
    pub threads: usize,
}

impl SolverArgs {
    fn config(&self) -> SolverConfig {
        SolverConfig {
            rho: self.rho,
            max_iter: self.max_iter,
            tol_factor: self.tol_factor,
            divergence_bound: self.divergence_bound,
            init: self.init.into(),
            threads: self.threads,
        }
    }
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Generate a random instance file.
    Gen {
        #[arg(long, value_enum)]
        problem: ProblemArg,
        #[arg(long)]
        n: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Smoothing penalty (smooth only).
        #[arg(long, default_value_t = 1.0)]
        lambda: f64,
        /// Probability of keeping each grid edge (dag only).
        #[arg(long, default_value_t = 1.0)]
        keep_prob: f64,
        #[arg(short, long)]
        output: PathBuf,
    },
    /// Solve an instance file and print a JSON report.
    Solve {
        instance: PathBuf,
        #[command(flatten)]
        solver: SolverArgs,
        /// Write the per-iteration trace as CSV.
        #[arg(long)]
        trace: Option<PathBuf>,
        /// Also solve exactly and report the gap (small instances only).
        #[arg(long)]
        oracle: bool,
        #[arg(long)]
        fail_on_diverge: bool,
        /// Write the report here instead of stdout.
        #[arg(short, long)]
        output: Option<PathBuf>,
    },
    /// Time the solver over a list of generated instance sizes.
    Bench {
        #[arg(long, value_enum)]
        problem: ProblemArg,
        /// Comma-separated instance sizes.
        #[arg(long, value_delimiter = ',', required = true)]
        sizes: Vec<usize>,
        #[arg(long, default_value_t = 1)]
        reps: usize,
        /// Repetition r uses seed + r.
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value_t = 1.0)]
        lambda: f64,
        #[arg(long, default_value_t = 1.0)]
        keep_prob: f64,
        #[command(flatten)]
        solver: SolverArgs,
        #[arg(long)]
        fail_on_diverge: bool,
        /// Write the CSV here instead of stdout.
        #[arg(short, long)]
        output: Option<PathBuf>,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Timings {
    pub setup_ms: f64,
    pub iterations_ms: f64,
    pub total_ms: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OracleGap {
    /// `max_i |admm_i - exact_i|`.
    pub linf_gap: f64,
    pub oracle_objective: f64,
    pub kkt_residual: f64,
}

/// JSON report written by `solve`. Echoes everything needed to rerun it.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunRecord {
    pub command: String,
    pub instance: String,
    pub instance_digest: String,
    pub problem: ProblemKind,
    pub n: usize,
    pub edges: usize,
    pub config: SolverConfig,
    pub timings: Timings,
    pub iterations: usize,
    pub status: Status,
    #[serde(with = "lossless_f64")]
    pub final_r: f64,
    #[serde(with = "lossless_f64")]
    pub final_s: f64,
    pub epsilon: f64,
    #[serde(with = "lossless_f64")]
    pub objective: f64,
    #[serde(with = "lossless_f64")]
    pub max_violation: f64,
    #[serde(with = "lossless_f64")]
    pub consistency_gap: f64,
    pub oracle: Option<OracleGap>,
    pub notes: Vec<String>,
    #[serde(with = "lossless_vec")]
    pub solution: Vec<f64>,
}

/// Parses `args` (including the program name) and runs the command,
/// returning the process exit code.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
        }
    };
    match execute(cli.command) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            match e {
                Error::Capacity(_) => EXIT_CAPACITY,
                _ => EXIT_INPUT,
            }
        }
    }
}

fn usage(msg: &str) -> i32 {
    eprintln!("error: {msg}");
    EXIT_USAGE
}

fn execute(cmd: Command) -> Result<i32, Error> {
    match cmd {
        Command::Gen {
            problem,
            n,
            seed,
            lambda,
            keep_prob,
            output,
        } => {
            let spec = GenSpec {
                n,
                seed,
                problem: problem.into(),
                lambda,
                grid_keep_prob: keep_prob,
            };
            let inst: Instance = match spec.problem {
                ProblemKind::Smooth => {
                    if n < 2 {
                        return Ok(usage("smooth instances need --n >= 2"));
                    }
                    gen_smooth(&spec)?.into()
                }
                ProblemKind::Dag => match gen_dag(&spec) {
                    Ok(i) => i.into(),
                    Err(Error::Input(msg)) => return Ok(usage(&msg)),
                    Err(e) => return Err(e),
                },
            };
            let hex = inst.write(&output)?;
            println!("{} {hex}", output.display());
            Ok(EXIT_OK)
        }
        Command::Solve {
            instance,
            solver,
            trace,
            oracle,
            fail_on_diverge,
            output,
        } => {
            let cfg = solver.config();
            if let Err(Error::Input(msg)) = cfg.validate() {
                return Ok(usage(&msg));
            }
            let record = solve_file(&instance, &cfg, trace.as_deref(), oracle)?;
            let json = serde_json::to_string_pretty(&record)?;
            match output {
                Some(path) => std::fs::write(path, json + "\n")?,
                None => println!("{json}"),
            }
            if fail_on_diverge && record.status == Status::Diverged {
                return Ok(EXIT_DIVERGED);
            }
            Ok(EXIT_OK)
        }
        Command::Bench {
            problem,
            sizes,
            reps,
            seed,
            lambda,
            keep_prob,
            solver,
            fail_on_diverge,
            output,
        } => {
            if sizes.is_empty() {
                return Ok(usage("--sizes must list at least one size"));
            }
            let cfg = solver.config();
            if let Err(Error::Input(msg)) = cfg.validate() {
                return Ok(usage(&msg));
            }
            let plan = BenchPlan {
                problem: problem.into(),
                sizes,
                reps,
                base_seed: seed,
                lambda,
                grid_keep_prob: keep_prob,
                solver: cfg,
            };
            let mut sink: Box<dyn Write> = match output {
                Some(path) => Box::new(std::io::LineWriter::new(std::fs::File::create(path)?)),
                None => Box::new(std::io::stdout()),
            };
            writeln!(sink, "{BENCH_HEADER}")?;
            let mut write_err = None;
            let rows = bench::run(&plan, |row| {
                if write_err.is_none() {
                    if let Err(e) = writeln!(sink, "{}", row.csv()) {
                        write_err = Some(e);
                    }
                }
            })?;
            if let Some(e) = write_err {
                return Err(e.into());
            }
            sink.flush()?;
            if fail_on_diverge && rows.iter().any(|r| r.status == Status::Diverged) {
                return Ok(EXIT_DIVERGED);
            }
            Ok(EXIT_OK)
        }
    }
}

/// Reads, solves and (optionally) checks an instance file.
pub fn solve_file(
    path: &Path,
    cfg: &SolverConfig,
    trace: Option<&Path>,
    with_oracle: bool,
) -> Result<RunRecord, Error> {
    let t0 = Instant::now();
    let text = std::fs::read_to_string(path)?;
    let inst = Instance::from_json(&text)?;
    let mut writer = trace.map(TraceWriter::create).transpose()?;
    let setup = t0.elapsed();

    let t1 = Instant::now();
    let report = {
        let observer = |rec: &crate::report::TraceRecord| {
            if let Some(w) = writer.as_mut() {
                w.push(rec);
            }
        };
        match &inst {
            Instance::Smooth(i) => smooth::solve_with_observer(i, cfg, observer)?,
            Instance::Dag(i) => dag::solve_with_observer(i, cfg, observer)?,
        }
    };
    let iterations = t1.elapsed();
    if let Some(w) = writer {
        w.finish()?;
    }

    let (max_violation, edges) = match &inst {
        Instance::Smooth(_) => (max_violation_chain(&report.solution), 0),
        Instance::Dag(i) => (i.max_violation(&report.solution)?, i.m()),
    };
    let oracle = if with_oracle {
        let exact = match &inst {
            Instance::Smooth(i) => oracle::exact_smooth(i)?,
            Instance::Dag(i) => oracle::exact_dag(i)?,
        };
        let oracle_objective = match &inst {
            Instance::Smooth(i) => i.objective(&exact.values)?,
            Instance::Dag(i) => i.objective(&exact.values)?,
        };
        Some(OracleGap {
            linf_gap: linf(&report.solution, &exact.values),
            oracle_objective,
            kkt_residual: exact.kkt_residual,
        })
    } else {
        None
    };

    Ok(RunRecord {
        command: "solve".into(),
        instance: path.display().to_string(),
        instance_digest: digest(text.as_bytes()),
        problem: inst.kind(),
        n: inst.n(),
        edges,
        config: cfg.clone(),
        timings: Timings {
            setup_ms: setup.as_secs_f64() * 1e3,
            iterations_ms: iterations.as_secs_f64() * 1e3,
            total_ms: t0.elapsed().as_secs_f64() * 1e3,
        },
        iterations: report.iterations,
        status: report.status,
        final_r: report.final_r,
        final_s: report.final_s,
        epsilon: report.epsilon,
        objective: report.objective,
        max_violation,
        consistency_gap: report.consistency_gap,
        oracle,
        notes: report.notes,
        solution: report.solution,
    })
}

fn linf(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max)
}
