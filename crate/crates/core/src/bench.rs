//! Wall-clock scaling runs over a list of instance sizes.

use std::time::Instant;

use serde::{Deserialize, Serialize};

use crate::config::SolverConfig;
use crate::datagen::{gen_dag, gen_smooth, GenSpec, ProblemKind};
use crate::error::{Error, Result};
use crate::report::Status;
use crate::{dag, smooth};

pub const BENCH_HEADER: &str = "n,rep,seed,iterations,status,total_ms,per_iter_us";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BenchPlan {
    pub problem: ProblemKind,
    pub sizes: Vec<usize>,
    pub reps: usize,
    /// Repetition `r` uses seed `base_seed + r`.
    pub base_seed: u64,
    pub lambda: f64,
    pub grid_keep_prob: f64,
    pub solver: SolverConfig,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BenchRow {
    pub n: usize,
    pub rep: usize,
    pub seed: u64,
    pub iterations: usize,
    pub status: Status,
    pub total_ms: f64,
    pub per_iter_us: f64,
}

impl BenchRow {
    pub fn csv(&self) -> String {
        format!(
            "{},{},{},{},{},{:.3},{:.3}",
            self.n, self.rep, self.seed, self.iterations, self.status, self.total_ms, self.per_iter_us
        )
    }
}

/// Generates and solves one instance per (size, repetition), calling
/// `on_row` after each solve.
pub fn run(plan: &BenchPlan, mut on_row: impl FnMut(&BenchRow)) -> Result<Vec<BenchRow>> {
    if plan.sizes.is_empty() {
        return Err(Error::input("bench needs at least one size"));
    }
    if plan.reps == 0 {
        return Err(Error::input("bench needs at least one repetition"));
    }
    plan.solver.validate()?;
    let mut rows = Vec::with_capacity(plan.sizes.len() * plan.reps);
    for &n in &plan.sizes {
        for rep in 0..plan.reps {
            let seed = plan.base_seed.wrapping_add(rep as u64);
            let spec = GenSpec {
                n,
                seed,
                problem: plan.problem,
                lambda: plan.lambda,
                grid_keep_prob: plan.grid_keep_prob,
            };
            let (iterations, status, elapsed) = match plan.problem {
                ProblemKind::Smooth => {
                    let inst = gen_smooth(&spec)?;
                    let t = Instant::now();
                    let rep = smooth::solve(&inst, &plan.solver)?;
                    (rep.iterations, rep.status, t.elapsed())
                }
                ProblemKind::Dag => {
                    let inst = gen_dag(&spec)?;
                    let t = Instant::now();
                    let rep = dag::solve(&inst, &plan.solver)?;
                    (rep.iterations, rep.status, t.elapsed())
                }
            };
            let total_ms = elapsed.as_secs_f64() * 1e3;
            let row = BenchRow {
                n,
                rep,
                seed,
                iterations,
                status,
                total_ms,
                per_iter_us: total_ms * 1e3 / iterations.max(1) as f64,
            };
            on_row(&row);
            rows.push(row);
        }
    }
    Ok(rows)
}
