//! Seeded instance generators.
//!
//! Random numbers come from ChaCha8 (`rand_chacha::ChaCha8Rng`) seeded with
//! `seed_from_u64(seed)`. A uniform draw on `(0, 1)` is
//! `((next_u64() >> 11) as f64 + 0.5) * 2^-53`, and observations are that
//! value times 1000. Draws are consumed in a fixed order: all observations
//! first, then (DAG only) one keep/drop draw per candidate grid edge.

use rand_chacha::ChaCha8Rng;
use rand_core::{RngCore, SeedableRng};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::problem::{DagInstance, SmoothInstance};

pub const OBSERVATION_RANGE: f64 = 1000.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ProblemKind {
    Smooth,
    Dag,
}

impl std::str::FromStr for ProblemKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "smooth" => Ok(ProblemKind::Smooth),
            "dag" => Ok(ProblemKind::Dag),
            other => Err(Error::input(format!(
                "unknown problem kind {other:?} (expected smooth or dag)"
            ))),
        }
    }
}

impl std::fmt::Display for ProblemKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            ProblemKind::Smooth => "smooth",
            ProblemKind::Dag => "dag",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GenSpec {
    pub n: usize,
    pub seed: u64,
    pub problem: ProblemKind,
    /// Smoothing penalty (smooth only).
    pub lambda: f64,
    /// Probability of keeping each grid edge (DAG only).
    pub grid_keep_prob: f64,
}

impl GenSpec {
    pub fn smooth(n: usize, seed: u64) -> Self {
        GenSpec {
            n,
            seed,
            problem: ProblemKind::Smooth,
            lambda: 1.0,
            grid_keep_prob: 1.0,
        }
    }

    pub fn dag(n: usize, seed: u64) -> Self {
        GenSpec {
            problem: ProblemKind::Dag,
            ..Self::smooth(n, seed)
        }
    }
}

/// Uniform on the open interval `(0, 1)`.
pub(crate) fn unit_open(rng: &mut ChaCha8Rng) -> f64 {
    ((rng.next_u64() >> 11) as f64 + 0.5) * (1.0 / (1u64 << 53) as f64)
}

fn observations(rng: &mut ChaCha8Rng, n: usize) -> Vec<f64> {
    (0..n).map(|_| OBSERVATION_RANGE * unit_open(rng)).collect()
}

/// `x_i ~ U(0, 1000)`, unit weights.
pub fn gen_smooth(spec: &GenSpec) -> Result<SmoothInstance> {
    if spec.n < 2 {
        return Err(Error::input(format!(
            "smooth instances need n >= 2, got {}",
            spec.n
        )));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let x = observations(&mut rng, spec.n);
    SmoothInstance::unweighted(x, spec.lambda)
}

/// Grid shape for `n` nodes: `rows` starts at `floor(sqrt(n))` and decreases
/// until it divides `n`. Shapes with a single row are rejected since they are
/// not two-dimensional.
pub fn grid_shape(n: usize) -> Result<(usize, usize)> {
    let rows = shape_rows(n);
    if rows < 2 {
        let suggestion = nearest_grid_size(n);
        return Err(Error::input(format!(
            "n = {n} has no rows x cols grid with at least 2 rows; nearest valid n is {suggestion}"
        )));
    }
    Ok((rows, n / rows))
}

fn shape_rows(n: usize) -> usize {
    if n == 0 {
        return 0;
    }
    let mut rows = (n as f64).sqrt() as usize;
    while rows * rows > n {
        rows -= 1;
    }
    while (rows + 1) * (rows + 1) <= n {
        rows += 1;
    }
    while rows > 1 && !n.is_multiple_of(rows) {
        rows -= 1;
    }
    rows
}

fn nearest_grid_size(n: usize) -> usize {
    (1..)
        .flat_map(|d| [n.saturating_sub(d), n + d])
        .find(|&c| c >= 4 && shape_rows(c) >= 2)
        .expect("4 is always a valid size")
}

/// Candidate edges of a `rows x cols` grid in row-major node order: for each
/// node its right neighbour, then its lower neighbour.
pub fn grid_edges(rows: usize, cols: usize) -> Vec<(usize, usize)> {
    let mut edges = Vec::with_capacity(rows * (cols - 1) + cols * (rows - 1));
    for r in 0..rows {
        for c in 0..cols {
            let i = r * cols + c;
            if c + 1 < cols {
                edges.push((i, i + 1));
            }
            if r + 1 < rows {
                edges.push((i, i + cols));
            }
        }
    }
    edges
}

/// `Y_i ~ U(0, 1000)`, unit weights, edges of a near-square grid each kept
/// with probability `grid_keep_prob`.
pub fn gen_dag(spec: &GenSpec) -> Result<DagInstance> {
    if !(spec.grid_keep_prob > 0.0 && spec.grid_keep_prob <= 1.0) {
        return Err(Error::input(format!(
            "grid_keep_prob must lie in (0, 1], got {}",
            spec.grid_keep_prob
        )));
    }
    let (rows, cols) = grid_shape(spec.n)?;
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let y = observations(&mut rng, spec.n);
    let edges = grid_edges(rows, cols)
        .into_iter()
        .filter(|_| unit_open(&mut rng) < spec.grid_keep_prob)
        .collect();
    DagInstance::unweighted(y, edges)
}
