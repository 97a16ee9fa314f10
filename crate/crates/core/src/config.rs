use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Starting point for the primal blocks. Duals always start at zero.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum Init {
    Zeros,
    #[default]
    FromObservations,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SolverConfig {
    /// Augmented Lagrangian penalty.
    pub rho: f64,
    pub max_iter: usize,
    /// Stopping tolerance is `tol_factor * sqrt(n)` for both residuals.
    pub tol_factor: f64,
    /// A primal residual above this aborts the run as diverged.
    pub divergence_bound: f64,
    pub init: Init,
    /// Worker threads for the coordinate updates; 1 runs everything on the
    /// calling thread. Results do not depend on this value.
    #[serde(default = "one")]
    pub threads: usize,
}

fn one() -> usize {
    1
}

impl Default for SolverConfig {
    fn default() -> Self {
        SolverConfig {
            rho: 0.1,
            max_iter: 10_000,
            tol_factor: 0.01,
            divergence_bound: 1e10,
            init: Init::FromObservations,
            threads: 1,
        }
    }
}

impl SolverConfig {
    pub fn with_rho(rho: f64) -> Self {
        SolverConfig {
            rho,
            ..Default::default()
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.rho.is_finite() && self.rho > 0.0) {
            return Err(Error::input(format!("rho must be > 0, got {}", self.rho)));
        }
        if self.max_iter < 1 {
            return Err(Error::input("max_iter must be >= 1"));
        }
        if !(self.tol_factor.is_finite() && self.tol_factor > 0.0) {
            return Err(Error::input(format!(
                "tol_factor must be > 0, got {}",
                self.tol_factor
            )));
        }
        if self.divergence_bound.is_nan() || self.divergence_bound <= 0.0 {
            return Err(Error::input(format!(
                "divergence_bound must be > 0, got {}",
                self.divergence_bound
            )));
        }
        if self.threads < 1 {
            return Err(Error::input("threads must be >= 1"));
        }
        Ok(())
    }

    /// `tol_factor * sqrt(n)`.
    pub fn epsilon(&self, n: usize) -> f64 {
        self.tol_factor * (n as f64).sqrt()
    }
}
