//! Problem instances, objectives and feasibility measures.
//!
//! Node indices are 0-based throughout.

use std::collections::HashSet;

use crate::error::{Error, Result};

/// Smoothed isotonic regression on a chain:
///
/// `min sum_i w_i (x_i - b_i)^2 + lambda * sum_i (b_i - b_{i+1})^2  s.t.  b_1 <= ... <= b_n`
#[derive(Debug, Clone, PartialEq)]
pub struct SmoothInstance {
    x: Vec<f64>,
    w: Vec<f64>,
    lambda: f64,
}

impl SmoothInstance {
    pub fn new(x: Vec<f64>, w: Vec<f64>, lambda: f64) -> Result<Self> {
        if x.len() < 2 {
            return Err(Error::input(format!(
                "smooth instance needs n >= 2 observations, got {}",
                x.len()
            )));
        }
        if w.len() != x.len() {
            return Err(Error::input(format!(
                "weights have length {} but observations have length {}",
                w.len(),
                x.len()
            )));
        }
        check_finite("x", &x)?;
        check_weights(&w)?;
        if !lambda.is_finite() || lambda < 0.0 {
            return Err(Error::input(format!(
                "lambda must be finite and >= 0, got {lambda}"
            )));
        }
        Ok(SmoothInstance { x, w, lambda })
    }

    /// Unit weights.
    pub fn unweighted(x: Vec<f64>, lambda: f64) -> Result<Self> {
        let w = vec![1.0; x.len()];
        Self::new(x, w, lambda)
    }

    pub fn n(&self) -> usize {
        self.x.len()
    }

    pub fn x(&self) -> &[f64] {
        &self.x
    }

    pub fn w(&self) -> &[f64] {
        &self.w
    }

    pub fn lambda(&self) -> f64 {
        self.lambda
    }

    /// `sum_i w_i (x_i - beta_i)^2 + lambda * sum_i (beta_i - beta_{i+1})^2`.
    ///
    /// Feasibility of `beta` is not checked.
    pub fn objective(&self, beta: &[f64]) -> Result<f64> {
        check_len("beta", beta.len(), self.n())?;
        Ok(smooth_objective_unchecked(self, beta))
    }
}

pub(crate) fn smooth_objective_unchecked(inst: &SmoothInstance, beta: &[f64]) -> f64 {
    let fit: f64 = inst
        .x
        .iter()
        .zip(&inst.w)
        .zip(beta)
        .map(|((x, w), b)| w * (x - b) * (x - b))
        .sum();
    let rough: f64 = beta.windows(2).map(|p| (p[0] - p[1]) * (p[0] - p[1])).sum();
    fit + inst.lambda * rough
}

/// Weighted isotonic regression under edge constraints `alpha[tail] <= alpha[head]`.
///
/// The solver does not need the edge set to be acyclic; cycles force the
/// values on the cycle to pool.
#[derive(Debug, Clone, PartialEq)]
pub struct DagInstance {
    y: Vec<f64>,
    w: Vec<f64>,
    edges: Vec<(usize, usize)>,
}

impl DagInstance {
    pub fn new(y: Vec<f64>, w: Vec<f64>, edges: Vec<(usize, usize)>) -> Result<Self> {
        let n = y.len();
        if n == 0 {
            return Err(Error::input("dag instance needs at least one node"));
        }
        if w.len() != n {
            return Err(Error::input(format!(
                "weights have length {} but observations have length {n}",
                w.len()
            )));
        }
        check_finite("y", &y)?;
        check_weights(&w)?;
        let mut seen = HashSet::with_capacity(edges.len());
        for (k, &(i, j)) in edges.iter().enumerate() {
            if i >= n || j >= n {
                return Err(Error::input(format!(
                    "edge {k} = ({i}, {j}) has an endpoint outside [0, {n})"
                )));
            }
            if i == j {
                return Err(Error::input(format!("edge {k} = ({i}, {j}) is a self-loop")));
            }
            if !seen.insert((i, j)) {
                return Err(Error::input(format!("edge {k} = ({i}, {j}) is a duplicate")));
            }
        }
        Ok(DagInstance { y, w, edges })
    }

    pub fn unweighted(y: Vec<f64>, edges: Vec<(usize, usize)>) -> Result<Self> {
        let w = vec![1.0; y.len()];
        Self::new(y, w, edges)
    }

    pub fn n(&self) -> usize {
        self.y.len()
    }

    pub fn m(&self) -> usize {
        self.edges.len()
    }

    pub fn y(&self) -> &[f64] {
        &self.y
    }

    pub fn w(&self) -> &[f64] {
        &self.w
    }

    pub fn edges(&self) -> &[(usize, usize)] {
        &self.edges
    }

    /// `sum_i w_i (y_i - alpha_i)^2`.
    pub fn objective(&self, alpha: &[f64]) -> Result<f64> {
        check_len("alpha", alpha.len(), self.n())?;
        Ok(dag_objective_unchecked(self, alpha))
    }

    /// Largest edge violation `max(alpha[tail] - alpha[head], 0)`.
    pub fn max_violation(&self, alpha: &[f64]) -> Result<f64> {
        check_len("alpha", alpha.len(), self.n())?;
        Ok(self
            .edges
            .iter()
            .map(|&(i, j)| (alpha[i] - alpha[j]).max(0.0))
            .fold(0.0, f64::max))
    }
}

pub(crate) fn dag_objective_unchecked(inst: &DagInstance, alpha: &[f64]) -> f64 {
    inst.y
        .iter()
        .zip(&inst.w)
        .zip(alpha)
        .map(|((y, w), a)| w * (y - a) * (y - a))
        .sum()
}

/// Largest violation of `beta_i <= beta_{i+1}`, or 0 when non-decreasing.
pub fn max_violation_chain(beta: &[f64]) -> f64 {
    beta.windows(2)
        .map(|p| (p[0] - p[1]).max(0.0))
        .fold(0.0, f64::max)
}

fn check_len(what: &str, got: usize, want: usize) -> Result<()> {
    if got != want {
        return Err(Error::input(format!(
            "{what} has length {got}, expected {want}"
        )));
    }
    Ok(())
}

fn check_finite(what: &str, v: &[f64]) -> Result<()> {
    if let Some(i) = v.iter().position(|a| !a.is_finite()) {
        return Err(Error::input(format!("{what}[{i}] is not finite")));
    }
    Ok(())
}

fn check_weights(w: &[f64]) -> Result<()> {
    check_finite("w", w)?;
    if let Some(i) = w.iter().position(|&a| a <= 0.0) {
        return Err(Error::input(format!("w[{i}] = {} is not positive", w[i])));
    }
    Ok(())
}
