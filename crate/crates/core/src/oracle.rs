//! Exact reference solvers for small instances.
//!
//! [`pav`] is the classic pool-adjacent-violators algorithm for a chain
//! without smoothing. [`exact_smooth`] and [`exact_dag`] enumerate every
//! subset of order constraints, solve the equality-constrained problem for
//! each, and keep the candidate that satisfies the KKT conditions. They are
//! exponential and meant only as ground truth for testing the ADMM solvers.

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};
use crate::problem::{DagInstance, SmoothInstance};

/// Largest chain handled by [`exact_smooth`].
pub const MAX_SMOOTH_N: usize = 14;
/// Largest edge count handled by [`exact_dag`].
pub const MAX_DAG_EDGES: usize = 16;

// Multipliers down to -MULTIPLIER_TOL * scale count as nonnegative.
const MULTIPLIER_TOL: f64 = 1e-10;
const FEASIBILITY_TOL: f64 = 1e-10;

#[derive(Debug, Clone, PartialEq)]
pub struct OracleSolution {
    pub values: Vec<f64>,
    /// Indices of the order constraints treated as equalities. For the chain,
    /// constraint `i` is `beta_i <= beta_{i+1}`; for a DAG it is the edge index.
    pub active_set: Vec<usize>,
    /// One multiplier per constraint, zero off the active set.
    pub multipliers: Vec<f64>,
    /// Largest KKT violation (stationarity, sign, feasibility,
    /// complementarity), relative to `1 + max |grad f(0)|`.
    pub kkt_residual: f64,
}

/// Weighted isotonic regression on a chain by pool-adjacent-violators.
pub fn pav(x: &[f64], w: &[f64]) -> Result<Vec<f64>> {
    if x.len() != w.len() {
        return Err(Error::input(format!(
            "pav: {} observations but {} weights",
            x.len(),
            w.len()
        )));
    }
    if let Some(i) = w.iter().position(|&a| !(a > 0.0 && a.is_finite())) {
        return Err(Error::input(format!("pav: w[{i}] is not a positive number")));
    }
    if x.iter().any(|a| !a.is_finite()) {
        return Err(Error::input("pav: observations must be finite"));
    }

    // (weighted sum, total weight, length)
    let mut blocks: Vec<(f64, f64, usize)> = Vec::with_capacity(x.len());
    for (&xi, &wi) in x.iter().zip(w) {
        let mut cur = (wi * xi, wi, 1usize);
        while let Some(&(sw, ww, len)) = blocks.last() {
            if sw / ww > cur.0 / cur.1 {
                blocks.pop();
                cur = (sw + cur.0, ww + cur.1, len + cur.2);
            } else {
                break;
            }
        }
        blocks.push(cur);
    }
    let mut out = Vec::with_capacity(x.len());
    for (sw, ww, len) in blocks {
        out.extend(std::iter::repeat_n(sw / ww, len));
    }
    Ok(out)
}

/// Exact solution of the smoothed chain problem, `n <= MAX_SMOOTH_N`.
pub fn exact_smooth(inst: &SmoothInstance) -> Result<OracleSolution> {
    let n = inst.n();
    if n > MAX_SMOOTH_N {
        return Err(Error::Capacity(format!(
            "exact_smooth enumerates 2^(n-1) active sets; n = {n} exceeds {MAX_SMOOTH_N}"
        )));
    }
    // f(b) = 1/2 b^T H b - c^T b + const
    let mut hess = DMatrix::<f64>::zeros(n, n);
    let mut lin = DVector::<f64>::zeros(n);
    for i in 0..n {
        hess[(i, i)] += 2.0 * inst.w()[i];
        lin[i] = 2.0 * inst.w()[i] * inst.x()[i];
    }
    let lambda = inst.lambda();
    for i in 0..n - 1 {
        hess[(i, i)] += 2.0 * lambda;
        hess[(i + 1, i + 1)] += 2.0 * lambda;
        hess[(i, i + 1)] -= 2.0 * lambda;
        hess[(i + 1, i)] -= 2.0 * lambda;
    }
    let constraints: Vec<(usize, usize)> = (0..n - 1).map(|i| (i, i + 1)).collect();
    enumerate(&hess, &lin, &constraints)
}

/// Exact solution of the DAG problem, `|E| <= MAX_DAG_EDGES`.
pub fn exact_dag(inst: &DagInstance) -> Result<OracleSolution> {
    let m = inst.m();
    if m > MAX_DAG_EDGES {
        return Err(Error::Capacity(format!(
            "exact_dag enumerates 2^|E| active sets; |E| = {m} exceeds {MAX_DAG_EDGES}"
        )));
    }
    let n = inst.n();
    let hess = DMatrix::from_diagonal(&DVector::from_iterator(
        n,
        inst.w().iter().map(|w| 2.0 * w),
    ));
    let lin = DVector::from_iterator(n, inst.w().iter().zip(inst.y()).map(|(w, y)| 2.0 * w * y));
    enumerate(&hess, &lin, inst.edges())
}

struct Candidate {
    mask: u64,
    values: Vec<f64>,
    multipliers: Vec<f64>,
    kkt: f64,
}

/// Minimizes `1/2 b^T H b - c^T b` subject to `b[t] <= b[h]` for every
/// constraint `(t, h)` by trying every active set.
///
/// Only active sets that form a forest (linearly independent rows) are
/// solved; any KKT point has an equivalent forest-supported multiplier
/// vector, so nothing is lost.
fn enumerate(hess: &DMatrix<f64>, lin: &DVector<f64>, cons: &[(usize, usize)]) -> Result<OracleSolution> {
    let n = lin.len();
    let m = cons.len();
    let scale = 1.0 + lin.amax();
    let mut passing: Vec<Candidate> = Vec::new();

    for mask in 0u64..(1u64 << m) {
        let Some(comp) = forest_components(n, cons, mask) else {
            continue;
        };
        let Some(values) = solve_pooled(hess, lin, &comp) else {
            continue;
        };
        let feasible = cons
            .iter()
            .all(|&(t, h)| values[t] - values[h] <= FEASIBILITY_TOL * scale);
        if !feasible {
            continue;
        }
        let multipliers = tree_multipliers(hess, lin, &values, cons, mask);
        if multipliers.iter().any(|&mu| mu < -MULTIPLIER_TOL * scale) {
            continue;
        }
        let kkt = kkt_residual(hess, lin, &values, &multipliers, cons) / scale;
        passing.push(Candidate {
            mask,
            values,
            multipliers,
            kkt,
        });
    }

    let Some(best) = passing.first() else {
        return Err(Error::Internal("no active set satisfies the KKT conditions".into()));
    };
    // Degenerate optima can pass under several active sets, but the minimizer
    // of a strictly convex problem is unique.
    for other in &passing[1..] {
        let gap = best
            .values
            .iter()
            .zip(&other.values)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max);
        if gap > 1e-8 * scale {
            return Err(Error::Internal(format!(
                "active sets {:#b} and {:#b} give different KKT points (gap {gap:e})",
                best.mask, other.mask
            )));
        }
    }
    Ok(OracleSolution {
        values: best.values.clone(),
        active_set: (0..m).filter(|k| best.mask >> k & 1 == 1).collect(),
        multipliers: best.multipliers.clone(),
        kkt_residual: best.kkt,
    })
}

/// Component id per node under the active edges, or `None` if they contain
/// an (undirected) cycle.
fn forest_components(n: usize, cons: &[(usize, usize)], mask: u64) -> Option<Vec<usize>> {
    let mut parent: Vec<usize> = (0..n).collect();
    fn find(parent: &mut [usize], mut a: usize) -> usize {
        while parent[a] != a {
            parent[a] = parent[parent[a]];
            a = parent[a];
        }
        a
    }
    for (k, &(t, h)) in cons.iter().enumerate() {
        if mask >> k & 1 == 0 {
            continue;
        }
        let (a, b) = (find(&mut parent, t), find(&mut parent, h));
        if a == b {
            return None;
        }
        parent[a] = b;
    }
    let mut label = vec![usize::MAX; n];
    let mut next = 0;
    let mut comp = vec![0; n];
    for (i, c) in comp.iter_mut().enumerate() {
        let root = find(&mut parent, i);
        if label[root] == usize::MAX {
            label[root] = next;
            next += 1;
        }
        *c = label[root];
    }
    Some(comp)
}

/// Minimizer with every node in a component forced to one common value.
fn solve_pooled(hess: &DMatrix<f64>, lin: &DVector<f64>, comp: &[usize]) -> Option<Vec<f64>> {
    let n = comp.len();
    let c = comp.iter().max().map_or(0, |m| m + 1);
    let mut assign = DMatrix::<f64>::zeros(n, c);
    for (i, &k) in comp.iter().enumerate() {
        assign[(i, k)] = 1.0;
    }
    let reduced = assign.transpose() * hess * &assign;
    let rhs = assign.transpose() * lin;
    let z = reduced.cholesky()?.solve(&rhs);
    Some(comp.iter().map(|&k| z[k]).collect())
}

/// Solves `A^T mu = c - H b` on the active forest by peeling leaves.
fn tree_multipliers(
    hess: &DMatrix<f64>,
    lin: &DVector<f64>,
    values: &[f64],
    cons: &[(usize, usize)],
    mask: u64,
) -> Vec<f64> {
    let n = values.len();
    let b = DVector::from_column_slice(values);
    let mut resid: Vec<f64> = (lin - hess * b).iter().copied().collect();
    let mut mu = vec![0.0; cons.len()];
    let mut incident: Vec<Vec<usize>> = vec![Vec::new(); n];
    for (k, &(t, h)) in cons.iter().enumerate() {
        if mask >> k & 1 == 1 {
            incident[t].push(k);
            incident[h].push(k);
        }
    }
    let mut degree: Vec<usize> = incident.iter().map(Vec::len).collect();
    let mut done = vec![false; cons.len()];
    let mut leaves: Vec<usize> = (0..n).filter(|&i| degree[i] == 1).collect();
    while let Some(leaf) = leaves.pop() {
        if degree[leaf] != 1 {
            continue;
        }
        let k = *incident[leaf].iter().find(|&&k| !done[k]).expect("leaf has one live edge");
        done[k] = true;
        let (t, h) = cons[k];
        // Row k of A is e_t - e_h.
        let (other, sign) = if leaf == t { (h, 1.0) } else { (t, -1.0) };
        mu[k] = sign * resid[leaf];
        resid[leaf] = 0.0;
        resid[other] += sign * mu[k];
        degree[leaf] -= 1;
        degree[other] -= 1;
        if degree[other] == 1 {
            leaves.push(other);
        }
    }
    mu
}

fn kkt_residual(
    hess: &DMatrix<f64>,
    lin: &DVector<f64>,
    values: &[f64],
    mu: &[f64],
    cons: &[(usize, usize)],
) -> f64 {
    let b = DVector::from_column_slice(values);
    let mut station: Vec<f64> = (hess * b - lin).iter().copied().collect();
    let mut worst: f64 = 0.0;
    for (k, &(t, h)) in cons.iter().enumerate() {
        station[t] += mu[k];
        station[h] -= mu[k];
        let slack = values[t] - values[h];
        worst = worst.max(slack).max(-mu[k]).max((mu[k] * slack).abs());
    }
    station.iter().fold(worst, |acc, s| acc.max(s.abs()))
}
