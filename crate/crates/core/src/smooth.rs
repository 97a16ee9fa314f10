//! Multi-block ADMM for smoothed isotonic regression.
//!
//! The chain `b_1 <= ... <= b_n` is split into two overlapping copies
//! `p = (b_1 .. b_{n-1})` and `q = (b_2 .. b_n)` plus a slack `u >= 0`:
//!
//! ```text
//! min  w_1 (x_1 - p_1)^2 + sum_{i=2}^{n-1} (w_i/2) [(x_i - p_i)^2 + (x_i - q_{i-1})^2]
//!      + w_n (x_n - q_{n-1})^2 + lambda ||u||^2
//! s.t. p - q + u = 0,  u >= 0,  p_{i+1} = q_i
//! ```
//!
//! Each iteration updates `u`, then `p`, then `q` in closed form, followed by
//! a dual ascent step on `y1` (for `p - q + u = 0`) and `y2` (for
//! `p_{i+1} = q_i`). Within one block every coordinate is independent.

use crate::config::{Init, SolverConfig};
use crate::error::Result;
use crate::par;
use crate::problem::{smooth_objective_unchecked, SmoothInstance};
use crate::report::{RunReport, Status, TraceRecord};

/// Iterate of the chain splitting. `p`, `q`, `u`, `y1` have length `n - 1`,
/// `y2` has length `n - 2`.
#[derive(Debug, Clone, PartialEq)]
pub struct SmoothState {
    pub p: Vec<f64>,
    pub q: Vec<f64>,
    pub u: Vec<f64>,
    pub y1: Vec<f64>,
    pub y2: Vec<f64>,
    pub iter: usize,
}

impl SmoothState {
    pub fn new(inst: &SmoothInstance, init: Init) -> Self {
        let n = inst.n();
        let (p, q) = match init {
            Init::Zeros => (vec![0.0; n - 1], vec![0.0; n - 1]),
            Init::FromObservations => (inst.x()[..n - 1].to_vec(), inst.x()[1..].to_vec()),
        };
        let u = p.iter().zip(&q).map(|(p, q)| (q - p).max(0.0)).collect();
        SmoothState {
            p,
            q,
            u,
            y1: vec![0.0; n - 1],
            y2: vec![0.0; n - 2],
            iter: 0,
        }
    }

    /// `b_i = p_i` for `i < n`, `b_n = q_{n-1}`.
    pub fn solution(&self) -> Vec<f64> {
        let mut beta = self.p.clone();
        beta.push(*self.q.last().expect("n >= 2"));
        beta
    }

    /// `max_i |p_{i+1} - q_i|`, zero once the overlapping copies agree.
    pub fn consistency_gap(&self) -> f64 {
        self.p[1..]
            .iter()
            .zip(&self.q)
            .map(|(p, q)| (p - q).abs())
            .fold(0.0, f64::max)
    }
}

/// Residual blocks of one iteration.
#[derive(Debug, Clone, PartialEq)]
pub struct SmoothResiduals {
    pub r: f64,
    pub s: f64,
    /// `p - q + u`
    pub r1: Vec<f64>,
    /// `p_{i+1} - q_i`
    pub r2: Vec<f64>,
    /// `rho (p - q - p_prev + q_prev)`
    pub s1: Vec<f64>,
    /// `rho (q_prev - q)`
    pub s2: Vec<f64>,
}

/// `u = max((rho (q - p) - y1) / (rho + 2 lambda), 0)`.
pub fn update_u(state: &SmoothState, inst: &SmoothInstance, cfg: &SolverConfig) -> Vec<f64> {
    let mut u = vec![0.0; state.u.len()];
    update_u_into(&mut u, state, inst.lambda(), cfg.rho, false);
    u
}

fn update_u_into(u: &mut [f64], st: &SmoothState, lambda: f64, rho: f64, parallel: bool) {
    let denom = rho + 2.0 * lambda;
    par::fill(u, parallel, |i| {
        ((rho * (st.q[i] - st.p[i]) - st.y1[i]) / denom).max(0.0)
    });
}

/// Closed-form `p` step. Reads the `u` already stored in `state`.
pub fn update_p(state: &SmoothState, inst: &SmoothInstance, cfg: &SolverConfig) -> Vec<f64> {
    let mut p = vec![0.0; state.p.len()];
    update_p_into(&mut p, state, inst, cfg.rho, false);
    p
}

fn update_p_into(
    p: &mut [f64],
    st: &SmoothState,
    inst: &SmoothInstance,
    rho: f64,
    parallel: bool,
) {
    let (x, w) = (inst.x(), inst.w());
    par::fill(p, parallel, |i| {
        let common = rho * st.q[i] - rho * st.u[i] - st.y1[i];
        if i == 0 {
            // first observation is only covered by p
            (2.0 * w[0] * x[0] + common) / (2.0 * w[0] + rho)
        } else {
            (w[i] * x[i] + common + rho * st.q[i - 1] - st.y2[i - 1]) / (w[i] + 2.0 * rho)
        }
    });
}

/// Closed-form `q` step. Reads the `u` and `p` already stored in `state`.
pub fn update_q(state: &SmoothState, inst: &SmoothInstance, cfg: &SolverConfig) -> Vec<f64> {
    let mut q = vec![0.0; state.q.len()];
    update_q_into(&mut q, state, inst, cfg.rho, false);
    q
}

fn update_q_into(
    q: &mut [f64],
    st: &SmoothState,
    inst: &SmoothInstance,
    rho: f64,
    parallel: bool,
) {
    let (x, w) = (inst.x(), inst.w());
    let last = q.len() - 1;
    par::fill(q, parallel, |i| {
        let common = rho * st.p[i] + rho * st.u[i] + st.y1[i];
        if i == last {
            // last observation is only covered by q
            (2.0 * w[i + 1] * x[i + 1] + common) / (2.0 * w[i + 1] + rho)
        } else {
            (w[i + 1] * x[i + 1] + common + rho * st.p[i + 1] + st.y2[i])
                / (w[i + 1] + 2.0 * rho)
        }
    });
}

/// Primal and dual residuals between two consecutive iterates.
pub fn residuals(prev: &SmoothState, state: &SmoothState, cfg: &SolverConfig) -> SmoothResiduals {
    let rho = cfg.rho;
    let r1: Vec<f64> = (0..state.p.len())
        .map(|i| state.p[i] - state.q[i] + state.u[i])
        .collect();
    let r2: Vec<f64> = (0..state.y2.len())
        .map(|i| state.p[i + 1] - state.q[i])
        .collect();
    let s1: Vec<f64> = (0..state.p.len())
        .map(|i| rho * (state.p[i] - state.q[i] - prev.p[i] + prev.q[i]))
        .collect();
    let s2: Vec<f64> = (0..state.y2.len())
        .map(|i| rho * (prev.q[i] - state.q[i]))
        .collect();
    let r = (par::sq_norm(&r1) + par::sq_norm(&r2)).sqrt();
    let s = (par::sq_norm(&s1) + par::sq_norm(&s2)).sqrt();
    SmoothResiduals {
        r,
        s,
        r1,
        r2,
        s1,
        s2,
    }
}

/// `y1 += rho r1`, `y2 += rho r2`.
pub fn dual_update(state: &mut SmoothState, r1: &[f64], r2: &[f64], cfg: &SolverConfig) {
    for (y, r) in state.y1.iter_mut().zip(r1) {
        *y += cfg.rho * r;
    }
    for (y, r) in state.y2.iter_mut().zip(r2) {
        *y += cfg.rho * r;
    }
}

/// Runs the solver to termination.
pub fn solve(inst: &SmoothInstance, cfg: &SolverConfig) -> Result<RunReport> {
    solve_with_observer(inst, cfg, |_| {})
}

/// Like [`solve`], calling `observer` with every trace row as soon as it is
/// produced.
pub fn solve_with_observer<F>(
    inst: &SmoothInstance,
    cfg: &SolverConfig,
    mut observer: F,
) -> Result<RunReport>
where
    F: FnMut(&TraceRecord) + Send,
{
    cfg.validate()?;
    let n = inst.n();
    let eps = cfg.epsilon(n);
    let rho = cfg.rho;

    par::with_threads(cfg.threads, |parallel| {
        let mut state = SmoothState::new(inst, cfg.init);
        let mut prev = state.clone();
        let mut scratch = vec![0.0; n - 1];
        let mut trace = Vec::new();
        let mut status = Status::MaxIterReached;
        let (mut final_r, mut final_s) = (f64::NAN, f64::NAN);

        for k in 1..=cfg.max_iter {
            prev.clone_from(&state);

            update_u_into(&mut scratch, &state, inst.lambda(), rho, parallel);
            std::mem::swap(&mut state.u, &mut scratch);
            update_p_into(&mut scratch, &state, inst, rho, parallel);
            std::mem::swap(&mut state.p, &mut scratch);
            update_q_into(&mut scratch, &state, inst, rho, parallel);
            std::mem::swap(&mut state.q, &mut scratch);

            let res = residuals(&prev, &state, cfg);
            dual_update(&mut state, &res.r1, &res.r2, cfg);
            state.iter = k;

            let objective = smooth_objective_unchecked(inst, &state.solution());
            let rec = TraceRecord {
                iter: k,
                r: res.r,
                s: res.s,
                objective,
            };
            observer(&rec);
            trace.push(rec);
            final_r = res.r;
            final_s = res.s;

            if !(res.r.is_finite() && res.s.is_finite() && objective.is_finite())
                || res.r > cfg.divergence_bound
            {
                status = Status::Diverged;
                break;
            }
            if res.r <= eps && res.s <= eps {
                status = Status::Converged;
                break;
            }
        }

        let solution = state.solution();
        Ok(RunReport {
            objective: smooth_objective_unchecked(inst, &solution),
            solution,
            status,
            iterations: state.iter,
            trace,
            final_r,
            final_s,
            epsilon: eps,
            consistency_gap: state.consistency_gap(),
            notes: vec![
                "solution: beta_i = p_i for i < n, beta_n = q_{n-1}".into(),
                "trace objective evaluated on the p-based solution".into(),
            ],
        })
    })
}
