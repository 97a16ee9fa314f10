//! Multi-block ADMM for isotonic regression under DAG edge constraints.
//!
//! The fitted vector is duplicated into `g` and `h` with a per-edge slack
//! `v >= 0`:
//!
//! ```text
//! min  W^T (Y - g)^2 / 2 + W^T (Y - h)^2 / 2
//! s.t. E1 g - E2 h + v = 0,  v >= 0,  g = h
//! ```
//!
//! Because `E1^T E1` and `E2^T E2` are the out- and in-degree diagonals, the
//! `g` and `h` steps are diagonal solves: every node is updated from its own
//! incident edges only.

use crate::config::{Init, SolverConfig};
use crate::error::Result;
use crate::incidence::IncidenceEncoding;
use crate::par;
use crate::problem::{dag_objective_unchecked, DagInstance};
use crate::report::{RunReport, Status, TraceRecord};

/// Iterate of the DAG splitting. `g`, `h`, `y2` have length `n`; `v`, `y1`
/// have one entry per edge, in input edge order.
#[derive(Debug, Clone, PartialEq)]
pub struct DagState {
    pub g: Vec<f64>,
    pub h: Vec<f64>,
    pub v: Vec<f64>,
    pub y1: Vec<f64>,
    pub y2: Vec<f64>,
    pub iter: usize,
}

impl DagState {
    pub fn new(inst: &DagInstance, enc: &IncidenceEncoding, init: Init) -> Self {
        let n = inst.n();
        let g = match init {
            Init::Zeros => vec![0.0; n],
            Init::FromObservations => inst.y().to_vec(),
        };
        let h = g.clone();
        let v = enc
            .tails()
            .iter()
            .zip(enc.heads())
            .map(|(&i, &j)| (h[j] - g[i]).max(0.0))
            .collect();
        DagState {
            g,
            h,
            v,
            y1: vec![0.0; enc.m()],
            y2: vec![0.0; n],
            iter: 0,
        }
    }

    /// `(g + h) / 2`.
    pub fn solution(&self) -> Vec<f64> {
        self.g
            .iter()
            .zip(&self.h)
            .map(|(g, h)| 0.5 * (g + h))
            .collect()
    }

    /// `max_i |g_i - h_i|`.
    pub fn consistency_gap(&self) -> f64 {
        self.g
            .iter()
            .zip(&self.h)
            .map(|(g, h)| (g - h).abs())
            .fold(0.0, f64::max)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct DagResiduals {
    pub r: f64,
    pub s: f64,
    /// `E1 g - E2 h + v`, per edge.
    pub r1: Vec<f64>,
    /// `g - h`, per node.
    pub r2: Vec<f64>,
    /// `rho (E1 g - E2 h - E1 g_prev + E2 h_prev)`, per edge.
    pub s1: Vec<f64>,
    /// `rho E2 (h_prev - h)`, per edge.
    pub s2: Vec<f64>,
    /// `rho (h_prev - h)`, per node.
    pub s3: Vec<f64>,
}

/// `v = max(E2 h - E1 g - y1 / rho, 0)`.
pub fn update_v(state: &DagState, enc: &IncidenceEncoding, cfg: &SolverConfig) -> Vec<f64> {
    let mut v = vec![0.0; enc.m()];
    update_v_into(&mut v, state, enc, cfg.rho, false);
    v
}

fn update_v_into(v: &mut [f64], st: &DagState, enc: &IncidenceEncoding, rho: f64, parallel: bool) {
    let (tails, heads) = (enc.tails(), enc.heads());
    par::fill(v, parallel, |k| {
        (st.h[heads[k]] - st.g[tails[k]] - st.y1[k] / rho).max(0.0)
    });
}

/// Diagonal solve of
/// `(diag(W) + rho E1^T E1 + rho I) g = diag(W) Y + rho E1^T E2 h - rho E1^T v - E1^T y1 + rho h - y2`.
pub fn update_g(
    state: &DagState,
    inst: &DagInstance,
    enc: &IncidenceEncoding,
    cfg: &SolverConfig,
) -> Vec<f64> {
    let mut g = vec![0.0; inst.n()];
    update_g_into(&mut g, state, inst, enc, cfg.rho, false);
    g
}

fn update_g_into(
    g: &mut [f64],
    st: &DagState,
    inst: &DagInstance,
    enc: &IncidenceEncoding,
    rho: f64,
    parallel: bool,
) {
    let (y, w, heads) = (inst.y(), inst.w(), enc.heads());
    par::fill(g, parallel, |j| {
        let mut rhs = w[j] * y[j] + rho * st.h[j] - st.y2[j];
        for &k in enc.out_edges(j) {
            rhs += rho * st.h[heads[k]] - rho * st.v[k] - st.y1[k];
        }
        rhs / (w[j] + rho * enc.out_degree()[j] as f64 + rho)
    });
}

/// Diagonal solve of
/// `(diag(W) + rho E2^T E2 + rho I) h = diag(W) Y + rho E2^T E1 g + rho E2^T v + E2^T y1 + rho g + y2`.
pub fn update_h(
    state: &DagState,
    inst: &DagInstance,
    enc: &IncidenceEncoding,
    cfg: &SolverConfig,
) -> Vec<f64> {
    let mut h = vec![0.0; inst.n()];
    update_h_into(&mut h, state, inst, enc, cfg.rho, false);
    h
}

fn update_h_into(
    h: &mut [f64],
    st: &DagState,
    inst: &DagInstance,
    enc: &IncidenceEncoding,
    rho: f64,
    parallel: bool,
) {
    let (y, w, tails) = (inst.y(), inst.w(), enc.tails());
    par::fill(h, parallel, |j| {
        let mut rhs = w[j] * y[j] + rho * st.g[j] + st.y2[j];
        for &k in enc.in_edges(j) {
            rhs += rho * st.g[tails[k]] + rho * st.v[k] + st.y1[k];
        }
        rhs / (w[j] + rho * enc.in_degree()[j] as f64 + rho)
    });
}

pub fn residuals(
    prev: &DagState,
    state: &DagState,
    enc: &IncidenceEncoding,
    cfg: &SolverConfig,
) -> DagResiduals {
    let rho = cfg.rho;
    let (tails, heads) = (enc.tails(), enc.heads());
    let m = enc.m();
    let r1: Vec<f64> = (0..m)
        .map(|k| state.g[tails[k]] - state.h[heads[k]] + state.v[k])
        .collect();
    let r2: Vec<f64> = state.g.iter().zip(&state.h).map(|(g, h)| g - h).collect();
    let s1: Vec<f64> = (0..m)
        .map(|k| {
            rho * (state.g[tails[k]] - state.h[heads[k]] - prev.g[tails[k]] + prev.h[heads[k]])
        })
        .collect();
    let s2: Vec<f64> = (0..m)
        .map(|k| rho * (prev.h[heads[k]] - state.h[heads[k]]))
        .collect();
    let s3: Vec<f64> = prev
        .h
        .iter()
        .zip(&state.h)
        .map(|(a, b)| rho * (a - b))
        .collect();
    let r = (par::sq_norm(&r1) + par::sq_norm(&r2)).sqrt();
    let s = (par::sq_norm(&s1) + par::sq_norm(&s2) + par::sq_norm(&s3)).sqrt();
    DagResiduals {
        r,
        s,
        r1,
        r2,
        s1,
        s2,
        s3,
    }
}

/// `y1 += rho r1`, `y2 += rho r2`.
pub fn dual_update(state: &mut DagState, r1: &[f64], r2: &[f64], cfg: &SolverConfig) {
    for (y, r) in state.y1.iter_mut().zip(r1) {
        *y += cfg.rho * r;
    }
    for (y, r) in state.y2.iter_mut().zip(r2) {
        *y += cfg.rho * r;
    }
}

pub fn solve(inst: &DagInstance, cfg: &SolverConfig) -> Result<RunReport> {
    solve_with_observer(inst, cfg, |_| {})
}

pub fn solve_with_observer<F>(
    inst: &DagInstance,
    cfg: &SolverConfig,
    mut observer: F,
) -> Result<RunReport>
where
    F: FnMut(&TraceRecord) + Send,
{
    cfg.validate()?;
    let enc = IncidenceEncoding::new(inst);
    let n = inst.n();
    let eps = cfg.epsilon(n);
    let rho = cfg.rho;

    par::with_threads(cfg.threads, |parallel| {
        let mut state = DagState::new(inst, &enc, cfg.init);
        let mut prev = state.clone();
        let mut edge_scratch = vec![0.0; enc.m()];
        let mut node_scratch = vec![0.0; n];
        let mut trace = Vec::new();
        let mut status = Status::MaxIterReached;
        let (mut final_r, mut final_s) = (f64::NAN, f64::NAN);

        for k in 1..=cfg.max_iter {
            prev.clone_from(&state);

            update_v_into(&mut edge_scratch, &state, &enc, rho, parallel);
            std::mem::swap(&mut state.v, &mut edge_scratch);
            update_g_into(&mut node_scratch, &state, inst, &enc, rho, parallel);
            std::mem::swap(&mut state.g, &mut node_scratch);
            update_h_into(&mut node_scratch, &state, inst, &enc, rho, parallel);
            std::mem::swap(&mut state.h, &mut node_scratch);

            let res = residuals(&prev, &state, &enc, cfg);
            dual_update(&mut state, &res.r1, &res.r2, cfg);
            state.iter = k;

            let objective = dag_objective_unchecked(inst, &state.solution());
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
            objective: dag_objective_unchecked(inst, &solution),
            solution,
            status,
            iterations: state.iter,
            trace,
            final_r,
            final_s,
            epsilon: eps,
            consistency_gap: state.consistency_gap(),
            notes: vec![
                "solution: alpha = (g + h) / 2".into(),
                "h step uses diag(W) Y as its data term".into(),
            ],
        })
    })
}
