//! Independent reference computations and property checks shared by the
//! invariant suite and the acceptance runner.
#![allow(dead_code)]

use isoadmm::dag::{self, DagState};
use isoadmm::datagen::{gen_dag, gen_smooth, grid_edges, grid_shape, GenSpec};
use isoadmm::incidence::IncidenceEncoding;
use isoadmm::io::Instance;
use isoadmm::oracle;
use isoadmm::problem::max_violation_chain;
use isoadmm::smooth::{self, SmoothState};
use isoadmm::{DagInstance, SmoothInstance, SolverConfig, Status};
use nalgebra::{DMatrix, DVector};
use proptest::prelude::*;
use proptest::test_runner::TestCaseError;
use rand_chacha::ChaCha8Rng;
use rand_core::{RngCore, SeedableRng};

pub type Check = Result<(), TestCaseError>;

// ---------------------------------------------------------------- strategies

#[derive(Debug, Clone)]
pub struct SmoothCase {
    pub inst: SmoothInstance,
    pub state: SmoothState,
    pub cfg: SolverConfig,
    pub seed: u64,
}

#[derive(Debug, Clone)]
pub struct DagCase {
    pub inst: DagInstance,
    pub state: DagState,
    pub cfg: SolverConfig,
    pub seed: u64,
}

fn vals(len: usize, lo: f64, hi: f64) -> impl Strategy<Value = Vec<f64>> {
    prop::collection::vec(lo..hi, len)
}

/// A random chain instance with an arbitrary (not necessarily reachable) iterate.
pub fn smooth_case(max_n: usize) -> impl Strategy<Value = SmoothCase> {
    (2..=max_n)
        .prop_flat_map(|n| {
            (
                vals(n, -2.0, 2.0),
                vals(n, 0.5, 2.0),
                prop_oneof![Just(0.0), 0.0..2.0],
                0.05f64..10.0,
                vals(n - 1, -2.0, 2.0),
                vals(n - 1, -2.0, 2.0),
                vals(n - 1, 0.0, 2.0),
                vals(n - 1, -2.0, 2.0),
                vals(n - 2, -2.0, 2.0),
                any::<u64>(),
            )
        })
        .prop_map(|(x, w, lambda, rho, p, q, u, y1, y2, seed)| SmoothCase {
            inst: SmoothInstance::new(x, w, lambda).unwrap(),
            state: SmoothState { p, q, u, y1, y2, iter: 0 },
            cfg: SolverConfig::with_rho(rho),
            seed,
        })
}

/// Random edge set on `n` nodes: each unordered pair is present with
/// probability ~1/2 and randomly oriented, so cycles occur.
pub fn edge_set(n: usize) -> impl Strategy<Value = Vec<(usize, usize)>> {
    let pairs: Vec<(usize, usize)> = (0..n)
        .flat_map(|i| (i + 1..n).map(move |j| (i, j)))
        .collect();
    let len = pairs.len();
    prop::collection::vec((any::<bool>(), any::<bool>()), len).prop_map(move |flags| {
        pairs
            .iter()
            .zip(flags)
            .filter(|(_, (keep, _))| *keep)
            .map(|(&(i, j), (_, flip))| if flip { (j, i) } else { (i, j) })
            .collect()
    })
}

pub fn dag_case(max_n: usize) -> impl Strategy<Value = DagCase> {
    (1..=max_n)
        .prop_flat_map(|n| (Just(n), edge_set(n)))
        .prop_flat_map(|(n, edges)| {
            let m = edges.len();
            (
                vals(n, -2.0, 2.0),
                vals(n, 0.5, 2.0),
                Just(edges),
                0.05f64..10.0,
                vals(n, -2.0, 2.0),
                vals(n, -2.0, 2.0),
                vals(m, 0.0, 2.0),
                vals(m, -2.0, 2.0),
                vals(n, -2.0, 2.0),
                any::<u64>(),
            )
        })
        .prop_map(|(y, w, edges, rho, g, h, v, y1, y2, seed)| DagCase {
            inst: DagInstance::new(y, w, edges).unwrap(),
            state: DagState { g, h, v, y1, y2, iter: 0 },
            cfg: SolverConfig::with_rho(rho),
            seed,
        })
}

// ----------------------------------------------------- reference objectives

/// Augmented Lagrangian of the chain splitting, written out term by term.
pub fn smooth_lagrangian(inst: &SmoothInstance, s: &SmoothState, rho: f64) -> f64 {
    let (x, w, n) = (inst.x(), inst.w(), inst.n());
    let mut f = w[0] * (x[0] - s.p[0]).powi(2) + w[n - 1] * (x[n - 1] - s.q[n - 2]).powi(2);
    for i in 1..n - 1 {
        f += 0.5 * w[i] * ((x[i] - s.p[i]).powi(2) + (x[i] - s.q[i - 1]).powi(2));
    }
    for i in 0..n - 1 {
        let c = s.p[i] - s.q[i] + s.u[i];
        f += inst.lambda() * s.u[i] * s.u[i] + s.y1[i] * c + 0.5 * rho * c * c;
    }
    for i in 0..n.saturating_sub(2) {
        let c = s.p[i + 1] - s.q[i];
        f += s.y2[i] * c + 0.5 * rho * c * c;
    }
    f
}

/// Augmented Lagrangian of the DAG splitting.
pub fn dag_lagrangian(inst: &DagInstance, s: &DagState, rho: f64) -> f64 {
    let (y, w) = (inst.y(), inst.w());
    let mut f = 0.0;
    for i in 0..inst.n() {
        f += 0.5 * w[i] * ((y[i] - s.g[i]).powi(2) + (y[i] - s.h[i]).powi(2));
        let c = s.g[i] - s.h[i];
        f += s.y2[i] * c + 0.5 * rho * c * c;
    }
    for (k, &(a, b)) in inst.edges().iter().enumerate() {
        let c = s.g[a] - s.h[b] + s.v[k];
        f += s.y1[k] * c + 0.5 * rho * c * c;
    }
    f
}

/// Minimizer of a convex 1-D function on `[lo, hi]` by bisection on the sign
/// of a central-difference derivative.
pub fn argmin_1d(f: impl Fn(f64) -> f64, lo: f64, hi: f64) -> f64 {
    const H: f64 = 1e-3;
    let d = |t: f64| f(t + H) - f(t - H);
    if d(lo) >= 0.0 {
        return lo;
    }
    let (mut a, mut b) = (lo, hi);
    for _ in 0..200 {
        let mid = 0.5 * (a + b);
        if mid <= a || mid >= b {
            break;
        }
        if d(mid) < 0.0 {
            a = mid;
        } else {
            b = mid;
        }
    }
    0.5 * (a + b)
}

pub fn unit(rng: &mut ChaCha8Rng) -> f64 {
    ((rng.next_u64() >> 11) as f64 + 0.5) * (1.0 / (1u64 << 53) as f64)
}

pub fn dense_e1_e2(enc: &IncidenceEncoding) -> (DMatrix<f64>, DMatrix<f64>) {
    let (n, m) = (enc.n(), enc.m());
    let mut e1 = DMatrix::zeros(m, n);
    let mut e2 = DMatrix::zeros(m, n);
    for k in 0..m {
        e1[(k, enc.tails()[k])] = 1.0;
        e2[(k, enc.heads()[k])] = 1.0;
    }
    (e1, e2)
}

// ------------------------------------------------------------ block checks

/// Which block of the chain splitting a check perturbs.
#[derive(Debug, Clone, Copy)]
pub enum SmoothBlock {
    U,
    P,
    Q,
}

fn smooth_block(s: &mut SmoothState, b: SmoothBlock) -> &mut Vec<f64> {
    match b {
        SmoothBlock::U => &mut s.u,
        SmoothBlock::P => &mut s.p,
        SmoothBlock::Q => &mut s.q,
    }
}

#[derive(Debug, Clone, Copy)]
pub enum DagBlock {
    V,
    G,
    H,
}

fn dag_block(s: &mut DagState, b: DagBlock) -> &mut Vec<f64> {
    match b {
        DagBlock::V => &mut s.v,
        DagBlock::G => &mut s.g,
        DagBlock::H => &mut s.h,
    }
}

/// Shared optimality check: the closed-form block must match a coordinate
/// numerical minimizer to 1e-8 and beat 1000 random perturbations.
fn block_optimality(
    closed: &[f64],
    nonneg: bool,
    seed: u64,
    eval: &dyn Fn(&[f64]) -> f64,
) -> Check {
    let lo = if nonneg { 0.0 } else { -1e3 };
    for i in 0..closed.len() {
        let num = argmin_1d(
            |t| {
                let mut z = closed.to_vec();
                z[i] = t;
                eval(&z)
            },
            lo,
            1e3,
        );
        prop_assert!(
            (num - closed[i]).abs() <= 1e-8,
            "coordinate {i}: closed form {} vs numerical {num}",
            closed[i]
        );
    }
    let best = eval(closed);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    for trial in 0..1000 {
        let scale = [1e-6, 1e-3, 1e-1, 1.0][trial % 4];
        let cand: Vec<f64> = closed
            .iter()
            .map(|&c| {
                let t = c + scale * (2.0 * unit(&mut rng) - 1.0);
                if nonneg { t.max(0.0) } else { t }
            })
            .collect();
        let val = eval(&cand);
        prop_assert!(best <= val + 1e-12 * (1.0 + best.abs()), "perturbation beat closed form: {best} > {val}");
    }
    Ok(())
}

pub fn check_smooth_block_optimal(c: &SmoothCase, block: SmoothBlock) -> Check {
    let closed = match block {
        SmoothBlock::U => smooth::update_u(&c.state, &c.inst, &c.cfg),
        SmoothBlock::P => smooth::update_p(&c.state, &c.inst, &c.cfg),
        SmoothBlock::Q => smooth::update_q(&c.state, &c.inst, &c.cfg),
    };
    let eval = |z: &[f64]| {
        let mut s = c.state.clone();
        *smooth_block(&mut s, block) = z.to_vec();
        smooth_lagrangian(&c.inst, &s, c.cfg.rho)
    };
    block_optimality(&closed, matches!(block, SmoothBlock::U), c.seed, &eval)
}

pub fn check_dag_block_optimal(c: &DagCase, block: DagBlock) -> Check {
    let enc = IncidenceEncoding::new(&c.inst);
    let closed = match block {
        DagBlock::V => dag::update_v(&c.state, &enc, &c.cfg),
        DagBlock::G => dag::update_g(&c.state, &c.inst, &enc, &c.cfg),
        DagBlock::H => dag::update_h(&c.state, &c.inst, &enc, &c.cfg),
    };
    let eval = |z: &[f64]| {
        let mut s = c.state.clone();
        *dag_block(&mut s, block) = z.to_vec();
        dag_lagrangian(&c.inst, &s, c.cfg.rho)
    };
    block_optimality(&closed, matches!(block, DagBlock::V), c.seed, &eval)
}

pub fn check_slack_nonnegative(s: &SmoothCase, d: &DagCase) -> Check {
    let u = smooth::update_u(&s.state, &s.inst, &s.cfg);
    prop_assert!(u.iter().all(|&v| v >= 0.0), "negative u: {u:?}");
    let enc = IncidenceEncoding::new(&d.inst);
    let v = dag::update_v(&d.state, &enc, &d.cfg);
    prop_assert!(v.iter().all(|&t| t >= 0.0), "negative v: {v:?}");
    Ok(())
}

/// Feasible iterates built from a sorted vector have exactly zero primal residual.
pub fn check_feasible_zero_residual(mut beta: Vec<f64>, rho: f64, dag_n: usize) -> Check {
    beta.sort_by(f64::total_cmp);
    let n = beta.len();
    let cfg = SolverConfig::with_rho(rho);
    let p = beta[..n - 1].to_vec();
    let q = beta[1..].to_vec();
    let u: Vec<f64> = q.iter().zip(&p).map(|(q, p)| q - p).collect();
    let s = SmoothState { p, q, u, y1: vec![0.0; n - 1], y2: vec![0.0; n - 2], iter: 0 };
    let res = smooth::residuals(&s, &s, &cfg);
    prop_assert_eq!(res.r, 0.0);

    let alpha = &beta[..dag_n.min(n)];
    let m = alpha.len();
    let edges: Vec<(usize, usize)> = (0..m)
        .flat_map(|i| (i + 1..m).map(move |j| (i, j)))
        .collect();
    let enc = IncidenceEncoding::from_edges(m, &edges).unwrap();
    let v: Vec<f64> = edges.iter().map(|&(a, b)| alpha[b] - alpha[a]).collect();
    let st = DagState {
        g: alpha.to_vec(),
        h: alpha.to_vec(),
        v,
        y1: vec![0.0; edges.len()],
        y2: vec![0.0; m],
        iter: 0,
    };
    let res = dag::residuals(&st, &st, &enc, &cfg);
    prop_assert_eq!(res.r, 0.0);
    Ok(())
}

/// Elementwise g and h updates against a dense solve of the normal equations.
pub fn check_diagonal_vs_dense(c: &DagCase) -> Check {
    let enc = IncidenceEncoding::new(&c.inst);
    let (e1, e2) = dense_e1_e2(&enc);
    let n = c.inst.n();
    let rho = c.cfg.rho;
    let wdiag = DMatrix::from_diagonal(&DVector::from_column_slice(c.inst.w()));
    let wy = DVector::from_iterator(n, c.inst.w().iter().zip(c.inst.y()).map(|(w, y)| w * y));
    let (g, h, v, y1, y2) = (
        DVector::from_column_slice(&c.state.g),
        DVector::from_column_slice(&c.state.h),
        DVector::from_column_slice(&c.state.v),
        DVector::from_column_slice(&c.state.y1),
        DVector::from_column_slice(&c.state.y2),
    );
    let eye = DMatrix::<f64>::identity(n, n);

    let lhs_g = &wdiag + (e1.transpose() * &e1) * rho + &eye * rho;
    let rhs_g = &wy + e1.transpose() * (&e2 * &h) * rho - e1.transpose() * &v * rho
        - e1.transpose() * &y1 + &h * rho - &y2;
    let dense_g = lhs_g.lu().solve(&rhs_g).expect("positive definite");
    let fast_g = dag::update_g(&c.state, &c.inst, &enc, &c.cfg);
    for j in 0..n {
        prop_assert!((dense_g[j] - fast_g[j]).abs() <= 1e-10, "g[{j}]: {} vs {}", dense_g[j], fast_g[j]);
    }

    let lhs_h = &wdiag + (e2.transpose() * &e2) * rho + &eye * rho;
    let rhs_h = &wy + e2.transpose() * (&e1 * &g) * rho + e2.transpose() * &v * rho
        + e2.transpose() * &y1 + &g * rho + &y2;
    let dense_h = lhs_h.lu().solve(&rhs_h).expect("positive definite");
    let fast_h = dag::update_h(&c.state, &c.inst, &enc, &c.cfg);
    for j in 0..n {
        prop_assert!((dense_h[j] - fast_h[j]).abs() <= 1e-10, "h[{j}]: {} vs {}", dense_h[j], fast_h[j]);
    }
    Ok(())
}

pub fn check_degree_identity(inst: &DagInstance) -> Check {
    let enc = IncidenceEncoding::new(inst);
    let (e1, e2) = dense_e1_e2(&enc);
    let g1 = e1.transpose() * &e1;
    let g2 = e2.transpose() * &e2;
    let n = inst.n();
    for i in 0..n {
        for j in 0..n {
            let want1 = if i == j { enc.out_degree()[i] as f64 } else { 0.0 };
            let want2 = if i == j { enc.in_degree()[i] as f64 } else { 0.0 };
            prop_assert_eq!(g1[(i, j)], want1);
            prop_assert_eq!(g2[(i, j)], want2);
        }
    }
    prop_assert_eq!(enc.out_degree().iter().sum::<usize>(), inst.m());
    prop_assert_eq!(enc.in_degree().iter().sum::<usize>(), inst.m());
    Ok(())
}

pub fn check_pav(x: &[f64], w: &[f64]) -> Check {
    let fit = oracle::pav(x, w).unwrap();
    prop_assert_eq!(max_violation_chain(&fit), 0.0);
    prop_assert!(fit.windows(2).all(|p| p[0] <= p[1]));
    let mut start = 0;
    while start < fit.len() {
        let mut end = start + 1;
        while end < fit.len() && fit[end] == fit[start] {
            end += 1;
        }
        let (sw, swx) = (start..end).fold((0.0, 0.0), |(a, b), i| (a + w[i], b + w[i] * x[i]));
        prop_assert!((swx / sw - fit[start]).abs() <= 1e-12, "block {start}..{end}");
        start = end;
    }
    if x.len() < 2 {
        return Ok(());
    }
    let exact = oracle::exact_smooth(&SmoothInstance::new(x.to_vec(), w.to_vec(), 0.0).unwrap()).unwrap();
    for (a, b) in exact.values.iter().zip(&fit) {
        prop_assert!((a - b).abs() <= 1e-12, "exact_smooth {a} vs pav {b}");
    }
    Ok(())
}

pub fn check_generator(n: usize, seed: u64, keep: f64) -> Check {
    let mut spec = GenSpec::smooth(n, seed);
    let a = Instance::from(gen_smooth(&spec).unwrap()).to_json();
    let b = Instance::from(gen_smooth(&spec).unwrap()).to_json();
    prop_assert_eq!(a, b);

    spec = GenSpec::dag(n, seed);
    spec.grid_keep_prob = keep;
    let (rows, cols) = match grid_shape(n) {
        Ok(shape) => shape,
        Err(_) => {
            prop_assert!(gen_dag(&spec).is_err());
            return Ok(());
        }
    };
    let d1 = gen_dag(&spec).unwrap();
    let d2 = gen_dag(&spec).unwrap();
    prop_assert_eq!(Instance::from(d1.clone()).to_json(), Instance::from(d2).to_json());
    prop_assert!(d1.y().iter().all(|&y| y > 0.0 && y < 1000.0));
    let full = grid_edges(rows, cols);
    for &(a, b) in d1.edges() {
        prop_assert!(full.contains(&(a, b)));
        prop_assert!(a / cols <= b / cols && a % cols <= b % cols, "edge {a}->{b} breaks dominance");
    }
    if keep == 1.0 {
        prop_assert_eq!(d1.m(), full.len());
    }
    Ok(())
}

pub fn check_objectives(c: &DagCase, s: &SmoothCase, perm_seed: u64) -> Check {
    let x = s.inst.x();
    let roughness: f64 = x.windows(2).map(|p| (p[0] - p[1]).powi(2)).sum();
    prop_assert_eq!(s.inst.objective(x).unwrap(), s.inst.lambda() * roughness);
    let beta = s.state.p.iter().chain(s.state.q.last()).copied().collect::<Vec<_>>();
    let f = s.inst.objective(&beta).unwrap();
    prop_assert!(f >= 0.0);
    if s.inst.lambda() == 0.0 && beta != x {
        prop_assert!(f > 0.0);
    }

    prop_assert_eq!(c.inst.objective(c.inst.y()).unwrap(), 0.0);
    let alpha = &c.state.g;
    let fa = c.inst.objective(alpha).unwrap();
    prop_assert!(fa >= 0.0);
    if alpha.as_slice() != c.inst.y() {
        prop_assert!(fa > 0.0);
    }
    let mut edges = c.inst.edges().to_vec();
    let mut rng = ChaCha8Rng::seed_from_u64(perm_seed);
    for i in (1..edges.len()).rev() {
        edges.swap(i, (rng.next_u64() % (i as u64 + 1)) as usize);
    }
    let shuffled = DagInstance::new(c.inst.y().to_vec(), c.inst.w().to_vec(), edges).unwrap();
    prop_assert_eq!(shuffled.objective(alpha).unwrap(), fa);
    prop_assert_eq!(shuffled.max_violation(alpha).unwrap(), c.inst.max_violation(alpha).unwrap());
    Ok(())
}

/// Exact oracles: small KKT residual and no feasible ±1e-3 coordinate move improves.
pub fn check_oracle_local_optimality(s: &SmoothCase, d: &DagCase) -> Check {
    let sol = oracle::exact_smooth(&s.inst).unwrap();
    prop_assert!(sol.kkt_residual <= 1e-9, "smooth kkt {}", sol.kkt_residual);
    let f0 = s.inst.objective(&sol.values).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(s.seed);
    for _ in 0..100 {
        let mut b = sol.values.clone();
        let i = (rng.next_u64() % b.len() as u64) as usize;
        b[i] += if rng.next_u64() & 1 == 0 { 1e-3 } else { -1e-3 };
        if max_violation_chain(&b) == 0.0 {
            let f = s.inst.objective(&b).unwrap();
            prop_assert!(f >= f0 - 1e-12 * (1.0 + f0), "smooth move improved {f0} -> {f}");
        }
    }

    let sol = oracle::exact_dag(&d.inst).unwrap();
    prop_assert!(sol.kkt_residual <= 1e-9, "dag kkt {}", sol.kkt_residual);
    let f0 = d.inst.objective(&sol.values).unwrap();
    for _ in 0..100 {
        let mut a = sol.values.clone();
        let i = (rng.next_u64() % a.len() as u64) as usize;
        a[i] += if rng.next_u64() & 1 == 0 { 1e-3 } else { -1e-3 };
        if d.inst.max_violation(&a).unwrap() <= 0.0 {
            let f = d.inst.objective(&a).unwrap();
            prop_assert!(f >= f0 - 1e-12 * (1.0 + f0), "dag move improved {f0} -> {f}");
        }
    }
    Ok(())
}

/// Converged reports satisfy the tolerance and the trace has one row per iteration.
pub fn check_termination(s: &SmoothCase, d: &DagCase, max_iter: usize) -> Check {
    let cfg = SolverConfig { max_iter, ..s.cfg.clone() };
    let rep = smooth::solve(&s.inst, &cfg).unwrap();
    prop_assert_eq!(rep.trace.len(), rep.iterations);
    if rep.status == Status::Converged {
        prop_assert!(rep.final_r <= rep.epsilon && rep.final_s <= rep.epsilon);
    }
    let cfg = SolverConfig { max_iter, ..d.cfg.clone() };
    let rep = dag::solve(&d.inst, &cfg).unwrap();
    prop_assert_eq!(rep.trace.len(), rep.iterations);
    if rep.status == Status::Converged {
        prop_assert!(rep.final_r <= rep.epsilon && rep.final_s <= rep.epsilon);
    }
    Ok(())
}

/// On a path graph the DAG solver reproduces PAV.
pub fn check_chain_equivalence(x: &[f64], w: &[f64]) -> Check {
    let n = x.len();
    let edges = (0..n - 1).map(|i| (i, i + 1)).collect();
    let inst = DagInstance::new(x.to_vec(), w.to_vec(), edges).unwrap();
    let cfg = SolverConfig { rho: 0.5, tol_factor: 1e-9, max_iter: 500_000, ..Default::default() };
    let rep = dag::solve(&inst, &cfg).unwrap();
    let fit = oracle::pav(x, w).unwrap();
    let gap = rep.solution.iter().zip(&fit).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
    prop_assert!(gap <= 1e-3, "dag vs pav gap {gap}");
    Ok(())
}
