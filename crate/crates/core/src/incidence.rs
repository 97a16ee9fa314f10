//! Matrix-free edge selectors.
//!
//! Row `k` of `E1` has a single 1 at column `tails[k]`, row `k` of `E2` a
//! single 1 at column `heads[k]`. Hence `E1^T E1 = diag(out_degree)` and
//! `E2^T E2 = diag(in_degree)`, which is what makes the DAG solver's linear
//! systems diagonal.

use crate::error::{Error, Result};
use crate::problem::DagInstance;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct IncidenceEncoding {
    n: usize,
    tails: Vec<usize>,
    heads: Vec<usize>,
    out_degree: Vec<usize>,
    in_degree: Vec<usize>,
    // CSR lists of edge ids grouped by tail / by head, ascending edge id.
    out_offsets: Vec<usize>,
    out_edges: Vec<usize>,
    in_offsets: Vec<usize>,
    in_edges: Vec<usize>,
}

impl IncidenceEncoding {
    /// Builds the encoding from a validated instance. Edge order is preserved.
    pub fn new(inst: &DagInstance) -> Self {
        Self::build(inst.n(), inst.edges())
            .expect("DagInstance edges are validated on construction")
    }

    /// Builds the encoding from raw edges, rejecting out-of-range endpoints
    /// and self-loops.
    pub fn from_edges(n: usize, edges: &[(usize, usize)]) -> Result<Self> {
        Self::build(n, edges)
    }

    fn build(n: usize, edges: &[(usize, usize)]) -> Result<Self> {
        let m = edges.len();
        let mut tails = Vec::with_capacity(m);
        let mut heads = Vec::with_capacity(m);
        let mut out_degree = vec![0usize; n];
        let mut in_degree = vec![0usize; n];
        for (k, &(i, j)) in edges.iter().enumerate() {
            if i >= n || j >= n {
                return Err(Error::input(format!(
                    "edge {k} = ({i}, {j}) has an endpoint outside [0, {n})"
                )));
            }
            if i == j {
                return Err(Error::input(format!("edge {k} = ({i}, {j}) is a self-loop")));
            }
            tails.push(i);
            heads.push(j);
            out_degree[i] += 1;
            in_degree[j] += 1;
        }
        let (out_offsets, out_edges) = group(&tails, &out_degree);
        let (in_offsets, in_edges) = group(&heads, &in_degree);
        Ok(IncidenceEncoding {
            n,
            tails,
            heads,
            out_degree,
            in_degree,
            out_offsets,
            out_edges,
            in_offsets,
            in_edges,
        })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn m(&self) -> usize {
        self.tails.len()
    }

    pub fn tails(&self) -> &[usize] {
        &self.tails
    }

    pub fn heads(&self) -> &[usize] {
        &self.heads
    }

    pub fn out_degree(&self) -> &[usize] {
        &self.out_degree
    }

    pub fn in_degree(&self) -> &[usize] {
        &self.in_degree
    }

    /// Ids of the edges whose tail is `node`.
    pub fn out_edges(&self, node: usize) -> &[usize] {
        &self.out_edges[self.out_offsets[node]..self.out_offsets[node + 1]]
    }

    /// Ids of the edges whose head is `node`.
    pub fn in_edges(&self, node: usize) -> &[usize] {
        &self.in_edges[self.in_offsets[node]..self.in_offsets[node + 1]]
    }

    /// `E1 g`.
    pub fn apply_e1(&self, g: &[f64]) -> Vec<f64> {
        self.tails.iter().map(|&i| g[i]).collect()
    }

    /// `E2 h`.
    pub fn apply_e2(&self, h: &[f64]) -> Vec<f64> {
        self.heads.iter().map(|&j| h[j]).collect()
    }

    /// `E1^T z`, summing edge values onto their tails.
    pub fn apply_e1t(&self, z: &[f64]) -> Vec<f64> {
        (0..self.n)
            .map(|j| self.out_edges(j).iter().map(|&k| z[k]).sum())
            .collect()
    }

    /// `E2^T z`, summing edge values onto their heads.
    pub fn apply_e2t(&self, z: &[f64]) -> Vec<f64> {
        (0..self.n)
            .map(|j| self.in_edges(j).iter().map(|&k| z[k]).sum())
            .collect()
    }
}

fn group(endpoint: &[usize], degree: &[usize]) -> (Vec<usize>, Vec<usize>) {
    let mut offsets = Vec::with_capacity(degree.len() + 1);
    offsets.push(0);
    for d in degree {
        offsets.push(offsets.last().unwrap() + d);
    }
    let mut cursor = offsets.clone();
    let mut ids = vec![0usize; endpoint.len()];
    for (k, &node) in endpoint.iter().enumerate() {
        ids[cursor[node]] = k;
        cursor[node] += 1;
    }
    (offsets, ids)
}
