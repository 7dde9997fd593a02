//! Interlocking flows: load released in the core travels along blocking arcs,
//! split evenly between the two supporters of each block, until it settles
//! in the frame.

use std::collections::{BTreeMap, BTreeSet};

use nalgebra::{DMatrix, DVector};
use petgraph::algo::tarjan_scc;
use petgraph::graph::DiGraph;
use serde::{Deserialize, Serialize};

use crate::assembly::TruchetTiling;
use crate::blocking::BlockingGraph;
use crate::{Error, Result};

pub const DEFAULT_TOL: f64 = 1e-12;
pub const DEFAULT_MAX_ITER: usize = 1_000_000;
/// Frame cells with more load than this count as loaded.
pub const LOADED_THRESHOLD: f64 = 1e-9;

/// Row-stochastic transfer matrix stored by rows. Row `i` lists `(j, A_ij)`;
/// indices are 0-based here.
#[derive(Debug, Clone, PartialEq)]
pub struct TransferMatrix {
    pub n: usize,
    pub rows: Vec<Vec<(usize, f64)>>,
    pub frame: BTreeSet<usize>,
}

impl TransferMatrix {
    pub fn from_graph(g: &BlockingGraph) -> Result<Self> {
        let mut rows = vec![Vec::new(); g.n];
        for i in 1..=g.n {
            let out: Vec<usize> = g.out_neighbors(i).collect();
            if g.is_frame(i) {
                if out != [i] {
                    return Err(Error::UnsupportedBlock { index: i, degree: out.len() });
                }
                rows[i - 1].push((i - 1, 1.0));
            } else {
                if out.len() != 2 || out.contains(&i) {
                    return Err(Error::UnsupportedBlock { index: i, degree: out.len() });
                }
                rows[i - 1] = out.iter().map(|&j| (j - 1, 0.5)).collect();
            }
        }
        Ok(TransferMatrix {
            n: g.n,
            rows,
            frame: g.frame.iter().map(|&j| j - 1).collect(),
        })
    }

    /// Entry `A_ij`, 0-based.
    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.rows[i].iter().filter(|&&(k, _)| k == j).map(|&(_, v)| v).sum()
    }

    pub fn row_sum(&self, i: usize) -> f64 {
        self.rows[i].iter().map(|&(_, v)| v).sum()
    }

    pub fn is_frame(&self, i: usize) -> bool {
        self.frame.contains(&i)
    }

    pub fn to_dense(&self) -> DMatrix<f64> {
        let mut m = DMatrix::zeros(self.n, self.n);
        for (i, row) in self.rows.iter().enumerate() {
            for &(j, v) in row {
                m[(i, j)] += v;
            }
        }
        m
    }

    fn core(&self) -> Vec<usize> {
        (0..self.n).filter(|i| !self.frame.contains(i)).collect()
    }

    /// Power-iteration estimate of the spectral radius of the core-to-core
    /// block.
    pub fn core_spectral_radius(&self, iterations: usize) -> f64 {
        let core = self.core();
        if core.is_empty() {
            return 0.0;
        }
        let pos: BTreeMap<usize, usize> = core.iter().enumerate().map(|(p, &i)| (i, p)).collect();
        let mut v = vec![1.0 / core.len() as f64; core.len()];
        let mut estimate = 0.0;
        for _ in 0..iterations.max(1) {
            let mut w = vec![0.0; core.len()];
            for (p, &i) in core.iter().enumerate() {
                for &(j, a) in &self.rows[i] {
                    if let Some(&q) = pos.get(&j) {
                        w[q] += a * v[p];
                    }
                }
            }
            let norm: f64 = w.iter().sum();
            if norm == 0.0 {
                return 0.0;
            }
            estimate = norm / v.iter().sum::<f64>();
            v = w.into_iter().map(|x| x / norm).collect();
        }
        estimate
    }

    /// Core components from which no load can reach the frame.
    pub fn closed_core_components(&self) -> Vec<Vec<usize>> {
        let core = self.core();
        let mut g = DiGraph::<usize, ()>::new();
        let nodes: BTreeMap<usize, _> = core.iter().map(|&i| (i, g.add_node(i))).collect();
        for &i in &core {
            for &(j, _) in &self.rows[i] {
                if let Some(&b) = nodes.get(&j) {
                    g.add_edge(nodes[&i], b, ());
                }
            }
        }
        let mut closed: Vec<Vec<usize>> = tarjan_scc(&g)
            .into_iter()
            .filter(|comp| {
                let members: BTreeSet<usize> = comp.iter().map(|&n| g[n]).collect();
                let cyclic = members.len() > 1 || self.rows[*members.iter().next().unwrap()].iter().any(|&(j, _)| members.contains(&j));
                cyclic && members.iter().all(|&i| self.rows[i].iter().all(|&(j, _)| members.contains(&j)))
            })
            .map(|comp| {
                let mut v: Vec<usize> = comp.iter().map(|&n| g[n] + 1).collect();
                v.sort();
                v
            })
            .collect();
        closed.sort();
        closed
    }
}

pub fn transfer_matrix(g: &BlockingGraph) -> Result<TransferMatrix> {
    TransferMatrix::from_graph(g)
}

/// Load `core_value` on every core cell, nothing on the frame.
pub fn initial_load(t: &TruchetTiling, core_value: f64) -> Result<Vec<f64>> {
    if !(core_value >= 0.0 && core_value.is_finite()) {
        return Err(Error::InvalidArgument(format!("core value must be non-negative, got {core_value}")));
    }
    Ok(t.cells().map(|(r, c)| if t.is_frame(r, c) { 0.0 } else { core_value }).collect())
}

/// One propagation step: `x' = Aᵀ x`.
pub fn step(a: &TransferMatrix, x: &[f64]) -> Result<Vec<f64>> {
    if x.len() != a.n {
        return Err(Error::DimensionMismatch { expected: a.n, actual: x.len() });
    }
    let mut out = vec![0.0; a.n];
    for (i, row) in a.rows.iter().enumerate() {
        if x[i] == 0.0 {
            continue;
        }
        for &(j, v) in row {
            out[j] += v * x[i];
        }
    }
    Ok(out)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FlowResult {
    pub rows: usize,
    pub cols: usize,
    /// Load per frame cell, keyed by 1-based linear index.
    pub frame_load: BTreeMap<usize, f64>,
    pub residual_core_mass: f64,
    pub iterations: usize,
    pub converged: bool,
}

impl FlowResult {
    fn from_vector(a: &TransferMatrix, x: &[f64], rows: usize, cols: usize, iterations: usize, converged: bool) -> Self {
        let frame_load = a.frame.iter().map(|&j| (j + 1, x[j].max(0.0))).collect();
        let residual = a.core().iter().map(|&i| x[i]).sum::<f64>().max(0.0);
        FlowResult {
            rows,
            cols,
            frame_load,
            residual_core_mass: residual,
            iterations,
            converged,
        }
    }

    /// Load at 1-based cell `(r, c)`; core cells read 0.
    pub fn at(&self, r: usize, c: usize) -> f64 {
        self.frame_load.get(&((r - 1) * self.cols + c)).copied().unwrap_or(0.0)
    }

    /// Row-major `rows × cols` grid of loads.
    pub fn grid(&self) -> Vec<Vec<f64>> {
        (1..=self.rows).map(|r| (1..=self.cols).map(|c| self.at(r, c)).collect()).collect()
    }

    pub fn total_frame_mass(&self) -> f64 {
        self.frame_load.values().sum()
    }
}

fn grid_dims(a: &TransferMatrix, shape: (usize, usize)) -> Result<(usize, usize)> {
    if shape.0 * shape.1 != a.n {
        return Err(Error::DimensionMismatch { expected: a.n, actual: shape.0 * shape.1 });
    }
    Ok(shape)
}

/// Repeats [`step`] until the load left in the core drops below `tol`.
pub fn iterate(a: &TransferMatrix, x: &[f64], shape: (usize, usize), tol: f64, max_iter: usize) -> Result<FlowResult> {
    let (rows, cols) = grid_dims(a, shape)?;
    if !(tol > 0.0) || max_iter == 0 {
        return Err(Error::InvalidArgument("tol must be positive and max_iter at least 1".into()));
    }
    let core = a.core();
    let residual = |v: &[f64]| core.iter().map(|&i| v[i]).sum::<f64>();
    let mut v = step(a, x)?;
    let mut n = 1;
    while residual(&v) >= tol && n < max_iter {
        v = step(a, &v)?;
        n += 1;
    }
    let converged = residual(&v) < tol;
    Ok(FlowResult::from_vector(a, &v, rows, cols, n, converged))
}

/// Exact limit of the absorbing chain: `y = (I − Qᵀ)⁻¹ x_core`, then each
/// frame cell receives its own load plus `Σ R_ij y_i`.
pub fn closed_form(a: &TransferMatrix, x: &[f64], shape: (usize, usize)) -> Result<FlowResult> {
    let (rows, cols) = grid_dims(a, shape)?;
    if x.len() != a.n {
        return Err(Error::DimensionMismatch { expected: a.n, actual: x.len() });
    }
    if let Some(component) = a.closed_core_components().into_iter().next() {
        return Err(Error::NonAbsorbingCycle { component });
    }
    let core = a.core();
    let pos: BTreeMap<usize, usize> = core.iter().enumerate().map(|(p, &i)| (i, p)).collect();
    let k = core.len();
    let mut m = DMatrix::<f64>::identity(k, k);
    for (p, &i) in core.iter().enumerate() {
        for &(j, v) in &a.rows[i] {
            if let Some(&q) = pos.get(&j) {
                m[(q, p)] -= v;
            }
        }
    }
    let rhs = DVector::from_iterator(k, core.iter().map(|&i| x[i]));
    let y = m
        .lu()
        .solve(&rhs)
        .ok_or_else(|| Error::NonAbsorbingCycle { component: core.iter().map(|&i| i + 1).collect() })?;
    let mut out: Vec<f64> = (0..a.n).map(|i| if a.is_frame(i) { x[i] } else { 0.0 }).collect();
    for (p, &i) in core.iter().enumerate() {
        for &(j, v) in &a.rows[i] {
            if a.is_frame(j) {
                out[j] += v * y[p];
            }
        }
    }
    Ok(FlowResult::from_vector(a, &out, rows, cols, 0, true))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FlowMetrics {
    pub max_load: f64,
    pub loaded_cells: usize,
    /// Population standard deviation over mean, across loaded frame cells.
    pub cv: f64,
    pub iterations: usize,
}

pub fn flow_metrics(r: &FlowResult) -> Result<FlowMetrics> {
    if !r.converged {
        return Err(Error::NotConverged { residual: r.residual_core_mass });
    }
    let loaded: Vec<f64> = r.frame_load.values().copied().filter(|&v| v > LOADED_THRESHOLD).collect();
    let max_load = loaded.iter().copied().fold(0.0, f64::max);
    let cv = if loaded.is_empty() {
        0.0
    } else {
        let n = loaded.len() as f64;
        let mean = loaded.iter().sum::<f64>() / n;
        let var = loaded.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / n;
        var.sqrt() / mean
    };
    Ok(FlowMetrics {
        max_load,
        loaded_cells: loaded.len(),
        cv,
        iterations: r.iterations,
    })
}

/// Flow of a tiling under the downward blocking graph, solved in closed form.
pub fn tiling_flow(t: &TruchetTiling) -> Result<FlowResult> {
    let a = transfer_matrix(&crate::blocking::dbg_combinatorial(t)?)?;
    closed_form(&a, &initial_load(t, 1.0)?, (t.rows, t.cols))
}

/// Same as [`tiling_flow`] by repeated stepping.
pub fn tiling_flow_iterated(t: &TruchetTiling, tol: f64, max_iter: usize) -> Result<FlowResult> {
    let a = transfer_matrix(&crate::blocking::dbg_combinatorial(t)?)?;
    iterate(&a, &initial_load(t, 1.0)?, (t.rows, t.cols), tol, max_iter)
}
