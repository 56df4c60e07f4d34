//! Feature extraction: turn a transpiled circuit pool into per-qubit and
//! per-coupling feature matrices, and standardize them for training.
//!
//! Static descriptors come from the coupling graph alone; dynamic
//! descriptors summarize how transpiled traffic distributes over qubits
//! and couplings, averaged across the pool. The resulting matrices are
//! the only circuit-derived signal the regressors ever see.

use serde::{Deserialize, Serialize};

use crate::backend::ErrorMap;
use crate::circuit::Gate;
use crate::error::{Error, Result};
use crate::graph::{
    edge_static_features, node_static_features, CouplingGraph, EDGE_STATIC_DIM, NODE_STATIC_DIM,
};
use crate::transpiler::{TranspiledCircuit, TranspiledPool};

/// Dynamic per-qubit columns: coverage, absolute 1q share, relative 1q share.
pub const NODE_DYN_DIM: usize = 3;
/// Dynamic per-coupling columns: coverage, 2q share.
pub const EDGE_DYN_DIM: usize = 2;
/// Full per-qubit feature width (static then dynamic).
pub const NODE_FEAT_DIM: usize = NODE_STATIC_DIM + NODE_DYN_DIM;
/// Full per-coupling feature width (static then dynamic).
pub const EDGE_FEAT_DIM: usize = EDGE_STATIC_DIM + EDGE_DYN_DIM;

/// Dynamic features of one circuit or one pool (when averaged).
#[derive(Debug, Clone, PartialEq)]
pub struct DynFeatures {
    /// Per qubit: `[coverage, share_1q, relative_share_1q]`.
    pub nodes: Vec<[f64; NODE_DYN_DIM]>,
    /// Per canonical coupling: `[coverage, share_2q]`.
    pub edges: Vec<[f64; EDGE_DYN_DIM]>,
}

/// Dynamic features of a single transpiled circuit.
///
/// Per qubit: coverage is 1 when the qubit appears in any gate;
/// `share_1q` is its fraction of all rotation gates; `relative_share_1q`
/// is its rotation count divided by the mean rotation count over qubits
/// that have at least one rotation (so the mean of this column over
/// those qubits is exactly 1). Per coupling: coverage is 1 when any CX
/// rides it; `share_2q` is its fraction of all CX gates, which sums to 1
/// over couplings whenever the circuit has CX gates at all. Empty
/// circuits produce all-zero features. A CX whose endpoints do not share
/// a coupling is an error.
pub fn circuit_dyn_features(tc: &TranspiledCircuit, g: &CouplingGraph) -> Result<DynFeatures> {
    if tc.n_physical != g.n() {
        return Err(Error::InvalidInput(format!(
            "circuit on {} physical qubits does not fit a {}-qubit graph",
            tc.n_physical,
            g.n()
        )));
    }
    let mut covered = vec![false; g.n()];
    let mut rot = vec![0usize; g.n()];
    let mut cx = vec![0usize; g.edge_count()];
    for gate in &tc.gates {
        match *gate {
            Gate::Rot1q { q, .. } => {
                check_qubit(q, g.n())?;
                covered[q] = true;
                rot[q] += 1;
            }
            Gate::Cx { control, target } => {
                check_qubit(control, g.n())?;
                check_qubit(target, g.n())?;
                covered[control] = true;
                covered[target] = true;
                let e = g.edge_id(control, target).ok_or_else(|| {
                    Error::InvalidInput(format!(
                        "CX on ({control}, {target}) does not sit on a coupling"
                    ))
                })?;
                cx[e] += 1;
            }
        }
    }

    let total_rot: usize = rot.iter().sum();
    let rot_active: Vec<usize> = rot.iter().copied().filter(|&c| c > 0).collect();
    let mean_rot = if rot_active.is_empty() {
        1.0
    } else {
        rot_active.iter().sum::<usize>() as f64 / rot_active.len() as f64
    };
    let nodes = (0..g.n())
        .map(|v| {
            [
                if covered[v] { 1.0 } else { 0.0 },
                rot[v] as f64 / total_rot.max(1) as f64,
                rot[v] as f64 / mean_rot.max(1.0),
            ]
        })
        .collect();

    let total_cx: usize = cx.iter().sum();
    let edges = (0..g.edge_count())
        .map(|e| {
            [
                if cx[e] > 0 { 1.0 } else { 0.0 },
                cx[e] as f64 / total_cx.max(1) as f64,
            ]
        })
        .collect();
    Ok(DynFeatures { nodes, edges })
}

fn check_qubit(q: usize, n: usize) -> Result<()> {
    if q >= n {
        return Err(Error::InvalidInput(format!("qubit {q} out of range for {n} qubits")));
    }
    Ok(())
}

/// Average the dynamic features of every circuit in a pool, iterating in
/// ascending circuit order so the floating-point result is reproducible.
pub fn pool_dyn_features(tp: &TranspiledPool, g: &CouplingGraph) -> Result<DynFeatures> {
    if tp.circuits.is_empty() {
        return Err(Error::InvalidInput("cannot summarize an empty circuit pool".into()));
    }
    let mut nodes = vec![[0.0; NODE_DYN_DIM]; g.n()];
    let mut edges = vec![[0.0; EDGE_DYN_DIM]; g.edge_count()];
    for tc in &tp.circuits {
        let f = circuit_dyn_features(tc, g)?;
        for (acc, row) in nodes.iter_mut().zip(&f.nodes) {
            for (a, x) in acc.iter_mut().zip(row) {
                *a += x;
            }
        }
        for (acc, row) in edges.iter_mut().zip(&f.edges) {
            for (a, x) in acc.iter_mut().zip(row) {
                *a += x;
            }
        }
    }
    let m = tp.circuits.len() as f64;
    for row in &mut nodes {
        for x in row.iter_mut() {
            *x /= m;
        }
    }
    for row in &mut edges {
        for x in row.iter_mut() {
            *x /= m;
        }
    }
    Ok(DynFeatures { nodes, edges })
}

/// One training or inference item: the feature matrices extracted from a
/// single pool on a single backend, plus optional labels.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Sample {
    pub backend_id: String,
    pub pool_index: usize,
    pub n: usize,
    /// Canonical couplings, aligned with `x_edges` rows and edge labels.
    pub edges: Vec<(usize, usize)>,
    /// `n` rows of `NODE_FEAT_DIM` columns (static then dynamic).
    pub x_nodes: Vec<Vec<f64>>,
    /// `edge_count` rows of `EDGE_FEAT_DIM` columns (static then dynamic).
    pub x_edges: Vec<Vec<f64>>,
    /// Whether a [`Standardizer`] has already rescaled the features; the
    /// regressors refuse raw samples.
    pub standardized: bool,
    /// Ground-truth error rates when known; absent for pure inference.
    pub labels: Option<ErrorMap>,
}

impl Sample {
    /// Validate internal consistency: feature row counts and widths,
    /// canonical edge endpoints, and label dimensions.
    pub fn check_consistent(&self) -> Result<()> {
        if self.n == 0 || self.x_nodes.len() != self.n {
            return Err(Error::InvalidInput(format!(
                "sample has {} feature rows for {} qubits",
                self.x_nodes.len(),
                self.n
            )));
        }
        if self.x_edges.len() != self.edges.len() {
            return Err(Error::InvalidInput(format!(
                "sample has {} edge feature rows for {} couplings",
                self.x_edges.len(),
                self.edges.len()
            )));
        }
        if self.x_nodes.iter().any(|r| r.len() != NODE_FEAT_DIM)
            || self.x_edges.iter().any(|r| r.len() != EDGE_FEAT_DIM)
        {
            return Err(Error::InvalidInput(format!(
                "feature columns must be {NODE_FEAT_DIM} per qubit and {EDGE_FEAT_DIM} per coupling"
            )));
        }
        for &(u, v) in &self.edges {
            if u >= v || v >= self.n {
                return Err(Error::InvalidInput(format!(
                    "sample edge ({u}, {v}) is not canonical for {} qubits",
                    self.n
                )));
            }
        }
        if let Some(map) = &self.labels {
            if map.n_nodes() != self.n || map.n_edges() != self.edges.len() {
                return Err(Error::InvalidInput(format!(
                    "labels cover {} qubits and {} couplings, sample has {} and {}",
                    map.n_nodes(),
                    map.n_edges(),
                    self.n,
                    self.edges.len()
                )));
            }
        }
        Ok(())
    }
}

/// Build a sample from a transpiled pool: concatenate static graph
/// descriptors with pool-averaged dynamic features.
pub fn assemble_sample(
    backend_id: &str,
    g: &CouplingGraph,
    tp: &TranspiledPool,
    labels: Option<&ErrorMap>,
) -> Result<Sample> {
    if let Some(map) = labels {
        map.check_shape(g)?;
    }
    let stat_n = node_static_features(g);
    let stat_e = edge_static_features(g);
    let dynf = pool_dyn_features(tp, g)?;
    let x_nodes = (0..g.n())
        .map(|v| {
            let mut row = Vec::with_capacity(NODE_FEAT_DIM);
            row.extend_from_slice(&stat_n[v]);
            row.extend_from_slice(&dynf.nodes[v]);
            row
        })
        .collect();
    let x_edges = (0..g.edge_count())
        .map(|e| {
            let mut row = Vec::with_capacity(EDGE_FEAT_DIM);
            row.extend_from_slice(&stat_e[e]);
            row.extend_from_slice(&dynf.edges[e]);
            row
        })
        .collect();
    Ok(Sample {
        backend_id: backend_id.to_string(),
        pool_index: tp.pool_index,
        n: g.n(),
        edges: g.edges().to_vec(),
        x_nodes,
        x_edges,
        standardized: false,
        labels: labels.cloned(),
    })
}

/// Per-column affine feature scaler fit on training data only.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Standardizer {
    pub node_mean: Vec<f64>,
    pub node_scale: Vec<f64>,
    pub edge_mean: Vec<f64>,
    pub edge_scale: Vec<f64>,
    /// Sorted unique backend ids the statistics were fit on.
    pub fit_backends: Vec<String>,
}

/// Fit column means and population standard deviations over every row of
/// every sample. Columns with zero spread get scale 1 so they map to 0.
///
/// `forbidden_id` names the held-out backend: encountering a sample
/// carrying that id is a hard error, because held-out features must
/// never influence the scaler.
pub fn fit_standardizer(samples: &[Sample], forbidden_id: Option<&str>) -> Result<Standardizer> {
    if samples.is_empty() {
        return Err(Error::InvalidInput("cannot fit a standardizer on no samples".into()));
    }
    if let Some(fid) = forbidden_id {
        for s in samples {
            if s.backend_id == fid {
                return Err(Error::InvalidInput(format!(
                    "held-out backend {fid:?} appeared in standardizer fitting data"
                )));
            }
        }
    }
    if let Some(pre) = samples.iter().find(|s| s.standardized) {
        return Err(Error::InvalidInput(format!(
            "sample (backend {:?}, pool {}) is already standardized",
            pre.backend_id, pre.pool_index
        )));
    }
    let node_rows: Vec<&Vec<f64>> = samples.iter().flat_map(|s| &s.x_nodes).collect();
    let edge_rows: Vec<&Vec<f64>> = samples.iter().flat_map(|s| &s.x_edges).collect();
    let (node_mean, node_scale) = column_stats(&node_rows, NODE_FEAT_DIM)?;
    let (edge_mean, edge_scale) = column_stats(&edge_rows, EDGE_FEAT_DIM)?;
    let mut fit_backends: Vec<String> = samples.iter().map(|s| s.backend_id.clone()).collect();
    fit_backends.sort();
    fit_backends.dedup();
    Ok(Standardizer { node_mean, node_scale, edge_mean, edge_scale, fit_backends })
}

fn column_stats(rows: &[&Vec<f64>], dim: usize) -> Result<(Vec<f64>, Vec<f64>)> {
    if rows.is_empty() {
        return Err(Error::InvalidInput("no rows to fit column statistics on".into()));
    }
    for row in rows {
        if row.len() != dim {
            return Err(Error::InvalidInput(format!(
                "feature row has {} columns, expected {dim}",
                row.len()
            )));
        }
    }
    let m = rows.len() as f64;
    let mut mean = vec![0.0; dim];
    for row in rows {
        for (acc, x) in mean.iter_mut().zip(row.iter()) {
            *acc += x;
        }
    }
    for v in &mut mean {
        *v /= m;
    }
    let mut var = vec![0.0; dim];
    for row in rows {
        for ((acc, x), mu) in var.iter_mut().zip(row.iter()).zip(&mean) {
            *acc += (x - mu) * (x - mu);
        }
    }
    let scale = var
        .into_iter()
        .map(|v| {
            let s = (v / m).sqrt();
            if s > 0.0 {
                s
            } else {
                1.0
            }
        })
        .collect();
    Ok((mean, scale))
}

impl Standardizer {
    /// Standardize a sample's feature matrices; labels pass through.
    pub fn apply(&self, s: &Sample) -> Result<Sample> {
        if s.standardized {
            return Err(Error::InvalidInput(format!(
                "sample (backend {:?}, pool {}) is already standardized",
                s.backend_id, s.pool_index
            )));
        }
        let x_nodes = scale_rows(&s.x_nodes, &self.node_mean, &self.node_scale)?;
        let x_edges = scale_rows(&s.x_edges, &self.edge_mean, &self.edge_scale)?;
        Ok(Sample { x_nodes, x_edges, standardized: true, ..s.clone() })
    }
}

fn scale_rows(rows: &[Vec<f64>], mean: &[f64], scale: &[f64]) -> Result<Vec<Vec<f64>>> {
    rows.iter()
        .map(|row| {
            if row.len() != mean.len() {
                return Err(Error::InvalidInput(format!(
                    "feature row has {} columns, standardizer expects {}",
                    row.len(),
                    mean.len()
                )));
            }
            Ok(row
                .iter()
                .zip(mean.iter().zip(scale))
                .map(|(x, (mu, s))| (x - mu) / s)
                .collect())
        })
        .collect()
}
