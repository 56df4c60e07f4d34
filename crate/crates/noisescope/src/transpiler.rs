//! Noise-aware transpilation: initial layout and SWAP routing.
//!
//! Layout greedily places heavily interacting logical qubits on the
//! quietest physical qubits; routing walks each non-adjacent CX control
//! toward its target along the coupling path that minimizes the
//! accumulated failure probability, decomposing every SWAP into three
//! alternating-direction CX gates. Given the same circuit, graph, and
//! error map the output is identical every time.

use std::collections::BinaryHeap;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::backend::ErrorMap;
use crate::circuit::{Circuit, CircuitPool, Gate};
use crate::error::{Error, Result};
use crate::graph::CouplingGraph;

/// Combined failure probability of a path whose steps fail independently
/// with the given probabilities: `1 - prod(1 - p)`. Empty input gives 0.
pub fn path_failure(probs: &[f64]) -> Result<f64> {
    let mut survive = 1.0f64;
    for &p in probs {
        if !(0.0..=1.0).contains(&p) {
            return Err(Error::InvalidInput(format!(
                "failure probability {p} outside [0, 1]"
            )));
        }
        survive *= 1.0 - p;
    }
    Ok(1.0 - survive)
}

/// Per-edge routing weights `-ln(1 - p_2q)` plus all-pairs minimum-weight
/// distances under those weights. Minimizing summed weight is the same as
/// minimizing the path's combined failure probability.
#[derive(Debug, Clone)]
pub struct RouteWeights {
    weights: Vec<f64>,
    dist: Vec<Vec<f64>>,
}

/// Floor applied to edge weights so that greedy path walking strictly
/// decreases the remaining distance even when a coupling reports an
/// exactly-zero error rate.
const WEIGHT_FLOOR: f64 = 1e-12;

impl RouteWeights {
    pub fn new(g: &CouplingGraph, errors: &ErrorMap) -> Result<Self> {
        errors.check_shape(g)?;
        let mut weights = Vec::with_capacity(g.edge_count());
        for e in 0..g.edge_count() {
            if !errors.mask_edges()[e] {
                let (u, v) = g.edges()[e];
                return Err(Error::InvalidInput(format!(
                    "transpilation needs an error rate for every coupling; ({u}, {v}) is unspecified"
                )));
            }
            let p = errors.y_edges()[e];
            if !(0.0..1.0).contains(&p) {
                return Err(Error::InvalidInput(format!(
                    "coupling error rate {p} outside [0, 1) cannot be routed"
                )));
            }
            weights.push((-(1.0 - p).ln()).max(WEIGHT_FLOOR));
        }
        let dist = (0..g.n())
            .into_par_iter()
            .map(|s| dijkstra(g, &weights, s))
            .collect();
        Ok(RouteWeights { weights, dist })
    }

    /// Weight of edge `e`.
    pub fn weight(&self, e: usize) -> f64 {
        self.weights[e]
    }

    /// Minimum total weight between two physical qubits.
    pub fn distance(&self, a: usize, b: usize) -> f64 {
        self.dist[a][b]
    }

    /// Next physical qubit on a minimum-weight path from `from` to `to`,
    /// breaking ties by smallest edge index.
    fn next_hop(&self, g: &CouplingGraph, from: usize, to: usize) -> usize {
        let mut best: Option<(f64, usize, usize)> = None;
        for &e in g.incident_edges(from) {
            let (u, v) = g.edges()[e];
            let next = if u == from { v } else { u };
            let cost = self.weights[e] + self.dist[next][to];
            match best {
                Some((c, be, _)) if (cost, e) >= (c, be) => {}
                _ => best = Some((cost, e, next)),
            }
        }
        best.expect("connected graph has a neighbor").2
    }
}

fn dijkstra(g: &CouplingGraph, weights: &[f64], source: usize) -> Vec<f64> {
    // BinaryHeap is a max-heap; store negated distances.
    let mut dist = vec![f64::INFINITY; g.n()];
    dist[source] = 0.0;
    let mut heap: BinaryHeap<(std::cmp::Reverse<OrdF64>, usize)> = BinaryHeap::new();
    heap.push((std::cmp::Reverse(OrdF64(0.0)), source));
    while let Some((std::cmp::Reverse(d), u)) = heap.pop() {
        if d.0 > dist[u] {
            continue;
        }
        for &e in g.incident_edges(u) {
            let (a, b) = g.edges()[e];
            let v = if a == u { b } else { a };
            let nd = dist[u] + weights[e];
            if nd < dist[v] {
                dist[v] = nd;
                heap.push((std::cmp::Reverse(OrdF64(nd)), v));
            }
        }
    }
    dist
}

/// Finite-float ordering wrapper for the Dijkstra heap.
#[derive(Debug, Clone, Copy, PartialEq)]
struct OrdF64(f64);
impl Eq for OrdF64 {}
impl PartialOrd for OrdF64 {
    fn partial_cmp(&self, other: &Self) -> Option<std::cmp::Ordering> {
        Some(self.cmp(other))
    }
}
impl Ord for OrdF64 {
    fn cmp(&self, other: &Self) -> std::cmp::Ordering {
        self.0.total_cmp(&other.0)
    }
}

/// Injective partial map between logical and physical qubits.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Layout {
    to_phys: Vec<Option<usize>>,
    to_logical: Vec<Option<usize>>,
}

impl Layout {
    pub fn empty(n_logical: usize, n_physical: usize) -> Self {
        Layout { to_phys: vec![None; n_logical], to_logical: vec![None; n_physical] }
    }

    /// The identity map on `n` qubits.
    pub fn identity(n: usize) -> Self {
        Layout {
            to_phys: (0..n).map(Some).collect(),
            to_logical: (0..n).map(Some).collect(),
        }
    }

    pub fn assign(&mut self, logical: usize, physical: usize) -> Result<()> {
        if self.to_phys[logical].is_some() || self.to_logical[physical].is_some() {
            return Err(Error::InvalidInput(format!(
                "layout slot clash assigning logical {logical} to physical {physical}"
            )));
        }
        self.to_phys[logical] = Some(physical);
        self.to_logical[physical] = Some(logical);
        Ok(())
    }

    pub fn phys(&self, logical: usize) -> Option<usize> {
        self.to_phys[logical]
    }

    pub fn logical(&self, physical: usize) -> Option<usize> {
        self.to_logical[physical]
    }

    /// Exchange the occupants of two physical qubits (either may be empty).
    pub fn swap_physical(&mut self, a: usize, b: usize) {
        let la = self.to_logical[a];
        let lb = self.to_logical[b];
        self.to_logical[a] = lb;
        self.to_logical[b] = la;
        if let Some(l) = la {
            self.to_phys[l] = Some(b);
        }
        if let Some(l) = lb {
            self.to_phys[l] = Some(a);
        }
    }

    /// Sorted `(logical, physical)` pairs for every mapped qubit.
    pub fn as_pairs(&self) -> Vec<(usize, usize)> {
        self.to_phys
            .iter()
            .enumerate()
            .filter_map(|(l, p)| p.map(|p| (l, p)))
            .collect()
    }
}

/// Pick an initial layout for `circ` on `g` that favors low-error regions.
///
/// Each physical qubit gets a quietness score: its own error rate plus the
/// mean error rate of its incident couplings. Logical qubits are placed in
/// order of descending CX multiplicity (ties: ascending index). The first
/// goes on the best-scoring physical qubit; each later one goes on the
/// best-scoring unplaced neighbor of the already-placed region, so the
/// mapped region stays connected. Ties always resolve to the smallest
/// physical index.
pub fn noise_aware_layout(
    circ: &Circuit,
    g: &CouplingGraph,
    errors: &ErrorMap,
) -> Result<Layout> {
    errors.check_shape(g)?;
    let active = circ.active_qubits();
    if active.is_empty() {
        return Ok(Layout::empty(circ.n_qubits, g.n()));
    }
    if active.len() > g.n() {
        return Err(Error::InvalidInput(format!(
            "{} active logical qubits cannot be placed on {} physical qubits",
            active.len(),
            g.n()
        )));
    }
    let mut score = vec![0.0f64; g.n()];
    for p in 0..g.n() {
        if !errors.mask_nodes()[p] {
            return Err(Error::InvalidInput(format!(
                "layout needs an error rate for every qubit; qubit {p} is unspecified"
            )));
        }
        let inc = g.incident_edges(p);
        let mean_edge = if inc.is_empty() {
            0.0
        } else {
            inc.iter()
                .map(|&e| {
                    if errors.mask_edges()[e] {
                        Ok(errors.y_edges()[e])
                    } else {
                        let (u, v) = g.edges()[e];
                        Err(Error::InvalidInput(format!(
                            "layout needs an error rate for every coupling; ({u}, {v}) is unspecified"
                        )))
                    }
                })
                .sum::<Result<f64>>()?
                / inc.len() as f64
        };
        score[p] = errors.node_error(p) + mean_edge;
    }

    // CX multiplicity per logical qubit.
    let mut interaction = vec![0usize; circ.n_qubits];
    for gate in &circ.gates {
        if let Gate::Cx { control, target } = *gate {
            interaction[control] += 1;
            interaction[target] += 1;
        }
    }
    let mut order: Vec<usize> = active.clone();
    order.sort_by_key(|&q| (std::cmp::Reverse(interaction[q]), q));

    let mut layout = Layout::empty(circ.n_qubits, g.n());
    let mut placed: Vec<usize> = Vec::with_capacity(order.len());
    for (rank, &logical) in order.iter().enumerate() {
        let candidate = if rank == 0 {
            (0..g.n())
                .min_by(|&a, &b| score[a].total_cmp(&score[b]).then(a.cmp(&b)))
                .expect("non-empty graph")
        } else {
            let mut frontier: Vec<usize> = Vec::new();
            for &p in &placed {
                for &nb in g.neighbors(p) {
                    if layout.logical(nb).is_none() && !frontier.contains(&nb) {
                        frontier.push(nb);
                    }
                }
            }
            *frontier
                .iter()
                .min_by(|&&a, &&b| score[a].total_cmp(&score[b]).then(a.cmp(&b)))
                .expect("connected graph keeps a frontier while slots remain")
        };
        layout.assign(logical, candidate)?;
        placed.push(candidate);
    }
    Ok(layout)
}

/// A circuit after layout and routing: all operands are physical qubits
/// and every CX sits on a coupling.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TranspiledCircuit {
    pub n_physical: usize,
    /// Seed of the source logical circuit, for provenance.
    pub source_seed: u64,
    pub gates: Vec<Gate>,
    pub swap_count: usize,
    /// Final `(logical, physical)` pairs after all routing swaps.
    pub final_layout: Vec<(usize, usize)>,
}

/// Route `circ` on `g` starting from `layout`.
///
/// Rotations pass through to the current physical position of their
/// qubit. For a CX whose endpoints are not adjacent, the control walks
/// toward the target along a minimum-failure path, one SWAP per hop
/// (three alternating-direction CX gates), updating the layout as it
/// goes, until the pair shares a coupling.
pub fn route(
    circ: &Circuit,
    mut layout: Layout,
    g: &CouplingGraph,
    rw: &RouteWeights,
) -> Result<TranspiledCircuit> {
    let mut gates = Vec::with_capacity(circ.gates.len());
    let mut swap_count = 0usize;
    for gate in &circ.gates {
        match *gate {
            Gate::Rot1q { q, angles } => {
                let p = layout.phys(q).ok_or_else(|| {
                    Error::InvalidInput(format!("logical qubit {q} has no layout slot"))
                })?;
                gates.push(Gate::Rot1q { q: p, angles });
            }
            Gate::Cx { control, target } => {
                if control == target {
                    return Err(Error::InvalidInput(
                        "CX with identical control and target".into(),
                    ));
                }
                let mut pc = layout.phys(control).ok_or_else(|| {
                    Error::InvalidInput(format!("logical qubit {control} has no layout slot"))
                })?;
                let pt = layout.phys(target).ok_or_else(|| {
                    Error::InvalidInput(format!("logical qubit {target} has no layout slot"))
                })?;
                while !g.has_edge(pc, pt) {
                    let hop = rw.next_hop(g, pc, pt);
                    gates.push(Gate::Cx { control: pc, target: hop });
                    gates.push(Gate::Cx { control: hop, target: pc });
                    gates.push(Gate::Cx { control: pc, target: hop });
                    layout.swap_physical(pc, hop);
                    swap_count += 1;
                    pc = hop;
                }
                gates.push(Gate::Cx { control: pc, target: pt });
            }
        }
    }
    Ok(TranspiledCircuit {
        n_physical: g.n(),
        source_seed: circ.seed,
        gates,
        swap_count,
        final_layout: layout.as_pairs(),
    })
}

/// Lay out and route one circuit.
pub fn transpile(circ: &Circuit, g: &CouplingGraph, rw: &RouteWeights, errors: &ErrorMap) -> Result<TranspiledCircuit> {
    let layout = noise_aware_layout(circ, g, errors)?;
    route(circ, layout, g, rw)
}

/// A transpiled circuit pool, order-aligned with its source pool.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TranspiledPool {
    pub n_physical: usize,
    pub pool_index: usize,
    pub master_seed: u64,
    pub circuits: Vec<TranspiledCircuit>,
}

/// Transpile every circuit of a pool against one backend error map.
/// Circuits are independent, so they run in parallel, but the output
/// order always matches the input order.
pub fn transpile_pool(
    pool: &CircuitPool,
    g: &CouplingGraph,
    errors: &ErrorMap,
) -> Result<TranspiledPool> {
    let rw = RouteWeights::new(g, errors)?;
    let circuits = pool
        .circuits
        .par_iter()
        .map(|c| transpile(c, g, &rw, errors))
        .collect::<Result<Vec<_>>>()?;
    Ok(TranspiledPool {
        n_physical: g.n(),
        pool_index: pool.pool_index,
        master_seed: pool.master_seed,
        circuits,
    })
}
