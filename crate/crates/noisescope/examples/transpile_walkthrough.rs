//! Noise-aware transpilation, step by step.
//!
//! Two demonstrations on hand-built inputs:
//!
//! 1. A 4-qubit ring with one deliberately terrible coupling. A CX
//!    between opposite corners has two geometrically equal routes; the
//!    router takes the one that avoids the bad edge, because edge
//!    weights are `-ln(1 - p)` and routes minimize accumulated failure.
//! 2. A random circuit on a 3x4 grid: noise-aware layout, SWAP
//!    insertion (one SWAP = three alternating CX gates), and the final
//!    logical-to-physical layout, with per-coupling CX multiplicities.
//!
//! Run with: `cargo run --example transpile_walkthrough`

use noisescope::backend::{sample_backend, ErrorMap, SamplerCfg};
use noisescope::circuit::{gen_pool, Circuit, CircuitCfg, Gate};
use noisescope::graph::{gen_topology, CouplingGraph, TopologySpec};
use noisescope::transpiler::{path_failure, transpile, Layout, route, RouteWeights};
use noisescope::Result;

fn cx_counts(gates: &[Gate], g: &CouplingGraph) -> Vec<usize> {
    let mut counts = vec![0usize; g.edge_count()];
    for gate in gates {
        if let Gate::Cx { control, target } = *gate {
            let e = g.edge_id(control, target).expect("routed CX uses a real coupling");
            counts[e] += 1;
        }
    }
    counts
}

fn main() -> Result<()> {
    // --- 1. Route avoidance on a ring ---------------------------------
    let ring = gen_topology(&TopologySpec::Ring { n: 4 })?;
    // Couplings of ring(4): (0,1) (0,3) (1,2) (2,3). Make (0,1) awful.
    let y_edges = vec![0.25, 1e-3, 1e-3, 1e-3];
    let errors = ErrorMap::dense(vec![1e-4; 4], y_edges)?;
    let rw = RouteWeights::new(&ring, &errors)?;
    for (e, (u, v)) in ring.edges().iter().enumerate() {
        println!("ring coupling ({u},{v}): p = {:.3}, weight = {:.4}", errors.edge_error(e), rw.weight(e));
    }

    // One CX between opposite corners 0 and 2, identity layout so the
    // routing choice is the only degree of freedom.
    let circ = Circuit {
        n_qubits: 4,
        seed: 0,
        width: 4,
        cx_budget: 1,
        gates: vec![Gate::Cx { control: 0, target: 2 }],
    };
    let routed = route(&circ, Layout::identity(4), &ring, &rw)?;
    let counts = cx_counts(&routed.gates, &ring);
    println!(
        "CX(0,2) routed with {} SWAP via couplings {:?} — the 0.25-failure edge idles",
        routed.swap_count,
        ring.edges()
            .iter()
            .zip(&counts)
            .filter(|(_, &c)| c > 0)
            .map(|((u, v), c)| format!("({u},{v})x{c}"))
            .collect::<Vec<_>>()
    );
    assert_eq!(counts[0], 0, "router must avoid the bad coupling");

    // The closed-form failure of the chosen corridor:
    let good_path = path_failure(&[1e-3, 1e-3])?;
    let bad_path = path_failure(&[0.25, 1e-3])?;
    println!("corridor failure: chosen {good_path:.6} vs avoided {bad_path:.6}\n");

    // --- 2. A realistic circuit on a grid ------------------------------
    let grid = gen_topology(&TopologySpec::Grid { rows: 3, cols: 4 })?;
    let emap = sample_backend(&grid, 7, &SamplerCfg::default())?;
    let pool = gen_pool(grid.n(), 1, 99, 0, &CircuitCfg::for_edge_count(grid.edge_count()))?;
    let circ = &pool.circuits[0];
    println!(
        "logical circuit: width {}, CX budget {}, {} gates",
        circ.width,
        circ.cx_budget,
        circ.gates.len()
    );

    let rw = RouteWeights::new(&grid, &emap)?;
    let tc = transpile(circ, &grid, &rw, &emap)?;
    println!(
        "transpiled: {} gates, {} SWAPs inserted ({} extra CX gates)",
        tc.gates.len(),
        tc.swap_count,
        3 * tc.swap_count
    );
    println!("final layout (logical -> physical): {:?}", tc.final_layout);

    let counts = cx_counts(&tc.gates, &grid);
    println!("per-coupling CX multiplicity:");
    for ((u, v), c) in grid.edges().iter().zip(&counts) {
        let bar = "#".repeat(*c);
        println!("  ({u:>2},{v:>2}): {c:>3} {bar}");
    }
    let total: usize = counts.iter().sum();
    println!("total physical CX gates: {total} (every one lands on a real coupling)");
    Ok(())
}
