//! The dynamic circuit features and the conservation identities they
//! obey by construction.
//!
//! Transpiles a pool of random circuits against a sampled backend,
//! extracts per-qubit and per-coupling usage features, and checks the
//! exact identities every downstream consumer relies on:
//!
//! - rotation shares sum to 1 per circuit (when it has rotations);
//! - relative rotation shares average to 1 over the active qubits;
//! - CX shares sum to 1 per circuit (when it has CX gates);
//! - coverage is a fraction in [0, 1] after pool averaging;
//! - assembled model inputs are static-structure columns followed by
//!   dynamic-usage columns (5 + 3 per qubit, 4 + 2 per coupling).
//!
//! Run with: `cargo run --example feature_identities`

use noisescope::backend::{sample_backend, SamplerCfg};
use noisescope::circuit::{gen_pool, CircuitCfg};
use noisescope::features::{
    assemble_sample, circuit_dyn_features, pool_dyn_features, EDGE_FEAT_DIM, NODE_FEAT_DIM,
};
use noisescope::graph::{gen_topology, TopologySpec};
use noisescope::transpiler::transpile_pool;
use noisescope::Result;

fn main() -> Result<()> {
    let g = gen_topology(&TopologySpec::default_heavy_hex(3))?;
    let errors = sample_backend(&g, 11, &SamplerCfg::default())?;
    let pool = gen_pool(g.n(), 40, 5, 0, &CircuitCfg::for_edge_count(g.edge_count()))?;
    let tp = transpile_pool(&pool, &g, &errors)?;
    println!("pool: {} circuits on {} qubits / {} couplings", tp.circuits.len(), g.n(), g.edge_count());

    // Per-circuit identities, tracked with the worst deviation seen.
    let mut worst_rot_sum = 0.0f64;
    let mut worst_rel_mean = 0.0f64;
    let mut worst_cx_sum = 0.0f64;
    for tc in &tp.circuits {
        let f = circuit_dyn_features(tc, &g)?;
        let rot_sum: f64 = f.nodes.iter().map(|r| r[1]).sum();
        let cx_sum: f64 = f.edges.iter().map(|r| r[1]).sum();
        let active: Vec<f64> = f.nodes.iter().map(|r| r[2]).filter(|&x| x > 0.0).collect();
        if rot_sum > 0.0 {
            worst_rot_sum = worst_rot_sum.max((rot_sum - 1.0).abs());
        }
        if !active.is_empty() {
            let mean = active.iter().sum::<f64>() / active.len() as f64;
            worst_rel_mean = worst_rel_mean.max((mean - 1.0).abs());
        }
        if cx_sum > 0.0 {
            worst_cx_sum = worst_cx_sum.max((cx_sum - 1.0).abs());
        }
    }
    println!("max |sum(rotation shares) - 1| over circuits: {worst_rot_sum:.3e}");
    println!("max |mean(relative shares on active qubits) - 1|: {worst_rel_mean:.3e}");
    println!("max |sum(CX shares) - 1| over circuits: {worst_cx_sum:.3e}");

    // Pool-averaged features: coverage becomes "fraction of circuits
    // touching this component".
    let pf = pool_dyn_features(&tp, &g)?;
    let cov_ok = pf
        .nodes
        .iter()
        .map(|r| r[0])
        .chain(pf.edges.iter().map(|r| r[0]))
        .all(|c| (0.0..=1.0).contains(&c));
    let busiest = pf
        .edges
        .iter()
        .enumerate()
        .max_by(|a, b| a.1[1].total_cmp(&b.1[1]))
        .expect("non-empty");
    let (u, v) = g.edges()[busiest.0];
    println!("pool coverage within [0,1]: {cov_ok}");
    println!(
        "busiest coupling across the pool: ({u},{v}) carrying {:.1}% of CX traffic",
        100.0 * busiest.1[1]
    );

    // Assembled input matrices: structure columns then usage columns.
    let sample = assemble_sample("demo", &g, &tp, None)?;
    println!(
        "assembled sample: {}x{} qubit features, {}x{} coupling features, standardized={}",
        sample.x_nodes.len(),
        NODE_FEAT_DIM,
        sample.x_edges.len(),
        EDGE_FEAT_DIM,
        sample.standardized
    );
    let widths_ok = sample.x_nodes.iter().all(|r| r.len() == NODE_FEAT_DIM)
        && sample.x_edges.iter().all(|r| r.len() == EDGE_FEAT_DIM);
    println!("row widths consistent: {widths_ok}");
    sample.check_consistent()?;
    println!("sample passes its own consistency audit");
    Ok(())
}
