//! How much data does the reconstruction need? Two ablations.
//!
//! First the pool ablation: after one full training run, re-infer the
//! holdout from only its first 1, 2, 4, ... pools and watch the log
//! mismatch fall as evidence accumulates — no retraining involved.
//! Then the fleet ablation: retrain from scratch on k = 1, 2, 3
//! training backends (a seeded shuffle picks which ones) and watch what
//! fleet diversity buys.
//!
//! Run with: `cargo run --example ablation_curves`

use noisescope::graph::TopologySpec;
use noisescope::pipeline::{ablate_backends, ablate_pools, run_study, StudyCfg};
use noisescope::Result;

fn main() -> Result<()> {
    let mut cfg = StudyCfg::desk_default(3);
    cfg.backends = 4;
    cfg.topology = TopologySpec::Grid { rows: 3, cols: 4 };
    cfg.pools = 8;
    cfg.circuits = 20;
    cfg.node_model.hidden = 24;
    cfg.edge_model.hidden = 24;
    cfg.train.max_epochs = 25;

    println!("base study: {} backends, {} pools each...", cfg.backends, cfg.pools);
    let outcome = run_study(&cfg)?;
    println!(
        "base reconstruction: qubit rank corr {:.3}, coupling rank corr {:.3}\n",
        outcome.reports.nodes.spearman, outcome.reports.edges.spearman
    );

    // Pool ablation: same checkpoints, progressively fewer holdout pools.
    println!("holdout pools ablation (log mismatch = mean |ln(pred/true)|):");
    println!("  pools   qubits   couplings");
    for row in ablate_pools(&outcome, &[1, 2, 4, 8])? {
        println!("  {:>5}   {:>6.3}   {:>9.3}", row.pools, row.mismatch_nodes, row.mismatch_edges);
    }

    // Fleet ablation: retrain on the first k of a seeded shuffle of the
    // training backends. The holdout and its pools never change.
    println!("\ntraining fleet ablation (retrained per row):");
    println!("  k   backends        qubits   couplings");
    for row in ablate_backends(&cfg, &outcome.data, &[1, 2, 3])? {
        println!(
            "  {}   {:<14}  {:>6.3}   {:>9.3}",
            row.k,
            row.backend_ids.join("+"),
            row.mismatch_nodes,
            row.mismatch_edges
        );
    }
    println!("\nlower is better; more pools and more backends both tighten the estimate");
    Ok(())
}
