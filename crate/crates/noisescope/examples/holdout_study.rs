//! A complete holdout study: reconstruct an unseen backend's error map
//! from circuit statistics alone.
//!
//! Generates a fleet of heavy-hex-like backends, holds the last one
//! out, trains the per-qubit and per-coupling regressors on the rest,
//! and reconstructs the holdout's error rates from nothing but its
//! coupling map and transpiled-circuit usage statistics. The holdout's
//! true error map sits behind a read counter the whole time; the study
//! fails hard if anything touches it before evaluation.
//!
//! Scaled down from the desk-size default so it finishes in well under
//! a minute. Run with: `cargo run --example holdout_study`

use noisescope::pipeline::{run_study, worst_components, StudyCfg};
use noisescope::Result;

fn main() -> Result<()> {
    let mut cfg = StudyCfg::desk_default(1);
    cfg.backends = 4;
    cfg.pools = 8;
    cfg.circuits = 25;
    cfg.node_model.hidden = 32;
    cfg.edge_model.hidden = 32;
    cfg.train.max_epochs = 30;
    println!(
        "fleet: {} backends on a shared {:?}-style topology, {} pools x {} circuits each",
        cfg.backends, cfg.topology, cfg.pools, cfg.circuits
    );
    println!("holdout: {} (never enters training)\n", StudyCfg::backend_id(cfg.backends - 1));

    let out = run_study(&cfg)?;
    println!(
        "truth reads before evaluation: {} (the leakage tripwire saw nothing)",
        out.reads_before_eval
    );
    println!(
        "node regressor: best val RMSE {:.4} at epoch {}/{}",
        out.node.checkpoint.manifest.best_val_rmse,
        out.node.checkpoint.manifest.best_epoch,
        out.node.checkpoint.manifest.epochs_run
    );
    println!(
        "edge regressor: best val RMSE {:.2e} at epoch {}/{}",
        out.edge.checkpoint.manifest.best_val_rmse,
        out.edge.checkpoint.manifest.best_epoch,
        out.edge.checkpoint.manifest.epochs_run
    );

    let n = &out.reports.nodes;
    let e = &out.reports.edges;
    println!("\nreconstruction quality (prediction vs held-back truth):");
    println!("  qubits    : rank corr {:.3}, mean |rel err| {:.1}%, worst-{} overlap {}/{}", n.spearman, n.percent_diff, n.top_k, n.top_overlap, n.top_k);
    println!("  couplings : rank corr {:.3}, mean |rel err| {:.1}%, worst-{} overlap {}/{}", e.spearman, e.percent_diff, e.top_k, e.top_overlap, e.top_k);

    // The practical payoff: which components would a hardware team look
    // at first? Compare the predicted worst qubits with the true list.
    let truth = out.data.holdout_truth.read();
    let pred_worst = worst_components(out.predicted.y_nodes(), 5);
    let true_worst = worst_components(truth.y_nodes(), 5);
    println!("\npredicted 5 noisiest qubits: {pred_worst:?}");
    println!("actual    5 noisiest qubits: {true_worst:?}");

    println!("\nper-qubit detail (first 10):");
    println!("  qubit   predicted       true");
    for v in 0..10.min(out.predicted.n_nodes()) {
        println!("  q{v:02}     {:.3e}    {:.3e}", out.predicted.node_error(v), truth.node_error(v));
    }
    Ok(())
}
