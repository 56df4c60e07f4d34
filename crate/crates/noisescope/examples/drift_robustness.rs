//! Does the reconstruction survive calibration drift?
//!
//! Runs the same holdout study twice: once on a frozen fleet, and once
//! where training labels drift on a resampling schedule while each
//! holdout pool is transpiled under a fresh perturbation of the holdout
//! map — the situation where the data was collected over days on
//! hardware that would not sit still. Both runs are scored against the
//! same undrifted truth, so the delta isolates what drift costs.
//!
//! Run with: `cargo run --example drift_robustness`

use noisescope::graph::TopologySpec;
use noisescope::pipeline::{drift_experiment, DriftTrainCfg, StudyCfg};
use noisescope::Result;

fn main() -> Result<()> {
    let mut cfg = StudyCfg::desk_default(7);
    cfg.backends = 3;
    cfg.topology = TopologySpec::Grid { rows: 3, cols: 4 };
    cfg.pools = 6;
    cfg.circuits = 20;
    cfg.node_model.hidden = 24;
    cfg.edge_model.hidden = 24;
    cfg.train.max_epochs = 25;
    cfg.drift = DriftTrainCfg { enabled: true, ..DriftTrainCfg::default() };
    println!(
        "drift: labels resampled every {} epochs, shifts of scale {:.0e} (qubits) / {:.0e} (couplings)",
        cfg.drift.resample_every, cfg.drift.scales.scale_nodes, cfg.drift.scales.scale_edges
    );
    println!("running the static and drifted studies...\n");

    let exp = drift_experiment(&cfg)?;
    let s = &exp.static_run.reports;
    let d = &exp.drifted_run.reports;

    println!("                      static     drifted    delta");
    println!(
        "qubit rank corr      {:>7.3}    {:>7.3}    {:+.3}",
        s.nodes.spearman,
        d.nodes.spearman,
        d.nodes.spearman - s.nodes.spearman
    );
    println!(
        "coupling rank corr   {:>7.3}    {:>7.3}    {:+.3}",
        s.edges.spearman,
        d.edges.spearman,
        d.edges.spearman - s.edges.spearman
    );
    println!(
        "qubit |rel err| %    {:>7.1}    {:>7.1}    {:+.1}",
        s.nodes.percent_diff,
        d.nodes.percent_diff,
        d.nodes.percent_diff - s.nodes.percent_diff
    );
    println!(
        "coupling |rel err| % {:>7.1}    {:>7.1}    {:+.1}",
        s.edges.percent_diff,
        d.edges.percent_diff,
        d.edges.percent_diff - s.edges.percent_diff
    );

    // Both halves scored the same frozen truth; only the data moved.
    let same_truth = exp.static_run.data.holdout_truth.read() == exp.drifted_run.data.holdout_truth.read();
    let moved = exp.static_run.predicted != exp.drifted_run.predicted;
    println!("\nshared undrifted truth: {same_truth}");
    println!("drift actually changed the predictions: {moved}");
    Ok(())
}
