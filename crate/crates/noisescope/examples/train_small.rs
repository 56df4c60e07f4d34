//! Training one regressor end to end on a small synthetic fleet.
//!
//! Builds three labeled backends on a 3x3 grid, trains the per-qubit
//! error regressor with early stopping, and walks through what the
//! returned checkpoint contains: the validation split, the RMSE curve
//! with its best epoch, the fitted linear calibration, and a calibrated
//! prediction for a backend the trainer never saw.
//!
//! Run with: `cargo run --example train_small`

use noisescope::backend::{sample_backend, SamplerCfg};
use noisescope::circuit::{gen_pool, CircuitCfg};
use noisescope::features::{assemble_sample, Sample};
use noisescope::gnn::{RegressorConfig, TargetKind};
use noisescope::graph::{gen_topology, CouplingGraph, TopologySpec};
use noisescope::pipeline::{spearman, train, TrainConfig};
use noisescope::transpiler::transpile_pool;
use noisescope::{seed, Result};

/// Labeled samples (one per pool) for one synthetic backend.
fn make_backend(
    g: &CouplingGraph,
    id: &str,
    index: u64,
    master: u64,
    pools: usize,
    labeled: bool,
) -> Result<(Vec<Sample>, noisescope::backend::ErrorMap)> {
    let errors = sample_backend(g, seed::derive(master, "backend-errors", &[index]), &SamplerCfg::default())?;
    let circ_seed = seed::derive(master, "circuits", &[index]);
    let cfg = CircuitCfg::for_edge_count(g.edge_count());
    let mut samples = Vec::new();
    for p in 0..pools {
        let pool = gen_pool(g.n(), 12, circ_seed, p, &cfg)?;
        let tp = transpile_pool(&pool, g, &errors)?;
        samples.push(assemble_sample(id, g, &tp, if labeled { Some(&errors) } else { None })?);
    }
    Ok((samples, errors))
}

fn main() -> Result<()> {
    let g = gen_topology(&TopologySpec::Grid { rows: 3, cols: 3 })?;
    let master = 5;

    let mut train_set = Vec::new();
    for i in 0..4u64 {
        let (samples, _) = make_backend(&g, &format!("b{i:02}"), i, master, 12, true)?;
        train_set.extend(samples);
    }
    let (holdout_pools, holdout_truth) = make_backend(&g, "b04", 4, master, 12, false)?;
    println!(
        "dataset: {} labeled pools from 4 backends, 12 unlabeled pools from the target",
        train_set.len()
    );

    let mut model = RegressorConfig::node_default();
    model.hidden = 32; // keep the example quick
    let cfg = TrainConfig { max_epochs: 60, seed: seed::derive(master, "train", &[0]), ..TrainConfig::default() };
    let outcome = train(&train_set, Some("b04"), model, &cfg)?;
    let ck = &outcome.checkpoint;
    let m = &ck.manifest;

    println!("\ntrained {:?} regressor on backends {:?}", m.kind, m.backend_ids);
    println!(
        "split: {} training pools, {} validation pools {:?}",
        m.n_train_pools,
        m.val_pools.len(),
        m.val_pools
    );
    println!(
        "ran {} epochs, best validation RMSE {:.4} at epoch {} (weights restored from there)",
        m.epochs_run, m.best_val_rmse, m.best_epoch
    );
    let curve: Vec<String> = m.val_rmse_curve.iter().take(8).map(|r| format!("{r:.4}")).collect();
    println!("validation RMSE curve (first 8): {}", curve.join(" "));
    println!(
        "linear calibration on {} validation pools: y ~ {:.3} * prediction + {:.2e}",
        ck.calibration.fit_val_pools.len(),
        ck.calibration.a,
        ck.calibration.b
    );

    // Predict the unseen backend: standardize each pool with the
    // checkpoint's standardizer, run the model, average over pools,
    // then apply the calibration.
    let per_pool: Vec<Vec<f64>> = holdout_pools
        .iter()
        .map(|s| ck.standardizer.apply(s).and_then(|std| ck.model.predict(&std)))
        .collect::<Result<_>>()?;
    let mut mean = vec![0.0; g.n()];
    for preds in &per_pool {
        for (m, p) in mean.iter_mut().zip(preds) {
            *m += p / per_pool.len() as f64;
        }
    }
    let calibrated: Vec<f64> = mean.iter().map(|&p| ck.calibration.apply(p)).collect();

    println!("\nper-qubit error rates on the unseen backend:");
    println!("  qubit   predicted       true");
    for (v, (p, t)) in calibrated.iter().zip(holdout_truth.y_nodes()).enumerate() {
        println!("  q{v:02}     {p:.3e}    {t:.3e}");
    }
    let rho = spearman(&calibrated, holdout_truth.y_nodes())?;
    println!("rank correlation with the truth: {rho:.3}");

    assert_eq!(m.kind, TargetKind::Node);
    Ok(())
}
