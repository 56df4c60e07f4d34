//! Scratch probe of node-side training dynamics (temporary).

use noisescope::gnn::RegressorConfig;
use noisescope::pipeline::{build_study_data, spearman, StudyCfg, TrainConfig};
use noisescope::{seed, Result};

fn main() -> Result<()> {
    let master: u64 = std::env::args().nth(1).and_then(|s| s.parse().ok()).unwrap_or(0);
    let patience: usize = std::env::args().nth(2).and_then(|s| s.parse().ok()).unwrap_or(50);
    let cfg = StudyCfg::desk_default(master);
    let data = build_study_data(&cfg)?;

    // Label statistics: what would predicting the mean give?
    let mut labels = Vec::new();
    for s in &data.train_samples {
        let l = s.labels.as_ref().unwrap();
        labels.extend(l.y_nodes().iter().map(|&y| (1.0 + y).ln()));
    }
    let mean = labels.iter().sum::<f64>() / labels.len() as f64;
    let std = (labels.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / labels.len() as f64).sqrt();
    println!("node labels (log1p): mean {mean:.3e}, std {std:.3e} <- mean-prediction RMSE");

    let mut tc = TrainConfig {
        seed: seed::derive(master, "train", &[0]),
        max_epochs: 400,
        patience,
        ..TrainConfig::default()
    };
    tc.drift.enabled = false;
    let out = noisescope::pipeline::train(&data.train_samples, Some(&data.holdout_id), RegressorConfig::node_default(), &tc)?;
    let m = &out.checkpoint.manifest;
    println!("epochs {} best {} best_rmse {:.4e}", m.epochs_run, m.best_epoch, m.best_val_rmse);
    for (i, r) in m.val_rmse_curve.iter().enumerate() {
        if i % 5 == 0 || i + 1 == m.val_rmse_curve.len() {
            println!("  epoch {i:3}: val rmse {r:.4e}");
        }
    }

    // How good could it be? Correlate per-qubit truth with the holdout
    // prediction from this single model.
    let ck = &out.checkpoint;
    let per_pool: Vec<Vec<f64>> = data
        .holdout_pools
        .iter()
        .map(|s| ck.standardizer.apply(s).and_then(|std| ck.model.predict(&std)))
        .collect::<Result<_>>()?;
    let mut meanp = vec![0.0; per_pool[0].len()];
    for p in &per_pool {
        for (m, x) in meanp.iter_mut().zip(p) {
            *m += x / per_pool.len() as f64;
        }
    }
    let cal: Vec<f64> = meanp.iter().map(|&p| ck.calibration.apply(p)).collect();
    let truth = data.holdout_truth.read();
    println!("holdout spearman (calibrated): {:.3}", spearman(&cal, truth.y_nodes())?);
    println!("holdout spearman (raw mean):   {:.3}", spearman(&meanp, truth.y_nodes())?);
    Ok(())
}
