//! Scratch probe: decompose drift degradation into training-side vs
//! inference-side contributions (temporary).

use noisescope::pipeline::{evaluate, infer_holdout, run_study, StudyCfg};
use noisescope::Result;

fn main() -> Result<()> {
    let seed: u64 = std::env::args().nth(1).and_then(|s| s.parse().ok()).unwrap_or(0);
    let s1: f64 = std::env::args().nth(2).and_then(|s| s.parse().ok()).unwrap_or(0.6);
    let s2: f64 = std::env::args().nth(3).and_then(|s| s.parse().ok()).unwrap_or(0.6);
    let sm: f64 = std::env::args().nth(4).and_then(|s| s.parse().ok()).unwrap_or(0.5);
    let mut base = StudyCfg::desk_default(seed);
    base.sampler.sigma_1q = s1;
    base.sampler.sigma_2q = s2;
    base.sampler.spatial_smoothing = sm;

    let mut cfg_static = base.clone();
    cfg_static.drift.enabled = false;
    let mut cfg_drift = base.clone();
    cfg_drift.drift.enabled = true;

    let (st, dr) = rayon::join(|| run_study(&cfg_static), || run_study(&cfg_drift));
    let st = st?;
    let dr = dr?;

    // Cross combinations: static models on drifted pools, drifted models
    // on static pools.
    let truth = st.data.holdout_truth.read();
    let static_model_drift_pools = {
        let pred = infer_holdout(&st.node.checkpoint, &st.edge.checkpoint, &dr.data.holdout_pools)?;
        evaluate(&pred, truth)?
    };
    let drift_model_static_pools = {
        let pred = infer_holdout(&dr.node.checkpoint, &dr.edge.checkpoint, &st.data.holdout_pools)?;
        evaluate(&pred, truth)?
    };

    println!("seed {seed} s1 {s1} s2 {s2} sm {sm}:");
    println!(
        "  static model + static pools : node {:.3} edge {:.3}",
        st.reports.nodes.spearman, st.reports.edges.spearman
    );
    println!(
        "  static model + drift pools  : node {:.3} edge {:.3}",
        static_model_drift_pools.nodes.spearman, static_model_drift_pools.edges.spearman
    );
    println!(
        "  drift model  + static pools : node {:.3} edge {:.3}",
        drift_model_static_pools.nodes.spearman, drift_model_static_pools.edges.spearman
    );
    println!(
        "  drift model  + drift pools  : node {:.3} edge {:.3}",
        dr.reports.nodes.spearman, dr.reports.edges.spearman
    );
    Ok(())
}
