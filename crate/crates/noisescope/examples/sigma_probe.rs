//! Scratch probe: sampler sigma sweep vs static quality and drift deltas (temporary).

use noisescope::pipeline::{drift_experiment, StudyCfg};
use noisescope::Result;

fn main() -> Result<()> {
    let seed: u64 = std::env::args().nth(1).and_then(|s| s.parse().ok()).unwrap_or(0);
    let s1: f64 = std::env::args().nth(2).and_then(|s| s.parse().ok()).unwrap_or(1.0);
    let s2: f64 = std::env::args().nth(3).and_then(|s| s.parse().ok()).unwrap_or(1.0);
    let sm: f64 = std::env::args().nth(4).and_then(|s| s.parse().ok()).unwrap_or(0.5);
    let t = std::time::Instant::now();
    let mut cfg = StudyCfg::desk_default(seed);
    cfg.sampler.sigma_1q = s1;
    cfg.sampler.sigma_2q = s2;
    cfg.sampler.spatial_smoothing = sm;
    cfg.drift.enabled = true;
    let exp = drift_experiment(&cfg)?;
    let s = &exp.static_run.reports;
    let d = &exp.drifted_run.reports;
    println!(
        "seed {seed} s1 {s1} s2 {s2}: node {:.3}->{:.3} (d {:+.3}, pct {:.0}->{:.0}, top {}->{}) | edge {:.3}->{:.3} (d {:+.3}, pct {:.0}->{:.0}, top {}->{}) | {:.0}s",
        s.nodes.spearman, d.nodes.spearman, d.nodes.spearman - s.nodes.spearman,
        s.nodes.percent_diff, d.nodes.percent_diff, s.nodes.top_overlap, d.nodes.top_overlap,
        s.edges.spearman, d.edges.spearman, d.edges.spearman - s.edges.spearman,
        s.edges.percent_diff, d.edges.percent_diff, s.edges.top_overlap, d.edges.top_overlap,
        t.elapsed().as_secs_f64()
    );
    Ok(())
}
