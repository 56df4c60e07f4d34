//! Scratch probe: desk-scale drift deltas (temporary).

use noisescope::pipeline::{drift_experiment, StudyCfg};
use noisescope::Result;

fn main() -> Result<()> {
    let seed: u64 = std::env::args().nth(1).and_then(|s| s.parse().ok()).unwrap_or(0);
    let t = std::time::Instant::now();
    let mut cfg = StudyCfg::desk_default(seed);
    cfg.drift.enabled = true;
    let exp = drift_experiment(&cfg)?;
    let s = &exp.static_run.reports;
    let d = &exp.drifted_run.reports;
    println!(
        "seed {seed}: node rho {:.3} -> {:.3} (d {:+.3}) | edge rho {:.3} -> {:.3} (d {:+.3}) | {:.0}s",
        s.nodes.spearman,
        d.nodes.spearman,
        d.nodes.spearman - s.nodes.spearman,
        s.edges.spearman,
        d.edges.spearman,
        d.edges.spearman - s.edges.spearman,
        t.elapsed().as_secs_f64()
    );
    Ok(())
}
