//! Scratch probe at desk scale (temporary; not part of the example set).

use noisescope::pipeline::{run_study, StudyCfg};
use noisescope::Result;

fn main() -> Result<()> {
    let seed: u64 = std::env::args().nth(1).and_then(|s| s.parse().ok()).unwrap_or(0);
    let t = std::time::Instant::now();
    let cfg = StudyCfg::desk_default(seed);
    let out = run_study(&cfg)?;
    let n = &out.reports.nodes;
    let e = &out.reports.edges;
    println!(
        "seed {seed}: nodes rho {:.3} pct {:.1} top {}/{} | edges rho {:.3} pct {:.1} top {}/{} | node epochs {} best {} | edge epochs {} best {} | {:.1}s",
        n.spearman, n.percent_diff, n.top_overlap, n.top_k,
        e.spearman, e.percent_diff, e.top_overlap, e.top_k,
        out.node.checkpoint.manifest.epochs_run, out.node.checkpoint.manifest.best_epoch,
        out.edge.checkpoint.manifest.epochs_run, out.edge.checkpoint.manifest.best_epoch,
        t.elapsed().as_secs_f64()
    );
    Ok(())
}
