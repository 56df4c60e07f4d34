//! Scratch probe: is there node-label signal in the features? (temporary)

use noisescope::backend::{sample_backend, SamplerCfg};
use noisescope::pipeline::{build_study_data, spearman, StudyCfg};
use noisescope::graph::{gen_topology, TopologySpec};
use noisescope::Result;

fn main() -> Result<()> {
    // Part 1: oracle correlation between a qubit's error and the mean of
    // its incident coupling errors, as a function of smoothing.
    let g = gen_topology(&TopologySpec::default_heavy_hex(0))?;
    for s in [0.0, 0.3, 0.5, 0.7, 0.85] {
        let cfg = SamplerCfg { spatial_smoothing: s, ..SamplerCfg::default() };
        let mut rho_sum = 0.0;
        let reps = 40;
        for seed in 0..reps {
            let m = sample_backend(&g, 1000 + seed, &cfg)?;
            let nbhd: Vec<f64> = (0..g.n())
                .map(|v| {
                    let inc = g.incident_edges(v);
                    inc.iter().map(|&e| m.y_edges()[e]).sum::<f64>() / inc.len() as f64
                })
                .collect();
            rho_sum += spearman(&nbhd, m.y_nodes())?;
        }
        println!("smoothing {s:.2}: mean spearman(y_v, incident-edge mean) = {:.3}", rho_sum / reps as f64);
    }

    // Part 2: per-feature-column correlation with node labels across the
    // actual desk-scale training samples.
    let cfg = StudyCfg::desk_default(0);
    let data = build_study_data(&cfg)?;
    let dim = data.train_samples[0].x_nodes[0].len();
    println!("\nper-column spearman with node labels over {} samples:", data.train_samples.len());
    let names = ["deg", "betw", "clust", "harm", "kcore", "coverage", "share1q", "relshare"];
    for d in 0..dim {
        let mut xs = Vec::new();
        let mut ys = Vec::new();
        for s in &data.train_samples {
            let l = s.labels.as_ref().unwrap();
            for (v, row) in s.x_nodes.iter().enumerate() {
                xs.push(row[d]);
                ys.push(l.y_nodes()[v]);
            }
        }
        println!("  col {d} {:<9}: {:+.3}", names[d], spearman(&xs, &ys)?);
    }

    // Within-backend version (the cross-backend pooling can wash out
    // signal if backends have different overall levels).
    println!("\nwithin-backend per-column spearman (mean over train backends):");
    for d in 0..dim {
        let mut acc = 0.0;
        let mut cnt = 0;
        for b in &data.train_backends {
            let mut xs = Vec::new();
            let mut ys = Vec::new();
            for s in data.train_samples.iter().filter(|s| s.backend_id == b.id) {
                let l = s.labels.as_ref().unwrap();
                for (v, row) in s.x_nodes.iter().enumerate() {
                    xs.push(row[d]);
                    ys.push(l.y_nodes()[v]);
                }
            }
            acc += spearman(&xs, &ys)?;
            cnt += 1;
        }
        println!("  col {d} {:<9}: {:+.3}", names[d], acc / cnt as f64);
    }

    // Part 3: same, but for the aggregated incident EDGE usage around
    // each qubit (what message passing can read).
    println!("\nwithin-backend spearman of incident-edge dynamic features vs node labels:");
    let enames = ["e-betw", "sumdeg", "proddeg", "bridge", "e-coverage", "share2q"];
    let edim = data.train_samples[0].x_edges[0].len();
    for d in 0..edim {
        let mut acc = 0.0;
        let mut cnt = 0;
        for b in &data.train_backends {
            let mut xs = Vec::new();
            let mut ys = Vec::new();
            for s in data.train_samples.iter().filter(|s| s.backend_id == b.id) {
                let l = s.labels.as_ref().unwrap();
                let g2 = &data.graph;
                for v in 0..s.n {
                    let inc = g2.incident_edges(v);
                    let m = inc.iter().map(|&e| s.x_edges[e][d]).sum::<f64>() / inc.len() as f64;
                    xs.push(m);
                    ys.push(l.y_nodes()[v]);
                }
            }
            acc += spearman(&xs, &ys)?;
            cnt += 1;
        }
        println!("  col {d} {:<10}: {:+.3}", enames[d], acc / cnt as f64);
    }
    Ok(())
}
