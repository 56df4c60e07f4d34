//! The on-disk formats: schema-tagged JSON, byte-stable writes, and
//! digest manifests that make every artifact verifiable.
//!
//! Writes a topology, a backend, a circuit pool, and a feature sample
//! into a scratch directory, reloads each one, and shows the properties
//! the formats guarantee: saving twice produces identical bytes, every
//! file carries a schema tag, and an experiment manifest records SHA-256
//! digests that later verification recomputes — so a tampered byte is
//! caught.
//!
//! Run with: `cargo run --example files_and_manifests`

use noisescope::backend::{sample_backend, BackendSpec, SamplerCfg};
use noisescope::circuit::{gen_pool, CircuitCfg};
use noisescope::features::assemble_sample;
use noisescope::files::{
    file_digest, load_backend, load_pool, load_sample, load_topology, save_backend, save_pool,
    save_sample, save_topology, verify_manifest, ExperimentManifest, BACKEND_SCHEMA,
    MANIFEST_FILE, POOL_SCHEMA, TOPOLOGY_SCHEMA,
};
use noisescope::graph::{gen_topology, TopologySpec};
use noisescope::transpiler::transpile_pool;
use noisescope::Result;

fn main() -> Result<()> {
    let dir = std::env::temp_dir().join("noisescope-files-example");
    if dir.exists() {
        std::fs::remove_dir_all(&dir).map_err(|e| noisescope::Error::io(&dir, e))?;
    }
    println!("scratch directory: {}", dir.display());

    // Build a small artifact set.
    let spec = TopologySpec::Grid { rows: 3, cols: 3 };
    let g = gen_topology(&spec)?;
    let errors = sample_backend(&g, 9, &SamplerCfg::default())?;
    let backend = BackendSpec {
        id: "b00".into(),
        topology: spec.clone(),
        graph: g.clone(),
        errors,
        gen_seed: 9,
        gen_cfg: SamplerCfg::default(),
    };
    let pool = gen_pool(g.n(), 5, 17, 0, &CircuitCfg::for_edge_count(g.edge_count()))?;
    let tp = transpile_pool(&pool, &g, &backend.errors)?;
    let sample = assemble_sample("b00", &g, &tp, Some(&backend.errors))?;

    // Save everything and reload it.
    let topo_path = dir.join("topology.json");
    let backend_path = dir.join("b00.json");
    let pool_path = dir.join("pool-000.jsonl");
    let sample_path = dir.join("sample-000.json");
    save_topology(&topo_path, &spec, &g)?;
    save_backend(&backend_path, &backend)?;
    save_pool(&pool_path, &pool)?;
    save_sample(&sample_path, &sample)?;

    let (spec2, g2) = load_topology(&topo_path)?;
    let backend2 = load_backend(&backend_path)?;
    let pool2 = load_pool(&pool_path)?;
    let sample2 = load_sample(&sample_path)?;
    println!(
        "round trips exact: topology {}, backend {}, pool {}, sample {}",
        spec2 == spec && g2.edges() == g.edges(),
        backend2 == backend,
        pool2 == pool,
        sample2 == sample
    );
    println!(
        "schema tags: {TOPOLOGY_SCHEMA:?}, {BACKEND_SCHEMA:?}, {POOL_SCHEMA:?} (line-oriented, one circuit per line)"
    );

    // Byte stability: rewriting an artifact reproduces it exactly, which
    // is what makes whole-experiment reruns diffable.
    let before = file_digest(&backend_path)?;
    save_backend(&backend_path, &backend)?;
    let after = file_digest(&backend_path)?;
    println!("rewrite is byte-identical: {} (sha256 {})", before == after, &before[..16]);

    // Manifest: digests of every output, plus seeds and configs.
    let mut manifest = ExperimentManifest::new("files-example", 9);
    manifest.declare_schema("topology", TOPOLOGY_SCHEMA);
    manifest.declare_schema("backend", BACKEND_SCHEMA);
    manifest.record_seed("backend-errors", 9);
    manifest.record_config("sampler", &SamplerCfg::default())?;
    for name in ["topology.json", "b00.json", "pool-000.jsonl", "sample-000.json"] {
        manifest.record_output(&dir, name)?;
    }
    let manifest_path = dir.join(MANIFEST_FILE);
    manifest.save(&manifest_path)?;
    let verified = verify_manifest(&manifest_path)?;
    println!("manifest verifies {} outputs against their digests", verified.outputs.len());

    // Tamper with one byte and watch verification catch it.
    let mut bytes = std::fs::read(&sample_path).map_err(|e| noisescope::Error::io(&sample_path, e))?;
    let last = bytes.len() - 2;
    bytes[last] ^= 0x01;
    std::fs::write(&sample_path, &bytes).map_err(|e| noisescope::Error::io(&sample_path, e))?;
    match verify_manifest(&manifest_path) {
        Err(e) => println!("tampered sample detected: {e}"),
        Ok(_) => println!("BUG: tampering went unnoticed"),
    }

    std::fs::remove_dir_all(&dir).map_err(|e| noisescope::Error::io(&dir, e))?;
    println!("scratch directory removed");
    Ok(())
}
