//! Versioned on-disk formats for every stage boundary: topologies,
//! backends, circuit pools (plain and transpiled), graph samples, model
//! checkpoints, error maps, evaluation reports, and the experiment
//! manifest that records seeds, configs, and content digests.
//!
//! All documents are JSON with a `schema_version` tag (pools are
//! line-delimited JSON under a JSON header line). Serialization is
//! byte-stable: map keys are sorted, field order is fixed, files end in
//! a newline, and float formatting is shortest-round-trip — so a rerun
//! from the same seed reproduces every file byte for byte. Masked-out
//! error entries are stored as `0.0` and restored to the in-memory `NaN`
//! sentinel on load.

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use std::collections::BTreeMap;
use std::path::Path;

use crate::backend::{BackendSpec, ErrorMap, SamplerCfg};
use crate::circuit::{Circuit, CircuitCfg, CircuitPool, Gate};
use crate::error::{Error, Result};
use crate::features::Sample;
use crate::gnn::Regressor;
use crate::graph::{gen_topology, CouplingGraph, TopologySpec};
use crate::pipeline::metrics::ComponentReports;
use crate::pipeline::study::{BackendAblationRow, PoolAblationRow};
use crate::pipeline::train::Checkpoint;
use crate::transpiler::{TranspiledCircuit, TranspiledPool};

pub const TOPOLOGY_SCHEMA: &str = "noisescope/topology@1";
pub const BACKEND_SCHEMA: &str = "noisescope/backend@1";
pub const POOL_SCHEMA: &str = "noisescope/pool@1";
pub const TRANSPILED_SCHEMA: &str = "noisescope/transpiled-pool@1";
/// Version of the feature layout; stored in sample files and inside
/// checkpoints, and required to match at train and inference time.
pub const FEATURE_SCHEMA: &str = "noisescope/sample@1";
pub const CHECKPOINT_SCHEMA: &str = "noisescope/checkpoint@1";
pub const ERRORMAP_SCHEMA: &str = "noisescope/errormap@1";
pub const REPORT_SCHEMA: &str = "noisescope/report@1";
pub const MANIFEST_SCHEMA: &str = "noisescope/manifest@1";

pub const TOOL_VERSION: &str = env!("CARGO_PKG_VERSION");

// ---------------------------------------------------------------------
// Plumbing
// ---------------------------------------------------------------------

fn check_schema(found: &str, expected: &str, path: &Path) -> Result<()> {
    if found != expected {
        return Err(Error::Schema(format!(
            "{} declares schema {found:?}, expected {expected:?}",
            path.display()
        )));
    }
    Ok(())
}

fn read_to_string(path: &Path) -> Result<String> {
    std::fs::read_to_string(path).map_err(|e| Error::io(path, e))
}

fn write_bytes(path: &Path, bytes: &[u8]) -> Result<()> {
    if let Some(parent) = path.parent() {
        if !parent.as_os_str().is_empty() {
            std::fs::create_dir_all(parent).map_err(|e| Error::io(parent, e))?;
        }
    }
    std::fs::write(path, bytes).map_err(|e| Error::io(path, e))
}

fn to_pretty(value: &impl Serialize) -> Result<String> {
    let mut s = serde_json::to_string_pretty(value)
        .map_err(|e| Error::Schema(format!("serialization failed: {e}")))?;
    s.push('\n');
    Ok(s)
}

fn to_compact(value: &impl Serialize) -> Result<String> {
    serde_json::to_string(value).map_err(|e| Error::Schema(format!("serialization failed: {e}")))
}

fn from_str<'a, T: Deserialize<'a>>(s: &'a str, path: &Path) -> Result<T> {
    serde_json::from_str(s)
        .map_err(|e| Error::Schema(format!("{} is malformed: {e}", path.display())))
}

fn save_doc(path: &Path, value: &impl Serialize) -> Result<()> {
    write_bytes(path, to_pretty(value)?.as_bytes())
}

/// Lowercase hex SHA-256 of a byte string.
pub fn sha256_hex(bytes: &[u8]) -> String {
    hex::encode(Sha256::digest(bytes))
}

/// Digest of a file's contents.
pub fn file_digest(path: &Path) -> Result<String> {
    let bytes = std::fs::read(path).map_err(|e| Error::io(path, e))?;
    Ok(sha256_hex(&bytes))
}

/// Replace masked-out `NaN` sentinels with `0.0` for storage.
fn storable_values(values: &[f64], mask: &[bool]) -> Vec<f64> {
    values
        .iter()
        .zip(mask)
        .map(|(&v, &m)| if m { v } else { 0.0 })
        .collect()
}

// ---------------------------------------------------------------------
// Topology files
// ---------------------------------------------------------------------

#[derive(Debug, Clone, Serialize, Deserialize)]
struct TopologyFile {
    schema_version: String,
    n: usize,
    edges: Vec<(usize, usize)>,
    kind: String,
    params: BTreeMap<String, usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    seed: Option<u64>,
}

/// Split a spec into the file's (kind, params, seed) provenance triple.
fn spec_parts(spec: &TopologySpec) -> (String, BTreeMap<String, usize>, Option<u64>) {
    let mut params = BTreeMap::new();
    match *spec {
        TopologySpec::Path { n } => {
            params.insert("n".to_string(), n);
            ("path".to_string(), params, None)
        }
        TopologySpec::Ring { n } => {
            params.insert("n".to_string(), n);
            ("ring".to_string(), params, None)
        }
        TopologySpec::Grid { rows, cols } => {
            params.insert("rows".to_string(), rows);
            params.insert("cols".to_string(), cols);
            ("grid".to_string(), params, None)
        }
        TopologySpec::HeavyHexLike { n, seed } => {
            params.insert("n".to_string(), n);
            ("heavy-hex-like".to_string(), params, Some(seed))
        }
    }
}

fn spec_from_parts(
    kind: &str,
    params: &BTreeMap<String, usize>,
    seed: Option<u64>,
    path: &Path,
) -> Result<TopologySpec> {
    let get = |key: &str| {
        params.get(key).copied().ok_or_else(|| {
            Error::Schema(format!("{}: {kind} topology needs param {key:?}", path.display()))
        })
    };
    match kind {
        "path" => Ok(TopologySpec::Path { n: get("n")? }),
        "ring" => Ok(TopologySpec::Ring { n: get("n")? }),
        "grid" => Ok(TopologySpec::Grid { rows: get("rows")?, cols: get("cols")? }),
        "heavy-hex-like" => Ok(TopologySpec::HeavyHexLike {
            n: get("n")?,
            seed: seed.ok_or_else(|| {
                Error::Schema(format!(
                    "{}: heavy-hex-like topology needs a seed",
                    path.display()
                ))
            })?,
        }),
        other => Err(Error::Schema(format!(
            "{}: unknown topology kind {other:?}",
            path.display()
        ))),
    }
}

fn topology_file(spec: &TopologySpec, g: &CouplingGraph) -> TopologyFile {
    let (kind, params, seed) = spec_parts(spec);
    TopologyFile {
        schema_version: TOPOLOGY_SCHEMA.to_string(),
        n: g.n(),
        edges: g.edges().to_vec(),
        kind,
        params,
        seed,
    }
}

fn topology_from_file(doc: &TopologyFile, path: &Path) -> Result<(TopologySpec, CouplingGraph)> {
    check_schema(&doc.schema_version, TOPOLOGY_SCHEMA, path)?;
    let spec = spec_from_parts(&doc.kind, &doc.params, doc.seed, path)?;
    let g = CouplingGraph::from_edges(doc.n, &doc.edges)?;
    let regenerated = gen_topology(&spec)?;
    if regenerated.n() != g.n() || regenerated.edges() != g.edges() {
        return Err(Error::Schema(format!(
            "{}: stored edge list does not match its declared generator",
            path.display()
        )));
    }
    Ok((spec, g))
}

pub fn save_topology(path: &Path, spec: &TopologySpec, g: &CouplingGraph) -> Result<()> {
    save_doc(path, &topology_file(spec, g))
}

pub fn load_topology(path: &Path) -> Result<(TopologySpec, CouplingGraph)> {
    let doc: TopologyFile = from_str(&read_to_string(path)?, path)?;
    topology_from_file(&doc, path)
}

// ---------------------------------------------------------------------
// Backend files
// ---------------------------------------------------------------------

#[derive(Debug, Clone, Serialize, Deserialize)]
struct GenBlock {
    seed: u64,
    cfg: SamplerCfg,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
struct BackendFile {
    schema_version: String,
    id: String,
    topology: TopologyFile,
    y_nodes: Vec<f64>,
    y_edges: Vec<f64>,
    mask_nodes: Vec<bool>,
    mask_edges: Vec<bool>,
    gen: GenBlock,
}

pub fn save_backend(path: &Path, spec: &BackendSpec) -> Result<()> {
    let doc = BackendFile {
        schema_version: BACKEND_SCHEMA.to_string(),
        id: spec.id.clone(),
        topology: topology_file(&spec.topology, &spec.graph),
        y_nodes: storable_values(spec.errors.y_nodes(), spec.errors.mask_nodes()),
        y_edges: storable_values(spec.errors.y_edges(), spec.errors.mask_edges()),
        mask_nodes: spec.errors.mask_nodes().to_vec(),
        mask_edges: spec.errors.mask_edges().to_vec(),
        gen: GenBlock { seed: spec.gen_seed, cfg: spec.gen_cfg.clone() },
    };
    save_doc(path, &doc)
}

pub fn load_backend(path: &Path) -> Result<BackendSpec> {
    let doc: BackendFile = from_str(&read_to_string(path)?, path)?;
    check_schema(&doc.schema_version, BACKEND_SCHEMA, path)?;
    let (topology, graph) = topology_from_file(&doc.topology, path)?;
    let errors = ErrorMap::new(doc.y_nodes, doc.y_edges, doc.mask_nodes, doc.mask_edges)?;
    errors.check_shape(&graph)?;
    Ok(BackendSpec {
        id: doc.id,
        topology,
        graph,
        errors,
        gen_seed: doc.gen.seed,
        gen_cfg: doc.gen.cfg,
    })
}

// ---------------------------------------------------------------------
// Circuit pool files (line-delimited records under a header line)
// ---------------------------------------------------------------------

#[derive(Debug, Clone, Serialize, Deserialize)]
struct PoolHeader {
    schema_version: String,
    n_qubits: usize,
    pool_index: usize,
    master_seed: u64,
    cfg: CircuitCfg,
    circuits: usize,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
struct CircuitRecord {
    seed: u64,
    width: usize,
    cx_budget: usize,
    gates: Vec<Gate>,
}

fn jsonl<H: Serialize, R: Serialize>(header: &H, records: impl Iterator<Item = R>) -> Result<String> {
    let mut out = to_compact(header)?;
    out.push('\n');
    for r in records {
        out.push_str(&to_compact(&r)?);
        out.push('\n');
    }
    Ok(out)
}

fn jsonl_parts<'a>(text: &'a str, path: &Path) -> Result<(&'a str, Vec<&'a str>)> {
    let mut lines = text.lines();
    let header = lines
        .next()
        .ok_or_else(|| Error::Schema(format!("{} is empty", path.display())))?;
    Ok((header, lines.filter(|l| !l.trim().is_empty()).collect()))
}

pub fn save_pool(path: &Path, pool: &CircuitPool) -> Result<()> {
    let header = PoolHeader {
        schema_version: POOL_SCHEMA.to_string(),
        n_qubits: pool.n_qubits,
        pool_index: pool.pool_index,
        master_seed: pool.master_seed,
        cfg: pool.cfg,
        circuits: pool.circuits.len(),
    };
    let records = pool.circuits.iter().map(|c| CircuitRecord {
        seed: c.seed,
        width: c.width,
        cx_budget: c.cx_budget,
        gates: c.gates.clone(),
    });
    write_bytes(path, jsonl(&header, records)?.as_bytes())
}

pub fn load_pool(path: &Path) -> Result<CircuitPool> {
    let text = read_to_string(path)?;
    let (hline, rlines) = jsonl_parts(&text, path)?;
    let header: PoolHeader = from_str(hline, path)?;
    check_schema(&header.schema_version, POOL_SCHEMA, path)?;
    if rlines.len() != header.circuits {
        return Err(Error::Schema(format!(
            "{}: header promises {} circuits, found {}",
            path.display(),
            header.circuits,
            rlines.len()
        )));
    }
    let circuits = rlines
        .iter()
        .map(|l| {
            let r: CircuitRecord = from_str(l, path)?;
            Ok(Circuit {
                n_qubits: header.n_qubits,
                seed: r.seed,
                width: r.width,
                cx_budget: r.cx_budget,
                gates: r.gates,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(CircuitPool {
        n_qubits: header.n_qubits,
        pool_index: header.pool_index,
        master_seed: header.master_seed,
        cfg: header.cfg,
        circuits,
    })
}

// ---------------------------------------------------------------------
// Transpiled pool files
// ---------------------------------------------------------------------

#[derive(Debug, Clone, Serialize, Deserialize)]
struct TranspiledHeader {
    schema_version: String,
    n_physical: usize,
    pool_index: usize,
    master_seed: u64,
    circuits: usize,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
struct TranspiledRecord {
    source_seed: u64,
    swap_count: usize,
    final_layout: Vec<(usize, usize)>,
    gates: Vec<Gate>,
}

pub fn save_transpiled(path: &Path, tp: &TranspiledPool) -> Result<()> {
    let header = TranspiledHeader {
        schema_version: TRANSPILED_SCHEMA.to_string(),
        n_physical: tp.n_physical,
        pool_index: tp.pool_index,
        master_seed: tp.master_seed,
        circuits: tp.circuits.len(),
    };
    let records = tp.circuits.iter().map(|c| TranspiledRecord {
        source_seed: c.source_seed,
        swap_count: c.swap_count,
        final_layout: c.final_layout.clone(),
        gates: c.gates.clone(),
    });
    write_bytes(path, jsonl(&header, records)?.as_bytes())
}

pub fn load_transpiled(path: &Path) -> Result<TranspiledPool> {
    let text = read_to_string(path)?;
    let (hline, rlines) = jsonl_parts(&text, path)?;
    let header: TranspiledHeader = from_str(hline, path)?;
    check_schema(&header.schema_version, TRANSPILED_SCHEMA, path)?;
    if rlines.len() != header.circuits {
        return Err(Error::Schema(format!(
            "{}: header promises {} circuits, found {}",
            path.display(),
            header.circuits,
            rlines.len()
        )));
    }
    let circuits = rlines
        .iter()
        .map(|l| {
            let r: TranspiledRecord = from_str(l, path)?;
            Ok(TranspiledCircuit {
                n_physical: header.n_physical,
                source_seed: r.source_seed,
                gates: r.gates,
                swap_count: r.swap_count,
                final_layout: r.final_layout,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(TranspiledPool {
        n_physical: header.n_physical,
        pool_index: header.pool_index,
        master_seed: header.master_seed,
        circuits,
    })
}

// ---------------------------------------------------------------------
// Sample files
// ---------------------------------------------------------------------

#[derive(Debug, Clone, Serialize, Deserialize)]
struct SampleFile {
    feature_schema_version: String,
    backend_id: String,
    pool_index: usize,
    n: usize,
    edges: Vec<(usize, usize)>,
    x_nodes: Vec<Vec<f64>>,
    x_edges: Vec<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    y_nodes: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    y_edges: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    mask_nodes: Option<Vec<bool>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    mask_edges: Option<Vec<bool>>,
    standardized: bool,
}

pub fn save_sample(path: &Path, sample: &Sample) -> Result<()> {
    let labels = sample.labels.as_ref();
    let doc = SampleFile {
        feature_schema_version: FEATURE_SCHEMA.to_string(),
        backend_id: sample.backend_id.clone(),
        pool_index: sample.pool_index,
        n: sample.n,
        edges: sample.edges.clone(),
        x_nodes: sample.x_nodes.clone(),
        x_edges: sample.x_edges.clone(),
        y_nodes: labels.map(|m| storable_values(m.y_nodes(), m.mask_nodes())),
        y_edges: labels.map(|m| storable_values(m.y_edges(), m.mask_edges())),
        mask_nodes: labels.map(|m| m.mask_nodes().to_vec()),
        mask_edges: labels.map(|m| m.mask_edges().to_vec()),
        standardized: sample.standardized,
    };
    save_doc(path, &doc)
}

pub fn load_sample(path: &Path) -> Result<Sample> {
    let doc: SampleFile = from_str(&read_to_string(path)?, path)?;
    check_schema(&doc.feature_schema_version, FEATURE_SCHEMA, path)?;
    let labels = match (doc.y_nodes, doc.y_edges, doc.mask_nodes, doc.mask_edges) {
        (None, None, None, None) => None,
        (Some(yn), Some(ye), Some(mn), Some(me)) => Some(ErrorMap::new(yn, ye, mn, me)?),
        _ => {
            return Err(Error::Schema(format!(
                "{}: labels must carry all four of y_nodes/y_edges/mask_nodes/mask_edges or none",
                path.display()
            )))
        }
    };
    let sample = Sample {
        backend_id: doc.backend_id,
        pool_index: doc.pool_index,
        n: doc.n,
        edges: doc.edges,
        x_nodes: doc.x_nodes,
        x_edges: doc.x_edges,
        standardized: doc.standardized,
        labels,
    };
    sample.check_consistent()?;
    Ok(sample)
}

// ---------------------------------------------------------------------
// Checkpoint files
// ---------------------------------------------------------------------

#[derive(Debug, Clone, Serialize, Deserialize)]
struct CheckpointFile {
    schema_version: String,
    feature_schema_version: String,
    config: crate::gnn::RegressorConfig,
    params: BTreeMap<String, Vec<Vec<f64>>>,
    standardizer: crate::features::Standardizer,
    calibration: crate::pipeline::train::LinearCalibration,
    manifest: crate::pipeline::train::TrainManifest,
}

pub fn save_checkpoint(path: &Path, ck: &Checkpoint) -> Result<()> {
    let doc = CheckpointFile {
        schema_version: CHECKPOINT_SCHEMA.to_string(),
        feature_schema_version: FEATURE_SCHEMA.to_string(),
        config: ck.model.config,
        params: ck.model.store.named_blocks(),
        standardizer: ck.standardizer.clone(),
        calibration: ck.calibration.clone(),
        manifest: ck.manifest.clone(),
    };
    save_doc(path, &doc)
}

pub fn load_checkpoint(path: &Path) -> Result<Checkpoint> {
    let doc: CheckpointFile = from_str(&read_to_string(path)?, path)?;
    check_schema(&doc.schema_version, CHECKPOINT_SCHEMA, path)?;
    if doc.feature_schema_version != FEATURE_SCHEMA {
        return Err(Error::Schema(format!(
            "{}: checkpoint was built for feature schema {:?}, this build expects {:?}",
            path.display(),
            doc.feature_schema_version,
            FEATURE_SCHEMA
        )));
    }
    let mut model = Regressor::init(doc.config, 0)?;
    model.store.load_named_blocks(&doc.params)?;
    Ok(Checkpoint {
        model,
        standardizer: doc.standardizer,
        calibration: doc.calibration,
        manifest: doc.manifest,
    })
}

// ---------------------------------------------------------------------
// Error-map files
// ---------------------------------------------------------------------

#[derive(Debug, Clone, Serialize, Deserialize)]
struct ErrorMapFile {
    schema_version: String,
    y_nodes: Vec<f64>,
    y_edges: Vec<f64>,
    mask_nodes: Vec<bool>,
    mask_edges: Vec<bool>,
}

pub fn save_errormap(path: &Path, map: &ErrorMap) -> Result<()> {
    let doc = ErrorMapFile {
        schema_version: ERRORMAP_SCHEMA.to_string(),
        y_nodes: storable_values(map.y_nodes(), map.mask_nodes()),
        y_edges: storable_values(map.y_edges(), map.mask_edges()),
        mask_nodes: map.mask_nodes().to_vec(),
        mask_edges: map.mask_edges().to_vec(),
    };
    save_doc(path, &doc)
}

pub fn load_errormap(path: &Path) -> Result<ErrorMap> {
    let doc: ErrorMapFile = from_str(&read_to_string(path)?, path)?;
    check_schema(&doc.schema_version, ERRORMAP_SCHEMA, path)?;
    ErrorMap::new(doc.y_nodes, doc.y_edges, doc.mask_nodes, doc.mask_edges)
}

// ---------------------------------------------------------------------
// Report files and tabular exports
// ---------------------------------------------------------------------

/// The structured evaluation document for one predicted/truth pair.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReportDoc {
    pub schema_version: String,
    /// What was evaluated, e.g. the holdout backend id.
    pub label: String,
    pub reports: ComponentReports,
}

impl ReportDoc {
    pub fn new(label: impl Into<String>, reports: ComponentReports) -> Self {
        ReportDoc {
            schema_version: REPORT_SCHEMA.to_string(),
            label: label.into(),
            reports,
        }
    }
}

pub fn save_report(path: &Path, doc: &ReportDoc) -> Result<()> {
    save_doc(path, doc)
}

pub fn load_report(path: &Path) -> Result<ReportDoc> {
    let doc: ReportDoc = from_str(&read_to_string(path)?, path)?;
    check_schema(&doc.schema_version, REPORT_SCHEMA, path)?;
    Ok(doc)
}

/// Flat export of a report: one row per metric per component class.
pub fn report_csv(reports: &ComponentReports) -> String {
    let mut out = String::from("component,metric,value\n");
    for (class, r) in [("nodes", &reports.nodes), ("edges", &reports.edges)] {
        out.push_str(&format!("{class},n,{}\n", r.n));
        out.push_str(&format!("{class},percent_diff,{}\n", r.percent_diff));
        out.push_str(&format!("{class},spearman,{}\n", r.spearman));
        out.push_str(&format!("{class},top_k,{}\n", r.top_k));
        out.push_str(&format!("{class},top_overlap,{}\n", r.top_overlap));
        out.push_str(&format!("{class},log_mismatch,{}\n", r.log_mismatch));
        out.push_str(&format!("{class},rmse,{}\n", r.rmse));
    }
    out
}

/// Flat export of the pool ablation, one row per pool count.
pub fn pool_ablation_csv(rows: &[PoolAblationRow]) -> String {
    let mut out = String::from("pools,mismatch_nodes,mismatch_edges\n");
    for r in rows {
        out.push_str(&format!("{},{},{}\n", r.pools, r.mismatch_nodes, r.mismatch_edges));
    }
    out
}

/// Flat export of the backend ablation, one row per training-set size.
pub fn backend_ablation_csv(rows: &[BackendAblationRow]) -> String {
    let mut out = String::from("k,backend_ids,mismatch_nodes,mismatch_edges\n");
    for r in rows {
        out.push_str(&format!(
            "{},{},{},{}\n",
            r.k,
            r.backend_ids.join("+"),
            r.mismatch_nodes,
            r.mismatch_edges
        ));
    }
    out
}

/// Write a plain text export (CSV) with directory creation.
pub fn save_text(path: &Path, text: &str) -> Result<()> {
    write_bytes(path, text.as_bytes())
}

// ---------------------------------------------------------------------
// Experiment manifest
// ---------------------------------------------------------------------

/// Provenance record written next to every command's outputs: enough
/// seeds, configs, and digests to regenerate and verify each file.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentManifest {
    pub schema_version: String,
    pub tool_version: String,
    /// The command that produced this directory.
    pub command: String,
    /// Schema tag per document kind in play.
    pub schema_versions: BTreeMap<String, String>,
    pub master_seed: u64,
    /// Derived seeds by role, e.g. "train-node" or "backend-errors/3".
    pub sub_seeds: BTreeMap<String, u64>,
    /// Configuration objects by name, echoed verbatim.
    pub configs: BTreeMap<String, serde_json::Value>,
    /// SHA-256 digest per consumed file (name as given).
    pub inputs: BTreeMap<String, String>,
    /// SHA-256 digest per produced file, relative to the manifest's
    /// directory.
    pub outputs: BTreeMap<String, String>,
    /// Wall-clock seconds per phase; recorded only on request because
    /// timing would break byte-identical reruns.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub timing: Option<BTreeMap<String, f64>>,
}

pub const MANIFEST_FILE: &str = "manifest.json";

impl ExperimentManifest {
    pub fn new(command: impl Into<String>, master_seed: u64) -> Self {
        ExperimentManifest {
            schema_version: MANIFEST_SCHEMA.to_string(),
            tool_version: TOOL_VERSION.to_string(),
            command: command.into(),
            schema_versions: BTreeMap::new(),
            master_seed,
            sub_seeds: BTreeMap::new(),
            configs: BTreeMap::new(),
            inputs: BTreeMap::new(),
            outputs: BTreeMap::new(),
            timing: None,
        }
    }

    pub fn declare_schema(&mut self, kind: &str, tag: &str) {
        self.schema_versions.insert(kind.to_string(), tag.to_string());
    }

    pub fn record_seed(&mut self, role: &str, seed: u64) {
        self.sub_seeds.insert(role.to_string(), seed);
    }

    pub fn record_config(&mut self, name: &str, cfg: &impl Serialize) -> Result<()> {
        let v = serde_json::to_value(cfg)
            .map_err(|e| Error::Schema(format!("config {name:?} not serializable: {e}")))?;
        self.configs.insert(name.to_string(), v);
        Ok(())
    }

    /// Digest a consumed file under the name it was referred to by.
    pub fn record_input(&mut self, name: &str, path: &Path) -> Result<()> {
        let digest = file_digest(path)?;
        self.inputs.insert(name.to_string(), digest);
        Ok(())
    }

    /// Digest a produced file living in the manifest's directory.
    pub fn record_output(&mut self, dir: &Path, name: &str) -> Result<()> {
        let digest = file_digest(&dir.join(name))?;
        self.outputs.insert(name.to_string(), digest);
        Ok(())
    }

    /// Write the manifest to `path` (conventionally
    /// [`MANIFEST_FILE`] inside the output directory).
    pub fn save(&self, path: &Path) -> Result<()> {
        save_doc(path, self)
    }
}

/// Load a manifest and re-digest every listed output file (relative to
/// the manifest's directory), failing if any file is missing or its
/// contents changed.
pub fn verify_manifest(path: &Path) -> Result<ExperimentManifest> {
    let doc: ExperimentManifest = from_str(&read_to_string(path)?, path)?;
    check_schema(&doc.schema_version, MANIFEST_SCHEMA, path)?;
    let dir = path.parent().unwrap_or(Path::new("."));
    for (name, expected) in &doc.outputs {
        let found = file_digest(&dir.join(name))?;
        if &found != expected {
            return Err(Error::Schema(format!(
                "{name}: digest {found} does not match manifest entry {expected}"
            )));
        }
    }
    Ok(doc)
}
