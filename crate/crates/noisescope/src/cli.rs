//! Command-line surface: file-based, reproducible experiments staged as
//! backend generation → dataset generation → training → inference →
//! evaluation, plus the ablation and drift experiment wrappers.
//!
//! Every command is deterministic given its flags (all randomness flows
//! from explicit seeds) and idempotent (reruns produce byte-identical
//! files). Each command writes a manifest recording seeds, configs, and
//! SHA-256 digests of everything it read and wrote.

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Deserialize;
use std::path::{Path, PathBuf};

use crate::backend::{sample_backend, BackendSpec, ErrorMap, SamplerCfg};
use crate::circuit::{gen_pool, CircuitCfg};
use crate::error::{Error, Result};
use crate::features::{assemble_sample, Sample};
use crate::files::{
    self, backend_ablation_csv, load_backend, load_checkpoint, load_errormap, load_sample,
    load_topology, pool_ablation_csv, report_csv, save_backend, save_checkpoint, save_errormap,
    save_pool, save_report, save_sample, save_text, save_topology, save_transpiled,
    ExperimentManifest, ReportDoc, MANIFEST_FILE,
};
use crate::gnn::{RegressorConfig, TargetKind};
use crate::graph::{gen_topology, TopologySpec};
use crate::pipeline::infer::infer_holdout;
use crate::pipeline::metrics::evaluate;
use crate::pipeline::study::{
    ablate_backends, build_study_data, drift_experiment, pool_ablation, StudyCfg, StudyOutcome,
};
use crate::pipeline::train::{train, DriftTrainCfg, TrainConfig};
use crate::seed;
use crate::transpiler::transpile_pool;

// ---------------------------------------------------------------------
// Argument grammar
// ---------------------------------------------------------------------

/// Reconstruct a quantum backend's error map from coupling topology and
/// transpiled-circuit statistics.
#[derive(Debug, Parser)]
#[command(name = "noisescope", version, max_term_width = 100)]
pub struct Cli {
    /// Suppress diagnostic logging on the error stream.
    #[arg(long, global = true)]
    pub quiet: bool,

    /// Worker threads for intra-command parallelism (never changes
    /// results). Defaults to the number of cores.
    #[arg(long, global = true)]
    pub threads: Option<usize>,

    /// Record wall-clock timings in the manifest. Off by default because
    /// timing data breaks byte-identical reruns.
    #[arg(long, global = true)]
    pub record_timing: bool,

    #[command(subcommand)]
    pub cmd: Cmd,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum TopoKind {
    Path,
    Ring,
    Grid,
    HeavyHexLike,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum KindArg {
    Node,
    Edge,
}

impl From<KindArg> for TargetKind {
    fn from(k: KindArg) -> TargetKind {
        match k {
            KindArg::Node => TargetKind::Node,
            KindArg::Edge => TargetKind::Edge,
        }
    }
}

#[derive(Debug, Subcommand)]
pub enum Cmd {
    /// Synthesize a fleet of backends over one shared topology.
    GenBackends(GenBackendsArgs),
    /// Generate circuit pools for one backend, transpile them against
    /// it, and extract graph samples.
    GenDataset(GenDatasetArgs),
    /// Train one regressor on every sample except the holdout's.
    Train(TrainArgs),
    /// Reconstruct a holdout error map from unlabeled sample pools.
    Infer(InferArgs),
    /// Score a predicted error map against ground truth.
    Evaluate(EvaluateArgs),
    /// Re-run inference on pool-count prefixes against frozen models.
    AblatePools(AblatePoolsArgs),
    /// Retrain on k training backends for each k and score the holdout.
    AblateBackends(AblateBackendsArgs),
    /// Run the same study with drift off and on, side by side.
    Drift(DriftArgs),
}

#[derive(Debug, Args)]
pub struct GenBackendsArgs {
    /// How many backends to synthesize.
    #[arg(long, default_value_t = 5)]
    pub count: usize,
    /// Qubits per backend.
    #[arg(long, default_value_t = 27)]
    pub qubits: usize,
    /// Coupling topology family.
    #[arg(long, value_enum, default_value_t = TopoKind::HeavyHexLike)]
    pub topology: TopoKind,
    /// Grid rows (grid topology only).
    #[arg(long)]
    pub rows: Option<usize>,
    /// Grid columns (grid topology only).
    #[arg(long)]
    pub cols: Option<usize>,
    /// Master seed for topology and error-map sampling.
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Output directory.
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
pub struct GenDatasetArgs {
    /// Backend file the circuits are transpiled against.
    #[arg(long)]
    pub backend: PathBuf,
    /// Number of circuit pools (one sample each).
    #[arg(long, default_value_t = 20)]
    pub pools: usize,
    /// Circuits per pool.
    #[arg(long, default_value_t = 1000)]
    pub circuits: usize,
    /// Master seed for circuit sampling.
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Omit ground-truth labels (for the forensic target's pools).
    #[arg(long)]
    pub unlabeled: bool,
    /// Also write the plain and transpiled pool files.
    #[arg(long)]
    pub emit_pools: bool,
    /// Output directory.
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
pub struct TrainArgs {
    /// Which regressor to train.
    #[arg(long, value_enum)]
    pub kind: KindArg,
    /// Dataset directories (comma-separated or repeated).
    #[arg(long, value_delimiter = ',', required = true)]
    pub data: Vec<PathBuf>,
    /// Backend id to exclude from fitting (the forensic target).
    #[arg(long)]
    pub holdout: String,
    /// TOML configuration overriding model/training defaults.
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Checkpoint file to write.
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
pub struct InferArgs {
    /// Node-model checkpoint.
    #[arg(long)]
    pub node: PathBuf,
    /// Edge-model checkpoint.
    #[arg(long)]
    pub edge: PathBuf,
    /// Topology file of the target device.
    #[arg(long)]
    pub topology: PathBuf,
    /// Directory of unlabeled sample files for the target.
    #[arg(long)]
    pub pools: PathBuf,
    /// Error-map file to write.
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
pub struct EvaluateArgs {
    /// Predicted error-map file.
    #[arg(long)]
    pub pred: PathBuf,
    /// Ground truth: a backend file or an error-map file.
    #[arg(long)]
    pub truth: PathBuf,
    /// Output directory for report.json and report.csv.
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
pub struct AblatePoolsArgs {
    /// Node-model checkpoint.
    #[arg(long)]
    pub node: PathBuf,
    /// Edge-model checkpoint.
    #[arg(long)]
    pub edge: PathBuf,
    /// Directory of unlabeled sample files for the target.
    #[arg(long)]
    pub pools: PathBuf,
    /// Ground truth: a backend file or an error-map file.
    #[arg(long)]
    pub truth: PathBuf,
    /// Pool counts to evaluate, e.g. 1,5,20.
    #[arg(long, value_delimiter = ',', required = true)]
    pub counts: Vec<usize>,
    /// Output directory.
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
pub struct AblateBackendsArgs {
    /// Study configuration (TOML).
    #[arg(long)]
    pub config: PathBuf,
    /// Training-set sizes to evaluate, e.g. 1,2,3,4.
    #[arg(long, value_delimiter = ',', required = true)]
    pub ks: Vec<usize>,
    /// Override the study's master seed.
    #[arg(long)]
    pub seed: Option<u64>,
    /// Output directory.
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
pub struct DriftArgs {
    /// Study configuration (TOML).
    #[arg(long)]
    pub config: PathBuf,
    /// Override the study's master seed.
    #[arg(long)]
    pub seed: Option<u64>,
    /// Output directory.
    #[arg(long)]
    pub out: PathBuf,
}

// ---------------------------------------------------------------------
// TOML configuration patches
// ---------------------------------------------------------------------

#[derive(Debug, Default, Clone, Deserialize)]
#[serde(default, deny_unknown_fields)]
struct ModelPatch {
    hidden: Option<usize>,
    rounds: Option<usize>,
    depth: Option<usize>,
    dropout: Option<f64>,
    huber_delta: Option<f64>,
}

impl ModelPatch {
    fn apply(&self, mut cfg: RegressorConfig) -> RegressorConfig {
        if let Some(v) = self.hidden {
            cfg.hidden = v;
        }
        if let Some(v) = self.rounds {
            cfg.rounds = v;
        }
        if let Some(v) = self.depth {
            cfg.depth = v;
        }
        if let Some(v) = self.dropout {
            cfg.dropout = v;
        }
        if let Some(v) = self.huber_delta {
            cfg.huber_delta = v;
        }
        cfg
    }
}

#[derive(Debug, Default, Clone, Deserialize)]
#[serde(default, deny_unknown_fields)]
struct DriftPatch {
    enabled: Option<bool>,
    resample_every: Option<usize>,
    scale_nodes: Option<f64>,
    scale_edges: Option<f64>,
    retranspile: Option<bool>,
}

impl DriftPatch {
    fn apply(&self, mut cfg: DriftTrainCfg) -> DriftTrainCfg {
        if let Some(v) = self.enabled {
            cfg.enabled = v;
        }
        if let Some(v) = self.resample_every {
            cfg.resample_every = v;
        }
        if let Some(v) = self.scale_nodes {
            cfg.scales.scale_nodes = v;
        }
        if let Some(v) = self.scale_edges {
            cfg.scales.scale_edges = v;
        }
        if let Some(v) = self.retranspile {
            cfg.retranspile = v;
        }
        cfg
    }
}

#[derive(Debug, Default, Clone, Deserialize)]
#[serde(default, deny_unknown_fields)]
struct TrainPatch {
    max_epochs: Option<usize>,
    patience: Option<usize>,
    val_split: Option<f64>,
    lr: Option<f64>,
    seed: Option<u64>,
    calibrate: Option<bool>,
    drift: DriftPatch,
}

impl TrainPatch {
    fn apply(&self, mut cfg: TrainConfig) -> TrainConfig {
        if let Some(v) = self.max_epochs {
            cfg.max_epochs = v;
        }
        if let Some(v) = self.patience {
            cfg.patience = v;
        }
        if let Some(v) = self.val_split {
            cfg.val_split = v;
        }
        if let Some(v) = self.lr {
            cfg.adam.lr = v;
        }
        if let Some(v) = self.seed {
            cfg.seed = v;
        }
        if let Some(v) = self.calibrate {
            cfg.calibrate = v;
        }
        cfg.drift = self.drift.apply(cfg.drift);
        cfg
    }
}

/// Train-command configuration file: `[model]` and `[train]` tables of
/// plain key-value overrides on the kind's defaults.
#[derive(Debug, Default, Clone, Deserialize)]
#[serde(default, deny_unknown_fields)]
struct TrainFileCfg {
    model: ModelPatch,
    train: TrainPatch,
}

/// Study configuration file: flat keys plus optional tables, each an
/// override on [`StudyCfg::desk_default`].
#[derive(Debug, Default, Clone, Deserialize)]
#[serde(default, deny_unknown_fields)]
struct StudyFileCfg {
    backends: Option<usize>,
    pools: Option<usize>,
    circuits: Option<usize>,
    master_seed: Option<u64>,
    calibrate_nodes: Option<bool>,
    topology: Option<TopologySpec>,
    sampler: Option<SamplerCfg>,
    node_model: ModelPatch,
    edge_model: ModelPatch,
    train: TrainPatch,
    drift: DriftPatch,
}

fn parse_toml<T: for<'de> Deserialize<'de>>(path: &Path) -> Result<T> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    toml::from_str(&text)
        .map_err(|e| Error::Schema(format!("{} is not a valid config: {e}", path.display())))
}

fn load_study_cfg(path: &Path, seed_flag: Option<u64>) -> Result<StudyCfg> {
    let file: StudyFileCfg = parse_toml(path)?;
    let master_seed = seed_flag.or(file.master_seed).unwrap_or(0);
    let mut cfg = StudyCfg::desk_default(master_seed);
    if let Some(v) = file.backends {
        cfg.backends = v;
    }
    if let Some(v) = file.pools {
        cfg.pools = v;
    }
    if let Some(v) = file.circuits {
        cfg.circuits = v;
    }
    if let Some(v) = file.calibrate_nodes {
        cfg.calibrate_nodes = v;
    }
    if let Some(v) = file.topology {
        cfg.topology = v;
    } else {
        // The default topology's seed tracks the (possibly overridden)
        // master seed.
        cfg.topology = TopologySpec::default_heavy_hex(master_seed);
    }
    if let Some(v) = file.sampler {
        cfg.sampler = v;
    }
    cfg.node_model = file.node_model.apply(cfg.node_model);
    cfg.edge_model = file.edge_model.apply(cfg.edge_model);
    cfg.train = file.train.apply(cfg.train);
    cfg.drift = file.drift.apply(cfg.drift);
    cfg.validate()?;
    Ok(cfg)
}

// ---------------------------------------------------------------------
// Entry points
// ---------------------------------------------------------------------

/// Parse `argv` and run. This is the whole binary behind a testable
/// seam: errors come back typed so tests can assert exit codes.
pub fn run<I, T>(argv: I) -> Result<()>
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(cli) => cli,
        Err(e)
            if matches!(
                e.kind(),
                clap::error::ErrorKind::DisplayHelp | clap::error::ErrorKind::DisplayVersion
            ) =>
        {
            // Help and version are successful outcomes, not errors.
            print!("{e}");
            return Ok(());
        }
        // Everything else is a usage error; keep clap's rendering.
        Err(e) => {
            return Err(Error::InvalidInput(
                e.to_string().trim_start_matches("error: ").trim_end().to_string(),
            ))
        }
    };
    if let Some(n) = cli.threads {
        // Ignore failure: the global pool can only be set once per
        // process (tests call run() repeatedly).
        let _ = rayon::ThreadPoolBuilder::new().num_threads(n).build_global();
    }
    let ctx = Ctx { quiet: cli.quiet, record_timing: cli.record_timing };
    match cli.cmd {
        Cmd::GenBackends(a) => gen_backends_cmd(&ctx, &a),
        Cmd::GenDataset(a) => gen_dataset_cmd(&ctx, &a),
        Cmd::Train(a) => train_cmd(&ctx, &a),
        Cmd::Infer(a) => infer_cmd(&ctx, &a),
        Cmd::Evaluate(a) => evaluate_cmd(&ctx, &a),
        Cmd::AblatePools(a) => ablate_pools_cmd(&ctx, &a),
        Cmd::AblateBackends(a) => ablate_backends_cmd(&ctx, &a),
        Cmd::Drift(a) => drift_cmd(&ctx, &a),
    }
}

/// Process entry: report errors on stderr and translate them to the
/// documented exit codes (0 success, 2 usage, 3 schema/IO, 4 numerical).
pub fn main() {
    if let Err(e) = run(std::env::args_os()) {
        eprintln!("error: {e}");
        std::process::exit(e.exit_code());
    }
}

struct Ctx {
    quiet: bool,
    record_timing: bool,
}

impl Ctx {
    fn say(&self, msg: impl AsRef<str>) {
        if !self.quiet {
            eprintln!("noisescope: {}", msg.as_ref());
        }
    }

    /// Run `f`, recording its wall-clock duration into `manifest` under
    /// `phase` when timing was requested.
    fn timed<R>(
        &self,
        manifest: &mut ExperimentManifest,
        phase: &str,
        f: impl FnOnce() -> Result<R>,
    ) -> Result<R> {
        let start = std::time::Instant::now();
        let r = f()?;
        if self.record_timing {
            let secs = start.elapsed().as_secs_f64();
            manifest
                .timing
                .get_or_insert_with(Default::default)
                .insert(phase.to_string(), secs);
        }
        Ok(r)
    }
}

// ---------------------------------------------------------------------
// gen-backends
// ---------------------------------------------------------------------

fn backend_file_name(i: usize) -> String {
    format!("{}.json", StudyCfg::backend_id(i))
}

fn resolve_topology(a: &GenBackendsArgs) -> Result<TopologySpec> {
    match a.topology {
        TopoKind::Path => Ok(TopologySpec::Path { n: a.qubits }),
        TopoKind::Ring => Ok(TopologySpec::Ring { n: a.qubits }),
        TopoKind::Grid => {
            let (rows, cols) = match (a.rows, a.cols) {
                (Some(r), Some(c)) => (r, c),
                _ => {
                    return Err(Error::InvalidInput(
                        "grid topology needs --rows and --cols".into(),
                    ))
                }
            };
            if rows * cols != a.qubits {
                return Err(Error::InvalidInput(format!(
                    "--qubits {} does not match {rows}x{cols}",
                    a.qubits
                )));
            }
            Ok(TopologySpec::Grid { rows, cols })
        }
        TopoKind::HeavyHexLike => Ok(TopologySpec::HeavyHexLike { n: a.qubits, seed: a.seed }),
    }
}

fn gen_backends_cmd(ctx: &Ctx, a: &GenBackendsArgs) -> Result<()> {
    if a.count == 0 {
        return Err(Error::InvalidInput("--count must be at least 1".into()));
    }
    let spec = resolve_topology(a)?;
    let g = gen_topology(&spec)?;
    let sampler = SamplerCfg::default();
    let mut manifest = ExperimentManifest::new("gen-backends", a.seed);
    manifest.declare_schema("topology", files::TOPOLOGY_SCHEMA);
    manifest.declare_schema("backend", files::BACKEND_SCHEMA);
    manifest.record_config("topology", &spec)?;
    manifest.record_config("sampler", &sampler)?;

    let err_seeds: Vec<u64> = (0..a.count)
        .map(|i| seed::derive(a.seed, "backend-errors", &[i as u64]))
        .collect();
    for (i, &err_seed) in err_seeds.iter().enumerate() {
        manifest.record_seed(&format!("backend-errors/{}", StudyCfg::backend_id(i)), err_seed);
    }
    ctx.timed(&mut manifest, "generate", || {
        save_topology(&a.out.join("topology.json"), &spec, &g)?;
        for (i, &err_seed) in err_seeds.iter().enumerate() {
            let errors = sample_backend(&g, err_seed, &sampler)?;
            let b = BackendSpec {
                id: StudyCfg::backend_id(i),
                topology: spec.clone(),
                graph: g.clone(),
                errors,
                gen_seed: err_seed,
                gen_cfg: sampler.clone(),
            };
            save_backend(&a.out.join(backend_file_name(i)), &b)?;
        }
        Ok(())
    })?;

    manifest.record_output(&a.out, "topology.json")?;
    for i in 0..a.count {
        manifest.record_output(&a.out, &backend_file_name(i))?;
    }
    manifest.save(&a.out.join(MANIFEST_FILE))?;
    ctx.say(format!(
        "wrote {} backends over {} qubits to {}",
        a.count,
        g.n(),
        a.out.display()
    ));
    Ok(())
}

// ---------------------------------------------------------------------
// gen-dataset
// ---------------------------------------------------------------------

fn sample_file_name(p: usize) -> String {
    format!("sample-{p:03}.json")
}

fn gen_dataset_cmd(ctx: &Ctx, a: &GenDatasetArgs) -> Result<()> {
    if a.pools == 0 || a.circuits == 0 {
        return Err(Error::InvalidInput("--pools and --circuits must be at least 1".into()));
    }
    let b = load_backend(&a.backend)?;
    let ccfg = CircuitCfg::for_edge_count(b.graph.edge_count());
    let mut manifest = ExperimentManifest::new("gen-dataset", a.seed);
    manifest.declare_schema("sample", files::FEATURE_SCHEMA);
    manifest.record_input(&a.backend.display().to_string(), &a.backend)?;
    manifest.record_config("circuits", &ccfg)?;
    manifest.record_config(
        "dataset",
        &serde_json::json!({
            "backend_id": b.id,
            "pools": a.pools,
            "circuits": a.circuits,
            "labeled": !a.unlabeled,
        }),
    )?;
    manifest.record_seed("pool-master", a.seed);

    let mut names: Vec<String> = Vec::new();
    ctx.timed(&mut manifest, "generate", || {
        for p in 0..a.pools {
            let pool = gen_pool(b.graph.n(), a.circuits, a.seed, p, &ccfg)?;
            let tp = transpile_pool(&pool, &b.graph, &b.errors)?;
            let labels = if a.unlabeled { None } else { Some(&b.errors) };
            let sample = assemble_sample(&b.id, &b.graph, &tp, labels)?;
            let name = sample_file_name(p);
            save_sample(&a.out.join(&name), &sample)?;
            names.push(name);
            if a.emit_pools {
                let pn = format!("pool-{p:03}.jsonl");
                let tn = format!("transpiled-{p:03}.jsonl");
                save_pool(&a.out.join(&pn), &pool)?;
                save_transpiled(&a.out.join(&tn), &tp)?;
                names.push(pn);
                names.push(tn);
            }
        }
        Ok(())
    })?;

    for name in &names {
        manifest.record_output(&a.out, name)?;
    }
    manifest.save(&a.out.join(MANIFEST_FILE))?;
    ctx.say(format!(
        "wrote {} {} samples for backend {} to {}",
        a.pools,
        if a.unlabeled { "unlabeled" } else { "labeled" },
        b.id,
        a.out.display()
    ));
    Ok(())
}

// ---------------------------------------------------------------------
// train
// ---------------------------------------------------------------------

/// Load every `sample-*.json` in `dir`, sorted by file name.
fn load_sample_dir(dir: &Path) -> Result<Vec<(String, Sample)>> {
    let mut names: Vec<String> = std::fs::read_dir(dir)
        .map_err(|e| Error::io(dir, e))?
        .filter_map(|entry| {
            let name = entry.ok()?.file_name().to_string_lossy().into_owned();
            (name.starts_with("sample-") && name.ends_with(".json")).then_some(name)
        })
        .collect();
    names.sort_unstable();
    names
        .into_iter()
        .map(|name| {
            let path = dir.join(&name);
            Ok((path.display().to_string(), load_sample(&path)?))
        })
        .collect()
}

fn train_cmd(ctx: &Ctx, a: &TrainArgs) -> Result<()> {
    let file_cfg: TrainFileCfg = match &a.config {
        Some(path) => parse_toml(path)?,
        None => TrainFileCfg::default(),
    };
    let kind: TargetKind = a.kind.into();
    let base = match kind {
        TargetKind::Node => RegressorConfig::node_default(),
        TargetKind::Edge => RegressorConfig::edge_default(),
    };
    let model_cfg = file_cfg.model.apply(base);
    let train_cfg = file_cfg.train.apply(TrainConfig::default());

    let mut named = Vec::new();
    for dir in &a.data {
        named.extend(load_sample_dir(dir)?);
    }
    if named.is_empty() {
        return Err(Error::InvalidInput("no sample files found under --data".into()));
    }
    // The holdout must actually be present so the exclusion excludes
    // something; a typo'd id would otherwise silently train on all data.
    if !named.iter().any(|(_, s)| s.backend_id == a.holdout) {
        return Err(Error::InvalidInput(format!(
            "holdout id {:?} does not appear in the data; nothing would be excluded",
            a.holdout
        )));
    }
    let samples: Vec<Sample> = named
        .iter()
        .filter(|(_, s)| s.backend_id != a.holdout)
        .map(|(_, s)| s.clone())
        .collect();
    if samples.is_empty() {
        return Err(Error::InvalidInput(format!(
            "every sample belongs to the holdout {:?}; nothing remains to train on",
            a.holdout
        )));
    }
    ctx.say(format!(
        "training the {:?} regressor on {} samples ({} excluded as holdout {:?})",
        kind,
        samples.len(),
        named.len() - samples.len(),
        a.holdout
    ));

    let mut manifest = ExperimentManifest::new("train", train_cfg.seed);
    manifest.declare_schema("checkpoint", files::CHECKPOINT_SCHEMA);
    manifest.declare_schema("sample", files::FEATURE_SCHEMA);
    manifest.record_config("model", &model_cfg)?;
    manifest.record_config("train", &train_cfg)?;
    manifest.record_seed("train", train_cfg.seed);
    for (name, _) in &named {
        manifest.record_input(name, Path::new(name))?;
    }
    if let Some(cfg_path) = &a.config {
        manifest.record_input(&cfg_path.display().to_string(), cfg_path)?;
    }

    let outcome = ctx.timed(&mut manifest, "train", || {
        train(&samples, Some(&a.holdout), model_cfg, &train_cfg)
    })?;
    save_checkpoint(&a.out, &outcome.checkpoint)?;

    let dir = a.out.parent().map(Path::to_path_buf).unwrap_or_else(|| PathBuf::from("."));
    let ck_name = a
        .out
        .file_name()
        .ok_or_else(|| Error::InvalidInput("--out needs a file name".into()))?
        .to_string_lossy()
        .into_owned();
    manifest.record_output(&dir, &ck_name)?;
    manifest.save(&dir.join(format!("{ck_name}.manifest.json")))?;
    let m = &outcome.checkpoint.manifest;
    ctx.say(format!(
        "stopped after epoch {} (best epoch {}, validation RMSE {:.6e})",
        m.epochs_run, m.best_epoch, m.best_val_rmse
    ));
    Ok(())
}

// ---------------------------------------------------------------------
// infer
// ---------------------------------------------------------------------

fn infer_cmd(ctx: &Ctx, a: &InferArgs) -> Result<()> {
    let node = load_checkpoint(&a.node)?;
    let edge = load_checkpoint(&a.edge)?;
    let (_, g) = load_topology(&a.topology)?;
    let named = load_sample_dir(&a.pools)?;
    if named.is_empty() {
        return Err(Error::InvalidInput("no sample files found under --pools".into()));
    }
    for (name, s) in &named {
        if s.n != g.n() || s.edges != g.edges() {
            return Err(Error::Schema(format!(
                "{name}: sample does not match the declared topology ({} qubits, {} couplings)",
                g.n(),
                g.edge_count()
            )));
        }
    }
    let pools: Vec<Sample> = named.iter().map(|(_, s)| s.clone()).collect();

    let mut manifest = ExperimentManifest::new("infer", 0);
    manifest.declare_schema("errormap", files::ERRORMAP_SCHEMA);
    manifest.record_input(&a.node.display().to_string(), &a.node)?;
    manifest.record_input(&a.edge.display().to_string(), &a.edge)?;
    manifest.record_input(&a.topology.display().to_string(), &a.topology)?;
    for (name, _) in &named {
        manifest.record_input(name, Path::new(name))?;
    }

    let predicted = ctx.timed(&mut manifest, "infer", || infer_holdout(&node, &edge, &pools))?;
    save_errormap(&a.out, &predicted)?;

    let dir = a.out.parent().map(Path::to_path_buf).unwrap_or_else(|| PathBuf::from("."));
    let map_name = a
        .out
        .file_name()
        .ok_or_else(|| Error::InvalidInput("--out needs a file name".into()))?
        .to_string_lossy()
        .into_owned();
    manifest.record_output(&dir, &map_name)?;
    manifest.save(&dir.join(format!("{map_name}.manifest.json")))?;
    ctx.say(format!(
        "reconstructed {} node and {} coupling error rates from {} pools",
        predicted.n_nodes(),
        predicted.n_edges(),
        pools.len()
    ));
    Ok(())
}

// ---------------------------------------------------------------------
// evaluate
// ---------------------------------------------------------------------

/// Load ground truth from either a backend file or an error-map file,
/// returning the map and a label for the report.
fn load_truth(path: &Path) -> Result<(ErrorMap, String)> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    let probe: serde_json::Value = serde_json::from_str(&text)
        .map_err(|e| Error::Schema(format!("{} is malformed: {e}", path.display())))?;
    match probe.get("schema_version").and_then(|v| v.as_str()) {
        Some(files::BACKEND_SCHEMA) => {
            let b = load_backend(path)?;
            Ok((b.errors, b.id))
        }
        Some(files::ERRORMAP_SCHEMA) => {
            Ok((load_errormap(path)?, "errormap".to_string()))
        }
        other => Err(Error::Schema(format!(
            "{}: expected a backend or errormap document, found schema {:?}",
            path.display(),
            other.unwrap_or("<missing>")
        ))),
    }
}

fn evaluate_cmd(ctx: &Ctx, a: &EvaluateArgs) -> Result<()> {
    let pred = load_errormap(&a.pred)?;
    let (truth, label) = load_truth(&a.truth)?;

    let mut manifest = ExperimentManifest::new("evaluate", 0);
    manifest.declare_schema("report", files::REPORT_SCHEMA);
    manifest.record_input(&a.pred.display().to_string(), &a.pred)?;
    manifest.record_input(&a.truth.display().to_string(), &a.truth)?;

    let reports = ctx.timed(&mut manifest, "evaluate", || evaluate(&pred, &truth))?;
    let doc = ReportDoc::new(label, reports);
    save_report(&a.out.join("report.json"), &doc)?;
    save_text(&a.out.join("report.csv"), &report_csv(&doc.reports))?;
    manifest.record_output(&a.out, "report.json")?;
    manifest.record_output(&a.out, "report.csv")?;
    manifest.save(&a.out.join(MANIFEST_FILE))?;
    ctx.say(format!(
        "nodes: rho {:.3}, {:.1}% off, mismatch {:.3}; edges: rho {:.3}, {:.1}% off, mismatch {:.3}",
        doc.reports.nodes.spearman,
        doc.reports.nodes.percent_diff,
        doc.reports.nodes.log_mismatch,
        doc.reports.edges.spearman,
        doc.reports.edges.percent_diff,
        doc.reports.edges.log_mismatch,
    ));
    Ok(())
}

// ---------------------------------------------------------------------
// ablate-pools
// ---------------------------------------------------------------------

fn ablate_pools_cmd(ctx: &Ctx, a: &AblatePoolsArgs) -> Result<()> {
    let node = load_checkpoint(&a.node)?;
    let edge = load_checkpoint(&a.edge)?;
    let named = load_sample_dir(&a.pools)?;
    if named.is_empty() {
        return Err(Error::InvalidInput("no sample files found under --pools".into()));
    }
    let pools: Vec<Sample> = named.iter().map(|(_, s)| s.clone()).collect();
    let (truth, _) = load_truth(&a.truth)?;

    let mut manifest = ExperimentManifest::new("ablate-pools", 0);
    manifest.record_input(&a.node.display().to_string(), &a.node)?;
    manifest.record_input(&a.edge.display().to_string(), &a.edge)?;
    manifest.record_input(&a.truth.display().to_string(), &a.truth)?;
    for (name, _) in &named {
        manifest.record_input(name, Path::new(name))?;
    }
    manifest.record_config("counts", &a.counts)?;

    let rows = ctx.timed(&mut manifest, "ablate", || {
        pool_ablation(&node, &edge, &pools, &truth, &a.counts)
    })?;
    save_doc_rows(&a.out, "ablate-pools", &rows, &pool_ablation_csv(&rows))?;
    manifest.record_output(&a.out, "ablate-pools.json")?;
    manifest.record_output(&a.out, "ablate-pools.csv")?;
    manifest.save(&a.out.join(MANIFEST_FILE))?;
    ctx.say(format!("wrote a {}-row pool ablation to {}", rows.len(), a.out.display()));
    Ok(())
}

/// Write `<stem>.json` (pretty) and `<stem>.csv` for a table.
fn save_doc_rows<T: serde::Serialize>(
    dir: &Path,
    stem: &str,
    rows: &[T],
    csv: &str,
) -> Result<()> {
    let json = serde_json::json!({
        "schema_version": files::REPORT_SCHEMA,
        "table": stem,
        "rows": rows,
    });
    let mut text = serde_json::to_string_pretty(&json)
        .map_err(|e| Error::Schema(format!("serialization failed: {e}")))?;
    text.push('\n');
    save_text(&dir.join(format!("{stem}.json")), &text)?;
    save_text(&dir.join(format!("{stem}.csv")), csv)
}

// ---------------------------------------------------------------------
// ablate-backends
// ---------------------------------------------------------------------

fn ablate_backends_cmd(ctx: &Ctx, a: &AblateBackendsArgs) -> Result<()> {
    let cfg = load_study_cfg(&a.config, a.seed)?;
    let mut manifest = ExperimentManifest::new("ablate-backends", cfg.master_seed);
    manifest.record_input(&a.config.display().to_string(), &a.config)?;
    manifest.record_config("study", &cfg)?;
    manifest.record_config("ks", &a.ks)?;
    record_study_seeds(&mut manifest, &cfg);
    for &k in &a.ks {
        manifest.record_seed(
            &format!("ablate-train/k{k}/node"),
            seed::derive(cfg.master_seed, "ablate-train", &[k as u64, 0]),
        );
        manifest.record_seed(
            &format!("ablate-train/k{k}/edge"),
            seed::derive(cfg.master_seed, "ablate-train", &[k as u64, 1]),
        );
    }

    ctx.say(format!(
        "building study data ({} backends, {} pools x {} circuits)…",
        cfg.backends, cfg.pools, cfg.circuits
    ));
    let rows = ctx.timed(&mut manifest, "ablate", || {
        let data = build_study_data(&cfg)?;
        ctx.say(format!("retraining for k in {:?}…", a.ks));
        ablate_backends(&cfg, &data, &a.ks)
    })?;
    save_doc_rows(&a.out, "ablate-backends", &rows, &backend_ablation_csv(&rows))?;
    manifest.record_output(&a.out, "ablate-backends.json")?;
    manifest.record_output(&a.out, "ablate-backends.csv")?;
    manifest.save(&a.out.join(MANIFEST_FILE))?;
    ctx.say(format!("wrote a {}-row backend ablation to {}", rows.len(), a.out.display()));
    Ok(())
}

fn record_study_seeds(manifest: &mut ExperimentManifest, cfg: &StudyCfg) {
    manifest.record_seed("train/node", seed::derive(cfg.master_seed, "train", &[0]));
    manifest.record_seed("train/edge", seed::derive(cfg.master_seed, "train", &[1]));
    for i in 0..cfg.backends {
        manifest.record_seed(
            &format!("backend-errors/{}", StudyCfg::backend_id(i)),
            seed::derive(cfg.master_seed, "backend-errors", &[i as u64]),
        );
        manifest.record_seed(
            &format!("circuits/{}", StudyCfg::backend_id(i)),
            seed::derive(cfg.master_seed, "circuits", &[i as u64]),
        );
    }
}

// ---------------------------------------------------------------------
// drift
// ---------------------------------------------------------------------

fn drift_cmd(ctx: &Ctx, a: &DriftArgs) -> Result<()> {
    let cfg = load_study_cfg(&a.config, a.seed)?;
    let mut manifest = ExperimentManifest::new("drift", cfg.master_seed);
    manifest.record_input(&a.config.display().to_string(), &a.config)?;
    manifest.record_config("study", &cfg)?;
    manifest.record_config("drift", &cfg.drift)?;
    record_study_seeds(&mut manifest, &cfg);
    for p in 0..cfg.pools {
        manifest.record_seed(
            &format!("drift-infer/{p:03}"),
            seed::derive(cfg.master_seed, "drift-infer", &[p as u64]),
        );
    }

    ctx.say(format!(
        "running the study twice (drift off/on, scales {:e}/{:e})…",
        cfg.drift.scales.scale_nodes, cfg.drift.scales.scale_edges
    ));
    let ex = ctx.timed(&mut manifest, "experiment", || drift_experiment(&cfg))?;

    let mut names = Vec::new();
    for (half, run) in [("static", &ex.static_run), ("drift", &ex.drifted_run)] {
        let map_name = format!("errormap-{half}.json");
        let report_name = format!("report-{half}.json");
        let csv_name = format!("report-{half}.csv");
        save_errormap(&a.out.join(&map_name), &run.predicted)?;
        save_report(
            &a.out.join(&report_name),
            &ReportDoc::new(run.data.holdout_id.clone(), run.reports.clone()),
        )?;
        save_text(&a.out.join(&csv_name), &report_csv(&run.reports))?;
        names.extend([map_name, report_name, csv_name]);
    }
    for name in &names {
        manifest.record_output(&a.out, name)?;
    }
    manifest.save(&a.out.join(MANIFEST_FILE))?;
    report_drift_delta(ctx, &ex.static_run, &ex.drifted_run);
    Ok(())
}

fn report_drift_delta(ctx: &Ctx, s: &StudyOutcome, d: &StudyOutcome) {
    ctx.say(format!(
        "node rho {:.3} -> {:.3}, edge rho {:.3} -> {:.3} under drift",
        s.reports.nodes.spearman,
        d.reports.nodes.spearman,
        s.reports.edges.spearman,
        d.reports.edges.spearman,
    ));
}

#[cfg(test)]
mod tests {
    use super::*;

    fn tmpdir(tag: &str) -> PathBuf {
        let dir =
            std::env::temp_dir().join(format!("noisescope-cli-{tag}-{}", std::process::id()));
        let _ = std::fs::remove_dir_all(&dir);
        std::fs::create_dir_all(&dir).unwrap();
        dir
    }

    fn runv(args: &[&str]) -> Result<()> {
        let mut argv = vec!["noisescope", "--quiet"];
        argv.extend_from_slice(args);
        run(argv)
    }

    /// Digest map of every file in a directory (non-recursive).
    fn dir_digests(dir: &Path) -> std::collections::BTreeMap<String, String> {
        let mut out = std::collections::BTreeMap::new();
        for entry in std::fs::read_dir(dir).unwrap() {
            let entry = entry.unwrap();
            if entry.file_type().unwrap().is_file() {
                let name = entry.file_name().to_string_lossy().into_owned();
                out.insert(name, files::file_digest(&entry.path()).unwrap());
            }
        }
        out
    }

    #[test]
    fn gen_backends_writes_verifiable_identical_files() {
        let dir = tmpdir("genb");
        let out = dir.join("fleet");
        let args = [
            "gen-backends",
            "--count",
            "3",
            "--qubits",
            "12",
            "--topology",
            "heavy-hex-like",
            "--seed",
            "9",
            "--out",
        ];
        let mut argv: Vec<&str> = args.to_vec();
        let out_s = out.display().to_string();
        argv.push(&out_s);
        runv(&argv).unwrap();
        assert!(out.join("topology.json").exists());
        assert!(out.join("b00.json").exists());
        assert!(out.join("b02.json").exists());
        files::verify_manifest(&out.join(MANIFEST_FILE)).unwrap();
        let first = dir_digests(&out);

        // Rerun with the same flags: byte-identical files.
        runv(&argv).unwrap();
        assert_eq!(first, dir_digests(&out));

        // Distinct backends, shared topology.
        let b0 = load_backend(&out.join("b00.json")).unwrap();
        let b1 = load_backend(&out.join("b01.json")).unwrap();
        assert_eq!(b0.graph.edges(), b1.graph.edges());
        assert_ne!(b0.errors, b1.errors);
    }

    #[test]
    fn count_zero_is_a_usage_error() {
        let dir = tmpdir("genb0");
        let out = dir.join("x").display().to_string();
        let err = runv(&["gen-backends", "--count", "0", "--out", &out]).unwrap_err();
        assert_eq!(err.exit_code(), 2);
    }

    #[test]
    fn unknown_flags_and_missing_args_are_usage_errors() {
        assert_eq!(runv(&["gen-backends", "--frobnicate"]).unwrap_err().exit_code(), 2);
        assert_eq!(runv(&["train"]).unwrap_err().exit_code(), 2);
        assert_eq!(runv(&["no-such-command"]).unwrap_err().exit_code(), 2);
    }

    /// Full file-based walk: fleet → datasets → train both kinds →
    /// infer → evaluate, at miniature scale.
    #[test]
    fn full_command_pipeline_round_trips() {
        let dir = tmpdir("e2e");
        let fleet = dir.join("fleet").display().to_string();
        runv(&[
            "gen-backends", "--count", "3", "--qubits", "9", "--topology", "grid", "--rows",
            "3", "--cols", "3", "--seed", "4", "--out", &fleet,
        ])
        .unwrap();

        // Labeled datasets for every backend, unlabeled for the target.
        let mut data_dirs = Vec::new();
        for i in 0..3 {
            let ds = dir.join(format!("data-b{i:02}")).display().to_string();
            runv(&[
                "gen-dataset",
                "--backend",
                &format!("{fleet}/b{i:02}.json"),
                "--pools",
                "4",
                "--circuits",
                "5",
                "--seed",
                &format!("{}", 100 + i),
                "--out",
                &ds,
            ])
            .unwrap();
            data_dirs.push(ds);
        }
        let target = dir.join("target-pools").display().to_string();
        runv(&[
            "gen-dataset",
            "--backend",
            &format!("{fleet}/b02.json"),
            "--pools",
            "4",
            "--circuits",
            "5",
            "--seed",
            "102",
            "--unlabeled",
            "--out",
            &target,
        ])
        .unwrap();
        let unlabeled = load_sample(&dir.join("target-pools/sample-000.json")).unwrap();
        assert!(unlabeled.labels.is_none());

        // Train both regressors with a tiny config file.
        let cfg_path = dir.join("train.toml");
        std::fs::write(
            &cfg_path,
            "[model]\nhidden = 8\ndropout = 0.0\n\n[train]\nmax_epochs = 3\npatience = 2\n",
        )
        .unwrap();
        let all_data = data_dirs.join(",");
        let node_ck = dir.join("node.json").display().to_string();
        let edge_ck = dir.join("edge.json").display().to_string();
        for (kind, out) in [("node", &node_ck), ("edge", &edge_ck)] {
            runv(&[
                "train", "--kind", kind, "--data", &all_data, "--holdout", "b02", "--config",
                cfg_path.to_str().unwrap(), "--out", out,
            ])
            .unwrap();
        }
        let ck = load_checkpoint(Path::new(&node_ck)).unwrap();
        assert_eq!(ck.manifest.kind, TargetKind::Node);
        assert_eq!(ck.manifest.backend_ids, vec!["b00".to_string(), "b01".to_string()]);

        // Infer the target map and evaluate it against the truth.
        let map_out = dir.join("predicted.json").display().to_string();
        runv(&[
            "infer",
            "--node",
            &node_ck,
            "--edge",
            &edge_ck,
            "--topology",
            &format!("{fleet}/topology.json"),
            "--pools",
            &target,
            "--out",
            &map_out,
        ])
        .unwrap();
        let predicted = load_errormap(Path::new(&map_out)).unwrap();
        assert_eq!(predicted.n_nodes(), 9);
        assert!(predicted.y_nodes().iter().all(|&y| y > 0.0));

        let eval_out = dir.join("eval").display().to_string();
        runv(&[
            "evaluate", "--pred", &map_out, "--truth", &format!("{fleet}/b02.json"), "--out",
            &eval_out,
        ])
        .unwrap();
        let report = files::load_report(&dir.join("eval/report.json")).unwrap();
        assert_eq!(report.label, "b02");
        assert!(report.reports.nodes.spearman.abs() <= 1.0);
        assert!(dir.join("eval/report.csv").exists());
        files::verify_manifest(&dir.join("eval").join(MANIFEST_FILE)).unwrap();

        // Self-evaluation is the exact fixed point through the files.
        let self_out = dir.join("self-eval").display().to_string();
        runv(&[
            "evaluate",
            "--pred",
            &map_out,
            "--truth",
            &map_out,
            "--out",
            &self_out,
        ])
        .unwrap();
        let self_report = files::load_report(&dir.join("self-eval/report.json")).unwrap();
        assert_eq!(self_report.reports.nodes.spearman, 1.0);
        assert_eq!(self_report.reports.edges.percent_diff, 0.0);

        // Pool ablation over the same artifacts: a 2-row table.
        let ab_out = dir.join("ablate").display().to_string();
        runv(&[
            "ablate-pools", "--node", &node_ck, "--edge", &edge_ck, "--pools", &target,
            "--truth", &format!("{fleet}/b02.json"), "--counts", "1,4", "--out", &ab_out,
        ])
        .unwrap();
        let csv = std::fs::read_to_string(dir.join("ablate/ablate-pools.csv")).unwrap();
        assert_eq!(csv.lines().count(), 3);
        assert!(csv.starts_with("pools,"));

        // Training on data that lacks the holdout id is refused, as is
        // training once everything was excluded.
        let err = runv(&[
            "train", "--kind", "node", "--data", &all_data, "--holdout", "zz", "--out",
            &dir.join("bad.json").display().to_string(),
        ])
        .unwrap_err();
        assert_eq!(err.exit_code(), 2, "{err}");
        let only_holdout = dir.join("data-b00").display().to_string();
        let err = runv(&[
            "train", "--kind", "node", "--data", &only_holdout, "--holdout", "b00", "--out",
            &dir.join("bad.json").display().to_string(),
        ])
        .unwrap_err();
        assert!(err.to_string().contains("nothing remains"), "{err}");
    }

    #[test]
    fn dataset_and_pool_emission_round_trip() {
        let dir = tmpdir("emit");
        let fleet = dir.join("fleet").display().to_string();
        runv(&[
            "gen-backends", "--count", "1", "--qubits", "5", "--topology", "ring", "--seed",
            "3", "--out", &fleet,
        ])
        .unwrap();
        let ds = dir.join("ds").display().to_string();
        runv(&[
            "gen-dataset",
            "--backend",
            &format!("{fleet}/b00.json"),
            "--pools",
            "2",
            "--circuits",
            "3",
            "--seed",
            "77",
            "--emit-pools",
            "--out",
            &ds,
        ])
        .unwrap();
        // P=2, M=3: two samples, each built from 3 circuits.
        let p0 = files::load_pool(&dir.join("ds/pool-000.jsonl")).unwrap();
        let p1 = files::load_pool(&dir.join("ds/pool-001.jsonl")).unwrap();
        assert_eq!(p0.circuits.len(), 3);
        assert_eq!(p1.pool_index, 1);
        let tp = files::load_transpiled(&dir.join("ds/transpiled-000.jsonl")).unwrap();
        assert_eq!(tp.circuits.len(), 3);
        let s0 = load_sample(&dir.join("ds/sample-000.json")).unwrap();
        assert_eq!(s0.backend_id, "b00");
        assert_eq!(s0.pool_index, 0);
        files::verify_manifest(&dir.join("ds").join(MANIFEST_FILE)).unwrap();

        // Deleting outputs and rerunning reproduces identical digests.
        let before = dir_digests(&dir.join("ds"));
        std::fs::remove_dir_all(dir.join("ds")).unwrap();
        runv(&[
            "gen-dataset",
            "--backend",
            &format!("{fleet}/b00.json"),
            "--pools",
            "2",
            "--circuits",
            "3",
            "--seed",
            "77",
            "--emit-pools",
            "--out",
            &ds,
        ])
        .unwrap();
        assert_eq!(before, dir_digests(&dir.join("ds")));
    }

    #[test]
    fn study_config_files_apply_overrides() {
        let dir = tmpdir("studycfg");
        let path = dir.join("study.toml");
        std::fs::write(
            &path,
            r#"
backends = 3
pools = 2
circuits = 4
master_seed = 11

[topology]
kind = "grid"
rows = 3
cols = 3

[node_model]
hidden = 8

[train]
max_epochs = 3
lr = 0.002

[drift]
enabled = true
scale_nodes = 0.0
scale_edges = 0.0
"#,
        )
        .unwrap();
        let cfg = load_study_cfg(&path, None).unwrap();
        assert_eq!(cfg.backends, 3);
        assert_eq!(cfg.pools, 2);
        assert_eq!(cfg.master_seed, 11);
        assert_eq!(cfg.topology, TopologySpec::Grid { rows: 3, cols: 3 });
        assert_eq!(cfg.node_model.hidden, 8);
        assert_eq!(cfg.edge_model.hidden, 64);
        assert_eq!(cfg.train.max_epochs, 3);
        assert_eq!(cfg.train.adam.lr, 0.002);
        assert!(cfg.drift.enabled);
        assert_eq!(cfg.drift.scales.scale_nodes, 0.0);

        // The --seed flag wins over the file.
        let cfg2 = load_study_cfg(&path, Some(99)).unwrap();
        assert_eq!(cfg2.master_seed, 99);

        // Typos are schema errors, not silent defaults.
        std::fs::write(&path, "backend = 3\n").unwrap();
        let err = load_study_cfg(&path, None).unwrap_err();
        assert_eq!(err.exit_code(), 3);
    }

    #[test]
    fn drift_command_with_zero_scales_writes_identical_halves() {
        let dir = tmpdir("driftcmd");
        let path = dir.join("study.toml");
        std::fs::write(
            &path,
            r#"
backends = 3
pools = 2
circuits = 4
master_seed = 5

[topology]
kind = "grid"
rows = 3
cols = 3

[node_model]
hidden = 8
dropout = 0.0

[edge_model]
hidden = 8
dropout = 0.0

[train]
max_epochs = 2
patience = 2

[drift]
scale_nodes = 0.0
scale_edges = 0.0
"#,
        )
        .unwrap();
        let out = dir.join("out").display().to_string();
        runv(&["drift", "--config", path.to_str().unwrap(), "--out", &out]).unwrap();
        let stat = std::fs::read(dir.join("out/report-static.json")).unwrap();
        let drft = std::fs::read(dir.join("out/report-drift.json")).unwrap();
        assert_eq!(stat, drft);
        let m1 = std::fs::read(dir.join("out/errormap-static.json")).unwrap();
        let m2 = std::fs::read(dir.join("out/errormap-drift.json")).unwrap();
        assert_eq!(m1, m2);
        files::verify_manifest(&dir.join("out").join(MANIFEST_FILE)).unwrap();
    }

    #[test]
    fn ablate_backends_command_writes_one_row_per_k() {
        let dir = tmpdir("ablateb");
        let path = dir.join("study.toml");
        std::fs::write(
            &path,
            r#"
backends = 3
pools = 2
circuits = 4
master_seed = 6

[topology]
kind = "grid"
rows = 3
cols = 3

[node_model]
hidden = 8
dropout = 0.0

[edge_model]
hidden = 8
dropout = 0.0

[train]
max_epochs = 2
patience = 2
"#,
        )
        .unwrap();
        let out = dir.join("out").display().to_string();
        runv(&[
            "ablate-backends", "--config", path.to_str().unwrap(), "--ks", "1,2", "--out",
            &out,
        ])
        .unwrap();
        let csv = std::fs::read_to_string(dir.join("out/ablate-backends.csv")).unwrap();
        assert_eq!(csv.lines().count(), 3);
        assert!(csv.lines().nth(1).unwrap().starts_with("1,"));
        assert!(csv.lines().nth(2).unwrap().starts_with("2,"));
        files::verify_manifest(&dir.join("out").join(MANIFEST_FILE)).unwrap();
    }
}
