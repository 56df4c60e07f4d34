//! Orchestration of a full holdout study: synthesize a fleet of
//! backends over one topology, build labeled pools for the training
//! backends and unlabeled pools for the holdout, train both regressors,
//! reconstruct the holdout's error map, and score it — plus the pool
//! ablation, backend ablation, and drift experiments built on top.

use rand::seq::SliceRandom;
use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;
use std::sync::atomic::{AtomicUsize, Ordering};

use crate::backend::{apply_drift, sample_backend, BackendSpec, ErrorMap, SamplerCfg};
use crate::circuit::{gen_pool, CircuitCfg, CircuitPool};
use crate::error::{Error, Result};
use crate::features::{assemble_sample, Sample};
use crate::gnn::{RegressorConfig, TargetKind};
use crate::graph::{gen_topology, CouplingGraph, TopologySpec};
use crate::pipeline::infer::infer_holdout;
use crate::pipeline::metrics::{evaluate, ComponentReports};
use crate::pipeline::train::{
    train_with_sources, DriftTrainCfg, RetranspileCtx, TrainConfig, TrainOutcome,
};
use crate::seed;
use crate::transpiler::transpile_pool;

/// An error map that counts every access, proving after the fact that
/// nothing read the holdout truth before evaluation.
#[derive(Debug)]
pub struct GuardedErrorMap {
    inner: ErrorMap,
    reads: AtomicUsize,
}

impl GuardedErrorMap {
    pub fn new(inner: ErrorMap) -> Self {
        GuardedErrorMap { inner, reads: AtomicUsize::new(0) }
    }

    /// Access the map, leaving a read on the counter.
    pub fn read(&self) -> &ErrorMap {
        self.reads.fetch_add(1, Ordering::SeqCst);
        &self.inner
    }

    /// How many times the map has been read so far.
    pub fn reads(&self) -> usize {
        self.reads.load(Ordering::SeqCst)
    }
}

/// Complete configuration of one holdout study.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StudyCfg {
    /// Fleet size; the last backend is the holdout.
    pub backends: usize,
    /// Shared coupling topology of the fleet.
    pub topology: TopologySpec,
    /// Circuit pools per backend.
    pub pools: usize,
    /// Circuits per pool.
    pub circuits: usize,
    pub sampler: SamplerCfg,
    pub node_model: RegressorConfig,
    pub edge_model: RegressorConfig,
    /// Training hyperparameters; `seed` and `drift` are overridden per
    /// model from the study seed and the study drift block.
    pub train: TrainConfig,
    /// Study-level drift: when enabled, each training backend's map is
    /// perturbed on the training schedule (labels, and with
    /// `retranspile` the usage features too) and each holdout pool is
    /// transpiled under a fresh perturbation of the holdout map. Truth
    /// stays undrifted.
    pub drift: DriftTrainCfg,
    pub master_seed: u64,
    /// Fit the linear calibration for the node model too (the edge model
    /// is always calibrated).
    pub calibrate_nodes: bool,
}

impl StudyCfg {
    /// Desk-scale default: 5 heavy-hex-like 27-qubit backends, 20 pools
    /// of 100 circuits, last backend held out.
    pub fn desk_default(master_seed: u64) -> Self {
        StudyCfg {
            backends: 5,
            topology: TopologySpec::default_heavy_hex(master_seed),
            pools: 20,
            circuits: 100,
            sampler: SamplerCfg::default(),
            node_model: RegressorConfig::node_default(),
            edge_model: RegressorConfig::edge_default(),
            train: TrainConfig::default(),
            drift: DriftTrainCfg::default(),
            master_seed,
            calibrate_nodes: true,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.backends < 2 {
            return Err(Error::InvalidInput(format!(
                "a study needs at least 2 backends (1 training + holdout), got {}",
                self.backends
            )));
        }
        if self.pools == 0 || self.circuits == 0 {
            return Err(Error::InvalidInput("pools and circuits must be at least 1".into()));
        }
        if self.node_model.kind != TargetKind::Node || self.edge_model.kind != TargetKind::Edge {
            return Err(Error::InvalidInput("study model configs have mismatched targets".into()));
        }
        Ok(())
    }

    pub fn backend_id(i: usize) -> String {
        format!("b{i:02}")
    }
}

/// Everything a study derives from its configuration before training.
pub struct StudyData {
    pub graph: CouplingGraph,
    /// Training backends with their sampled error maps.
    pub train_backends: Vec<BackendSpec>,
    pub holdout_id: String,
    /// Labeled, unstandardized samples from the training backends.
    pub train_samples: Vec<Sample>,
    /// Unlabeled samples of the holdout backend, one per pool.
    pub holdout_pools: Vec<Sample>,
    /// The holdout's true error map behind the read counter.
    pub holdout_truth: GuardedErrorMap,
    /// Logical circuits of every training pool, keyed by
    /// `(backend id, pool index)` — the raw material drift
    /// re-transpilation works from.
    pub train_pools: BTreeMap<(String, usize), CircuitPool>,
}

/// Generate the fleet, circuits, transpilations, and samples of a study.
pub fn build_study_data(cfg: &StudyCfg) -> Result<StudyData> {
    cfg.validate()?;
    let graph = gen_topology(&cfg.topology)?;
    let ccfg = CircuitCfg::for_edge_count(graph.edge_count());
    let holdout_idx = cfg.backends - 1;

    let mut train_backends = Vec::new();
    let mut train_samples = Vec::new();
    let mut train_pools = BTreeMap::new();
    let mut holdout_pools = Vec::new();
    let mut holdout_truth = None;

    for i in 0..cfg.backends {
        let id = StudyCfg::backend_id(i);
        let err_seed = seed::derive(cfg.master_seed, "backend-errors", &[i as u64]);
        let errors = sample_backend(&graph, err_seed, &cfg.sampler)?;
        let pool_master = seed::derive(cfg.master_seed, "circuits", &[i as u64]);
        let is_holdout = i == holdout_idx;

        for p in 0..cfg.pools {
            let pool = gen_pool(graph.n(), cfg.circuits, pool_master, p, &ccfg)?;
            // Under drift, each holdout pool sees a freshly perturbed map
            // at transpile time, emulating pools collected while the
            // hardware slowly wanders.
            let tp = if is_holdout && cfg.drift.enabled {
                let snap_seed = seed::derive(cfg.master_seed, "drift-infer", &[p as u64]);
                let drifted = apply_drift(&errors, snap_seed, &cfg.drift.scales);
                transpile_pool(&pool, &graph, &drifted)?
            } else {
                transpile_pool(&pool, &graph, &errors)?
            };
            let labels = if is_holdout { None } else { Some(&errors) };
            let sample = assemble_sample(&id, &graph, &tp, labels)?;
            if is_holdout {
                holdout_pools.push(sample);
            } else {
                train_samples.push(sample);
                train_pools.insert((id.clone(), p), pool);
            }
        }

        if is_holdout {
            holdout_truth = Some(GuardedErrorMap::new(errors));
        } else {
            train_backends.push(BackendSpec {
                id,
                topology: cfg.topology.clone(),
                graph: graph.clone(),
                errors,
                gen_seed: err_seed,
                gen_cfg: cfg.sampler.clone(),
            });
        }
    }

    Ok(StudyData {
        graph,
        train_backends,
        holdout_id: StudyCfg::backend_id(holdout_idx),
        train_samples,
        holdout_pools,
        holdout_truth: holdout_truth.expect("holdout generated"),
        train_pools,
    })
}

impl StudyData {
    /// Borrow the retained circuits as the context drift
    /// re-transpilation needs.
    pub fn retranspile_ctx(&self) -> RetranspileCtx<'_> {
        RetranspileCtx {
            graph: &self.graph,
            pools: self.train_pools.iter().map(|(k, v)| (k.clone(), v)).collect(),
        }
    }
}

/// One complete study run.
pub struct StudyOutcome {
    pub cfg: StudyCfg,
    pub data: StudyData,
    pub node: TrainOutcome,
    pub edge: TrainOutcome,
    pub predicted: ErrorMap,
    pub reports: ComponentReports,
    /// Reads of the holdout truth observed before evaluation; always 0.
    pub reads_before_eval: usize,
}

fn train_configs(cfg: &StudyCfg) -> (TrainConfig, TrainConfig) {
    let node = TrainConfig {
        seed: seed::derive(cfg.master_seed, "train", &[0]),
        drift: cfg.drift,
        calibrate: cfg.calibrate_nodes,
        ..cfg.train.clone()
    };
    let edge = TrainConfig {
        seed: seed::derive(cfg.master_seed, "train", &[1]),
        drift: cfg.drift,
        calibrate: true,
        ..cfg.train.clone()
    };
    (node, edge)
}

/// Run one holdout study end to end.
pub fn run_study(cfg: &StudyCfg) -> Result<StudyOutcome> {
    let data = build_study_data(cfg)?;
    let (node_tc, edge_tc) = train_configs(cfg);
    let ctx = data.retranspile_ctx();
    let (node, edge) = rayon::join(
        || {
            train_with_sources(
                &data.train_samples,
                Some(&data.holdout_id),
                cfg.node_model,
                &node_tc,
                Some(&ctx),
            )
        },
        || {
            train_with_sources(
                &data.train_samples,
                Some(&data.holdout_id),
                cfg.edge_model,
                &edge_tc,
                Some(&ctx),
            )
        },
    );
    let (node, edge) = (node?, edge?);
    let predicted = infer_holdout(&node.checkpoint, &edge.checkpoint, &data.holdout_pools)?;
    let reads_before_eval = data.holdout_truth.reads();
    if reads_before_eval != 0 {
        return Err(Error::InvalidInput(format!(
            "leakage: holdout truth was read {reads_before_eval} times before evaluation"
        )));
    }
    let reports = evaluate(&predicted, data.holdout_truth.read())?;
    Ok(StudyOutcome { cfg: cfg.clone(), data, node, edge, predicted, reports, reads_before_eval })
}

/// One row of the pool-count ablation.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PoolAblationRow {
    pub pools: usize,
    pub mismatch_nodes: f64,
    pub mismatch_edges: f64,
}

/// Re-run inference with the first `count` pools for each count, against
/// frozen checkpoints. Counts must be within the available pools.
pub fn pool_ablation(
    node: &crate::pipeline::train::Checkpoint,
    edge: &crate::pipeline::train::Checkpoint,
    pools: &[Sample],
    truth: &ErrorMap,
    counts: &[usize],
) -> Result<Vec<PoolAblationRow>> {
    counts
        .iter()
        .map(|&count| {
            if count == 0 || count > pools.len() {
                return Err(Error::InvalidInput(format!(
                    "pool ablation count {count} outside 1..={}",
                    pools.len()
                )));
            }
            let pred = infer_holdout(node, edge, &pools[..count])?;
            let reports = evaluate(&pred, truth)?;
            Ok(PoolAblationRow {
                pools: count,
                mismatch_nodes: reports.nodes.log_mismatch,
                mismatch_edges: reports.edges.log_mismatch,
            })
        })
        .collect()
}

/// Pool ablation over a finished study: training untouched, inference
/// repeated on prefixes of the holdout pools.
pub fn ablate_pools(outcome: &StudyOutcome, counts: &[usize]) -> Result<Vec<PoolAblationRow>> {
    pool_ablation(
        &outcome.node.checkpoint,
        &outcome.edge.checkpoint,
        &outcome.data.holdout_pools,
        outcome.data.holdout_truth.read(),
        counts,
    )
}

/// One row of the training-backend-count ablation.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BackendAblationRow {
    pub k: usize,
    pub backend_ids: Vec<String>,
    pub mismatch_nodes: f64,
    pub mismatch_edges: f64,
}

/// Retrain both models on `k` training backends (selection order fixed
/// by the study seed) for each `k`, and score the holdout reconstruction.
pub fn ablate_backends(
    cfg: &StudyCfg,
    data: &StudyData,
    ks: &[usize],
) -> Result<Vec<BackendAblationRow>> {
    let mut ids: Vec<String> = data.train_backends.iter().map(|b| b.id.clone()).collect();
    ids.sort_unstable();
    let mut rng = seed::rng(cfg.master_seed, "ablate-select", &[]);
    ids.shuffle(&mut rng);

    ks.iter()
        .map(|&k| {
            if k == 0 || k > ids.len() {
                return Err(Error::InvalidInput(format!(
                    "backend ablation k={k} outside 1..={}",
                    ids.len()
                )));
            }
            let mut selected = ids[..k].to_vec();
            selected.sort_unstable();
            let subset: Vec<Sample> = data
                .train_samples
                .iter()
                .filter(|s| selected.contains(&s.backend_id))
                .cloned()
                .collect();
            let (mut node_tc, mut edge_tc) = train_configs(cfg);
            node_tc.seed = seed::derive(cfg.master_seed, "ablate-train", &[k as u64, 0]);
            edge_tc.seed = seed::derive(cfg.master_seed, "ablate-train", &[k as u64, 1]);
            let ctx = data.retranspile_ctx();
            let (node, edge) = rayon::join(
                || {
                    train_with_sources(
                        &subset,
                        Some(&data.holdout_id),
                        cfg.node_model,
                        &node_tc,
                        Some(&ctx),
                    )
                },
                || {
                    train_with_sources(
                        &subset,
                        Some(&data.holdout_id),
                        cfg.edge_model,
                        &edge_tc,
                        Some(&ctx),
                    )
                },
            );
            let (node, edge) = (node?, edge?);
            let pred =
                infer_holdout(&node.checkpoint, &edge.checkpoint, &data.holdout_pools)?;
            let reports = evaluate(&pred, data.holdout_truth.read())?;
            Ok(BackendAblationRow {
                k,
                backend_ids: selected,
                mismatch_nodes: reports.nodes.log_mismatch,
                mismatch_edges: reports.edges.log_mismatch,
            })
        })
        .collect()
}

/// The same study with drift off and on, side by side.
pub struct DriftExperiment {
    pub static_run: StudyOutcome,
    pub drifted_run: StudyOutcome,
}

/// Run the study twice — drift disabled, then enabled with the
/// configured scales — so their reports can be compared. Both runs score
/// against the same undrifted truth.
pub fn drift_experiment(cfg: &StudyCfg) -> Result<DriftExperiment> {
    let mut static_cfg = cfg.clone();
    static_cfg.drift.enabled = false;
    let mut drift_cfg = cfg.clone();
    drift_cfg.drift.enabled = true;
    let (static_run, drifted_run) =
        rayon::join(|| run_study(&static_cfg), || run_study(&drift_cfg));
    Ok(DriftExperiment { static_run: static_run?, drifted_run: drifted_run? })
}
