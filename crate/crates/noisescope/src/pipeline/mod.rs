//! End-to-end forensic pipeline: training with early stopping and
//! optional noise drift, linear calibration, holdout inference by pool
//! averaging, evaluation metrics, and the study orchestration behind the
//! ablation and drift experiments.

pub mod infer;
pub mod metrics;
pub mod study;
pub mod train;

pub use infer::{infer_holdout, pool_mean};
pub use metrics::{
    average_ranks, eval_component, evaluate, spearman, worst_components, ComponentReports,
    EvalReport, TOP_K,
};
pub use study::{
    ablate_backends, ablate_pools, build_study_data, drift_experiment, pool_ablation, run_study,
    BackendAblationRow, DriftExperiment, GuardedErrorMap, PoolAblationRow, StudyCfg, StudyData,
    StudyOutcome,
};
pub use train::{
    fit_linear_calibration, train, train_with_sources, Checkpoint, DriftTrainCfg, EarlyStopper,
    LinearCalibration, ReferenceEpochs, RetranspileCtx, StopDecision, TrainConfig, TrainManifest,
    TrainOutcome, ValPrediction,
};

/// Small, fast fixtures shared by the pipeline test modules.
#[cfg(test)]
pub(crate) mod testkit {
    use crate::backend::{sample_backend, SamplerCfg};
    use crate::circuit::{gen_pool, CircuitCfg, CircuitPool};
    use crate::features::{assemble_sample, Sample};
    use crate::gnn::{RegressorConfig, TargetKind};
    use crate::graph::{gen_topology, CouplingGraph, TopologySpec};
    use crate::pipeline::train::TrainConfig;
    use crate::seed;
    use crate::transpiler::transpile_pool;
    use std::collections::BTreeMap;

    /// Labeled 3x3-grid dataset: `backends` backends, `pools` pools each,
    /// 5 small circuits per pool.
    pub fn tiny_dataset(backends: usize, pools: usize, seed: u64) -> Vec<Sample> {
        tiny_dataset_with_pools(backends, pools, seed).1
    }

    /// [`tiny_dataset`] plus the graph and the logical circuit pools the
    /// samples were transpiled from, keyed by `(backend id, pool index)`.
    pub fn tiny_dataset_with_pools(
        backends: usize,
        pools: usize,
        seed: u64,
    ) -> (CouplingGraph, Vec<Sample>, BTreeMap<(String, usize), CircuitPool>) {
        let g = gen_topology(&TopologySpec::Grid { rows: 3, cols: 3 }).unwrap();
        let ccfg = CircuitCfg::for_edge_count(g.edge_count());
        let mut out = Vec::new();
        let mut circuit_pools = BTreeMap::new();
        for b in 0..backends {
            let id = format!("b{b:02}");
            let errors = sample_backend(
                &g,
                seed::derive(seed, "tiny-backend", &[b as u64]),
                &SamplerCfg::default(),
            )
            .unwrap();
            for p in 0..pools {
                let pool =
                    gen_pool(g.n(), 5, seed::derive(seed, "tiny-pool", &[b as u64]), p, &ccfg)
                        .unwrap();
                let tp = transpile_pool(&pool, &g, &errors).unwrap();
                out.push(assemble_sample(&id, &g, &tp, Some(&errors)).unwrap());
                circuit_pools.insert((id.clone(), p), pool);
            }
        }
        (g, out, circuit_pools)
    }

    pub fn tiny_model(kind: TargetKind) -> RegressorConfig {
        let base = match kind {
            TargetKind::Node => RegressorConfig::node_default(),
            TargetKind::Edge => RegressorConfig::edge_default(),
        };
        RegressorConfig { hidden: 8, dropout: 0.0, ..base }
    }

    pub fn tiny_train_cfg(seed: u64) -> TrainConfig {
        TrainConfig { max_epochs: 4, patience: 2, seed, ..TrainConfig::default() }
    }
}
