//! Holdout inference: run both trained regressors over every circuit
//! pool of the target backend, average the per-pool predictions, apply
//! each model's linear calibration, and emit a dense predicted error
//! map. No label of the target is consumed anywhere on this path.

use crate::backend::ErrorMap;
use crate::error::{Error, Result};
use crate::features::Sample;
use crate::gnn::TargetKind;
use crate::pipeline::train::Checkpoint;

/// Component-wise mean across per-pool prediction vectors.
pub fn pool_mean(per_pool: &[Vec<f64>]) -> Result<Vec<f64>> {
    let first = per_pool
        .first()
        .ok_or_else(|| Error::InvalidInput("mean of zero pools".into()))?;
    let width = first.len();
    let mut acc = vec![0.0f64; width];
    for (p, preds) in per_pool.iter().enumerate() {
        if preds.len() != width {
            return Err(Error::InvalidInput(format!(
                "pool {p} predicted {} components, expected {width}",
                preds.len()
            )));
        }
        for (a, &v) in acc.iter_mut().zip(preds) {
            *a += v;
        }
    }
    let n = per_pool.len() as f64;
    for a in &mut acc {
        *a /= n;
    }
    Ok(acc)
}

fn check_pools(pools: &[Sample]) -> Result<()> {
    let first = pools
        .first()
        .ok_or_else(|| Error::InvalidInput("holdout inference needs at least one pool".into()))?;
    for s in pools {
        if s.labels.is_some() {
            return Err(Error::InvalidInput(format!(
                "holdout pool {} carries labels; refusing to leak",
                s.pool_index
            )));
        }
        if s.standardized {
            return Err(Error::InvalidInput(
                "holdout pools must be raw; each checkpoint standardizes with its own fit".into(),
            ));
        }
        if s.backend_id != first.backend_id || s.n != first.n || s.edges != first.edges {
            return Err(Error::InvalidInput(format!(
                "holdout pools disagree: ({}, {} qubits) vs ({}, {} qubits)",
                s.backend_id, s.n, first.backend_id, first.n
            )));
        }
    }
    Ok(())
}

/// Predict with one checkpoint over all pools and reduce:
/// standardize each pool with the checkpoint's own fit, forward, average
/// across pools, then calibrate component-wise.
fn predict_with(ck: &Checkpoint, pools: &[Sample]) -> Result<Vec<f64>> {
    let per_pool: Vec<Vec<f64>> = pools
        .iter()
        .map(|s| {
            let std = ck.standardizer.apply(s)?;
            ck.model.predict(&std)
        })
        .collect::<Result<_>>()?;
    let mean = pool_mean(&per_pool)?;
    Ok(mean.into_iter().map(|p| ck.calibration.apply(p)).collect())
}

/// Reconstruct the target backend's error map from its transpiled pools
/// and the two trained checkpoints. The result is dense: every qubit and
/// coupling gets a prediction, floored at the minimum error rate.
pub fn infer_holdout(node: &Checkpoint, edge: &Checkpoint, pools: &[Sample]) -> Result<ErrorMap> {
    if node.model.config.kind != TargetKind::Node {
        return Err(Error::InvalidInput(format!(
            "node checkpoint predicts {:?}",
            node.model.config.kind
        )));
    }
    if edge.model.config.kind != TargetKind::Edge {
        return Err(Error::InvalidInput(format!(
            "edge checkpoint predicts {:?}",
            edge.model.config.kind
        )));
    }
    check_pools(pools)?;
    let y_nodes = predict_with(node, pools)?;
    let y_edges = predict_with(edge, pools)?;
    ErrorMap::dense(y_nodes, y_edges)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::backend::ERROR_FLOOR;
    use crate::gnn::TargetKind;
    use crate::pipeline::testkit::{tiny_dataset, tiny_model, tiny_train_cfg};
    use crate::pipeline::train::{train, Checkpoint, LinearCalibration};

    fn trained_pair(seed: u64) -> (Checkpoint, Checkpoint) {
        let samples = tiny_dataset(2, 3, seed);
        let node = train(&samples, Some("zz"), tiny_model(TargetKind::Node), &tiny_train_cfg(seed))
            .unwrap()
            .checkpoint;
        let edge = train(&samples, Some("zz"), tiny_model(TargetKind::Edge), &tiny_train_cfg(seed))
            .unwrap()
            .checkpoint;
        (node, edge)
    }

    fn unlabeled_pools(n: usize, seed: u64) -> Vec<Sample> {
        // A third backend the checkpoints never saw, labels stripped.
        let mut pools = tiny_dataset(3, n, seed);
        pools.retain(|s| s.backend_id == "b02");
        for s in &mut pools {
            s.labels = None;
        }
        pools
    }

    #[test]
    fn single_pool_inference_equals_that_pools_calibrated_prediction() {
        let (node, edge) = trained_pair(21);
        let pools = unlabeled_pools(1, 21);
        let map = infer_holdout(&node, &edge, &pools).unwrap();
        let std = node.standardizer.apply(&pools[0]).unwrap();
        let direct: Vec<f64> = node
            .model
            .predict(&std)
            .unwrap()
            .into_iter()
            .map(|p| node.calibration.apply(p))
            .collect();
        assert_eq!(map.y_nodes(), direct.as_slice());
        assert!(map.mask_nodes().iter().all(|&m| m));
        assert!(map.mask_edges().iter().all(|&m| m));
    }

    #[test]
    fn pool_mean_commutes_with_duplication_and_permutation() {
        let (node, edge) = trained_pair(22);
        let pools = unlabeled_pools(3, 22);
        let base = infer_holdout(&node, &edge, &pools).unwrap();

        let mut doubled = pools.clone();
        doubled.extend(pools.iter().cloned());
        let dup = infer_holdout(&node, &edge, &doubled).unwrap();

        let mut reversed = pools.clone();
        reversed.reverse();
        let perm = infer_holdout(&node, &edge, &reversed).unwrap();

        for (a, b) in base.y_nodes().iter().zip(dup.y_nodes()) {
            assert!((a - b).abs() <= 1e-12 * a.abs().max(1.0), "{a} vs {b}");
        }
        for (a, b) in base.y_edges().iter().zip(perm.y_edges()) {
            assert!((a - b).abs() <= 1e-12 * a.abs().max(1.0), "{a} vs {b}");
        }
    }

    #[test]
    fn negative_calibrated_predictions_clip_to_the_floor() {
        let (mut node, edge) = trained_pair(23);
        node.calibration = LinearCalibration { a: 0.0, b: -0.002, fit_val_pools: Vec::new() };
        let pools = unlabeled_pools(2, 23);
        let map = infer_holdout(&node, &edge, &pools).unwrap();
        assert!(map.y_nodes().iter().all(|&y| y == ERROR_FLOOR));
        assert!(map.y_edges().iter().all(|&y| y > 0.0));
    }

    #[test]
    fn leakage_and_schema_guards_reject_bad_pools() {
        let (node, edge) = trained_pair(24);
        assert!(infer_holdout(&node, &edge, &[]).is_err());

        let mut labeled = tiny_dataset(3, 1, 24);
        labeled.retain(|s| s.backend_id == "b02");
        let err = infer_holdout(&node, &edge, &labeled).unwrap_err();
        assert!(err.to_string().contains("leak"), "{err}");

        let mut standardized = unlabeled_pools(1, 24);
        standardized[0] = node.standardizer.apply(&standardized[0]).unwrap();
        assert!(infer_holdout(&node, &edge, &standardized).is_err());

        let mut mixed = unlabeled_pools(2, 24);
        mixed[1].backend_id = "other".into();
        assert!(infer_holdout(&node, &edge, &mixed).is_err());

        // Swapped checkpoints are caught by target-kind checks.
        assert!(infer_holdout(&edge, &node, &unlabeled_pools(1, 24)).is_err());
    }

    #[test]
    fn pool_mean_checks_shapes() {
        assert!(pool_mean(&[]).is_err());
        assert!(pool_mean(&[vec![1.0, 2.0], vec![3.0]]).is_err());
        let m = pool_mean(&[vec![1.0, 3.0], vec![3.0, 5.0]]).unwrap();
        assert_eq!(m, vec![2.0, 4.0]);
    }
}
