//! The two edge-aware message-passing regressors: one predicting
//! per-qubit error rates (trained in log1p space) and one predicting
//! per-coupling error rates (softplus output, trained in raw space).
//!
//! Both share the same backbone: encode node and edge features, send a
//! message along every directed arc conditioned on the (undirected) edge
//! embedding, aggregate incoming messages by mean, and update node
//! states. The node head reads the updated states; the edge head reads
//! the pre-aggregation states of both endpoints together with the edge
//! embedding, so a canonical edge always sees its operands in canonical
//! order.

use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::backend::ErrorMap;
use crate::error::{Error, Result};
use crate::features::{Sample, EDGE_FEAT_DIM, NODE_FEAT_DIM};
use crate::neural::{Mlp, MlpSpec, Mode, ParamStore, Tape, Tensor, VarId};
use crate::seed;

/// Fixed output parametrization of the node head: the affine layer's
/// raw output is multiplied by this constant, so the trained weights
/// stay O(1) while the emitted log1p-space values sit at the natural
/// 1q-error scale. Without it, Adam's default step size dwarfs the
/// structure the head must resolve and training collapses to the label
/// mean. The realized function is still a single affine map of the
/// final node states.
pub const NODE_TARGET_SCALE: f64 = 1e-4;

/// Which target the regressor predicts, and therefore which output
/// transform and loss space it uses.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum TargetKind {
    /// Per-qubit error rates: head is a scaled affine layer
    /// ([`NODE_TARGET_SCALE`]), training happens on `log(1+y)`,
    /// predictions invert with `exp(z)-1`.
    Node,
    /// Per-coupling error rates: head ends in softplus, training happens
    /// on raw rates.
    Edge,
}

/// Architecture and loss hyperparameters of one regressor.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RegressorConfig {
    pub kind: TargetKind,
    /// Hidden width H of every embedding.
    pub hidden: usize,
    /// Message-passing rounds.
    pub rounds: usize,
    /// Affine layers per MLP block.
    pub depth: usize,
    /// Dropout rate on hidden layers (train mode only).
    pub dropout: f64,
    /// Huber threshold, in the loss space of `kind`.
    pub huber_delta: f64,
}

impl RegressorConfig {
    pub fn node_default() -> Self {
        RegressorConfig {
            kind: TargetKind::Node,
            hidden: 64,
            rounds: 1,
            depth: 2,
            dropout: 0.1,
            huber_delta: 1e-4,
        }
    }

    pub fn edge_default() -> Self {
        RegressorConfig { kind: TargetKind::Edge, huber_delta: 1e-3, ..Self::node_default() }
    }

    pub fn validate(&self) -> Result<()> {
        if self.hidden == 0 || self.rounds == 0 || self.depth == 0 {
            return Err(Error::InvalidInput(format!(
                "hidden width, rounds, and depth must all be at least 1, got {self:?}"
            )));
        }
        if !(0.0..1.0).contains(&self.dropout) {
            return Err(Error::InvalidInput(format!(
                "dropout rate {} outside [0, 1)",
                self.dropout
            )));
        }
        if self.huber_delta <= 0.0 {
            return Err(Error::InvalidInput(format!(
                "huber delta must be positive, got {}",
                self.huber_delta
            )));
        }
        Ok(())
    }

    /// Widths of an encoder/message/update block: `depth` affine layers,
    /// all hidden and output widths H.
    fn block_widths(&self, input: usize) -> Vec<usize> {
        let mut w = vec![input];
        w.extend(std::iter::repeat_n(self.hidden, self.depth));
        w
    }
}

/// One regressor: configuration, parameter store, and block handles.
#[derive(Debug, Clone)]
pub struct Regressor {
    pub config: RegressorConfig,
    pub store: ParamStore,
    phi_v: Mlp,
    phi_e: Mlp,
    phi_m: Mlp,
    phi_u: Mlp,
    head: Mlp,
}

impl Regressor {
    /// Allocate freshly initialized parameters. The same `(config,
    /// init_seed)` always produces the same weights, so a checkpoint can
    /// rebuild the structure and overwrite the tensors by name.
    pub fn init(config: RegressorConfig, init_seed: u64) -> Result<Self> {
        config.validate()?;
        let h = config.hidden;
        let mut store = ParamStore::new();
        let mut rng = seed::rng(init_seed, "regressor-init", &[]);
        let d = config.dropout;
        let phi_v =
            Mlp::init(&mut store, "phi_v", MlpSpec::new(config.block_widths(NODE_FEAT_DIM), d)?, &mut rng)?;
        let phi_e =
            Mlp::init(&mut store, "phi_e", MlpSpec::new(config.block_widths(EDGE_FEAT_DIM), d)?, &mut rng)?;
        let phi_m =
            Mlp::init(&mut store, "phi_m", MlpSpec::new(config.block_widths(3 * h), d)?, &mut rng)?;
        let phi_u =
            Mlp::init(&mut store, "phi_u", MlpSpec::new(config.block_widths(2 * h), d)?, &mut rng)?;
        let head = match config.kind {
            // Linear readout of the updated node state.
            TargetKind::Node => Mlp::init(&mut store, "g_v", MlpSpec::new(vec![h, 1], d)?, &mut rng)?,
            // MLP readout of [h_u ‖ h_v ‖ e].
            TargetKind::Edge => {
                let mut widths = vec![3 * h];
                widths.extend(std::iter::repeat_n(h, config.depth - 1));
                widths.push(1);
                Mlp::init(&mut store, "g_e", MlpSpec::new(widths, d)?, &mut rng)?
            }
        };
        Ok(Regressor { config, store, phi_v, phi_e, phi_m, phi_u, head })
    }

    /// Run the backbone and head on a standardized sample.
    ///
    /// Returns the head output in the model's loss space: per-node ẑ
    /// (log1p space) for [`TargetKind::Node`], per-edge ŷ (raw rates,
    /// softplus-positive) for [`TargetKind::Edge`]. `dropout_rng` only
    /// matters when `tape` is in train mode.
    pub fn forward(
        &self,
        tape: &mut Tape,
        sample: &Sample,
        dropout_rng: &mut ChaCha8Rng,
    ) -> Result<VarId> {
        if !sample.standardized {
            return Err(Error::InvalidInput(format!(
                "sample (backend {:?}, pool {}) was never standardized",
                sample.backend_id, sample.pool_index
            )));
        }
        check_sample_shape(sample)?;
        if sample.edges.is_empty() && self.config.kind == TargetKind::Edge {
            return Err(Error::InvalidInput("no couplings to predict on".into()));
        }

        let x_v = tape.leaf(Tensor::from_rows(&sample.x_nodes)?)?;
        let h0 = self.phi_v.forward(tape, &self.store, x_v, dropout_rng)?;

        // Directed arcs: every canonical edge (u, v) contributes u->v and
        // v->u, both conditioned on the same undirected edge embedding.
        let mut src = Vec::with_capacity(2 * sample.edges.len());
        let mut dst = Vec::with_capacity(2 * sample.edges.len());
        let mut arc_edge = Vec::with_capacity(2 * sample.edges.len());
        for (e, &(u, v)) in sample.edges.iter().enumerate() {
            src.push(u);
            dst.push(v);
            arc_edge.push(e);
            src.push(v);
            dst.push(u);
            arc_edge.push(e);
        }

        let e_emb = if sample.edges.is_empty() {
            None
        } else {
            let x_e = tape.leaf(Tensor::from_rows(&sample.x_edges)?)?;
            Some(self.phi_e.forward(tape, &self.store, x_e, dropout_rng)?)
        };

        let mut h = h0;
        for _ in 0..self.config.rounds {
            let agg = match e_emb {
                Some(e_emb) => {
                    let h_src = tape.gather_rows(h, src.clone())?;
                    let h_dst = tape.gather_rows(h, dst.clone())?;
                    let e_arc = tape.gather_rows(e_emb, arc_edge.clone())?;
                    let m_in = tape.concat_cols(&[h_src, h_dst, e_arc])?;
                    let m = self.phi_m.forward(tape, &self.store, m_in, dropout_rng)?;
                    tape.scatter_mean_rows(m, dst.clone(), sample.n)?
                }
                // No couplings at all: every node aggregates nothing.
                None => tape.leaf(Tensor::zeros(sample.n, self.config.hidden))?,
            };
            let u_in = tape.concat_cols(&[h, agg])?;
            h = self.phi_u.forward(tape, &self.store, u_in, dropout_rng)?;
        }

        match self.config.kind {
            TargetKind::Node => {
                let raw = self.head.forward(tape, &self.store, h, dropout_rng)?;
                tape.scale(raw, NODE_TARGET_SCALE)
            }
            TargetKind::Edge => {
                let e_emb = e_emb.expect("checked non-empty above");
                let us: Vec<usize> = sample.edges.iter().map(|&(u, _)| u).collect();
                let vs: Vec<usize> = sample.edges.iter().map(|&(_, v)| v).collect();
                let h_u = tape.gather_rows(h0, us)?;
                let h_v = tape.gather_rows(h0, vs)?;
                let cat = tape.concat_cols(&[h_u, h_v, e_emb])?;
                let raw = self.head.forward(tape, &self.store, cat, dropout_rng)?;
                tape.softplus(raw)
            }
        }
    }

    /// Masked Huber loss of a forward output against labels, in the
    /// model's loss space (log1p targets for nodes, raw for edges).
    /// Masked-out labels may be NaN sentinels; they cannot influence the
    /// value or the gradient.
    pub fn loss(&self, tape: &mut Tape, output: VarId, labels: &ErrorMap) -> Result<VarId> {
        match self.config.kind {
            TargetKind::Node => {
                let target: Vec<f64> = labels.y_nodes().iter().map(|y| y.ln_1p()).collect();
                tape.masked_huber_mean(
                    output,
                    &Tensor::from_col(&target)?,
                    labels.mask_nodes(),
                    self.config.huber_delta,
                )
            }
            TargetKind::Edge => tape.masked_huber_mean(
                output,
                &Tensor::from_col(labels.y_edges())?,
                labels.mask_edges(),
                self.config.huber_delta,
            ),
        }
    }

    /// Eval-mode predictions in raw error-rate space: `exp(z)-1` for the
    /// node model, the softplus output directly for the edge model.
    pub fn predict(&self, sample: &Sample) -> Result<Vec<f64>> {
        let mut tape = Tape::new(Mode::Eval);
        let mut rng = seed::rng(0, "eval-dropout-unused", &[]);
        let out = self.forward(&mut tape, sample, &mut rng)?;
        let vals = tape.value(out).data().to_vec();
        Ok(match self.config.kind {
            TargetKind::Node => vals.into_iter().map(f64::exp_m1).collect(),
            TargetKind::Edge => vals,
        })
    }

    /// Bias handle of the head's final affine layer; a data-dependent
    /// starting value here puts initial outputs at the targets' scale.
    pub fn head_output_bias(&self) -> crate::neural::ParamId {
        self.head.layer_params().last().expect("head has layers").1
    }

    /// Number of label components the masked loss averages over.
    pub fn live_label_count(&self, labels: &ErrorMap) -> usize {
        match self.config.kind {
            TargetKind::Node => labels.mask_nodes().iter().filter(|&&m| m).count(),
            TargetKind::Edge => labels.mask_edges().iter().filter(|&&m| m).count(),
        }
    }
}

fn check_sample_shape(sample: &Sample) -> Result<()> {
    sample.check_consistent()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::neural::ParamId;
    use rand::Rng;
    use rand_chacha::rand_core::SeedableRng;

    /// A standardized-looking sample with seeded feature noise.
    fn synth_sample(n: usize, edges: Vec<(usize, usize)>, seed: u64) -> Sample {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let x_nodes = (0..n)
            .map(|_| (0..NODE_FEAT_DIM).map(|_| rng.random_range(-1.5..1.5)).collect())
            .collect();
        let x_edges = (0..edges.len())
            .map(|_| (0..EDGE_FEAT_DIM).map(|_| rng.random_range(-1.5..1.5)).collect())
            .collect();
        let labels = ErrorMap::dense(
            (0..n).map(|_| rng.random_range(1e-4..1e-3)).collect(),
            (0..edges.len()).map(|_| rng.random_range(5e-3..5e-2)).collect(),
        )
        .unwrap();
        Sample {
            backend_id: "synthetic".into(),
            pool_index: 0,
            n,
            edges,
            x_nodes,
            x_edges,
            standardized: true,
            labels: Some(labels),
        }
    }

    fn small(kind: TargetKind) -> RegressorConfig {
        RegressorConfig {
            kind,
            hidden: 8,
            rounds: 1,
            depth: 2,
            dropout: 0.0,
            huber_delta: if kind == TargetKind::Node { 1e-4 } else { 1e-3 },
        }
    }

    fn ring_edges(n: usize) -> Vec<(usize, usize)> {
        let mut e: Vec<(usize, usize)> =
            (0..n).map(|i| (i.min((i + 1) % n), i.max((i + 1) % n))).collect();
        e.sort_unstable();
        e
    }

    #[test]
    fn zero_parameters_make_every_edge_predict_ln_two() {
        let mut model = Regressor::init(small(TargetKind::Edge), 0).unwrap();
        for i in 0..model.store.len() {
            for v in model.store.get_mut(ParamId(i)).data_mut() {
                *v = 0.0;
            }
        }
        let sample = synth_sample(5, ring_edges(5), 1);
        let preds = model.predict(&sample).unwrap();
        assert_eq!(preds.len(), 5);
        for p in preds {
            assert!((p - std::f64::consts::LN_2).abs() < 1e-15);
        }
    }

    #[test]
    fn edge_predictions_stay_positive_for_random_parameters() {
        let sample = synth_sample(6, ring_edges(6), 2);
        for draw in 0..1000u64 {
            let model = Regressor::init(small(TargetKind::Edge), draw).unwrap();
            let preds = model.predict(&sample).unwrap();
            assert!(preds.iter().all(|&p| p > 0.0), "draw {draw} produced {preds:?}");
        }
    }

    #[test]
    fn node_predictions_exceed_minus_one_and_invert_log1p() {
        let sample = synth_sample(6, ring_edges(6), 3);
        for draw in 0..50u64 {
            let model = Regressor::init(small(TargetKind::Node), draw).unwrap();
            let preds = model.predict(&sample).unwrap();
            assert!(preds.iter().all(|&p| p > -1.0));
        }
        // ẑ and ŷ are linked by exp(z)-1 exactly.
        let model = Regressor::init(small(TargetKind::Node), 9).unwrap();
        let mut tape = Tape::new(Mode::Eval);
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        let z = model.forward(&mut tape, &sample, &mut rng).unwrap();
        let preds = model.predict(&sample).unwrap();
        for (zv, p) in tape.value(z).data().iter().zip(preds) {
            assert!((zv.exp_m1() - p).abs() < 1e-15);
        }
    }

    #[test]
    fn unstandardized_samples_are_refused() {
        let mut sample = synth_sample(4, ring_edges(4), 4);
        sample.standardized = false;
        let model = Regressor::init(small(TargetKind::Node), 0).unwrap();
        let err = model.predict(&sample).unwrap_err();
        assert!(err.to_string().contains("standardized"));
    }

    #[test]
    fn isolated_node_aggregates_zero_and_stays_finite() {
        // Edge list [(0, 1)] leaves node 2 with no incoming arcs; the
        // divisor rule hands it a zero aggregate, not NaN.
        let sample = synth_sample(3, vec![(0, 1)], 5);
        let model = Regressor::init(small(TargetKind::Node), 1).unwrap();
        let preds = model.predict(&sample).unwrap();
        assert_eq!(preds.len(), 3);
        assert!(preds.iter().all(|p| p.is_finite()));
    }

    #[test]
    fn perfect_log_space_predictions_give_zero_loss() {
        let sample = synth_sample(5, ring_edges(5), 6);
        let labels = sample.labels.clone().unwrap();
        let model = Regressor::init(small(TargetKind::Node), 2).unwrap();
        let mut tape = Tape::new(Mode::Eval);
        let z: Vec<f64> = labels.y_nodes().iter().map(|y| y.ln_1p()).collect();
        let zvar = tape.leaf(Tensor::from_col(&z).unwrap()).unwrap();
        let loss = model.loss(&mut tape, zvar, &labels).unwrap();
        assert_eq!(tape.value(loss).item().unwrap(), 0.0);
    }

    #[test]
    fn single_residual_on_linear_branch_matches_huber_value() {
        let model = Regressor::init(small(TargetKind::Edge), 3).unwrap();
        let d = model.config.huber_delta;
        let labels = ErrorMap::new(
            vec![0.0],
            vec![0.02, f64::NAN],
            vec![true],
            vec![true, false],
        )
        .unwrap();
        let mut tape = Tape::new(Mode::Eval);
        let pred = tape.leaf(Tensor::from_col(&[0.02 + 2.0 * d, 123.0]).unwrap()).unwrap();
        let loss = model.loss(&mut tape, pred, &labels).unwrap();
        assert!((tape.value(loss).item().unwrap() - 1.5 * d * d).abs() < 1e-15);
    }

    #[test]
    fn both_regressors_pass_grad_check_on_a_random_sample() {
        let sample = synth_sample(5, vec![(0, 1), (0, 2), (1, 3), (2, 4), (3, 4)], 7);
        let labels = sample.labels.clone().unwrap();
        for kind in [TargetKind::Node, TargetKind::Edge] {
            let model = Regressor::init(small(kind), 11).unwrap();
            let mut store = model.store.clone();
            let sample = sample.clone();
            let labels = labels.clone();
            let build = move |tape: &mut Tape, store: &ParamStore| {
                let mut m = model.clone();
                m.store = store.clone();
                let mut rng = ChaCha8Rng::seed_from_u64(0);
                let out = m.forward(tape, &sample, &mut rng)?;
                m.loss(tape, out, &labels)
            };
            let err = crate::neural::grad_check(&mut store, &build).unwrap();
            assert!(err < crate::neural::GRAD_TOL, "{kind:?} grad error {err}");
        }
    }

    #[test]
    fn masked_out_nan_labels_cannot_poison_loss_or_gradients() {
        let sample = synth_sample(5, ring_edges(5), 8);
        let base = sample.labels.clone().unwrap();
        // Mask out node 2; its label becomes a NaN sentinel.
        let mut mask_nodes = base.mask_nodes().to_vec();
        mask_nodes[2] = false;
        let labels = ErrorMap::new(
            base.y_nodes().to_vec(),
            base.y_edges().to_vec(),
            mask_nodes,
            base.mask_edges().to_vec(),
        )
        .unwrap();
        assert!(labels.y_nodes()[2].is_nan());

        // Training through the NaN slot stays finite end to end.
        let model = Regressor::init(small(TargetKind::Node), 13).unwrap();
        let mut tape = Tape::new(Mode::Train);
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let out = model.forward(&mut tape, &sample, &mut rng).unwrap();
        let loss = model.loss(&mut tape, out, &labels).unwrap();
        assert!(tape.value(loss).item().unwrap().is_finite());
        tape.backward(loss).unwrap();
        let grads = tape.collect_grads(&model.store).unwrap();
        assert!(grads.iter().all(Tensor::all_finite));

        // And the masked-out row genuinely contributes nothing: two
        // prediction vectors differing only there score identically.
        let mut pa: Vec<f64> = labels.y_nodes().iter().map(|y| y.ln_1p()).collect();
        let mut pb = pa.clone();
        pa[2] = -4.0;
        pb[2] = 9.0;
        let mut tape = Tape::new(Mode::Eval);
        let va = tape.leaf(Tensor::from_col(&pa).unwrap()).unwrap();
        let la = model.loss(&mut tape, va, &labels).unwrap();
        let vb = tape.leaf(Tensor::from_col(&pb).unwrap()).unwrap();
        let lb = model.loss(&mut tape, vb, &labels).unwrap();
        assert_eq!(tape.value(la).item().unwrap(), tape.value(lb).item().unwrap());
        assert_eq!(tape.value(la).item().unwrap(), 0.0);
    }

    /// Relabel a sample's qubits by `perm` and rebuild it in canonical
    /// form; returns the permuted sample plus, per new edge position, the
    /// old edge index and whether endpoint order survived.
    fn permute_sample(sample: &Sample, perm: &[usize]) -> (Sample, Vec<(usize, bool)>) {
        let n = sample.n;
        let mut new_edges: Vec<((usize, usize), usize, bool)> = sample
            .edges
            .iter()
            .enumerate()
            .map(|(e, &(u, v))| {
                let (a, b) = (perm[u].min(perm[v]), perm[u].max(perm[v]));
                ((a, b), e, perm[u] < perm[v])
            })
            .collect();
        new_edges.sort_unstable();
        let mut x_nodes = vec![Vec::new(); n];
        for v in 0..n {
            x_nodes[perm[v]] = sample.x_nodes[v].clone();
        }
        let permuted = Sample {
            backend_id: sample.backend_id.clone(),
            pool_index: sample.pool_index,
            n,
            edges: new_edges.iter().map(|&(uv, _, _)| uv).collect(),
            x_nodes,
            x_edges: new_edges.iter().map(|&(_, e, _)| sample.x_edges[e].clone()).collect(),
            standardized: true,
            labels: None,
        };
        (permuted, new_edges.iter().map(|&(_, e, kept)| (e, kept)).collect())
    }

    #[test]
    fn relabeling_permutes_node_predictions_and_tracks_canonical_edges() {
        let n = 6;
        let edges = vec![(0, 1), (0, 2), (1, 2), (1, 3), (2, 4), (3, 5), (4, 5)];
        let sample = synth_sample(n, edges.clone(), 9);

        // Arbitrary relabeling: node predictions move with their qubits.
        let perm = [3usize, 0, 4, 1, 5, 2];
        let (permuted, mapping) = permute_sample(&sample, &perm);
        let node_model = Regressor::init(small(TargetKind::Node), 17).unwrap();
        let p = node_model.predict(&sample).unwrap();
        let pp = node_model.predict(&permuted).unwrap();
        for v in 0..n {
            assert!(
                (p[v] - pp[perm[v]]).abs() < 1e-9,
                "node {v}: {} vs {}",
                p[v],
                pp[perm[v]]
            );
        }
        // Edge predictions stay attached to their canonicalized edges;
        // values are preserved wherever endpoint order survived (the head
        // reads operands in canonical order, so a flipped edge is a
        // different, equally canonical presentation).
        let edge_model = Regressor::init(small(TargetKind::Edge), 17).unwrap();
        let q = edge_model.predict(&sample).unwrap();
        let qq = edge_model.predict(&permuted).unwrap();
        assert_eq!(qq.len(), edges.len());
        let mut preserved = 0;
        for (new_pos, &(old_e, kept)) in mapping.iter().enumerate() {
            if kept {
                preserved += 1;
                assert!(
                    (q[old_e] - qq[new_pos]).abs() < 1e-9,
                    "edge {old_e}: {} vs {}",
                    q[old_e],
                    qq[new_pos]
                );
            }
        }
        assert!(preserved > 0, "permutation preserved no edge orders; test is vacuous");

        // A relabeling that keeps every edge's endpoint order reproduces
        // every edge prediction exactly.
        let monotone = [0usize, 1, 3, 2, 4, 5];
        let (permuted, mapping) = permute_sample(&sample, &monotone);
        assert!(mapping.iter().all(|&(_, kept)| kept));
        let qq = edge_model.predict(&permuted).unwrap();
        for (new_pos, &(old_e, _)) in mapping.iter().enumerate() {
            assert!((q[old_e] - qq[new_pos]).abs() < 1e-9);
        }
        let pp = node_model.predict(&permuted).unwrap();
        for v in 0..n {
            assert!((p[v] - pp[monotone[v]]).abs() < 1e-9);
        }
    }

    #[test]
    fn automorphic_nodes_with_identical_features_predict_identically() {
        // A 4-ring with every node sharing one feature row and every edge
        // sharing another is vertex- and edge-transitive: all predictions
        // must coincide.
        let node_row: Vec<f64> = (0..NODE_FEAT_DIM).map(|i| 0.3 * i as f64 - 0.7).collect();
        let edge_row: Vec<f64> = (0..EDGE_FEAT_DIM).map(|i| 0.9 - 0.4 * i as f64).collect();
        let sample = Sample {
            backend_id: "ring".into(),
            pool_index: 0,
            n: 4,
            edges: ring_edges(4),
            x_nodes: vec![node_row; 4],
            x_edges: vec![edge_row; 4],
            standardized: true,
            labels: None,
        };
        let node_model = Regressor::init(small(TargetKind::Node), 21).unwrap();
        let p = node_model.predict(&sample).unwrap();
        for v in 1..4 {
            assert!((p[v] - p[0]).abs() < 1e-12, "{p:?}");
        }
        let edge_model = Regressor::init(small(TargetKind::Edge), 21).unwrap();
        let q = edge_model.predict(&sample).unwrap();
        for e in 1..4 {
            assert!((q[e] - q[0]).abs() < 1e-12, "{q:?}");
        }
    }

    #[test]
    fn non_canonical_edge_lists_are_rejected() {
        let mut sample = synth_sample(4, ring_edges(4), 10);
        sample.edges[0] = (1, 0);
        let model = Regressor::init(small(TargetKind::Edge), 0).unwrap();
        let err = model.predict(&sample).unwrap_err();
        assert!(err.to_string().contains("canonical"), "{err}");
    }

    #[test]
    fn config_validation_rejects_degenerate_settings() {
        let mut c = RegressorConfig::node_default();
        assert!(c.validate().is_ok());
        c.hidden = 0;
        assert!(c.validate().is_err());
        let mut c = RegressorConfig::edge_default();
        c.dropout = 1.0;
        assert!(c.validate().is_err());
        let mut c = RegressorConfig::edge_default();
        c.huber_delta = 0.0;
        assert!(c.validate().is_err());
        assert_eq!(RegressorConfig::node_default().hidden, 64);
        assert_eq!(RegressorConfig::node_default().rounds, 1);
    }
}
