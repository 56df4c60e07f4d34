//! Reverse-mode automatic differentiation over a define-by-run tape.
//!
//! Every operation validates shapes, computes its value eagerly, checks
//! the result for NaN/Inf (a hard error), and records what it needs for
//! the backward pass. Nodes only reference earlier nodes, so a single
//! reverse sweep propagates gradients.

use rand::Rng;
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::neural::tensor::Tensor;

/// Index of a value on the tape.
pub type VarId = usize;

/// Forward/backward mode: dropout fires only in `Train`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Mode {
    Train,
    Eval,
}

/// Handle into a [`ParamStore`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ParamId(pub usize);

/// Named trainable tensors, owned outside any single tape so they persist
/// across optimization steps.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct ParamStore {
    tensors: Vec<Tensor>,
    names: Vec<String>,
}

impl ParamStore {
    pub fn new() -> Self {
        ParamStore::default()
    }

    pub fn add(&mut self, name: impl Into<String>, t: Tensor) -> ParamId {
        self.tensors.push(t);
        self.names.push(name.into());
        ParamId(self.tensors.len() - 1)
    }

    pub fn len(&self) -> usize {
        self.tensors.len()
    }

    pub fn is_empty(&self) -> bool {
        self.tensors.is_empty()
    }

    pub fn get(&self, id: ParamId) -> &Tensor {
        &self.tensors[id.0]
    }

    pub fn get_mut(&mut self, id: ParamId) -> &mut Tensor {
        &mut self.tensors[id.0]
    }

    pub fn name(&self, id: ParamId) -> &str {
        &self.names[id.0]
    }

    /// Total number of scalar parameters.
    pub fn n_scalars(&self) -> usize {
        self.tensors.iter().map(|t| t.data().len()).sum()
    }

    /// Named nested-array view of every tensor, for checkpoints.
    pub fn named_blocks(&self) -> std::collections::BTreeMap<String, Vec<Vec<f64>>> {
        self.names
            .iter()
            .cloned()
            .zip(self.tensors.iter().map(Tensor::to_rows))
            .collect()
    }

    /// Overwrite tensors by name; every stored name must be present with
    /// a matching shape, and no extra blocks may appear.
    pub fn load_named_blocks(
        &mut self,
        blocks: &std::collections::BTreeMap<String, Vec<Vec<f64>>>,
    ) -> Result<()> {
        if blocks.len() != self.names.len() {
            return Err(Error::Schema(format!(
                "checkpoint has {} parameter blocks, model expects {}",
                blocks.len(),
                self.names.len()
            )));
        }
        for (name, tensor) in self.names.iter().zip(&mut self.tensors) {
            let rows = blocks
                .get(name)
                .ok_or_else(|| Error::Schema(format!("checkpoint missing block {name:?}")))?;
            let loaded = Tensor::from_rows(rows)
                .map_err(|e| Error::Schema(format!("block {name:?}: {e}")))?;
            if loaded.shape() != tensor.shape() {
                return Err(Error::Schema(format!(
                    "block {name:?} has shape {:?}, expected {:?}",
                    loaded.shape(),
                    tensor.shape()
                )));
            }
            *tensor = loaded;
        }
        Ok(())
    }
}

enum Op {
    Leaf,
    MatMul(VarId, VarId),
    AddRowBroadcast(VarId, VarId),
    Relu(VarId),
    Scale(VarId, f64),
    Softplus(VarId),
    Dropout { x: VarId, keep: f64, mask: Vec<f64> },
    ConcatCols(Vec<VarId>),
    GatherRows { x: VarId, idx: Vec<usize> },
    ScatterMeanRows { x: VarId, idx: Vec<usize>, counts: Vec<usize> },
    MaskedHuberMean { pred: VarId, target: Tensor, mask: Vec<bool>, delta: f64 },
}

struct Node {
    value: Tensor,
    op: Op,
}

/// One forward pass: values, the ops that made them, and (after
/// [`Tape::backward`]) gradients.
pub struct Tape {
    nodes: Vec<Node>,
    grads: Vec<Option<Tensor>>,
    mode: Mode,
    /// `(param, var)` bindings made through [`Tape::param`].
    binds: Vec<(ParamId, VarId)>,
    ran_backward: bool,
}

/// Numerically stable `ln(1 + e^x)`.
pub fn softplus(x: f64) -> f64 {
    x.max(0.0) + (-x.abs()).exp().ln_1p()
}

/// Logistic function, the derivative of [`softplus`].
pub fn sigmoid(x: f64) -> f64 {
    if x >= 0.0 {
        1.0 / (1.0 + (-x).exp())
    } else {
        let e = x.exp();
        e / (1.0 + e)
    }
}

/// Inverse of [`softplus`] for y > 0: the x with softplus(x) = y.
pub fn softplus_inverse(y: f64) -> Result<f64> {
    if y <= 0.0 {
        return Err(Error::InvalidInput(format!("softplus inverse needs y > 0, got {y}")));
    }
    Ok(y + (-((-y).exp())).ln_1p())
}

/// Huber value: quadratic inside `|r| <= delta`, linear outside.
pub fn huber(r: f64, delta: f64) -> f64 {
    if r.abs() <= delta {
        0.5 * r * r
    } else {
        delta * (r.abs() - 0.5 * delta)
    }
}

/// Huber derivative: the residual clamped to `[-delta, delta]`.
pub fn huber_grad(r: f64, delta: f64) -> f64 {
    r.clamp(-delta, delta)
}

impl Tape {
    pub fn new(mode: Mode) -> Self {
        Tape { nodes: Vec::new(), grads: Vec::new(), mode, binds: Vec::new(), ran_backward: false }
    }

    pub fn mode(&self) -> Mode {
        self.mode
    }

    pub fn value(&self, v: VarId) -> &Tensor {
        &self.nodes[v].value
    }

    fn push(&mut self, value: Tensor, op: Op, what: &str) -> Result<VarId> {
        if !value.all_finite() {
            return Err(Error::Numerical(format!("non-finite values out of {what}")));
        }
        self.nodes.push(Node { value, op });
        self.grads.push(None);
        Ok(self.nodes.len() - 1)
    }

    /// Register a constant or input tensor.
    pub fn leaf(&mut self, t: Tensor) -> Result<VarId> {
        self.push(t, Op::Leaf, "leaf input")
    }

    /// Register a trainable parameter, remembering the binding so
    /// [`Tape::collect_grads`] can route its gradient back.
    pub fn param(&mut self, store: &ParamStore, id: ParamId) -> Result<VarId> {
        let var = self.push(store.get(id).clone(), Op::Leaf, store.name(id))?;
        self.binds.push((id, var));
        Ok(var)
    }

    pub fn matmul(&mut self, a: VarId, b: VarId) -> Result<VarId> {
        let value = self.value(a).matmul(self.value(b))?;
        self.push(value, Op::MatMul(a, b), "matmul")
    }

    /// `x (m,n) + bias (1,n)` broadcast over rows.
    pub fn add_row_broadcast(&mut self, x: VarId, bias: VarId) -> Result<VarId> {
        let xv = self.value(x);
        let bv = self.value(bias);
        if bv.rows() != 1 || bv.cols() != xv.cols() {
            return Err(Error::InvalidInput(format!(
                "bias {:?} does not broadcast over {:?}",
                bv.shape(),
                xv.shape()
            )));
        }
        let mut out = xv.clone();
        let cols = out.cols();
        for r in 0..out.rows() {
            for c in 0..cols {
                let v = out.get(r, c) + bv.get(0, c);
                out.set(r, c, v);
            }
        }
        self.push(out, Op::AddRowBroadcast(x, bias), "bias add")
    }

    pub fn relu(&mut self, x: VarId) -> Result<VarId> {
        let mut out = self.value(x).clone();
        for v in out.data_mut() {
            if *v < 0.0 {
                *v = 0.0;
            }
        }
        self.push(out, Op::Relu(x), "relu")
    }

    /// Multiply every element by a fixed constant. Used to reparametrize
    /// an output whose targets live at a much smaller scale than the
    /// optimizer's step size: the trained weights stay O(1) while the
    /// emitted values (and the resolution of each update) shrink by `c`.
    pub fn scale(&mut self, x: VarId, c: f64) -> Result<VarId> {
        if !c.is_finite() {
            return Err(Error::Numerical(format!("scale factor {c} is not finite")));
        }
        let mut out = self.value(x).clone();
        for v in out.data_mut() {
            *v *= c;
        }
        self.push(out, Op::Scale(x, c), "scale")
    }

    pub fn softplus(&mut self, x: VarId) -> Result<VarId> {
        let mut out = self.value(x).clone();
        for v in out.data_mut() {
            *v = softplus(*v);
        }
        self.push(out, Op::Softplus(x), "softplus")
    }

    /// Inverted dropout: in train mode each element is kept with
    /// probability `1 - rate` and scaled by `1/(1 - rate)`; in eval mode
    /// (or at rate 0) the input passes through untouched.
    pub fn dropout(&mut self, x: VarId, rate: f64, rng: &mut ChaCha8Rng) -> Result<VarId> {
        if !(0.0..1.0).contains(&rate) {
            return Err(Error::InvalidInput(format!("dropout rate {rate} outside [0, 1)")));
        }
        if self.mode == Mode::Eval || rate == 0.0 {
            return Ok(x);
        }
        let keep = 1.0 - rate;
        let xv = self.value(x);
        let mask: Vec<f64> = (0..xv.data().len())
            .map(|_| if rng.random::<f64>() < keep { 1.0 } else { 0.0 })
            .collect();
        let mut out = xv.clone();
        for (v, m) in out.data_mut().iter_mut().zip(&mask) {
            *v *= m / keep;
        }
        self.push(out, Op::Dropout { x, keep, mask }, "dropout")
    }

    /// Concatenate tensors with equal row counts along columns.
    pub fn concat_cols(&mut self, parts: &[VarId]) -> Result<VarId> {
        if parts.is_empty() {
            return Err(Error::InvalidInput("concat of zero tensors".into()));
        }
        let rows = self.value(parts[0]).rows();
        for &p in parts {
            if self.value(p).rows() != rows {
                return Err(Error::InvalidInput(format!(
                    "concat row mismatch: {} vs {rows}",
                    self.value(p).rows()
                )));
            }
        }
        let total: usize = parts.iter().map(|&p| self.value(p).cols()).sum();
        let mut data = Vec::with_capacity(rows * total);
        for r in 0..rows {
            for &p in parts {
                data.extend_from_slice(self.value(p).row(r));
            }
        }
        let out = Tensor::from_flat(rows, total, data)?;
        self.push(out, Op::ConcatCols(parts.to_vec()), "concat")
    }

    /// `out[i] = x[idx[i]]` row selection (rows may repeat).
    pub fn gather_rows(&mut self, x: VarId, idx: Vec<usize>) -> Result<VarId> {
        let xv = self.value(x);
        if idx.is_empty() {
            return Err(Error::InvalidInput("gather of zero rows".into()));
        }
        for &i in &idx {
            if i >= xv.rows() {
                return Err(Error::InvalidInput(format!(
                    "gather row {i} out of range for {} rows",
                    xv.rows()
                )));
            }
        }
        let cols = xv.cols();
        let mut data = Vec::with_capacity(idx.len() * cols);
        for &i in &idx {
            data.extend_from_slice(xv.row(i));
        }
        let out = Tensor::from_flat(idx.len(), cols, data)?;
        self.push(out, Op::GatherRows { x, idx }, "gather")
    }

    /// Average rows of `x` into `n_out` buckets: `out[j]` is the mean of
    /// rows `i` with `idx[i] == j`, and the zero vector for buckets that
    /// receive nothing (divisor `max(1, count)`).
    pub fn scatter_mean_rows(&mut self, x: VarId, idx: Vec<usize>, n_out: usize) -> Result<VarId> {
        let xv = self.value(x);
        if idx.len() != xv.rows() {
            return Err(Error::InvalidInput(format!(
                "scatter index count {} does not match {} rows",
                idx.len(),
                xv.rows()
            )));
        }
        if n_out == 0 {
            return Err(Error::InvalidInput("scatter into zero buckets".into()));
        }
        for &j in &idx {
            if j >= n_out {
                return Err(Error::InvalidInput(format!(
                    "scatter bucket {j} out of range for {n_out} buckets"
                )));
            }
        }
        let cols = xv.cols();
        let mut counts = vec![0usize; n_out];
        for &j in &idx {
            counts[j] += 1;
        }
        let mut out = Tensor::zeros(n_out, cols);
        for (i, &j) in idx.iter().enumerate() {
            let row = xv.row(i).to_vec();
            for (c, v) in row.into_iter().enumerate() {
                let cur = out.get(j, c);
                out.set(j, c, cur + v);
            }
        }
        for (j, &cnt) in counts.iter().enumerate() {
            let d = cnt.max(1) as f64;
            for c in 0..cols {
                let cur = out.get(j, c);
                out.set(j, c, cur / d);
            }
        }
        self.push(out, Op::ScatterMeanRows { x, idx, counts }, "scatter mean")
    }

    /// Mean Huber loss of `pred - target` over masked-in rows. `pred` and
    /// `target` are single-column; masked-out targets may hold any value,
    /// including non-finite sentinels, without affecting the result.
    pub fn masked_huber_mean(
        &mut self,
        pred: VarId,
        target: &Tensor,
        mask: &[bool],
        delta: f64,
    ) -> Result<VarId> {
        let pv = self.value(pred);
        if pv.cols() != 1 || target.cols() != 1 || target.rows() != pv.rows() {
            return Err(Error::InvalidInput(format!(
                "loss needs matching single-column tensors, got {:?} and {:?}",
                pv.shape(),
                target.shape()
            )));
        }
        if mask.len() != pv.rows() {
            return Err(Error::InvalidInput(format!(
                "mask length {} does not match {} rows",
                mask.len(),
                pv.rows()
            )));
        }
        if delta <= 0.0 {
            return Err(Error::InvalidInput(format!("huber delta must be positive, got {delta}")));
        }
        let live = mask.iter().filter(|&&m| m).count();
        if live == 0 {
            return Err(Error::InvalidInput("loss mask excludes every component".into()));
        }
        let mut total = 0.0;
        for r in 0..pv.rows() {
            if mask[r] {
                total += huber(pv.get(r, 0) - target.get(r, 0), delta);
            }
        }
        let value = Tensor::scalar(total / live as f64);
        self.push(
            value,
            Op::MaskedHuberMean { pred, target: target.clone(), mask: mask.to_vec(), delta },
            "masked huber loss",
        )
    }

    fn accum(&mut self, v: VarId, delta: Tensor) -> Result<()> {
        match &mut self.grads[v] {
            Some(g) => g.add_in_place(&delta),
            slot @ None => {
                *slot = Some(delta);
                Ok(())
            }
        }
    }

    /// Reverse sweep from a scalar loss. Gradients land in
    /// [`Tape::grad`] / [`Tape::collect_grads`].
    pub fn backward(&mut self, loss: VarId) -> Result<()> {
        if self.ran_backward {
            return Err(Error::InvalidInput("backward may run once per tape".into()));
        }
        self.ran_backward = true;
        self.value(loss).item()?;
        self.grads[loss] = Some(Tensor::scalar(1.0));
        for v in (0..self.nodes.len()).rev() {
            let Some(g) = self.grads[v].clone() else { continue };
            if !g.all_finite() {
                return Err(Error::Numerical("non-finite gradient on tape".into()));
            }
            // Ops only reference earlier vars, so each accumulation
            // target still awaits its visit.
            match &self.nodes[v].op {
                Op::Leaf => {}
                &Op::MatMul(a, b) => {
                    let ga = g.matmul_nt(self.value(b))?;
                    let gb = self.value(a).matmul_tn(&g)?;
                    self.accum(a, ga)?;
                    self.accum(b, gb)?;
                }
                &Op::AddRowBroadcast(x, bias) => {
                    let cols = g.cols();
                    let mut gb = Tensor::zeros(1, cols);
                    for r in 0..g.rows() {
                        for c in 0..cols {
                            let cur = gb.get(0, c);
                            gb.set(0, c, cur + g.get(r, c));
                        }
                    }
                    self.accum(x, g)?;
                    self.accum(bias, gb)?;
                }
                &Op::Relu(x) => {
                    let mut gx = g;
                    let xv = self.nodes[x].value.data().to_vec();
                    for (gv, xv) in gx.data_mut().iter_mut().zip(xv) {
                        if xv <= 0.0 {
                            *gv = 0.0;
                        }
                    }
                    self.accum(x, gx)?;
                }
                &Op::Scale(x, c) => {
                    let mut gx = g;
                    for gv in gx.data_mut() {
                        *gv *= c;
                    }
                    self.accum(x, gx)?;
                }
                &Op::Softplus(x) => {
                    let mut gx = g;
                    let xv = self.nodes[x].value.data().to_vec();
                    for (gv, xv) in gx.data_mut().iter_mut().zip(xv) {
                        *gv *= sigmoid(xv);
                    }
                    self.accum(x, gx)?;
                }
                Op::Dropout { x, keep, mask } => {
                    let (x, keep, mask) = (*x, *keep, mask.clone());
                    let mut gx = g;
                    for (gv, m) in gx.data_mut().iter_mut().zip(&mask) {
                        *gv *= m / keep;
                    }
                    self.accum(x, gx)?;
                }
                Op::ConcatCols(parts) => {
                    let parts = parts.clone();
                    let mut offset = 0usize;
                    for p in parts {
                        let cols = self.value(p).cols();
                        let rows = g.rows();
                        let mut gp = Tensor::zeros(rows, cols);
                        for r in 0..rows {
                            for c in 0..cols {
                                gp.set(r, c, g.get(r, offset + c));
                            }
                        }
                        offset += cols;
                        self.accum(p, gp)?;
                    }
                }
                Op::GatherRows { x, idx } => {
                    let (x, idx) = (*x, idx.clone());
                    let mut gx = Tensor::zeros(self.value(x).rows(), g.cols());
                    for (i, &src) in idx.iter().enumerate() {
                        for c in 0..g.cols() {
                            let cur = gx.get(src, c);
                            gx.set(src, c, cur + g.get(i, c));
                        }
                    }
                    self.accum(x, gx)?;
                }
                Op::ScatterMeanRows { x, idx, counts } => {
                    let (x, idx, counts) = (*x, idx.clone(), counts.clone());
                    let mut gx = Tensor::zeros(self.value(x).rows(), g.cols());
                    for (i, &j) in idx.iter().enumerate() {
                        let d = counts[j].max(1) as f64;
                        for c in 0..g.cols() {
                            gx.set(i, c, g.get(j, c) / d);
                        }
                    }
                    self.accum(x, gx)?;
                }
                Op::MaskedHuberMean { pred, target, mask, delta } => {
                    let (pred, delta) = (*pred, *delta);
                    let target = target.clone();
                    let mask = mask.clone();
                    let upstream = g.item()?;
                    let live = mask.iter().filter(|&&m| m).count().max(1) as f64;
                    let pv = self.value(pred);
                    let mut gp = Tensor::zeros(pv.rows(), 1);
                    for r in 0..pv.rows() {
                        if mask[r] {
                            let r_val = pv.get(r, 0) - target.get(r, 0);
                            gp.set(r, 0, upstream * huber_grad(r_val, delta) / live);
                        }
                    }
                    self.accum(pred, gp)?;
                }
            }
        }
        Ok(())
    }

    pub fn grad(&self, v: VarId) -> Option<&Tensor> {
        self.grads[v].as_ref()
    }

    /// Gradient for every parameter in `store`, aligned by index. Params
    /// never bound on this tape, or off the loss path, get zeros.
    pub fn collect_grads(&self, store: &ParamStore) -> Result<Vec<Tensor>> {
        if !self.ran_backward {
            return Err(Error::InvalidInput("collect_grads before backward".into()));
        }
        let mut out: Vec<Tensor> = (0..store.len())
            .map(|i| {
                let (r, c) = store.get(ParamId(i)).shape();
                Tensor::zeros(r, c)
            })
            .collect();
        for &(pid, var) in &self.binds {
            if let Some(g) = &self.grads[var] {
                out[pid.0].add_in_place(g)?;
            }
        }
        Ok(out)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand_chacha::rand_core::SeedableRng;

    #[test]
    fn softplus_matches_frozen_values() {
        assert!((softplus(0.0) - std::f64::consts::LN_2).abs() < 1e-15);
        assert!((softplus(50.0) - 50.0).abs() < 1e-12);
        assert!(softplus(700.0).is_finite());
        assert!(softplus(-700.0).is_finite());
        assert!((sigmoid(0.0) - 0.5).abs() < 1e-15);
        // Derivative at 0 matches a central finite difference.
        let h = 1e-6;
        let fd = (softplus(h) - softplus(-h)) / (2.0 * h);
        assert!((fd - 0.5).abs() < 1e-8);
        // Inverse round-trips.
        for y in [1e-6, 0.1, std::f64::consts::LN_2, 3.0, 40.0] {
            assert!((softplus(softplus_inverse(y).unwrap()) - y).abs() < 1e-9 * y.max(1.0));
        }
        assert!(softplus_inverse(0.0).is_err());
    }

    #[test]
    fn huber_matches_frozen_values() {
        let d = 0.3;
        assert_eq!(huber(0.0, d), 0.0);
        assert!((huber(d / 2.0, d) - d * d / 8.0).abs() < 1e-15);
        assert!((huber(2.0 * d, d) - 1.5 * d * d).abs() < 1e-15);
        assert!((huber_grad(2.0 * d, d) - d).abs() < 1e-15);
        assert!((huber_grad(-2.0 * d, d) + d).abs() < 1e-15);
        assert!((huber_grad(d / 2.0, d) - d / 2.0).abs() < 1e-15);
    }

    #[test]
    fn linear_chain_backward_matches_hand_gradient() {
        // loss = mean over 2 rows of huber(x*w + b - y) with big delta is
        // plain least squares scaled by 1/2: gradients are exact.
        let mut store = ParamStore::new();
        let w = store.add("w", Tensor::from_rows(&[vec![2.0]]).unwrap());
        let b = store.add("b", Tensor::from_rows(&[vec![0.5]]).unwrap());
        let mut tape = Tape::new(Mode::Train);
        let x = tape.leaf(Tensor::from_col(&[1.0, -3.0]).unwrap()).unwrap();
        let wv = tape.param(&store, w).unwrap();
        let bv = tape.param(&store, b).unwrap();
        let xw = tape.matmul(x, wv).unwrap();
        let pred = tape.add_row_broadcast(xw, bv).unwrap();
        // Residuals: (2.5 - 1.0) = 1.5 and (-5.5 + 2.0) = -3.5.
        let target = Tensor::from_col(&[1.0, -2.0]).unwrap();
        let loss = tape.masked_huber_mean(pred, &target, &[true, true], 100.0).unwrap();
        let expect = 0.5 * (1.5f64.powi(2) + 3.5f64.powi(2)) / 2.0;
        assert!((tape.value(loss).item().unwrap() - expect).abs() < 1e-12);
        tape.backward(loss).unwrap();
        let grads = tape.collect_grads(&store).unwrap();
        // dL/dpred = r/2; dL/dw = sum x_i r_i / 2; dL/db = sum r_i / 2.
        assert!((grads[0].get(0, 0) - (1.0 * 1.5 + -3.0 * -3.5) / 2.0).abs() < 1e-12);
        assert!((grads[1].get(0, 0) - (1.5 - 3.5) / 2.0).abs() < 1e-12);
    }

    #[test]
    fn masked_rows_are_ignored_and_unmasked_nan_rejected() {
        let mut tape = Tape::new(Mode::Eval);
        let pred = tape.leaf(Tensor::from_col(&[0.1, 0.7]).unwrap()).unwrap();
        let target = Tensor::from_col(&[0.1, f64::NAN]).unwrap();
        let loss = tape.masked_huber_mean(pred, &target, &[true, false], 1.0).unwrap();
        assert_eq!(tape.value(loss).item().unwrap(), 0.0);
        tape.backward(loss).unwrap();
        let g = tape.grad(pred).unwrap();
        assert_eq!(g.get(1, 0), 0.0, "masked row must contribute zero gradient");

        let mut tape2 = Tape::new(Mode::Eval);
        let pred2 = tape2.leaf(Tensor::from_col(&[0.1, 0.7]).unwrap()).unwrap();
        assert!(tape2.masked_huber_mean(pred2, &target, &[false, false], 1.0).is_err());
    }

    #[test]
    fn single_component_linear_branch_loss() {
        let d = 1e-3;
        let mut tape = Tape::new(Mode::Eval);
        let pred = tape.leaf(Tensor::from_col(&[2.0 * d]).unwrap()).unwrap();
        let target = Tensor::from_col(&[0.0]).unwrap();
        let loss = tape.masked_huber_mean(pred, &target, &[true], d).unwrap();
        assert!((tape.value(loss).item().unwrap() - 1.5 * d * d).abs() < 1e-18);
        tape.backward(loss).unwrap();
        assert!((tape.grad(pred).unwrap().get(0, 0) - d).abs() < 1e-18);
    }

    #[test]
    fn dropout_scales_survivors_and_is_seeded() {
        let x = Tensor::filled(50, 4, 1.0);
        let run = |seed: u64| -> Vec<f64> {
            let mut tape = Tape::new(Mode::Train);
            let xv = tape.leaf(x.clone()).unwrap();
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let d = tape.dropout(xv, 0.25, &mut rng).unwrap();
            tape.value(d).data().to_vec()
        };
        let a = run(7);
        assert_eq!(a, run(7), "same seed, same mask");
        assert_ne!(a, run(8), "different seed, different mask");
        let kept = a.iter().filter(|&&v| v != 0.0).count();
        assert!(a.iter().all(|&v| v == 0.0 || (v - 1.0 / 0.75).abs() < 1e-15));
        assert!(kept > 100 && kept < 200, "kept {kept} of 200 at rate 0.25");

        // Eval mode and rate 0 pass the input through unchanged.
        let mut tape = Tape::new(Mode::Eval);
        let xv = tape.leaf(x.clone()).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let d = tape.dropout(xv, 0.25, &mut rng).unwrap();
        assert_eq!(d, xv);
        assert!(tape.dropout(xv, 1.0, &mut rng).is_err());
    }

    #[test]
    fn gather_scatter_round_trip_and_divisors() {
        let mut tape = Tape::new(Mode::Eval);
        let x = tape
            .leaf(Tensor::from_rows(&[vec![1.0, 2.0], vec![3.0, 4.0], vec![5.0, 6.0]]).unwrap())
            .unwrap();
        let gathered = tape.gather_rows(x, vec![2, 0, 2]).unwrap();
        assert_eq!(
            tape.value(gathered).to_rows(),
            vec![vec![5.0, 6.0], vec![1.0, 2.0], vec![5.0, 6.0]]
        );
        // Buckets: 0 <- rows {0, 2}, 1 <- nothing, 2 <- row 1.
        let scattered = tape.scatter_mean_rows(gathered, vec![0, 2, 0], 3).unwrap();
        assert_eq!(
            tape.value(scattered).to_rows(),
            vec![vec![5.0, 6.0], vec![0.0, 0.0], vec![1.0, 2.0]]
        );
        // Gradient splits by count through the mean.
        let target = Tensor::from_col(&[0.0, 0.0, 0.0]).unwrap();
        let col = tape.gather_rows(scattered, vec![0, 1, 2]).unwrap();
        // Reduce 2 columns to 1 via matmul with a constant.
        let ones = tape.leaf(Tensor::from_rows(&[vec![1.0], vec![1.0]]).unwrap()).unwrap();
        let pred = tape.matmul(col, ones).unwrap();
        let loss = tape.masked_huber_mean(pred, &target, &[true; 3], 1e9).unwrap();
        tape.backward(loss).unwrap();
        let gx = tape.grad(x).unwrap();
        assert!(gx.all_finite());
    }

    #[test]
    fn concat_cols_splits_gradient() {
        let mut tape = Tape::new(Mode::Eval);
        let a = tape.leaf(Tensor::from_rows(&[vec![1.0], vec![2.0]]).unwrap()).unwrap();
        let b = tape.leaf(Tensor::from_rows(&[vec![3.0, 4.0], vec![5.0, 6.0]]).unwrap()).unwrap();
        let cat = tape.concat_cols(&[a, b]).unwrap();
        assert_eq!(
            tape.value(cat).to_rows(),
            vec![vec![1.0, 3.0, 4.0], vec![2.0, 5.0, 6.0]]
        );
        // loss = mean of rows after summing columns with weights 1,10,100.
        let w = tape
            .leaf(Tensor::from_rows(&[vec![1.0], vec![10.0], vec![100.0]]).unwrap())
            .unwrap();
        let pred = tape.matmul(cat, w).unwrap();
        let target = Tensor::from_col(&[0.0, 0.0]).unwrap();
        let loss = tape.masked_huber_mean(pred, &target, &[true, true], 1e9).unwrap();
        tape.backward(loss).unwrap();
        // dL/dpred_i = pred_i / 2; columns route to a and b by weight.
        let p0 = 1.0 + 30.0 + 400.0;
        let p1 = 2.0 + 50.0 + 600.0;
        let ga = tape.grad(a).unwrap();
        assert!((ga.get(0, 0) - p0 / 2.0).abs() < 1e-9);
        assert!((ga.get(1, 0) - p1 / 2.0).abs() < 1e-9);
        let gb = tape.grad(b).unwrap();
        assert!((gb.get(0, 0) - 10.0 * p0 / 2.0).abs() < 1e-9);
        assert!((gb.get(1, 1) - 100.0 * p1 / 2.0).abs() < 1e-9);
    }

    #[test]
    fn non_finite_values_are_hard_errors() {
        let mut tape = Tape::new(Mode::Eval);
        assert!(tape.leaf(Tensor::from_col(&[f64::NAN]).unwrap()).is_err());
        let big = tape.leaf(Tensor::filled(1, 1, 1e308)).unwrap();
        let big2 = tape.leaf(Tensor::filled(1, 1, 1e308)).unwrap();
        let err = tape.matmul(big, big2).unwrap_err();
        assert!(matches!(err, Error::Numerical(_)));
    }

    #[test]
    fn param_store_round_trips_named_blocks() {
        let mut store = ParamStore::new();
        let a = store.add("layer.w", Tensor::from_rows(&[vec![1.0, 2.0]]).unwrap());
        store.add("layer.b", Tensor::from_rows(&[vec![3.0]]).unwrap());
        let blocks = store.named_blocks();
        let mut other = store.clone();
        other.get_mut(a).data_mut()[0] = 99.0;
        other.load_named_blocks(&blocks).unwrap();
        assert_eq!(other, store);
        // Missing or misshapen blocks are schema errors.
        let mut missing = blocks.clone();
        missing.remove("layer.b");
        assert!(store.clone().load_named_blocks(&missing).is_err());
        let mut bad = blocks.clone();
        bad.insert("layer.w".into(), vec![vec![1.0]]);
        assert!(store.clone().load_named_blocks(&bad).is_err());
    }
}
