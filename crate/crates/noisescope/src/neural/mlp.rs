//! Multilayer perceptrons: affine stacks with rectifier hidden layers,
//! identity output, and per-hidden-layer dropout in train mode.

use rand::Rng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::neural::tape::{ParamId, ParamStore, Tape, VarId};
use crate::neural::tensor::Tensor;

/// Architecture of one MLP block.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MlpSpec {
    /// Layer widths `[in, hidden..., out]`; at least `[in, out]`.
    pub widths: Vec<usize>,
    /// Dropout rate applied after each hidden activation (train mode only).
    pub dropout: f64,
}

impl MlpSpec {
    pub fn new(widths: Vec<usize>, dropout: f64) -> Result<Self> {
        let spec = MlpSpec { widths, dropout };
        spec.validate()?;
        Ok(spec)
    }

    pub fn validate(&self) -> Result<()> {
        if self.widths.len() < 2 {
            return Err(Error::InvalidInput(format!(
                "an MLP needs input and output widths, got {:?}",
                self.widths
            )));
        }
        if self.widths.iter().any(|&w| w == 0) {
            return Err(Error::InvalidInput(format!(
                "all MLP widths must be at least 1, got {:?}",
                self.widths
            )));
        }
        if !(0.0..1.0).contains(&self.dropout) {
            return Err(Error::InvalidInput(format!(
                "dropout rate {} outside [0, 1)",
                self.dropout
            )));
        }
        Ok(())
    }

    pub fn in_width(&self) -> usize {
        self.widths[0]
    }

    pub fn out_width(&self) -> usize {
        *self.widths.last().expect("validated widths")
    }
}

/// An MLP's parameter handles; tensors live in the shared [`ParamStore`].
#[derive(Debug, Clone, PartialEq)]
pub struct Mlp {
    pub spec: MlpSpec,
    layers: Vec<(ParamId, ParamId)>,
}

impl Mlp {
    /// `(weight, bias)` handles per affine layer, input side first.
    pub fn layer_params(&self) -> &[(ParamId, ParamId)] {
        &self.layers
    }
}

impl Mlp {
    /// Allocate parameters: weights uniform in
    /// `±sqrt(6 / (fan_in + fan_out))`, biases zero. Blocks are named
    /// `{name}.{layer}.w` / `{name}.{layer}.b`.
    pub fn init(
        store: &mut ParamStore,
        name: &str,
        spec: MlpSpec,
        rng: &mut ChaCha8Rng,
    ) -> Result<Mlp> {
        spec.validate()?;
        let mut layers = Vec::with_capacity(spec.widths.len() - 1);
        for (l, pair) in spec.widths.windows(2).enumerate() {
            let (fan_in, fan_out) = (pair[0], pair[1]);
            let bound = (6.0 / (fan_in + fan_out) as f64).sqrt();
            let data: Vec<f64> =
                (0..fan_in * fan_out).map(|_| rng.random_range(-bound..bound)).collect();
            let w = store.add(format!("{name}.{l}.w"), Tensor::from_flat(fan_in, fan_out, data)?);
            let b = store.add(format!("{name}.{l}.b"), Tensor::zeros(1, fan_out));
            layers.push((w, b));
        }
        Ok(Mlp { spec, layers })
    }

    /// Apply the block: affine, then rectifier and dropout on every layer
    /// but the last. Dropout masks come from `rng`, so a caller that
    /// seeds it per step gets reproducible training noise.
    pub fn forward(
        &self,
        tape: &mut Tape,
        store: &ParamStore,
        x: VarId,
        rng: &mut ChaCha8Rng,
    ) -> Result<VarId> {
        if tape.value(x).cols() != self.spec.in_width() {
            return Err(Error::InvalidInput(format!(
                "MLP expects {} input columns, got {}",
                self.spec.in_width(),
                tape.value(x).cols()
            )));
        }
        let mut h = x;
        let last = self.layers.len() - 1;
        for (l, &(w, b)) in self.layers.iter().enumerate() {
            let wv = tape.param(store, w)?;
            let bv = tape.param(store, b)?;
            let affine = tape.matmul(h, wv)?;
            h = tape.add_row_broadcast(affine, bv)?;
            if l < last {
                h = tape.relu(h)?;
                h = tape.dropout(h, self.spec.dropout, rng)?;
            }
        }
        Ok(h)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::neural::tape::Mode;
    use rand_chacha::rand_core::SeedableRng;

    fn forward_once(mlp: &Mlp, store: &ParamStore, x: Tensor, mode: Mode, seed: u64) -> Tensor {
        let mut tape = Tape::new(mode);
        let xv = tape.leaf(x).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let out = mlp.forward(&mut tape, store, xv, &mut rng).unwrap();
        tape.value(out).clone()
    }

    #[test]
    fn zero_parameters_give_zero_output() {
        let mut store = ParamStore::new();
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        let mlp =
            Mlp::init(&mut store, "z", MlpSpec::new(vec![3, 5, 2], 0.1).unwrap(), &mut rng)
                .unwrap();
        for i in 0..store.len() {
            for v in store.get_mut(ParamId(i)).data_mut() {
                *v = 0.0;
            }
        }
        let x = Tensor::from_rows(&[vec![1.0, -2.0, 3.0], vec![0.5, 0.0, -9.0]]).unwrap();
        let out = forward_once(&mlp, &store, x, Mode::Eval, 0);
        assert_eq!(out, Tensor::zeros(2, 2));
    }

    #[test]
    fn identity_affine_layer_passes_input_through() {
        let mut store = ParamStore::new();
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        let mlp =
            Mlp::init(&mut store, "id", MlpSpec::new(vec![3, 3], 0.0).unwrap(), &mut rng)
                .unwrap();
        let w = store.get_mut(ParamId(0));
        for r in 0..3 {
            for c in 0..3 {
                w.set(r, c, if r == c { 1.0 } else { 0.0 });
            }
        }
        let x = Tensor::from_rows(&[vec![0.25, -4.0, 7.5]]).unwrap();
        let out = forward_once(&mlp, &store, x.clone(), Mode::Train, 3);
        assert_eq!(out, x);
    }

    #[test]
    fn eval_mode_is_deterministic_and_train_mode_is_seeded() {
        let mut store = ParamStore::new();
        let mut rng = ChaCha8Rng::seed_from_u64(42);
        let mlp =
            Mlp::init(&mut store, "m", MlpSpec::new(vec![4, 16, 16, 1], 0.3).unwrap(), &mut rng)
                .unwrap();
        let x = Tensor::from_rows(&[vec![0.1, 0.2, 0.3, 0.4], vec![1.0, -1.0, 2.0, -2.0]])
            .unwrap();
        let e1 = forward_once(&mlp, &store, x.clone(), Mode::Eval, 1);
        let e2 = forward_once(&mlp, &store, x.clone(), Mode::Eval, 2);
        assert_eq!(e1, e2, "eval ignores the dropout stream");
        let t1 = forward_once(&mlp, &store, x.clone(), Mode::Train, 1);
        let t2 = forward_once(&mlp, &store, x.clone(), Mode::Train, 1);
        let t3 = forward_once(&mlp, &store, x.clone(), Mode::Train, 2);
        assert_eq!(t1, t2, "same dropout seed, same output");
        assert_ne!(t1, t3, "different dropout seed, different output");
    }

    #[test]
    fn initialization_respects_fan_bounds_and_zero_biases() {
        let mut store = ParamStore::new();
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let mlp =
            Mlp::init(&mut store, "b", MlpSpec::new(vec![8, 64, 1], 0.1).unwrap(), &mut rng)
                .unwrap();
        assert_eq!(store.len(), 4);
        assert_eq!(store.n_scalars(), 8 * 64 + 64 + 64 + 1);
        let bound0 = (6.0f64 / (8.0 + 64.0)).sqrt();
        let w0 = store.get(ParamId(0));
        assert!(w0.data().iter().all(|v| v.abs() < bound0));
        assert!(w0.data().iter().any(|v| v.abs() > bound0 / 2.0));
        assert!(store.get(ParamId(1)).data().iter().all(|&v| v == 0.0));
        assert_eq!(store.name(ParamId(2)), "b.1.w");
        assert_eq!(mlp.spec.out_width(), 1);
        assert!(MlpSpec::new(vec![4], 0.1).is_err());
        assert!(MlpSpec::new(vec![4, 0, 1], 0.1).is_err());
        assert!(MlpSpec::new(vec![4, 1], 1.0).is_err());
    }
}
