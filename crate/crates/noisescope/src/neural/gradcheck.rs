//! Finite-difference verification of reverse-mode gradients.

use crate::error::{Error, Result};
use crate::neural::tape::{Mode, ParamId, ParamStore, Tape, VarId};
use crate::neural::tensor::Tensor;

/// Central-difference step.
pub const FD_STEP: f64 = 1e-5;
/// Acceptance threshold for [`grad_check`] on smooth composites.
pub const GRAD_TOL: f64 = 1e-4;

/// Worst relative disagreement between two gradient sets:
/// `max |a - b| / max(1e-8, |a| + |b|)` over every scalar.
pub fn max_rel_err(a: &[Tensor], b: &[Tensor]) -> Result<f64> {
    if a.len() != b.len() {
        return Err(Error::InvalidInput(format!(
            "comparing {} gradient tensors with {}",
            a.len(),
            b.len()
        )));
    }
    let mut worst = 0.0f64;
    for (ta, tb) in a.iter().zip(b) {
        if ta.shape() != tb.shape() {
            return Err(Error::InvalidInput(format!(
                "gradient shapes differ: {:?} vs {:?}",
                ta.shape(),
                tb.shape()
            )));
        }
        for (&x, &y) in ta.data().iter().zip(tb.data()) {
            let rel = (x - y).abs() / (x.abs() + y.abs()).max(1e-8);
            worst = worst.max(rel);
        }
    }
    Ok(worst)
}

/// Run `build` once in eval mode and return the loss and the
/// reverse-mode gradient of every parameter.
pub fn autodiff_grads<F>(store: &ParamStore, build: &F) -> Result<(f64, Vec<Tensor>)>
where
    F: Fn(&mut Tape, &ParamStore) -> Result<VarId>,
{
    let mut tape = Tape::new(Mode::Eval);
    let loss = build(&mut tape, store)?;
    let value = tape.value(loss).item()?;
    tape.backward(loss)?;
    let grads = tape.collect_grads(store)?;
    for g in &grads {
        if !g.all_finite() {
            return Err(Error::Numerical("non-finite reverse-mode gradient".into()));
        }
    }
    Ok((value, grads))
}

/// Central finite differences of the loss with respect to every
/// parameter scalar. `build` must be deterministic (eval mode).
pub fn finite_difference_grads<F>(store: &mut ParamStore, build: &F, h: f64) -> Result<Vec<Tensor>>
where
    F: Fn(&mut Tape, &ParamStore) -> Result<VarId>,
{
    let eval = |store: &ParamStore| -> Result<f64> {
        let mut tape = Tape::new(Mode::Eval);
        let loss = build(&mut tape, store)?;
        tape.value(loss).item()
    };
    let mut out = Vec::with_capacity(store.len());
    for i in 0..store.len() {
        let (r, c) = store.get(ParamId(i)).shape();
        let mut g = Tensor::zeros(r, c);
        for k in 0..r * c {
            let orig = store.get(ParamId(i)).data()[k];
            store.get_mut(ParamId(i)).data_mut()[k] = orig + h;
            let up = eval(store)?;
            store.get_mut(ParamId(i)).data_mut()[k] = orig - h;
            let down = eval(store)?;
            store.get_mut(ParamId(i)).data_mut()[k] = orig;
            g.data_mut()[k] = (up - down) / (2.0 * h);
        }
        out.push(g);
    }
    Ok(out)
}

/// Compare reverse-mode gradients against central finite differences and
/// return the worst relative error. The parameter store is restored to
/// its original values.
pub fn grad_check<F>(store: &mut ParamStore, build: &F) -> Result<f64>
where
    F: Fn(&mut Tape, &ParamStore) -> Result<VarId>,
{
    let (_, ad) = autodiff_grads(store, build)?;
    let fd = finite_difference_grads(store, build, FD_STEP)?;
    max_rel_err(&ad, &fd)
}
