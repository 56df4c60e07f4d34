//! Adam optimizer with bias-corrected moment estimates.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::neural::tape::{ParamId, ParamStore};
use crate::neural::tensor::Tensor;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AdamCfg {
    pub lr: f64,
    pub beta1: f64,
    pub beta2: f64,
    pub eps: f64,
}

impl Default for AdamCfg {
    fn default() -> Self {
        AdamCfg { lr: 1e-3, beta1: 0.9, beta2: 0.999, eps: 1e-8 }
    }
}

impl AdamCfg {
    pub fn validate(&self) -> Result<()> {
        if self.lr <= 0.0
            || !(0.0..1.0).contains(&self.beta1)
            || !(0.0..1.0).contains(&self.beta2)
            || self.eps <= 0.0
        {
            return Err(Error::InvalidInput(format!(
                "bad Adam hyperparameters: lr={}, beta1={}, beta2={}, eps={}",
                self.lr, self.beta1, self.beta2, self.eps
            )));
        }
        Ok(())
    }
}

/// Optimizer state: one first/second moment tensor per parameter.
#[derive(Debug, Clone, PartialEq)]
pub struct Adam {
    cfg: AdamCfg,
    m: Vec<Tensor>,
    v: Vec<Tensor>,
    step_count: u64,
}

impl Adam {
    pub fn new(cfg: AdamCfg, store: &ParamStore) -> Result<Self> {
        cfg.validate()?;
        let zeros = |i: usize| {
            let (r, c) = store.get(ParamId(i)).shape();
            Tensor::zeros(r, c)
        };
        Ok(Adam {
            cfg,
            m: (0..store.len()).map(zeros).collect(),
            v: (0..store.len()).map(zeros).collect(),
            step_count: 0,
        })
    }

    pub fn step_count(&self) -> u64 {
        self.step_count
    }

    /// One update over every parameter; `grads` must align with the
    /// store by index (as produced by `Tape::collect_grads`).
    pub fn step(&mut self, store: &mut ParamStore, grads: &[Tensor]) -> Result<()> {
        if grads.len() != self.m.len() {
            return Err(Error::InvalidInput(format!(
                "{} gradients for {} parameters",
                grads.len(),
                self.m.len()
            )));
        }
        self.step_count += 1;
        let t = self.step_count as i32;
        let bc1 = 1.0 - self.cfg.beta1.powi(t);
        let bc2 = 1.0 - self.cfg.beta2.powi(t);
        for i in 0..grads.len() {
            let p = store.get_mut(ParamId(i));
            if grads[i].shape() != p.shape() {
                return Err(Error::InvalidInput(format!(
                    "gradient {i} has shape {:?}, parameter has {:?}",
                    grads[i].shape(),
                    p.shape()
                )));
            }
            let m = self.m[i].data_mut();
            let v = self.v[i].data_mut();
            let g = grads[i].data();
            for (k, pv) in p.data_mut().iter_mut().enumerate() {
                m[k] = self.cfg.beta1 * m[k] + (1.0 - self.cfg.beta1) * g[k];
                v[k] = self.cfg.beta2 * v[k] + (1.0 - self.cfg.beta2) * g[k] * g[k];
                let m_hat = m[k] / bc1;
                let v_hat = v[k] / bc2;
                *pv -= self.cfg.lr * m_hat / (v_hat.sqrt() + self.cfg.eps);
                if !pv.is_finite() {
                    return Err(Error::Numerical(format!(
                        "non-finite parameter after Adam step {t}"
                    )));
                }
            }
        }
        Ok(())
    }
}
