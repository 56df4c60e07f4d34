//! Minimal numerical core: dense tensors, a reverse-mode autodiff tape,
//! multilayer perceptrons, the Adam optimizer, and a finite-difference
//! gradient checker. Everything runs on 64-bit floats so error rates in
//! the 1e-4 regime keep their resolution.

pub mod adam;
pub mod gradcheck;
pub mod mlp;
pub mod tape;
pub mod tensor;

pub use adam::{Adam, AdamCfg};
pub use gradcheck::{grad_check, GRAD_TOL};
pub use mlp::{Mlp, MlpSpec};
pub use tape::{
    huber, huber_grad, sigmoid, softplus, softplus_inverse, Mode, ParamId, ParamStore, Tape,
    VarId,
};
pub use tensor::Tensor;
