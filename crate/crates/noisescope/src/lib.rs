//! noisescope: forensic reconstruction of a quantum backend's error map
//! from its coupling topology and the statistics of transpiled circuits.
//!
//! The crate implements the full chain:
//!
//! ```text
//!   topology ──> synthetic error maps ──> random circuits
//!       │                │                    │
//!       │                └── noise-aware transpilation (layout + routing)
//!       │                                     │
//!       ├── static descriptors      dynamic usage features
//!       │                                     │
//!       └──────────── graph samples ──────────┘
//!                          │
//!            edge-aware message-passing regressors
//!              (per-qubit and per-coupling heads)
//!                          │
//!          holdout inference ──> calibration ──> evaluation
//! ```
//!
//! Training happens on backends whose calibration is known; inference
//! reconstructs the error rates of a held-out backend from nothing but
//! its coupling graph and transpiled circuit pools. See the `examples/`
//! directory for runnable walkthroughs of each stage, or the
//! `noisescope` binary for the file-based workflow.

pub mod backend;
pub mod circuit;
pub mod cli;
pub mod error;
pub mod features;
pub mod files;
pub mod gnn;
pub mod graph;
pub mod neural;
pub mod pipeline;
pub mod seed;
pub mod transpiler;

pub use error::{Error, Result};
