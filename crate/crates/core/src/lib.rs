//! Robust graph neural networks under structure attacks.
//!
//! The crate bundles a small reverse-mode kernel ([`kernel`]), a
//! configurable message-passing encoder with dual-stage aggregation and
//! bottleneck perceptrons ([`encoder`]), structure perturbation attacks
//! ([`attack`]), supervised / noise-contrastive / adversarial-contrastive
//! training ([`train`]) and the evaluation protocol used to compare them
//! ([`eval`]). [`pipeline`] strings everything together behind a TOML
//! experiment file.

pub mod attack;
pub mod config;
pub mod encoder;
pub mod error;
pub mod eval;
pub mod graph;
pub mod kernel;
pub mod optim;
pub mod pipeline;
pub mod sbm;
pub mod seed;
pub mod train;

pub use error::{Error, Result};
pub use graph::{Csr, Graph, SplitMasks};
pub use kernel::{Tape, Tensor, Var};
