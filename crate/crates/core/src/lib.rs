//! Mean-field random-cluster (Chayes–Machta / Swendsen–Wang) and Potts
//! (Glauber) dynamics on the complete graph.
//!
//! The crate is organised bottom-up:
//!
//! * [`phase_diagram`]: static quantities: giant-component functions, drift
//!   functions, critical temperatures and surrogate-chain coefficients.
//! * [`random_graph`]: sparse Erdős–Rényi sampling reduced to component sizes.
//! * [`cm_dynamics`]: CM and SW chains on component-size multisets.
//! * [`potts_glauber`]: Glauber dynamics on colour-count vectors.
//! * [`surrogate`]: the 1-D Gaussian chain near the CM saddle and the Potts
//!   saddle SDE, with exit-probability estimators and critical offsets.
//! * [`exact_oracle`]: brute-force stationary laws and kernels at tiny `n`.
//! * [`rng`]: reproducible per-replica random streams.

// `!(x > 0.0)` is used on purpose so that NaN is rejected too.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod cm_dynamics;
pub mod error;
pub mod exact_oracle;
pub mod phase_diagram;
pub mod potts_glauber;
pub mod random_graph;
pub mod rng;
pub mod stats;
pub mod surrogate;

pub use error::{MixerError, Result};
pub use rng::{run_replicas, seed_stream, ReplicaRng};
