//! Competitive influence maximization under the general competitive
//! independent cascade model.
//!
//! Given opponent seeds `S_A`, [`engine::tcim`] picks `k` seeds `S_B` that
//! approximately maximize the expected number of nodes adopting B, using
//! reverse accessible pointed graph (RAPG) sampling.

pub mod baselines;
pub mod engine;
pub mod error;
pub mod graph;
pub mod model;
pub mod rapg;
pub mod rng;
pub mod simulate;

pub use engine::{tcim, TcimParams, TcimResult};
pub use error::{Error, Result};
pub use graph::{DirectedGraph, Directedness, NodeId, NodeSet};
pub use model::ModelKind;
pub use rapg::RapgInstance;
pub use rng::RngStream;
