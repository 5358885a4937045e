//! Recursive causal structure learning.
//!
//! Learners repeatedly pick a *removable* vertex (one whose deletion keeps
//! every remaining m-separation intact), learn its neighbours from its Markov
//! boundary, delete it and update the remaining boundaries. Variants:
//!
//! - [`marvel`]: causally sufficient DAGs.
//! - [`lmarvel`]: MAGs, i.e. with latent variables.
//! - [`rsl`]: DAGs with a clique-number bound, or diamond-free DAGs.
//! - [`rol`]: searches over removal orders instead of testing removability.
//!
//! All learners query a [`ci::CiTester`], which may be a graphical oracle or
//! a Fisher-z test on data.

pub mod bench;
pub mod check;
pub mod ci;
pub mod data;
mod error;
pub mod graph;
pub mod lmarvel;
pub mod marvel;
pub mod mb;
pub mod orient;
mod recursion;
pub mod rol;
pub mod rsl;
pub mod set;
pub mod sim;

#[cfg(test)]
mod testutil;

pub use error::{Error, Result};
pub use recursion::{LearnConfig, MbMethod, SkeletonResult, StepRecord, TraceEvent};
pub use set::VertexSet;
