//! Distributed Nash equilibrium seeking for two subnetworks playing a
//! zero-sum game over time-varying digraphs.

pub mod convex;
pub mod digraph;
pub mod engine;
pub mod error;
pub mod oracle;
pub mod scenario;
pub mod stepsize;

pub use error::{Error, Result};
