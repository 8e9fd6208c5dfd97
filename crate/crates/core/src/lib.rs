//! Simulation and attack toolkit for privacy in distributed subgradient
//! optimization.
//!
//! A network of agents mixes estimates through a doubly stochastic weight
//! matrix and steps along local subgradients, either synchronously with a
//! common stepsize or asynchronously with private update schedules. One
//! agent may be malicious: it injects chosen values and records everything it
//! receives, then tries to recover the weights and the other agents'
//! subgradients from that record.

pub mod adversary;
pub mod asynchronous;
pub mod error;
pub mod linalg;
pub mod metrics;
pub mod model;
pub mod objectives;
pub mod projection;
pub mod scenario;
pub mod sync;
pub mod trace;

pub use error::{Error, Result};
