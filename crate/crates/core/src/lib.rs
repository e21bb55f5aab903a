//! Continuous episodic control.
//!
//! A non-parametric agent for continuous action spaces: experience is kept
//! in a bounded table of state-action-value tuples, actions come from
//! value-weighted sampling over the nearest stored neighbors, and one
//! successful episode is immediately reusable by the greedy policy.
//!
//! The crate also ships deterministic desk-scale environments (a 1-D toy
//! task, sparse mountain car and two kinematic mazes) and a seeded
//! experiment harness that writes learning-curve CSVs and memory snapshots.

pub mod agent;
pub mod embedding;
pub mod env;
pub mod error;
pub mod harness;
pub mod memory;
pub mod policy;

pub use error::CecError;
