//! Cooperative information agents modeled as deductive databases.
//!
//! Each agent combines sensed environment facts, inputs pushed by other agents,
//! and an acyclic rule base; its beliefs are the stable model of the three.
//! This crate grounds such systems, executes their runs, and checks how the
//! agents' beliefs converge against the combined "superagent" model.

pub mod agents;
pub mod grounder;
pub mod logic;
pub mod runtime;
pub mod scenarios;
mod syntax;
pub mod system;

pub use syntax::ParseError;
