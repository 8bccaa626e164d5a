//! Local-information graph algorithms on preferential attachment graphs.

pub mod algorithms;
pub mod baselines;
pub mod families;
pub mod graph;
pub mod harness;
pub mod oracle;
pub mod pa;
pub mod rng;
