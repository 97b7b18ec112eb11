//! Opportunistic offloading of crowdsensed data from vehicle-mounted
//! devices: a slot-based simulator, a fuzzy-tuned Q-learning agent and the
//! greedy and fixed-probability baselines it is compared against.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod error;
pub mod experiment;
pub mod fuzzy;
pub mod metrics;
pub mod mobility;
pub mod qlearning;
pub mod sim;
pub mod spatial;
pub mod strategies;

pub use error::{Error, Result};
