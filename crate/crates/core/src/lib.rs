//! Profit-maximizing server allocation for elastic loss systems.
//!
//! A provider earns a fixed charge per completed job and rents servers by the
//! started hour. Jobs that find every server busy are lost. This crate
//! estimates blocking and throughput of the resulting `G/GI/n/n` system
//! ([`queueing`]), sizes the fleet for the next epoch with several policies
//! ([`policies`]), forecasts load with multiplicative Holt-Winters
//! ([`forecast`]), builds workloads ([`workload`]) and replays them against a
//! simulated fleet with hourly billing ([`simulator`]).

// `!(x > 0.0)` is how validation rejects NaN along with out-of-range values.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod billing;
mod error;
pub mod forecast;
pub mod policies;
pub mod queueing;
pub mod simulator;
pub mod workload;

pub use billing::BillingModel;
pub use error::{Error, Result};
