//! Fleet-sizing policies.
//!
//! The predictive policies ([`optimal_decide`], [`qed_decide`],
//! [`grassmann_decide`]) map a forecast of the next epoch to a target server
//! count; [`always_on_decide`] and [`reactive_step`] are the static and
//! threshold-driven baselines.

mod baseline;
mod decision;
mod optimal;
mod staffing;
pub mod sweep;

pub use baseline::{always_on_decide, reactive_step, ReactiveConfig, UtilizationWindow};
pub use decision::{next_epoch_profit, steady_profit, PolicyDecision};
pub use optimal::{exhaustive_decide, optimal_decide};
pub use staffing::{alpha_star, grassmann_decide, hedge, qed_decide, round_g, z_from_alpha, Hedge};
