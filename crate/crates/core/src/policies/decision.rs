use serde::{Deserialize, Serialize};

use crate::billing::BillingModel;
use crate::error::Result;
use crate::queueing::{
    blocking_probability, profit_rate, throughput_scale_up, throughput_steady, QueueParams,
};

/// Target fleet size for the next epoch.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PolicyDecision {
    pub n_next: u32,
    pub n_plus: u32,
    pub n_minus: u32,
    /// Modeled profit of the next epoch, cents/hour.
    pub predicted_profit: f64,
    /// Modeled steady-state blocking at `n_next`.
    pub predicted_blocking: f64,
}

impl PolicyDecision {
    /// Builds a decision moving from `n_current` to `n_next`, without a
    /// profit forecast.
    pub fn transition(n_current: u32, n_next: u32) -> Self {
        Self {
            n_next,
            n_plus: n_next.saturating_sub(n_current),
            n_minus: n_current.saturating_sub(n_next),
            predicted_profit: f64::NAN,
            predicted_blocking: f64::NAN,
        }
    }

    /// Builds a decision and fills in the modeled profit and blocking.
    pub fn scored(
        params: &QueueParams,
        billing: &BillingModel,
        n_current: u32,
        n_next: u32,
    ) -> Result<Self> {
        Ok(Self {
            predicted_profit: next_epoch_profit(params, billing, n_current, n_next)?,
            predicted_blocking: blocking_probability(params, n_next)?,
            ..Self::transition(n_current, n_next)
        })
    }
}

/// Profit per hour of moving from `n_current` to `candidate` servers.
///
/// Additions are scored with the boot-time-aware throughput; holds and
/// removals with steady-state throughput at the candidate size (teardown
/// time is ignored).
pub fn next_epoch_profit(
    params: &QueueParams,
    billing: &BillingModel,
    n_current: u32,
    candidate: u32,
) -> Result<f64> {
    let throughput = if candidate > n_current {
        throughput_scale_up(
            params,
            n_current,
            candidate - n_current,
            billing.boot_hours,
            billing.epoch_hours,
        )?
    } else {
        throughput_steady(params, candidate)?
    };
    let added = candidate.saturating_sub(n_current);
    let removed = n_current.saturating_sub(candidate);
    Ok(profit_rate(params, billing, candidate, throughput)
        - billing.transition_cost_rate(added, removed))
}

/// Steady-state profit per hour at `n` servers.
pub fn steady_profit(params: &QueueParams, billing: &BillingModel, n: u32) -> Result<f64> {
    Ok(profit_rate(
        params,
        billing,
        n,
        throughput_steady(params, n)?,
    ))
}
