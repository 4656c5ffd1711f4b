//! Economic constants of the provider: revenue per job, rent per server-hour,
//! epoch timing and optional penalty/transition terms.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// All money is in cents; all times in hours.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BillingModel {
    /// Revenue per completed job.
    pub charge_per_job: f64,
    /// Rent per server-hour.
    pub cost_per_server_hour: f64,
    /// Epoch length `k`.
    pub epoch_hours: f64,
    /// Boot time `t_U` of a newly acquired server.
    pub boot_hours: f64,
    /// Teardown time `t_D` of a released server.
    pub teardown_hours: f64,
    /// Penalty per rejected job, if denial of service is charged.
    pub penalty_per_lost_job: Option<f64>,
    /// One-off cost of acquiring a server.
    pub acquire_cost: Option<f64>,
    /// One-off cost of releasing a server.
    pub release_cost: Option<f64>,
    pub max_servers: u32,
}

impl Default for BillingModel {
    /// 0.0017 cents/job, 17 cents/server-hour, hourly epochs, 5 min boot,
    /// 2 min teardown, at most 20 servers.
    fn default() -> Self {
        Self {
            charge_per_job: 0.0017,
            cost_per_server_hour: 17.0,
            epoch_hours: 1.0,
            boot_hours: 5.0 / 60.0,
            teardown_hours: 2.0 / 60.0,
            penalty_per_lost_job: None,
            acquire_cost: None,
            release_cost: None,
            max_servers: 20,
        }
    }
}

impl BillingModel {
    pub fn validate(&self) -> Result<()> {
        let finite_nonneg = |v: f64| v.is_finite() && v >= 0.0;
        if !finite_nonneg(self.charge_per_job) {
            return Err(Error::config("charge per job must be >= 0"));
        }
        if !finite_nonneg(self.cost_per_server_hour) {
            return Err(Error::config("cost per server-hour must be >= 0"));
        }
        if !(self.epoch_hours > 0.0 && self.epoch_hours.is_finite()) {
            return Err(Error::config("epoch length must be > 0"));
        }
        if !finite_nonneg(self.boot_hours) || self.boot_hours > self.epoch_hours {
            return Err(Error::config("boot time must lie in [0, epoch length]"));
        }
        if !finite_nonneg(self.teardown_hours) || self.teardown_hours > self.epoch_hours {
            return Err(Error::config("teardown time must lie in [0, epoch length]"));
        }
        for (name, v) in [
            ("penalty", self.penalty_per_lost_job),
            ("acquire cost", self.acquire_cost),
            ("release cost", self.release_cost),
        ] {
            if let Some(v) = v {
                if !finite_nonneg(v) {
                    return Err(Error::config(format!("{name} must be >= 0")));
                }
            }
        }
        if self.max_servers < 1 {
            return Err(Error::config("max servers must be >= 1"));
        }
        Ok(())
    }

    /// Transition costs of one decision, amortized over an epoch (cents/hour).
    pub fn transition_cost_rate(&self, added: u32, removed: u32) -> f64 {
        let up = self.acquire_cost.unwrap_or(0.0) * added as f64;
        let down = self.release_cost.unwrap_or(0.0) * removed as f64;
        (up + down) / self.epoch_hours
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults_are_valid() {
        BillingModel::default().validate().unwrap();
    }

    #[test]
    fn boot_longer_than_epoch_is_rejected() {
        let b = BillingModel {
            boot_hours: 1.5,
            ..Default::default()
        };
        assert!(matches!(b.validate(), Err(Error::InvalidConfig(_))));
    }

    #[test]
    fn transition_costs_amortize_over_epoch() {
        let b = BillingModel {
            acquire_cost: Some(3.0),
            release_cost: Some(1.0),
            epoch_hours: 2.0,
            ..Default::default()
        };
        assert_eq!(b.transition_cost_rate(2, 0), 3.0);
        assert_eq!(b.transition_cost_rate(0, 4), 2.0);
        assert_eq!(BillingModel::default().transition_cost_rate(5, 5), 0.0);
    }
}
