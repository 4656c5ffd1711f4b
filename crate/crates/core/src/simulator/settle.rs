use serde::{Deserialize, Serialize};

/// Rental period of one server, seconds since the start of the run.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ServerLifecycle {
    pub id: u32,
    pub acquired_at: f64,
    /// `None` while the server is still held at the horizon.
    pub terminated_at: Option<f64>,
}

impl ServerLifecycle {
    pub fn active_seconds(&self, horizon: f64) -> f64 {
        (self.terminated_at.unwrap_or(horizon).min(horizon) - self.acquired_at).max(0.0)
    }

    /// Start instants of every billed hour.
    pub fn hour_starts(&self, horizon: f64) -> impl Iterator<Item = f64> + '_ {
        let acquired = self.acquired_at;
        (0..billed_hours(self.active_seconds(horizon))).map(move |h| acquired + 3600.0 * h as f64)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Settlement {
    pub server_hours: u64,
    /// Cents.
    pub cost: f64,
}

/// Every started hour is charged in full.
pub fn billed_hours(active_seconds: f64) -> u64 {
    (active_seconds / 3600.0).ceil().max(0.0) as u64
}

/// Hours and rent for all servers; a server still held at `horizon` is
/// billed up to the horizon.
pub fn billing_settle(
    servers: &[ServerLifecycle],
    horizon: f64,
    cost_per_server_hour: f64,
) -> Settlement {
    let server_hours = servers
        .iter()
        .map(|s| billed_hours(s.active_seconds(horizon)))
        .sum::<u64>();
    Settlement {
        server_hours,
        cost: cost_per_server_hour * server_hours as f64,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn held(acquired_at: f64, terminated_at: f64) -> ServerLifecycle {
        ServerLifecycle {
            id: 0,
            acquired_at,
            terminated_at: Some(terminated_at),
        }
    }

    #[test]
    fn partial_hours_round_up() {
        assert_eq!(billed_hours(61.0 * 60.0), 2);
        assert_eq!(billed_hours(3600.0), 1);
        assert_eq!(billed_hours(1.0), 1);
        assert_eq!(billed_hours(0.0), 0);
    }

    #[test]
    fn full_day_fleet() {
        let fleet: Vec<ServerLifecycle> = (0..20)
            .map(|id| ServerLifecycle {
                id,
                acquired_at: 0.0,
                terminated_at: None,
            })
            .collect();
        let s = billing_settle(&fleet, 86_400.0, 17.0);
        assert_eq!(s.server_hours, 480);
        assert_eq!(s.cost, 480.0 * 17.0);
    }

    #[test]
    fn hour_starts_follow_acquisition() {
        let s = held(1800.0, 1800.0 + 3601.0);
        assert_eq!(s.hour_starts(1e9).collect::<Vec<_>>(), vec![1800.0, 5400.0]);
        assert_eq!(held(0.0, 7200.0).hour_starts(3600.0).count(), 1);
    }
}
