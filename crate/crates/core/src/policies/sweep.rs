//! Sensitivity of the optimal decision to boot time, fleet size and charge.

use serde::{Deserialize, Serialize};

use super::optimal::optimal_decide;
use crate::billing::BillingModel;
use crate::error::{Error, Result};
use crate::queueing::QueueParams;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SweepAxis {
    /// Boot time, minutes.
    BootTime,
    /// Servers running at the decision instant.
    CurrentServers,
    /// Charge per job, cents.
    Charge,
}

impl std::str::FromStr for SweepAxis {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "t_u" | "t_U" | "boot" | "boot_time" => Ok(Self::BootTime),
            "n" | "n_current" | "servers" => Ok(Self::CurrentServers),
            "c" | "charge" => Ok(Self::Charge),
            other => Err(Error::config(format!("unknown sweep axis {other:?}"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SweepPoint {
    pub value: f64,
    /// Charge minus cost per job, `c - d/mu` (cents).
    pub margin_per_job: f64,
    pub n_current: u32,
    pub n_next: u32,
    pub n_plus: u32,
    pub n_minus: u32,
    pub predicted_profit: f64,
    pub predicted_blocking: f64,
}

/// Evenly spaced values from `start` to `end` inclusive.
pub fn linspace(start: f64, end: f64, steps: usize) -> Result<Vec<f64>> {
    if steps == 0 || !start.is_finite() || !end.is_finite() || end < start {
        return Err(Error::config(format!(
            "empty sweep range {start}..{end} with {steps} steps"
        )));
    }
    if steps == 1 {
        return Ok(vec![start]);
    }
    let h = (end - start) / (steps - 1) as f64;
    Ok((0..steps).map(|i| start + h * i as f64).collect())
}

/// Runs the optimal policy at each axis value, holding everything else fixed.
pub fn sweep(
    params: &QueueParams,
    billing: &BillingModel,
    n_current: u32,
    axis: SweepAxis,
    values: &[f64],
) -> Result<Vec<SweepPoint>> {
    if values.is_empty() {
        return Err(Error::config("sweep range is empty"));
    }
    values
        .iter()
        .map(|&value| {
            let mut b = *billing;
            let mut n = n_current;
            match axis {
                SweepAxis::BootTime => b.boot_hours = value / 60.0,
                SweepAxis::CurrentServers => {
                    if value < 0.0 || value.fract() != 0.0 {
                        return Err(Error::config(format!(
                            "server count {value} is not a whole number"
                        )));
                    }
                    n = value as u32;
                }
                SweepAxis::Charge => b.charge_per_job = value,
            }
            b.validate()?;
            let d = optimal_decide(params, &b, n)?;
            Ok(SweepPoint {
                value,
                margin_per_job: b.charge_per_job - b.cost_per_server_hour / (params.mu * 3600.0),
                n_current: n,
                n_next: d.n_next,
                n_plus: d.n_plus,
                n_minus: d.n_minus,
                predicted_profit: d.predicted_profit,
                predicted_blocking: d.predicted_blocking,
            })
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn setup() -> (QueueParams, BillingModel) {
        (
            QueueParams::poisson(300.0, 28.571),
            BillingModel {
                max_servers: 60,
                ..Default::default()
            },
        )
    }

    #[test]
    fn boot_time_sweep_shape() {
        let (p, b) = setup();
        let pts = sweep(
            &p,
            &b,
            15,
            SweepAxis::BootTime,
            &linspace(0.0, 50.0, 51).unwrap(),
        )
        .unwrap();
        for w in pts.windows(2) {
            assert!(w[1].n_plus <= w[0].n_plus);
            assert!(w[1].predicted_profit <= w[0].predicted_profit + 1e-9);
        }
        assert!(pts[0].n_plus > pts[50].n_plus);
    }

    #[test]
    fn single_point_and_empty_ranges() {
        let (p, b) = setup();
        assert_eq!(linspace(3.0, 3.0, 1).unwrap(), vec![3.0]);
        assert_eq!(
            sweep(&p, &b, 15, SweepAxis::Charge, &[0.0017])
                .unwrap()
                .len(),
            1
        );
        assert!(sweep(&p, &b, 15, SweepAxis::Charge, &[]).is_err());
        assert!(linspace(5.0, 1.0, 3).is_err());
        assert!(linspace(0.0, 1.0, 0).is_err());
    }

    #[test]
    fn axis_names() {
        assert_eq!("t_U".parse::<SweepAxis>().unwrap(), SweepAxis::BootTime);
        assert_eq!(
            "n_current".parse::<SweepAxis>().unwrap(),
            SweepAxis::CurrentServers
        );
        assert_eq!("charge".parse::<SweepAxis>().unwrap(), SweepAxis::Charge);
        assert!("x".parse::<SweepAxis>().is_err());
    }
}
