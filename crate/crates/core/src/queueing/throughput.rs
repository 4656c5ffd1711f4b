use super::{blocking_probability, transient_blocking, QueueParams};
use crate::billing::BillingModel;
use crate::error::{Error, Result};

const SECONDS_PER_HOUR: f64 = 3600.0;

/// Carried traffic `lambda * (1 - p_n)`, jobs/second.
pub fn throughput_steady(params: &QueueParams, n: u32) -> Result<f64> {
    Ok(params.lambda * (1.0 - blocking_probability(params, n)?))
}

/// Mean throughput over the next epoch when `n_plus` servers are added at its
/// start and only become usable after `boot_hours`.
pub fn throughput_scale_up(
    params: &QueueParams,
    n: u32,
    n_plus: u32,
    boot_hours: f64,
    epoch_hours: f64,
) -> Result<f64> {
    if !(0.0..=epoch_hours).contains(&boot_hours) {
        return Err(Error::config(format!(
            "boot time {boot_hours} h outside [0, {epoch_hours}] h"
        )));
    }
    let booting = boot_hours / epoch_hours;
    let old = if booting > 0.0 {
        1.0 - transient_blocking(params, n)?
    } else {
        0.0
    };
    let new = if booting < 1.0 {
        1.0 - transient_blocking(params, n + n_plus)?
    } else {
        0.0
    };
    Ok(params.lambda * (booting * old + (1.0 - booting) * new))
}

/// Mean throughput over the current epoch when `n_minus` servers are released
/// `teardown_hours` before its end.
pub fn throughput_scale_down(
    params: &QueueParams,
    n: u32,
    n_minus: u32,
    teardown_hours: f64,
    epoch_hours: f64,
) -> Result<f64> {
    if n_minus > n {
        return Err(Error::config(format!(
            "cannot remove {n_minus} of {n} servers"
        )));
    }
    if !(0.0..=epoch_hours).contains(&teardown_hours) {
        return Err(Error::config(format!(
            "teardown time {teardown_hours} h outside [0, {epoch_hours}] h"
        )));
    }
    let draining = teardown_hours / epoch_hours;
    let before = if draining < 1.0 {
        1.0 - transient_blocking(params, n)?
    } else {
        0.0
    };
    let after = if draining > 0.0 {
        1.0 - transient_blocking(params, n - n_minus)?
    } else {
        0.0
    };
    Ok(params.lambda * ((1.0 - draining) * before + draining * after))
}

/// Profit per hour (cents) of running `n` servers that carry `throughput`
/// jobs/second. The optional denial-of-service penalty is charged on
/// `lambda - throughput`; transition costs are accounted separately via
/// [`BillingModel::transition_cost_rate`].
pub fn profit_rate(params: &QueueParams, billing: &BillingModel, n: u32, throughput: f64) -> f64 {
    let revenue = billing.charge_per_job * throughput * SECONDS_PER_HOUR;
    let rent = billing.cost_per_server_hour * n as f64;
    let penalty = billing.penalty_per_lost_job.map_or(0.0, |s| {
        s * (params.lambda - throughput).max(0.0) * SECONDS_PER_HOUR
    });
    revenue - rent - penalty
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::queueing::erlang_b;

    fn reference_params() -> QueueParams {
        QueueParams::poisson(300.0, 28.571)
    }

    #[test]
    fn steady_throughput() {
        let p = reference_params();
        assert_eq!(throughput_steady(&p, 0).unwrap(), 0.0);
        let t = throughput_steady(&p, 20).unwrap();
        let oracle = 300.0 * (1.0 - erlang_b(20, 300.0 / 28.571));
        assert!((t - oracle).abs() < 1e-12);
        assert_eq!(
            throughput_steady(&QueueParams::poisson(0.0, 2.0), 3).unwrap(),
            0.0
        );
    }

    #[test]
    fn scale_up_endpoints() {
        let p = reference_params();
        let at_new = throughput_steady(&p, 17).unwrap();
        let at_old = throughput_steady(&p, 15).unwrap();
        assert_eq!(throughput_scale_up(&p, 15, 2, 0.0, 1.0).unwrap(), at_new);
        assert_eq!(throughput_scale_up(&p, 15, 2, 1.0, 1.0).unwrap(), at_old);
        assert!((throughput_scale_up(&p, 15, 0, 0.4, 1.0).unwrap() - at_old).abs() < 1e-12);
    }

    #[test]
    fn scale_up_mixes_blocking_levels() {
        let p = reference_params();
        let rho = 300.0 / 28.571;
        let t = throughput_scale_up(&p, 15, 2, 10.0 / 60.0, 1.0).unwrap();
        let oracle = 300.0
            * ((1.0 / 6.0) * (1.0 - erlang_b(15, rho)) + (5.0 / 6.0) * (1.0 - erlang_b(17, rho)));
        assert!((t - oracle).abs() < 1e-10);
    }

    #[test]
    fn scale_down_mixes_blocking_levels() {
        let p = reference_params();
        let rho = 300.0 / 28.571;
        let t = throughput_scale_down(&p, 15, 3, 2.0 / 60.0, 1.0).unwrap();
        let oracle = 300.0
            * ((58.0 / 60.0) * (1.0 - erlang_b(15, rho))
                + (2.0 / 60.0) * (1.0 - erlang_b(12, rho)));
        assert!((t - oracle).abs() < 1e-10);
        let steady = throughput_steady(&p, 15).unwrap();
        assert_eq!(throughput_scale_down(&p, 15, 3, 0.0, 1.0).unwrap(), steady);
        assert_eq!(throughput_scale_down(&p, 15, 0, 0.5, 1.0).unwrap(), steady);
    }

    #[test]
    fn transient_argument_errors() {
        let p = reference_params();
        assert!(throughput_scale_up(&p, 1, 1, 2.0, 1.0).is_err());
        assert!(throughput_scale_down(&p, 2, 3, 0.1, 1.0).is_err());
    }

    #[test]
    fn profit_arithmetic() {
        let p = reference_params();
        let b = BillingModel::default();
        assert_eq!(profit_rate(&p, &b, 0, 0.0), 0.0);
        let got = profit_rate(&p, &b, 20, 300.0);
        assert!((got - 1496.0).abs() < 1e-9, "{got}");

        let with_penalty = BillingModel {
            penalty_per_lost_job: Some(0.001),
            ..b
        };
        let got = profit_rate(&p, &with_penalty, 20, 290.0);
        let want = 0.0017 * 290.0 * 3600.0 - 340.0 - 0.001 * 10.0 * 3600.0;
        assert!((got - want).abs() < 1e-9);
    }
}
