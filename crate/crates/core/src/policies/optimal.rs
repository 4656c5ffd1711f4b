use super::decision::{next_epoch_profit, PolicyDecision};
use crate::billing::BillingModel;
use crate::error::Result;
use crate::queueing::QueueParams;

/// Consecutive declines after which the outward scan stops.
const DECLINE_RUN: u32 = 3;

/// Picks the fleet size maximizing modeled next-epoch profit.
///
/// The objective is unimodal in `n`, so the search scans outward from
/// `n_current` in both directions and stops a direction after
/// [`DECLINE_RUN`] consecutive declines. Ties go to the smaller `n`.
pub fn optimal_decide(
    params: &QueueParams,
    billing: &BillingModel,
    n_current: u32,
) -> Result<PolicyDecision> {
    let n_max = billing.max_servers;
    let start = n_current.min(n_max);
    let score = |n: u32| next_epoch_profit(params, billing, n_current, n);

    let mut best_n = start;
    let mut best = score(start)?;

    let mut prev = best;
    let mut declines = 0;
    let mut n = start;
    while n < n_max && declines < DECLINE_RUN {
        n += 1;
        let p = score(n)?;
        if p > best {
            best = p;
            best_n = n;
        }
        declines = if p < prev { declines + 1 } else { 0 };
        prev = p;
    }

    let mut prev = score(start)?;
    let mut declines = 0;
    let mut n = start;
    while n > 0 && declines < DECLINE_RUN {
        n -= 1;
        let p = score(n)?;
        if p >= best {
            best = p;
            best_n = n;
        }
        declines = if p < prev { declines + 1 } else { 0 };
        prev = p;
    }

    PolicyDecision::scored(params, billing, n_current, best_n)
}

/// Exhaustive argmax of the same objective over `0..=scan_max`.
pub fn exhaustive_decide(
    params: &QueueParams,
    billing: &BillingModel,
    n_current: u32,
    scan_max: u32,
) -> Result<PolicyDecision> {
    let mut best_n = 0;
    let mut best = f64::NEG_INFINITY;
    for n in 0..=scan_max {
        let p = next_epoch_profit(params, billing, n_current, n)?;
        if p > best {
            best = p;
            best_n = n;
        }
    }
    PolicyDecision::scored(params, billing, n_current, best_n)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn reference() -> (QueueParams, BillingModel) {
        (
            QueueParams::poisson(300.0, 28.571),
            BillingModel {
                max_servers: 200,
                ..Default::default()
            },
        )
    }

    #[test]
    fn matches_exhaustive_scan() {
        let (p, b) = reference();
        for n_current in [0, 5, 13, 15, 30, 120] {
            let fast = optimal_decide(&p, &b, n_current).unwrap();
            let slow = exhaustive_decide(&p, &b, n_current, 200).unwrap();
            assert_eq!(fast.n_next, slow.n_next, "n_current={n_current}");
            assert_eq!(fast.n_next, n_current + fast.n_plus - fast.n_minus);
        }
    }

    #[test]
    fn no_traffic_releases_everything() {
        let (_, b) = reference();
        let p = QueueParams::poisson(0.0, 28.571);
        let d = optimal_decide(&p, &b, 7).unwrap();
        assert_eq!(d.n_next, 0);
        assert_eq!(d.n_minus, 7);
    }

    #[test]
    fn unprofitable_charge_releases_everything() {
        let (p, mut b) = reference();
        // revenue per server-hour at full load is c * mu * 3600 = 0.5 d
        b.charge_per_job = 0.5 * b.cost_per_server_hour / (28.571 * 3600.0);
        let d = optimal_decide(&p, &b, 13).unwrap();
        assert_eq!(d.n_next, 0);
    }

    #[test]
    fn respects_fleet_cap() {
        let (p, mut b) = reference();
        b.max_servers = 8;
        let d = optimal_decide(&p, &b, 3).unwrap();
        assert_eq!(d.n_next, 8);
        let d = optimal_decide(&p, &b, 12).unwrap();
        assert!(d.n_next <= 8);
    }
}
