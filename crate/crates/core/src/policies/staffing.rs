//! Square-root safety staffing: QED and Grassmann heuristics.

use serde::{Deserialize, Serialize};

use super::decision::{steady_profit, PolicyDecision};
use crate::billing::BillingModel;
use crate::error::{Error, Result};
use crate::queueing::{normal_sf, QueueParams};

/// Smallest overload probability fed to the normal quantile; reached when
/// servers are free (`d = 0`).
const MIN_ALPHA: f64 = 1e-12;

/// Overload probability at which adding one more server breaks even:
/// `alpha = d / (c mu)` with `c mu` converted to cents per server-hour.
pub fn alpha_star(charge_per_job: f64, cost_per_server_hour: f64, mu: f64) -> Result<f64> {
    if !(charge_per_job > 0.0) || !(mu > 0.0) || !(cost_per_server_hour >= 0.0) {
        return Err(Error::domain(format!(
            "alpha needs c > 0, mu > 0, d >= 0 (c={charge_per_job}, d={cost_per_server_hour}, mu={mu})"
        )));
    }
    let alpha = cost_per_server_hour / (charge_per_job * mu * 3600.0);
    if alpha >= 1.0 {
        return Err(Error::DegenerateEconomics { alpha });
    }
    Ok(alpha)
}

// Acklam's rational approximation to the normal quantile.
const A: [f64; 6] = [
    -3.969_683_028_665_376e1,
    2.209_460_984_245_205e2,
    -2.759_285_104_469_687e2,
    1.383_577_518_672_69e2,
    -3.066_479_806_614_716e1,
    2.506_628_277_459_239,
];
const B: [f64; 5] = [
    -5.447_609_879_822_406e1,
    1.615_858_368_580_409e2,
    -1.556_989_798_598_866e2,
    6.680_131_188_771_972e1,
    -1.328_068_155_288_572e1,
];
const C: [f64; 6] = [
    -7.784_894_002_430_293e-3,
    -3.223_964_580_411_365e-1,
    -2.400_758_277_161_838,
    -2.549_732_539_343_734,
    4.374_664_141_464_968,
    2.938_163_982_698_783,
];
const D: [f64; 4] = [
    7.784_695_709_041_462e-3,
    3.224_671_290_700_398e-1,
    2.445_134_137_142_996,
    3.754_408_661_907_416,
];

/// Standard normal quantile for `p` in (0, 1): Acklam's approximation
/// (relative error ~1e-9) followed by one Halley step against `erfc`.
fn normal_quantile(p: f64) -> f64 {
    const P_LOW: f64 = 0.02425;
    let x = if p < P_LOW {
        let q = (-2.0 * p.ln()).sqrt();
        (((((C[0] * q + C[1]) * q + C[2]) * q + C[3]) * q + C[4]) * q + C[5])
            / ((((D[0] * q + D[1]) * q + D[2]) * q + D[3]) * q + 1.0)
    } else if p <= 1.0 - P_LOW {
        let q = p - 0.5;
        let r = q * q;
        (((((A[0] * r + A[1]) * r + A[2]) * r + A[3]) * r + A[4]) * r + A[5]) * q
            / (((((B[0] * r + B[1]) * r + B[2]) * r + B[3]) * r + B[4]) * r + 1.0)
    } else {
        let q = (-2.0 * (1.0 - p).ln()).sqrt();
        -(((((C[0] * q + C[1]) * q + C[2]) * q + C[3]) * q + C[4]) * q + C[5])
            / ((((D[0] * q + D[1]) * q + D[2]) * q + D[3]) * q + 1.0)
    };
    let e = normal_sf(-x) - p;
    let u = e * (2.0 * std::f64::consts::PI).sqrt() * (0.5 * x * x).exp();
    x - u / (1.0 + 0.5 * x * u)
}

/// Hedging coefficient `z_alpha = Phi^{-1}(1 - alpha)`. Negative for
/// `alpha > 1/2` (staffing below the offered load).
pub fn z_from_alpha(alpha: f64) -> Result<f64> {
    if !(alpha > 0.0 && alpha < 1.0) {
        return Err(Error::domain(format!(
            "alpha must lie in (0, 1), got {alpha}"
        )));
    }
    Ok(-normal_quantile(alpha))
}

/// Rounds a fractional staffing level to whichever neighbouring integer
/// earns more steady-state profit; the ceiling wins ties.
pub fn round_g(x: f64, params: &QueueParams, billing: &BillingModel) -> Result<u32> {
    let x = x.clamp(0.0, billing.max_servers as f64);
    let lo = x.floor();
    let hi = x.ceil();
    if lo == hi {
        return Ok(lo as u32);
    }
    let (lo, hi) = (lo as u32, hi as u32);
    if steady_profit(params, billing, hi)? >= steady_profit(params, billing, lo)? {
        Ok(hi)
    } else {
        Ok(lo)
    }
}

/// Hedge constants used by both staffing heuristics.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Hedge {
    pub alpha: f64,
    pub z_alpha: f64,
}

/// `alpha` and `z_alpha` for the given economics, or `None` when no server
/// can pay for itself.
pub fn hedge(billing: &BillingModel, mu: f64) -> Result<Option<Hedge>> {
    match alpha_star(billing.charge_per_job, billing.cost_per_server_hour, mu) {
        Ok(alpha) => {
            let z_alpha = z_from_alpha(alpha.max(MIN_ALPHA))?;
            Ok(Some(Hedge { alpha, z_alpha }))
        }
        Err(Error::DegenerateEconomics { .. }) => Ok(None),
        Err(e) => Err(e),
    }
}

fn staffing_decide(
    params: &QueueParams,
    billing: &BillingModel,
    n_current: u32,
    hedge_variance: f64,
) -> Result<PolicyDecision> {
    params.validate()?;
    let rho = params.rho();
    let hedge = if rho > 0.0 {
        hedge(billing, params.mu)?
    } else {
        None
    };
    let n_next = match hedge {
        None => 0,
        Some(h) => round_g(
            rho + h.z_alpha * (rho + hedge_variance).sqrt(),
            params,
            billing,
        )?,
    };
    PolicyDecision::scored(params, billing, n_current, n_next)
}

/// `n = G(rho + z_alpha sqrt(rho))`.
pub fn qed_decide(
    params: &QueueParams,
    billing: &BillingModel,
    n_current: u32,
) -> Result<PolicyDecision> {
    staffing_decide(params, billing, n_current, 0.0)
}

/// `n = G(rho + z_alpha sqrt(rho + var_rho))`, widening the QED hedge by the
/// variance of the load itself.
pub fn grassmann_decide(
    params: &QueueParams,
    billing: &BillingModel,
    var_rho: f64,
    n_current: u32,
) -> Result<PolicyDecision> {
    if !(var_rho >= 0.0) {
        return Err(Error::domain(format!(
            "load variance must be >= 0, got {var_rho}"
        )));
    }
    staffing_decide(params, billing, n_current, var_rho)
}
