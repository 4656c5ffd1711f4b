//! WebAssembly bindings for the browser demo in `www/`.
//!
//! Every export returns a JSON string; the page parses it and draws. The
//! plain Rust functions behind the exports are public so they can be tested
//! natively.

use profitscale::policies::sweep::{linspace, sweep, SweepAxis, SweepPoint};
use profitscale::policies::{
    grassmann_decide, next_epoch_profit, optimal_decide, qed_decide, PolicyDecision,
};
use profitscale::queueing::{blocking_probability, erlang_b, QueueParams};
use profitscale::BillingModel;
use serde::Serialize;
use wasm_bindgen::prelude::*;

/// Largest fleet the page may ask for; keeps each call interactive.
pub const MAX_FLEET: u32 = 400;

#[derive(Debug, Serialize)]
pub struct BlockingPoint {
    pub n: u32,
    /// Poisson arrivals.
    pub erlang: f64,
    /// Arrivals with the requested scv, via peakedness.
    pub hayward: f64,
}

#[derive(Debug, Serialize)]
pub struct ProfitCurve {
    /// Modeled next-epoch profit, cents/hour, for `n = 0..=max_servers`.
    pub profit: Vec<f64>,
    pub optimal: PolicyDecision,
    pub qed: PolicyDecision,
    pub grassmann: PolicyDecision,
}

fn check_fleet(n: u32) -> Result<(), String> {
    if n > MAX_FLEET {
        return Err(format!(
            "fleet sizes above {MAX_FLEET} are not supported here"
        ));
    }
    Ok(())
}

fn billing(
    charge: f64,
    cost: f64,
    boot_minutes: f64,
    max_servers: u32,
) -> Result<BillingModel, String> {
    check_fleet(max_servers)?;
    let b = BillingModel {
        charge_per_job: charge,
        cost_per_server_hour: cost,
        boot_hours: boot_minutes / 60.0,
        max_servers,
        ..BillingModel::default()
    };
    b.validate().map_err(|e| e.to_string())?;
    Ok(b)
}

fn params(lambda: f64, mu: f64, ca2: f64) -> Result<QueueParams, String> {
    let p = QueueParams::poisson(lambda, mu).with_ca2(ca2);
    p.validate().map_err(|e| e.to_string())?;
    Ok(p)
}

fn to_json<T: Serialize>(value: &T) -> Result<String, String> {
    serde_json::to_string(value).map_err(|e| e.to_string())
}

/// Blocking against fleet size at a fixed offered load.
pub fn blocking_curve_points(rho: f64, ca2: f64, n_max: u32) -> Result<Vec<BlockingPoint>, String> {
    check_fleet(n_max)?;
    let p = params(rho, 1.0, ca2)?;
    (0..=n_max)
        .map(|n| {
            Ok(BlockingPoint {
                n,
                erlang: erlang_b(n, rho),
                hayward: blocking_probability(&p, n).map_err(|e| e.to_string())?,
            })
        })
        .collect()
}

/// Profit against fleet size, with the three predictive decisions.
#[allow(clippy::too_many_arguments)]
pub fn profit_curve_data(
    lambda: f64,
    mu: f64,
    ca2: f64,
    charge: f64,
    cost: f64,
    boot_minutes: f64,
    n_current: u32,
    max_servers: u32,
    var_rho: f64,
) -> Result<ProfitCurve, String> {
    let p = params(lambda, mu, ca2)?;
    let b = billing(charge, cost, boot_minutes, max_servers)?;
    let err = |e: profitscale::Error| e.to_string();
    let profit = (0..=max_servers)
        .map(|n| next_epoch_profit(&p, &b, n_current, n).map_err(err))
        .collect::<Result<Vec<_>, _>>()?;
    Ok(ProfitCurve {
        profit,
        optimal: optimal_decide(&p, &b, n_current).map_err(err)?,
        qed: qed_decide(&p, &b, n_current).map_err(err)?,
        grassmann: grassmann_decide(&p, &b, var_rho, n_current).map_err(err)?,
    })
}

/// Optimal decision along one parameter axis (`t_U`, `n_current`, `charge`).
#[allow(clippy::too_many_arguments)]
pub fn sensitivity_points(
    axis: &str,
    from: f64,
    to: f64,
    steps: usize,
    lambda: f64,
    mu: f64,
    charge: f64,
    cost: f64,
    n_current: u32,
    max_servers: u32,
) -> Result<Vec<SweepPoint>, String> {
    if steps > 500 {
        return Err("at most 500 steps".into());
    }
    let axis: SweepAxis = axis
        .parse()
        .map_err(|e: profitscale::Error| e.to_string())?;
    let values = linspace(from, to, steps).map_err(|e| e.to_string())?;
    let p = params(lambda, mu, 1.0)?;
    let b = billing(charge, cost, 5.0, max_servers)?;
    sweep(&p, &b, n_current, axis, &values).map_err(|e| e.to_string())
}

#[wasm_bindgen]
pub fn blocking_curve(rho: f64, ca2: f64, n_max: u32) -> Result<String, JsError> {
    blocking_curve_points(rho, ca2, n_max)
        .and_then(|v| to_json(&v))
        .map_err(|e| JsError::new(&e))
}

#[wasm_bindgen]
#[allow(clippy::too_many_arguments)]
pub fn profit_curve(
    lambda: f64,
    mu: f64,
    ca2: f64,
    charge: f64,
    cost: f64,
    boot_minutes: f64,
    n_current: u32,
    max_servers: u32,
    var_rho: f64,
) -> Result<String, JsError> {
    profit_curve_data(
        lambda,
        mu,
        ca2,
        charge,
        cost,
        boot_minutes,
        n_current,
        max_servers,
        var_rho,
    )
    .and_then(|v| to_json(&v))
    .map_err(|e| JsError::new(&e))
}

#[wasm_bindgen]
#[allow(clippy::too_many_arguments)]
pub fn sensitivity(
    axis: &str,
    from: f64,
    to: f64,
    steps: usize,
    lambda: f64,
    mu: f64,
    charge: f64,
    cost: f64,
    n_current: u32,
    max_servers: u32,
) -> Result<String, JsError> {
    sensitivity_points(
        axis,
        from,
        to,
        steps,
        lambda,
        mu,
        charge,
        cost,
        n_current,
        max_servers,
    )
    .and_then(|v| to_json(&v))
    .map_err(|e| JsError::new(&e))
}
