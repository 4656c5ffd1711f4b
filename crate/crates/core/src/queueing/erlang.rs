//! Erlang-B loss formula, at integer and real order.

use super::quadrature::{integrate_pieces, Tolerance};
use crate::error::{Error, Result};

/// Blocking probability of an M/M/n/n system offered `rho` Erlangs.
///
/// Uses the recurrence `B(k) = rho B(k-1) / (k + rho B(k-1))`, `B(0) = 1`,
/// which stays in [0, 1] at every step.
pub fn erlang_b(n: u32, rho: f64) -> f64 {
    debug_assert!(rho >= 0.0, "offered load must be non-negative");
    let mut b = 1.0;
    for k in 1..=n {
        let rb = rho * b;
        b = rb / (k as f64 + rb);
    }
    b
}

/// Log of the integrand `e^{-a t} (1 + t)^x`.
fn log_kernel(x: f64, a: f64, t: f64) -> f64 {
    x * t.ln_1p() - a * t
}

/// Erlang-B extended to a real number of servers `x`, via
/// `1/B(x, a) = a * integral_0^inf e^{-a t} (1+t)^x dt`.
///
/// The integrand is rescaled by its maximum (at `t* = max(0, x/a - 1)`) so
/// the quadrature never overflows, split at the mode, and truncated once it
/// has decayed by `e^-60` relative to the peak.
pub fn erlang_b_real(x: f64, a: f64) -> Result<f64> {
    erlang_b_real_with(x, a, Tolerance::default())
}

pub fn erlang_b_real_with(x: f64, a: f64, tol: Tolerance) -> Result<f64> {
    if !(x >= 0.0) || !(a >= 0.0) || !x.is_finite() || !a.is_finite() {
        return Err(Error::domain(format!(
            "erlang_b_real needs finite x >= 0 and a >= 0, got x={x}, a={a}"
        )));
    }
    if a == 0.0 {
        return Ok(if x == 0.0 { 1.0 } else { 0.0 });
    }

    let mode = (x / a - 1.0).max(0.0);
    let log_peak = log_kernel(x, a, mode);
    // Curvature at the mode is -a^2/x; below that the tail decays at least
    // like e^{-(a - x/(1+t)) t}.
    let width = if x > 0.0 { x.sqrt() / a } else { 1.0 / a }.max(1.0 / a);

    const CUTOFF: f64 = 60.0;
    let mut hi = mode + width;
    while log_kernel(x, a, hi) - log_peak > -CUTOFF {
        hi = mode + 2.0 * (hi - mode);
    }
    let mut breaks = Vec::with_capacity(6);
    breaks.push(0.0);
    if mode > 0.0 {
        let lo_side = mode - 4.0 * width;
        if lo_side > 0.0 {
            breaks.push(lo_side);
        }
        breaks.push(mode);
    }
    let hi_side = mode + 4.0 * width;
    if hi_side < hi {
        breaks.push(hi_side);
    }
    breaks.push(hi);

    let scaled = integrate_pieces(|t| (log_kernel(x, a, t) - log_peak).exp(), &breaks, tol)?;
    // 1/B = a * e^{log_peak} * I  =>  B = e^{-log_peak} / (a I)
    let log_inv_b = a.ln() + log_peak + scaled.value.ln();
    Ok((-log_inv_b).exp().min(1.0))
}
