//! Blocking and throughput of the `G/GI/n/n` loss system.
//!
//! Erlang-B is exact for Poisson arrivals; for other arrival streams the
//! server count and offered load are both divided by the peakedness `z`
//! (Hayward's approximation), which requires Erlang-B at non-integer order.

mod erlang;
mod peakedness;
pub mod quadrature;
mod throughput;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub use erlang::{erlang_b, erlang_b_real, erlang_b_real_with};
pub(crate) use peakedness::normal_sf;
pub use peakedness::{eta, peakedness, Peakedness, MIN_PEAKEDNESS};
pub use throughput::{profit_rate, throughput_scale_down, throughput_scale_up, throughput_steady};

/// Shape of the service-time CDF used for the peakedness integral.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum ServiceModel {
    #[default]
    Exponential,
    /// Normal with mean `1/mu` and std dev `sigma_s`, integrated over `t >= 0`.
    GeneralNormalApprox,
    Deterministic,
}

/// Blocking model used inside the transient (scale up/down) estimators.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum TransientBlocking {
    /// Same Hayward-corrected blocking as the steady state.
    #[default]
    Hayward,
    /// Plain Erlang-B at the server-level load.
    ErlangB,
}

/// Summary of the arrival and service processes for one epoch.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct QueueParams {
    /// Arrival rate, jobs/second.
    pub lambda: f64,
    /// Service rate of one server, jobs/second.
    pub mu: f64,
    /// Squared coefficient of variation of interarrival times.
    pub ca2: f64,
    /// Standard deviation of a job's service time, seconds.
    pub sigma_s: f64,
    pub service_model: ServiceModel,
    pub transient: TransientBlocking,
    /// Concurrent job slots per server. With `m > 1` a fleet of `n` servers
    /// is modeled as `n*m` slots each serving at `mu/m`.
    pub slots_per_server: u32,
}

impl QueueParams {
    /// Poisson arrivals, exponential service.
    pub fn poisson(lambda: f64, mu: f64) -> Self {
        Self {
            lambda,
            mu,
            ca2: 1.0,
            sigma_s: 1.0 / mu,
            service_model: ServiceModel::Exponential,
            transient: TransientBlocking::Hayward,
            slots_per_server: 1,
        }
    }

    pub fn with_ca2(mut self, ca2: f64) -> Self {
        self.ca2 = ca2;
        self
    }

    pub fn with_service(mut self, model: ServiceModel, sigma_s: f64) -> Self {
        self.service_model = model;
        self.sigma_s = sigma_s;
        self
    }

    /// Offered load in Erlangs.
    pub fn rho(&self) -> f64 {
        self.lambda / self.mu
    }

    pub fn validate(&self) -> Result<()> {
        let ok = self.lambda >= 0.0
            && self.lambda.is_finite()
            && self.mu > 0.0
            && self.mu.is_finite()
            && self.ca2 >= 0.0
            && self.ca2.is_finite()
            && self.sigma_s >= 0.0
            && self.sigma_s.is_finite()
            && self.slots_per_server >= 1;
        if ok {
            Ok(())
        } else {
            Err(Error::domain(format!("invalid queue parameters: {self:?}")))
        }
    }

    fn slot_rate(&self) -> f64 {
        self.mu / self.slots_per_server as f64
    }

    /// Peakedness at the slot level.
    pub fn peakedness(&self) -> Peakedness {
        peakedness(self.ca2, self.slot_rate(), self.sigma_s, self.service_model)
    }
}

/// Hayward blocking probability `B(n/z, rho/z)`; exact Erlang-B when `ca2 = 1`.
pub fn blocking_probability(params: &QueueParams, n: u32) -> Result<f64> {
    let slots = n.saturating_mul(params.slots_per_server);
    let load = params.lambda / params.slot_rate();
    if params.ca2 == 1.0 {
        return Ok(erlang_b(slots, load));
    }
    let z = params.peakedness().z;
    if z == 1.0 {
        return Ok(erlang_b(slots, load));
    }
    erlang_b_real(slots as f64 / z, load / z)
}

/// Blocking as used by the transient estimators.
pub(crate) fn transient_blocking(params: &QueueParams, n: u32) -> Result<f64> {
    match params.transient {
        TransientBlocking::Hayward => blocking_probability(params, n),
        TransientBlocking::ErlangB => Ok(erlang_b(
            n.saturating_mul(params.slots_per_server),
            params.lambda / params.slot_rate(),
        )),
    }
}
