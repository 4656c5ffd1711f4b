use serde::{Deserialize, Serialize};

use crate::billing::BillingModel;
use crate::error::{Error, Result};
use crate::policies::ReactiveConfig;
use crate::workload::{ServiceTimeModel, WorkloadTrace};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PolicyKind {
    Optimal,
    Qed,
    Grassmann,
    AlwaysOn(u32),
    Reactive(ReactiveConfig),
}

impl PolicyKind {
    pub fn name(&self) -> &'static str {
        match self {
            Self::Optimal => "optimal",
            Self::Qed => "qed",
            Self::Grassmann => "grassmann",
            Self::AlwaysOn(_) => "always_on",
            Self::Reactive(_) => "reactive",
        }
    }

    /// Sized each epoch from a load forecast.
    pub fn is_predictive(&self) -> bool {
        matches!(self, Self::Optimal | Self::Qed | Self::Grassmann)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Mode {
    /// One job at a time per server.
    #[default]
    ServerLevel,
    /// `m` concurrent jobs per server, each slot serving at `mu / m`.
    ConnectionLevel(u32),
}

impl Mode {
    pub fn slots(&self) -> u32 {
        match *self {
            Self::ServerLevel => 1,
            Self::ConnectionLevel(m) => m,
        }
    }
}

/// Where the Grassmann policy takes the load variance from.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum VarianceSource {
    /// Per-minute rate variance observed in the epoch in which the decision
    /// is taken.
    #[default]
    CurrentEpoch,
    /// Per-minute rate variance of the epoch being provisioned, read from the
    /// trace (hindsight; for comparison only).
    TargetEpoch,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimConfig {
    pub trace: WorkloadTrace,
    /// Leading minutes of the trace used only as forecasting history.
    pub warmup_minutes: usize,
    /// Server-level service time; its mean is `1/mu`.
    pub service: ServiceTimeModel,
    /// Interarrival scv of the generated arrival stream.
    pub arrival_ca2: f64,
    pub billing: BillingModel,
    pub policy: PolicyKind,
    pub mode: Mode,
    pub seed: u64,
    /// Fleet size at time 0; `None` sizes it with the QED rule on the first
    /// simulated minute's rate (AlwaysOn uses its own size).
    pub initial_servers: Option<u32>,
    /// ETS season length in epochs.
    pub season: usize,
    pub variance_source: VarianceSource,
}

impl SimConfig {
    /// Defaults: 35 ms lognormal service with scv 8.04, Poisson arrivals,
    /// default billing, server-level mode, daily seasonality.
    pub fn new(trace: WorkloadTrace, policy: PolicyKind) -> Self {
        Self {
            trace,
            warmup_minutes: 0,
            service: ServiceTimeModel::lognormal(1.0 / 28.571, 8.04),
            arrival_ca2: 1.0,
            billing: BillingModel::default(),
            policy,
            mode: Mode::ServerLevel,
            seed: 1,
            initial_servers: None,
            season: crate::forecast::DEFAULT_SEASON,
            variance_source: VarianceSource::CurrentEpoch,
        }
    }

    /// Service rate of one server, jobs/second.
    pub fn mu(&self) -> f64 {
        1.0 / self.service.mean
    }

    pub fn epoch_seconds(&self) -> f64 {
        self.billing.epoch_hours * 3600.0
    }

    pub fn horizon_minutes(&self) -> usize {
        self.trace.duration().saturating_sub(self.warmup_minutes)
    }

    pub fn validate(&self) -> Result<()> {
        self.billing.validate()?;
        self.service.validate()?;
        if !(self.arrival_ca2 > 0.0 && self.arrival_ca2.is_finite()) {
            return Err(Error::config("arrival ca2 must be > 0"));
        }
        let b = &self.billing;
        if b.epoch_hours <= b.boot_hours.max(b.teardown_hours) {
            return Err(Error::config(
                "epoch must be longer than boot and teardown times",
            ));
        }
        if self.mode.slots() == 0 {
            return Err(Error::config(
                "connection-level mode needs at least one slot",
            ));
        }
        if self.warmup_minutes > self.trace.duration() {
            return Err(Error::config(format!(
                "warmup of {} minutes exceeds the {}-minute trace",
                self.warmup_minutes,
                self.trace.duration()
            )));
        }
        if self.season == 0 {
            return Err(Error::config("season must be at least one epoch"));
        }
        let epoch_minutes = b.epoch_hours * 60.0;
        if (epoch_minutes - epoch_minutes.round()).abs() > 1e-9 {
            return Err(Error::config(
                "epoch length must be a whole number of minutes",
            ));
        }
        match self.policy {
            PolicyKind::AlwaysOn(n) if n > b.max_servers => Err(Error::config(format!(
                "always-on size {n} exceeds max servers {}",
                b.max_servers
            ))),
            PolicyKind::Reactive(r) => r.validate(),
            _ => Ok(()),
        }
    }
}
