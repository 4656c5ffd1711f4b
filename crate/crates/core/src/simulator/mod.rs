//! Discrete-event simulation of an elastic loss system with hourly billing.
//!
//! Arrivals are admitted to the least-occupied running server or lost.
//! Predictive policies are invoked `t_D` before each epoch boundary with a
//! Holt-Winters forecast of the next epoch's mean rate; servers they add
//! are rented from the boundary and serve after `t_U`, servers they remove
//! stop admitting at once and are released at the boundary (or when their
//! last job completes). The reactive baseline is evaluated every minute.

mod config;
mod engine;
mod report;
mod settle;

pub use config::{Mode, PolicyKind, SimConfig, VarianceSource};
pub use engine::{run_simulation, Phase, ServerState};
pub use report::{
    emit_report, report_to_string, round_cents, Aggregates, EpochRecord, LogHistogram,
    QuantilePoint, ReportFormat, SimulationReport, CSV_HEADER, SOJOURN_LEVELS,
};
pub use settle::{billed_hours, billing_settle, ServerLifecycle, Settlement};
