//! Workload traces: ingestion, synthesis, arrival realization and per-epoch
//! statistics.

mod arrivals;
mod service;
mod stats;
mod synth;
mod trace;

pub use arrivals::{generate_arrivals, ArrivalStream, Interarrival};
pub use service::{ServiceKind, ServiceSampler, ServiceTimeModel};
pub use stats::{compute_epoch_stats, EpochAccumulator, EpochStats};
pub use synth::{
    bundled_params, bundled_trace, ramp_params, ramp_trace, synthesize, synthesize_diurnal,
    DiurnalParams, Spike, BUNDLED_WARMUP_MINUTES,
};
pub use trace::{parse_counts_csv, parse_timestamps, TraceOrigin, WorkloadTrace};
