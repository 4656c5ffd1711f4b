use std::f64::consts::PI;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, LogNormal};
use serde::{Deserialize, Serialize};

use super::trace::{TraceOrigin, WorkloadTrace};
use crate::error::{Error, Result};

const MINUTES_PER_DAY: f64 = 1440.0;

/// Multiplies the rate by `factor` over `[start_minute, start_minute + minutes)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Spike {
    pub start_minute: usize,
    pub minutes: usize,
    pub factor: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DiurnalParams {
    pub days: usize,
    /// Mean rate, arrivals per minute.
    pub base_rate: f64,
    /// Half the peak-to-trough swing, arrivals per minute.
    pub amplitude: f64,
    /// Squared coefficient of variation of the multiplicative noise.
    pub noise_scv: f64,
    pub seed: u64,
    /// Values above 1 flatten the peak and trough and steepen the ramps
    /// between them; 1 gives a plain sinusoid.
    pub sharpness: f64,
    pub spikes: Vec<Spike>,
}

impl DiurnalParams {
    pub fn new(days: usize, base_rate: f64, amplitude: f64, noise_scv: f64, seed: u64) -> Self {
        Self {
            days,
            base_rate,
            amplitude,
            noise_scv,
            seed,
            sharpness: 1.0,
            spikes: Vec::new(),
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.base_rate >= 0.0 && self.base_rate.is_finite()) {
            return Err(Error::config("base rate must be >= 0"));
        }
        if !(self.amplitude >= 0.0) || (self.amplitude > 0.0 && self.amplitude >= self.base_rate) {
            return Err(Error::config("amplitude must lie in [0, base rate)"));
        }
        if !(self.noise_scv >= 0.0 && self.noise_scv.is_finite()) {
            return Err(Error::config("noise scv must be >= 0"));
        }
        if !(self.sharpness >= 1.0 && self.sharpness.is_finite()) {
            return Err(Error::config("sharpness must be >= 1"));
        }
        if self
            .spikes
            .iter()
            .any(|s| !(s.factor >= 0.0 && s.factor.is_finite()))
        {
            return Err(Error::config("spike factor must be >= 0"));
        }
        Ok(())
    }

    /// Noiseless rate at minute `t` (arrivals per minute), before spikes.
    /// The trough falls at minute 0 of each day and the peak at minute 720.
    pub fn rate(&self, t: f64) -> f64 {
        let s = (2.0 * PI * t / MINUTES_PER_DAY - PI / 2.0).sin();
        let shape = if self.sharpness > 1.0 {
            (self.sharpness * s).tanh() / self.sharpness.tanh()
        } else {
            s
        };
        self.base_rate + self.amplitude * shape
    }
}

/// Plain sinusoidal day with lognormal noise and no spikes.
pub fn synthesize_diurnal(
    days: usize,
    base_rate: f64,
    amplitude: f64,
    noise_scv: f64,
    seed: u64,
) -> Result<WorkloadTrace> {
    synthesize(&DiurnalParams::new(
        days, base_rate, amplitude, noise_scv, seed,
    ))
}

pub fn synthesize(params: &DiurnalParams) -> Result<WorkloadTrace> {
    params.validate()?;
    let minutes = params.days * MINUTES_PER_DAY as usize;
    let mut rng = ChaCha8Rng::seed_from_u64(params.seed);
    let noise = if params.noise_scv > 0.0 {
        let var_log = params.noise_scv.ln_1p();
        Some(
            LogNormal::new(-var_log / 2.0, var_log.sqrt())
                .map_err(|e| Error::config(e.to_string()))?,
        )
    } else {
        None
    };
    let counts = (0..minutes)
        .map(|t| {
            let mut rate = params.rate(t as f64);
            for s in &params.spikes {
                if (s.start_minute..s.start_minute + s.minutes).contains(&t) {
                    rate *= s.factor;
                }
            }
            if let Some(noise) = &noise {
                rate *= noise.sample(&mut rng);
            }
            rate.round().max(0.0) as u64
        })
        .collect();
    Ok(WorkloadTrace::new(counts, TraceOrigin::Synthetic))
}

/// Fourteen days of sinusoidal load between 1500 and 30500 jobs/min (peak
/// near 90% of a 20-server fleet at 28.571 jobs/s per server, mean near
/// 47%), with 1% noise. The last day is the one to simulate; the first
/// thirteen are forecasting history.
pub fn bundled_params() -> DiurnalParams {
    DiurnalParams::new(14, 16_000.0, 14_500.0, 0.01, 20_110_601)
}

/// Near-square days: 2000 jobs/min at night, 22000 jobs/min by day, with a
/// daily dip to 5% between 10:00 and 13:00. Four steep ramps a day.
pub fn ramp_params() -> DiurnalParams {
    let days = 14;
    DiurnalParams {
        sharpness: 50.0,
        spikes: (0..days)
            .map(|d| Spike {
                start_minute: d * 1440 + 600,
                minutes: 180,
                factor: 0.05,
            })
            .collect(),
        ..DiurnalParams::new(days, 12_000.0, 10_000.0, 0.01, 20_110_602)
    }
}

/// Minutes of forecasting history in front of the simulated day of the
/// bundled traces.
pub const BUNDLED_WARMUP_MINUTES: usize = 13 * 1440;

pub fn bundled_trace() -> WorkloadTrace {
    synthesize(&bundled_params()).expect("bundled parameters are valid")
}

pub fn ramp_trace() -> WorkloadTrace {
    synthesize(&ramp_params()).expect("ramp parameters are valid")
}
