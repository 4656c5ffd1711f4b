use serde::{Deserialize, Serialize};

/// Traffic statistics of one epoch.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EpochStats {
    /// Jobs per second.
    pub mean_lambda: f64,
    /// Sample variance of the per-minute rates, (jobs/second)^2.
    pub lambda_variance: f64,
    /// Interarrival scv; `None` with fewer than two gaps.
    pub ca2_hat: Option<f64>,
    /// Seconds; 0 when no job completed.
    pub service_mean_hat: f64,
    pub service_scv_hat: f64,
    pub accepted: u64,
    pub blocked: u64,
}

impl EpochStats {
    pub fn arrivals(&self) -> u64 {
        self.accepted + self.blocked
    }

    /// `ca2_hat`, or 1 when it could not be estimated.
    pub fn ca2_or_default(&self) -> f64 {
        self.ca2_hat.unwrap_or(1.0)
    }
}

#[derive(Debug, Clone, Copy, Default)]
struct Welford {
    n: u64,
    mean: f64,
    m2: f64,
}

impl Welford {
    fn push(&mut self, x: f64) {
        self.n += 1;
        let d = x - self.mean;
        self.mean += d / self.n as f64;
        self.m2 += d * (x - self.mean);
    }

    fn sample_variance(&self) -> f64 {
        if self.n < 2 {
            0.0
        } else {
            (self.m2 / (self.n - 1) as f64).max(0.0)
        }
    }
}

/// Streaming collector for [`EpochStats`] over `[start, start + length)`
/// seconds.
#[derive(Debug, Clone)]
pub struct EpochAccumulator {
    start: f64,
    length: f64,
    minute_counts: Vec<u64>,
    last_arrival: Option<f64>,
    gaps: Welford,
    service: Welford,
    accepted: u64,
    blocked: u64,
}

impl EpochAccumulator {
    pub fn new(start: f64, length: f64) -> Self {
        let minutes = (length / 60.0).ceil().max(1.0) as usize;
        Self {
            start,
            length,
            minute_counts: vec![0; minutes],
            last_arrival: None,
            gaps: Welford::default(),
            service: Welford::default(),
            accepted: 0,
            blocked: 0,
        }
    }

    pub fn record_arrival(&mut self, t: f64, accepted: bool) {
        let minute =
            (((t - self.start) / 60.0).floor().max(0.0) as usize).min(self.minute_counts.len() - 1);
        self.minute_counts[minute] += 1;
        if let Some(prev) = self.last_arrival {
            self.gaps.push(t - prev);
        }
        self.last_arrival = Some(t);
        if accepted {
            self.accepted += 1;
        } else {
            self.blocked += 1;
        }
    }

    pub fn record_completion(&mut self, service_time: f64) {
        self.service.push(service_time);
    }

    pub fn start(&self) -> f64 {
        self.start
    }

    /// Statistics of the part of the epoch before `now`. Rates are averaged
    /// over the elapsed time; the rate variance uses whole elapsed minutes.
    pub fn stats_at(&self, now: f64) -> EpochStats {
        let elapsed = (now - self.start).clamp(0.0, self.length);
        let arrivals = self.accepted + self.blocked;
        let whole_minutes =
            ((elapsed / 60.0 + 1e-9).floor() as usize).min(self.minute_counts.len());
        let mut rates = Welford::default();
        for &c in &self.minute_counts[..whole_minutes] {
            rates.push(c as f64 / 60.0);
        }
        let ca2_hat = (self.gaps.n >= 2 && self.gaps.mean > 0.0)
            .then(|| self.gaps.sample_variance() / (self.gaps.mean * self.gaps.mean));
        let (service_mean_hat, service_scv_hat) = if self.service.n > 0 && self.service.mean > 0.0 {
            (
                self.service.mean,
                self.service.sample_variance() / (self.service.mean * self.service.mean),
            )
        } else {
            (0.0, 0.0)
        };
        EpochStats {
            mean_lambda: if elapsed > 0.0 {
                arrivals as f64 / elapsed
            } else {
                0.0
            },
            lambda_variance: rates.sample_variance(),
            ca2_hat,
            service_mean_hat,
            service_scv_hat,
            accepted: self.accepted,
            blocked: self.blocked,
        }
    }

    pub fn finish(&self) -> EpochStats {
        self.stats_at(self.start + self.length)
    }
}

/// Statistics of one epoch from sorted arrival times (seconds), the service
/// times of jobs that completed, and per-arrival admission flags.
pub fn compute_epoch_stats(
    start: f64,
    length: f64,
    arrival_times: &[f64],
    service_samples: &[f64],
    accepted: &[bool],
) -> EpochStats {
    let mut acc = EpochAccumulator::new(start, length);
    for (&t, &ok) in arrival_times.iter().zip(accepted) {
        acc.record_arrival(t, ok);
    }
    for &s in service_samples {
        acc.record_completion(s);
    }
    acc.finish()
}
