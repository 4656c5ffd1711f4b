//! Arrival instants for a per-minute rate trace.
//!
//! A unit-rate renewal process with the requested interarrival scv is run in
//! "operational time" and mapped to wall-clock time through the cumulative
//! rate of the trace, so within minute `i` gaps are the renewal gaps scaled
//! to rate `counts[i] / 60`.

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Exp1};

use super::trace::WorkloadTrace;
use crate::error::{Error, Result};

/// Unit-mean interarrival distribution with a given scv.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Interarrival {
    Exponential,
    /// Sum of `k` exponential phases; scv `1/k`.
    Erlang(u32),
    /// Balanced-means two-phase hyperexponential.
    HyperExponential {
        p1: f64,
        rate1: f64,
        rate2: f64,
    },
}

impl Interarrival {
    pub fn with_scv(ca2: f64) -> Result<Self> {
        if !(ca2 > 0.0) || !ca2.is_finite() {
            return Err(Error::domain(format!(
                "interarrival scv must be > 0, got {ca2}"
            )));
        }
        Ok(if ca2 == 1.0 {
            Self::Exponential
        } else if ca2 < 1.0 {
            let k = (1.0 / ca2).round().max(1.0) as u32;
            if k == 1 {
                Self::Exponential
            } else {
                Self::Erlang(k)
            }
        } else {
            let p1 = 0.5 * (1.0 + ((ca2 - 1.0) / (ca2 + 1.0)).sqrt());
            Self::HyperExponential {
                p1,
                rate1: 2.0 * p1,
                rate2: 2.0 * (1.0 - p1),
            }
        })
    }

    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        match *self {
            Self::Exponential => Exp1.sample(rng),
            Self::Erlang(k) => {
                let mut total = 0.0;
                for _ in 0..k {
                    let e: f64 = Exp1.sample(rng);
                    total += e;
                }
                total / k as f64
            }
            Self::HyperExponential { p1, rate1, rate2 } => {
                let e: f64 = Exp1.sample(rng);
                if rng.random::<f64>() < p1 {
                    e / rate1
                } else {
                    e / rate2
                }
            }
        }
    }
}

/// Lazily yields arrival times (seconds since the start of the trace).
#[derive(Debug, Clone)]
pub struct ArrivalStream<'a, R> {
    counts: &'a [u64],
    gaps: Interarrival,
    rng: R,
    minute: usize,
    /// Fraction of the current minute already consumed, in [0, 1).
    position: f64,
}

impl<'a, R: Rng> ArrivalStream<'a, R> {
    pub fn new(counts: &'a [u64], ca2: f64, rng: R) -> Result<Self> {
        Ok(Self {
            counts,
            gaps: Interarrival::with_scv(ca2)?,
            rng,
            minute: 0,
            position: 0.0,
        })
    }
}

impl<R: Rng> Iterator for ArrivalStream<'_, R> {
    type Item = f64;

    fn next(&mut self) -> Option<f64> {
        // remaining operational time (in expected arrivals) to cover
        let mut gap = self.gaps.sample(&mut self.rng);
        loop {
            let count = *self.counts.get(self.minute)? as f64;
            let left = count * (1.0 - self.position);
            if gap < left {
                self.position += gap / count;
                return Some((self.minute as f64 + self.position) * 60.0);
            }
            gap -= left;
            self.minute += 1;
            self.position = 0.0;
        }
    }
}

/// Seeded arrival instants for the whole trace.
pub fn generate_arrivals(trace: &WorkloadTrace, ca2_target: f64, seed: u64) -> Result<Vec<f64>> {
    let rng = ChaCha8Rng::seed_from_u64(seed);
    Ok(ArrivalStream::new(&trace.counts, ca2_target, rng)?.collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::workload::TraceOrigin;

    fn scv(xs: &[f64]) -> f64 {
        let n = xs.len() as f64;
        let m = xs.iter().sum::<f64>() / n;
        let v = xs.iter().map(|x| (x - m).powi(2)).sum::<f64>() / (n - 1.0);
        v / (m * m)
    }

    #[test]
    fn unit_mean_gaps() {
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        for ca2 in [0.25, 1.0, 4.0] {
            let d = Interarrival::with_scv(ca2).unwrap();
            let xs: Vec<f64> = (0..200_000).map(|_| d.sample(&mut rng)).collect();
            let mean = xs.iter().sum::<f64>() / xs.len() as f64;
            assert!((mean - 1.0).abs() < 0.02, "ca2={ca2} mean={mean}");
            assert!(
                (scv(&xs) - ca2).abs() / ca2 < 0.1,
                "ca2={ca2} scv={}",
                scv(&xs)
            );
        }
    }

    #[test]
    fn erlang_four_stream_scv() {
        let trace = WorkloadTrace::new(vec![6000; 20], TraceOrigin::Synthetic);
        let times = generate_arrivals(&trace, 0.25, 5).unwrap();
        assert!(times.len() > 100_000);
        let gaps: Vec<f64> = times.windows(2).map(|w| w[1] - w[0]).collect();
        assert!((scv(&gaps) - 0.25).abs() < 0.05 * 0.5, "{}", scv(&gaps));
        assert!(Interarrival::with_scv(0.25).unwrap() == Interarrival::Erlang(4));
    }

    #[test]
    fn poisson_minute_counts() {
        let trace = WorkloadTrace::new(vec![600], TraceOrigin::Synthetic);
        let sd = 600f64.sqrt();
        let mut total = 0usize;
        for seed in 0..40 {
            let n = generate_arrivals(&trace, 1.0, seed).unwrap().len();
            assert!(
                (n as f64 - 600.0).abs() < 3.0 * sd + 1.0,
                "seed {seed}: {n}"
            );
            total += n;
        }
        assert!((total as f64 / 40.0 - 600.0).abs() < 3.0 * sd / 40f64.sqrt());
    }

    #[test]
    fn deterministic_given_seed_and_sorted() {
        let trace = WorkloadTrace::new(vec![30, 0, 0, 90, 5], TraceOrigin::Synthetic);
        let a = generate_arrivals(&trace, 2.0, 77).unwrap();
        let b = generate_arrivals(&trace, 2.0, 77).unwrap();
        assert_eq!(a, b);
        assert!(a.windows(2).all(|w| w[0] <= w[1]));
        assert!(a.iter().all(|&t| !(60.0..180.0).contains(&t)));
        assert!(a.last().copied().unwrap_or(0.0) < 300.0);
    }

    #[test]
    fn rejects_non_positive_scv() {
        let trace = WorkloadTrace::new(vec![1], TraceOrigin::Synthetic);
        assert!(generate_arrivals(&trace, 0.0, 1).is_err());
    }
}
