use rand::Rng;
use rand_distr::{Distribution, Exp, LogNormal};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::queueing::ServiceModel;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ServiceKind {
    Exponential,
    /// Moment-matched: `sigma^2 = ln(1 + scv)`, `mu_log = ln(mean) - sigma^2 / 2`.
    Lognormal,
    Deterministic,
}

/// Service-time distribution of a single job.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ServiceTimeModel {
    pub kind: ServiceKind,
    /// Mean, seconds.
    pub mean: f64,
    /// Squared coefficient of variation. Ignored (implied) for the
    /// exponential and deterministic kinds.
    pub scv: f64,
}

impl ServiceTimeModel {
    pub fn exponential(mean: f64) -> Self {
        Self {
            kind: ServiceKind::Exponential,
            mean,
            scv: 1.0,
        }
    }

    pub fn lognormal(mean: f64, scv: f64) -> Self {
        Self {
            kind: ServiceKind::Lognormal,
            mean,
            scv,
        }
    }

    pub fn deterministic(mean: f64) -> Self {
        Self {
            kind: ServiceKind::Deterministic,
            mean,
            scv: 0.0,
        }
    }

    /// Measured page-serving times: mean 83 ms, scv 8.04.
    pub fn measured_web() -> Self {
        Self::lognormal(0.083, 8.04)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.mean > 0.0 && self.mean.is_finite()) {
            return Err(Error::config(format!(
                "service mean must be > 0, got {}",
                self.mean
            )));
        }
        if !(self.scv >= 0.0 && self.scv.is_finite()) {
            return Err(Error::config(format!(
                "service scv must be >= 0, got {}",
                self.scv
            )));
        }
        Ok(())
    }

    pub fn effective_scv(&self) -> f64 {
        match self.kind {
            ServiceKind::Exponential => 1.0,
            ServiceKind::Deterministic => 0.0,
            ServiceKind::Lognormal => self.scv,
        }
    }

    pub fn std_dev(&self) -> f64 {
        self.mean * self.effective_scv().sqrt()
    }

    /// Service-time shape assumed by the peakedness integral.
    pub fn analytic_model(&self) -> ServiceModel {
        match self.kind {
            ServiceKind::Exponential => ServiceModel::Exponential,
            ServiceKind::Deterministic => ServiceModel::Deterministic,
            ServiceKind::Lognormal => ServiceModel::GeneralNormalApprox,
        }
    }

    /// Same shape, different mean.
    pub fn with_mean(self, mean: f64) -> Self {
        Self { mean, ..self }
    }

    pub fn sampler(&self) -> Result<ServiceSampler> {
        self.validate()?;
        Ok(match self.kind {
            ServiceKind::Exponential => ServiceSampler::Exponential(
                Exp::new(1.0 / self.mean).map_err(|e| Error::config(e.to_string()))?,
            ),
            ServiceKind::Deterministic => ServiceSampler::Fixed(self.mean),
            ServiceKind::Lognormal if self.scv == 0.0 => ServiceSampler::Fixed(self.mean),
            ServiceKind::Lognormal => {
                let var_log = self.scv.ln_1p();
                let mu_log = self.mean.ln() - var_log / 2.0;
                ServiceSampler::Lognormal(
                    LogNormal::new(mu_log, var_log.sqrt())
                        .map_err(|e| Error::config(e.to_string()))?,
                )
            }
        })
    }
}

#[derive(Debug, Clone, Copy)]
pub enum ServiceSampler {
    Exponential(Exp<f64>),
    Lognormal(LogNormal<f64>),
    Fixed(f64),
}

impl ServiceSampler {
    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        match self {
            Self::Exponential(d) => d.sample(rng),
            Self::Lognormal(d) => d.sample(rng),
            Self::Fixed(v) => *v,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn moments(model: ServiceTimeModel, n: usize, seed: u64) -> (f64, f64) {
        let sampler = model.sampler().unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let (mut s1, mut s2) = (0.0, 0.0);
        for _ in 0..n {
            let x = sampler.sample(&mut rng);
            s1 += x;
            s2 += x * x;
        }
        let mean = s1 / n as f64;
        let var = s2 / n as f64 - mean * mean;
        (mean, var / (mean * mean))
    }

    #[test]
    fn measured_web_moments() {
        // Heavy tail (E[X^4]/E[X]^4 ~ 5e5): 10^7 draws keep the sample scv
        // within a few percent.
        let (mean, scv) = moments(ServiceTimeModel::measured_web(), 10_000_000, 11);
        assert!((mean - 0.083).abs() / 0.083 < 0.02, "mean {mean}");
        assert!((scv - 8.04).abs() / 8.04 < 0.10, "scv {scv}");
    }

    #[test]
    fn exponential_and_fixed() {
        let (mean, scv) = moments(ServiceTimeModel::exponential(0.5), 200_000, 3);
        assert!((mean - 0.5).abs() < 0.01);
        assert!((scv - 1.0).abs() < 0.03);
        let (mean, scv) = moments(ServiceTimeModel::deterministic(0.2), 10, 3);
        assert!((mean - 0.2).abs() < 1e-15 && scv.abs() < 1e-12);
    }

    #[test]
    fn invalid_models() {
        assert!(ServiceTimeModel::exponential(0.0).sampler().is_err());
        assert!(ServiceTimeModel::lognormal(1.0, -1.0).sampler().is_err());
    }
}
