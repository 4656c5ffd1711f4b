use serde::{Deserialize, Serialize};

use super::quadrature::{integrate_pieces, Tolerance};
use super::ServiceModel;

/// Peakedness of the arrival stream relative to the service distribution.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Peakedness {
    pub z: f64,
    pub eta: f64,
}

/// Lower bound applied to `z` so that `n / z` stays finite.
pub const MIN_PEAKEDNESS: f64 = 1e-3;

/// Standard normal survival function `1 - Phi(x)`.
pub(crate) fn normal_sf(x: f64) -> f64 {
    0.5 * libm::erfc(x / std::f64::consts::SQRT_2)
}

/// `Q(x) = 1e-6`, i.e. where the squared survival drops below 1e-12.
const SURVIVAL_CUTOFF_Z: f64 = 4.753_424_308_822_899;

/// `eta = mu * integral_0^inf [1 - G(t)]^2 dt` for service-time CDF `G` with
/// mean `1/mu` and standard deviation `sigma_s`.
pub fn eta(mu: f64, sigma_s: f64, model: ServiceModel) -> f64 {
    match model {
        ServiceModel::Exponential => 0.5,
        ServiceModel::Deterministic => 1.0,
        ServiceModel::GeneralNormalApprox => {
            if sigma_s == 0.0 {
                return 1.0;
            }
            let mean = 1.0 / mu;
            let upper = mean + SURVIVAL_CUTOFF_Z * sigma_s;
            let survival_sq = |t: f64| {
                let q = normal_sf((t - mean) / sigma_s);
                q * q
            };
            let tol = Tolerance {
                absolute: 1e-14,
                relative: 1e-10,
                max_depth: 30,
            };
            // The integrand is smooth and bounded by 1, so the default
            // refinement budget is never exhausted in practice.
            let integral = integrate_pieces(survival_sq, &[0.0, mean, upper], tol)
                .map(|r| r.value)
                .unwrap_or_else(|e| match e {
                    crate::Error::Numerical { estimate, .. } => estimate,
                    _ => f64::NAN,
                });
            mu * integral
        }
    }
}

/// `z = 1 + (ca2 - 1) * eta`, clamped below at [`MIN_PEAKEDNESS`].
pub fn peakedness(ca2: f64, mu: f64, sigma_s: f64, model: ServiceModel) -> Peakedness {
    let eta = eta(mu, sigma_s, model);
    let z = (1.0 + (ca2 - 1.0) * eta).max(MIN_PEAKEDNESS);
    Peakedness { z, eta }
}
