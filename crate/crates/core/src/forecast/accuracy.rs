use serde::{Deserialize, Serialize};

use super::ets::{fit_ets, EtsModel};
use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HistogramBucket {
    pub lower: f64,
    pub upper: f64,
    pub count: usize,
}

/// Relative forecast errors `(predicted - actual) / actual` and their summary.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ErrorStats {
    pub errors: Vec<f64>,
    pub mean: f64,
    /// Sample standard deviation (0 for fewer than two points).
    pub std_dev: f64,
    pub mean_abs: f64,
    pub histogram: Vec<HistogramBucket>,
}

pub fn relative_error(actual: &[f64], predicted: &[f64], bucket_width: f64) -> Result<ErrorStats> {
    if actual.len() != predicted.len() {
        return Err(Error::domain(format!(
            "series lengths differ: {} actual vs {} predicted",
            actual.len(),
            predicted.len()
        )));
    }
    if !(bucket_width > 0.0) {
        return Err(Error::domain("histogram bucket width must be > 0"));
    }
    if let Some(a) = actual.iter().find(|a| !(**a > 0.0)) {
        return Err(Error::domain(format!("actual values must be > 0, got {a}")));
    }
    let errors: Vec<f64> = actual
        .iter()
        .zip(predicted)
        .map(|(a, p)| (p - a) / a)
        .collect();
    let n = errors.len() as f64;
    let (mean, std_dev, mean_abs) = if errors.is_empty() {
        (0.0, 0.0, 0.0)
    } else {
        let mean = errors.iter().sum::<f64>() / n;
        let var = if errors.len() > 1 {
            errors.iter().map(|e| (e - mean).powi(2)).sum::<f64>() / (n - 1.0)
        } else {
            0.0
        };
        let mean_abs = errors.iter().map(|e| e.abs()).sum::<f64>() / n;
        (mean, var.sqrt(), mean_abs)
    };

    let mut histogram: Vec<HistogramBucket> = Vec::new();
    if !errors.is_empty() {
        let lo = errors.iter().fold(f64::INFINITY, |a, &b| a.min(b));
        let hi = errors.iter().fold(f64::NEG_INFINITY, |a, &b| a.max(b));
        let first = (lo / bucket_width).floor() as i64;
        let last = (hi / bucket_width).floor() as i64;
        histogram = (first..=last)
            .map(|k| HistogramBucket {
                lower: k as f64 * bucket_width,
                upper: (k + 1) as f64 * bucket_width,
                count: 0,
            })
            .collect();
        for e in &errors {
            let k = ((e / bucket_width).floor() as i64 - first) as usize;
            histogram[k].count += 1;
        }
    }
    Ok(ErrorStats {
        errors,
        mean,
        std_dev,
        mean_abs,
        histogram,
    })
}

/// Fits on everything but the last `holdout` points, then forecasts the
/// holdout one step at a time, absorbing each actual value before the next
/// forecast. Returns `(model after training, one-step forecasts)`.
pub fn backtest(series: &[f64], season_len: usize, holdout: usize) -> Result<(EtsModel, Vec<f64>)> {
    if holdout >= series.len() {
        return Err(Error::InsufficientData {
            needed: holdout + 1,
            got: series.len(),
        });
    }
    let split = series.len() - holdout;
    let trained = fit_ets(&series[..split], season_len)?;
    let mut model = trained.clone();
    let mut predictions = Vec::with_capacity(holdout);
    for &y in &series[split..] {
        predictions.push(model.forecast(1));
        model.update(y)?;
    }
    Ok((trained, predictions))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn perfect_predictions() {
        let a = [1.0, 2.0, 3.0];
        let s = relative_error(&a, &a, 0.05).unwrap();
        assert!(s.errors.iter().all(|&e| e == 0.0));
        assert_eq!(s.mean, 0.0);
        assert_eq!(s.histogram.len(), 1);
        assert_eq!(s.histogram[0].count, 3);
    }

    #[test]
    fn ten_percent_overshoot() {
        let a = [10.0, 20.0, 40.0, 80.0];
        let p: Vec<f64> = a.iter().map(|x| x * 1.1).collect();
        let s = relative_error(&a, &p, 0.05).unwrap();
        assert!((s.mean - 0.1).abs() < 1e-12);
        assert!(s.std_dev < 1e-12);
    }

    #[test]
    fn histogram_counts_everything() {
        let a = [1.0; 6];
        let p = [0.8, 0.9, 1.0, 1.05, 1.2, 1.31];
        let s = relative_error(&a, &p, 0.1).unwrap();
        assert_eq!(s.histogram.iter().map(|b| b.count).sum::<usize>(), 6);
        for (e, _) in s.errors.iter().zip(0..) {
            assert!(s.histogram.iter().any(|b| b.lower <= *e && *e < b.upper));
        }
    }

    #[test]
    fn mismatched_lengths() {
        assert!(relative_error(&[1.0], &[1.0, 2.0], 0.1).is_err());
        assert!(relative_error(&[0.0], &[1.0], 0.1).is_err());
    }
}
