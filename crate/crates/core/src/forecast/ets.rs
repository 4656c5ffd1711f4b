//! Holt-Winters with additive trend and multiplicative seasonality and
//! errors, undamped: ETS(M,A,M).
//!
//! ```text
//! yhat_t = (l + b) s_{t-m}
//! e_t    = (y_t - yhat_t) / yhat_t
//! l'     = (l + b)(1 + alpha e_t)
//! b'     = b + beta (l + b) e_t
//! s_t    = s_{t-m} (1 + gamma e_t)
//! ```

use serde::{Deserialize, Serialize};

use super::nelder_mead::{minimize, Options};
use crate::error::{Error, Result};

/// Default season: one day of hourly epochs.
pub const DEFAULT_SEASON: usize = 24;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EtsModel {
    pub alpha: f64,
    pub beta: f64,
    pub gamma: f64,
    pub level: f64,
    pub trend: f64,
    /// Seasonal index for time `t` lives at `seasonals[t % season_len]`.
    pub seasonals: Vec<f64>,
    pub season_len: usize,
    /// Observations absorbed so far; the next one has index `n_obs`.
    pub n_obs: usize,
}

#[derive(Debug, Clone, Copy, PartialEq)]
struct State {
    level: f64,
    trend: f64,
}

/// Initial level, trend and seasonal indices from the first two seasons.
///
/// The trend is the difference of the two season means over `m`; the level
/// is placed so that the trend line passes through the first season's mean
/// at its midpoint. Seasonal indices are ratios to that line, averaged over
/// both seasons and normalized to mean 1.
fn initial_state(series: &[f64], m: usize) -> (State, Vec<f64>) {
    let mean = |s: &[f64]| s.iter().sum::<f64>() / s.len() as f64;
    let first = mean(&series[..m]);
    let second = mean(&series[m..2 * m]);
    let trend = (second - first) / m as f64;
    // value of the trend line just before observation 0
    let level = first - trend * (m as f64 + 1.0) / 2.0;
    let line = |t: usize| level + trend * (t as f64 + 1.0);
    let use_line = (0..2 * m).all(|t| line(t) > 0.0);

    let mut seasonals: Vec<f64> = (0..m)
        .map(|j| {
            let (a, b) = if use_line {
                (line(j), line(j + m))
            } else {
                (first, second)
            };
            0.5 * (series[j] / a + series[j + m] / b)
        })
        .collect();
    let norm = mean(&seasonals);
    for s in &mut seasonals {
        *s /= norm;
    }
    (State { level, trend }, seasonals)
}

/// One recursion step. Returns the relative error, or `None` when the
/// one-step forecast is not positive.
#[inline]
fn step(
    state: &mut State,
    seasonal: &mut f64,
    y: f64,
    alpha: f64,
    beta: f64,
    gamma: f64,
) -> Option<f64> {
    let base = state.level + state.trend;
    let yhat = base * *seasonal;
    if !(yhat > 0.0) || !yhat.is_finite() {
        return None;
    }
    let e = (y - yhat) / yhat;
    state.level = base * (1.0 + alpha * e);
    state.trend += beta * base * e;
    *seasonal *= 1.0 + gamma * e;
    Some(e)
}

fn sum_squared_errors(series: &[f64], m: usize, init: (State, &[f64]), p: &[f64; 3]) -> f64 {
    let (mut state, seasonals) = init;
    let mut seasonals = seasonals.to_vec();
    let mut sse = 0.0;
    for (t, &y) in series.iter().enumerate() {
        match step(&mut state, &mut seasonals[t % m], y, p[0], p[1], p[2]) {
            Some(e) => sse += e * e,
            None => return f64::INFINITY,
        }
    }
    sse
}

fn check_series(series: &[f64], season_len: usize) -> Result<()> {
    if season_len < 2 {
        return Err(Error::config(format!(
            "season length must be >= 2, got {season_len}"
        )));
    }
    if series.len() < 2 * season_len {
        return Err(Error::InsufficientData {
            needed: 2 * season_len,
            got: series.len(),
        });
    }
    if let Some((i, v)) = series
        .iter()
        .enumerate()
        .find(|(_, v)| !(**v > 0.0) || !v.is_finite())
    {
        return Err(Error::domain(format!(
            "multiplicative model needs positive values, got {v} at index {i}"
        )));
    }
    Ok(())
}

/// Fits smoothing parameters by minimizing the sum of squared one-step
/// relative errors with Nelder–Mead, then runs the recursion over the whole
/// series to obtain the final state.
pub fn fit_ets(series: &[f64], season_len: usize) -> Result<EtsModel> {
    check_series(series, season_len)?;
    let (state0, seasonals0) = initial_state(series, season_len);
    let best = minimize(
        |p: &[f64; 3]| sum_squared_errors(series, season_len, (state0, &seasonals0), p),
        [0.3, 0.05, 0.1],
        Options::default(),
    );
    let [alpha, beta, gamma] = best.x;
    EtsModel::from_parameters(series, season_len, alpha, beta, gamma)
}

impl EtsModel {
    /// Runs the recursion with fixed smoothing parameters.
    pub fn from_parameters(
        series: &[f64],
        season_len: usize,
        alpha: f64,
        beta: f64,
        gamma: f64,
    ) -> Result<Self> {
        check_series(series, season_len)?;
        let (state, seasonals) = initial_state(series, season_len);
        let mut model = EtsModel {
            alpha,
            beta,
            gamma,
            level: state.level,
            trend: state.trend,
            seasonals,
            season_len,
            n_obs: 0,
        };
        for &y in series {
            model.update(y)?;
        }
        Ok(model)
    }

    /// Absorbs one more observation; returns its one-step relative error.
    pub fn update(&mut self, y: f64) -> Result<f64> {
        let mut state = State {
            level: self.level,
            trend: self.trend,
        };
        let idx = self.n_obs % self.season_len;
        let e = step(
            &mut state,
            &mut self.seasonals[idx],
            y,
            self.alpha,
            self.beta,
            self.gamma,
        )
        .ok_or_else(|| Error::domain("one-step forecast is not positive"))?;
        self.level = state.level;
        self.trend = state.trend;
        self.n_obs += 1;
        Ok(e)
    }

    /// Forecast `horizon >= 1` steps past the last observation, floored at 0.
    pub fn forecast(&self, horizon: usize) -> f64 {
        let h = horizon.max(1);
        let s = self.seasonals[(self.n_obs + h - 1) % self.season_len];
        ((self.level + h as f64 * self.trend) * s).max(0.0)
    }
}

/// `forecast_next(model, h)` for each `h` in `1..=horizon`.
pub fn forecast_next(model: &EtsModel, horizon: usize) -> Vec<f64> {
    (1..=horizon).map(|h| model.forecast(h)).collect()
}
