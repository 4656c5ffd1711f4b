//! Load forecasting for the next epoch.

mod accuracy;
mod ets;
pub mod nelder_mead;

pub use accuracy::{backtest, relative_error, ErrorStats, HistogramBucket};
pub use ets::{fit_ets, forecast_next, EtsModel, DEFAULT_SEASON};
