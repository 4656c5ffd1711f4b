use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};

#[derive(Debug, Parser)]
#[command(
    name = "profitscale",
    version,
    about = "Profit-driven fleet sizing for loss systems"
)]
pub struct Cli {
    /// Print machine-readable JSON instead of text.
    #[arg(long, global = true)]
    pub json: bool,
    /// Seed for simulations (overrides the configuration).
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    /// Directory for report files.
    #[arg(long, global = true, default_value = "results")]
    pub out_dir: PathBuf,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Blocking probability of a G/GI/n/n system.
    ///
    /// JSON fields: n, rho, ca2, service, z, eta, blocking.
    Blocking(BlockingArgs),
    /// Fleet size for the next epoch under one policy.
    ///
    /// JSON fields: policy, n_current, n_next, n_plus, n_minus,
    /// predicted_profit, predicted_blocking, alpha, z_alpha, and with
    /// --scan-max also exhaustive_n_next and agrees.
    Decide(DecideArgs),
    /// Sensitivity of the optimal decision to one parameter, as CSV.
    ///
    /// Columns: value, margin_per_job, n_current, n_next, n_plus, n_minus,
    /// predicted_profit, predicted_blocking.
    Sweep(SweepArgs),
    /// Replay a workload against a simulated fleet.
    ///
    /// Writes <policy>.json, <policy>.csv and <policy>.manifest.json to the
    /// output directory; with --policy all also comparison.csv.
    Simulate(SimulateArgs),
    /// Fit a seasonal Holt-Winters model, forecast and backtest.
    ///
    /// JSON fields: alpha, beta, gamma, season, forecast, backtest (mean,
    /// std_dev, mean_abs, histogram).
    Forecast(ForecastArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum ServiceArg {
    Exp,
    Det,
    /// Normal approximation of a general service distribution.
    Normal,
}

#[derive(Debug, Args)]
pub struct QueueArgs {
    /// Interarrival squared coefficient of variation.
    #[arg(long, default_value_t = 1.0)]
    pub ca2: f64,
    #[arg(long, value_enum, default_value_t = ServiceArg::Exp)]
    pub service: ServiceArg,
    /// Service-time standard deviation, seconds (default 1/mu).
    #[arg(long)]
    pub sigma_s: Option<f64>,
    /// Concurrent jobs per server.
    #[arg(long, default_value_t = 1)]
    pub slots: u32,
}

#[derive(Debug, Args)]
pub struct BlockingArgs {
    #[arg(long)]
    pub n: u32,
    /// Offered load, Erlangs.
    #[arg(long)]
    pub rho: f64,
    /// Service rate, jobs/s; only the shape of service matters for blocking.
    #[arg(long, default_value_t = 1.0)]
    pub mu: f64,
    #[command(flatten)]
    pub queue: QueueArgs,
}

#[derive(Debug, Args)]
pub struct EconomicsArgs {
    /// Charge per job, cents.
    #[arg(long, default_value_t = 0.0017)]
    pub charge: f64,
    /// Rent per server-hour, cents.
    #[arg(long, default_value_t = 17.0)]
    pub cost: f64,
    #[arg(long, default_value_t = 1.0)]
    pub epoch_hours: f64,
    /// Boot time t_U, minutes.
    #[arg(long, default_value_t = 5.0)]
    pub boot_minutes: f64,
    /// Teardown time t_D, minutes.
    #[arg(long, default_value_t = 2.0)]
    pub teardown_minutes: f64,
    #[arg(long, default_value_t = 20)]
    pub max_servers: u32,
    /// Cents per lost job.
    #[arg(long)]
    pub penalty: Option<f64>,
    #[arg(long)]
    pub acquire_cost: Option<f64>,
    #[arg(long)]
    pub release_cost: Option<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum DecidePolicy {
    Optimal,
    Qed,
    Grassmann,
    AlwaysOn,
}

#[derive(Debug, Args)]
pub struct DecideArgs {
    #[arg(long, value_enum, default_value_t = DecidePolicy::Optimal)]
    pub policy: DecidePolicy,
    /// Forecast arrival rate, jobs/s.
    #[arg(long)]
    pub lambda: f64,
    #[arg(long, default_value_t = 28.571)]
    pub mu: f64,
    #[arg(long, default_value_t = 0)]
    pub n_current: u32,
    /// Load variance for the Grassmann hedge, Erlangs^2.
    #[arg(long, default_value_t = 0.0)]
    pub var_rho: f64,
    /// Fleet size for always-on.
    #[arg(long, default_value_t = 20)]
    pub servers: u32,
    /// Also scan every n in 0..=N and report the best (optimal only).
    #[arg(long)]
    pub scan_max: Option<u32>,
    #[command(flatten)]
    pub queue: QueueArgs,
    #[command(flatten)]
    pub economics: EconomicsArgs,
}

#[derive(Debug, Args)]
pub struct SweepArgs {
    /// t_U (minutes), n_current or charge (cents).
    #[arg(long)]
    pub axis: String,
    #[arg(long)]
    pub from: f64,
    #[arg(long)]
    pub to: f64,
    #[arg(long, default_value_t = 11)]
    pub steps: usize,
    #[arg(long)]
    pub lambda: f64,
    #[arg(long, default_value_t = 28.571)]
    pub mu: f64,
    #[arg(long, default_value_t = 0)]
    pub n_current: u32,
    #[command(flatten)]
    pub queue: QueueArgs,
    #[command(flatten)]
    pub economics: EconomicsArgs,
}

#[derive(Debug, Args)]
pub struct SimulateArgs {
    /// Flat key = value configuration file.
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Re-run exactly what a manifest records.
    #[arg(long, conflicts_with = "config")]
    pub manifest: Option<PathBuf>,
    /// Policy name or `all`.
    #[arg(long)]
    pub policy: Option<String>,
    /// Minute counts CSV (sets trace.source = counts).
    #[arg(long)]
    pub trace: Option<PathBuf>,
    /// Configuration override, repeatable.
    #[arg(long = "set", value_name = "KEY=VALUE")]
    pub overrides: Vec<String>,
    /// Also write the simulated trace as trace.csv.
    #[arg(long)]
    pub export_trace: bool,
    /// List configuration keys and defaults, then exit.
    #[arg(long)]
    pub list_keys: bool,
}

#[derive(Debug, Args)]
pub struct ForecastArgs {
    /// One value per line (e.g. hourly mean rates).
    #[arg(long, conflicts_with_all = ["counts", "bundled"])]
    pub series: Option<PathBuf>,
    /// Minute counts CSV, averaged into epochs of --epoch-minutes (jobs/s).
    #[arg(long, conflicts_with = "bundled")]
    pub counts: Option<PathBuf>,
    /// Use the bundled synthetic two-week trace.
    #[arg(long)]
    pub bundled: bool,
    #[arg(long, default_value_t = 60)]
    pub epoch_minutes: usize,
    /// Season length in points.
    #[arg(long, default_value_t = 24)]
    pub season: usize,
    /// Points held out for the backtest (default: one season).
    #[arg(long)]
    pub holdout: Option<usize>,
    /// Points to forecast ahead.
    #[arg(long, default_value_t = 1)]
    pub horizon: usize,
    /// Histogram bucket width of relative errors.
    #[arg(long, default_value_t = 0.02)]
    pub bucket: f64,
}
