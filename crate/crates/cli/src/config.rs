//! Flat `key = value` run configuration.
//!
//! Blank lines and lines starting with `#` are ignored. Every key has a
//! default; [`Settings::materialized`] lists them all.

use std::collections::BTreeMap;
use std::fs::File;
use std::io::BufReader;
use std::path::{Path, PathBuf};

use anyhow::{anyhow, bail, Context, Result};
use profitscale::policies::ReactiveConfig;
use profitscale::simulator::{Mode, PolicyKind, SimConfig, VarianceSource};
use profitscale::workload::{
    bundled_params, parse_counts_csv, parse_timestamps, ramp_params, synthesize, DiurnalParams,
    ServiceKind, ServiceTimeModel, WorkloadTrace, BUNDLED_WARMUP_MINUTES,
};
use profitscale::BillingModel;

/// Keys, defaults and descriptions.
pub const KEYS: &[(&str, &str, &str)] = &[
    (
        "trace.source",
        "bundled",
        "bundled | ramp | synthetic | counts | timestamps",
    ),
    ("trace.path", "", "input file for counts / timestamps"),
    ("trace.bucket_minutes", "1", "timestamp bucket width"),
    (
        "trace.scale",
        "1",
        "multiplier applied to every minute count",
    ),
    (
        "warmup_minutes",
        "auto",
        "history-only prefix; auto = 13 days for bundled/ramp, else 0",
    ),
    ("synth.days", "14", "synthetic trace length"),
    ("synth.base_rate", "16000", "synthetic mean rate, jobs/min"),
    ("synth.amplitude", "14500", "synthetic half swing, jobs/min"),
    (
        "synth.noise_scv",
        "0.01",
        "synthetic multiplicative noise scv",
    ),
    (
        "synth.sharpness",
        "1",
        "synthetic ramp sharpness (1 = sine)",
    ),
    ("synth.seed", "20110601", "synthetic trace seed"),
    (
        "service.kind",
        "lognormal",
        "lognormal | exponential | deterministic",
    ),
    ("service.mu", "28.571", "service rate of one server, jobs/s"),
    ("service.scv", "8.04", "service-time scv (lognormal)"),
    (
        "arrival_ca2",
        "1",
        "interarrival scv of the generated arrivals",
    ),
    ("billing.charge", "0.0017", "cents per job"),
    ("billing.cost", "17", "cents per server-hour"),
    ("billing.epoch_hours", "1", "epoch length"),
    ("billing.boot_minutes", "5", "t_U"),
    ("billing.teardown_minutes", "2", "t_D"),
    ("billing.max_servers", "20", "fleet cap"),
    ("billing.penalty", "none", "cents per lost job"),
    ("billing.acquire_cost", "none", "cents per added server"),
    ("billing.release_cost", "none", "cents per removed server"),
    (
        "policy",
        "optimal",
        "optimal | qed | grassmann | always_on | reactive | all",
    ),
    ("always_on.servers", "20", "fixed fleet size"),
    (
        "reactive.upper",
        "0.7",
        "add a server above this utilization",
    ),
    (
        "reactive.lower",
        "0.6",
        "remove a server below this utilization",
    ),
    (
        "reactive.window_minutes",
        "15",
        "samples the condition must hold for",
    ),
    ("reactive.min_servers", "1", "reactive floor"),
    ("mode", "server", "server | connection"),
    (
        "mode.slots",
        "1",
        "concurrent jobs per server in connection mode",
    ),
    (
        "initial_servers",
        "auto",
        "fleet at time 0; auto = QED size of the first minute",
    ),
    ("season", "24", "forecast season, epochs"),
    (
        "grassmann.variance",
        "current_epoch",
        "current_epoch | target_epoch",
    ),
    ("seed", "1", "simulation seed"),
];

pub const POLICIES: [&str; 5] = ["always_on", "optimal", "qed", "grassmann", "reactive"];

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Settings {
    values: BTreeMap<String, String>,
}

impl Default for Settings {
    fn default() -> Self {
        Self {
            values: KEYS
                .iter()
                .map(|(k, v, _)| (k.to_string(), v.to_string()))
                .collect(),
        }
    }
}

impl Settings {
    pub fn from_file(path: &Path) -> Result<Self> {
        let text =
            std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
        let mut s = Self::default();
        s.apply_text(&text)?;
        Ok(s)
    }

    pub fn apply_text(&mut self, text: &str) -> Result<()> {
        for (i, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let (k, v) = line
                .split_once('=')
                .ok_or_else(|| anyhow!("line {}: expected `key = value`, got {line:?}", i + 1))?;
            self.set(k.trim(), v.trim())
                .with_context(|| format!("line {}", i + 1))?;
        }
        Ok(())
    }

    /// Applies a `key=value` override.
    pub fn apply_override(&mut self, kv: &str) -> Result<()> {
        let (k, v) = kv
            .split_once('=')
            .ok_or_else(|| anyhow!("expected key=value, got {kv:?}"))?;
        self.set(k.trim(), v.trim())
    }

    pub fn set(&mut self, key: &str, value: &str) -> Result<()> {
        match self.values.get_mut(key) {
            Some(slot) => {
                *slot = value.to_string();
                Ok(())
            }
            None => bail!("unknown configuration key {key:?}"),
        }
    }

    pub fn get(&self, key: &str) -> &str {
        &self.values[key]
    }

    pub fn materialized(&self) -> &BTreeMap<String, String> {
        &self.values
    }

    pub fn from_map(map: &BTreeMap<String, String>) -> Result<Self> {
        let mut s = Self::default();
        for (k, v) in map {
            s.set(k, v)?;
        }
        Ok(s)
    }

    fn parse<T: std::str::FromStr>(&self, key: &str) -> Result<T>
    where
        T::Err: std::fmt::Display,
    {
        let v = self.get(key);
        v.parse().map_err(|e| anyhow!("{key} = {v:?}: {e}"))
    }

    fn optional<T: std::str::FromStr>(&self, key: &str, none: &str) -> Result<Option<T>>
    where
        T::Err: std::fmt::Display,
    {
        if self.get(key) == none {
            Ok(None)
        } else {
            self.parse(key).map(Some)
        }
    }

    /// Input file named by the configuration, if any.
    pub fn input_path(&self) -> Option<PathBuf> {
        match self.get("trace.source") {
            "counts" | "timestamps" => Some(PathBuf::from(self.get("trace.path"))),
            _ => None,
        }
    }

    pub fn policy_names(&self) -> Result<Vec<&'static str>> {
        let p = self.get("policy");
        if p == "all" {
            return Ok(POLICIES.to_vec());
        }
        POLICIES
            .iter()
            .find(|&&name| name == p)
            .map(|&name| vec![name])
            .ok_or_else(|| anyhow!("unknown policy {p:?}"))
    }

    pub fn billing(&self) -> Result<BillingModel> {
        let b = BillingModel {
            charge_per_job: self.parse("billing.charge")?,
            cost_per_server_hour: self.parse("billing.cost")?,
            epoch_hours: self.parse("billing.epoch_hours")?,
            boot_hours: self.parse::<f64>("billing.boot_minutes")? / 60.0,
            teardown_hours: self.parse::<f64>("billing.teardown_minutes")? / 60.0,
            penalty_per_lost_job: self.optional("billing.penalty", "none")?,
            acquire_cost: self.optional("billing.acquire_cost", "none")?,
            release_cost: self.optional("billing.release_cost", "none")?,
            max_servers: self.parse("billing.max_servers")?,
        };
        b.validate()?;
        Ok(b)
    }

    fn service(&self) -> Result<ServiceTimeModel> {
        let mu: f64 = self.parse("service.mu")?;
        if mu.is_nan() || mu <= 0.0 {
            bail!("service.mu must be > 0");
        }
        let scv: f64 = self.parse("service.scv")?;
        let kind = match self.get("service.kind") {
            "lognormal" => ServiceKind::Lognormal,
            "exponential" | "exp" => ServiceKind::Exponential,
            "deterministic" | "det" => ServiceKind::Deterministic,
            other => bail!("unknown service kind {other:?}"),
        };
        Ok(match kind {
            ServiceKind::Lognormal => ServiceTimeModel::lognormal(1.0 / mu, scv),
            ServiceKind::Exponential => ServiceTimeModel::exponential(1.0 / mu),
            ServiceKind::Deterministic => ServiceTimeModel::deterministic(1.0 / mu),
        })
    }

    fn synthetic_params(&self) -> Result<DiurnalParams> {
        Ok(DiurnalParams {
            sharpness: self.parse("synth.sharpness")?,
            ..DiurnalParams::new(
                self.parse("synth.days")?,
                self.parse("synth.base_rate")?,
                self.parse("synth.amplitude")?,
                self.parse("synth.noise_scv")?,
                self.parse("synth.seed")?,
            )
        })
    }

    pub fn trace(&self) -> Result<WorkloadTrace> {
        let trace = match self.get("trace.source") {
            "bundled" => synthesize(&bundled_params())?,
            "ramp" => synthesize(&ramp_params())?,
            "synthetic" => synthesize(&self.synthetic_params()?)?,
            source @ ("counts" | "timestamps") => {
                let path = self.get("trace.path");
                if path.is_empty() {
                    bail!("trace.source = {source} needs trace.path");
                }
                let file = File::open(path).with_context(|| format!("opening {path}"))?;
                let reader = BufReader::new(file);
                if source == "counts" {
                    parse_counts_csv(reader)
                } else {
                    parse_timestamps(reader, self.parse("trace.bucket_minutes")?)
                }
                .with_context(|| format!("reading {path}"))?
            }
            other => bail!("unknown trace source {other:?}"),
        };
        let scale: f64 = self.parse("trace.scale")?;
        Ok(if scale == 1.0 {
            trace
        } else {
            trace.scaled(scale)
        })
    }

    fn warmup(&self) -> Result<usize> {
        if self.get("warmup_minutes") == "auto" {
            return Ok(match self.get("trace.source") {
                "bundled" | "ramp" => BUNDLED_WARMUP_MINUTES,
                _ => 0,
            });
        }
        self.parse("warmup_minutes")
    }

    pub fn policy(&self, name: &str, billing: &BillingModel) -> Result<PolicyKind> {
        Ok(match name {
            "optimal" => PolicyKind::Optimal,
            "qed" => PolicyKind::Qed,
            "grassmann" => PolicyKind::Grassmann,
            "always_on" => PolicyKind::AlwaysOn(self.parse("always_on.servers")?),
            "reactive" => PolicyKind::Reactive(ReactiveConfig {
                upper: self.parse("reactive.upper")?,
                lower: self.parse("reactive.lower")?,
                window_minutes: self.parse("reactive.window_minutes")?,
                min_servers: self.parse("reactive.min_servers")?,
                max_servers: billing.max_servers,
            }),
            other => bail!("unknown policy {other:?}"),
        })
    }

    /// Builds the simulation for one policy over an already loaded trace.
    pub fn sim_config(&self, trace: WorkloadTrace, policy: &str) -> Result<SimConfig> {
        let billing = self.billing()?;
        let mode = match self.get("mode") {
            "server" => Mode::ServerLevel,
            "connection" => Mode::ConnectionLevel(self.parse("mode.slots")?),
            other => bail!("unknown mode {other:?}"),
        };
        let config = SimConfig {
            trace,
            warmup_minutes: self.warmup()?,
            service: self.service()?,
            arrival_ca2: self.parse("arrival_ca2")?,
            policy: self.policy(policy, &billing)?,
            billing,
            mode,
            seed: self.parse("seed")?,
            initial_servers: self.optional("initial_servers", "auto")?,
            season: self.parse("season")?,
            variance_source: match self.get("grassmann.variance") {
                "current_epoch" => VarianceSource::CurrentEpoch,
                "target_epoch" => VarianceSource::TargetEpoch,
                other => bail!("unknown grassmann.variance {other:?}"),
            },
        };
        config.validate()?;
        Ok(config)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults_build_every_policy() {
        let s = Settings::default();
        let trace = WorkloadTrace::new(
            vec![100; 120],
            profitscale::workload::TraceOrigin::Synthetic,
        );
        let mut s2 = s.clone();
        s2.set("warmup_minutes", "0").unwrap();
        for p in POLICIES {
            let c = s2.sim_config(trace.clone(), p).unwrap();
            assert_eq!(c.policy.name(), p);
        }
        assert_eq!(s.materialized().len(), KEYS.len());
    }

    #[test]
    fn file_syntax() {
        let mut s = Settings::default();
        s.apply_text("# comment\n\npolicy = qed\nbilling.cost=20\n")
            .unwrap();
        assert_eq!(s.get("policy"), "qed");
        assert_eq!(s.billing().unwrap().cost_per_server_hour, 20.0);
        assert!(s.apply_text("nonsense").is_err());
        assert!(s.apply_text("no.such.key = 1").is_err());
    }

    #[test]
    fn overrides_and_optionals() {
        let mut s = Settings::default();
        s.apply_override("billing.penalty=0.01").unwrap();
        assert_eq!(s.billing().unwrap().penalty_per_lost_job, Some(0.01));
        s.apply_override("policy=all").unwrap();
        assert_eq!(s.policy_names().unwrap().len(), 5);
        s.apply_override("policy=nope").unwrap();
        assert!(s.policy_names().is_err());
    }
}
