use std::io::Write;

use serde::{Deserialize, Serialize};

use crate::error::Result;

/// Percentile grid of the sojourn-time CDF.
pub const SOJOURN_LEVELS: [f64; 6] = [0.25, 0.50, 0.75, 0.90, 0.95, 0.99];

/// Rounds cents to four decimals.
pub fn round_cents(x: f64) -> f64 {
    (x * 1e4).round() / 1e4
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EpochRecord {
    pub epoch: usize,
    /// Servers in the fleet at the start of the epoch, booting ones included.
    pub n: u32,
    pub n_plus: u32,
    pub n_minus: u32,
    /// Arrival rate the fleet was sized for, jobs/second.
    pub forecast_lambda: Option<f64>,
    pub actual_lambda: f64,
    pub accepted: u64,
    pub blocked: u64,
    /// Server-hours whose billing period starts in this epoch.
    pub server_hours: u64,
    /// Cents.
    pub profit: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct QuantilePoint {
    pub quantile: f64,
    /// Seconds.
    pub value: f64,
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct Aggregates {
    pub total_profit_cents: f64,
    pub revenue_cents: f64,
    pub server_cost_cents: f64,
    pub penalty_cents: f64,
    pub transition_cents: f64,
    pub server_hours: u64,
    pub jobs_arrived: u64,
    pub jobs_accepted: u64,
    pub jobs_lost: u64,
    pub blocking_fraction: f64,
    /// Seconds.
    pub mean_sojourn_time: f64,
    pub sojourn_scv: f64,
    /// Time-averaged fleet size.
    pub mean_servers: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimulationReport {
    pub policy: String,
    pub seed: u64,
    pub epochs: Vec<EpochRecord>,
    pub aggregates: Aggregates,
    pub sojourn_quantiles: Vec<QuantilePoint>,
    /// Provenance of the run (configuration, versions, input digests), as
    /// supplied by the caller.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub manifest: Option<serde_json::Value>,
}

impl SimulationReport {
    pub fn empty(policy: &str, seed: u64) -> Self {
        Self {
            policy: policy.to_string(),
            seed,
            epochs: Vec::new(),
            aggregates: Aggregates::default(),
            sojourn_quantiles: SOJOURN_LEVELS
                .iter()
                .map(|&quantile| QuantilePoint {
                    quantile,
                    value: 0.0,
                })
                .collect(),
            manifest: None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ReportFormat {
    Json,
    Csv,
}

pub const CSV_HEADER: &str =
    "epoch,n,n_plus,n_minus,forecast_lambda,actual_lambda,accepted,blocked,server_hours,profit";

/// Writes the report. CSV has one row per epoch and a final `total` row.
pub fn emit_report<W: Write>(
    report: &SimulationReport,
    format: ReportFormat,
    mut out: W,
) -> Result<()> {
    match format {
        ReportFormat::Json => {
            serde_json::to_writer_pretty(&mut out, report)
                .map_err(|e| crate::Error::Io(e.to_string()))?;
            writeln!(out)?;
        }
        ReportFormat::Csv => {
            writeln!(out, "{CSV_HEADER}")?;
            for e in &report.epochs {
                let forecast = e.forecast_lambda.map(|f| f.to_string()).unwrap_or_default();
                writeln!(
                    out,
                    "{},{},{},{},{},{},{},{},{},{:.4}",
                    e.epoch,
                    e.n,
                    e.n_plus,
                    e.n_minus,
                    forecast,
                    e.actual_lambda,
                    e.accepted,
                    e.blocked,
                    e.server_hours,
                    e.profit
                )?;
            }
            let a = &report.aggregates;
            writeln!(
                out,
                "total,,{},{},,,{},{},{},{:.4}",
                report.epochs.iter().map(|e| e.n_plus).sum::<u32>(),
                report.epochs.iter().map(|e| e.n_minus).sum::<u32>(),
                a.jobs_accepted,
                a.jobs_lost,
                a.server_hours,
                a.total_profit_cents
            )?;
        }
    }
    Ok(())
}

pub fn report_to_string(report: &SimulationReport, format: ReportFormat) -> String {
    let mut buf = Vec::new();
    emit_report(report, format, &mut buf).expect("writing to memory cannot fail");
    String::from_utf8(buf).expect("reports are UTF-8")
}

/// Log-spaced histogram of positive values, for quantiles of unbounded
/// samples in constant memory.
#[derive(Debug, Clone)]
pub struct LogHistogram {
    counts: Vec<u64>,
    total: u64,
}

impl LogHistogram {
    const MIN_EXP: f64 = -7.0;
    const MAX_EXP: f64 = 6.0;
    const PER_DECADE: f64 = 200.0;

    pub fn new() -> Self {
        let bins = ((Self::MAX_EXP - Self::MIN_EXP) * Self::PER_DECADE) as usize + 2;
        Self {
            counts: vec![0; bins],
            total: 0,
        }
    }

    fn bin(x: f64) -> usize {
        if !(x > 0.0) {
            return 0;
        }
        let pos = (x.log10() - Self::MIN_EXP) * Self::PER_DECADE;
        let last = ((Self::MAX_EXP - Self::MIN_EXP) * Self::PER_DECADE) as usize + 1;
        if pos < 0.0 {
            0
        } else {
            (pos as usize + 1).min(last)
        }
    }

    /// Geometric midpoint of a bin.
    fn representative(bin: usize) -> f64 {
        if bin == 0 {
            return 10f64.powf(Self::MIN_EXP);
        }
        10f64.powf(Self::MIN_EXP + (bin as f64 - 0.5) / Self::PER_DECADE)
    }

    pub fn record(&mut self, x: f64) {
        self.counts[Self::bin(x)] += 1;
        self.total += 1;
    }

    pub fn count(&self) -> u64 {
        self.total
    }

    /// Smallest bin value with at least `q` of the mass at or below it;
    /// 0 when empty. Relative resolution is about 1.2%.
    pub fn quantile(&self, q: f64) -> f64 {
        if self.total == 0 {
            return 0.0;
        }
        let target = (q * self.total as f64).ceil().max(1.0) as u64;
        let mut seen = 0;
        for (i, &c) in self.counts.iter().enumerate() {
            seen += c;
            if seen >= target {
                return Self::representative(i);
            }
        }
        Self::representative(self.counts.len() - 1)
    }
}

impl Default for LogHistogram {
    fn default() -> Self {
        Self::new()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sample() -> SimulationReport {
        let mut r = SimulationReport::empty("optimal", 7);
        r.epochs = vec![
            EpochRecord {
                epoch: 0,
                n: 3,
                n_plus: 0,
                n_minus: 0,
                forecast_lambda: None,
                actual_lambda: 12.345678901234567,
                accepted: 44000,
                blocked: 444,
                server_hours: 3,
                profit: round_cents(23.8),
            },
            EpochRecord {
                epoch: 1,
                n: 4,
                n_plus: 1,
                n_minus: 0,
                forecast_lambda: Some(1.0 / 3.0),
                actual_lambda: 0.1,
                accepted: 360,
                blocked: 0,
                server_hours: 4,
                profit: round_cents(-67.3880),
            },
        ];
        r
    }

    #[test]
    fn empty_report_is_valid_json() {
        let r = SimulationReport::empty("qed", 0);
        let text = report_to_string(&r, ReportFormat::Json);
        let v: serde_json::Value = serde_json::from_str(&text).unwrap();
        assert_eq!(v["aggregates"]["total_profit_cents"], 0.0);
        assert_eq!(v["aggregates"]["jobs_arrived"], 0);
        assert_eq!(v["epochs"].as_array().unwrap().len(), 0);
        let levels: Vec<f64> = v["sojourn_quantiles"]
            .as_array()
            .unwrap()
            .iter()
            .map(|p| p["quantile"].as_f64().unwrap())
            .collect();
        assert_eq!(levels, SOJOURN_LEVELS);
    }

    #[test]
    fn json_roundtrip() {
        let r = sample();
        let back: SimulationReport =
            serde_json::from_str(&report_to_string(&r, ReportFormat::Json)).unwrap();
        assert_eq!(back, r);
    }

    #[test]
    fn csv_roundtrip_per_epoch() {
        let r = sample();
        let text = report_to_string(&r, ReportFormat::Csv);
        let mut rdr = csv::Reader::from_reader(text.as_bytes());
        assert_eq!(
            rdr.headers().unwrap().iter().collect::<Vec<_>>().join(","),
            CSV_HEADER
        );
        let rows: Vec<csv::StringRecord> = rdr.records().map(|r| r.unwrap()).collect();
        assert_eq!(rows.len(), 3);
        for (row, e) in rows.iter().zip(&r.epochs) {
            assert_eq!(row[0].parse::<usize>().unwrap(), e.epoch);
            assert_eq!(row[1].parse::<u32>().unwrap(), e.n);
            let forecast = (!row[4].is_empty()).then(|| row[4].parse::<f64>().unwrap());
            assert_eq!(forecast, e.forecast_lambda);
            assert_eq!(row[5].parse::<f64>().unwrap(), e.actual_lambda);
            assert_eq!(row[6].parse::<u64>().unwrap(), e.accepted);
            assert_eq!(row[7].parse::<u64>().unwrap(), e.blocked);
            assert_eq!(row[8].parse::<u64>().unwrap(), e.server_hours);
            assert_eq!(row[9].parse::<f64>().unwrap(), e.profit);
        }
        assert_eq!(&rows[2][0], "total");
    }

    #[test]
    fn histogram_quantiles() {
        let mut h = LogHistogram::new();
        for i in 1..=1000 {
            h.record(i as f64 / 1000.0);
        }
        for (q, exact) in [(0.25, 0.25), (0.5, 0.5), (0.99, 0.99)] {
            let v = h.quantile(q);
            assert!((v - exact).abs() / exact < 0.012, "q={q}: {v}");
        }
        assert_eq!(LogHistogram::new().quantile(0.5), 0.0);
    }
}
