use std::io::BufRead;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TraceOrigin {
    CountsFile,
    TimestampsFile,
    Synthetic,
}

/// Arrival counts per minute over a gap-free range of minutes.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WorkloadTrace {
    /// Index of the first minute.
    pub start_minute: u64,
    /// `counts[i]` arrivals during minute `start_minute + i`.
    pub counts: Vec<u64>,
    pub origin: TraceOrigin,
    /// Non-fatal issues found while building the trace (e.g. filled gaps).
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub warnings: Vec<String>,
}

impl WorkloadTrace {
    pub fn new(counts: Vec<u64>, origin: TraceOrigin) -> Self {
        Self {
            start_minute: 0,
            counts,
            origin,
            warnings: Vec::new(),
        }
    }

    /// Duration in minutes.
    pub fn duration(&self) -> usize {
        self.counts.len()
    }

    pub fn total(&self) -> u64 {
        self.counts.iter().sum()
    }

    /// `(minute index, count)` pairs.
    pub fn minute_rates(&self) -> impl Iterator<Item = (u64, u64)> + '_ {
        self.counts
            .iter()
            .enumerate()
            .map(move |(i, &c)| (self.start_minute + i as u64, c))
    }

    /// Sub-trace of minutes `[from, to)` relative to the start.
    pub fn slice(&self, from: usize, to: usize) -> WorkloadTrace {
        let to = to.min(self.counts.len());
        let from = from.min(to);
        WorkloadTrace {
            start_minute: self.start_minute + from as u64,
            counts: self.counts[from..to].to_vec(),
            origin: self.origin,
            warnings: Vec::new(),
        }
    }

    /// Multiplies every count by `factor`, rounding to the nearest integer.
    pub fn scaled(&self, factor: f64) -> WorkloadTrace {
        WorkloadTrace {
            counts: self
                .counts
                .iter()
                .map(|&c| (c as f64 * factor).round().max(0.0) as u64)
                .collect(),
            ..self.clone()
        }
    }

    /// Mean arrival rate (jobs/second) of each block of `minutes` minutes;
    /// a trailing partial block is dropped.
    pub fn block_means(&self, minutes: usize) -> Vec<f64> {
        self.counts
            .chunks_exact(minutes.max(1))
            .map(|c| c.iter().sum::<u64>() as f64 / (c.len() as f64 * 60.0))
            .collect()
    }

    /// Serializes as `minute,count` lines with a header.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("minute,count\n");
        for (m, c) in self.minute_rates() {
            out.push_str(&format!("{m},{c}\n"));
        }
        out
    }
}

/// Reads `minute,count` lines. A non-numeric first line is taken as a header;
/// blank lines are skipped. Missing minutes are filled with zero and noted in
/// [`WorkloadTrace::warnings`].
pub fn parse_counts_csv<R: BufRead>(input: R) -> Result<WorkloadTrace> {
    let mut start: Option<u64> = None;
    let mut counts: Vec<u64> = Vec::new();
    let mut warnings = Vec::new();
    for (i, line) in input.lines().enumerate() {
        let lineno = i + 1;
        let line = line.map_err(|e| Error::Parse {
            line: lineno,
            message: e.to_string(),
        })?;
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let mut fields = line.split(',').map(str::trim);
        let (Some(minute), Some(count), None) = (fields.next(), fields.next(), fields.next())
        else {
            return Err(Error::Parse {
                line: lineno,
                message: format!("expected `minute,count`, got {line:?}"),
            });
        };
        let parsed = (minute.parse::<u64>(), count.parse::<u64>());
        let (minute, count) = match parsed {
            (Ok(m), Ok(c)) => (m, c),
            _ if start.is_none() && counts.is_empty() && lineno == 1 => continue,
            _ => {
                return Err(Error::Parse {
                    line: lineno,
                    message: format!(
                        "minute and count must be non-negative integers, got {line:?}"
                    ),
                })
            }
        };
        let base = *start.get_or_insert(minute);
        let expected = base + counts.len() as u64;
        if minute < expected {
            return Err(Error::Parse {
                line: lineno,
                message: format!("minute {minute} is not after minute {}", expected - 1),
            });
        }
        if minute > expected {
            warnings.push(format!(
                "minutes {expected}..{} missing, filled with 0 (line {lineno})",
                minute - 1
            ));
            counts.resize((minute - base) as usize, 0);
        }
        counts.push(count);
    }
    let Some(start_minute) = start else {
        return Err(Error::domain("counts input is empty"));
    };
    Ok(WorkloadTrace {
        start_minute,
        counts,
        origin: TraceOrigin::CountsFile,
        warnings,
    })
}

/// Buckets epoch-second timestamps (one per line, any order) into per-minute
/// counts. With `bucket_minutes > 1`, each bucket's total is spread over its
/// minutes (remainder to the earliest), preserving the total.
pub fn parse_timestamps<R: BufRead>(input: R, bucket_minutes: u64) -> Result<WorkloadTrace> {
    if bucket_minutes == 0 {
        return Err(Error::config("bucket must be at least one minute"));
    }
    let mut buckets: Vec<u64> = Vec::new();
    for (i, line) in input.lines().enumerate() {
        let lineno = i + 1;
        let line = line.map_err(|e| Error::Parse {
            line: lineno,
            message: e.to_string(),
        })?;
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let ts: f64 = line.parse().map_err(|_| Error::Parse {
            line: lineno,
            message: format!("not a number: {line:?}"),
        })?;
        if !(ts >= 0.0) || !ts.is_finite() {
            return Err(Error::Parse {
                line: lineno,
                message: format!("timestamp must be a finite non-negative number, got {ts}"),
            });
        }
        buckets.push((ts / 60.0).floor() as u64 / bucket_minutes);
    }
    if buckets.is_empty() {
        return Err(Error::domain("timestamp input is empty"));
    }
    buckets.sort_unstable();
    let first = buckets[0];
    let last = *buckets.last().unwrap();
    let mut per_bucket = vec![0u64; (last - first + 1) as usize];
    for b in &buckets {
        per_bucket[(b - first) as usize] += 1;
    }
    let mut counts = Vec::with_capacity(per_bucket.len() * bucket_minutes as usize);
    for total in per_bucket {
        let share = total / bucket_minutes;
        let extra = total % bucket_minutes;
        counts.extend((0..bucket_minutes).map(|j| share + u64::from(j < extra)));
    }
    Ok(WorkloadTrace {
        start_minute: first * bucket_minutes,
        counts,
        origin: TraceOrigin::TimestampsFile,
        warnings: Vec::new(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn two_minutes() {
        let t = parse_counts_csv("0,120\n1,130".as_bytes()).unwrap();
        assert_eq!(t.counts, vec![120, 130]);
        assert_eq!(t.duration(), 2);
        assert!(t.warnings.is_empty());
    }

    #[test]
    fn header_is_skipped() {
        let t = parse_counts_csv("minute,count\n3,7\n4,8\n".as_bytes()).unwrap();
        assert_eq!(t.start_minute, 3);
        assert_eq!(t.counts, vec![7, 8]);
    }

    #[test]
    fn gaps_are_zero_filled_with_warning() {
        let text: String = (0..=10)
            .filter(|&m| m != 5)
            .map(|m| format!("{m},{}\n", 10 + m))
            .collect();
        let t = parse_counts_csv(text.as_bytes()).unwrap();
        assert_eq!(t.duration(), 11);
        assert_eq!(t.counts[5], 0);
        assert_eq!(t.warnings.len(), 1);
    }

    #[test]
    fn two_weeks_of_minutes() {
        let text: String = (0..20160).map(|m| format!("{m},1\n")).collect();
        assert_eq!(parse_counts_csv(text.as_bytes()).unwrap().duration(), 20160);
    }

    #[test]
    fn malformed_lines_report_line_numbers() {
        let err = parse_counts_csv("0,1\n1,x\n".as_bytes()).unwrap_err();
        assert_eq!(
            err,
            Error::Parse {
                line: 2,
                message: "minute and count must be non-negative integers, got \"1,x\"".into()
            }
        );
        assert!(matches!(
            parse_counts_csv("0,1\n0,2\n".as_bytes()),
            Err(Error::Parse { line: 2, .. })
        ));
        assert!(matches!(
            parse_counts_csv("0,1,2\n".as_bytes()),
            Err(Error::Parse { line: 1, .. })
        ));
        assert!(matches!(
            parse_counts_csv("".as_bytes()),
            Err(Error::Domain(_))
        ));
    }

    #[test]
    fn timestamps_in_one_minute() {
        let text: String = (0..60).map(|i| format!("{}.5\n", i)).collect();
        let t = parse_timestamps(text.as_bytes(), 1).unwrap();
        assert_eq!(t.minute_rates().collect::<Vec<_>>(), vec![(0, 60)]);
    }

    #[test]
    fn timestamps_errors() {
        assert!(matches!(
            parse_timestamps("".as_bytes(), 1),
            Err(Error::Domain(_))
        ));
        assert!(matches!(
            parse_timestamps("5\n-1\n".as_bytes(), 1),
            Err(Error::Parse { line: 2, .. })
        ));
    }

    #[test]
    fn timestamps_over_ten_minutes() {
        let text: String = (0..600)
            .rev()
            .map(|s| format!("{}\n", 1_300_000_000 + s))
            .collect();
        let t = parse_timestamps(text.as_bytes(), 1).unwrap();
        // 1_300_000_000 is 20 s into its minute, so 600 s touch 11 minutes
        assert_eq!(t.duration(), 11);
        assert_eq!(t.total(), 600);
        let t5 = parse_timestamps(text.as_bytes(), 5).unwrap();
        assert_eq!(t5.total(), 600);
        assert_eq!(t5.duration() % 5, 0);
    }

    proptest! {
        #[test]
        fn csv_roundtrip_conserves_counts(counts in proptest::collection::vec(0u64..10_000, 1..300), start in 0u64..100_000) {
            let trace = WorkloadTrace { start_minute: start, ..WorkloadTrace::new(counts, TraceOrigin::Synthetic) };
            let back = parse_counts_csv(trace.to_csv().as_bytes()).unwrap();
            prop_assert_eq!(back.total(), trace.total());
            prop_assert_eq!(back.counts, trace.counts);
            prop_assert_eq!(back.start_minute, start);
        }
    }
}
