//! Static provisioning and a threshold autoscaler.

use std::collections::VecDeque;

use serde::{Deserialize, Serialize};

use super::decision::PolicyDecision;
use crate::error::{Error, Result};

/// Keeps `n_fixed` servers regardless of traffic.
pub fn always_on_decide(n_fixed: u32, n_current: u32) -> PolicyDecision {
    PolicyDecision::transition(n_current, n_fixed)
}

/// Thresholds of the utilization-driven autoscaler.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ReactiveConfig {
    /// Add a server when every sample in the window exceeds this.
    pub upper: f64,
    /// Remove a server when every sample in the window is below this.
    pub lower: f64,
    /// Number of per-minute samples the condition must hold for.
    pub window_minutes: usize,
    pub min_servers: u32,
    pub max_servers: u32,
}

impl Default for ReactiveConfig {
    fn default() -> Self {
        Self {
            upper: 0.70,
            lower: 0.60,
            window_minutes: 15,
            min_servers: 1,
            max_servers: 20,
        }
    }
}

impl ReactiveConfig {
    pub fn validate(&self) -> Result<()> {
        if !(0.0 <= self.lower && self.lower <= self.upper && self.upper <= 1.0) {
            return Err(Error::config(
                "reactive thresholds need 0 <= lower <= upper <= 1",
            ));
        }
        if self.window_minutes == 0 {
            return Err(Error::config("reactive window must be at least one minute"));
        }
        if self.min_servers > self.max_servers {
            return Err(Error::config("reactive min servers exceeds max servers"));
        }
        Ok(())
    }
}

/// Sliding window of per-minute fleet utilization samples.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct UtilizationWindow {
    samples: VecDeque<f64>,
}

impl UtilizationWindow {
    pub fn new() -> Self {
        Self::default()
    }

    /// Appends a sample, keeping at most `capacity` of the newest ones.
    pub fn push(&mut self, sample: f64, capacity: usize) {
        self.samples.push_back(sample);
        while self.samples.len() > capacity {
            self.samples.pop_front();
        }
    }

    pub fn clear(&mut self) {
        self.samples.clear();
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    pub fn samples(&self) -> impl Iterator<Item = f64> + '_ {
        self.samples.iter().copied()
    }
}

/// One evaluation of the threshold rule. A full window entirely above
/// `upper` adds a server, entirely below `lower` removes one; after either
/// action the window is cleared.
pub fn reactive_step(
    window: &mut UtilizationWindow,
    n_current: u32,
    config: &ReactiveConfig,
) -> PolicyDecision {
    if window.len() < config.window_minutes {
        return PolicyDecision::transition(n_current, n_current);
    }
    let recent = || window.samples().skip(window.len() - config.window_minutes);
    let n_next = if recent().all(|u| u > config.upper) && n_current < config.max_servers {
        n_current + 1
    } else if recent().all(|u| u < config.lower) && n_current > config.min_servers {
        n_current - 1
    } else {
        n_current
    };
    if n_next != n_current {
        window.clear();
    }
    PolicyDecision::transition(n_current, n_next)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn filled(samples: impl IntoIterator<Item = f64>) -> UtilizationWindow {
        let mut w = UtilizationWindow::new();
        for s in samples {
            w.push(s, 15);
        }
        w
    }

    #[test]
    fn always_on_ignores_everything() {
        let d = always_on_decide(20, 0);
        assert_eq!((d.n_next, d.n_plus, d.n_minus), (20, 20, 0));
        let d = always_on_decide(20, 20);
        assert_eq!((d.n_plus, d.n_minus), (0, 0));
        assert_eq!(always_on_decide(0, 3).n_minus, 3);
    }

    #[test]
    fn sustained_high_utilization_adds_one() {
        let cfg = ReactiveConfig::default();
        let mut w = filled(std::iter::repeat_n(0.75, 15));
        let d = reactive_step(&mut w, 10, &cfg);
        assert_eq!((d.n_next, d.n_plus), (11, 1));
        assert!(w.is_empty());
    }

    #[test]
    fn sustained_low_utilization_removes_one() {
        let cfg = ReactiveConfig::default();
        let mut w = filled(std::iter::repeat_n(0.55, 15));
        let d = reactive_step(&mut w, 10, &cfg);
        assert_eq!((d.n_next, d.n_minus), (9, 1));
    }

    #[test]
    fn oscillation_holds() {
        let cfg = ReactiveConfig::default();
        let mut w = filled((0..15).map(|i| if i % 2 == 0 { 0.72 } else { 0.58 }));
        let d = reactive_step(&mut w, 10, &cfg);
        assert_eq!(d.n_next, 10);
        assert_eq!(w.len(), 15);
    }

    #[test]
    fn short_window_holds() {
        let cfg = ReactiveConfig::default();
        let mut w = filled(std::iter::repeat_n(0.99, 14));
        assert_eq!(reactive_step(&mut w, 10, &cfg).n_next, 10);
    }

    #[test]
    fn bounds_are_respected() {
        let cfg = ReactiveConfig::default();
        let mut w = filled(std::iter::repeat_n(0.99, 15));
        assert_eq!(reactive_step(&mut w, 20, &cfg).n_next, 20);
        let mut w = filled(std::iter::repeat_n(0.0, 15));
        assert_eq!(reactive_step(&mut w, 1, &cfg).n_next, 1);
    }

    #[test]
    fn config_validation() {
        assert!(ReactiveConfig::default().validate().is_ok());
        let bad = ReactiveConfig {
            lower: 0.8,
            ..Default::default()
        };
        assert!(bad.validate().is_err());
    }
}
