use std::cmp::{Ordering, Reverse};
use std::collections::BinaryHeap;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::config::{PolicyKind, SimConfig, VarianceSource};
use super::report::{
    round_cents, Aggregates, EpochRecord, LogHistogram, QuantilePoint, SimulationReport,
    SOJOURN_LEVELS,
};
use super::settle::{billing_settle, ServerLifecycle};
use crate::error::Result;
use crate::forecast::{fit_ets, EtsModel};
use crate::policies::{
    grassmann_decide, optimal_decide, qed_decide, reactive_step, PolicyDecision, ReactiveConfig,
    UtilizationWindow,
};
use crate::queueing::{QueueParams, TransientBlocking};
use crate::workload::{ArrivalStream, EpochAccumulator, ServiceSampler};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Phase {
    Booting,
    Running,
    /// Admits no new jobs; finishes the ones in service.
    Terminating,
    Terminated,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ServerState {
    pub id: u32,
    pub phase: Phase,
    pub acquired_at: f64,
    pub boot_complete_at: f64,
    pub terminated_at: Option<f64>,
    /// Jobs in service.
    pub busy: u32,
    /// Set once the release instant has passed while jobs were still running.
    terminate_when_idle: bool,
}

impl ServerState {
    fn lifecycle(&self) -> ServerLifecycle {
        ServerLifecycle {
            id: self.id,
            acquired_at: self.acquired_at,
            terminated_at: self.terminated_at,
        }
    }

    fn in_fleet(&self) -> bool {
        matches!(self.phase, Phase::Booting | Phase::Running)
    }
}

#[derive(Debug, Clone, Copy)]
struct Departure {
    time: f64,
    server: u32,
    service: f64,
}

impl PartialEq for Departure {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == Ordering::Equal
    }
}
impl Eq for Departure {}
impl PartialOrd for Departure {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}
impl Ord for Departure {
    fn cmp(&self, other: &Self) -> Ordering {
        self.time
            .total_cmp(&other.time)
            .then(self.server.cmp(&other.server))
    }
}

/// Control events; at equal times they run in declaration order.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
enum Action {
    MinuteTick,
    Release(u32),
    Decide(usize),
    Boundary(usize),
    BootDone(u32),
    Horizon,
}

#[derive(Debug, Clone, Copy)]
struct Control {
    time: f64,
    action: Action,
    seq: u64,
}

impl PartialEq for Control {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == Ordering::Equal
    }
}
impl Eq for Control {}
impl PartialOrd for Control {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}
impl Ord for Control {
    fn cmp(&self, other: &Self) -> Ordering {
        self.time
            .total_cmp(&other.time)
            .then(self.action.cmp(&other.action))
            .then(self.seq.cmp(&other.seq))
    }
}

/// Per-epoch bookkeeping that is not part of the traffic statistics.
#[derive(Debug, Clone, Copy, Default)]
struct EpochBook {
    n: u32,
    n_plus: u32,
    n_minus: u32,
    forecast: Option<f64>,
}

struct Engine<'a> {
    config: &'a SimConfig,
    epoch_len: f64,
    horizon: f64,
    slots: u32,
    mu: f64,
    servers: Vec<ServerState>,
    running: Vec<u32>,
    departures: BinaryHeap<Reverse<Departure>>,
    controls: BinaryHeap<Reverse<Control>>,
    seq: u64,

    // time integrals since the last minute tick (utilization) and overall
    last_t: f64,
    busy_running: u64,
    area_busy: f64,
    area_capacity: f64,
    area_fleet: f64,
    /// Servers acquired and not yet terminated.
    alive: u32,

    epoch: usize,
    epochs: usize,
    acc: EpochAccumulator,
    books: Vec<EpochBook>,
    finished: Vec<crate::workload::EpochStats>,
    pending_add: u32,

    history: Vec<f64>,
    ets: Option<EtsModel>,

    window: UtilizationWindow,

    sojourn: LogHistogram,
    sojourn_n: u64,
    sojourn_mean: f64,
    sojourn_m2: f64,
}

impl<'a> Engine<'a> {
    fn schedule(&mut self, time: f64, action: Action) {
        self.seq += 1;
        self.controls.push(Reverse(Control {
            time,
            action,
            seq: self.seq,
        }));
    }

    fn advance(&mut self, t: f64) {
        let t = t.min(self.horizon);
        let dt = t - self.last_t;
        if dt > 0.0 {
            self.area_busy += self.busy_running as f64 * dt;
            self.area_capacity += (self.running.len() as u64 * self.slots as u64) as f64 * dt;
            self.area_fleet += self.alive as f64 * dt;
            self.last_t = t;
        }
    }

    fn rebuild_running(&mut self) {
        self.running = self
            .servers
            .iter()
            .filter(|s| s.phase == Phase::Running)
            .map(|s| s.id)
            .collect();
        self.busy_running = self
            .running
            .iter()
            .map(|&id| self.servers[id as usize].busy as u64)
            .sum();
    }

    fn fleet_size(&self) -> u32 {
        self.servers.iter().filter(|s| s.in_fleet()).count() as u32
    }

    fn acquire(&mut self, t: f64, booted: bool) {
        let id = self.servers.len() as u32;
        self.alive += 1;
        let ready = if booted {
            t
        } else {
            t + self.config.billing.boot_hours * 3600.0
        };
        self.servers.push(ServerState {
            id,
            phase: if booted {
                Phase::Running
            } else {
                Phase::Booting
            },
            acquired_at: t,
            boot_complete_at: ready,
            terminated_at: None,
            busy: 0,
            terminate_when_idle: false,
        });
        if booted {
            self.rebuild_running();
        } else {
            self.schedule(ready, Action::BootDone(id));
        }
    }

    /// Stops admissions on the least-busy server (largest id on ties) and
    /// schedules its release at `release_at`.
    fn release_one(&mut self, release_at: f64) {
        let Some(id) = self
            .servers
            .iter()
            .filter(|s| s.in_fleet())
            .min_by_key(|s| (s.busy, Reverse(s.id)))
            .map(|s| s.id)
        else {
            return;
        };
        self.servers[id as usize].phase = Phase::Terminating;
        self.rebuild_running();
        self.schedule(release_at, Action::Release(id));
    }

    fn terminate(&mut self, id: u32, t: f64) {
        self.alive -= 1;
        let s = &mut self.servers[id as usize];
        s.phase = Phase::Terminated;
        s.terminated_at = Some(t);
    }

    fn arrival(&mut self, t: f64, service: f64) {
        let mut best: Option<(u32, u32)> = None;
        for &id in &self.running {
            let busy = self.servers[id as usize].busy;
            if busy < self.slots && best.is_none_or(|(_, b)| busy < b) {
                best = Some((id, busy));
                if busy == 0 {
                    break;
                }
            }
        }
        match best {
            Some((id, _)) => {
                self.servers[id as usize].busy += 1;
                self.busy_running += 1;
                self.departures.push(Reverse(Departure {
                    time: t + service,
                    server: id,
                    service,
                }));
                self.acc.record_arrival(t, true);
            }
            None => self.acc.record_arrival(t, false),
        }
    }

    fn departure(&mut self, d: Departure, in_horizon: bool) {
        let s = &mut self.servers[d.server as usize];
        s.busy -= 1;
        let idle = s.busy == 0;
        match s.phase {
            Phase::Running => self.busy_running -= 1,
            Phase::Terminating if idle && s.terminate_when_idle && in_horizon => {
                self.terminate(d.server, d.time)
            }
            _ => {}
        }
        if in_horizon {
            self.acc.record_completion(d.service);
        }
        self.sojourn.record(d.service);
        self.sojourn_n += 1;
        let delta = d.service - self.sojourn_mean;
        self.sojourn_mean += delta / self.sojourn_n as f64;
        self.sojourn_m2 += delta * (d.service - self.sojourn_mean);
    }

    fn queue_params(&self, lambda: f64, ca2: f64) -> QueueParams {
        let service = &self.config.service;
        QueueParams {
            lambda: lambda.max(0.0),
            mu: self.mu,
            ca2,
            sigma_s: service.std_dev() * self.slots as f64,
            service_model: service.analytic_model(),
            transient: TransientBlocking::Hayward,
            slots_per_server: self.slots,
        }
    }

    /// Forecast of the next epoch's mean rate from completed epochs plus the
    /// observed part of the current one.
    fn forecast(&self, partial: f64) -> f64 {
        if let Some(model) = &self.ets {
            let mut m = model.clone();
            if m.update(partial).is_ok() {
                let f = m.forecast(1);
                if f.is_finite() {
                    return f.max(0.0);
                }
            }
        }
        partial
    }

    fn absorb_epoch_mean(&mut self, mean: f64) {
        self.history.push(mean);
        let season = self.config.season;
        match &mut self.ets {
            Some(m) => {
                if m.update(mean).is_err() {
                    self.ets = None;
                }
            }
            None if self.history.len() >= 2 * season => {
                self.ets = fit_ets(&self.history, season).ok()
            }
            None => {}
        }
    }

    fn decide(&mut self, t: f64, target_epoch: usize) -> Result<()> {
        let observed = self.acc.stats_at(t);
        let forecast = self.forecast(observed.mean_lambda);
        let params = self.queue_params(forecast, observed.ca2_or_default());
        let n_current = self.fleet_size();
        let decision = match self.config.policy {
            PolicyKind::Optimal => optimal_decide(&params, &self.config.billing, n_current)?,
            PolicyKind::Qed => qed_decide(&params, &self.config.billing, n_current)?,
            PolicyKind::Grassmann => {
                let var_lambda = match self.config.variance_source {
                    VarianceSource::CurrentEpoch => observed.lambda_variance,
                    VarianceSource::TargetEpoch => self.target_epoch_variance(target_epoch),
                };
                grassmann_decide(
                    &params,
                    &self.config.billing,
                    var_lambda / (self.mu * self.mu),
                    n_current,
                )?
            }
            PolicyKind::AlwaysOn(_) | PolicyKind::Reactive(_) => return Ok(()),
        };
        let boundary = target_epoch as f64 * self.epoch_len;
        for _ in 0..decision.n_minus {
            self.release_one(boundary);
        }
        self.pending_add = decision.n_plus;
        let book = &mut self.books[target_epoch];
        book.n_plus = decision.n_plus;
        book.n_minus = decision.n_minus;
        book.forecast = Some(forecast);
        Ok(())
    }

    fn target_epoch_variance(&self, epoch: usize) -> f64 {
        let per_epoch = (self.epoch_len / 60.0).round() as usize;
        let from = self.config.warmup_minutes + epoch * per_epoch;
        let to = (from + per_epoch).min(self.config.trace.duration());
        let rates: Vec<f64> = self.config.trace.counts[from..to]
            .iter()
            .map(|&c| c as f64 / 60.0)
            .collect();
        if rates.len() < 2 {
            return 0.0;
        }
        let mean = rates.iter().sum::<f64>() / rates.len() as f64;
        rates.iter().map(|r| (r - mean).powi(2)).sum::<f64>() / (rates.len() - 1) as f64
    }

    fn minute_tick(&mut self, t: f64, reactive: &ReactiveConfig) {
        if self.area_capacity > 0.0 {
            let u = self.area_busy / self.area_capacity;
            self.window.push(u, reactive.window_minutes);
        }
        self.area_busy = 0.0;
        self.area_capacity = 0.0;
        let n_current = self.fleet_size();
        let d: PolicyDecision = reactive_step(&mut self.window, n_current, reactive);
        let epoch = self.epoch;
        if d.n_plus > 0 {
            self.books[epoch].n_plus += d.n_plus;
            for _ in 0..d.n_plus {
                self.acquire(t, false);
            }
        }
        if d.n_minus > 0 {
            self.books[epoch].n_minus += d.n_minus;
            let at = t + self.config.billing.teardown_hours * 3600.0;
            for _ in 0..d.n_minus {
                self.release_one(at);
            }
        }
    }

    fn epoch_length(&self, e: usize) -> f64 {
        self.epoch_len.min(self.horizon - e as f64 * self.epoch_len)
    }

    fn close_epoch(&mut self) {
        let stats = self.acc.finish();
        self.finished.push(stats);
        self.absorb_epoch_mean(stats.mean_lambda);
    }

    fn boundary(&mut self, t: f64, e: usize) {
        self.close_epoch();
        for _ in 0..std::mem::take(&mut self.pending_add) {
            self.acquire(t, false);
        }
        self.epoch = e;
        self.acc = EpochAccumulator::new(t, self.epoch_length(e));
        self.books[e].n = self.fleet_size();
    }

    fn control(&mut self, c: Control) -> Result<bool> {
        let t = c.time;
        match c.action {
            Action::MinuteTick => {
                if let PolicyKind::Reactive(r) = self.config.policy {
                    self.minute_tick(t, &r);
                }
            }
            Action::Release(id) => {
                let s = &mut self.servers[id as usize];
                if s.phase == Phase::Terminating {
                    if s.busy == 0 {
                        self.terminate(id, t);
                    } else {
                        s.terminate_when_idle = true;
                    }
                }
            }
            Action::Decide(target) => self.decide(t, target)?,
            Action::Boundary(e) => self.boundary(t, e),
            Action::BootDone(id) => {
                let s = &mut self.servers[id as usize];
                if s.phase == Phase::Booting {
                    s.phase = Phase::Running;
                    self.rebuild_running();
                }
            }
            Action::Horizon => {
                self.close_epoch();
                return Ok(false);
            }
        }
        Ok(true)
    }
}

fn initial_fleet(config: &SimConfig, engine: &Engine) -> Result<u32> {
    if let Some(n) = config.initial_servers {
        return Ok(n.min(config.billing.max_servers));
    }
    let n = match config.policy {
        PolicyKind::AlwaysOn(n) => return Ok(n),
        _ => {
            let first = config
                .trace
                .counts
                .get(config.warmup_minutes)
                .copied()
                .unwrap_or(0) as f64
                / 60.0;
            let params = engine.queue_params(first, config.arrival_ca2);
            qed_decide(&params, &config.billing, 0)?.n_next
        }
    };
    Ok(match config.policy {
        PolicyKind::Reactive(r) => n.clamp(r.min_servers, r.max_servers),
        _ => n,
    })
}

/// Replays the trace against a simulated fleet under the configured policy.
pub fn run_simulation(config: &SimConfig) -> Result<SimulationReport> {
    config.validate()?;
    let epoch_len = config.epoch_seconds();
    let minutes = config.horizon_minutes();
    let horizon = minutes as f64 * 60.0;
    let epochs = (horizon / epoch_len).ceil() as usize;
    if epochs == 0 {
        return Ok(SimulationReport::empty(config.policy.name(), config.seed));
    }
    let slots = config.mode.slots();
    let sampler: ServiceSampler = config
        .service
        .with_mean(config.service.mean * slots as f64)
        .sampler()?;
    let mut arrival_rng = ChaCha8Rng::seed_from_u64(config.seed);
    arrival_rng.set_stream(0);
    let mut service_rng = ChaCha8Rng::seed_from_u64(config.seed);
    service_rng.set_stream(1);
    let counts = &config.trace.counts[config.warmup_minutes..];
    let mut arrivals = ArrivalStream::new(counts, config.arrival_ca2, arrival_rng)?.peekable();

    let per_epoch = (epoch_len / 60.0).round() as usize;
    let warmup = crate::workload::WorkloadTrace::new(
        config.trace.counts[..config.warmup_minutes].to_vec(),
        config.trace.origin,
    );
    let history = warmup.block_means(per_epoch);

    let mut engine = Engine {
        config,
        epoch_len,
        horizon,
        slots,
        mu: config.mu(),
        servers: Vec::new(),
        running: Vec::new(),
        departures: BinaryHeap::new(),
        controls: BinaryHeap::new(),
        seq: 0,
        last_t: 0.0,
        busy_running: 0,
        area_busy: 0.0,
        area_capacity: 0.0,
        area_fleet: 0.0,
        alive: 0,
        epoch: 0,
        epochs,
        acc: EpochAccumulator::new(0.0, epoch_len.min(horizon)),
        books: vec![EpochBook::default(); epochs],
        finished: Vec::with_capacity(epochs),
        pending_add: 0,
        ets: if history.len() >= 2 * config.season {
            fit_ets(&history, config.season).ok()
        } else {
            None
        },
        history,
        window: UtilizationWindow::new(),
        sojourn: LogHistogram::new(),
        sojourn_n: 0,
        sojourn_mean: 0.0,
        sojourn_m2: 0.0,
    };

    let n0 = initial_fleet(config, &engine)?;
    for _ in 0..n0 {
        engine.acquire(0.0, true);
    }
    engine.books[0].n = n0;
    if config.policy.is_predictive() {
        let teardown = config.billing.teardown_hours * 3600.0;
        for e in 1..engine.epochs {
            engine.schedule(e as f64 * epoch_len - teardown, Action::Decide(e));
        }
    }
    for e in 1..engine.epochs {
        engine.schedule(e as f64 * epoch_len, Action::Boundary(e));
    }
    if matches!(config.policy, PolicyKind::Reactive(_)) {
        for m in 1..minutes {
            engine.schedule(m as f64 * 60.0, Action::MinuteTick);
        }
    }
    engine.schedule(horizon, Action::Horizon);

    loop {
        let t_dep = engine.departures.peek().map(|d| d.0.time);
        let t_ctl = engine.controls.peek().map(|c| c.0.time);
        let t_arr = arrivals.peek().copied();
        // departures, then control actions, then arrivals at equal times
        if let Some(td) = t_dep {
            if t_ctl.is_none_or(|tc| td <= tc) && t_arr.is_none_or(|ta| td <= ta) {
                let Reverse(d) = engine.departures.pop().unwrap();
                engine.advance(d.time);
                engine.departure(d, true);
                continue;
            }
        }
        if let Some(tc) = t_ctl {
            if t_arr.is_none_or(|ta| tc <= ta) {
                let Reverse(c) = engine.controls.pop().unwrap();
                engine.advance(tc);
                if !engine.control(c)? {
                    break;
                }
                continue;
            }
        }
        let Some(ta) = arrivals.next() else { break };
        let service = sampler.sample(&mut service_rng);
        engine.advance(ta);
        engine.arrival(ta, service);
    }
    // jobs still in service at the horizon complete outside the billed window
    while let Some(Reverse(d)) = engine.departures.pop() {
        engine.departure(d, false);
    }

    Ok(build_report(&engine))
}

fn build_report(engine: &Engine) -> SimulationReport {
    let config = engine.config;
    let billing = &config.billing;
    let lifecycles: Vec<ServerLifecycle> =
        engine.servers.iter().map(ServerState::lifecycle).collect();
    let settlement = billing_settle(&lifecycles, engine.horizon, billing.cost_per_server_hour);
    let mut hours = vec![0u64; engine.epochs];
    for l in &lifecycles {
        for start in l.hour_starts(engine.horizon) {
            let e = ((start / engine.epoch_len).floor() as usize).min(engine.epochs - 1);
            hours[e] += 1;
        }
    }

    let mut agg = Aggregates::default();
    let mut epochs = Vec::with_capacity(engine.epochs);
    for (e, (stats, book)) in engine.finished.iter().zip(&engine.books).enumerate() {
        let revenue = billing.charge_per_job * stats.accepted as f64;
        let rent = billing.cost_per_server_hour * hours[e] as f64;
        let penalty = billing.penalty_per_lost_job.unwrap_or(0.0) * stats.blocked as f64;
        let transition = billing.acquire_cost.unwrap_or(0.0) * book.n_plus as f64
            + billing.release_cost.unwrap_or(0.0) * book.n_minus as f64;
        let profit = round_cents(revenue - rent - penalty - transition);
        agg.revenue_cents += revenue;
        agg.penalty_cents += penalty;
        agg.transition_cents += transition;
        agg.total_profit_cents += profit;
        agg.jobs_accepted += stats.accepted;
        agg.jobs_lost += stats.blocked;
        epochs.push(EpochRecord {
            epoch: e,
            n: book.n,
            n_plus: book.n_plus,
            n_minus: book.n_minus,
            forecast_lambda: book.forecast,
            actual_lambda: stats.mean_lambda,
            accepted: stats.accepted,
            blocked: stats.blocked,
            server_hours: hours[e],
            profit,
        });
    }
    agg.total_profit_cents = round_cents(agg.total_profit_cents);
    agg.revenue_cents = round_cents(agg.revenue_cents);
    agg.penalty_cents = round_cents(agg.penalty_cents);
    agg.transition_cents = round_cents(agg.transition_cents);
    agg.server_cost_cents = round_cents(settlement.cost);
    agg.server_hours = settlement.server_hours;
    agg.jobs_arrived = agg.jobs_accepted + agg.jobs_lost;
    if agg.jobs_arrived > 0 {
        agg.blocking_fraction = agg.jobs_lost as f64 / agg.jobs_arrived as f64;
    }
    if engine.sojourn_n > 0 {
        agg.mean_sojourn_time = engine.sojourn_mean;
        if engine.sojourn_n > 1 && engine.sojourn_mean > 0.0 {
            let var = engine.sojourn_m2 / (engine.sojourn_n - 1) as f64;
            agg.sojourn_scv = var / (engine.sojourn_mean * engine.sojourn_mean);
        }
    }
    agg.mean_servers = engine.area_fleet / engine.horizon;

    SimulationReport {
        policy: config.policy.name().to_string(),
        seed: config.seed,
        epochs,
        aggregates: agg,
        sojourn_quantiles: SOJOURN_LEVELS
            .iter()
            .map(|&quantile| QuantilePoint {
                quantile,
                value: engine.sojourn.quantile(quantile),
            })
            .collect(),
        manifest: None,
    }
}
