use std::fs;
use std::io::{self, Write};
use std::path::Path;

use anyhow::{bail, Context, Result};
use profitscale::forecast::{backtest, fit_ets, forecast_next, relative_error};
use profitscale::policies::sweep::{linspace, sweep, SweepAxis};
use profitscale::policies::{
    always_on_decide, exhaustive_decide, grassmann_decide, hedge, optimal_decide, qed_decide,
    PolicyDecision,
};
use profitscale::queueing::{blocking_probability, QueueParams, ServiceModel, TransientBlocking};
use profitscale::simulator::{report_to_string, run_simulation, ReportFormat, SimulationReport};
use profitscale::workload::{bundled_trace, parse_counts_csv};
use profitscale::BillingModel;
use serde::Serialize;
use serde_json::json;

use crate::args::{
    BlockingArgs, Cli, DecideArgs, DecidePolicy, EconomicsArgs, ForecastArgs, QueueArgs,
    ServiceArg, SimulateArgs, SweepArgs,
};
use crate::config::{Settings, KEYS};
use crate::manifest::{sha256_hex, RunManifest};
use crate::UsageError;

fn usage(msg: impl Into<String>) -> anyhow::Error {
    UsageError(msg.into()).into()
}

fn print_json<T: Serialize>(out: &mut dyn Write, value: &T) -> Result<()> {
    serde_json::to_writer_pretty(&mut *out, value)?;
    writeln!(out)?;
    Ok(())
}

fn queue_params(lambda: f64, mu: f64, q: &QueueArgs) -> Result<QueueParams> {
    let service_model = match q.service {
        ServiceArg::Exp => ServiceModel::Exponential,
        ServiceArg::Det => ServiceModel::Deterministic,
        ServiceArg::Normal => ServiceModel::GeneralNormalApprox,
    };
    let params = QueueParams {
        lambda,
        mu,
        ca2: q.ca2,
        sigma_s: q.sigma_s.unwrap_or(1.0 / mu),
        service_model,
        transient: TransientBlocking::Hayward,
        slots_per_server: q.slots,
    };
    params.validate()?;
    Ok(params)
}

fn billing(e: &EconomicsArgs) -> Result<BillingModel> {
    let b = BillingModel {
        charge_per_job: e.charge,
        cost_per_server_hour: e.cost,
        epoch_hours: e.epoch_hours,
        boot_hours: e.boot_minutes / 60.0,
        teardown_hours: e.teardown_minutes / 60.0,
        penalty_per_lost_job: e.penalty,
        acquire_cost: e.acquire_cost,
        release_cost: e.release_cost,
        max_servers: e.max_servers,
    };
    b.validate()?;
    Ok(b)
}

fn service_name(s: ServiceArg) -> &'static str {
    match s {
        ServiceArg::Exp => "exp",
        ServiceArg::Det => "det",
        ServiceArg::Normal => "normal",
    }
}

pub fn blocking(cli: &Cli, out: &mut dyn Write, args: &BlockingArgs) -> Result<()> {
    if !(args.rho >= 0.0 && args.rho.is_finite()) {
        return Err(usage("--rho must be a finite number >= 0"));
    }
    let params =
        queue_params(args.rho * args.mu, args.mu, &args.queue).map_err(|e| usage(e.to_string()))?;
    let pk = params.peakedness();
    let b = blocking_probability(&params, args.n)?;
    if cli.json {
        print_json(
            out,
            &json!({
                "n": args.n,
                "rho": args.rho,
                "ca2": args.queue.ca2,
                "service": service_name(args.queue.service),
                "z": pk.z,
                "eta": pk.eta,
                "blocking": b,
            }),
        )
    } else {
        writeln!(out, "blocking  {b:.8}")?;
        writeln!(out, "z         {:.6}", pk.z)?;
        writeln!(out, "eta       {:.6}", pk.eta)?;
        Ok(())
    }
}

pub fn decide(cli: &Cli, out: &mut dyn Write, args: &DecideArgs) -> Result<()> {
    if !(args.lambda >= 0.0 && args.lambda.is_finite()) {
        return Err(usage("--lambda must be a finite number >= 0"));
    }
    let mut billing = billing(&args.economics).map_err(|e| usage(e.to_string()))?;
    if let Some(max) = args.scan_max {
        if args.policy != DecidePolicy::Optimal {
            return Err(usage("--scan-max applies to --policy optimal only"));
        }
        billing.max_servers = max;
    }
    let params =
        queue_params(args.lambda, args.mu, &args.queue).map_err(|e| usage(e.to_string()))?;
    let n = args.n_current;
    let (name, d): (&str, PolicyDecision) = match args.policy {
        DecidePolicy::Optimal => ("optimal", optimal_decide(&params, &billing, n)?),
        DecidePolicy::Qed => ("qed", qed_decide(&params, &billing, n)?),
        DecidePolicy::Grassmann => (
            "grassmann",
            grassmann_decide(&params, &billing, args.var_rho, n)?,
        ),
        DecidePolicy::AlwaysOn => (
            "always_on",
            PolicyDecision::scored(
                &params,
                &billing,
                n,
                always_on_decide(args.servers, n).n_next,
            )?,
        ),
    };
    let h = hedge(&billing, args.mu)?;
    let exhaustive = match args.scan_max {
        Some(max) => Some(exhaustive_decide(&params, &billing, n, max)?),
        None => None,
    };
    if cli.json {
        let mut v = json!({
            "policy": name,
            "n_current": n,
            "n_next": d.n_next,
            "n_plus": d.n_plus,
            "n_minus": d.n_minus,
            "predicted_profit": d.predicted_profit,
            "predicted_blocking": d.predicted_blocking,
            "alpha": h.map(|h| h.alpha),
            "z_alpha": h.map(|h| h.z_alpha),
        });
        if let Some(e) = exhaustive {
            v["exhaustive_n_next"] = json!(e.n_next);
            v["agrees"] = json!(e.n_next == d.n_next);
        }
        return print_json(out, &v);
    }
    writeln!(out, "policy              {name}")?;
    writeln!(out, "n_current           {n}")?;
    writeln!(out, "n_next              {}", d.n_next)?;
    writeln!(out, "n_plus              {}", d.n_plus)?;
    writeln!(out, "n_minus             {}", d.n_minus)?;
    writeln!(out, "predicted_profit    {:.4} cents/h", d.predicted_profit)?;
    writeln!(out, "predicted_blocking  {:.6}", d.predicted_blocking)?;
    match h {
        Some(h) => {
            writeln!(out, "alpha               {:.5}", h.alpha)?;
            writeln!(out, "z_alpha             {:.5}", h.z_alpha)?;
        }
        None => writeln!(out, "alpha               >= 1 (no server pays for itself)")?,
    }
    if let Some(e) = exhaustive {
        let verdict = if e.n_next == d.n_next {
            "agrees"
        } else {
            "DISAGREES"
        };
        writeln!(out, "exhaustive_n_next   {} ({verdict})", e.n_next)?;
    }
    Ok(())
}

pub fn sweep_cmd(cli: &Cli, out: &mut dyn Write, args: &SweepArgs) -> Result<()> {
    let axis: SweepAxis = args
        .axis
        .parse()
        .map_err(|e: profitscale::Error| usage(e.to_string()))?;
    let values = linspace(args.from, args.to, args.steps).map_err(|e| usage(e.to_string()))?;
    let params =
        queue_params(args.lambda, args.mu, &args.queue).map_err(|e| usage(e.to_string()))?;
    let billing = billing(&args.economics).map_err(|e| usage(e.to_string()))?;
    let points = sweep(&params, &billing, args.n_current, axis, &values)?;
    if cli.json {
        return print_json(out, &json!({ "axis": axis, "points": points }));
    }
    writeln!(
        out,
        "value,margin_per_job,n_current,n_next,n_plus,n_minus,predicted_profit,predicted_blocking"
    )?;
    for p in points {
        writeln!(
            out,
            "{},{},{},{},{},{},{:.4},{}",
            p.value,
            p.margin_per_job,
            p.n_current,
            p.n_next,
            p.n_plus,
            p.n_minus,
            p.predicted_profit,
            p.predicted_blocking
        )?;
    }
    Ok(())
}

/// Writes via a temporary file and a rename so readers never see a
/// partial file.
fn write_atomic(path: &Path, contents: &[u8]) -> Result<()> {
    let tmp = path.with_extension(format!(
        "{}.tmp",
        path.extension().and_then(|e| e.to_str()).unwrap_or("")
    ));
    fs::write(&tmp, contents).with_context(|| format!("writing {}", tmp.display()))?;
    fs::rename(&tmp, path).with_context(|| format!("renaming to {}", path.display()))?;
    Ok(())
}

#[derive(Debug, Serialize)]
struct RunSummary {
    policy: String,
    total_profit_cents: f64,
    server_hours: u64,
    jobs_arrived: u64,
    jobs_lost: u64,
    blocking_fraction: f64,
    json_sha256: String,
    csv_sha256: String,
}

fn run_one(
    settings: &Settings,
    trace: &profitscale::workload::WorkloadTrace,
    policy: &str,
    out_dir: &Path,
) -> Result<RunSummary> {
    let config = settings.sim_config(trace.clone(), policy)?;
    let manifest = RunManifest::new(settings, policy)?;
    let mut report: SimulationReport =
        run_simulation(&config).with_context(|| format!("simulating {policy}"))?;
    report.manifest = Some(serde_json::to_value(&manifest)?);
    let json = report_to_string(&report, ReportFormat::Json);
    let csv = report_to_string(&report, ReportFormat::Csv);
    let mut manifest_text = serde_json::to_string_pretty(&manifest)?;
    manifest_text.push('\n');
    write_atomic(&out_dir.join(format!("{policy}.json")), json.as_bytes())?;
    write_atomic(&out_dir.join(format!("{policy}.csv")), csv.as_bytes())?;
    write_atomic(
        &out_dir.join(format!("{policy}.manifest.json")),
        manifest_text.as_bytes(),
    )?;
    let a = &report.aggregates;
    Ok(RunSummary {
        policy: policy.to_string(),
        total_profit_cents: a.total_profit_cents,
        server_hours: a.server_hours,
        jobs_arrived: a.jobs_arrived,
        jobs_lost: a.jobs_lost,
        blocking_fraction: a.blocking_fraction,
        json_sha256: sha256_hex(json.as_bytes()),
        csv_sha256: sha256_hex(csv.as_bytes()),
    })
}

pub fn simulate(cli: &Cli, out: &mut dyn Write, args: &SimulateArgs) -> Result<()> {
    if args.list_keys {
        for (k, v, help) in KEYS {
            writeln!(out, "{k:26} {v:14} {help}")?;
        }
        return Ok(());
    }
    let mut settings = match (&args.manifest, &args.config) {
        (Some(m), _) => RunManifest::load(m)?.settings()?,
        (None, Some(c)) => Settings::from_file(c)?,
        (None, None) => Settings::default(),
    };
    if let Some(path) = &args.trace {
        settings.set("trace.source", "counts")?;
        settings.set("trace.path", &path.display().to_string())?;
    }
    if let Some(p) = &args.policy {
        settings.set("policy", p)?;
    }
    for kv in &args.overrides {
        settings.apply_override(kv)?;
    }
    if let Some(seed) = cli.seed {
        settings.set("seed", &seed.to_string())?;
    }
    let policies = settings.policy_names()?;
    let trace = settings.trace()?;
    for w in &trace.warnings {
        eprintln!("warning: {w}");
    }
    fs::create_dir_all(&cli.out_dir)
        .with_context(|| format!("creating {}", cli.out_dir.display()))?;
    if args.export_trace {
        write_atomic(&cli.out_dir.join("trace.csv"), trace.to_csv().as_bytes())?;
    }

    let results: Vec<Result<RunSummary>> = std::thread::scope(|s| {
        let handles: Vec<_> = policies
            .iter()
            .map(|&p| {
                let (settings, trace, out) = (&settings, &trace, cli.out_dir.as_path());
                s.spawn(move || run_one(settings, trace, p, out))
            })
            .collect();
        handles
            .into_iter()
            .map(|h| h.join().expect("simulation thread panicked"))
            .collect()
    });
    let mut summaries = results.into_iter().collect::<Result<Vec<_>>>()?;

    if summaries.len() > 1 {
        summaries.sort_by(|a, b| {
            b.total_profit_cents
                .total_cmp(&a.total_profit_cents)
                .then(a.policy.cmp(&b.policy))
        });
        let mut table = String::from(
            "policy,total_profit_cents,server_hours,jobs_arrived,jobs_lost,blocking_fraction\n",
        );
        for s in &summaries {
            table.push_str(&format!(
                "{},{:.4},{},{},{},{}\n",
                s.policy,
                s.total_profit_cents,
                s.server_hours,
                s.jobs_arrived,
                s.jobs_lost,
                s.blocking_fraction
            ));
        }
        write_atomic(&cli.out_dir.join("comparison.csv"), table.as_bytes())?;
    }
    if cli.json {
        return print_json(out, &summaries);
    }
    for s in &summaries {
        writeln!(
            out,
            "{:10} profit {:>12.4} cents  server-hours {:>5}  arrived {:>10}  lost {:>9} ({:.4})",
            s.policy,
            s.total_profit_cents,
            s.server_hours,
            s.jobs_arrived,
            s.jobs_lost,
            s.blocking_fraction
        )?;
    }
    for s in &summaries {
        writeln!(
            out,
            "{:10} json sha256 {}  csv sha256 {}",
            s.policy, s.json_sha256, s.csv_sha256
        )?;
    }
    writeln!(out, "reports written to {}", cli.out_dir.display())?;
    Ok(())
}

fn read_series(path: &Path) -> Result<Vec<f64>> {
    let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    text.lines()
        .enumerate()
        .filter(|(_, l)| !l.trim().is_empty() && !l.trim().starts_with('#'))
        .map(|(i, l)| {
            l.trim()
                .parse::<f64>()
                .with_context(|| format!("{} line {}: not a number: {l:?}", path.display(), i + 1))
        })
        .collect()
}

pub fn forecast(cli: &Cli, out: &mut dyn Write, args: &ForecastArgs) -> Result<()> {
    let series = match (&args.series, &args.counts, args.bundled) {
        (Some(p), _, _) => read_series(p)?,
        (None, Some(p), _) => {
            let file = fs::File::open(p).with_context(|| format!("opening {}", p.display()))?;
            parse_counts_csv(io::BufReader::new(file))?.block_means(args.epoch_minutes)
        }
        (None, None, true) => bundled_trace().block_means(args.epoch_minutes),
        (None, None, false) => bail!("one of --series, --counts or --bundled is required"),
    };
    let holdout = args.holdout.unwrap_or(args.season);
    let model = fit_ets(&series, args.season)?;
    let ahead = forecast_next(&model, args.horizon);
    let stats = if holdout > 0 {
        let (_, predictions) = backtest(&series, args.season, holdout)?;
        Some(relative_error(
            &series[series.len() - holdout..],
            &predictions,
            args.bucket,
        )?)
    } else {
        None
    };
    if cli.json {
        return print_json(
            out,
            &json!({
                "alpha": model.alpha,
                "beta": model.beta,
                "gamma": model.gamma,
                "season": args.season,
                "points": series.len(),
                "forecast": ahead,
                "backtest": stats.as_ref().map(|s| json!({
                    "holdout": holdout,
                    "mean": s.mean,
                    "std_dev": s.std_dev,
                    "mean_abs": s.mean_abs,
                    "histogram": s.histogram,
                })),
            }),
        );
    }
    writeln!(
        out,
        "model     alpha={:.4} beta={:.4} gamma={:.4} season={} points={}",
        model.alpha,
        model.beta,
        model.gamma,
        args.season,
        series.len()
    )?;
    for (h, f) in ahead.iter().enumerate() {
        writeln!(out, "forecast  h={} {:.6}", h + 1, f)?;
    }
    if let Some(s) = stats {
        writeln!(
            out,
            "backtest  holdout={} mean={:+.4} std={:.4} mean_abs={:.4}",
            holdout, s.mean, s.std_dev, s.mean_abs
        )?;
        for b in &s.histogram {
            writeln!(out, "  [{:+.3}, {:+.3})  {}", b.lower, b.upper, b.count)?;
        }
    }
    Ok(())
}
