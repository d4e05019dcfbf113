use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use anyhow::{anyhow, Context, Result};
use basinforge::analysis::{
    analytic_threshold_spin_orbit, cubic_first_order_c0, cubic_threshold_reference,
    empirical_threshold, find_periodic_orbit, first_order_seeds, monodromy, parse_satellites,
    satellite_params_csv, shipped_satellites, threshold_csv, ThresholdEstimate,
};
use basinforge::basin::{
    area_curves, basin_diff_data, checkpoint_load, diff_label_rows, estimate_basins, parse_full_report,
    parse_labels_csv, ramp_sweep as run_sweep, scatter_data, sweep_csv, BasinReport, RampFamily, RunOptions,
    SamplingDomain,
};
use basinforge::classify::{ClassifierConfig, ResonanceLabel};
use basinforge::integrate::{IntegratorConfig, Method};
use basinforge::models::{CubicParams, DampingSchedule, Model, ModelKind, SpinOrbitParams};
use basinforge::Error;

use crate::config::{parse_list, ConfigFile};
use crate::{BasinsArgs, FloquetArgs, ModelArgs, SampleArgs, SolverArgs, SpinParamsArgs, SweepArgs, ThresholdArgs};

/// Invalid command-line or configuration input.
#[derive(Debug)]
pub struct UsageError(pub String);

impl std::fmt::Display for UsageError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(&self.0)
    }
}

impl std::error::Error for UsageError {}

/// Too many unclassified initial conditions.
#[derive(Debug)]
pub struct Alarm(pub String);

impl std::fmt::Display for Alarm {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(&self.0)
    }
}

impl std::error::Error for Alarm {}

fn usage(msg: impl Into<String>) -> anyhow::Error {
    UsageError(msg.into()).into()
}

/// 2 for bad input, 3 for the unclassified alarm, 1 otherwise.
pub fn exit_code(e: &anyhow::Error) -> u8 {
    for cause in e.chain() {
        if cause.is::<UsageError>() {
            return 2;
        }
        if cause.is::<Alarm>() {
            return 3;
        }
        if let Some(Error::InvalidParameter { .. }) = cause.downcast_ref::<Error>() {
            return 2;
        }
    }
    1
}

const MODEL_KEYS: [&str; 7] = ["model", "eps", "ecc", "gamma", "schedule", "delta", "config"];
const SOLVER_KEYS: [&str; 11] = [
    "method",
    "tol",
    "order",
    "max-step",
    "min-step",
    "transient-factor",
    "q-max",
    "confirm-periods",
    "cluster-radius",
    "origin-tol",
    "period-tol",
];
const SAMPLE_KEYS: [&str; 7] = ["domain", "n", "seed", "out", "resume", "workers", "alarm"];

fn check_keys(cfg: &ConfigFile, extra: &[&str]) -> Result<()> {
    let known: Vec<&str> = MODEL_KEYS
        .iter()
        .chain(&SOLVER_KEYS)
        .chain(&SAMPLE_KEYS)
        .chain(extra)
        .copied()
        .collect();
    let unknown = cfg.unknown_keys(&known);
    if !unknown.is_empty() {
        return Err(usage(format!("unknown config keys: {}", unknown.join(", "))));
    }
    Ok(())
}

fn model_kind(name: &str) -> Result<ModelKind> {
    match name {
        "cubic" => Ok(ModelKind::Cubic),
        "spinorbit" | "spin-orbit" => Ok(ModelKind::SpinOrbit),
        other => Err(usage(format!("--model: unknown model `{other}` (cubic | spinorbit)"))),
    }
}

fn build_schedule(cfg: &ConfigFile, m: &ModelArgs, gamma: f64) -> Result<DampingSchedule> {
    let delta = cfg.pick(m.delta, "delta")?;
    let kind = cfg.pick(m.schedule.clone(), "schedule")?;
    let kind = kind.unwrap_or_else(|| if delta.is_some() { "linear".into() } else { "constant".into() });
    let schedule = match kind.as_str() {
        "constant" => {
            if delta.is_some_and(|d| d != 0.0) {
                return Err(usage("--delta needs --schedule linear or exp"));
            }
            DampingSchedule::constant(gamma)
        }
        "linear" => DampingSchedule::linear_ramp(gamma, delta.unwrap_or(0.0)),
        "exp" => DampingSchedule::exp_ramp(gamma, delta.unwrap_or(0.0)),
        other => return Err(usage(format!("--schedule: unknown schedule `{other}`"))),
    };
    Ok(schedule?)
}

/// Model from flags and config; `gamma` falls back to `default_gamma`.
fn build_model(cfg: &ConfigFile, m: &ModelArgs, default_gamma: Option<f64>) -> Result<Model> {
    let kind = model_kind(&cfg.or(m.model.clone(), "model", "cubic".to_string())?)?;
    let gamma = cfg
        .pick(m.gamma, "gamma")?
        .or(default_gamma)
        .ok_or_else(|| usage("missing --gamma"))?;
    let schedule = build_schedule(cfg, m, gamma)?;
    Ok(match kind {
        ModelKind::Cubic => Model::Cubic(CubicParams::new(cfg.or(m.eps, "eps", 0.1)?, schedule)?),
        ModelKind::SpinOrbit => {
            let e = cfg.pick(m.ecc, "ecc")?.ok_or_else(|| usage("missing --ecc for the spin-orbit model"))?;
            let eps = cfg.pick(m.eps, "eps")?.ok_or_else(|| usage("missing --eps"))?;
            Model::SpinOrbit(SpinOrbitParams::new(e, eps, schedule)?)
        }
    })
}

fn build_solver(cfg: &ConfigFile, s: &SolverArgs) -> Result<(IntegratorConfig, ClassifierConfig)> {
    let d = IntegratorConfig::default();
    let method: Method = cfg.or(s.method.clone(), "method", "taylor".to_string())?.parse()?;
    let icfg = IntegratorConfig {
        method,
        tol: cfg.or(s.tol, "tol", d.tol)?,
        series_order: cfg.or(s.order, "order", d.series_order)?,
        max_step: cfg.or(s.max_step, "max-step", d.max_step)?,
        min_step: cfg.or(s.min_step, "min-step", d.min_step)?,
    };
    icfg.validate()?;
    let c = ClassifierConfig::default();
    let ccfg = ClassifierConfig {
        n_transient_factor: cfg.or(s.transient_factor, "transient-factor", c.n_transient_factor)?,
        q_max: cfg.or(s.q_max, "q-max", c.q_max)?,
        origin_energy_tol: cfg.or(s.origin_tol, "origin-tol", c.origin_energy_tol)?,
        period_match_tol: cfg.or(s.period_tol, "period-tol", c.period_match_tol)?,
        variant_cluster_radius: cfg.or(s.cluster_radius, "cluster-radius", c.variant_cluster_radius)?,
        n_confirm_periods: cfg.or(s.confirm_periods, "confirm-periods", c.n_confirm_periods)?,
    };
    ccfg.validate()?;
    Ok((icfg, ccfg))
}

fn parse_domain(text: &str) -> Result<SamplingDomain> {
    let v: Vec<f64> = parse_list(text, "domain bound").map_err(|e| usage(format!("--domain: {e}")))?;
    if v.len() != 4 {
        return Err(usage("--domain needs four values q_lo,q_hi,v_lo,v_hi"));
    }
    Ok(SamplingDomain::new(v[0], v[1], v[2], v[3])?)
}

struct RunConfig {
    model: Model,
    domain: SamplingDomain,
    n: u64,
    seed: u64,
    opts: RunOptions,
    out: PathBuf,
    alarm: f64,
}

fn build_run(cfg: &ConfigFile, m: &ModelArgs, s: &SolverArgs, a: &SampleArgs) -> Result<RunConfig> {
    let model = build_model(cfg, m, None)?;
    let (integrator, classifier) = build_solver(cfg, s)?;
    let domain = match cfg.pick(a.domain.clone(), "domain")? {
        Some(d) => parse_domain(&d)?,
        None => SamplingDomain::for_model(model.kind()),
    };
    let n = cfg.pick(a.n, "n")?.ok_or_else(|| usage("missing --n"))?;
    if n < basinforge::basin::MIN_SAMPLES {
        return Err(usage(format!("--n must be at least {}, got {n}", basinforge::basin::MIN_SAMPLES)));
    }
    let workers = cfg.pick(a.workers, "workers")?;
    if workers == Some(0) {
        return Err(usage("--workers must be at least 1"));
    }
    let out = cfg.or(a.out.clone(), "out", PathBuf::from("."))?;
    let alarm = cfg.or(a.alarm, "alarm", 0.05)?;
    if !(0.0..=1.0).contains(&alarm) {
        return Err(usage(format!("--alarm must lie in [0, 1], got {alarm}")));
    }
    let resume = a.resume || cfg.or(None, "resume", false)?;
    Ok(RunConfig {
        model,
        domain,
        n,
        seed: cfg.or(a.seed, "seed", 0)?,
        opts: RunOptions {
            integrator,
            classifier,
            workers,
            checkpoint: Some(out.join("checkpoint.csv")),
            resume,
        },
        out,
        alarm,
    })
}

fn write_out(path: &Path, text: &str) -> Result<()> {
    fs::write(path, text).with_context(|| format!("writing {}", path.display()))
}

fn emit(out: Option<PathBuf>, text: &str) -> Result<()> {
    match out {
        Some(p) => write_out(&p, text),
        None => {
            std::io::stdout().write_all(text.as_bytes())?;
            Ok(())
        }
    }
}

fn write_report(dir: &Path, suffix: &str, r: &BasinReport) -> Result<()> {
    write_out(&dir.join(format!("basins{suffix}.csv")), &r.to_csv())?;
    write_out(&dir.join(format!("basins_full{suffix}.csv")), &r.to_full_csv())?;
    write_out(&dir.join(format!("labels{suffix}.csv")), &r.labels_csv())
}

fn check_alarm(reports: &[&BasinReport], alarm: f64) -> Result<()> {
    for r in reports {
        let frac = r.unclassified_fraction();
        if frac > alarm {
            return Err(Alarm(format!(
                "{:.1}% of initial conditions unclassified (alarm at {:.1}%) for {}",
                100.0 * frac,
                100.0 * alarm,
                r.schedule
            ))
            .into());
        }
    }
    Ok(())
}

pub fn basins(a: BasinsArgs) -> Result<()> {
    let cfg = ConfigFile::load(a.model.config.as_deref())?;
    check_keys(&cfg, &[])?;
    let run = build_run(&cfg, &a.model, &a.solver, &a.sample)?;
    fs::create_dir_all(&run.out).with_context(|| format!("creating {}", run.out.display()))?;
    let report = estimate_basins(&run.model, &run.domain, run.n, run.seed, &run.opts)?;
    write_report(&run.out, "", &report)?;
    print!("{}", report.to_csv());
    log::info!("{} initial conditions in {:.1} s", report.n_total, report.wall_time_s);
    check_alarm(&[&report], run.alarm)
}

pub fn ramp_sweep(a: SweepArgs) -> Result<()> {
    let cfg = ConfigFile::load(a.model.config.as_deref())?;
    check_keys(&cfg, &["deltas", "ramp"])?;
    let run = build_run(&cfg, &a.model, &a.solver, &a.sample)?;
    let deltas: Vec<f64> = match cfg.pick(a.deltas.clone(), "deltas")? {
        Some(d) => parse_list(&d, "delta").map_err(|e| usage(format!("--deltas: {e}")))?,
        None => Vec::new(),
    };
    if deltas.is_empty() {
        return Err(usage("--deltas needs at least one value"));
    }
    let family: RampFamily = cfg.or(a.ramp.clone(), "ramp", "linear".to_string())?.parse()?;
    fs::create_dir_all(&run.out).with_context(|| format!("creating {}", run.out.display()))?;
    let reports = run_sweep(&run.model, &run.domain, run.n, run.seed, family, &deltas, &run.opts)?;
    for (i, r) in reports.iter().enumerate() {
        write_report(&run.out, &format!("_delta_{i}"), r)?;
    }
    let table = sweep_csv(&deltas, &reports);
    write_out(&run.out.join("sweep.csv"), &table)?;
    print!("{table}");
    check_alarm(&reports.iter().collect::<Vec<_>>(), run.alarm)
}

fn parse_ratio(text: &str) -> Result<(i64, u32)> {
    match text.parse::<ResonanceLabel>() {
        Ok(ResonanceLabel::Resonance { p, q, .. }) => Ok((p, q)),
        _ => Err(usage(format!("invalid resonance `{text}` (expected p/q)"))),
    }
}

pub fn threshold(a: ThresholdArgs) -> Result<()> {
    let cfg = ConfigFile::load(a.model.config.as_deref())?;
    check_keys(&cfg, &["resonances", "threshold-method", "bracket"])?;
    let list = cfg.pick(a.resonances.clone(), "resonances")?.unwrap_or_default();
    let ratios: Vec<(i64, u32)> = list
        .split(',')
        .map(str::trim)
        .filter(|s| !s.is_empty())
        .map(parse_ratio)
        .collect::<Result<_>>()?;
    if ratios.is_empty() {
        return Err(usage("--resonances needs at least one resonance"));
    }
    let kind = model_kind(&cfg.or(a.model.model.clone(), "model", "cubic".to_string())?)?;
    let default_method = match kind {
        ModelKind::Cubic => "table",
        ModelKind::SpinOrbit => "analytic",
    };
    let method = cfg.or(a.threshold_method.clone(), "threshold-method", default_method.to_string())?;
    let bracket = match cfg.pick(a.bracket.clone(), "bracket")? {
        Some(b) => {
            let v: Vec<f64> = parse_list(&b, "bracket bound").map_err(|e| usage(format!("--bracket: {e}")))?;
            if v.len() != 2 {
                return Err(usage("--bracket needs two values lo,hi"));
            }
            Some((v[0], v[1]))
        }
        None => None,
    };
    // γ only seeds the model for bisection; the bracket sets the damping
    let model = build_model(&cfg, &a.model, Some(1e-3))?;
    let eps = model.epsilon();

    let mut rows = Vec::new();
    for (p, q) in ratios {
        let analytic = |p, q| -> Result<ThresholdEstimate> {
            Ok(match &model {
                Model::SpinOrbit(sp) => analytic_threshold_spin_orbit(sp.eccentricity(), p, q)?,
                Model::Cubic(_) => cubic_first_order_c0(p, q)?,
            })
        };
        let est = match method.as_str() {
            "analytic" => analytic(p, q)?,
            "table" => match kind {
                ModelKind::Cubic => cubic_threshold_reference(p, q)?,
                ModelKind::SpinOrbit => return Err(usage("no table for the spin-orbit model; use analytic")),
            },
            "bisection" => {
                let (lo, hi) = match bracket {
                    Some(b) => b,
                    None => {
                        let guess = match kind {
                            ModelKind::Cubic => cubic_threshold_reference(p, q)
                                .map(|t| t.gamma_threshold(eps))
                                .or_else(|_| analytic(p, q).map(|t| t.gamma_threshold(eps)))?,
                            ModelKind::SpinOrbit => analytic(p, q)?.gamma_threshold(eps),
                        };
                        if !(guess.is_finite() && guess > 0.0) {
                            return Err(usage(format!("no default bracket for {p}/{q}; pass --bracket")));
                        }
                        (0.3 * guess, 3.0 * guess)
                    }
                };
                empirical_threshold(&model, p, q, (lo, hi), None, &IntegratorConfig::default())?
            }
            other => return Err(usage(format!("--threshold-method: unknown method `{other}`"))),
        };
        rows.push(est);
    }
    emit(a.out, &threshold_csv(&rows, eps))
}

pub fn floquet(a: FloquetArgs) -> Result<()> {
    let cfg = ConfigFile::load(a.model.config.as_deref())?;
    check_keys(&cfg, &["resonance", "gammas"])?;
    let (p, q) = parse_ratio(
        &cfg.pick(a.resonance.clone(), "resonance")?
            .ok_or_else(|| usage("missing --resonance"))?,
    )?;
    let gammas: Vec<f64> = match cfg.pick(a.gammas.clone(), "gammas")? {
        Some(g) => parse_list(&g, "gamma").map_err(|e| usage(format!("--gammas: {e}")))?,
        None => vec![cfg.pick(a.model.gamma, "gamma")?.ok_or_else(|| usage("missing --gammas or --gamma"))?],
    };
    if gammas.is_empty() {
        return Err(usage("--gammas needs at least one value"));
    }
    let base = build_model(&cfg, &a.model, gammas.first().copied())?;
    if base.schedule().delta() != 0.0 {
        return Err(usage("floquet needs a constant damping schedule"));
    }
    let icfg = IntegratorConfig::default();
    let mut text = String::from(
        "gamma,period,q0,v0,det,expected_det,lambda1_re,lambda1_im,lambda2_re,lambda2_im,lyap1,lyap2,attracting\n",
    );
    let mut fit = Vec::new();
    for g in gammas {
        let model = base.with_schedule(base.schedule().with_gamma0(g)?);
        let seeds = first_order_seeds(&model, p, q).unwrap_or_default();
        let mut orbits = Vec::new();
        let mut last_err = None;
        for s in &seeds {
            match find_periodic_orbit(&model, p, q, s, &icfg) {
                Ok(o) => orbits.push((o, monodromy(&model, &o, q, &icfg)?)),
                Err(e) => last_err = Some(e),
            }
        }
        let Some((orbit, mono)) = orbits
            .iter()
            .find(|(_, m)| m.is_attracting())
            .or_else(|| orbits.first())
            .copied()
        else {
            return Err(anyhow!(last_err.unwrap_or(Error::NotFound {
                p,
                q,
                reason: "no first-order seed at this damping".into()
            })))
            .context(format!("gamma = {g}"));
        };
        let expected = (-g * mono.period).exp();
        let [l1, l2] = mono.eigenvalues;
        text.push_str(&format!(
            "{g:?},{:?},{:?},{:?},{:?},{:?},{:?},{:?},{:?},{:?},{:?},{:?},{}\n",
            mono.period,
            orbit.q,
            orbit.v,
            mono.det(),
            expected,
            l1.re,
            l1.im,
            l2.re,
            l2.im,
            mono.lyapunov[0],
            mono.lyapunov[1],
            mono.is_attracting()
        ));
        fit.push((g, mono.lyapunov[0]));
    }
    if fit.len() >= 2 {
        let (slope, r2) = fit_through_origin(&fit);
        log::info!("largest exponent ≈ {slope:.6}·γ, R² = {r2:.6}");
    }
    emit(a.out, &text)
}

/// Least-squares slope of `y = s x` and its coefficient of determination.
pub fn fit_through_origin(pts: &[(f64, f64)]) -> (f64, f64) {
    let sxy: f64 = pts.iter().map(|(x, y)| x * y).sum();
    let sxx: f64 = pts.iter().map(|(x, _)| x * x).sum();
    let slope = sxy / sxx;
    let mean = pts.iter().map(|p| p.1).sum::<f64>() / pts.len() as f64;
    let ss_res: f64 = pts.iter().map(|(x, y)| (y - slope * x).powi(2)).sum();
    let ss_tot: f64 = pts.iter().map(|(_, y)| (y - mean).powi(2)).sum();
    let r2 = if ss_tot > 0.0 { 1.0 - ss_res / ss_tot } else { 1.0 };
    (slope, r2)
}

pub fn spinorbit_params(a: SpinParamsArgs) -> Result<()> {
    let data = match &a.data {
        Some(p) => {
            let text = fs::read_to_string(p).with_context(|| format!("reading {}", p.display()))?;
            parse_satellites(&text).with_context(|| format!("in {}", p.display()))?
        }
        None => shipped_satellites(),
    };
    emit(a.out, &satellite_params_csv(&data)?)
}

pub fn plot_curves(reports: &[PathBuf], out: Option<PathBuf>) -> Result<()> {
    let rows = reports
        .iter()
        .map(|p| {
            let text = fs::read_to_string(p).with_context(|| format!("reading {}", p.display()))?;
            parse_full_report(&text).with_context(|| format!("in {}", p.display()))
        })
        .collect::<Result<Vec<_>>>()?;
    emit(out, &area_curves(&rows))
}

pub fn plot_diff(a: &Path, b: &Path, target: &str, out: Option<PathBuf>) -> Result<()> {
    let target: ResonanceLabel = target
        .parse()
        .map_err(|_| usage(format!("--target: cannot parse `{target}`")))?;
    let read = |p: &Path| -> Result<_> {
        let text = fs::read_to_string(p).with_context(|| format!("reading {}", p.display()))?;
        parse_labels_csv(&text).with_context(|| format!("in {}", p.display()))
    };
    let diff = diff_label_rows(&read(a)?, &read(b)?, &target)?;
    emit(out, &basin_diff_data(&diff))
}

pub fn plot_scatter(
    labels: Option<PathBuf>,
    checkpoint: Option<PathBuf>,
    domain: Option<String>,
    model: Option<String>,
    out: Option<PathBuf>,
) -> Result<()> {
    let rows = if let Some(p) = labels {
        let text = fs::read_to_string(&p).with_context(|| format!("reading {}", p.display()))?;
        let (_, rows) = parse_labels_csv(&text).with_context(|| format!("in {}", p.display()))?;
        rows.into_iter().map(|r| (r.ic, r.label)).collect::<Vec<_>>()
    } else {
        let p = checkpoint.ok_or_else(|| usage("pass --labels or --checkpoint"))?;
        let text = fs::read_to_string(&p).with_context(|| format!("reading {}", p.display()))?;
        if text.trim().is_empty() {
            return emit(out, "");
        }
        let ck = checkpoint_load(&p)?;
        let domain = match domain {
            Some(d) => parse_domain(&d)?,
            None => SamplingDomain::for_model(model_kind(model.as_deref().unwrap_or("cubic"))?),
        };
        let mut records = ck.records;
        records.sort_by_key(|r| r.index);
        records
            .into_iter()
            .map(|r| (domain.sample(ck.header.seed, r.index), r.label))
            .collect()
    };
    emit(out, &scatter_data(&rows))
}
