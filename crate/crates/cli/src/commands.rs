use std::fmt::Display;
use std::io::{self, Write};

use cavitrap::analytic;
use cavitrap::config::{self, Config, ConfigError};
use cavitrap::evolution::{self, DensitySummary, GroundState, GroundStateOptions};
use cavitrap::grid::{self, Channel, Grid, WaveState};
use cavitrap::montecarlo::{self, EnsembleStats, TrajectoryRunner};
use cavitrap::params::{PhysicalParams, Severity};
use cavitrap::Error;
use serde_json::{json, Value};

use crate::args::{Axis, Cli, Command, DecayInit};
use crate::output::Run;

/// Trajectories longer than this need `--long`.
const LONG_RUN_STEPS: f64 = 2e6;

#[derive(Debug)]
pub enum Failure {
    Config(String),
    Numerical(String),
    Io(io::Error),
}

impl From<io::Error> for Failure {
    fn from(e: io::Error) -> Self {
        Failure::Io(e)
    }
}

impl From<ConfigError> for Failure {
    fn from(e: ConfigError) -> Self {
        Failure::Config(e.to_string())
    }
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        if e.is_config_error() {
            Failure::Config(e.to_string())
        } else {
            Failure::Numerical(e.to_string())
        }
    }
}

type Result<T> = std::result::Result<T, Failure>;

fn load_config(cli: &Cli) -> Result<Config> {
    let c = &cli.common;
    let text = match &c.config {
        Some(path) => std::fs::read_to_string(path)
            .map_err(|e| Failure::Config(format!("cannot read {}: {e}", path.display())))?,
        None => String::new(),
    };
    let mut cfg = Config::parse_with_preset(&text, c.preset.as_deref())?;
    for o in &c.overrides {
        cfg.apply_override(o)?;
    }
    if let Some(seed) = c.seed {
        cfg.apply_override(&format!("numerics.seed={seed}"))?;
    }
    Ok(cfg.resolved())
}

/// Prints diagnostics to stderr; ERROR diagnostics abort with a config failure.
fn check_params(p: &PhysicalParams, trapping: bool) -> Result<()> {
    let diags = p.validate(trapping);
    for d in &diags {
        eprintln!("{d}");
    }
    match diags.iter().find(|d| d.severity == Severity::Error) {
        Some(d) => Err(Failure::Config(d.message.clone())),
        None => Ok(()),
    }
}

fn simulation_grid(cfg: &Config) -> Result<Grid> {
    let grid = cfg.grid()?;
    grid.check_recoil_resolution()?;
    Ok(grid)
}

fn ground_options(cfg: &Config) -> GroundStateOptions {
    let mut opts = GroundStateOptions::for_params(&cfg.params, cfg.numerics.dtau);
    if let Some(t) = cfg.numerics.ground_tol {
        opts.tol = t;
    }
    opts
}

fn relax(cfg: &Config, grid: &Grid) -> Result<GroundState> {
    Ok(evolution::ground_state(&cfg.params, grid, &ground_options(cfg))?)
}

fn kv(out: &mut impl Write, key: &str, value: impl Display, unit: &str) -> io::Result<()> {
    writeln!(out, "  {key:<26} {value} {unit}")
}

pub fn run(cli: &Cli) -> Result<()> {
    let cfg = load_config(cli)?;
    match &cli.command {
        Command::Analytic { bound_length } => cmd_analytic(cli, &cfg, *bound_length),
        Command::Optimize { v0 } => cmd_optimize(cli, &cfg, v0.as_deref()),
        Command::Ground => cmd_ground(cli, &cfg),
        Command::Decay { init } => cmd_decay(cli, &cfg, *init),
        Command::Trap { trajectories, long } => cmd_trap(cli, &cfg, *trajectories, *long),
        Command::Sweep { axis, from, to, points, trap, trajectories, long } => {
            let sweep = SweepSpec {
                axis: *axis,
                from: parse_axis_value(&cfg.params, from)?,
                to: parse_axis_value(&cfg.params, to)?,
                points: *points,
                trap: *trap,
                trajectories: *trajectories,
                long: *long,
            };
            cmd_sweep(cli, &cfg, &sweep)
        }
    }
}

fn cmd_analytic(cli: &Cli, cfg: &Config, bound_length: Option<f64>) -> Result<()> {
    let p = &cfg.params;
    check_params(p, false)?;
    let v0 = analytic::potential_depth_exact(p)?;
    let v0_approx = analytic::potential_depth_approx(p)?;
    let gamma_eff = analytic::gamma_eff(p)?;
    let tau_eff = analytic::tau_eff(p).ok();
    let estimate = analytic::lifetime_estimate(p).ok();
    let length = bound_length.unwrap_or(2.0 * p.cavity_width);
    let margin = analytic::bound_state_margin(v0, length, p.recoil_energy);

    let mut run = Run::start(&cli.common.out, "analytic")?;
    let mut csv = run.create("report.csv")?;
    writeln!(csv, "quantity,value,unit")?;
    let rows: [(&str, Option<f64>, &str); 7] = [
        ("v0_exact", Some(v0), "rad/s"),
        ("v0_approx", Some(v0_approx), "rad/s"),
        ("gamma_eff", Some(gamma_eff), "1/s"),
        ("tau_eff", tau_eff, "s"),
        ("lifetime_estimate", estimate, "s"),
        ("bound_state_margin", Some(margin), ""),
        ("bound_length", Some(length), "1/k"),
    ];
    for (name, value, unit) in rows {
        match value {
            Some(v) => writeln!(csv, "{name},{v:.9e},{unit}")?,
            None => writeln!(csv, "{name},,{unit}")?,
        }
    }
    csv.flush()?;

    let mut o = io::stdout().lock();
    writeln!(o, "analytic")?;
    kv(&mut o, "trap depth V0 (exact)", format!("{v0:.6e}"), "rad/s")?;
    kv(&mut o, "trap depth V0 (approx)", format!("{v0_approx:.6e}"), "rad/s")?;
    kv(&mut o, "effective decay rate", format!("{gamma_eff:.6e}"), "1/s")?;
    match tau_eff {
        Some(t) => kv(&mut o, "effective lifetime", format!("{:.6}", t * 1e3), "ms")?,
        None => kv(&mut o, "effective lifetime", "unbounded", "")?,
    }
    if let Some(t) = estimate {
        kv(&mut o, "lifetime estimate", format!("{t:.6e}"), "s")?;
    }
    kv(&mut o, "bound-state margin", format!("{margin:.4}"), format!("(L = {length} /k)").as_str())?;
    let results = json!({
        "v0_exact": v0, "v0_approx": v0_approx, "gamma_eff": gamma_eff,
        "tau_eff": tau_eff, "lifetime_estimate": estimate, "bound_state_margin": margin,
    });
    run.finish(&cfg.to_toml(), &[], results)?;
    Ok(())
}

fn cmd_optimize(cli: &Cli, cfg: &Config, v0: Option<&str>) -> Result<()> {
    let p = &cfg.params;
    let target = match v0 {
        Some(s) => config::parse_frequency(s)?,
        None => analytic::potential_depth_exact(p)?,
    };
    let design = analytic::optimize_laser(p, target)?;
    let ratio = design.detuning_ratio(p.g0);

    // lifetime along the constant-depth curve around the optimum
    let mut run = Run::start(&cli.common.out, "optimize")?;
    let mut csv = run.create("curve.csv")?;
    writeln!(csv, "detuning_ratio,delta,omega,tau_eff")?;
    let mut best_on_curve = (0.0, f64::NEG_INFINITY);
    for i in 0..=40 {
        let d = ratio * (0.7 + 0.6 * i as f64 / 40.0);
        if d <= 1.0 {
            continue;
        }
        let delta = -d * p.g0;
        let omega = analytic::omega_for_depth(p, target, delta);
        let tau = analytic::tau_eff(&p.with_laser(omega, delta))?;
        writeln!(csv, "{d:.9e},{delta:.9e},{omega:.9e},{tau:.9e}")?;
        if tau > best_on_curve.1 {
            best_on_curve = (d, tau);
        }
    }
    csv.flush()?;

    let mut o = io::stdout().lock();
    writeln!(o, "optimize (V0 = {target:.6e} rad/s)")?;
    kv(&mut o, "|delta|/g0", format!("{ratio:.6}"), "")?;
    kv(&mut o, "delta", format!("{:.6e}", design.delta), format!("rad/s ({:.4} x 2pi MHz)", design.delta / config::parse_frequency("1 2pi.MHz")?).as_str())?;
    kv(&mut o, "omega", format!("{:.6e}", design.omega), format!("rad/s ({:.4} x 2pi MHz)", design.omega / config::parse_frequency("1 2pi.MHz")?).as_str())?;
    kv(&mut o, "effective lifetime", format!("{:.6e}", design.tau_eff), "s")?;
    kv(&mut o, "regime check passed", design.feasible, "")?;
    kv(&mut o, "best sampled |delta|/g0", format!("{:.4}", best_on_curve.0), "")?;
    let results = json!({
        "v0_target": target, "detuning_ratio": ratio, "delta": design.delta,
        "omega": design.omega, "tau_eff": design.tau_eff, "feasible": design.feasible,
    });
    run.finish(&cfg.to_toml(), &[], results)?;
    Ok(())
}

fn cmd_ground(cli: &Cli, cfg: &Config) -> Result<()> {
    let p = &cfg.params;
    check_params(p, true)?;
    let grid = simulation_grid(cfg)?;
    let v0 = analytic::potential_depth_exact(p)?;
    if !(v0 > 0.0) {
        println!("no laser trap (V0 = {v0:e}); relaxing toward the box ground state");
    }
    let gs = relax(cfg, &grid)?;
    let s = DensitySummary::of(&gs.state, &grid);

    let mut run = Run::start(&cli.common.out, "ground")?;
    let mut csv = run.create("density.csv")?;
    grid::write_density_csv(&mut csv, &grid, &gs.state)?;
    csv.flush()?;

    let mut o = io::stdout().lock();
    writeln!(o, "ground state ({} points, half-width {})", grid.n(), grid.half_extent())?;
    kv(&mut o, "energy", format!("{:.9e}", gs.energy), "rad/s")?;
    kv(&mut o, "energy above bottom", format!("{:.6e}", gs.energy - (analytic::perturbative_levels(p, 0.0)?.lambda0)), "rad/s")?;
    kv(&mut o, "iterations", gs.iterations, "")?;
    kv(&mut o, "peak ratio |g,1>/|g,0>", format!("{:.4e}", s.g1_peak_ratio), "")?;
    kv(&mut o, "peak ratio |e,0>/|g,0>", format!("{:.4e}", s.e0_peak_ratio), "")?;
    kv(&mut o, "half-density radius", format!("{:.4}", s.half_density_radius / p.cavity_width), "sigma")?;
    let results = json!({
        "energy": gs.energy, "iterations": gs.iterations,
        "g1_peak_ratio": s.g1_peak_ratio, "e0_peak_ratio": s.e0_peak_ratio,
        "half_density_radius": s.half_density_radius,
    });
    run.finish(&cfg.to_toml(), &[], results)?;
    Ok(())
}

fn cmd_decay(cli: &Cli, cfg: &Config, init: DecayInit) -> Result<()> {
    let p = &cfg.params;
    check_params(p, init == DecayInit::Ground)?;
    let grid = simulation_grid(cfg)?;
    let s0 = match init {
        DecayInit::Ground => relax(cfg, &grid)?.state,
        DecayInit::Photon => WaveState::gaussian(&grid, 0.0, p.cavity_width / 4.0, Channel::G1),
    };
    let n = &cfg.numerics;
    let decay = evolution::no_jump_decay(&s0, p, &grid, n.dt, n.t_max, n.sample_every)?;

    let mut run = Run::start(&cli.common.out, "decay")?;
    let mut csv = run.create("history.csv")?;
    evolution::write_history_csv(&mut csv, &decay.history)?;
    csv.flush()?;

    let mut o = io::stdout().lock();
    writeln!(o, "no-emission decay")?;
    kv(&mut o, "1/e time", format!("{:.6e}", decay.decay_time), "s")?;
    // uncoupled photon: 1/(2κ); photon shared with the atom at large g: 1/(κ+Γ)
    let references: Vec<(&str, f64)> = match init {
        DecayInit::Ground => analytic::tau_eff(p).ok().map(|t| ("effective lifetime", t)).into_iter().collect(),
        DecayInit::Photon => [("1/(2 kappa)", 2.0 * p.kappa), ("1/(kappa + gamma)", p.kappa + p.gamma)]
            .into_iter()
            .filter(|(_, rate)| *rate > 0.0)
            .map(|(name, rate)| (name, 1.0 / rate))
            .collect(),
    };
    for (name, t) in &references {
        kv(&mut o, name, format!("{t:.6e}"), format!("s (ratio {:.4})", decay.decay_time / t).as_str())?;
    }
    let reference = references.first().copied();
    let results = json!({ "decay_time": decay.decay_time, "reference": reference.map(|r| r.1) });
    run.finish(&cfg.to_toml(), &[], results)?;
    Ok(())
}

fn check_length(cfg: &Config, long: bool) -> Result<()> {
    let steps = cfg.numerics.t_max / cfg.numerics.dt;
    if steps > LONG_RUN_STEPS && !long {
        return Err(Failure::Config(format!(
            "trajectories may take up to {steps:.3e} steps; pass --long to run them"
        )));
    }
    Ok(())
}

/// Ground state with the configured momentum kick applied to every channel.
fn kicked_ground_state(cfg: &Config, grid: &Grid) -> Result<WaveState> {
    let mut s = relax(cfg, grid)?.state;
    s.apply_momentum_kick(grid, cfg.numerics.kick, &Channel::ALL);
    Ok(s)
}

fn ensemble(cfg: &Config, grid: &Grid, n: usize) -> Result<(Vec<montecarlo::TrajectoryRecord>, EnsembleStats)> {
    let init = kicked_ground_state(cfg, grid)?;
    let records = montecarlo::run_ensemble_records(
        &cfg.params,
        grid,
        &init,
        &cfg.numerics.trajectory_options(),
        n,
        cfg.numerics.seed,
    )?;
    let stats = EnsembleStats::from_records(&records);
    Ok((records, stats))
}

fn cmd_trap(cli: &Cli, cfg: &Config, trajectories: Option<usize>, long: bool) -> Result<()> {
    let p = &cfg.params;
    check_params(p, true)?;
    check_length(cfg, long)?;
    let grid = simulation_grid(cfg)?;
    // fail on bad options before spending time on the ground state
    TrajectoryRunner::new(p, &grid, cfg.numerics.trajectory_options())?;
    let n = trajectories.unwrap_or(cfg.numerics.trajectories);
    if n == 0 {
        return Err(Failure::Config("need at least one trajectory".into()));
    }
    let (records, stats) = ensemble(cfg, &grid, n)?;

    let mut run = Run::start(&cli.common.out, "trap")?;
    let mut csv = run.create("summary.csv")?;
    montecarlo::write_summary_csv(&mut csv, &stats)?;
    csv.flush()?;
    for r in &records {
        let mut ev = run.create(&format!("events-{}.csv", r.seed))?;
        montecarlo::write_events_csv(&mut ev, &r.events)?;
        ev.flush()?;
        let mut sm = run.create(&format!("samples-{}.csv", r.seed))?;
        montecarlo::write_samples_csv(&mut sm, &r.samples)?;
        sm.flush()?;
    }

    let mut o = io::stdout().lock();
    writeln!(o, "trapping time ({n} trajectories, seeds {}..{})", cfg.numerics.seed, cfg.numerics.seed + n as u64 - 1)?;
    match stats.median_trap_time {
        Some(t) => kv(&mut o, "median trap time", format!("{:.6}", t * 1e3), "ms")?,
        None => kv(&mut o, "median trap time", "undefined (more than half censored)", "")?,
    }
    kv(&mut o, "censored", stats.n_censored, "")?;
    kv(&mut o, "mean jumps per trajectory", format!("{:.2}", stats.mean_events), "")?;
    kv(&mut o, "jump rate", format!("{:.6e}", stats.jump_rate), "1/s")?;
    let seeds: Vec<u64> = records.iter().map(|r| r.seed).collect();
    let results = json!({
        "median_trap_time": stats.median_trap_time, "n_censored": stats.n_censored,
        "mean_events": stats.mean_events, "jump_rate": stats.jump_rate,
    });
    run.finish(&cfg.to_toml(), &seeds, results)?;
    Ok(())
}

struct SweepSpec {
    axis: Axis,
    from: f64,
    to: f64,
    points: usize,
    trap: bool,
    trajectories: Option<usize>,
    long: bool,
}

/// A frequency with unit, or a multiple of g0 written like `-1.9g0`.
fn parse_axis_value(p: &PhysicalParams, s: &str) -> Result<f64> {
    match s.trim().strip_suffix("g0") {
        Some(num) => num
            .trim()
            .parse::<f64>()
            .ok()
            .filter(|v| v.is_finite())
            .map(|v| v * p.g0)
            .ok_or_else(|| Failure::Config(format!("cannot parse `{s}` as a multiple of g0"))),
        None => Ok(config::parse_frequency(s)?),
    }
}

fn opt_cell(v: Option<f64>) -> String {
    v.map(|x| format!("{x:.9e}")).unwrap_or_default()
}

fn cmd_sweep(cli: &Cli, cfg: &Config, sweep: &SweepSpec) -> Result<()> {
    if sweep.points < 2 {
        return Err(Failure::Config("a sweep needs at least two points".into()));
    }
    let base = cfg.params;
    if sweep.trap {
        check_length(cfg, sweep.long)?;
    }
    let grid = if sweep.trap { Some(simulation_grid(cfg)?) } else { None };
    let n = sweep.trajectories.unwrap_or(cfg.numerics.trajectories);
    let name = match sweep.axis {
        Axis::Delta => "sweep-delta",
        Axis::Omega => "sweep-omega",
    };
    let mut run = Run::start(&cli.common.out, name)?;
    let mut csv = run.create("table.csv")?;
    write!(csv, "delta,omega,v0_exact,v0_approx,gamma_eff,tau_eff")?;
    if sweep.trap {
        write!(csv, ",median_trap_time,n_censored,mean_events")?;
    }
    writeln!(csv)?;
    let mut rows = Vec::new();
    for i in 0..sweep.points {
        let v = sweep.from + (sweep.to - sweep.from) * i as f64 / (sweep.points - 1) as f64;
        let p = match sweep.axis {
            Axis::Delta => base.with_laser(base.omega, v),
            Axis::Omega => base.with_laser(v, base.delta),
        };
        let v0 = analytic::potential_depth_exact(&p).ok();
        let v0a = analytic::potential_depth_approx(&p).ok();
        let ge = analytic::gamma_eff(&p).ok();
        let te = analytic::tau_eff(&p).ok();
        write!(
            csv,
            "{:.9e},{:.9e},{},{},{},{}",
            p.delta,
            p.omega,
            opt_cell(v0),
            opt_cell(v0a),
            opt_cell(ge),
            opt_cell(te)
        )?;
        let mut median = None;
        if let Some(grid) = &grid {
            if v0.is_some_and(|d| d > 0.0) && !p.has_errors(true) {
                let point = Config { params: p, numerics: cfg.numerics.clone() };
                let (_, stats) = ensemble(&point, grid, n)?;
                median = stats.median_trap_time;
                write!(csv, ",{},{},{:.9e}", opt_cell(median), stats.n_censored, stats.mean_events)?;
            } else {
                write!(csv, ",,,")?;
            }
        }
        writeln!(csv)?;
        rows.push(json!({ "delta": p.delta, "omega": p.omega, "tau_eff": te, "v0": v0, "median_trap_time": median }));
    }
    csv.flush()?;
    println!("{name}: {} points written to {}", sweep.points, cli.common.out.display());
    let seeds: Vec<u64> = if sweep.trap { (0..n as u64).map(|i| cfg.numerics.seed + i).collect() } else { vec![] };
    run.finish(&cfg.to_toml(), &seeds, Value::Array(rows))?;
    Ok(())
}
