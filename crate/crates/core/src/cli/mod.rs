// SPDX-License-Identifier: Apache-2.0

//! Command-line front end.
//!
//! Structured single results are printed as JSON, grids and sweeps as CSV.
//! Exit codes: 0 success, 2 configuration error, 3 numerical failure.

mod csv_out;

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use serde_json::json;

use crate::dynamics::{phase_variance_with_rates, rates_with, visibility_with_rates};
use crate::error::{Error, Result};
use crate::geometry::{factors, most_sensitive_rc, FactorPolicy};
use crate::inference::calibrate::DEFAULT_META;
use crate::inference::scenarios::table1_with;
use crate::inference::{
    calibrate_estimator, exclusion_curve, lambda_bound_with, repetitions, scenario, scenarios,
    variance_split_with, BoundMode, RcGrid,
};
use crate::model::{validate, CslPoint, ExperimentSpec};
use crate::oracles::sde::{sample_paths, sde_sample_with_rates, SdeConfig};

pub use csv_out::{emit_csv, format_float, Cell, CsvTable};

pub const DEFAULT_SEED: u64 = 42;
pub const THREADS_ENV: &str = "CSLBEC_THREADS";

#[derive(Debug, Parser)]
#[command(name = "cslbec", version, about = "CSL bounds and repetition counts for two-mode BEC interferometers")]
struct Cli {
    /// Write the result to this file instead of stdout.
    #[arg(long, short, global = true)]
    output: Option<PathBuf>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Geometry factors f_P, f_S at one r_C or over a grid.
    Geometry(GeometryArgs),
    /// Forward model: phase variance and visibility at (λ, r_C).
    Variance(PointArgs),
    /// λ exclusion bound at one r_C.
    Bound(BoundArgs),
    /// Exclusion curve λ(r_C) as CSV.
    Curve(CurveArgs),
    /// Fisher information and repetition count k.
    Repetitions(RepetitionArgs),
    /// Repetition counts for all built-in setups.
    Table1(TableArgs),
    /// Monte Carlo trajectories against the analytic variance.
    Simulate(SimulateArgs),
    /// Synthetic-data check of the λ estimator against the Cramér–Rao floor.
    Calibrate(CalibrateArgs),
    /// List built-in scenarios.
    Scenarios,
}

#[derive(Debug, Args)]
struct Source {
    /// Built-in scenario (see `scenarios`).
    #[arg(long, conflicts_with = "spec", required_unless_present = "spec")]
    scenario: Option<String>,
    /// Experiment spec JSON file.
    #[arg(long)]
    spec: Option<PathBuf>,
    /// Variance model: mzi, swi-plain or swi-echo.
    #[arg(long, value_parser = parse_mode)]
    mode: Option<BoundMode>,
    /// Normalise the MZI f_P to 1 at its plateau.
    #[arg(long, conflicts_with = "no_fp_cap")]
    fp_cap_one: bool,
    /// Use the MZI f_P as computed.
    #[arg(long)]
    no_fp_cap: bool,
}

#[derive(Debug, Args)]
struct GeometryArgs {
    #[command(flatten)]
    source: Source,
    /// Single r_C in m (default: most sensitive r_C).
    #[arg(long, conflicts_with = "rc")]
    rc_m: Option<f64>,
    /// Grid min:max:points.
    #[arg(long, value_parser = parse_grid)]
    rc: Option<RcGrid>,
    /// Space the grid linearly.
    #[arg(long, requires = "rc")]
    linear: bool,
}

#[derive(Debug, Args)]
struct PointArgs {
    #[command(flatten)]
    source: Source,
    /// CSL rate λ in Hz (default: the scenario's λ_min).
    #[arg(long)]
    lambda_hz: Option<f64>,
    /// r_C in m (default: most sensitive r_C).
    #[arg(long)]
    rc_m: Option<f64>,
}

#[derive(Debug, Args)]
struct BoundArgs {
    #[command(flatten)]
    source: Source,
    #[arg(long)]
    rc_m: Option<f64>,
}

#[derive(Debug, Args)]
struct CurveArgs {
    #[command(flatten)]
    source: Source,
    /// Grid min:max:points.
    #[arg(long, value_parser = parse_grid, default_value = "1e-9:1e-3:121")]
    rc: RcGrid,
    #[arg(long)]
    linear: bool,
}

#[derive(Debug, Args)]
struct RepetitionArgs {
    #[command(flatten)]
    source: Source,
    #[arg(long)]
    rc_m: Option<f64>,
    /// Smallest λ to resolve (default: the scenario's λ_min, else the spec's bound).
    #[arg(long)]
    lambda_min_hz: Option<f64>,
    /// Relative precision δ.
    #[arg(long, default_value_t = 0.1)]
    delta: f64,
}

#[derive(Debug, Args)]
struct TableArgs {
    #[arg(long, default_value_t = 0.1)]
    delta: f64,
    /// Emit CSV instead of the aligned table.
    #[arg(long)]
    csv: bool,
    /// Force f_P normalisation on (or, with --no-fp-cap, off) for every row.
    #[arg(long, conflicts_with = "no_fp_cap")]
    fp_cap_one: bool,
    #[arg(long)]
    no_fp_cap: bool,
}

#[derive(Debug, Args)]
struct SimulateArgs {
    #[command(flatten)]
    point: PointArgs,
    #[arg(long, default_value_t = 10_000)]
    n_traj: usize,
    #[arg(long, default_value_t = 10_000)]
    n_steps: usize,
    #[arg(long, default_value_t = DEFAULT_SEED)]
    seed: u64,
    /// Also write all trajectories, sampled at --dump-points times, to this CSV.
    #[arg(long)]
    dump: Option<PathBuf>,
    #[arg(long, default_value_t = 11, requires = "dump")]
    dump_points: usize,
}

#[derive(Debug, Args)]
struct CalibrateArgs {
    #[command(flatten)]
    source: Source,
    #[arg(long)]
    rc_m: Option<f64>,
    /// True CSL rate used to generate data (default: the scenario's λ_min).
    #[arg(long)]
    lambda_true_hz: Option<f64>,
    /// Repetitions per synthetic experiment (default: the predicted k).
    #[arg(long)]
    k: Option<u64>,
    #[arg(long, default_value_t = DEFAULT_META)]
    meta: usize,
    #[arg(long, default_value_t = 0.1)]
    delta: f64,
    #[arg(long, default_value_t = DEFAULT_SEED)]
    seed: u64,
}

fn parse_mode(s: &str) -> std::result::Result<BoundMode, String> {
    s.parse().map_err(|e: Error| e.to_string())
}

fn parse_grid(s: &str) -> std::result::Result<RcGrid, String> {
    s.parse().map_err(|e: Error| e.to_string())
}

struct Setup {
    name: String,
    spec: ExperimentSpec,
    mode: BoundMode,
    policy: FactorPolicy,
    lambda_min: Option<f64>,
}

impl Setup {
    fn rc(&self, explicit: Option<f64>) -> Result<f64> {
        match explicit {
            Some(rc) => Ok(rc),
            None => most_sensitive_rc(&self.spec.geometry),
        }
    }
}

fn cap_override(on: bool, off: bool) -> Option<FactorPolicy> {
    match (on, off) {
        (true, _) => Some(FactorPolicy::CapOne),
        (_, true) => Some(FactorPolicy::Closed),
        _ => None,
    }
}

fn resolve(src: &Source, err: &mut dyn Write) -> Result<Setup> {
    let mut setup = if let Some(name) = &src.scenario {
        let s = scenario(name)?;
        Setup {
            name: s.name.to_string(),
            spec: s.spec,
            mode: s.mode,
            policy: s.policy,
            lambda_min: Some(s.lambda_min),
        }
    } else {
        let path = src.spec.as_deref().ok_or_else(|| Error::Config("need --scenario or --spec".into()))?;
        let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        let spec = ExperimentSpec::from_json(&text).map_err(|e| Error::Config(format!("{}: {e}", path.display())))?;
        let report = validate(&spec);
        for w in &report.warnings {
            let _ = writeln!(err, "warning: {w}");
        }
        let spec = spec.validated()?;
        Setup {
            name: path.display().to_string(),
            mode: BoundMode::for_spec(&spec),
            spec,
            policy: FactorPolicy::Closed,
            lambda_min: None,
        }
    };
    if let Some(m) = src.mode {
        setup.mode = m;
    }
    if let Some(p) = cap_override(src.fp_cap_one, src.no_fp_cap) {
        setup.policy = p;
    }
    Ok(setup)
}

fn need_lambda(explicit: Option<f64>, setup: &Setup, flag: &str) -> Result<f64> {
    explicit
        .or(setup.lambda_min)
        .ok_or_else(|| Error::Config(format!("{flag} is required with --spec")))
}

fn grid_values(grid: RcGrid, linear: bool) -> Vec<f64> {
    RcGrid { log: !linear, ..grid }.values()
}

fn write_output(path: Option<&Path>, bytes: &[u8], out: &mut dyn Write) -> Result<()> {
    match path {
        Some(p) => fs::write(p, bytes).map_err(|e| Error::io(p, e)),
        None => out.write_all(bytes).map_err(|e| Error::io("<stdout>", e)),
    }
}

fn json_bytes(value: &serde_json::Value) -> Result<Vec<u8>> {
    let mut s = serde_json::to_string_pretty(value)?;
    s.push('\n');
    Ok(s.into_bytes())
}

fn policy_name(p: FactorPolicy) -> &'static str {
    match p {
        FactorPolicy::Closed => "closed",
        FactorPolicy::CapOne => "cap-one",
    }
}

fn execute(cli: Cli, out: &mut dyn Write, err: &mut dyn Write) -> Result<()> {
    let output = cli.output.as_deref();
    let bytes = match cli.command {
        Command::Geometry(a) => {
            let s = resolve(&a.source, err)?;
            match a.rc {
                Some(grid) => {
                    let mut table = CsvTable::new(&["rc_m", "f_p", "f_s"]);
                    for rc in grid_values(grid, a.linear) {
                        let f = factors(&s.spec.geometry, rc, s.policy)?;
                        table.push(vec![Cell::Float(rc), Cell::Float(f.f_p), Cell::Float(f.f_s)])?;
                    }
                    table.to_bytes()?
                }
                None => {
                    let best = most_sensitive_rc(&s.spec.geometry)?;
                    let rc = a.rc_m.unwrap_or(best);
                    let f = factors(&s.spec.geometry, rc, s.policy)?;
                    json_bytes(&json!({
                        "source": s.name,
                        "policy": policy_name(s.policy),
                        "rc_m": rc,
                        "f_p": f.f_p,
                        "f_s": f.f_s,
                        "most_sensitive_rc_m": best,
                    }))?
                }
            }
        }
        Command::Variance(a) => {
            let s = resolve(&a.source, err)?;
            let lambda = need_lambda(a.lambda_hz, &s, "--lambda-hz")?;
            let rc = s.rc(a.rc_m)?;
            let r = rates_with(&CslPoint::new(lambda, rc)?, &s.spec.species, &s.spec.geometry, s.policy)?;
            let m = phase_variance_with_rates(&s.spec, &r);
            if !m.valid {
                let _ = writeln!(err, "warning: phase spread exceeds pi/3; Gaussian model not valid");
            }
            json_bytes(&json!({
                "source": s.name,
                "lambda_hz": lambda,
                "rc_m": rc,
                "gamma_p_hz": r.gamma_p,
                "gamma_s_hz": r.gamma_s,
                "phase_mean_rad": m.mean,
                "phase_variance_rad2": m.variance,
                "xi_t_sq": m.squeezing_sq(s.spec.state.n()),
                "visibility": visibility_with_rates(&s.spec, &r),
                "valid": m.valid,
            }))?
        }
        Command::Bound(a) => {
            let s = resolve(&a.source, err)?;
            let rc = s.rc(a.rc_m)?;
            let split = variance_split_with(&s.spec, rc, s.mode, s.policy)?;
            let b = lambda_bound_with(&s.spec, rc, s.mode, s.policy)?;
            json_bytes(&json!({
                "source": s.name,
                "mode": s.mode.name(),
                "policy": policy_name(s.policy),
                "rc_m": rc,
                "lambda_bound_hz": b,
                "sigma_conv_sq_rad2": split.sigma_conv_sq,
                "alpha_csl_sq_rad2_s": split.alpha_csl_sq,
            }))?
        }
        Command::Curve(a) => {
            let s = resolve(&a.source, err)?;
            let grid = grid_values(a.rc, a.linear);
            let curve = exclusion_curve(&s.spec, s.mode, s.policy, &grid, s.name.clone());
            let mut table = CsvTable::new(&["rc_m", "lambda_bound_hz"]);
            for p in &curve.points {
                if let Some(e) = &p.error {
                    let _ = writeln!(err, "warning: gap at rc = {:e} m: {e}", p.rc);
                }
                table.push(vec![Cell::Float(p.rc), p.lambda_bound.map_or(Cell::Missing, Cell::Float)])?;
            }
            table.to_bytes()?
        }
        Command::Repetitions(a) => {
            let s = resolve(&a.source, err)?;
            let rc = s.rc(a.rc_m)?;
            let lambda_min = a.lambda_min_hz.or(s.lambda_min);
            let r = repetitions(&s.spec, rc, s.mode, s.policy, lambda_min, a.delta)?;
            json_bytes(&json!({
                "source": s.name,
                "mode": s.mode.name(),
                "policy": policy_name(s.policy),
                "rc_m": rc,
                "lambda_min_hz": r.lambda_min,
                "delta": r.delta,
                "fisher_info_per_hz2": r.fisher_info,
                "conventional_ratio": r.conventional_ratio,
                "k": r.k,
                "k_1_5": r.k_inflated,
            }))?
        }
        Command::Table1(a) => {
            let rows = table1_with(a.delta, cap_override(a.fp_cap_one, a.no_fp_cap))?;
            if a.csv {
                let mut table = CsvTable::new(&["scenario", "N", "xi0", "t_s", "lambda_min_hz", "k", "k_1_5"]);
                for r in &rows {
                    table.push(vec![
                        Cell::Text(r.scenario.to_string()),
                        Cell::Int(r.n_atoms),
                        Cell::Float(r.xi0),
                        Cell::Float(r.t),
                        Cell::Float(r.estimate.lambda_min),
                        Cell::Int(r.estimate.k),
                        Cell::Int(r.estimate.k_inflated),
                    ])?;
                }
                table.to_bytes()?
            } else {
                let mut s = format!(
                    "{:<12} {:>8} {:>5} {:>6} {:>10} {:>6} {:>6}\n",
                    "setup", "N", "xi0", "t", "lambda_min", "k", "k_1.5"
                );
                for r in &rows {
                    s.push_str(&format!(
                        "{:<12} {:>8.0e} {:>5} {:>6} {:>10.0e} {:>6} {:>6}\n",
                        r.label,
                        r.n_atoms as f64,
                        r.xi0,
                        format!("{} s", r.t),
                        r.estimate.lambda_min,
                        r.estimate.k,
                        r.estimate.k_inflated
                    ));
                }
                s.into_bytes()
            }
        }
        Command::Simulate(a) => {
            let s = resolve(&a.point.source, err)?;
            let lambda = need_lambda(a.point.lambda_hz, &s, "--lambda-hz")?;
            let rc = s.rc(a.point.rc_m)?;
            let r = rates_with(&CslPoint::new(lambda, rc)?, &s.spec.species, &s.spec.geometry, s.policy)?;
            let cfg = SdeConfig {
                n_traj: a.n_traj,
                n_steps: a.n_steps,
                seed: a.seed,
            };
            let analytic = phase_variance_with_rates(&s.spec, &r).variance;
            let mc = sde_sample_with_rates(&s.spec, &r, &cfg)?;
            if let Some(w) = &mc.step_warning {
                let _ = writeln!(err, "warning: {w}");
            }
            if let Some(path) = &a.dump {
                if a.dump_points < 2 {
                    return Err(Error::Config("--dump-points must be at least 2".into()));
                }
                let t = s.spec.protocol.t;
                let times: Vec<f64> = (0..a.dump_points).map(|i| t * i as f64 / (a.dump_points - 1) as f64).collect();
                let paths = sample_paths(&s.spec, &r, &cfg, &times)?;
                let mut table = CsvTable::new(&["trajectory", "t_s", "phi_rad", "n"]);
                for p in &paths {
                    for i in 0..p.times.len() {
                        table.push(vec![
                            Cell::Int(p.index as u64),
                            Cell::Float(p.times[i]),
                            Cell::Float(p.phi[i]),
                            Cell::Float(p.n[i]),
                        ])?;
                    }
                }
                emit_csv(&table, Some(path))?;
            }
            json_bytes(&json!({
                "source": s.name,
                "lambda_hz": lambda,
                "rc_m": rc,
                "n_traj": cfg.n_traj,
                "n_steps": cfg.n_steps,
                "seed": cfg.seed,
                "analytic_variance": analytic,
                "mc_variance": mc.moments.variance,
                "mc_stderr": mc.stderr_variance,
                "mc_mean": mc.moments.mean,
                "z_score": mc.z_score(analytic),
            }))?
        }
        Command::Calibrate(a) => {
            let s = resolve(&a.source, err)?;
            let rc = s.rc(a.rc_m)?;
            let lambda = need_lambda(a.lambda_true_hz, &s, "--lambda-true-hz")?;
            let k = match a.k {
                Some(k) => k,
                None => repetitions(&s.spec, rc, s.mode, s.policy, s.lambda_min.or(Some(lambda)), a.delta)?.k,
            };
            let report = calibrate_estimator(&s.spec, rc, s.mode, s.policy, lambda, k, a.meta, a.seed)?;
            let mut v = serde_json::to_value(report)?;
            v["source"] = json!(s.name);
            v["rc_m"] = json!(rc);
            json_bytes(&v)?
        }
        Command::Scenarios => {
            let mut s = String::new();
            for sc in scenarios() {
                s.push_str(&format!(
                    "{:<12} {:<12} mode={:<9} f_p={:<7} N={:e} xi0={} t={} s lambda_min={:e} Hz\n",
                    sc.name,
                    sc.label,
                    sc.mode.name(),
                    policy_name(sc.policy),
                    sc.spec.state.n(),
                    sc.spec.state.xi0,
                    sc.spec.protocol.t,
                    sc.lambda_min
                ));
            }
            s.into_bytes()
        }
    };
    write_output(output, &bytes, out)
}

fn thread_pool() -> Result<rayon::ThreadPool> {
    let mut b = rayon::ThreadPoolBuilder::new();
    if let Ok(v) = std::env::var(THREADS_ENV) {
        let n: usize = v
            .trim()
            .parse()
            .ok()
            .filter(|&n| n > 0)
            .ok_or_else(|| Error::Config(format!("{THREADS_ENV} must be a positive integer, got '{v}'")))?;
        b = b.num_threads(n);
    }
    b.build().map_err(|e| Error::Config(format!("thread pool: {e}")))
}

fn exit_code(e: &Error) -> i32 {
    if e.is_numerical() {
        3
    } else {
        2
    }
}

/// Parses `argv` (including the program name) and runs the command, writing
/// results to `out` and diagnostics to `err`.
pub fn run_with<I, S>(argv: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = S>,
    S: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let text = e.render().to_string();
            let _ = if code == 0 { out.write_all(text.as_bytes()) } else { err.write_all(text.as_bytes()) };
            return code;
        }
    };
    let (mut ob, mut eb) = (Vec::new(), Vec::new());
    let result = thread_pool().and_then(|pool| pool.install(|| execute(cli, &mut ob, &mut eb)));
    let _ = out.write_all(&ob);
    let _ = err.write_all(&eb);
    match result {
        Ok(()) => 0,
        Err(e) => {
            let _ = writeln!(err, "error: {e}");
            exit_code(&e)
        }
    }
}

pub fn run<I, S>(argv: I) -> i32
where
    I: IntoIterator<Item = S>,
    S: Into<std::ffi::OsString> + Clone,
{
    let stdout = std::io::stdout();
    let stderr = std::io::stderr();
    run_with(argv, &mut stdout.lock(), &mut stderr.lock())
}
