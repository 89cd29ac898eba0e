// SPDX-License-Identifier: Apache-2.0

//! Acceptance suite. Prints one PASS/FAIL line per criterion and exits
//! non-zero if any criterion fails.

use std::f64::consts::FRAC_PI_2;
use std::time::{Duration, Instant};

use num_complex::Complex64;

use cslbec::dynamics::characteristic::{echo_closed_form, echo_closed_form_correlated, evolve_segment};
use cslbec::dynamics::{phase_variance_with_rates, rates_with, GaussianCharacteristic, Rates};
use cslbec::geometry::{analytic_optimal_rc, f_quadrature, f_closed, optimal_rc, overlap, FactorPolicy};
use cslbec::inference::{
    calibrate_estimator, exclusion_curve, lambda_bound_with, scenario, table1, RcGrid,
};
use cslbec::model::{CslPoint, ModeGeometry};
use cslbec::oracles::dicke::{dicke_evolve, DickeState};
use cslbec::oracles::sde::{sde_sample_with_rates, SdeConfig};
use cslbec::Result;

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(checks: &[(bool, String)]) -> Outcome {
    Outcome {
        pass: checks.iter().all(|c| c.0),
        detail: checks
            .iter()
            .map(|(ok, s)| format!("{}{}", if *ok { "" } else { "!! " }, s))
            .collect::<Vec<_>>()
            .join("; "),
    }
}

fn timed(limit: Duration, f: impl FnOnce() -> Result<Vec<(bool, String)>>) -> Outcome {
    let start = Instant::now();
    let mut checks = match f() {
        Ok(c) => c,
        Err(e) => vec![(false, format!("error: {e}"))],
    };
    let took = start.elapsed();
    checks.push((took < limit, format!("runtime {:.2} s < {} s", took.as_secs_f64(), limit.as_secs())));
    outcome(&checks)
}

fn rel(a: f64, b: f64) -> f64 {
    (a / b - 1.0).abs()
}

fn table_reproduction() -> Result<Vec<(bool, String)>> {
    let expected = [(2086u64, 3775u64), (3381, 6423), (1033, 1692), (3065, 5771)];
    let rows = table1(0.1)?;
    Ok(rows
        .iter()
        .zip(expected)
        .map(|(r, (k, k15))| {
            let ok = rel(r.estimate.k as f64, k as f64) <= 0.03 && rel(r.estimate.k_inflated as f64, k15 as f64) <= 0.03;
            (ok, format!("{} k={} ({k}) k1.5={} ({k15})", r.scenario, r.estimate.k, r.estimate.k_inflated))
        })
        .collect())
}

fn geometry_oracle() -> Result<Vec<(bool, String)>> {
    let mut checks = Vec::new();
    let cases = [
        ("mzi 10um/100nm", ModeGeometry::mzi(10e-6, 100e-9), 1e-9, 1e-3),
        ("swi 100nm", ModeGeometry::swi(100e-9), 1e-9, 1e-5),
        ("swi 0.5um", ModeGeometry::swi(0.5e-6), 5e-9, 5e-5),
    ];
    for (name, g, lo, hi) in cases {
        let w = overlap(&g);
        let mut worst = 0.0f64;
        for rc in RcGrid::new(lo, hi, 50, true)?.values() {
            let c = f_closed(&g, rc)?;
            let q = f_quadrature(&w, rc)?.factors;
            worst = worst.max(rel(q.f_p, c.f_p));
            if c.f_s != 0.0 || q.f_s != 0.0 {
                worst = worst.max(rel(q.f_s, c.f_s));
            }
        }
        checks.push((worst <= 1e-6, format!("{name} closed vs quadrature max rel {worst:.1e}")));
    }
    for x0 in [100e-9, 0.5e-6] {
        let g = ModeGeometry::swi(x0);
        let found = optimal_rc(&g)?;
        let exact = (2.0f64 / 3.0).sqrt() * x0;
        let d = rel(found, exact);
        checks.push((d <= 1e-4, format!("optimum x0={x0:e}: rel {d:.1e}")));
        let f = f_closed(&g, analytic_optimal_rc(x0))?;
        let dr = rel(f.f_s / f.f_p, 120.0 / 27.0);
        checks.push((dr <= 1e-9, format!("f_s/f_p at optimum rel {dr:.1e}")));
    }
    Ok(checks)
}

fn echo_algebra() -> Result<Vec<(bool, String)>> {
    let s = scenario("rb-swi-echo")?;
    let spec = s.spec.clone();
    let rc = analytic_optimal_rc(100e-9);
    let rates = rates_with(&CslPoint::new(1e-16, rc)?, &spec.species, &spec.geometry, FactorPolicy::Closed)?;
    let n = spec.state.n();
    let (z, t) = (spec.protocol.zeta, spec.protocol.t);

    let chi0 = GaussianCharacteristic::initial(&spec.state, spec.protocol.phase_mean);
    let half = evolve_segment(move |s, q| chi0.eval(s, q), rates, n, z, 0.5 * t);
    let composed = evolve_segment(half, rates, n, -z, 0.5 * t);

    let s_max = 2.0 / spec.state.phase_variance0().sqrt();
    let q_max = 2.0 / spec.state.sigma_n0();
    let axis = |m: f64, i: usize| -m + 2.0 * m * i as f64 / 19.0;
    let (mut reference, mut corrected, mut marginal) = (0.0f64, 0.0f64, 0.0f64);
    for i in 0..20 {
        let sv = axis(s_max, i);
        let c0: Complex64 = composed(sv, 0.0);
        marginal = marginal.max((c0 - echo_closed_form(&spec, &rates, sv, 0.0)).norm());
        for j in 0..20 {
            let qv = axis(q_max, j);
            let c = composed(sv, qv);
            reference = reference.max((c - echo_closed_form(&spec, &rates, sv, qv)).norm());
            corrected = corrected.max((c - echo_closed_form_correlated(&spec, &rates, sv, qv)).norm());
        }
    }

    let r = Rates { gamma_p: 0.0, gamma_s: rates.gamma_s };
    let mut plain = spec.clone();
    plain.protocol.echo = false;
    plain.state.sigma_n0 = Some(0.0);
    let mut echo = plain.clone();
    echo.protocol.echo = true;
    let base = plain.state.phase_variance0();
    let ratio = (phase_variance_with_rates(&plain, &r).variance - base)
        / (phase_variance_with_rates(&echo, &r).variance - base);

    let dephase_only = Rates { gamma_p: 1e-3, gamma_s: 0.0 };
    let v = phase_variance_with_rates(&spec, &dephase_only).variance;
    let cancelled = spec.state.phase_variance0() + 1e-3 * t;

    Ok(vec![
        (reference <= 1e-12, format!("composition vs reference echo form max |dev| {reference:.2e}")),
        (corrected <= 1e-12, format!("vs correlated form {corrected:.1e}")),
        (marginal <= 1e-12, format!("q=0 marginal {marginal:.1e}")),
        ((ratio - 4.0).abs() <= 1e-12, format!("plain/echo diffusion ratio {ratio}")),
        (v == cancelled, format!("dispersion cancelled at Gamma_S=0: {:.1e}", v - cancelled)),
    ])
}

fn stochastic_oracle() -> Result<Vec<(bool, String)>> {
    let s = scenario("rb-swi")?;
    let rc = s.rc()?;
    let rates = rates_with(&CslPoint::new(1e-10, rc)?, &s.spec.species, &s.spec.geometry, s.policy)?;
    let analytic = phase_variance_with_rates(&s.spec, &rates).variance;
    let cfg = SdeConfig {
        n_traj: 100_000,
        n_steps: 2_000,
        seed: 42,
    };
    let mc = sde_sample_with_rates(&s.spec, &rates, &cfg)?;
    let z = mc.z_score(analytic);
    Ok(vec![(
        z.abs() <= 3.0,
        format!(
            "analytic {analytic:.6e} mc {:.6e} +- {:.1e} (z = {z:.2})",
            mc.moments.variance, mc.stderr_variance
        ),
    )])
}

fn master_equation_oracle() -> Result<Vec<(bool, String)>> {
    let n = 40;
    let css = DickeState::coherent(n, FRAC_PI_2, 0.0)?;

    let dephase = Rates { gamma_p: 0.2, gamma_s: 0.0 };
    let out = dicke_evolve(n, &dephase, 0.0, 0.0, &css, 1.0, 1_000)?;
    let decay = out.transverse_contrast() / css.transverse_contrast();
    let d1 = (decay - (-0.1f64).exp()).abs();
    let tr1 = (out.trace() - 1.0).abs();

    let (gamma_s, t) = (1e-3, 1.0);
    let eps = 1e3 * f64::max(gamma_s, 1.0 / t);
    let diffuse = Rates { gamma_p: 0.0, gamma_s };
    let out = dicke_evolve(n, &diffuse, 0.0, eps, &css, t, 20_000)?;
    let growth = out.number_variance() - css.number_variance();
    let expected = (n * n) as f64 * gamma_s * t / 2.0;
    let d2 = rel(growth, expected);
    let tr2 = (out.trace() - 1.0).abs();

    Ok(vec![
        (d1 <= 1e-3, format!("contrast decay {decay:.6} vs e^-0.1, |dev| {d1:.1e}")),
        (d2 <= 0.05, format!("sigma_n^2 growth {growth:.4} vs {expected} (rel {d2:.3}, eps/hbar = {eps})")),
        (tr1 <= 1e-9 && tr2 <= 1e-9, format!("trace drift {:.1e}", tr1.max(tr2))),
    ])
}

fn bound_formulas() -> Result<Vec<(bool, String)>> {
    let mut checks = Vec::new();

    let s = scenario("rb-mzi")?;
    let sp = &s.spec;
    let b = lambda_bound_with(sp, s.rc()?, s.mode, FactorPolicy::CapOne)?;
    let m = 86.909_180f64;
    let (n, t) = (3e5f64, 0.8f64);
    let brute = 1.0 / (m * m) / (2.0 * n * t) * (1.1f64.powi(2) - 0.9f64.powi(2)) / 1.0;
    checks.push((rel(b, brute) <= 1e-9, format!("Rb MZI {b:.6e} vs direct {brute:.6e}")));
    checks.push((rel(b, 1.103e-10) <= 5e-4, "matches 1.103e-10 to 4 digits".to_string()));

    let s = scenario("rb-swi-echo")?;
    let sp = &s.spec;
    let b = lambda_bound_with(sp, s.rc()?, s.mode, s.policy)?;
    let (n, t, z) = (5e4f64, 0.2f64, 4.0f64);
    let f_s = (288.0f64 / 625.0).sqrt() / 2.0;
    let brute = 12.0 / (m * m) / (n.powi(3) * t.powi(3) * z * z) * (1.15f64.powi(2) - 1.0) / f_s;
    checks.push((rel(b, brute) <= 1e-9, format!("echo SWI {b:.6e} vs direct {brute:.6e}")));
    checks.push((rel(b, 0.94e-16) <= 0.01, "matches 0.94e-16".to_string()));

    let grid = RcGrid::new(1e-9, 1e-3, 200, true)?.values();
    for (name, decade) in [("rb-mzi", -10.0), ("rb-swi-echo", -16.0)] {
        let s = scenario(name)?;
        let c = exclusion_curve(&s.spec, s.mode, s.policy, &grid, name);
        let (rc, min) = c.minimum().unwrap_or((f64::NAN, f64::NAN));
        checks.push((
            min.log10().round() == decade,
            format!("{name} curve minimum {min:.3e} Hz at {rc:.3e} m"),
        ));
    }
    Ok(checks)
}

fn estimator_calibration() -> Result<Vec<(bool, String)>> {
    let s = scenario("rb-mzi")?;
    let rc = s.rc()?;
    let delta = 0.1;
    let r = calibrate_estimator(&s.spec, rc, s.mode, s.policy, 1e-10, 2086, 500, 42)?;
    let spread = r.relative_spread / delta;

    let a = calibrate_estimator(&s.spec, rc, s.mode, s.policy, 1e-10, 2086, 2000, 43)?;
    let b = calibrate_estimator(&s.spec, rc, s.mode, s.policy, 1e-10, 4172, 2000, 44)?;
    let scaling = a.spread_hz / b.spread_hz / 2f64.sqrt();
    Ok(vec![
        (
            (0.9..=1.3).contains(&spread),
            format!("relative spread {:.4} = {spread:.3} delta (CR floor ratio {:.3})", r.relative_spread, r.efficiency_ratio),
        ),
        ((scaling - 1.0).abs() <= 0.1, format!("doubling k: spread ratio / sqrt2 = {scaling:.3}")),
    ])
}

fn main() {
    let criteria: Vec<(&str, Outcome)> = vec![
        ("1 table reproduction", timed(Duration::from_secs(1), table_reproduction)),
        ("2 geometry oracle", timed(Duration::from_secs(10), geometry_oracle)),
        ("3 echo algebra", outcome(&echo_algebra().unwrap_or_else(|e| vec![(false, e.to_string())]))),
        ("4 stochastic oracle", timed(Duration::from_secs(60), stochastic_oracle)),
        ("5 master-equation oracle", timed(Duration::from_secs(120), master_equation_oracle)),
        ("6 bound formulas", outcome(&bound_formulas().unwrap_or_else(|e| vec![(false, e.to_string())]))),
        ("7 estimator calibration", timed(Duration::from_secs(300), estimator_calibration)),
    ];
    let mut failed = 0;
    for (name, o) in &criteria {
        if !o.pass {
            failed += 1;
        }
        println!("criterion {name}: {} | {}", if o.pass { "PASS" } else { "FAIL" }, o.detail);
    }
    println!("acceptance: {} of {} criteria pass", criteria.len() - failed, criteria.len());
    if failed > 0 {
        std::process::exit(1);
    }
}
