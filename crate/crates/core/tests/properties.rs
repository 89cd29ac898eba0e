// SPDX-License-Identifier: Apache-2.0

use std::f64::consts::FRAC_PI_2;

use proptest::prelude::*;
use proptest::test_runner::{Config, RngSeed};

use cslbec::dynamics::characteristic::moments_from_characteristic;
use cslbec::dynamics::{characteristic, phase_variance_with_rates, Rates};
use cslbec::geometry::{factors, FactorPolicy};
use cslbec::inference::{lambda_bound_with, repetition_count, repetitions, BoundMode};
use cslbec::model::{
    validate, ExperimentSpec, InitialState, ModeGeometry, NoiseModel, Protocol, Species,
};
use cslbec::oracles::dicke::{dicke_evolve, DickeState};
use cslbec::oracles::sde::{sde_sample_with_rates, SdeConfig};

fn fixed(cases: u32) -> Config {
    Config {
        cases,
        rng_seed: RngSeed::Fixed(0x5eed),
        failure_persistence: None,
        ..Config::default()
    }
}

fn mode_strategy() -> impl Strategy<Value = BoundMode> {
    prop_oneof![Just(BoundMode::Mzi), Just(BoundMode::SwiPlain), Just(BoundMode::SwiEcho)]
}

#[allow(clippy::too_many_arguments)]
fn build(
    mode: BoundMode,
    n_exp: f64,
    xi0: f64,
    t: f64,
    zeta: f64,
    gamma: f64,
    length: f64,
    excess: f64,
) -> ExperimentSpec {
    let geometry = match mode {
        BoundMode::Mzi => ModeGeometry::mzi(100.0 * length, length),
        _ => ModeGeometry::swi(length),
    };
    let mut spec = ExperimentSpec {
        species: Species::rb87(),
        geometry,
        state: InitialState {
            n_atoms: 10f64.powf(n_exp).round() as u64,
            xi0,
            sigma_n0: None,
        },
        protocol: Protocol {
            t,
            zeta: if mode == BoundMode::Mzi { 0.0 } else { zeta },
            echo: mode == BoundMode::SwiEcho,
            phase_mean: 0.0,
            epsilon_over_hbar: None,
        },
        noise: NoiseModel { gamma },
        xi_t: 1.0,
    };
    let n = spec.state.n();
    let mut conv = xi0 * xi0 / n + 2.0 * gamma * t;
    if !spec.protocol.echo {
        let zt = spec.protocol.zeta * t;
        conv += zt * zt * spec.state.number_variance0();
    }
    spec.xi_t = (n * conv * (1.0 + excess)).sqrt();
    spec
}

fn spec_strategy() -> impl Strategy<Value = (ExperimentSpec, BoundMode, f64)> {
    (
        mode_strategy(),
        3.0..9.0f64,
        0.3..5.0f64,
        0.05..20.0f64,
        0.0..5.0f64,
        0.0..0.01f64,
        -7.3..-5.7f64,
        0.05..2.0f64,
        -9.0..-4.0f64,
    )
        .prop_map(|(mode, n, xi0, t, zeta, gamma, len, excess, rc)| {
            (build(mode, n, xi0, t, zeta, gamma, 10f64.powf(len), excess), mode, 10f64.powf(rc))
        })
}

proptest! {
    #![proptest_config(fixed(300))]

    #[test]
    fn bound_matches_direct_formula((spec, mode, rc) in spec_strategy()) {
        let policy = FactorPolicy::Closed;
        let f = factors(&spec.geometry, rc, policy).unwrap();
        let n = spec.state.n();
        let t = spec.protocol.t;
        let zt = spec.protocol.zeta * t;
        let m2 = spec.species.mass_amplification();
        let alpha = match mode {
            BoundMode::Mzi => 2.0 * m2 * t * f.f_p,
            BoundMode::SwiPlain => 2.0 * m2 * t * (f.f_p + n * n * zt * zt / 6.0 * f.f_s),
            BoundMode::SwiEcho => 2.0 * m2 * t * n * n * zt * zt / 24.0 * f.f_s,
        };
        prop_assume!(alpha > 0.0);
        let mut conv = spec.state.xi0.powi(2) / n + 2.0 * spec.noise.gamma * t;
        if !spec.protocol.echo {
            conv += zt * zt * spec.state.number_variance0();
        }
        let direct = (spec.xi_t * spec.xi_t / n - conv) / alpha;
        let b = lambda_bound_with(&spec, rc, mode, policy).unwrap();
        prop_assert!((b / direct - 1.0).abs() <= 1e-12, "{b:e} vs {direct:e}");
    }

    #[test]
    fn spec_json_round_trip((spec, _mode, _rc) in spec_strategy()) {
        prop_assert!(validate(&spec).is_valid());
        let back = ExperimentSpec::from_json(&spec.to_json().unwrap()).unwrap();
        prop_assert_eq!(back, spec);
    }
}

proptest! {
    #![proptest_config(fixed(200))]

    #[test]
    fn repetition_count_monotone(c in 0.0..50.0f64, dc in 0.0..10.0f64, d in 0.01..0.5f64, dd in 0.0..0.2f64) {
        prop_assert!(repetition_count(c + dc, d) >= repetition_count(c, d));
        prop_assert!(repetition_count(c, d + dd) <= repetition_count(c, d));
    }

    #[test]
    fn inflated_count_ratio((spec, mode, rc) in spec_strategy(), d in 0.02..0.3f64) {
        let Ok(e) = repetitions(&spec, rc, mode, FactorPolicy::Closed, Some(1e-12), d) else {
            return Ok(());
        };
        prop_assert!(e.k_inflated >= e.k);
        prop_assume!(e.conventional_ratio < 1e6);
        let c = e.conventional_ratio;
        let expected = ((1.0 + 1.5 * c) / (1.0 + c)).powi(2);
        let ratio = e.k_inflated as f64 / e.k as f64;
        prop_assert!((ratio / expected - 1.0).abs() <= 2.0 / e.k as f64 + 1e-12, "{ratio} vs {expected}");
    }

    #[test]
    fn characteristic_second_moment(
        (spec, _mode, _rc) in spec_strategy(),
        gp in 0.0..0.5f64,
        gs in 0.0..1e-12f64,
    ) {
        // χ covers the stochastic model only; the additive 2γt term is not in it.
        let mut spec = spec;
        spec.noise.gamma = 0.0;
        let rates = Rates { gamma_p: gp, gamma_s: gs };
        let v = phase_variance_with_rates(&spec, &rates).variance;
        let chi = characteristic(&spec, &rates);
        let (_, var) = moments_from_characteristic(|s| chi.eval(s, 0.0), 0.1 / v.sqrt());
        prop_assert!((var / v - 1.0).abs() <= 1e-10, "{var:e} vs {v:e}");
        prop_assert!((chi.phase_variance() / v - 1.0).abs() <= 1e-12);
    }
}

proptest! {
    #![proptest_config(fixed(20))]

    #[test]
    fn sde_variance_unbiased(
        n_exp in 2.0..4.0f64,
        t in 0.1..2.0f64,
        zeta in 0.0..0.05f64,
        gp in 0.0..0.1f64,
        gs_scale in 0.0..1.0f64,
        echo in any::<bool>(),
        seed in any::<u64>(),
    ) {
        let mut spec = build(BoundMode::SwiPlain, n_exp, 1.0, t, zeta, 0.0, 1e-7, 0.5);
        spec.protocol.echo = echo;
        let n = spec.state.n();
        let rates = Rates { gamma_p: gp, gamma_s: gs_scale / (n * n * t) };
        let analytic = phase_variance_with_rates(&spec, &rates).variance;
        let cfg = SdeConfig { n_traj: 20_000, n_steps: 1_000, seed };
        let mc = sde_sample_with_rates(&spec, &rates, &cfg).unwrap();
        let z = mc.z_score(analytic);
        prop_assert!(z.abs() <= 2.576, "z = {z}, analytic {analytic:e}, mc {:e}", mc.moments.variance);
    }

    #[test]
    fn dicke_stays_physical(
        n in 2usize..24,
        gp in 0.0..0.5f64,
        gs in 0.0..0.5f64,
        zeta in -0.5..0.5f64,
        eps in 0.0..5.0f64,
        theta in 0.2..3.0f64,
    ) {
        let css = DickeState::coherent(n, theta, 0.3).unwrap();
        let rates = Rates { gamma_p: gp, gamma_s: gs };
        let out = dicke_evolve(n, &rates, zeta, eps, &css, 1.0, 400).unwrap();
        prop_assert!((out.trace() - 1.0).abs() <= 1e-9);
        prop_assert!(out.hermiticity_defect() <= 1e-10);
        prop_assert!(out.min_eigenvalue() >= -1e-8);
    }
}

#[test]
fn css_contrast_unaffected_by_pure_rotation() {
    let css = DickeState::coherent(30, FRAC_PI_2, 0.0).unwrap();
    let out = dicke_evolve(30, &Rates { gamma_p: 0.0, gamma_s: 0.0 }, 0.0, 2.0, &css, 1.0, 200).unwrap();
    assert!((out.transverse_contrast() / css.transverse_contrast() - 1.0).abs() < 1e-10);
}
