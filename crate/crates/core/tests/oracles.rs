// SPDX-License-Identifier: Apache-2.0

use std::f64::consts::FRAC_PI_2;

use cslbec::dynamics::{phase_variance_with_rates, Rates};
use cslbec::model::{ExperimentSpec, InitialState, ModeGeometry, NoiseModel, Protocol, Species};
use cslbec::oracles::dicke::{dicke_evolve, dicke_phase_variance, DickeState};
use cslbec::oracles::sde::{sde_sample_with_rates, SdeConfig};

fn small_spec(n_atoms: u64, zeta: f64, echo: bool) -> ExperimentSpec {
    ExperimentSpec {
        species: Species::rb87(),
        geometry: ModeGeometry::swi(100e-9),
        state: InitialState {
            n_atoms,
            xi0: 1.0,
            sigma_n0: None,
        },
        protocol: Protocol {
            t: 1.0,
            zeta,
            echo,
            phase_mean: 0.0,
            epsilon_over_hbar: Some(1e3),
        },
        noise: NoiseModel::default(),
        xi_t: 1.0,
    }
}

fn three_way(echo: bool) {
    let n = 100;
    let zeta = 0.005;
    let spec = small_spec(n as u64, zeta, echo);
    let rates = Rates { gamma_p: 0.01, gamma_s: 1e-3 };
    let analytic = phase_variance_with_rates(&spec, &rates).variance;

    let cfg = SdeConfig {
        n_traj: 100_000,
        n_steps: 1_000,
        seed: 3,
    };
    let mc = sde_sample_with_rates(&spec, &rates, &cfg).unwrap().moments.variance;

    let css = DickeState::coherent(n, FRAC_PI_2, 0.0).unwrap();
    let eps = 1e3;
    let out = if echo {
        let half = dicke_evolve(n, &rates, zeta, eps, &css, 0.5, 5_000).unwrap();
        dicke_evolve(n, &rates, -zeta, eps, &half, 0.5, 5_000).unwrap()
    } else {
        dicke_evolve(n, &rates, zeta, eps, &css, 1.0, 10_000).unwrap()
    };
    let dicke = dicke_phase_variance(&out).unwrap();
    assert!(dicke.reliable);
    let dv = dicke.moments.variance;

    for (name, v) in [("sde", mc), ("dicke", dv)] {
        assert!((v / analytic - 1.0).abs() < 0.05, "{name}: {v:e} vs analytic {analytic:e}");
    }
    assert!((mc / dv - 1.0).abs() < 0.05, "sde {mc:e} vs dicke {dv:e}");
}

#[test]
fn oracles_agree_at_one_hundred_atoms() {
    three_way(false);
}

#[test]
fn oracles_agree_at_one_hundred_atoms_with_echo() {
    three_way(true);
}
