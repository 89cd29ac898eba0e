// SPDX-License-Identifier: Apache-2.0

//! Built-in proposed setups.
//!
//! | name        | N     | ξ₀  | t     | λ_min    | geometry                |
//! |-------------|-------|-----|-------|----------|-------------------------|
//! | rb-mzi      | 3e5   | 0.9 | 0.8 s | 1e-10 Hz | Δx = 10 µm, w = 100 nm  |
//! | rb-swi      | 3e5   | 5   | 0.5 s | 1e-10 Hz | x0 = 0.5 µm, ζ = 6 mHz  |
//! | cs-mzi      | 1e9   | 0.3 | 20 s  | 1e-16 Hz | Δx = 10 µm, w = 100 nm  |
//! | rb-swi-echo | 5e4   | 1   | 0.2 s | 1e-16 Hz | x0 = 100 nm, ζ = 4 Hz   |

use crate::error::{Error, Result};
use crate::geometry::{most_sensitive_rc, FactorPolicy};
use crate::model::{ExperimentSpec, InitialState, ModeGeometry, NoiseModel, Protocol, Species};

use super::{repetitions, BoundMode, RepetitionEstimate};

#[derive(Debug, Clone, PartialEq)]
pub struct Scenario {
    pub name: &'static str,
    pub label: &'static str,
    pub spec: ExperimentSpec,
    pub mode: BoundMode,
    /// Default f_P treatment; MZI rows use the unit plateau.
    pub policy: FactorPolicy,
    pub lambda_min: f64,
}

impl Scenario {
    /// r_C of maximal sensitivity for this geometry.
    pub fn rc(&self) -> Result<f64> {
        most_sensitive_rc(&self.spec.geometry)
    }
}

#[allow(clippy::too_many_arguments)]
fn spec(
    species: Species,
    geometry: ModeGeometry,
    n_atoms: u64,
    xi0: f64,
    t: f64,
    zeta: f64,
    echo: bool,
    xi_t: f64,
) -> ExperimentSpec {
    ExperimentSpec {
        species,
        geometry,
        state: InitialState {
            n_atoms,
            xi0,
            sigma_n0: None,
        },
        protocol: Protocol {
            t,
            zeta,
            echo,
            phase_mean: 0.0,
            epsilon_over_hbar: None,
        },
        noise: NoiseModel::default(),
        xi_t,
    }
}

/// All four built-ins, in table order.
pub fn scenarios() -> Vec<Scenario> {
    let mzi = ModeGeometry::mzi(10e-6, 100e-9);
    vec![
        Scenario {
            name: "rb-mzi",
            label: "Rb MZI",
            spec: spec(Species::rb87(), mzi, 300_000, 0.9, 0.8, 0.0, false, 1.1),
            mode: BoundMode::Mzi,
            policy: FactorPolicy::CapOne,
            lambda_min: 1e-10,
        },
        Scenario {
            name: "rb-swi",
            label: "Rb SWI",
            spec: spec(Species::rb87(), ModeGeometry::swi(0.5e-6), 300_000, 5.0, 0.5, 6e-3, false, 200.0),
            mode: BoundMode::SwiPlain,
            policy: FactorPolicy::Closed,
            lambda_min: 1e-10,
        },
        Scenario {
            name: "cs-mzi",
            label: "Cs MZI",
            spec: spec(Species::cs133(), mzi, 1_000_000_000, 0.3, 20.0, 0.0, false, 1.3 * 0.3),
            mode: BoundMode::Mzi,
            policy: FactorPolicy::CapOne,
            lambda_min: 1e-16,
        },
        Scenario {
            name: "rb-swi-echo",
            label: "Rb SWI echo",
            spec: spec(Species::rb87(), ModeGeometry::swi(100e-9), 50_000, 1.0, 0.2, 4.0, true, 1.15),
            mode: BoundMode::SwiEcho,
            policy: FactorPolicy::Closed,
            lambda_min: 1e-16,
        },
    ]
}

pub fn scenario(name: &str) -> Result<Scenario> {
    scenarios().into_iter().find(|s| s.name == name).ok_or_else(|| {
        let known: Vec<&str> = scenarios().iter().map(|s| s.name).collect();
        Error::Config(format!("unknown scenario '{name}' (known: {})", known.join(", ")))
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct TableRow {
    pub scenario: &'static str,
    pub label: &'static str,
    pub n_atoms: u64,
    pub xi0: f64,
    pub t: f64,
    pub rc: f64,
    pub estimate: RepetitionEstimate,
}

/// Repetition counts for every built-in at its most sensitive r_C.
pub fn table1(delta: f64) -> Result<Vec<TableRow>> {
    table1_with(delta, None)
}

/// As [`table1`], optionally forcing one f_P policy on all rows.
pub fn table1_with(delta: f64, policy: Option<FactorPolicy>) -> Result<Vec<TableRow>> {
    scenarios()
        .into_iter()
        .map(|s| {
            let rc = s.rc()?;
            let policy = policy.unwrap_or(s.policy);
            let estimate = repetitions(&s.spec, rc, s.mode, policy, Some(s.lambda_min), delta)?;
            Ok(TableRow {
                scenario: s.name,
                label: s.label,
                n_atoms: s.spec.state.n_atoms,
                xi0: s.spec.state.xi0,
                t: s.spec.protocol.t,
                rc,
                estimate,
            })
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::validate;

    #[test]
    fn registry_specs_are_valid() {
        for s in scenarios() {
            let v = validate(&s.spec);
            assert!(v.is_valid(), "{}: {:?}", s.name, v.violations);
            assert_eq!(BoundMode::for_spec(&s.spec), s.mode);
        }
        assert!(scenario("rb-mzi").is_ok());
        assert!(scenario("xx").is_err());
    }

    #[test]
    fn table_rows_within_tolerance() {
        let rows = table1(0.1).unwrap();
        let expected = [(2086, 3775), (3381, 6423), (1033, 1692), (3065, 5771)];
        for (row, (k, k15)) in rows.iter().zip(expected) {
            let dk = (row.estimate.k as f64 / k as f64 - 1.0).abs();
            let dk15 = (row.estimate.k_inflated as f64 / k15 as f64 - 1.0).abs();
            assert!(dk < 0.03 && dk15 < 0.03, "{}: {:?}", row.scenario, row.estimate);
        }
    }
}
