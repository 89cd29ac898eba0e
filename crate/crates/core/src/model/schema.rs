// SPDX-License-Identifier: Apache-2.0

//! On-disk JSON layout of an experiment spec.
//!
//! Field names carry their unit as a suffix. Unknown keys are rejected
//! everywhere so a misspelled or mis-united field never falls back to a
//! default.

use serde::{Deserialize, Serialize};

use super::{ExperimentSpec, InitialState, ModeGeometry, NoiseModel, Protocol, Species};

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SpecFile {
    pub species: SpeciesFile,
    pub geometry: GeometryFile,
    pub state: StateFile,
    pub protocol: ProtocolFile,
    pub noise: NoiseFile,
    pub observation: ObservationFile,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SpeciesFile {
    pub name: String,
    pub mass_u: f64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(tag = "type", deny_unknown_fields)]
pub enum GeometryFile {
    #[serde(rename = "mzi")]
    Mzi {
        delta_x_m: f64,
        w_x_m: f64,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        w_y_m: Option<f64>,
    },
    #[serde(rename = "swi")]
    Swi {
        x0_m: f64,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        w_y_m: Option<f64>,
    },
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct StateFile {
    pub n_atoms: u64,
    pub xi0: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sigma_n0: Option<f64>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ProtocolFile {
    pub t_s: f64,
    pub zeta_rad_s: f64,
    pub echo: bool,
    pub phase_mean_rad: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub epsilon_over_hbar_rad_s: Option<f64>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NoiseFile {
    pub gamma_hz: f64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ObservationFile {
    pub xi_t: f64,
}

impl From<SpecFile> for ExperimentSpec {
    fn from(f: SpecFile) -> Self {
        ExperimentSpec {
            species: Species {
                name: f.species.name,
                mass_u: f.species.mass_u,
            },
            geometry: match f.geometry {
                GeometryFile::Mzi {
                    delta_x_m,
                    w_x_m,
                    w_y_m,
                } => ModeGeometry::Mzi {
                    delta_x: delta_x_m,
                    w_x: w_x_m,
                    w_y: w_y_m,
                },
                GeometryFile::Swi { x0_m, w_y_m } => ModeGeometry::Swi {
                    x0: x0_m,
                    w_y: w_y_m,
                },
            },
            state: InitialState {
                n_atoms: f.state.n_atoms,
                xi0: f.state.xi0,
                sigma_n0: f.state.sigma_n0,
            },
            protocol: Protocol {
                t: f.protocol.t_s,
                zeta: f.protocol.zeta_rad_s,
                echo: f.protocol.echo,
                phase_mean: f.protocol.phase_mean_rad,
                epsilon_over_hbar: f.protocol.epsilon_over_hbar_rad_s,
            },
            noise: NoiseModel {
                gamma: f.noise.gamma_hz,
            },
            xi_t: f.observation.xi_t,
        }
    }
}

impl From<ExperimentSpec> for SpecFile {
    fn from(s: ExperimentSpec) -> Self {
        SpecFile {
            species: SpeciesFile {
                name: s.species.name,
                mass_u: s.species.mass_u,
            },
            geometry: match s.geometry {
                ModeGeometry::Mzi { delta_x, w_x, w_y } => GeometryFile::Mzi {
                    delta_x_m: delta_x,
                    w_x_m: w_x,
                    w_y_m: w_y,
                },
                ModeGeometry::Swi { x0, w_y } => GeometryFile::Swi {
                    x0_m: x0,
                    w_y_m: w_y,
                },
            },
            state: StateFile {
                n_atoms: s.state.n_atoms,
                xi0: s.state.xi0,
                sigma_n0: s.state.sigma_n0,
            },
            protocol: ProtocolFile {
                t_s: s.protocol.t,
                zeta_rad_s: s.protocol.zeta,
                echo: s.protocol.echo,
                phase_mean_rad: s.protocol.phase_mean,
                epsilon_over_hbar_rad_s: s.protocol.epsilon_over_hbar,
            },
            noise: NoiseFile {
                gamma_hz: s.noise.gamma,
            },
            observation: ObservationFile { xi_t: s.xi_t },
        }
    }
}
