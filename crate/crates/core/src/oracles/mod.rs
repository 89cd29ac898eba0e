// SPDX-License-Identifier: Apache-2.0

//! Independent numerical references for the analytic dynamics: a stochastic
//! trajectory sampler of the phase-space Fokker–Planck equation and a
//! Dicke-basis integrator of the full two-mode master equation.

pub mod dicke;
pub mod sde;

pub use dicke::{dicke_evolve, dicke_phase_variance, DickePhase, DickeState};
pub use sde::{sample_paths, sde_sample, sde_sample_with_rates, SdeConfig, SdeMoments, Trajectory};
