// SPDX-License-Identifier: Apache-2.0

//! Collapse-model (CSL) sensitivity of two-mode BEC interferometers.
//!
//! The crate computes how continuous spontaneous localization broadens the
//! phase distribution of a split condensate, for a Mach–Zehnder geometry with
//! separated modes and a single-well geometry with overlapping harmonic modes.
//! From the forward model it derives exclusion bounds λ(r_C) and the number of
//! experimental repetitions a conclusive test needs.
//!
//! Module map:
//!
//! - [`model`]: shared domain types, physical constants, spec validation
//! - [`geometry`]: overlap matrices and the geometry factors f_P, f_S
//! - [`dynamics`]: analytic phase-space evolution and observables
//! - [`oracles`]: stochastic trajectories and a Dicke-basis master equation
//! - [`inference`]: bounds, exclusion curves, Fisher information, repetitions
//! - [`cli`]: command-line front end

pub mod cli;
pub mod dynamics;
pub mod error;
pub mod geometry;
pub mod inference;
pub mod model;
pub mod numerics;
pub mod oracles;

pub use error::{Error, Result};
