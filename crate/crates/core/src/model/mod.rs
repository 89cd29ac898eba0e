// SPDX-License-Identifier: Apache-2.0

//! Domain types shared by every other module.
//!
//! Units are SI throughout: lengths in metres, times in seconds, angles in
//! radians, rates in Hz. The collapse rate λ is referenced to a mass of 1 u.

pub mod constants;
pub mod schema;

use std::f64::consts::PI;
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use constants::{ATOMIC_MASS_UNIT, CS133_MASS_U, HBAR, RB87_MASS_U};

/// A point (λ, r_C) of the CSL parameter plane.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CslPoint {
    /// Collapse rate for the 1 u reference mass, Hz.
    pub lambda: f64,
    /// Localization length, m.
    pub rc: f64,
}

impl CslPoint {
    pub fn new(lambda: f64, rc: f64) -> Result<Self> {
        let p = CslPoint { lambda, rc };
        let v = p.violations();
        if v.is_empty() {
            Ok(p)
        } else {
            Err(Error::Invalid(v))
        }
    }

    pub fn violations(&self) -> Vec<Violation> {
        let mut v = Vec::new();
        if !(self.lambda >= 0.0) || !self.lambda.is_finite() {
            v.push(Violation::new("lambda", "lambda must be non-negative"));
        }
        if !(self.rc > 0.0) || !self.rc.is_finite() {
            v.push(Violation::new("rc", "rc must be positive"));
        }
        v
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Species {
    pub name: String,
    /// Atomic mass in u.
    pub mass_u: f64,
}

impl Species {
    pub fn rb87() -> Self {
        Species {
            name: "Rb-87".into(),
            mass_u: RB87_MASS_U,
        }
    }

    pub fn cs133() -> Self {
        Species {
            name: "Cs-133".into(),
            mass_u: CS133_MASS_U,
        }
    }

    /// Mass amplification (m/u)² of the collapse rate.
    pub fn mass_amplification(&self) -> f64 {
        self.mass_u * self.mass_u
    }

    pub fn mass_kg(&self) -> f64 {
        self.mass_u * ATOMIC_MASS_UNIT
    }
}

/// Spatial shape of the two interfering modes.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ModeGeometry {
    /// Two identical Gaussian modes displaced by `delta_x` along x.
    Mzi {
        delta_x: f64,
        w_x: f64,
        /// Defaults to `w_x`.
        w_y: Option<f64>,
    },
    /// Ground and first excited state of a harmonic well along x, Gaussian
    /// along y.
    Swi {
        x0: f64,
        /// Defaults to `x0 / √6` (y-trap frequency six times the x one).
        w_y: Option<f64>,
    },
}

impl ModeGeometry {
    pub fn mzi(delta_x: f64, w_x: f64) -> Self {
        ModeGeometry::Mzi {
            delta_x,
            w_x,
            w_y: None,
        }
    }

    pub fn swi(x0: f64) -> Self {
        ModeGeometry::Swi { x0, w_y: None }
    }

    /// The y width with its default applied.
    pub fn w_y(&self) -> f64 {
        match *self {
            ModeGeometry::Mzi { w_x, w_y, .. } => w_y.unwrap_or(w_x),
            ModeGeometry::Swi { x0, w_y } => w_y.unwrap_or(x0 / 6f64.sqrt()),
        }
    }

    pub fn is_mzi(&self) -> bool {
        matches!(self, ModeGeometry::Mzi { .. })
    }

    fn with_defaults(self) -> Self {
        let w_y = Some(self.w_y());
        match self {
            ModeGeometry::Mzi { delta_x, w_x, .. } => ModeGeometry::Mzi { delta_x, w_x, w_y },
            ModeGeometry::Swi { x0, .. } => ModeGeometry::Swi { x0, w_y },
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct InitialState {
    pub n_atoms: u64,
    /// Phase squeezing ξ₀, with σ²_φ(0) = ξ₀²/N.
    pub xi0: f64,
    /// Number-difference spread σ_n(0). Defaults to the minimum-uncertainty
    /// value √N/ξ₀.
    pub sigma_n0: Option<f64>,
}

impl InitialState {
    pub fn n(&self) -> f64 {
        self.n_atoms as f64
    }

    pub fn sigma_n0(&self) -> f64 {
        self.sigma_n0.unwrap_or_else(|| self.n().sqrt() / self.xi0)
    }

    pub fn number_variance0(&self) -> f64 {
        let s = self.sigma_n0();
        s * s
    }

    /// σ²_φ(0) = ξ₀²/N.
    pub fn phase_variance0(&self) -> f64 {
        self.xi0 * self.xi0 / self.n()
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Protocol {
    /// Interrogation time, s.
    pub t: f64,
    /// Interaction dispersion ζ, rad/s.
    pub zeta: f64,
    /// Flip ζ → −ζ at t/2.
    pub echo: bool,
    /// Mean interferometric phase φ̄, rad.
    pub phase_mean: f64,
    /// Mode splitting ε/ħ, rad/s. Only the master-equation oracle reads it.
    pub epsilon_over_hbar: Option<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct NoiseModel {
    /// Conventional decoherence rate γ with visibility exp(−γt), Hz.
    pub gamma: f64,
}

/// One interferometric scenario.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(from = "schema::SpecFile", into = "schema::SpecFile")]
pub struct ExperimentSpec {
    pub species: Species,
    pub geometry: ModeGeometry,
    pub state: InitialState,
    pub protocol: Protocol,
    pub noise: NoiseModel,
    /// Observed (or assumed) effective squeezing ξ_t = √(N σ²_φ(t)).
    pub xi_t: f64,
}

impl ExperimentSpec {
    /// Validates and returns the spec with defaults filled in.
    pub fn validated(&self) -> Result<ExperimentSpec> {
        let report = validate(self);
        if report.violations.is_empty() {
            Ok(report.spec)
        } else {
            Err(Error::Invalid(report.violations))
        }
    }

    pub fn from_json(text: &str) -> Result<ExperimentSpec> {
        Ok(serde_json::from_str(text)?)
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }
}

/// A violated invariant.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Violation {
    pub field: &'static str,
    pub message: String,
}

impl Violation {
    pub fn new(field: &'static str, message: impl Into<String>) -> Self {
        Violation {
            field,
            message: message.into(),
        }
    }
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}: {}", self.field, self.message)
    }
}

#[derive(Debug, Clone)]
pub struct Validation {
    /// Input spec with `sigma_n0` and `w_y` defaults made explicit.
    pub spec: ExperimentSpec,
    pub violations: Vec<Violation>,
    pub warnings: Vec<String>,
}

impl Validation {
    pub fn is_valid(&self) -> bool {
        self.violations.is_empty()
    }
}

fn positive(x: f64) -> bool {
    x > 0.0 && x.is_finite()
}

fn non_negative(x: f64) -> bool {
    x >= 0.0 && x.is_finite()
}

/// Checks every invariant of `spec`; never aborts.
pub fn validate(spec: &ExperimentSpec) -> Validation {
    let mut v = Vec::new();
    let mut warnings = Vec::new();

    if !positive(spec.species.mass_u) {
        v.push(Violation::new("species.mass_u", "mass_u must be positive"));
    }

    match spec.geometry {
        ModeGeometry::Mzi { delta_x, w_x, w_y } => {
            if !positive(delta_x) {
                v.push(Violation::new("geometry.delta_x", "delta_x must be positive"));
            }
            if !positive(w_x) {
                v.push(Violation::new("geometry.w_x", "w_x must be positive"));
            }
            if let Some(w) = w_y {
                if !positive(w) {
                    v.push(Violation::new("geometry.w_y", "w_y must be positive"));
                }
            }
            if positive(delta_x) && positive(w_x) && delta_x < 10.0 * w_x {
                warnings.push(format!(
                    "MZI modes are not well separated (delta_x/w_x = {:.3}); f_s = 0 is an approximation",
                    delta_x / w_x
                ));
            }
        }
        ModeGeometry::Swi { x0, w_y } => {
            if !positive(x0) {
                v.push(Violation::new("geometry.x0", "x0 must be positive"));
            }
            if let Some(w) = w_y {
                if !positive(w) {
                    v.push(Violation::new("geometry.w_y", "w_y must be positive"));
                }
            }
        }
    }

    let st = &spec.state;
    if st.n_atoms < 2 {
        v.push(Violation::new("state.n_atoms", "n_atoms must be at least 2"));
    }
    if !positive(st.xi0) {
        v.push(Violation::new("state.xi0", "xi0 must be positive"));
    } else if st.n_atoms >= 2 && st.phase_variance0() > PI * PI / 9.0 {
        v.push(Violation::new(
            "state.xi0",
            "initial phase spread exceeds pi/3 (xi0^2/N > pi^2/9); narrow-phase treatment invalid",
        ));
    }
    if let Some(s) = st.sigma_n0 {
        if !non_negative(s) {
            v.push(Violation::new("state.sigma_n0", "sigma_n0 must be non-negative"));
        }
    }

    let pr = &spec.protocol;
    if !positive(pr.t) {
        v.push(Violation::new("protocol.t", "t must be positive"));
    }
    if !pr.zeta.is_finite() {
        v.push(Violation::new("protocol.zeta", "zeta must be finite"));
    }
    if !pr.phase_mean.is_finite() {
        v.push(Violation::new("protocol.phase_mean", "phase_mean must be finite"));
    }
    if let Some(e) = pr.epsilon_over_hbar {
        if !e.is_finite() {
            v.push(Violation::new(
                "protocol.epsilon_over_hbar",
                "epsilon_over_hbar must be finite",
            ));
        }
    }
    if pr.echo && pr.zeta == 0.0 {
        warnings.push("echo protocol with zeta = 0 has no effect".to_string());
    }

    if !non_negative(spec.noise.gamma) {
        v.push(Violation::new("noise.gamma", "gamma must be non-negative"));
    }

    if !positive(spec.xi_t) {
        v.push(Violation::new("xi_t", "xi_t must be positive"));
    } else if positive(st.xi0) && spec.xi_t < st.xi0 {
        v.push(Violation::new(
            "xi_t",
            format!("xi_t < xi0 ({} < {}): observed narrowing is unphysical", spec.xi_t, st.xi0),
        ));
    }

    let mut filled = spec.clone();
    filled.geometry = filled.geometry.with_defaults();
    if positive(st.xi0) && st.sigma_n0.is_none() {
        filled.state.sigma_n0 = Some(st.sigma_n0());
    }

    Validation {
        spec: filled,
        violations: v,
        warnings,
    }
}

/// Which of the two harmonic ground-state width definitions to use.
///
/// They differ by a factor of two; callers must choose explicitly.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum WidthConvention {
    /// x0 = √(2ħ/mω)
    MainText,
    /// x0 = √(ħ/2mω)
    Appendix,
}

/// Harmonic ground-state width for angular trap frequency `omega` (rad/s).
pub fn ground_state_width(omega: f64, species: &Species, convention: WidthConvention) -> Result<f64> {
    if !positive(omega) {
        return Err(Error::Invalid(vec![Violation::new(
            "omega",
            "omega must be positive",
        )]));
    }
    let m = species.mass_kg();
    Ok(match convention {
        WidthConvention::MainText => (2.0 * HBAR / (m * omega)).sqrt(),
        WidthConvention::Appendix => (HBAR / (2.0 * m * omega)).sqrt(),
    })
}
