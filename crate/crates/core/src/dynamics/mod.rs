// SPDX-License-Identifier: Apache-2.0

//! Analytic evolution of the two-mode phase distribution.
//!
//! In the narrow-phase regime the Wigner function w_t(φ, n) obeys a linear
//! Fokker–Planck equation with drift ζn in φ, diffusion Γ_P/2 in φ and
//! N²Γ_S/4 in n. Gaussian states stay Gaussian, so the second moments carry
//! everything:
//!
//! ```text
//! plain: σ²_φ(t) = σ²_φ(0) + Γ_P t + ζ²t²(σ²_n(0) + Γ_S N² t/6)
//! echo:  σ²_φ(t) = σ²_φ(0) + Γ_P t + ζ²t² Γ_S N² t/24
//! ```
//!
//! Conventional noise with visibility e^{−γt} adds 2γt to either.

pub mod characteristic;

use std::f64::consts::PI;

use crate::error::Result;
use crate::geometry::{factors, FactorPolicy};
use crate::model::{CslPoint, ExperimentSpec, ModeGeometry, Species};

pub use characteristic::{characteristic, GaussianCharacteristic};

/// CSL dephasing and diffusion rates.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct Rates {
    /// Γ_P, Hz.
    pub gamma_p: f64,
    /// Γ_S, Hz.
    pub gamma_s: f64,
}

/// Γ_P = 2λ(m/u)² f_P(r_C), Γ_S = 2λ(m/u)² f_S(r_C).
pub fn rates(point: &CslPoint, species: &Species, geometry: &ModeGeometry) -> Result<Rates> {
    rates_with(point, species, geometry, FactorPolicy::Closed)
}

pub fn rates_with(
    point: &CslPoint,
    species: &Species,
    geometry: &ModeGeometry,
    policy: FactorPolicy,
) -> Result<Rates> {
    let f = factors(geometry, point.rc, policy)?;
    let scale = 2.0 * point.lambda * species.mass_amplification();
    Ok(Rates {
        gamma_p: scale * f.f_p,
        gamma_s: scale * f.f_s,
    })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PhaseMoments {
    pub mean: f64,
    pub variance: f64,
    pub t: f64,
    /// False once the spread exceeds π/3 and the Gaussian treatment breaks.
    pub valid: bool,
}

impl PhaseMoments {
    pub fn new(mean: f64, variance: f64, t: f64) -> Self {
        PhaseMoments {
            mean,
            variance,
            t,
            valid: variance.sqrt() <= PI / 3.0,
        }
    }

    /// ξ² = N σ²_φ.
    pub fn squeezing_sq(&self, n_atoms: f64) -> f64 {
        n_atoms * self.variance
    }
}

/// Phase moments at the end of the protocol.
pub fn phase_variance(spec: &ExperimentSpec, point: &CslPoint) -> Result<PhaseMoments> {
    let r = rates(point, &spec.species, &spec.geometry)?;
    Ok(phase_variance_with_rates(spec, &r))
}

pub fn phase_variance_with_rates(spec: &ExperimentSpec, rates: &Rates) -> PhaseMoments {
    let st = &spec.state;
    let p = &spec.protocol;
    let n = st.n();
    let t = p.t;
    let z2t2 = p.zeta * p.zeta * t * t;
    let diffusion = rates.gamma_s * n * n * t;
    let dispersion = if p.echo {
        z2t2 * diffusion / 24.0
    } else {
        z2t2 * (st.number_variance0() + diffusion / 6.0)
    };
    let variance = st.phase_variance0() + rates.gamma_p * t + dispersion + 2.0 * spec.noise.gamma * t;
    PhaseMoments::new(p.phase_mean, variance, t)
}

/// Interference visibility exp(−Γ_P t/2)·exp(−γt); ζ plays no role here.
pub fn visibility(spec: &ExperimentSpec, point: &CslPoint) -> Result<f64> {
    let r = rates(point, &spec.species, &spec.geometry)?;
    Ok(visibility_with_rates(spec, &r))
}

pub fn visibility_with_rates(spec: &ExperimentSpec, rates: &Rates) -> f64 {
    let t = spec.protocol.t;
    (-0.5 * rates.gamma_p * t - spec.noise.gamma * t).exp()
}

/// Gaussian distribution of the detected count difference n.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CountDistribution {
    pub mean: f64,
    pub variance: f64,
    /// |cos φ̄| < 0.1: the readout is nearly insensitive to the phase.
    pub insensitive: bool,
}

impl CountDistribution {
    pub fn std_dev(&self) -> f64 {
        self.variance.sqrt()
    }
}

pub fn count_distribution(spec: &ExperimentSpec, point: &CslPoint) -> Result<CountDistribution> {
    let r = rates(point, &spec.species, &spec.geometry)?;
    Ok(count_distribution_with_rates(spec, &r))
}

/// Readout linearized at φ̄: mean N·V·sin φ̄, variance N² cos²φ̄ σ²_φ(t).
pub fn count_distribution_with_rates(spec: &ExperimentSpec, rates: &Rates) -> CountDistribution {
    let n = spec.state.n();
    let phi = spec.protocol.phase_mean;
    let moments = phase_variance_with_rates(spec, rates);
    let v = visibility_with_rates(spec, rates);
    let slope = n * phi.cos();
    CountDistribution {
        mean: n * v * phi.sin(),
        variance: slope * slope * moments.variance,
        insensitive: phi.cos().abs() < 0.1,
    }
}
