// SPDX-License-Identifier: Apache-2.0

//! Characteristic function χ_t(s, q) = ∫dφ dn w_t(φ, n) e^{isφ + iqn} of the
//! phase-space distribution.
//!
//! A constant-ζ segment of length τ maps
//!
//! ```text
//! χ(s, q) ← χ(s, q + ζτs) · exp[−Γ_P τ s²/2 − N²Γ_S τ/4 (q² + ζτqs + ζ²τ²s²/3)]
//! ```
//!
//! The echo protocol is two such segments with opposite ζ. For a Gaussian
//! initial state the map acts on the coefficients of the exponent, which is
//! what [`GaussianCharacteristic`] tracks; [`evolve_segment`] applies the same
//! map to an arbitrary χ given as a closure.

use num_complex::Complex64;

use super::Rates;
use crate::model::{ExperimentSpec, InitialState};
use crate::numerics::{first_derivative, second_derivative};

/// Gaussian χ_t(s, q) = χ₀(s, q + Cs) · exp(−½ D(s, q)).
///
/// χ₀ is the initial Gaussian, C the accumulated shear ΣζΔt and D the
/// quadratic form collected from the noise terms. Keeping χ₀ in its own
/// coordinates avoids cancelling the large initial number variance against
/// itself when the echo undoes the shear.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GaussianCharacteristic {
    mean_phi: f64,
    mean_n: f64,
    /// Initial (ss, sq, qq) covariance coefficients.
    init: [f64; 3],
    shear: f64,
    /// Noise-induced (ss, sq, qq) coefficients in current coordinates.
    noise: [f64; 3],
}

impl GaussianCharacteristic {
    /// Uncorrelated, centered-in-n initial state: ⟨n⟩₀ = ⟨nφ⟩₀ = 0.
    pub fn initial(state: &InitialState, phase_mean: f64) -> Self {
        GaussianCharacteristic {
            mean_phi: phase_mean,
            mean_n: 0.0,
            init: [state.phase_variance0(), 0.0, state.number_variance0()],
            shear: 0.0,
            noise: [0.0; 3],
        }
    }

    /// One segment of duration `tau` at constant dispersion `zeta`.
    pub fn evolve(&self, rates: &Rates, n_atoms: f64, zeta: f64, tau: f64) -> Self {
        let c = zeta * tau;
        let d = n_atoms * n_atoms * rates.gamma_s * tau;
        let [ss, sq, qq] = self.noise;
        GaussianCharacteristic {
            shear: self.shear + c,
            noise: [
                ss + 2.0 * c * sq + c * c * qq + rates.gamma_p * tau + d * c * c / 6.0,
                sq + c * qq + d * c / 4.0,
                qq + d / 2.0,
            ],
            ..*self
        }
    }

    pub fn eval(&self, s: f64, q: f64) -> Complex64 {
        let u = q + self.shear * s;
        let [a, b, c] = self.init;
        let [ds, dq, dd] = self.noise;
        let re = -0.5 * (a * s * s + 2.0 * b * s * u + c * u * u)
            - 0.5 * (ds * s * s + 2.0 * dq * s * q + dd * q * q);
        let im = self.mean_phi * s + self.mean_n * u;
        Complex64::from_polar(re.exp(), im)
    }

    pub fn phase_mean(&self) -> f64 {
        self.mean_phi + self.shear * self.mean_n
    }

    pub fn phase_variance(&self) -> f64 {
        let [a, b, c] = self.init;
        let k = self.shear;
        a + 2.0 * k * b + k * k * c + self.noise[0]
    }

    pub fn number_variance(&self) -> f64 {
        self.init[2] + self.noise[2]
    }

    pub fn covariance(&self) -> f64 {
        self.init[1] + self.shear * self.init[2] + self.noise[1]
    }
}

/// Exact χ_t for the spec's protocol, composing the echo from two halves.
pub fn characteristic(spec: &ExperimentSpec, rates: &Rates) -> GaussianCharacteristic {
    let n = spec.state.n();
    let p = &spec.protocol;
    let chi0 = GaussianCharacteristic::initial(&spec.state, p.phase_mean);
    if p.echo {
        let h = 0.5 * p.t;
        chi0.evolve(rates, n, p.zeta, h).evolve(rates, n, -p.zeta, h)
    } else {
        chi0.evolve(rates, n, p.zeta, p.t)
    }
}

/// Applies one constant-ζ segment to an arbitrary characteristic function.
pub fn evolve_segment<F>(
    chi: F,
    rates: Rates,
    n_atoms: f64,
    zeta: f64,
    tau: f64,
) -> impl Fn(f64, f64) -> Complex64
where
    F: Fn(f64, f64) -> Complex64,
{
    move |s, q| {
        let d = n_atoms * n_atoms * rates.gamma_s * tau / 4.0;
        let c = zeta * tau;
        let damping = -0.5 * rates.gamma_p * tau * s * s - d * (q * q + c * q * s + c * c * s * s / 3.0);
        chi(s, q + c * s) * damping.exp()
    }
}

/// The echo result in its simplified reference form,
/// χ₀(s, q) exp[−Γ_P t s²/2 − N²Γ_S t/4 (q² + ζ²t²s²/12)].
///
/// It agrees with the two-segment composition along q = 0 (and hence on the
/// phase marginal) but omits the φ–n correlation term −ζtqs/2 that the
/// composition produces.
pub fn echo_closed_form(spec: &ExperimentSpec, rates: &Rates, s: f64, q: f64) -> Complex64 {
    let chi0 = GaussianCharacteristic::initial(&spec.state, spec.protocol.phase_mean);
    let n = spec.state.n();
    let t = spec.protocol.t;
    let zt = spec.protocol.zeta * t;
    let e = -0.5 * rates.gamma_p * t * s * s
        - n * n * rates.gamma_s * t / 4.0 * (q * q + zt * zt * s * s / 12.0);
    chi0.eval(s, q) * e.exp()
}

/// The echo result including the correlation term,
/// χ₀(s, q) exp[−Γ_P t s²/2 − N²Γ_S t/4 (q² − ζtqs/2 + ζ²t²s²/12)].
pub fn echo_closed_form_correlated(spec: &ExperimentSpec, rates: &Rates, s: f64, q: f64) -> Complex64 {
    let chi0 = GaussianCharacteristic::initial(&spec.state, spec.protocol.phase_mean);
    let n = spec.state.n();
    let t = spec.protocol.t;
    let zt = spec.protocol.zeta * t;
    let e = -0.5 * rates.gamma_p * t * s * s
        - n * n * rates.gamma_s * t / 4.0 * (q * q - 0.5 * zt * q * s + zt * zt * s * s / 12.0);
    chi0.eval(s, q) * e.exp()
}

/// Phase mean and variance from the s-derivatives of ln χ(s, 0) at s = 0.
///
/// `step` is the finite-difference step in s (1/rad); pick it so that
/// step·σ_φ is around 10⁻³.
pub fn moments_from_characteristic(chi: impl Fn(f64) -> Complex64, step: f64) -> (f64, f64) {
    let mean = first_derivative(|s| chi(s).ln().im, 0.0, step);
    let var = -second_derivative(|s| chi(s).ln().re, 0.0, step);
    (mean, var)
}
