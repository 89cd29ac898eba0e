// SPDX-License-Identifier: Apache-2.0

//! Geometry factors of the CSL two-mode generator.
//!
//! With W_jk(q) = ⟨ψ_j|e^{iq·r}|ψ_k⟩ the overlap matrix of the two modes in
//! the xy-plane,
//!
//! ```text
//! f_P(r_C) = r_C²/2π ∫d²q e^{−q²r_C²} |W_aa − W_bb|²
//! f_S(r_C) = r_C²/2π ∫d²q e^{−q²r_C²} |W_ab + W_ba|²
//! ```
//!
//! fix the dephasing and diffusion rates. Closed forms exist for both
//! supported geometries; [`f_quadrature`] evaluates the integrals directly and
//! serves as their check.

mod quadrature;

use std::cell::RefCell;
use std::sync::Arc;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::model::ModeGeometry;
use crate::numerics::golden_max_log;

pub use quadrature::{f_quadrature, QuadratureFactors};

/// The four overlap elements at one wave vector.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OverlapElements {
    pub aa: Complex64,
    pub ab: Complex64,
    pub ba: Complex64,
    pub bb: Complex64,
}

type OverlapFn = dyn Fn(f64, f64) -> OverlapElements + Send + Sync;

/// W_jk(q_x, q_y) as a function of the wave vector (1/m).
#[derive(Clone)]
pub struct OverlapMatrix {
    elements: Arc<OverlapFn>,
    scales: Vec<f64>,
}

impl std::fmt::Debug for OverlapMatrix {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("OverlapMatrix")
            .field("scales", &self.scales)
            .finish_non_exhaustive()
    }
}

impl OverlapMatrix {
    /// Wraps an arbitrary overlap function. `scales` lists the mode length
    /// scales (m); quadrature uses them to pick a rule.
    pub fn from_fn(
        f: impl Fn(f64, f64) -> OverlapElements + Send + Sync + 'static,
        scales: Vec<f64>,
    ) -> Self {
        OverlapMatrix {
            elements: Arc::new(f),
            scales,
        }
    }

    pub fn at(&self, qx: f64, qy: f64) -> OverlapElements {
        (self.elements)(qx, qy)
    }

    pub fn length_scales(&self) -> &[f64] {
        &self.scales
    }

    /// Both modes shifted by `d` along x.
    pub fn translated(&self, d: f64) -> Self {
        let inner = Arc::clone(&self.elements);
        let mut scales = self.scales.clone();
        scales.push(d.abs());
        OverlapMatrix::from_fn(
            move |qx, qy| {
                let ph = Complex64::from_polar(1.0, qx * d);
                let w = inner(qx, qy);
                OverlapElements {
                    aa: w.aa * ph,
                    ab: w.ab * ph,
                    ba: w.ba * ph,
                    bb: w.bb * ph,
                }
            },
            scales,
        )
    }
}

/// Gaussian MZI modes; W_ab = W_ba = 0.
pub fn overlap_mzi(geometry: &ModeGeometry) -> Result<OverlapMatrix> {
    let ModeGeometry::Mzi { delta_x, w_x, .. } = *geometry else {
        return Err(Error::Config("overlap_mzi needs an MZI geometry".into()));
    };
    let w_y = geometry.w_y();
    Ok(OverlapMatrix::from_fn(
        move |qx, qy| {
            let aa = Complex64::new((-0.5 * (qx * qx * w_x * w_x + qy * qy * w_y * w_y)).exp(), 0.0);
            OverlapElements {
                aa,
                ab: Complex64::new(0.0, 0.0),
                ba: Complex64::new(0.0, 0.0),
                bb: aa * Complex64::from_polar(1.0, qx * delta_x),
            }
        },
        vec![delta_x, w_x, w_y],
    ))
}

/// Harmonic ground and first excited mode along x, Gaussian along y.
pub fn overlap_swi(geometry: &ModeGeometry) -> Result<OverlapMatrix> {
    let ModeGeometry::Swi { x0, .. } = *geometry else {
        return Err(Error::Config("overlap_swi needs an SWI geometry".into()));
    };
    let w_y = geometry.w_y();
    Ok(OverlapMatrix::from_fn(
        move |qx, qy| {
            let g = (-0.5 * (qy * qy * w_y * w_y + qx * qx * x0 * x0)).exp();
            let aa = Complex64::new(g, 0.0);
            let ab = Complex64::new(0.0, qx * x0 * g);
            OverlapElements {
                aa,
                ab,
                ba: ab,
                bb: aa * (1.0 - qx * qx * x0 * x0),
            }
        },
        vec![x0, w_y],
    ))
}

pub fn overlap(geometry: &ModeGeometry) -> OverlapMatrix {
    match geometry {
        ModeGeometry::Mzi { .. } => overlap_mzi(geometry),
        ModeGeometry::Swi { .. } => overlap_swi(geometry),
    }
    .expect("variant checked")
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GeometryFactors {
    pub f_p: f64,
    pub f_s: f64,
    pub rc: f64,
}

fn check_rc(rc: f64) -> Result<()> {
    if rc > 0.0 && rc.is_finite() {
        Ok(())
    } else {
        Err(Error::Invalid(vec![crate::model::Violation::new(
            "rc",
            "rc must be positive",
        )]))
    }
}

/// Closed-form geometry factors.
///
/// The MZI form holds for equal transverse widths only; unequal widths are
/// rejected here and go through [`factors`], which integrates numerically.
pub fn f_closed(geometry: &ModeGeometry, rc: f64) -> Result<GeometryFactors> {
    check_rc(rc)?;
    let r2 = rc * rc;
    match *geometry {
        ModeGeometry::Mzi { delta_x, w_x, .. } => {
            if geometry.w_y() != w_x {
                return Err(Error::Config(
                    "closed-form MZI factor requires w_y = w_x".into(),
                ));
            }
            let w2 = w_x * w_x;
            let f_p = -(-delta_x * delta_x / (4.0 * (w2 + r2))).exp_m1() / (1.0 + w2 / r2);
            Ok(GeometryFactors { f_p, f_s: 0.0, rc })
        }
        ModeGeometry::Swi { x0, .. } => {
            let w_y = geometry.w_y();
            let x2 = x0 * x0;
            let a = r2 + x2;
            let root_b = (r2 + w_y * w_y).sqrt();
            let f_s = r2 * x2 / (root_b * a * a.sqrt());
            let f_p = 3.0 * r2 * x2 * x2 / (8.0 * root_b * a * a * a.sqrt());
            Ok(GeometryFactors { f_p, f_s, rc })
        }
    }
}

/// How inference treats the MZI dephasing factor.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum FactorPolicy {
    /// Use the geometry factor as computed.
    #[default]
    Closed,
    /// Rescale the MZI f_P so its plateau maximum is exactly 1. SWI factors
    /// are unaffected.
    CapOne,
}

/// Geometry factors as used by the forward model, honouring `policy`.
pub fn factors(geometry: &ModeGeometry, rc: f64, policy: FactorPolicy) -> Result<GeometryFactors> {
    let mut f = raw_factors(geometry, rc)?;
    if policy == FactorPolicy::CapOne && geometry.is_mzi() {
        let (_, peak) = mzi_peak(geometry)?;
        f.f_p /= peak;
    }
    Ok(f)
}

fn raw_factors(geometry: &ModeGeometry, rc: f64) -> Result<GeometryFactors> {
    match *geometry {
        ModeGeometry::Mzi { w_x, .. } if geometry.w_y() != w_x => {
            let q = f_quadrature(&overlap(geometry), rc)?;
            Ok(GeometryFactors { f_s: 0.0, ..q.factors })
        }
        _ => f_closed(geometry, rc),
    }
}

/// Location and value of the maximum of the MZI dephasing factor.
pub fn mzi_peak(geometry: &ModeGeometry) -> Result<(f64, f64)> {
    let ModeGeometry::Mzi { delta_x, w_x, .. } = *geometry else {
        return Err(Error::Config("mzi_peak needs an MZI geometry".into()));
    };
    let lo = w_x.min(geometry.w_y()) / 100.0;
    let hi = 100.0 * delta_x;
    let failure = RefCell::new(None);
    let (rc, f) = golden_max_log(
        |rc| match raw_factors(geometry, rc) {
            Ok(f) => f.f_p,
            Err(e) => {
                failure.borrow_mut().get_or_insert(e);
                f64::NEG_INFINITY
            }
        },
        lo,
        hi,
        1e-6,
    );
    match failure.into_inner() {
        Some(e) => Err(e),
        None => Ok((rc, f)),
    }
}

/// r_C maximizing the SWI diffusion factor f_S, by golden-section search on
/// ln r_C over [x0/100, 100·x0].
pub fn optimal_rc(geometry: &ModeGeometry) -> Result<f64> {
    let ModeGeometry::Swi { x0, .. } = *geometry else {
        return Err(Error::Config("optimal_rc needs an SWI geometry".into()));
    };
    let (rc, _) = golden_max_log(
        |rc| f_closed(geometry, rc).map(|f| f.f_s).unwrap_or(f64::NEG_INFINITY),
        x0 / 100.0,
        100.0 * x0,
        1e-6,
    );
    Ok(rc)
}

/// The r_C where the geometry is most sensitive: the f_S optimum for SWI and
/// the f_P peak for MZI.
pub fn most_sensitive_rc(geometry: &ModeGeometry) -> Result<f64> {
    match geometry {
        ModeGeometry::Swi { .. } => optimal_rc(geometry),
        ModeGeometry::Mzi { .. } => mzi_peak(geometry).map(|(rc, _)| rc),
    }
}

/// √(2/3)·x0, the f_S optimum for w_y = x0/√6.
pub fn analytic_optimal_rc(x0: f64) -> f64 {
    x0 * (2.0f64 / 3.0).sqrt()
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn mzi() -> ModeGeometry {
        ModeGeometry::mzi(10e-6, 100e-9)
    }

    #[test]
    fn overlaps_at_zero() {
        for g in [mzi(), ModeGeometry::swi(0.5e-6)] {
            let w = overlap(&g).at(0.0, 0.0);
            assert_eq!(w.aa, Complex64::new(1.0, 0.0));
            assert_eq!(w.bb, Complex64::new(1.0, 0.0));
            assert_eq!(w.ab, Complex64::new(0.0, 0.0));
        }
    }

    #[test]
    fn mzi_dephasing_integrand() {
        let g = mzi();
        let w = overlap_mzi(&g).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for _ in 0..100 {
            let qx: f64 = rng.random_range(-3e7..3e7);
            let el = w.at(qx, 0.0);
            let lhs = (el.aa - el.bb).norm_sqr();
            let rhs = 2.0 * (-qx * qx * 1e-14).exp() * (1.0 - (qx * 10e-6).cos());
            assert!((lhs - rhs).abs() <= 1e-12 * rhs.max(1e-300) + 1e-15, "{lhs} {rhs}");
            assert_eq!(el.ab, Complex64::new(0.0, 0.0));
            assert_eq!(el.ba, Complex64::new(0.0, 0.0));
        }
    }

    #[test]
    fn swi_overlap_forms() {
        let x0 = 0.5e-6;
        let g = ModeGeometry::swi(x0);
        let w = overlap_swi(&g).unwrap();
        assert!(w.at(1.0 / x0, 0.0).bb.norm() < 1e-15);
        let wy = g.w_y();
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for _ in 0..100 {
            let qx: f64 = rng.random_range(-5e6..5e6);
            let qy: f64 = rng.random_range(-5e6..5e6);
            let el = w.at(qx, qy);
            let lhs = (el.ab + el.ba).norm_sqr();
            let rhs = 4.0 * qx * qx * x0 * x0 * (-qy * qy * wy * wy - qx * qx * x0 * x0).exp();
            assert_relative_eq!(lhs, rhs, max_relative = 1e-12, epsilon = 1e-300);
        }
    }

    #[test]
    fn hermitian_symmetry_and_bounds() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for g in [mzi(), ModeGeometry::swi(0.4e-6)] {
            let w = overlap(&g);
            for _ in 0..50 {
                let qx: f64 = rng.random_range(-1e7..1e7);
                let qy: f64 = rng.random_range(-1e7..1e7);
                let p = w.at(qx, qy);
                let m = w.at(-qx, -qy);
                assert!((p.ab - m.ba.conj()).norm() < 1e-14);
                assert!((p.aa - m.aa.conj()).norm() < 1e-14);
                assert!(p.aa.norm() <= 1.0 + 1e-15 && p.ab.norm() <= 1.0 + 1e-15);
            }
        }
    }

    #[test]
    fn mzi_closed_reference_value() {
        let f = f_closed(&mzi(), 1e-6).unwrap();
        let expected = -(-24.752_475_247_524_753f64).exp_m1() / 1.01;
        assert_relative_eq!(f.f_p, expected, max_relative = 1e-14);
        assert!((f.f_p - 0.990099).abs() < 1e-6);
        assert_eq!(f.f_s, 0.0);
    }

    #[test]
    fn mzi_unequal_widths_need_quadrature() {
        let g = ModeGeometry::Mzi {
            delta_x: 10e-6,
            w_x: 100e-9,
            w_y: Some(200e-9),
        };
        assert!(f_closed(&g, 1e-6).is_err());
        let f = factors(&g, 1e-6, FactorPolicy::Closed).unwrap();
        // Separable Gaussian integral done by hand.
        let r2 = 1e-12;
        let expected = r2 / ((r2 + 1e-14f64).sqrt() * (r2 + 4e-14f64).sqrt())
            * -(-1e-10 / (4.0 * (r2 + 1e-14))).exp_m1();
        assert_relative_eq!(f.f_p, expected, max_relative = 1e-8);
    }

    #[test]
    fn mzi_tails() {
        let g = mzi();
        assert!(f_closed(&g, 1.0).unwrap().f_p < 1e-10);
        assert!(f_closed(&g, 1e-12).unwrap().f_p < 1e-8);
    }

    #[test]
    fn swi_optimum_values() {
        let x0 = 1.0e-7;
        let g = ModeGeometry::swi(x0);
        let f = f_closed(&g, analytic_optimal_rc(x0)).unwrap();
        assert_relative_eq!(f.f_s, (288.0f64 / 625.0).sqrt() / 2.0, max_relative = 1e-12);
        assert_relative_eq!(f.f_s / f.f_p, 120.0 / 27.0, max_relative = 1e-12);
    }

    #[test]
    fn optimal_rc_matches_analytic() {
        for x0 in [0.5e-6, 100e-9] {
            let g = ModeGeometry::swi(x0);
            let rc = optimal_rc(&g).unwrap();
            assert_relative_eq!(rc, analytic_optimal_rc(x0), max_relative = 1e-4);
            let f = |r| f_closed(&g, r).unwrap().f_s;
            assert!(f(rc) >= f(0.99 * rc) && f(rc) >= f(1.01 * rc));
        }
        assert!((optimal_rc(&ModeGeometry::swi(100e-9)).unwrap() - 81.65e-9).abs() < 0.01e-9);
        assert!(optimal_rc(&mzi()).is_err());
    }

    #[test]
    fn optimal_rc_general_width() {
        // Stationary point of ln f_S solves y² − (a−b)y/2 − ab = 0, y = r_C².
        let (x0, wy) = (1.0e-7, 0.7e-7);
        let g = ModeGeometry::Swi { x0, w_y: Some(wy) };
        let (a, b) = (x0 * x0, wy * wy);
        let y = 0.5 * (0.5 * (a - b) + (0.25 * (a - b) * (a - b) + 4.0 * a * b).sqrt());
        assert_relative_eq!(optimal_rc(&g).unwrap(), y.sqrt(), max_relative = 1e-5);
    }

    #[test]
    fn cap_one_normalizes_mzi_peak() {
        let g = mzi();
        let (rc, peak) = mzi_peak(&g).unwrap();
        assert!(peak < 1.0 && peak > 0.99);
        let f = factors(&g, rc, FactorPolicy::CapOne).unwrap();
        assert_relative_eq!(f.f_p, 1.0, max_relative = 1e-12);
        let swi = ModeGeometry::swi(1e-7);
        assert_eq!(
            factors(&swi, 8e-8, FactorPolicy::CapOne).unwrap(),
            factors(&swi, 8e-8, FactorPolicy::Closed).unwrap()
        );
    }

    #[test]
    fn nonpositive_rc_rejected() {
        assert!(f_closed(&mzi(), 0.0).is_err());
        assert!(f_closed(&ModeGeometry::swi(1e-7), -1e-7).is_err());
    }
}
