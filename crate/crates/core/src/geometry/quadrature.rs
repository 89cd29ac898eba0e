// SPDX-License-Identifier: Apache-2.0

//! Direct numerical evaluation of the f_P / f_S integrals.
//!
//! In the scaled variable u = q·r_C the weight becomes e^{−u²}, so a tensor
//! Gauss–Hermite rule is the natural first choice. It is only trusted when
//! every mode length scale is comparable to r_C (otherwise the integrand
//! oscillates or is sharply peaked on the GH grid) and when the 80- and
//! 64-node rules agree. In all other cases a nested adaptive Gauss–Kronrod
//! integration over |u| ≤ 8 takes over, seeded with panels that shrink
//! geometrically towards u = 0 so features of width r_C/L are resolved.

use std::cell::Cell;
use std::f64::consts::PI;
use std::sync::OnceLock;

use super::{check_rc, GeometryFactors, OverlapElements, OverlapMatrix};
use crate::error::{Error, Result};
use crate::numerics::{adaptive_gk_breaks, GaussHermite};

const GH_NODES: usize = 80;
const GH_CHECK_NODES: usize = 64;
const GH_MAX_SCALE_RATIO: f64 = 2.0;
const GH_AGREEMENT: f64 = 1e-10;
const U_MAX: f64 = 8.0;
const MAX_RELATIVE_ERROR: f64 = 1e-8;

fn rules() -> &'static (GaussHermite, GaussHermite) {
    static RULES: OnceLock<(GaussHermite, GaussHermite)> = OnceLock::new();
    RULES.get_or_init(|| (GaussHermite::new(GH_NODES), GaussHermite::new(GH_CHECK_NODES)))
}

/// Quadrature result with per-factor relative error estimates.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuadratureFactors {
    pub factors: GeometryFactors,
    pub error_p: f64,
    pub error_s: f64,
    /// Whether the adaptive path was needed.
    pub adaptive: bool,
}

fn dephasing(w: &OverlapElements) -> f64 {
    (w.aa - w.bb).norm_sqr()
}

fn diffusion(w: &OverlapElements) -> f64 {
    (w.ab + w.ba).norm_sqr()
}

/// Integrates both defining integrals for `overlaps` at `rc`.
///
/// Fails when the relative error estimate of either factor exceeds 10⁻⁸.
pub fn f_quadrature(overlaps: &OverlapMatrix, rc: f64) -> Result<QuadratureFactors> {
    check_rc(rc)?;
    let smooth = overlaps
        .length_scales()
        .iter()
        .all(|&l| l / rc <= GH_MAX_SCALE_RATIO);

    let (p, s, adaptive) = if smooth {
        match (gauss_hermite(overlaps, rc, dephasing), gauss_hermite(overlaps, rc, diffusion)) {
            (Some(p), Some(s)) => (p, s, false),
            _ => (adaptive(overlaps, rc, dephasing)?, adaptive(overlaps, rc, diffusion)?, true),
        }
    } else {
        (adaptive(overlaps, rc, dephasing)?, adaptive(overlaps, rc, diffusion)?, true)
    };

    Ok(QuadratureFactors {
        factors: GeometryFactors {
            f_p: p.0,
            f_s: s.0,
            rc,
        },
        error_p: p.1,
        error_s: s.1,
        adaptive,
    })
}

fn gauss_hermite(
    w: &OverlapMatrix,
    rc: f64,
    g: fn(&OverlapElements) -> f64,
) -> Option<(f64, f64)> {
    let (fine, coarse) = rules();
    let integrand = |ux: f64, uy: f64| g(&w.at(ux / rc, uy / rc));
    let a = fine.integrate_2d(integrand) / (2.0 * PI);
    let b = coarse.integrate_2d(integrand) / (2.0 * PI);
    let diff = (a - b).abs();
    if a == 0.0 && b == 0.0 {
        return Some((0.0, 0.0));
    }
    let rel = diff / a.abs();
    (rel <= GH_AGREEMENT).then_some((a, rel))
}

/// Panel edges on [−U_MAX, U_MAX], halving towards 0 down to the finest
/// feature width r_C/L.
fn breakpoints(w: &OverlapMatrix, rc: f64) -> Vec<f64> {
    let finest = w
        .length_scales()
        .iter()
        .filter(|l| **l > 0.0)
        .map(|l| rc / l)
        .fold(1.0f64, f64::min);
    let mut edges = vec![U_MAX];
    while edges[edges.len() - 1] > finest / 4.0 {
        let last = edges[edges.len() - 1];
        edges.push(0.5 * last);
    }
    let mut out: Vec<f64> = edges.iter().map(|e| -e).collect();
    out.push(0.0);
    out.extend(edges.iter().rev());
    out
}

fn adaptive(w: &OverlapMatrix, rc: f64, g: fn(&OverlapElements) -> f64) -> Result<(f64, f64)> {
    let breaks = breakpoints(w, rc);
    // Peak weighted inner error against peak weighted inner value.
    let inner_err = Cell::new(0.0f64);
    let inner_peak = Cell::new(0.0f64);
    let outer = adaptive_gk_breaks(
        |uy| {
            let wy = (-uy * uy).exp();
            if wy == 0.0 {
                return 0.0;
            }
            let inner = adaptive_gk_breaks(
                |ux| (-ux * ux).exp() * g(&w.at(ux / rc, uy / rc)),
                &breaks,
                1e-12,
                1e-300,
            );
            inner_err.set(inner_err.get().max(wy * inner.error));
            inner_peak.set(inner_peak.get().max(wy * inner.value.abs()));
            wy * inner.value
        },
        &breaks,
        1e-11,
        1e-300,
    );
    let value = outer.value / (2.0 * PI);
    if value == 0.0 && outer.error == 0.0 {
        return Ok((0.0, 0.0));
    }
    let rel = outer.relative_error() + inner_err.get() / inner_peak.get();
    if rel.is_finite() && rel <= MAX_RELATIVE_ERROR {
        Ok((value, rel))
    } else {
        Err(Error::Quadrature { estimate: rel })
    }
}
