// SPDX-License-Identifier: Apache-2.0

//! From forward models to experimental conclusions.
//!
//! Every model here is linear in λ, σ²_φ(t) = σ²_conv(t) + α²_CSL(t)·λ, so
//! bounds, Fisher information and repetition counts all follow from the two
//! coefficients of [`VarianceSplit`].

pub mod calibrate;
pub mod scenarios;

use std::fmt;
use std::str::FromStr;

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::geometry::{factors, FactorPolicy};
use crate::model::ExperimentSpec;

pub use calibrate::{calibrate_estimator, CalibrationReport};
pub use scenarios::{scenario, scenarios, table1, Scenario, TableRow};

/// Which variance model the bound is built on.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BoundMode {
    /// Dephasing only.
    Mzi,
    /// Dephasing plus dispersion-amplified diffusion.
    SwiPlain,
    /// Echo protocol; only the diffusion term is kept.
    SwiEcho,
}

impl BoundMode {
    /// The natural mode for a spec: MZI geometry, else echo or plain SWI.
    pub fn for_spec(spec: &ExperimentSpec) -> Self {
        if spec.geometry.is_mzi() {
            BoundMode::Mzi
        } else if spec.protocol.echo {
            BoundMode::SwiEcho
        } else {
            BoundMode::SwiPlain
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            BoundMode::Mzi => "mzi",
            BoundMode::SwiPlain => "swi-plain",
            BoundMode::SwiEcho => "swi-echo",
        }
    }
}

impl fmt::Display for BoundMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for BoundMode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "mzi" => Ok(BoundMode::Mzi),
            "swi-plain" | "swi" => Ok(BoundMode::SwiPlain),
            "swi-echo" | "echo" => Ok(BoundMode::SwiEcho),
            other => Err(Error::Config(format!(
                "unknown mode '{other}' (expected mzi, swi-plain or swi-echo)"
            ))),
        }
    }
}

/// σ²_φ = sigma_conv_sq + alpha_csl_sq·λ.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct VarianceSplit {
    /// rad².
    pub sigma_conv_sq: f64,
    /// rad²·s.
    pub alpha_csl_sq: f64,
}

impl VarianceSplit {
    pub fn variance(&self, lambda: f64) -> f64 {
        self.sigma_conv_sq + self.alpha_csl_sq * lambda
    }

    /// c = σ²_conv/(λ α²_CSL).
    pub fn conventional_ratio(&self, lambda: f64) -> f64 {
        self.sigma_conv_sq / (lambda * self.alpha_csl_sq)
    }
}

pub fn variance_split(spec: &ExperimentSpec, rc: f64, mode: BoundMode) -> Result<VarianceSplit> {
    variance_split_with(spec, rc, mode, FactorPolicy::Closed)
}

/// CSL-independent variance and the CSL coefficient for `mode`.
///
/// The dispersion term ζ²t²σ²_n(0) belongs to σ²_conv only without echo;
/// the echo coefficient drops the dephasing contribution.
pub fn variance_split_with(
    spec: &ExperimentSpec,
    rc: f64,
    mode: BoundMode,
    policy: FactorPolicy,
) -> Result<VarianceSplit> {
    let f = factors(&spec.geometry, rc, policy)?;
    let st = &spec.state;
    let p = &spec.protocol;
    let n = st.n();
    let t = p.t;
    let z2t2 = p.zeta * p.zeta * t * t;
    let scale = 2.0 * spec.species.mass_amplification() * t;

    let mut sigma_conv_sq = st.phase_variance0() + 2.0 * spec.noise.gamma * t;
    if mode != BoundMode::SwiEcho {
        sigma_conv_sq += z2t2 * st.number_variance0();
    }
    let alpha_csl_sq = match mode {
        BoundMode::Mzi => scale * f.f_p,
        BoundMode::SwiPlain => scale * (f.f_p + n * n * z2t2 / 6.0 * f.f_s),
        BoundMode::SwiEcho => scale * n * n * z2t2 / 24.0 * f.f_s,
    };
    Ok(VarianceSplit {
        sigma_conv_sq,
        alpha_csl_sq,
    })
}

pub fn lambda_bound(spec: &ExperimentSpec, rc: f64, mode: BoundMode) -> Result<f64> {
    lambda_bound_with(spec, rc, mode, FactorPolicy::Closed)
}

/// Largest λ consistent with an observed ξ_t: (ξ_t²/N − σ²_conv)/α²_CSL.
pub fn lambda_bound_with(
    spec: &ExperimentSpec,
    rc: f64,
    mode: BoundMode,
    policy: FactorPolicy,
) -> Result<f64> {
    let split = variance_split_with(spec, rc, mode, policy)?;
    let observed = spec.xi_t * spec.xi_t / spec.state.n();
    let excess = observed - split.sigma_conv_sq;
    bound_from_excess(excess, split.alpha_csl_sq)
}

fn bound_from_excess(excess: f64, alpha_sq: f64) -> Result<f64> {
    if excess < 0.0 {
        return Err(Error::NegativeExcess { excess });
    }
    if !(alpha_sq > 0.0) {
        return Err(Error::Numerical(format!(
            "no CSL sensitivity at this r_C (alpha^2 = {alpha_sq:e})"
        )));
    }
    Ok(excess / alpha_sq)
}

/// Log- or linearly spaced r_C grid.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RcGrid {
    pub min: f64,
    pub max: f64,
    pub points: usize,
    pub log: bool,
}

impl RcGrid {
    pub fn new(min: f64, max: f64, points: usize, log: bool) -> Result<Self> {
        if !(min > 0.0 && max > min && max.is_finite()) || points < 2 {
            return Err(Error::Config(format!(
                "r_C grid needs 0 < min < max and points >= 2 (got {min:e}:{max:e}:{points})"
            )));
        }
        Ok(RcGrid { min, max, points, log })
    }

    pub fn values(&self) -> Vec<f64> {
        let last = (self.points - 1) as f64;
        (0..self.points)
            .map(|i| {
                if i == 0 {
                    return self.min;
                }
                if i == self.points - 1 {
                    return self.max;
                }
                let u = i as f64 / last;
                if self.log {
                    (self.min.ln() + u * (self.max / self.min).ln()).exp()
                } else {
                    self.min + u * (self.max - self.min)
                }
            })
            .collect()
    }
}

impl FromStr for RcGrid {
    type Err = Error;

    /// `min:max:points`, log-spaced.
    fn from_str(s: &str) -> Result<Self> {
        let parts: Vec<&str> = s.split(':').collect();
        let bad = || Error::Config(format!("r_C grid '{s}' is not min:max:points"));
        if parts.len() != 3 {
            return Err(bad());
        }
        let min: f64 = parts[0].trim().parse().map_err(|_| bad())?;
        let max: f64 = parts[1].trim().parse().map_err(|_| bad())?;
        let points: usize = parts[2].trim().parse().map_err(|_| bad())?;
        RcGrid::new(min, max, points, true)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct CurvePoint {
    pub rc: f64,
    /// None where the bound could not be evaluated.
    pub lambda_bound: Option<f64>,
    pub error: Option<String>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExclusionCurve {
    pub label: String,
    pub points: Vec<CurvePoint>,
}

impl ExclusionCurve {
    /// Smallest bound on the curve with its r_C.
    pub fn minimum(&self) -> Option<(f64, f64)> {
        self.points
            .iter()
            .filter_map(|p| p.lambda_bound.map(|b| (p.rc, b)))
            .filter(|&(_, b)| b > 0.0)
            .min_by(|a, b| a.1.total_cmp(&b.1))
    }
}

/// λ bound at every grid point. Failed points are kept as gaps.
pub fn exclusion_curve(
    spec: &ExperimentSpec,
    mode: BoundMode,
    policy: FactorPolicy,
    grid: &[f64],
    label: impl Into<String>,
) -> ExclusionCurve {
    let points = grid
        .par_iter()
        .map(|&rc| match lambda_bound_with(spec, rc, mode, policy) {
            Ok(b) => CurvePoint {
                rc,
                lambda_bound: Some(b),
                error: None,
            },
            Err(e) => CurvePoint {
                rc,
                lambda_bound: None,
                error: Some(e.to_string()),
            },
        })
        .collect();
    ExclusionCurve {
        label: label.into(),
        points,
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RepetitionEstimate {
    /// Fisher information at λ_min, 1/Hz².
    pub fisher_info: f64,
    pub k: u64,
    /// k with the conventional spread raised by 50 %.
    pub k_inflated: u64,
    pub delta: f64,
    pub lambda_min: f64,
    /// σ²_conv/(λ_min α²_CSL).
    pub conventional_ratio: f64,
}

/// Smallest integer not below `x`, ignoring float noise of a few ulps.
fn count_ceiling(x: f64) -> u64 {
    (x * (1.0 - 1e-12)).ceil() as u64
}

/// k ≥ (2/δ²)(1 + c)².
pub fn repetition_count(conventional_ratio: f64, delta: f64) -> u64 {
    let a = 1.0 + conventional_ratio;
    count_ceiling(2.0 / (delta * delta) * a * a)
}

/// I(λ) = 1 / (2(σ²_conv/α² + λ)²).
pub fn fisher_information(split: &VarianceSplit, lambda: f64) -> f64 {
    let a = split.sigma_conv_sq / split.alpha_csl_sq + lambda;
    1.0 / (2.0 * a * a)
}

/// Repetitions needed to pin λ_min to relative precision δ.
///
/// `lambda_min` defaults to the spec's own λ bound at `rc`.
pub fn repetitions(
    spec: &ExperimentSpec,
    rc: f64,
    mode: BoundMode,
    policy: FactorPolicy,
    lambda_min: Option<f64>,
    delta: f64,
) -> Result<RepetitionEstimate> {
    if !(delta > 0.0 && delta.is_finite()) {
        return Err(Error::Config(format!("delta must be positive, got {delta}")));
    }
    let split = variance_split_with(spec, rc, mode, policy)?;
    if !(split.alpha_csl_sq > 0.0) {
        return Err(Error::Numerical("no CSL sensitivity at this r_C".into()));
    }
    let lambda_min = match lambda_min {
        Some(l) => l,
        None => lambda_bound_with(spec, rc, mode, policy)?,
    };
    if !(lambda_min > 0.0 && lambda_min.is_finite()) {
        return Err(Error::Config(format!("lambda_min must be positive, got {lambda_min:e}")));
    }
    let c = split.conventional_ratio(lambda_min);
    Ok(RepetitionEstimate {
        fisher_info: fisher_information(&split, lambda_min),
        k: repetition_count(c, delta),
        k_inflated: repetition_count(1.5 * c, delta),
        delta,
        lambda_min,
        conventional_ratio: c,
    })
}
