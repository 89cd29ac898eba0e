// SPDX-License-Identifier: Apache-2.0

//! Monte Carlo check of the repetition estimate.
//!
//! Each meta-repetition draws k count differences from the Gaussian readout
//! distribution at λ_true, forms the unbiased sample variance, maps it back to
//! a phase variance and inverts the linear model for λ̂. The spread of λ̂ over
//! meta-repetitions is then compared with the Cramér–Rao floor 1/√(kI).

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use rayon::prelude::*;
use serde::Serialize;

use crate::dynamics::{count_distribution_with_rates, rates_with};
use crate::error::{Error, Result};
use crate::geometry::FactorPolicy;
use crate::model::{CslPoint, ExperimentSpec};
use crate::numerics::stream_seed;

use super::{fisher_information, variance_split_with, BoundMode};

pub const MIN_REPETITIONS: u64 = 100;
pub const DEFAULT_META: usize = 500;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CalibrationReport {
    pub lambda_true_hz: f64,
    pub k: u64,
    pub meta_repetitions: usize,
    pub seed: u64,
    /// Mean of λ̂ over meta-repetitions.
    pub lambda_hat_hz: f64,
    /// Standard error of that mean.
    pub lambda_hat_stderr_hz: f64,
    /// Empirical standard deviation of λ̂.
    pub spread_hz: f64,
    /// 1/√(k I(λ_true)).
    pub cramer_rao_hz: f64,
    /// spread / λ_true, the achieved δ; NaN for λ_true = 0.
    pub relative_spread: f64,
    /// spread / Cramér–Rao floor.
    pub efficiency_ratio: f64,
}

#[allow(clippy::too_many_arguments)]
pub fn calibrate_estimator(
    spec: &ExperimentSpec,
    rc: f64,
    mode: BoundMode,
    policy: FactorPolicy,
    lambda_true: f64,
    k: u64,
    meta: usize,
    seed: u64,
) -> Result<CalibrationReport> {
    if k < MIN_REPETITIONS {
        return Err(Error::Config(format!("calibration needs k >= {MIN_REPETITIONS}, got {k}")));
    }
    if meta < 2 {
        return Err(Error::Config("calibration needs at least 2 meta-repetitions".into()));
    }
    if !(lambda_true >= 0.0 && lambda_true.is_finite()) {
        return Err(Error::Config(format!("lambda_true must be non-negative, got {lambda_true:e}")));
    }
    let split = variance_split_with(spec, rc, mode, policy)?;
    if !(split.alpha_csl_sq > 0.0) {
        return Err(Error::Numerical("no CSL sensitivity at this r_C".into()));
    }
    let rates = rates_with(&CslPoint::new(lambda_true, rc)?, &spec.species, &spec.geometry, policy)?;
    let counts = count_distribution_with_rates(spec, &rates);
    if counts.insensitive {
        return Err(Error::Config("mean phase leaves the readout insensitive (|cos phi| < 0.1)".into()));
    }
    let slope = spec.state.n() * spec.protocol.phase_mean.cos();
    let slope_sq = slope * slope;
    let normal = Normal::new(counts.mean, counts.std_dev())
        .map_err(|e| Error::Numerical(format!("count distribution: {e}")))?;

    let estimates: Vec<f64> = (0..meta)
        .into_par_iter()
        .map(|i| {
            let mut rng = ChaCha8Rng::seed_from_u64(stream_seed(seed, i as u64));
            let (mut mean, mut m2) = (0.0, 0.0);
            for j in 0..k {
                let x = normal.sample(&mut rng);
                let d = x - mean;
                mean += d / (j + 1) as f64;
                m2 += d * (x - mean);
            }
            let var_phi = m2 / (k - 1) as f64 / slope_sq;
            (var_phi - split.sigma_conv_sq) / split.alpha_csl_sq
        })
        .collect();

    let m = meta as f64;
    let mean = estimates.iter().sum::<f64>() / m;
    let spread = (estimates.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (m - 1.0)).sqrt();
    let cramer_rao = 1.0 / (k as f64 * fisher_information(&split, lambda_true)).sqrt();
    Ok(CalibrationReport {
        lambda_true_hz: lambda_true,
        k,
        meta_repetitions: meta,
        seed,
        lambda_hat_hz: mean,
        lambda_hat_stderr_hz: spread / m.sqrt(),
        spread_hz: spread,
        cramer_rao_hz: cramer_rao,
        relative_spread: if lambda_true > 0.0 {
            spread / lambda_true
        } else {
            f64::NAN
        },
        efficiency_ratio: spread / cramer_rao,
    })
}
