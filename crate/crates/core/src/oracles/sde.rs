// SPDX-License-Identifier: Apache-2.0

//! Euler–Maruyama sampling of
//!
//! ```text
//! dφ = ζ n dt + √(Γ_P + 2γ) dW_φ
//! dn = √(N²Γ_S/2) dW_n
//! ```
//!
//! whose Fokker–Planck generator has diffusion Γ_P/2 in φ and N²Γ_S/4 in n.
//! Each trajectory draws from its own ChaCha8 stream seeded with
//! `splitmix64(seed) ^ index`, so results do not depend on how trajectories are
//! spread over threads. The seed is scrambled first: with a raw
//! `seed ^ index`, nearby seeds would only permute the same set of streams.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use rayon::prelude::*;

use crate::dynamics::{rates, PhaseMoments, Rates};
use crate::error::{Error, Result};
use crate::model::{CslPoint, ExperimentSpec};
use crate::numerics::stream_seed;

pub const DEFAULT_STEPS: usize = 10_000;
const MIN_TRAJECTORIES: usize = 1_000;
const MIN_STEPS: usize = 1_000;
const MAX_PHASE_STEP: f64 = 1e-3;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SdeConfig {
    pub n_traj: usize,
    pub n_steps: usize,
    pub seed: u64,
}

impl SdeConfig {
    fn check(&self) -> Result<()> {
        if self.n_traj < MIN_TRAJECTORIES || self.n_steps < MIN_STEPS {
            return Err(Error::Config(format!(
                "need n_traj >= {MIN_TRAJECTORIES} and n_steps >= {MIN_STEPS} (got {} and {})",
                self.n_traj, self.n_steps
            )));
        }
        Ok(())
    }
}

/// Sample statistics of φ(t) over all trajectories.
#[derive(Debug, Clone, PartialEq)]
pub struct SdeMoments {
    pub moments: PhaseMoments,
    pub stderr_mean: f64,
    pub stderr_variance: f64,
    pub n_traj: usize,
    /// Set when ζ·max|n|·dt exceeded 10⁻³ rad.
    pub step_warning: Option<String>,
}

impl SdeMoments {
    /// (analytic − empirical) / standard error of the variance.
    pub fn z_score(&self, analytic_variance: f64) -> f64 {
        (self.moments.variance - analytic_variance) / self.stderr_variance
    }
}

/// Recorded (φ, n) samples of one trajectory.
#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory {
    pub seed: u64,
    pub index: usize,
    pub times: Vec<f64>,
    pub phi: Vec<f64>,
    pub n: Vec<f64>,
}

struct Path {
    phi: f64,
    max_abs_n: f64,
    recorded: Vec<(f64, f64)>,
}

struct Model {
    phi0_mean: f64,
    phi0_sd: f64,
    n0_sd: f64,
    zeta: f64,
    echo: bool,
    dt: f64,
    phase_kick: f64,
    number_kick: f64,
    n_steps: usize,
}

impl Model {
    fn new(spec: &ExperimentSpec, rates: &Rates, n_steps: usize) -> Self {
        let dt = spec.protocol.t / n_steps as f64;
        let n = spec.state.n();
        Model {
            phi0_mean: spec.protocol.phase_mean,
            phi0_sd: spec.state.phase_variance0().sqrt(),
            n0_sd: spec.state.sigma_n0(),
            zeta: spec.protocol.zeta,
            echo: spec.protocol.echo,
            dt,
            phase_kick: ((rates.gamma_p + 2.0 * spec.noise.gamma) * dt).sqrt(),
            number_kick: (0.5 * n * n * rates.gamma_s * dt).sqrt(),
            n_steps,
        }
    }

    fn run(&self, seed: u64, index: usize, record: &[usize]) -> Path {
        let mut rng = ChaCha8Rng::seed_from_u64(stream_seed(seed, index as u64));
        let mut z = || -> f64 { StandardNormal.sample(&mut rng) };
        let mut phi = self.phi0_mean + self.phi0_sd * z();
        let mut n = self.n0_sd * z();
        let mut max_abs_n = n.abs();
        let mut recorded = Vec::with_capacity(record.len());
        let mut next = record.iter().peekable();
        let flip = self.n_steps / 2;
        for step in 0..self.n_steps {
            while next.peek() == Some(&&step) {
                recorded.push((phi, n));
                next.next();
            }
            let zeta = if self.echo && step >= flip { -self.zeta } else { self.zeta };
            let dphi = zeta * n * self.dt + self.phase_kick * z();
            n += self.number_kick * z();
            phi += dphi;
            max_abs_n = max_abs_n.max(n.abs());
        }
        for _ in next {
            recorded.push((phi, n));
        }
        Path {
            phi,
            max_abs_n,
            recorded,
        }
    }
}

/// Monte Carlo phase moments at the end of the protocol.
///
/// The echo flip happens at step `n_steps / 2`; use an even step count.
pub fn sde_sample(spec: &ExperimentSpec, point: &CslPoint, cfg: &SdeConfig) -> Result<SdeMoments> {
    let r = rates(point, &spec.species, &spec.geometry)?;
    sde_sample_with_rates(spec, &r, cfg)
}

pub fn sde_sample_with_rates(spec: &ExperimentSpec, rates: &Rates, cfg: &SdeConfig) -> Result<SdeMoments> {
    cfg.check()?;
    let model = Model::new(spec, rates, cfg.n_steps);
    let finals: Vec<(f64, f64)> = (0..cfg.n_traj)
        .into_par_iter()
        .map(|i| {
            let p = model.run(cfg.seed, i, &[]);
            (p.phi, p.max_abs_n)
        })
        .collect();

    let k = finals.len() as f64;
    let mean = finals.iter().map(|p| p.0).sum::<f64>() / k;
    let (mut m2, mut m4) = (0.0, 0.0);
    let mut max_abs_n = 0.0f64;
    for &(phi, mn) in &finals {
        let d = phi - mean;
        let d2 = d * d;
        m2 += d2;
        m4 += d2 * d2;
        max_abs_n = max_abs_n.max(mn);
    }
    let var = m2 / (k - 1.0);
    let m4 = m4 / k;
    let var_of_var = (m4 - var * var * (k - 3.0) / (k - 1.0)) / k;

    let phase_step = spec.protocol.zeta.abs() * max_abs_n * model.dt;
    let step_warning = (phase_step > MAX_PHASE_STEP).then(|| {
        format!("dispersion phase step {phase_step:.3e} rad exceeds {MAX_PHASE_STEP:e}; increase n_steps")
    });

    Ok(SdeMoments {
        moments: PhaseMoments::new(mean, var, spec.protocol.t),
        stderr_mean: (var / k).sqrt(),
        stderr_variance: var_of_var.max(0.0).sqrt(),
        n_traj: cfg.n_traj,
        step_warning,
    })
}

/// Full (φ, n) paths recorded at the requested times, from the same random
/// streams [`sde_sample`] uses.
pub fn sample_paths(
    spec: &ExperimentSpec,
    rates: &Rates,
    cfg: &SdeConfig,
    times: &[f64],
) -> Result<Vec<Trajectory>> {
    cfg.check()?;
    let model = Model::new(spec, rates, cfg.n_steps);
    let mut steps: Vec<usize> = times
        .iter()
        .map(|&t| ((t / model.dt).round().max(0.0) as usize).min(cfg.n_steps))
        .collect();
    steps.sort_unstable();
    let recorded_times: Vec<f64> = steps.iter().map(|&s| s as f64 * model.dt).collect();
    Ok((0..cfg.n_traj)
        .into_par_iter()
        .map(|i| {
            let p = model.run(cfg.seed, i, &steps);
            Trajectory {
                seed: cfg.seed,
                index: i,
                times: recorded_times.clone(),
                phi: p.recorded.iter().map(|r| r.0).collect(),
                n: p.recorded.iter().map(|r| r.1).collect(),
            }
        })
        .collect())
}
