// SPDX-License-Identifier: Apache-2.0

//! Physical constants (CODATA 2018). Everything downstream reads them from here.

/// Reduced Planck constant, J·s.
pub const HBAR: f64 = 1.054_571_817e-34;

/// Unified atomic mass unit, kg.
pub const ATOMIC_MASS_UNIT: f64 = 1.660_539_066_60e-27;

/// Mass of rubidium-87 in u.
pub const RB87_MASS_U: f64 = 86.909_180;

/// Mass of caesium-133 in u.
pub const CS133_MASS_U: f64 = 132.905_452;
