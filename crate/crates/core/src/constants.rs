//! CODATA 2018 constants in SI units.

pub const BOLTZMANN: f64 = 1.380_649e-23;
pub const HBAR: f64 = 1.054_571_817e-34;
pub const ELECTRON_MASS: f64 = 9.109_383_701_5e-31;
pub const BOHR_RADIUS: f64 = 5.291_772_109_03e-11;
pub const SPEED_OF_LIGHT: f64 = 299_792_458.0;
pub const VACUUM_PERMITTIVITY: f64 = 8.854_187_812_8e-12;
pub const ATOMIC_MASS_UNIT: f64 = 1.660_539_066_60e-27;
pub const ELEMENTARY_CHARGE: f64 = 1.602_176_634e-19;

/// Orbital velocity of the hydrogenic ground-state electron, ħ/(mₑ a_B).
pub const ORBITAL_VELOCITY: f64 = HBAR / (ELECTRON_MASS * BOHR_RADIUS);

/// Atomic unit of dipole moment, e·a_B.
pub const EA0: f64 = ELEMENTARY_CHARGE * BOHR_RADIUS;
