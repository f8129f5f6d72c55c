//! Nanosecond pulse propagation in warm, dense Rydberg gases.
//!
//! The crate is organised bottom-up:
//!
//! * [`atomdata`] — single-atom and collisional inputs (thermal velocity,
//!   Doppler width, inelastic cross-sections, scaled Rydberg properties).
//! * [`numerics`] — Gauss–Hermite velocity quadrature, Chebyshev collocation
//!   on `[0, L]`, classic RK4 and an adaptive Gauss–Kronrod integrator.
//! * [`dynamics`] — mean-field and two-body-correlator Bloch equations.
//! * [`propagation`] — the coupled field/atom solvers.
//! * [`analysis`] — transmission, fidelity, optimal-area law and scans,
//!   steady-state susceptibility and the interaction-regime map.
//! * [`config`] — the strict, unit-aware run configuration.
//!
//! Frequencies are angular (rad/s) everywhere inside the crate; lengths are
//! metres, times seconds, densities m⁻³.

pub mod analysis;
pub mod atomdata;
pub mod config;
pub mod constants;
pub mod dynamics;
mod error;
pub mod numerics;
pub mod propagation;
pub mod units;

pub use error::{Error, Result};
pub use num_complex::Complex64 as C64;
