//! Atomic equations of motion.
//!
//! Two fidelity levels share the [`AtomicMedium`] interface used by the
//! propagation solvers: the mean-field Bloch equations with the local-field
//! interaction shift ([`MeanFieldMedium`]) and the one- plus two-body
//! correlator hierarchy ([`TwoBodyMedium`]).
//!
//! Sign conventions: ρ₂₁ = ⟨2|ρ|1⟩, so a resonant field drives
//! ∂ₜρ₂₁ = −iΩw/2 and ∂ₜw = i(Ωρ₁₂ − Ω*ρ₂₁). Detunings enter as −iΔρ₂₁.

mod interaction;
mod meanfield;
mod transient;
mod twobody;

pub use interaction::{effective_interaction, soft_core_potential, EffectiveInteraction};
pub use meanfield::{mf_rhs, MeanFieldMedium, MeanFieldParams, MfBlochState};
pub use transient::{transient_dynamics, Transient};
pub use twobody::{twobody_rhs, TwoBodyMedium, TwoBodyParams, TwoBodyState};

use num_complex::Complex64;

use crate::Result;

/// Slack allowed on density-matrix bounds before a run is aborted.
pub const BOUND_TOLERANCE: f64 = 1e-3;

/// Atoms on a set of spatial sites, driven by a per-site field.
///
/// States are flat complex vectors so that one RK4 implementation serves
/// every model.
pub trait AtomicMedium: Sync {
    fn sites(&self) -> usize;

    fn state_len(&self) -> usize;

    /// All atoms in |1⟩, with factorised (vanishing) correlations.
    fn ground_state(&self) -> Vec<Complex64>;

    /// Time derivative of `state` under the per-site Rabi frequencies `omega`.
    fn derivative(&self, state: &[Complex64], omega: &[Complex64], out: &mut [Complex64]);

    /// Velocity-averaged coherence R₂₁ per site.
    fn coherence(&self, state: &[Complex64], out: &mut [Complex64]);

    /// Velocity-averaged ρ₂₂ per site.
    fn excitation(&self, state: &[Complex64], out: &mut [f64]);

    /// Smallest per-class excited-state population. The strong-collision
    /// redistribution term does not preserve positivity, so this can dip
    /// slightly below zero.
    fn min_population(&self, state: &[Complex64]) -> f64;

    /// Stability guard: aborts when any stored density-matrix element
    /// exceeds 1 + [`BOUND_TOLERANCE`] in magnitude.
    fn check_bounds(&self, state: &[Complex64], t: f64) -> Result<()>;
}
