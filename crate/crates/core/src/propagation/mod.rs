//! Field propagation through the medium.
//!
//! Two independent solvers share [`Scenario`] and [`PropagationResult`]:
//! [`run_propagation`] (Chebyshev collocation in z, RK4 in retarded time)
//! and [`cross_check_marching`] (RK4 in z over whole time series).

mod marching;
mod pulse;
mod result;
mod scenario;
mod spectral;

pub use marching::cross_check_marching;
pub use pulse::{PulseShape, PulseSpec};
pub use result::{PropagationResult, RunMetadata};
pub use scenario::{
    coupling_constant, resolve_physics, GasConfig, InteractionForm, Level, NumericsConfig, PhysicsOptions,
    ResolvedPhysics, Scenario, TimePlan, ACCURACY_LIMIT, SAMPLES_PER_TAU, STABILITY_LIMIT, STEPS_PER_TAU,
};
pub use spectral::{polarization_source, run_propagation, FIELD_GROWTH_LIMIT};

use crate::atomdata::SpeciesConstants;
use crate::constants::{HBAR, VACUUM_PERMITTIVITY};
use crate::{Error, Result};

/// Slow-light estimate v_g ≈ 2ε₀ħ|Ω|²/(k𝒩d²), m/s.
pub fn group_velocity_estimate(omega: f64, density: f64, dipole: f64, species: &SpeciesConstants) -> Result<f64> {
    if !(omega.abs() > 0.0) {
        return Err(Error::invalid("omega", "the estimate is undefined at Ω = 0"));
    }
    if !(density > 0.0) || dipole == 0.0 {
        return Err(Error::invalid("density", "needs a polarisable medium"));
    }
    Ok(2.0 * VACUUM_PERMITTIVITY * HBAR * omega * omega / (species.wavenumber() * density * dipole * dipole))
}

#[cfg(test)]
mod tests {
    use super::*;
    use num_complex::Complex64;

    #[test]
    fn source_sign_and_linearity() {
        assert_eq!(polarization_source(&[Complex64::new(0.0, 0.0)], 3.0)[0], Complex64::new(0.0, 0.0));
        let s = polarization_source(&[Complex64::new(0.0, -0.2)], 5.0)[0];
        assert!(s.im.abs() < 1e-15 && (s.re + 1.0).abs() < 1e-15);
        let sp = SpeciesConstants::cesium();
        let d = sp.dipole_ref;
        let a = coupling_constant(&sp, d, 1e20);
        assert!((coupling_constant(&sp, d, 2e20) / a - 2.0).abs() < 1e-14);
    }

    #[test]
    fn group_velocity_scalings() {
        let sp = SpeciesConstants::cesium();
        let d = sp.dipole_ref;
        let v = group_velocity_estimate(1e9, 5e21, d, &sp).unwrap();
        assert!((group_velocity_estimate(4e9, 5e21, d, &sp).unwrap() / v - 16.0).abs() < 1e-12);
        assert!((group_velocity_estimate(1e9, 1e22, d, &sp).unwrap() / v - 0.5).abs() < 1e-12);
        assert!(group_velocity_estimate(0.0, 5e21, d, &sp).is_err());
    }
}
