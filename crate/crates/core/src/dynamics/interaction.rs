use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::numerics::integrate_semi_infinite;
use crate::{Error, Result};

/// Mean-field interaction strength and blockade radius.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EffectiveInteraction {
    /// u = 4π 𝒩^{1/3} C₆^{1/6} Ω_s^{5/6} / 3, rad/s.
    pub u: f64,
    /// z_m = (|C₆|/Ω_s)^{1/6}, m. Infinite when Ω_s = 0.
    pub z_m: f64,
    /// 2 𝒩^{1/3} ∫₀^∞ C₆/(z⁶ + z_m⁶) dz evaluated by adaptive quadrature.
    pub u_quadrature: f64,
}

impl EffectiveInteraction {
    /// u_quadrature / u; 1/2 analytically (the closed form carries twice
    /// the prefactor of the integral it is derived from).
    pub fn quadrature_ratio(&self) -> f64 {
        if self.u == 0.0 {
            return f64::NAN;
        }
        self.u_quadrature / self.u
    }
}

/// Soft-core van der Waals potential C₆/(r⁶ + z_m⁶).
pub fn soft_core_potential(c6: f64, z_m: f64, r: f64) -> f64 {
    c6 / (r.powi(6) + z_m.powi(6))
}

pub fn effective_interaction(density: f64, c6: f64, omega_s: f64) -> Result<EffectiveInteraction> {
    if !(density >= 0.0) {
        return Err(Error::invalid("density", "must be ≥ 0"));
    }
    if !(omega_s >= 0.0) {
        return Err(Error::invalid("omega_s", "must be ≥ 0"));
    }
    if !c6.is_finite() {
        return Err(Error::invalid("c6", "must be finite"));
    }
    if omega_s == 0.0 || density == 0.0 || c6 == 0.0 {
        let z_m = if omega_s == 0.0 {
            f64::INFINITY
        } else {
            (c6.abs() / omega_s).powf(1.0 / 6.0)
        };
        return Ok(EffectiveInteraction {
            u: 0.0,
            z_m,
            u_quadrature: 0.0,
        });
    }
    let z_m = (c6.abs() / omega_s).powf(1.0 / 6.0);
    let n13 = density.cbrt();
    let c6_root = c6.signum() * c6.abs().powf(1.0 / 6.0);
    let u = 4.0 * PI * n13 * c6_root * omega_s.powf(5.0 / 6.0) / 3.0;
    let integral = integrate_semi_infinite(|z| soft_core_potential(c6, z_m, z), 0.0, z_m, 1e-12)?;
    Ok(EffectiveInteraction {
        u,
        z_m,
        u_quadrature: 2.0 * n13 * integral,
    })
}
