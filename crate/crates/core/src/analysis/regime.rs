use serde::{Deserialize, Serialize};

use crate::atomdata::{
    collisional_decay_rate, doppler_width, inelastic_cross_section, rydberg_state, thermal_velocity,
    SpeciesConstants,
};
use crate::dynamics::effective_interaction;
use crate::Result;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RegimeLabel {
    DopplerDominant,
    RydbergDominant,
    AbsorptionDominant,
}

impl RegimeLabel {
    pub fn as_str(self) -> &'static str {
        match self {
            RegimeLabel::DopplerDominant => "doppler_dominant",
            RegimeLabel::RydbergDominant => "rydberg_dominant",
            RegimeLabel::AbsorptionDominant => "absorption_dominant",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct RegimePoint {
    /// m⁻³
    pub density: f64,
    /// K
    pub temperature: f64,
    /// rad/s
    pub kv_t: f64,
    /// rad/s
    pub u: f64,
    /// 1/s
    pub gamma: f64,
    pub label: RegimeLabel,
    /// (kv_T + u)/γ; infinite without collisions.
    pub ratio: f64,
}

/// Dephasing beyond 100γ is coherent; among coherent points the
/// interaction dominates once it reaches ten Doppler widths.
pub fn classify(kv_t: f64, u: f64, gamma: f64) -> RegimeLabel {
    let spread = kv_t + u;
    if spread < 100.0 * gamma {
        RegimeLabel::AbsorptionDominant
    } else if u >= 10.0 * kv_t {
        RegimeLabel::RydbergDominant
    } else {
        RegimeLabel::DopplerDominant
    }
}

pub fn regime_classify(
    density: f64,
    temperature: f64,
    n: u32,
    omega_s: f64,
    species: &SpeciesConstants,
) -> Result<RegimePoint> {
    let ryd = rydberg_state(n, species)?;
    let kv_t = doppler_width(species, thermal_velocity(temperature, species)?);
    let u = effective_interaction(density, ryd.c6, omega_s)?.u.abs();
    let gamma = if temperature > 0.0 && density > 0.0 {
        let sigma = inelastic_cross_section(n, temperature, species)?;
        collisional_decay_rate(density, temperature, sigma, species)?
    } else {
        0.0
    };
    let ratio = if gamma > 0.0 { (kv_t + u) / gamma } else { f64::INFINITY };
    Ok(RegimePoint {
        density,
        temperature,
        kv_t,
        u,
        gamma,
        label: classify(kv_t, u, gamma),
        ratio,
    })
}
