//! Single-atom and collisional inputs.

use std::collections::BTreeMap;
use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::constants::{BOHR_RADIUS, BOLTZMANN, EA0, ORBITAL_VELOCITY};
use crate::{Error, Result};

/// Lowest principal quantum number the Rydberg scalings are trusted for.
pub const MIN_PRINCIPAL: u32 = 10;

/// Relative size of the last n′ shell at which the cross-section sum stops.
const SHELL_TOLERANCE: f64 = 1e-6;
const MAX_SHELLS: u32 = 100_000;

/// Atomic species data. Rydberg properties are given at `n_ref` and scaled
/// with the effective quantum number n* = n − δ_P.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SpeciesConstants {
    pub name: String,
    /// kg
    pub mass: f64,
    /// Electron–atom s-wave scattering length in Bohr radii.
    pub scattering_length: f64,
    pub quantum_defect_p: f64,
    /// Ground → nP transition wavelength, m.
    pub wavelength: f64,
    pub n_ref: u32,
    /// rad/s · m⁶ at `n_ref`.
    pub c6_ref: f64,
    /// C·m at `n_ref`.
    pub dipole_ref: f64,
    /// s at `n_ref`.
    pub lifetime_ref: f64,
    /// Explicit per-n lifetimes (s); take precedence over the n*³ scaling.
    #[serde(default)]
    pub lifetime_table: BTreeMap<u32, f64>,
    /// Explicit per-n dipole moments (C·m); take precedence over n*^(-3/2).
    #[serde(default)]
    pub dipole_table: BTreeMap<u32, f64>,
}

impl SpeciesConstants {
    /// Caesium, 6S₁/₂ → nP single-photon excitation at 319 nm.
    ///
    /// δ_P, the reference C₆ and the reference dipole are configuration
    /// choices; see the README for how the shipped values were chosen.
    pub fn cesium() -> Self {
        let mut lifetime_table = BTreeMap::new();
        lifetime_table.insert(30, 27.79e-6);
        SpeciesConstants {
            name: "Cs".to_string(),
            mass: 132.905_451_933 * crate::constants::ATOMIC_MASS_UNIT,
            scattering_length: 21.7,
            quantum_defect_p: 3.56,
            wavelength: 319e-9,
            n_ref: 30,
            c6_ref: CS_C6_REF,
            dipole_ref: CS_DIPOLE_REF_EA0 * EA0,
            lifetime_ref: 27.79e-6,
            lifetime_table,
            dipole_table: BTreeMap::new(),
        }
    }

    pub fn preset(name: &str) -> Option<Self> {
        match name {
            "Cs" | "cs" | "cesium" | "caesium" => Some(Self::cesium()),
            _ => None,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.mass > 0.0 && self.mass.is_finite()) {
            return Err(Error::invalid("mass", "must be positive"));
        }
        if !(self.wavelength > 0.0 && self.wavelength.is_finite()) {
            return Err(Error::invalid("wavelength", "must be positive"));
        }
        if !(0.0..5.0).contains(&self.quantum_defect_p) {
            return Err(Error::invalid("quantum_defect_p", "must lie in [0, 5)"));
        }
        if !self.scattering_length.is_finite() {
            return Err(Error::invalid("scattering_length", "must be finite"));
        }
        if self.n_ref < MIN_PRINCIPAL {
            return Err(Error::invalid("n_ref", format!("must be ≥ {MIN_PRINCIPAL}")));
        }
        if !(self.lifetime_ref > 0.0) {
            return Err(Error::invalid("lifetime_ref", "must be positive"));
        }
        if !self.c6_ref.is_finite() || !self.dipole_ref.is_finite() {
            return Err(Error::invalid("c6_ref", "reference values must be finite"));
        }
        Ok(())
    }

    /// Optical wavenumber k = 2π/λ, 1/m.
    pub fn wavenumber(&self) -> f64 {
        2.0 * PI / self.wavelength
    }

    pub fn n_star(&self, n: u32) -> f64 {
        n as f64 - self.quantum_defect_p
    }
}

/// Reference C₆ for Cs |30P⟩, rad/s · m⁶.
pub const CS_C6_REF: f64 = 2.0 * PI * 60.0e9 * 1e-36;
/// Reference |6S⟩ → |30P⟩ transition dipole in units of e·a_B.
pub const CS_DIPOLE_REF_EA0: f64 = 0.006;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RydbergState {
    pub n: u32,
    pub n_star: f64,
    /// rad/s · m⁶
    pub c6: f64,
    /// C·m
    pub dipole: f64,
    /// s
    pub lifetime: f64,
}

impl RydbergState {
    /// Spontaneous decay rate Γ = 1/lifetime, 1/s.
    pub fn decay_rate(&self) -> f64 {
        1.0 / self.lifetime
    }
}

/// v_T = √(2 k_B T / M).
pub fn thermal_velocity(temperature: f64, species: &SpeciesConstants) -> Result<f64> {
    if !(temperature >= 0.0) || !temperature.is_finite() {
        return Err(Error::invalid("temperature", format!("{temperature} K is not ≥ 0")));
    }
    Ok((2.0 * BOLTZMANN * temperature / species.mass).sqrt())
}

/// Doppler width k·v_T in rad/s.
pub fn doppler_width(species: &SpeciesConstants, v_thermal: f64) -> f64 {
    species.wavenumber() * v_thermal
}

/// The bracket arctan(2/λ) − (λ/2) ln((4+λ²)/λ²) of the cross-section sum.
///
/// Non-negative for λ > 0 and ~ (2/λ)³/6 for large λ, where the series is
/// used to avoid cancellation.
pub fn cross_section_term(lambda: f64) -> f64 {
    debug_assert!(lambda > 0.0);
    let x = 2.0 / lambda;
    if x < 0.05 {
        // g(x) = Σ_{k≥1} (−1)^{k+1} k x^{2k+1} / ((2k+1)(k+1))
        let x2 = x * x;
        let mut term = x * x2;
        let mut sum = 0.0;
        for k in 1..12 {
            let kf = k as f64;
            let sign = if k % 2 == 1 { 1.0 } else { -1.0 };
            sum += sign * kf * term / ((2.0 * kf + 1.0) * (kf + 1.0));
            term *= x2;
        }
        sum
    } else {
        x.atan() - x.powi(2).ln_1p() / x
    }
}

/// Inelastic nP → n′ cross-section σ_nP (m²), summed over neighbouring
/// manifolds until the outermost shell is negligible.
pub fn inelastic_cross_section(n: u32, temperature: f64, species: &SpeciesConstants) -> Result<f64> {
    if n < MIN_PRINCIPAL {
        return Err(Error::invalid("n", format!("{n} is below {MIN_PRINCIPAL}")));
    }
    if !(temperature > 0.0) {
        return Err(Error::invalid("temperature", "cross-section needs T > 0"));
    }
    let v_t = thermal_velocity(temperature, species)?;
    let a_s = species.scattering_length * BOHR_RADIUS;
    let v0 = ORBITAL_VELOCITY;
    let nf = n as f64;
    let prefactor = 4.0 * v0 * v0 * a_s * a_s / (v_t * v_t);
    let lambda_scale = v0 / (nf * nf * v_t);

    let term = |np: u32| -> f64 {
        let lambda = (species.quantum_defect_p + np as f64 - nf).abs() * lambda_scale;
        if lambda == 0.0 {
            // elastic channel
            return 0.0;
        }
        prefactor / (np as f64).powi(3) * cross_section_term(lambda)
    };

    // shells nearer than the quantum defect can still grow; only test the
    // stopping rule beyond them
    let min_shells = species.quantum_defect_p.ceil() as u32 + 2;
    let mut total = term(n);
    for delta in 1..=MAX_SHELLS {
        let mut shell = term(n + delta);
        if n >= MIN_PRINCIPAL + delta {
            shell += term(n - delta);
        }
        total += shell;
        if delta >= min_shells && shell <= SHELL_TOLERANCE * total {
            return Ok(total);
        }
    }
    Err(Error::NotConverged(format!(
        "cross-section sum for n = {n}, T = {temperature} K"
    )))
}

/// γ₂₁ᶜ = 𝒩 v_T σ_nP, 1/s.
pub fn collisional_decay_rate(
    density: f64,
    temperature: f64,
    cross_section: f64,
    species: &SpeciesConstants,
) -> Result<f64> {
    if !(density >= 0.0) {
        return Err(Error::invalid("density", "must be ≥ 0"));
    }
    if !(temperature > 0.0) {
        return Err(Error::invalid("temperature", "must be > 0"));
    }
    Ok(density * thermal_velocity(temperature, species)? * cross_section)
}

pub fn rydberg_state(n: u32, species: &SpeciesConstants) -> Result<RydbergState> {
    if n < MIN_PRINCIPAL {
        return Err(Error::invalid("n", format!("{n} is below {MIN_PRINCIPAL}")));
    }
    let n_star = species.n_star(n);
    let n_star_ref = species.n_star(species.n_ref);
    if n_star <= 0.0 {
        return Err(Error::invalid("n", "effective quantum number must be positive"));
    }
    let ratio = n_star / n_star_ref;
    let c6 = species.c6_ref * ratio.powi(11);
    let dipole = species
        .dipole_table
        .get(&n)
        .copied()
        .unwrap_or(species.dipole_ref * ratio.powf(-1.5));
    let lifetime = species
        .lifetime_table
        .get(&n)
        .copied()
        .unwrap_or(species.lifetime_ref * ratio.powi(3));
    Ok(RydbergState {
        n,
        n_star,
        c6,
        dipole,
        lifetime,
    })
}
