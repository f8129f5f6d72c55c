use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use super::PulseSpec;
use crate::atomdata::{
    collisional_decay_rate, doppler_width, inelastic_cross_section, rydberg_state, thermal_velocity, RydbergState,
    SpeciesConstants,
};
use crate::constants::{HBAR, SPEED_OF_LIGHT, VACUUM_PERMITTIVITY};
use crate::dynamics::{effective_interaction, EffectiveInteraction};
use crate::{Error, Result};

/// RK4 stability budget: dt · (largest rate) must stay below this.
pub const STABILITY_LIMIT: f64 = 2.5;
/// Default time steps per pulse duration.
pub const STEPS_PER_TAU: f64 = 200.0;
/// Default accuracy budget: dt · (largest rate) for the automatic step.
pub const ACCURACY_LIMIT: f64 = 0.25;
/// Default output samples per pulse duration.
pub const SAMPLES_PER_TAU: f64 = 50.0;

/// Atomic-level model.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Level {
    MeanField,
    TwoBody,
}

impl std::str::FromStr for Level {
    type Err = String;
    fn from_str(s: &str) -> std::result::Result<Self, String> {
        match s {
            "mean_field" | "mf" => Ok(Level::MeanField),
            "two_body" | "twobody" => Ok(Level::TwoBody),
            _ => Err(format!("unknown level `{s}` (expected mean_field or two_body)")),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GasConfig {
    /// Principal quantum number of the nP state.
    pub n: u32,
    /// K
    pub temperature: f64,
    /// m⁻³
    pub density: f64,
    /// Medium length L, m.
    pub length: f64,
}

impl GasConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.temperature >= 0.0 && self.temperature.is_finite()) {
            return Err(Error::invalid("temperature", "must be finite and ≥ 0"));
        }
        if !(self.density >= 0.0 && self.density.is_finite()) {
            return Err(Error::invalid("density", "must be finite and ≥ 0"));
        }
        if !(self.length > 0.0 && self.length.is_finite()) {
            return Err(Error::invalid("length", "must be positive"));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NumericsConfig {
    /// Chebyshev nodes along z.
    pub n_z: usize,
    /// Gauss–Hermite velocity classes.
    pub n_v: usize,
    /// Time step, s; default min(τ/200, 0.25/largest rate).
    pub dt: Option<f64>,
    /// Output sample spacing, s; default τ/50.
    pub dt_out: Option<f64>,
    /// Simulated window, s; default t₀ + L/c + 10τ.
    pub window: Option<f64>,
    /// z-steps of the marching cross-check.
    pub march_steps: usize,
    /// Cap on stored complex samples per run.
    pub max_stored: usize,
}

impl Default for NumericsConfig {
    fn default() -> Self {
        NumericsConfig {
            n_z: 64,
            n_v: 16,
            dt: None,
            dt_out: None,
            window: None,
            march_steps: 200,
            max_stored: 200_000_000,
        }
    }
}

/// How the effective interaction is formed.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum InteractionForm {
    /// u = 4π𝒩^{1/3}C₆^{1/6}Ω_s^{5/6}/3.
    #[default]
    ClosedForm,
    /// u = 2𝒩^{1/3}∫₀^∞ V(z) dz by quadrature.
    Quadrature,
}

/// Switches and overrides for individual physical effects.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PhysicsOptions {
    pub doppler: bool,
    pub collisions: bool,
    pub interaction: bool,
    pub spontaneous_decay: bool,
    pub interaction_form: InteractionForm,
    /// Fixed u, rad/s, replacing the computed value.
    pub u_override: Option<f64>,
    /// Fixed γ₂₁ᶜ, 1/s, replacing the computed value.
    pub gamma_override: Option<f64>,
}

impl Default for PhysicsOptions {
    fn default() -> Self {
        PhysicsOptions {
            doppler: true,
            collisions: true,
            interaction: true,
            spontaneous_decay: false,
            interaction_form: InteractionForm::ClosedForm,
            u_override: None,
            gamma_override: None,
        }
    }
}

impl PhysicsOptions {
    /// Plain two-level atoms at rest: no Doppler, collisions, interaction or decay.
    pub fn bare() -> Self {
        PhysicsOptions {
            doppler: false,
            collisions: false,
            interaction: false,
            spontaneous_decay: false,
            ..Default::default()
        }
    }
}

/// Everything a propagation run needs.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Scenario {
    pub species: SpeciesConstants,
    pub gas: GasConfig,
    pub pulse: PulseSpec,
    pub numerics: NumericsConfig,
    pub physics: PhysicsOptions,
}

impl Scenario {
    pub fn validate(&self) -> Result<()> {
        self.species.validate()?;
        self.gas.validate()?;
        self.pulse.validate()?;
        if self.numerics.n_v == 0 {
            return Err(Error::invalid("n_v", "at least one velocity class is required"));
        }
        for (name, v) in [("dt", self.numerics.dt), ("dt_out", self.numerics.dt_out), ("window", self.numerics.window)] {
            if let Some(x) = v {
                if !(x > 0.0 && x.is_finite()) {
                    return Err(Error::invalid(name, "must be positive"));
                }
            }
        }
        Ok(())
    }

    /// SHA-256 of the canonical JSON serialisation.
    pub fn config_hash(&self, level: Level) -> String {
        let json = serde_json::to_string(&(self, level)).expect("scenario serialises");
        let digest = Sha256::digest(json.as_bytes());
        digest.iter().map(|b| format!("{b:02x}")).collect()
    }
}

/// Derived physical rates for a scenario, after switches and overrides.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ResolvedPhysics {
    pub rydberg: RydbergState,
    /// Optical wavenumber, 1/m.
    pub k: f64,
    /// Thermal velocity entering the velocity grid, m/s (0 with Doppler off).
    pub v_thermal: f64,
    /// Doppler width k·v_T, rad/s, from the gas temperature.
    pub kv_t: f64,
    /// Collisional decay from the gas, 1/s.
    pub gamma_collisional: f64,
    /// Collisional decay used in the equations, 1/s.
    pub gamma: f64,
    pub interaction: EffectiveInteraction,
    /// Interaction used in the mean-field equations, rad/s.
    pub u: f64,
    /// Spontaneous decay used in the equations, 1/s.
    pub decay: f64,
    /// Field coupling κ = k𝒩d²/(ε₀ħ), 1/(s·m).
    pub kappa: f64,
}

/// κ = k𝒩d²/(ε₀ħ): ∂_zΩ = −iκR₂₁ in the retarded frame.
pub fn coupling_constant(species: &SpeciesConstants, dipole: f64, density: f64) -> f64 {
    species.wavenumber() * density * dipole * dipole / (VACUUM_PERMITTIVITY * HBAR)
}

pub fn resolve_physics(scenario: &Scenario) -> Result<ResolvedPhysics> {
    scenario.validate()?;
    let species = &scenario.species;
    let gas = &scenario.gas;
    let opts = &scenario.physics;
    let rydberg = rydberg_state(gas.n, species)?;
    let v_t = thermal_velocity(gas.temperature, species)?;
    let gamma_collisional = if gas.temperature > 0.0 && gas.density > 0.0 {
        let sigma = inelastic_cross_section(gas.n, gas.temperature, species)?;
        collisional_decay_rate(gas.density, gas.temperature, sigma, species)?
    } else {
        0.0
    };
    let gamma = match opts.gamma_override {
        Some(g) if !(g >= 0.0 && g.is_finite()) => return Err(Error::invalid("gamma_override", "must be ≥ 0")),
        Some(g) => g,
        None if opts.collisions => gamma_collisional,
        None => 0.0,
    };
    let interaction = effective_interaction(gas.density, rydberg.c6, scenario.pulse.omega_s)?;
    let u = match opts.u_override {
        Some(u) if !u.is_finite() => return Err(Error::invalid("u_override", "must be finite")),
        Some(u) => u,
        None if !opts.interaction => 0.0,
        None => match opts.interaction_form {
            InteractionForm::ClosedForm => interaction.u,
            InteractionForm::Quadrature => interaction.u_quadrature,
        },
    };
    Ok(ResolvedPhysics {
        rydberg,
        k: species.wavenumber(),
        v_thermal: if opts.doppler { v_t } else { 0.0 },
        kv_t: doppler_width(species, v_t),
        gamma_collisional,
        gamma,
        interaction,
        u,
        decay: if opts.spontaneous_decay { rydberg.decay_rate() } else { 0.0 },
        kappa: coupling_constant(species, rydberg.dipole, gas.density),
    })
}

/// Time discretisation of a run.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TimePlan {
    pub dt: f64,
    pub steps: usize,
    /// Steps between output samples.
    pub stride: usize,
    /// Simulated window, s (a whole number of steps).
    pub t_end: f64,
}

impl TimePlan {
    /// `max_rate` is the largest field-independent rate of the atomic model.
    pub fn new(scenario: &Scenario, max_rate: f64) -> Result<Self> {
        let tau = scenario.pulse.tau;
        let rate = max_rate + scenario.pulse.omega_s;
        let min_window = scenario.pulse.t0 + scenario.gas.length / SPEED_OF_LIGHT + 10.0 * tau;
        let window = scenario.numerics.window.unwrap_or(min_window);
        if window < min_window * (1.0 - 1e-12) {
            return Err(Error::invalid("window", format!("must cover t₀ + L/c + 10τ = {min_window:e} s")));
        }
        let dt = match scenario.numerics.dt {
            Some(dt) => dt,
            None if rate > 0.0 => (tau / STEPS_PER_TAU).min(ACCURACY_LIMIT / rate),
            None => tau / STEPS_PER_TAU,
        };
        if dt * rate > STABILITY_LIMIT {
            return Err(Error::invalid(
                "dt",
                format!("dt·rate = {:.3} exceeds the RK4 stability budget {STABILITY_LIMIT}", dt * rate),
            ));
        }
        let steps = (window / dt).ceil() as usize;
        let dt_out = scenario.numerics.dt_out.unwrap_or(tau / SAMPLES_PER_TAU);
        let stride = ((dt_out / dt).floor() as usize).max(1);
        Ok(TimePlan {
            dt,
            steps,
            stride,
            t_end: steps as f64 * dt,
        })
    }

    /// Number of output samples.
    pub fn samples(&self) -> usize {
        self.steps / self.stride + 1
    }

    pub fn sample_time(&self, m: usize) -> f64 {
        (m * self.stride) as f64 * self.dt
    }
}
