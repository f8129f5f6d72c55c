use num_complex::Complex64;
use serde::Serialize;

use crate::atomdata::{
    collisional_decay_rate, doppler_width, inelastic_cross_section, rydberg_state, thermal_velocity,
    SpeciesConstants,
};
use crate::constants::{HBAR, VACUUM_PERMITTIVITY};
use crate::numerics::integrate_adaptive;
use crate::propagation::GasConfig;
use crate::{Error, Result};

const REL_TOL: f64 = 1e-10;
/// Gaussian tails beyond this many Doppler widths are dropped.
const DOPPLER_CUTOFF: f64 = 8.0;
/// Breakpoints at this many Lorentzian widths around the resonant class.
const LINE_WIDTHS: f64 = 10.0;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SteadyState {
    pub temperature: f64,
    /// Dimensionless susceptibility; Im χ̃ ≥ 0 is absorptive.
    pub chi: Complex64,
    /// Accumulated phase kL·Re χ̃, rad.
    pub phase: f64,
    /// Absorption kL·Im χ̃.
    pub absorption: f64,
    pub gamma: f64,
    pub decay: f64,
    pub kv_t: f64,
}

/// (iγ + V + x)Γ / [γ(Ω² + γΓ) + Γ(V + x)²] for a class detuned by x = kv.
pub fn susceptibility_integrand(x: f64, gamma: f64, decay: f64, omega: f64, v_d: f64) -> Complex64 {
    let det = v_d + x;
    let den = gamma * (omega * omega + gamma * decay) + decay * det * det;
    Complex64::new(det * decay / den, gamma * decay / den)
}

/// Steady-state probe susceptibility of a gas shifted by a static
/// interaction `v_d` (rad/s), driven at Rabi frequency `omega`.
///
/// The Maxwell–Boltzmann average is taken in x = kv by adaptive
/// Gauss–Kronrod quadrature, split at the resonant class x = −V_d.
pub fn steady_state_susceptibility(
    temperature: f64,
    omega: f64,
    v_d: f64,
    gas: &GasConfig,
    species: &SpeciesConstants,
) -> Result<SteadyState> {
    if !(omega >= 0.0 && omega.is_finite()) {
        return Err(Error::invalid("omega", "must be finite and ≥ 0"));
    }
    if !v_d.is_finite() {
        return Err(Error::invalid("v_d", "must be finite"));
    }
    let ryd = rydberg_state(gas.n, species)?;
    let decay = ryd.decay_rate();
    if !(decay > 0.0) {
        return Err(Error::invalid("decay", "spontaneous decay must be positive"));
    }
    if !(temperature > 0.0) || !(gas.density > 0.0) {
        return Err(Error::invalid("temperature", "collisional broadening needs T > 0 and 𝒩 > 0"));
    }
    let sigma = inelastic_cross_section(gas.n, temperature, species)?;
    let gamma = collisional_decay_rate(gas.density, temperature, sigma, species)?;
    let kv_t = doppler_width(species, thermal_velocity(temperature, species)?);
    let prefactor = gas.density * ryd.dipole * ryd.dipole / (2.0 * VACUUM_PERMITTIVITY * HBAR);

    let g = |x: f64| susceptibility_integrand(x, gamma, decay, omega, v_d);
    let avg = if kv_t == 0.0 {
        g(0.0)
    } else {
        let lim = DOPPLER_CUTOFF * kv_t;
        let width = (gamma * (omega * omega + gamma * decay) / decay).sqrt();
        let mut cuts = vec![-lim, lim];
        for c in [-v_d - LINE_WIDTHS * width, -v_d, -v_d + LINE_WIDTHS * width] {
            if c > -lim && c < lim {
                cuts.push(c);
            }
        }
        cuts.sort_by(f64::total_cmp);
        let norm = 1.0 / (std::f64::consts::PI.sqrt() * kv_t);
        let mut acc = Complex64::new(0.0, 0.0);
        for w in cuts.windows(2) {
            let weight = |x: f64| norm * (-(x / kv_t) * (x / kv_t)).exp();
            let re = integrate_adaptive(|x| weight(x) * g(x).re, w[0], w[1], REL_TOL)?;
            let im = integrate_adaptive(|x| weight(x) * g(x).im, w[0], w[1], REL_TOL)?;
            acc += Complex64::new(re, im);
        }
        acc
    };
    let chi = avg * prefactor;
    let kl = species.wavenumber() * gas.length;
    Ok(SteadyState {
        temperature,
        chi,
        phase: kl * chi.re,
        absorption: kl * chi.im,
        gamma,
        decay,
        kv_t,
    })
}

/// Shift −C₆/R⁶ of a source atom at distance R from a stored gate excitation.
pub fn gate_shift(c6: f64, separation: f64) -> Result<f64> {
    if !(separation > 0.0 && separation.is_finite()) {
        return Err(Error::invalid("separation", "must be positive"));
    }
    Ok(-c6 / separation.powi(6))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn gas() -> GasConfig {
        GasConfig {
            n: 30,
            temperature: 1.0,
            density: 5e21,
            length: 400e-6,
        }
    }

    #[test]
    fn single_class_closed_form() {
        let (g, d, o) = (3e7, 3.6e4, 1e5);
        let c = susceptibility_integrand(0.0, g, d, o, 0.0);
        let exact = g * d / (g * (o * o + g * d));
        assert!((c.im - exact).abs() < 1e-15 * exact && c.re == 0.0);
    }

    #[test]
    fn vanishes_as_decay_vanishes() {
        let small = susceptibility_integrand(1e6, 1e7, 1e-12, 1e6, 1e8);
        assert!(small.norm() < 1e-16);
    }

    #[test]
    fn absorptive_and_finite() {
        let s = SpeciesConstants::cesium();
        for &t in &[1.0, 10.0, 300.0] {
            let r = steady_state_susceptibility(t, 2e5, -4e8, &gas(), &s).unwrap();
            assert!(r.chi.im > 0.0 && r.chi.re.is_finite());
            assert!((r.absorption - s.wavenumber() * 400e-6 * r.chi.im).abs() < 1e-12 * r.absorption);
        }
        assert!(steady_state_susceptibility(0.0, 1.0, 0.0, &gas(), &s).is_err());
    }

    #[test]
    fn doppler_average_matches_brute_force() {
        let s = SpeciesConstants::cesium();
        let g = gas();
        let v_d = -5e8;
        let r = steady_state_susceptibility(10.0, 6e4, v_d, &g, &s).unwrap();
        // dense midpoint rule over ±8 kv_T
        let (n, lim) = (4_000_000, 8.0 * r.kv_t);
        let h = 2.0 * lim / n as f64;
        let mut acc = Complex64::new(0.0, 0.0);
        for i in 0..n {
            let x = -lim + (i as f64 + 0.5) * h;
            let w = (-(x / r.kv_t).powi(2)).exp() / (std::f64::consts::PI.sqrt() * r.kv_t);
            acc += susceptibility_integrand(x, r.gamma, r.decay, 6e4, v_d) * (w * h);
        }
        let ryd = rydberg_state(30, &s).unwrap();
        let pref = g.density * ryd.dipole * ryd.dipole / (2.0 * VACUUM_PERMITTIVITY * HBAR);
        assert!(((acc * pref - r.chi).norm() / r.chi.norm()) < 1e-4);
    }
}
