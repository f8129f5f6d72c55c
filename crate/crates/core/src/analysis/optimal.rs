use std::f64::consts::PI;

use num_complex::Complex64;
use serde::Serialize;

use crate::dynamics::{effective_interaction, transient_dynamics, MeanFieldParams};
use crate::propagation::{PulseShape, PulseSpec};
use crate::{Error, Result};

/// Area-theorem value 2π.
pub const THETA_0: f64 = 2.0 * PI;

/// Optimal area of the mean-field ansatz,
/// θ̃ = θ₀·√(2 / (1 + √(1 + 4ε))), ε = u²τ²/θ₀.
///
/// Algebraically identical to (2π/uτ)(√(2πu²τ² + π²) − π)^½ but free of
/// the cancellation at small uτ, so u = 0 gives exactly 2π.
pub fn optimal_area_mf(u: f64, tau: f64) -> Result<f64> {
    if !(u >= 0.0 && u.is_finite()) {
        return Err(Error::invalid("u", "must be finite and ≥ 0"));
    }
    if !(tau > 0.0 && tau.is_finite()) {
        return Err(Error::invalid("tau", "must be positive"));
    }
    let x = u * tau;
    let eps = x * x / THETA_0;
    Ok(THETA_0 * (2.0 / (1.0 + (1.0 + 4.0 * eps).sqrt())).sqrt())
}

/// The same law in its textbook form; loses precision for uτ ≪ 1 and is
/// kept for comparison only.
pub fn optimal_area_closed_form(u: f64, tau: f64) -> f64 {
    let x = u * tau;
    (2.0 * PI / x) * ((2.0 * PI * x * x + PI * PI).sqrt() - PI).sqrt()
}

/// (u²τ²/θ₀⁵)θ⁴ + θ²/θ₀² − 1; zero at the optimal area.
pub fn optimal_area_residual(theta: f64, u: f64, tau: f64) -> f64 {
    let x = u * tau;
    let y = theta * theta / (THETA_0 * THETA_0);
    x * x / THETA_0 * y * y + y - 1.0
}

/// Fixed point θ = θ̃(u(Ω_s(θ)), τ), where the pulse peak Ω_s follows from
/// θ for the given shape and u from the density and C₆.
pub fn optimal_area_self_consistent(density: f64, c6: f64, tau: f64, shape: PulseShape) -> Result<f64> {
    let g = |theta: f64| -> Result<f64> {
        let omega_s = theta / (shape.area_factor() * tau);
        let u = effective_interaction(density, c6, omega_s)?.u;
        Ok(theta - optimal_area_mf(u.abs(), tau)?)
    };
    let (mut lo, mut hi) = (1e-9 * THETA_0, THETA_0);
    if g(lo)? >= 0.0 {
        return Ok(lo);
    }
    if g(hi)? <= 0.0 {
        return Ok(hi);
    }
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if g(mid)? < 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
        if hi - lo < 1e-14 * hi {
            break;
        }
    }
    Ok(0.5 * (lo + hi))
}

/// The area at which a resting mean-field atom, with u evaluated
/// self-consistently at the pulse peak, returns to its ground state.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ReturnArea {
    pub theta: f64,
    /// ρ₂₂ left behind at `theta`.
    pub residual_population: f64,
    /// The closed-form estimate used as the search seed.
    pub theta_estimate: f64,
}

fn residual_population(density: f64, c6: f64, tau: f64, shape: PulseShape, theta: f64) -> Result<f64> {
    let t0 = 10.0 * tau;
    let pulse = PulseSpec::with_area(shape, theta, tau, t0)?;
    let u = effective_interaction(density, c6, pulse.omega_s)?.u;
    let rate = u.abs() + pulse.omega_s;
    let dt = (tau / 400.0).min(0.05 / rate.max(1e-300));
    let tr = transient_dynamics(&pulse, &MeanFieldParams::resting(u, 0.0, None), dt, t0 + 12.0 * tau, usize::MAX)?;
    Ok(*tr.rho22.last().expect("non-empty"))
}

/// First ground-state return near the self-consistent closed-form area,
/// searched on [0.5θ̃, 1.2θ̃] (a coarse grid, then golden section).
pub fn single_atom_return_area(density: f64, c6: f64, tau: f64, shape: PulseShape) -> Result<ReturnArea> {
    let seed = optimal_area_self_consistent(density, c6, tau, shape)?;
    let f = |t: f64| residual_population(density, c6, tau, shape, t);
    let (lo, hi, n) = (0.5 * seed, (1.2 * seed).min(THETA_0), 28);
    let grid: Vec<f64> = (0..=n).map(|k| lo + (hi - lo) * k as f64 / n as f64).collect();
    let vals = grid.iter().map(|&t| f(t)).collect::<Result<Vec<_>>>()?;
    let best = (0..=n).min_by(|&a, &b| vals[a].total_cmp(&vals[b])).expect("non-empty");
    let (mut a, mut b) = (grid[best.saturating_sub(1)], grid[(best + 1).min(n)]);
    let r = (5f64.sqrt() - 1.0) / 2.0;
    let (mut c, mut d) = (b - r * (b - a), a + r * (b - a));
    let (mut fc, mut fd) = (f(c)?, f(d)?);
    for _ in 0..30 {
        if fc <= fd {
            b = d;
            d = c;
            fd = fc;
            c = b - r * (b - a);
            fc = f(c)?;
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + r * (b - a);
            fd = f(d)?;
        }
    }
    let (theta, residual) = if fc <= fd { (c, fc) } else { (d, fd) };
    Ok(ReturnArea {
        theta,
        residual_population: residual,
        theta_estimate: seed,
    })
}

/// Trial parameters of ρ₂₂ = A(1 − cos F), ρ₂₁ = −(iB/2)cos F + Cρ₂₂.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct AnsatzParams {
    pub a: f64,
    pub b: f64,
    pub c: f64,
    pub theta_tilde: f64,
}

pub fn ansatz_params(theta_tilde: f64, u: f64, tau: f64) -> AnsatzParams {
    let b = theta_tilde / THETA_0;
    AnsatzParams {
        a: theta_tilde * b / (2.0 * THETA_0),
        b,
        c: (2.0 * PI).sqrt() * u * tau * b / (2.0 * THETA_0),
        theta_tilde,
    }
}

/// F(t) = (θ₀/2)(1 + erf(t/√2τ)), with t measured from the pulse centre.
fn phase(t: f64, tau: f64) -> f64 {
    0.5 * THETA_0 * (1.0 + libm::erf(t / (2f64.sqrt() * tau)))
}

impl AnsatzParams {
    /// (ρ₂₂, ρ₂₁) at time `t` from the pulse centre.
    pub fn at(&self, t: f64, tau: f64) -> (f64, Complex64) {
        let cf = phase(t, tau).cos();
        let rho22 = self.a * (1.0 - cf);
        (rho22, Complex64::new(self.c * rho22, -0.5 * self.b * cf))
    }

    /// Long-time coherence −iB/2, which does not vanish.
    pub fn coherence_at_infinity(&self) -> Complex64 {
        Complex64::new(0.0, -0.5 * self.b)
    }
}

pub fn ansatz_trajectory(params: &AnsatzParams, tau: f64, times: &[f64]) -> Vec<(f64, Complex64)> {
    times.iter().map(|&t| params.at(t, tau)).collect()
}

/// Ansatz versus a direct mean-field integration for resting atoms
/// driven by the Gaussian pulse of area θ̃.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct AnsatzDiagnostic {
    pub params: AnsatzParams,
    /// Residual of the quartic root condition.
    pub root_residual: f64,
    pub ansatz_final_coherence: Complex64,
    pub ode_final_coherence: Complex64,
    pub ode_final_population: f64,
    /// max_t |ρ₂₂^ansatz − ρ₂₂^ODE|.
    pub max_population_gap: f64,
}

pub fn ansatz_diagnostic(u: f64, tau: f64) -> Result<AnsatzDiagnostic> {
    let theta = optimal_area_mf(u, tau)?;
    let params = ansatz_params(theta, u, tau);
    let t0 = 8.0 * tau;
    let pulse = PulseSpec::with_area(PulseShape::Gaussian, theta, tau, t0)?;
    let mf = MeanFieldParams::resting(u, 0.0, None);
    let rate = u.abs() + pulse.omega_s;
    let dt = (tau / 400.0).min(0.1 / rate.max(1e-300));
    let tr = transient_dynamics(&pulse, &mf, dt, t0 + 12.0 * tau, 1)?;
    let gap = tr
        .t
        .iter()
        .zip(&tr.rho22)
        .map(|(&t, &p)| (params.at(t - t0, tau).0 - p).abs())
        .fold(0.0, f64::max);
    Ok(AnsatzDiagnostic {
        params,
        root_residual: optimal_area_residual(theta, u, tau),
        ansatz_final_coherence: params.coherence_at_infinity(),
        ode_final_coherence: *tr.rho21.last().expect("non-empty"),
        ode_final_population: *tr.rho22.last().expect("non-empty"),
        max_population_gap: gap,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn limits() {
        assert_eq!(optimal_area_mf(0.0, 1e-9).unwrap(), THETA_0);
        assert!((optimal_area_mf(1e-3, 1e-9).unwrap() - THETA_0).abs() < 1e-9);
        // large uτ: θ̃ ≈ 2π(2π)^¼/√(uτ)
        let asym = THETA_0 * THETA_0.powf(0.25) / 1e2;
        assert!((optimal_area_mf(1e13, 1e-9).unwrap() / asym - 1.0).abs() < 0.01);
        assert!(optimal_area_mf(-1.0, 1e-9).is_err());
        assert!(optimal_area_mf(1.0, 0.0).is_err());
    }

    #[test]
    fn matches_textbook_form_where_it_is_accurate() {
        for &x in &[0.1, 1.0, 10.0, 80.0, 1e4] {
            let a = optimal_area_mf(x * 1e9, 1e-9).unwrap();
            assert!((a / optimal_area_closed_form(x * 1e9, 1e-9) - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn ansatz_without_interaction_is_a_full_rabi_cycle() {
        let p = ansatz_params(THETA_0, 0.0, 1e-9);
        assert_eq!((p.a, p.b, p.c), (0.5, 1.0, 0.0));
        let (r22, r21) = p.at(0.0, 1e-9);
        assert!((r22 - 1.0).abs() < 1e-15 && (r21.im - 0.5).abs() < 1e-15 && r21.re == 0.0);
        let (r22, _) = p.at(-50e-9, 1e-9);
        assert!(r22.abs() < 1e-15);
        let (r22, r21) = p.at(50e-9, 1e-9);
        assert!(r22.abs() < 1e-12 && (r21 - p.coherence_at_infinity()).norm() < 1e-12);
    }

    #[test]
    fn diagnostic_reports_the_residual_coherence() {
        let d = ansatz_diagnostic(0.0, 1e-9).unwrap();
        assert!(d.root_residual.abs() < 1e-15);
        // the ODE returns to ground while the ansatz keeps −iB/2
        assert!(d.ode_final_population < 1e-6 && d.ode_final_coherence.norm() < 1e-3);
        assert!((d.ansatz_final_coherence.im + 0.5).abs() < 1e-15);
        assert!(d.max_population_gap < 1e-6);
    }

    #[test]
    fn return_area_is_near_the_closed_form() {
        let s = crate::atomdata::SpeciesConstants::cesium();
        let c6 = crate::atomdata::rydberg_state(30, &s).unwrap().c6;
        let r = single_atom_return_area(5e21, c6, 1e-9, PulseShape::Sech).unwrap();
        assert!(r.residual_population < 1e-5, "{r:?}");
        assert!((r.theta / r.theta_estimate - 1.0).abs() < 0.15, "{r:?}");
        // without interaction the return is the 2π Rabi cycle
        let r = single_atom_return_area(0.0, c6, 1e-9, PulseShape::Sech).unwrap();
        assert!((r.theta - THETA_0).abs() < 1e-3 && r.residual_population < 1e-6, "{r:?}");
    }

    #[test]
    fn self_consistent_area_is_below_two_pi() {
        let s = crate::atomdata::SpeciesConstants::cesium();
        let c6 = crate::atomdata::rydberg_state(30, &s).unwrap().c6;
        let th = optimal_area_self_consistent(5e21, c6, 1e-9, PulseShape::Sech).unwrap();
        assert!(th > 0.0 && th < THETA_0);
        let u = effective_interaction(5e21, c6, th / (PI * 1e-9)).unwrap().u;
        assert!((th - optimal_area_mf(u, 1e-9).unwrap()).abs() < 1e-9);
        assert_eq!(optimal_area_self_consistent(0.0, c6, 1e-9, PulseShape::Sech).unwrap(), THETA_0);
    }

    proptest! {
        #[test]
        fn root_residual_is_tiny(lu in 0.0f64..14.0, lt in -10.0f64..-6.0) {
            let (u, tau) = (10f64.powf(lu), 10f64.powf(lt));
            let th = optimal_area_mf(u, tau).unwrap();
            prop_assert!(optimal_area_residual(th, u, tau).abs() < 1e-10);
        }

        #[test]
        fn decreasing_in_u_tau(x in 0.0f64..1e4, dx in 1e-3f64..1e3) {
            let a = optimal_area_mf(x, 1.0).unwrap();
            let b = optimal_area_mf(x + dx, 1.0).unwrap();
            prop_assert!(b < a);
        }
    }
}
