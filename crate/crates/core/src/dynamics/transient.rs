use num_complex::Complex64;
use serde::Serialize;

use super::{AtomicMedium, MeanFieldMedium, MeanFieldParams};
use crate::numerics::Rk4;
use crate::propagation::PulseSpec;
use crate::{Error, Result};

/// Trajectories of a single driven site.
#[derive(Debug, Clone, Serialize)]
pub struct Transient {
    pub t: Vec<f64>,
    /// Velocity-averaged ρ₂₂.
    pub rho22: Vec<f64>,
    /// Velocity-averaged ρ₂₁ (R₂₁).
    pub rho21: Vec<Complex64>,
    /// Per-class ρ₂₁, `[sample][class]`.
    pub rho21_classes: Vec<Vec<Complex64>>,
    /// Per-class inversion, `[sample][class]`.
    pub w_classes: Vec<Vec<f64>>,
}

impl Transient {
    /// Velocity-averaged inversion 1 − 2ρ₂₂.
    pub fn inversion(&self) -> Vec<f64> {
        self.rho22.iter().map(|p| 1.0 - 2.0 * p).collect()
    }
}

/// Mean-field dynamics of atoms at a fixed position driven by the boundary
/// pulse, sampled every `sample_every` steps of size `dt` up to `t_end`.
pub fn transient_dynamics(
    pulse: &PulseSpec,
    params: &MeanFieldParams,
    dt: f64,
    t_end: f64,
    sample_every: usize,
) -> Result<Transient> {
    pulse.validate()?;
    if !(dt > 0.0) {
        return Err(Error::invalid("dt", "must be positive"));
    }
    if t_end < pulse.t0 + 10.0 * pulse.tau {
        return Err(Error::invalid("t_end", "the window must cover t₀ + 10τ"));
    }
    let medium = MeanFieldMedium::new(1, params.clone())?;
    let n_v = params.n_v();
    let steps = (t_end / dt).ceil() as usize;
    let stride = sample_every.max(1);
    let mut y = medium.ground_state();
    let mut rk = Rk4::new(y.len());
    let mut out = Transient {
        t: Vec::new(),
        rho22: Vec::new(),
        rho21: Vec::new(),
        rho21_classes: Vec::new(),
        w_classes: Vec::new(),
    };
    let record = |t: f64, y: &[Complex64], out: &mut Transient| {
        let mut r = [Complex64::new(0.0, 0.0)];
        let mut e = [0.0];
        medium.coherence(y, &mut r);
        medium.excitation(y, &mut e);
        out.t.push(t);
        out.rho22.push(e[0]);
        out.rho21.push(r[0]);
        out.w_classes.push(y[..n_v].iter().map(|c| c.re).collect());
        out.rho21_classes.push(y[n_v..].to_vec());
    };
    record(0.0, &y, &mut out);
    for k in 0..steps {
        let t = k as f64 * dt;
        rk.step(
            |s, st, d| {
                medium.derivative(st, &[Complex64::new(pulse.envelope(s), 0.0)], d);
                Ok(())
            },
            &mut y,
            t,
            dt,
        )?;
        medium.check_bounds(&y, t + dt)?;
        if (k + 1) % stride == 0 || k + 1 == steps {
            record((k + 1) as f64 * dt, &y, &mut out);
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::propagation::PulseShape;
    use std::f64::consts::PI;

    #[test]
    fn no_field_no_dynamics() {
        let pulse = PulseSpec::new(PulseShape::Sech, 0.0, 1e-9, 5e-9).unwrap();
        let tr = transient_dynamics(&pulse, &MeanFieldParams::resting(1e9, 1e8, None), 1e-11, 1.6e-8, 10).unwrap();
        assert!(tr.rho22.iter().all(|&p| p == 0.0));
        assert!(tr.rho21.iter().all(|r| r.norm() == 0.0));
    }

    #[test]
    fn two_pi_pulse_returns_atoms_to_ground() {
        let tau = 1e-9;
        let pulse = PulseSpec::with_area(PulseShape::Sech, 2.0 * PI, tau, 10.0 * tau).unwrap();
        let tr = transient_dynamics(&pulse, &MeanFieldParams::resting(0.0, 0.0, None), tau / 400.0, 25.0 * tau, 20).unwrap();
        let peak = tr.rho22.iter().cloned().fold(0.0, f64::max);
        assert!(peak > 0.999, "{peak}");
        assert!(tr.rho22.last().unwrap().abs() < 1e-7);
        assert!(tr.rho21.last().unwrap().norm() < 1e-3);
    }

    #[test]
    fn pure_state_stays_on_bloch_sphere() {
        let pulse = PulseSpec::with_area(PulseShape::Gaussian, 1.3 * PI, 1e-9, 5e-9).unwrap();
        let params = MeanFieldParams {
            u: 2e9,
            gamma: 0.0,
            decay: 0.0,
            detunings: vec![3e8],
            weights: vec![1.0],
        };
        let tr = transient_dynamics(&pulse, &params, 2e-12, 1.6e-8, 5).unwrap();
        for (p, r) in tr.rho22.iter().zip(&tr.rho21) {
            assert!((0.0..=1.0).contains(p));
            assert!(r.norm_sqr() <= (1.0 - p) * p + 1e-6);
        }
    }
}
