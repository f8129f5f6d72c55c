use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::{AtomicMedium, BOUND_TOLERANCE};
use crate::numerics::VelocityGrid;
use crate::{Error, Result};

const I: Complex64 = Complex64::new(0.0, 1.0);

/// Mean-field Bloch state, indexed `[z * n_v + v]`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MfBlochState {
    pub n_z: usize,
    pub n_v: usize,
    /// Inversion w = 1 − 2ρ₂₂ per class.
    pub w: Vec<f64>,
    /// Per-class coherence, normalised so that R₂₁ = Σᵢ wᵢ ρ₂₁⁽ⁱ⁾.
    pub rho21: Vec<Complex64>,
}

impl MfBlochState {
    pub fn ground(n_z: usize, n_v: usize) -> Self {
        MfBlochState {
            n_z,
            n_v,
            w: vec![1.0; n_z * n_v],
            rho21: vec![Complex64::new(0.0, 0.0); n_z * n_v],
        }
    }

    fn from_flat(n_z: usize, n_v: usize, flat: &[Complex64]) -> Self {
        let m = n_z * n_v;
        MfBlochState {
            n_z,
            n_v,
            w: flat[..m].iter().map(|c| c.re).collect(),
            rho21: flat[m..].to_vec(),
        }
    }

    fn to_flat(&self) -> Vec<Complex64> {
        self.w
            .iter()
            .map(|&w| Complex64::new(w, 0.0))
            .chain(self.rho21.iter().copied())
            .collect()
    }
}

/// Parameters of the mean-field right-hand side.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MeanFieldParams {
    /// Effective interaction u, rad/s.
    pub u: f64,
    /// Collisional decay γ₂₁ᶜ, 1/s.
    pub gamma: f64,
    /// Spontaneous decay Γ, 1/s; zero switches it off.
    pub decay: f64,
    /// Doppler shifts k·vᵢ, rad/s.
    pub detunings: Vec<f64>,
    /// Velocity-class weights, summing to one.
    pub weights: Vec<f64>,
}

impl MeanFieldParams {
    pub fn new(u: f64, gamma: f64, decay: Option<f64>, vgrid: &VelocityGrid, k: f64) -> Result<Self> {
        let params = MeanFieldParams {
            u,
            gamma,
            decay: decay.unwrap_or(0.0),
            detunings: vgrid.nodes.iter().map(|v| k * v).collect(),
            weights: vgrid.weights.clone(),
        };
        params.validate()?;
        Ok(params)
    }

    /// A single class at rest.
    pub fn resting(u: f64, gamma: f64, decay: Option<f64>) -> Self {
        MeanFieldParams {
            u,
            gamma,
            decay: decay.unwrap_or(0.0),
            detunings: vec![0.0],
            weights: vec![1.0],
        }
    }

    pub fn n_v(&self) -> usize {
        self.detunings.len()
    }

    /// Largest rate in the equations apart from the field.
    pub fn max_rate(&self) -> f64 {
        let kv = self.detunings.iter().fold(0.0f64, |m, d| m.max(d.abs()));
        kv + self.u.abs() + self.gamma + self.decay
    }

    fn validate(&self) -> Result<()> {
        if !self.u.is_finite() {
            return Err(Error::invalid("u", "must be finite"));
        }
        if !(self.gamma >= 0.0 && self.gamma.is_finite()) {
            return Err(Error::invalid("gamma21c", "must be finite and ≥ 0"));
        }
        if !(self.decay >= 0.0 && self.decay.is_finite()) {
            return Err(Error::invalid("gamma_spont", "must be finite and ≥ 0"));
        }
        if self.detunings.is_empty() || self.detunings.len() != self.weights.len() {
            return Err(Error::invalid("vgrid", "nodes and weights must be non-empty and equal in length"));
        }
        Ok(())
    }
}

/// Mean-field Bloch equations on `n_z` sites.
#[derive(Debug, Clone)]
pub struct MeanFieldMedium {
    n_z: usize,
    params: MeanFieldParams,
}

impl MeanFieldMedium {
    pub fn new(n_z: usize, params: MeanFieldParams) -> Result<Self> {
        if n_z == 0 {
            return Err(Error::invalid("n_z", "at least one site is required"));
        }
        params.validate()?;
        Ok(MeanFieldMedium { n_z, params })
    }

    pub fn params(&self) -> &MeanFieldParams {
        &self.params
    }

    fn site_derivative(&self, w: &[Complex64], rho: &[Complex64], omega: Complex64, dw: &mut [Complex64], drho: &mut [Complex64]) {
        let p = &self.params;
        let r21: Complex64 = rho.iter().zip(&p.weights).map(|(r, wt)| r * wt).sum();
        for i in 0..rho.len() {
            let wi = w[i].re;
            let ri = rho[i];
            let rho22 = 0.5 * (1.0 - wi);
            dw[i] = Complex64::new(-2.0 * (omega * ri.conj()).im + p.decay * (1.0 - wi), 0.0);
            drho[i] = -p.gamma * (ri - r21) - I * (p.detunings[i] + p.u * rho22) * ri - I * omega * (0.5 * wi);
        }
    }
}

impl AtomicMedium for MeanFieldMedium {
    fn sites(&self) -> usize {
        self.n_z
    }

    fn state_len(&self) -> usize {
        2 * self.n_z * self.params.n_v()
    }

    fn ground_state(&self) -> Vec<Complex64> {
        MfBlochState::ground(self.n_z, self.params.n_v()).to_flat()
    }

    fn derivative(&self, state: &[Complex64], omega: &[Complex64], out: &mut [Complex64]) {
        let nv = self.params.n_v();
        let m = self.n_z * nv;
        let (w, rho) = state.split_at(m);
        let (dw, drho) = out.split_at_mut(m);
        for j in 0..self.n_z {
            let s = j * nv..(j + 1) * nv;
            self.site_derivative(&w[s.clone()], &rho[s.clone()], omega[j], &mut dw[s.clone()], &mut drho[s]);
        }
    }

    fn coherence(&self, state: &[Complex64], out: &mut [Complex64]) {
        let nv = self.params.n_v();
        let rho = &state[self.n_z * nv..];
        for (j, o) in out.iter_mut().enumerate() {
            *o = rho[j * nv..(j + 1) * nv]
                .iter()
                .zip(&self.params.weights)
                .map(|(r, wt)| r * wt)
                .sum();
        }
    }

    fn excitation(&self, state: &[Complex64], out: &mut [f64]) {
        let nv = self.params.n_v();
        for (j, o) in out.iter_mut().enumerate() {
            *o = state[j * nv..(j + 1) * nv]
                .iter()
                .zip(&self.params.weights)
                .map(|(w, wt)| 0.5 * (1.0 - w.re) * wt)
                .sum();
        }
    }

    fn min_population(&self, state: &[Complex64]) -> f64 {
        let m = self.n_z * self.params.n_v();
        state[..m].iter().map(|w| 0.5 * (1.0 - w.re)).fold(f64::INFINITY, f64::min)
    }

    fn check_bounds(&self, state: &[Complex64], t: f64) -> Result<()> {
        let m = self.n_z * self.params.n_v();
        let limit = 1.0 + BOUND_TOLERANCE;
        for (idx, w) in state[..m].iter().enumerate() {
            let rho22 = 0.5 * (1.0 - w.re);
            if rho22.abs() > limit {
                return Err(Error::Unstable {
                    t,
                    reason: format!("|ρ₂₂| = {:.6} at class {idx} exceeds 1", rho22.abs()),
                });
            }
        }
        for (idx, r) in state[m..].iter().enumerate() {
            if r.norm() > limit {
                return Err(Error::Unstable {
                    t,
                    reason: format!("|ρ₂₁| = {:.6} at class {idx} exceeds 1", r.norm()),
                });
            }
        }
        Ok(())
    }
}

/// Time derivative of a mean-field state under per-site Rabi frequencies.
pub fn mf_rhs(state: &MfBlochState, omega: &[Complex64], params: &MeanFieldParams) -> Result<MfBlochState> {
    if state.n_v != params.n_v() || state.w.len() != state.n_z * state.n_v || state.rho21.len() != state.w.len() {
        return Err(Error::invalid("state", "grid sizes are inconsistent"));
    }
    if omega.len() != state.n_z {
        return Err(Error::invalid("omega", "one Rabi frequency per z-node is required"));
    }
    let finite = state.w.iter().all(|w| w.is_finite())
        && state.rho21.iter().chain(omega).all(|c| c.re.is_finite() && c.im.is_finite());
    if !finite {
        return Err(Error::invalid("state", "non-finite input"));
    }
    let medium = MeanFieldMedium::new(state.n_z, params.clone())?;
    let flat = state.to_flat();
    let mut out = vec![Complex64::new(0.0, 0.0); flat.len()];
    medium.derivative(&flat, omega, &mut out);
    Ok(MfBlochState::from_flat(state.n_z, state.n_v, &out))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numerics::{velocity_grid, Rk4};

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn ground_state_is_stationary_without_field() {
        let p = MeanFieldParams::new(3e8, 1e8, Some(1e5), &velocity_grid(200.0, 6).unwrap(), 2e7).unwrap();
        let s = MfBlochState::ground(3, 6);
        let d = mf_rhs(&s, &[c(0.0, 0.0); 3], &p).unwrap();
        assert!(d.w.iter().all(|&x| x == 0.0));
        assert!(d.rho21.iter().all(|x| x.norm() == 0.0));
    }

    #[test]
    fn free_rotation_at_doppler_shift() {
        let p = MeanFieldParams {
            u: 0.0,
            gamma: 0.0,
            decay: 0.0,
            detunings: vec![-2.0, 3.0],
            weights: vec![0.5, 0.5],
        };
        let s = MfBlochState {
            n_z: 1,
            n_v: 2,
            w: vec![0.2, -0.4],
            rho21: vec![c(0.3, 0.1), c(-0.2, 0.4)],
        };
        let d = mf_rhs(&s, &[c(0.0, 0.0)], &p).unwrap();
        assert_eq!(d.w, vec![0.0, 0.0]);
        for i in 0..2 {
            let expected = -I * p.detunings[i] * s.rho21[i];
            assert!((d.rho21[i] - expected).norm() < 1e-15);
        }
    }

    #[test]
    fn collisions_conserve_total_coherence() {
        let g = velocity_grid(1.0, 8).unwrap();
        let p = MeanFieldParams {
            u: 0.0,
            gamma: 7.0,
            decay: 0.0,
            detunings: vec![0.0; 8],
            weights: g.weights.clone(),
        };
        let rho21: Vec<_> = (0..8).map(|i| c(i as f64 * 0.05, 0.3 - 0.02 * i as f64)).collect();
        let s = MfBlochState { n_z: 1, n_v: 8, w: vec![0.5; 8], rho21 };
        let d = mf_rhs(&s, &[c(0.0, 0.0)], &p).unwrap();
        let dr: Complex64 = d.rho21.iter().zip(&g.weights).map(|(r, w)| r * w).sum();
        assert!(dr.norm() < 1e-14);
    }

    #[test]
    fn rabi_flopping_matches_closed_form() {
        let omega = 2.0;
        let medium = MeanFieldMedium::new(1, MeanFieldParams::resting(0.0, 0.0, None)).unwrap();
        let mut y = medium.ground_state();
        let mut rk = Rk4::new(y.len());
        let dt = 1e-3;
        let field = [c(omega, 0.0)];
        let mut max_err: f64 = 0.0;
        for k in 0..5000 {
            rk.step(
                |_, s, d| {
                    medium.derivative(s, &field, d);
                    Ok(())
                },
                &mut y,
                k as f64 * dt,
                dt,
            )
            .unwrap();
            let t = (k + 1) as f64 * dt;
            max_err = max_err.max((y[0].re - (omega * t).cos()).abs());
            max_err = max_err.max((y[1] - c(0.0, -0.5 * (omega * t).sin())).norm());
        }
        assert!(max_err < 1e-10, "{max_err}");
    }

    #[test]
    fn rejects_bad_inputs() {
        let p = MeanFieldParams::resting(0.0, 0.0, None);
        let s = MfBlochState::ground(2, 1);
        assert!(mf_rhs(&s, &[c(0.0, 0.0)], &p).is_err());
        assert!(mf_rhs(&s, &[c(f64::NAN, 0.0), c(0.0, 0.0)], &p).is_err());
        assert!(MeanFieldParams::new(0.0, -1.0, None, &VelocityGrid::at_rest(), 1.0).is_err());
    }

    #[test]
    fn bounds_guard_trips() {
        let medium = MeanFieldMedium::new(1, MeanFieldParams::resting(0.0, 0.0, None)).unwrap();
        assert!(medium.check_bounds(&[c(1.0, 0.0), c(0.0, 0.0)], 0.0).is_ok());
        // slight negativity is a diagnostic, not a failure
        assert!(medium.check_bounds(&[c(1.01, 0.0), c(0.0, 0.0)], 0.0).is_ok());
        assert!(medium.check_bounds(&[c(-1.01, 0.0), c(0.0, 0.0)], 0.0).is_err());
        assert!((medium.min_population(&[c(1.002, 0.0), c(0.0, 0.0)]) + 0.001).abs() < 1e-12);
        assert!(medium.check_bounds(&[c(1.0, 0.0), c(0.0, 1.01)], 0.0).is_err());
    }
}
