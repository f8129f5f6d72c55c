use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{soft_core_potential, AtomicMedium, BOUND_TOLERANCE};
use crate::numerics::{SpatialGrid, VelocityGrid};
use crate::{Error, Result};

const I: Complex64 = Complex64::new(0.0, 1.0);
const ZERO: Complex64 = Complex64::new(0.0, 0.0);

/// Minimum number of grid spacings the blockade radius must span for the
/// interaction integral to be resolved.
pub const MIN_CORE_SPACINGS: f64 = 3.0;

/// One-body densities plus the two-body correlators.
///
/// One-body arrays are indexed `[z * n_v + v]`. Correlators are stored as
/// contiguous (z′, z) blocks per velocity pair:
/// `[((v′ * n_v + v) * n_z + z′) * n_z + z]`, for site a = (z′, v′) and
/// site b = (z, v):
///
/// * `rho21_21` = ⟨σ₂₁(a) σ₂₁(b)⟩
/// * `rho21_12` = ⟨σ₂₁(a) σ₁₂(b)⟩
/// * `rho22_21` = ⟨σ₂₂(a) σ₂₁(b)⟩
/// * `rho22_22` = ⟨σ₂₂(a) σ₂₂(b)⟩
///
/// The remaining elements follow by Hermiticity and are never stored.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TwoBodyState {
    pub n_z: usize,
    pub n_v: usize,
    pub rho11: Vec<f64>,
    pub rho22: Vec<f64>,
    pub rho21: Vec<Complex64>,
    pub rho21_21: Vec<Complex64>,
    pub rho21_12: Vec<Complex64>,
    pub rho22_21: Vec<Complex64>,
    pub rho22_22: Vec<Complex64>,
}

impl TwoBodyState {
    pub fn ground(n_z: usize, n_v: usize) -> Self {
        let m = n_z * n_v;
        let p = m * m;
        TwoBodyState {
            n_z,
            n_v,
            rho11: vec![1.0; m],
            rho22: vec![0.0; m],
            rho21: vec![ZERO; m],
            rho21_21: vec![ZERO; p],
            rho21_12: vec![ZERO; p],
            rho22_21: vec![ZERO; p],
            rho22_22: vec![ZERO; p],
        }
    }

    /// Index of the correlator element for a = (z′, v′), b = (z, v).
    pub fn pair_index(&self, zp: usize, z: usize, vp: usize, v: usize) -> usize {
        ((vp * self.n_v + v) * self.n_z + zp) * self.n_z + z
    }

    pub fn from_flat(n_z: usize, n_v: usize, flat: &[Complex64]) -> Self {
        let m = n_z * n_v;
        let p = m * m;
        let re = |s: &[Complex64]| s.iter().map(|c| c.re).collect::<Vec<_>>();
        TwoBodyState {
            n_z,
            n_v,
            rho11: re(&flat[..m]),
            rho22: re(&flat[m..2 * m]),
            rho21: flat[2 * m..3 * m].to_vec(),
            rho21_21: flat[3 * m..3 * m + p].to_vec(),
            rho21_12: flat[3 * m + p..3 * m + 2 * p].to_vec(),
            rho22_21: flat[3 * m + 2 * p..3 * m + 3 * p].to_vec(),
            rho22_22: flat[3 * m + 3 * p..].to_vec(),
        }
    }

    pub fn to_flat(&self) -> Vec<Complex64> {
        let real = |v: &Vec<f64>| v.iter().map(|&x| Complex64::new(x, 0.0)).collect::<Vec<_>>();
        let mut out = real(&self.rho11);
        out.extend(real(&self.rho22));
        out.extend_from_slice(&self.rho21);
        out.extend_from_slice(&self.rho21_21);
        out.extend_from_slice(&self.rho21_12);
        out.extend_from_slice(&self.rho22_21);
        out.extend_from_slice(&self.rho22_22);
        out
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TwoBodyParams {
    pub n_z: usize,
    /// Collisional decay γ₂₁ᶜ, 1/s.
    pub gamma: f64,
    /// Spontaneous decay Γ, 1/s; zero switches it off.
    pub decay: f64,
    /// Doppler shifts k·vᵢ, rad/s.
    pub detunings: Vec<f64>,
    pub weights: Vec<f64>,
    /// Soft-core potential V(z′ − z), rad/s, row-major `[z′ * n_z + z]`.
    pub potential: Vec<f64>,
    /// Interaction contraction 𝒩^{1/3} W(z′) V(z′ − z), rad/s, same layout.
    pub kernel: Vec<f64>,
}

impl TwoBodyParams {
    /// Builds the regularised pair potential on the collocation grid.
    ///
    /// Rejects grids too coarse to resolve the soft core unless the
    /// interaction vanishes.
    #[allow(clippy::too_many_arguments)]
    pub fn new(
        grid: &SpatialGrid,
        vgrid: &VelocityGrid,
        k: f64,
        density: f64,
        c6: f64,
        z_m: f64,
        gamma: f64,
        decay: Option<f64>,
    ) -> Result<Self> {
        let n_z = grid.len();
        let interacting = c6 != 0.0 && density > 0.0 && z_m.is_finite();
        if interacting && z_m < MIN_CORE_SPACINGS * grid.max_spacing() {
            return Err(Error::invalid(
                "n_z",
                format!(
                    "blockade radius {:.3e} m is below {MIN_CORE_SPACINGS} grid spacings ({:.3e} m); refine the grid",
                    z_m,
                    grid.max_spacing()
                ),
            ));
        }
        let mut potential = vec![0.0; n_z * n_z];
        let mut kernel = vec![0.0; n_z * n_z];
        if interacting {
            let n13 = density.cbrt();
            for zp in 0..n_z {
                for z in 0..n_z {
                    let v = soft_core_potential(c6, z_m, grid.points[zp] - grid.points[z]);
                    potential[zp * n_z + z] = v;
                    kernel[zp * n_z + z] = n13 * grid.weights[zp] * v;
                }
            }
        }
        let params = TwoBodyParams {
            n_z,
            gamma,
            decay: decay.unwrap_or(0.0),
            detunings: vgrid.nodes.iter().map(|v| k * v).collect(),
            weights: vgrid.weights.clone(),
            potential,
            kernel,
        };
        params.validate()?;
        Ok(params)
    }

    /// Site-averaged interaction shift Σ_z′ 𝒩^{1/3}W(z′)V(z′ − z), rad/s:
    /// the u a mean-field run needs to see the same pair potential on
    /// the same finite sample.
    pub fn mean_field_shift(&self, grid: &SpatialGrid) -> f64 {
        let n = self.n_z;
        let total: f64 = grid.weights.iter().sum();
        (0..n)
            .map(|z| grid.weights[z] * (0..n).map(|zp| self.kernel[zp * n + z]).sum::<f64>())
            .sum::<f64>()
            / total
    }

    pub fn n_v(&self) -> usize {
        self.detunings.len()
    }

    pub fn max_rate(&self) -> f64 {
        let kv = self.detunings.iter().fold(0.0f64, |m, d| m.max(d.abs()));
        let v = self.potential.iter().fold(0.0f64, |m, d| m.max(d.abs()));
        let shift: f64 = (0..self.n_z)
            .map(|z| (0..self.n_z).map(|zp| self.kernel[zp * self.n_z + z].abs()).sum::<f64>())
            .fold(0.0, f64::max);
        2.0 * kv + v + shift + 2.0 * self.gamma + 2.0 * self.decay
    }

    fn validate(&self) -> Result<()> {
        if self.n_z == 0 {
            return Err(Error::invalid("n_z", "at least one site is required"));
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
        let nn = self.n_z * self.n_z;
        if self.potential.len() != nn || self.kernel.len() != nn {
            return Err(Error::invalid("potential", "must be n_z × n_z"));
        }
        if self.potential.iter().chain(&self.kernel).any(|x| !x.is_finite()) {
            return Err(Error::invalid("potential", "must be finite"));
        }
        Ok(())
    }
}

/// One- plus two-body correlator hierarchy, truncated at three-body order.
#[derive(Debug, Clone)]
pub struct TwoBodyMedium {
    params: TwoBodyParams,
}

impl TwoBodyMedium {
    pub fn new(params: TwoBodyParams) -> Result<Self> {
        params.validate()?;
        Ok(TwoBodyMedium { params })
    }

    pub fn params(&self) -> &TwoBodyParams {
        &self.params
    }

    fn sizes(&self) -> (usize, usize, usize, usize) {
        let nz = self.params.n_z;
        let nv = self.params.n_v();
        let m = nz * nv;
        (nz, nv, m, m * m)
    }
}

impl AtomicMedium for TwoBodyMedium {
    fn sites(&self) -> usize {
        self.params.n_z
    }

    fn state_len(&self) -> usize {
        let (_, _, m, p) = self.sizes();
        3 * m + 4 * p
    }

    fn ground_state(&self) -> Vec<Complex64> {
        TwoBodyState::ground(self.params.n_z, self.params.n_v()).to_flat()
    }

    fn derivative(&self, state: &[Complex64], omega: &[Complex64], out: &mut [Complex64]) {
        let p = &self.params;
        let (nz, nv, m, pp) = self.sizes();
        let nzz = nz * nz;
        let (r11, rest) = state.split_at(m);
        let (r22, rest) = rest.split_at(m);
        let (r21, rest) = rest.split_at(m);
        let (x, rest) = rest.split_at(pp);
        let (y, rest) = rest.split_at(pp);
        let (zc, q) = rest.split_at(pp);

        let (d11, rest) = out.split_at_mut(m);
        let (d22, rest) = rest.split_at_mut(m);
        let (d21, rest) = rest.split_at_mut(m);
        let (dx, rest) = rest.split_at_mut(pp);
        let (dy, rest) = rest.split_at_mut(pp);
        let (dz, dq) = rest.split_at_mut(pp);

        let gamma = p.gamma;
        let decay = p.decay;

        // One-body equations.
        for zi in 0..nz {
            let om = omega[zi];
            let site = zi * nv..(zi + 1) * nv;
            let avg: Complex64 = r21[site.clone()].iter().zip(&p.weights).map(|(r, w)| r * w).sum();
            for v in 0..nv {
                let b = zi * nv + v;
                let mut shift = ZERO;
                for (vp, wvp) in p.weights.iter().enumerate() {
                    let mut acc = ZERO;
                    for zp in 0..nz {
                        let kern = p.kernel[zp * nz + zi];
                        if kern != 0.0 {
                            acc += zc[(vp * nv + v) * nzz + zp * nz + zi] * kern;
                        }
                    }
                    shift += acc * *wvp;
                }
                let pump = (om.conj() * r21[b]).im;
                d22[b] = Complex64::new(-pump - decay * r22[b].re, 0.0);
                d11[b] = Complex64::new(pump + decay * r22[b].re, 0.0);
                d21[b] = -gamma * (r21[b] - avg) - I * p.detunings[v] * r21[b]
                    - I * om * (0.5 * (r11[b].re - r22[b].re))
                    - I * shift;
            }
        }

        // Two-body equations, one (v′, v) block per task.
        dx.par_chunks_mut(nzz)
            .zip(dy.par_chunks_mut(nzz))
            .zip(dz.par_chunks_mut(nzz))
            .zip(dq.par_chunks_mut(nzz))
            .enumerate()
            .for_each(|(blk, (((bx, by), bz), bq))| {
                let vp = blk / nv;
                let v = blk % nv;
                let swapped = (v * nv + vp) * nzz;
                let base = blk * nzz;
                let da = p.detunings[vp];
                let db = p.detunings[v];
                for zp in 0..nz {
                    let oa = omega[zp];
                    let a = zp * nv + vp;
                    for zi in 0..nz {
                        let ob = omega[zi];
                        let b = zi * nv + v;
                        let k = zp * nz + zi;
                        let vr = p.potential[k];
                        let xab = x[base + k];
                        let yab = y[base + k];
                        let zab = zc[base + k];
                        let zba = zc[swapped + zi * nz + zp];
                        let qab = q[base + k];

                        bx[k] = -I * (da + db + vr) * xab - 2.0 * gamma * xab
                            - 0.5 * I * (oa * r21[b] + ob * r21[a])
                            + I * (oa * zab + ob * zba);
                        by[k] = -I * (da - db) * yab - 2.0 * gamma * yab - 0.5 * I * oa * r21[b].conj()
                            + 0.5 * I * ob.conj() * r21[a]
                            + I * oa * zab.conj()
                            - I * ob.conj() * zba;
                        bz[k] = -I * (db + vr) * zab - (gamma + decay) * zab - 0.5 * I * oa * yab.conj()
                            - 0.5 * I * ob * r22[a].re
                            + I * ob * qab
                            + 0.5 * I * oa.conj() * xab;
                        bq[k] = Complex64::new(
                            -(oa.conj() * zba).im - (ob.conj() * zab).im - 2.0 * decay * qab.re,
                            0.0,
                        );
                    }
                }
            });
    }

    fn coherence(&self, state: &[Complex64], out: &mut [Complex64]) {
        let (_, nv, m, _) = self.sizes();
        let r21 = &state[2 * m..3 * m];
        for (j, o) in out.iter_mut().enumerate() {
            *o = r21[j * nv..(j + 1) * nv]
                .iter()
                .zip(&self.params.weights)
                .map(|(r, w)| r * w)
                .sum();
        }
    }

    fn excitation(&self, state: &[Complex64], out: &mut [f64]) {
        let (_, nv, m, _) = self.sizes();
        let r22 = &state[m..2 * m];
        for (j, o) in out.iter_mut().enumerate() {
            *o = r22[j * nv..(j + 1) * nv]
                .iter()
                .zip(&self.params.weights)
                .map(|(r, w)| r.re * w)
                .sum();
        }
    }

    fn min_population(&self, state: &[Complex64]) -> f64 {
        let (_, _, m, _) = self.sizes();
        state[m..2 * m].iter().map(|c| c.re).fold(f64::INFINITY, f64::min)
    }

    fn check_bounds(&self, state: &[Complex64], t: f64) -> Result<()> {
        let limit = 1.0 + BOUND_TOLERANCE;
        if let Some(idx) = state.iter().position(|c| c.norm() > limit) {
            return Err(Error::Unstable {
                t,
                reason: format!("density-matrix element {idx} exceeds 1 in magnitude"),
            });
        }
        Ok(())
    }
}

/// Time derivative of a two-body state under per-site Rabi frequencies.
pub fn twobody_rhs(state: &TwoBodyState, omega: &[Complex64], params: &TwoBodyParams) -> Result<TwoBodyState> {
    if state.n_z != params.n_z || state.n_v != params.n_v() {
        return Err(Error::invalid("state", "grid sizes are inconsistent with params"));
    }
    if omega.len() != state.n_z {
        return Err(Error::invalid("omega", "one Rabi frequency per z-node is required"));
    }
    let medium = TwoBodyMedium::new(params.clone())?;
    let flat = state.to_flat();
    if flat.len() != medium.state_len() {
        return Err(Error::invalid("state", "array lengths are inconsistent"));
    }
    if flat.iter().chain(omega).any(|c| !(c.re.is_finite() && c.im.is_finite())) {
        return Err(Error::invalid("state", "non-finite input"));
    }
    let mut out = vec![ZERO; flat.len()];
    medium.derivative(&flat, omega, &mut out);
    Ok(TwoBodyState::from_flat(state.n_z, state.n_v, &out))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numerics::{chebyshev_grid, velocity_grid, Rk4};

    fn free_params(n_z: usize, vgrid: &VelocityGrid) -> TwoBodyParams {
        let grid = chebyshev_grid(1e-4, n_z).unwrap();
        TwoBodyParams::new(&grid, vgrid, 1.0, 0.0, 0.0, f64::INFINITY, 0.0, None).unwrap()
    }

    #[test]
    fn ground_state_is_stationary() {
        let params = free_params(4, &velocity_grid(1.0, 2).unwrap());
        let s = TwoBodyState::ground(4, 2);
        let d = twobody_rhs(&s, &[ZERO; 4], &params).unwrap();
        assert!(d.to_flat().iter().all(|c| c.norm() == 0.0));
    }

    #[test]
    fn factorisation_survives_without_interaction() {
        let vgrid = velocity_grid(1.0, 2).unwrap();
        let n_z = 4;
        let medium = TwoBodyMedium::new(free_params(n_z, &vgrid)).unwrap();
        let omega: Vec<_> = (0..n_z).map(|j| Complex64::new(1.0 + 0.3 * j as f64, 0.2)).collect();
        let mut y = medium.ground_state();
        let mut rk = Rk4::new(y.len());
        let dt = 2e-3;
        for k in 0..1000 {
            rk.step(
                |_, s, d| {
                    medium.derivative(s, &omega, d);
                    Ok(())
                },
                &mut y,
                k as f64 * dt,
                dt,
            )
            .unwrap();
        }
        let s = TwoBodyState::from_flat(n_z, 2, &y);
        let mut err: f64 = 0.0;
        for vp in 0..2 {
            for v in 0..2 {
                for zp in 0..n_z {
                    for z in 0..n_z {
                        let a = zp * 2 + vp;
                        let b = z * 2 + v;
                        let i = s.pair_index(zp, z, vp, v);
                        err = err.max((s.rho21_21[i] - s.rho21[a] * s.rho21[b]).norm());
                        err = err.max((s.rho21_12[i] - s.rho21[a] * s.rho21[b].conj()).norm());
                        err = err.max((s.rho22_21[i] - s.rho22[a] * s.rho21[b]).norm());
                        err = err.max((s.rho22_22[i] - s.rho22[a] * s.rho22[b]).norm());
                    }
                }
            }
        }
        assert!(err < 1e-9, "{err}");
        // Populations are conserved and the drive has done something.
        for b in 0..n_z * 2 {
            assert!((s.rho11[b] + s.rho22[b] - 1.0).abs() < 1e-10);
        }
        assert!(s.rho22.iter().any(|&p| p > 0.1));
    }

    #[test]
    fn unresolved_core_is_rejected() {
        let grid = chebyshev_grid(4e-4, 8).unwrap();
        let vgrid = VelocityGrid::at_rest();
        let err = TwoBodyParams::new(&grid, &vgrid, 1e7, 5e21, 1e-25, 1e-6, 0.0, None);
        assert!(err.is_err());
        let ok = TwoBodyParams::new(&grid, &vgrid, 1e7, 5e21, 1e-25, 1e-3, 0.0, None);
        assert!(ok.is_ok());
    }
}
