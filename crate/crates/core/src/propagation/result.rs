use std::io::Write;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::{Level, ResolvedPhysics, TimePlan};
use crate::analysis::{fidelity, transmission};
use crate::{Error, Result};

/// Run bookkeeping written next to every result.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RunMetadata {
    /// `chebyshev` or `marching`.
    pub solver: String,
    pub level: Level,
    pub n_z: usize,
    pub n_v: usize,
    pub plan: TimePlan,
    pub velocity_nodes: Vec<f64>,
    pub velocity_weights: Vec<f64>,
    pub physics: ResolvedPhysics,
    pub config_hash: String,
    /// Smallest per-class ρ₂₂ seen during the run (see
    /// [`crate::dynamics::AtomicMedium::min_population`]).
    pub min_population: f64,
    pub wall_time_s: f64,
}

/// Lab-frame space–time solution, sampled on `z × t`.
///
/// Arrays are row-major `[z_index * t.len() + t_index]`.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct PropagationResult {
    pub z: Vec<f64>,
    pub t: Vec<f64>,
    /// Ω(z, t), rad/s.
    pub field: Vec<Complex64>,
    /// R₂₁(z, t).
    pub coherence: Vec<Complex64>,
    /// Velocity-averaged ρ₂₂(z, t).
    pub excitation: Vec<f64>,
    pub metadata: RunMetadata,
}

impl PropagationResult {
    pub fn n_t(&self) -> usize {
        self.t.len()
    }

    pub fn field_at(&self, j: usize) -> &[Complex64] {
        &self.field[j * self.n_t()..(j + 1) * self.n_t()]
    }

    pub fn coherence_at(&self, j: usize) -> &[Complex64] {
        &self.coherence[j * self.n_t()..(j + 1) * self.n_t()]
    }

    pub fn excitation_at(&self, j: usize) -> &[f64] {
        &self.excitation[j * self.n_t()..(j + 1) * self.n_t()]
    }

    /// Ω(0, t).
    pub fn input(&self) -> &[Complex64] {
        self.field_at(0)
    }

    /// Ω(L, t).
    pub fn output(&self) -> &[Complex64] {
        self.field_at(self.z.len() - 1)
    }

    pub fn transmission(&self) -> Result<f64> {
        transmission(self.input(), self.output())
    }

    pub fn fidelity(&self) -> Result<f64> {
        fidelity(self.input(), self.output())
    }

    /// Time of the output-intensity maximum minus that of the input.
    pub fn peak_delay(&self) -> f64 {
        let argmax = |s: &[Complex64]| {
            s.iter()
                .enumerate()
                .fold((0, -1.0), |(bi, bv), (i, v)| if v.norm() > bv { (i, v.norm()) } else { (bi, bv) })
                .0
        };
        self.t[argmax(self.output())] - self.t[argmax(self.input())]
    }

    /// Raw little-endian dump: the 8-byte magic `RSITFLD1`, `n_z` and `n_t`
    /// as u64, the z nodes and sample times as f64, then Ω(z, t) row-major
    /// (z outer) as (re, im) f64 pairs.
    pub fn write_field_binary<W: Write>(&self, mut w: W) -> Result<()> {
        w.write_all(b"RSITFLD1")?;
        w.write_all(&(self.z.len() as u64).to_le_bytes())?;
        w.write_all(&(self.t.len() as u64).to_le_bytes())?;
        for x in self.z.iter().chain(&self.t) {
            w.write_all(&x.to_le_bytes())?;
        }
        for c in &self.field {
            w.write_all(&c.re.to_le_bytes())?;
            w.write_all(&c.im.to_le_bytes())?;
        }
        Ok(())
    }

    pub(crate) fn check_finite(&self) -> Result<()> {
        if let Some(i) = self.field.iter().position(|c| !(c.re.is_finite() && c.im.is_finite())) {
            return Err(Error::NonFinite {
                t: self.t[i % self.n_t()],
                index: i,
            });
        }
        Ok(())
    }
}

/// Four-point Lagrange interpolation of a uniformly sampled series at
/// fractional index `x ∈ [0, len − 1]`.
pub(crate) fn interp_cubic<T>(len: usize, x: f64, at: impl Fn(usize) -> T) -> T
where
    T: Copy + std::ops::Add<Output = T> + std::ops::Mul<f64, Output = T>,
{
    debug_assert!(len >= 1);
    if len < 4 {
        let i = (x.round() as usize).min(len - 1);
        return at(i);
    }
    let i = (x.floor() as isize).clamp(1, len as isize - 3) as usize;
    let s = x - i as f64;
    // nodes at −1, 0, 1, 2 relative to i
    let l0 = -s * (s - 1.0) * (s - 2.0) / 6.0;
    let l1 = (s + 1.0) * (s - 1.0) * (s - 2.0) / 2.0;
    let l2 = -(s + 1.0) * s * (s - 2.0) / 2.0;
    let l3 = (s + 1.0) * s * (s - 1.0) / 6.0;
    at(i - 1) * l0 + at(i) * l1 + at(i + 1) * l2 + at(i + 2) * l3
}
