use num_complex::Complex64;
use serde::Serialize;

use crate::{Error, Result};

/// Edge samples above this fraction of the peak flag a truncated pulse.
pub const SUPPORT_THRESHOLD: f64 = 1e-4;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct AreaEstimate {
    /// rad
    pub area: f64,
    /// The first or last sample exceeds [`SUPPORT_THRESHOLD`] of the peak.
    pub truncated: bool,
}

fn trapezoid(values: impl ExactSizeIterator<Item = f64>) -> f64 {
    let n = values.len();
    values
        .enumerate()
        .map(|(i, v)| if i == 0 || i + 1 == n { 0.5 * v } else { v })
        .sum()
}

/// θ = ∫ Re Ω dt by the trapezoid rule on uniform samples.
pub fn pulse_area(omega: &[Complex64], dt: f64) -> Result<AreaEstimate> {
    if !(dt > 0.0) {
        return Err(Error::invalid("dt", "must be positive"));
    }
    if omega.is_empty() {
        return Ok(AreaEstimate {
            area: 0.0,
            truncated: false,
        });
    }
    let peak = omega.iter().map(|c| c.norm()).fold(0.0, f64::max);
    let edge = omega[0].norm().max(omega[omega.len() - 1].norm());
    Ok(AreaEstimate {
        area: dt * trapezoid(omega.iter().map(|c| c.re)),
        truncated: peak > 0.0 && edge > SUPPORT_THRESHOLD * peak,
    })
}

fn energy(s: &[Complex64]) -> f64 {
    trapezoid(s.iter().map(|c| c.norm_sqr()))
}

/// η = ∫|Ω_out|² / ∫|Ω_in|² on a common uniform grid.
pub fn transmission(omega_in: &[Complex64], omega_out: &[Complex64]) -> Result<f64> {
    if omega_in.len() != omega_out.len() {
        return Err(Error::invalid("omega_out", "input and output must share the time grid"));
    }
    let e_in = energy(omega_in);
    if !(e_in > 0.0) {
        return Err(Error::invalid("omega_in", "zero input energy"));
    }
    Ok(energy(omega_out) / e_in)
}

/// F = |∫Ω_in* Ω_out|² / (∫|Ω_in|² ∫|Ω_out|²), a scale-invariant shape overlap.
///
/// The input is conjugated so that F is also invariant under a constant
/// phase; for a real input this is the plain product overlap.
pub fn fidelity(omega_in: &[Complex64], omega_out: &[Complex64]) -> Result<f64> {
    if omega_in.len() != omega_out.len() {
        return Err(Error::invalid("omega_out", "input and output must share the time grid"));
    }
    let e_in = energy(omega_in);
    let e_out = energy(omega_out);
    if !(e_in > 0.0) {
        return Err(Error::invalid("omega_in", "zero input energy"));
    }
    if !(e_out > 0.0) {
        return Err(Error::invalid("omega_out", "zero output energy"));
    }
    let n = omega_in.len();
    let overlap: Complex64 = omega_in
        .iter()
        .zip(omega_out)
        .enumerate()
        .map(|(i, (a, b))| {
            let w = if i == 0 || i + 1 == n { 0.5 } else { 1.0 };
            a.conj() * b * w
        })
        .sum();
    Ok((overlap.norm_sqr() / (e_in * e_out)).min(1.0))
}
